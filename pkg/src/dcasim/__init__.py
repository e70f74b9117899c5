"""Condensing-aggregation solver on an epsilon-cell grid."""

from .analysis import (ConvergenceTable, ErrorReport, MomentBoundReport,
                       estimate_order, moment_diagnostics, rel_l1_error)
from .exact import ExactCase, exact_solution, has_closed_form, initial_profile
from .grid import Grid, build_grid, cell_of, r_eps
from .integrator import IntegrationError, IntegratorConfig, StepStats, integrate
from .kernels import (DiscreteKernel, HypothesisReport, KernelSpec, discretize,
                      eval_C, eval_K, probe_hypotheses)
from .rhs import eval_rhs, mass_defect_rate, rhs_vector, weak_form_rate
from .runs import (RunConfig, SimulationRun, SweepResult, kernel_for_case,
                   run_simulation, run_sweep)
from .state import (DiscreteState, MomentSeries, ProjectionLoss, StepFunction,
                    moment, project_initial, reconstruct)

__version__ = "0.1.0"

"""Numerical laboratory for time discretizations of stiff anisotropic
transport: four schemes for the field-aligned toy model, two for the
rigid-rotation toy model, with exact references, stability and conditioning
diagnostics, and a reproducible CSV experiment runner."""

__version__ = "0.1.0"

from .grid import Field2D, Grid2D, make_grid2d, sample, wrap
from .linalg import (ConvergenceError, CyclicTridiag, SingularMatrixError,
                     SolveStats, SparseMatrix, assemble, cond2, dft_y,
                     dft_wavenumbers, idft_y, solve_cyclic, solve_sparse)
from .aligned import (AlignedModel, exact_aligned, ic_constant, ic_two_mode,
                      limit_aligned, y_average)
from .aligned_schemes import (AlignedScheme, AlignedSchemeConfig, LagrangeState,
                              MicroMacroState, run_aligned, step_fourier,
                              step_imex, step_lagrange_aligned, step_micromacro,
                              upwind_x)
from .rotating import (RotatingModel, circle_average, exact_rotating,
                       ic_gaussian, rotate)
from .rotating_schemes import (RotatingScheme, RotatingSchemeConfig, UpwindSplit,
                               assemble_imp, assemble_lagrange_rot, run_rotating,
                               step_imp, step_lagrange_rotating,
                               upwind_rotation_apply, upwind_rotation_matrix)
from .analysis import (ConvergenceTable, ErrorPair, cond_sweep, error_eta,
                       error_gamma, fit_loglog_slope, measure_xi, xi_imex)
from .results import RunResult, StepRecord
from .experiments import ExperimentConfig, run_experiment

__all__ = [
    "__version__",
    "Grid2D", "Field2D", "make_grid2d", "wrap", "sample",
    "CyclicTridiag", "SparseMatrix", "SolveStats", "solve_cyclic", "assemble",
    "solve_sparse", "cond2", "dft_y", "idft_y", "dft_wavenumbers",
    "SingularMatrixError", "ConvergenceError",
    "AlignedModel", "exact_aligned", "y_average", "limit_aligned",
    "ic_two_mode", "ic_constant",
    "AlignedScheme", "AlignedSchemeConfig", "MicroMacroState", "LagrangeState",
    "step_imex", "step_fourier", "step_micromacro", "step_lagrange_aligned",
    "run_aligned", "upwind_x",
    "RotatingModel", "rotate", "exact_rotating", "circle_average", "ic_gaussian",
    "RotatingScheme", "RotatingSchemeConfig", "UpwindSplit",
    "upwind_rotation_apply", "upwind_rotation_matrix", "assemble_imp",
    "assemble_lagrange_rot", "step_imp", "step_lagrange_rotating", "run_rotating",
    "ErrorPair", "ConvergenceTable", "error_eta", "error_gamma",
    "fit_loglog_slope", "xi_imex", "measure_xi", "cond_sweep",
    "RunResult", "StepRecord",
    "ExperimentConfig", "run_experiment",
]

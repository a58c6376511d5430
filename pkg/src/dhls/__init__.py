"""Sharp constant and optimizer of the critical discrete HLS inequality on Z^n boxes."""

from .bounds import lower_bound_uniform, slope_estimate, sphere_area, sweep, upper_bound_center
from .grid import Convention, GridSpec, Isometry, apply_isometry, isometry_group, linear_index, point_of
from .kernel import KernelOperator, Mode, dense_matrix, fast_operator, kernel_value, make_operator, quadratic_form, row_sum
from .optimizer import OptimizerResult, el_check, inequality_check, solve_optimizer

__version__ = "0.1.0"

__all__ = [
    "Convention",
    "GridSpec",
    "Isometry",
    "KernelOperator",
    "Mode",
    "OptimizerResult",
    "apply_isometry",
    "dense_matrix",
    "el_check",
    "fast_operator",
    "inequality_check",
    "isometry_group",
    "kernel_value",
    "linear_index",
    "lower_bound_uniform",
    "make_operator",
    "point_of",
    "quadratic_form",
    "row_sum",
    "slope_estimate",
    "solve_optimizer",
    "sphere_area",
    "sweep",
    "upper_bound_center",
]

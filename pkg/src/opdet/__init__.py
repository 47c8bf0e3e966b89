"""Fredholm determinants of Toda-type and windowed convolution operators on the line,
with their large-window asymptotics."""

from .fredholm import DetResult, det_refined, fredholm_det, nystrom_matrix, perturbed_inverse_det
from .kernels import KernelSpec, decay_radius
from .quadrature import Grid, build_composite, gauss_legendre, mask
from .symbol import (E_operator_route, IndexConditionError, build_symbol, check_index,
                     critical_coupling, hat_k, log_symbol_ift, szego_constants)
from .sweep import SweepConfig, constants, emit_report, run_sweep
from .wienerhopf import (correction_det, eval_factors, integrate_logdet, logderiv_trace,
                         reflection_check)

__version__ = "0.1.0"

__all__ = [
    "DetResult", "det_refined", "fredholm_det", "nystrom_matrix", "perturbed_inverse_det",
    "KernelSpec", "decay_radius",
    "Grid", "build_composite", "gauss_legendre", "mask",
    "E_operator_route", "IndexConditionError", "build_symbol", "check_index",
    "critical_coupling", "hat_k", "log_symbol_ift", "szego_constants",
    "SweepConfig", "constants", "emit_report", "run_sweep",
    "correction_det", "eval_factors", "integrate_logdet", "logderiv_trace", "reflection_check",
]

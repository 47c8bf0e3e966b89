"""Nystrom discretization and determinant engine.

A kernel ``K(x, y)`` on a :class:`~opdet.quadrature.Grid` becomes the
matrix ``sqrt(w_i) K(x_i, x_j) sqrt(w_j)``. Determinants are taken from a
partially pivoted LU factorization and accumulated as a sum of logs of the
pivots, so values like ``G**(2 alpha)`` never overflow on the way.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .quadrature import DEFAULT_N_PER_PANEL, Grid, build_composite, panel_edges

KernelFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

COND_THRESHOLD = 1e12


class NonFiniteKernelError(ValueError):
    pass


class SingularOperatorError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True, eq=False)
class NystromMatrix:
    entries: np.ndarray
    grid: Grid
    masked: np.ndarray | None = None

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True)
class DetResult:
    """A determinant together with how much to trust it.

    ``log_value`` is ``log|value|`` and ``sign`` the phase (``+-1`` for real
    operators), so ``value == sign * exp(log_value)``. ``error_estimate`` is
    the absolute change against the next coarser grid, 0 when no refinement
    was done.
    """

    value: float
    log_value: float
    sign: float = 1.0
    error_estimate: float = 0.0
    grid_size: int = 0
    singular: bool = False
    converged: bool = True
    ill_conditioned: bool = False
    cross_check: float | None = None

    @classmethod
    def from_log(cls, log_value, sign=1.0, **kw) -> "DetResult":
        if sign == 0 or log_value == -np.inf:
            return cls(0.0, -np.inf, 0.0, singular=True, **kw)
        with np.errstate(over="ignore"):
            value = sign * np.exp(log_value)
        if np.isrealobj(value) or abs(np.imag(value)) == 0:
            value = float(np.real(value))
        return cls(value, float(log_value), sign, **kw)


def nystrom_matrix(kernel: KernelFn, grid: Grid, mask: np.ndarray | None = None) -> NystromMatrix:
    x = grid.nodes
    sw = np.sqrt(grid.weights)
    n = x.size
    if mask is None:
        idx = np.arange(n)
    else:
        mask = np.asarray(mask, dtype=bool)
        idx = np.flatnonzero(mask)
    xs = x[idx]
    k = np.asarray(kernel(xs[:, None], xs[None, :]))
    k = np.broadcast_to(k, (idx.size, idx.size))
    bad = ~np.isfinite(k)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NonFiniteKernelError(
            f"kernel is not finite at node pair ({xs[i]!r}, {xs[j]!r}): {k[i, j]!r}")
    # (sw_i * sw_j) first keeps the matrix bit-symmetric for symmetric kernels.
    sub = np.multiply.outer(sw[idx], sw[idx]) * k
    if mask is None:
        entries = np.ascontiguousarray(sub)
    else:
        entries = np.zeros((n, n), dtype=sub.dtype)
        entries[np.ix_(idx, idx)] = sub
    return NystromMatrix(entries, grid, mask)


def _lu(m: np.ndarray):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        return sla.lu_factor(m, check_finite=False)


def _logdet_from_lu(lu, piv) -> tuple[float, complex | float]:
    d = np.diag(lu)
    if np.any(d == 0):
        return -np.inf, 0.0
    swaps = np.count_nonzero(piv != np.arange(piv.size))
    phase = np.prod(d / np.abs(d)) * (-1.0) ** swaps
    if np.isrealobj(lu):
        phase = float(np.sign(phase))
    return float(np.sum(np.log(np.abs(d)))), phase


def logdet_identity_plus(m: np.ndarray) -> tuple[float, complex | float]:
    """``(log|det(I + m)|, phase)`` for a square matrix ``m``."""
    m = np.asarray(m)
    a = np.eye(m.shape[0], dtype=np.result_type(m, float)) + m
    if a.size == 0:
        return 0.0, 1.0
    return _logdet_from_lu(*_lu(a))


def matrix_det(m: np.ndarray) -> DetResult:
    """``det(I + m)`` as a :class:`DetResult`."""
    log_value, sign = logdet_identity_plus(m)
    return DetResult.from_log(log_value, sign, grid_size=np.shape(m)[0])


def fredholm_det(kernel: KernelFn, grid: Grid, mask: np.ndarray | None = None) -> DetResult:
    """Nystrom approximation of ``det(I + K)`` on ``grid``.

    A singular factorization is returned as ``value=0, singular=True``.
    """
    m = nystrom_matrix(kernel, grid, mask).entries
    return matrix_det(m)


def _as_edges(domain) -> np.ndarray:
    if isinstance(domain, Grid):
        return domain.edges
    edges = np.asarray(domain, dtype=float)
    if edges.size == 2:
        return panel_edges(edges[0], edges[1])
    return edges


def det_refined(kernel: KernelFn, domain, tol: float = 1e-8,
                n_per_panel: int = DEFAULT_N_PER_PANEL, max_doublings: int = 4,
                mask=None) -> DetResult:
    """Double the nodes per panel until the determinant settles.

    ``domain`` is a Grid, panel edges, or an ``(a, b)`` pair (unit panels).
    Convergence is judged on ``log|det|`` (a relative criterion) when both
    values are nonzero, on the absolute difference otherwise. ``mask`` is a
    callable ``Grid -> bool array`` applied on every level.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    edges = _as_edges(domain)
    n = n_per_panel
    grid = build_composite(edges, n)
    prev = fredholm_det(kernel, grid, None if mask is None else mask(grid))
    for _ in range(max_doublings):
        n *= 2
        grid = build_composite(edges, n)
        cur = fredholm_det(kernel, grid, None if mask is None else mask(grid))
        err = abs(cur.value - prev.value)
        if cur.singular or prev.singular:
            delta = err
        else:
            delta = abs(cur.log_value - prev.log_value)
        if delta < tol:
            return replace(cur, error_estimate=err, converged=True)
        prev = cur
    return replace(cur, error_estimate=err, converged=False)


def _condition(lu, piv, anorm) -> float:
    gecon, = sla.get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    return np.inf if rcond == 0 else 1.0 / rcond


def perturbed_inverse_matrix_det(a: np.ndarray, b: np.ndarray,
                                 cond_threshold: float = COND_THRESHOLD) -> DetResult:
    """``det(I + (I + a)^{-1} b)`` by solving, checked against the ratio
    ``det(I + a + b) / det(I + a)``.

    ``cross_check`` holds ``|log|solve| - log|ratio||``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    n = a.shape[0]
    ia = np.eye(n, dtype=np.result_type(a, b, float)) + a
    lu, piv = _lu(ia)
    if np.any(np.diag(lu) == 0):
        raise SingularOperatorError(
            "I + A is singular, so (I + A)^{-1} B does not exist")
    cond = _condition(lu, piv, np.linalg.norm(ia, 1))
    x = sla.lu_solve((lu, piv), b, check_finite=False)
    log_solve, sign = logdet_identity_plus(x)
    log_a, _ = _logdet_from_lu(lu, piv)
    log_ab, _ = logdet_identity_plus(a + b)
    if np.isfinite(log_solve) and np.isfinite(log_ab):
        cross = abs(log_solve - (log_ab - log_a))
    else:
        cross = 0.0 if (np.isinf(log_solve) and np.isinf(log_ab)) else np.inf
    return DetResult.from_log(log_solve, sign, grid_size=n,
                              ill_conditioned=bool(cond > cond_threshold),
                              cross_check=float(cross))


def perturbed_inverse_det(a_kernel: KernelFn, b_kernel: KernelFn, grid: Grid,
                          a_mask: np.ndarray | None = None,
                          b_mask: np.ndarray | None = None,
                          cond_threshold: float = COND_THRESHOLD) -> DetResult:
    """Nystrom approximation of ``det(I + (I + A)^{-1} B)``."""
    a = nystrom_matrix(a_kernel, grid, a_mask).entries
    b = nystrom_matrix(b_kernel, grid, b_mask).entries
    return perturbed_inverse_matrix_det(a, b, cond_threshold)

"""Correction determinants ``det(I + K1)`` and ``det(I + K2)``.

Two independent routes:

* direct: ``det(I + (I + chi+ K chi+)^{-1} K11)`` by a linear solve on one
  truncated grid (:func:`correction_det`);
* coupling path: integrate the logarithmic derivative
  ``tr[(I + c K_-)^{-1} K_- - (I + c chi+ K chi+)^{-1} chi+ K chi+]`` from
  ``c = 0`` (:func:`integrate_logdet`). The first resolvent may also be
  built from the factorization ``K_- = M N`` of the toda kernel, using
  ``(I + c K_-)^{-1} K_- = M (I + c N M)^{-1} N``.

Neither trace above exists on its own; only the trace of the difference
does, so both resolvents are always formed on the same grid and subtracted
before the diagonal is summed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
import numpy as np
import scipy.linalg as sla

from .fredholm import (COND_THRESHOLD, DetResult, SingularOperatorError, _condition,
                       _lu, nystrom_matrix, perturbed_inverse_det)
from .kernels import KernelSpec, decay_radius
from .quadrature import DEFAULT_N_PER_PANEL, Grid, build_composite, line_grid, panel_edges
from .symbol import build_symbol, require_index

EULER_GAMMA = 0.57721566490153286061
TRACE_AT_ZERO = -EULER_GAMMA - math.log(2.0)
TRUNCATION_TOL = 1e-14


class SingularPathError(np.linalg.LinAlgError):
    def __init__(self, message, coupling=None):
        super().__init__(message)
        self.coupling = coupling


def _check(which):
    if which not in ("K1", "K2"):
        raise ValueError(f"which must be 'K1' or 'K2', got {which!r}")


def correction_grid(spec: KernelSpec, which: str = "K1", L: float | None = None,
                    n_per_panel: int = DEFAULT_N_PER_PANEL, tol: float = TRUNCATION_TOL,
                    width: float = 1.0) -> Grid:
    """Grid for the ``K1`` (or mirrored ``K2``) problem.

    Covers ``[-L_minus, L]`` for ``K1``, where ``L_minus`` comes from the
    double-exponential left tail of ``K11`` and ``L`` defaults to its
    exponential right tail at unit coupling. The ``K2`` grid is the exact
    mirror image.
    """
    _check(which)
    lo, hi = decay_radius(spec.with_lam(1.0), "K11", tol=tol)
    if L is not None:
        hi = float(L)
    edges = panel_edges(lo, hi, width)
    if which == "K2":
        edges = -edges[::-1]
    return build_composite(edges, n_per_panel)


@dataclass(frozen=True)
class HalfLineOp:
    """``chi+ K chi+`` (or ``chi- K chi-``) as a Nystrom matrix on a whole-line grid."""

    grid: Grid
    matrix: np.ndarray
    side: str

    @classmethod
    def build(cls, spec: KernelSpec, grid: Grid, side: str = "plus") -> "HalfLineOp":
        m = nystrom_matrix(spec.limit(), grid, grid.mask(side)).entries
        return cls(grid, m, side)

    def operator(self) -> np.ndarray:
        """Matrix of ``W = I + chi K chi``."""
        return np.eye(len(self.grid)) + self.matrix


def _half_side(which):
    return "plus" if which == "K1" else "minus"


def _corr_sel(which):
    return "K11" if which == "K1" else "K22"


def correction_det(spec: KernelSpec, which: str = "K1", L: float | None = None,
                   n_per_panel: int = DEFAULT_N_PER_PANEL, tol: float = 1e-12,
                   refine: bool = True, check_symbol: bool = True) -> DetResult:
    """``det(I + K1)`` or ``det(I + K2)`` by the direct solve route.

    With ``refine`` the problem is solved at ``n_per_panel`` and twice that;
    the finer value is returned with the difference as error estimate.
    A vanishing determinant (``I + K_-`` singular) comes back as
    ``singular=True``, not as an exception.
    """
    _check(which)
    if spec.family == "window" or spec.lam == 0:
        return DetResult(1.0, 0.0, grid_size=0)
    if check_symbol:
        require_index(build_symbol(spec))

    def solve(n):
        g = correction_grid(spec, which, L, n)
        return perturbed_inverse_det(spec.limit(), spec.correction(_corr_sel(which)), g,
                                     a_mask=g.mask(_half_side(which)))

    res = solve(n_per_panel)
    if not refine:
        return res
    fine = solve(2 * n_per_panel)
    err = abs(fine.value - res.value)
    return replace(fine, error_estimate=err, converged=err < tol * max(1.0, abs(fine.value)))


def reflection_check(spec: KernelSpec, L: float | None = None,
                     n_per_panel: int = DEFAULT_N_PER_PANEL) -> float:
    """``|det(I+K1) - det(I+K2)|`` on mirrored grids (zero by symmetry)."""
    d1 = correction_det(spec, "K1", L, n_per_panel, refine=False)
    d2 = correction_det(spec, "K2", L, n_per_panel, refine=False)
    return abs(d1.value - d2.value)


@dataclass(frozen=True)
class FactorPair:
    """``K_-`` (unit coupling) as ``M N`` through an auxiliary half-line.

    ``M(x, u)`` maps ``L^2(0, inf)`` into ``L^2(R)``, ``N(v, y)`` the other
    way; ``N(v, y) = M(y, v)``. ``sign=-1`` gives the mirrored pair for ``K_+``.
    """

    sign: float = 1.0

    def M(self, x, u):
        z = np.asarray(u, dtype=float) - self.sign * np.asarray(x, dtype=float)
        return math.sqrt(2.0) * np.exp(0.5 * z - np.exp(z))

    def N(self, v, y):
        return self.M(y, v)

    def compose_NM(self, u, v, grid: Grid):
        """``int N(u, x) M(x, v) dx`` over the nodes of ``grid``."""
        x = grid.nodes
        u = np.asarray(u, dtype=float)[..., None]
        v = np.asarray(v, dtype=float)[..., None]
        return np.sum(self.N(u, x) * self.M(x, v) * grid.weights, axis=-1)

    def compose_MN(self, x, y, grid: Grid):
        """``int_0^inf M(x, u) N(u, y) du`` over the nodes of a half-line ``grid``."""
        u = grid.nodes
        x = np.asarray(x, dtype=float)[..., None]
        y = np.asarray(y, dtype=float)[..., None]
        return np.sum(self.M(x, u) * self.N(u, y) * grid.weights, axis=-1)


def eval_factors(kind: str, a, b, sign: float = 1.0):
    """Pointwise ``M(a, b)`` or ``N(a, b)``; the half-line argument must be >= 0."""
    fp = FactorPair(sign)
    if kind == "M":
        if np.any(np.asarray(b) < 0):
            raise ValueError("M(x, u) needs u >= 0")
        return fp.M(a, b)
    if kind == "N":
        if np.any(np.asarray(a) < 0):
            raise ValueError("N(v, y) needs v >= 0")
        return fp.N(a, b)
    raise ValueError(f"kind must be 'M' or 'N', got {kind!r}")


def nm_grid(u: float, v: float, n_per_panel: int = DEFAULT_N_PER_PANEL) -> Grid:
    """x-grid for ``int N(u, x) M(x, v) dx``; the integrand peaks at ``log(e^u + e^v)``."""
    c = float(np.logaddexp(u, v))
    return line_grid(c - 6.0, c + 40.0, n_per_panel, breakpoints=(c,))


class LogDerivative:
    """Trace of the coupling derivative of ``log det(I + K1)`` at unit-coupling kernels.

    Matrices are assembled once; :meth:`__call__` costs two (direct) or
    one plus a small (factorized) linear solve per coupling.
    """

    def __init__(self, family: str = "toda", which: str = "K1", L: float | None = None,
                 n_per_panel: int = DEFAULT_N_PER_PANEL, u_margin: float = 4.0):
        _check(which)
        self.family = family
        self.which = which
        self.trivial = family == "window"
        if self.trivial:
            return
        unit = KernelSpec(family, 1.0)
        self.grid = g = correction_grid(unit, which, L, n_per_panel)
        side = _half_side(which)
        half_sel = "minus" if which == "K1" else "plus"
        self.k_half = nystrom_matrix(unit.half(half_sel), g).entries
        self.a = nystrom_matrix(unit.limit(), g, g.mask(side)).entries
        self.n = len(g)
        self.n_per_panel = n_per_panel
        self.u_len = max(abs(g.interval[0]), abs(g.interval[1])) + u_margin
        self._factors_cache = None

    def _factors(self):
        if self._factors_cache is None:
            fp = FactorPair(1.0 if self.which == "K1" else -1.0)
            ug = line_grid(0.0, self.u_len, self.n_per_panel)
            sx = np.sqrt(self.grid.weights)
            su = np.sqrt(ug.weights)
            x, u = self.grid.nodes, ug.nodes
            m = sx[:, None] * fp.M(x[:, None], u[None, :]) * su[None, :]
            nmat = su[:, None] * fp.N(u[:, None], x[None, :]) * sx[None, :]
            self._factors_cache = (m, nmat, nmat @ m)
        return self._factors_cache

    @staticmethod
    def _factor(c, k):
        """LU of ``I + c k`` and its condition number."""
        ia = np.eye(k.shape[0]) + c * k
        lu, piv = _lu(ia)
        if np.any(np.diag(lu) == 0):
            raise SingularOperatorError(f"I + c K is singular at coupling {c}")
        return (lu, piv), _condition(lu, piv, np.linalg.norm(ia, 1))

    def evaluate(self, coupling: float, route: str = "direct") -> tuple[float, float]:
        """``(trace, worst condition number)`` at ``coupling``."""
        if self.trivial:
            return 0.0, 1.0
        lu_a, cond_a = self._factor(coupling, self.a)
        wiener = sla.lu_solve(lu_a, self.a, check_finite=False)
        if route == "direct":
            lu_k, cond_k = self._factor(coupling, self.k_half)
            diag = np.diag(sla.lu_solve(lu_k, self.k_half, check_finite=False))
        elif route == "factorized":
            m, nmat, nm = self._factors()
            lu_k, cond_k = self._factor(coupling, nm)
            # diagonal of M (I + c NM)^{-1} N
            diag = np.einsum("ij,ji->i", m, sla.lu_solve(lu_k, nmat, check_finite=False))
        else:
            raise ValueError(f"unknown route {route!r}")
        return float(np.sum(diag - np.diag(wiener))), max(cond_a, cond_k)

    def __call__(self, coupling: float, route: str = "direct") -> float:
        return self.evaluate(coupling, route)[0]


def logderiv_trace(coupling: float, family: str = "toda", which: str = "K1",
                   L: float | None = None, n_per_panel: int = DEFAULT_N_PER_PANEL,
                   route: str = "direct") -> float:
    """Trace of ``(I + c K_-)^{-1} K_- - (I + c chi+ K chi+)^{-1} chi+ K chi+``."""
    return LogDerivative(family, which, L, n_per_panel)(coupling, route)


def _adaptive_simpson(f, a, b, tol, max_depth=30):
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15 * tol:
            return left + right + delta / 15.0
        return (rec(a, m, fa, flm, fm, left, tol / 2, depth + 1)
                + rec(m, b, fm, frm, fb, right, tol / 2, depth + 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)


def integrate_logdet(coupling_target: float, family: str = "toda", which: str = "K1",
                     tol: float = 1e-6, L: float | None = None,
                     n_per_panel: int = DEFAULT_N_PER_PANEL, route: str = "direct",
                     cond_threshold: float = COND_THRESHOLD) -> float:
    """``log det(I + K1)`` at ``lam = coupling_target`` by integrating the
    coupling derivative from 0, where the log-determinant vanishes."""
    if coupling_target == 0 or family == "window":
        return 0.0
    require_index(build_symbol(KernelSpec(family, coupling_target)))
    ld = LogDerivative(family, which, L, n_per_panel)

    def f(c):
        try:
            val, cond = ld.evaluate(c, route)
        except SingularOperatorError as exc:
            raise SingularPathError(
                f"resolvent singular near coupling {c:.6g}", c) from exc
        if cond > cond_threshold:
            raise SingularPathError(
                f"resolvent ill-conditioned (cond {cond:.3g}) near coupling {c:.6g}", c)
        return val

    return _adaptive_simpson(f, 0.0, float(coupling_target), tol / 4)

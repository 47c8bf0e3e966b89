"""Scalar symbol calculus for the limit convolution kernel.

Fourier conventions used throughout::

    k_hat(xi) = int exp(+i x xi) k(x) dx
    s(x)      = (2 pi)^{-1} int exp(-i x xi) log sigma(xi) d xi

With these, ``s(0) = log G`` reproduces ``log det W_alpha ~ 2 alpha k(0)``
to first order in the coupling, and the two routes to ``E`` agree.

For ``k(d) = lam sech(d/2)`` the transform is ``2 pi lam sech(pi xi)``, so
``sigma`` first touches zero at ``lam = -1/(2 pi)``; :func:`critical_coupling`
finds that point numerically from the sampled symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev

from .fredholm import logdet_identity_plus, nystrom_matrix
from .kernels import KernelSpec, decay_radius, eval_limit
from .quadrature import build_composite, line_grid, panel_edges

DEFAULT_XI_MAX = 16.0
DEFAULT_SAMPLES = 2**14 + 1  # odd, so xi = 0 is a sample
MAX_PHASE_STEP = math.pi / 2


class IndexConditionError(ValueError):
    """The symbol vanishes or winds; the half-line operators are not invertible."""

    def __init__(self, message, check=None):
        super().__init__(message)
        self.check = check


class SamplingError(ValueError):
    pass


def hat_k_closed(spec: KernelSpec, xi):
    return 2.0 * math.pi * spec.lam / np.cosh(math.pi * np.asarray(xi, dtype=float))


def hat_k_quadrature(spec: KernelSpec, xi, tol: float = 1e-15, n_per_panel: int = 20):
    """``int exp(i x xi) k(x) dx`` by composite Gauss-Legendre on the truncated line."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    _, L = decay_radius(spec.with_lam(1.0), "limit", tol=tol)
    g = line_grid(0.0, L, n_per_panel)
    kx = eval_limit(spec, g.nodes) * g.weights
    # k is even, so only the cosine part survives
    out = 2.0 * np.cos(np.outer(xi, g.nodes)) @ kx
    return out


def hat_k(spec: KernelSpec, xi, method: str = "closed"):
    """Fourier transform of the limit kernel.

    ``method="closed"`` is the fast path ``2 pi lam sech(pi xi)``,
    ``"quadrature"`` integrates the definition numerically.
    """
    if method == "closed":
        return hat_k_closed(spec, xi)
    if method == "quadrature":
        out = hat_k_quadrature(spec, xi)
        return out if np.ndim(xi) else float(out[0])
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True, eq=False)
class SymbolData:
    xi: np.ndarray
    h: float
    sigma: np.ndarray
    min_abs: float
    winding: int | None
    crossings: tuple[float, ...] = ()
    closed_form: bool = True
    log_sigma: np.ndarray | None = field(default=None, repr=False)
    spec: KernelSpec | None = None

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.sigma.imag == 0))

    def trapezoid_weights(self) -> np.ndarray:
        c = np.full(self.xi.size, self.h)
        c[0] = c[-1] = 0.5 * self.h
        return c


def _segment_distance(a, b):
    """Distance from the origin to the segment [a, b] in the complex plane."""
    d = b - a
    t = np.clip(-np.real(np.conj(a) * d) / np.abs(d) ** 2, 0.0, 1.0)
    return np.abs(a + t * d)


def unwrap_symbol(xi, sigma):
    """Continuous argument of ``sigma`` along ``xi``.

    Returns ``(phase, crossings)``. A step whose phase jump exceeds pi/2 is
    accepted only as a zero crossing, i.e. when the chord between the two
    samples passes through the origin; otherwise the sampling is too coarse.
    """
    phase = np.angle(sigma)
    step = np.diff(phase)
    step = (step + math.pi) % (2 * math.pi) - math.pi
    big = np.flatnonzero(np.abs(step) > MAX_PHASE_STEP)
    crossings = []
    if big.size:
        a, b = sigma[big], sigma[big + 1]
        dist = _segment_distance(a, b)
        scale = np.maximum(np.abs(a), np.abs(b))
        through = dist <= 1e-9 * scale
        if not np.all(through):
            j = big[~through][0]
            raise SamplingError(
                f"phase of sigma jumps by {step[j]:.3f} between xi={xi[j]:.6g} and "
                f"xi={xi[j + 1]:.6g}; use more samples")
        for j in big:
            fa, fb = abs(sigma[j]), abs(sigma[j + 1])
            crossings.append(float(xi[j] + (xi[j + 1] - xi[j]) * fa / (fa + fb)))
    return np.concatenate([[phase[0]], phase[0] + np.cumsum(step)]), tuple(crossings)


def build_symbol(spec: KernelSpec, xi_max: float = DEFAULT_XI_MAX,
                 m: int = DEFAULT_SAMPLES, closed_form: bool = True) -> SymbolData:
    if m < 3:
        raise ValueError("need at least three samples")
    xi = np.linspace(-xi_max, xi_max, m)
    h = float(xi[1] - xi[0])
    khat = hat_k(spec, xi, "closed" if closed_form else "quadrature")
    sigma = (1.0 + khat).astype(complex)
    phase, crossings = unwrap_symbol(xi, sigma)
    min_abs = float(np.min(np.abs(sigma)))
    if crossings:
        winding = None
        log_sigma = None
    else:
        winding = int(round((phase[-1] - phase[0]) / (2 * math.pi)))
        log_sigma = np.log(np.abs(sigma)) + 1j * phase
    return SymbolData(xi, h, sigma, min_abs, winding, crossings, closed_form,
                      log_sigma, spec)


@dataclass(frozen=True)
class IndexCheck:
    passed: bool
    min_abs: float
    winding: int | None
    crossings: tuple[float, ...]
    floor: float

    def describe(self) -> str:
        if self.passed:
            return f"index ok: min|sigma|={self.min_abs:.6g}, winding=0"
        parts = [f"min|sigma|={self.min_abs:.6g} (floor {self.floor:g})"]
        if self.crossings:
            pts = ", ".join(f"{c:.6g}" for c in self.crossings)
            parts.append(f"sigma crosses zero near xi = {pts}")
        else:
            parts.append(f"winding={self.winding}")
        return "index condition fails: " + "; ".join(parts)


def check_index(sd: SymbolData, floor: float = 1e-6) -> IndexCheck:
    passed = (not sd.crossings) and sd.min_abs > floor and sd.winding == 0
    return IndexCheck(bool(passed), sd.min_abs, sd.winding, sd.crossings, floor)


def require_index(sd: SymbolData, floor: float = 1e-6) -> IndexCheck:
    chk = check_index(sd, floor)
    if not chk.passed:
        raise IndexConditionError(chk.describe(), chk)
    return chk


def _ift(sd: SymbolData, values: np.ndarray, x, chunk: int = 256):
    """``(2 pi)^{-1} int exp(-i x xi) values(xi) d xi`` by the trapezoid rule.

    Returns ``(f(x), f(-x))``; both come out of the same cosine/sine sums.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = sd.trapezoid_weights() * values / (2 * math.pi)
    plus = np.empty(x.size, dtype=complex)
    minus = np.empty(x.size, dtype=complex)
    for lo in range(0, x.size, chunk):
        ph = np.outer(x[lo:lo + chunk], sd.xi)
        c = np.cos(ph) @ v
        s = np.sin(ph) @ v
        plus[lo:lo + chunk] = c - 1j * s
        minus[lo:lo + chunk] = c + 1j * s
    return plus, minus


def log_symbol_ift(sd: SymbolData, x_grid) -> np.ndarray:
    """``s(x)``: inverse transform of the continuous ``log sigma``."""
    require_index(sd)
    return _ift(sd, sd.log_sigma, x_grid)[0]


def symbol_inverse_kernel(sd: SymbolData, d) -> np.ndarray:
    """Kernel whose symbol is ``1/sigma - 1``, sampled at offsets ``d``."""
    require_index(sd)
    return _ift(sd, 1.0 / sd.sigma - 1.0, d)[0]


@dataclass(frozen=True, eq=False)
class SzegoConstants:
    logG: float
    G: float
    logE: float
    E: float
    x: np.ndarray
    s_samples: np.ndarray


def szego_constants(sd: SymbolData, x_max: float = 80.0, n_per_panel: int = 20) -> SzegoConstants:
    """``log G = s(0)`` and ``log E = int_0^inf x s(x) s(-x) dx``."""
    require_index(sd)
    logG = complex(np.sum(sd.trapezoid_weights() * sd.log_sigma) / (2 * math.pi))
    g = line_grid(0.0, x_max, n_per_panel)
    s_pos, s_neg = _ift(sd, sd.log_sigma, g.nodes)
    logE = complex(np.sum(g.weights * g.nodes * s_pos * s_neg))
    if sd.is_real:
        logG, logE = logG.real, logE.real
    x = np.concatenate([-g.nodes[::-1], g.nodes])
    s = np.concatenate([s_neg[::-1], s_pos])
    return SzegoConstants(logG, float(np.exp(np.real(logG))), logE,
                          float(np.exp(np.real(logE))), x, s)


class _PanelChebyshev:
    """Piecewise Chebyshev interpolant of a smooth function on ``[a, b]``."""

    def __init__(self, f, a, b, width=1.0, degree=24):
        self.edges = panel_edges(a, b, width)
        t = np.cos(np.pi * (np.arange(degree) + 0.5) / degree)
        lo, hi = self.edges[:-1, None], self.edges[1:, None]
        pts = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t
        vals = np.asarray(f(pts.ravel())).reshape(pts.shape)
        self.coef = np.array([chebyshev.chebfit(t, v, degree - 1) for v in vals])

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        idx = np.clip(np.searchsorted(self.edges, d, side="right") - 1, 0, len(self.edges) - 2)
        lo, hi = self.edges[idx], self.edges[idx + 1]
        t = (2 * d - lo - hi) / (hi - lo)
        c = self.coef[idx]
        b1 = np.zeros(d.shape, dtype=c.dtype)
        b2 = np.zeros(d.shape, dtype=c.dtype)
        for k in range(c.shape[-1] - 1, 0, -1):
            b1, b2 = c[..., k] + 2 * t * b1 - b2, b1
        return c[..., 0] + t * b1 - b2


def E_operator_route(spec: KernelSpec, L: float = 30.0, n_per_panel: int = 40,
                     sd: SymbolData | None = None, keep: float = 0.5) -> float:
    """``E`` as ``det(W(sigma) W(1/sigma))`` on the half-line.

    Both factors are discretized on ``[0, L]``. Their finite-section product
    also picks up the far edge at ``L`` (its determinant tends to ``E**2``),
    so the product is compressed to ``[0, keep * L]`` before taking the
    determinant; the far-edge leak into that block is ``O(exp(-(1-keep) L / 2))``.
    """
    sd = build_symbol(spec) if sd is None else sd
    require_index(sd)
    if spec.lam == 0:
        return 1.0
    g = build_composite(panel_edges(0.0, L), n_per_panel)
    inv_kernel = _PanelChebyshev(lambda d: symbol_inverse_kernel(sd, d), -L, L)
    a = nystrom_matrix(spec.limit(), g).entries
    b = nystrom_matrix(lambda x, y: inv_kernel(x - y), g).entries
    n = len(g)
    prod = (np.eye(n) + a) @ (np.eye(n) + b)
    k = g.nodes < keep * L
    log_value, phase = logdet_identity_plus(prod[np.ix_(k, k)] - np.eye(int(k.sum())))
    value = phase * np.exp(log_value)
    return float(np.real(value))


def critical_coupling(family: str = "toda", lo: float = -1.0, hi: float = 0.0,
                      tol: float = 1e-12, xi_max: float = DEFAULT_XI_MAX,
                      m: int = DEFAULT_SAMPLES) -> float:
    """Most negative coupling at which the sampled symbol still passes the index check.

    Bisects on the pass/fail of :func:`check_index` (floor 0) between a
    failing ``lo`` and a passing ``hi``.
    """
    def ok(lam):
        return check_index(build_symbol(KernelSpec(family, lam), xi_max, m), 0.0).passed

    if ok(lo) or not ok(hi):
        raise ValueError("bisection needs a failing lower and a passing upper coupling")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)

"""The two built-in kernel families.

``toda`` is the cylindrical-Toda example written on the whole line
(``u = e^x``), ``window`` the classical truncated-convolution family.
Both share the limit kernel ``k(d) = lam * sech(d / 2)``.

All evaluators broadcast over numpy arrays and are written so that
swapping ``x`` and ``y`` (and, for ``toda``, reflecting ``x, y -> -x, -y``)
gives bit-identical results: sums of exponentials are grouped per variable
before the two groups are added.

The point 0 belongs to the plus half-line. Quadrature nodes never sit on
0, so this only matters for direct pointwise calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

Family = Literal["toda", "window"]
KernelFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

FAMILIES = ("toda", "window")
SELECTORS = ("limit", "K_alpha", "K_plus", "K_minus", "K11", "K22")


@dataclass(frozen=True)
class KernelSpec:
    family: Family = "toda"
    lam: float = 0.05

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not math.isfinite(self.lam):
            raise ValueError(f"coupling must be finite, got {self.lam}")

    def with_lam(self, lam: float) -> "KernelSpec":
        return KernelSpec(self.family, float(lam))

    # Callables of (x, y) used by the operator modules.

    def limit(self) -> KernelFn:
        return lambda x, y: eval_limit(self, np.subtract(x, y))

    def window(self, alpha: float) -> KernelFn:
        return lambda x, y: eval_window_kernel(self, alpha, x, y)

    def half(self, side: str) -> KernelFn:
        return lambda x, y: eval_half_limit(self, side, x, y)

    def correction(self, which: str) -> KernelFn:
        return lambda x, y: eval_correction_kernel(self, which, x, y)

    def kernel(self, which: str, alpha: float = 0.0) -> KernelFn:
        if which == "limit":
            return self.limit()
        if which == "K_alpha":
            return self.window(alpha)
        if which == "K_plus":
            return self.half("plus")
        if which == "K_minus":
            return self.half("minus")
        if which in ("K11", "K22"):
            return self.correction(which)
        raise ValueError(f"unknown kernel selector {which!r}")


def _sech_half(d):
    return 1.0 / np.cosh(0.5 * np.asarray(d, dtype=float))


def _plus(x):
    return np.asarray(x) >= 0


def _minus(x):
    return np.asarray(x) < 0


def eval_limit(spec: KernelSpec, d):
    """Translation-invariant limit kernel ``lam * sech(d/2)``."""
    return spec.lam * _sech_half(d)


def eval_window_kernel(spec: KernelSpec, alpha: float, x, y):
    """Kernel of ``K_alpha`` at ``(x, y)``."""
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    base = eval_limit(spec, x - y)
    if spec.family == "window":
        inside = (np.abs(x) < alpha) & (np.abs(y) < alpha)
        return np.where(inside, base, 0.0)
    fx = np.exp(x - alpha) + np.exp(-x - alpha)
    fy = np.exp(y - alpha) + np.exp(-y - alpha)
    return np.exp(-(fx + fy)) * base


def eval_half_limit(spec: KernelSpec, side: str, x, y):
    """Kernel of ``K_+`` (``side="plus"``) or ``K_-`` (``side="minus"``)."""
    if side not in ("plus", "minus"):
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    base = eval_limit(spec, x - y)
    if spec.family == "window":
        # K_+ lives on the minus half-line, K_- on the plus half-line.
        on = _minus if side == "plus" else _plus
        return np.where(on(x) & on(y), base, 0.0)
    if side == "plus":
        return np.exp(-(np.exp(x) + np.exp(y))) * base
    return np.exp(-(np.exp(-x) + np.exp(-y))) * base


def eval_correction_kernel(spec: KernelSpec, which: str, x, y):
    """``K11 = K_- - chi+ K chi+`` or ``K22 = K_+ - chi- K chi-``."""
    if which not in ("K11", "K22"):
        raise ValueError(f"which must be 'K11' or 'K22', got {which!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if spec.family == "window":
        return np.zeros(np.broadcast(x, y).shape)
    base = eval_limit(spec, x - y)
    if which == "K11":
        u = np.exp(-x) + np.exp(-y)
        on = _plus(x) & _plus(y)
    else:
        u = np.exp(x) + np.exp(y)
        on = _minus(x) & _minus(y)
    # K_-/+ minus the masked limit kernel; expm1 avoids cancellation deep in the quadrant
    return np.where(on, np.expm1(-u), np.exp(-u)) * base


@dataclass(frozen=True)
class DecayProfile:
    """How a kernel's diagonal dies off on one side.

    ``double_exponential``: ``exp(-exp(rate * (|x| - offset)))``.
    ``exponential``: ``amplitude * exp(-rate * |x|)``.
    ``compact``: identically zero beyond ``cutoff``.
    """

    side: Literal["left", "right"]
    kind: Literal["double_exponential", "exponential", "compact"]
    rate: float
    offset: float = 0.0
    amplitude: float = 1.0
    cutoff: float | None = None

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("decay rate must be positive")
        if self.kind == "compact" and self.cutoff is None:
            raise ValueError("compact decay needs a cutoff")

    def radius(self, tol: float) -> float:
        if self.kind == "compact":
            return float(self.cutoff)
        if self.kind == "double_exponential":
            return self.offset + math.log(math.log(1.0 / tol)) / self.rate
        if self.amplitude <= tol:
            return 1.0
        return max(1.0, math.log(self.amplitude / tol) / self.rate)


def decay_profile(spec: KernelSpec, which: str, alpha: float = 0.0) -> tuple[DecayProfile, DecayProfile]:
    """(left, right) decay profiles of the chosen kernel's diagonal."""
    lam = abs(spec.lam)
    if which == "limit":
        # integral of |lam| sech(d/2) beyond L is below 4|lam| e^{-L/2}
        p = dict(kind="exponential", rate=0.5, amplitude=4.0 * lam)
        return DecayProfile("left", **p), DecayProfile("right", **p)
    if spec.family == "window":
        if which == "K_alpha":
            return (DecayProfile("left", "compact", 1.0, cutoff=alpha),
                    DecayProfile("right", "compact", 1.0, cutoff=alpha))
        if which in ("K11", "K22"):
            return (DecayProfile("left", "compact", 1.0, cutoff=0.0),
                    DecayProfile("right", "compact", 1.0, cutoff=0.0))
        # chi- K chi- / chi+ K chi+: compact on one side only
        lim = decay_profile(spec, "limit")
        if which == "K_plus":
            return lim[0], DecayProfile("right", "compact", 1.0, cutoff=0.0)
        if which == "K_minus":
            return DecayProfile("left", "compact", 1.0, cutoff=0.0), lim[1]
        raise ValueError(f"unknown kernel selector {which!r}")
    if which == "K_alpha":
        p = dict(kind="double_exponential", rate=1.0, offset=alpha)
        return DecayProfile("left", **p), DecayProfile("right", **p)
    # K11 / K_- decay first-order like 2|lam| e^{-x} on the right and
    # double-exponentially on the left; K22 / K_+ are the mirror image.
    dexp = dict(kind="double_exponential", rate=1.0)
    expo = dict(kind="exponential", rate=1.0, amplitude=2.0 * lam)
    if which in ("K11", "K_minus"):
        return DecayProfile("left", **dexp), DecayProfile("right", **expo)
    if which in ("K22", "K_plus"):
        return DecayProfile("left", **expo), DecayProfile("right", **dexp)
    raise ValueError(f"unknown kernel selector {which!r}")


def decay_radius(spec: KernelSpec, which: str, alpha: float = 0.0,
                 tol: float = 1e-10) -> tuple[float, float]:
    """Truncation interval ``(-L_minus, L_plus)`` whose neglected tails are below ``tol``."""
    if not 0 < tol < 1:
        raise ValueError(f"tol must lie in (0, 1), got {tol}")
    left, right = decay_profile(spec, which, alpha)
    return -left.radius(tol), right.radius(tol)

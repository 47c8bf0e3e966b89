"""Composite Gauss-Legendre grids and half-line masks.

Every operator in the package is discretized on a :class:`Grid`: a
concatenation of Gauss-Legendre panels over a truncated interval. Panel
edges always include 0 when the interval straddles it, so the masks for
``(-inf, 0)`` and ``(0, inf)`` split the nodes cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

DEFAULT_N_PER_PANEL = 20


@lru_cache(maxsize=64)
def _reference_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = leggauss(n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@dataclass(frozen=True, eq=False)
class Grid:
    """Quadrature nodes and weights on ``interval`` built from ``panels``."""

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]
    panels: tuple[tuple[float, float], ...]
    n_per_panel: int

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self) -> int:
        return self.nodes.size

    @property
    def edges(self) -> np.ndarray:
        return np.array([p[0] for p in self.panels] + [self.panels[-1][1]])

    def mask(self, which) -> np.ndarray:
        return mask(self, which)

    def refined(self, factor: int = 2) -> "Grid":
        """Same panels, ``factor`` times as many nodes per panel."""
        return build_composite(self.edges, self.n_per_panel * factor)


def gauss_legendre(n: int, a: float, b: float) -> Grid:
    """``n``-point Gauss-Legendre rule on ``[a, b]`` (exact to degree 2n-1)."""
    if n < 1:
        raise ValueError(f"need at least one node, got n={n}")
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    return build_composite([a, b], n)


def build_composite(panel_edges, n_per_panel: int = DEFAULT_N_PER_PANEL) -> Grid:
    edges = np.asarray(panel_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("need at least two panel edges")
    if n_per_panel < 1:
        raise ValueError(f"need at least one node per panel, got {n_per_panel}")
    if not np.all(np.diff(edges) > 0):
        raise ValueError("panel edges must be strictly increasing")
    t, w = _reference_rule(int(n_per_panel))
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * t).ravel()
    weights = (half * w).ravel()
    panels = tuple((float(lo), float(hi)) for lo, hi in zip(edges[:-1], edges[1:]))
    return Grid(nodes, weights, (float(edges[0]), float(edges[-1])), panels,
                int(n_per_panel))


def panel_edges(a: float, b: float, width: float = 1.0, breakpoints=()) -> np.ndarray:
    """Edges of roughly ``width``-wide panels covering ``[a, b]``.

    0 and every entry of ``breakpoints`` that falls strictly inside the
    interval become panel edges; the gaps between them are split evenly.
    """
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    if width <= 0:
        raise ValueError("panel width must be positive")
    fixed = {float(a), float(b)}
    for p in (0.0, *breakpoints):
        if a < p < b:
            fixed.add(float(p))
    fixed = sorted(fixed)
    out = [fixed[0]]
    for lo, hi in zip(fixed[:-1], fixed[1:]):
        k = max(1, int(np.ceil((hi - lo) / width - 1e-9)))
        out.extend(np.linspace(lo, hi, k + 1)[1:].tolist())
    return np.array(out)


def line_grid(a: float, b: float, n_per_panel: int = DEFAULT_N_PER_PANEL,
              width: float = 1.0, breakpoints=()) -> Grid:
    return build_composite(panel_edges(a, b, width, breakpoints), n_per_panel)


def mask(grid: Grid, which) -> np.ndarray:
    """Boolean node selector.

    ``which`` is ``"plus"`` (``x >= 0``), ``"minus"`` (``x < 0``), ``"all"``,
    or an open interval ``(lo, hi)``; either end may be infinite.
    """
    x = grid.nodes
    if isinstance(which, str):
        if which == "plus":
            return x >= 0
        if which == "minus":
            return x < 0
        if which == "all":
            return np.ones(x.size, dtype=bool)
        raise ValueError(f"unknown mask {which!r}")
    lo, hi = which
    return (x > lo) & (x < hi)

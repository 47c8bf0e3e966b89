"""Closed-form checks that a fresh install must reproduce.

``faults`` maps a check name to an offset added to that check's closed-form
value; it exists so the harness itself can be shown to catch a bad constant.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .fredholm import fredholm_det
from .kernels import KernelSpec
from .quadrature import build_composite
from .symbol import hat_k
from .wienerhopf import TRACE_AT_ZERO, FactorPair, LogDerivative, nm_grid, reflection_check


@dataclass(frozen=True)
class Check:
    name: str
    expected: float
    actual: float
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.error < self.tol)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: expected {self.expected:.12g}, "
                f"actual {self.actual:.12g}, error {self.error:.3g} (tol {self.tol:g})")


def _hat_k(fault):
    spec = KernelSpec("toda", 1.0)
    xi = np.linspace(-5.0, 5.0, 101)
    closed = hat_k(spec, xi, "closed") + fault
    quad = hat_k(spec, xi, "quadrature")
    j = int(np.argmax(np.abs(quad - closed)))
    return Check("hat_k", closed[j], quad[j], abs(quad[j] - closed[j]), 1e-8)


def _nm_identity(fault):
    fp = FactorPair()
    pts = np.linspace(0.6, 6.0, 10)
    worst = (0.0, 0.0, 0.0)
    for u in pts:
        for v in pts:
            exact = 1.0 / np.cosh(0.5 * (u - v)) + fault
            got = float(fp.compose_NM(u, v, nm_grid(u, v)))
            if abs(got - exact) >= worst[0]:
                worst = (abs(got - exact), exact, got)
    return Check("nm_identity", worst[1], worst[2], worst[0], 1e-8)


def _trace_at_zero(fault):
    got = LogDerivative("toda")(0.0)
    exact = TRACE_AT_ZERO + fault
    return Check("trace_at_zero", exact, got, abs(got - exact), 1e-7)


def _rank_one(fault):
    g = build_composite([0.0, 1.0], 20)
    got = fredholm_det(lambda x, y: np.ones(np.broadcast(x, y).shape), g).value
    exact = 2.0 + fault
    return Check("rank_one_det", exact, got, abs(got - exact), 1e-12)


def _reflection(fault):
    spec = KernelSpec("toda", 0.5)
    diff = reflection_check(spec) + fault
    return Check("reflection", 0.0, diff, abs(diff), 1e-8)


def _factorized(fault):
    ld = LogDerivative("toda")
    direct = ld(0.3, "direct") + fault
    fact = ld(0.3, "factorized")
    return Check("factorized_trace", direct, fact, abs(direct - fact), 1e-8)


CHECKS = {
    "hat_k": _hat_k,
    "nm_identity": _nm_identity,
    "trace_at_zero": _trace_at_zero,
    "rank_one_det": _rank_one,
    "reflection": _reflection,
    "factorized_trace": _factorized,
}


def selftest(faults: dict[str, float] | None = None, out=None) -> list[Check]:
    faults = faults or {}
    unknown = set(faults) - set(CHECKS)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    results = []
    t0 = time.perf_counter()
    for name, fn in CHECKS.items():
        c = fn(faults.get(name, 0.0))
        results.append(c)
        if out is not None:
            print(c.line(), file=out)
    if out is not None:
        n_fail = sum(not c.passed for c in results)
        print(f"{len(results) - n_fail}/{len(results)} checks passed "
              f"in {time.perf_counter() - t0:.1f} s", file=out)
    return results

"""alpha-sweeps comparing ``det(I + K_alpha)`` with its predicted asymptote.

The prediction is ``G^(2 alpha) E det(I+K1) det(I+K2)``. It is carried in
log space and only exponentiated for the report, so a large ``alpha * log G``
never overflows an intermediate.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .fredholm import DetResult, det_refined
from .kernels import KernelSpec, decay_radius
from .symbol import (E_operator_route, build_symbol, check_index, require_index,
                     szego_constants)
from .wienerhopf import TRUNCATION_TOL, correction_det, integrate_logdet

COLUMNS = ("alpha", "det_direct", "logG", "logE", "det_corr1", "det_corr2",
           "predicted", "ratio", "err_estimate")


class NonConvergenceError(RuntimeError):
    def __init__(self, alpha, result):
        super().__init__(f"det(I + K_alpha) did not converge at alpha={alpha:g} "
                         f"(last change {result.error_estimate:.3g})")
        self.alpha = alpha
        self.result = result


class ReportIOError(OSError):
    pass


@dataclass
class SweepConfig:
    family: str = "toda"
    lam: float = 0.05
    alpha_min: float = 4.0
    alpha_max: float = 12.0
    alpha_step: float = 1.0
    panel_n: int = 20
    tol: float = 1e-8
    domain_L: float | None = None
    format: str = "csv"
    out: str | None = None
    jobs: int = 1
    predict_only: bool = False

    def __post_init__(self):
        if self.family not in ("toda", "window"):
            raise ValueError(f"unknown family {self.family!r}")
        if not 0 < self.tol < 1:
            raise ValueError("tol must lie in (0, 1)")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")
        if self.alpha_step <= 0 or self.alpha_min <= 0 or self.alpha_max < self.alpha_min:
            raise ValueError("need 0 < alpha_min <= alpha_max and alpha_step > 0")
        if self.panel_n < 1:
            raise ValueError("panel_n must be positive")

    @property
    def alphas(self) -> list[float]:
        k = int(math.floor((self.alpha_max - self.alpha_min) / self.alpha_step + 1e-9))
        return [round(self.alpha_min + i * self.alpha_step, 12) for i in range(k + 1)]

    @property
    def spec(self) -> KernelSpec:
        return KernelSpec(self.family, self.lam)


@dataclass
class ReportRow:
    alpha: float
    det_direct: float
    logG: float
    logE: float
    det_corr1: float
    det_corr2: float
    predicted: float
    ratio: float
    err_estimate: float
    log_direct: float = field(default=math.nan, repr=False)
    log_predicted: float = field(default=math.nan, repr=False)

    def values(self) -> tuple:
        return tuple(getattr(self, c) for c in COLUMNS)


@dataclass
class SweepReport:
    config: SweepConfig
    rows: list[ReportRow]
    corr1: DetResult | None = None
    corr2: DetResult | None = None


def _rel(res: DetResult) -> float:
    if res.value == 0:
        return math.inf
    return res.error_estimate / abs(res.value)


def make_row(alpha, direct: DetResult | None, logG, logE,
             corr1: DetResult, corr2: DetResult) -> ReportRow:
    log_pred = 2.0 * alpha * logG + logE + corr1.log_value + corr2.log_value
    sign_pred = float(np.sign(corr1.sign * corr2.sign))
    predicted = sign_pred * (math.exp(log_pred) if log_pred < 709.7 else math.inf)
    if direct is None:
        return ReportRow(alpha, math.nan, logG, logE, corr1.value, corr2.value,
                         predicted, math.nan, math.nan, math.nan, log_pred)
    if sign_pred == 0:
        ratio = math.inf if direct.value != 0 else math.nan
    elif direct.singular:
        ratio = 0.0
    else:
        ratio = direct.sign * sign_pred * math.exp(direct.log_value - log_pred)
    err = _rel(direct) + _rel(corr1) + _rel(corr2)
    return ReportRow(alpha, direct.value, logG, logE, corr1.value, corr2.value,
                     predicted, ratio, err, direct.log_value, log_pred)


def direct_det(spec: KernelSpec, alpha: float, tol: float = 1e-8,
               n_per_panel: int = 20) -> DetResult:
    """``det(I + K_alpha)`` on its decay-truncated domain with grid doubling."""
    lo, hi = decay_radius(spec, "K_alpha", alpha, TRUNCATION_TOL)
    return det_refined(spec.window(alpha), (lo, hi), tol=tol, n_per_panel=n_per_panel)


def run_sweep(cfg: SweepConfig) -> SweepReport:
    """One row per alpha, ascending.

    Raises :class:`~opdet.symbol.IndexConditionError` if the symbol fails the
    index check and :class:`NonConvergenceError` if a direct determinant does
    not settle within the doubling cap.
    """
    spec = cfg.spec
    sd = build_symbol(spec)
    require_index(sd)
    consts = szego_constants(sd)
    corr1 = correction_det(spec, "K1", cfg.domain_L, cfg.panel_n, check_symbol=False)
    corr2 = correction_det(spec, "K2", cfg.domain_L, cfg.panel_n, check_symbol=False)

    def one(alpha):
        if cfg.predict_only:
            return make_row(alpha, None, consts.logG, consts.logE, corr1, corr2)
        res = direct_det(spec, alpha, cfg.tol, cfg.panel_n)
        if not res.converged:
            raise NonConvergenceError(alpha, res)
        return make_row(alpha, res, consts.logG, consts.logE, corr1, corr2)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(cfg.jobs) as pool:
            rows = list(pool.map(one, cfg.alphas))
    else:
        rows = [one(a) for a in cfg.alphas]
    rows.sort(key=lambda r: r.alpha)
    return SweepReport(cfg, rows, corr1, corr2)


def constants(family: str, lam: float, L: float | None = None, n_per_panel: int = 20,
              path_tol: float = 1e-8, E_L: float = 30.0, E_n: int = 40) -> dict:
    """Every alpha-independent constant, each by two routes where one exists."""
    spec = KernelSpec(family, lam)
    sd = build_symbol(spec)
    chk = require_index(sd)
    c = szego_constants(sd)
    E_op = E_operator_route(spec, E_L, E_n, sd)
    rec = {
        "family": family,
        "lambda": lam,
        "min_abs_sigma": chk.min_abs,
        "winding": chk.winding,
        "logG": c.logG,
        "logE_integral": c.logE,
        "logE_operator": math.log(E_op),
        "E_rel_diff": abs(c.E - E_op) / c.E,
    }
    for which, key in (("K1", "corr1"), ("K2", "corr2")):
        d = correction_det(spec, which, L, n_per_panel, check_symbol=False)
        path = integrate_logdet(lam, family, which, tol=path_tol, L=L, n_per_panel=n_per_panel)
        rec[f"det_{key}"] = d.value
        rec[f"log_det_{key}_direct"] = d.log_value
        rec[f"log_det_{key}_path"] = path
        rec[f"{key}_route_diff"] = abs(d.log_value - path)
    return rec


def index_diagnostics(family: str, lam: float) -> str:
    sd = build_symbol(KernelSpec(family, lam))
    return check_index(sd).describe() + f"; sigma(0) = {1 + 2 * math.pi * lam:.6g}"


def _fmt(v) -> str:
    return format(float(v), ".17g")


def render_report(report: SweepReport | list[ReportRow], fmt: str = "csv") -> str:
    rows = report.rows if isinstance(report, SweepReport) else report
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([_fmt(v) for v in r.values()])
        return buf.getvalue()
    if fmt == "json":
        data = [{k: float(v) for k, v in zip(COLUMNS, r.values())} for r in rows]
        return json.dumps(data, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(report, fmt: str = "csv", path: str | None = None) -> None:
    text = render_report(report, fmt)
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as f:
            f.write(text)
    except OSError as exc:
        raise ReportIOError(f"cannot write report to {path}: {exc}") from exc


def row_dict(row: ReportRow) -> dict:
    d = asdict(row)
    return {k: d[k] for k in COLUMNS}

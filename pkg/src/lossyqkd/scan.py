"""Threshold curves e*(p): the largest depolarising rate that still passes a check."""

from __future__ import annotations

import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .channel import ChannelParams, qber_analytic
from .protocols import get_protocol
from .sdp import SolverError
from .verifier import Mode, Outcome, VerdictReport, check_protocol

__all__ = [
    "ScanConfig",
    "ScanRow",
    "NonMonotoneError",
    "check_point",
    "scan_row",
    "threshold_scan",
    "loss_cutoff",
    "rows_to_csv",
    "rows_to_json",
    "write_rows",
    "CSV_HEADER",
]

log = logging.getLogger(__name__)

CSV_HEADER = "p,e_star,qber_star,status,iterations"
COARSE_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
_RANK = {Outcome.PRECONDITION_HOLDS: 0, Outcome.MARGINAL: 1, Outcome.NO_KEY: 2}


class NonMonotoneError(RuntimeError):
    """The verdict returns to PreconditionHolds after a NoKey at smaller e."""


@dataclass(frozen=True)
class ScanConfig:
    protocol: str
    mode: str = "two-way"
    theta: float = 0.0
    alpha: float | None = None
    p_min: float = 0.0
    p_max: float = 0.95
    p_steps: int = 21
    tol: float = 1e-4
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        Mode(self.mode)
        if not 0.0 <= self.p_min <= self.p_max <= 1.0:
            raise ValueError(f"p grid [{self.p_min}, {self.p_max}] must lie within [0, 1]")
        if self.p_steps < 1:
            raise ValueError("p_steps must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")
        get_protocol(self.protocol, self.alpha)  # validates name and alpha

    @property
    def p_grid(self) -> np.ndarray:
        if self.p_steps == 1:
            return np.array([self.p_min])
        return np.linspace(self.p_min, self.p_max, self.p_steps)


@dataclass(frozen=True)
class ScanRow:
    p: float
    e_star: float
    qber_star: float
    status: str
    iterations: int


def check_point(protocol: str, mode: str, p: float, e: float, theta: float = 0.0,
                alpha: float | None = None, **kwargs) -> VerdictReport:
    return check_protocol(get_protocol(protocol, alpha), ChannelParams(p, e, theta), mode, **kwargs)


class _Evaluator:
    def __init__(self, cfg: ScanConfig, p: float):
        self.spec = get_protocol(cfg.protocol, cfg.alpha)
        self.cfg, self.p = cfg, float(p)
        self.iterations = 0

    def __call__(self, e: float) -> Outcome:
        report = check_protocol(self.spec, ChannelParams(self.p, min(max(e, 0.0), 1.0), self.cfg.theta),
                                self.cfg.mode)
        self.iterations += report.solver["iterations"]
        return report.decision


def _row(cfg: ScanConfig, p: float, e_star: float, status: str, iterations: int) -> ScanRow:
    if math.isnan(e_star):
        q = math.nan
    else:
        q = qber_analytic(cfg.protocol, e_star, cfg.theta, cfg.alpha)
    return ScanRow(float(p), float(e_star), float(q), status, int(iterations))


def scan_row(cfg: ScanConfig, p: float) -> ScanRow:
    """Bisect one row; Marginal verdicts count as hitting the boundary."""
    ev = _Evaluator(cfg, p)
    try:
        coarse = [ev(e) for e in COARSE_GRID]
        ranks = [_RANK[v] for v in coarse]
        if any(b < a for a, b in zip(ranks, ranks[1:])):
            profile = ", ".join(f"e={e:g}: {v.value}" for e, v in zip(COARSE_GRID, coarse))
            raise NonMonotoneError(f"{cfg.protocol} {cfg.mode} p={p:g}: non-monotone verdicts ({profile})")
        if coarse[0] is not Outcome.PRECONDITION_HOLDS:
            return _row(cfg, p, 0.0, "lower-clamp", ev.iterations)
        if coarse[-1] is Outcome.PRECONDITION_HOLDS:
            return _row(cfg, p, 1.0, "upper-clamp", ev.iterations)
        k = ranks.index(next(r for r in ranks if r > 0))
        lo, hi = COARSE_GRID[k - 1], COARSE_GRID[k]
        if coarse[k] is Outcome.MARGINAL:
            return _row(cfg, p, hi, "marginal", ev.iterations)
        while hi - lo > cfg.tol:
            mid = 0.5 * (lo + hi)
            verdict = ev(mid)
            if verdict is Outcome.MARGINAL:
                return _row(cfg, p, mid, "marginal", ev.iterations)
            if verdict is Outcome.PRECONDITION_HOLDS:
                lo = mid
            else:
                hi = mid
        return _row(cfg, p, 0.5 * (lo + hi), "ok", ev.iterations)
    except SolverError as exc:
        log.warning("solver failure at p=%g: %s", p, exc)
        return _row(cfg, p, math.nan, "solver-failure", ev.iterations)


def threshold_scan(cfg: ScanConfig, jobs: int = 1) -> list[ScanRow]:
    """One row per p on the grid, in grid order.

    Rows are independent; ``jobs > 1`` evaluates them in worker processes.
    """
    grid = [float(p) for p in cfg.p_grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(scan_row, [cfg] * len(grid), grid))
    rows = []
    for p in grid:
        row = scan_row(cfg, p)
        log.info("p=%g e*=%.6f status=%s", row.p, row.e_star, row.status)
        rows.append(row)
    return rows


def loss_cutoff(protocol: str, mode: str = "two-way", alpha: float | None = None, theta: float = 0.0,
                e_level: float = 1e-3, tol: float = 1e-3) -> float:
    """Smallest loss p at which e* <= e_level, located by bisection in p.

    With monotone verdicts, e* <= e_level exactly when the check no longer
    passes at e = e_level.
    """
    spec = get_protocol(protocol, alpha)

    def passes(p):
        return check_protocol(spec, ChannelParams(p, e_level, theta), mode).decision is Outcome.PRECONDITION_HOLDS

    lo, hi = 0.0, 1.0
    if not passes(lo):
        return 0.0
    if passes(hi):
        return math.nan
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _fmt(x: float) -> str:
    return "%.12g" % x


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in rows:
        buf.write(f"{_fmt(r.p)},{_fmt(r.e_star)},{_fmt(r.qber_star)},{r.status},{r.iterations}\n")
    return buf.getvalue()


def rows_to_json(rows, cfg: ScanConfig | None = None) -> str:
    payload = {"rows": [asdict(r) for r in rows]}
    if cfg is not None:
        payload["config"] = {k: v for k, v in asdict(cfg).items() if k not in ("out", "format")}
    # NaN is not valid JSON; failed rows carry null instead
    for r in payload["rows"]:
        for key in ("e_star", "qber_star"):
            if isinstance(r[key], float) and math.isnan(r[key]):
                r[key] = None
    return json.dumps(payload, indent=2) + "\n"


def write_rows(rows, cfg: ScanConfig, stream=None) -> str:
    text = rows_to_csv(rows) if cfg.format == "csv" else rows_to_json(rows, cfg)
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    elif stream is not None:
        stream.write(text)
    return text

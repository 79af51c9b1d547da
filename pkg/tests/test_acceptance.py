"""Acceptance criteria 1-10, one pass/fail line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import functools
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lossyqkd.channel import ChannelParams, apply_channel, correlations, qber_analytic, tomography_data
from lossyqkd.operators import partial_transpose
from lossyqkd.protocols import get_protocol
from lossyqkd.scan import ScanConfig, loss_cutoff, scan_row
from lossyqkd.verifier import Outcome, build_equivalence_class, check, two_way_check

import _helpers
from _helpers import ALL, PB, random_density
from test_channel import qber_grid_max_error

PI8 = np.pi / 8
MODES = ("two-way", "rr", "dr")


@functools.lru_cache(maxsize=None)
def e_star(protocol, mode, p, theta=0.0, alpha=None, tol=1e-4):
    return scan_row(ScanConfig(protocol, mode, theta, alpha, tol=tol), p).e_star


def timed(fn):
    @functools.wraps(fn)
    def wrapper():
        t0 = time.perf_counter()
        ok, detail = fn()
        return ok, detail, time.perf_counter() - t0
    return wrapper


@timed
def criterion_1():
    two = e_star("six-state", "two-way", 0.0)
    rr = e_star("six-state", "rr", 0.0)
    dr = e_star("six-state", "dr", 0.0)
    ok = abs(two - 0.66) <= 0.01 and abs(rr - 0.33) <= 0.01 and abs(dr - 0.33) <= 0.01
    return ok, f"six-state e*: two-way {two:.4f}, rr {rr:.4f}, dr {dr:.4f}"


@timed
def criterion_2():
    two = e_star("four-state", "two-way", 0.0)
    rr = e_star("four-state", "rr", 0.0)
    dr = e_star("four-state", "dr", 0.0)
    ok = abs(two - 0.5) <= 0.005 and abs(rr - 0.292) <= 0.005 and abs(dr - 0.292) <= 0.005
    return ok, f"four-state e*: two-way {two:.4f}, rr {rr:.4f}, dr {dr:.4f}"


@timed
def criterion_3():
    # the curve reaches zero (hence e* <= 1e-3) inside the window around 1 - 2 alpha^2,
    # and is still strictly positive just below the window
    parts, ok = [], True
    for alpha in (0.2, 0.3, 0.4):
        target = 1 - 2 * alpha**2
        cut = loss_cutoff("two-state", "two-way", alpha=alpha, e_level=0.0, tol=1e-3)
        at_cut = e_star("two-state", "two-way", min(cut + 1e-3, 1.0), alpha=alpha)
        below = e_star("two-state", "two-way", target - 0.02, alpha=alpha)
        ok &= abs(cut - target) <= 0.01 and at_cut <= 1e-3 and below > 0
        parts.append(f"alpha={alpha}: p_cut={cut:.4f} (target {target:.2f}), e*={at_cut:.1e}")
    return ok, "; ".join(parts)


@timed
def criterion_4():
    grid = (0.0, 0.2, 0.4, 0.6, 0.8)
    worst = {}
    for name, modes in (("trine", MODES), ("amp", MODES), ("three-state", ("two-way", "dr"))):
        for mode in modes:
            d = max(abs(e_star(name, mode, p) - e_star("four-state", mode, p)) for p in grid)
            worst[f"{name}/{mode}"] = d
    ok = all(v <= 0.005 for v in worst.values())
    key = max(worst, key=worst.get)
    return ok, f"max |e* - e*_four-state| = {worst[key]:.1e} ({key})"


@timed
def criterion_5():
    parts, ok = [], True
    for alpha in (0.2, 0.4):
        c = 1 - 2 * alpha**2
        after = np.arange(c + 0.02, 0.995, 0.02 if alpha == 0.4 else 0.01)
        before = np.linspace(c - 0.1, c - 0.02, 5)
        flat = np.array([e_star("four-plus-two", "two-way", float(p), alpha=alpha) for p in after])
        slope = np.array([e_star("four-plus-two", "two-way", float(p), alpha=alpha) for p in before])
        d_after = float(np.max(np.abs(np.diff(flat))))
        d_before = float(np.max(np.abs(np.diff(slope))))
        ok &= d_after < 1e-3 and d_before >= 1e-3
        parts.append(f"alpha={alpha}: max step beyond {c:.2f} = {d_after:.1e}, before = {d_before:.1e}")
    return ok, "; ".join(parts)


@timed
def criterion_6():
    grid = (0.0, 0.4, 0.8)
    worst, amp_gap = 0.0, 0.0
    for name, alpha in ALL:
        for mode in MODES:
            d = max(abs(e_star(name, mode, p, 0.0, alpha) - e_star(name, mode, p, PI8, alpha)) for p in grid)
            if name == "amp":
                amp_gap = max(amp_gap, d)
            else:
                worst = max(worst, d)
    ok = worst <= 2e-4 and amp_gap > 0.01
    return ok, f"max theta shift (non-AMP) {worst:.1e}; AMP max shift {amp_gap:.3f}"


@timed
def criterion_7():
    worst = qber_grid_max_error()
    a = abs(qber_analytic("four-state", 0.5, 0) - 0.25)
    b = abs(qber_analytic("six-state", 0.66, 0) - 0.33)
    ok = worst < 1e-9 and a < 1e-12 and b < 1e-12
    return ok, f"grid max error {worst:.1e}; anchors {a:.1e}, {b:.1e}"


@timed
def criterion_8():
    rng = np.random.default_rng(20240601)
    agree = marginal = npt = 0
    for _ in range(200):
        w = rng.uniform(0, 1)
        rho = (1 - w) * random_density(6, rng) + w * np.eye(6) / 6
        r = two_way_check(build_equivalence_class(tomography_data(rho, PB)))
        lam = np.linalg.eigvalsh(partial_transpose(rho))[0]
        npt += lam < 0
        if r.decision is Outcome.MARGINAL:
            marginal += 1
            continue
        agree += (r.decision is Outcome.PRECONDITION_HOLDS) == (lam < 0)
    ok = agree == 200 - marginal
    return ok, f"{agree}/{200 - marginal} agree ({npt} NPT, {marginal} marginal)"


def _shipped_reports():
    for name, alpha in ALL + [("two-state", 0.4), ("four-plus-two", 0.2)]:
        spec = get_protocol(name, alpha)
        for theta in (0.0, PI8):
            for p, e in ((0.0, 0.05), (0.3, 0.2), (0.6, 0.5)):
                data = correlations(spec, apply_channel(spec, ChannelParams(p, e, theta)))
                ec = build_equivalence_class(data)
                for mode in MODES:
                    yield check(ec, mode)


@timed
def criterion_9():
    gap = wd = dres = 0.0
    zmin = np.inf
    n = infeasible = bad_witness = 0
    for r in _shipped_reports():
        res = r.result
        n += 1
        gap = max(gap, res.gap)
        wd = max(wd, max(abs(h["weak_duality"]) for h in res.history))
        dres = max(dres, res.dual_residual)
        zmin = min(zmin, float(np.linalg.eigvalsh(res.Z)[0]))
        if r.decision is Outcome.PRECONDITION_HOLDS:
            infeasible += 1
            w = r.witness
            good = (abs(w.trace - 1) < 1e-8 and abs(w.value + r.t_star) < 1e-6
                    and w.max_free_overlap < 1e-8 and min(w.certificate_min_eigenvalues.values()) >= -1e-8)
            bad_witness += not good
    ok = gap < 1e-7 and wd < 1e-8 and dres < 1e-8 and zmin >= -1e-9 and bad_witness == 0
    return ok, (f"{n} problems: gap {gap:.1e}, weak duality {wd:.1e}, dual residual {dres:.1e}, "
                f"min eig Z {zmin:.1e}; witnesses ok on {infeasible - bad_witness}/{infeasible} infeasible")


@timed
def criterion_10():
    diffs = {p: abs(e_star("two-state", "rr", p, alpha=0.4) - e_star("two-state", "dr", p, alpha=0.4))
             for p in (0.1, 0.2, 0.3, 0.4)}
    p_best = max(diffs, key=diffs.get)
    return diffs[p_best] > 0.005, f"max |e*_rr - e*_dr| = {diffs[p_best]:.4f} at p={p_best}"


CRITERIA = {
    1: (criterion_1, 30),
    2: (criterion_2, 30),
    3: (criterion_3, 120),
    4: (criterion_4, 300),
    5: (criterion_5, None),
    6: (criterion_6, None),
    7: (criterion_7, None),
    8: (criterion_8, None),
    9: (criterion_9, None),
    10: (criterion_10, None),
}


def evaluate(number):
    fn, limit = CRITERIA[number]
    ok, detail, elapsed = fn()
    if limit is not None:
        ok = ok and elapsed < limit
        detail += f" [{elapsed:.1f}s, limit {limit}s]"
    else:
        detail += f" [{elapsed:.1f}s]"
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    _helpers.ACCEPTANCE[number] = line
    print(line)
    return ok, line


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, line = evaluate(number)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(n)[0] for n in sorted(CRITERIA)]
    sys.exit(0 if all(results) else 1)

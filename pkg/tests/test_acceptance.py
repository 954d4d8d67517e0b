"""Acceptance criteria, one test each, with pinned tolerances and runtime budgets.

Each test prints a single PASS/FAIL line. Run them alone with::

    pytest tests/test_acceptance.py -v
    python tests/test_acceptance.py
"""

import math
import time

import numpy as np
import pytest

from timebin import montecarlo as mc
from timebin import rates
from timebin import teleport as tp
from timebin.rates import PAPER_ALPHA_DB_PER_KM, PAPER_DETECTOR


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail, elapsed, budget):
        ok = ok and elapsed < budget
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail} ({elapsed:.3f} s, budget {budget:g} s)"
        with capsys.disabled():
            print("\n" + line)
        return ok

    return emit


def haar_qubit(rng):
    return tp.TimeBinQubit.from_bloch(math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi))


def test_ac1_direct_link_limit(report):
    start = time.perf_counter()
    limit = rates.max_distance(1, PAPER_DETECTOR, PAPER_ALPHA_DB_PER_KM)
    elapsed = time.perf_counter() - start
    ok = limit.finite and 104.0 <= limit.l_max_km <= 107.0
    assert report("AC1 direct-link limit", ok, f"L_max = {limit.l_max_km:.3f} km in [104, 107]", elapsed, 1.0)


def test_ac2_mean_fidelity(report):
    start = time.perf_counter()
    knobs = tp.fit_noise_knobs(0.825, 0.805)
    result = tp.mean_fidelity_decomposed(knobs)
    elapsed = time.perf_counter() - start
    ok = abs(result.f_mean - 0.8117) <= 0.0005 and abs(result.f_mean - 0.812) <= 0.025
    detail = f"F_mean = {result.f_mean:.5f} (target 0.8117 +/- 0.0005), xi = {knobs.xi:.4f}, f_acc = {knobs.f_acc:.3f}"
    assert report("AC2 mean fidelity", ok, detail, elapsed, 1.0)


def test_ac3_haar_matches_decomposition(report):
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst = 0.0
    ok = True
    for i in range(10):
        knobs = tp.NoiseKnobs(xi=rng.uniform(), f_acc=rng.uniform())
        mean, err = tp.mean_fidelity_haar(knobs, 100_000, seed=1000 + i, return_stderr=True)
        exact = tp.mean_fidelity_decomposed(knobs).f_mean
        sigmas = abs(mean - exact) / err
        worst = max(worst, sigmas)
        ok &= sigmas < 4.0
    elapsed = time.perf_counter() - start
    assert report("AC3 Haar average vs decomposition", ok, f"worst deviation {worst:.2f} sigma (< 4)", elapsed, 10.0)


def test_ac4_ideal_teleportation_both_routes(report):
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst_fid = worst_gap = 0.0
    for _ in range(200):
        q = haar_qubit(rng)
        joint = tp.prepare_joint(q)
        phys, proj = tp.bsm_physical(joint), tp.bsm_projector(joint)
        for outcome in (phys, proj):
            worst_fid = max(worst_fid, abs(1.0 - tp.fidelity(q, outcome.conditional_state)))
        gap = max(abs(phys.probability - proj.probability), np.abs(phys.conditional_state - proj.conditional_state).max())
        worst_gap = max(worst_gap, gap)
    elapsed = time.perf_counter() - start
    ok = worst_fid <= 1e-12 and worst_gap <= 1e-12
    detail = f"max |1 - F| = {worst_fid:.1e}, max route gap = {worst_gap:.1e} (both <= 1e-12)"
    assert report("AC4 ideal teleportation", ok, detail, elapsed, 10.0)


def test_ac5_three_trunk_error_rate_identity(report):
    start = time.perf_counter()
    worst = 0.0
    points = 0
    for t in np.logspace(-10, 0, 5):
        for eta in np.linspace(0.05, 1.0, 5):
            for dark in np.logspace(-7, -1, 4):
                det = rates.DetectorModel(eta, dark)
                closed = rates.rates_relay(3, t, det).q
                cases = rates.relay_error_rate_by_cases(t, det)
                points += 1
                if closed == cases == 0.0:
                    continue
                worst = max(worst, abs(closed - cases) / abs(cases))
    elapsed = time.perf_counter() - start
    ok = points == 100 and worst <= 1e-15
    assert report("AC5 three-trunk Q identity", ok, f"{points} points, max rel. diff {worst:.2e} (<= 1e-15)", elapsed, 1.0)


def test_ac6_monte_carlo_oracle(report):
    start = time.perf_counter()
    grid = [(n, L) for n in (1, 3, 5) for L in (0.0, 50.0, 100.0, 150.0, 200.0)]
    passed = 0
    worst = 0.0
    for i, (n, L) in enumerate(grid):
        t = rates.transmission(PAPER_ALPHA_DB_PER_KM, L)
        result = mc.compare(n, t, PAPER_DETECTOR, 10_000_000, seed=6_000 + i, length_km=L)
        assert result.trials >= 10_000_000
        worst = max(worst, abs(result.z_c), abs(result.z_q))
        passed += result.within(3.0) and not result.low_statistics
    elapsed = time.perf_counter() - start
    ok = passed >= 0.95 * len(grid)
    detail = f"{passed}/{len(grid)} grid points within 3 sigma for C and Q (need >= 95%), worst |z| = {worst:.2f}"
    assert report("AC6 Monte Carlo vs analytic", ok, detail, elapsed, 120.0)


def test_ac7_relay_curve_shape(report):
    start = time.perf_counter()
    lengths = np.arange(0.0, 400.0 + 1e-9, 0.1)
    one = np.array([rates.net_rate(L, 1, PAPER_DETECTOR) for L in lengths])
    three = np.array([rates.net_rate(L, 3, PAPER_DETECTOR) for L in lengths])
    crossings = int(np.count_nonzero(np.diff(np.sign(three - one))))
    l1 = rates.max_distance(1, PAPER_DETECTOR).l_max_km
    l3 = rates.max_distance(3, PAPER_DETECTOR).l_max_km
    elapsed = time.perf_counter() - start
    ok = three[0] < one[0] and crossings == 1 and l3 > 2 * l1
    detail = f"starts below: {three[0] < one[0]}, crossings = {crossings}, L_max(3)/L_max(1) = {l3 / l1:.3f} (> 2)"
    assert report("AC7 n=3 vs n=1 curves", ok, detail, elapsed, 5.0)


def test_ac8_reach_is_unimodal_in_n(report):
    start = time.perf_counter()
    profile = rates.distance_profile(range(1, 16, 2), PAPER_DETECTOR)
    elapsed = time.perf_counter() - start
    reach = [L for _, L in profile]
    peak = int(np.argmax(reach))
    rising = all(b > a for a, b in zip(reach[: peak + 1], reach[1 : peak + 1]))
    # strictly falling while the link lives, then flat at zero once it is dead
    tail = reach[peak:]
    falling = all(b < a or a == b == 0.0 for a, b in zip(tail, tail[1:]))
    ok = rising and falling and 0 < peak < len(reach) - 1
    shown = ", ".join(f"{n}:{L:.1f}" for n, L in profile)
    assert report("AC8 reach vs n unimodal", ok, f"peak at n = {profile[peak][0]}; {shown}", elapsed, 5.0)


def test_ac9_fringe_law(report):
    rng = np.random.default_rng(9)
    beta = np.linspace(0, 2 * math.pi, 8, endpoint=False)
    start = time.perf_counter()
    worst_v = worst_f = 0.0
    exact = True
    for _ in range(20):
        knobs = tp.NoiseKnobs(xi=rng.uniform(), f_acc=rng.uniform())
        scan = tp.equatorial_scan(rng.uniform(0, 2 * math.pi), beta, knobs)
        v = scan.visibility()
        worst_v = max(worst_v, abs(v - (1 - knobs.f_acc) * knobs.xi))
        summary = tp.mean_fidelity_decomposed(knobs)
        worst_f = max(worst_f, abs(summary.f_equator - (1 + v) / 2))
        exact &= (1 + summary.visibility) / 2 == pytest.approx(summary.f_equator, abs=2e-16)
    elapsed = time.perf_counter() - start
    ok = worst_v <= 1e-9 and worst_f <= 1e-9 and exact
    detail = f"max |V - (1-f)xi| = {worst_v:.1e}, max |F_eq - (1+V)/2| = {worst_f:.1e} (<= 1e-9)"
    assert report("AC9 fringe law", ok, detail, elapsed, 5.0)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))

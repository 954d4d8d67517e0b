"""Event-level Monte Carlo of the n-trunk relay.

One trial sends one qubit down the relay. Each of the ``n`` photons reaches
and fires its detector with probability ``t**(1/n) * eta``; every slot whose
photon did not fire dark-counts with probability ``D``. A trial is

* correct: every slot fired on a real photon and all ``(n-1)/2`` Bell
  measurements succeeded (probability ``(1/2)**((n-1)/2)``),
* incorrect: every slot fired and at least one click was a dark count,
* no detection: anything else.

Two samplers draw from this model. ``"events"`` rolls every photon and
every dark count explicitly. ``"counts"`` draws the number of real detections
per trial from its multinomial law, then the dark-count and Bell-measurement
successes as binomials. Both give the same distribution of outcome counts.
The counts sampler's cost is independent of the number of trials, which is
what makes rare error events reachable.

Trials are split into shards; shard ``i`` is seeded with ``seed ^ i`` and
counts are summed, so a run is reproducible given ``(inputs, seed)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np
from scipy.stats import binom

from .rates import DetectorModel, check_trunks, rates_relay

EVENT_SHARD = 1 << 20
COUNT_SHARD = 1 << 40
EVENTS_LIMIT = 50_000_000  # "auto" switches to the counts sampler above this
MIN_EXPECTED_EVENTS = 100
MAX_TRIALS = 10**15

Method = Literal["auto", "events", "counts"]


@dataclass(frozen=True)
class McEstimate:
    c_hat: float
    q_hat: float
    c_err: float
    q_err: float
    trials: int
    seed: int
    correct: int
    incorrect: int
    method: str
    low_statistics: bool = False


def _binomial_error(p: float, trials: int) -> float:
    return math.sqrt(p * (1.0 - p) / trials)


def _event_shard(rng: np.random.Generator, m: int, n: int, p_click: float, dark: float, p_bsm: float):
    real = rng.random((m, n)) < p_click
    noise = rng.random((m, n)) < dark
    all_fire = (real | noise).all(axis=1)
    all_real = real.all(axis=1)
    bsm_ok = rng.random(m) < p_bsm
    correct = int(np.count_nonzero(all_real & bsm_ok))
    incorrect = int(np.count_nonzero(all_fire & ~all_real))
    return correct, incorrect


def _count_shard(rng: np.random.Generator, m: int, n: int, p_click: float, dark: float, p_bsm: float):
    pmf = binom.pmf(np.arange(n + 1), n, p_click)
    by_real = rng.multinomial(m, pmf / pmf.sum())
    correct = int(rng.binomial(by_real[n], p_bsm))
    incorrect = sum(int(rng.binomial(by_real[k], dark ** (n - k))) for k in range(n))
    return correct, incorrect


def run_trials(
    n: int,
    t: float,
    det: DetectorModel,
    trials: int,
    seed: int,
    method: Method = "auto",
) -> McEstimate:
    n = check_trunks(n)
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if method == "auto":
        method = "events" if trials <= EVENTS_LIMIT else "counts"
    if method == "events":
        shard_fn, shard_size = _event_shard, EVENT_SHARD
    elif method == "counts":
        shard_fn, shard_size = _count_shard, COUNT_SHARD
    else:
        raise ValueError(f"unknown method {method!r}")

    p_click = t ** (1.0 / n) * det.eta
    p_bsm = 0.5 ** ((n - 1) // 2)
    correct = incorrect = 0
    for shard, start in enumerate(range(0, trials, shard_size)):
        rng = np.random.default_rng(seed ^ shard)
        c, q = shard_fn(rng, min(shard_size, trials - start), n, p_click, det.dark, p_bsm)
        correct += c
        incorrect += q

    c_hat, q_hat = correct / trials, incorrect / trials
    return McEstimate(
        c_hat=c_hat,
        q_hat=q_hat,
        c_err=_binomial_error(c_hat, trials),
        q_err=_binomial_error(q_hat, trials),
        trials=trials,
        seed=seed,
        correct=correct,
        incorrect=incorrect,
        method=method,
    )


def scaled_trials(c: float, q: float, trials: int, max_trials: int = MAX_TRIALS) -> tuple[int, bool]:
    """Raise ``trials`` until both outcome classes expect >= 100 events.

    Returns the trial count and whether the cap left the estimate short of
    that target.
    """
    rates = [r for r in (c, q) if r > 0]
    if not rates:
        return trials, False
    needed = math.ceil(MIN_EXPECTED_EVENTS / min(rates))
    if needed <= trials:
        return trials, False
    if needed > max_trials:
        return max(trials, max_trials), True
    return needed, False


@dataclass(frozen=True)
class McComparison:
    n: int
    L_km: float | None
    trials: int
    seed: int
    c_hat: float
    c_err: float
    q_hat: float
    q_err: float
    z_c: float
    z_q: float
    c: float
    q: float
    method: str
    low_statistics: bool
    degenerate_c: bool
    degenerate_q: bool

    def as_dict(self) -> dict:
        return asdict(self)

    def within(self, sigmas: float) -> bool:
        return abs(self.z_c) < sigmas and abs(self.z_q) < sigmas


def _z_score(estimate: float, err: float, expected: float) -> tuple[float, bool]:
    """z-score, flagged as degenerate when the binomial error is zero."""
    if err > 0:
        return (estimate - expected) / err, False
    # Zero variance: every trial agreed. Exact agreement scores 0, anything else is unbounded.
    return (0.0 if estimate == expected else math.copysign(math.inf, estimate - expected)), True


def compare(
    n: int,
    t: float,
    det: DetectorModel,
    trials: int,
    seed: int,
    *,
    auto_scale: bool = True,
    method: Method = "auto",
    length_km: float | None = None,
    max_trials: int = MAX_TRIALS,
) -> McComparison:
    """Monte Carlo estimate against the analytic rates, as z-scores."""
    analytic = rates_relay(n, t, det)
    low = False
    if auto_scale:
        trials, low = scaled_trials(analytic.c, analytic.q, int(trials), max_trials)
    else:
        expected = [r * trials for r in (analytic.c, analytic.q) if r > 0]
        low = bool(expected) and min(expected) < MIN_EXPECTED_EVENTS
    est = run_trials(n, t, det, trials, seed, method)
    z_c, deg_c = _z_score(est.c_hat, est.c_err, analytic.c)
    z_q, deg_q = _z_score(est.q_hat, est.q_err, analytic.q)
    return McComparison(
        n=check_trunks(n),
        L_km=length_km,
        trials=est.trials,
        seed=seed,
        c_hat=est.c_hat,
        c_err=est.c_err,
        q_hat=est.q_hat,
        q_err=est.q_err,
        z_c=z_c,
        z_q=z_q,
        c=analytic.c,
        q=analytic.q,
        method=est.method,
        low_statistics=low,
        degenerate_c=deg_c,
        degenerate_q=deg_q,
    )

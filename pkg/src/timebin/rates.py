"""Per-pulse key rates for a direct fibre link and for an n-trunk relay.

A relay splits a link of total transmission ``t`` into ``n`` equal trunks,
each with transmission ``t**(1/n)``, joined by ``(n - 1) / 2`` teleportation
stations. Rates are probabilities per sent qubit:

    C = (1/2)**((n-1)/2) * t * eta**n
    Q = (t**(1/n) eta + (1 - t**(1/n) eta) D)**n - t * eta**n
    R_raw = C + Q,  QBER = Q / (C + Q),  R_net = C - (85/15) Q

``n = 1`` is the direct link, ``C = t eta`` and ``Q = (1 - t eta) D``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

QBER_CUTOFF = 0.15
NET_SLOPE = (1 - QBER_CUTOFF) / QBER_CUTOFF  # 85/15

PAPER_ETA = 0.25
PAPER_DARK = 1e-4
PAPER_ALPHA_DB_PER_KM = 0.25


class LinkDeadError(ValueError):
    """No distance (not even zero) gives a positive net rate."""


@dataclass(frozen=True)
class DetectorModel:
    eta: float = PAPER_ETA
    dark: float = PAPER_DARK

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta={self.eta} outside (0, 1]")
        if not 0.0 <= self.dark < 1.0:
            raise ValueError(f"dark={self.dark} outside [0, 1)")


PAPER_DETECTOR = DetectorModel()


@dataclass(frozen=True)
class LinkParams:
    alpha_db_per_km: float = PAPER_ALPHA_DB_PER_KM
    length_km: float = 0.0
    n_trunks: int = 1

    def __post_init__(self):
        if self.alpha_db_per_km <= 0:
            raise ValueError("attenuation must be positive")
        if self.length_km < 0:
            raise ValueError("length must be non-negative")
        check_trunks(self.n_trunks)

    @property
    def transmission(self) -> float:
        return transmission(self.alpha_db_per_km, self.length_km)


@dataclass(frozen=True)
class RateReport:
    c: float
    q: float
    r_raw: float
    qber: float
    r_net: float

    @classmethod
    def from_counts(cls, c: float, q: float) -> RateReport:
        r_raw = c + q
        qber = q / r_raw if r_raw > 0 else 0.0
        return cls(c=c, q=q, r_raw=r_raw, qber=qber, r_net=c - NET_SLOPE * q)

    def as_dict(self) -> dict:
        return asdict(self)


def check_trunks(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1 or n % 2 == 0:
        raise ValueError(f"number of trunks must be an odd positive integer, got {n}")
    return int(n)


def transmission(alpha_db_per_km: float, length_km: float) -> float:
    if alpha_db_per_km < 0 or length_km < 0:
        raise ValueError("attenuation and length must be non-negative")
    return 10.0 ** (-alpha_db_per_km * length_km / 10.0)


def _with_optical_error(c: float, q: float, optical_error: float) -> RateReport:
    # A misalignment floor turns a fraction of correct detections into errors.
    if not 0.0 <= optical_error <= 1.0:
        raise ValueError("optical_error must lie in [0, 1]")
    if optical_error:
        c, q = (1 - optical_error) * c, q + optical_error * c
    return RateReport.from_counts(c, q)


def rates_direct(t: float, det: DetectorModel, optical_error: float = 0.0) -> RateReport:
    c = t * det.eta
    q = (1.0 - t * det.eta) * det.dark
    return _with_optical_error(c, q, optical_error)


def relay_error_rate(n: int, t: float, det: DetectorModel) -> float:
    """``(x + y)**n - x**n`` with ``x = t**(1/n) eta`` and ``y = (1 - x) D``.

    Evaluated as ``y * sum_k (x + y)**(n-1-k) x**k``, which has no
    cancellation, so tiny error rates next to large signals stay accurate.
    """
    x = t ** (1.0 / n) * det.eta
    y = (1.0 - x) * det.dark
    s = x + y
    return y * math.fsum(s ** (n - 1 - k) * x**k for k in range(n))


def relay_error_rate_by_cases(t: float, det: DetectorModel) -> float:
    """Three-trunk error rate summed over its loss/dark-count cases.

    (i) three photons lost, three dark counts; (ii) two lost, one detected,
    two dark counts; (iii) one lost, two detected, one dark count.
    """
    x = t ** (1.0 / 3.0) * det.eta
    d = det.dark
    return (1 - x) ** 3 * d**3 + 3 * x * (1 - x) ** 2 * d**2 + 3 * x**2 * (1 - x) * d


def rates_relay(n: int, t: float, det: DetectorModel, optical_error: float = 0.0) -> RateReport:
    n = check_trunks(n)
    if n == 1:
        return rates_direct(t, det, optical_error)
    c = 0.5 ** ((n - 1) // 2) * t * det.eta**n
    return _with_optical_error(c, relay_error_rate(n, t, det), optical_error)


def net_rate(
    length_km: float, n: int, det: DetectorModel, alpha: float = PAPER_ALPHA_DB_PER_KM, optical_error: float = 0.0
) -> float:
    return rates_relay(n, transmission(alpha, length_km), det, optical_error).r_net


@dataclass(frozen=True)
class CurveRow:
    length_km: float
    n: int
    report: RateReport

    def values(self) -> tuple:
        r = self.report
        return (self.length_km, self.n, r.c, r.q, r.r_raw, r.qber, r.r_net)


CURVE_HEADER = ("L_km", "n", "C", "Q", "R_raw", "QBER", "R_net")


def r_net_curve(
    lengths_km: Sequence[float],
    n_values: Iterable[int],
    det: DetectorModel,
    alpha: float = PAPER_ALPHA_DB_PER_KM,
    optical_error: float = 0.0,
) -> list[CurveRow]:
    """Rate table ordered by ``n`` first, then by distance as given."""
    n_values = [check_trunks(n) for n in n_values]
    if len(lengths_km) == 0 or not n_values:
        raise ValueError("length grid and n list must be non-empty")
    return [
        CurveRow(float(L), n, rates_relay(n, transmission(alpha, L), det, optical_error))
        for n in n_values
        for L in lengths_km
    ]


@dataclass(frozen=True)
class DistanceLimit:
    n: int
    l_max_km: float
    status: str  # "finite" | "no_finite_limit"

    @property
    def finite(self) -> bool:
        return self.status == "finite"


def max_distance(
    n: int,
    det: DetectorModel,
    alpha: float = PAPER_ALPHA_DB_PER_KM,
    tol_km: float = 1e-3,
    optical_error: float = 0.0,
    horizon_km: float = 1e5,
) -> DistanceLimit:
    """Distance at which the net rate crosses zero, found by bisection.

    Raises :class:`LinkDeadError` if the rate is not positive at zero length.
    A noiseless link never crosses zero and reports ``no_finite_limit``.
    """
    n = check_trunks(n)

    def f(L: float) -> float:
        return net_rate(L, n, det, alpha, optical_error)

    if f(0.0) <= 0.0:
        raise LinkDeadError(f"net rate is not positive at L=0 for n={n}")
    if det.dark == 0.0 and optical_error == 0.0:
        return DistanceLimit(n, math.inf, "no_finite_limit")

    lo, hi = 0.0, 50.0
    while f(hi) > 0.0:
        lo, hi = hi, 2 * hi
        if hi > horizon_km:
            return DistanceLimit(n, math.inf, "no_finite_limit")
    while hi - lo > tol_km:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return DistanceLimit(n, 0.5 * (lo + hi), "finite")


@dataclass(frozen=True)
class OptimalTrunks:
    length_km: float
    n: int | None
    r_net: float
    status: str  # "ok" | "link_dead"


def optimal_n(
    length_km: float,
    det: DetectorModel,
    alpha: float = PAPER_ALPHA_DB_PER_KM,
    n_max: int = 15,
    optical_error: float = 0.0,
) -> OptimalTrunks:
    """Odd trunk count in ``[1, n_max]`` maximizing the net rate; ties go to smaller n."""
    n_max = check_trunks(n_max)
    best_n, best_r = None, -math.inf
    for n in range(1, n_max + 1, 2):
        r = net_rate(length_km, n, det, alpha, optical_error)
        if r > best_r:
            best_n, best_r = n, r
    if best_r <= 0.0:
        return OptimalTrunks(length_km, None, best_r, "link_dead")
    return OptimalTrunks(length_km, best_n, best_r, "ok")


def distance_profile(
    n_values: Iterable[int], det: DetectorModel, alpha: float = PAPER_ALPHA_DB_PER_KM
) -> list[tuple[int, float]]:
    """``(n, L_max)`` for each n; dead links (no key even at L=0) count as 0 km."""
    out = []
    for n in n_values:
        try:
            out.append((n, max_distance(n, det, alpha).l_max_km))
        except LinkDeadError:
            out.append((n, 0.0))
    return out

"""Sparse truncated-Fock state vectors for photons in (channel, time-bin) modes.

Modes are indexed ``channel * n_bins + bin``. A basis ket is a tuple of
occupation numbers, one per mode, and a :class:`StateVector` maps those
tuples to complex amplitudes. Every operation returns a new, normalized
state; states are never mutated in place.

Linear optical elements act on creation operators. For a beamsplitter
between channels ``a`` and ``b`` (applied bin by bin)::

    a^dag -> cos(theta) a^dag + i exp(+i phi) sin(theta) b^dag
    b^dag -> i exp(-i phi) sin(theta) a^dag + cos(theta) b^dag

so ``theta = pi/4`` is a 50/50 coupler and ``theta -> -theta`` inverts it.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

DEFAULT_N_MAX = 3
PRUNE_THRESHOLD = 1e-14
NORM_TOLERANCE = 1e-10

Occupations = tuple[int, ...]


class TruncationError(ValueError):
    """Raised when an operation would put more than ``n_max`` photons in the state."""


class ModeId(NamedTuple):
    channel: int
    bin: int


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized sparse ket over a truncated Fock basis."""

    n_channels: int
    n_bins: int
    n_max: int
    terms: Mapping[Occupations, complex]

    @property
    def n_modes(self) -> int:
        return self.n_channels * self.n_bins

    def mode_index(self, mode: ModeId | tuple[int, int]) -> int:
        channel, bin_ = mode
        if not 0 <= channel < self.n_channels:
            raise ValueError(f"channel {channel} outside [0, {self.n_channels})")
        if not 0 <= bin_ < self.n_bins:
            raise ValueError(f"time bin {bin_} outside [0, {self.n_bins})")
        return channel * self.n_bins + bin_

    def occupations(self, counts: Mapping[tuple[int, int], int]) -> Occupations:
        """Build a basis tuple from a sparse ``{(channel, bin): count}`` mapping."""
        occ = [0] * self.n_modes
        for mode, count in counts.items():
            occ[self.mode_index(mode)] = count
        return tuple(occ)

    def amplitude(self, occ: Occupations | Mapping[tuple[int, int], int]) -> complex:
        if isinstance(occ, Mapping):
            occ = self.occupations(occ)
        return self.terms.get(tuple(occ), 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def inner(self, other: StateVector) -> complex:
        """Return <self|other>."""
        _check_same_space(self, other)
        return sum(
            (amp.conjugate() * other.terms[occ] for occ, amp in self.terms.items() if occ in other.terms),
            0j,
        )

    def channel_photons(self, occ: Occupations, channel: int) -> int:
        start = channel * self.n_bins
        return sum(occ[start : start + self.n_bins])

    def to_json(self) -> str:
        """Debug dump: a JSON list of ``{occupations, re, im}`` records."""
        records = [
            {"occupations": list(occ), "re": amp.real, "im": amp.imag}
            for occ, amp in sorted(self.terms.items())
        ]
        return json.dumps(records)

    def __repr__(self) -> str:
        body = ", ".join(f"{occ}: {amp:.6g}" for occ, amp in sorted(self.terms.items()))
        return (
            f"StateVector(n_channels={self.n_channels}, n_bins={self.n_bins}, "
            f"n_max={self.n_max}, terms={{{body}}})"
        )


def _check_same_space(a: StateVector, b: StateVector) -> None:
    if (a.n_channels, a.n_bins) != (b.n_channels, b.n_bins):
        raise ValueError("states live on different mode spaces")


def _finalize(template: StateVector, terms: Mapping[Occupations, complex]) -> StateVector:
    kept = {occ: complex(a) for occ, a in terms.items() if abs(a) >= PRUNE_THRESHOLD}
    norm = math.sqrt(sum(abs(a) ** 2 for a in kept.values()))
    if norm == 0.0:
        raise ValueError("operation annihilated the state")
    for occ in kept:
        if sum(occ) > template.n_max:
            raise TruncationError(f"{sum(occ)} photons exceed n_max={template.n_max}")
    kept = {occ: a / norm for occ, a in kept.items()}
    return StateVector(template.n_channels, template.n_bins, template.n_max, MappingProxyType(kept))


def from_terms(
    n_channels: int,
    n_bins: int,
    terms: Mapping[Occupations, complex],
    n_max: int = DEFAULT_N_MAX,
) -> StateVector:
    """Build a state from raw basis amplitudes; the result is renormalized."""
    template = vacuum(n_channels, n_bins, n_max)
    for occ in terms:
        if len(occ) != template.n_modes or min(occ) < 0:
            raise ValueError(f"bad occupation tuple {occ}")
    return _finalize(template, terms)


def vacuum(n_channels: int, n_bins: int, n_max: int = DEFAULT_N_MAX) -> StateVector:
    if n_channels < 1 or n_bins < 1 or n_max < 1:
        raise ValueError("n_channels, n_bins and n_max must all be >= 1")
    zero = (0,) * (n_channels * n_bins)
    return StateVector(n_channels, n_bins, n_max, MappingProxyType({zero: 1 + 0j}))


# Polynomials in creation operators, keyed by the monomial's occupation tuple.
# A monomial prod (a_m^dag)^{k_m} acting on vacuum equals sqrt(prod k_m!) |k>.


def _ket_to_poly(occ: Occupations, amp: complex) -> tuple[list[int], complex]:
    photons = [m for m, k in enumerate(occ) for _ in range(k)]
    return photons, amp / math.sqrt(math.prod(math.factorial(k) for k in occ))


def _poly_to_ket(monomial: Occupations, coeff: complex) -> complex:
    return coeff * math.sqrt(math.prod(math.factorial(k) for k in monomial))


def _apply_creation_polynomial(
    state: StateVector, polynomial: Sequence[tuple[complex, Sequence[int]]]
) -> StateVector:
    """Apply ``sum_j c_j prod_{m in modes_j} a_m^dag`` to ``state`` and renormalize."""
    out: dict[Occupations, complex] = defaultdict(complex)
    for occ, amp in state.terms.items():
        for coeff, modes in polynomial:
            new = list(occ)
            factor = coeff
            for m in modes:
                new[m] += 1
                factor *= math.sqrt(new[m])
            if sum(new) > state.n_max:
                raise TruncationError(f"{sum(new)} photons exceed n_max={state.n_max}")
            out[tuple(new)] += amp * factor
    return _finalize(state, out)


def create_photon(state: StateVector, mode: ModeId | tuple[int, int]) -> StateVector:
    return _apply_creation_polynomial(state, [(1.0, [state.mode_index(mode)])])


def create_superposition(
    state: StateVector, weights: Mapping[tuple[int, int], complex]
) -> StateVector:
    """Apply ``sum_m w_m a_m^dag``: one photon spread over several modes."""
    return _apply_creation_polynomial(state, [(w, [state.mode_index(m)]) for m, w in weights.items()])


def pair_source(
    state: StateVector,
    pump_amplitudes: Sequence[complex],
    signal_channel: int,
    idler_channel: int,
) -> StateVector:
    """First-order pair emission pumped by a pulse train over time bins.

    Applies ``sum_b c_b a^dag(signal, b) a^dag(idler, b)``. With
    ``c = (1, 1)/sqrt(2)`` on the vacuum this is the time-bin entangled pair.
    """
    pump = [complex(c) for c in pump_amplitudes]
    if len(pump) > state.n_bins:
        raise ValueError(f"{len(pump)} pump bins but only {state.n_bins} time bins")
    if abs(sum(abs(c) ** 2 for c in pump) - 1.0) > NORM_TOLERANCE:
        raise ValueError("pump amplitudes must be normalized")
    poly = [
        (c, [state.mode_index((signal_channel, b)), state.mode_index((idler_channel, b))])
        for b, c in enumerate(pump)
        if c != 0
    ]
    return _apply_creation_polynomial(state, poly)


# Linear elements ----------------------------------------------------------

ModeMap = dict[int, list[tuple[int, complex]]]


@dataclass(frozen=True)
class BeamSplitter:
    channel_a: int
    channel_b: int
    theta: float = math.pi / 4
    phi: float = 0.0

    def inverse(self) -> BeamSplitter:
        return BeamSplitter(self.channel_a, self.channel_b, -self.theta, self.phi)

    def mode_map(self, state: StateVector) -> ModeMap:
        if self.channel_a == self.channel_b:
            raise ValueError("beamsplitter needs two distinct channels")
        c, s = math.cos(self.theta), math.sin(self.theta)
        ab = 1j * complex(math.cos(self.phi), math.sin(self.phi)) * s
        ba = 1j * complex(math.cos(self.phi), -math.sin(self.phi)) * s
        out: ModeMap = {}
        for b in range(state.n_bins):
            ia = state.mode_index((self.channel_a, b))
            ib = state.mode_index((self.channel_b, b))
            out[ia] = [(ia, c), (ib, ab)]
            out[ib] = [(ia, ba), (ib, c)]
        return out


@dataclass(frozen=True)
class PhaseShift:
    """Phase ``phi`` on one channel, optionally restricted to a single time bin."""

    channel: int
    phi: float
    bin: int | None = None

    def inverse(self) -> PhaseShift:
        return PhaseShift(self.channel, -self.phi, self.bin)

    def mode_map(self, state: StateVector) -> ModeMap:
        bins = range(state.n_bins) if self.bin is None else [self.bin]
        phase = complex(math.cos(self.phi), math.sin(self.phi))
        return {state.mode_index((self.channel, b)): [(state.mode_index((self.channel, b)), phase)] for b in bins}


@dataclass(frozen=True)
class Delay:
    """Shift every photon in ``channel`` by ``bins`` time bins (may be negative)."""

    channel: int
    bins: int

    def inverse(self) -> Delay:
        return Delay(self.channel, -self.bins)

    def mode_map(self, state: StateVector) -> ModeMap:
        state.mode_index((self.channel, 0))
        out: ModeMap = {}
        for b in range(state.n_bins):
            target = b + self.bins
            src = state.mode_index((self.channel, b))
            # out-of-range targets are only an error if that source mode is occupied
            out[src] = [(self.channel * state.n_bins + target, 1.0)] if 0 <= target < state.n_bins else []
        return out


LinearElement = Union[BeamSplitter, PhaseShift, Delay]


def apply_element(state: StateVector, element: LinearElement) -> StateVector:
    mapping = element.mode_map(state)
    out: dict[Occupations, complex] = defaultdict(complex)
    for occ, amp in state.terms.items():
        photons, coeff = _ket_to_poly(occ, amp)
        poly: dict[Occupations, complex] = {(0,) * state.n_modes: coeff}
        for m in photons:
            images = mapping.get(m, [(m, 1.0)])
            if not images:
                raise ValueError(f"{element} pushes a photon outside the time-bin range")
            nxt: dict[Occupations, complex] = defaultdict(complex)
            for mono, c in poly.items():
                for target, w in images:
                    new = list(mono)
                    new[target] += 1
                    nxt[tuple(new)] += c * w
            poly = nxt
        for mono, c in poly.items():
            out[mono] += _poly_to_ket(mono, c)
    return _finalize(state, out)


def apply_elements(state: StateVector, elements: Iterable[LinearElement]) -> StateVector:
    for element in elements:
        state = apply_element(state, element)
    return state


# Detection ------------------------------------------------------------------


def project_pattern(
    state: StateVector, pattern: Sequence[tuple[ModeId | tuple[int, int], int]]
) -> tuple[float, StateVector | None]:
    """Project onto fixed photon counts in the listed modes.

    Returns the outcome probability and the renormalized post-measurement
    state, in which the detected modes are emptied. An impossible outcome
    returns ``(0.0, None)``.
    """
    indices = [state.mode_index(mode) for mode, _ in pattern]
    if len(set(indices)) != len(indices):
        raise ValueError("pattern modes must be distinct")
    if any(count < 0 for _, count in pattern):
        raise ValueError("pattern counts must be non-negative")
    wanted = [(i, count) for i, (_, count) in zip(indices, pattern)]

    kept: dict[Occupations, complex] = {}
    for occ, amp in state.terms.items():
        if all(occ[i] == count for i, count in wanted):
            residual = list(occ)
            for i, _ in wanted:
                residual[i] = 0
            kept[tuple(residual)] = amp
    probability = sum(abs(a) ** 2 for a in kept.values())
    if not kept or probability == 0.0:
        return 0.0, None
    return min(probability, 1.0), _finalize(state, kept)


def total_photons(state: StateVector) -> float:
    """Expectation value of the total photon number."""
    return sum(abs(a) ** 2 * sum(occ) for occ, a in state.terms.items())


def state_from_json(text: str, n_channels: int, n_bins: int, n_max: int = DEFAULT_N_MAX) -> StateVector:
    records = json.loads(text)
    terms = {tuple(r["occupations"]): complex(r["re"], r["im"]) for r in records}
    return from_terms(n_channels, n_bins, terms, n_max)

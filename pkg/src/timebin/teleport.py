"""Time-bin qubit teleportation with a singlet-only Bell-state measurement.

Channel layout shared by every joint state here: Alice's photon in channel 0,
Charlie's half of the entangled pair in channel 1, Bob's half in channel 2,
two time bins each. Bob's qubit is reported as a 2x2 density matrix in the
``{|1,0>, |0,1>}`` (early, late) basis, already rotated by the fixed unitary
that undoes the singlet outcome.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Literal, Sequence

import numpy as np

from . import fock
from .fock import BeamSplitter, Delay, PhaseShift, StateVector

ALICE, CHARLIE, BOB = 0, 1, 2
N_CHANNELS = 3
N_BINS = 2

# Detectors C1 and C2 sit on the two output ports of Charlie's coupler.
C1, C2 = ALICE, CHARLIE

SINGLET = np.array([[0.0, 1.0], [-1.0, 0.0]]) / math.sqrt(2)  # [alice_bin, charlie_bin]
SINGLET_CORRECTION = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)

_ZERO_PROBABILITY = 4 * fock.PRUNE_THRESHOLD**2
_QUBIT_TOL = 1e-12

Route = Literal["physical", "projector"]


class DegenerateFitWarning(UserWarning):
    """The noise fit has no information about indistinguishability (f_acc = 1)."""


@dataclass(frozen=True)
class TimeBinQubit:
    """``a0 |1,0> + a1 exp(i alpha) |0,1>`` with real, non-negative ``a0``, ``a1``."""

    a0: float
    a1: float
    alpha: float = 0.0

    def __post_init__(self):
        if self.a0 < 0 or self.a1 < 0:
            raise ValueError("a0 and a1 must be non-negative")
        if abs(self.a0**2 + self.a1**2 - 1.0) > _QUBIT_TOL:
            raise ValueError(f"a0^2 + a1^2 = {self.a0**2 + self.a1**2}, expected 1")

    @classmethod
    def from_bloch(cls, polar: float, alpha: float = 0.0) -> TimeBinQubit:
        """Point on the Poincare sphere; ``polar = 0`` is the early pole."""
        return cls(abs(math.cos(polar / 2)), abs(math.sin(polar / 2)), alpha)

    @classmethod
    def equator(cls, alpha: float) -> TimeBinQubit:
        return cls(1 / math.sqrt(2), 1 / math.sqrt(2), alpha)

    @property
    def ket(self) -> np.ndarray:
        return np.array([self.a0, self.a1 * np.exp(1j * self.alpha)], dtype=complex)


EARLY = TimeBinQubit(1.0, 0.0)
LATE = TimeBinQubit(0.0, 1.0)


@dataclass(frozen=True)
class NoiseKnobs:
    """Phenomenological imperfections of the teleporter.

    ``xi`` is the photon indistinguishability at the Bell measurement; it only
    scales time-bin coherence. ``f_acc`` is the fraction of accidental
    coincidences, which carry a maximally mixed Bob photon.
    """

    xi: float = 1.0
    f_acc: float = 0.0

    def __post_init__(self):
        for name in ("xi", "f_acc"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")

    @property
    def visibility(self) -> float:
        return (1.0 - self.f_acc) * self.xi


IDEAL = NoiseKnobs()


@dataclass(frozen=True)
class BsmOutcome:
    success: bool
    probability: float
    conditional_state: np.ndarray | None


@dataclass(frozen=True)
class TeleportReport:
    f_pole: float
    f_equator: float
    f_mean: float
    visibility: float

    def as_dict(self) -> dict:
        return asdict(self)


def validate_density_matrix(rho: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=tol, rtol=0):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def pure_density(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


# State preparation ------------------------------------------------------------


def _empty() -> StateVector:
    return fock.vacuum(N_CHANNELS, N_BINS, fock.DEFAULT_N_MAX)


def prepare_alice(q: TimeBinQubit, state: StateVector | None = None) -> StateVector:
    """Put Alice's qubit photon into channel 0 of ``state`` (vacuum by default)."""
    base = _empty() if state is None else state
    amp = q.ket
    weights = {(ALICE, b): amp[b] for b in range(N_BINS) if amp[b] != 0}
    return fock.create_superposition(base, weights)


def prepare_epr(state: StateVector | None = None) -> StateVector:
    """``(|1,0>_C |1,0>_B + |0,1>_C |0,1>_B) / sqrt(2)`` from a two-pulse pump."""
    base = _empty() if state is None else state
    return fock.pair_source(base, [1 / math.sqrt(2), 1 / math.sqrt(2)], CHARLIE, BOB)


def prepare_joint(q: TimeBinQubit) -> StateVector:
    return prepare_alice(q, prepare_epr())


def prepare_alice_interferometric(q: TimeBinQubit) -> tuple[float, StateVector]:
    """Prepare ``q`` with a variable coupler, a delay line and a passive combiner.

    The long arm uses a scratch channel that doubles as the combiner's lossy
    output port. Returns the post-selection probability (1/2, the passive
    coupler's loss) and Alice's photon on a one-channel, two-bin space.
    """
    scratch = 1
    state = fock.create_photon(fock.vacuum(2, N_BINS), (ALICE, 0))
    theta = math.atan2(q.a1, q.a0)
    state = fock.apply_elements(
        state,
        [
            BeamSplitter(ALICE, scratch, theta),
            Delay(scratch, 1),
            PhaseShift(scratch, q.alpha + math.pi),
            BeamSplitter(ALICE, scratch, math.pi / 4),
        ],
    )
    p, kept = fock.project_pattern(state, [((scratch, 0), 0), ((scratch, 1), 0)])
    terms = {occ[:N_BINS]: amp for occ, amp in kept.terms.items()}
    return p, fock.from_terms(1, N_BINS, terms, kept.n_max)


# Bell-state measurement -------------------------------------------------------


def _check_joint(joint: StateVector) -> None:
    if joint.n_channels != N_CHANNELS or joint.n_bins != N_BINS:
        raise ValueError(f"expected a {N_CHANNELS}-channel, {N_BINS}-bin joint state")
    for occ in joint.terms:
        counts = [joint.channel_photons(occ, ch) for ch in range(N_CHANNELS)]
        if counts != [1, 1, 1]:
            raise ValueError(f"expected one photon per channel, found {counts}")


def _bob_vector(state: StateVector) -> np.ndarray:
    vec = np.zeros(N_BINS, dtype=complex)
    for occ, amp in state.terms.items():
        for b in range(N_BINS):
            if occ[BOB * N_BINS + b]:
                vec[b] += amp
    return vec


def _outcome(probability: float, rho: np.ndarray | None) -> BsmOutcome:
    if rho is None or probability < _ZERO_PROBABILITY:
        return BsmOutcome(False, 0.0, None)
    rho = SINGLET_CORRECTION @ rho @ SINGLET_CORRECTION.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return BsmOutcome(True, min(probability, 1.0), rho / np.trace(rho).real)


def singlet_patterns() -> list[list[tuple[tuple[int, int], int]]]:
    """The two coincidence patterns, C1 and C2 firing one time bin apart."""
    return [
        [((C1, 0), 1), ((C1, 1), 0), ((C2, 0), 0), ((C2, 1), 1)],
        [((C1, 0), 0), ((C1, 1), 1), ((C2, 0), 1), ((C2, 1), 0)],
    ]


def bsm_physical(joint: StateVector) -> BsmOutcome:
    """Bell measurement with a 50/50 coupler and time-resolved coincidences."""
    _check_joint(joint)
    mixed = fock.apply_element(joint, BeamSplitter(ALICE, CHARLIE, math.pi / 4))
    total = 0.0
    rho = np.zeros((2, 2), dtype=complex)
    for pattern in singlet_patterns():
        p, residual = fock.project_pattern(mixed, pattern)
        if residual is None:
            continue
        total += p
        rho += p * pure_density(_bob_vector(residual))
    return _outcome(total, rho if total > 0 else None)


def _projected_bob(joint: StateVector) -> np.ndarray:
    """Unnormalized Bob amplitudes after projecting Alice x Charlie onto the singlet."""
    _check_joint(joint)
    psi = np.zeros((N_BINS,) * 3, dtype=complex)
    for occ, amp in joint.terms.items():
        bins = tuple(next(b for b in range(N_BINS) if occ[ch * N_BINS + b]) for ch in range(N_CHANNELS))
        psi[bins] += amp
    bob = np.einsum("ac,acb->b", SINGLET.conj(), psi)
    bob[np.abs(bob) < fock.PRUNE_THRESHOLD] = 0
    return bob


def bsm_projector(joint: StateVector) -> BsmOutcome:
    """Bell measurement as an abstract projection onto the normalized singlet."""
    bob = _projected_bob(joint)
    p = float(np.vdot(bob, bob).real)
    return _outcome(p, pure_density(bob) if p > 0 else None)


def bell_measurement(joint: StateVector, route: Route = "physical") -> BsmOutcome:
    if route == "physical":
        return bsm_physical(joint)
    if route == "projector":
        return bsm_projector(joint)
    raise ValueError(f"unknown route {route!r}")


# Noise and fidelity -----------------------------------------------------------


def apply_noise(rho_ideal: np.ndarray, knobs: NoiseKnobs) -> np.ndarray:
    rho = np.asarray(rho_ideal, dtype=complex)
    dephased = knobs.xi * rho + (1.0 - knobs.xi) * np.diag(np.diag(rho))
    return (1.0 - knobs.f_acc) * dephased + knobs.f_acc * np.eye(2) / 2


def fidelity(psi: TimeBinQubit, rho: np.ndarray) -> float:
    ket = psi.ket
    value = float(np.vdot(ket, np.asarray(rho) @ ket).real)
    return min(max(value, 0.0), 1.0)


def teleport(
    q: TimeBinQubit, knobs: NoiseKnobs = IDEAL, route: Route = "projector"
) -> tuple[BsmOutcome, np.ndarray]:
    """Run the protocol for one input; returns the BSM outcome and Bob's noisy state."""
    outcome = bell_measurement(prepare_joint(q), route)
    if not outcome.success:
        raise RuntimeError("singlet outcome has zero probability for this input")
    return outcome, apply_noise(outcome.conditional_state, knobs)


EQUATOR_PHASES = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)


def mean_fidelity_decomposed(knobs: NoiseKnobs, route: Route = "projector") -> TeleportReport:
    """Pole and equator averages, combined with weights 1/3 and 2/3.

    Fidelity on the equator is a first-order trigonometric polynomial in the
    phase, so four evenly spaced phases give the exact circle average.
    """
    f_pole = float(np.mean([fidelity(q, teleport(q, knobs, route)[1]) for q in (EARLY, LATE)]))
    eq = [TimeBinQubit.equator(a) for a in EQUATOR_PHASES]
    f_equator = float(np.mean([fidelity(q, teleport(q, knobs, route)[1]) for q in eq]))
    return TeleportReport(
        f_pole=f_pole,
        f_equator=f_equator,
        f_mean=(2.0 / 3.0) * f_equator + (1.0 / 3.0) * f_pole,
        visibility=2.0 * f_equator - 1.0,
    )


def teleport_operator() -> np.ndarray:
    """Linear map from Alice's ket to Bob's corrected, unnormalized ket.

    Built column by column from the projector route on the two basis inputs;
    the singlet probability is input independent, so the map is exact.
    """
    cols = [_projected_bob(prepare_joint(q)) for q in (EARLY, LATE)]
    return SINGLET_CORRECTION @ np.column_stack(cols)


def haar_qubits(n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random qubit kets as an ``(n_samples, 2)`` array in the a0/a1/alpha form."""
    cos_polar = rng.uniform(-1.0, 1.0, n_samples)
    alpha = rng.uniform(0.0, 2 * math.pi, n_samples)
    a0 = np.sqrt((1 + cos_polar) / 2)
    a1 = np.sqrt((1 - cos_polar) / 2)
    return np.column_stack([a0 + 0j, a1 * np.exp(1j * alpha)])


def haar_fidelities(knobs: NoiseKnobs, n_samples: int, seed: int) -> np.ndarray:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    kets = haar_qubits(n_samples, np.random.default_rng(seed))
    out = kets @ teleport_operator().T
    out /= np.linalg.norm(out, axis=1, keepdims=True)
    rho = np.einsum("ni,nj->nij", out, out.conj())
    diag = rho * np.eye(2)
    rho = (1 - knobs.f_acc) * (knobs.xi * rho + (1 - knobs.xi) * diag) + knobs.f_acc * np.eye(2) / 2
    return np.einsum("ni,nij,nj->n", kets.conj(), rho, kets).real


def mean_fidelity_haar(
    knobs: NoiseKnobs, n_samples: int, seed: int, return_stderr: bool = False
) -> float | tuple[float, float]:
    """Monte Carlo average fidelity over Haar-uniform inputs."""
    f = haar_fidelities(knobs, n_samples, seed)
    mean = float(f.mean())
    if not return_stderr:
        return mean
    stderr = float(f.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else float("inf")
    return mean, stderr


def fit_noise_knobs(f_pole: float, f_equator: float) -> NoiseKnobs:
    """Invert the noise model: ``f_acc`` from the poles, ``xi`` from the equator."""
    if not 0.5 <= f_pole <= 1.0 or not 0.5 <= f_equator <= 1.0:
        raise ValueError("fidelities must lie in [0.5, 1]")
    f_acc = 2.0 * (1.0 - f_pole)
    if f_acc >= 1.0 - 1e-12:
        warnings.warn("f_pole = 0.5 leaves xi undetermined; returning xi = 1", DegenerateFitWarning)
        return NoiseKnobs(xi=1.0, f_acc=1.0)
    xi = (2.0 * f_equator - 1.0) / (1.0 - f_acc)
    if xi > 1.0 + 1e-12:
        raise ValueError(f"f_equator={f_equator} too high for f_pole={f_pole} (xi={xi:.6g} > 1)")
    return NoiseKnobs(xi=min(xi, 1.0), f_acc=max(f_acc, 0.0))


# Fringe scan ------------------------------------------------------------------


@dataclass(frozen=True)
class FringeScan:
    alpha: float
    beta: np.ndarray
    rate: np.ndarray

    def visibility(self) -> float:
        """Least-squares fit of ``rate = 1/2 + A cos(beta) + B sin(beta)``."""
        if len(self.beta) < 3:
            raise ValueError("need at least three phase settings to fit a fringe")
        design = np.column_stack([np.cos(self.beta), np.sin(self.beta)])
        (a, b), *_ = np.linalg.lstsq(design, self.rate - 0.5, rcond=None)
        return float(2.0 * math.hypot(a, b))

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.beta.tolist(), self.rate.tolist()))


def analyzer_rate(rho: np.ndarray, beta: float) -> float:
    """Normalized middle-bin rate at one output of Bob's unbalanced interferometer.

    The analyzer splits Bob's photon, delays one arm by a bin, applies ``beta``
    to the short arm and recombines. Each eigenvector of ``rho`` is propagated
    through the Fock engine; the two output ports' middle-bin counts are
    normalized against each other. With this layout the fringe is
    ``(1 + V cos(alpha + beta)) / 2``.
    """
    port, other = 0, 1
    elements = [
        BeamSplitter(port, other, math.pi / 4),
        Delay(other, 1),
        PhaseShift(port, beta),
        BeamSplitter(port, other, math.pi / 4),
    ]
    weights, vectors = np.linalg.eigh(0.5 * (rho + np.conj(rho).T))
    hits = np.zeros(2)
    for w, v in zip(weights, vectors.T):
        if w <= 1e-15:
            continue
        state = fock.vacuum(2, 3)
        state = fock.create_superposition(state, {(port, b): v[b] for b in range(2) if abs(v[b]) > 0})
        state = fock.apply_elements(state, elements)
        for i, ch in enumerate((other, port)):
            p, _ = fock.project_pattern(state, [((ch, 1), 1)])
            hits[i] += w * p
    return float(hits[0] / hits.sum())


def equatorial_scan(
    alpha: float,
    beta_grid: Sequence[float],
    knobs: NoiseKnobs = IDEAL,
    route: Route = "physical",
) -> FringeScan:
    beta = np.asarray(beta_grid, dtype=float)
    if beta.size == 0:
        raise ValueError("beta grid must be non-empty")
    _, rho = teleport(TimeBinQubit.equator(alpha), knobs, route)
    rate = np.array([analyzer_rate(rho, b) for b in beta])
    return FringeScan(alpha=alpha, beta=beta, rate=rate)

"""Generalized measurements with one measurement operator per outcome.

Also holds the seeded random generators (unitaries, states, channels) that
drive the randomized checks.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .operators import (
    COMPLETENESS_TOL,
    DimensionError,
    InvalidOperatorError,
    dagger,
    eigh,
    hermitian_matfunc,
    hermitize,
    max_norm,
)
from .thermo import DEFAULT_CONSTANTS, PhysicalConstants

BRANCH_FLOOR = 1e-12
CLASSICAL_TOL = 1e-9
_PROB_SLACK = 1e-12


@dataclass(frozen=True)
class MeasurementChannel:
    """Measurement operators ``M_k`` with outcome labels.

    Construction fails if ``sum_k M_k† M_k`` deviates from the identity by
    more than ``COMPLETENESS_TOL`` in max-norm.
    """

    operators: tuple[np.ndarray, ...]
    outcome_labels: tuple = ()

    def __post_init__(self):
        ops = tuple(np.asarray(m, dtype=complex) for m in self.operators)
        if not ops:
            raise ValueError("a measurement needs at least one outcome")
        shape = ops[0].shape
        if len(shape) != 2 or shape[0] != shape[1] or any(m.shape != shape for m in ops):
            raise DimensionError("measurement operators must be square and of equal shape")
        labels = tuple(self.outcome_labels) if self.outcome_labels else tuple(range(len(ops)))
        if len(labels) != len(ops):
            raise ValueError("one outcome label per measurement operator required")
        if len(set(labels)) != len(labels):
            raise ValueError(f"outcome labels must be unique: {labels}")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "outcome_labels", labels)
        res = self.completeness_residual()
        if res > COMPLETENESS_TOL:
            raise InvalidOperatorError(f"measurement operators are not complete (residual {res:.3e})")

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.operators)

    def completeness_residual(self) -> float:
        total = sum(dagger(m) @ m for m in self.operators)
        return max_norm(total - np.eye(self.dim))

    def embedded(self, left: int = 1, right: int = 1) -> "MeasurementChannel":
        """The same measurement acting as ``I_left ⊗ M_k ⊗ I_right``."""
        ops = [np.kron(np.kron(np.eye(left), m), np.eye(right)) for m in self.operators]
        return MeasurementChannel(tuple(ops), self.outcome_labels)

    def relabeled(self, order: Sequence[int]) -> "MeasurementChannel":
        return MeasurementChannel(
            tuple(self.operators[i] for i in order),
            tuple(self.outcome_labels[i] for i in order),
        )


@dataclass
class OutcomeDistribution:
    probabilities: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probabilities must be a non-empty vector")
        if p.min() < -_PROB_SLACK or p.max() > 1 + _PROB_SLACK:
            raise ValueError(f"probabilities out of range: {p}")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        self.probabilities = np.clip(p, 0.0, 1.0)
        if not self.labels:
            self.labels = tuple(range(p.size))


@dataclass
class Branch:
    label: object
    probability: float
    state: np.ndarray | None  # None for dropped zero-probability outcomes

    @property
    def present(self) -> bool:
        return self.state is not None


@dataclass
class BranchEnsemble:
    branches: list[Branch] = field(default_factory=list)

    @property
    def present(self) -> list[Branch]:
        return [b for b in self.branches if b.present]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([b.probability for b in self.branches])

    def average(self) -> np.ndarray:
        """Mixture ``sum_k p_k rho^(k)`` over present branches."""
        present = self.present
        return hermitize(sum(b.probability * b.state for b in present))

    def map(self, unitaries: Sequence[np.ndarray]) -> "BranchEnsemble":
        """Conjugate branch ``k`` by ``unitaries[k]`` (indexed like ``branches``)."""
        if len(unitaries) != len(self.branches):
            raise ValueError("one unitary per branch required")
        out = []
        for b, u in zip(self.branches, unitaries):
            state = hermitize(u @ b.state @ dagger(u)) if b.present else None
            out.append(Branch(b.label, b.probability, state))
        return BranchEnsemble(out)


def povm(channel: MeasurementChannel) -> list[np.ndarray]:
    """POVM elements ``D_k = M_k† M_k``."""
    return [hermitize(dagger(m) @ m) for m in channel.operators]


def outcome_probabilities(rho: np.ndarray, channel: MeasurementChannel) -> OutcomeDistribution:
    rho = np.asarray(rho)
    if rho.shape != (channel.dim, channel.dim):
        raise DimensionError(f"state of shape {rho.shape} vs channel of dim {channel.dim}")
    p = np.array([np.real(np.einsum("ij,ji->", d, rho)) for d in povm(channel)])
    return OutcomeDistribution(p, channel.outcome_labels)


def measure(rho: np.ndarray, channel: MeasurementChannel) -> tuple[OutcomeDistribution, BranchEnsemble]:
    """Outcome statistics and normalized post-measurement states.

    Outcomes with ``p_k <= BRANCH_FLOOR`` keep their probability but carry no
    state, and drop out of every downstream sum.
    """
    dist = outcome_probabilities(rho, channel)
    branches = []
    for label, m, p in zip(channel.outcome_labels, channel.operators, dist.probabilities):
        if p <= BRANCH_FLOOR:
            branches.append(Branch(label, float(p), None))
            continue
        post = hermitize(m @ rho @ dagger(m)) / p
        branches.append(Branch(label, float(p), post))
    return dist, BranchEnsemble(branches)


def is_classical(rho: np.ndarray, channel: MeasurementChannel, tol: float = CLASSICAL_TOL) -> bool:
    """True iff every POVM element commutes with ``rho`` to ``tol`` (max-norm)."""
    rho = np.asarray(rho)
    return all(max_norm(rho @ d - d @ rho) <= tol for d in povm(channel))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def ginibre(dim: int, cols: int | None = None, seed=None) -> np.ndarray:
    rng = _rng(seed)
    cols = dim if cols is None else cols
    return (rng.standard_normal((dim, cols)) + 1j * rng.standard_normal((dim, cols))) / np.sqrt(2)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    q, r = np.linalg.qr(ginibre(dim, seed=seed))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_hermitian(dim: int, scale: float = 1.0, seed=None) -> np.ndarray:
    g = ginibre(dim, seed=seed)
    return scale * hermitize(g) / np.sqrt(dim)


def random_density(dim: int, seed=None, rank: int | None = None) -> np.ndarray:
    """Random density operator ``G G† / tr(G G†)`` with ``G`` of shape ``dim x rank``."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}]")
    g = ginibre(dim, rank, seed=seed)
    rho = g @ dagger(g)
    return hermitize(rho / np.trace(rho).real)


def random_channel(dim: int, n_outcomes: int, seed=None) -> MeasurementChannel:
    """Random complete measurement: ``M_k = G_k (sum_j G_j† G_j)^(-1/2)``."""
    if dim < 1 or n_outcomes < 1:
        raise ValueError("dim and n_outcomes must be >= 1")
    rng = _rng(seed)
    gs = [ginibre(dim, seed=rng) for _ in range(n_outcomes)]
    total = sum(dagger(g) @ g for g in gs)
    w, v = eigh(total)
    inv_sqrt = (v / np.sqrt(w)) @ dagger(v)
    return MeasurementChannel(tuple(g @ inv_sqrt for g in gs))


def projective_channel(projectors: Sequence[np.ndarray]) -> MeasurementChannel:
    return MeasurementChannel(tuple(np.asarray(p, dtype=complex) for p in projectors))


def computational_basis_channel(dim: int) -> MeasurementChannel:
    eye = np.eye(dim, dtype=complex)
    return projective_channel([np.outer(eye[i], eye[i]) for i in range(dim)])


def trivial_channel(dim: int) -> MeasurementChannel:
    """Single-outcome measurement ``M = I``."""
    return MeasurementChannel((np.eye(dim, dtype=complex),))


def uninformative_channel(dim: int, weights: Sequence[float], seed=None) -> MeasurementChannel:
    """``M_k = sqrt(w_k) U_k`` with Haar ``U_k``, so every ``D_k = w_k I``."""
    w = np.asarray(weights, dtype=float)
    if w.min() < 0 or abs(w.sum() - 1) > 1e-12:
        raise ValueError("weights must be a probability vector")
    rng = _rng(seed)
    return MeasurementChannel(tuple(np.sqrt(wk) * random_unitary(dim, rng) for wk in w))


def noisy_projective_channel(projectors: Sequence[np.ndarray], error: float) -> MeasurementChannel:
    """Two-outcome measurement with ``D_k = error·I + (1 - 2·error)·P_k``.

    ``projectors`` must be a complete pair ``P_0 + P_1 = I``.
    """
    if len(projectors) != 2:
        raise ValueError("noisy_projective_channel expects two projectors")
    if not 0 <= error <= 0.5:
        raise ValueError(f"error must lie in [0, 0.5], got {error}")
    dim = np.asarray(projectors[0]).shape[0]
    ops = []
    for p in projectors:
        d = error * np.eye(dim) + (1 - 2 * error) * np.asarray(p, dtype=complex)
        ops.append(hermitian_matfunc(d, "sqrt"))
    return MeasurementChannel(tuple(ops))


def unitary_from_hamiltonian(
    h: np.ndarray, duration: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> np.ndarray:
    """``exp(-i h t / hbar)`` via the spectrum of ``h``."""
    w, v = eigh(np.asarray(h, dtype=complex))
    phases = np.exp(-1j * w * duration / constants.hbar)
    return (v * phases) @ dagger(v)


def schedule_unitary(
    segments: Sequence[tuple[np.ndarray, float]], constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> np.ndarray:
    """Propagator of a piecewise-constant Hamiltonian.

    ``segments`` is a time-ordered list of ``(hamiltonian, duration)``; later
    segments act after (to the left of) earlier ones.
    """
    if not segments:
        raise ValueError("schedule needs at least one segment")
    u = np.eye(np.asarray(segments[0][0]).shape[0], dtype=complex)
    for h, t in segments:
        u = unitary_from_hamiltonian(h, t, constants) @ u
    return u

"""Five-stage measurement-and-feedback protocol on ``S ⊗ B_1 ⊗ ... ⊗ B_n``.

Stages: canonical initial state, unitary evolution ``U_i``, measurement
``{M_k}`` on the system, outcome-dependent unitary ``U_k``, and an
outcome-independent unitary ``U_f``. :func:`run` records every checkpoint and
the energy, heat and work bookkeeping; the ``verify_*`` functions evaluate the
second-law-type inequalities on the resulting ledger.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .information import InformationReport, qc_mutual_info, von_neumann_entropy
from .measurement import BranchEnsemble, MeasurementChannel, OutcomeDistribution, measure, schedule_unitary
from .operators import CompositeSpace, DimensionError, InvalidOperatorError, dagger, hermitize, max_norm, partial_trace, tensor
from .thermo import DEFAULT_CONSTANTS, BathSpec, PhysicalConstants, free_energy, gibbs_state, internal_energy

UNITARITY_TOL = 1e-9
DEFAULT_TOLERANCE = 1e-8
CYCLE_TOL = 1e-9


class PreconditionError(ValueError):
    """A verifier was applied to a ledger outside its domain."""


def _as_unitary(u, dim: int, what: str, constants: PhysicalConstants) -> np.ndarray:
    if not isinstance(u, np.ndarray) and isinstance(u, Sequence):
        u = schedule_unitary(u, constants)
    u = np.asarray(u, dtype=complex)
    if u.shape != (dim, dim):
        raise DimensionError(f"{what} has shape {u.shape}, expected ({dim}, {dim})")
    res = max_norm(dagger(u) @ u - np.eye(dim))
    if res > UNITARITY_TOL:
        raise InvalidOperatorError(f"{what} is not unitary (residual {res:.3e})")
    return u


@dataclass(frozen=True)
class ProtocolSpec:
    """Complete description of one feedback protocol.

    ``stage2_unitary`` and ``stage5_unitary`` may also be given as a
    time-ordered list of ``(hamiltonian, duration)`` segments on the full
    space. ``channel`` acts on the system factor only. Endpoint energies and
    free energies use ``system_hamiltonian_initial`` / ``_final`` alone, i.e.
    couplings are taken to vanish at both ends.
    """

    space: CompositeSpace
    system_hamiltonian_initial: np.ndarray
    system_hamiltonian_final: np.ndarray
    system_temperature: float
    baths: tuple[BathSpec, ...]
    stage2_unitary: np.ndarray
    channel: MeasurementChannel
    feedback_unitaries: tuple[np.ndarray, ...]
    stage5_unitary: np.ndarray
    constants: PhysicalConstants = DEFAULT_CONSTANTS
    system_label: str = "S"

    def __post_init__(self):
        space = self.space
        dim = space.total_dim
        ds = space.dim(self.system_label)
        if not self.system_temperature > 0:
            raise ValueError("system temperature must be positive")
        baths = tuple(self.baths)
        bath_labels = [b.label for b in baths]
        expected = [l for l in space.factor_labels if l != self.system_label]
        if sorted(bath_labels) != sorted(expected):
            raise ValueError(f"baths {bath_labels} do not match space factors {expected}")
        for b in baths:
            if b.dim != space.dim(b.label):
                raise DimensionError(f"bath {b.label!r} Hamiltonian has dim {b.dim}, factor has {space.dim(b.label)}")
        for name in ("system_hamiltonian_initial", "system_hamiltonian_final"):
            h = np.asarray(getattr(self, name), dtype=complex)
            if h.shape != (ds, ds):
                raise DimensionError(f"{name} has shape {h.shape}, system dim is {ds}")
            object.__setattr__(self, name, h)
        if self.channel.dim != ds:
            raise DimensionError(f"channel acts on dim {self.channel.dim}, system dim is {ds}")
        fb = tuple(self.feedback_unitaries)
        if len(fb) != self.channel.n_outcomes:
            raise ValueError(f"{len(fb)} feedback unitaries for {self.channel.n_outcomes} outcomes")
        fb = tuple(_as_unitary(u, dim, f"feedback unitary {k}", self.constants) for k, u in enumerate(fb))
        object.__setattr__(self, "baths", baths)
        object.__setattr__(self, "feedback_unitaries", fb)
        object.__setattr__(self, "stage2_unitary", _as_unitary(self.stage2_unitary, dim, "stage-2 unitary", self.constants))
        object.__setattr__(self, "stage5_unitary", _as_unitary(self.stage5_unitary, dim, "stage-5 unitary", self.constants))

    def bath(self, label: str) -> BathSpec:
        for b in self.baths:
            if b.label == label:
                return b
        raise KeyError(label)

    def embedded_channel(self) -> MeasurementChannel:
        i = self.space.index(self.system_label)
        left = int(np.prod(self.space.factor_dims[:i], dtype=np.int64))
        right = int(np.prod(self.space.factor_dims[i + 1:], dtype=np.int64))
        return self.channel.embedded(left, right)

    def initial_state(self) -> np.ndarray:
        """Product of canonical states, in the factor order of ``space``."""
        factors = []
        for label in self.space.factor_labels:
            if label == self.system_label:
                beta = self.constants.beta(self.system_temperature)
                factors.append(gibbs_state(self.system_hamiltonian_initial, beta))
            else:
                b = self.bath(label)
                factors.append(gibbs_state(b.hamiltonian, self.constants.beta(b.temperature)))
        return tensor(*factors)

    def final_canonical_state(self) -> np.ndarray:
        factors = []
        for label in self.space.factor_labels:
            if label == self.system_label:
                beta = self.constants.beta(self.system_temperature)
                factors.append(gibbs_state(self.system_hamiltonian_final, beta))
            else:
                b = self.bath(label)
                factors.append(gibbs_state(b.hamiltonian, self.constants.beta(b.temperature)))
        return tensor(*factors)

    def composed_channel(self, rho: np.ndarray) -> np.ndarray:
        """Whole protocol as one map: ``sum_k U_f U_k M_k U_i rho U_i† M_k† U_k† U_f†``."""
        out = np.zeros_like(rho, dtype=complex)
        for m, uk in zip(self.embedded_channel().operators, self.feedback_unitaries):
            kraus = self.stage5_unitary @ uk @ m @ self.stage2_unitary
            out += kraus @ rho @ dagger(kraus)
        return hermitize(out)

    @property
    def is_cyclic_hamiltonian(self) -> bool:
        return bool(np.array_equal(self.system_hamiltonian_initial, self.system_hamiltonian_final))


@dataclass
class ProtocolLedger:
    rho_i: np.ndarray
    rho_1: np.ndarray
    rho_f: np.ndarray
    branches_2: BranchEnsemble
    branches_3: BranchEnsemble
    outcome_dist: OutcomeDistribution
    info: InformationReport
    E_S_initial: float
    E_S_final: float
    E_bath_initial: dict[str, float]
    E_bath_final: dict[str, float]
    Q: dict[str, float]
    delta_U_S: float
    delta_F_S: float
    W_ext: float
    S_initial: float
    S_final: float
    system_temperature: float
    bath_temperatures: dict[str, float]
    constants: PhysicalConstants = DEFAULT_CONSTANTS
    cyclic_hamiltonian: bool = False
    diagnostics: dict[str, float] = field(default_factory=dict)
    mode: str = "simulated"

    @property
    def qc_mutual(self) -> float:
        return self.info.qc_mutual

    @property
    def entropy_reduction(self) -> float:
        return self.S_initial - self.S_final


def run(spec: ProtocolSpec) -> ProtocolLedger:
    """Execute the five stages and fill in the thermodynamic ledger."""
    c = spec.constants
    beta = c.beta(spec.system_temperature)
    sys_label = spec.system_label

    rho_i = spec.initial_state()
    u_i = spec.stage2_unitary
    rho_1 = hermitize(u_i @ rho_i @ dagger(u_i))

    channel = spec.embedded_channel()
    dist, branches_2 = measure(rho_1, channel)
    branches_3 = branches_2.map(spec.feedback_unitaries)
    rho_3 = branches_3.average()
    u_f = spec.stage5_unitary
    rho_f = hermitize(u_f @ rho_3 @ dagger(u_f))

    info = qc_mutual_info(rho_1, channel)

    space = spec.space
    e_s_i = internal_energy(partial_trace(rho_i, space, [sys_label]), spec.system_hamiltonian_initial)
    e_s_f = internal_energy(partial_trace(rho_f, space, [sys_label]), spec.system_hamiltonian_final)
    e_b_i, e_b_f, heats = {}, {}, {}
    for b in spec.baths:
        e_b_i[b.label] = internal_energy(partial_trace(rho_i, space, [b.label]), b.hamiltonian)
        e_b_f[b.label] = internal_energy(partial_trace(rho_f, space, [b.label]), b.hamiltonian)
        heats[b.label] = e_b_i[b.label] - e_b_f[b.label]
    delta_u = e_s_f - e_s_i
    delta_f = free_energy(spec.system_hamiltonian_final, beta) - free_energy(spec.system_hamiltonian_initial, beta)
    w_ext = sum(heats.values()) - delta_u

    rho_3_mean = rho_3
    spread = max((max_norm(b.state - rho_3_mean) for b in branches_3.present), default=0.0)
    can_f = spec.final_canonical_state()
    diagnostics = {
        "composed_channel_residual": max_norm(rho_f - spec.composed_channel(rho_i)),
        "feedback_spread": spread,
        "trace_distance_to_canonical": 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(rho_f - can_f))))),
    }

    return ProtocolLedger(
        rho_i=rho_i,
        rho_1=rho_1,
        rho_f=rho_f,
        branches_2=branches_2,
        branches_3=branches_3,
        outcome_dist=dist,
        info=info,
        E_S_initial=e_s_i,
        E_S_final=e_s_f,
        E_bath_initial=e_b_i,
        E_bath_final=e_b_f,
        Q=heats,
        delta_U_S=delta_u,
        delta_F_S=delta_f,
        W_ext=w_ext,
        S_initial=von_neumann_entropy(rho_i),
        S_final=von_neumann_entropy(rho_f),
        system_temperature=spec.system_temperature,
        bath_temperatures={b.label: b.temperature for b in spec.baths},
        constants=c,
        cyclic_hamiltonian=spec.is_cyclic_hamiltonian,
        diagnostics=diagnostics,
    )


@dataclass(frozen=True)
class InequalityVerdict:
    name: str
    lhs: float
    rhs: float
    slack: float
    satisfied: bool
    tolerance: float

    @classmethod
    def of(cls, name: str, lhs: float, rhs: float, tolerance: float) -> "InequalityVerdict":
        lhs, rhs = float(lhs), float(rhs)
        slack = rhs - lhs
        return cls(name, lhs, rhs, slack, bool(slack >= -tolerance), float(tolerance))


def verify_entropy_inequality(ledger, tolerance: float = DEFAULT_TOLERANCE) -> InequalityVerdict:
    """Entropy reduction ``S(rho_i) - S(rho_f)`` against ``I(rho_1 : X)``."""
    return InequalityVerdict.of("entropy", ledger.entropy_reduction, ledger.qc_mutual, tolerance)


def verify_exact_second_law(ledger, tolerance: float = DEFAULT_TOLERANCE) -> InequalityVerdict:
    """``-dU_S + sum_m (T/T_m) Q_m <= -dF_S + k_B T I``.

    Holds for any final state since only the initial state is assumed canonical.
    """
    t = ledger.system_temperature
    lhs = -ledger.delta_U_S + sum(t / ledger.bath_temperatures[m] * q for m, q in ledger.Q.items())
    rhs = -ledger.delta_F_S + ledger.constants.k_B * t * ledger.qc_mutual
    return InequalityVerdict.of("second_law", lhs, rhs, tolerance)


def _is_feedback_free_cycle(ledger) -> bool:
    return (
        ledger.qc_mutual <= CYCLE_TOL
        and abs(ledger.delta_U_S) <= CYCLE_TOL
        and abs(ledger.delta_F_S) <= CYCLE_TOL
    )


def verify_clausius(ledger, tolerance: float = DEFAULT_TOLERANCE) -> InequalityVerdict:
    if not _is_feedback_free_cycle(ledger):
        raise PreconditionError(
            "not a feedback-free cycle: "
            f"I={ledger.qc_mutual:.3e}, dU={ledger.delta_U_S:.3e}, dF={ledger.delta_F_S:.3e}"
        )
    lhs = sum(q / ledger.bath_temperatures[m] for m, q in ledger.Q.items())
    return InequalityVerdict.of("clausius", lhs, 0.0, tolerance)


def verify_isothermal(ledger, tolerance: float = DEFAULT_TOLERANCE) -> InequalityVerdict:
    """``W_ext <= -dF_S + k_B T I`` for a single bath at the system temperature."""
    if len(ledger.bath_temperatures) != 1:
        raise PreconditionError(f"isothermal bound needs exactly one bath, got {len(ledger.bath_temperatures)}")
    (t_bath,) = ledger.bath_temperatures.values()
    t = ledger.system_temperature
    if not np.isclose(t_bath, t, rtol=1e-12, atol=0.0):
        raise PreconditionError(f"bath temperature {t_bath} differs from system temperature {t}")
    rhs = -ledger.delta_F_S + ledger.constants.k_B * t * ledger.qc_mutual
    return InequalityVerdict.of("isothermal", ledger.W_ext, rhs, tolerance)


def verify_two_bath(ledger, hot_label: str, cold_label: str, tolerance: float = DEFAULT_TOLERANCE) -> InequalityVerdict:
    """``W_ext <= (1 - T_L/T_H) Q_H + k_B T_L I`` for a two-bath cycle."""
    temps = ledger.bath_temperatures
    if len(temps) != 2 or set(temps) != {hot_label, cold_label}:
        raise PreconditionError(f"two-bath bound needs baths {{{hot_label}, {cold_label}}}, got {sorted(temps)}")
    t_h, t_l = temps[hot_label], temps[cold_label]
    if not t_h > t_l:
        raise PreconditionError(f"hot bath ({t_h}) must be hotter than cold bath ({t_l})")
    if not (ledger.cyclic_hamiltonian and abs(ledger.delta_U_S) <= CYCLE_TOL and abs(ledger.delta_F_S) <= CYCLE_TOL):
        raise PreconditionError(
            f"not a cycle: dU={ledger.delta_U_S:.3e}, dF={ledger.delta_F_S:.3e}, "
            f"same Hamiltonian={ledger.cyclic_hamiltonian}"
        )
    rhs = (1 - t_l / t_h) * ledger.Q[hot_label] + ledger.constants.k_B * t_l * ledger.qc_mutual
    return InequalityVerdict.of("two_bath", ledger.W_ext, rhs, tolerance)


def applicable_verdicts(ledger, tolerance: float = DEFAULT_TOLERANCE) -> list[InequalityVerdict]:
    """Every verifier whose preconditions the ledger meets."""
    out = [verify_entropy_inequality(ledger, tolerance), verify_exact_second_law(ledger, tolerance)]
    temps = ledger.bath_temperatures
    if _is_feedback_free_cycle(ledger) and temps:
        out.append(verify_clausius(ledger, tolerance))
    if len(temps) == 1 and np.isclose(next(iter(temps.values())), ledger.system_temperature, rtol=1e-12, atol=0.0):
        out.append(verify_isothermal(ledger, tolerance))
    if len(temps) == 2:
        (a, ta), (b, tb) = temps.items()
        if ta != tb:
            hot, cold = (a, b) if ta > tb else (b, a)
            try:
                out.append(verify_two_bath(ledger, hot, cold, tolerance))
            except PreconditionError:
                pass
    return out

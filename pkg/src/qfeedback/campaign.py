"""Seeded randomized verification campaigns.

Every instance draws from its own generator seeded with ``(config.seed,
index)``, and the aggregate statistics are commutative reductions, so a
report depends only on the configuration.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import schur
from scipy.optimize import brentq

from . import information as info_mod
from .measurement import (
    MeasurementChannel,
    random_channel,
    random_density,
    random_hermitian,
    random_unitary,
    trivial_channel,
    uninformative_channel,
)
from .operators import CompositeSpace, dagger, eigh, hermitize, max_norm, partial_trace
from .protocol import DEFAULT_TOLERANCE, InequalityVerdict, ProtocolSpec, applicable_verdicts, run
from .thermo import BathSpec, gibbs_state, internal_energy

MODES = ("protocol", "information")
CHANNEL_KINDS = ("random", "trivial", "uninformative", "projective", "commuting")
_PROTOCOL_CHANNELS = ("random", "trivial", "uninformative")
_TEMPERATURE_RANGE = (0.5, 2.5)
_MAX_REDRAWS = 20


@dataclass(frozen=True)
class CampaignConfig:
    seed: int = 0
    n_instances: int = 100
    system_dims: tuple[int, ...] = (2,)
    bath_dims: tuple[int, ...] = (4,)
    n_outcomes_range: tuple[int, int] = (2, 2)
    n_baths_range: tuple[int, int] = (1, 1)
    tolerance: float = DEFAULT_TOLERANCE
    mode: str = "protocol"
    channel_kind: str = "random"
    cyclic: bool = False
    record_instances: bool = False

    def __post_init__(self):
        for name in ("system_dims", "bath_dims", "n_outcomes_range", "n_baths_range"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
        if self.n_instances < 1:
            raise ValueError("n_instances must be >= 1")
        if not self.system_dims or min(self.system_dims) < 1:
            raise ValueError("system_dims must be non-empty and positive")
        if self.mode == "protocol" and (not self.bath_dims or min(self.bath_dims) < 1):
            raise ValueError("bath_dims must be non-empty and positive")
        lo, hi = self.n_outcomes_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad outcome range {self.n_outcomes_range}")
        lo, hi = self.n_baths_range
        if not 0 <= lo <= hi:
            raise ValueError(f"bad bath-count range {self.n_baths_range}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.channel_kind not in CHANNEL_KINDS:
            raise ValueError(f"channel kind must be one of {CHANNEL_KINDS}")
        if self.mode == "protocol" and self.channel_kind not in _PROTOCOL_CHANNELS:
            raise ValueError(f"protocol campaigns support channels {_PROTOCOL_CHANNELS}")
        if not self.tolerance >= 0:
            raise ValueError("tolerance must be non-negative")


@dataclass
class VerdictStats:
    checked: int = 0
    satisfied: int = 0
    worst_slack: float | None = None
    worst_instance: int | None = None

    def add(self, verdict: InequalityVerdict, instance: int) -> None:
        self.checked += 1
        self.satisfied += int(verdict.satisfied)
        s = verdict.slack
        if (
            self.worst_slack is None
            or s < self.worst_slack
            or (s == self.worst_slack and instance < self.worst_instance)
        ):
            self.worst_slack = s
            self.worst_instance = instance


@dataclass
class CampaignReport:
    config: CampaignConfig
    verdicts: dict[str, VerdictStats] = field(default_factory=dict)
    violations: list[dict] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)
    instances: list[dict] | None = None
    wall_time: float | None = None

    @property
    def n_violations(self) -> int:
        return len(self.violations)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.errors

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "schema_version": 1,
            "kind": "campaign",
            "config": asdict(self.config),
            "verdicts": {name: asdict(s) for name, s in sorted(self.verdicts.items())},
            "n_violations": self.n_violations,
            "violations": self.violations,
            "errors": self.errors,
        }
        if self.instances is not None:
            out["instances"] = self.instances
        if include_timing and self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out


def _closeness(name: str, residual: float, tolerance: float) -> InequalityVerdict:
    return InequalityVerdict.of(name, abs(residual), 0.0, tolerance)


# ---------------------------------------------------------------- information


def information_verdicts(rho: np.ndarray, channel: MeasurementChannel) -> tuple[list[InequalityVerdict], info_mod.InformationReport]:
    """Bounds, identities and proof-construction checks for one ``(rho, channel)`` pair."""
    rep = info_mod.qc_mutual_info(rho, channel)
    out = [
        InequalityVerdict.of("qc_lower", 0.0, rep.qc_mutual, 1e-9),
        InequalityVerdict.of("qc_upper", rep.qc_mutual, rep.shannon, 1e-9),
        _closeness("holevo_decomposition", rep.qc_mutual - (rep.holevo_chi - rep.delta_s_meas), 1e-8),
        _closeness("h_tilde_forms", rep.h_tilde - info_mod.h_tilde_direct(rho, channel), 1e-8),
        InequalityVerdict.of("subadditivity", rep.h_tilde, rep.s_rho + rep.shannon, 1e-9),
    ]

    pair = info_mod.sigma_pair(rho, channel)
    s1 = info_mod.von_neumann_entropy(pair.sigma1)
    s2 = info_mod.von_neumann_entropy(pair.sigma2)
    out.append(_closeness("sigma_entropies", max(abs(s1 - s2), abs(s2 - rep.h_tilde)), 1e-8))
    out.append(_closeness("sigma_marginal_Q", max_norm(partial_trace(pair.sigma1, pair.space, ["Q"]) - rho), 1e-9))
    out.append(_closeness("sigma_marginal_R", max_norm(partial_trace(pair.sigma1, pair.space, ["R"]) - pair.r_marginal), 1e-9))

    d = info_mod.dij_matrix(rho, channel)
    stoch = max(np.max(np.abs(d.sum(axis=0) - 1)), np.max(np.abs(d.sum(axis=1) - 1)))
    out.append(_closeness("dij_doubly_stochastic", stoch, 1e-8))
    rho_prime = sum(info_mod.sandwiches(rho, channel))
    out.append(InequalityVerdict.of("mixing_entropy", rep.s_rho, info_mod.von_neumann_entropy(rho_prime), 1e-8))
    return out, rep


def _random_rank(rng: np.random.Generator, dim: int) -> int:
    # full rank half the time, otherwise anything from pure upwards
    return dim if rng.random() < 0.5 else int(rng.integers(1, dim + 1))


def draw_information_instance(rng: np.random.Generator, config: CampaignConfig) -> dict:
    """Random state and channel of the configured kind, plus any known classical structure."""
    dim = int(rng.choice(config.system_dims))
    lo, hi = config.n_outcomes_range
    n = int(rng.integers(lo, hi + 1))
    kind = config.channel_kind
    inst = {"dim": dim, "n_outcomes": n, "kind": kind}

    if kind in ("random", "trivial", "uninformative"):
        rho = random_density(dim, rng, rank=_random_rank(rng, dim))
        if kind == "random":
            channel = random_channel(dim, n, rng)
        elif kind == "trivial":
            channel = MeasurementChannel((random_unitary(dim, rng),))
        else:
            channel = uninformative_channel(dim, rng.dirichlet(np.ones(n)), rng)
    else:
        basis = random_unitary(dim, rng)
        q = rng.dirichlet(np.ones(dim))
        if rng.random() < 0.25:
            q[rng.integers(dim)] = 0.0
            q /= q.sum()
        rho = hermitize((basis * q) @ dagger(basis))
        if kind == "projective":
            groups = rng.integers(0, n, size=dim)
            cond = np.zeros((dim, n))
            cond[np.arange(dim), groups] = 1.0
        else:
            cond = rng.dirichlet(np.ones(n), size=dim)
        ops = []
        for k in range(n):
            sqrt_d = (basis * np.sqrt(cond[:, k])) @ dagger(basis)
            ops.append(random_unitary(dim, rng) @ sqrt_d)
        channel = MeasurementChannel(tuple(ops))
        inst["prior"] = q
        inst["conditional"] = cond
    inst["rho"] = rho
    inst["channel"] = channel
    return inst


def _information_instance_verdicts(inst: dict) -> tuple[list[InequalityVerdict], dict]:
    rho, channel = inst["rho"], inst["channel"]
    out, rep = information_verdicts(rho, channel)
    kind = inst["kind"]
    if kind == "uninformative":
        out.append(_closeness("uninformative_zero", rep.qc_mutual, 1e-9))
    elif kind == "projective":
        out.append(_closeness("error_free_equals_shannon", rep.qc_mutual - rep.shannon, 1e-9))
    elif kind == "commuting":
        q, cond = info_mod.shared_eigenbasis(rho, channel)
        oracle = info_mod.classical_mutual_info_oracle(q, cond)
        out.append(_closeness("classical_oracle", rep.qc_mutual - oracle, 1e-9))
    record = {"dim": inst["dim"], "n_outcomes": inst["n_outcomes"], "qc_mutual": rep.qc_mutual, "shannon": rep.shannon}
    return out, record


# ---------------------------------------------------------------- protocols


def _unitary_log(u: np.ndarray) -> np.ndarray:
    t, z = schur(u, output="complex")
    return (z * np.log(np.diag(t))) @ dagger(z)


def _energy_matching_rotation(h: np.ndarray, sigma: np.ndarray, target: float) -> np.ndarray | None:
    """Unitary ``W`` with ``tr(h W sigma W†) = target``, or ``None`` if out of reach.

    Reachable energies form the interval between the anti-sorted and sorted
    pairings of the two spectra; a smooth unitary path between those two
    extremal rotations hits every value in between.
    """
    _, vh = eigh(h)
    _, vs = eigh(sigma)
    vs = vs[:, ::-1]  # descending populations
    w_low = vh @ dagger(vs)
    w_high = vh[:, ::-1] @ dagger(vs)

    def energy(w):
        return internal_energy(w @ sigma @ dagger(w), h)

    lo, hi = energy(w_low), energy(w_high)
    if not lo <= target <= hi:
        return None
    gen = _unitary_log(dagger(w_low) @ w_high)
    ev, ez = np.linalg.eigh(hermitize(-1j * gen))

    def path(t):
        return w_low @ ((ez * np.exp(1j * t * ev)) @ dagger(ez))

    def gap(t):
        return energy(path(t)) - target

    g0, g1 = gap(0.0), gap(1.0)
    if g0 * g1 > 0:
        # target sits on an endpoint up to rounding
        best = min((abs(g0), 0.0), (abs(g1), 1.0))
        return path(best[1]) if best[0] <= 1e-12 else None
    t_star = brentq(gap, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return path(t_star)


def _close_cycle(spec: ProtocolSpec) -> ProtocolSpec | None:
    """Follow the last stage with a rotation of the whole space so the system energy returns to its start.

    A system-only rotation is not enough in general: after strong coupling
    the system marginal is often more mixed than its initial canonical state.
    """
    rho_f = spec.composed_channel(spec.initial_state())
    beta = spec.constants.beta(spec.system_temperature)
    h_full = spec.space.embed(spec.system_hamiltonian_final, spec.system_label)
    target = internal_energy(gibbs_state(spec.system_hamiltonian_initial, beta), spec.system_hamiltonian_initial)
    w = _energy_matching_rotation(h_full, rho_f, target)
    if w is None:
        return None
    return ProtocolSpec(
        space=spec.space,
        system_hamiltonian_initial=spec.system_hamiltonian_initial,
        system_hamiltonian_final=spec.system_hamiltonian_final,
        system_temperature=spec.system_temperature,
        baths=spec.baths,
        stage2_unitary=spec.stage2_unitary,
        channel=spec.channel,
        feedback_unitaries=spec.feedback_unitaries,
        stage5_unitary=w @ spec.stage5_unitary,
        constants=spec.constants,
        system_label=spec.system_label,
    )


def _draw_spec_once(rng: np.random.Generator, config: CampaignConfig) -> ProtocolSpec:
    ds = int(rng.choice(config.system_dims))
    lo, hi = config.n_baths_range
    n_baths = int(rng.integers(lo, hi + 1))
    bath_dims = [int(rng.choice(config.bath_dims)) for _ in range(n_baths)]
    lo, hi = config.n_outcomes_range
    n_out = int(rng.integers(lo, hi + 1))

    labels = ["S"] + [f"B{m + 1}" for m in range(n_baths)]
    space = CompositeSpace([ds] + bath_dims, labels)
    dim = space.total_dim

    temps = rng.uniform(*_TEMPERATURE_RANGE, size=n_baths)
    if n_baths and rng.random() < 0.5:
        t_sys = float(temps[0])
    else:
        t_sys = float(rng.uniform(*_TEMPERATURE_RANGE))
    baths = tuple(
        BathSpec(labels[m + 1], random_hermitian(bath_dims[m], 2.0, rng), float(temps[m])) for m in range(n_baths)
    )
    h_i = random_hermitian(ds, 2.0, rng)
    if config.cyclic or rng.random() < 0.25:
        h_f = h_i
    else:
        h_f = random_hermitian(ds, 2.0, rng)

    if rng.random() < 0.5:
        stage2 = random_unitary(dim, rng)
    else:
        stage2 = [(random_hermitian(dim, 2.0, rng), float(rng.uniform(0.1, 2.0))) for _ in range(2)]

    kind = config.channel_kind
    if kind == "random":
        channel = random_channel(ds, n_out, rng)
    elif kind == "trivial":
        channel = trivial_channel(ds)
    else:
        channel = uninformative_channel(ds, rng.dirichlet(np.ones(n_out)), rng)
    feedback = tuple(random_unitary(dim, rng) for _ in range(channel.n_outcomes))
    stage5 = random_unitary(dim, rng)
    return ProtocolSpec(space, h_i, h_f, t_sys, baths, stage2, channel, feedback, stage5)


def draw_protocol_spec(rng: np.random.Generator, config: CampaignConfig) -> ProtocolSpec:
    """Random protocol; with ``config.cyclic`` the system energy is returned to its initial value.

    Draws whose final state cannot reach the initial system energy by any
    rotation are discarded and redrawn from the same generator.
    """
    for _ in range(_MAX_REDRAWS):
        spec = _draw_spec_once(rng, config)
        if not config.cyclic:
            return spec
        closed = _close_cycle(spec)
        if closed is not None:
            return closed
    raise RuntimeError(f"no cyclic protocol found in {_MAX_REDRAWS} draws")


def protocol_verdicts(ledger, tolerance: float = DEFAULT_TOLERANCE) -> list[InequalityVerdict]:
    """Thermodynamic verifiers plus bookkeeping identities of a simulated run."""
    out = applicable_verdicts(ledger, tolerance)
    rep = ledger.info
    out.append(InequalityVerdict.of("qc_lower", 0.0, rep.qc_mutual, 1e-9))
    out.append(InequalityVerdict.of("qc_upper", rep.qc_mutual, rep.shannon, 1e-9))
    out.append(_closeness("composed_channel", ledger.diagnostics["composed_channel_residual"], 1e-9))
    out.append(_closeness("first_law", ledger.W_ext - sum(ledger.Q.values()) + ledger.delta_U_S, 1e-10))
    out.append(_closeness("unitary_entropy", rep.s_rho - ledger.S_initial, 1e-9))
    branches = ledger.branches_3.present
    mean_s = sum(b.probability * info_mod.von_neumann_entropy(b.state) for b in branches)
    s_mix = info_mod.von_neumann_entropy(ledger.branches_3.average())
    out.append(InequalityVerdict.of("convexity", mean_s, s_mix, 1e-9))
    return out


def _protocol_instance_verdicts(rng: np.random.Generator, config: CampaignConfig) -> tuple[list[InequalityVerdict], dict]:
    spec = draw_protocol_spec(rng, config)
    ledger = run(spec)
    record = {
        "factor_dims": list(spec.space.factor_dims),
        "n_outcomes": spec.channel.n_outcomes,
        "W_ext": ledger.W_ext,
        "qc_mutual": ledger.qc_mutual,
    }
    return protocol_verdicts(ledger, config.tolerance), record


# ---------------------------------------------------------------- driver


def instance_rng(config: CampaignConfig, index: int) -> np.random.Generator:
    return np.random.default_rng([config.seed, index])


def run_instance(config: CampaignConfig, index: int) -> tuple[list[InequalityVerdict], dict]:
    rng = instance_rng(config, index)
    if config.mode == "information":
        return _information_instance_verdicts(draw_information_instance(rng, config))
    return _protocol_instance_verdicts(rng, config)


def random_campaign(config: CampaignConfig) -> CampaignReport:
    start = time.perf_counter()
    report = CampaignReport(config, instances=[] if config.record_instances else None)
    for i in range(config.n_instances):
        try:
            verdicts, record = run_instance(config, i)
        except Exception as exc:  # recorded, not raised
            report.errors.append({"instance": i, "error": f"{type(exc).__name__}: {exc}"})
            continue
        for v in verdicts:
            report.verdicts.setdefault(v.name, VerdictStats()).add(v, i)
            if not v.satisfied:
                report.violations.append({"instance": i, "name": v.name, "lhs": v.lhs, "rhs": v.rhs, "slack": v.slack})
        if report.instances is not None:
            record["instance"] = i
            record["verdicts"] = {v.name: v.slack for v in verdicts}
            report.instances.append(record)
    report.wall_time = time.perf_counter() - start
    return report

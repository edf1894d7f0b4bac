import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import P0, P1, PLUS
from qfeedback.measurement import (
    MeasurementChannel,
    computational_basis_channel,
    is_classical,
    measure,
    noisy_projective_channel,
    povm,
    random_channel,
    random_density,
    random_unitary,
    schedule_unitary,
    uninformative_channel,
    unitary_from_hamiltonian,
)
from qfeedback.operators import InvalidOperatorError, dagger, validate

seeds = st.integers(0, 2**32 - 1)


class TestPovm:
    def test_projective(self):
        ds = povm(computational_basis_channel(2))
        np.testing.assert_allclose(ds[0], P0)
        np.testing.assert_allclose(ds[1], P1)

    def test_uninformative(self):
        m = np.eye(2) / np.sqrt(2)
        ds = povm(MeasurementChannel((m, m)))
        for d in ds:
            np.testing.assert_allclose(d, np.eye(2) / 2)

    def test_noisy_two_outcome(self):
        ch = noisy_projective_channel([P0, P1], 0.1)
        # sqrt(0.1 I + 0.8 P0) = diag(sqrt(0.9), sqrt(0.1)); squared gives diag(0.9, 0.1)
        np.testing.assert_allclose(ch.operators[0], np.diag([np.sqrt(0.9), np.sqrt(0.1)]), atol=1e-15)
        ds = povm(ch)
        np.testing.assert_allclose(ds[0], 0.1 * np.eye(2) + 0.8 * P0, atol=1e-15)
        np.testing.assert_allclose(ds[1], 0.1 * np.eye(2) + 0.8 * P1, atol=1e-15)

    def test_incomplete_rejected(self):
        with pytest.raises(InvalidOperatorError):
            MeasurementChannel((np.sqrt(0.6) * np.eye(2), np.sqrt(0.3) * np.eye(2)))


class TestMeasure:
    def test_uninformative_leaves_state(self, rng):
        rho = random_density(2, rng)
        m = np.eye(2) / np.sqrt(2)
        dist, ens = measure(rho, MeasurementChannel((m, m)))
        np.testing.assert_allclose(dist.probabilities, [0.5, 0.5])
        for b in ens.branches:
            np.testing.assert_allclose(b.state, rho, atol=1e-15)

    def test_classical_diagonal(self):
        dist, ens = measure(np.diag([0.7, 0.3]), computational_basis_channel(2))
        np.testing.assert_allclose(dist.probabilities, [0.7, 0.3])
        np.testing.assert_allclose(ens.branches[0].state, P0)
        np.testing.assert_allclose(ens.branches[1].state, P1)

    def test_plus_state(self):
        dist, ens = measure(PLUS, computational_basis_channel(2))
        np.testing.assert_allclose(dist.probabilities, [0.5, 0.5])
        np.testing.assert_allclose(ens.branches[0].state, P0)
        np.testing.assert_allclose(ens.branches[1].state, P1)
        np.testing.assert_allclose(ens.average(), np.eye(2) / 2)

    def test_zero_probability_branch_dropped(self):
        dist, ens = measure(np.diag([1.0, 0.0]), computational_basis_channel(2))
        assert [b.present for b in ens.branches] == [True, False]
        assert dist.probabilities[1] == 0.0
        np.testing.assert_allclose(ens.average(), np.diag([1.0, 0.0]))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            measure(np.eye(3) / 3, computational_basis_channel(2))

    @settings(max_examples=100, deadline=None)
    @given(seeds)
    def test_branch_properties(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(2, 5))
        rho = random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        ch = random_channel(d, int(rng.integers(1, 5)), rng)
        dist, ens = measure(rho, ch)
        assert abs(sum(b.probability * np.trace(b.state).real for b in ens.present) - 1) <= 1e-9
        for b in ens.present:
            assert np.linalg.eigvalsh(b.state).min() >= -1e-10
        # tr(sqrt(rho) D sqrt(rho)) = tr(sqrt(D) rho sqrt(D)) = p_k
        w, v = np.linalg.eigh(rho)
        sqrt_rho = (v * np.sqrt(np.clip(w, 0, None))) @ dagger(v)
        for d_k, p in zip(povm(ch), dist.probabilities):
            wd, vd = np.linalg.eigh(d_k)
            sqrt_d = (vd * np.sqrt(np.clip(wd, 0, None))) @ dagger(vd)
            assert abs(np.trace(sqrt_rho @ d_k @ sqrt_rho) - p) <= 1e-9
            assert abs(np.trace(sqrt_d @ rho @ sqrt_d) - p) <= 1e-9


class TestIsClassical:
    def test_cases(self, rng):
        assert is_classical(np.diag([0.6, 0.4]), computational_basis_channel(2))
        assert not is_classical(PLUS, computational_basis_channel(2))
        assert is_classical(random_density(3, rng), uninformative_channel(3, [0.2, 0.8], rng))

    @settings(max_examples=50, deadline=None)
    @given(seeds)
    def test_classical_branches_commute_with_state(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(2, 5))
        u = random_unitary(d, rng)
        rho = (u * rng.dirichlet(np.ones(d))) @ dagger(u)
        cond = rng.dirichlet(np.ones(3), size=d)
        ch = MeasurementChannel(tuple((u * np.sqrt(cond[:, k])) @ dagger(u) for k in range(3)))
        assert is_classical(rho, ch)
        _, ens = measure(rho, ch)
        for b in ens.present:
            assert np.max(np.abs(b.state @ rho - rho @ b.state)) <= 1e-8


class TestGenerators:
    def test_single_outcome_is_unitary(self):
        (m,) = random_channel(4, 1, seed=5).operators
        np.testing.assert_allclose(dagger(m) @ m, np.eye(4), atol=1e-12)

    def test_channel_determinism(self):
        a, b = random_channel(3, 2, seed=11), random_channel(3, 2, seed=11)
        for x, y in zip(a.operators, b.operators):
            np.testing.assert_array_equal(x, y)

    def test_channel_validates(self):
        ch = random_channel(3, 4, seed=7)
        assert validate(povm(ch)).ok
        assert ch.completeness_residual() <= 1e-10

    def test_completeness_across_seeds(self):
        worst = max(random_channel(3, 3, seed=s).completeness_residual() for s in range(1000))
        assert worst <= 1e-9

    def test_unitary(self):
        u = random_unitary(1, seed=0)
        assert u.shape == (1, 1) and abs(abs(u[0, 0]) - 1) < 1e-15
        u = random_unitary(8, seed=3)
        assert np.max(np.abs(dagger(u) @ u - np.eye(8))) <= 1e-10
        np.testing.assert_array_equal(random_unitary(5, seed=9), random_unitary(5, seed=9))

    def test_haar_first_moment(self):
        # E|U_00|^2 = 1/d for Haar measure
        d = 3
        vals = [abs(random_unitary(d, seed=s)[0, 0]) ** 2 for s in range(4000)]
        assert np.mean(vals) == pytest.approx(1 / d, abs=0.02)


class TestHamiltonianEvolution:
    def test_zero_duration(self):
        h = np.diag([0.3, -1.2])
        np.testing.assert_allclose(unitary_from_hamiltonian(h, 0.0), np.eye(2))

    def test_phase(self):
        np.testing.assert_allclose(unitary_from_hamiltonian(np.diag([0.0, np.pi]), 1.0), np.diag([1.0, -1.0]), atol=1e-15)

    def test_semigroup_and_schedule(self, rng):
        g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        h = g + dagger(g)
        u1, u2 = unitary_from_hamiltonian(h, 0.3), unitary_from_hamiltonian(h, 0.9)
        np.testing.assert_allclose(u1 @ u2, unitary_from_hamiltonian(h, 1.2), atol=1e-10)
        h2 = np.diag([1.0, 2.0, 3.0])
        sched = schedule_unitary([(h, 0.3), (h2, 0.5)])
        np.testing.assert_allclose(sched, unitary_from_hamiltonian(h2, 0.5) @ u1, atol=1e-12)

    def test_hbar(self):
        from qfeedback.thermo import PhysicalConstants

        h = np.diag([0.0, 1.0])
        np.testing.assert_allclose(
            unitary_from_hamiltonian(h, 2.0, PhysicalConstants(hbar=2.0)), unitary_from_hamiltonian(h, 1.0)
        )

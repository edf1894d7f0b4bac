import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfeedback.information import von_neumann_entropy
from qfeedback.measurement import random_density, random_hermitian
from qfeedback.thermo import (
    BathSpec,
    PhysicalConstants,
    free_energy,
    gibbs_state,
    internal_energy,
    partition_function,
)

E1 = np.exp(-1.0)


class TestGibbs:
    def test_degenerate(self):
        np.testing.assert_allclose(gibbs_state(np.zeros((3, 3)), 0.7), np.eye(3) / 3)

    def test_ground_state_limit(self):
        energy = 2.5
        rho = gibbs_state(np.diag([0.0, energy]), 1e3 / energy)
        np.testing.assert_allclose(rho, np.diag([1.0, 0.0]), atol=1e-300)

    def test_two_level(self):
        np.testing.assert_allclose(gibbs_state(np.diag([0.0, 1.0]), 1.0), np.diag([1.0, E1]) / (1 + E1))

    def test_no_overflow(self):
        rho = gibbs_state(np.diag([-1e4, 0.0, 1e4]), 10.0)
        assert np.isfinite(rho).all()
        assert rho[0, 0] == pytest.approx(1.0)

    def test_rejects_nonpositive_beta(self):
        for beta in (0.0, -1.0):
            with pytest.raises(ValueError):
                gibbs_state(np.eye(2), beta)
            with pytest.raises(ValueError):
                partition_function(np.eye(2), beta)
            with pytest.raises(ValueError):
                free_energy(np.eye(2), beta)


class TestPartitionAndFreeEnergy:
    def test_partition_values(self):
        assert partition_function(np.zeros((4, 4)), 1.3) == pytest.approx(4.0)
        assert partition_function(np.diag([0.0, 1.0]), 1.0) == pytest.approx(1 + E1)
        assert partition_function(np.diag([-1.0, 0.0, 1.0]), 2.0) == pytest.approx(np.exp(2) + 1 + np.exp(-2))

    def test_free_energy_values(self):
        assert free_energy(np.zeros((5, 5)), 1.0) == pytest.approx(-np.log(5))
        assert free_energy(np.diag([0.0, 1.0]), 1.0) == pytest.approx(-np.log(1 + E1))
        delta = free_energy(np.diag([0.0, 2.0]), 1.0) - free_energy(np.diag([0.0, 1.0]), 1.0)
        assert delta == pytest.approx(-np.log(1 + np.exp(-2)) + np.log(1 + E1))

    def test_k_b_folds_into_beta(self):
        c = PhysicalConstants(k_B=2.0)
        # T = 1 with k_B = 2 is beta = 1/2
        assert c.beta(1.0) == 0.5
        assert free_energy(np.zeros((3, 3)), c.beta(1.0)) == pytest.approx(-2.0 * np.log(3))

    def test_constants_positive(self):
        with pytest.raises(ValueError):
            PhysicalConstants(k_B=0.0)
        with pytest.raises(ValueError):
            PhysicalConstants(hbar=-1.0)
        with pytest.raises(ValueError):
            BathSpec("B", np.eye(2), 0.0)


class TestInternalEnergy:
    def test_values(self):
        h = np.diag([1.0, -2.0, 4.0])
        assert internal_energy(np.eye(3) / 3, h) == pytest.approx(1.0)
        g = gibbs_state(np.diag([0.0, 1.0]), 1.0)
        assert internal_energy(g, np.diag([0.0, 1.0])) == pytest.approx(E1 / (1 + E1))
        assert internal_energy(np.diag([1.0, 0.0]), np.diag([0.0, 5.0])) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            internal_energy(np.eye(2) / 2, np.eye(3))


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(seeds, st.floats(0.1, 5.0))
def test_gibbs_minimizes_free_energy_functional(seed, beta):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 5))
    h = random_hermitian(d, 2.0, rng)
    g = gibbs_state(h, beta)
    rho = random_density(d, rng, rank=int(rng.integers(1, d + 1)))
    f_rho = internal_energy(rho, h) - von_neumann_entropy(rho) / beta
    f_gibbs = internal_energy(g, h) - von_neumann_entropy(g) / beta
    assert f_rho >= f_gibbs - 1e-9
    # F = U - TS
    assert free_energy(h, beta) == pytest.approx(f_gibbs, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_energy_nonincreasing_in_beta(seed):
    h = random_hermitian(4, 2.0, seed)
    energies = [internal_energy(gibbs_state(h, b), h) for b in np.linspace(0.05, 20, 80)]
    assert np.all(np.diff(energies) <= 1e-12)

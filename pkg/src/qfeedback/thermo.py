"""Canonical states and the thermodynamic bookkeeping built on them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .operators import DimensionError, eigh, hermitize, dagger


@dataclass(frozen=True)
class PhysicalConstants:
    k_B: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.k_B > 0 and self.hbar > 0):
            raise ValueError(f"constants must be strictly positive: k_B={self.k_B}, hbar={self.hbar}")

    def beta(self, temperature: float) -> float:
        """Inverse temperature ``1/(k_B T)``."""
        if not temperature > 0:
            raise ValueError(f"temperature must be positive, got {temperature}")
        return 1.0 / (self.k_B * temperature)


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class BathSpec:
    label: str
    hamiltonian: np.ndarray
    temperature: float

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"bath {self.label!r}: temperature must be positive")
        h = np.asarray(self.hamiltonian, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise DimensionError(f"bath {self.label!r}: Hamiltonian must be square")
        object.__setattr__(self, "hamiltonian", h)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def _check_beta(beta: float) -> None:
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")


def log_partition_function(h: np.ndarray, beta: float) -> float:
    """``ln tr exp(-beta h)``, evaluated with a log-sum-exp shift."""
    _check_beta(beta)
    w = np.linalg.eigvalsh(hermitize(np.asarray(h, dtype=complex)))
    return float(logsumexp(-beta * w))


def partition_function(h: np.ndarray, beta: float) -> float:
    return float(np.exp(log_partition_function(h, beta)))


def gibbs_state(h: np.ndarray, beta: float) -> np.ndarray:
    """Canonical state ``exp(-beta h)/Z``.

    The spectrum is shifted by its minimum before exponentiating, so large
    ``beta * ||h||`` does not overflow.
    """
    _check_beta(beta)
    w, v = eigh(np.asarray(h, dtype=complex))
    weights = np.exp(-beta * (w - w.min()))
    weights /= weights.sum()
    return hermitize((v * weights) @ dagger(v))


def free_energy(h: np.ndarray, beta: float) -> float:
    """Helmholtz free energy ``-ln Z / beta``.

    ``beta`` already carries ``k_B`` (``beta = 1/(k_B T)``); use
    :meth:`PhysicalConstants.beta` to convert a temperature.
    """
    return -log_partition_function(h, beta) / beta


def internal_energy(rho: np.ndarray, h: np.ndarray) -> float:
    """Expectation value ``tr(h rho)``."""
    rho = np.asarray(rho)
    h = np.asarray(h)
    if rho.shape != h.shape:
        raise DimensionError(f"shape mismatch: rho {rho.shape} vs h {h.shape}")
    # tr(h rho) without forming the product
    return float(np.real(np.einsum("ij,ji->", h, rho)))

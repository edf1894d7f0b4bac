"""Entropy and information functionals of a state measured by a POVM.

All quantities are in nats. The central one is the QC-mutual information

    I(rho : X) = S(rho) + H({p_k}) - H~(rho, X),
    H~(rho, X) = -sum_k tr(A_k ln A_k),   A_k = sqrt(D_k) rho sqrt(D_k),

which bounds the entropy reduction achievable by feedback.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .measurement import BRANCH_FLOOR, MeasurementChannel, OutcomeDistribution, measure, povm
from .operators import (
    EIGENVALUE_FLOOR,
    PSD_TOL,
    CompositeSpace,
    DimensionError,
    InvalidOperatorError,
    dagger,
    eigh,
    hermitian_matfunc,
    hermitize,
    matrix_sqrt_sandwich,
)


@dataclass(frozen=True)
class InformationReport:
    s_rho: float
    shannon: float
    h_tilde: float
    qc_mutual: float
    holevo_chi: float
    delta_s_meas: float


@dataclass(frozen=True)
class SigmaPair:
    sigma1: np.ndarray
    sigma2: np.ndarray
    r_marginal: np.ndarray
    space: CompositeSpace


def _entropy_from_eigenvalues(w: np.ndarray) -> float:
    if w.size and w.min() < -PSD_TOL:
        raise InvalidOperatorError(f"negative eigenvalue {w.min():.3e} in entropy argument")
    w = np.where(w < EIGENVALUE_FLOOR, 0.0, w)
    return float(-np.sum(xlogy(w, w)))


def entropy_functional(a: np.ndarray) -> float:
    """``-tr(a ln a)`` for a PSD operator of any trace (``0 ln 0 = 0``)."""
    return _entropy_from_eigenvalues(np.linalg.eigvalsh(hermitize(np.asarray(a))))


def von_neumann_entropy(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(hermitize(np.asarray(rho)))
    if abs(w.sum() - 1.0) > 1e-9:
        raise InvalidOperatorError(f"entropy of a non-normalized state (trace {w.sum():.12g})")
    return _entropy_from_eigenvalues(w)


def shannon_entropy(p: OutcomeDistribution | Sequence[float] | np.ndarray) -> float:
    probs = p.probabilities if isinstance(p, OutcomeDistribution) else np.asarray(p, dtype=float)
    if probs.min(initial=0.0) < -1e-12 or abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError(f"not a probability distribution: {probs}")
    probs = np.clip(probs, 0.0, None)
    return float(-np.sum(xlogy(probs, probs)))


def _check_dims(rho: np.ndarray, channel: MeasurementChannel) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (channel.dim, channel.dim):
        raise DimensionError(f"state of shape {rho.shape} vs channel of dim {channel.dim}")
    return rho


def sandwiches(rho: np.ndarray, channel: MeasurementChannel) -> list[np.ndarray]:
    """Unnormalized ``sqrt(D_k) rho sqrt(D_k)`` for every outcome."""
    rho = _check_dims(rho, channel)
    return [matrix_sqrt_sandwich(d, rho) for d in povm(channel)]


def _decomposed_h_tilde(rho, channel) -> tuple[float, float, np.ndarray]:
    parts = sandwiches(rho, channel)
    p = np.clip(np.array([np.trace(a).real for a in parts]), 0.0, None)
    shannon = shannon_entropy(p / p.sum())
    branch_sum = sum(
        pk * von_neumann_entropy(a / pk) for a, pk in zip(parts, p) if pk > BRANCH_FLOOR
    )
    return shannon + branch_sum, shannon, p


def h_tilde(rho: np.ndarray, channel: MeasurementChannel) -> float:
    """``H~(rho, X)`` from ``H({p_k}) + sum_k p_k S(A_k / p_k)``."""
    return _decomposed_h_tilde(rho, channel)[0]


def h_tilde_direct(rho: np.ndarray, channel: MeasurementChannel) -> float:
    """``H~(rho, X)`` from ``-sum_k tr(A_k ln A_k)``; cross-check for :func:`h_tilde`."""
    return sum(entropy_functional(a) for a in sandwiches(rho, channel))


def qc_mutual_info(rho: np.ndarray, channel: MeasurementChannel) -> InformationReport:
    rho = _check_dims(rho, channel)
    s_rho = von_neumann_entropy(rho)
    ht, shannon, _ = _decomposed_h_tilde(rho, channel)

    _, ens = measure(rho, channel)
    rho2 = ens.average()
    s_rho2 = von_neumann_entropy(rho2)
    mean_branch = sum(b.probability * von_neumann_entropy(b.state) for b in ens.present)
    return InformationReport(
        s_rho=s_rho,
        shannon=shannon,
        h_tilde=ht,
        qc_mutual=s_rho + shannon - ht,
        holevo_chi=s_rho2 - mean_branch,
        delta_s_meas=s_rho2 - s_rho,
    )


def classical_mutual_info_oracle(q: Sequence[float], conditional: np.ndarray) -> float:
    """Mutual information of the joint law ``q_i p(k|i)``.

    ``conditional[i, k] = p(k|i)``. Evaluated as
    ``sum_{i,k} J_ik ln(J_ik / (q_i p_k))`` with zero cells skipped.
    """
    q = np.asarray(q, dtype=float)
    c = np.asarray(conditional, dtype=float)
    if c.ndim != 2 or c.shape[0] != q.size:
        raise DimensionError(f"conditional of shape {c.shape} vs prior of size {q.size}")
    if q.min() < -1e-12 or abs(q.sum() - 1) > 1e-9:
        raise ValueError("prior is not normalized")
    if c.min() < -1e-12 or np.max(np.abs(c.sum(axis=1) - 1)) > 1e-9:
        raise ValueError("conditional rows are not normalized")
    q = np.clip(q, 0.0, None)
    c = np.clip(c, 0.0, None)
    joint = q[:, None] * c
    marginal = joint.sum(axis=0)
    total = 0.0
    for i in range(joint.shape[0]):
        for k in range(joint.shape[1]):
            j = joint[i, k]
            if j > 0:
                total += j * np.log(j / (q[i] * marginal[k]))
    return float(total)


def shared_eigenbasis(rho: np.ndarray, channel: MeasurementChannel) -> tuple[np.ndarray, np.ndarray]:
    """Prior ``q_i`` and conditional ``p(k|i)`` in a basis diagonalizing ``rho`` and every ``D_k``.

    Only meaningful when ``rho`` commutes with the POVM. A generic real
    combination of the commuting family is diagonalized, which splits any
    degeneracy of ``rho`` alone.
    """
    rho = _check_dims(rho, channel)
    ds = povm(channel)
    coeffs = np.sqrt(np.arange(2, len(ds) + 3, dtype=float))  # irrational, pairwise distinct
    combo = coeffs[0] * rho + sum(c * d for c, d in zip(coeffs[1:], ds))
    _, v = eigh(combo)
    q = np.real(np.einsum("ji,jk,ki->i", v.conj(), rho, v))
    cond = np.stack([np.real(np.einsum("ji,jk,ki->i", v.conj(), d, v)) for d in ds], axis=1)
    return q, cond


def sigma_pair(rho: np.ndarray, channel: MeasurementChannel) -> SigmaPair:
    """States of ``Q ⊗ R`` used to bound the QC-mutual information.

    ``sigma1 = sum_k sqrt(rho) D_k sqrt(rho) ⊗ |k><k|`` and
    ``sigma2 = sum_k sqrt(D_k) rho sqrt(D_k) ⊗ |k><k|``.
    """
    rho = _check_dims(rho, channel)
    n = channel.n_outcomes
    ds = povm(channel)
    sqrt_rho = hermitian_matfunc(rho, "sqrt")
    proj = np.zeros((n, n, n), dtype=complex)
    proj[np.arange(n), np.arange(n), np.arange(n)] = 1.0
    sigma1 = sum(np.kron(hermitize(sqrt_rho @ d @ sqrt_rho), proj[k]) for k, d in enumerate(ds))
    sigma2 = sum(np.kron(matrix_sqrt_sandwich(d, rho), proj[k]) for k, d in enumerate(ds))
    p = np.array([np.real(np.einsum("ij,ji->", d, rho)) for d in ds])
    space = CompositeSpace((channel.dim, n), ("Q", "R"))
    return SigmaPair(hermitize(sigma1), hermitize(sigma2), np.diag(p).astype(complex), space)


def canonical_eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigen-decomposition with each eigenvector's first non-negligible entry made real-positive."""
    w, v = eigh(a)
    for j in range(v.shape[1]):
        col = v[:, j]
        idx = int(np.argmax(np.abs(col) > 1e-12))
        v[:, j] = col * (abs(col[idx]) / col[idx])
    return w, v


def dij_matrix(rho: np.ndarray, channel: MeasurementChannel) -> np.ndarray:
    """Transition matrix ``d_ij = sum_k |<psi_i| sqrt(D_k) |psi'_j>|^2``.

    ``psi_i`` are eigenvectors of ``rho`` and ``psi'_j`` those of
    ``rho' = sum_k sqrt(D_k) rho sqrt(D_k)``. The result is doubly stochastic.
    """
    rho = _check_dims(rho, channel)
    _, psi = canonical_eigh(rho)
    _, psi_prime = canonical_eigh(sum(sandwiches(rho, channel)))
    d = np.zeros((channel.dim, channel.dim))
    for dk in povm(channel):
        amp = dagger(psi) @ hermitian_matfunc(dk, "sqrt") @ psi_prime
        d += np.abs(amp) ** 2
    return d

"""Worst-case robust versions of both precoding stages.

The robust designs model the effect of a norm-bounded channel error on
the eigendecompositions used by the nominal stages. Eigenvalues are
shifted by a worst-case scalar bound (`eigen_shift_bound`, validated by
Weyl's inequality) and eigenvectors by a first-order coupling correction.
Substituting the isotropic worst case into the coupler makes the
eigenvector correction vanish, so the surviving effect is a stronger
spectral regularization; the coupling matrices are still formed and
reported for diagnostics.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import ChannelMatrix, PerturbationBounds
from .exceptions import ConfigError
from .linalg import EigDecomposition, eigh_sorted
from .precoding import Precoder, intrabeam, mbim_block, power_control

__all__ = [
    "DEGENERACY_FLOOR",
    "PerturbationCouplers",
    "DegenerateSpectrumWarning",
    "coupling_matrix",
    "first_order_eigvecs",
    "eigen_shift_bound",
    "weyl_upper_bound",
    "intra_penalty_scale",
    "robust_interbeam_block",
    "robust_interbeam",
    "robust_intrabeam",
    "robust_two_stage",
    "derive_scalars",
    "beam_couplers",
]

# First-order theory breaks down at eigenvalue crossings; coupler entries
# for pairs closer than this (relative to the largest eigenvalue) are zeroed.
DEGENERACY_FLOOR = 1e-8


class DegenerateSpectrumWarning(UserWarning):
    """A needed eigenvalue pair was too close; its coupling was zeroed."""


@dataclass(frozen=True)
class PerturbationCouplers:
    """Inverse-gap coupling matrices of one beam.

    `inter` is built from the other-beam Gram spectrum, `intra` from the
    effective intra-beam Gram spectrum. Both have zero diagonal and
    antisymmetric off-diagonal entries 1/(lambda_f - lambda_g).
    """

    inter: np.ndarray
    intra: np.ndarray


def coupling_matrix(eigenvalues: np.ndarray, floor: float = DEGENERACY_FLOOR,
                    warn: bool = False) -> np.ndarray:
    """Inverse eigenvalue-gap matrix with entry (g, f) = 1/(l_f - l_g).

    The diagonal is zero, and any pair whose gap falls below
    ``floor * max|lambda|`` is zeroed (degenerate to first order).
    """
    lam = np.asarray(eigenvalues, dtype=float)
    gaps = lam[None, :] - lam[:, None]
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    degenerate = np.abs(gaps) < floor * scale
    np.fill_diagonal(degenerate, True)
    if warn and np.any(degenerate & ~np.eye(lam.size, dtype=bool)):
        warnings.warn(
            "near-degenerate eigenvalue pair; coupling entries zeroed",
            DegenerateSpectrumWarning,
            stacklevel=2,
        )
    out = np.zeros_like(gaps)
    np.divide(1.0, gaps, out=out, where=~degenerate)
    return out


def first_order_eigvecs(eig: EigDecomposition, delta_gram: np.ndarray,
                        floor: float = DEGENERACY_FLOOR) -> np.ndarray:
    """First-order eigenvector model of a perturbed Hermitian matrix.

    For ``A + E`` with A eigendecomposed as (V, lambda), the predicted
    basis is ``V (I + D o (V^H E V))`` where D is the inverse-gap
    coupler. The residual against the exact basis shrinks quadratically
    in ``||E||``.
    """
    d = coupling_matrix(eig.eigenvalues, floor)
    v = eig.eigenvectors
    r = d * (v.conj().T @ delta_gram @ v)
    return v @ (r + np.eye(v.shape[1], dtype=complex))


def eigen_shift_bound(gamma_hat: float, h_other: np.ndarray) -> float:
    """Worst-case spectral-norm bound on the Gram-matrix perturbation.

    ``gamma_hat**2 + 2 * gamma_hat * lambda_max(H~^H H~)`` bounds the
    spectral norm of ``D^H H~ + H~^H D + D^H D`` for every error matrix D
    with norm at most gamma_hat (when the channel norm is at least one).
    """
    if gamma_hat < 0.0:
        raise ConfigError("gamma_hat must be >= 0")
    if gamma_hat == 0.0:
        return 0.0
    h_other = np.asarray(h_other)
    if h_other.shape[0] == 0:
        sigma_max = 0.0
    else:
        sigma_max = float(np.linalg.norm(h_other, 2) ** 2)
    return gamma_hat**2 + 2.0 * gamma_hat * sigma_max


def weyl_upper_bound(eigenvalues: np.ndarray, epsilon: float) -> np.ndarray:
    """Componentwise eigenvalue upper bound under a bounded perturbation.

    If the perturbing Hermitian matrix has spectral norm at most
    `epsilon`, every eigenvalue of the perturbed matrix is bounded by the
    matching nominal eigenvalue plus epsilon (Weyl's inequality).
    """
    if epsilon < 0.0:
        raise ConfigError("epsilon must be >= 0")
    return np.asarray(eigenvalues, dtype=float) + epsilon


def intra_penalty_scale(gamma_lower: float, eigenvalues: np.ndarray,
                        epsilon: float) -> float:
    """Intra-beam worst-case scalar: gamma_lower * sum((l_i + eps)^-1/2)."""
    if gamma_lower < 0.0 or epsilon < 0.0:
        raise ConfigError("inputs must be nonnegative")
    if gamma_lower == 0.0:
        return 0.0
    lam = np.asarray(eigenvalues, dtype=float)
    return float(gamma_lower * np.sum(1.0 / np.sqrt(lam + epsilon)))


def robust_interbeam_block(ch: ChannelMatrix, k: int,
                           bounds: PerturbationBounds,
                           p_total: float) -> np.ndarray:
    """Robust inter-beam block for beam k.

    The eigenvector basis receives the first-order correction evaluated
    at the isotropic worst case (which is exactly zero), and the spectrum
    regularization grows from KQ/P_T to KQ/P_T + epsilon_k. A zero shift
    carries no uncertainty and delegates to the nominal block, so the
    robust design reduces to the nominal one exactly.
    """
    other = ch.excluding(k)
    eps = eigen_shift_bound(float(bounds.gamma_tilde_k[k]), other)
    if eps == 0.0:
        return mbim_block(ch, k, p_total)
    q = ch.users_per_beam
    eig = eigh_sorted(other.conj().T @ other)
    d = coupling_matrix(eig.eigenvalues, warn=True)
    sigma = np.diag(eig.eigenvalues)
    vhv = eig.eigenvectors.conj().T @ (eps * np.eye(ch.feeds)) @ eig.eigenvectors
    r_hat = d * (vhv @ sigma + sigma @ vhv.conj().T)
    m_hat = eig.eigenvectors @ (r_hat + np.eye(ch.feeds, dtype=complex))
    reg = ch.beams * ch.users_per_beam / p_total
    scale = 1.0 / np.sqrt(eig.eigenvalues + reg + eps)
    return (m_hat * scale)[:, -q:]


def robust_interbeam(ch: ChannelMatrix, bounds: PerturbationBounds,
                     p_total: float) -> np.ndarray:
    """All robust inter-beam blocks, stacked to N x KQ."""
    if bounds.beams != ch.beams:
        raise ConfigError("bounds and channel disagree on the number of beams")
    return np.hstack(
        [robust_interbeam_block(ch, k, bounds, p_total) for k in range(ch.beams)]
    )


def robust_intrabeam(z: np.ndarray, nu: float,
                     floor: float = DEGENERACY_FLOOR) -> np.ndarray:
    """Robust intra-beam vector for the effective channel Z.

    Applies the first-order correction ``nu * N o (L^H L T + T L^H L)``
    to the eigenbasis L of Z^H Z and returns the normalized first column.
    With a unitary L the correction vanishes, and nu = 0 delegates to the
    nominal vector outright. A degenerate leading pair falls back to the
    nominal vector with a warning.
    """
    if nu < 0.0:
        raise ConfigError("nu must be >= 0")
    if nu == 0.0:
        return intrabeam(z)
    z = np.asarray(z)
    eig = eigh_sorted(z.conj().T @ z)
    lam = eig.eigenvalues
    if lam.size > 1 and abs(lam[0] - lam[1]) < floor * abs(lam[0]):
        warnings.warn(
            "leading intra-beam eigenvalues nearly degenerate; "
            "falling back to the nominal vector",
            DegenerateSpectrumWarning,
            stacklevel=2,
        )
        return intrabeam(z)
    coupler = coupling_matrix(lam, floor)
    l_mat = eig.eigenvectors
    t_mat = np.diag(lam)
    lhl = l_mat.conj().T @ l_mat
    m_hat = nu * coupler * (lhl @ t_mat + t_mat @ lhl)
    w = (l_mat @ (m_hat + np.eye(lam.size, dtype=complex)))[:, 0]
    return w / np.linalg.norm(w)


def derive_scalars(ch: ChannelMatrix,
                   bounds: PerturbationBounds) -> PerturbationBounds:
    """Fill in the per-beam worst-case scalars epsilon_k and nu_k."""
    eps = np.empty(ch.beams)
    nu = np.empty(ch.beams)
    for k in range(ch.beams):
        other = ch.excluding(k)
        eps[k] = eigen_shift_bound(float(bounds.gamma_tilde_k[k]), other)
        lam = eigh_sorted(other.conj().T @ other).eigenvalues
        nu[k] = intra_penalty_scale(
            float(bounds.gamma_lower_k[k]), lam, eps[k]
        )
    return bounds.with_derived(eps, nu)


def robust_two_stage(ch: ChannelMatrix, bounds: PerturbationBounds,
                     p_total: float, mode: str = "per_feed") -> Precoder:
    """Robust inter-beam stage followed by the robust intra-beam stage."""
    derived = derive_scalars(ch, bounds)
    wa = robust_interbeam(ch, bounds, p_total)
    k_beams = ch.beams
    q = ch.users_per_beam
    wb = np.zeros((k_beams * q, k_beams), dtype=complex)
    for k in range(k_beams):
        z = ch.beam(k) @ wa[:, k * q:(k + 1) * q]
        wb[k * q:(k + 1) * q, k] = robust_intrabeam(z, float(derived.nu_k[k]))
    w_bar = wa @ wb
    alpha = power_control(w_bar, p_total, mode)
    return Precoder(w=alpha * w_bar, alpha=alpha, power_mode=mode, wa=wa, wb=wb)


def beam_couplers(ch: ChannelMatrix, wa: np.ndarray,
                  floor: float = DEGENERACY_FLOOR) -> list[PerturbationCouplers]:
    """Inter- and intra-beam coupling matrices per beam, for diagnostics."""
    q = ch.users_per_beam
    out = []
    for k in range(ch.beams):
        other = ch.excluding(k)
        inter = coupling_matrix(eigh_sorted(other.conj().T @ other).eigenvalues, floor)
        z = ch.beam(k) @ wa[:, k * q:(k + 1) * q]
        intra = coupling_matrix(eigh_sorted(z.conj().T @ z).eigenvalues, floor)
        out.append(PerturbationCouplers(inter=inter, intra=intra))
    return out

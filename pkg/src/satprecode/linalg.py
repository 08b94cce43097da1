"""Dense Hermitian eigendecomposition and null-space helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative eigenvalue / singular-value floor below which directions are
# treated as belonging to the null space.
RANK_TOL = 1e-12


@dataclass(frozen=True)
class EigDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    `eigenvalues` is real of shape (n,); `eigenvectors` is unitary with
    column j matching eigenvalue j.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eigh_sorted(a: np.ndarray) -> EigDecomposition:
    """Hermitian eigendecomposition sorted by descending eigenvalue.

    Ties keep LAPACK's ascending-order positions (stable sort), so the
    result is deterministic for a given input.
    """
    w, v = np.linalg.eigh(a)
    order = np.argsort(-w, kind="stable")
    return EigDecomposition(w[order], v[:, order])


def null_space(a: np.ndarray, rtol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the right null space of `a` (columns).

    Singular values below ``rtol * s_max`` count as zero. An empty matrix
    (zero rows) has the full identity as its null space.
    """
    a = np.asarray(a)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(a)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(s > rtol * s[0]))
    return vh[rank:].conj().T


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary via QR of a complex Gaussian matrix."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))

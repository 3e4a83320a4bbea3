"""Construction of the m x p compression maps.

Three variants: a sparse three-point random matrix (entries +-1/sqrt(2*psi)
with probability psi each, else 0), an ultra-sparse variant with entries
+-n^(kappa/2)/sqrt(m) appearing with probability 1/(2 n^kappa), and a
deterministic partial-SVD map whose rows are the top right singular vectors
of the selected columns. Columns excluded by the inclusion vector are
identically zero in every variant.

Random variants are materialized from an explicit seed (uniform draws only)
so a saved model can rebuild the matrix bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .screening import InclusionVector

RIS_RP = "ris_rp"
SPARSE_VARIANT = "sparse_variant"
RIS_PCR = "ris_pcr"


@dataclass(frozen=True)
class ProjectionMatrix:
    """Immutable m x p compression map with its inclusion vector.

    Sparse variants keep a CSC matrix over all p columns plus the seed that
    generated it; the partial-SVD variant keeps the dense m x p_gamma block
    and the active column indices. ``m`` is the effective row count, which
    for the SVD variant may be below ``requested_m`` when the selected
    columns are rank deficient.
    """

    variant: str
    m: int
    p: int
    gamma: InclusionVector
    sparse: Optional[sp.csc_matrix] = None
    dense_block: Optional[np.ndarray] = None
    seed: Optional[tuple[int, ...]] = None
    psi: Optional[float] = None
    kappa: Optional[float] = None
    n_obs: Optional[int] = None
    requested_m: Optional[int] = None

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Compress rows of X: returns X @ R.T with shape (n, m)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.p:
            raise ValueError(f"X has shape {X.shape}, expected (n, {self.p})")
        if self.sparse is not None:
            # sparse @ dense touches only the nonzeros: O(n * nnz)
            return np.ascontiguousarray((self.sparse @ X.T).T)
        block = self.dense_block
        return X[:, self.gamma.indices] @ block.T

    def toarray(self) -> np.ndarray:
        """Full dense m x p matrix (tests and serialization only)."""
        if self.sparse is not None:
            return self.sparse.toarray()
        full = np.zeros((self.m, self.p))
        full[:, self.gamma.indices] = self.dense_block
        return full


def _three_point_values(
    shape: tuple[int, int], magnitude: float, prob: float, rng: np.random.Generator
) -> np.ndarray:
    # Only rng.random() is consumed, keeping re-materialization from a stored
    # seed stable across library versions.
    u = rng.random(shape)
    return magnitude * ((u < prob).astype(np.float64) - (u >= 1.0 - prob))


def _sparse_from_active(values: np.ndarray, gamma: InclusionVector, p: int):
    m = values.shape[0]
    active = gamma.indices
    block = sp.csc_matrix(values)
    col_nnz = np.zeros(p, dtype=np.int64)
    col_nnz[active] = np.diff(block.indptr)
    indptr = np.concatenate([[0], np.cumsum(col_nnz)])
    return sp.csc_matrix((block.data, block.indices, indptr), shape=(m, p))


def sample_ris_rp(
    gamma: InclusionVector, m: int, psi: float, seed
) -> ProjectionMatrix:
    """Three-point random map: +-1/sqrt(2*psi) w.p. psi each, 0 w.p. 1-2*psi."""
    if not 0.0 < psi < 0.5:
        raise ValueError(f"psi must lie in (0, 0.5), got {psi}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    seed = _normalize_seed(seed)
    rng = np.random.default_rng(seed)
    magnitude = 1.0 / math.sqrt(2.0 * psi)
    values = _three_point_values((m, gamma.count), magnitude, psi, rng)
    return ProjectionMatrix(
        variant=RIS_RP,
        m=m,
        p=gamma.gamma.size,
        gamma=gamma,
        sparse=_sparse_from_active(values, gamma, gamma.gamma.size),
        seed=seed,
        psi=psi,
        requested_m=m,
    )


def sample_sparse_variant(
    gamma: InclusionVector, m: int, kappa: float, n: int, seed
) -> ProjectionMatrix:
    """Ultra-sparse map: +-n^(kappa/2)/sqrt(m) w.p. 1/(2 n^kappa) each.

    Per-entry second moment is 1/m, so the whole matrix (rather than each
    row) is normalized. kappa = 0 degenerates to a dense Rademacher/sqrt(m).
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    n_kappa = float(n) ** kappa
    if n_kappa < 1.0:
        raise ValueError(
            f"n^kappa = {n_kappa:.4g} < 1 gives a nonzero-probability above 1"
        )
    seed = _normalize_seed(seed)
    rng = np.random.default_rng(seed)
    magnitude = math.sqrt(n_kappa / m)
    prob = 1.0 / (2.0 * n_kappa)
    values = _three_point_values((m, gamma.count), magnitude, prob, rng)
    return ProjectionMatrix(
        variant=SPARSE_VARIANT,
        m=m,
        p=gamma.gamma.size,
        gamma=gamma,
        sparse=_sparse_from_active(values, gamma, gamma.gamma.size),
        seed=seed,
        kappa=kappa,
        n_obs=n,
        requested_m=m,
    )


def compute_ris_pcr(
    X: np.ndarray, gamma: InclusionVector, m: int, rank_rtol: float = 1e-12
) -> ProjectionMatrix:
    """Rows are the top right singular vectors of the selected columns.

    The effective row count is min(m, rank(X_gamma)); rank deficiency is
    handled by truncation and visible as m < requested_m. Row signs are
    canonical (largest-magnitude entry positive) so the result does not
    depend on the SVD backend.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    X = np.asarray(X, dtype=np.float64)
    active = gamma.indices
    if active.size == 0:
        raise ValueError("inclusion vector selects no columns")
    X_act = X[:, active]
    # Thin SVD of the n x p_gamma block is cheaper and better conditioned
    # than an eigendecomposition of its Gram matrix.
    _, s, vt = np.linalg.svd(X_act, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > s[0] * rank_rtol))
    if rank == 0:
        raise ValueError("selected columns are all zero; no principal directions")
    m_eff = min(m, rank)
    block = vt[:m_eff].copy()
    for row in block:
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0.0:
            row *= -1.0
    return ProjectionMatrix(
        variant=RIS_PCR,
        m=m_eff,
        p=gamma.gamma.size,
        gamma=gamma,
        dense_block=block,
        requested_m=m,
    )


def compress(X: np.ndarray, R: ProjectionMatrix) -> np.ndarray:
    """Compressed design Z = X R' (n x m)."""
    return R.apply(X)


def _normalize_seed(seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)

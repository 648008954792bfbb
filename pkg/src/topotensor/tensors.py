"""Dense multi-way array algebra and low-rank decompositions.

Tensors are plain numpy arrays in row-major (C) layout, so the last index
varies fastest. Unfoldings use the convention that the columns of the
mode-m unfolding enumerate the remaining modes in ascending order with
*earlier* modes varying fastest; modes are 1-based throughout.

Three decompositions are provided: Tucker (HOSVD init + HOOI refinement),
CP (alternating least squares) and tensor-train (TT-SVD).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# basic algebra
# ---------------------------------------------------------------------------

def unfold(t: np.ndarray, mode: int) -> np.ndarray:
    """Mode-m unfolding (m is 1-based): D_m x prod(other dims)."""
    t = np.asarray(t)
    if not 1 <= mode <= t.ndim:
        raise ValueError(f"mode must be in [1, {t.ndim}], got {mode}")
    return np.reshape(np.moveaxis(t, mode - 1, 0), (t.shape[mode - 1], -1), order="F")


def fold(mat: np.ndarray, mode: int, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`unfold` for a tensor of the given full shape."""
    shape = tuple(int(d) for d in shape)
    if not 1 <= mode <= len(shape):
        raise ValueError(f"mode must be in [1, {len(shape)}], got {mode}")
    lead = shape[mode - 1]
    rest = [d for i, d in enumerate(shape) if i != mode - 1]
    t = np.reshape(np.asarray(mat), (lead, *rest), order="F")
    return np.moveaxis(t, 0, mode - 1)


def mode_product(t: np.ndarray, u: np.ndarray, mode: int) -> np.ndarray:
    """Mode-m product t x_m u: contracts u's columns against mode m of t."""
    t = np.asarray(t)
    u = np.asarray(u)
    if u.ndim != 2:
        raise ValueError("mode_product expects a matrix")
    if u.shape[1] != t.shape[mode - 1]:
        raise ValueError(
            f"matrix has {u.shape[1]} columns but mode {mode} has extent {t.shape[mode - 1]}")
    new_shape = list(t.shape)
    new_shape[mode - 1] = u.shape[0]
    return fold(u @ unfold(t, mode), mode, new_shape)


def inner_product(a: np.ndarray, b: np.ndarray) -> float:
    """Sum of the elementwise product; shapes must match exactly."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.tensordot(a, b, axes=a.ndim))


def _fix_signs(u: np.ndarray) -> np.ndarray:
    """Flip singular-vector columns so each one's largest-|entry| is positive."""
    u = u.copy()
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
    return u


def _leading_vectors(mat: np.ndarray, r: int, rng: np.random.Generator) -> np.ndarray:
    """First r left singular vectors, sign-fixed, padded with random
    orthonormal columns when the matrix has rank below r."""
    u, _, _ = np.linalg.svd(mat, full_matrices=False)
    u = _fix_signs(u[:, :r])
    if u.shape[1] < r:
        extra = rng.standard_normal((mat.shape[0], r - u.shape[1]))
        q, _ = np.linalg.qr(np.hstack([u, extra]))
        u = _fix_signs(q[:, :r])
    return u


# ---------------------------------------------------------------------------
# Tucker
# ---------------------------------------------------------------------------

@dataclass
class TuckerFactors:
    core: np.ndarray              # (R_1, ..., R_M)
    loadings: List[np.ndarray]    # U_m of shape (D_m, R_m), orthonormal columns
    sweep_errors: Optional[List[float]] = None  # relative error after each HOOI sweep

    def reconstruct(self) -> np.ndarray:
        t = self.core
        for m, u in enumerate(self.loadings, start=1):
            t = mode_product(t, u, m)
        return t

    @property
    def ranks(self):
        return tuple(self.core.shape)

    def n_params(self) -> int:
        return int(self.core.size + sum(u.size for u in self.loadings))


def tucker_decompose(
    t: np.ndarray,
    ranks: Sequence[int],
    max_sweeps: int = 50,
    tol: float = 1e-6,
) -> TuckerFactors:
    """HOSVD initialization followed by HOOI sweeps until the relative fit
    stops changing by more than ``tol`` (or ``max_sweeps`` is hit)."""
    t = np.asarray(t, dtype=np.float64)
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != t.ndim:
        raise ValueError("one rank per mode is required")
    for r, d in zip(ranks, t.shape):
        if not 1 <= r <= d:
            raise ValueError(f"ranks must satisfy 1 <= R_m <= D_m, got {ranks} for {t.shape}")

    rng = np.random.default_rng(0)
    loadings = [_leading_vectors(unfold(t, m + 1), ranks[m], rng)
                for m in range(t.ndim)]

    norm_t = np.linalg.norm(t)
    if norm_t == 0.0:
        core = np.zeros(ranks)
        return TuckerFactors(core=core, loadings=loadings)

    def project_core() -> np.ndarray:
        core = t
        for m, u in enumerate(loadings, start=1):
            core = mode_product(core, u.T, m)
        return core

    errors: List[float] = []
    for _ in range(max_sweeps):
        for m in range(t.ndim):
            partial = t
            for k, u in enumerate(loadings, start=1):
                if k - 1 != m:
                    partial = mode_product(partial, u.T, k)
            loadings[m] = _leading_vectors(unfold(partial, m + 1), ranks[m], rng)
        core = project_core()
        # ||t - recon||^2 = ||t||^2 - ||core||^2 for orthonormal loadings
        err = np.sqrt(max(norm_t ** 2 - np.linalg.norm(core) ** 2, 0.0)) / norm_t
        if errors and abs(errors[-1] - err) < tol:
            errors.append(err)
            break
        errors.append(err)

    return TuckerFactors(core=project_core(), loadings=loadings, sweep_errors=errors)


# ---------------------------------------------------------------------------
# CP
# ---------------------------------------------------------------------------

@dataclass
class CPFactors:
    weights: np.ndarray           # (R,)
    factors: List[np.ndarray]     # A_m of shape (D_m, R), unit-norm columns
    sweep_errors: Optional[List[float]] = None  # relative error after each ALS sweep

    @property
    def rank(self) -> int:
        return len(self.weights)

    def reconstruct(self) -> np.ndarray:
        shape = tuple(a.shape[0] for a in self.factors)
        kr = _khatri_rao_descending(self.factors, skip=0)
        mat = (self.factors[0] * self.weights[None, :]) @ kr.T
        return fold(mat, 1, shape)

    def n_params(self) -> int:
        return int(sum(a.size for a in self.factors) + self.weights.size)


def _khatri_rao_descending(factors: Sequence[np.ndarray], skip: int) -> np.ndarray:
    """Khatri-Rao product of all factors except ``skip``, in descending mode
    order, so that the mode-(skip+1) unfolding satisfies
    X_(m) = A_m diag(w) KR^T with earlier modes varying fastest."""
    mats = [factors[m] for m in range(len(factors) - 1, -1, -1) if m != skip]
    out = mats[0]
    for a in mats[1:]:
        r = out.shape[1]
        out = (out[:, None, :] * a[None, :, :]).reshape(-1, r)
    return out


def cp_decompose(
    t: np.ndarray,
    rank: int,
    max_sweeps: int = 200,
    tol: float = 1e-6,
    seed: int = 0,
) -> CPFactors:
    """CP via alternating least squares with HOSVD-based initialization.

    Ill-conditioned normal equations get a 1e-10 ridge (with a logged
    warning). Factor columns stay unit-norm; the scale lives in weights.
    """
    t = np.asarray(t, dtype=np.float64)
    if rank < 1:
        raise ValueError("rank must be >= 1")
    rng = np.random.default_rng(seed)
    factors = [_leading_vectors(unfold(t, m + 1), rank, rng) for m in range(t.ndim)]
    weights = np.ones(rank)

    norm_t = np.linalg.norm(t)
    if norm_t == 0.0:
        return CPFactors(weights=np.zeros(rank), factors=factors)

    errors: List[float] = []
    for _ in range(max_sweeps):
        for m in range(t.ndim):
            gram = np.ones((rank, rank))
            for k, a in enumerate(factors):
                if k != m:
                    gram *= a.T @ a
            kr = _khatri_rao_descending(factors, skip=m)
            rhs = unfold(t, m + 1) @ kr
            if np.linalg.cond(gram) > 1e12:
                logger.warning("CP normal equations ill-conditioned; applying 1e-10 ridge")
                gram = gram + 1e-10 * np.eye(rank)
            new = np.linalg.solve(gram.T, rhs.T).T
            norms = np.linalg.norm(new, axis=0)
            safe = np.where(norms > 0, norms, 1.0)
            factors[m] = new / safe
            weights = norms
        recon = CPFactors(weights=weights, factors=factors).reconstruct()
        fit = np.linalg.norm(t - recon) / norm_t
        if errors and abs(errors[-1] - fit) < tol:
            errors.append(fit)
            break
        errors.append(fit)

    return CPFactors(weights=weights, factors=factors, sweep_errors=errors)


# ---------------------------------------------------------------------------
# tensor train
# ---------------------------------------------------------------------------

@dataclass
class TTFactors:
    cores: List[np.ndarray]       # G_m of shape (r_{m-1}, D_m, r_m); r_0 = r_M = 1

    @property
    def bond_ranks(self):
        return tuple(g.shape[2] for g in self.cores[:-1])

    def reconstruct(self) -> np.ndarray:
        cur = self.cores[0][0]  # (D_1, r_1)
        for core in self.cores[1:]:
            cur = np.tensordot(cur, core, axes=([-1], [0]))
        return cur[..., 0]

    def n_params(self) -> int:
        return int(sum(g.size for g in self.cores))


def tt_decompose(t: np.ndarray, max_ranks: Optional[Sequence[int]] = None) -> TTFactors:
    """TT-SVD with per-bond truncation; exact when ``max_ranks`` dominates
    the true TT ranks (or is None, meaning unbounded)."""
    t = np.asarray(t, dtype=np.float64)
    dims = t.shape
    m_modes = len(dims)
    if max_ranks is not None and len(max_ranks) != m_modes - 1:
        raise ValueError(f"max_ranks must have length {m_modes - 1}")

    cores = []
    c = t.reshape(dims[0], -1)
    r_prev = 1
    for m in range(m_modes - 1):
        c = c.reshape(r_prev * dims[m], -1)
        u, s, vt = np.linalg.svd(c, full_matrices=False)
        r = len(s) if max_ranks is None else min(int(max_ranks[m]), len(s))
        u, s, vt = u[:, :r], s[:r], vt[:r]
        # keep U columns' dominant entries positive; compensate in Vt
        for j in range(r):
            i = int(np.argmax(np.abs(u[:, j])))
            if u[i, j] < 0:
                u[:, j] = -u[:, j]
                vt[j] = -vt[j]
        cores.append(u.reshape(r_prev, dims[m], r))
        c = s[:, None] * vt
        r_prev = r
    cores.append(c.reshape(r_prev, dims[-1], 1))
    return TTFactors(cores=cores)

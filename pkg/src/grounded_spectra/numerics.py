"""Dense symmetric linear algebra used by every other module.

LAPACK (through numpy/scipy) does the heavy lifting for full decompositions and
Cholesky factors. The extreme eigenpairs use inverse iteration and power
iteration so that callers sweeping many closely related matrices can warm-start.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy import sparse
from scipy.sparse.csgraph import connected_components

SYMMETRY_RTOL = 1e-12
RESIDUAL_TOL = 1e-9
RQ_TOL = 1e-12
MAX_ITER = 10_000
CLIP_TOL = 1e-9
POLISH_FACTOR = 1e-4
MAX_POLISH = 200


class NumericalError(ArithmeticError):
    """A solver failed or its input violated a numerical precondition."""


class NotPositiveDefinite(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


def as_symmetric(A) -> np.ndarray:
    a = np.asarray(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NumericalError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericalError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
        raise NumericalError("matrix is not symmetric")
    return a


def _residual_bound(a: np.ndarray) -> float:
    return RESIDUAL_TOL * max(1.0, float(np.linalg.norm(a)))


def _rq_settled(lam: float, lam_old: float, a: np.ndarray) -> bool:
    # relative test, floored at what rounding allows for this matrix scale
    floor = 16 * np.finfo(float).eps * max(1.0, float(np.abs(a).sum(axis=1).max()))
    return abs(lam - lam_old) <= max(RQ_TOL * abs(lam), floor)


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)


def eigendecompose(A) -> EigenDecomposition:
    """Full eigendecomposition, ascending eigenvalues, residual-checked."""
    a = as_symmetric(A)
    w, V = np.linalg.eigh(a)
    res = np.linalg.norm(a @ V - V * w, axis=0)
    if res.size and res.max() > _residual_bound(a):
        raise ConvergenceError(f"eigendecomposition residual {res.max():.3e} too large")
    return EigenDecomposition(w, V)


def jacobi_eigendecompose(A, max_sweeps: int = MAX_ITER) -> EigenDecomposition:
    """Cyclic Jacobi rotations; slow but independent of LAPACK, used as a cross-check."""
    a = as_symmetric(A).copy()
    k = a.shape[0]
    V = np.eye(k)
    eps = np.finfo(float).eps
    for _ in range(max_sweeps):
        rotated = False
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[p, q]
                if abs(apq) <= eps * 0.5 * np.sqrt(abs(a[p, p] * a[q, q])) or apq == 0.0:
                    a[p, q] = a[q, p] = 0.0
                    continue
                rotated = True
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
        if not rotated:
            break
    else:
        raise ConvergenceError("Jacobi sweeps did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], V[:, order])


def cholesky(A) -> np.ndarray:
    """Lower Cholesky factor; raises NotPositiveDefinite on failure."""
    a = as_symmetric(A)
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("Cholesky factorization failed; matrix is not positive definite") from exc


def _chol_solve(c: np.ndarray, b: np.ndarray) -> np.ndarray:
    return sla.cho_solve((c, True), b, check_finite=False)


def perron_normalize(v: np.ndarray) -> tuple[np.ndarray, float]:
    """Sign-fix, clip tiny negatives and scale to max component 1.

    Returns the normalized vector and the most negative component seen after the
    sign fix (scaled by the max magnitude), so callers can audit the clip.
    """
    v = np.asarray(v, dtype=float)
    i = int(np.argmax(np.abs(v)))
    if v[i] < 0:
        v = -v
    v = v / v[i]
    raw_min = float(v.min())
    v = np.where((v < 0) & (v > -CLIP_TOL), 0.0, v)
    v = v / v.max()
    return v, raw_min


@dataclass(frozen=True)
class Eigenpair:
    value: float
    vector: np.ndarray = field(repr=False)
    iterations: int = 0
    raw_min: float = 0.0


def irreducible_blocks(a: np.ndarray) -> list[np.ndarray]:
    """Index sets of the connected components of the off-diagonal sparsity graph."""
    count, labels = connected_components(sparse.csr_matrix(a != 0), directed=False)
    return [np.flatnonzero(labels == c) for c in range(count)]


def _block_inverse_iteration(a: np.ndarray, start: np.ndarray, c: np.ndarray, block: int):
    k = a.shape[0]
    b = min(block, k)
    extra = np.random.default_rng(0).standard_normal((k, b - 1))
    Q, _ = np.linalg.qr(np.column_stack([start, extra]))
    bound = _residual_bound(a)
    lam_old = np.inf
    res_old = np.inf
    polish = 0
    for it in range(1, MAX_ITER + 1):
        Q, _ = np.linalg.qr(_chol_solve(c, Q))
        AQ = a @ Q
        w, Y = np.linalg.eigh(Q.T @ AQ)
        lam = float(w[0])
        v = Q @ Y[:, 0]
        res = float(np.linalg.norm(AQ @ Y[:, 0] - lam * v))
        converged = _rq_settled(lam, lam_old, a) and res <= bound
        if converged and res > POLISH_FACTOR * bound and res < 0.5 * res_old and polish < MAX_POLISH:
            # a few cheap extra steps while the residual still shrinks
            polish += 1
            converged = False
        res_old = res
        if converged:
            return lam, v, it
        lam_old = lam
        Q = Q @ Y
    raise ConvergenceError("inverse iteration did not converge")


def smallest_eigenpair(A, x0=None, factor: np.ndarray | None = None, block: int = 4) -> Eigenpair:
    """Smallest eigenpair of a positive-definite matrix by block inverse iteration.

    One Cholesky factor is reused for every solve; a Rayleigh-Ritz step on a
    small block keeps convergence fast when the two lowest eigenvalues nearly
    coincide. The returned vector is the Perron-normalized eigenvector.

    A reducible matrix is split into its irreducible diagonal blocks (the
    factor restricts to each block since fill-in stays inside a block). For a
    grounded Laplacian each block has a simple lowest eigenvalue with a
    positive eigenvector; blocks tied at the minimum are combined with
    weights taken from the start vector (all-ones by default), which keeps
    the result nonnegative.
    """
    a = as_symmetric(A)
    k = a.shape[0]
    c = cholesky(a) if factor is None else factor
    start = np.ones(k) if x0 is None else np.asarray(x0, dtype=float).copy()
    if np.linalg.norm(start) == 0:
        raise NumericalError("start vector is zero")
    blocks = irreducible_blocks(a)
    if len(blocks) == 1:
        lam, v, it = _block_inverse_iteration(a, start, c, block)
        vec, raw_min = perron_normalize(v)
        return Eigenpair(lam, vec, it, raw_min)
    parts, total = [], 0
    for idx in blocks:
        sub = start[idx] if np.linalg.norm(start[idx]) > 0 else np.ones(len(idx))
        lam, v, it = _block_inverse_iteration(a[np.ix_(idx, idx)], sub, c[np.ix_(idx, idx)], block)
        total += it
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        parts.append((lam, idx, v / np.linalg.norm(v)))
    lam = min(p[0] for p in parts)
    tie = 1e-11 * max(1.0, float(np.abs(a).sum(axis=1).max()))
    v = np.zeros(k)
    for value, idx, vb in parts:
        if value - lam <= tie:
            weight = abs(float(start[idx] @ vb))
            v[idx] += vb * (weight if weight > 1e-12 else 1.0)
    vec, raw_min = perron_normalize(v)
    return Eigenpair(lam, vec, total, raw_min)


def _power_iteration(a: np.ndarray, x0, max_iter: int) -> float | None:
    k = a.shape[0]
    if x0 is None:
        v = np.random.default_rng(0).standard_normal(k) + 1.0
    else:
        v = np.asarray(x0, dtype=float).copy()
    v /= np.linalg.norm(v)
    bound = _residual_bound(a)
    lam_old = np.inf
    for _ in range(max_iter):
        y = a @ v
        lam = float(v @ y)
        res = float(np.linalg.norm(y - lam * v))
        if _rq_settled(lam, lam_old, a) and res <= bound:
            return lam
        lam_old = lam
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        v = y / ny
    return None


def largest_eigenvalue(A, x0=None, power_iters: int = 300) -> float:
    """Top eigenvalue of a symmetric matrix.

    Power iteration with a Rayleigh-quotient/residual stop is tried first; when
    the spectral gap is too small for it to settle within ``power_iters`` steps,
    LAPACK's selected-eigenvalue driver takes over.
    """
    a = as_symmetric(A)
    k = a.shape[0]
    if k == 0:
        raise NumericalError("empty matrix")
    if k <= 64:
        return float(np.linalg.eigvalsh(a)[-1])
    lam = _power_iteration(a, x0, power_iters)
    if lam is not None:
        return lam
    return float(sla.eigh(a, eigvals_only=True, subset_by_index=[k - 1, k - 1], check_finite=False)[0])


def inverse_from_factor(c: np.ndarray) -> np.ndarray:
    """A^{-1} from the lower Cholesky factor of A via k triangular solves."""
    cinv = sla.solve_triangular(c, np.eye(c.shape[0]), lower=True, check_finite=False)
    return cinv.T @ cinv


def cholesky_trace_inverse(A, factor: np.ndarray | None = None) -> float:
    """trace(A^{-1}) = ||C^{-1}||_F^2 for A = C C^T."""
    c = cholesky(A) if factor is None else factor
    cinv = sla.solve_triangular(c, np.eye(c.shape[0]), lower=True, check_finite=False)
    return float(np.sum(cinv * cinv))


def inverse_row_sums(A, factor: np.ndarray | None = None) -> np.ndarray:
    c = cholesky(A) if factor is None else factor
    return _chol_solve(c, np.ones(c.shape[0]))


@dataclass(frozen=True)
class SpectralSummary:
    lambda_min: float
    lambda_max: float
    perron_vector: np.ndarray = field(repr=False)
    x_min: float
    raw_min: float = 0.0


def spectral_summary(A, x0=None, factor: np.ndarray | None = None) -> SpectralSummary:
    pair = smallest_eigenpair(A, x0=x0, factor=factor)
    lam_max = largest_eigenvalue(A)
    return SpectralSummary(pair.value, lam_max, pair.vector, float(pair.vector.min()), pair.raw_min)

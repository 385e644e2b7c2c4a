"""Symmetric eigendecomposition by row-cyclic Jacobi rotations.

Self-contained on purpose: rotation parameters, sweep control, ordering and
sign fixing are all implemented here, and no library eigensolver or
factorization is called.  The sweep is a plain scalar loop, compiled with
numba when available; the numpy fallback applies the same updates
vectorized per row/column pair.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotSorted, NotSymmetric

SYMMETRY_TOL = 1e-10
CONVERGENCE_TOL = 1e-12
MAX_SWEEPS = 50
RANK_TOL = 1e-10

# Guard for the rotation formula: beyond this the exact t is below the
# smallest normal number times the pivot, so the linearized form is exact.
_HUGE_TAU = 1e150


@dataclass(frozen=True)
class EigenResult:
    """Full spectrum of a symmetric matrix, sorted non-increasing.

    ``vectors[:, p]`` is the orthonormal eigenvector paired with
    ``eigenvalues[p]``; ``rank`` counts eigenvalues above the relative rank
    threshold (the spectrum itself is never truncated here).
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    rank: int


def check_symmetric(a, tol=SYMMETRY_TOL):
    """Validate that ``a`` is square and symmetric within ``tol`` (relative).

    Returns the matrix as a float64 array; raises NotSymmetric otherwise.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.abs(a).max()) if a.size else 0.0
    asym = float(np.abs(a - a.T).max())
    if asym > tol * scale:
        raise NotSymmetric(
            f"asymmetry {asym:.3e} exceeds {tol:.1e} * max|a| = {tol * scale:.3e}"
        )
    return a


def _off_diagonal_norm(w):
    # Summed from the off-diagonal entries themselves; subtracting the
    # diagonal mass from the total would cancel catastrophically once the
    # matrix is nearly diagonal.
    off = w.copy()
    np.fill_diagonal(off, 0.0)
    return math.sqrt(float((off * off).sum()))


def _sweep_scalar(w, v, skip):
    # One row-cyclic sweep of two-sided rotations, w <- J^T w J, v <- v J.
    # The smaller root of t^2 + 2*tau*t - 1 = 0 keeps |t| <= 1 (rotation
    # angle below pi/4), which is what guarantees sweep convergence.
    n = w.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = w[p, q]
            if abs(apq) <= skip:
                continue
            tau = (w[q, q] - w[p, p]) / (2.0 * apq)
            if abs(tau) > _HUGE_TAU:
                t = 1.0 / (2.0 * tau)
            elif tau >= 0.0:
                t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
            else:
                t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
            c = 1.0 / math.sqrt(1.0 + t * t)
            s = t * c
            for k in range(n):
                wpk = w[p, k]
                wqk = w[q, k]
                w[p, k] = c * wpk - s * wqk
                w[q, k] = s * wpk + c * wqk
            for k in range(n):
                wkp = w[k, p]
                wkq = w[k, q]
                w[k, p] = c * wkp - s * wkq
                w[k, q] = s * wkp + c * wkq
            w[p, q] = 0.0
            w[q, p] = 0.0
            for k in range(n):
                vkp = v[k, p]
                vkq = v[k, q]
                v[k, p] = c * vkp - s * vkq
                v[k, q] = s * vkp + c * vkq


def _sweep_numpy(w, v, skip):
    # Same updates as _sweep_scalar with the k-loops done as array ops.
    n = w.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = w[p, q]
            if abs(apq) <= skip:
                continue
            tau = (w[q, q] - w[p, p]) / (2.0 * apq)
            if abs(tau) > _HUGE_TAU:
                t = 1.0 / (2.0 * tau)
            elif tau >= 0.0:
                t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
            else:
                t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
            c = 1.0 / math.sqrt(1.0 + t * t)
            s = t * c
            rp = c * w[p, :] - s * w[q, :]
            rq = s * w[p, :] + c * w[q, :]
            w[p, :] = rp
            w[q, :] = rq
            cp = c * w[:, p] - s * w[:, q]
            cq = s * w[:, p] + c * w[:, q]
            w[:, p] = cp
            w[:, q] = cq
            w[p, q] = 0.0
            w[q, p] = 0.0
            vp = c * v[:, p] - s * v[:, q]
            vq = s * v[:, p] + c * v[:, q]
            v[:, p] = vp
            v[:, q] = vq


try:
    import numba

    _sweep = numba.njit("void(float64[:, ::1], float64[:, ::1], float64)", cache=True)(
        _sweep_scalar
    )
except ImportError:  # pragma: no cover - numba is normally present
    _sweep = _sweep_numpy


def sym_eig(
    a,
    sym_tol=SYMMETRY_TOL,
    conv_tol=CONVERGENCE_TOL,
    max_sweeps=MAX_SWEEPS,
    rank_tol=RANK_TOL,
):
    """Eigendecomposition of a symmetric matrix via row-cyclic Jacobi sweeps.

    Stops when the off-diagonal Frobenius mass drops below
    ``conv_tol * ||a||_F``; raises NoConvergence (carrying the residual)
    after ``max_sweeps`` sweeps.  Eigenvalues are returned non-increasing
    with sign-fixed orthonormal eigenvector columns.
    """
    a = check_symmetric(a, sym_tol)
    n = a.shape[0]
    w = np.ascontiguousarray(0.5 * (a + a.T))  # exact symmetry for the sweeps
    v = np.eye(n)
    norm_f = math.sqrt(float((w * w).sum()))
    target = conv_tol * norm_f
    if norm_f > 0.0:
        # Entries at or below `skip` cannot push off(w) past the target even
        # if every off-diagonal sits exactly there.
        skip = target / n
        converged = False
        for _ in range(max_sweeps):
            _sweep(w, v, skip)
            if _off_diagonal_norm(w) <= target:
                converged = True
                break
        if not converged:
            off = _off_diagonal_norm(w)
            raise NoConvergence(
                f"Jacobi sweeps exhausted: off-diagonal {off:.3e} above "
                f"target {target:.3e} after {max_sweeps} sweeps",
                residual=off,
            )
    eigenvalues = np.diagonal(w).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = np.ascontiguousarray(v[:, order])
    _fix_signs(vectors)
    return EigenResult(eigenvalues, vectors, numerical_rank(eigenvalues, rank_tol))


def _fix_signs(vectors):
    # Largest-magnitude entry of each column made positive; argmax takes the
    # lowest index on ties, so the convention is reproducible.  The negation
    # goes through a fresh array on purpose: ufuncs with out= aliasing a
    # strided column view miscompute on some numpy builds (seen with
    # np.negative at 64-byte strides on numpy 2.2).
    for p in range(vectors.shape[1]):
        col = vectors[:, p]
        k = int(np.argmax(np.abs(col)))
        if col[k] < 0.0:
            vectors[:, p] = -col


def numerical_rank(eigenvalues, rank_tol=RANK_TOL):
    """Count eigenvalues above ``rank_tol`` relative to the largest.

    The sequence must be non-increasing (NotSorted otherwise).  A spectrum
    whose largest value is not positive has rank 0.
    """
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if lam.ndim != 1:
        raise NotSorted(f"expected a 1-d spectrum, got shape {lam.shape}")
    if lam.size == 0:
        return 0
    if np.any(lam[:-1] < lam[1:]):
        raise NotSorted("spectrum is not sorted non-increasing")
    lam1 = float(lam[0])
    if lam1 <= 0.0:
        return 0
    return int(np.count_nonzero(lam > rank_tol * lam1))

"""Brute-force references used by tests and the ``verify`` command.

Deliberately disjoint from the main path: singular values come from a
one-sided Jacobi iteration on the unfolded matrix itself (never from the
Gram spectrum the decompositions diagonalize), contraction is redone with
explicit nested loops, and reconstructions are replayed by plain outer-
product accumulation.  Shared code is limited to tensor storage.
"""

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import DenseTensor, norm
from .decompose import (
    OperatorDecomposition,
    TransformDecomposition,
    TripleDecomposition,
    _terms,
    reconstructed_dims,
)
from .errors import GroupingMismatch, InvalidAxis, NoConvergence, ShapeMismatch

ORTHO_TOL = 1e-13
RANK_TOL = 1e-10
MAX_SWEEPS = 60


@dataclass(frozen=True)
class OracleReport:
    """Outcome of replaying a decomposition against the references."""

    singulars_reference: np.ndarray
    max_singular_deviation: float
    max_reconstruction_error: float
    passed: bool


def one_sided_jacobi_singulars(matrix, ortho_tol=ORTHO_TOL, rank_tol=RANK_TOL):
    """Singular values of a matrix by one-sided (Hestenes) Jacobi rotations.

    Columns are rotated pairwise until all are mutually orthogonal relative
    to their norms; the surviving column norms are the singular values.
    Values at or below ``rank_tol`` times the largest are dropped, so a zero
    matrix yields an empty sequence.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got {a.ndim} modes")
    if not a.any():
        return np.array([])
    if a.shape[0] < a.shape[1]:
        a = np.ascontiguousarray(a.T)
    m = a.shape[1]
    for _ in range(MAX_SWEEPS):
        worst = 0.0
        for i in range(m - 1):
            for j in range(i + 1, m):
                alpha = float(np.dot(a[:, i], a[:, i]))
                beta = float(np.dot(a[:, j], a[:, j]))
                gam = float(np.dot(a[:, i], a[:, j]))
                if alpha == 0.0 or beta == 0.0:
                    continue
                rel = abs(gam) / math.sqrt(alpha * beta)
                worst = max(worst, rel)
                if rel <= ortho_tol:
                    continue
                zeta = (beta - alpha) / (2.0 * gam)
                if zeta >= 0.0:
                    t = 1.0 / (zeta + math.sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                ci = c * a[:, i] - s * a[:, j]
                cj = s * a[:, i] + c * a[:, j]
                a[:, i] = ci
                a[:, j] = cj
        if worst <= ortho_tol:
            break
    else:
        raise NoConvergence(
            f"one-sided Jacobi did not orthogonalize columns in {MAX_SWEEPS} "
            f"sweeps (worst relative overlap {worst:.3e})",
            residual=worst,
        )
    sig = np.sqrt((a * a).sum(axis=0))
    sig = np.sort(sig)[::-1]
    top = float(sig[0]) if sig.size else 0.0
    return np.ascontiguousarray(sig[sig > rank_tol * top])


def matricized_singulars(a):
    """Reference singular values of a two-group tensor's unfolding."""
    if a.group_count != 2:
        raise GroupingMismatch(
            f"matricized_singulars needs 2 groups, got {a.group_count}"
        )
    d = a.group_orders[0]
    n = int(np.prod(a.tensor.dims[:d]))
    return one_sided_jacobi_singulars(a.tensor.data.reshape(n, -1))


def naive_contract(x, y, axes_x, axes_y):
    """Contraction semantics redone with explicit nested loops.

    Same contract as the stride-based implementation (including the
    shape-(1,) result when no free modes remain) but every output entry is
    a plain scalar summation over the shared index box.
    """
    axes_x = _check_axes(x, axes_x)
    axes_y = _check_axes(y, axes_y)
    if len(axes_x) != len(axes_y):
        raise InvalidAxis(f"axis lists must pair up, got {len(axes_x)} vs {len(axes_y)}")
    for ax, ay in zip(axes_x, axes_y):
        if x.dims[ax] != y.dims[ay]:
            raise ShapeMismatch(
                f"contracted extents differ: x mode {ax} has {x.dims[ax]}, "
                f"y mode {ay} has {y.dims[ay]}"
            )
    free_x = [k for k in range(x.order) if k not in axes_x]
    free_y = [k for k in range(y.order) if k not in axes_y]
    out_dims = tuple(x.dims[k] for k in free_x) + tuple(y.dims[k] for k in free_y)
    out = np.zeros(out_dims or (1,))
    shared = [range(x.dims[ax]) for ax in axes_x]
    ix = [0] * x.order
    iy = [0] * y.order
    for fx in product(*(range(x.dims[k]) for k in free_x)):
        for k, c in zip(free_x, fx):
            ix[k] = c
        for fy in product(*(range(y.dims[k]) for k in free_y)):
            for k, c in zip(free_y, fy):
                iy[k] = c
            total = 0.0
            for ks in product(*shared):
                for ax, ay, c in zip(axes_x, axes_y, ks):
                    ix[ax] = c
                    iy[ay] = c
                total += float(x.data[tuple(ix)]) * float(y.data[tuple(iy)])
            out[fx + fy if out_dims else (0,)] = total
    return DenseTensor(out, check_finite=False)


def _check_axes(t, axes):
    axes = tuple(int(a) for a in axes)
    seen = set()
    for a in axes:
        if not 0 <= a < t.order:
            raise InvalidAxis(f"position {a} out of range for order {t.order}")
        if a in seen:
            raise InvalidAxis(f"position {a} repeated")
        seen.add(a)
    return axes


def replay_reconstruction(decomposition):
    """Rebuild the decomposed tensor by plain outer-product accumulation."""
    acc = np.zeros(reconstructed_dims(decomposition))
    for weight, factors in _terms(decomposition):
        term = factors[0].data
        for factor in factors[1:]:
            term = np.multiply.outer(term, factor.data)
        acc += weight * term
    return DenseTensor(acc, check_finite=False)


def verify_decomposition(a, result, singular_tol=1e-8, reconstruction_tol=1e-8):
    """Replay a decomposition of ``a`` and compare against the references.

    Reconstruction error is relative Frobenius (0/0 counts as 0).  For
    two-group decompositions the stored weights are also checked against
    the one-sided-Jacobi singular values, zero-padded to a common length
    and measured relative to the largest reference value; no independent
    singular reference exists for triple decompositions, so only the
    reconstruction replay applies there.
    """
    rebuilt = replay_reconstruction(result)
    scale = norm(a.tensor)
    diff = norm(DenseTensor(a.tensor.data - rebuilt.data, check_finite=False))
    recon_err = diff / scale if scale > 0.0 else (0.0 if diff == 0.0 else math.inf)

    if isinstance(result, (OperatorDecomposition, TransformDecomposition)):
        reference = matricized_singulars(a)
        if isinstance(result, OperatorDecomposition):
            weights = np.asarray(result.eigenvalues, dtype=np.float64)
        else:
            weights = np.asarray(result.singulars, dtype=np.float64)
        width = max(len(reference), len(weights))
        ref = np.zeros(width)
        got = np.zeros(width)
        ref[: len(reference)] = reference
        got[: len(weights)] = weights
        if width == 0:
            deviation = 0.0
        elif ref[0] > 0.0:
            deviation = float(np.abs(got - ref).max() / ref[0])
        else:
            deviation = float(np.abs(got).max())
    elif isinstance(result, TripleDecomposition):
        reference = np.array([])
        deviation = 0.0
    else:
        raise TypeError(f"not a decomposition result: {type(result).__name__}")

    return OracleReport(
        singulars_reference=reference,
        max_singular_deviation=deviation,
        max_reconstruction_error=recon_err,
        passed=bool(recon_err <= reconstruction_tol and deviation <= singular_tol),
    )

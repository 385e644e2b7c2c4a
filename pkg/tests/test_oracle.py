"""Brute-force references and cross-implementation agreement."""

import numpy as np
import pytest

from tenspec import (
    DenseTensor,
    GroupedTensor,
    contract,
    decompose_sa_nnd,
    decompose_transform,
    decompose_triple,
    gram_operator,
    matricized_singulars,
    naive_contract,
    norm,
    outer,
    random_tensor,
    verify_decomposition,
)
from tenspec.errors import InvalidAxis, ShapeMismatch
from tenspec.oracle import one_sided_jacobi_singulars


def unit(dims, seed):
    t = random_tensor(dims, seed)
    return t * (1.0 / norm(t))


# --------------------------------------------------- matricized singulars


def test_singulars_of_identity():
    a = GroupedTensor(DenseTensor(np.eye(3)), (1, 1))
    assert np.allclose(matricized_singulars(a), [1.0, 1.0, 1.0], atol=1e-12)


def test_singulars_of_rank_deficient_diagonal():
    a = GroupedTensor(DenseTensor(np.diag([2.0, 0.0])), (1, 1))
    sig = matricized_singulars(a)
    assert sig.shape == (1,)
    assert sig[0] == pytest.approx(2.0, rel=1e-13)


def test_singulars_of_zero():
    a = GroupedTensor(DenseTensor.zeros((2, 3)), (1, 1))
    assert matricized_singulars(a).size == 0


def test_singulars_match_transform_path():
    a = GroupedTensor(random_tensor((4, 2, 2), 40), (1, 2))
    dec = decompose_transform(a)
    ref = matricized_singulars(a)
    assert len(ref) == dec.rank
    assert np.abs(ref - dec.singulars).max() <= 1e-8 * ref[0]


def test_one_sided_jacobi_against_wide_matrix():
    rng = np.random.Generator(np.random.PCG64(41))
    m = rng.random((3, 7)) * 2.0 - 1.0
    sig = one_sided_jacobi_singulars(m)
    ref = np.linalg.svd(m, compute_uv=False)
    assert np.abs(sig - ref[: len(sig)]).max() <= 1e-10 * ref[0]


# ---------------------------------------------------------- naive contract


def test_naive_contract_identity_action():
    eye = DenseTensor(np.eye(3))
    v = DenseTensor([1.0, -2.0, 0.5])
    out = naive_contract(eye, v, (1,), (0,))
    assert np.allclose(out.data, v.data, atol=1e-15)


def test_naive_contract_full_contraction():
    x = random_tensor((2, 3), 42)
    out = naive_contract(x, x, (0, 1), (0, 1))
    assert out.dims == (1,)
    assert out.values[0] == pytest.approx(float(np.dot(x.values, x.values)), rel=1e-12)


def test_naive_contract_agrees_with_contract():
    cases = [
        ((3, 4), (4, 5), (1,), (0,)),
        ((2, 3, 4), (4, 5, 3), (2, 1), (0, 2)),
        ((2, 2, 2), (2, 2), (0, 2), (1, 0)),
        ((5,), (5,), (0,), (0,)),
    ]
    for seed, (dx, dy, ax, ay) in enumerate(cases):
        x = random_tensor(dx, 100 + seed)
        y = random_tensor(dy, 200 + seed)
        fast = contract(x, y, ax, ay)
        slow = naive_contract(x, y, ax, ay)
        assert fast.dims == slow.dims
        scale = np.abs(slow.data).max()
        assert np.abs(fast.data - slow.data).max() <= 1e-12 * max(scale, 1e-300)


def test_naive_contract_shares_error_contract():
    x = DenseTensor(np.ones((2, 3)))
    y = DenseTensor(np.ones((4, 2)))
    with pytest.raises(ShapeMismatch):
        naive_contract(x, y, (0,), (0,))
    with pytest.raises(InvalidAxis):
        naive_contract(x, y, (0, 0), (0, 1))
    with pytest.raises(InvalidAxis):
        naive_contract(x, y, (5,), (0,))


# ----------------------------------------------------- verify_decomposition


def test_verify_rank_one_passes():
    u = unit((3,), 43)
    v = unit((2, 2), 44)
    a = GroupedTensor(4.0 * outer(u, v), (1, 2))
    report = verify_decomposition(a, decompose_transform(a))
    assert report.passed
    assert report.max_singular_deviation <= 1e-10
    assert report.max_reconstruction_error <= 1e-10


def test_verify_detects_corrupted_weight():
    a = GroupedTensor(random_tensor((4, 3), 45), (1, 1))
    dec = decompose_transform(a)
    bad = dec.singulars.copy()
    bad[0] *= 1.1
    corrupted = type(dec)(
        singulars=bad,
        left=dec.left,
        right=dec.right,
        left_shape=dec.left_shape,
        right_shape=dec.right_shape,
        spectrum=dec.spectrum,
    )
    report = verify_decomposition(a, corrupted)
    assert not report.passed
    assert report.max_singular_deviation > 1e-3


def test_verify_operator_decomposition():
    src = GroupedTensor(random_tensor((2, 3, 2, 3), 46), (2, 2))
    a = gram_operator(src, side="right")
    report = verify_decomposition(a, decompose_sa_nnd(a))
    assert report.passed
    assert len(report.singulars_reference) > 0


def test_verify_triple_uses_reconstruction_only():
    a = GroupedTensor(random_tensor((3, 3, 2), 47), (1, 1, 1))
    report = verify_decomposition(a, decompose_triple(a), reconstruction_tol=1e-10)
    assert report.passed
    assert report.singulars_reference.size == 0
    assert report.max_singular_deviation == 0.0


def test_verify_experiment2_scale():
    a = GroupedTensor(random_tensor((64, 8, 4), 48), (1, 2))
    report = verify_decomposition(
        a, decompose_transform(a), singular_tol=1e-8, reconstruction_tol=1e-8
    )
    assert report.passed

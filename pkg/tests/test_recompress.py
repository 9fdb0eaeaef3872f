import numpy as np
import pytest

from conftest import dense_from_factors, random_factors
from tensor_topk import cp
from tensor_topk.errors import DegenerateInputError
from tensor_topk.recompress import rank_one_argmax, recompress


def test_exact_rank_recovery(rng):
    fs = random_factors(rng, (6, 5, 4), 3)
    A = cp.CpTensor(fs)
    B = recompress(A, 3, iters=200, tol=1e-12, seed=1)
    assert B.rank == 3
    np.testing.assert_allclose(cp.materialize(B), dense_from_factors(fs),
                               rtol=1e-6, atol=1e-8)


def test_padded_rank_collapses(rng):
    # rank-2 tensor stored with 6 redundant columns compresses losslessly
    fs = random_factors(rng, (5, 4, 3), 2)
    dup = [np.hstack([f, f, f]) for f in fs]
    scale = np.array([1.0, 0.0, 0.0])  # only first copy carries weight
    dup[0] = dup[0] * np.repeat(scale, 2)
    A = cp.CpTensor(dup)
    B = recompress(A, 2, iters=200, tol=1e-12, seed=0)
    np.testing.assert_allclose(cp.materialize(B), cp.materialize(A),
                               rtol=1e-6, atol=1e-8)


def test_truncation_error_decreases_with_rank(rng):
    fs = random_factors(rng, (7, 6, 5), 8)
    A = cp.CpTensor(fs)
    dense = dense_from_factors(fs)
    errs = []
    for target in (1, 3, 6):
        B = recompress(A, target, iters=120, seed=3)
        errs.append(np.linalg.norm((cp.materialize(B) - dense).ravel()))
    assert errs[0] >= errs[1] >= errs[2]


def test_complex_recompress(rng):
    fs = random_factors(rng, (4, 4, 3), 2, complex_=True)
    A = cp.CpTensor(fs)
    B = recompress(A, 2, iters=200, tol=1e-12, seed=5)
    np.testing.assert_allclose(cp.materialize(B), dense_from_factors(fs),
                               rtol=1e-5, atol=1e-7)


def test_rank_one_argmax_separable(rng):
    # positive separable tensor: per-mode argmax is the global max location
    cols = [np.array([0.2, 0.9, 0.4]), np.array([0.8, 0.3]),
            np.array([0.1, 0.5, 0.7, 0.6])]
    A = cp.CpTensor([c[:, None] for c in cols])
    loc = rank_one_argmax(A, seed=2)
    assert loc == (1, 0, 2)


def test_rank_one_argmax_zero_tensor():
    A = cp.CpTensor([np.zeros((3, 2)), np.zeros((4, 2))])
    with pytest.raises(DegenerateInputError):
        rank_one_argmax(A)


def test_rank_one_argmax_dominant_entry(rng):
    fs = random_factors(rng, (5, 4, 3), 2, lo=0.0, hi=0.1)
    fs[0][2, 0] = 50.0
    fs[1][1, 0] = 50.0
    fs[2][0, 0] = 50.0
    A = cp.CpTensor(fs)
    assert rank_one_argmax(A, seed=1) == (2, 1, 0)

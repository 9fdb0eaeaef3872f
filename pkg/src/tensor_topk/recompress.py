"""Rank reduction by alternating least squares, and best rank-one location.

Both routines work entirely in factorized form: Gram and cross matrices are
R x R objects, so cost never depends on the dense tensor size.
"""

from __future__ import annotations

import numpy as np

from .cp import CpTensor, frob_norm
from .errors import DegenerateInputError

RIDGE_SCALE = 1e-12


def _term_norms(A):
    norms = np.ones(A.rank)
    for f in A.factors:
        norms *= np.linalg.norm(f, axis=0)
    return norms


def _init_factors(A, target_rank, rng):
    # Greedy seed: keep the largest-norm rank-one terms; pad any shortfall
    # (target above the stored rank, or zero terms) with random columns.
    order = np.argsort(-_term_norms(A), kind="stable")
    out = []
    for f in A.factors:
        n = f.shape[0]
        cols = np.empty((n, target_rank), dtype=A.dtype)
        for t in range(target_rank):
            if t < order.shape[0]:
                cols[:, t] = f[:, order[t]]
            else:
                fill = rng.standard_normal(n)
                if A.is_complex:
                    fill = fill + 1j * rng.standard_normal(n)
                cols[:, t] = fill
        out.append(cols)
    return out


def recompress(A, target_rank, iters=50, tol=1e-8, seed=0):
    """Best-fit CP tensor of rank ``target_rank``, by ALS sweeps.

    Stops after ``iters`` sweeps or when the relative fit improves by less
    than ``tol`` between sweeps.  Normal equations are solved with a ridge of
    RIDGE_SCALE times the Gram trace, so redundant (rank-deficient) inputs
    do not break the solve.  Deterministic for a fixed seed.
    """
    if target_rank < 1:
        raise ValueError(f"target rank must be >= 1, got {target_rank}")
    rng = np.random.default_rng(seed)
    norm_a = frob_norm(A)
    if norm_a == 0.0:
        return CpTensor([np.zeros((n, target_rank), dtype=A.dtype) for n in A.dims])
    facs = _init_factors(A, target_rank, rng)
    # cross[p] = A_p^T conj(B_p), gram[p] = B_p^H B_p
    cross = [A.factors[p].T @ np.conj(facs[p]) for p in range(A.order)]
    gram = [np.conj(facs[p]).T @ facs[p] for p in range(A.order)]
    prev_fit = None
    for _ in range(iters):
        for p in range(A.order):
            cmat = np.ones((A.rank, target_rank), dtype=A.dtype)
            gmat = np.ones((target_rank, target_rank), dtype=A.dtype)
            for q in range(A.order):
                if q == p:
                    continue
                cmat = cmat * cross[q]
                gmat = gmat * gram[q]
            rhs = A.factors[p] @ cmat
            lhs = np.conj(gmat)
            ridge = RIDGE_SCALE * max(float(np.real(np.trace(lhs))), np.finfo(float).tiny)
            lhs = lhs + ridge * np.eye(target_rank)
            facs[p] = np.linalg.solve(lhs.T, rhs.T).T
            cross[p] = A.factors[p].T @ np.conj(facs[p])
            gram[p] = np.conj(facs[p]).T @ facs[p]
        # ||A - B||^2 from factorized inner products only
        cross_full = np.ones((A.rank, target_rank), dtype=A.dtype)
        gram_full = np.ones((target_rank, target_rank), dtype=A.dtype)
        for p in range(A.order):
            cross_full = cross_full * cross[p]
            gram_full = gram_full * gram[p]
        ab = np.conj(cross_full.sum())
        bb = float(np.real(gram_full.sum()))
        err2 = max(norm_a * norm_a - 2.0 * float(np.real(ab)) + bb, 0.0)
        fit = np.sqrt(err2) / norm_a
        if prev_fit is not None and abs(prev_fit - fit) < tol:
            break
        prev_fit = fit
    return CpTensor(facs)


def rank_one_argmax(A, iters=100, seed=0):
    """Index tuple of the dominant entry of A's best rank-one approximation.

    Runs the higher-order power method from a random start, then takes the
    per-mode argmax of the absolute factor vectors.  Ties resolve to the
    smallest index.  Deterministic for a fixed seed.
    """
    if frob_norm(A) == 0.0:
        raise DegenerateInputError("rank_one_argmax needs a nonzero tensor")
    rng = np.random.default_rng(seed)
    vecs = []
    for n in A.dims:
        v = rng.standard_normal(n)
        if A.is_complex:
            v = v + 1j * rng.standard_normal(n)
        vecs.append(v / np.linalg.norm(v))
    for _ in range(iters):
        drift = 0.0
        for p in range(A.order):
            w = np.ones(A.rank, dtype=A.dtype)
            for q in range(A.order):
                if q != p:
                    w = w * (np.conj(vecs[q]) @ A.factors[q])
            u = A.factors[p] @ w
            norm_u = np.linalg.norm(u)
            if norm_u == 0.0:
                u = rng.standard_normal(p_dim := A.dims[p])
                if A.is_complex:
                    u = u + 1j * rng.standard_normal(p_dim)
                norm_u = np.linalg.norm(u)
            u = u / norm_u
            drift = max(drift, 1.0 - abs(np.vdot(vecs[p], u)))
            vecs[p] = u
        if drift <= 1e-12:
            break
    return tuple(int(np.argmax(np.abs(v))) for v in vecs)

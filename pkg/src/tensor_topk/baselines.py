"""Reference methods: the exhaustive dense oracle and a shifted power iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cp
from .errors import CapacityError, DegenerateInputError, InfeasibleKError
from .recompress import rank_one_argmax, recompress
from .solver import OrderingKey, TopKResult, key_values

ORACLE_CAP_DEFAULT = 1 << 22


def oracle_topk(A, k, key=OrderingKey.MAX, max_elems=ORACLE_CAP_DEFAULT):
    """Exact top-k by materializing the tensor and scanning every entry.

    Ground truth for anything small enough to densify; ties resolve to the
    smallest linear index, like the solver.
    """
    total = A.size()
    if total < k:
        raise InfeasibleKError(f"k={k} exceeds the tensor size of {total} entries")
    if total > max_elems:
        raise CapacityError(f"dense size {total} exceeds the cap of {max_elems} entries")
    flat = cp.materialize(A, max_elems).ravel(order="F")
    keyed = key_values(flat, key)
    order = np.lexsort((np.arange(total), -keyed))[:k]
    indices = np.column_stack(np.unravel_index(order, A.dims, order="F")).astype(np.int64)
    values = flat[order]
    return TopKResult(
        values=values,
        indices=indices,
        objective=float(keyed[order].sum()),
        sweeps_used=0,
        converged=True,
        diagnostics={"method": "oracle", "scanned": int(total)},
    )


@dataclass(frozen=True)
class PowerIterConfig:
    """Knobs for `power_iteration_max`."""

    max_iters: int = 200
    rank_cap: int = 10
    shift: float | str = "auto"
    overlap_tol: float = 1e-12
    recompress_iters: int = 50
    recompress_tol: float = 1e-8
    hopm_iters: int = 100
    seed: int = 0
    nonneg_check_cap: int = 1 << 20


def _resolve_shift(A, cfg):
    if cfg.shift != "auto":
        return float(cfg.shift)
    s = cp.frob_norm(A)
    # The Frobenius norm bounds no single entry in general; on tensors small
    # enough to scan, verify nonnegativity and double the shift a few times
    # if an entry still lands below zero.
    if A.size() <= cfg.nonneg_check_cap:
        low = float(cp.materialize(A, cfg.nonneg_check_cap).min())
        for _ in range(3):
            if low + s >= 0.0:
                break
            s *= 2.0
    return s


def _balance_columns(A):
    """Equalize per-column factor norms across modes.

    Represents the same tensor (up to rounding).  Repeated Hadamard products
    square factor entries, and without rebalancing the per-mode Gram products
    overflow long before the normalized iterate itself is large.
    """
    fs = [f.copy() for f in A.factors]
    norms = np.stack([np.sqrt((f * f).sum(axis=0)) for f in fs])
    norms = np.where(norms > 0.0, norms, 1.0)
    target = np.exp(np.log(norms).mean(axis=0))
    for p, f in enumerate(fs):
        f *= target / norms[p]
    return cp.CpTensor(fs)


def power_iteration_max(A, cfg=PowerIterConfig()):
    """Largest-entry estimate via Hadamard-product power iteration.

    Shifts A to a nonnegative tensor B, iterates y <- B o y with
    normalization (recompressing whenever the rank passes ``rank_cap``),
    reads the peak location from the converged iterate's best rank-one
    factors, and reports the exact entry of A there.  Real tensors only.
    """
    if A.is_complex:
        raise ValueError("power iteration orders real values; tensor is complex")
    if cp.frob_norm(A) == 0.0:
        raise DegenerateInputError("power iteration needs a nonzero tensor")
    shift_s = _resolve_shift(A, cfg)
    B = cp.shift(A, shift_s)
    y = cp.scale(cp.cp_ones(A.dims), 1.0 / np.sqrt(A.size()))
    for _ in range(cfg.max_iters):
        z = _balance_columns(cp.hadamard(B, y))
        norm_z = cp.frob_norm(z)
        if norm_z == 0.0:
            raise DegenerateInputError("iterate collapsed to zero")
        z = cp.scale(z, 1.0 / norm_z)
        if z.rank > cfg.rank_cap:
            z = recompress(z, cfg.rank_cap, iters=cfg.recompress_iters,
                           tol=cfg.recompress_tol, seed=cfg.seed)
            zn = cp.frob_norm(z)
            if zn == 0.0:
                raise DegenerateInputError("iterate collapsed to zero")
            z = cp.scale(z, 1.0 / zn)
        overlap = abs(cp.inner(y, z))
        y = z
        if overlap >= 1.0 - cfg.overlap_tol:
            break
    loc = rank_one_argmax(y, iters=cfg.hopm_iters, seed=cfg.seed)
    return cp.element(A, loc), loc

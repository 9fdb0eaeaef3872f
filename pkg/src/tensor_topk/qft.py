"""Quantum Fourier transform on a grouped-qubit CP state.

d qubits are split into p modes of q qubits each (d = p*q); the statevector
lives as a complex CpTensor over p modes of dimension 2^q.  Qubit a sits at
position a % q of mode a // q, big-endian within the mode and across modes,
so the global basis index of a multi-index (i_0, ..., i_{p-1}) is
sum_mu i_mu * 2^(q*(p-1-mu)).

Single-qubit and same-mode gates are one ttm on the affected mode and leave
the rank alone.  A cross-mode controlled phase is applied exactly as the
rank-2 projector split (control-0 branch) + (control-1 branch with the phase
on the target mode); exact zero rank-one terms produced by stacked projector
branches are dropped on the spot, which is what keeps repeated rank-2 splits
from compounding.  The closing bit-reversal of the circuit is an index
relabeling (mode reversal plus a per-mode bit-reversal permutation), so it
never grows the rank.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cp
from .errors import ShapeMismatchError
from .recompress import recompress
from .solver import OrderingKey, SolverConfig, TopKResult, solve


@dataclass(frozen=True)
class QubitLayout:
    """Grouping of d qubits into p modes of q qubits each."""

    qubits: int
    modes: int
    per_mode: int

    def __post_init__(self):
        if self.qubits != self.modes * self.per_mode:
            raise ShapeMismatchError(
                f"{self.qubits} qubits cannot split into {self.modes} modes "
                f"of {self.per_mode}"
            )
        if self.modes < 1 or self.per_mode < 1:
            raise ShapeMismatchError("modes and qubits per mode must be >= 1")

    @property
    def mode_dim(self):
        return 1 << self.per_mode

    def mode_of(self, qubit):
        return qubit // self.per_mode

    def pos_of(self, qubit):
        return qubit % self.per_mode

    def dims(self):
        return (self.mode_dim,) * self.modes


def square_layout(d):
    """Layout with p = q = sqrt(d) for square qubit counts."""
    root = int(round(np.sqrt(d)))
    if root * root != d:
        raise ShapeMismatchError(f"{d} is not a square qubit count")
    return QubitLayout(d, root, root)


@dataclass(frozen=True)
class GateOp:
    """One circuit operation; qubits are 0-based.

    kind "h": Hadamard on qubit a.  kind "cphase": phase ``theta`` when both
    the control a and target b are 1.  kind "swap": exchange qubits a and b.
    """

    kind: str
    a: int
    b: int = -1
    theta: float = 0.0


def qft_circuit(d):
    """Gate list of the standard QFT circuit, closing swaps included."""
    gates = []
    for a in range(d):
        gates.append(GateOp("h", a))
        for b in range(a + 1, d):
            gates.append(GateOp("cphase", b, a, 2.0 * np.pi / (1 << (b - a + 1))))
    for a in range(d // 2):
        gates.append(GateOp("swap", a, d - 1 - a))
    return gates


_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def _lifted_single(per_mode, pos, gate2):
    """Lift a 2x2 gate at bit position pos (0 = most significant) to 2^q."""
    mat = np.eye(1 << pos)
    mat = np.kron(mat, gate2)
    mat = np.kron(mat, np.eye(1 << (per_mode - 1 - pos)))
    return mat


def _bit_mask(per_mode, pos):
    idx = np.arange(1 << per_mode)
    return (idx >> (per_mode - 1 - pos)) & 1


def _scale_mode_rows(state, mode, diag):
    out = list(state.factors)
    out[mode] = state.factors[mode] * diag[:, None]
    return cp.CpTensor(out)


def apply_gate(state, gate, layout):
    """Apply one GateOp to a CP state; exact for every gate kind."""
    q = layout.per_mode
    if gate.kind == "h":
        mode = layout.mode_of(gate.a)
        return cp.ttm(state, _lifted_single(q, layout.pos_of(gate.a), _HADAMARD), mode)
    if gate.kind == "cphase":
        cmode, tmode = layout.mode_of(gate.a), layout.mode_of(gate.b)
        cbit = _bit_mask(q, layout.pos_of(gate.a))
        tbit = _bit_mask(q, layout.pos_of(gate.b))
        phase = np.exp(1j * gate.theta)
        if cmode == tmode:
            diag = np.where((cbit == 1) & (tbit == 1), phase, 1.0 + 0j)
            return _scale_mode_rows(state, cmode, diag)
        zero_branch = _scale_mode_rows(state, cmode, (cbit == 0).astype(np.complex128))
        one_branch = _scale_mode_rows(state, cmode, (cbit == 1).astype(np.complex128))
        one_branch = _scale_mode_rows(
            one_branch, tmode, np.where(tbit == 1, phase, 1.0 + 0j))
        return cp.drop_zero_columns(cp.add(zero_branch, one_branch))
    if gate.kind == "swap":
        amode, bmode = layout.mode_of(gate.a), layout.mode_of(gate.b)
        apos, bpos = layout.pos_of(gate.a), layout.pos_of(gate.b)
        if amode == bmode:
            idx = np.arange(1 << q)
            abit = (idx >> (q - 1 - apos)) & 1
            bbit = (idx >> (q - 1 - bpos)) & 1
            target = idx ^ np.where(abit != bbit,
                                    (1 << (q - 1 - apos)) | (1 << (q - 1 - bpos)), 0)
            perm = np.zeros((1 << q, 1 << q))
            perm[idx, target] = 1.0
            return cp.ttm(state, perm, amode)
        # cross-mode: sum over |s><t| x |t><s|, four lifted terms
        basis = [np.array([[1.0, 0.0], [0.0, 0.0]]),   # |0><0|
                 np.array([[0.0, 1.0], [0.0, 0.0]]),   # |0><1|
                 np.array([[0.0, 0.0], [1.0, 0.0]]),   # |1><0|
                 np.array([[0.0, 0.0], [0.0, 1.0]])]   # |1><1|
        pieces = []
        for s in (0, 1):
            for t in (0, 1):
                e_st = _lifted_single(q, apos, basis[2 * s + t])
                e_ts = _lifted_single(q, bpos, basis[2 * t + s])
                pieces.append(cp.ttm(cp.ttm(state, e_st, amode), e_ts, bmode))
        acc = pieces[0]
        for piece in pieces[1:]:
            acc = cp.add(acc, piece)
        return cp.drop_zero_columns(acc)
    raise ValueError(f"unknown gate kind {gate.kind!r}")


def reverse_qubit_order(state, layout):
    """Index relabeling equal to the closing full-reversal swap network.

    Reverses the mode order and bit-reverses within each mode; rank is
    untouched.
    """
    q = layout.per_mode
    idx = np.arange(1 << q)
    rev = np.zeros_like(idx)
    for pos in range(q):
        rev |= ((idx >> pos) & 1) << (q - 1 - pos)
    out = [None] * layout.modes
    for mu in range(layout.modes):
        out[layout.modes - 1 - mu] = np.asarray(state.factors[mu])[rev, :]
    return cp.CpTensor(out)


def random_product_state(layout, rng):
    """Rank-one state with re, im ~ U(0, 1) amplitudes, unit norm."""
    factors = []
    for _ in range(layout.modes):
        col = rng.uniform(0.0, 1.0, size=(layout.mode_dim, 1)) \
            + 1j * rng.uniform(0.0, 1.0, size=(layout.mode_dim, 1))
        factors.append(col)
    state = cp.CpTensor(factors)
    return cp.scale(state, 1.0 / cp.frob_norm(state))


def run_qft(state, layout, rank_cap=None, recompress_seed=0):
    """Apply the full QFT circuit to a CP state.

    The closing swaps are realized as `reverse_qubit_order`.  When rank_cap
    is set, the state is recompressed whenever its rank passes the cap
    (making amplitudes approximate); with rank_cap=None the result is exact.
    """
    for gate in qft_circuit(layout.qubits):
        if gate.kind == "swap":
            continue
        state = apply_gate(state, gate, layout)
        if rank_cap is not None and state.rank > rank_cap:
            state = recompress(state, rank_cap, seed=recompress_seed)
    return reverse_qubit_order(state, layout)


def statevector(state, layout, max_elems=1 << 22):
    """Dense statevector (global big-endian basis order) of a CP state."""
    return cp.materialize(state, max_elems).ravel(order="C")


def qft_reference(psi0):
    """Dense QFT of a statevector via the FFT identity (unitary convention)."""
    psi0 = np.asarray(psi0, dtype=np.complex128)
    return np.fft.ifft(psi0) * np.sqrt(psi0.shape[0])


@dataclass
class MeasurementResult:
    """Top amplitudes of the transformed state, largest magnitude first."""

    indices: np.ndarray
    amplitudes: np.ndarray
    magnitudes: np.ndarray
    bitstrings: list
    topk: TopKResult
    state: cp.CpTensor


def _global_bits(idx, layout):
    bits = []
    for i in idx:
        bits.append(format(int(i), f"0{layout.per_mode}b"))
    return "".join(bits)


def simulate_and_measure(d, p=None, q=None, init_seed=0, k=1, extra=5,
                         block_size=2, rank_cap=None, restarts=5,
                         max_sweeps=50):
    """Prepare a random product state, run the QFT, read off the top-k.

    Defaults to the square layout when p and q are omitted.  Measurement is
    the block-alternating solver under the magnitude key; reported values
    are the complex amplitudes with their magnitudes alongside.
    """
    layout = square_layout(d) if p is None or q is None else QubitLayout(d, p, q)
    rng = np.random.default_rng(init_seed)
    state = random_product_state(layout, rng)
    state = run_qft(state, layout, rank_cap=rank_cap, recompress_seed=init_seed)
    cfg = SolverConfig(k=k, extra=extra, block_size=min(block_size, layout.modes),
                       key=OrderingKey.MAX_ABS, restarts=restarts,
                       max_sweeps=max_sweeps, seed=init_seed)
    res = solve(state, cfg)
    amps = np.asarray(res.values, dtype=np.complex128)
    return MeasurementResult(
        indices=res.indices,
        amplitudes=amps,
        magnitudes=np.abs(amps),
        bitstrings=[_global_bits(row, layout) for row in res.indices],
        topk=res,
        state=state,
    )

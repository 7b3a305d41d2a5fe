"""Dense 4-qubit statevector engine.

Basis convention: the amplitude of |i0 i1 i2 i3> sits at index
``i0*8 + i1*4 + i2*2 + i3``, so qubit 0 is the most significant bit and
Kronecker products read left to right as qubits 0..3.  The same
most-significant-first packing is used for GF(2) vectors in
:mod:`mhstates.f2linear`, which makes a packed bit vector equal to its
basis index.

Gates are applied by index arithmetic on the 16-vector; the dense 16x16
builders (:func:`single_on`, :func:`local_operator`, :func:`bit_matrix_operator`)
exist as a slow reference path for tests.
"""

from __future__ import annotations

import math
from typing import Sequence, TextIO

import numpy as np

from . import f2linear

N_QUBITS = 4
DIM = 16

# single-qubit gates
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
P = np.array([[1, 0], [0, 1j]], dtype=complex)
PDG = P.conj().T
T = np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    ph = np.exp(-0.5j * theta)
    return np.array([[ph, 0], [0, ph.conjugate()]], dtype=complex)


def zero_state() -> np.ndarray:
    s = np.zeros(DIM, dtype=complex)
    s[0] = 1.0
    return s


def basis_state(index: int) -> np.ndarray:
    s = np.zeros(DIM, dtype=complex)
    s[index] = 1.0
    return s


def from_amplitudes(pairs: dict[int, complex]) -> np.ndarray:
    """Unnormalised state from a sparse {index: amplitude} map."""
    s = np.zeros(DIM, dtype=complex)
    for idx, amp in pairs.items():
        s[idx] = amp
    return s


def is_normalized(s: np.ndarray, tol: float = 1e-9) -> bool:
    return abs(np.vdot(s, s).real - 1.0) <= tol


def _check_qubit(i: int) -> None:
    if not 0 <= i < N_QUBITS:
        raise IndexError(f"qubit index out of range: {i}")


def apply_single(g: np.ndarray, i: int, s: np.ndarray) -> np.ndarray:
    """Apply a 2x2 gate to qubit ``i``: (I x .. x g x .. x I) s."""
    _check_qubit(i)
    t = s.reshape(2, 2, 2, 2)
    t = np.tensordot(g, t, axes=([1], [i]))
    # tensordot moved the contracted axis to the front; put it back
    return np.moveaxis(t, 0, i).reshape(DIM)


def apply_masked(g: np.ndarray, v: Sequence[int], s: np.ndarray) -> np.ndarray:
    """Apply ``g`` on exactly the qubits where the GF(2) vector is 1."""
    out = s
    for i, bit in enumerate(v):
        if bit & 1:
            out = apply_single(g, i, out)
    return out


def _index_bits() -> np.ndarray:
    return np.arange(DIM)


def apply_cnot(target: int, control: int, s: np.ndarray) -> np.ndarray:
    """CNOT: amplitude at x moves to x with bit ``target`` xored by bit
    ``control``."""
    if target == control:
        raise ValueError("CNOT target and control must differ")
    _check_qubit(target)
    _check_qubit(control)
    y = _index_bits()
    ctrl = (y >> (3 - control)) & 1
    return s[y ^ (ctrl << (3 - target))]


def apply_swap(i: int, j: int, s: np.ndarray) -> np.ndarray:
    _check_qubit(i)
    _check_qubit(j)
    y = _index_bits()
    bi = (y >> (3 - i)) & 1
    bj = (y >> (3 - j)) & 1
    diff = bi ^ bj
    return s[y ^ (diff << (3 - i)) ^ (diff << (3 - j))]


def bit_matrix_permutation(a: f2linear.BitMatrix) -> np.ndarray:
    """Index permutation ``p`` with (X_A s) = s[p]; X_A |x> = |Ax>."""
    ainv = f2linear.inverse(a)
    return np.array([f2linear.matvec(ainv, y) for y in range(DIM)])


def apply_bit_matrix(a: f2linear.BitMatrix, s: np.ndarray) -> np.ndarray:
    """Apply the CNOT-circuit operator X_A mapping |x> to |Ax>."""
    return s[bit_matrix_permutation(a)]


def apply_qubit_permutation(sigma: Sequence[int], s: np.ndarray) -> np.ndarray:
    """Apply the SWAP-network operator sending qubit i to qubit sigma(i)."""
    return apply_bit_matrix(f2linear.permutation_matrix(sigma), s)


def param_state(p: np.ndarray) -> np.ndarray:
    """Product state with qubit k in
    exp(-i a_k/2) cos(b_k/2) |0> + exp(i a_k/2) sin(b_k/2) |1>,
    reading (a_k, b_k) from the first two columns of the 4x3 matrix ``p``.

    The third column is ignored (a z-rotation only rephases |0>) and the
    written global phase is kept exactly: no re-phasing is applied.
    """
    p = np.asarray(p, dtype=float)
    out = np.ones(1, dtype=complex)
    for k in range(N_QUBITS):
        a, b = p[k, 0], p[k, 1]
        ph = np.exp(-0.5j * a)
        factor = np.array([ph * math.cos(b / 2), ph.conjugate() * math.sin(b / 2)])
        out = np.kron(out, factor)
    return out


def param_qubit_gates(p: np.ndarray) -> list[np.ndarray]:
    """Per-qubit 2x2 factors Rz(a_k) Ry(b_k) Rz(a'_k) of the local unitary."""
    p = np.asarray(p, dtype=float)
    return [rz(p[k, 0]) @ ry(p[k, 1]) @ rz(p[k, 2]) for k in range(N_QUBITS)]


def param_operator(p: np.ndarray) -> np.ndarray:
    """Dense 16x16 local unitary: the Kronecker product over qubits of
    Rz(a_k) Ry(b_k) Rz(a'_k)."""
    out = np.ones((1, 1), dtype=complex)
    for g in param_qubit_gates(p):
        out = np.kron(out, g)
    return out


def apply_param_operator(p: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Action of :func:`param_operator` without building the 16x16 matrix."""
    out = s
    for k, g in enumerate(param_qubit_gates(p)):
        out = apply_single(g, k, out)
    return out


def single_on(g: np.ndarray, i: int, n: int = N_QUBITS) -> np.ndarray:
    """Dense embedding I x .. x g x .. x I (slow reference path)."""
    _check_qubit(i)
    mats = [I2] * n
    mats[i] = g
    return local_operator(mats)


def local_operator(gates: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of one 2x2 matrix per qubit, qubit 0 leftmost."""
    out = np.ones((1, 1), dtype=complex)
    for g in gates:
        out = np.kron(out, g)
    return out


def bit_matrix_operator(a: f2linear.BitMatrix) -> np.ndarray:
    """Dense 16x16 permutation matrix of X_A (slow reference path)."""
    u = np.zeros((DIM, DIM), dtype=complex)
    for x in range(DIM):
        u[f2linear.matvec(a, x), x] = 1.0
    return u


def qubit_permutation_operator(sigma: Sequence[int]) -> np.ndarray:
    return bit_matrix_operator(f2linear.permutation_matrix(sigma))


def phase_equal(s: np.ndarray, t: np.ndarray, tol: float = 1e-10) -> bool:
    """True iff the unit vectors agree up to a global phase:
    |<s|t>| >= 1 - tol."""
    for v in (s, t):
        if not is_normalized(v, tol=1e-6):
            raise ValueError("phase_equal expects unit-norm states")
    return abs(np.vdot(s, t)) >= 1.0 - tol


def operators_phase_equal(u: np.ndarray, v: np.ndarray, tol: float = 1e-10) -> bool:
    """True iff two unitaries of equal shape agree up to a global phase."""
    d = u.shape[0]
    return abs(np.trace(u.conj().T @ v)) / d >= 1.0 - tol


STATE_FILE_HEADER = (
    "# 4-qubit state vector: 16 lines 're im', index = i0*8 + i1*4 + i2*2 + i3\n"
    "# (qubit 0 is the most significant bit of the basis label)\n"
)


def write_state(f: TextIO | str, s: np.ndarray, header: str = STATE_FILE_HEADER) -> None:
    """Write a state in the text format: one 're im' line per amplitude,
    index order 0..15; '#' lines are comments."""
    if isinstance(f, str):
        with open(f, "w", encoding="utf-8") as fh:
            write_state(fh, s, header)
        return
    f.write(header)
    for amp in s:
        f.write(f"{amp.real:.17g} {amp.imag:.17g}\n")


def read_state(f: TextIO | str) -> np.ndarray:
    if isinstance(f, str):
        with open(f, "r", encoding="utf-8") as fh:
            return read_state(fh)
    amps = []
    for line in f:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        re_s, im_s = line.split()
        amps.append(complex(float(re_s), float(im_s)))
    if len(amps) != DIM:
        raise ValueError(f"state file must hold {DIM} amplitudes, got {len(amps)}")
    return np.array(amps, dtype=complex)

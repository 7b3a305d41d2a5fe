"""Pauli-group words in normal form and their parameter-space images.

Every element of the 4-qubit Pauli group is ``i^phase * X_u * Z_v`` for a
unique phase exponent mod 4 and unique GF(2) masks u, v (packed
most-significant-bit-first, like everything else in this package).
Phases are carried as the integer exponent, never as floats, so the
identities relating parameter shifts to Pauli actions stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import f2linear, qstate

N = 4
_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)

#: parameter-space operations with exact Pauli images
ALPHA_PLUS_PI = "alpha+pi"
NEG_BETA = "-beta"
NEG_ALPHA_BETA_PLUS_PI = "-alpha,beta+pi"
PARAM_OPS = (ALPHA_PLUS_PI, NEG_BETA, NEG_ALPHA_BETA_PLUS_PI)


def mask_from_bits(bits: Sequence[int]) -> int:
    """Pack a GF(2) vector (qubit 0 first) into an int, MSB first."""
    out = 0
    for k, b in enumerate(bits):
        out |= (int(b) & 1) << (N - 1 - k)
    return out


def bits_from_mask(mask: int) -> list[int]:
    return [(mask >> (N - 1 - k)) & 1 for k in range(N)]


@dataclass(frozen=True)
class PauliWord:
    """Normal form i^phase_pow X_x Z_z with masks over the 4 qubits."""

    phase_pow: int
    x: int
    z: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "phase_pow", self.phase_pow % 4)

    @property
    def phase(self) -> complex:
        return _PHASES[self.phase_pow]

    def is_identity(self) -> bool:
        return self.phase_pow == 0 and self.x == 0 and self.z == 0


IDENTITY = PauliWord(0, 0, 0)


def word_x(k: int) -> PauliWord:
    return PauliWord(0, 1 << (N - 1 - k), 0)


def word_z(k: int) -> PauliWord:
    return PauliWord(0, 0, 1 << (N - 1 - k))


def word_y(k: int) -> PauliWord:
    """Y = i X Z on one qubit."""
    bit = 1 << (N - 1 - k)
    return PauliWord(1, bit, bit)


def pauli_mul(p: PauliWord, q: PauliWord) -> PauliWord:
    """Product in normal form; commuting Z_v past X_u costs (-1)^(v.u)."""
    swaps = (p.z & q.x).bit_count()
    return PauliWord(p.phase_pow + q.phase_pow + 2 * swaps, p.x ^ q.x, p.z ^ q.z)


def pauli_inv(p: PauliWord) -> PauliWord:
    swaps = (p.z & p.x).bit_count()
    return PauliWord(-p.phase_pow + 2 * swaps, p.x, p.z)


def dense(p: PauliWord) -> np.ndarray:
    """Dense 16x16 matrix of the word (reference path)."""
    xs = bits_from_mask(p.x)
    zs = bits_from_mask(p.z)
    mats = []
    for xb, zb in zip(xs, zs):
        m = np.eye(2, dtype=complex)
        if xb:
            m = qstate.X @ m
        if zb:
            m = m @ qstate.Z
        mats.append(m)
    return p.phase * qstate.local_operator(mats)


def apply(p: PauliWord, s: np.ndarray) -> np.ndarray:
    """Apply the word to a state without building the matrix."""
    out = s
    for k, zb in enumerate(bits_from_mask(p.z)):
        if zb:
            out = qstate.apply_single(qstate.Z, k, out)
    for k, xb in enumerate(bits_from_mask(p.x)):
        if xb:
            out = qstate.apply_single(qstate.X, k, out)
    return p.phase * out


def conjugate_by_cnot(a: f2linear.BitMatrix, p: PauliWord) -> PauliWord:
    """Image of the word under conjugation by the CNOT circuit of ``a``:
    the X mask maps through a, the Z mask through the inverse transpose,
    and the phase is untouched."""
    return PauliWord(
        p.phase_pow,
        f2linear.matvec(a, p.x),
        f2linear.matvec(f2linear.inv_transpose(a), p.z),
    )


def normal_form_deviation(samples: int = 100, seed: int = 0) -> float:
    """Max |dense(p*q) - dense(p) dense(q)| over random word pairs."""
    rng = np.random.default_rng(seed)
    dev = 0.0
    for _ in range(samples):
        p = PauliWord(int(rng.integers(4)), int(rng.integers(16)), int(rng.integers(16)))
        q = PauliWord(int(rng.integers(4)), int(rng.integers(16)), int(rng.integers(16)))
        dev = max(dev, float(np.abs(dense(pauli_mul(p, q)) - dense(p) @ dense(q)).max()))
    return dev


def param_op(p_mat: np.ndarray, k: int, kind: str) -> tuple[np.ndarray, PauliWord]:
    """Shift the parameters of qubit ``k`` and return the exact Pauli image.

    The three shifts and their images on the product state are
      alpha_k + pi            ->  -i Z_k
      beta_k  -> -beta_k      ->     Z_k
      (-alpha_k, beta_k + pi) ->  -i Y_k  (= X_k Z_k)
    so ``param_state(new) == dense(word) @ param_state(old)`` exactly,
    phase included.
    """
    p_mat = np.asarray(p_mat, dtype=float)
    if np.any(p_mat[:, 2] != 0.0):
        raise ValueError("parameter shifts are defined for state matrices "
                         "(third column must be zero)")
    out = p_mat.copy()
    if kind == ALPHA_PLUS_PI:
        out[k, 0] += np.pi
        word = PauliWord(3, 0, 1 << (N - 1 - k))  # -i Z_k
    elif kind == NEG_BETA:
        out[k, 1] = -out[k, 1]
        word = PauliWord(0, 0, 1 << (N - 1 - k))  # Z_k
    elif kind == NEG_ALPHA_BETA_PLUS_PI:
        out[k, 0] = -out[k, 0]
        out[k, 1] += np.pi
        bit = 1 << (N - 1 - k)
        word = PauliWord(0, bit, bit)  # -i Y_k = X_k Z_k
    else:
        raise ValueError(f"unknown parameter operation: {kind!r}")
    return out, word


def push_through(
    a: f2linear.BitMatrix,
    p_mat: np.ndarray,
    p_mat2: np.ndarray,
    tol: float = 1e-10,
) -> PauliWord | None:
    """If the two product states differ by some X_u Z_v (up to phase),
    return that word conjugated through the CNOT circuit of ``a``;
    otherwise None.  The search is exhaustive over all 256 mask pairs.
    """
    s = qstate.param_state(p_mat)
    s2 = qstate.param_state(p_mat2)
    for u in range(16):
        for v in range(16):
            word = PauliWord(0, u, v)
            if qstate.phase_equal(s2, apply(word, s), tol=tol):
                return conjugate_by_cnot(a, word)
    return None

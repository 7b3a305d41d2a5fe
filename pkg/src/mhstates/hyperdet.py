"""Degree-24 hyperdeterminant of a 4-qubit state.

The evaluation goes through the Schlaefli construction: contract one
qubit into a pencil of 2x2x2 tensors, take Cayley's 2x2x2 hyperdeterminant
of the pencil symbolically in (x, y) to get a binary quartic, and return
the quartic discriminant times a fixed calibration constant ``KAPPA``.
For the 2x2x2x2 format the discriminant of that quartic is proportional
to the hyperdeterminant, so a single anchor value fixes the scale.

All entry points accept a trailing batch: shapes (..., 16) are evaluated
elementwise over the leading axes.
"""

from __future__ import annotations

import numpy as np

#: |Delta4| cannot exceed this on unit vectors (attained by the states in
#: the catalog); 5038848 = 2**8 * 3**9.
DELTA4_MAX = 1.0 / 5038848.0

#: Calibration constant: the Schlaefli quartic discriminant carries a
#: content factor of 256 for this format, so the discriminant of the
#: anchor maximizer state is -256/5038848 and the hyperdeterminant is
#: disc/256.  ``mhstates.catalog.calibrate_kappa`` recomputes this from
#: the anchor and cross-checks it on the other maximal states.
KAPPA = 1.0 / 256.0

#: sample points (x, y) used to read off the quartic coefficients
_POINTS = ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0), (1.0, 2.0))


def det222(t: np.ndarray) -> np.ndarray | complex:
    """Cayley hyperdeterminant of a 2x2x2 tensor, batched over leading axes."""
    t = np.asarray(t, dtype=complex)
    a000, a001 = t[..., 0, 0, 0], t[..., 0, 0, 1]
    a010, a011 = t[..., 0, 1, 0], t[..., 0, 1, 1]
    a100, a101 = t[..., 1, 0, 0], t[..., 1, 0, 1]
    a110, a111 = t[..., 1, 1, 0], t[..., 1, 1, 1]
    squares = (
        a000**2 * a111**2
        + a001**2 * a110**2
        + a010**2 * a101**2
        + a100**2 * a011**2
    )
    pairs = (
        a000 * a001 * a110 * a111
        + a000 * a010 * a101 * a111
        + a000 * a011 * a100 * a111
        + a001 * a010 * a101 * a110
        + a001 * a011 * a110 * a100
        + a010 * a011 * a101 * a100
    )
    quads = a000 * a011 * a101 * a110 + a001 * a010 * a100 * a111
    out = squares - 2 * pairs + 4 * quads
    return out if out.ndim else complex(out)


def contract(s: np.ndarray, qubit: int = 3) -> np.ndarray:
    """Binary quartic of the pencil obtained by contracting one qubit.

    The pencil entries are a[..., 0] x + a[..., 1] y over the remaining
    three qubits; the returned array holds the five coefficients
    (b0, .., b4) of det222(pencil) = b0 x^4 + b1 x^3 y + .. + b4 y^4,
    read off from five exact sample points.
    """
    if not 0 <= qubit <= 3:
        raise IndexError(f"qubit index out of range: {qubit}")
    s = np.asarray(s, dtype=complex)
    t = s.reshape(s.shape[:-1] + (2, 2, 2, 2))
    t = np.moveaxis(t, t.ndim - 4 + qubit, -1)
    a0, a1 = t[..., 0], t[..., 1]
    vals = [det222(x * a0 + y * a1) for x, y in _POINTS]
    q10, q01, q11, q1m1, q12 = (np.asarray(v) for v in vals)
    b0 = q10
    b4 = q01
    b2 = 0.5 * (q11 + q1m1) - b0 - b4
    odd = 0.5 * (q11 - q1m1)  # b1 + b3
    rest = q12 - b0 - 4 * b2 - 16 * b4  # 2 b1 + 8 b3
    b3 = (rest - 2 * odd) / 6
    b1 = odd - b3
    return np.stack([b0, b1, b2, b3, b4], axis=-1)


def quartic_invariants(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Degree-2 and degree-3 invariants (I, J) of a binary quartic."""
    b = np.asarray(b, dtype=complex)
    b0, b1, b2, b3, b4 = (b[..., m] for m in range(5))
    i_inv = 12 * b0 * b4 - 3 * b1 * b3 + b2**2
    j_inv = (
        72 * b0 * b2 * b4
        - 27 * b0 * b3**2
        - 27 * b1**2 * b4
        + 9 * b1 * b2 * b3
        - 2 * b2**3
    )
    return i_inv, j_inv


def quartic_disc(b: np.ndarray) -> np.ndarray | complex:
    """Discriminant (4 I^3 - J^2) / 27 of a binary quartic."""
    i_inv, j_inv = quartic_invariants(b)
    out = (4 * i_inv**3 - j_inv**2) / 27
    return out if np.ndim(out) else complex(out)


def delta4_raw(s: np.ndarray, qubit: int = 3) -> np.ndarray | complex:
    """Hyperdeterminant without the unit-norm check; homogeneous of
    degree 24 in the amplitudes."""
    return KAPPA * quartic_disc(contract(s, qubit))


def delta4(s: np.ndarray) -> np.ndarray | complex:
    """Hyperdeterminant of a unit-norm 4-qubit state."""
    s = np.asarray(s, dtype=complex)
    norms = np.sum(np.abs(s) ** 2, axis=-1)
    if not np.allclose(norms, 1.0, atol=1e-9):
        raise ValueError("delta4 expects unit-norm states")
    return delta4_raw(s)

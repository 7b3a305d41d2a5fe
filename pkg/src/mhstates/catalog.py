"""Named states, parameter matrices and identity checks.

Everything the construction pipeline promises is collected here as exact
constructions: the three maximal states with special coordinates (L,
Phi5, M2222), the two circuit-generated maximizers psi_max / psi_max_prime
with their explicit expansions, the parameter matrices connecting them,
and :func:`verify_all`, which re-derives every identity numerically and
reports the deviations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import circuit, f2linear, hyperdet, pauli, qstate

#: polar angle with cos(theta) = sqrt(3)/3, shared by every construction
THETA = math.acos(math.sqrt(3.0) / 3.0)

_PI = math.pi

# parameter matrices (columns: alpha, beta, alpha'); angles in radians
P_MAX = np.array(
    [
        [_PI / 2, _PI / 2, 0.0],
        [_PI / 2, _PI / 2, 0.0],
        [_PI / 4, THETA, 0.0],
        [_PI / 4, THETA, 0.0],
    ]
)

P_MAX_PRIME = np.array(
    [
        [_PI / 2, _PI / 2, 0.0],
        [_PI / 2, _PI / 2, 0.0],
        [3 * _PI / 4, THETA, 0.0],
        [3 * _PI / 4, THETA, 0.0],
    ]
)

P_PSI_TO_PSI_PRIME = np.array(
    [
        [-_PI / 2, -_PI / 2, -_PI / 2],
        [_PI / 2, _PI, _PI],
        [0.0, _PI / 2, _PI],
        [-_PI / 2, -_PI / 2, -_PI / 2],
    ]
)

P_PSI_TO_L = np.array(
    [
        [_PI, _PI / 2, -_PI / 2],
        [_PI / 2, -_PI / 2, _PI],
        [0.0, _PI, _PI],
        [0.0, -_PI / 2, _PI / 2],
    ]
)

P_PSI_TO_PHI5 = np.array(
    [
        [-_PI / 3, THETA - _PI, -3 * _PI / 4],
        [_PI / 3, THETA, 3 * _PI / 4],
        [_PI, THETA, 3 * _PI / 4],
        [2 * _PI / 3, _PI - THETA, _PI / 4],
    ]
)

P_PSI_TO_M2222 = np.array(
    [
        [_PI / 2, _PI / 4, 0.0],
        [-_PI / 2, -_PI / 4, _PI / 2],
        [0.0, -_PI / 2, _PI / 4],
        [_PI / 2, 3 * _PI / 4, _PI],
    ]
)


@dataclass(frozen=True)
class NamedParams:
    name: str
    matrix: np.ndarray
    phase: float | None = None


@dataclass(frozen=True)
class NamedState:
    name: str
    vector: np.ndarray
    note: str


_PARAMS: dict[str, NamedParams] = {
    "P_max": NamedParams("P_max", P_MAX),
    "P_max_prime": NamedParams("P_max_prime", P_MAX_PRIME),
    "psi_to_psi_prime": NamedParams("psi_to_psi_prime", P_PSI_TO_PSI_PRIME, -_PI / 3),
    "psi_to_L": NamedParams("psi_to_L", P_PSI_TO_L, -11 * _PI / 12),
    "psi_to_Phi5": NamedParams("psi_to_Phi5", P_PSI_TO_PHI5, -7 * _PI / 12),
    "psi_to_M2222": NamedParams("psi_to_M2222", P_PSI_TO_M2222, 5 * _PI / 12),
}


def named_params(name: str) -> NamedParams:
    try:
        return _PARAMS[name]
    except KeyError:
        raise KeyError(f"unknown parameter matrix: {name!r}") from None


def param_names() -> list[str]:
    return list(_PARAMS)


def mhs_circuit(i: int, j: int, k: int) -> tuple[circuit.Circuit, f2linear.BitMatrix]:
    """The 5-CNOT block (and its GF(2) image) that maps suitable product
    states to maximum-hyperdeterminant states.

    As an operator product it reads X[ij] X[jk] X[ki] X[il] X[lj] with l
    the remaining index; the returned circuit lists the gates in
    execution order (rightmost factor first), so simulating it realises
    exactly the operator |x> -> |Ax> of the returned matrix.
    """
    if len({i, j, k}) != 3 or not all(0 <= q <= 3 for q in (i, j, k)):
        raise ValueError(f"need three distinct indices in 0..3, got {(i, j, k)}")
    (l,) = set(range(4)) - {i, j, k}
    word = ((i, j), (j, k), (k, i), (i, l), (l, j))
    matrix = f2linear.evaluate_word(word)
    ops = tuple(circuit.cnot(t, c) for t, c in reversed(word))
    return circuit.Circuit(ops), matrix


def mhs_block_word(i: int, j: int, k: int) -> f2linear.TransvectionWord:
    """Transvection word of :func:`mhs_circuit` in operator order."""
    (l,) = set(range(4)) - {i, j, k}
    return ((i, j), (j, k), (k, i), (i, l), (l, j))


# --- building blocks of the named states -------------------------------

_SQ2 = math.sqrt(2.0)
_SQ3 = math.sqrt(3.0)
_SQ6 = math.sqrt(6.0)
_SQ8 = math.sqrt(8.0)


def _sparse(pairs: dict[int, complex], scale: complex = 1.0) -> np.ndarray:
    return scale * qstate.from_amplitudes(pairs)


def bell_pair_states() -> dict[str, np.ndarray]:
    """The three two-Bell-pair products u0, u1, u2 entering the L state."""
    u0 = _sparse({0b0000: 1, 0b0011: 1, 0b1100: 1, 0b1111: 1}, 0.5)
    u1 = _sparse({0b0000: 1, 0b0011: -1, 0b1100: -1, 0b1111: 1}, 0.5)
    u2 = _sparse({0b0101: 1, 0b0110: 1, 0b1001: 1, 0b1010: 1}, 0.5)
    return {"u0": u0, "u1": u1, "u2": u2}


def m2222_components() -> dict[str, np.ndarray]:
    v1 = _sparse(
        {0b0000: 1, 0b0101: 1, 0b0110: -1, 0b1001: -1, 0b1010: 1, 0b1111: 1},
        1.0 / _SQ6,
    )
    v2 = _sparse({0b0011: 1, 0b1100: 1}, 1.0 / _SQ2)
    v3 = _sparse(
        {
            0b0001: -1,
            0b0010: 1,
            0b0100: -1,
            0b0111: 1,
            0b1000: 1,
            0b1011: -1,
            0b1101: 1,
            0b1110: -1,
        },
        1.0 / _SQ8,
    )
    return {"v1": v1, "v2": v2, "v3": v3}


def psi_max_components() -> dict[str, np.ndarray]:
    """Orthonormal components w1, w2, w3 of the expansions of psi_max and
    psi_max_prime."""
    w1 = _sparse(
        {
            0b0001: 1,
            0b0011: 1j,
            0b0101: 1,
            0b0111: -1j,
            0b1000: 1,
            0b1010: 1j,
            0b1100: 1,
            0b1110: -1j,
        },
        1.0 / _SQ8,
    )
    w2 = _sparse({0b0000: -1, 0b0110: -1j, 0b1011: -1j, 0b1101: 1}, 0.5)
    w3 = _sparse({0b0010: 1, 0b0100: 1j, 0b1001: -1j, 0b1111: 1}, 0.5)
    return {"w1": w1, "w2": w2, "w3": w3}


def state_L() -> np.ndarray:
    """(u0 + w u1 + conj(w) u2) / sqrt(3) with w = exp(i pi / 3)."""
    omega = np.exp(1j * _PI / 3)
    u = bell_pair_states()
    return (u["u0"] + omega * u["u1"] + omega.conjugate() * u["u2"]) / _SQ3


def state_L_expanded() -> np.ndarray:
    """Equivalent expansion of the L state over the computational basis."""
    even = _sparse({0b0000: 1, 0b1111: 1}, 0.5 * np.exp(1j * _PI / 6))
    mid = _sparse(
        {0b0011: 1, 0b0101: 1, 0b0110: 1, 0b1001: 1, 0b1010: 1, 0b1100: 1},
        (_SQ3 / 6) * np.exp(-1j * _PI / 3),
    )
    return even + mid


def state_Phi5() -> np.ndarray:
    return _sparse(
        {0b0001: 1, 0b0010: 1, 0b0100: 1, 0b1000: 1, 0b1111: _SQ2}, 1.0 / _SQ6
    )


def state_M2222() -> np.ndarray:
    v = m2222_components()
    return v["v1"] / _SQ8 + (_SQ6 / 4) * v["v2"] + v["v3"] / _SQ2


def state_GHZ4() -> np.ndarray:
    return _sparse({0b0000: 1, 0b1111: 1}, 1.0 / _SQ2)


def psi_max() -> np.ndarray:
    """Anchor maximizer: the 5-CNOT block on the product state of P_MAX."""
    _, a = mhs_circuit(0, 1, 2)
    return qstate.apply_bit_matrix(a, qstate.param_state(P_MAX))


def psi_max_prime() -> np.ndarray:
    _, a = mhs_circuit(0, 1, 2)
    return qstate.apply_bit_matrix(a, qstate.param_state(P_MAX_PRIME))


def psi_max_expansion() -> np.ndarray:
    """psi_max written over the orthonormal components w1, w2, w3."""
    w = psi_max_components()
    return (
        (_SQ3 / 3) * w["w1"]
        + ((3 + _SQ3) / 6) * np.exp(1j * _PI / 4) * w["w2"]
        + ((3 - _SQ3) / 6) * np.exp(1j * _PI / 4) * w["w3"]
    )


def psi_max_prime_expansion() -> np.ndarray:
    w = psi_max_components()
    return (
        (_SQ3 / 3) * w["w1"]
        + ((3 + _SQ3) / 6) * np.exp(-1j * _PI / 4) * w["w2"]
        + ((3 - _SQ3) / 6) * np.exp(3j * _PI / 4) * w["w3"]
    )


_STATE_BUILDERS = {
    "zero": (qstate.zero_state, "computational basis state |0000>"),
    "GHZ4": (state_GHZ4, "(|0000> + |1111>)/sqrt(2)"),
    "L": (state_L, "maximal state with Bell-pair structure"),
    "Phi5": (state_Phi5, "maximal state with real coordinates"),
    "M2222": (state_M2222, "maximal state with real coordinates"),
    "psi_max": (psi_max, "5-CNOT block applied to the P_max product state"),
    "psi_max_prime": (psi_max_prime, "5-CNOT block applied to the P_max_prime product state"),
}


def named_state(name: str) -> NamedState:
    try:
        builder, note = _STATE_BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown state name: {name!r}") from None
    return NamedState(name, builder(), note)


def state_names() -> list[str]:
    return list(_STATE_BUILDERS)


def resolve_state(spec: str) -> np.ndarray:
    """A state from a registry name or, failing that, a state file path."""
    if spec in _STATE_BUILDERS:
        return named_state(spec).vector
    return qstate.read_state(spec)


# --- circuits of the generation pipeline --------------------------------


def generation_circuit(target: str) -> circuit.Circuit:
    """Full circuit |0000> -> target (up to a global phase): prepare the
    P_max product state, run the 5-CNOT block, then the local unitary
    connecting psi_max to the target (one of L, Phi5, M2222)."""
    lu = named_params(f"psi_to_{target}")
    block, _ = mhs_circuit(0, 1, 2)
    ops = (
        circuit.prepare_param_ops(P_MAX)
        + block.ops
        + circuit.param_operator_ops(lu.matrix)
    )
    return circuit.Circuit(ops)


#: Global phases reported alongside the published circuit diagrams for the
#: generated states.  They depend on gate decompositions not visible in
#: the reconstruction, so they are recorded here as annotations and never
#: asserted; :func:`generation_circuit` is checked up to a global phase.
REPORTED_CIRCUIT_PHASES = {
    "L": -7 * _PI / 12,
    "Phi5": -_PI / 6,
    "M2222": -13 * _PI / 24,
}


def snap_params(p: np.ndarray, tol: float = 0.05) -> np.ndarray | None:
    """Round a near-maximizing parameter matrix onto the exact angle grid.

    Maximizer angles observed in practice sit on multiples of pi/4 or on
    +-theta + k pi; entries further than ``tol`` from every candidate make
    the whole snap fail (returns None).  The third column is zeroed.
    """
    p = np.asarray(p, dtype=float)
    out = np.zeros((4, 3))
    for k in range(4):
        a = _snap_value(p[k, 0], include_theta=False)
        b = _snap_value(p[k, 1], include_theta=True)
        if a is None or b is None or abs(a - p[k, 0]) > tol or abs(b - p[k, 1]) > tol:
            return None
        out[k, 0], out[k, 1] = a, b
    return out


def _snap_value(v: float, include_theta: bool) -> float | None:
    candidates = [round(v / (_PI / 4)) * (_PI / 4)]
    if include_theta:
        candidates.append(THETA + round((v - THETA) / _PI) * _PI)
        candidates.append(-THETA + round((v + THETA) / _PI) * _PI)
    return min(candidates, key=lambda c: abs(c - v))


def calibrate_kappa() -> float:
    """Re-derive the hyperdeterminant calibration from the anchor state.

    Divides the target value -1/5038848 by the uncalibrated Schlaefli
    discriminant of psi_max, checks the ratio is real and that the same
    constant reproduces |Delta4| = 1/5038848 on L, Phi5 and M2222, and
    returns it.  The frozen ``hyperdet.KAPPA`` must equal this value.
    """
    disc = hyperdet.quartic_disc(hyperdet.contract(psi_max()))
    kappa = -hyperdet.DELTA4_MAX / disc
    if abs(kappa.imag) > 1e-9 * abs(kappa):
        raise AssertionError(f"calibration constant is not real: {kappa}")
    kappa = kappa.real
    for name in ("L", "Phi5", "M2222"):
        val = kappa * hyperdet.quartic_disc(hyperdet.contract(named_state(name).vector))
        if abs(abs(val) - hyperdet.DELTA4_MAX) > 1e-10 * hyperdet.DELTA4_MAX:
            raise AssertionError(f"calibration cross-check failed on {name}: {val}")
    return kappa


# --- one-call verification ----------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    deviation: float
    note: str = ""

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return f"[{status}] {self.name}: max deviation {self.deviation:.3e}{extra}"


def _check(name: str, deviation: float, tol: float, note: str = "") -> CheckResult:
    return CheckResult(name, bool(deviation <= tol), float(deviation), note)


def _check_flag(name: str, ok: bool, note: str = "") -> CheckResult:
    return CheckResult(name, bool(ok), 0.0 if ok else float("inf"), note)


def verify_all(rng_seed: int = 7) -> list[CheckResult]:
    """Numerically re-check every catalogued identity; returns one record
    per check (no exceptions on failure)."""
    rng = np.random.default_rng(rng_seed)
    checks: list[CheckResult] = []

    # rotation-gate rewrites: rz/ry at special angles against H, P, T, Paulis
    phase_pairs = [
        ("rz(pi) ~ Z", qstate.rz(_PI), qstate.Z),
        ("rz(pi/2) ~ P", qstate.rz(_PI / 2), qstate.P),
        ("rz(-pi/2) ~ Pdg", qstate.rz(-_PI / 2), qstate.PDG),
        ("rz(pi/4) ~ T", qstate.rz(_PI / 4), qstate.T),
        ("ry(pi) ~ Y", qstate.ry(_PI), qstate.Y),
    ]
    for name, u, v in phase_pairs:
        dev = 1.0 - abs(np.trace(u.conj().T @ v)) / 2
        checks.append(_check(name, dev, 1e-12))
    exact_pairs = [
        ("ry(pi/2) = HZ = XH", qstate.ry(_PI / 2), qstate.H @ qstate.Z, qstate.X @ qstate.H),
        ("ry(-pi/2) = ZH = HX", qstate.ry(-_PI / 2), qstate.Z @ qstate.H, qstate.H @ qstate.X),
    ]
    for name, u, v, w in exact_pairs:
        dev = max(np.abs(u - v).max(), np.abs(u - w).max())
        checks.append(_check(name, dev, 1e-12))

    # swap conjugation of CNOTs and of local unitaries
    dev = 0.0
    for sigma in f2linear.all_permutations():
        s_op = qstate.qubit_permutation_operator(sigma)
        for i in range(4):
            for j in range(4):
                if i == j:
                    continue
                lhs = s_op @ qstate.bit_matrix_operator(f2linear.transvection(i, j)) @ s_op.conj().T
                rhs = qstate.bit_matrix_operator(f2linear.transvection(sigma[i], sigma[j]))
                dev = max(dev, np.abs(lhs - rhs).max())
    checks.append(_check("swap conjugation of CNOT gates", dev, 1e-12))

    dev = 0.0
    for _ in range(5):
        u = _random_unitary(rng)
        for sigma in f2linear.all_permutations():
            s_op = qstate.qubit_permutation_operator(sigma)
            for i in range(4):
                lhs = s_op @ qstate.single_on(u, i) @ s_op.conj().T
                rhs = qstate.single_on(u, sigma[i])
                dev = max(dev, np.abs(lhs - rhs).max())
            v = rng.integers(0, 2, size=4)
            sv = [v[list(sigma).index(i)] for i in range(4)]
            lhs = s_op @ _masked_operator(u, v) @ s_op.conj().T
            rhs = _masked_operator(u, sv)
            dev = max(dev, np.abs(lhs - rhs).max())
    checks.append(_check("swap conjugation of local unitaries", dev, 1e-12))

    # Pauli algebra and its CNOT conjugation rule
    dev = pauli.normal_form_deviation(samples=60, seed=rng_seed)
    checks.append(_check("Pauli normal-form product", dev, 1e-12))
    words = f2linear.enumerate_group()
    mats = list(words)
    dev = 0.0
    for _ in range(40):
        a = mats[int(rng.integers(len(mats)))]
        p = pauli.PauliWord(int(rng.integers(4)), int(rng.integers(16)), int(rng.integers(16)))
        lhs = qstate.bit_matrix_operator(a) @ pauli.dense(p) @ qstate.bit_matrix_operator(f2linear.inverse(a))
        rhs = pauli.dense(pauli.conjugate_by_cnot(a, p))
        dev = max(dev, np.abs(lhs - rhs).max())
    checks.append(_check("CNOT conjugation of Pauli words", dev, 1e-12))

    # parameter-space operations against their Pauli images
    dev = 0.0
    for _ in range(30):
        p_mat = _random_param(rng)
        for k in range(4):
            for kind in pauli.PARAM_OPS:
                p2, word = pauli.param_op(p_mat, k, kind)
                lhs = qstate.param_state(p2)
                rhs = pauli.dense(word) @ qstate.param_state(p_mat)
                dev = max(dev, np.abs(lhs - rhs).max())
    checks.append(_check("parameter shifts equal Pauli actions", dev, 1e-12))

    # worked conjugation example: three shifts on P_max pushed through the block
    psi = psi_max()
    p_shift, word = pauli.param_op(P_MAX, 0, pauli.ALPHA_PLUS_PI)
    p_shift, w2 = pauli.param_op(p_shift, 2, pauli.NEG_BETA)
    p_shift, w3 = pauli.param_op(p_shift, 3, pauli.NEG_ALPHA_BETA_PLUS_PI)
    word = pauli.pauli_mul(w3, pauli.pauli_mul(w2, word))
    _, a_block = mhs_circuit(0, 1, 2)
    lhs = qstate.apply_bit_matrix(a_block, qstate.param_state(p_shift))
    conj = pauli.conjugate_by_cnot(a_block, word)
    rhs = pauli.dense(conj) @ psi
    ok = qstate.phase_equal(lhs, rhs, tol=1e-10)
    expect = pauli.PauliWord(0, 0b0111, 0b0100)
    checks.append(
        _check_flag(
            "shift chain pushes to X1 X2 X3 Z1 on psi_max",
            ok and (conj.x, conj.z) == (expect.x, expect.z),
        )
    )

    # anchor states and their expansions
    checks.append(
        _check("psi_max equals its w-expansion", np.abs(psi - psi_max_expansion()).max(), 1e-12)
    )
    checks.append(
        _check(
            "psi_max_prime equals its w-expansion",
            np.abs(psi_max_prime() - psi_max_prime_expansion()).max(),
            1e-12,
        )
    )
    d_psi = hyperdet.delta4(psi)
    d_psi_p = hyperdet.delta4(psi_max_prime())
    dev = max(abs(d_psi - (-hyperdet.DELTA4_MAX)), abs(d_psi_p - (-hyperdet.DELTA4_MAX)))
    checks.append(_check("Delta4(psi_max) = Delta4(psi_max_prime) = -1/5038848", dev, 1e-12))

    dev = 0.0
    for name in ("L", "Phi5", "M2222"):
        val = hyperdet.delta4(named_state(name).vector)
        dev = max(dev, abs(abs(val) - hyperdet.DELTA4_MAX))
    checks.append(_check("|Delta4| maximal on L, Phi5, M2222", dev, 1e-12))
    checks.append(
        _check(
            "two expansions of the L state agree",
            np.abs(state_L() - state_L_expanded()).max(),
            1e-12,
        )
    )
    u = bell_pair_states()
    v = m2222_components()
    gram_dev = 0.0
    for fam in (list(u.values()), list(v.values()), list(psi_max_components().values())):
        g = np.array([[np.vdot(a, b) for b in fam] for a in fam])
        gram_dev = max(gram_dev, np.abs(g - np.eye(len(fam))).max())
    checks.append(_check("component families are orthonormal", gram_dev, 1e-12))

    # local-unitary connections out of psi_max
    for target, phase_name in (("psi_prime", "psi_to_psi_prime"), ("L", "psi_to_L"),
                               ("Phi5", "psi_to_Phi5"), ("M2222", "psi_to_M2222")):
        np_rec = named_params(phase_name)
        goal = psi_max_prime() if target == "psi_prime" else named_state(target).vector
        built = np.exp(1j * np_rec.phase) * (qstate.param_operator(np_rec.matrix) @ psi)
        residual = float(np.abs(goal - built).sum())
        checks.append(_check(f"LU connection psi_max -> {target}", residual, 1e-10))

    lhs = qstate.local_operator(
        [qstate.P @ qstate.H @ qstate.PDG, qstate.P @ qstate.X, qstate.H, qstate.P @ qstate.H @ qstate.PDG]
    ) @ psi
    checks.append(
        _check_flag(
            "psi_max_prime ~ (PHPdg x PX x H x PHPdg) psi_max",
            qstate.phase_equal(lhs, psi_max_prime(), tol=1e-10),
        )
    )
    lhs = qstate.apply_single(qstate.P, 2, qstate.apply_single(qstate.P, 3, qstate.param_state(P_MAX)))
    checks.append(
        _check_flag(
            "P_max_prime product state ~ P2 P3 on P_max product state",
            qstate.phase_equal(lhs, qstate.param_state(P_MAX_PRIME), tol=1e-10),
        )
    )
    checks.append(
        _check_flag(
            "no Pauli word links psi_max and psi_max_prime",
            pauli.push_through(a_block, P_MAX, P_MAX_PRIME) is None,
        )
    )

    # coset propositions for the 5-CNOT blocks
    table = f2linear.coset_partition(words)
    keys = {}
    same_dev = 0.0
    for i in range(4):
        for j in range(4):
            if i == j:
                continue
            ks = [k for k in range(4) if k not in (i, j)]
            mats_ij = {k: mhs_circuit(i, j, k)[1] for k in ks}
            k0, k1 = ks
            keys[(i, j)] = f2linear.coset_key(mats_ij[k0])
            if f2linear.coset_key(mats_ij[k1]) != keys[(i, j)]:
                same_dev = float("inf")
            # operator identity M_l = S_(ikl) M_k
            sigma = _cycle_permutation(i, k0, k1)
            lhs = qstate.qubit_permutation_operator(sigma) @ qstate.bit_matrix_operator(mats_ij[k0])
            rhs = qstate.bit_matrix_operator(mats_ij[k1])
            same_dev = max(same_dev, float(np.abs(lhs - rhs).max()))
    checks.append(_check("both block choices share one coset per (i,j)", same_dev, 1e-12))
    checks.append(_check_flag("the 12 (i,j) cosets are pairwise distinct", len(set(keys.values())) == 12))

    conj_ok = True
    for sigma in f2linear.all_permutations():
        for (i, j), key in keys.items():
            rec = table.records[table._index_by_key[key]]
            target = table.conjugate(rec, sigma)
            if target.key != keys[(sigma[i], sigma[j])]:
                conj_ok = False
    checks.append(_check_flag("coset conjugation permutes the (i,j) labels", conj_ok))

    dev = 0.0
    for (i, j), _key in keys.items():
        sigma = _pair_permutation(i, j)
        p_sig = f2linear.to_lists(f2linear.permutation_matrix(sigma))
        p_merged = np.array(p_sig, dtype=float) @ P_MAX
        k = sigma[2]
        _, a_ij = mhs_circuit(i, j, k)
        val = hyperdet.delta4(qstate.apply_bit_matrix(a_ij, qstate.param_state(p_merged)))
        dev = max(dev, abs(abs(val) - hyperdet.DELTA4_MAX))
    checks.append(_check("row-permuted P_max maximizes every (i,j) block", dev, 1e-12))

    # generation circuits and the connectivity rewrite
    for target in ("L", "Phi5", "M2222"):
        out = circuit.simulate(generation_circuit(target))
        checks.append(
            _check_flag(
                f"generation circuit produces {target} up to phase",
                qstate.phase_equal(out, named_state(target).vector, tol=1e-10),
            )
        )
    block, a_block = mhs_circuit(0, 1, 2)
    graph = circuit.CouplingGraph.from_edges([(1, 0), (1, 2), (1, 3), (3, 4)])
    routed = circuit.rewrite_for_graph(block, graph)
    n_cnot = circuit.cnot_count(routed)
    op_dev = np.abs(circuit.to_unitary(routed) - qstate.bit_matrix_operator(a_block)).max()
    checks.append(
        _check(
            "line-graph rewrite of the block keeps the operator",
            float(op_dev),
            1e-12,
            note=f"{n_cnot} CNOTs",
        )
    )
    checks.append(_check_flag("line-graph rewrite uses 11 CNOTs", n_cnot == 11))

    # group-level counts
    checks.append(_check_flag("group order is 20160", len(words) == 20160))
    checks.append(_check_flag("840 right cosets", len(table) == 840))
    return checks


def _random_unitary(rng: np.random.Generator) -> np.ndarray:
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(m)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def _random_param(rng: np.random.Generator) -> np.ndarray:
    p = np.zeros((4, 3))
    p[:, 0] = rng.uniform(0, 2 * _PI, size=4)
    p[:, 1] = rng.uniform(0, 2 * _PI, size=4)
    return p


def _masked_operator(u: np.ndarray, v) -> np.ndarray:
    return qstate.local_operator([u if b else qstate.I2 for b in v])


def _cycle_permutation(i: int, k: int, l: int) -> tuple[int, ...]:
    """Permutation sending i -> k -> l -> i and fixing the rest."""
    sigma = list(range(4))
    sigma[i], sigma[k], sigma[l] = k, l, i
    return tuple(sigma)


def _pair_permutation(i: int, j: int) -> tuple[int, ...]:
    """Smallest permutation with sigma(0) = i and sigma(1) = j."""
    rest = sorted(set(range(4)) - {i, j})
    return (i, j, rest[0], rest[1])

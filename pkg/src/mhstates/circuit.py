"""Circuit intermediate representation, simulation, routing and QASM text.

A circuit is an immutable tuple of gate applications executed left to
right (the first listed gate acts on the state first), matching diagram
order; an operator product therefore reads right to left through the op
list.  CNOT ops store (target, control).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import qstate

GATE_IDS_1Q = ("x", "y", "z", "h", "p", "pdg", "t")
GATE_IDS_ROT = ("rx", "ry", "rz")
GATE_IDS_2Q = ("cnot", "swap")

_FIXED_1Q = {
    "x": qstate.X,
    "y": qstate.Y,
    "z": qstate.Z,
    "h": qstate.H,
    "p": qstate.P,
    "pdg": qstate.PDG,
    "t": qstate.T,
}
_ROT_1Q = {"rx": qstate.rx, "ry": qstate.ry, "rz": qstate.rz}


@dataclass(frozen=True)
class GateOp:
    gate: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self) -> None:
        if self.gate in GATE_IDS_2Q:
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"two distinct qubits required: {self}")
        elif self.gate in GATE_IDS_1Q or self.gate in GATE_IDS_ROT:
            if len(self.qubits) != 1:
                raise ValueError(f"one qubit required: {self}")
            if self.gate in GATE_IDS_ROT and self.angle is None:
                raise ValueError(f"rotation needs an angle: {self}")
        else:
            raise ValueError(f"unknown gate id: {self.gate!r}")
        if not all(0 <= q < qstate.N_QUBITS for q in self.qubits):
            raise ValueError(f"qubit index out of range: {self}")


def g1(gate: str, qubit: int, angle: float | None = None) -> GateOp:
    return GateOp(gate, (qubit,), angle)


def cnot(target: int, control: int) -> GateOp:
    return GateOp("cnot", (target, control))


def swap(i: int, j: int) -> GateOp:
    return GateOp("swap", (i, j))


@dataclass(frozen=True)
class Circuit:
    ops: tuple[GateOp, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))

    def __len__(self) -> int:
        return len(self.ops)

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(self.ops + other.ops)


def cnot_count(c: Circuit) -> int:
    return sum(1 for op in c.ops if op.gate == "cnot")


def prepare_param_ops(p: np.ndarray) -> tuple[GateOp, ...]:
    """Ops preparing the product state of ``p`` from |0000>:
    Ry(beta_k) then Rz(alpha_k) on each qubit."""
    p = np.asarray(p, dtype=float)
    ops = []
    for k in range(qstate.N_QUBITS):
        ops.append(g1("ry", k, p[k, 1]))
        ops.append(g1("rz", k, p[k, 0]))
    return tuple(ops)


def param_operator_ops(p: np.ndarray) -> tuple[GateOp, ...]:
    """Ops realising the local unitary of ``p``: per qubit, Rz(alpha')
    first, then Ry(beta), then Rz(alpha)."""
    p = np.asarray(p, dtype=float)
    ops = []
    for k in range(qstate.N_QUBITS):
        ops.append(g1("rz", k, p[k, 2]))
        ops.append(g1("ry", k, p[k, 1]))
        ops.append(g1("rz", k, p[k, 0]))
    return tuple(ops)


def _op_matrix(op: GateOp) -> np.ndarray:
    if op.gate in _FIXED_1Q:
        return _FIXED_1Q[op.gate]
    return _ROT_1Q[op.gate](op.angle)


def simulate(c: Circuit, initial: np.ndarray | None = None) -> np.ndarray:
    """Apply the ops left to right to |0000> (or the supplied state)."""
    s = qstate.zero_state() if initial is None else np.asarray(initial, dtype=complex)
    for op in c.ops:
        if op.gate == "cnot":
            s = qstate.apply_cnot(op.qubits[0], op.qubits[1], s)
        elif op.gate == "swap":
            s = qstate.apply_swap(op.qubits[0], op.qubits[1], s)
        else:
            s = qstate.apply_single(_op_matrix(op), op.qubits[0], s)
    return s


def to_unitary(c: Circuit) -> np.ndarray:
    """Dense 16x16 operator of the circuit (column-by-column simulation)."""
    cols = [simulate(c, initial=qstate.basis_state(x)) for x in range(qstate.DIM)]
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class CouplingGraph:
    """Undirected qubit pairs supporting a native CNOT (either direction)."""

    edges: frozenset[frozenset[int]]

    @classmethod
    def from_edges(cls, pairs: Iterable[Sequence[int]]) -> "CouplingGraph":
        return cls(frozenset(frozenset((int(a), int(b))) for a, b in pairs))

    def has_edge(self, a: int, b: int) -> bool:
        return frozenset((a, b)) in self.edges

    def neighbors(self, a: int, nodes: set[int]) -> list[int]:
        out = []
        for e in self.edges:
            if a in e:
                (b,) = e - {a}
                if b in nodes:
                    out.append(b)
        return sorted(out)

    def shortest_path(self, a: int, b: int, nodes: set[int]) -> list[int]:
        """BFS path inside ``nodes``, deterministic via sorted neighbors."""
        prev: dict[int, int] = {a: a}
        queue = deque([a])
        while queue:
            cur = queue.popleft()
            if cur == b:
                path = [b]
                while path[-1] != a:
                    path.append(prev[path[-1]])
                return path[::-1]
            for nb in self.neighbors(cur, nodes):
                if nb not in prev:
                    prev[nb] = cur
                    queue.append(nb)
        raise ValueError(f"no path between {a} and {b}; graph not connected")


def rewrite_for_graph(c: Circuit, graph: CouplingGraph) -> Circuit:
    """Rewrite so every CNOT sits on a graph edge, preserving the operator.

    SWAPs are expanded into 3 CNOTs.  A non-native CNOT is made native by
    swapping its target along a shortest path towards the control; the
    relocations are left in place and accounted for by remapping later
    gates, then undone at the end of the circuit.  Routing is confined to
    the qubits of the 4-qubit register.
    """
    nodes = set(range(qstate.N_QUBITS))
    place = list(range(qstate.N_QUBITS))  # logical -> physical
    out: list[GateOp] = []

    def emit_cnot(t: int, ctl: int) -> None:
        if not graph.has_edge(t, ctl):
            raise AssertionError("routing produced a non-native CNOT")
        out.append(cnot(t, ctl))

    def emit_swap(a: int, b: int) -> None:
        emit_cnot(a, b)
        emit_cnot(b, a)
        emit_cnot(a, b)
        _swap_places(place, a, b)

    def transpose_contents(a: int, b: int) -> None:
        # exact transposition of the occupants of two physical positions:
        # walk down the path and back up, leaving everything else fixed
        path = graph.shortest_path(a, b, nodes)
        hops = list(zip(path, path[1:]))
        for x, y in hops + hops[-2::-1]:
            emit_swap(x, y)

    for op in c.ops:
        if op.gate == "swap":
            transpose_contents(place[op.qubits[0]], place[op.qubits[1]])
        elif op.gate == "cnot":
            pa, pb = place[op.qubits[0]], place[op.qubits[1]]
            if not graph.has_edge(pa, pb):
                path = graph.shortest_path(pa, pb, nodes)
                for a, b in zip(path, path[1:-1]):
                    emit_swap(a, b)
                pa = path[-2]
            emit_cnot(pa, pb)
        else:
            out.append(GateOp(op.gate, (place[op.qubits[0]],), op.angle))

    # undo the lingering relocations so the operators match exactly
    for pos in range(qstate.N_QUBITS):
        if place[pos] != pos:
            transpose_contents(place[pos], pos)
    return Circuit(tuple(out))


def _swap_places(place: list[int], a: int, b: int) -> None:
    ia, ib = place.index(a), place.index(b)
    place[ia], place[ib] = place[ib], place[ia]


# --- universal-gate rewriting -------------------------------------------

_RZ_SPECIAL = {0.0: None, np.pi: "z", np.pi / 2: "p", -np.pi / 2: "pdg", np.pi / 4: "t"}


def rewrite_rotations(c: Circuit, tol: float = 1e-12) -> Circuit:
    """Replace z/y rotations at special angles by H, P, T, Pauli gates
    (equal up to a global phase); other ops pass through unchanged."""
    out: list[GateOp] = []
    for op in c.ops:
        q = op.qubits[0] if op.qubits else None
        if op.gate == "rz":
            for angle, rep in _RZ_SPECIAL.items():
                if abs(_wrap_angle(op.angle - angle)) <= tol:
                    if rep is not None:
                        out.append(g1(rep, q))
                    break
            else:
                out.append(op)
        elif op.gate == "ry":
            a = op.angle
            if abs(_wrap_angle(a)) <= tol:
                pass
            elif abs(_wrap_angle(a - np.pi)) <= tol:
                out.append(g1("y", q))
            elif abs(_wrap_angle(a - np.pi / 2)) <= tol:
                out.extend([g1("z", q), g1("h", q)])  # Ry(pi/2) = H Z
            elif abs(_wrap_angle(a + np.pi / 2)) <= tol:
                out.extend([g1("h", q), g1("z", q)])  # Ry(-pi/2) = Z H
            else:
                out.append(op)
        else:
            out.append(op)
    return Circuit(tuple(out))


def _wrap_angle(a: float) -> float:
    return (a + np.pi) % (2 * np.pi) - np.pi


# --- OpenQASM 2.0 subset --------------------------------------------------

_QASM_NAMES = {"p": "s", "pdg": "sdg"}
_QASM_REVERSE = {"s": "p", "sdg": "pdg"}


def to_qasm(c: Circuit) -> str:
    """OpenQASM 2.0 text; a CNOT with target i and control j becomes
    ``cx q[j],q[i];`` (control listed first)."""
    lines = ['OPENQASM 2.0;', 'include "qelib1.inc";', "qreg q[4];"]
    for op in c.ops:
        if op.gate == "cnot":
            t, ctl = op.qubits
            lines.append(f"cx q[{ctl}],q[{t}];")
        elif op.gate == "swap":
            lines.append(f"swap q[{op.qubits[0]}],q[{op.qubits[1]}];")
        elif op.gate in GATE_IDS_ROT:
            lines.append(f"{op.gate}({op.angle:.17g}) q[{op.qubits[0]}];")
        else:
            name = _QASM_NAMES.get(op.gate, op.gate)
            lines.append(f"{name} q[{op.qubits[0]}];")
    return "\n".join(lines) + "\n"


def parse_qasm(text: str) -> Circuit:
    """Parse the subset emitted by :func:`to_qasm`."""
    ops: list[GateOp] = []
    for raw in text.splitlines():
        line = raw.split("//")[0].strip()
        if (
            not line
            or line.startswith("OPENQASM")
            or line.startswith("include")
            or line.startswith("qreg")
        ):
            continue
        if not line.endswith(";"):
            raise ValueError(f"malformed QASM line: {raw!r}")
        line = line[:-1]
        head, _, args = line.partition(" ")
        qubits = [int(tok.strip()[2:-1]) for tok in args.split(",")]
        if head == "cx":
            ops.append(cnot(qubits[1], qubits[0]))
        elif head == "swap":
            ops.append(swap(*qubits))
        elif head.startswith(("rx(", "ry(", "rz(")):
            gate, angle = head[:2], float(head[3:-1])
            ops.append(g1(gate, qubits[0], angle))
        else:
            ops.append(g1(_QASM_REVERSE.get(head, head), qubits[0]))
    return Circuit(tuple(ops))

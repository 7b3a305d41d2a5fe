"""Linear algebra over GF(2) for CNOT-circuit bookkeeping.

A bit matrix is a tuple of ``n`` ints, one per row; the bit of row ``r``
for column ``j`` is ``(r >> (n-1-j)) & 1``, i.e. the most significant bit
is column 0.  Packed bit vectors use the same most-significant-first
order, so the packed vector of a 4-qubit basis label equals the basis
index of the statevector.

Everything is written for generic ``n`` but only ``n = 4`` is exercised:
the group enumeration and the coset partition target the 20160-element
general linear group GL(4, F2), whose right cosets modulo the 24
permutation matrices are the 840 equivalence classes of CNOT circuits
up to qubit relabelling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Sequence

BitMatrix = tuple[int, ...]
TransvectionWord = tuple[tuple[int, int], ...]

#: generator order used for lexicographic tie-breaks everywhere
GENERATOR_ORDER = [(i, j) for i in range(4) for j in range(4) if i != j]


def identity(n: int = 4) -> BitMatrix:
    return tuple(1 << (n - 1 - i) for i in range(n))


def transvection(i: int, j: int, n: int = 4) -> BitMatrix:
    """Identity plus a single 1 at entry (i, j); the image of a CNOT with
    target ``i`` and control ``j``."""
    if i == j:
        raise ValueError(f"transvection needs i != j, got ({i}, {j})")
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"indices out of range for n={n}: ({i}, {j})")
    rows = list(identity(n))
    rows[i] |= 1 << (n - 1 - j)
    return tuple(rows)


def mul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Matrix product over GF(2)."""
    n = len(a)
    out = []
    for i in range(n):
        acc = 0
        row = a[i]
        for j in range(n):
            if (row >> (n - 1 - j)) & 1:
                acc ^= b[j]
        out.append(acc)
    return tuple(out)


def matvec(a: BitMatrix, x: int) -> int:
    """Product with a packed column vector (same MSB-first packing)."""
    n = len(a)
    y = 0
    for i in range(n):
        y |= ((a[i] & x).bit_count() & 1) << (n - 1 - i)
    return y


def transpose(a: BitMatrix) -> BitMatrix:
    n = len(a)
    return tuple(
        sum((((a[j] >> (n - 1 - i)) & 1) << (n - 1 - j)) for j in range(n))
        for i in range(n)
    )


def inverse(a: BitMatrix) -> BitMatrix:
    """Inverse over GF(2) by Gauss-Jordan on [a | I]; raises on singular input."""
    n = len(a)
    work = list(a)
    aug = list(identity(n))
    for col in range(n):
        bit = 1 << (n - 1 - col)
        pivot = next((r for r in range(col, n) if work[r] & bit), None)
        if pivot is None:
            raise ValueError("matrix is singular over GF(2)")
        work[col], work[pivot] = work[pivot], work[col]
        aug[col], aug[pivot] = aug[pivot], aug[col]
        for r in range(n):
            if r != col and (work[r] & bit):
                work[r] ^= work[col]
                aug[r] ^= aug[col]
    return tuple(aug)


def inv_transpose(a: BitMatrix) -> BitMatrix:
    return transpose(inverse(a))


def is_invertible(a: BitMatrix) -> bool:
    try:
        inverse(a)
    except ValueError:
        return False
    return True


def permutation_matrix(sigma: Sequence[int]) -> BitMatrix:
    """Matrix with entry (i, j) = 1 iff i = sigma(j)."""
    n = len(sigma)
    if sorted(sigma) != list(range(n)):
        raise ValueError(f"not a permutation of 0..{n - 1}: {sigma}")
    rows = [0] * n
    for j in range(n):
        rows[sigma[j]] |= 1 << (n - 1 - j)
    return tuple(rows)


def all_permutations(n: int = 4) -> list[tuple[int, ...]]:
    return list(permutations(range(n)))


def evaluate_word(word: Iterable[tuple[int, int]], n: int = 4) -> BitMatrix:
    """Left-to-right product of the transvections in ``word``."""
    acc = identity(n)
    for i, j in word:
        acc = mul(acc, transvection(i, j, n))
    return acc


def encode(a: BitMatrix) -> int:
    """Row-major packing of the whole matrix into one int (row 0 on top)."""
    n = len(a)
    key = 0
    for r in a:
        key = (key << n) | r
    return key


def decode(key: int, n: int = 4) -> BitMatrix:
    mask = (1 << n) - 1
    return tuple((key >> (n * (n - 1 - i))) & mask for i in range(n))


def to_lists(a: BitMatrix) -> list[list[int]]:
    n = len(a)
    return [[(r >> (n - 1 - j)) & 1 for j in range(n)] for r in a]


def from_lists(rows: Sequence[Sequence[int]]) -> BitMatrix:
    n = len(rows)
    return tuple(sum((int(v) & 1) << (n - 1 - j) for j, v in enumerate(r)) for r in rows)


def enumerate_group(n: int = 4) -> dict[BitMatrix, TransvectionWord]:
    """Breadth-first enumeration of GL(n, F2) from the identity.

    Each element is mapped to its minimal-length transvection word; ties
    are broken by lexicographic order under ``GENERATOR_ORDER``.  New
    layers are built by left-multiplying (prepending a generator), which
    enumerates the candidate words of the next length in lexicographic
    order, so first-visit-wins yields the lexicographically smallest
    minimal word.
    """
    gens = [(i, j) for i in range(n) for j in range(n) if i != j]
    ident = identity(n)
    words: dict[BitMatrix, TransvectionWord] = {ident: ()}
    layer: list[BitMatrix] = [ident]
    while layer:
        nxt: list[BitMatrix] = []
        for g in gens:
            i, j = g
            for m in layer:
                # left-multiplying by [ij] adds row j to row i
                cand = m[:i] + (m[i] ^ m[j],) + m[i + 1 :]
                if cand not in words:
                    words[cand] = (g,) + words[m]
                    nxt.append(cand)
        # candidates arrive generator-major over a lex-sorted layer, i.e. in
        # lexicographic word order, so each layer list stays lex-sorted
        layer = nxt
    return words


def group_order(n: int) -> int:
    order = 1
    for i in range(1, n + 1):
        order *= 2**i - 1
    return order << (n * (n - 1) // 2)


@dataclass
class CosetRecord:
    """One right coset of the permutation subgroup.

    ``key`` is the canonical label: the minimum, over the 24 row
    permutations of any member, of the row-major packing.  ``word`` is a
    minimal-length transvection word among all members, tie-broken
    lexicographically, and ``matrix`` is its evaluation.
    """

    key: int
    word: TransvectionWord
    matrix: BitMatrix
    survivor: bool = False
    maximizer: bool = False

    @property
    def length(self) -> int:
        return len(self.word)


def coset_key(a: BitMatrix) -> int:
    """Canonical key of the right coset {sigma @ a}: left-multiplying by a
    permutation matrix permutes rows, so minimise over row orderings."""
    n = len(a)
    best = None
    for perm in permutations(range(n)):
        key = 0
        for i in perm:
            key = (key << n) | a[i]
        if best is None or key < best:
            best = key
    return best


@dataclass
class CosetTable:
    """Immutable partition of an enumerated group into right cosets."""

    records: list[CosetRecord]
    _index_by_key: dict[int, int] = field(repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        if not self._index_by_key:
            self._index_by_key = {rec.key: i for i, rec in enumerate(self.records)}

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, idx: int) -> CosetRecord:
        return self.records[idx]

    def index_of(self, a: BitMatrix) -> int:
        return self._index_by_key[coset_key(a)]

    def record_of(self, a: BitMatrix) -> CosetRecord:
        return self.records[self.index_of(a)]

    def conjugate(self, record: CosetRecord, sigma: Sequence[int]) -> CosetRecord:
        """Record of the coset {sigma A sigma^-1} for any member A; the
        result does not depend on the member chosen."""
        s = permutation_matrix(sigma)
        conj = mul(mul(s, record.matrix), transpose(s))
        return self.record_of(conj)

    def to_json(self) -> str:
        rows = [
            {
                "key": f"{rec.key:04x}",
                "word": [list(g) for g in rec.word],
                "length": rec.length,
                "survivor": rec.survivor,
                "maximizer": rec.maximizer,
            }
            for rec in self.records
        ]
        return json.dumps(rows, indent=1)


def coset_partition(words: dict[BitMatrix, TransvectionWord]) -> CosetTable:
    """Partition an enumerated group into right cosets of the permutation
    subgroup, one record per coset, sorted by canonical key."""
    best: dict[int, tuple[int, TransvectionWord, BitMatrix]] = {}
    for mat, word in words.items():
        key = coset_key(mat)
        entry = (len(word), word, mat)
        cur = best.get(key)
        if cur is None or entry[:2] < cur[:2]:
            best[key] = entry
    records = [
        CosetRecord(key=key, word=entry[1], matrix=entry[2])
        for key, entry in sorted(best.items())
    ]
    return CosetTable(records)

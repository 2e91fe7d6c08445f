"""Finite groups on dense indices, subset masks and seeded sampling.

Elements of a group of order ``N`` are the integers ``0..N-1``.  For the
cyclic group the index is the residue, for the boolean cube it is the bit
pattern, and table-backed groups carry an explicit Cayley table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

CYCLIC = "cyclic"
BOOLEAN_CUBE = "boolean-cube"
TABLE = "table"

_KIND_ALIASES = {
    "cyclic": CYCLIC,
    "z": CYCLIC,
    "boolean-cube": BOOLEAN_CUBE,
    "cube": BOOLEAN_CUBE,
    "f2": BOOLEAN_CUBE,
    "table": TABLE,
}

_ASSOC_EXHAUSTIVE_MAX = 256


class GroupAxiomError(ValueError):
    """Raised when a Cayley table fails one of the group axioms."""


@dataclass(frozen=True, eq=False)
class Group:
    kind: str
    size: int
    dim: int | None = None
    table: np.ndarray | None = field(default=None, repr=False)
    _inverse: np.ndarray | None = field(default=None, repr=False)
    identity: int = 0

    def op(self, a, b):
        """Group product, broadcast elementwise over index arrays."""
        if self.kind == CYCLIC:
            return (np.asarray(a) + np.asarray(b)) % self.size
        if self.kind == BOOLEAN_CUBE:
            return np.bitwise_xor(a, b)
        return self.table[a, b]

    def inv(self, a):
        if self.kind == CYCLIC:
            return (-np.asarray(a)) % self.size
        if self.kind == BOOLEAN_CUBE:
            return np.asarray(a)
        return self._inverse[a]

    @property
    def is_abelian_structured(self) -> bool:
        return self.kind in (CYCLIC, BOOLEAN_CUBE)

    @property
    def elements(self) -> np.ndarray:
        return np.arange(self.size, dtype=np.int64)

    def spec(self) -> str:
        if self.kind == CYCLIC:
            return f"cyclic:{self.size}"
        if self.kind == BOOLEAN_CUBE:
            return f"cube:{self.dim}"
        return f"table:{self.size}"

    def _key(self):
        if self.kind == TABLE:
            return (self.kind, self.size, self.table.tobytes())
        return (self.kind, self.size)

    def __eq__(self, other):
        if not isinstance(other, Group):
            return NotImplemented
        return self is other or self._key() == other._key()

    def __hash__(self):
        return hash(self._key())


def make_group(kind: str, param) -> Group:
    """Build a group.

    ``kind`` is ``"cyclic"`` (param N), ``"boolean-cube"`` (param n, giving
    order 2**n) or ``"table"`` (param an N x N Cayley table).
    """
    try:
        kind = _KIND_ALIASES[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown group kind {kind!r}") from None
    if kind == CYCLIC:
        n = int(param)
        if n < 1:
            raise ValueError("cyclic group order must be >= 1")
        return Group(CYCLIC, n)
    if kind == BOOLEAN_CUBE:
        n = int(param)
        if n < 1:
            raise ValueError("boolean cube dimension must be >= 1")
        return Group(BOOLEAN_CUBE, 1 << n, dim=n)
    return _table_group(np.asarray(param))


def _table_group(table: np.ndarray) -> Group:
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] < 1:
        raise GroupAxiomError("closure: Cayley table must be a square N x N array")
    n = table.shape[0]
    table = table.astype(np.int64)
    if table.min() < 0 or table.max() >= n:
        raise GroupAxiomError("closure: table entries must lie in 0..N-1")
    idx = np.arange(n)
    ids = [e for e in range(n) if np.array_equal(table[e], idx) and np.array_equal(table[:, e], idx)]
    if not ids:
        raise GroupAxiomError("identity: no two-sided identity element in table")
    e = ids[0]
    hits = table == e
    if not (hits.any(axis=1).all()):
        raise GroupAxiomError("inverse: some element has no inverse")
    inverse = hits.argmax(axis=1)
    if not np.all(table[inverse, idx] == e):
        raise GroupAxiomError("inverse: right inverse is not a left inverse")
    _check_associative(table)
    table.setflags(write=False)
    inverse.setflags(write=False)
    return Group(TABLE, n, table=table, _inverse=inverse, identity=e)


def _check_associative(table: np.ndarray) -> None:
    n = table.shape[0]
    if n <= _ASSOC_EXHAUSTIVE_MAX:
        for a in range(n):
            # (a*b)*c versus a*(b*c) for all b, c
            if not np.array_equal(table[table[a]], table[a][table]):
                raise GroupAxiomError("associativity: table is not associative")
        return
    rng = np.random.default_rng(0)
    a, b, c = rng.integers(0, n, size=(3, 1_000_000))
    if not np.array_equal(table[table[a, b], c], table[a, table[b, c]]):
        raise GroupAxiomError("associativity: table is not associative")


def check_group_axioms(group: Group) -> None:
    """Exhaustively verify associativity, identity and inverses (for N <= 256)."""
    n = group.size
    if n > _ASSOC_EXHAUSTIVE_MAX:
        raise ValueError("exhaustive axiom check limited to N <= 256")
    x = group.elements
    a, b, c = np.meshgrid(x, x, x, indexing="ij")
    if not np.array_equal(group.op(group.op(a, b), c), group.op(a, group.op(b, c))):
        raise GroupAxiomError("associativity")
    e = group.identity
    if not (np.array_equal(group.op(e, x), x) and np.array_equal(group.op(x, e), x)):
        raise GroupAxiomError("identity")
    if not np.all(group.op(x, group.inv(x)) == e):
        raise GroupAxiomError("inverse")


# ---------------------------------------------------------------------------
# seeds


@dataclass(frozen=True)
class Seed:
    """A (master, stream) pair; every random draw derives from it."""

    master: int
    stream: int = 0

    def __post_init__(self):
        for name in ("master", "stream"):
            v = getattr(self, name)
            if not 0 <= v < 2**64:
                raise ValueError(f"seed {name} must be a 64-bit unsigned integer")

    def rng(self, *subkeys: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master, spawn_key=(self.stream, *subkeys))
        return np.random.default_rng(ss)

    def child(self, index: int) -> "Seed":
        """Stream for job ``index`` under the same master seed."""
        return Seed(self.master, index)


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, Seed):
        return seed.rng()
    return Seed(int(seed)).rng()


# ---------------------------------------------------------------------------
# subsets


class SubsetMask:
    """A subset of a group held as a boolean vector of length N."""

    __slots__ = ("group", "bits", "cardinality")

    def __init__(self, group: Group, bits):
        bits = np.array(bits, dtype=bool)
        if bits.shape != (group.size,):
            raise ValueError(f"mask length {bits.shape} does not match group order {group.size}")
        bits.setflags(write=False)
        self.group = group
        self.bits = bits
        self.cardinality = int(np.count_nonzero(bits))

    @classmethod
    def from_elements(cls, group: Group, elements: Iterable[int]) -> "SubsetMask":
        bits = np.zeros(group.size, dtype=bool)
        el = np.fromiter((int(e) for e in elements), dtype=np.int64)
        if el.size and (el.min() < 0 or el.max() >= group.size):
            raise ValueError("element index out of range for group")
        bits[el] = True
        return cls(group, bits)

    @classmethod
    def full(cls, group: Group) -> "SubsetMask":
        return cls(group, np.ones(group.size, dtype=bool))

    @classmethod
    def empty(cls, group: Group) -> "SubsetMask":
        return cls(group, np.zeros(group.size, dtype=bool))

    @property
    def elements(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def __len__(self) -> int:
        return self.cardinality

    def __contains__(self, x) -> bool:
        return bool(self.bits[int(x)])

    def __eq__(self, other):
        if not isinstance(other, SubsetMask):
            return NotImplemented
        return self.group == other.group and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.group, self.bits.tobytes()))

    def __repr__(self):
        el = self.elements
        shown = ", ".join(map(str, el[:12])) + (", ..." if el.size > 12 else "")
        return f"SubsetMask({self.group.spec()}, {{{shown}}})"

    def to_json(self) -> dict:
        return {"n": self.group.size, "elements": [int(e) for e in self.elements]}

    @classmethod
    def from_json(cls, group: Group, obj: dict) -> "SubsetMask":
        if obj["n"] != group.size:
            raise ValueError("serialized mask order does not match group")
        return cls.from_elements(group, obj["elements"])

    def to_hex(self) -> str:
        """Little-endian hex bitmask: bit 0 of byte 0 is element 0."""
        return np.packbits(self.bits, bitorder="little").tobytes().hex()

    @classmethod
    def from_hex(cls, group: Group, text: str) -> "SubsetMask":
        raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")
        if bits.size < group.size or bits[group.size:].any():
            raise ValueError("hex mask does not fit group order")
        return cls(group, bits[: group.size])


@dataclass(frozen=True, eq=False)
class SignedIndicator:
    """A {-1, +1}-valued function on the group, ``f = 2*1_A - 1`` for a mask."""

    values: np.ndarray

    @classmethod
    def from_mask(cls, mask: SubsetMask) -> "SignedIndicator":
        v = np.where(mask.bits, 1, -1).astype(np.int64)
        v.setflags(write=False)
        return cls(v)

    @classmethod
    def from_values(cls, values: Sequence[int]) -> "SignedIndicator":
        v = np.asarray(values, dtype=np.int64)
        if not np.all(np.abs(v) == 1):
            raise ValueError("signed indicator values must be -1 or +1")
        v = v.copy()
        v.setflags(write=False)
        return cls(v)


def same_group(*masks: SubsetMask) -> Group:
    g = masks[0].group
    for m in masks[1:]:
        if m.group != g:
            raise ValueError(f"subsets live in different groups: {g.spec()} vs {m.group.spec()}")
    return g


# ---------------------------------------------------------------------------
# sampling


def random_subset_density_half(group: Group, seed) -> SubsetMask:
    """Each element independently with probability 1/2."""
    rng = as_rng(seed)
    return SubsetMask(group, rng.integers(0, 2, size=group.size, dtype=np.uint8).astype(bool))


def random_fixed_size_subset(parent: SubsetMask, size: int, seed) -> SubsetMask:
    """Uniform ``size``-subset of ``parent`` by a partial Fisher-Yates shuffle."""
    m = parent.cardinality
    if not 0 <= size <= m:
        raise ValueError(f"subset size {size} outside [0, {m}]")
    rng = as_rng(seed)
    pool = parent.elements.copy()
    for i in range(size):
        j = i + int(rng.integers(0, m - i))
        pool[i], pool[j] = pool[j], pool[i]
    return SubsetMask.from_elements(parent.group, pool[:size])


def sample_fixed_size_batch(pool: np.ndarray, size: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent uniform ``size``-subsets of ``pool`` as a (count, size) array.

    Partial Fisher-Yates run in lockstep across the batch.
    """
    pool = np.asarray(pool, dtype=np.int64)
    m = pool.size
    if not 0 <= size <= m:
        raise ValueError(f"subset size {size} outside [0, {m}]")
    work = np.broadcast_to(pool, (count, m)).copy()
    rows = np.arange(count)
    for i in range(size):
        j = i + rng.integers(0, m - i, size=count)
        picked = work[rows, j]
        work[rows, j] = work[:, i]
        work[:, i] = picked
    return work[:, :size]


# ---------------------------------------------------------------------------
# quadratic residues


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def require_odd_prime(p: int) -> int:
    p = int(p)
    if p == 2 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")
    return p


def quadratic_residues(p: int) -> SubsetMask:
    """Nonzero squares mod an odd prime ``p``; 0 is excluded."""
    p = require_odd_prime(p)
    g = make_group(CYCLIC, p)
    x = np.arange(1, p, dtype=np.int64)
    return SubsetMask.from_elements(g, np.unique(x * x % p))

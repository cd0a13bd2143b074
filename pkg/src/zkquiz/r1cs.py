"""Rank-1 constraint systems: builder, witness values and satisfiability.

Wire 0 is the constant one, wires 1..num_public are public inputs and the
rest are private. Field elements inside this module are plain ints reduced
modulo the curve order.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Iterable, Mapping

from .constants import CURVE_ORDER
from .curve import Scalar

R = CURVE_ORDER
ONE = 0

MAGIC = b"R1CS"
VERSION = 1


class R1CSError(ValueError):
    """Misuse of the constraint system API."""


class LinearCombination:
    """Sparse sum of coeff * wire, with merged nonzero coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        merged: dict[int, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for idx, coeff in items:
            if idx < 0:
                raise R1CSError(f"negative wire index {idx}")
            merged[idx] = (merged.get(idx, 0) + int(coeff)) % R
        self.terms = tuple(sorted((i, c) for i, c in merged.items() if c))

    @classmethod
    def var(cls, idx: int, coeff: int = 1) -> LinearCombination:
        return cls([(idx, coeff)])

    @classmethod
    def const(cls, value: int) -> LinearCombination:
        return cls([(ONE, value)])

    @staticmethod
    def _coerce(other) -> LinearCombination:
        if isinstance(other, LinearCombination):
            return other
        if isinstance(other, (int, Scalar)):
            return LinearCombination.const(int(other))
        raise TypeError(f"cannot combine LinearCombination with {type(other).__name__}")

    def __add__(self, other):
        return LinearCombination(self.terms + self._coerce(other).terms)

    __radd__ = __add__

    def __neg__(self):
        return LinearCombination((i, -c) for i, c in self.terms)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, k):
        if not isinstance(k, (int, Scalar)):
            return NotImplemented
        k = int(k)
        return LinearCombination((i, c * k) for i, c in self.terms)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, LinearCombination) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        body = " + ".join(f"{c}*w{i}" for i, c in self.terms) or "0"
        return f"LC({body})"

    def max_index(self) -> int:
        return self.terms[-1][0] if self.terms else 0

    def evaluate(self, wires) -> int:
        total = 0
        for idx, coeff in self.terms:
            total += coeff * wires[idx]
        return total % R


LC = LinearCombination


@dataclass(frozen=True)
class Constraint:
    a: LinearCombination
    b: LinearCombination
    c: LinearCombination


@dataclass(frozen=True)
class Assignment:
    """Full wire vector; wires[0] is always 1."""

    wires: tuple[int, ...]

    def __post_init__(self):
        if not self.wires or self.wires[0] != 1:
            raise R1CSError("wire 0 must hold the constant 1")

    def __len__(self):
        return len(self.wires)

    def __getitem__(self, idx):
        return self.wires[idx]

    def replace(self, idx: int, value: int) -> Assignment:
        wires = list(self.wires)
        wires[idx] = int(value) % R
        return Assignment(tuple(wires))


@dataclass(frozen=True)
class SatisfactionReport:
    satisfied: bool
    first_violation: int | None = None
    # inner products <a,w>, <b,w>, <c,w> at the first violation
    values: tuple[int, int, int] | None = None

    def __bool__(self):
        return self.satisfied


def lc_eval(lc: LinearCombination, w: Assignment) -> Scalar:
    if lc.max_index() >= len(w):
        raise R1CSError(f"wire {lc.max_index()} out of range for assignment of length {len(w)}")
    return Scalar(lc.evaluate(w.wires))


class ConstraintSystem:
    """Constraint builder that freezes into an immutable system.

    Values passed to ``alloc_*`` are recorded so the same synthesis routine
    can build the bare system or the system plus a full assignment.
    """

    def __init__(self):
        self.num_public = 0
        self.num_private = 0
        self._constraints: list[Constraint] = []
        self._values: list[int | None] = [1]
        self._frozen = False

    @property
    def num_wires(self) -> int:
        return 1 + self.num_public + self.num_private

    @property
    def constraints(self) -> tuple[Constraint, ...]:
        return tuple(self._constraints)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def _check_building(self):
        if self._frozen:
            raise R1CSError("constraint system is frozen")

    def alloc_public(self, value: int | None = None) -> int:
        self._check_building()
        if self.num_private:
            raise R1CSError("public wires must be allocated before private wires")
        self.num_public += 1
        self._values.append(None if value is None else int(value) % R)
        return self.num_wires - 1

    def alloc_private(self, value: int | None = None) -> int:
        self._check_building()
        self.num_private += 1
        self._values.append(None if value is None else int(value) % R)
        return self.num_wires - 1

    def enforce(self, a, b, c) -> None:
        """Add the constraint <a,w> * <b,w> = <c,w>."""
        self._check_building()
        a, b, c = (LC._coerce(x) for x in (a, b, c))
        top = max(a.max_index(), b.max_index(), c.max_index())
        if top >= self.num_wires:
            raise R1CSError(f"constraint references unallocated wire {top}")
        self._constraints.append(Constraint(a, b, c))

    def value(self, idx: int) -> int | None:
        return self._values[idx]

    def evaluate(self, lc: LinearCombination) -> int:
        return lc.evaluate(self._values)

    def set_value(self, idx: int, value: int) -> None:
        """Fill in a wire whose value is only known after later gadgets run."""
        self._check_building()
        if not 0 < idx < self.num_wires:
            raise R1CSError(f"cannot set value of wire {idx}")
        self._values[idx] = int(value) % R

    def freeze(self) -> ConstraintSystem:
        self._frozen = True
        return self

    def assignment(self) -> Assignment:
        missing = [i for i, v in enumerate(self._values) if v is None]
        if missing:
            raise R1CSError(f"{len(missing)} wires have no value (first: {missing[0]})")
        return Assignment(tuple(self._values))

    def is_satisfied(self, w: Assignment) -> SatisfactionReport:
        return is_satisfied(self, w)

    def serialize(self) -> bytes:
        out = [MAGIC, struct.pack(">IIII", VERSION, self.num_public, self.num_private,
                                  len(self._constraints))]
        for con in self._constraints:
            for lc in (con.a, con.b, con.c):
                out.append(struct.pack(">I", len(lc.terms)))
                for idx, coeff in lc.terms:
                    out.append(struct.pack(">I", idx))
                    out.append(coeff.to_bytes(32, "big"))
        return b"".join(out)

    def digest(self) -> bytes:
        return hashlib.sha256(self.serialize()).digest()

    @classmethod
    def deserialize(cls, data: bytes) -> ConstraintSystem:
        if data[:4] != MAGIC:
            raise R1CSError("bad R1CS magic")
        version, num_public, num_private, count = struct.unpack_from(">IIII", data, 4)
        if version != VERSION:
            raise R1CSError(f"unsupported R1CS version {version}")
        cs = cls()
        cs.num_public, cs.num_private = num_public, num_private
        cs._values = [1] + [None] * (num_public + num_private)
        pos = 20
        for _ in range(count):
            lcs = []
            for _ in range(3):
                (n,) = struct.unpack_from(">I", data, pos)
                pos += 4
                terms = []
                for _ in range(n):
                    (idx,) = struct.unpack_from(">I", data, pos)
                    coeff = int.from_bytes(data[pos + 4 : pos + 36], "big")
                    terms.append((idx, coeff))
                    pos += 36
                lcs.append(LC(terms))
            cs.enforce(*lcs)
        if pos != len(data):
            raise R1CSError("trailing bytes after R1CS body")
        return cs.freeze()


def is_satisfied(cs: ConstraintSystem, w: Assignment) -> SatisfactionReport:
    if len(w) != cs.num_wires:
        raise R1CSError(f"assignment has {len(w)} wires, system expects {cs.num_wires}")
    wires = w.wires
    for j, con in enumerate(cs._constraints):
        a = con.a.evaluate(wires)
        b = con.b.evaluate(wires)
        c = con.c.evaluate(wires)
        if (a * b - c) % R:
            return SatisfactionReport(False, j, (a, b, c))
    return SatisfactionReport(True)

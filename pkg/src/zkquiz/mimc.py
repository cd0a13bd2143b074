"""MiMC-style keyed permutation and 2-to-1 compression over the scalar field.

Used as the commitment to the secret answer key:
``commit(key, blind) = compress(key, blind)``.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from functools import lru_cache

from .constants import CURVE_ORDER, MIMC_SEED
from .curve import Scalar

R = CURVE_ORDER


@dataclass(frozen=True)
class MimcParams:
    exponent: int
    rounds: int
    round_constants: tuple[int, ...]

    def __post_init__(self):
        if self.exponent < 3 or self.exponent % 2 == 0:
            raise ValueError("exponent must be odd and >= 3")
        if math.gcd(self.exponent, R - 1) != 1:
            raise ValueError(f"x^{self.exponent} is not a permutation of the field")
        if len(self.round_constants) != self.rounds:
            raise ValueError("need exactly one round constant per round")

    def serialize(self) -> bytes:
        head = struct.pack(">II", self.exponent, self.rounds)
        return head + b"".join(c.to_bytes(32, "big") for c in self.round_constants)

    def digest(self) -> bytes:
        return hashlib.sha256(self.serialize()).digest()


def round_constant(i: int) -> int:
    if i == 0:
        return 0
    h = hashlib.sha256(MIMC_SEED + str(i).encode("ascii")).digest()
    return int.from_bytes(h, "big") % R


@lru_cache(maxsize=None)
def derive_params() -> MimcParams:
    e = 3
    while math.gcd(e, R - 1) != 1:
        e += 2
    rounds = math.ceil(R.bit_length() / math.log2(e))
    return MimcParams(e, rounds, tuple(round_constant(i) for i in range(rounds)))


def permutation(x, k, params: MimcParams | None = None) -> Scalar:
    params = params or derive_params()
    s, k, e = int(x) % R, int(k) % R, params.exponent
    for c in params.round_constants:
        s = pow(s + k + c, e, R)
    return Scalar(s + k)


def compress(a, b, params: MimcParams | None = None) -> Scalar:
    """Miyaguchi-Preneel: E_b(a) + a + b."""
    return permutation(a, b, params) + int(a) + int(b)


def commit(key_packed, blind, params: MimcParams | None = None) -> Scalar:
    return compress(key_packed, blind, params)

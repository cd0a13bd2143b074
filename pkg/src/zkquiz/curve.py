"""Pairing backend: scalar field, G1/G2/GT and the bilinear map.

Group arithmetic and the pairing are delegated to the arkworks BLS12-381
bindings. This module owns the scalar type, the byte encodings and the
on-curve checks; nothing outside it touches the backend directly.
"""

from __future__ import annotations

import secrets
from typing import Sequence

import py_arkworks_bls12381 as ark

from .constants import (
    CURVE_ORDER,
    FIELD_MODULUS,
    FP_BYTES,
    G1_B,
    G1_ENCODED_SIZE,
    G2_B,
    G2_ENCODED_SIZE,
    SCALAR_BYTES,
    TAG_AFFINE,
    TAG_IDENTITY,
)

R = CURVE_ORDER
P = FIELD_MODULUS


class FieldError(ArithmeticError):
    """Undefined field operation, e.g. inverting zero."""


class DeserializationError(ValueError):
    """Bytes do not encode a valid group element."""


def default_rng():
    return secrets.SystemRandom()


class Scalar:
    """Element of the scalar field, always held as a canonical residue."""

    __slots__ = ("value",)

    def __init__(self, value: int = 0):
        object.__setattr__(self, "value", int(value) % R)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    @classmethod
    def from_integer(cls, value: int) -> Scalar:
        return cls(value)

    @classmethod
    def from_bytes_reduced(cls, data: bytes) -> Scalar:
        if len(data) > SCALAR_BYTES:
            raise ValueError(f"at most {SCALAR_BYTES} bytes, got {len(data)}")
        return cls(int.from_bytes(data, "big"))

    @classmethod
    def random(cls, rng=None, nonzero: bool = False) -> Scalar:
        rng = rng or default_rng()
        return cls(rng.randrange(1 if nonzero else 0, R))

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(SCALAR_BYTES, "big")

    def hex(self) -> str:
        return "0x" + self.to_bytes().hex()

    @classmethod
    def from_hex(cls, text: str) -> Scalar:
        raw = bytes.fromhex(text[2:] if text.startswith("0x") else text)
        if len(raw) != SCALAR_BYTES or int.from_bytes(raw, "big") >= R:
            raise ValueError("not a canonical 32-byte scalar")
        return cls(int.from_bytes(raw, "big"))

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.value == other.value
        if isinstance(other, int):
            return self.value == other % R
        return NotImplemented

    def __hash__(self):
        return hash(("Scalar", self.value))

    def __repr__(self):
        return f"Scalar({self.value})"

    def __bool__(self):
        return self.value != 0

    def __add__(self, other):
        return Scalar(self.value + int(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Scalar(self.value - int(other))

    def __rsub__(self, other):
        return Scalar(int(other) - self.value)

    def __mul__(self, other):
        if isinstance(other, (Scalar, int)):
            return Scalar(self.value * int(other))
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return Scalar(-self.value)

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inv() ** (-exponent)
        return Scalar(pow(self.value, exponent, R))

    def inv(self) -> Scalar:
        if self.value == 0:
            raise FieldError("inverse of zero")
        return Scalar(pow(self.value, -1, R))

    def __truediv__(self, other):
        return self * Scalar(other).inv()

    def to_backend(self) -> ark.Scalar:
        return ark.Scalar(self.value)


# -- base field helpers (only used for encoding and on-curve checks) --


def _fp_sqrt(a: int) -> int | None:
    # p = 3 mod 4
    x = pow(a, (P + 1) // 4, P)
    return x if x * x % P == a % P else None


def _fp2_mul(a, b):
    a0, a1 = a
    b0, b1 = b
    return ((a0 * b0 - a1 * b1) % P, (a0 * b1 + a1 * b0) % P)


def _fp2_add(a, b):
    return ((a[0] + b[0]) % P, (a[1] + b[1]) % P)


def _fp2_pow(a, e: int):
    result = (1, 0)
    base = a
    while e:
        if e & 1:
            result = _fp2_mul(result, base)
        base = _fp2_mul(base, base)
        e >>= 1
    return result


def _fp2_sqrt(a):
    if a == (0, 0):
        return (0, 0)
    a1 = _fp2_pow(a, (P - 3) // 4)
    alpha = _fp2_mul(a1, _fp2_mul(a1, a))
    x0 = _fp2_mul(a1, a)
    if alpha == (P - 1, 0):
        x = _fp2_mul((0, 1), x0)
    else:
        b = _fp2_pow(_fp2_add((1, 0), alpha), (P - 1) // 2)
        x = _fp2_mul(b, x0)
    return x if _fp2_mul(x, x) == a else None


def _fp_is_large(y: int) -> bool:
    return y > (P - 1) // 2


def _fp2_is_large(y) -> bool:
    c0, c1 = y
    return _fp_is_large(c1) if c1 else _fp_is_large(c0)


def _int(chunk: bytes) -> int:
    return int.from_bytes(chunk, "big")


def _fp_bytes(v: int) -> bytes:
    return v.to_bytes(FP_BYTES, "big")


class _Point:
    """Common surface of G1 and G2 elements wrapping a backend point."""

    __slots__ = ("_raw",)
    _backend: type
    _compressed_size: int
    encoded_size: int

    def __init__(self, raw):
        object.__setattr__(self, "_raw", raw)

    def __setattr__(self, name, value):
        raise AttributeError("points are immutable")

    @classmethod
    def generator(cls):
        return cls(cls._backend())

    @classmethod
    def identity(cls):
        return cls(cls._backend.identity())

    def is_identity(self) -> bool:
        return self._raw == self._backend.identity()

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(self._raw + other._raw)

    def __sub__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(self._raw - other._raw)

    def __neg__(self):
        return type(self)(-self._raw)

    def __mul__(self, k):
        if isinstance(k, int):
            k = Scalar(k)
        if not isinstance(k, Scalar):
            return NotImplemented
        return type(self)(self._raw * k.to_backend())

    __rmul__ = __mul__

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._raw == other._raw

    def __hash__(self):
        return hash(self.to_bytes())

    def __repr__(self):
        return f"{type(self).__name__}({self.to_bytes().hex()[:18]}...)"

    def _compressed(self) -> bytes:
        return bytes(self._raw.to_compressed_bytes())

    def to_bytes(self) -> bytes:
        if self.is_identity():
            return bytes([TAG_IDENTITY]) + bytes(self.encoded_size - 1)
        comp = bytearray(self._compressed())
        sign = bool(comp[0] & 0x20)
        comp[0] &= 0x1F
        x, y = self._recover(bytes(comp), sign)
        return bytes([TAG_AFFINE]) + x + y

    def hex(self) -> str:
        return "0x" + self.to_bytes().hex()

    @classmethod
    def from_hex(cls, text: str):
        try:
            raw = bytes.fromhex(text[2:] if text.startswith("0x") else text)
        except ValueError as exc:
            raise DeserializationError(str(exc)) from None
        return cls.from_bytes(raw)

    @classmethod
    def from_bytes(cls, data: bytes):
        if len(data) != cls.encoded_size:
            raise DeserializationError(
                f"{cls.__name__} encoding must be {cls.encoded_size} bytes, got {len(data)}"
            )
        tag, body = data[0], data[1:]
        if tag == TAG_IDENTITY:
            if any(body):
                raise DeserializationError("identity encoding has nonzero coordinates")
            return cls.identity()
        if tag != TAG_AFFINE:
            raise DeserializationError(f"unknown point tag 0x{tag:02x}")
        comp = cls._check_and_compress(body)
        try:
            raw = cls._backend.from_compressed_bytes(list(comp))
        except Exception as exc:  # backend raises bare ValueError/Exception on bad data
            raise DeserializationError(f"not in the prime-order subgroup: {exc}") from None
        return cls(raw)


class G1Point(_Point):
    __slots__ = ()
    _backend = ark.G1Point
    encoded_size = G1_ENCODED_SIZE

    @staticmethod
    def _recover(xbytes: bytes, sign: bool):
        x = _int(xbytes)
        y = _fp_sqrt((x * x * x + G1_B) % P)
        if _fp_is_large(y) != sign:
            y = P - y
        return _fp_bytes(x), _fp_bytes(y)

    @staticmethod
    def _check_and_compress(body: bytes) -> bytes:
        x, y = _int(body[:FP_BYTES]), _int(body[FP_BYTES:])
        if x >= P or y >= P:
            raise DeserializationError("coordinate not reduced")
        if (y * y - x * x * x - G1_B) % P:
            raise DeserializationError("point not on curve")
        comp = bytearray(_fp_bytes(x))
        comp[0] |= 0x80 | (0x20 if _fp_is_large(y) else 0)
        return bytes(comp)


class G2Point(_Point):
    __slots__ = ()
    _backend = ark.G2Point
    encoded_size = G2_ENCODED_SIZE

    @staticmethod
    def _recover(xbytes: bytes, sign: bool):
        x = (_int(xbytes[FP_BYTES:]), _int(xbytes[:FP_BYTES]))
        rhs = _fp2_add(_fp2_mul(x, _fp2_mul(x, x)), G2_B)
        y = _fp2_sqrt(rhs)
        if _fp2_is_large(y) != sign:
            y = ((P - y[0]) % P, (P - y[1]) % P)
        return (_fp_bytes(x[1]) + _fp_bytes(x[0]), _fp_bytes(y[1]) + _fp_bytes(y[0]))

    @staticmethod
    def _check_and_compress(body: bytes) -> bytes:
        c = [_int(body[i : i + FP_BYTES]) for i in range(0, 4 * FP_BYTES, FP_BYTES)]
        if any(v >= P for v in c):
            raise DeserializationError("coordinate not reduced")
        x, y = (c[1], c[0]), (c[3], c[2])
        rhs = _fp2_add(_fp2_mul(x, _fp2_mul(x, x)), G2_B)
        if _fp2_mul(y, y) != rhs:
            raise DeserializationError("point not on curve")
        comp = bytearray(_fp_bytes(x[1]) + _fp_bytes(x[0]))
        comp[0] |= 0x80 | (0x20 if _fp2_is_large(y) else 0)
        return bytes(comp)


class GtElement:
    """Element of the target group (multiplicative notation)."""

    __slots__ = ("_raw",)

    def __init__(self, raw):
        object.__setattr__(self, "_raw", raw)

    def __setattr__(self, name, value):
        raise AttributeError("GtElement is immutable")

    @classmethod
    def identity(cls) -> GtElement:
        return cls(ark.GT.one())

    def is_identity(self) -> bool:
        return self._raw == ark.GT.one()

    def __mul__(self, other: GtElement) -> GtElement:
        return GtElement(self._raw * other._raw)

    def __pow__(self, k) -> GtElement:
        k = int(k) % R
        result, base = ark.GT.one(), self._raw
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return GtElement(result)

    def __eq__(self, other):
        if not isinstance(other, GtElement):
            return NotImplemented
        return self._raw == other._raw

    __hash__ = None

    def __repr__(self):
        return "GtElement(identity)" if self.is_identity() else "GtElement(...)"


def multi_scalar_mul(points: Sequence[_Point], scalars: Sequence, group: type = G1Point):
    """Return sum(scalars[i] * points[i]); the empty sum is the identity of `group`."""
    if len(points) != len(scalars):
        raise ValueError(f"length mismatch: {len(points)} points, {len(scalars)} scalars")
    if not points:
        return group.identity()
    group = type(points[0])
    raw_points = []
    raw_scalars = []
    for pt, k in zip(points, scalars):
        if type(pt) is not group:
            raise TypeError("mixed groups in multi_scalar_mul")
        raw_points.append(pt._raw)
        raw_scalars.append(ark.Scalar(int(k) % R))
    return group(group._backend.multiexp_unchecked(raw_points, raw_scalars))


def pairing(p: G1Point, q: G2Point) -> GtElement:
    return GtElement(ark.GT.pairing(p._raw, q._raw))


def multi_pairing_is_identity(pairs: Sequence[tuple[G1Point, G2Point]]) -> bool:
    """True iff the product of e(P_i, Q_i) is the GT identity."""
    if not pairs:
        return True
    g1 = [p._raw for p, _ in pairs]
    g2 = [q._raw for _, q in pairs]
    return ark.GT.multi_pairing(g1, g2) == ark.GT.one()

"""Groth16 over BLS12-381: trusted setup, prover, verifier and key files."""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Sequence

from .constants import CURVE_ORDER
from .curve import (
    DeserializationError,
    G1Point,
    G2Point,
    Scalar,
    default_rng,
    multi_pairing_is_identity,
    multi_scalar_mul,
)
from .qap import Qap, poly_eval, r1cs_to_qap
from .r1cs import Assignment, ConstraintSystem, R1CSError

R = CURVE_ORDER
VERSION = 1
PK_MAGIC = b"GRPK"
VK_MAGIC = b"GRVK"


class ProofRefused(ValueError):
    """The prover was handed an assignment that does not satisfy the circuit."""


class KeyFileError(ValueError):
    pass


class ToxicWaste:
    """Setup trapdoor. Lives only inside :func:`setup`."""

    __slots__ = ("alpha", "beta", "gamma", "delta", "tau")

    def __init__(self, rng):
        for name in self.__slots__:
            setattr(self, name, rng.randrange(1, R))

    def destroy(self):
        for name in self.__slots__:
            setattr(self, name, 0)


@dataclass(frozen=True, eq=False)
class VerifyingKey:
    alpha_g1: G1Point
    beta_g2: G2Point
    gamma_g2: G2Point
    delta_g2: G2Point
    ic: tuple[G1Point, ...]
    circuit_digest: bytes

    @property
    def num_public(self) -> int:
        return len(self.ic) - 1

    def to_bytes(self) -> bytes:
        out = [VK_MAGIC, struct.pack(">I", VERSION), self.circuit_digest]
        for p in (self.alpha_g1, self.beta_g2, self.gamma_g2, self.delta_g2):
            out.append(p.to_bytes())
        out.append(_pack_points(self.ic))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes, expected_digest: bytes | None = None) -> VerifyingKey:
        reader = _Reader(data, VK_MAGIC, expected_digest)
        vk = cls(
            alpha_g1=reader.point(G1Point),
            beta_g2=reader.point(G2Point),
            gamma_g2=reader.point(G2Point),
            delta_g2=reader.point(G2Point),
            ic=reader.points(G1Point),
            circuit_digest=reader.digest,
        )
        reader.finish()
        return vk

    def digest(self) -> bytes:
        return hashlib.sha256(self.to_bytes()).digest()

    def __eq__(self, other):
        return isinstance(other, VerifyingKey) and self.to_bytes() == other.to_bytes()


@dataclass(frozen=True, eq=False)
class ProvingKey:
    alpha_g1: G1Point
    beta_g1: G1Point
    beta_g2: G2Point
    delta_g1: G1Point
    delta_g2: G2Point
    tau_g1: tuple[G1Point, ...]
    tau_g2: tuple[G2Point, ...]
    a_query: tuple[G1Point, ...]     # u_i(tau) G1, every wire
    b_g1_query: tuple[G1Point, ...]  # v_i(tau) G1, every wire
    b_g2_query: tuple[G2Point, ...]  # v_i(tau) G2, every wire
    l_query: tuple[G1Point, ...]     # (beta u_i + alpha v_i + w_i)(tau) / delta G1, private wires
    h_query: tuple[G1Point, ...]     # tau^i t(tau) / delta G1, i < n - 1
    num_public: int
    circuit_digest: bytes

    _singles = ("alpha_g1", "beta_g1", "beta_g2", "delta_g1", "delta_g2")
    _arrays = ("tau_g1", "tau_g2", "a_query", "b_g1_query", "b_g2_query", "l_query", "h_query")

    def to_bytes(self) -> bytes:
        out = [PK_MAGIC, struct.pack(">I", VERSION), self.circuit_digest,
               struct.pack(">I", self.num_public)]
        out += [getattr(self, name).to_bytes() for name in self._singles]
        out += [_pack_points(getattr(self, name)) for name in self._arrays]
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes, expected_digest: bytes | None = None) -> ProvingKey:
        reader = _Reader(data, PK_MAGIC, expected_digest)
        (num_public,) = reader.unpack(">I")
        kwargs = {"num_public": num_public, "circuit_digest": reader.digest}
        for name in cls._singles:
            kwargs[name] = reader.point(G2Point if "g2" in name else G1Point)
        for name in cls._arrays:
            kwargs[name] = reader.points(G2Point if "g2" in name else G1Point)
        reader.finish()
        return cls(**kwargs)


@dataclass(frozen=True)
class Proof:
    a: G1Point
    b: G2Point
    c: G1Point

    def to_bytes(self) -> bytes:
        return self.a.to_bytes() + self.b.to_bytes() + self.c.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> Proof:
        n1, n2 = G1Point.encoded_size, G2Point.encoded_size
        if len(data) != 2 * n1 + n2:
            raise DeserializationError(f"proof must be {2 * n1 + n2} bytes, got {len(data)}")
        return cls(
            G1Point.from_bytes(data[:n1]),
            G2Point.from_bytes(data[n1 : n1 + n2]),
            G1Point.from_bytes(data[n1 + n2 :]),
        )

    def to_json(self) -> dict:
        return {"a": self.a.hex(), "b": self.b.hex(), "c": self.c.hex()}

    @classmethod
    def from_json(cls, obj: dict) -> Proof:
        try:
            return cls(G1Point.from_hex(obj["a"]), G2Point.from_hex(obj["b"]),
                       G1Point.from_hex(obj["c"]))
        except (KeyError, TypeError) as exc:
            raise DeserializationError(f"malformed proof object: {exc}") from None


def _pack_points(points) -> bytes:
    return struct.pack(">I", len(points)) + b"".join(p.to_bytes() for p in points)


class _Reader:
    def __init__(self, data: bytes, magic: bytes, expected_digest: bytes | None):
        if data[:4] != magic:
            raise KeyFileError(f"bad magic, expected {magic!r}")
        self.data, self.pos = data, 4
        (version,) = self.unpack(">I")
        if version != VERSION:
            raise KeyFileError(f"unsupported key file version {version}")
        self.digest = self.take(32)
        if expected_digest is not None and self.digest != expected_digest:
            raise KeyFileError("key file was generated for a different circuit")

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise KeyFileError("key file truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def point(self, group):
        return group.from_bytes(self.take(group.encoded_size))

    def points(self, group):
        (count,) = self.unpack(">I")
        return tuple(self.point(group) for _ in range(count))

    def finish(self):
        if self.pos != len(self.data):
            raise KeyFileError("trailing bytes in key file")


def setup(cs: ConstraintSystem, rng=None, qap: Qap | None = None) -> tuple[ProvingKey, VerifyingKey]:
    """Circuit-specific trusted setup. Pass a seeded ``random.Random`` only in tests."""
    if not cs.frozen:
        raise R1CSError("setup requires a frozen constraint system")
    qap = qap or r1cs_to_qap(cs)
    rng = rng or default_rng()
    n, m, num_public = qap.degree, cs.num_wires, cs.num_public

    waste = ToxicWaste(rng)
    try:
        alpha, beta, gamma, delta, tau = (waste.alpha, waste.beta, waste.gamma,
                                          waste.delta, waste.tau)
        g1, g2 = G1Point.generator(), G2Point.generator()
        u = [poly_eval(p, tau) for p in qap.u]
        v = [poly_eval(p, tau) for p in qap.v]
        w = [poly_eval(p, tau) for p in qap.w]
        t_tau = poly_eval(qap.t, tau)
        gamma_inv = pow(gamma, -1, R)
        delta_inv = pow(delta, -1, R)
        mixed = [(beta * u[i] + alpha * v[i] + w[i]) % R for i in range(m)]
        powers = [pow(tau, i, R) for i in range(n)]

        vk = VerifyingKey(
            alpha_g1=g1 * alpha,
            beta_g2=g2 * beta,
            gamma_g2=g2 * gamma,
            delta_g2=g2 * delta,
            ic=tuple(g1 * (mixed[i] * gamma_inv) for i in range(num_public + 1)),
            circuit_digest=cs.digest(),
        )
        pk = ProvingKey(
            alpha_g1=vk.alpha_g1,
            beta_g1=g1 * beta,
            beta_g2=vk.beta_g2,
            delta_g1=g1 * delta,
            delta_g2=vk.delta_g2,
            tau_g1=tuple(g1 * p for p in powers),
            tau_g2=tuple(g2 * p for p in powers),
            a_query=tuple(g1 * x for x in u),
            b_g1_query=tuple(g1 * x for x in v),
            b_g2_query=tuple(g2 * x for x in v),
            l_query=tuple(g1 * (mixed[i] * delta_inv) for i in range(num_public + 1, m)),
            h_query=tuple(g1 * (powers[i] * t_tau * delta_inv) for i in range(n - 1)),
            num_public=num_public,
            circuit_digest=vk.circuit_digest,
        )
    finally:
        waste.destroy()
    return pk, vk


def prove(pk: ProvingKey, qap: Qap, assignment: Assignment, rng=None) -> Proof:
    report = qap.cs.is_satisfied(assignment)
    if not report:
        raise ProofRefused(f"assignment violates constraint {report.first_violation}")
    if pk.circuit_digest != qap.cs.digest():
        raise KeyFileError("proving key does not match the circuit")
    h, rem = qap.quotient(assignment)
    if rem:
        raise ProofRefused("numerator is not divisible by the target polynomial")

    rng = rng or default_rng()
    r, s = rng.randrange(R), rng.randrange(R)
    wires = assignment.wires
    private = wires[pk.num_public + 1 :]

    a = pk.alpha_g1 + multi_scalar_mul(pk.a_query, wires) + pk.delta_g1 * r
    b_g2 = pk.beta_g2 + multi_scalar_mul(pk.b_g2_query, wires) + pk.delta_g2 * s
    b_g1 = pk.beta_g1 + multi_scalar_mul(pk.b_g1_query, wires) + pk.delta_g1 * s
    c = (
        multi_scalar_mul(pk.l_query, private)
        + multi_scalar_mul(pk.h_query, h)
        + a * s
        + b_g1 * r
        - pk.delta_g1 * (r * s % R)
    )
    return Proof(a, b_g2, c)


def verify(vk: VerifyingKey, public_inputs: Sequence, proof: Proof) -> bool:
    if len(public_inputs) != vk.num_public:
        raise ValueError(f"expected {vk.num_public} public inputs, got {len(public_inputs)}")
    values = []
    for x in public_inputs:
        x = x.value if isinstance(x, Scalar) else int(x)
        if not 0 <= x < R:
            return False
        values.append(x)
    acc = vk.ic[0] + multi_scalar_mul(vk.ic[1:], values)
    return multi_pairing_is_identity([
        (-proof.a, proof.b),
        (vk.alpha_g1, vk.beta_g2),
        (acc, vk.gamma_g2),
        (proof.c, vk.delta_g2),
    ])

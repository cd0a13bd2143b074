"""The questionnaire-evaluation circuit.

Public inputs, in order: result code, key commitment, recipient.
Private inputs: 10 answer bits, 10 key bits, the commitment blind, and
the intermediate wires of the gadgets below.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .constants import ADDRESS_BYTES, GROUPS, QUESTION_COUNT, THRESHOLD
from .curve import Scalar
from .mimc import MimcParams, commit, derive_params
from .r1cs import LC, R, Assignment, ConstraintSystem

RESULT_WIRE = 1
COMMITMENT_WIRE = 2
RECIPIENT_WIRE = 3


class QuizInputError(ValueError):
    pass


def _check_bits(bits, what: str) -> tuple[int, ...]:
    bits = tuple(bits)
    if len(bits) != QUESTION_COUNT:
        raise QuizInputError(f"{what}: expected {QUESTION_COUNT} bits, got {len(bits)}")
    for b in bits:
        if isinstance(b, bool) or b not in (0, 1):
            raise QuizInputError(f"{what}: entries must be 0 or 1, got {b!r}")
    return tuple(int(b) for b in bits)


@dataclass(frozen=True)
class AnswerVector:
    """Bit i is the answer to question i."""

    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", _check_bits(self.bits, "answers"))

    @classmethod
    def from_int(cls, mask: int) -> AnswerVector:
        if not 0 <= mask < 1 << QUESTION_COUNT:
            raise QuizInputError(f"mask out of range: {mask}")
        return cls(tuple((mask >> i) & 1 for i in range(QUESTION_COUNT)))

    def to_int(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))


@dataclass(frozen=True)
class AnswerKey:
    bits: tuple[int, ...]
    blind: Scalar

    def __post_init__(self):
        object.__setattr__(self, "bits", _check_bits(self.bits, "key"))
        if not isinstance(self.blind, Scalar):
            object.__setattr__(self, "blind", Scalar(self.blind))
        if not self.blind:
            raise QuizInputError("blind must be nonzero")

    @property
    def packed(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))

    def commitment(self, params: MimcParams | None = None) -> Scalar:
        return commit(self.packed, self.blind, params)

    def __repr__(self):
        # never render secret material
        return "AnswerKey(<redacted>)"


@dataclass(frozen=True)
class QuizSecrets:
    answers: AnswerVector
    key: AnswerKey


@dataclass(frozen=True)
class QuizStatement:
    result: int
    commitment: Scalar
    recipient: Scalar

    def __post_init__(self):
        if self.result not in (0, 1, 2, 3):
            raise QuizInputError(f"result must be in 0..3, got {self.result}")

    def public_inputs(self) -> list[Scalar]:
        return [Scalar(self.result), self.commitment, self.recipient]


def address_to_scalar(address: bytes | str) -> Scalar:
    if isinstance(address, str):
        text = address[2:] if address.lower().startswith("0x") else address
        try:
            address = bytes.fromhex(text)
        except ValueError:
            raise QuizInputError(f"address is not hex: {address!r}") from None
    if len(address) != ADDRESS_BYTES:
        raise QuizInputError(f"address must be {ADDRESS_BYTES} bytes, got {len(address)}")
    return Scalar(int.from_bytes(address, "big"))


def score_plain(answers: AnswerVector, key_bits) -> int:
    """Reference evaluator: attribute j is set when >= 3 answers in group j match."""
    key_bits = _check_bits(key_bits, "key")
    attrs = []
    for group in GROUPS:
        matches = sum(1 for i in group if answers.bits[i] == key_bits[i])
        attrs.append(int(matches >= THRESHOLD))
    return attrs[0] + 2 * attrs[1]


# -- gadgets --


def _known(*vals):
    return all(v is not None for v in vals)


def boolean(cs: ConstraintSystem, x: int) -> None:
    cs.enforce(LC.var(x), LC.var(x) - 1, LC())


def threshold_at_least_3(cs: ConstraintSystem, s: LC, s_value: int | None) -> int:
    """Return a wire holding [s >= 3] for s in 0..7, via a 3-bit decomposition."""
    have = s_value is not None
    bits = []
    for j in range(3):
        w = cs.alloc_private((s_value >> j) & 1 if have else None)
        boolean(cs, w)
        bits.append(w)
    b0, b1, b2 = bits
    cs.enforce(s - (LC.var(b0) + LC.var(b1, 2) + LC.var(b2, 4)), LC.const(1), LC())
    v0, v1, v2 = (cs.value(b) for b in bits)
    t = cs.alloc_private(v1 * v0 if have else None)
    cs.enforce(LC.var(b1), LC.var(b0), LC.var(t))
    u = cs.alloc_private(v2 * cs.value(t) if have else None)
    cs.enforce(LC.var(b2), LC.var(t), LC.var(u))
    attr = cs.alloc_private(v2 + cs.value(t) - cs.value(u) if have else None)
    cs.enforce(LC.var(b2) + LC.var(t) - LC.var(u), LC.const(1), LC.var(attr))
    return attr


def _power_chain(cs: ConstraintSystem, base: LC, base_value: int | None, e: int) -> int:
    """Allocate wires computing base^e by square-and-multiply; return the output wire."""
    acc, acc_val = base, base_value
    for bit in bin(e)[3:]:
        sq_val = acc_val * acc_val % R if acc_val is not None else None
        sq = cs.alloc_private(sq_val)
        cs.enforce(acc, acc, LC.var(sq))
        acc, acc_val = LC.var(sq), sq_val
        if bit == "1":
            m_val = acc_val * base_value % R if acc_val is not None else None
            m = cs.alloc_private(m_val)
            cs.enforce(acc, base, LC.var(m))
            acc, acc_val = LC.var(m), m_val
    if len(acc) == 1 and acc.terms[0][1] == 1 and acc.terms[0][0] != 0:
        return acc.terms[0][0]
    out = cs.alloc_private(acc_val)
    cs.enforce(acc, LC.const(1), LC.var(out))
    return out


def mimc_compress_gadget(cs: ConstraintSystem, a: LC, b: LC, a_val, b_val, params: MimcParams) -> LC:
    """In-circuit compress(a, b); returns a linear combination for the output."""
    have = _known(a_val, b_val)
    s, s_val = a, a_val
    for c in params.round_constants:
        y = s + b + c
        y_val = (s_val + b_val + c) % R if have else None
        w = _power_chain(cs, y, y_val, params.exponent)
        s, s_val = LC.var(w), cs.value(w)
    return s + b + a + b


def _synthesize(params: MimcParams, secrets: QuizSecrets | None = None,
                recipient: Scalar | None = None) -> ConstraintSystem:
    have = secrets is not None
    cs = ConstraintSystem()
    # result and commitment values are filled in from the gadgets below
    result_w = cs.alloc_public()
    commitment_w = cs.alloc_public()
    recipient_w = cs.alloc_public(int(recipient) if have else None)
    assert (result_w, commitment_w, recipient_w) == (RESULT_WIRE, COMMITMENT_WIRE, RECIPIENT_WIRE)

    answers = [cs.alloc_private(secrets.answers.bits[i] if have else None)
               for i in range(QUESTION_COUNT)]
    key = [cs.alloc_private(secrets.key.bits[i] if have else None)
           for i in range(QUESTION_COUNT)]
    blind = cs.alloc_private(int(secrets.key.blind) if have else None)

    # (1) booleanity of the 20 input bits
    for w in answers + key:
        boolean(cs, w)

    # (2) match bits: 2a*k = a + k + m - 1  =>  m = 1 - (a - k)^2
    matches = []
    for a, k in zip(answers, key):
        m_val = 1 - (cs.value(a) - cs.value(k)) ** 2 if have else None
        m = cs.alloc_private(m_val)
        cs.enforce(LC.var(a, 2), LC.var(k), LC.var(a) + LC.var(k) + LC.var(m) - 1)
        matches.append(m)

    # (3)+(4) group sums and thresholds
    attrs = []
    for group in GROUPS:
        s = LC([(matches[i], 1) for i in group])
        s_val = sum(cs.value(matches[i]) for i in group) if have else None
        attrs.append(threshold_at_least_3(cs, s, s_val))

    # (5) result binding
    if have:
        cs.set_value(result_w, cs.value(attrs[0]) + 2 * cs.value(attrs[1]))
    cs.enforce(LC.var(result_w) - LC.var(attrs[0]) - LC.var(attrs[1], 2), LC.const(1), LC())

    # (6) packed key, (7) commitment
    key_packed = LC([(k, 1 << i) for i, k in enumerate(key)])
    packed_val = secrets.key.packed if have else None
    blind_val = cs.value(blind)
    digest = mimc_compress_gadget(cs, key_packed, LC.var(blind), packed_val, blind_val, params)
    if have:
        cs.set_value(commitment_w, cs.evaluate(digest))
    cs.enforce(digest - LC.var(commitment_w), LC.const(1), LC())

    # (8) recipient must appear in a constraint to be bound by the proof
    cs.enforce(LC.var(recipient_w), LC.const(1), LC.var(recipient_w))
    return cs.freeze()


@lru_cache(maxsize=4)
def build_circuit(params: MimcParams | None = None) -> ConstraintSystem:
    return _synthesize(params or derive_params())


def synthesize_witness(secrets: QuizSecrets, recipient, params: MimcParams | None = None
                       ) -> tuple[Assignment, QuizStatement]:
    if not isinstance(secrets.answers, AnswerVector) or not isinstance(secrets.key, AnswerKey):
        raise QuizInputError("secrets must hold an AnswerVector and an AnswerKey")
    if isinstance(recipient, (bytes, str)):
        recipient = address_to_scalar(recipient)
    recipient = Scalar(recipient)
    params = params or derive_params()
    cs = _synthesize(params, secrets, recipient)
    w = cs.assignment()
    statement = QuizStatement(
        result=w[RESULT_WIRE], commitment=Scalar(w[COMMITMENT_WIRE]), recipient=recipient
    )
    return w, statement

import random

import pytest

import oracles
from oracles import R
from zkquiz import constants
from zkquiz.curve import Scalar
from zkquiz.mimc import commit
from zkquiz.quiz import (
    COMMITMENT_WIRE,
    RECIPIENT_WIRE,
    RESULT_WIRE,
    AnswerKey,
    AnswerVector,
    QuizInputError,
    QuizSecrets,
    address_to_scalar,
    score_plain,
    synthesize_witness,
    threshold_at_least_3,
)
from zkquiz.r1cs import LC, ConstraintSystem


def bits_of(mask):
    return AnswerVector.from_int(mask).bits


class TestScorePlain:
    def test_all_match(self):
        rng = random.Random(1)
        for _ in range(20):
            key = rng.randrange(1024)
            assert score_plain(AnswerVector.from_int(key), bits_of(key)) == 3

    def test_complement(self):
        rng = random.Random(2)
        for _ in range(20):
            key = rng.randrange(1024)
            assert score_plain(AnswerVector.from_int(key ^ 0x3FF), bits_of(key)) == 0

    def test_worked_example(self):
        assert oracles.score_by_counting(0b0011100011, 0) == 1
        assert score_plain(AnswerVector.from_int(0b0011100011), bits_of(0)) == 1

    def test_matches_counting_oracle_exhaustively_for_one_key(self):
        key = 0b0110010111
        for mask in range(1024):
            got = score_plain(AnswerVector.from_int(mask), bits_of(key))
            assert got == oracles.score_by_counting(mask, key)


class TestTypes:
    def test_answer_vector_validation(self):
        with pytest.raises(QuizInputError):
            AnswerVector((0,) * 9)
        with pytest.raises(QuizInputError):
            AnswerVector((0,) * 9 + (2,))
        with pytest.raises(QuizInputError):
            AnswerVector((True,) + (0,) * 9)
        assert AnswerVector.from_int(0b101).bits[:3] == (1, 0, 1)
        assert AnswerVector.from_int(777).to_int() == 777

    def test_key_needs_nonzero_blind(self):
        with pytest.raises(QuizInputError):
            AnswerKey((0,) * 10, Scalar(0))

    def test_key_repr_hides_secrets(self):
        key = AnswerKey((1,) * 10, Scalar(0xDEADBEEF))
        assert "deadbeef" not in repr(key).lower()
        assert "1, 1" not in repr(key)

    def test_address_to_scalar(self):
        assert address_to_scalar("0x" + "00" * 19 + "05") == 5
        assert address_to_scalar(b"\xff" * 20) == 2**160 - 1
        with pytest.raises(QuizInputError):
            address_to_scalar("0x1234")
        with pytest.raises(QuizInputError):
            address_to_scalar("zz" * 20)


class TestThresholdGadget:
    def gadget(self, s):
        cs = ConstraintSystem()
        wire = cs.alloc_private(s)
        attr = threshold_at_least_3(cs, LC.var(wire), s)
        cs.freeze()
        return cs, attr

    def test_truth_table(self):
        table = []
        for s in range(8):
            cs, attr = self.gadget(s)
            w = cs.assignment()
            assert cs.is_satisfied(w)
            table.append(w[attr])
        assert table == [0, 0, 0, 1, 1, 1, 1, 1]
        assert table == [int(s >= 3) for s in range(8)]

    def test_wrong_attr_rejected(self):
        for s in range(8):
            cs, attr = self.gadget(s)
            w = cs.assignment()
            assert not cs.is_satisfied(w.replace(attr, 1 - w[attr]))

    def test_no_other_decomposition_satisfies(self):
        # enumerate every boolean choice for the three decomposition bits and
        # derive the product wires; only the true binary expansion passes
        for s in range(8):
            cs, attr = self.gadget(s)
            base = cs.assignment()
            b0 = 2
            passing = []
            for bits in range(8):
                v = [(bits >> j) & 1 for j in range(3)]
                t = v[1] * v[0]
                u = v[2] * t
                w = base
                for idx, val in zip(range(b0, b0 + 6), v + [t, u, v[2] + t - u]):
                    w = w.replace(idx, val)
                if cs.is_satisfied(w):
                    passing.append(bits)
            assert passing == [s]


class TestCircuit:
    def test_shape_matches_frozen_constants(self, circuit):
        assert circuit.num_public == constants.QUIZ_NUM_PUBLIC
        assert circuit.num_private == constants.QUIZ_NUM_PRIVATE
        assert len(circuit.constraints) == constants.QUIZ_NUM_CONSTRAINTS

    def test_public_input_order(self, circuit, answer_key):
        recipient = address_to_scalar("0x" + "ab" * 20)
        w, st = synthesize_witness(QuizSecrets(AnswerVector.from_int(5), answer_key), recipient)
        assert (RESULT_WIRE, COMMITMENT_WIRE, RECIPIENT_WIRE) == (1, 2, 3)
        assert [w[1], w[2], w[3]] == [int(x) for x in st.public_inputs()]
        assert st.public_inputs() == [Scalar(st.result), st.commitment, st.recipient]

    def test_witness_satisfies_and_matches_oracles(self, circuit, answer_key):
        rng = random.Random(3)
        for _ in range(30):
            mask = rng.randrange(1024)
            w, st = synthesize_witness(
                QuizSecrets(AnswerVector.from_int(mask), answer_key), rng.randrange(2**160))
            assert circuit.is_satisfied(w)
            assert st.result == oracles.score_by_counting(mask, answer_key.packed)
            assert st.commitment.value == oracles.mimc_compress(answer_key.packed,
                                                                answer_key.blind.value)

    def test_tampered_result_rejected(self, circuit, answer_key):
        for mask in (0, 341, 1023):
            w, st = synthesize_witness(QuizSecrets(AnswerVector.from_int(mask), answer_key), 7)
            bad = w.replace(RESULT_WIRE, (st.result + 1) % 4)
            assert not circuit.is_satisfied(bad)

    def test_forced_result_soundness(self, circuit, answer_key):
        rng = random.Random(4)
        for _ in range(200):
            mask = rng.randrange(1024)
            truth = score_plain(AnswerVector.from_int(mask), answer_key.bits)
            claimed = rng.choice([r for r in range(4) if r != truth])
            w, _ = synthesize_witness(QuizSecrets(AnswerVector.from_int(mask), answer_key), 1)
            assert not circuit.is_satisfied(w.replace(RESULT_WIRE, claimed))

    def test_commitment_binding(self, circuit, answer_key):
        commitment_constraint = len(circuit.constraints) - 2
        honest = answer_key.commitment()
        for other in range(1024):
            if other == answer_key.packed:
                continue
            key2 = AnswerKey(bits_of(other), answer_key.blind)
            w, _ = synthesize_witness(QuizSecrets(AnswerVector.from_int(0), key2), 1)
            report = circuit.is_satisfied(w.replace(COMMITMENT_WIRE, honest.value))
            assert not report
            assert report.first_violation == commitment_constraint

    def test_nonboolean_answer_rejected(self, circuit, answer_key):
        w, _ = synthesize_witness(QuizSecrets(AnswerVector.from_int(0), answer_key), 1)
        first_answer_wire = 4
        assert not circuit.is_satisfied(w.replace(first_answer_wire, 2))

    def test_recipient_is_constrained(self, circuit):
        assert any(RECIPIENT_WIRE in dict(c.a.terms) for c in circuit.constraints)

    def test_in_circuit_commitment_equals_commit(self, answer_key):
        rng = random.Random(5)
        for _ in range(10):
            key = AnswerKey(bits_of(rng.randrange(1024)), Scalar.random(rng, nonzero=True))
            w, st = synthesize_witness(QuizSecrets(AnswerVector.from_int(0), key), 1)
            assert w[COMMITMENT_WIRE] == commit(key.packed, key.blind).value

    def test_rejects_malformed_secrets(self):
        with pytest.raises(QuizInputError):
            synthesize_witness(QuizSecrets((0,) * 10, None), 1)

    def test_recipient_string(self, answer_key):
        _, st = synthesize_witness(QuizSecrets(AnswerVector.from_int(0), answer_key),
                                   "0x" + "00" * 19 + "2a")
        assert st.recipient == 42
        assert st.recipient.value < R

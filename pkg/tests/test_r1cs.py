import random

import pytest

from oracles import R
from zkquiz.quiz import build_circuit
from zkquiz.r1cs import LC, Assignment, ConstraintSystem, R1CSError, is_satisfied, lc_eval


def booleanity_system():
    cs = ConstraintSystem()
    x = cs.alloc_private()
    cs.enforce(LC.var(x), LC.var(x), LC.var(x))
    return cs.freeze()


def test_first_public_is_one():
    assert ConstraintSystem().alloc_public() == 1


def test_private_allocations_are_consecutive():
    cs = ConstraintSystem()
    cs.alloc_public()
    a, b = cs.alloc_private(), cs.alloc_private()
    assert (a, b) == (2, 3)
    assert cs.num_wires == 4


def test_enforce_adds_one_constraint():
    cs = ConstraintSystem()
    x = cs.alloc_private()
    cs.enforce(LC.var(x), LC.var(x), LC.var(x))
    assert len(cs.constraints) == 1


def test_public_after_private_rejected():
    cs = ConstraintSystem()
    cs.alloc_private()
    with pytest.raises(R1CSError):
        cs.alloc_public()


def test_frozen_system_rejects_changes():
    cs = booleanity_system()
    with pytest.raises(R1CSError):
        cs.alloc_private()
    with pytest.raises(R1CSError):
        cs.enforce(LC(), LC(), LC())


def test_unallocated_index_rejected():
    cs = ConstraintSystem()
    with pytest.raises(R1CSError):
        cs.enforce(LC.var(3), LC.const(1), LC())


class TestLinearCombination:
    def test_merges_and_drops_zeros(self):
        lc = LC([(2, 3), (1, 4), (2, -3), (5, 0)])
        assert lc.terms == ((1, 4),)

    def test_arithmetic(self):
        lc = LC.var(1, 2) + LC.var(2) - 1
        assert lc.terms == ((0, R - 1), (1, 2), (2, 1))
        assert (lc * 3).terms == ((0, R - 3), (1, 6), (2, 3))
        assert (lc - lc).terms == ()

    def test_eval_examples(self):
        w = Assignment((1, 10, 100))
        assert lc_eval(LC(), w) == 0
        assert lc_eval(LC([(0, 5)]), w) == 5
        assert lc_eval(LC([(1, 2), (2, 3)]), w) == 320

    def test_eval_out_of_range(self):
        with pytest.raises(R1CSError):
            lc_eval(LC.var(3), Assignment((1, 2)))


class TestSatisfaction:
    def test_empty_system(self):
        assert is_satisfied(ConstraintSystem().freeze(), Assignment((1,)))

    @pytest.mark.parametrize("x,ok", [(0, True), (1, True), (2, False)])
    def test_booleanity(self, x, ok):
        report = is_satisfied(booleanity_system(), Assignment((1, x)))
        assert report.satisfied is ok
        if not ok:
            assert report.first_violation == 0
            assert report.values == (2, 2, 2)

    def test_product(self):
        cs = ConstraintSystem()
        a, b, c = cs.alloc_private(), cs.alloc_private(), cs.alloc_private()
        cs.enforce(LC.var(a), LC.var(b), LC.var(c))
        cs.freeze()
        assert is_satisfied(cs, Assignment((1, 3, 4, 12)))
        assert not is_satisfied(cs, Assignment((1, 3, 4, 13)))

    def test_length_mismatch(self):
        with pytest.raises(R1CSError):
            is_satisfied(booleanity_system(), Assignment((1, 0, 0)))

    def test_wire_zero_is_one(self):
        with pytest.raises(R1CSError):
            Assignment((0, 1))

    def test_report_consistent_with_lc_eval(self, circuit, answer_key):
        from zkquiz.quiz import AnswerVector, QuizSecrets, synthesize_witness

        rng = random.Random(9)
        for _ in range(5):
            w, _ = synthesize_witness(
                QuizSecrets(AnswerVector.from_int(rng.randrange(1024)), answer_key), 1)
            if rng.random() < 0.5:
                w = w.replace(rng.randrange(1, len(w)), rng.randrange(R))
            report = is_satisfied(circuit, w)
            violations = [
                j for j, con in enumerate(circuit.constraints)
                if (int(lc_eval(con.a, w)) * int(lc_eval(con.b, w)) - int(lc_eval(con.c, w))) % R
            ]
            assert report.satisfied == (not violations)
            if violations:
                assert report.first_violation == violations[0]


class TestSerialization:
    def test_rebuild_is_byte_identical(self):
        from zkquiz.mimc import derive_params
        from zkquiz.quiz import _synthesize

        a = _synthesize(derive_params()).serialize()
        b = _synthesize(derive_params()).serialize()
        assert a == b
        assert a[:4] == b"R1CS"

    def test_round_trip(self, circuit):
        data = circuit.serialize()
        again = ConstraintSystem.deserialize(data)
        assert again.serialize() == data
        assert again.digest() == circuit.digest()

    def test_rejects_garbage(self):
        with pytest.raises(R1CSError):
            ConstraintSystem.deserialize(b"XXXX" + bytes(16))
        data = booleanity_system().serialize()
        with pytest.raises(R1CSError):
            ConstraintSystem.deserialize(data + b"\x00")

    def test_cached_circuit_matches_fresh_build(self, circuit):
        assert build_circuit().digest() == circuit.digest()

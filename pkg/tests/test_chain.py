import json
import random

import pytest

from conftest import random_address
from zkquiz.chain import (
    ChainError,
    Contract,
    Rejection,
    append_tx_log,
    deploy,
    mint_tx,
    normalize_address,
    read_tx_log,
    replay,
    transfer_tx,
)
from zkquiz.curve import G1Point, G2Point
from zkquiz.groth16 import Proof, setup
from zkquiz.r1cs import LC, ConstraintSystem


@pytest.fixture()
def contract(keys, answer_key):
    _, vk = keys
    return deploy(vk, answer_key.commitment())


def test_deploy_rejects_foreign_key(answer_key):
    cs = ConstraintSystem()
    x = cs.alloc_private()
    cs.enforce(LC.var(x), LC.var(x), LC.var(x))
    _, vk = setup(cs.freeze(), random.Random(0))
    with pytest.raises(ChainError):
        deploy(vk, answer_key.commitment())


def test_fresh_contract_is_empty(contract):
    assert contract.total_supply() == 0
    assert contract.token_of("0x" + "11" * 20) is None


def test_mint_records_result(contract, make_proof):
    addr = "0x" + "ab" * 20
    st, proof = make_proof(0b1010101010, addr)
    receipt = contract.mint(addr, st.result, proof)
    assert receipt.ok and receipt.token_id == 1 and receipt.code == "ok"
    token = contract.token_of(addr.upper().replace("0X", "0x"))
    assert token.result == st.result and token.owner == normalize_address(addr)
    assert contract.total_supply() == 1


def test_second_mint_rejected(contract, make_proof):
    addr = "0x" + "cd" * 20
    st, proof = make_proof(17, addr)
    assert contract.mint(addr, st.result, proof).ok
    again = contract.mint(addr, st.result, proof)
    assert again.rejection is Rejection.ALREADY_MINTED
    st2, proof2 = make_proof(900, addr)
    assert contract.mint(addr, st2.result, proof2).rejection is Rejection.ALREADY_MINTED
    assert contract.total_supply() == 1


def test_proof_for_other_recipient(contract, make_proof):
    rng = random.Random(30)
    a, b = random_address(rng), random_address(rng)
    st, proof = make_proof(5, a)
    assert contract.mint(b, st.result, proof).rejection is Rejection.INVALID_PROOF
    assert contract.token_of(b) is None
    assert contract.mint(a, st.result, proof).ok


def test_wrong_result_claimed(contract, make_proof):
    addr = "0x" + "01" * 20
    st, proof = make_proof(0, addr)
    wrong = (st.result + 1) % 4
    assert contract.mint(addr, wrong, proof).rejection is Rejection.INVALID_PROOF


@pytest.mark.parametrize("result", [4, -1, 2**70, True, "1"])
def test_result_out_of_range(contract, make_proof, result):
    addr = "0x" + "02" * 20
    _, proof = make_proof(0, addr)
    assert contract.mint(addr, result, proof).rejection is Rejection.RESULT_OUT_OF_RANGE


def test_garbage_proof(contract):
    g = G1Point.generator()
    bogus = Proof(g, G2Point.generator(), g)
    assert contract.mint("0x" + "03" * 20, 0, bogus).rejection is Rejection.INVALID_PROOF
    tx = {"op": "mint", "caller": "0x" + "03" * 20, "result": 0, "proof": {"a": "zz"}}
    assert contract.apply(tx).rejection is Rejection.INVALID_PROOF


def test_transfers_always_soulbound(contract, make_proof):
    addr = "0x" + "04" * 20
    st, proof = make_proof(1, addr)
    token_id = contract.mint(addr, st.result, proof).token_id
    before = contract.to_bytes()
    for tid in (token_id, 999, 0):
        assert contract.transfer(addr, "0x" + "05" * 20, tid).rejection is Rejection.SOULBOUND
        assert contract.apply(transfer_tx(addr, addr, tid)).rejection is Rejection.SOULBOUND
    assert contract.to_bytes() == before
    assert contract.token_of(addr).token_id == token_id


def test_rejections_leave_state_byte_identical(contract, make_proof, tmp_path):
    addr = "0x" + "06" * 20
    st, proof = make_proof(2, addr)
    contract.mint(addr, st.result, proof)
    path = tmp_path / "state.json"
    contract.save(path)
    before = path.read_bytes()
    contract.mint(addr, st.result, proof)
    contract.mint("0x" + "07" * 20, st.result, proof)
    contract.mint(addr, 9, proof)
    contract.transfer(addr, "0x" + "07" * 20, 1)
    contract.save(path)
    assert path.read_bytes() == before


def test_unknown_op(contract):
    with pytest.raises(ChainError):
        contract.apply({"op": "burn"})


class TestPersistence:
    def test_round_trip(self, contract, make_proof, tmp_path):
        addr = "0x" + "08" * 20
        st, proof = make_proof(3, addr)
        contract.mint(addr, st.result, proof)
        path = tmp_path / "s.json"
        contract.save(path)
        loaded = Contract.load(path)
        assert loaded.to_bytes() == contract.to_bytes()
        assert loaded.token_of(addr) == contract.token_of(addr)
        assert loaded.mint(addr, st.result, proof).rejection is Rejection.ALREADY_MINTED

    def test_truncated_file(self, contract, tmp_path):
        path = tmp_path / "s.json"
        contract.save(path)
        path.write_bytes(path.read_bytes()[:-40])
        with pytest.raises(ChainError):
            Contract.load(path)

    def test_edited_file_fails_checksum(self, contract, tmp_path):
        path = tmp_path / "s.json"
        contract.save(path)
        body = json.loads(path.read_text())
        body["next_token_id"] = 50
        path.write_text(json.dumps(body))
        with pytest.raises(ChainError, match="checksum"):
            Contract.load(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ChainError):
            Contract.load(tmp_path / "nope.json")

    def test_serialization_deterministic(self, contract):
        assert contract.to_bytes() == contract.to_bytes()
        assert contract.state_digest() == contract.state_digest()


def test_log_replay_reproduces_state(keys, answer_key, make_proof, tmp_path):
    _, vk = keys
    rng = random.Random(31)
    live = deploy(vk, answer_key.commitment())
    log = tmp_path / "tx.jsonl"
    addrs = [random_address(rng) for _ in range(8)]
    for i in range(20):
        addr = rng.choice(addrs)
        if i % 5 == 4:
            tx = transfer_tx(addr, rng.choice(addrs), rng.randrange(1, 5))
        else:
            st, proof = make_proof(rng.randrange(1024), addr)
            claimed = st.result if rng.random() < 0.8 else (st.result + 1) % 4
            tx = mint_tx(addr, claimed, proof)
        append_tx_log(log, tx, live.apply(tx))
    txs = read_tx_log(log)
    assert len(txs) == 20
    again = replay(vk, answer_key.commitment(), txs)
    assert again.to_bytes() == live.to_bytes()
    assert live.total_supply() > 0


def test_bad_log_line(tmp_path):
    log = tmp_path / "tx.jsonl"
    log.write_text('{"op": "mint"\n')
    with pytest.raises(ChainError):
        read_tx_log(log)


def test_normalize_address():
    assert normalize_address("0X" + "AB" * 20) == "0x" + "ab" * 20
    assert normalize_address(b"\x01" * 20) == "0x" + "01" * 20
    with pytest.raises(ValueError):
        normalize_address("0x1234")
    with pytest.raises(ValueError):
        normalize_address("0x" + "gg" * 20)

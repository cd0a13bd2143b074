import random

import pytest

from zkquiz.curve import Scalar
from zkquiz.groth16 import prove, setup
from zkquiz.qap import r1cs_to_qap
from zkquiz.quiz import AnswerKey, AnswerVector, QuizSecrets, build_circuit, synthesize_witness


@pytest.fixture(scope="session")
def circuit():
    return build_circuit()


@pytest.fixture(scope="session")
def qap(circuit):
    return r1cs_to_qap(circuit)


@pytest.fixture(scope="session")
def keys(circuit, qap):
    return setup(circuit, random.Random(2024), qap)


@pytest.fixture(scope="session")
def answer_key():
    rng = random.Random(77)
    return AnswerKey(tuple(rng.randrange(2) for _ in range(10)), Scalar.random(rng, nonzero=True))


def random_address(rng):
    return "0x" + bytes(rng.randrange(256) for _ in range(20)).hex()


@pytest.fixture(scope="session")
def make_proof(keys, qap, answer_key):
    pk, _ = keys

    def _make(answers_mask, recipient, key=None):
        secrets = QuizSecrets(AnswerVector.from_int(answers_mask), key or answer_key)
        witness, statement = synthesize_witness(secrets, recipient)
        return statement, prove(pk, qap, witness)

    return _make


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory, keys, circuit, answer_key):
    """Key material on disk, laid out the way ``zkquiz setup`` writes it."""
    from zkquiz.files import PublicParams, save_key, save_public_params, save_secret_key

    pk, vk = keys
    root = tmp_path_factory.mktemp("artifacts")
    save_secret_key(root / "answer_key.json", answer_key)
    save_key(root / "proving_key.bin", pk)
    save_key(root / "verifying_key.bin", vk)
    save_public_params(root / "public_params.json",
                       PublicParams(answer_key.commitment(), vk.digest().hex(),
                                    circuit.digest().hex()))
    return root

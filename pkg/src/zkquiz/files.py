"""On-disk artifacts: secret key, public params, key files and proof files.

Every writer goes through :func:`atomic_write` (temp file + rename) so a
crash never leaves a half-written artifact behind.
"""

from __future__ import annotations

import json
import logging
import os
import stat
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .constants import CURVE_NAME, GROUPS, QUESTION_COUNT, SCHEMA_VERSION, THRESHOLD
from .curve import DeserializationError, Scalar
from .groth16 import KeyFileError, Proof, ProvingKey, VerifyingKey
from .mimc import derive_params
from .quiz import AnswerKey, QuizInputError, QuizStatement

log = logging.getLogger(__name__)


class ArtifactError(ValueError):
    """A file is missing, corrupt or inconsistent with this build."""


def atomic_write(path, data: bytes | str, mode: int = 0o644, overwrite: bool = True) -> None:
    path = Path(path)
    if not overwrite and path.exists():
        raise FileExistsError(f"{path} already exists")
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        os.fchmod(fd, mode)
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _read_json(path) -> dict:
    try:
        obj = json.loads(Path(path).read_text("utf-8"))
    except FileNotFoundError:
        raise ArtifactError(f"{path}: no such file") from None
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"{path}: unreadable JSON ({exc})") from None
    if not isinstance(obj, dict):
        raise ArtifactError(f"{path}: expected a JSON object")
    return obj


def params_digest_hex() -> str:
    return derive_params().digest().hex()


# -- secret answer key --


def save_secret_key(path, key: AnswerKey, overwrite: bool = False) -> None:
    body = {
        "schema_version": SCHEMA_VERSION,
        "key_bits": list(key.bits),
        "blind": key.blind.hex(),
        "mimc_params_digest": params_digest_hex(),
    }
    atomic_write(path, dump_json(body), mode=0o600, overwrite=overwrite)


def load_secret_key(path, require_private: bool = False) -> AnswerKey:
    path = Path(path)
    if require_private and path.exists():
        mode = path.stat().st_mode
        if mode & stat.S_IRWXO:
            log.warning("%s is accessible by other users; refusing to load it", path)
            raise ArtifactError(f"{path}: secret key file is world-accessible; chmod 600 it")
        if mode & stat.S_IRWXG:
            log.warning("%s is group-accessible; consider chmod 600", path)
    obj = _read_json(path)
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise ArtifactError(f"{path}: unsupported schema_version {obj.get('schema_version')!r}")
    if obj.get("mimc_params_digest") != params_digest_hex():
        raise ArtifactError(f"{path}: hash parameter digest does not match this build")
    try:
        return AnswerKey(tuple(obj["key_bits"]), Scalar.from_hex(obj["blind"]))
    except (KeyError, TypeError, ValueError, QuizInputError) as exc:
        raise ArtifactError(f"{path}: malformed secret key ({exc})") from None


# -- public params --


@dataclass(frozen=True)
class PublicParams:
    commitment: Scalar
    verifying_key_digest: str
    circuit_digest: str

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "curve": CURVE_NAME,
            "commitment": self.commitment.hex(),
            "verifying_key_digest": self.verifying_key_digest,
            "circuit_digest": self.circuit_digest,
            "mimc_params_digest": params_digest_hex(),
            "question_count": QUESTION_COUNT,
            "group_spec": [g for i in range(QUESTION_COUNT)
                           for g, members in enumerate(GROUPS) if i in members],
            "threshold": THRESHOLD,
        }


def save_public_params(path, params: PublicParams, overwrite: bool = True) -> None:
    atomic_write(path, dump_json(params.to_json()), overwrite=overwrite)


def load_public_params(path) -> PublicParams:
    obj = _read_json(path)
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise ArtifactError(f"{path}: unsupported schema_version")
    if obj.get("question_count") != QUESTION_COUNT or obj.get("threshold") != THRESHOLD:
        raise ArtifactError(f"{path}: questionnaire shape does not match this build")
    if obj.get("mimc_params_digest") != params_digest_hex():
        raise ArtifactError(f"{path}: hash parameter digest does not match this build")
    try:
        return PublicParams(
            commitment=Scalar.from_hex(obj["commitment"]),
            verifying_key_digest=str(obj["verifying_key_digest"]),
            circuit_digest=str(obj["circuit_digest"]),
        )
    except (KeyError, ValueError) as exc:
        raise ArtifactError(f"{path}: malformed public params ({exc})") from None


# -- Groth16 key files --


def save_key(path, key: ProvingKey | VerifyingKey, overwrite: bool = True) -> None:
    atomic_write(path, key.to_bytes(), overwrite=overwrite)


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ArtifactError(f"{path}: {exc.strerror or exc}") from None


def load_verifying_key(path, expected_digest: bytes | None = None) -> VerifyingKey:
    try:
        return VerifyingKey.from_bytes(_read_bytes(path), expected_digest)
    except (KeyFileError, DeserializationError) as exc:
        raise ArtifactError(f"{path}: {exc}") from None


def load_proving_key(path, expected_digest: bytes | None = None) -> ProvingKey:
    try:
        return ProvingKey.from_bytes(_read_bytes(path), expected_digest)
    except (KeyFileError, DeserializationError) as exc:
        raise ArtifactError(f"{path}: {exc}") from None


# -- proof files / API payloads --


@dataclass(frozen=True)
class ProofBundle:
    """A proof together with the public inputs it claims.

    The result is kept as a raw integer: range checking is the verifier's
    and the contract's job, not the parser's.
    """

    result: int
    commitment: Scalar
    recipient: Scalar
    proof: Proof

    @classmethod
    def from_statement(cls, statement: QuizStatement, proof: Proof) -> ProofBundle:
        return cls(statement.result, statement.commitment, statement.recipient, proof)

    def public_inputs(self) -> list[Scalar]:
        return [Scalar(self.result), self.commitment, self.recipient]

    def to_json(self) -> dict:
        return {
            "result": self.result,
            "proof": self.proof.to_json(),
            "public_inputs": [x.hex() for x in self.public_inputs()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> ProofBundle:
        try:
            inputs = obj["public_inputs"]
            if not isinstance(inputs, list) or len(inputs) != 3:
                raise ValueError("public_inputs must list result, commitment, recipient")
            result, commitment, recipient = (Scalar.from_hex(x) for x in inputs)
            claimed = obj["result"]
            if isinstance(claimed, bool) or not isinstance(claimed, int) or claimed != int(result):
                raise ValueError("result field disagrees with public_inputs[0]")
            return cls(claimed, commitment, recipient, Proof.from_json(obj["proof"]))
        except DeserializationError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ArtifactError(f"malformed proof bundle: {exc}") from None


def save_proof(path, bundle: ProofBundle) -> None:
    atomic_write(path, dump_json(bundle.to_json()))


def load_proof(path) -> ProofBundle:
    obj = _read_json(path)
    try:
        return ProofBundle.from_json(obj)
    except ArtifactError as exc:
        raise ArtifactError(f"{path}: {exc}") from None


def recipient_hex(recipient: Scalar) -> str:
    return "0x" + int(recipient).to_bytes(20, "big").hex()


__all__ = [
    "ArtifactError",
    "ProofBundle",
    "PublicParams",
    "atomic_write",
    "load_proof",
    "load_proving_key",
    "load_public_params",
    "load_secret_key",
    "load_verifying_key",
    "save_key",
    "save_proof",
    "save_public_params",
    "save_secret_key",
]

"""Simulated attestation contract with a soulbound token registry.

The contract pins the answer-key commitment and a verifying key at
deployment. ``mint`` is the only mutation path and requires a proof that
verifies against (result, commitment, caller). Tokens can never be
transferred.

State persists as a checksummed JSON file; every submitted transaction is
also representable as a JSON object so a log of them can be replayed.
"""

from __future__ import annotations

import enum
import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .constants import ADDRESS_BYTES, SCHEMA_VERSION
from .curve import DeserializationError, Scalar
from .files import atomic_write
from .groth16 import KeyFileError, Proof, VerifyingKey, verify
from .quiz import build_circuit

RESULT_RANGE = range(4)


class ChainError(Exception):
    """Deployment failure or unusable state file."""


class Rejection(str, enum.Enum):
    INVALID_PROOF = "InvalidProof"
    ALREADY_MINTED = "AlreadyMinted"
    RESULT_OUT_OF_RANGE = "ResultOutOfRange"
    SOULBOUND = "Soulbound"


@dataclass(frozen=True)
class TxReceipt:
    ok: bool
    token_id: int | None = None
    rejection: Rejection | None = None

    @property
    def code(self) -> str:
        return "ok" if self.ok else self.rejection.value


@dataclass(frozen=True)
class TokenRecord:
    token_id: int
    owner: str
    result: int
    minted_at: int

    def to_json(self) -> dict:
        return {"token_id": self.token_id, "owner": self.owner,
                "result": self.result, "minted_at": self.minted_at}


def normalize_address(address: str | bytes) -> str:
    """Canonical lowercase 0x-prefixed rendering of a 20-byte address."""
    if isinstance(address, bytes):
        raw = address
    else:
        text = address[2:] if address[:2].lower() == "0x" else address
        try:
            raw = bytes.fromhex(text)
        except ValueError:
            raise ValueError(f"address is not hex: {address!r}") from None
    if len(raw) != ADDRESS_BYTES:
        raise ValueError(f"address must be {ADDRESS_BYTES} bytes, got {len(raw)}")
    return "0x" + raw.hex()


def address_scalar(address: str) -> Scalar:
    return Scalar(int(normalize_address(address), 16))


def _canonical(body: dict) -> bytes:
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")


class Contract:
    """One deployed instance. Mutations are serialized through a lock."""

    def __init__(self, vk: VerifyingKey, commitment: Scalar):
        self.vk = vk
        self.commitment = Scalar(commitment)
        self.verifying_key_digest = vk.digest().hex()
        self._registry: dict[str, TokenRecord] = {}
        self.next_token_id = 1
        self.tx_count = 0
        self._lock = threading.Lock()

    # -- reads --

    def token_of(self, owner: str) -> TokenRecord | None:
        return self._registry.get(normalize_address(owner))

    def total_supply(self) -> int:
        return len(self._registry)

    def tokens(self) -> list[TokenRecord]:
        return sorted(self._registry.values(), key=lambda t: t.token_id)

    # -- transactions --

    def mint(self, caller: str, result: int, proof: Proof) -> TxReceipt:
        caller = normalize_address(caller)
        with self._lock:
            if isinstance(result, bool) or not isinstance(result, int) or result not in RESULT_RANGE:
                return TxReceipt(False, rejection=Rejection.RESULT_OUT_OF_RANGE)
            if caller in self._registry:
                return TxReceipt(False, rejection=Rejection.ALREADY_MINTED)
            inputs = [Scalar(result), self.commitment, address_scalar(caller)]
            if not verify(self.vk, inputs, proof):
                return TxReceipt(False, rejection=Rejection.INVALID_PROOF)
            self.tx_count += 1
            record = TokenRecord(self.next_token_id, caller, result, self.tx_count)
            self._registry[caller] = record
            self.next_token_id += 1
            return TxReceipt(True, token_id=record.token_id)

    def transfer(self, sender: str, to: str, token_id: int) -> TxReceipt:
        return TxReceipt(False, rejection=Rejection.SOULBOUND)

    def apply(self, tx: dict) -> TxReceipt:
        """Execute a transaction in its logged JSON form."""
        op = tx.get("op")
        if op == "mint":
            try:
                proof = Proof.from_json(tx["proof"])
            except (DeserializationError, KeyError, TypeError):
                return TxReceipt(False, rejection=Rejection.INVALID_PROOF)
            return self.mint(tx["caller"], tx["result"], proof)
        if op == "transfer":
            return self.transfer(tx["from"], tx["to"], tx["token_id"])
        raise ChainError(f"unknown transaction op {op!r}")

    # -- persistence --

    def _body(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "deploy": {
                "commitment": self.commitment.hex(),
                "verifying_key_digest": self.verifying_key_digest,
                "verifying_key": "0x" + self.vk.to_bytes().hex(),
            },
            "registry": [t.to_json() for t in self.tokens()],
            "next_token_id": self.next_token_id,
            "tx_count": self.tx_count,
        }

    def to_bytes(self) -> bytes:
        body = self._body()
        body["checksum"] = hashlib.sha256(_canonical(self._body())).hexdigest()
        return (json.dumps(body, indent=2, sort_keys=True) + "\n").encode("utf-8")

    def state_digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()

    def save(self, path) -> None:
        with self._lock:
            atomic_write(path, self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> Contract:
        try:
            body = json.loads(data.decode("utf-8"))
            checksum = body.pop("checksum")
        except (UnicodeDecodeError, json.JSONDecodeError, AttributeError, KeyError) as exc:
            raise ChainError(f"state file unreadable: {exc}") from None
        if hashlib.sha256(_canonical(body)).hexdigest() != checksum:
            raise ChainError("state file checksum mismatch")
        if body.get("schema_version") != SCHEMA_VERSION:
            raise ChainError(f"unsupported state schema {body.get('schema_version')!r}")
        try:
            deploy_params = body["deploy"]
            vk = VerifyingKey.from_bytes(bytes.fromhex(deploy_params["verifying_key"][2:]))
            contract = cls(vk, Scalar.from_hex(deploy_params["commitment"]))
            if contract.verifying_key_digest != deploy_params["verifying_key_digest"]:
                raise ChainError("verifying key digest mismatch")
            for rec in body["registry"]:
                token = TokenRecord(int(rec["token_id"]), normalize_address(rec["owner"]),
                                    int(rec["result"]), int(rec["minted_at"]))
                if token.owner in contract._registry:
                    raise ChainError(f"duplicate owner {token.owner}")
                contract._registry[token.owner] = token
            contract.next_token_id = int(body["next_token_id"])
            contract.tx_count = int(body["tx_count"])
        except (KeyError, TypeError, ValueError, KeyFileError, DeserializationError) as exc:
            raise ChainError(f"state file malformed: {exc}") from None
        return contract

    @classmethod
    def load(cls, path) -> Contract:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise ChainError(f"{path}: {exc.strerror or exc}") from None
        return cls.from_bytes(data)


def deploy(vk: VerifyingKey, commitment: Scalar, expected_circuit_digest: bytes | None = None
           ) -> Contract:
    expected = expected_circuit_digest or build_circuit().digest()
    if vk.circuit_digest != expected:
        raise ChainError("verifying key was not generated for the quiz circuit")
    return Contract(vk, commitment)


def replay(vk: VerifyingKey, commitment: Scalar, txs: Iterable[dict],
           expected_circuit_digest: bytes | None = None) -> Contract:
    contract = deploy(vk, commitment, expected_circuit_digest)
    for tx in txs:
        contract.apply(tx)
    return contract


def mint_tx(caller: str, result: int, proof: Proof) -> dict:
    return {"op": "mint", "caller": normalize_address(caller), "result": result,
            "proof": proof.to_json()}


def transfer_tx(sender: str, to: str, token_id: int) -> dict:
    return {"op": "transfer", "from": normalize_address(sender), "to": normalize_address(to),
            "token_id": token_id}


def append_tx_log(path, tx: dict, receipt: TxReceipt) -> None:
    line = json.dumps({**tx, "receipt": receipt.code}, sort_keys=True, separators=(",", ":"))
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(line + "\n")


def read_tx_log(path) -> list[dict]:
    txs = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                tx = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ChainError(f"{path}:{n}: bad log line ({exc})") from None
            tx.pop("receipt", None)
            txs.append(tx)
    return txs

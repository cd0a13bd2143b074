"""Command-line entry point.

Exit codes: 0 ok, 2 usage/config, 3 service rejection, 4 invalid proof,
5 already minted, 6 result out of range.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import secrets
import socket
import sys
import tempfile
import threading
import time
from pathlib import Path

from . import chain
from .constants import QUESTION_COUNT
from .curve import DeserializationError, Scalar
from .files import (
    ArtifactError,
    ProofBundle,
    PublicParams,
    atomic_write,
    dump_json,
    load_proof,
    load_public_params,
    load_secret_key,
    load_verifying_key,
    save_key,
    save_proof,
    save_public_params,
    save_secret_key,
)
from .groth16 import setup as groth16_setup
from .groth16 import verify as groth16_verify
from .quiz import AnswerKey, build_circuit

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SERVICE = 3
EXIT_INVALID_PROOF = 4
EXIT_ALREADY_MINTED = 5
EXIT_RESULT_RANGE = 6

REJECTION_EXIT = {
    chain.Rejection.INVALID_PROOF: EXIT_INVALID_PROOF,
    chain.Rejection.ALREADY_MINTED: EXIT_ALREADY_MINTED,
    chain.Rejection.RESULT_OUT_OF_RANGE: EXIT_RESULT_RANGE,
    chain.Rejection.SOULBOUND: EXIT_USAGE,
}

PROVING_KEY_FILE = "proving_key.bin"
VERIFYING_KEY_FILE = "verifying_key.bin"
PUBLIC_PARAMS_FILE = "public_params.json"

log = logging.getLogger("zkquiz")


class CommandError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


# -- keygen / setup --


def cmd_keygen(args) -> int:
    out = Path(args.out)
    if out.exists() and not args.force:
        raise CommandError(f"{out} exists; pass --force to overwrite")
    if args.seed is not None:
        try:
            rng = random.Random(int(args.seed, 16))
        except ValueError:
            raise CommandError("--seed must be hex") from None
    else:
        rng = secrets.SystemRandom()
    bits = tuple(rng.randrange(2) for _ in range(QUESTION_COUNT))
    key = AnswerKey(bits, Scalar.random(rng, nonzero=True))
    try:
        save_secret_key(out, key, overwrite=True)
    except OSError as exc:
        raise CommandError(f"cannot write {out}: {exc.strerror or exc}") from None
    print(f"secret key written to {out}")
    return EXIT_OK


def cmd_setup(args) -> int:
    out_dir = Path(args.out_dir)
    key = load_secret_key(args.secret)
    targets = [out_dir / n for n in (PROVING_KEY_FILE, VERIFYING_KEY_FILE, PUBLIC_PARAMS_FILE)]
    existing = [str(p) for p in targets if p.exists()]
    if existing and not args.force:
        raise CommandError(f"refusing to overwrite {', '.join(existing)}; pass --force")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CommandError(f"cannot create {out_dir}: {exc.strerror or exc}") from None
    cs = build_circuit()
    pk, vk = groth16_setup(cs)
    commitment = key.commitment()
    params = PublicParams(commitment, vk.digest().hex(), cs.digest().hex())
    try:
        save_key(targets[0], pk)
        save_key(targets[1], vk)
        save_public_params(targets[2], params)
    except OSError as exc:
        raise CommandError(f"cannot write setup artifacts: {exc.strerror or exc}") from None
    print(f"circuit: {cs.num_public} public, {cs.num_private} private wires, "
          f"{len(cs.constraints)} constraints")
    print(f"commitment: {commitment.hex()}")
    print(f"verifying key digest: {params.verifying_key_digest}")
    return EXIT_OK


# -- serve / evaluate --


def cmd_serve(args) -> int:
    from .service import load_config, serve

    config = load_config(args.config)
    return serve(config)


def _parse_answers(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise CommandError("--answers must be comma-separated integers") from None


def cmd_evaluate(args) -> int:
    import httpx

    answers = _parse_answers(args.answers)
    url = args.service.rstrip("/") + "/evaluate"
    try:
        resp = httpx.post(url, json={"answers": answers, "recipient": args.recipient},
                          timeout=args.timeout)
    except httpx.HTTPError as exc:
        raise CommandError(f"service unreachable: {exc}", EXIT_SERVICE) from None
    try:
        body = resp.json()
    except ValueError:
        body = {}
    if resp.status_code != 200:
        code = body.get("error", f"http_{resp.status_code}") if isinstance(body, dict) else ""
        message = body.get("message", "") if isinstance(body, dict) else ""
        raise CommandError(f"service rejected the request: {code} {message}".rstrip(),
                           EXIT_SERVICE)
    bundle = ProofBundle.from_json(body)
    save_proof(args.out, bundle)
    print(f"result: {bundle.result}")
    print(f"proof written to {args.out}")
    return EXIT_OK


# -- chain side --


def _log_path(args) -> Path:
    return Path(args.log) if args.log else Path(str(args.state) + ".txlog.jsonl")


def _load_or_deploy(args) -> chain.Contract:
    state = Path(args.state)
    if state.exists():
        if args.deploy:
            raise CommandError(f"{state} already exists; drop --deploy")
        return chain.Contract.load(state)
    if not args.deploy:
        raise CommandError(f"{state} does not exist; pass --deploy --vk --params to create it")
    if not args.vk or not args.params:
        raise CommandError("--deploy needs --vk and --params")
    vk = load_verifying_key(args.vk)
    params = load_public_params(args.params)
    if vk.digest().hex() != params.verifying_key_digest:
        raise CommandError("verifying key does not match the public params")
    contract = chain.deploy(vk, params.commitment)
    contract.save(state)
    print(f"deployed contract state to {state}")
    return contract


def cmd_mint(args) -> int:
    caller = _address(args.caller)
    contract = _load_or_deploy(args)
    try:
        bundle = load_proof(args.proof)
        tx = chain.mint_tx(caller, bundle.result, bundle.proof)
    except DeserializationError as exc:
        _err(f"invalid proof encoding ({exc})")
        chain.append_tx_log(_log_path(args), {"op": "mint", "caller": caller, "result": None,
                                             "proof": None},
                            chain.TxReceipt(False, rejection=chain.Rejection.INVALID_PROOF))
        print(chain.Rejection.INVALID_PROOF.value)
        return EXIT_INVALID_PROOF
    receipt = contract.apply(tx)
    chain.append_tx_log(_log_path(args), tx, receipt)
    if receipt.ok:
        contract.save(args.state)
        print(f"minted token {receipt.token_id} to {caller} (result {bundle.result})")
        return EXIT_OK
    print(receipt.code)
    return REJECTION_EXIT[receipt.rejection]


def cmd_transfer(args) -> int:
    contract = chain.Contract.load(args.state)
    tx = chain.transfer_tx(_address(args.sender), _address(args.to), args.token_id)
    receipt = contract.apply(tx)
    chain.append_tx_log(_log_path(args), tx, receipt)
    print(receipt.code)
    return EXIT_OK if receipt.ok else EXIT_USAGE


def cmd_verify(args) -> int:
    vk = load_verifying_key(args.vk, build_circuit().digest())
    try:
        bundle = load_proof(args.proof)
    except DeserializationError:
        print("false")
        return EXIT_INVALID_PROOF
    ok = groth16_verify(vk, bundle.public_inputs(), bundle.proof)
    print("true" if ok else "false")
    return EXIT_OK if ok else EXIT_INVALID_PROOF


def _format_record(t: chain.TokenRecord) -> str:
    return f"{t.token_id:>8}  {t.owner}  {t.result:>6}  {t.minted_at:>9}"


def cmd_show(args) -> int:
    contract = chain.Contract.load(args.state)
    if args.owner:
        record = contract.token_of(_address(args.owner))
        if record is None:
            print(f"no token for {_address(args.owner)}")
        else:
            print(json.dumps(record.to_json(), sort_keys=True))
        return EXIT_OK
    tokens = contract.tokens()
    print(f"{len(tokens)} tokens")
    if tokens:
        print(f"{'token_id':>8}  {'owner':<42}  {'result':>6}  {'minted_at':>9}")
        for t in tokens:
            print(_format_record(t))
    return EXIT_OK


def cmd_replay(args) -> int:
    vk = load_verifying_key(args.vk)
    params = load_public_params(args.params)
    contract = chain.replay(vk, params.commitment, chain.read_tx_log(args.log))
    atomic_write(args.out, contract.to_bytes())
    print(f"replayed state written to {args.out} ({contract.total_supply()} tokens)")
    return EXIT_OK


def _address(text: str) -> str:
    try:
        return chain.normalize_address(text)
    except ValueError as exc:
        raise CommandError(str(exc)) from None


# -- demo --


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _wait_healthy(url: str, timeout: float) -> bool:
    import httpx

    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            if httpx.get(url + "/health", timeout=2).status_code == 200:
                return True
        except httpx.HTTPError:
            pass
        time.sleep(0.1)
    return False


def cmd_demo(args) -> int:
    from .service import load_config, serve

    rng = secrets.SystemRandom()
    with tempfile.TemporaryDirectory(prefix="zkquiz-demo-") as tmp:
        tmp = Path(tmp)
        secret = tmp / "secret_key.json"
        out_dir = tmp / "artifacts"
        state = tmp / "chain.json"
        proof = tmp / "proof.json"

        print("== keygen")
        code = main(["keygen", "--out", str(secret)])
        if code:
            return code
        print("== setup")
        code = main(["setup", "--secret", str(secret), "--out-dir", str(out_dir)])
        if code:
            return code

        port = _free_port()
        config_path = tmp / "service.json"
        atomic_write(config_path, dump_json({
            "port": port,
            "secret_key": str(secret),
            "proving_key": str(out_dir / PROVING_KEY_FILE),
            "verifying_key": str(out_dir / VERIFYING_KEY_FILE),
            "public_params": str(out_dir / PUBLIC_PARAMS_FILE),
        }))
        print(f"== serve (127.0.0.1:{port})")
        holder: list = []
        exit_box: list[int] = []
        thread = threading.Thread(
            target=lambda: exit_box.append(serve(load_config(config_path), server_holder=holder)),
            name="zkquiz-demo-server", daemon=True,
        )
        thread.start()
        url = f"http://127.0.0.1:{port}"
        try:
            if not _wait_healthy(url, timeout=60):
                _err("service did not become healthy")
                return exit_box[0] if exit_box else EXIT_SERVICE
            answers = [rng.randrange(2) for _ in range(QUESTION_COUNT)]
            recipient = "0x" + secrets.token_hex(20)
            print(f"== evaluate answers={''.join(map(str, answers))} recipient={recipient}")
            code = main(["evaluate", "--service", url,
                         "--answers", ",".join(map(str, answers)),
                         "--recipient", recipient, "--out", str(proof)])
            if code:
                return code
        finally:
            if holder:
                holder[0].should_exit = True
            thread.join(timeout=10)

        print("== verify")
        code = main(["verify", "--vk", str(out_dir / VERIFYING_KEY_FILE), "--proof", str(proof)])
        if code:
            return code
        print("== mint")
        code = main(["mint", "--state", str(state), "--caller", recipient, "--proof", str(proof),
                     "--deploy", "--vk", str(out_dir / VERIFYING_KEY_FILE),
                     "--params", str(out_dir / PUBLIC_PARAMS_FILE)])
        if code:
            return code
        print("== show")
        code = main(["show", "--state", str(state)])
        if code:
            return code
    print("demo completed")
    return EXIT_OK


# -- wiring --


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zkquiz",
        description="Questionnaire results proven in zero knowledge and attested by a "
                    "soulbound token.",
        epilog="exit codes: 0 ok, 2 usage/config, 3 service rejection, 4 invalid proof, "
               "5 already minted, 6 result out of range",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("keygen", help="generate a secret answer key",
                       description="Generate a random 10-bit answer key and commitment blind. "
                                   "The file is written with owner-only permissions.")
    p.add_argument("--out", required=True, help="secret key file to write")
    p.add_argument("--seed", help="hex seed for a reproducible key (tests only)")
    p.add_argument("--force", action="store_true", help="overwrite an existing file")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("setup", help="run the trusted setup for the quiz circuit",
                       description="Build the quiz circuit, run a single-party Groth16 setup "
                                   f"and write {PROVING_KEY_FILE}, {VERIFYING_KEY_FILE} and "
                                   f"{PUBLIC_PARAMS_FILE}.")
    p.add_argument("--secret", required=True, help="secret key file from keygen")
    p.add_argument("--out-dir", required=True, help="directory for the setup artifacts")
    p.add_argument("--force", action="store_true", help="overwrite existing artifacts")
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("serve", help="run the proving service",
                       description="Serve POST /evaluate, GET /info and GET /health. "
                                   "ZKQUIZ_<KEY> environment variables override config values.")
    p.add_argument("--config", required=True, help="JSON service config")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("evaluate", help="submit answers to the service and save the proof",
                       description="POST answers to a proving service and write the returned "
                                   "result, proof and public inputs to a proof file.")
    p.add_argument("--service", required=True, help="service base URL")
    p.add_argument("--answers", required=True, help="10 comma-separated bits, question 0 first")
    p.add_argument("--recipient", required=True, help="20-byte hex address the proof binds to")
    p.add_argument("--out", required=True, help="proof file to write")
    p.add_argument("--timeout", type=float, default=60.0, help="HTTP timeout in seconds")
    p.set_defaults(func=cmd_evaluate)

    def chain_args(p):
        p.add_argument("--state", required=True, help="contract state file")
        p.add_argument("--log", help="transaction log (default: <state>.txlog.jsonl)")

    p = sub.add_parser("mint", help="mint an attestation token with a proof",
                       description="Submit a proof file to the simulated contract as CALLER.")
    chain_args(p)
    p.add_argument("--caller", required=True, help="hex address submitting the transaction")
    p.add_argument("--proof", required=True, help="proof file from evaluate")
    p.add_argument("--deploy", action="store_true", help="create the state file first")
    p.add_argument("--vk", help="verifying key (with --deploy)")
    p.add_argument("--params", help="public params file (with --deploy)")
    p.set_defaults(func=cmd_mint)

    p = sub.add_parser("transfer", help="attempt a token transfer (always rejected)",
                       description="Tokens are soulbound; this records a rejected transfer.")
    chain_args(p)
    p.add_argument("--from", dest="sender", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--token-id", type=int, required=True)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("verify", help="check a proof file offline",
                       description="Print true/false; exit 0 when valid, 4 otherwise.")
    p.add_argument("--vk", required=True, help="verifying key file")
    p.add_argument("--proof", required=True, help="proof file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("show", help="print the token registry",
                       description="Print all tokens, or the token owned by --owner.")
    p.add_argument("--state", required=True, help="contract state file")
    p.add_argument("--owner", help="only show this address")
    p.set_defaults(func=cmd_show)

    p = sub.add_parser("replay", help="rebuild contract state from a transaction log",
                       description="Deploy fresh and re-execute every logged transaction.")
    p.add_argument("--vk", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True, help="state file to write")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("demo", help="run the whole flow in a temporary directory",
                       description="keygen, setup, serve, evaluate, verify, mint, show.")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CommandError as exc:
        _err(str(exc))
        return exc.code
    except (ArtifactError, chain.ChainError) as exc:
        _err(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

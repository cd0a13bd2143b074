"""HTTP proving service: holds the answer key, scores answers, returns proofs.

Endpoints: ``POST /evaluate``, ``GET /info``, ``GET /health``.
Errors are JSON ``{"error": code, "message": text}``.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse

from .constants import QUESTION_COUNT
from .files import (
    ArtifactError,
    ProofBundle,
    load_proving_key,
    load_public_params,
    load_secret_key,
    load_verifying_key,
)
from .groth16 import prove, verify
from .qap import r1cs_to_qap
from .quiz import (
    AnswerVector,
    QuizInputError,
    QuizSecrets,
    address_to_scalar,
    build_circuit,
    score_plain,
    synthesize_witness,
)

log = logging.getLogger(__name__)

ENV_PREFIX = "ZKQUIZ_"


class ServiceError(Exception):
    status = 500
    code = "internal"

    def __init__(self, message: str, code: str | None = None, status: int | None = None):
        super().__init__(message)
        if code:
            self.code = code
        if status:
            self.status = status


class BadRequest(ServiceError):
    status = 400
    code = "bad_request"


class Busy(ServiceError):
    status = 503
    code = "busy"


class NotReady(ServiceError):
    status = 503
    code = "not_ready"


class SelfCheckFailed(ServiceError):
    status = 500
    code = "self_check_failed"


@dataclass(frozen=True)
class ServiceConfig:
    secret_key: Path
    proving_key: Path
    verifying_key: Path
    public_params: Path
    host: str = "127.0.0.1"
    port: int = 8080
    max_concurrent_proofs: int = 2
    request_size_limit: int = 4096

    def __post_init__(self):
        if self.max_concurrent_proofs < 1:
            raise ValueError("max_concurrent_proofs must be >= 1")
        if self.request_size_limit < 64:
            raise ValueError("request_size_limit is too small")


_PATH_KEYS = ("secret_key", "proving_key", "verifying_key", "public_params")
_ENV_KEYS = {
    "host": str,
    "port": int,
    "secret_key": Path,
    "proving_key": Path,
    "verifying_key": Path,
    "public_params": Path,
    "max_concurrent_proofs": int,
    "request_size_limit": int,
}


def load_config(path, environ=None) -> ServiceConfig:
    """Read a JSON config; ZKQUIZ_<KEY> environment variables override it.

    Relative paths are resolved against the config file's directory.
    """
    environ = os.environ if environ is None else environ
    path = Path(path)
    try:
        raw = json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"{path}: cannot read config ({exc})") from None
    if not isinstance(raw, dict):
        raise ArtifactError(f"{path}: config must be a JSON object")
    unknown = set(raw) - set(_ENV_KEYS)
    if unknown:
        raise ArtifactError(f"{path}: unknown config keys {sorted(unknown)}")
    values = {}
    for key, conv in _ENV_KEYS.items():
        value = environ.get(ENV_PREFIX + key.upper(), raw.get(key))
        if value is None:
            continue
        try:
            values[key] = conv(value)
        except (TypeError, ValueError):
            raise ArtifactError(f"config value {key}={value!r} is invalid") from None
    for key in _PATH_KEYS:
        if key not in values:
            raise ArtifactError(f"{path}: missing required config key {key!r}")
        if not values[key].is_absolute():
            values[key] = path.parent / values[key]
    try:
        return ServiceConfig(**values)
    except ValueError as exc:
        raise ArtifactError(f"{path}: {exc}") from None


def parse_evaluate_request(payload) -> tuple[AnswerVector, str]:
    if not isinstance(payload, dict):
        raise BadRequest("body must be a JSON object")
    extra = set(payload) - {"answers", "recipient"}
    if extra:
        raise BadRequest(f"unexpected fields {sorted(extra)}")
    answers = payload.get("answers")
    if not isinstance(answers, list):
        raise BadRequest("answers must be an array", code="bad_answer_count")
    if len(answers) != QUESTION_COUNT:
        raise BadRequest(f"expected {QUESTION_COUNT} answers, got {len(answers)}",
                         code="bad_answer_count")
    if any(isinstance(a, bool) or a not in (0, 1) for a in answers):
        raise BadRequest("answers must be 0 or 1", code="bad_answer_value")
    recipient = payload.get("recipient")
    if not isinstance(recipient, str):
        raise BadRequest("recipient must be a hex string", code="bad_recipient")
    text = recipient[2:] if recipient[:2].lower() == "0x" else recipient
    if len(text) != 40:
        raise BadRequest("recipient must be 40 hex characters", code="bad_recipient")
    try:
        address_to_scalar(text)
    except QuizInputError as exc:
        raise BadRequest(str(exc), code="bad_recipient") from None
    return AnswerVector(tuple(answers)), "0x" + text.lower()


class ProvingService:
    """Key material plus the prover. Load once, then share read-only."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.ready = False
        self.load_error: str | None = None
        self._slots = threading.BoundedSemaphore(config.max_concurrent_proofs)

    def load(self) -> None:
        cfg = self.config
        try:
            key = load_secret_key(cfg.secret_key, require_private=True)
            params = load_public_params(cfg.public_params)
            cs = build_circuit()
            digest = cs.digest()
            vk = load_verifying_key(cfg.verifying_key, digest)
            if vk.digest().hex() != params.verifying_key_digest:
                raise ArtifactError("verifying key does not match the public params file")
            if key.commitment() != params.commitment:
                raise ArtifactError("secret key does not match the published commitment")
            pk = load_proving_key(cfg.proving_key, digest)
            qap = r1cs_to_qap(cs)
        except ArtifactError as exc:
            self.load_error = str(exc)
            raise
        self._key, self._vk, self._pk, self._qap = key, vk, pk, qap
        self.info = {
            "commitment": params.commitment.hex(),
            "verifying_key_digest": params.verifying_key_digest,
            "question_count": QUESTION_COUNT,
        }
        self.ready = True
        log.info("proving service ready (commitment %s)", self.info["commitment"])

    def _check_ready(self):
        if not self.ready:
            raise NotReady("key material is not loaded yet")

    def evaluate(self, answers: AnswerVector, recipient: str) -> ProofBundle:
        """Score and prove. Callers must hold a slot (see :meth:`slot`)."""
        self._check_ready()
        witness, statement = synthesize_witness(QuizSecrets(answers, self._key), recipient)
        if statement.result != score_plain(answers, self._key.bits):
            raise SelfCheckFailed("circuit result disagrees with the reference scorer")
        proof = prove(self._pk, self._qap, witness)
        if not verify(self._vk, statement.public_inputs(), proof):
            raise SelfCheckFailed("generated proof failed verification")
        return ProofBundle.from_statement(statement, proof)

    def try_acquire(self) -> bool:
        return self._slots.acquire(blocking=False)

    def release(self) -> None:
        self._slots.release()


def _error(exc: ServiceError) -> JSONResponse:
    return JSONResponse({"error": exc.code, "message": str(exc)}, status_code=exc.status)


def create_app(service: ProvingService) -> FastAPI:
    app = FastAPI(title="zkquiz proving service", docs_url=None, redoc_url=None,
                  openapi_url=None)
    app.state.service = service

    @app.get("/health")
    def health():
        if not service.ready:
            return _error(NotReady("key material is not loaded yet"))
        return {"status": "ok"}

    @app.get("/info")
    def info():
        if not service.ready:
            return _error(NotReady("key material is not loaded yet"))
        return service.info

    @app.post("/evaluate")
    async def evaluate(request: Request):
        limit = service.config.request_size_limit
        declared = request.headers.get("content-length")
        if declared is not None and declared.isdigit() and int(declared) > limit:
            return _error(ServiceError("request body too large", "body_too_large", 413))
        body = await request.body()
        if len(body) > limit:
            return _error(ServiceError("request body too large", "body_too_large", 413))
        try:
            service._check_ready()
            try:
                payload = json.loads(body)
            except (json.JSONDecodeError, UnicodeDecodeError):
                raise BadRequest("body is not valid JSON", code="bad_json") from None
            answers, recipient = parse_evaluate_request(payload)
            if not service.try_acquire():
                raise Busy("too many proofs in flight, retry later")
            try:
                bundle = await run_in_threadpool(service.evaluate, answers, recipient)
            finally:
                service.release()
        except ServiceError as exc:
            if exc.status >= 500:
                log.warning("evaluate failed: %s", exc.code)
            return _error(exc)
        except Exception:
            log.exception("unexpected failure in /evaluate")
            return _error(ServiceError("internal error"))
        return bundle.to_json()

    return app


def serve(config: ServiceConfig, ready_event: threading.Event | None = None,
          server_holder: list | None = None) -> int:
    """Run the service until interrupted. Returns a process exit code.

    Key material loads in a background thread so /health answers 503 until
    it is ready; a load failure shuts the server down with exit code 2.
    """
    import uvicorn

    for key in _PATH_KEYS:
        p = getattr(config, key)
        if not p.is_file():
            log.error("%s not found: %s", key, p)
            return 2
    service = ProvingService(config)
    app = create_app(service)
    server = uvicorn.Server(uvicorn.Config(app, host=config.host, port=config.port,
                                           log_level="warning", access_log=False))
    if server_holder is not None:
        server_holder.append(server)

    def loader():
        try:
            service.load()
        except Exception as exc:
            log.error("startup failed: %s", exc)
            server.should_exit = True
        finally:
            if ready_event is not None:
                ready_event.set()

    threading.Thread(target=loader, name="zkquiz-loader", daemon=True).start()
    server.run()
    if service.load_error or not service.ready:
        return 2
    return 0


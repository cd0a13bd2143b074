"""Zero-knowledge questionnaire attestation.

A backend scores answers against a committed secret key inside an R1CS
circuit, proves the result with Groth16, and a simulated contract verifies
the proof before minting a non-transferable token.
"""

from .curve import G1Point, G2Point, GtElement, Scalar
from .groth16 import Proof, ProvingKey, VerifyingKey, prove, setup, verify
from .quiz import (
    AnswerKey,
    AnswerVector,
    QuizSecrets,
    QuizStatement,
    build_circuit,
    score_plain,
    synthesize_witness,
)

__version__ = "0.1.0"

__all__ = [
    "AnswerKey",
    "AnswerVector",
    "G1Point",
    "G2Point",
    "GtElement",
    "Proof",
    "ProvingKey",
    "QuizSecrets",
    "QuizStatement",
    "Scalar",
    "VerifyingKey",
    "build_circuit",
    "prove",
    "score_plain",
    "setup",
    "synthesize_witness",
    "verify",
]

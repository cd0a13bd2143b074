"""Protocol-wide constants.

The pairing curve is BLS12-381 (embedding degree 12, ~117-bit security,
255-bit prime scalar field). Curve arithmetic is delegated to the arkworks
bindings in :mod:`zkquiz.curve`.
"""

CURVE_NAME = "BLS12-381"

# Base field modulus.
FIELD_MODULUS = int(
    "1a0111ea397fe69a4b1ba7b6434bacd764774b84f38512bf6730d2a0f6b0f6241"
    "eabfffeb153ffffb9feffffffffaaab",
    16,
)

# Prime order of G1, G2 and GT; the scalar field modulus.
CURVE_ORDER = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001

# Curve coefficients: E1: y^2 = x^3 + 4, E2: y^2 = x^3 + 4(1 + u), u^2 = -1.
G1_B = 4
G2_B = (4, 4)

FP_BYTES = 48
SCALAR_BYTES = 32

# Point encodings: 1 tag byte then big-endian affine coordinates.
# G2 coordinates are Fp2 elements written as (c1, c0).
TAG_IDENTITY = 0x00
TAG_AFFINE = 0x04
G1_ENCODED_SIZE = 1 + 2 * FP_BYTES
G2_ENCODED_SIZE = 1 + 4 * FP_BYTES

# Questionnaire shape.
QUESTION_COUNT = 10
GROUPS = ((0, 1, 2, 3, 4), (5, 6, 7, 8, 9))
THRESHOLD = 3
ADDRESS_BYTES = 20

MIMC_SEED = b"zkquiz-mimc-v1"

# Frozen shape of the quiz circuit for the production MiMC parameters
# (e = 5, 110 rounds). Regression values; a change here means every
# existing key file is invalidated.
QUIZ_NUM_PUBLIC = 3
QUIZ_NUM_PRIVATE = 373
QUIZ_NUM_CONSTRAINTS = 377

SCHEMA_VERSION = 1

"""R1CS to QAP reduction over the evaluation domain 1..n.

Polynomials are lists of int coefficients mod r, lowest degree first.
Everything here is O(n^2); the quiz circuit has a few hundred constraints.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass

from .constants import CURVE_ORDER
from .r1cs import Assignment, ConstraintSystem, R1CSError

R = CURVE_ORDER


def poly_trim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p = p[:-1]
    return p


def poly_eval(p, x: int) -> int:
    acc = 0
    for c in reversed(p):
        acc = (acc * x + c) % R
    return acc


def poly_add(p, q) -> list[int]:
    n = max(len(p), len(q))
    return [((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0)) % R for i in range(n)]


def poly_sub(p, q) -> list[int]:
    n = max(len(p), len(q))
    return [((p[i] if i < len(p) else 0) - (q[i] if i < len(q) else 0)) % R for i in range(n)]


def poly_mul(p, q) -> list[int]:
    if not p or not q:
        return []
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return [c % R for c in out]


def poly_divmod(num, den) -> tuple[list[int], list[int]]:
    """Schoolbook long division; returns (quotient, remainder)."""
    den = poly_trim(list(den))
    if not den:
        raise ZeroDivisionError("division by the zero polynomial")
    rem = [c % R for c in num]
    dn = len(den)
    if len(rem) < dn:
        return [], poly_trim(rem)
    lead_inv = pow(den[-1], -1, R)
    quot = [0] * (len(rem) - dn + 1)
    for k in range(len(rem) - dn, -1, -1):
        coeff = rem[k + dn - 1] * lead_inv % R
        quot[k] = coeff
        if coeff:
            for i, d in enumerate(den):
                rem[k + i] = (rem[k + i] - coeff * d) % R
    return quot, poly_trim(rem[: dn - 1])


def vanishing_poly(domain) -> list[int]:
    t = [1]
    for d in domain:
        t = poly_mul(t, [(-d) % R, 1])
    return t


def _divide_by_linear(p, root: int) -> list[int]:
    # synthetic division of p by (x - root); p(root) must be 0
    n = len(p) - 1
    out = [0] * n
    carry = 0
    for i in range(n, 0, -1):
        carry = (p[i] + carry * root) % R
        out[i - 1] = carry
    return out


def lagrange_basis(domain) -> list[list[int]]:
    """L_j with L_j(d_k) = [j == k]."""
    t = vanishing_poly(domain)
    basis = []
    for d in domain:
        q = _divide_by_linear(t, d)
        scale = pow(poly_eval(q, d), -1, R)
        basis.append([c * scale % R for c in q])
    return basis


@dataclass(frozen=True, eq=False)
class Qap:
    u: tuple[tuple[int, ...], ...]
    v: tuple[tuple[int, ...], ...]
    w: tuple[tuple[int, ...], ...]
    t: tuple[int, ...]
    domain: tuple[int, ...]
    cs: ConstraintSystem

    @property
    def degree(self) -> int:
        return len(self.domain)

    @property
    def num_wires(self) -> int:
        return len(self.u)

    def combine(self, polys, wires) -> list[int]:
        n = self.degree
        acc = [0] * n
        for p, a in zip(polys, wires):
            if a:
                acc = [x + a * y for x, y in zip(acc, p)]
        return [c % R for c in acc]

    def numerator(self, assignment: Assignment) -> list[int]:
        """(sum a_i u_i)(x) * (sum a_i v_i)(x) - (sum a_i w_i)(x)."""
        if len(assignment) != self.num_wires:
            raise R1CSError(f"assignment has {len(assignment)} wires, QAP expects {self.num_wires}")
        a = self.combine(self.u, assignment.wires)
        b = self.combine(self.v, assignment.wires)
        c = self.combine(self.w, assignment.wires)
        return poly_sub(poly_mul(a, b), c)

    def quotient(self, assignment: Assignment) -> tuple[list[int], list[int]]:
        """Return (h, remainder) of numerator / t; h is padded to n - 1 coefficients."""
        h, rem = poly_divmod(self.numerator(assignment), self.t)
        n = self.degree
        if len(h) > n - 1:
            raise AssertionError("quotient degree exceeds n - 2")
        return h + [0] * (n - 1 - len(h)), rem


def _matrix_columns(cs: ConstraintSystem, which: str) -> list[dict[int, int]]:
    cols: list[dict[int, int]] = [dict() for _ in range(cs.num_wires)]
    for j, con in enumerate(cs.constraints):
        for idx, coeff in getattr(con, which).terms:
            cols[idx][j] = coeff
    return cols


def _interpolate(cols, basis, n) -> list[tuple[int, ...]]:
    out = []
    for col in cols:
        acc = [0] * n
        for j, coeff in col.items():
            acc = [x + coeff * y for x, y in zip(acc, basis[j])]
        out.append(tuple(c % R for c in acc))
    return out


def _check_interpolation(polys, cols, domain) -> None:
    # a random combination of all wire polynomials must agree with the same
    # combination of matrix entries at every domain point
    rho = [secrets.randbelow(R) for _ in polys]
    n = len(domain)
    combo = [0] * n
    for r_i, p in zip(rho, polys):
        combo = [x + r_i * y for x, y in zip(combo, p)]
    combo = [c % R for c in combo]
    expected = [0] * n
    for r_i, col in zip(rho, cols):
        for j, coeff in col.items():
            expected[j] += r_i * coeff
    for j, d in enumerate(domain):
        if poly_eval(combo, d) != expected[j] % R:
            raise AssertionError(f"interpolation mismatch at domain point {d}")


def r1cs_to_qap(cs: ConstraintSystem) -> Qap:
    n = len(cs.constraints)
    if n == 0:
        raise R1CSError("cannot build a QAP from a system with no constraints")
    domain = tuple(range(1, n + 1))
    basis = lagrange_basis(domain)
    polys = {}
    for which in ("a", "b", "c"):
        cols = _matrix_columns(cs, which)
        polys[which] = _interpolate(cols, basis, n)
        _check_interpolation(polys[which], cols, domain)
    return Qap(
        u=tuple(polys["a"]),
        v=tuple(polys["b"]),
        w=tuple(polys["c"]),
        t=tuple(vanishing_poly(domain)),
        domain=domain,
        cs=cs,
    )

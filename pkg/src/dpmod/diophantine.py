"""Integral representation of a number by a small quadratic form.

Given a sublattice S and a target k, decide whether some (nonzero) v in S has
Q(v, v) = k. Every negative answer carries a checkable reason; when no exact
argument applies the answer is Unknown rather than a guess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

from . import intmat
from .lattice import (LatticeElement, Sublattice, inertia, intersect_sublattices, sublattice_gram)

SOLVABLE = "Solvable"
UNSOLVABLE = "Unsolvable"
UNKNOWN = "Unknown"

DEFINITE = "definiteness bound"
MODULAR = "modular obstruction"
DESCENT = "descent"
PELL = "exhausted Pell window"
DIVISORS = "divisor enumeration"
ZERO_LATTICE = "zero lattice"

MODULI = (2, 3, 4, 5, 8, 9, 16)
BOX_LIMIT = 2_000_000
PELL_WINDOW_LIMIT = 1_000_000
PERIOD_LIMIT = 100_000
TERNARY_SEARCH = 20


class UnsupportedEquation(ValueError):
    pass


@dataclass(frozen=True)
class NormEquation:
    sublattice: Sublattice
    target: int
    require_nonzero: bool = True
    extra_membership: Sublattice | None = None

    def solution_lattice(self) -> Sublattice:
        if self.extra_membership is None:
            return self.sublattice
        return intersect_sublattices(self.sublattice, self.extra_membership)


@dataclass(frozen=True)
class FormVerdict:
    """Verdict on coefficient vectors for a bare Gram matrix."""

    status: str
    coeffs: tuple | None = None
    reason: str | None = None
    detail: str = ""


@dataclass(frozen=True)
class SolvabilityVerdict:
    status: str
    witness: LatticeElement | None = None
    reason: str | None = None
    detail: str = ""
    gram: tuple = ()
    coeffs: tuple | None = None

    @property
    def solvable(self) -> bool:
        return self.status == SOLVABLE

    @property
    def unsolvable(self) -> bool:
        return self.status == UNSOLVABLE

    def summary(self) -> str:
        if self.status == SOLVABLE:
            return f"solvable, witness coefficients {self.coeffs}"
        if self.status == UNSOLVABLE:
            return f"unsolvable ({self.reason}{': ' + self.detail if self.detail else ''})"
        return f"unknown ({self.detail})" if self.detail else "unknown"


def form_value(gram: Sequence[Sequence[int]], x: Sequence[int]) -> int:
    return intmat.bilinear(gram, tuple(x), tuple(x))


def restricted_gram(e: NormEquation) -> tuple:
    return sublattice_gram(e.solution_lattice())


def solve_norm_equation(e: NormEquation) -> SolvabilityVerdict:
    s = e.solution_lattice()
    if s.rank > 3:
        raise UnsupportedEquation("solution lattice has rank greater than 3")
    gram = sublattice_gram(s)
    v = solve_form(gram, e.target, e.require_nonzero)
    witness = None
    if v.status == SOLVABLE:
        witness = s.combine(v.coeffs)
        assert intmat.bilinear(s.ambient.gram, witness.vector, witness.vector) == e.target
        assert s.contains(witness)
        if e.extra_membership is not None:
            assert e.extra_membership.contains(witness) and e.sublattice.contains(witness)
    return SolvabilityVerdict(v.status, witness, v.reason, v.detail, gram, v.coeffs)


@lru_cache(maxsize=4096)
def _solve_cached(gram: tuple, k: int, nonzero: bool) -> FormVerdict:
    r = len(gram)
    if r == 0:
        if k == 0 and not nonzero:
            return FormVerdict(SOLVABLE, ())
        return FormVerdict(UNSOLVABLE, reason=ZERO_LATTICE, detail="no nonzero vectors")
    if k == 0 and not nonzero:
        return FormVerdict(SOLVABLE, (0,) * r)
    if r > 3:
        raise UnsupportedEquation("form rank greater than 3")
    if intmat.det(gram) == 0:
        return _solve_degenerate(gram, k, nonzero)
    p, q, _ = inertia(gram)
    if p == 0 or q == 0:
        return _solve_definite(gram, k, 1 if q == 0 else -1)
    if r == 2 and k == 0:
        # isotropy of a binary form is decided exactly by its discriminant
        return _solve_binary(gram, k)
    m = modular_obstruction(gram, k, nonzero)
    if m is not None:
        return FormVerdict(UNSOLVABLE, reason=MODULAR, detail=f"mod {m}")
    if r == 2:
        return _solve_binary(gram, k)
    return _search_ternary(gram, k)


def solve_form(gram: Sequence[Sequence[int]], k: int, require_nonzero: bool = True) -> FormVerdict:
    g = intmat.as_matrix(gram)
    if any(g[i][j] != g[j][i] for i in range(len(g)) for j in range(len(g))):
        raise UnsupportedEquation("Gram matrix is not symmetric")
    v = _solve_cached(g, int(k), bool(require_nonzero))
    if v.status == SOLVABLE:
        assert form_value(g, v.coeffs) == k
        assert not (require_nonzero and not any(v.coeffs))
    return v


# ---- degenerate forms ----

def _solve_degenerate(gram: tuple, k: int, nonzero: bool) -> FormVerdict:
    r = len(gram)
    radical = intmat.integer_kernel(gram, r)
    if k == 0:
        return FormVerdict(SOLVABLE, tuple(radical[0]))
    comp = intmat.unimodular_completion(radical, r)
    sub = intmat.congruent(gram, comp)
    v = _solve_cached(sub, k, True)
    if v.status != SOLVABLE:
        detail = (v.detail + "; " if v.detail else "") + "after removing the radical"
        return FormVerdict(v.status, reason=v.reason, detail=detail)
    coeffs = tuple(sum(c * row[i] for c, row in zip(v.coeffs, comp)) for i in range(r))
    return FormVerdict(SOLVABLE, coeffs)


# ---- definite forms ----

def definite_box(gram: Sequence[Sequence[int]], k: int, sign: int) -> tuple:
    """Per-coordinate bounds |x_i| <= floor(sqrt(k * (G^-1)_ii)) for sign*G positive definite."""
    g = intmat.scale(intmat.as_matrix(gram), sign)
    kk = sign * k
    inv = intmat.inverse_rational(g)
    return tuple(math.isqrt(math.floor(Fraction(kk) * inv[i][i])) for i in range(len(g)))


def _solve_definite(gram: tuple, k: int, sign: int) -> FormVerdict:
    if sign * k < 0:
        return FormVerdict(UNSOLVABLE, reason=DEFINITE, detail="target has the wrong sign")
    if k == 0:
        return FormVerdict(UNSOLVABLE, reason=DEFINITE, detail="definite forms have no nonzero isotropic vector")
    bounds = definite_box(gram, k, sign)
    size = math.prod(2 * b + 1 for b in bounds)
    if size > BOX_LIMIT:
        return FormVerdict(UNKNOWN, detail=f"search box of {size} points too large")
    for x in product(*(range(-b, b + 1) for b in bounds)):
        if any(x) and form_value(gram, x) == k:
            return FormVerdict(SOLVABLE, x)
    return FormVerdict(UNSOLVABLE, reason=DEFINITE, detail=f"box {bounds} exhausted")


# ---- congruences ----

@lru_cache(maxsize=4096)
def _residues(gram: tuple, m: int, primitive: bool) -> frozenset:
    p = next(q for q in (2, 3, 5, 7, 11, 13) if m % q == 0)
    out = set()
    for x in product(range(m), repeat=len(gram)):
        if primitive and all(xi % p == 0 for xi in x):
            continue
        out.add(form_value(gram, x) % m)
    return frozenset(out)


def modular_obstruction(gram: Sequence[Sequence[int]], k: int, require_nonzero: bool = True,
                        moduli: Sequence[int] = MODULI) -> int | None:
    """Smallest listed modulus m for which Q(x) = k has no solution mod m.

    For k = 0 with a nonzero solution required, any solution may be scaled to a
    primitive one, so only vectors that are nonzero mod p (m a power of p) count.
    """
    g = intmat.as_matrix(gram)
    primitive = require_nonzero and k == 0
    for m in moduli:
        if k % m not in _residues(g, m, primitive):
            return m
    return None


# ---- binary indefinite forms ----

def _is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def fundamental_unit(D: int) -> tuple:
    """Smallest positive solution of X^2 - D y^2 = 1, from the continued fraction of sqrt(D)."""
    a0 = math.isqrt(D)
    m, d, a = 0, 1, a0
    h1, h2 = a0, 1
    k1, k2 = 1, 0
    while h1 * h1 - D * k1 * k1 != 1:
        m = d * a - m
        d = (D - m * m) // d
        a = (a0 + m) // d
        h1, h2 = a * h1 + h2, h1
        k1, k2 = a * k1 + k2, k1
    return h1, k1


def _odd_valuation_prime(D: int) -> int:
    n, p = D, 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e % 2:
            return p
        p += 1
    return n


def _divisors(n: int) -> list:
    n = abs(n)
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _solve_binary(gram: tuple, k: int) -> FormVerdict:
    (a, b), (_, c) = gram
    swapped = False
    if a == 0 and c != 0:
        a, c = c, a
        swapped = True

    def out(x, y):
        return FormVerdict(SOLVABLE, (y, x) if swapped else (x, y))

    D = b * b - a * c
    if _is_square(D):
        return _solve_split(a, b, c, D, k, out)
    if k == 0:
        p = _odd_valuation_prime(D)
        return FormVerdict(UNSOLVABLE, reason=DESCENT,
                           detail=f"at {p}: discriminant {D} is not a square, so Q is anisotropic")
    return _solve_pell(a, b, D, k, out)


def _solve_split(a, b, c, D, k, out) -> FormVerdict:
    s = math.isqrt(D)
    if a == 0:
        # Q = y (2 b x + c y) with b != 0
        if k == 0:
            return out(1, 0)
        for y in _divisors(k):
            for yy in (y, -y):
                rest = k // yy - c * yy
                if rest % (2 * b) == 0:
                    return out(rest // (2 * b), yy)
        return FormVerdict(UNSOLVABLE, reason=DIVISORS, detail=f"Q factors as y(2*{b}x + {c}y)")
    if k == 0:
        x, y = -(b - s), a
        g = math.gcd(x, y)
        return out(x // g, y // g)
    # a Q = (a x + (b - s) y)(a x + (b + s) y)
    n = a * k
    for u in _divisors(n):
        for uu in (u, -u):
            vv = n // uu
            if (vv - uu) % (2 * s):
                continue
            y = (vv - uu) // (2 * s)
            num = uu - (b - s) * y
            if num % a == 0:
                return out(num // a, y)
    return FormVerdict(UNSOLVABLE, reason=DIVISORS, detail=f"{a}*Q factors over Z (discriminant {D} is a square)")


def _matrix_period(x1: int, y1: int, D: int, mod: int) -> int | None:
    if mod == 1:
        return 1
    m = ((x1 % mod, (D * y1) % mod), (y1 % mod, x1 % mod))
    cur = m
    for j in range(1, PERIOD_LIMIT + 1):
        if cur == ((1 % mod, 0), (0, 1 % mod)):
            return j
        cur = tuple(tuple(sum(cur[i][t] * m[t][jj] for t in range(2)) % mod for jj in range(2)) for i in range(2))
    return None


def _solve_pell(a: int, b: int, D: int, k: int, out) -> FormVerdict:
    """X^2 - D y^2 = a k with X = a x + b y."""
    N = a * k
    x1, y1 = fundamental_unit(D)
    if N > 0:
        ymax = math.isqrt(y1 * y1 * N // (2 * (x1 + 1)))
    else:
        ymax = math.isqrt(y1 * y1 * (-N) // (2 * (x1 - 1)))
    if ymax > PELL_WINDOW_LIMIT:
        return FormVerdict(UNKNOWN, detail=f"Pell window {ymax} too large")
    fundamentals = []
    for y in range(-ymax, ymax + 1):
        t = N + D * y * y
        if _is_square(t):
            X = math.isqrt(t)
            fundamentals += [(X, y), (-X, y)]
    if not fundamentals:
        return FormVerdict(UNSOLVABLE, reason=PELL,
                           detail=f"no fundamental solution of X^2 - {D}y^2 = {N} with |y| <= {ymax}")
    period = _matrix_period(x1, y1, D, abs(a))
    if period is None:
        return FormVerdict(UNKNOWN, detail="unit period modulo the leading coefficient not found")
    for X, y in fundamentals:
        for _ in range(period):
            if (X - b * y) % a == 0:
                return out((X - b * y) // a, y)
            X, y = x1 * X + D * y1 * y, y1 * X + x1 * y
    return FormVerdict(UNSOLVABLE, reason=PELL,
                       detail=f"no solution of X^2 - {D}y^2 = {N} has X = {b}y mod {abs(a)} "
                              f"(unit period {period})")


# ---- ternary indefinite forms ----

def _search_ternary(gram: tuple, k: int) -> FormVerdict:
    w = TERNARY_SEARCH
    for radius in range(1, w + 1):
        for x in product(range(-radius, radius + 1), repeat=3):
            if max(abs(t) for t in x) != radius:
                continue
            if form_value(gram, x) == k:
                return FormVerdict(SOLVABLE, x)
    return FormVerdict(UNKNOWN, detail=f"indefinite ternary form, no local obstruction and no witness with |x_i| <= {w}")

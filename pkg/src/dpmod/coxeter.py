"""Reflection groups of the lattices M_2 and M_3 and their finite parabolic subgroups."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .isometry import (INFINITE, Diverged, Isometry, MatrixGroup, OrderCertificate, close_group,
                       element_order, isomorphism_fingerprint, order_certificate)
from .lattice import LatticeElement, LorentzianLattice, evaluate_form, m_n, reflection_matrix

SIMPLE_ROOTS = {
    2: ("H-E1-E2", "E1-E2", "E2"),
    3: ("H-E1-E2-E3", "E1-E2", "E2-E3", "E3"),
}

# Diagram labels, stored so that the computed table can be compared against them.
DIAGRAM_LABELS = {
    2: {(0, 1): 2, (0, 2): INFINITE, (1, 2): 4},
    3: {(0, 1): 2, (0, 2): 2, (0, 3): 4, (1, 2): 3, (1, 3): 2, (2, 3): 4},
}

# The root whose parabolic subgroup is infinite.
NONCOMPACT_ROOT = "E1-E2"

# cos^2(pi/m); the infinite label uses the parabolic normalization 1
_COS_SQUARED = {2: Fraction(0), 3: Fraction(1, 4), 4: Fraction(1, 2), 6: Fraction(3, 4), INFINITE: Fraction(1)}


@dataclass(frozen=True)
class CoxeterSystem:
    n: int
    lattice: LorentzianLattice
    root_names: tuple
    simple_roots: tuple
    labels: dict

    @property
    def reflections(self) -> tuple:
        return tuple(Isometry.from_matrix(self.lattice, reflection_matrix(self.lattice, r))
                     for r in self.simple_roots)

    def label(self, i: int, j: int):
        if i == j:
            return 1
        return self.labels[(min(i, j), max(i, j))]

    def index_of(self, root: str) -> int:
        return self.root_names.index(root.replace(" ", ""))

    def with_labels(self, labels: dict) -> "CoxeterSystem":
        return CoxeterSystem(self.n, self.lattice, self.root_names, self.simple_roots, dict(labels))


def coxeter_system(n: int) -> CoxeterSystem:
    if n not in SIMPLE_ROOTS:
        raise ValueError("only n = 2 and n = 3 are supported")
    L = m_n(n)
    names = SIMPLE_ROOTS[n]
    return CoxeterSystem(n, L, names, tuple(L.parse(r) for r in names), dict(DIAGRAM_LABELS[n]))


def pair_order_table(c: CoxeterSystem) -> tuple:
    refl = c.reflections
    k = len(refl)
    return tuple(tuple(1 if i == j else element_order(refl[i] * refl[j]) for j in range(k)) for i in range(k))


@dataclass(frozen=True)
class GramReport:
    passed: bool
    failures: tuple
    checks: tuple

    def __bool__(self):
        return self.passed


def gram_consistency_check(c: CoxeterSystem) -> GramReport:
    """Check 4 R(v,w)^2 = 4 cos^2(pi/m) R(v,v) R(w,w) and R(v,w) <= 0 with R = -Q."""
    L = c.lattice

    def R(v, w) -> int:
        return -evaluate_form(L, v, w)

    failures = []
    checks = []
    roots = c.simple_roots
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            m = c.label(i, j)
            pair = f"{c.root_names[i]} / {c.root_names[j]}"
            if m not in _COS_SQUARED:
                failures.append(f"{pair}: unsupported label {m}")
                continue
            rvw = R(roots[i], roots[j])
            lhs = 4 * rvw * rvw
            rhs = 4 * _COS_SQUARED[m] * R(roots[i], roots[i]) * R(roots[j], roots[j])
            ok = lhs == rhs and rvw <= 0
            checks.append((pair, m, lhs, rhs, rvw))
            if not ok:
                failures.append(f"{pair}: label {m} gives {lhs} vs {rhs}, R(v,w) = {rvw}")
    return GramReport(not failures, tuple(failures), tuple(checks))


@dataclass(frozen=True)
class ParabolicResult:
    omitted: str
    generators: tuple
    finite: bool
    group: MatrixGroup | None
    witness: Isometry | None
    witness_certificate: OrderCertificate | None

    @property
    def order(self):
        return self.group.order if self.group is not None else INFINITE


def parabolic_subgroup(c: CoxeterSystem, omit: str) -> ParabolicResult:
    idx = c.index_of(omit)
    gens = tuple(r for i, r in enumerate(c.reflections) if i != idx)
    closed = close_group(MatrixGroup(c.lattice, gens))
    if isinstance(closed, Diverged):
        return ParabolicResult(omit, gens, False, None, closed.witness, closed.witness_certificate)
    return ParabolicResult(omit, gens, True, closed, None, None)


def maximal_finite_candidates(c: CoxeterSystem, include_minus_identity: bool = True) -> list:
    out = []
    minus = Isometry.minus_identity(c.lattice)
    for name in c.root_names:
        if name == NONCOMPACT_ROOT:
            continue
        res = parabolic_subgroup(c, name)
        if not res.finite:
            raise AssertionError(f"parabolic subgroup omitting {name} is not finite")
        gens = res.generators + ((minus,) if include_minus_identity else ())
        out.append((name, close_group(MatrixGroup(c.lattice, gens))))
    return out


def infinite_order_words(gens, max_length: int) -> list:
    """Order certificates of every word of length <= max_length that has infinite order."""
    out = []
    seen = set()
    for length in range(1, max_length + 1):
        for word in product(range(len(gens)), repeat=length):
            if any(word[i] == word[i + 1] and (gens[word[i]] * gens[word[i]]).is_identity()
                   for i in range(length - 1)):
                continue
            m = gens[word[0]]
            for w in word[1:]:
                m = m * gens[w]
            if m.key() in seen:
                continue
            seen.add(m.key())
            cert = order_certificate(m)
            if cert.order == INFINITE:
                out.append((word, cert))
    return out


def describe_group(g: MatrixGroup) -> str:
    return f"order {g.order}, {isomorphism_fingerprint(g)}"

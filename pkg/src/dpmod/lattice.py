"""Integral Lorentzian lattices H_2(M; Z) with their intersection forms.

The canonical basis of M_n is (H, E_1, ..., E_n) with Gram diag(1, -1, ..., -1).
Other bases are registered as unimodular change-of-basis matrices whose
columns express the new basis vectors in canonical coordinates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import intmat
from .intmat import Matrix

CANONICAL = "canonical"
S_BASIS = "S"

# Recorded in every report so downstream output states which convention was used.
S_BASIS_CONVENTION = "S1 = H - E1, S2 = H - E2, Sigma = H - E1 - E2"


class LatticeError(ValueError):
    pass


class UnsupportedReflection(LatticeError):
    pass


@dataclass(frozen=True)
class LorentzianLattice:
    name: str
    gram: Matrix
    basis_names: tuple
    bases: dict = field(default_factory=dict, compare=False, hash=False)
    basis_labels: dict = field(default_factory=dict, compare=False, hash=False)
    unimodular: bool = field(default=True, compare=False)

    @property
    def rank(self) -> int:
        return len(self.gram)

    def __post_init__(self):
        g = self.gram
        if any(g[i][j] != g[j][i] for i in range(len(g)) for j in range(len(g))):
            raise LatticeError("gram matrix is not symmetric")
        d = intmat.det(g)
        if d == 0:
            raise LatticeError("gram matrix is degenerate")
        if self.unimodular and abs(d) != 1:
            raise LatticeError("gram matrix is not unimodular")
        self.bases.setdefault(CANONICAL, intmat.identity(len(g)))
        self.basis_labels.setdefault(CANONICAL, self.basis_names)
        for bid, p in self.bases.items():
            if abs(intmat.det(p)) != 1:
                raise LatticeError(f"basis {bid!r} change matrix is not unimodular")

    def register_basis(self, basis_id: str, columns: Sequence[Sequence[int]], labels: Sequence[str]):
        """Add a basis given by its vectors in canonical coordinates."""
        p = intmat.transpose(intmat.as_matrix(columns))
        if abs(intmat.det(p)) != 1:
            raise LatticeError(f"basis {basis_id!r} change matrix is not unimodular")
        self.bases[basis_id] = p
        self.basis_labels[basis_id] = tuple(labels)

    def change_matrix(self, basis_id: str) -> Matrix:
        try:
            return self.bases[basis_id]
        except KeyError:
            raise LatticeError(f"unknown basis {basis_id!r} for {self.name}") from None

    def gram_in(self, basis_id: str) -> Matrix:
        p = self.change_matrix(basis_id)
        return intmat.mat_mul(intmat.mat_mul(intmat.transpose(p), self.gram), p)

    def element(self, coords: Sequence[int], basis_id: str = CANONICAL) -> "LatticeElement":
        self.change_matrix(basis_id)
        if len(coords) != self.rank:
            raise LatticeError(f"expected {self.rank} coordinates, got {len(coords)}")
        return LatticeElement(tuple(int(c) for c in coords), basis_id, self)

    def zero(self) -> "LatticeElement":
        return self.element((0,) * self.rank)

    def basis_vector(self, label: str) -> "LatticeElement":
        for bid, labels in self.basis_labels.items():
            if label in labels:
                i = labels.index(label)
                return self.element(tuple(int(j == i) for j in range(self.rank)), bid).to_canonical()
        raise LatticeError(f"unknown basis label {label!r}")

    def parse(self, text: str) -> "LatticeElement":
        """Parse an integer combination such as '2H-E1-E2' or 'S1+S2'."""
        s = text.replace(" ", "")
        if not s:
            raise LatticeError("empty expression")
        if s in ("0",):
            return self.zero()
        total = [0] * self.rank
        pos = 0
        for m in re.finditer(r"([+-]?)(\d*)\*?([A-Za-z][A-Za-z0-9_]*)", s):
            if m.start() != pos:
                raise LatticeError(f"cannot parse {text!r}")
            pos = m.end()
            sign = -1 if m.group(1) == "-" else 1
            k = int(m.group(2)) if m.group(2) else 1
            v = self.basis_vector(m.group(3))
            for i, c in enumerate(v.coords):
                total[i] += sign * k * c
        if pos != len(s):
            raise LatticeError(f"cannot parse {text!r}")
        return self.element(total)

    def format(self, v: "LatticeElement", basis_id: str = CANONICAL) -> str:
        coords = v.in_basis(basis_id).coords
        labels = self.basis_labels[basis_id]
        parts = []
        for c, lab in zip(coords, labels):
            if c == 0:
                continue
            mag = "" if abs(c) == 1 else str(abs(c))
            parts.append(("-" if c < 0 else "+") + mag + lab)
        if not parts:
            return "0"
        out = "".join(parts)
        return out[1:] if out[0] == "+" else out


@dataclass(frozen=True)
class LatticeElement:
    coords: tuple
    basis_id: str
    lattice: LorentzianLattice = field(compare=False, repr=False)

    def to_canonical(self) -> "LatticeElement":
        if self.basis_id == CANONICAL:
            return self
        p = self.lattice.change_matrix(self.basis_id)
        return LatticeElement(intmat.mat_vec(p, self.coords), CANONICAL, self.lattice)

    def in_basis(self, basis_id: str) -> "LatticeElement":
        if basis_id == self.basis_id:
            return self
        canon = self.to_canonical()
        if basis_id == CANONICAL:
            return canon
        pinv = intmat.inverse_unimodular(self.lattice.change_matrix(basis_id))
        return LatticeElement(intmat.mat_vec(pinv, canon.coords), basis_id, self.lattice)

    @property
    def vector(self) -> tuple:
        return self.to_canonical().coords

    def __add__(self, other: "LatticeElement") -> "LatticeElement":
        return self.lattice.element(tuple(a + b for a, b in zip(self.vector, other.vector)))

    def __sub__(self, other: "LatticeElement") -> "LatticeElement":
        return self.lattice.element(tuple(a - b for a, b in zip(self.vector, other.vector)))

    def __neg__(self) -> "LatticeElement":
        return self.lattice.element(tuple(-a for a in self.vector))

    def __rmul__(self, k: int) -> "LatticeElement":
        return self.lattice.element(tuple(k * a for a in self.vector))

    def __eq__(self, other):
        if not isinstance(other, LatticeElement):
            return NotImplemented
        return self.vector == other.vector

    def __hash__(self):
        return hash(self.vector)

    def __str__(self):
        return self.lattice.format(self)


@dataclass(frozen=True)
class Sublattice:
    """Saturated subgroup, stored by the Hermite basis of its canonical coordinates."""

    ambient: LorentzianLattice = field(repr=False)
    rows: Matrix

    @classmethod
    def span(cls, ambient: LorentzianLattice, vectors) -> "Sublattice":
        vecs = [_vec(ambient, v) for v in vectors]
        return cls(ambient, intmat.saturate(vecs, ambient.rank))

    @classmethod
    def zero(cls, ambient: LorentzianLattice) -> "Sublattice":
        return cls(ambient, ())

    @classmethod
    def full(cls, ambient: LorentzianLattice) -> "Sublattice":
        return cls(ambient, intmat.identity(ambient.rank))

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def basis_vectors(self) -> list:
        return [self.ambient.element(r) for r in self.rows]

    def contains(self, v) -> bool:
        coeffs = intmat.solve_in_basis(self.rows, _vec(self.ambient, v))
        return coeffs is not None and all(c.denominator == 1 for c in coeffs)

    def coordinates(self, v) -> tuple:
        coeffs = intmat.solve_in_basis(self.rows, _vec(self.ambient, v))
        if coeffs is None or any(c.denominator != 1 for c in coeffs):
            raise LatticeError("vector is not in the sublattice")
        return tuple(int(c) for c in coeffs)

    def combine(self, coeffs: Sequence[int]) -> LatticeElement:
        v = [0] * self.ambient.rank
        for c, row in zip(coeffs, self.rows):
            for i, x in enumerate(row):
                v[i] += c * x
        return self.ambient.element(v)

    def is_subset(self, other: "Sublattice") -> bool:
        return all(other.contains(r) for r in self.rows)

    def describe(self, basis_id: str = CANONICAL) -> str:
        if not self.rows:
            return "0"
        L = self.ambient
        local = intmat.hermite_rows([v.in_basis(basis_id).coords for v in self.basis_vectors])
        vecs = [L.element(r, basis_id) for r in local]
        return "Z{" + ", ".join(L.format(v, basis_id) for v in vecs) + "}"

    def __eq__(self, other):
        if not isinstance(other, Sublattice):
            return NotImplemented
        return self.ambient.name == other.ambient.name and self.rows == other.rows

    def __hash__(self):
        return hash((self.ambient.name, self.rows))


def _vec(L: LorentzianLattice, v) -> tuple:
    if isinstance(v, LatticeElement):
        if v.lattice.rank != L.rank:
            raise LatticeError("rank mismatch")
        return v.vector
    if isinstance(v, str):
        return L.parse(v).vector
    t = tuple(int(x) for x in v)
    if len(t) != L.rank:
        raise LatticeError("rank mismatch")
    return t


# ---- constructors ----

def m_n(n: int) -> LorentzianLattice:
    """H_2 of CP^2 # n(-CP^2) with the diagonal form <1> + n<-1>."""
    if not 0 <= n <= 9:
        raise LatticeError("n must lie in 0..9")
    gram = tuple(tuple((1 if i == 0 else -1) if i == j else 0 for j in range(n + 1)) for i in range(n + 1))
    names = ("H",) + tuple(f"E{i}" for i in range(1, n + 1))
    L = LorentzianLattice(f"M{n}", gram, names)
    if n == 2:
        L.register_basis(S_BASIS, [(1, -1, 0), (1, 0, -1), (1, -1, -1)], ("S1", "S2", "Sigma"))
        _check_s_basis(L)
    return L


def m_star() -> LorentzianLattice:
    """H_2 of S^2 x S^2 in the basis of the two sphere factors."""
    return LorentzianLattice("Mstar", ((0, 1), (1, 0)), ("S1", "S2"))


def custom_lattice(name: str, gram: Sequence[Sequence[int]], labels: Sequence[str] | None = None) -> LorentzianLattice:
    """A nondegenerate lattice that need not be unimodular, for ad-hoc experiments."""
    g = intmat.as_matrix(gram)
    names = tuple(labels) if labels else tuple(f"e{i + 1}" for i in range(len(g)))
    if len(names) != len(g):
        raise LatticeError("one label per basis vector is required")
    return LorentzianLattice(name, g, names, unimodular=False)


def lattice_by_name(name: str) -> LorentzianLattice:
    key = name.strip().lower()
    if key in ("star", "mstar", "m*", "*"):
        return m_star()
    key = key.lstrip("m")
    try:
        return m_n(int(key))
    except ValueError:
        raise LatticeError(f"unknown manifold {name!r}") from None


def _check_s_basis(L: LorentzianLattice) -> None:
    g = L.gram_in(S_BASIS)
    if g != ((0, 1, 0), (1, 0, 0), (0, 0, -1)):
        raise LatticeError(f"S-basis Gram check failed: {g}")


# ---- operations ----

def evaluate_form(L: LorentzianLattice, v, w) -> int:
    return intmat.bilinear(L.gram, _vec(L, v), _vec(L, w))


def reflect(L: LorentzianLattice, v, w) -> LatticeElement:
    vv = _vec(L, v)
    norm = intmat.bilinear(L.gram, vv, vv)
    if norm not in (1, -1, 2, -2):
        raise UnsupportedReflection(f"reflection norm {norm} not in {{+-1, +-2}}")
    ww = _vec(L, w)
    coef = Fraction(2 * intmat.bilinear(L.gram, vv, ww), norm)
    assert coef.denominator == 1
    k = int(coef)
    return L.element(tuple(b - k * a for a, b in zip(vv, ww)))


def reflection_matrix(L: LorentzianLattice, v, basis_id: str = CANONICAL) -> Matrix:
    cols = [reflect(L, v, L.element(e)).coords for e in intmat.identity(L.rank)]
    m = intmat.transpose(cols)
    if basis_id != CANONICAL:
        m = to_basis(L, m, basis_id)
    return m


def to_basis(L: LorentzianLattice, m: Matrix, basis_id: str) -> Matrix:
    """Rewrite a canonical-basis matrix in another registered basis."""
    p = L.change_matrix(basis_id)
    return intmat.mat_mul(intmat.mat_mul(intmat.inverse_unimodular(p), m), p)


def from_basis(L: LorentzianLattice, m: Matrix, basis_id: str) -> Matrix:
    p = L.change_matrix(basis_id)
    return intmat.mat_mul(intmat.mat_mul(p, m), intmat.inverse_unimodular(p))


def eigenlattice(L: LorentzianLattice, m, sign: int) -> Sublattice:
    if sign not in (1, -1):
        raise LatticeError("sign must be +1 or -1")
    mat = m.canonical_matrix if hasattr(m, "canonical_matrix") else intmat.as_matrix(m)
    shifted = intmat.mat_sub(mat, intmat.scale(intmat.identity(L.rank), sign))
    return Sublattice(L, intmat.integer_kernel(shifted, L.rank))


def intersect_sublattices(a: Sublattice, b: Sublattice) -> Sublattice:
    if a.ambient.name != b.ambient.name:
        raise LatticeError("sublattices live in different lattices")
    n = a.ambient.rank
    if a.rank == 0 or b.rank == 0:
        return Sublattice.zero(a.ambient)
    ann = list(intmat.integer_kernel(a.rows, n)) + list(intmat.integer_kernel(b.rows, n))
    if not ann:
        return Sublattice.full(a.ambient)
    return Sublattice(a.ambient, intmat.integer_kernel(ann, n))


def sublattice_gram(s: Sublattice) -> Matrix:
    return intmat.congruent(s.ambient.gram, s.rows)


def inertia(gram: Sequence[Sequence[int]]) -> tuple:
    """(positive, negative, zero) counts by symmetric congruence diagonalization over Q."""
    a = [[Fraction(x) for x in row] for row in gram]
    n = len(a)
    diag = []
    k = 0
    while k < n:
        if a[k][k] == 0:
            j = next((j for j in range(k + 1, n) if a[j][j] != 0), None)
            if j is not None:
                a[k], a[j] = a[j], a[k]
                for row in a:
                    row[k], row[j] = row[j], row[k]
            else:
                j = next((j for j in range(k + 1, n) if a[k][j] != 0), None)
                if j is None:
                    diag.append(Fraction(0))
                    k += 1
                    continue
                # row/col k += row/col j makes the pivot 2*a[k][j] nonzero
                a[k] = [x + y for x, y in zip(a[k], a[j])]
                for row in a:
                    row[k] += row[j]
        p = a[k][k]
        for i in range(k + 1, n):
            if a[i][k] != 0:
                f = a[i][k] / p
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
                for r in range(n):
                    a[r][i] -= f * a[r][k]
        diag.append(p)
        k += 1
    return (sum(1 for d in diag if d > 0), sum(1 for d in diag if d < 0), sum(1 for d in diag if d == 0))


def restricted_signature(L: LorentzianLattice, s: Sublattice) -> tuple:
    return inertia(sublattice_gram(s))

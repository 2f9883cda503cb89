"""Integral isometries, finite matrix groups, subgroups and isomorphism labels."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from itertools import permutations
from typing import Callable, Iterable, Sequence

from . import intmat
from .intmat import Matrix
from .lattice import CANONICAL, LatticeError, LorentzianLattice, from_basis, to_basis

INFINITE = math.inf
CLOSURE_CAP = 10_000


class IsometryError(LatticeError):
    pass


def order_cap(rank: int) -> int:
    # 12 is the largest finite element order in GL_4(Z); beyond rank 4 the
    # cyclotomic argument below still settles finiteness exactly
    return 12 if rank <= 4 else 60


@dataclass(frozen=True)
class Isometry:
    lattice: LorentzianLattice = field(repr=False, compare=False, hash=False)
    canonical_matrix: Matrix
    lattice_name: str = ""

    @classmethod
    def from_matrix(cls, lattice: LorentzianLattice, matrix, basis_id: str = CANONICAL) -> "Isometry":
        m = intmat.as_matrix(matrix)
        n = lattice.rank
        if len(m) != n or any(len(row) != n for row in m):
            raise IsometryError(f"expected a {n}x{n} matrix")
        if basis_id != CANONICAL:
            m = from_basis(lattice, m, basis_id)
        g = lattice.gram
        lhs = intmat.mat_mul(intmat.mat_mul(intmat.transpose(m), g), m)
        if lhs != g:
            bad = next((i, j) for i in range(n) for j in range(n) if lhs[i][j] != g[i][j])
            raise IsometryError(
                f"matrix does not preserve the form: entry ({bad[0] + 1},{bad[1] + 1}) of M^T G M "
                f"is {lhs[bad[0]][bad[1]]}, expected {g[bad[0]][bad[1]]}")
        return cls(lattice, m, lattice.name)

    @classmethod
    def identity(cls, lattice: LorentzianLattice) -> "Isometry":
        return cls(lattice, intmat.identity(lattice.rank), lattice.name)

    @classmethod
    def minus_identity(cls, lattice: LorentzianLattice) -> "Isometry":
        return cls(lattice, intmat.scale(intmat.identity(lattice.rank), -1), lattice.name)

    @property
    def rank(self) -> int:
        return len(self.canonical_matrix)

    @property
    def det(self) -> int:
        return intmat.det(self.canonical_matrix)

    def matrix(self, basis_id: str = CANONICAL) -> Matrix:
        if basis_id == CANONICAL:
            return self.canonical_matrix
        return to_basis(self.lattice, self.canonical_matrix, basis_id)

    def __mul__(self, other: "Isometry") -> "Isometry":
        if self.lattice_name != other.lattice_name:
            raise IsometryError("isometries of different lattices")
        return Isometry(self.lattice, intmat.mat_mul(self.canonical_matrix, other.canonical_matrix), self.lattice_name)

    def __neg__(self) -> "Isometry":
        return Isometry(self.lattice, intmat.scale(self.canonical_matrix, -1), self.lattice_name)

    def inverse(self) -> "Isometry":
        return Isometry(self.lattice, intmat.inverse_unimodular(self.canonical_matrix), self.lattice_name)

    def power(self, k: int) -> "Isometry":
        if k < 0:
            return self.inverse().power(-k)
        result = Isometry.identity(self.lattice)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_identity(self) -> bool:
        return self.canonical_matrix == intmat.identity(self.rank)

    def apply(self, v: Sequence[int]) -> tuple:
        return intmat.mat_vec(self.canonical_matrix, tuple(v))

    def commutes_with(self, other: "Isometry") -> bool:
        return (self * other).canonical_matrix == (other * self).canonical_matrix

    def key(self) -> tuple:
        return tuple(x for row in self.canonical_matrix for x in row)

    def __str__(self):
        return "; ".join(" ".join(str(x) for x in row) for row in self.canonical_matrix)


# ---- polynomials over Z, coefficient tuples highest degree first ----

def _poly_divmod(num: Sequence[int], den: Sequence[int]) -> tuple[list, list]:
    num = list(num)
    if len(den) > len(num):
        return [0], num
    lead = den[0]
    quot = []
    for i in range(len(num) - len(den) + 1):
        q = num[i] // lead
        if q * lead != num[i]:
            return [], num  # not divisible over Z with this leading coefficient
        quot.append(q)
        for j, d in enumerate(den):
            num[i + j] -= q * d
    rem = num[len(num) - len(den) + 1:]
    return quot, rem


def _strip(p: Sequence[int]) -> tuple:
    p = list(p)
    while len(p) > 1 and p[0] == 0:
        p.pop(0)
    return tuple(p)


@lru_cache(maxsize=None)
def cyclotomic(k: int) -> tuple:
    """k-th cyclotomic polynomial, via x^k - 1 divided by the smaller ones."""
    p = [1] + [0] * (k - 1) + [-1]
    for d in range(1, k):
        if k % d == 0:
            p, rem = _poly_divmod(p, cyclotomic(d))
            assert not any(rem)
    return _strip(p)


def _totient(k: int) -> int:
    return sum(1 for i in range(1, k + 1) if math.gcd(i, k) == 1)


def cyclotomic_factorization(poly: Sequence[int]) -> tuple[list, tuple]:
    """Divide out cyclotomic factors; returns (indices with multiplicity, residual)."""
    p = _strip(poly)
    deg = len(p) - 1
    found = []
    for k in range(1, 4 * deg * deg + 3):
        if _totient(k) > deg:
            continue
        c = cyclotomic(k)
        while len(p) - 1 >= len(c) - 1 > 0:
            q, rem = _poly_divmod(p, c)
            if not q or any(rem):
                break
            found.append(k)
            p = _strip(q)
    return found, p


@dataclass(frozen=True)
class OrderCertificate:
    order: float
    reason: str
    charpoly: tuple
    cyclotomic_indices: tuple
    residual: tuple


def order_certificate(m: Isometry) -> OrderCertificate:
    """Order of m together with the reason it is finite or infinite."""
    cp = intmat.charpoly(m.canonical_matrix)
    indices, residual = cyclotomic_factorization(cp)
    power = m
    cap = order_cap(m.rank)
    for k in range(1, cap + 1):
        if power.is_identity():
            if len(residual) > 1:
                raise AssertionError("finite order but non-cyclotomic characteristic factor")
            return OrderCertificate(k, "finite", cp, tuple(indices), residual)
        power = power * m
    if len(residual) > 1:
        return OrderCertificate(INFINITE, "non-cyclotomic characteristic factor", cp, tuple(indices), residual)
    lcm = reduce(math.lcm, indices, 1)
    if not m.power(lcm).is_identity():
        return OrderCertificate(INFINITE, "cyclotomic but not semisimple (unipotent part)", cp,
                                tuple(indices), residual)
    k = min(d for d in range(1, lcm + 1) if lcm % d == 0 and m.power(d).is_identity())
    return OrderCertificate(k, "finite", cp, tuple(indices), residual)


def element_order(m: Isometry) -> float:
    return order_certificate(m).order


# ---- groups ----

@dataclass(frozen=True)
class MatrixGroup:
    lattice: LorentzianLattice = field(repr=False, compare=False, hash=False)
    generators: tuple
    elements: tuple | None = None

    @classmethod
    def generated_by(cls, lattice: LorentzianLattice, gens: Iterable[Isometry]) -> "MatrixGroup":
        return cls(lattice, tuple(gens))

    @property
    def is_closed(self) -> bool:
        return self.elements is not None

    @property
    def order(self) -> int:
        self._require_closed()
        return len(self.elements)

    def _require_closed(self):
        if self.elements is None:
            raise IsometryError("group has not been closed")

    def keyset(self) -> frozenset:
        self._require_closed()
        return frozenset(e.key() for e in self.elements)

    def contains(self, m: Isometry) -> bool:
        return m.key() in self.keyset()

    def is_subgroup_of(self, other: "MatrixGroup") -> bool:
        return self.keyset() <= other.keyset()

    def same_elements(self, other: "MatrixGroup") -> bool:
        return self.keyset() == other.keyset()

    def involutions(self) -> list:
        self._require_closed()
        return [e for e in self.elements if not e.is_identity() and (e * e).is_identity()]


@dataclass(frozen=True)
class Diverged:
    cap: int
    witness: Isometry | None
    witness_certificate: OrderCertificate | None

    def __bool__(self):
        return False


def close_group(g: MatrixGroup, cap: int = CLOSURE_CAP) -> "MatrixGroup | Diverged":
    L = g.lattice
    ident = Isometry.identity(L)
    gens = [x for x in g.generators if not x.is_identity()]
    seen = {ident.key(): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = x * s
                k = y.key()
                if k not in seen:
                    seen[k] = y
                    nxt.append(y)
                    if len(seen) > cap:
                        return _diverged(g, list(seen.values()), cap)
        frontier = nxt
    elements = tuple(seen[k] for k in sorted(seen))
    return MatrixGroup(L, tuple(g.generators), elements)


def _diverged(g: MatrixGroup, sample: list, cap: int) -> Diverged:
    candidates = list(g.generators)
    candidates += [a * b for a in g.generators for b in g.generators]
    candidates += sample[:200]
    for c in candidates:
        cert = order_certificate(c)
        if cert.order == INFINITE:
            return Diverged(cap, c, cert)
    return Diverged(cap, None, None)


def conjugate(g: MatrixGroup, by: Isometry) -> MatrixGroup:
    if by.lattice_name != g.lattice.name:
        raise IsometryError("conjugating element lives in a different lattice")
    inv = by.inverse()
    gens = tuple(by * x * inv for x in g.generators)
    if g.elements is None:
        return MatrixGroup(g.lattice, gens)
    elems = sorted((by * x * inv for x in g.elements), key=Isometry.key)
    return MatrixGroup(g.lattice, gens, tuple(elems))


# ---- abstract finite groups via Cayley tables ----

class CayleyTable:
    """Index-based multiplication table of a finite group."""

    def __init__(self, elements: Sequence, mul: Callable, key: Callable = lambda x: x):
        self.elements = list(elements)
        index = {key(e): i for i, e in enumerate(self.elements)}
        n = len(self.elements)
        self.table = [[index[key(mul(a, b))] for b in self.elements] for a in self.elements]
        ident = [i for i in range(n) if all(self.table[i][j] == j for j in range(n))]
        self.identity = ident[0]
        self.inverse = [next(j for j in range(n) if self.table[i][j] == self.identity) for i in range(n)]
        self.n = n

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def order_of(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.table[x][a]
            k += 1
        return k

    def power(self, a: int, k: int) -> int:
        x = self.identity
        for _ in range(k):
            x = self.table[x][a]
        return x

    def generate(self, gens: Iterable[int]) -> int:
        """Bitmask of the subgroup generated by gens."""
        gens = [g for g in gens if g != self.identity]
        mask = 1 << self.identity
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for s in gens:
                    y = self.table[x][s]
                    if not (mask >> y) & 1:
                        mask |= 1 << y
                        nxt.append(y)
            frontier = nxt
        return mask

    def members(self, mask: int) -> list:
        return [i for i in range(self.n) if (mask >> i) & 1]

    def subgroups(self) -> list:
        """All subgroups as bitmasks, by iterated joins of cyclic subgroups."""
        cyclic = {}
        for a in range(self.n):
            m = self.generate([a])
            cyclic.setdefault(m, a)
        found = {m: [g] for m, g in cyclic.items()}
        frontier = list(found)
        while frontier:
            nxt = []
            for m in frontier:
                for c, g in cyclic.items():
                    if c & ~m == 0:
                        continue
                    gens = found[m] + [g]
                    j = self.generate(gens)
                    if j not in found:
                        found[j] = gens
                        nxt.append(j)
            frontier = nxt
        return sorted(found, key=lambda m: (bin(m).count("1"), m))

    def center_order(self) -> int:
        t = self.table
        return sum(1 for a in range(self.n) if all(t[a][b] == t[b][a] for b in range(self.n)))

    def is_abelian(self) -> bool:
        return self.center_order() == self.n

    def derived_subgroup(self) -> int:
        t, inv = self.table, self.inverse
        comms = {t[t[inv[a]][inv[b]]][t[a][b]] for a in range(self.n) for b in range(self.n)}
        return self.generate(comms)


def _abelian_invariants_from_counts(count_dividing: Callable[[int], int], order: int) -> tuple:
    """Elementary divisors from the counts #{x : x^(p^k) = 1} of an abelian group."""
    invariants = []
    remaining = order
    p = 2
    while remaining > 1:
        if remaining % p == 0:
            e = 0
            while remaining % p == 0:
                remaining //= p
                e += 1
            ranks = [0]
            for k in range(1, e + 1):
                ratio = count_dividing(p ** k) // count_dividing(p ** (k - 1))
                ranks.append(round(math.log(ratio, p)) if ratio > 1 else 0)
            # ranks[k] = number of cyclic factors of order >= p^k
            for k in range(1, e + 1):
                nxt = ranks[k + 1] if k + 1 <= e else 0
                invariants += [p ** k] * (ranks[k] - nxt)
        p += 1
    return tuple(sorted(invariants))


def _abelian_label(invariants: tuple) -> str:
    if not invariants:
        return "1"
    counts = Counter(invariants)
    parts = []
    for q in sorted(counts):
        parts.append(f"Z/{q}" if counts[q] == 1 else f"(Z/{q})^{counts[q]}")
    return " x ".join(parts)


def table_invariants(t: CayleyTable) -> tuple:
    n = t.n
    orders = [t.order_of(a) for a in range(n)]
    hist = tuple(sorted(Counter(orders).items()))
    if t.is_abelian():
        inv = _abelian_invariants_from_counts(
            lambda q: sum(1 for o in orders if q % o == 0), n)
        return ("abelian", n, inv)
    derived = t.derived_subgroup()
    dmask = derived
    dsize = bin(dmask).count("1")

    def coset_count(q: int) -> int:
        return sum(1 for a in range(n) if (dmask >> t.power(a, q)) & 1) // dsize

    ab = _abelian_invariants_from_counts(coset_count, n // dsize)
    return ("nonabelian", n, hist, t.center_order(), ab, dsize)


# ---- reference groups for naming, built from permutations ----

def _perm_mul(a: tuple, b: tuple) -> tuple:
    return tuple(a[b[i]] for i in range(len(b)))


def _perm_closure(gens: Sequence[tuple]) -> list:
    ident = tuple(range(len(gens[0])))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = _perm_mul(x, s)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return sorted(seen)


def _shift(p: tuple, offset: int, total: int) -> tuple:
    out = list(range(total))
    for i, x in enumerate(p):
        out[i + offset] = x + offset
    return tuple(out)


def _direct(*factors: Sequence[tuple]) -> list:
    total = sum(len(f[0]) for f in factors)
    gens = []
    offset = 0
    for f in factors:
        gens += [_shift(p, offset, total) for p in f]
        offset += len(f[0])
    return gens


_Z2 = [(1, 0)]
_S3 = [(1, 0, 2), (1, 2, 0)]
_D4 = [(1, 2, 3, 0), (0, 3, 2, 1)]
_S4 = [(1, 0, 2, 3), (1, 2, 3, 0)]
_A4 = [(1, 2, 0, 3), (1, 0, 3, 2)]
_Q8 = [(1, 2, 3, 0, 5, 6, 7, 4), (4, 7, 6, 5, 2, 1, 0, 3)]


def _dihedral(k: int) -> list:
    return [tuple((i + 1) % k for i in range(k)), tuple((-i) % k for i in range(k))]


REFERENCE_GROUPS = {
    "S3": [_S3],
    "D4": [_D4],
    "Q8": [_Q8],
    "A4": [_A4],
    "S4": [_S4],
    "D5": [_dihedral(5)],
    "D4 x Z/2": [_D4, _Z2],
    "Q8 x Z/2": [_Q8, _Z2],
    "Z/2 x S3": [_Z2, _S3],
    "Z/2 x S3 x Z/2": [_Z2, _S3, _Z2],
    "D4 x (Z/2)^2": [_D4, _Z2, _Z2],
    "S4 x Z/2": [_S4, _Z2],
    "S4 x (Z/2)^2": [_S4, _Z2, _Z2],
    "A4 x Z/2": [_A4, _Z2],
    "S3 x S3": [_S3, _S3],
    "D8": [_dihedral(8)],
}


@lru_cache(maxsize=None)
def _reference_table() -> dict:
    table: dict = {}
    for name, factors in REFERENCE_GROUPS.items():
        elems = _perm_closure(_direct(*factors))
        inv = table_invariants(CayleyTable(elems, _perm_mul))
        table.setdefault(inv, []).append(name)
    return table


@dataclass(frozen=True)
class Fingerprint:
    label: str
    invariants: tuple

    def __str__(self):
        return self.label


def _group_table(g: MatrixGroup) -> CayleyTable:
    g._require_closed()
    return CayleyTable(g.elements, lambda a, b: a * b, key=Isometry.key)


def isomorphism_fingerprint(g: MatrixGroup) -> Fingerprint:
    if g.elements is None:
        raise IsometryError("fingerprint requires a closed group")
    if g.order > 200:
        raise IsometryError("fingerprint supports groups of order at most 200")
    inv = table_invariants(_group_table(g))
    if inv[0] == "abelian":
        return Fingerprint(_abelian_label(inv[2]), inv)
    names = _reference_table().get(inv)
    if names and len(names) == 1:
        return Fingerprint(names[0], inv)
    _, n, hist, z, ab, d = inv
    return Fingerprint(f"order {n} nonabelian (center {z}, abelianization {_abelian_label(ab)}, derived {d})", inv)


def enumerate_subgroups(g: MatrixGroup) -> list:
    if g.elements is None:
        raise IsometryError("subgroup enumeration requires a closed group")
    if g.order > 200:
        raise IsometryError("subgroup enumeration supports groups of order at most 200")
    t = _group_table(g)
    out = []
    for mask in t.subgroups():
        members = [g.elements[i] for i in t.members(mask)]
        gens = _small_generating_set(t, mask, g.elements)
        out.append(MatrixGroup(g.lattice, gens, tuple(members)))
    return out


def _small_generating_set(t: CayleyTable, mask: int, elements) -> tuple:
    gens = []
    current = 1 << t.identity
    for i in t.members(mask):
        if not (current >> i) & 1:
            gens.append(i)
            current = t.generate(gens)
            if current == mask:
                break
    return tuple(elements[i] for i in gens)


def subgroup_of(parent: MatrixGroup, gens: Iterable[Isometry]) -> MatrixGroup:
    """Closed subgroup of a finite group generated by the given elements."""
    g = close_group(MatrixGroup(parent.lattice, tuple(gens)), cap=max(parent.order, 1))
    if not g:
        raise IsometryError("elements do not generate a subgroup of the parent")
    return g


def signed_permutation_matrices(k: int) -> list:
    out = []
    for perm in permutations(range(k)):
        for signs in range(1 << k):
            m = [[0] * k for _ in range(k)]
            for i, j in enumerate(perm):
                m[i][j] = -1 if (signs >> i) & 1 else 1
            out.append(tuple(tuple(r) for r in m))
    return out

"""Homology-level records of explicit realizations, with mechanical checks.

Each entry stores generator matrices together with an independent second
description (a reflection expression, a blowup descriptor, or the blocks of
the connected-sum pieces), the fixed-set shapes of its involutions, and for
glued entries the local actions at the two gluing points. verify_entry
recomputes everything it can and names each failed check.

Local actions are written as images of the coordinates (a, b, c, d), so
``c b a d`` swaps the first and third coordinates and ``a -b c -d`` is
complex conjugation in two complex coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from itertools import permutations, product
from pathlib import Path

from . import intmat
from .equivariant import (EquivariantError, FixedSetProfile, complete_caps, decompose_involution,
                          enumerate_profiles, is_involution)
from .isometry import (Isometry, IsometryError, MatrixGroup, close_group, element_order,
                       isomorphism_fingerprint)
from .lattice import CANONICAL, LatticeError, LorentzianLattice, lattice_by_name, m_n
from .textdata import DocumentError, evaluate_expression, parse_document, parse_matrix, split_list

SECTION = "section"
GLUE = "glue"
EQUIVARIANT_SUM = "equivariant_sum"
BLOWUP_AUTOMORPHISM = "blowup_automorphism"
CONSTRUCTIONS = (SECTION, GLUE, EQUIVARIANT_SUM, BLOWUP_AUTOMORPHISM)

_COORDS = "abcd"


class CatalogError(ValueError):
    pass


# ---- local actions ----

def parse_local_action(text: str) -> tuple:
    """'c b -a d' -> the signed permutation matrix sending (a,b,c,d) to (c,b,-a,d)."""
    parts = text.split()
    if len(parts) != 4:
        raise CatalogError(f"a local action needs four coordinates: {text!r}")
    rows = []
    for p in parts:
        sign = -1 if p.startswith("-") else 1
        letter = p.lstrip("+-")
        if letter not in _COORDS or len(letter) != 1:
            raise CatalogError(f"bad coordinate {p!r} in {text!r}")
        row = [0, 0, 0, 0]
        row[_COORDS.index(letter)] = sign
        rows.append(tuple(row))
    m = tuple(rows)
    if sorted(abs(x) for r in m for x in r) != [0] * 12 + [1] * 4 or \
            any(sum(abs(r[j]) for r in m) != 1 for j in range(4)):
        raise CatalogError(f"{text!r} is not a signed permutation")
    return m


def format_local_action(m) -> str:
    out = []
    for row in m:
        j = next(k for k, x in enumerate(row) if x)
        out.append(("-" if row[j] < 0 else "") + _COORDS[j])
    return " ".join(out)


def signed_permutations(k: int = 4) -> list:
    out = []
    for perm in permutations(range(k)):
        for signs in product((1, -1), repeat=k):
            out.append(tuple(tuple(signs[i] if j == perm[i] else 0 for j in range(k)) for i in range(k)))
    return out


_MINUS4 = intmat.scale(intmat.identity(4), -1)


@dataclass(frozen=True)
class TangentialRep:
    """Local actions at one fixed point: (element expression, 4x4 signed permutation) pairs."""

    point: str
    images: tuple
    forbid_minus_identity: bool = False

    def image(self, key: str):
        for k, m in self.images:
            if k == key:
                return m
        raise KeyError(key)

    @property
    def keys(self) -> tuple:
        return tuple(k for k, _ in self.images)

    def closure(self) -> set:
        ident = intmat.identity(4)
        seen = {ident}
        frontier = [ident]
        gens = [m for _, m in self.images]
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = intmat.mat_mul(a, g)
                    if b not in seen:
                        seen.add(b)
                        nxt.append(b)
            frontier = nxt
        return seen

    def contains_minus_identity(self) -> bool:
        return _MINUS4 in self.closure()


@dataclass(frozen=True)
class GlueReport:
    ok: bool
    conjugator: tuple | None
    reason: str


def glue_compatibility(r1: TangentialRep, r2: TangentialRep, require_no_minus_identity: bool | None = None,
                       declared: tuple | None = None) -> GlueReport:
    """Look for an orientation-reversing signed permutation P with P r1(g) P^-1 = r2(g) for every g."""
    if set(r1.keys) != set(r2.keys):
        return GlueReport(False, None, "the two local actions are given on different elements")
    forbid = (r1.forbid_minus_identity or r2.forbid_minus_identity) if require_no_minus_identity is None \
        else require_no_minus_identity
    if forbid:
        for r in (r1, r2):
            if r.contains_minus_identity():
                return GlueReport(False, None, f"-1 lies in the local action at {r.point}")
    pairs = [(r1.image(k), r2.image(k)) for k in r1.keys]

    def works(p):
        return intmat.det(p) == -1 and all(intmat.mat_mul(p, a) == intmat.mat_mul(b, p) for a, b in pairs)

    if declared is not None:
        if not works(declared):
            return GlueReport(False, None, f"declared conjugator {format_local_action(declared)} "
                                           "does not intertwine the actions with determinant -1")
        return GlueReport(True, declared, "declared conjugator verified")
    for p in signed_permutations(4):
        if works(p):
            return GlueReport(True, p, f"conjugator {format_local_action(p)}")
    return GlueReport(False, None, "no orientation-reversing signed permutation intertwines the actions")


# ---- block sums ----

def direct_sum_lattice(L1: LorentzianLattice, L2: LorentzianLattice) -> LorentzianLattice:
    n1, n2 = L1.rank, L2.rank
    gram = tuple(tuple(L1.gram[i][j] if i < n1 and j < n1 else
                       (L2.gram[i - n1][j - n1] if i >= n1 and j >= n1 else 0)
                       for j in range(n1 + n2)) for i in range(n1 + n2))
    return LorentzianLattice(f"{L1.name}+{L2.name}", gram, tuple(L1.basis_names) + tuple(L2.basis_names),
                             unimodular=L1.unimodular and L2.unimodular)


def glue_action(m1: Isometry, m2: Isometry, target: LorentzianLattice | None = None) -> Isometry:
    """Block sum of isometries of two summands; target defaults to their direct sum."""
    L = target or direct_sum_lattice(m1.lattice, m2.lattice)
    a, b = m1.canonical_matrix, m2.canonical_matrix
    n1, n2 = len(a), len(b)
    mat = tuple(tuple(a[i][j] if i < n1 and j < n1 else (b[i - n1][j - n1] if i >= n1 and j >= n1 else 0)
                      for j in range(n1 + n2)) for i in range(n1 + n2))
    return Isometry.from_matrix(L, mat)


def _piece_lattice(name: str, gram) -> LorentzianLattice:
    d = intmat.det(gram)
    return LorentzianLattice(name, tuple(tuple(r) for r in gram), tuple(f"{name}{i}" for i in range(len(gram))),
                             unimodular=abs(d) == 1)


# ---- entries ----

@dataclass(frozen=True)
class GeneratorRecord:
    name: str
    matrix: tuple                   # in the entry's basis
    order: int | None = None
    expression: str | None = None
    descriptor: str | None = None
    pieces: str | None = None
    fixed: str | None = None


@dataclass(frozen=True)
class RealizationEntry:
    name: str
    manifold: str
    basis: str
    construction: str
    fingerprint: str
    generators: tuple
    group_order: int | None = None
    splitting: tuple | None = None   # tuples of basis labels, in basis order
    reps: tuple = ()                 # zero or two TangentialReps
    conjugator: tuple | None = None
    flags: tuple = ()                # (flag, element, reason)
    notes: tuple = ()
    source: str = ""

    @cached_property
    def lattice(self) -> LorentzianLattice:
        return lattice_by_name(self.manifold)

    def isometry(self, gen: GeneratorRecord) -> Isometry:
        return Isometry.from_matrix(self.lattice, gen.matrix, self.basis)

    @cached_property
    def named(self) -> dict:
        return {g.name: self.isometry(g) for g in self.generators}

    @cached_property
    def group(self) -> MatrixGroup:
        g = close_group(MatrixGroup.generated_by(self.lattice, list(self.named.values())))
        if not g:
            raise CatalogError(f"{self.name}: generators do not close to a finite group")
        return g

    def element(self, expression: str) -> Isometry:
        return evaluate_expression(self.lattice, expression, self.named)

    def flag(self, name: str):
        for f, elem, reason in self.flags:
            if f == name:
                return elem, reason
        return None


@dataclass
class VerificationReport:
    entry: str
    checks: list = field(default_factory=list)   # (name, ok, detail)

    def add(self, name: str, ok: bool, detail: str = ""):
        self.checks.append((name, ok, detail))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def failures(self) -> list:
        return [(n, d) for n, ok, d in self.checks if not ok]

    def render(self) -> list:
        out = [f"{self.entry}: {'pass' if self.passed else 'FAIL'}"]
        for n, ok, d in self.checks:
            out.append(f"  {'ok  ' if ok else 'FAIL'} {n}{': ' + d if d else ''}")
        return out


def _descriptor_matrix(L: LorentzianLattice, text: str) -> tuple:
    """Blowup descriptor: images of H, E1, ..., En in order, each +-H or +-Ek."""
    images = [x.strip() for x in text.split(",")]
    if len(images) != L.rank:
        raise CatalogError(f"descriptor needs {L.rank} images")
    cols = []
    for i, img in enumerate(images):
        sign = -1 if img.startswith("-") else 1
        label = img.lstrip("+-").strip()
        if label not in L.basis_names:
            raise CatalogError(f"unknown class {label!r} in descriptor")
        j = L.basis_names.index(label)
        if (i == 0) != (j == 0):
            raise CatalogError("a blowup descriptor sends H to +-H and exceptional classes among themselves")
        cols.append([sign if k == j else 0 for k in range(L.rank)])
    if len({tuple(c) for c in cols}) != L.rank or sorted(L.basis_names.index(x.lstrip("+-").strip())
                                                         for x in images) != list(range(L.rank)):
        raise CatalogError("descriptor does not permute the exceptional classes")
    return intmat.transpose(tuple(tuple(c) for c in cols))


def _split_blocks(e: RealizationEntry) -> list:
    labels = list(e.lattice.basis_labels[e.basis])
    flat = [x for block in e.splitting for x in block]
    if flat != labels:
        raise CatalogError(f"splitting {' | '.join(' '.join(b) for b in e.splitting)} must list the basis "
                           f"{' '.join(labels)} in order")
    out, start = [], 0
    for block in e.splitting:
        out.append(range(start, start + len(block)))
        start += len(block)
    return out


def _pieces_matrix(e: RealizationEntry, text: str) -> tuple:
    blocks = _split_blocks(e)
    parts = [p.strip() for p in text.split("|")]
    if len(parts) != len(blocks):
        raise CatalogError(f"{len(blocks)} piece matrices expected")
    gram = e.lattice.gram_in(e.basis)
    acc = None
    for rng, part in zip(blocks, parts):
        sub = tuple(tuple(gram[i][j] for j in rng) for i in rng)
        piece = Isometry.from_matrix(_piece_lattice("p", sub), parse_matrix(part))
        acc = piece if acc is None else glue_action(acc, piece)
    return acc.canonical_matrix


def verify_entry(e: RealizationEntry) -> VerificationReport:
    rep = VerificationReport(e.name)
    try:
        L = e.lattice
    except LatticeError as err:
        rep.add("manifold", False, str(err))
        return rep
    if e.construction not in CONSTRUCTIONS:
        rep.add("construction kind", False, f"unknown kind {e.construction!r}")

    # form preservation
    isos = {}
    for g in e.generators:
        try:
            isos[g.name] = e.isometry(g)
            rep.add(f"form preservation [{g.name}]", True)
        except (LatticeError, IsometryError) as err:
            rep.add(f"form preservation [{g.name}]", False, str(err))
    if len(isos) != len(e.generators):
        return rep

    # second description of every generator
    for g in e.generators:
        target = isos[g.name].matrix(e.basis)
        seconds = []
        try:
            if g.expression:
                seconds.append(("expression", evaluate_expression(L, g.expression, {}).matrix(e.basis)))
            if g.descriptor:
                seconds.append(("blowup descriptor", _descriptor_matrix(L, g.descriptor)))
            if g.pieces:
                seconds.append(("piece blocks", _pieces_matrix(e, g.pieces)))
        except (LatticeError, IsometryError, CatalogError, DocumentError) as err:
            rep.add(f"double entry [{g.name}]", False, str(err))
            continue
        if not seconds:
            rep.add(f"double entry [{g.name}]", False, "no second description given")
            continue
        for label, m in seconds:
            rep.add(f"double entry [{g.name}] {label}", m == target,
                    "" if m == target else f"{label} gives {m}, matrix is {target}")

    # orders
    for g in e.generators:
        o = element_order(isos[g.name])
        if g.order is not None:
            rep.add(f"order [{g.name}]", o == g.order, f"computed {o}, claimed {g.order}")

    # closure and fingerprint
    closed = close_group(MatrixGroup.generated_by(L, list(isos.values())))
    if not closed:
        rep.add("finite closure", False, "the generators do not close to a finite group")
        return rep
    rep.add("finite closure", True, f"order {closed.order}")
    if e.group_order is not None:
        rep.add("group order", closed.order == e.group_order, f"computed {closed.order}, claimed {e.group_order}")
    fp = str(isomorphism_fingerprint(closed))
    rep.add("fingerprint", fp == e.fingerprint, f"computed {fp}, claimed {e.fingerprint}")

    # fixed-set metadata against the Betti equations
    for g in e.generators:
        if g.fixed is None:
            continue
        m = isos[g.name]
        if m.is_identity() or not is_involution(m):
            rep.add(f"Betti consistency [{g.name}]", False, "fixed-set data given for a non-involution")
            continue
        try:
            prof = FixedSetProfile.parse(g.fixed)
        except EquivariantError as err:
            rep.add(f"Betti consistency [{g.name}]", False, str(err))
            continue
        d = decompose_involution(L, m)
        allowed = enumerate_profiles(d, *complete_caps(d))
        rep.add(f"Betti consistency [{g.name}]", prof in allowed,
                f"{prof} with {d}" + ("" if prof in allowed else "; allowed: " + ", ".join(map(str, allowed))))

    # block structure of connected sums
    if e.construction in (GLUE, EQUIVARIANT_SUM):
        if not e.splitting:
            rep.add("block structure", False, "a connected sum needs a declared splitting")
        else:
            try:
                blocks = _split_blocks(e)
            except CatalogError as err:
                rep.add("block structure", False, str(err))
                blocks = None
            if blocks is not None:
                owner = {i: b for b, rng in enumerate(blocks) for i in rng}
                gram = L.gram_in(e.basis)
                bad = [(i, j) for i in owner for j in owner if owner[i] != owner[j] and gram[i][j]]
                rep.add("block structure [form]", not bad,
                        "" if not bad else f"summands are not orthogonal at {bad[0]}")
                for g in e.generators:
                    mat = isos[g.name].matrix(e.basis)
                    bad = [(i, j) for i in owner for j in owner if owner[i] != owner[j] and mat[i][j]]
                    rep.add(f"block structure [{g.name}]", not bad,
                            "" if not bad else f"entry ({bad[0][0] + 1},{bad[0][1] + 1}) mixes summands")

    # local actions at the gluing points
    if e.reps:
        for r in e.reps:
            _check_homomorphism(rep, e, r)
        if len(e.reps) == 2:
            gr = glue_compatibility(e.reps[0], e.reps[1], declared=e.conjugator)
            if gr.ok and e.conjugator is not None:
                search = glue_compatibility(e.reps[0], e.reps[1])
                gr = GlueReport(search.ok, gr.conjugator, gr.reason)
            rep.add("glue compatibility", gr.ok, gr.reason)
    return rep


def _check_homomorphism(rep: VerificationReport, e: RealizationEntry, r: TangentialRep):
    """The local action must extend to a faithful representation of the subgroup it is given on."""
    try:
        elems = [e.element(k) for k, _ in r.images]
    except LatticeError as err:
        rep.add(f"local action at {r.point}", False, str(err))
        return
    one = Isometry.identity(e.lattice)
    by_key = {one.key(): one}
    seen = {(one.key(), intmat.identity(4))}
    frontier = list(seen)
    gens = [(m, img) for m, (_, img) in zip(elems, r.images)]
    while frontier and len(seen) <= 4096:
        nxt = []
        for k, a in frontier:
            for g, gimg in gens:
                y = by_key[k] * g
                by_key.setdefault(y.key(), y)
                pair = (y.key(), intmat.mat_mul(a, gimg))
                if pair not in seen:
                    seen.add(pair)
                    nxt.append(pair)
        frontier = nxt
    lattice_side = {k for k, _ in seen}
    local_side = {a for _, a in seen}
    hom = len(seen) == len(lattice_side)
    faithful = hom and len(local_side) == len(lattice_side)
    rep.add(f"local action at {r.point} is a homomorphism", hom,
            f"{len(lattice_side)} elements" if hom else "two local actions lie over the same class")
    if hom:
        rep.add(f"local action at {r.point} is faithful", faithful,
                "" if faithful else "distinct classes act identically")


# ---- loading ----

def _yes(text: str | None) -> bool:
    return (text or "").strip().lower() in ("yes", "true", "1")


def parse_entry(text: str, source: str = "") -> RealizationEntry:
    sections = parse_document(text, source)
    if not sections or sections[0].kind != "entry":
        raise CatalogError(f"{source}: a catalog file starts with an [entry] section")
    head = sections[0]
    gens, reps, conj = [], [], None
    for sec in sections[1:]:
        if sec.kind == "generator":
            if not sec.name:
                raise sec.error("a generator needs a name")
            order = sec.get("order")
            gens.append(GeneratorRecord(sec.name, parse_matrix(sec.require("matrix"), sec.line_of("matrix")),
                                        int(order) if order else None, sec.get("expression"),
                                        sec.get("descriptor"), sec.get("pieces"), sec.get("fixed")))
        elif sec.kind == "local":
            images = []
            for k, v, ln in sec.fields:
                if k == "forbid_minus_identity":
                    continue
                try:
                    images.append((k, parse_local_action(v)))
                except CatalogError as err:
                    raise DocumentError(str(err), ln, source) from None
            reps.append(TangentialRep(sec.name or f"point {len(reps) + 1}", tuple(images),
                                      _yes(sec.get("forbid_minus_identity"))))
        elif sec.kind == "glue":
            if sec.get("conjugator"):
                conj = parse_local_action(sec.get("conjugator"))
        else:
            raise sec.error(f"unexpected section [{sec.kind}]")
    construction = head.require("construction")
    if construction not in CONSTRUCTIONS:
        raise head.error(f"construction must be one of {', '.join(CONSTRUCTIONS)}", "construction")
    if len(reps) not in (0, 2):
        raise head.error("give local actions at both gluing points or at neither")
    splitting = head.get("splitting")
    flags = tuple((k.split(None, 1)[1], *[x.strip() for x in v.split(":", 1)])
                  for k, v, _ in head.fields if k.startswith("flag "))
    order = head.get("order")
    return RealizationEntry(
        name=head.require("name"), manifold=head.require("manifold"), basis=head.get("basis", CANONICAL),
        construction=construction, fingerprint=head.require("fingerprint"), generators=tuple(gens),
        group_order=int(order) if order else None,
        splitting=tuple(tuple(split_list(b)) for b in splitting.split("|")) if splitting else None,
        reps=tuple(reps), conjugator=conj, flags=flags, notes=tuple(head.get_all("note")), source=source)


def load_entry(path) -> RealizationEntry:
    p = Path(path)
    return parse_entry(p.read_text(), p.name)


@lru_cache(maxsize=1)
def load_catalog() -> tuple:
    d = resources.files("dpmod") / "data" / "catalog"
    files = sorted((f for f in d.iterdir() if f.name.endswith(".txt")), key=lambda f: f.name)
    return tuple(parse_entry(f.read_text(), f.name) for f in files)


def catalog_entry(name: str) -> RealizationEntry:
    for e in load_catalog():
        if e.name == name:
            return e
    raise KeyError(name)


# ---- the parametric family on M_n ----

def parametric_entry_Mn(n: int) -> RealizationEntry:
    """Negation on the first n classes, glued from negation on M_{n-1} and a reflection on one more summand."""
    if not 1 <= n <= 8:
        raise CatalogError("the parametric entry covers 1 <= n <= 8")
    L = m_n(n)
    diag = [-1] * n + [1]
    mat = tuple(tuple(diag[i] if i == j else 0 for j in range(n + 1)) for i in range(n + 1))
    first = "; ".join(" ".join(str(-1 if i == j else 0) for j in range(n)) for i in range(n))
    expr = " ".join(["Ref(H)"] + [f"Ref(E{k})" for k in range(1, n)])
    notes = ["the fixed set of the negation on the first summand is recorded only as containing an RP2 "
             "through the gluing point; the combined fixed set is not extrapolated"]
    flags = ()
    fixed = None
    if n == 1:
        fixed = "[RP2, pt]"
    if n == 2:
        flags = (("designated-class", "c", "on M2 the class studied for complex structures is Ref(E1)Ref(E2), "
                                           "realized by the order-16 entry instead"),)
    names = L.basis_names
    gen = GeneratorRecord("c", mat, 2, expr, None, f"{first} | 1", fixed)
    local = (("c", parse_local_action("-a -b c d")),)
    return RealizationEntry(
        name=f"m{n}-negate-first-{n}", manifold=f"M{n}", basis=CANONICAL, construction=GLUE, fingerprint="Z/2",
        generators=(gen,), group_order=2, splitting=(tuple(names[:n]), (names[n],)),
        reps=(TangentialRep("first piece", local), TangentialRep("second piece", local)),
        conjugator=parse_local_action("b a c d"), flags=flags, notes=tuple(notes), source="generated")

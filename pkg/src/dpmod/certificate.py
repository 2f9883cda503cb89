"""Proof certificates: small scripts of lattice and tangent-representation facts.

A certificate names a finite group (generators given as isometry expressions)
and lists steps. Each step is checked against the lattice before it is applied;
branching steps must list every admissible case, and a branch is closed only by
an explicit contradiction. Replay ends Obstructed when every branch closes,
Undetermined when some stay open, and Rejected at the first invalid step.

File layout::

    [hypothesis]
    name = ...
    role = proof            # or lemma
    lattice = M3
    schema = 1
    element s12 = Ref(E1-E2)
    generators = s12, r3
    include = other-file.txt   # optional lemma replayed first

    [step]
    kind = AssertProfile
    at = some/branch/path      # omitted means the root
    ...

Components are named per owner: ``s12:F1`` is the component F1 of Fix(s12).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from itertools import product
from pathlib import Path

from . import diophantine as dio
from .equivariant import (EquivariantError, FixedSetProfile, complete_caps, decompose_involution,
                          empty_fixed_set_possible, enumerate_profiles, is_involution)
from .isometry import Isometry, MatrixGroup, close_group
from .lattice import (LatticeError, Sublattice, eigenlattice, intersect_sublattices, lattice_by_name,
                      sublattice_gram)
from .signature_defect import defect_budget, parity_prune
from .textdata import DocumentError, evaluate_expression, parse_document, split_list
from .verdict import OBSTRUCTED, REJECTED, UNDETERMINED, Verdict

SCHEMA = "1"
ROLES = ("proof", "lemma")
STEP_KINDS = ("Decompose", "AssertProfile", "Branch", "IsolatedPointPropagation", "MinusIdentityTangent",
              "CommuteAction", "EigenMembership", "Intersect", "BudgetEquation", "SplitBudget",
              "NonzeroByLemma", "CloseBranch")

# tangent representations at a fixed point are diagonal sign matrices of determinant +1
_TANGENT_SIGNS = tuple(s for s in product((1, -1), repeat=4) if s[0] * s[1] * s[2] * s[3] == 1)
_MINUS = (-1, -1, -1, -1)
_SURFACE_FRAME = (1, 1, -1, -1)


class CertificateError(ValueError):
    pass


class StepRejected(Exception):
    pass


@dataclass(frozen=True)
class CertificateHypothesis:
    name: str
    lattice: object
    elements: tuple            # (name, Isometry) in definition order
    generators: tuple
    group: MatrixGroup

    def element(self, name: str) -> Isometry:
        for n, m in self.elements:
            if n == name:
                return m
        raise StepRejected(f"unknown element {name!r}")

    @property
    def names(self) -> dict:
        return dict(self.elements)


@dataclass(frozen=True)
class Step:
    kind: str
    section: object
    origin: str

    def get(self, key, default=None):
        return self.section.get(key, default)

    def require(self, key) -> str:
        v = self.section.get(key)
        if v is None:
            raise StepRejected(f"{self.kind} needs '{key}'")
        return v


@dataclass(frozen=True)
class Certificate:
    name: str
    role: str
    hypothesis: CertificateHypothesis
    steps: tuple
    include: "Certificate | None" = None
    source: str = ""

    @property
    def manifold(self) -> str:
        return self.hypothesis.lattice.name


# ---- parsing ----

def parse_certificate(text: str, source: str = "", resolve=None) -> Certificate:
    """resolve(name) returns the text of an included file."""
    sections = parse_document(text, source)
    if not sections or sections[0].kind != "hypothesis":
        raise CertificateError(f"{source}: a certificate starts with a [hypothesis] section")
    hyp_sec = sections[0]
    schema = hyp_sec.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise CertificateError(f"{source}: unsupported schema {schema!r}")
    role = hyp_sec.get("role", "proof")
    if role not in ROLES:
        raise hyp_sec.error(f"role must be one of {ROLES}", "role")
    try:
        L = lattice_by_name(hyp_sec.require("lattice"))
    except LatticeError as e:
        raise hyp_sec.error(str(e), "lattice") from None
    names = {}
    order = []
    for key, value, line in hyp_sec.fields:
        if not key.startswith("element "):
            continue
        nm = key.split(None, 1)[1].strip()
        if nm in names:
            raise DocumentError(f"element {nm!r} defined twice", line, source)
        try:
            names[nm] = evaluate_expression(L, value, names)
        except LatticeError as e:
            raise DocumentError(str(e), line, source) from None
        order.append(nm)
    gens = split_list(hyp_sec.require("generators"))
    for gname in gens:
        if gname not in names:
            raise hyp_sec.error(f"generator {gname!r} is not a defined element", "generators")
    group = close_group(MatrixGroup.generated_by(L, [names[gname] for gname in gens]))
    if not group:
        raise hyp_sec.error("the generators do not close to a finite group", "generators")
    for nm in order:
        if not group.contains(names[nm]):
            raise hyp_sec.error(f"element {nm!r} is not in the generated group")
    hyp = CertificateHypothesis(hyp_sec.require("name"), L, tuple((n, names[n]) for n in order), tuple(gens), group)

    include = None
    inc_name = hyp_sec.get("include")
    if inc_name:
        if resolve is None:
            raise hyp_sec.error("include given but no resolver available", "include")
        include = parse_certificate(resolve(inc_name), inc_name, resolve)
        if include.role != "lemma":
            raise hyp_sec.error(f"{inc_name} is not a lemma", "include")
        if include.include is not None:
            raise hyp_sec.error("nested includes are not supported", "include")

    steps = []
    for i, sec in enumerate(sections[1:], start=1):
        if sec.kind != "step":
            raise sec.error("only [step] sections may follow the hypothesis")
        kind = sec.get("kind")
        if kind not in STEP_KINDS:
            raise sec.error(f"unknown step kind {kind!r}", "kind")
        steps.append(Step(kind, sec, f"{source} step {i}"))
    return Certificate(hyp.name, role, hyp, tuple(steps), include, source)


def load_certificate(path) -> Certificate:
    p = Path(path)
    return parse_certificate(p.read_text(), p.name, lambda nm: (p.parent / nm).read_text())


def _shipped_dir():
    return resources.files("dpmod") / "data" / "certificates"


@lru_cache(maxsize=1)
def shipped_certificates() -> tuple:
    d = _shipped_dir()
    resolve = lambda nm: (d / nm).read_text()
    files = sorted((f for f in d.iterdir() if f.name.endswith(".txt")), key=lambda f: f.name)
    return tuple(parse_certificate(f.read_text(), f.name, resolve) for f in files)


def shipped_certificate(name: str) -> Certificate:
    for c in shipped_certificates():
        if c.name == name:
            return c
    raise KeyError(name)


# ---- replay state ----

@dataclass
class SurfaceFacts:
    owner: str
    component: object
    memberships: list = field(default_factory=list)
    nonzero: bool = False
    dependency: tuple | None = None      # (sign, element name, base class) meaning self = sign * g(base)
    preserved_by: set = field(default_factory=set)
    action_sign: dict = field(default_factory=dict)

    def same_facts(self, other: "SurfaceFacts") -> bool:
        return (self.component == other.component and set(self.memberships) == set(other.memberships)
                and self.nonzero == other.nonzero and self.dependency is None and other.dependency is None
                and self.preserved_by == other.preserved_by and self.action_sign == other.action_sign)


@dataclass
class PointFacts:
    owner: str
    fixed_by: set = field(default_factory=set)     # keys of elements mapping the point to itself
    propagated: bool = False
    located: dict = field(default_factory=dict)    # element name -> surface name containing the point
    minus_identity: str | None = None


@dataclass
class ConstraintState:
    profiles: dict = field(default_factory=dict)   # owner -> FixedSetProfile
    names: dict = field(default_factory=dict)      # owner -> tuple of qualified component names
    surfaces: dict = field(default_factory=dict)
    points: dict = field(default_factory=dict)
    equations: dict = field(default_factory=dict)  # owner -> budget


def _join(path: str, child: str) -> str:
    return f"{path}/{child}" if path else child


def _sign(text: str) -> int:
    t = text.strip()
    if t in ("+", "+1", "plus"):
        return 1
    if t in ("-", "-1", "minus"):
        return -1
    raise StepRejected(f"bad sign {text!r}")


def _sign_str(s: int) -> str:
    return "+" if s > 0 else "-"


class _Replay:
    def __init__(self, hyp: CertificateHypothesis):
        self.hyp = hyp
        self.L = hyp.lattice
        self.by_key = {m.key(): m for m in hyp.group.elements}
        self.open = {"": ConstraintState()}
        self.closed = []      # (path, reason)
        self.trace = []

    # -- lookups --
    def leaf(self, path: str) -> ConstraintState:
        if path not in self.open:
            if any(p == path for p, _ in self.closed):
                raise StepRejected(f"branch {path or '(root)'} is already closed")
            raise StepRejected(f"no open branch {path or '(root)'}")
        return self.open[path]

    def element(self, name: str) -> Isometry:
        return self.hyp.element(name)

    def involution(self, name: str) -> Isometry:
        m = self.element(name)
        if m.is_identity() or not is_involution(m):
            raise StepRejected(f"{name} is not an involution")
        return m

    def name_of(self, key) -> str:
        for n, m in self.hyp.elements:
            if m.key() == key:
                return n
        return "<unnamed>"

    @staticmethod
    def surface(st: ConstraintState, qname: str) -> SurfaceFacts:
        if qname not in st.surfaces:
            raise StepRejected(f"{qname} is not a known surface component")
        return st.surfaces[qname]

    @staticmethod
    def point(st: ConstraintState, qname: str) -> PointFacts:
        if qname not in st.points:
            raise StepRejected(f"{qname} is not a known isolated point")
        return st.points[qname]

    def admissible(self, owner: str) -> tuple:
        m = self.involution(owner)
        d = decompose_involution(self.L, m)
        mc, mx = complete_caps(d)
        budget = defect_budget(self.L, m)
        profiles = [p for p in enumerate_profiles(d, mc, mx) if parity_prune(budget, p)]
        empty = empty_fixed_set_possible(d) and budget.budget == 0
        return profiles, empty, d, budget

    # -- state helpers --
    def install_profile(self, st: ConstraintState, owner: str, profile: FixedSetProfile, names: list):
        if owner in st.profiles:
            raise StepRejected(f"the fixed set of {owner} is already fixed")
        if len(names) != len(profile):
            raise StepRejected(f"{len(profile)} component names needed, got {len(names)}")
        qnames = []
        for nm, comp in zip(names, profile.components):
            q = f"{owner}:{nm}"
            if q in st.surfaces or q in st.points or q in qnames:
                raise StepRejected(f"component name {q} used twice")
            qnames.append(q)
            if comp.is_surface:
                st.surfaces[q] = SurfaceFacts(owner, comp)
            else:
                st.points[q] = PointFacts(owner, {self.element(owner).key()})
        st.profiles[owner] = profile
        st.names[owner] = tuple(qnames)

    def owner_surfaces(self, st: ConstraintState, owner: str) -> list:
        return [q for q in st.names.get(owner, ()) if q in st.surfaces]

    def propagate(self, st: ConstraintState):
        """If g preserves all but one surface of a given type in Fix(E), it preserves the last one too."""
        changed = True
        while changed:
            changed = False
            for owner in st.profiles:
                qs = self.owner_surfaces(st, owner)
                for q in qs:
                    same = [r for r in qs if st.surfaces[r].component == st.surfaces[q].component]
                    others = [r for r in same if r != q]
                    if not others:
                        continue
                    common = set.intersection(*(st.surfaces[r].preserved_by for r in others))
                    new = common - st.surfaces[q].preserved_by
                    if new:
                        st.surfaces[q].preserved_by |= new
                        changed = True

    def base_of(self, st: ConstraintState, qname: str) -> tuple:
        """(base name, sign, transform) with class(qname) = sign * transform(class(base))."""
        seen = set()
        sign, transform = 1, Isometry.identity(self.L)
        cur = qname
        while st.surfaces[cur].dependency is not None:
            if cur in seen:
                raise StepRejected("cyclic dependency between surface classes")
            seen.add(cur)
            s, g, base = st.surfaces[cur].dependency
            sign *= s
            transform = transform * self.element(g)
            cur = base
        return cur, sign, transform

    def base_lattice(self, st: ConstraintState, base: str) -> tuple:
        """Lattice allowed for the base class given all memberships in its family, and whether it is nonzero."""
        lat = Sublattice.full(self.L)
        nonzero = False
        for q in st.surfaces:
            b, _, t = self.base_of(st, q)
            if b != base:
                continue
            inv = t.inverse()
            for mem in st.surfaces[q].memberships:
                pulled = Sublattice.span(self.L, [inv.apply(v.vector) for v in mem.basis_vectors])
                lat = intersect_sublattices(lat, pulled)
            nonzero = nonzero or st.surfaces[q].nonzero
        return lat, nonzero

    def own_lattice(self, s: SurfaceFacts) -> Sublattice:
        lat = Sublattice.full(self.L)
        for mem in s.memberships:
            lat = intersect_sublattices(lat, mem)
        return lat

    # -- tangent models --
    def tangent_models(self, st: ConstraintState, pname: str, elements: list, frame: str | None = None) -> list:
        """All faithful diagonal representations of <elements> on the tangent space at the point."""
        p = self.point(st, pname)
        gens = list(elements)
        if p.minus_identity is not None:
            gens.append(p.minus_identity)
        mats = [self.element(g) for g in gens]
        for g, m in zip(gens, mats):
            if m.is_identity() or not is_involution(m):
                raise StepRejected(f"{g} is not an involution")
        for a in mats:
            for b in mats:
                if not a.commutes_with(b):
                    raise StepRejected("the elements acting at the point do not commute")
        # independent basis of the elementary abelian group
        elems = {Isometry.identity(self.L).key(): ()}
        basis = []
        for m in mats:
            if m.key() in elems:
                continue
            basis.append(m)
            new = {}
            for k, word in elems.items():
                new[(self.by_key[k] * m).key()] = word + (len(basis) - 1,)
            elems.update(new)
        word_of = elems
        named = {self.element(n).key(): n for n in st.profiles}
        required = {}
        if p.minus_identity is not None:
            required[self.element(p.minus_identity).key()] = _MINUS
        if frame is not None:
            required[self.element(frame).key()] = _SURFACE_FRAME
        for k in word_of:
            n = named.get(k)
            if n is None or k not in p.fixed_by:
                continue
            if not st.profiles[n].surfaces:
                required.setdefault(k, _MINUS)
                if required[k] != _MINUS:
                    raise StepRejected(f"{n} fixes only points but is required to fix a surface at {pname}")
        located = {self.element(n).key() for n in p.located}
        models = []
        for images in product(_TANGENT_SIGNS, repeat=len(basis)):
            rho = {}
            for k, word in word_of.items():
                v = (1, 1, 1, 1)
                for i in word:
                    v = tuple(a * b for a, b in zip(v, images[i]))
                rho[k] = v
            if len(set(rho.values())) != len(rho):
                continue
            if any(rho[k] != v for k, v in required.items()):
                continue
            if any(rho[k].count(-1) != 2 for k in located if k in rho):
                continue
            models.append(rho)
        return models

    # -- step handlers --
    def run(self, step: Step, root: str) -> str:
        at = _join(root, step.get("at", "")) if step.get("at") else root
        handler = getattr(self, "_step_" + step.kind)
        return handler(step, at)

    def _step_Decompose(self, step, at):
        st = self.leaf(at)
        name = step.require("element")
        d = decompose_involution(self.L, self.involution(name))
        expect = step.get("expect")
        if expect is not None:
            want = tuple(int(x) for x in split_list(expect))
            if want != (d.t, d.c, d.r):
                raise StepRejected(f"{name} has {d}, not {want}")
        del st
        return f"{name}: {d}, Lefschetz number {d.lefschetz}"

    def _check_empty_excluded(self, owner, empty, d, budget):
        if empty:
            raise StepRejected(f"the empty fixed set is admissible for {owner} "
                               f"(Lefschetz {d.lefschetz}, budget {budget.budget})")

    def _step_AssertProfile(self, step, at):
        st = self.leaf(at)
        owner = step.require("element")
        profile, names = self._profile_and_names(step.require("profile"), step.require("names"))
        admissible, empty, d, budget = self.admissible(owner)
        if admissible != [profile]:
            raise StepRejected(f"admissible profiles of {owner} are "
                               f"{', '.join(str(p) for p in admissible) or 'none'}, not only {profile}")
        self._check_empty_excluded(owner, empty, d, budget)
        self.install_profile(st, owner, profile, names)
        return f"Fix({owner}) = {profile} as {', '.join(names)} (only admissible shape, budget {budget.budget})"

    @staticmethod
    def _profile_and_names(ptext: str, ntext: str) -> tuple:
        try:
            profile = FixedSetProfile.parse(ptext)
        except EquivariantError as e:
            raise StepRejected(str(e)) from None
        # names follow the written order, which must already be the canonical one
        parts = [x for x in ptext.strip().strip("[]").split(",") if x.strip()]
        if len(parts) == len(profile) and str(profile) != "[" + ", ".join(x.strip() for x in parts) + "]":
            raise StepRejected(f"write the profile in canonical order {profile}")
        return profile, split_list(ntext)

    def _step_Branch(self, step, at):
        st = self.leaf(at)
        on = step.require("on").split()
        cases = step.section.get_all("case")
        if not cases:
            raise StepRejected("a branch needs cases")
        if on[0] == "profile" and len(on) == 2:
            return self._branch_profile(st, at, on[1], cases)
        if on[0] == "action" and len(on) == 3:
            return self._branch_action(st, at, on[1], on[2], cases)
        raise StepRejected("branch on 'profile E' or 'action g E:C'")

    def _branch_profile(self, st, at, owner, cases):
        admissible, empty, d, budget = self.admissible(owner)
        self._check_empty_excluded(owner, empty, d, budget)
        parsed = []
        for c in cases:
            parts = [x.strip() for x in c.split(":")]
            if len(parts) != 3:
                raise StepRejected(f"case {c!r} should read 'name : profile : component names'")
            profile, names = self._profile_and_names(parts[1], parts[2])
            parsed.append((parts[0], profile, names))
        listed = [p for _, p, _ in parsed]
        if sorted(map(str, listed)) != sorted(map(str, admissible)) or len(set(map(str, listed))) != len(listed):
            raise StepRejected(f"cases {', '.join(map(str, listed))} do not match the admissible profiles "
                               f"{', '.join(map(str, admissible))}")
        self._split(at, st, [(nm, lambda s, p=p, n=n: self.install_profile(s, owner, p, n)) for nm, p, n in parsed])
        return f"Fix({owner}) is one of {', '.join(str(p) for p in admissible)}"

    def _branch_action(self, st, at, gname, cname, cases):
        g = self.element(gname)
        c = self.surface(st, cname)
        if not g.commutes_with(self.element(c.owner)):
            raise StepRejected(f"{gname} does not commute with {c.owner}")
        if g.key() in c.preserved_by:
            candidates = [cname]
        else:
            candidates = [q for q in self.owner_surfaces(st, c.owner) if st.surfaces[q].component == c.component]
        want = {(s, q) for q in candidates for s in (1, -1)}
        parsed = []
        for text in cases:
            parts = [x.strip() for x in text.split(":", 1)]
            if len(parts) != 2 or not parts[1] or parts[1][0] not in "+-":
                raise StepRejected(f"case {text!r} should read 'name : +owner:component'")
            parsed.append((parts[0], _sign(parts[1][0]), parts[1][1:].strip()))
        got = [(s, q) for _, s, q in parsed]
        if set(got) != want or len(got) != len(want):
            listing = ", ".join(f"{_sign_str(s)}{q}" for s, q in sorted(want, key=lambda x: (x[1], -x[0])))
            raise StepRejected(f"{gname}({cname}) must be split into exactly {listing}")

        def effect(s_, q_):
            def apply(state):
                base = state.surfaces[cname]
                if q_ == cname:
                    if g.key() in base.action_sign and base.action_sign[g.key()] != s_:
                        raise StepRejected("conflicting orientation sign")
                    base.action_sign[g.key()] = s_
                    base.preserved_by.add(g.key())
                else:
                    target = state.surfaces[q_]
                    if target.dependency is not None:
                        raise StepRejected(f"{q_} already depends on another class")
                    target.dependency = (s_, gname, cname)
                    self.base_of(state, cname)
                    self.base_of(state, q_)
                self.propagate(state)
            return apply

        self._split(at, st, [(nm, effect(s, q)) for nm, s, q in parsed])
        return f"{gname}({cname}) is one of " + ", ".join(f"{_sign_str(s)}{q}" for _, s, q in parsed)

    def _split(self, at, st, children):
        names = [nm for nm, _ in children]
        if len(set(names)) != len(names) or any(not nm or "/" in nm for nm in names):
            raise StepRejected("case names must be distinct and nonempty")
        built = {}
        for nm, apply in children:
            child = copy.deepcopy(st)
            apply(child)
            built[_join(at, nm)] = child
        del self.open[at]
        self.open.update(built)

    def _step_IsolatedPointPropagation(self, step, at):
        st = self.leaf(at)
        pname = step.require("point")
        p = self.point(st, pname)
        owner = self.element(p.owner)
        locate = step.get("locate")
        if locate is None:
            if len(st.profiles[p.owner].points) != 1:
                raise StepRejected(f"{pname} is not the only isolated point of {p.owner}")
            cent = {k for k, m in self.by_key.items() if m.commutes_with(owner)}
            p.fixed_by |= cent
            p.propagated = True
            return f"{pname} is fixed by the centralizer of {p.owner} ({len(cent)} elements)"
        if not p.propagated:
            raise StepRejected(f"propagate {pname} before locating it")
        s = self.surface(st, locate)
        e = self.element(s.owner)
        if e.key() not in p.fixed_by:
            raise StepRejected(f"{s.owner} does not fix {pname}")
        if s.owner in p.located:
            raise StepRejected(f"{pname} is already located in Fix({s.owner})")
        if st.profiles[s.owner].points and (p.minus_identity is None or p.minus_identity == s.owner):
            raise StepRejected(f"{pname} might be an isolated point of {s.owner}")
        peers = self.owner_surfaces(st, s.owner)
        for q in peers:
            if not st.surfaces[q].same_facts(s):
                raise StepRejected(f"{locate} and {q} are not interchangeable")
        for other in st.points.values():
            if s.owner in other.located:
                raise StepRejected(f"another point is already located in Fix({s.owner})")
        p.located[s.owner] = locate
        added = [k for k in p.fixed_by if self.by_key[k].commutes_with(e)]
        s.preserved_by |= set(added)
        self.propagate(st)
        return f"{pname} lies on {locate}, which is then preserved by {len(added)} elements"

    def _step_MinusIdentityTangent(self, step, at):
        st = self.leaf(at)
        pname = step.require("point")
        p = self.point(st, pname)
        if len(st.profiles[p.owner].points) != 1:
            raise StepRejected(f"{pname} is not the only isolated point of {p.owner}")
        if p.minus_identity is not None:
            raise StepRejected(f"the tangent action at {pname} is already recorded")
        p.minus_identity = p.owner
        return f"{p.owner} acts as -1 on the tangent space at {pname}"

    def _step_CommuteAction(self, step, at):
        st = self.leaf(at)
        gname = step.require("element")
        cname = step.require("component")
        pname = step.require("point")
        claimed = _sign(step.require("sign"))
        s = self.surface(st, cname)
        p = self.point(st, pname)
        g = self.element(gname)
        if p.located.get(s.owner) != cname:
            raise StepRejected(f"{pname} is not known to lie on {cname}")
        if g.key() not in p.fixed_by:
            raise StepRejected(f"{gname} does not fix {pname}")
        if not g.commutes_with(self.element(s.owner)):
            raise StepRejected(f"{gname} does not commute with {s.owner}")
        models = self.tangent_models(st, pname, [s.owner, gname], frame=s.owner)
        if not models:
            raise StepRejected(f"no tangent model at {pname}; close the branch instead")
        signs = {m[g.key()][0] * m[g.key()][1] for m in models}
        if signs != {claimed}:
            raise StepRejected(f"the orientation sign of {gname} on {cname} is not forced to be "
                               f"{_sign_str(claimed)} ({len(models)} models)")
        if s.action_sign.get(g.key(), claimed) != claimed:
            raise StepRejected("conflicting orientation sign")
        s.action_sign[g.key()] = claimed
        s.preserved_by.add(g.key())
        self.propagate(st)
        return f"{gname} preserves {cname} with sign {_sign_str(claimed)} in all {len(models)} tangent models"

    def _step_EigenMembership(self, step, at):
        st = self.leaf(at)
        cname = step.require("component")
        gname = step.require("element")
        sgn = _sign(step.require("sign"))
        s = self.surface(st, cname)
        g = self.element(gname)
        if not ((gname == s.owner and sgn == 1) or s.action_sign.get(g.key()) == sgn):
            raise StepRejected(f"the action of {gname} on {cname} with sign {_sign_str(sgn)} is not established")
        lat = eigenlattice(self.L, g, sgn)
        if lat not in s.memberships:
            s.memberships.append(lat)
        return f"[{cname}] lies in E{_sign_str(sgn)}({gname}) = {lat.describe()}"

    def _step_Intersect(self, step, at):
        st = self.leaf(at)
        cname = step.require("component")
        lat = self.own_lattice(self.surface(st, cname))
        expect = step.get("expect")
        if expect is not None:
            want = Sublattice.zero(self.L) if expect.strip() == "0" else \
                Sublattice.span(self.L, [self.L.parse(x) for x in expect.split(",")])
            if want != lat:
                raise StepRejected(f"[{cname}] lies in {lat.describe()}, not {want.describe()}")
        return f"[{cname}] lies in {lat.describe()}"

    def _orientable_owner(self, st, owner, count):
        prof = st.profiles.get(owner)
        if prof is None:
            raise StepRejected(f"the fixed set of {owner} is not known")
        if len(prof.surfaces) != count or not prof.all_orientable:
            raise StepRejected(f"Fix({owner}) = {prof} does not have exactly {count} orientable surfaces")
        return defect_budget(self.L, self.element(owner)).budget

    def _step_BudgetEquation(self, step, at):
        st = self.leaf(at)
        owner = step.require("element")
        b = self._orientable_owner(st, owner, 1)
        st.equations[owner] = b
        return f"self-intersection of the surface of Fix({owner}) equals {b}"

    def _step_SplitBudget(self, step, at):
        st = self.leaf(at)
        owner = step.require("element")
        b = self._orientable_owner(st, owner, 2)
        st.equations[owner] = b
        return f"self-intersections of the two surfaces of Fix({owner}) add up to {b}"

    def _step_NonzeroByLemma(self, step, at):
        st = self.leaf(at)
        cname = step.require("component")
        s = self.surface(st, cname)
        prof = st.profiles[s.owner]
        if len(prof) < 2 or not s.component.orientable:
            raise StepRejected(f"{cname} need not carry a nonzero class (Fix({s.owner}) = {prof})")
        s.nonzero = True
        return f"[{cname}] is nonzero"

    def _step_CloseBranch(self, step, at):
        st = self.leaf(at)
        if step.get("membership"):
            cname = step.get("membership")
            self.surface(st, cname)
            base, _, _ = self.base_of(st, cname)
            lat, nonzero = self.base_lattice(st, base)
            if lat.rank != 0 or not nonzero:
                raise StepRejected(f"[{cname}] may still be a nonzero class in {lat.describe()}"
                                   if lat.rank else f"[{cname}] is not known to be nonzero")
            return self._close(at, f"[{cname}] is nonzero but lies in the zero lattice")
        reason = step.require("reason")
        if reason == "unsolvable":
            return self._close_equation(st, at, step.require("equation"))
        if reason == "tangent-conflict":
            pname = step.require("point")
            names = split_list(step.require("elements"))
            p = self.point(st, pname)
            for n in names:
                if self.element(n).key() not in p.fixed_by:
                    raise StepRejected(f"{n} does not fix {pname}")
            models = self.tangent_models(st, pname, names)
            if models:
                raise StepRejected(f"{len(models)} tangent models at {pname} remain")
            return self._close(at, f"no faithful tangent representation at {pname}")
        raise StepRejected(f"unknown closing reason {reason!r}")

    def _close_equation(self, st, at, owner):
        if owner not in st.equations:
            raise StepRejected(f"no budget equation recorded for {owner}")
        budget = st.equations[owner]
        multiplicity = {}
        for q in self.owner_surfaces(st, owner):
            base, _, _ = self.base_of(st, q)
            multiplicity[base] = multiplicity.get(base, 0) + 1
        blocks, nonzero = [], False
        for base in sorted(multiplicity):
            lat, nz = self.base_lattice(st, base)
            nonzero = nonzero or nz
            g = sublattice_gram(lat)
            blocks.append([[multiplicity[base] * x for x in row] for row in g])
        size = sum(len(b) for b in blocks)
        if size > 3:
            raise StepRejected(f"the combined form has rank {size}; constrain the classes further")
        gram = [[0] * size for _ in range(size)]
        o = 0
        for b in blocks:
            for i, row in enumerate(b):
                for j, x in enumerate(row):
                    gram[o + i][o + j] = x
            o += len(b)
        gram = tuple(tuple(r) for r in gram)
        v = dio.solve_form(gram, budget, nonzero)
        if v.status != dio.UNSOLVABLE:
            raise StepRejected(f"Q = {budget} on gram {gram} is {v.status.lower()}")
        detail = f"{v.reason}{': ' + v.detail if v.detail else ''}"
        return self._close(at, f"Q = {budget} has no {'nonzero ' if nonzero else ''}solution on gram {gram} ({detail})")

    def _close(self, at, reason):
        del self.open[at]
        self.closed.append((at, reason))
        return "closed: " + reason


def _check_include(main: CertificateHypothesis, lemma: Certificate):
    if lemma.hypothesis.lattice.name != main.lattice.name:
        raise StepRejected("the included lemma uses a different lattice")
    names = main.names
    for n, m in lemma.hypothesis.elements:
        if n in names and names[n].key() != m.key():
            raise StepRejected(f"element {n} means different things in the certificate and the lemma")
        if not main.group.contains(m):
            raise StepRejected(f"lemma element {n} is not in the group")


def check_certificate(cert: Certificate) -> Verdict:
    hyp = cert.hypothesis
    if cert.include is not None:
        merged = dict(hyp.elements)
        for n, m in cert.include.hypothesis.elements:
            merged.setdefault(n, m)
        hyp = CertificateHypothesis(hyp.name, hyp.lattice, tuple(merged.items()), hyp.generators, hyp.group)
    replay = _Replay(hyp)
    trace = []
    schedule = []
    if cert.include is not None:
        schedule += [(s, "lemma") for s in cert.include.steps]
    schedule += [(s, "main") for s in cert.steps]
    root = ""
    for index, (step, part) in enumerate(schedule, start=1):
        try:
            if index == 1 and cert.include is not None:
                _check_include(hyp, cert.include)
            if part == "main" and cert.include is not None and root == "" and \
                    (index == 1 or schedule[index - 2][1] == "lemma"):
                if len(replay.open) != 1:
                    raise StepRejected(f"the lemma must leave exactly one open branch, not {len(replay.open)}")
                root = next(iter(replay.open))
            line = replay.run(step, root)
        except (StepRejected, LatticeError, dio.UnsupportedEquation) as e:
            return Verdict(REJECTED, tuple(trace), rejected_step=index, message=f"{step.origin}: {e}")
        at = step.get("at")
        where = _join(root, at) if at else root
        trace.append(f"{index}. [{where or 'root'}] {step.kind}: {line}")
    if not replay.open:
        return Verdict(OBSTRUCTED, tuple(trace) + (f"all {len(replay.closed)} branches closed",))
    return Verdict(UNDETERMINED, tuple(trace) + tuple(f"open branch: {p or 'root'}" for p in sorted(replay.open)))

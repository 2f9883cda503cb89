"""Homological obstructions to lifting finite subgroups of the isometry group.

branch_search analyzes one involution of a group. It lists the fixed-set
shapes allowed by the Betti equations, applies the signature budget, and for
each shape asks whether the fixed surfaces can carry integral classes that are
compatible with the elements commuting with the involution. Multi-step
arguments that need tangent representations at isolated points are replayed
from certificates instead (see the certificate module).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

from . import diophantine as dio
from .equivariant import (DEFAULT_MAX_COMPLEXITY, DEFAULT_MAX_COMPONENTS, FixedSetProfile, complete_caps,
                          decompose_involution, empty_fixed_set_possible, enumerate_profiles, is_involution)
from .isometry import Isometry, MatrixGroup, close_group
from .lattice import (LorentzianLattice, Sublattice, eigenlattice, inertia, intersect_sublattices,
                      sublattice_gram)
from .signature_defect import SignatureBudget, defect_budget, parity_prune
from .textdata import format_matrix
from .verdict import CONSISTENT, OBSTRUCTED, REALIZED, UNDETERMINED, ObstructionError, Verdict

DEFAULT_SPLIT_CAP = 16

# per-branch results
CLOSED = "closed"
SURVIVES = "survives"
UNKNOWN = "unknown"
OPEN = "open"


@dataclass(frozen=True)
class LiftHypothesis:
    """A closed finite group, one of its involutions, and elements commuting with it."""

    group: MatrixGroup
    focus: Isometry
    commuting_witnesses: tuple = ()

    def __post_init__(self):
        if not self.group.is_closed:
            raise ObstructionError("the group must be closed before analysis")
        if self.focus.is_identity() or not is_involution(self.focus):
            raise ObstructionError("the focus must have order 2")
        if not self.group.contains(self.focus):
            raise ObstructionError("the focus is not an element of the group")
        for i, w in enumerate(self.commuting_witnesses):
            if not self.group.contains(w):
                raise ObstructionError(f"witness {i + 1} is not an element of the group")
            if not w.commutes_with(self.focus):
                raise ObstructionError(f"witness {i + 1} does not commute with the focus")


def centralizer_witnesses(group: MatrixGroup, focus: Isometry) -> tuple:
    """Greedy generators of the centralizer of focus modulo the subgroup generated by focus."""
    L = group.lattice
    span = close_group(MatrixGroup(L, (focus,)))
    out = []
    for g in group.elements:
        if g.commutes_with(focus) and not span.contains(g):
            out.append(g)
            span = close_group(MatrixGroup(L, (focus,) + tuple(out)))
    return tuple(out)


def make_hypothesis(group: MatrixGroup, focus: Isometry, witnesses=None) -> LiftHypothesis:
    if not group.is_closed:
        closed = close_group(group)
        if not closed:
            raise ObstructionError("the group is not finite within the closure cap")
        group = closed
    if witnesses is None:
        if not group.contains(focus):
            raise ObstructionError("the focus is not an element of the group")
        witnesses = centralizer_witnesses(group, focus)
    return LiftHypothesis(group, focus, tuple(witnesses))


@dataclass(frozen=True)
class BranchOutcome:
    label: str
    result: str
    detail: str
    witness: str | None = None


@dataclass
class _Context:
    lattice: LorentzianLattice
    budget: int
    eplus: Sublattice
    witnesses: tuple
    split_cap: int
    eigen_cache: dict = field(default_factory=dict)

    def eigen(self, i: int, sign: int) -> Sublattice:
        key = (i, sign)
        if key not in self.eigen_cache:
            self.eigen_cache[key] = eigenlattice(self.lattice, self.witnesses[i], sign)
        return self.eigen_cache[key]


def branch_search(h: LiftHypothesis, max_components: int = DEFAULT_MAX_COMPONENTS,
                  max_complexity: int = DEFAULT_MAX_COMPLEXITY, split_cap: int = DEFAULT_SPLIT_CAP,
                  threads: int = 1) -> Verdict:
    L = h.group.lattice
    d = decompose_involution(L, h.focus)
    b = defect_budget(L, h.focus)
    mc, mx = complete_caps(d, max_components, max_complexity)
    profiles = enumerate_profiles(d, mc, mx)
    eplus = eigenlattice(L, h.focus, 1)
    # the eigenlattices are computed up front so worker threads only read the cache
    ctx = _Context(L, b.budget, eplus, h.commuting_witnesses, split_cap)
    for i in range(len(h.commuting_witnesses)):
        ctx.eigen(i, 1), ctx.eigen(i, -1)

    trace = [f"focus: {format_matrix(h.focus.canonical_matrix)}",
             f"decomposition {d}; Lefschetz number {d.lefschetz}",
             f"signature budget 2*{b.sigma_quotient} - ({b.sigma_M}) = {b.budget}",
             f"invariant lattice {eplus.describe()}"]
    for i, w in enumerate(h.commuting_witnesses):
        trace.append(f"witness w{i + 1}: {format_matrix(w.canonical_matrix)}")
    tasks = ([None] if empty_fixed_set_possible(d) else []) + list(profiles)
    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda p: _analyze_profile(ctx, p), tasks))
    else:
        results = [_analyze_profile(ctx, p) for p in tasks]
    outcomes = [o for group in results for o in group]
    for o in outcomes:
        trace.append(f"{o.label}: {o.result}, {o.detail}")
    return Verdict(_fold(outcomes), tuple(trace), witness=tuple(o.witness for o in outcomes if o.witness))


def _fold(outcomes) -> str:
    results = {o.result for o in outcomes}
    if UNKNOWN in results:
        return UNDETERMINED
    if SURVIVES in results:
        return CONSISTENT
    if OPEN in results:
        return UNDETERMINED
    return OBSTRUCTED


def _analyze_profile(ctx: _Context, profile: FixedSetProfile | None) -> list:
    if profile is None:
        if ctx.budget == 0:
            return [BranchOutcome("[empty]", OPEN, "empty fixed set admissible (Lefschetz number 0, budget 0)")]
        return [BranchOutcome("[empty]", CLOSED, f"a free involution needs budget 0, not {ctx.budget}")]
    label = str(profile)
    if not parity_prune(SignatureBudget(0, 0, ctx.budget), profile):
        return [BranchOutcome(label, CLOSED, f"no surface can carry the budget {ctx.budget}")]
    if not profile.all_orientable:
        return [BranchOutcome(label, OPEN, "nonorientable surface, the signature budget does not apply")]
    surfaces = profile.surfaces
    if not surfaces:
        return [BranchOutcome(label, SURVIVES, "isolated points only and budget 0")]
    if len(surfaces) == 1:
        return _single_surface(ctx, profile)
    return [_split_search(ctx, profile)]


def _single_surface(ctx: _Context, profile: FixedSetProfile) -> list:
    nonzero = len(profile) >= 2
    out = []
    k = len(ctx.witnesses)
    for signs in product((1, -1), repeat=k):
        lat = ctx.eplus
        for i, s in enumerate(signs):
            lat = intersect_sublattices(lat, ctx.eigen(i, s))
        v = dio.solve_norm_equation(dio.NormEquation(lat, ctx.budget, nonzero))
        tag = "".join(f" w{i + 1}{'+' if s > 0 else '-'}" for i, s in enumerate(signs))
        label = f"{profile}{tag}"
        eq = f"Q(F,F) = {ctx.budget} on {lat.describe()} (gram {format_matrix(v.gram) if v.gram else '()'})"
        if nonzero:
            eq += ", F nonzero"
        if v.status == dio.SOLVABLE:
            out.append(BranchOutcome(label, SURVIVES, eq + ": " + v.summary(),
                                     f"{label}: F = {ctx.lattice.format(v.witness)}"))
        elif v.status == dio.UNSOLVABLE:
            out.append(BranchOutcome(label, CLOSED, eq + ": " + v.summary()))
        else:
            out.append(BranchOutcome(label, UNKNOWN, eq + ": " + v.summary()))
    return out


def _nondecreasing_splits(k: int, total: int, lo: int, hi: int):
    if k == 1:
        if lo <= total <= hi:
            yield (total,)
        return
    for first in range(lo, hi + 1):
        rest = total - first
        if rest < first * (k - 1) or rest > hi * (k - 1):
            continue
        for tail in _nondecreasing_splits(k - 1, rest, first, hi):
            yield (first,) + tail


def _split_search(ctx: _Context, profile: FixedSetProfile) -> BranchOutcome:
    """Several orientable surfaces: each class lies in the invariant lattice and is nonzero."""
    k = len(profile.surfaces)
    gram = sublattice_gram(ctx.eplus)
    p, q, _ = inertia(gram) if gram else (0, 0, 0)
    cap = ctx.split_cap
    complete = (p == 0 or q == 0) and abs(ctx.budget) <= cap
    verdicts = {}

    def status(value: int):
        if value not in verdicts:
            verdicts[value] = dio.solve_form(gram, value, True)
        return verdicts[value]

    unknown = False
    tried = 0
    for split in _nondecreasing_splits(k, ctx.budget, -cap, cap):
        tried += 1
        sts = [status(x).status for x in split]
        if all(s == dio.SOLVABLE for s in sts):
            classes = ", ".join(ctx.lattice.format(ctx.eplus.combine(status(x).coeffs)) for x in split)
            return BranchOutcome(str(profile), SURVIVES, f"split {split} of budget {ctx.budget} is representable",
                                 f"{profile}: classes {classes}")
        if dio.UNSOLVABLE not in sts:
            unknown = True
    where = f"{k} nonzero classes in {ctx.eplus.describe()} with self-intersections in [-{cap}, {cap}]"
    if unknown:
        return BranchOutcome(str(profile), UNKNOWN, f"some split of {ctx.budget} over {where} is undecided")
    if complete:
        return BranchOutcome(str(profile), CLOSED,
                             f"none of {tried} splits of {ctx.budget} over {where} is representable "
                             "(window complete for a semidefinite lattice)")
    return BranchOutcome(str(profile), OPEN, f"split window exhausted: {where}, none representable")


# ---- complex-structure flags ----

BIHOLOMORPHIC = "biholomorphic"
ANTI_BIHOLOMORPHIC = "anti_biholomorphic"


@dataclass(frozen=True)
class ProfileReport:
    decomposition: object
    budget: int
    profiles: tuple
    empty_branch_admissible: bool
    branch_lines: tuple
    orientable_hypothesis: str
    orientable_hypothesis_closes: bool
    flags: dict
    notes: tuple = ()

    def render(self) -> list:
        out = [f"decomposition {self.decomposition}; budget {self.budget}",
               "profiles: " + (", ".join(str(p) for p in self.profiles) or "none")]
        out += ["  " + line for line in self.branch_lines]
        out.append(f"orientable single-surface hypothesis: {self.orientable_hypothesis}")
        for name in sorted(self.flags):
            f = self.flags[name]
            out.append(f"{name}: {'infeasible' if f['infeasible'] else 'not excluded'} ({f['reason']})")
        out += [f"note: {n}" for n in self.notes]
        return out


def order2_profile_report(L: LorentzianLattice, m: Isometry, flags=(BIHOLOMORPHIC, ANTI_BIHOLOMORPHIC),
                          split_cap: int = DEFAULT_SPLIT_CAP) -> ProfileReport:
    """Which fixed sets survive, and what that says about complex-structure realizations.

    The fixed set of a biholomorphism is orientable, and an anti-biholomorphic
    involution has no isolated fixed points. Both flags are decided over the
    nonempty admissible profiles; an admissible empty fixed set is reported
    separately.
    """
    if m.is_identity() or not is_involution(m):
        raise ObstructionError("the class must have order 2")
    d = decompose_involution(L, m)
    b = defect_budget(L, m)
    mc, mx = complete_caps(d)
    profiles = tuple(enumerate_profiles(d, mc, mx))
    eplus = eigenlattice(L, m, 1)
    ctx = _Context(L, b.budget, eplus, (), split_cap)
    lines = []
    orientable_ok = []
    for p in profiles:
        outs = _analyze_profile(ctx, p)
        for o in outs:
            lines.append(f"{o.label}: {o.result}, {o.detail}")
        if p.all_orientable and any(o.result != CLOSED for o in outs):
            orientable_ok.append(p)
    empty_ok = empty_fixed_set_possible(d) and b.budget == 0

    # the argument shape used for these classes: one surface S plus isolated points
    points = d.t + 2 - 2
    nonzero = points >= 1
    hv = dio.solve_norm_equation(dio.NormEquation(eplus, b.budget, nonzero))
    hyp = (f"S in {eplus.describe()}, Q(S,S) = {b.budget}"
           + (", S nonzero (two or more components)" if nonzero else "") + f": {hv.summary()}")
    hyp_closes = hv.status == dio.UNSOLVABLE

    out_flags = {}
    if BIHOLOMORPHIC in flags:
        if orientable_ok:
            out_flags[BIHOLOMORPHIC] = {"infeasible": False,
                                        "reason": "orientable profile survives: " + ", ".join(map(str, orientable_ok))}
        else:
            why = ("every admissible profile is nonorientable" if not any(p.all_orientable for p in profiles)
                   else "every orientable profile closes")
            out_flags[BIHOLOMORPHIC] = {"infeasible": True, "reason": why}
    if ANTI_BIHOLOMORPHIC in flags:
        pointless = [p for p in profiles if not p.points]
        if pointless:
            out_flags[ANTI_BIHOLOMORPHIC] = {"infeasible": False,
                                             "reason": "profile without isolated points: "
                                                       + ", ".join(map(str, pointless))}
        else:
            out_flags[ANTI_BIHOLOMORPHIC] = {"infeasible": True,
                                             "reason": "every admissible profile has an isolated point"}
    notes = []
    if empty_ok:
        notes.append("an empty fixed set is admissible (Lefschetz number 0, budget 0); "
                     "flags assume a nonempty fixed set")
    return ProfileReport(d, b.budget, profiles, empty_ok, tuple(lines), hyp, hyp_closes, out_flags, tuple(notes))


# ---- classification ----

def maximal_groups(n: int) -> list:
    """(name, closed group) for the maximal finite candidates with -I."""
    from .coxeter import coxeter_system, maximal_finite_candidates
    return maximal_finite_candidates(coxeter_system(n), include_minus_identity=True)


def classify_finite_subgroup(g: MatrixGroup, n: int, catalog=None, certificates=None,
                             maximal=None, threads: int = 1, split_cap: int = DEFAULT_SPLIT_CAP,
                             replay_cache: dict | None = None) -> Verdict:
    """Catalog lookup, then shipped certificates, then branch search over every involution."""
    from . import catalog as cat
    from . import certificate as cert

    if not g.is_closed:
        closed = close_group(g)
        if not closed:
            return Verdict(UNDETERMINED, ("group is not finite within the closure cap",))
        g = closed
    manifold = f"M{n}"
    entries = cat.load_catalog() if catalog is None else catalog
    for e in entries:
        if e.manifold == manifold and e.lattice.gram == g.lattice.gram and g.is_subgroup_of(e.group):
            return Verdict(REALIZED, (f"contained in catalog entry {e.name} (order {e.group.order})",), entry=e.name)
    certs = cert.shipped_certificates() if certificates is None else certificates
    cache = {} if replay_cache is None else replay_cache
    notes = []
    for c in certs:
        if c.role != "proof" or c.hypothesis.lattice.gram != g.lattice.gram:
            continue
        if not c.hypothesis.group.is_subgroup_of(g):
            continue
        if c.name not in cache:
            cache[c.name] = cert.check_certificate(c)
        v = cache[c.name]
        if v.obstructed:
            return Verdict(OBSTRUCTED, (f"contains the group of certificate {c.name}, whose replay is obstructed",)
                           + tuple("  " + t for t in v.trace))
        notes.append(f"certificate {c.name} applies but its replay gives {v.headline()}")
    notes = tuple(notes)
    groups = maximal if maximal is not None else maximal_groups(n)
    if not any(g.is_subgroup_of(m) for _, m in groups):
        return Verdict(UNDETERMINED, notes + ("not contained in a maximal candidate by element matching; "
                                              "conjugacy is not decided",))
    focuses = g.involutions()
    if not focuses:
        return Verdict(CONSISTENT, notes + ("no involution to analyze",))
    verdicts = []
    for f in focuses:
        v = branch_search(make_hypothesis(g, f), split_cap=split_cap, threads=threads)
        verdicts.append(v)
        if v.obstructed:
            return Verdict(OBSTRUCTED, notes + v.trace, witness=v.witness)
    if any(v.status == UNDETERMINED for v in verdicts):
        first = next(v for v in verdicts if v.status == UNDETERMINED)
        return Verdict(UNDETERMINED, notes + first.trace, witness=first.witness)
    return Verdict(CONSISTENT, notes + verdicts[0].trace, witness=verdicts[0].witness)

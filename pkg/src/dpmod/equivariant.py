"""Decomposition of involutions on H_2 and the fixed-set shapes they allow.

An involution of a lattice splits, as a module over Z[Z/2], into t trivial
summands, c sign summands and r regular (rank-2 permutation) summands. For a
nonempty fixed set the mod-2 Betti numbers then satisfy

    b_1(Fix) = c        and        b_0(Fix) + b_2(Fix) = t + 2.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations_with_replacement

from . import intmat
from .lattice import LatticeError, LorentzianLattice, eigenlattice


class EquivariantError(LatticeError):
    pass


@dataclass(frozen=True)
class InvolutionDecomposition:
    t: int
    c: int
    r: int

    @property
    def rank(self) -> int:
        return self.t + self.c + 2 * self.r

    @property
    def betti_one(self) -> int:
        return self.c

    @property
    def betti_even(self) -> int:
        return self.t + 2

    @property
    def lefschetz(self) -> int:
        # trace on H_0 + H_4 is 2; regular summands have trace 0
        return 2 + self.t - self.c

    def __str__(self):
        return f"(t, c, r) = ({self.t}, {self.c}, {self.r})"


def _matrix_of(m) -> tuple:
    return m.canonical_matrix if hasattr(m, "canonical_matrix") else intmat.as_matrix(m)


def is_involution(m) -> bool:
    mat = _matrix_of(m)
    return intmat.mat_mul(mat, mat) == intmat.identity(len(mat))


def decompose_involution(L: LorentzianLattice | None, m) -> InvolutionDecomposition:
    """(t, c, r) of an involution; L may be None for a bare integer matrix."""
    mat = _matrix_of(m)
    n = len(mat)
    if not is_involution(mat):
        raise EquivariantError("matrix is not an involution")
    ident = intmat.identity(n)
    r = intmat.rank_mod2(intmat.mat_sub(mat, ident))
    plus = intmat.rank_rational(intmat.mat_add(mat, ident))
    minus = n - plus
    t, c = plus - r, minus - r
    if t < 0 or c < 0:
        raise AssertionError("inconsistent decomposition")
    return InvolutionDecomposition(t, c, r)


# ---- fixed-set profiles ----

@dataclass(frozen=True, order=True)
class Component:
    """A fixed component: 'O' orientable of genus g, 'N' nonorientable with k crosscaps, 'P' a point."""

    kind: str
    param: int = 0

    def __post_init__(self):
        if self.kind not in ("O", "N", "P"):
            raise EquivariantError(f"unknown component kind {self.kind!r}")
        if self.kind == "N" and self.param < 1:
            raise EquivariantError("a nonorientable surface needs at least one crosscap")
        if self.param < 0 or (self.kind == "P" and self.param):
            raise EquivariantError("bad component parameter")

    @property
    def is_point(self) -> bool:
        return self.kind == "P"

    @property
    def is_surface(self) -> bool:
        return self.kind != "P"

    @property
    def orientable(self) -> bool:
        return self.kind != "N"

    @property
    def betti(self) -> tuple:
        if self.kind == "P":
            return (1, 0, 0)
        if self.kind == "O":
            return (1, 2 * self.param, 1)
        return (1, self.param, 1)

    @property
    def complexity(self) -> int:
        return self.param

    def __str__(self):
        if self.kind == "P":
            return "pt"
        if self.kind == "O":
            return {0: "S2", 1: "T2"}.get(self.param, f"Sigma{self.param}")
        return {1: "RP2", 2: "K"}.get(self.param, f"#{self.param}RP2")


POINT = Component("P")
SPHERE = Component("O", 0)
TORUS = Component("O", 1)
RP2 = Component("N", 1)


def parse_component(text: str) -> Component:
    s = text.strip().replace("^", "").replace(" ", "")
    table = {"pt": POINT, "point": POINT, "S2": SPHERE, "T2": TORUS, "RP2": RP2, "K": Component("N", 2)}
    if s in table:
        return table[s]
    m = re.fullmatch(r"Sigma(\d+)", s)
    if m:
        return Component("O", int(m.group(1)))
    m = re.fullmatch(r"#(\d+)RP2", s)
    if m:
        return Component("N", int(m.group(1)))
    m = re.fullmatch(r"N(\d+)", s)
    if m:
        return Component("N", int(m.group(1)))
    raise EquivariantError(f"cannot parse component {text!r}")


def _sort_key(comp: Component) -> tuple:
    return ({"O": 0, "N": 1, "P": 2}[comp.kind], comp.param)


@dataclass(frozen=True)
class FixedSetProfile:
    components: tuple

    @classmethod
    def of(cls, comps) -> "FixedSetProfile":
        comps = tuple(sorted(comps, key=_sort_key))
        if not comps:
            raise EquivariantError("a profile must be nonempty")
        return cls(comps)

    @classmethod
    def parse(cls, text: str) -> "FixedSetProfile":
        parts = [p for p in re.split(r"[,+]| u ", text.strip().strip("[]")) if p.strip()]
        comps = []
        for p in parts:
            m = re.fullmatch(r"\s*(\d+)\s*(?:x\s*)?(pt|points?)\s*", p)
            if m:
                comps += [POINT] * int(m.group(1))
            else:
                comps.append(parse_component(p))
        return cls.of(comps)

    @property
    def surfaces(self) -> list:
        return [i for i, c in enumerate(self.components) if c.is_surface]

    @property
    def points(self) -> list:
        return [i for i, c in enumerate(self.components) if c.is_point]

    @property
    def all_orientable(self) -> bool:
        return all(c.orientable for c in self.components)

    @property
    def betti_one(self) -> int:
        return sum(c.betti[1] for c in self.components)

    @property
    def betti_even(self) -> int:
        return sum(c.betti[0] + c.betti[2] for c in self.components)

    def satisfies(self, d: InvolutionDecomposition) -> bool:
        return self.betti_one == d.betti_one and self.betti_even == d.betti_even

    def __len__(self):
        return len(self.components)

    def __str__(self):
        return "[" + ", ".join(str(c) for c in self.components) + "]"


DEFAULT_MAX_COMPONENTS = 4
DEFAULT_MAX_COMPLEXITY = 4


def complete_caps(d: InvolutionDecomposition, max_components: int = DEFAULT_MAX_COMPONENTS,
                  max_complexity: int = DEFAULT_MAX_COMPLEXITY) -> tuple:
    """Caps raised far enough that enumeration returns every admissible profile."""
    return max(max_components, d.t + 2), max(max_complexity, d.c, 1)


def enumerate_profiles(d: InvolutionDecomposition, max_components: int = DEFAULT_MAX_COMPONENTS,
                       max_complexity: int = DEFAULT_MAX_COMPLEXITY) -> list:
    if max_components < 1 or max_complexity < 1:
        raise EquivariantError("caps must be at least 1")
    kinds = [Component("O", g) for g in range(0, max_complexity + 1) if 2 * g <= d.c]
    kinds += [Component("N", k) for k in range(1, min(d.c, max_complexity) + 1)]
    out = []
    for surfaces in range(0, (d.t + 2) // 2 + 1):
        points = d.t + 2 - 2 * surfaces
        if surfaces + points > max_components or surfaces + points == 0:
            continue
        for combo in combinations_with_replacement(kinds, surfaces):
            if sum(c.betti[1] for c in combo) != d.c:
                continue
            out.append(FixedSetProfile.of(list(combo) + [POINT] * points))
    out.sort(key=lambda p: (len(p), [_sort_key(c) for c in p.components]))
    return out


def nonzero_class_rule(profile: FixedSetProfile, component: int) -> bool:
    """True when the orientable surface at this index must carry a nonzero class."""
    if not 0 <= component < len(profile.components):
        raise EquivariantError("component index out of range")
    comp = profile.components[component]
    if not (comp.is_surface and comp.orientable):
        raise EquivariantError("the nonzero-class rule applies to orientable surfaces only")
    return len(profile.components) >= 2


def empty_fixed_set_possible(d: InvolutionDecomposition) -> bool:
    """An empty fixed set forces the Lefschetz number 2 + t - c to vanish."""
    return d.lefschetz == 0


def eigenspaces(L: LorentzianLattice, m) -> tuple:
    return eigenlattice(L, m, 1), eigenlattice(L, m, -1)

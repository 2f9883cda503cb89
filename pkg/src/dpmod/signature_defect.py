"""Signatures of the lattices and the Z/2 G-signature budget.

For an involution with orientable two-dimensional fixed components C the
self-intersections Q([C],[C]) must add up to 2*sigma(M/G) - sigma(M), where
sigma(M/G) is the signature of the form on the invariant sublattice.
Isolated fixed points contribute nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .equivariant import EquivariantError, FixedSetProfile, is_involution
from .lattice import LorentzianLattice, eigenlattice, inertia, restricted_signature


@dataclass(frozen=True)
class SignatureBudget:
    sigma_M: int
    sigma_quotient: int
    budget: int
    orientable_only: bool = True


def ambient_signature(L: LorentzianLattice) -> int:
    p, q, _ = inertia(L.gram)
    return p - q


def quotient_signature(L: LorentzianLattice, m) -> int:
    if not is_involution(m):
        raise EquivariantError("quotient signature needs an involution")
    p, q, _ = restricted_signature(L, eigenlattice(L, m, 1))
    return p - q


def defect_budget(L: LorentzianLattice, m) -> SignatureBudget:
    sm = ambient_signature(L)
    sq = quotient_signature(L, m)
    return SignatureBudget(sm, sq, 2 * sq - sm)


def budget_applies(profile: FixedSetProfile) -> bool:
    return profile.all_orientable


def parity_prune(b: SignatureBudget, profile: FixedSetProfile) -> bool:
    """False when the profile cannot pay the budget: orientable and surface-free with budget != 0."""
    if not profile.all_orientable:
        return True
    if not profile.surfaces and b.budget != 0:
        return False
    return True


def invariant_rank(L: LorentzianLattice, m) -> int:
    return eigenlattice(L, m, 1).rank

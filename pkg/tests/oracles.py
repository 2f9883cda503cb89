"""Independent checks used by the property suites.

Nothing here imports the engine's arithmetic: signatures come from Sturm
sequences in sympy, group orders from numpy closures, and representability
from plain box search.
"""

import itertools
import random

import numpy as np
import sympy

X = sympy.Symbol("x")


def _sturm_counts(poly):
    """(positive, negative) distinct real roots of a polynomial with poly(0) != 0."""
    if poly.degree() == 0:
        return 0, 0
    seq = sympy.sturm(poly)

    def changes(at):
        if at == sympy.oo:
            vals = [s.LC() for s in seq]
        elif at == -sympy.oo:
            vals = [s.LC() * (1 if s.degree() % 2 == 0 else -1) for s in seq]
        else:
            vals = [s.eval(at) for s in seq]
        vals = [v for v in vals if v != 0]
        return sum(1 for a, b in zip(vals, vals[1:]) if (a > 0) != (b > 0))

    return changes(0) - changes(sympy.oo), changes(-sympy.oo) - changes(0)


def sturm_inertia(gram):
    """(positive, negative, zero) eigenvalue counts of a symmetric integer matrix.

    The characteristic polynomial is split into square-free parts so that
    repeated eigenvalues are counted with multiplicity.
    """
    n = len(gram)
    if n == 0:
        return (0, 0, 0)
    p = sympy.Poly(sympy.Matrix(gram).charpoly(X).as_expr(), X)
    pos = neg = zero = 0
    for factor, mult in sympy.sqf_list(p)[1]:
        f = sympy.Poly(factor, X)
        while f.eval(0) == 0:
            f = sympy.Poly(sympy.quo(f.as_expr(), X), X)
            zero += mult
        a, b = _sturm_counts(f)
        pos += a * mult
        neg += b * mult
    assert pos + neg + zero == n
    return (pos, neg, zero)


def random_symmetric(rng, n, lo=-6, hi=6):
    m = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            m[i][j] = m[j][i] = rng.randint(lo, hi)
    return m


def random_unimodular(rng, n, steps=8):
    """A product of elementary matrices and sign flips."""
    m = np.eye(n, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if n > 1:
            e = np.eye(n, dtype=np.int64)
            e[i, j] = rng.choice([-1, 1])
            m = m @ e
        if rng.random() < 0.3:
            k = rng.randrange(n)
            m[:, k] *= -1
    return m


def block_involution(rng, t, c, r):
    """Diagonal sum of t trivial, c sign and r swap blocks, conjugated by a random unimodular matrix."""
    n = t + c + 2 * r
    m = np.zeros((n, n), dtype=np.int64)
    blocks = ["t"] * t + ["c"] * c + ["r"] * r
    rng.shuffle(blocks)
    k = 0
    for b in blocks:
        if b == "t":
            m[k, k] = 1
            k += 1
        elif b == "c":
            m[k, k] = -1
            k += 1
        else:
            m[k, k + 1] = m[k + 1, k] = 1
            k += 2
    p = random_unimodular(rng, n)
    pinv = np.array(sympy.Matrix(p.tolist()).inv().tolist(), dtype=np.int64)
    out = p @ m @ pinv
    assert (out @ out == np.eye(n, dtype=np.int64)).all()
    return [[int(x) for x in row] for row in out]


def box_values(gram, radius):
    """Map value -> (first nonzero vector found, zero vector attains it) over the box."""
    g = np.array(gram, dtype=np.int64)
    n = len(gram)
    axes = [np.arange(-radius, radius + 1)] * n
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
    vals = np.einsum("ij,jk,ik->i", pts, g, pts)
    out = {}
    for v, x in zip(vals.tolist(), pts.tolist()):
        if any(x) and v not in out:
            out[v] = tuple(x)
    return out


def closure_order(gens, cap=5000):
    """Order of the group generated by integer matrices, by breadth-first closure."""
    gens = [np.array(g, dtype=np.int64) for g in gens]
    n = gens[0].shape[0]
    ident = np.eye(n, dtype=np.int64)
    seen = {ident.tobytes()}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = a @ g
                k = b.tobytes()
                if k not in seen:
                    seen.add(k)
                    nxt.append(b)
                    if len(seen) > cap:
                        return None
        frontier = nxt
    return len(seen)


def reflection_by_formula(gram, v):
    """Column images of w -> w - 2 Q(v,w)/Q(v,v) v, via sympy rationals."""
    G = sympy.Matrix(gram)
    vv = sympy.Matrix(v)
    q = (vv.T * G * vv)[0]
    n = len(gram)
    cols = []
    for j in range(n):
        w = sympy.zeros(n, 1)
        w[j] = 1
        img = w - 2 * (vv.T * G * w)[0] / q * vv
        cols.append(img)
    return sympy.Matrix.hstack(*cols)


def decomposition_splits(n):
    for t in range(n + 1):
        for c in range(n + 1 - t):
            r2 = n - t - c
            if r2 % 2 == 0:
                yield t, c, r2 // 2


def seeded(seed):
    return random.Random(seed)

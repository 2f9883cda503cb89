"""Randomized and exhaustive comparisons against the oracles.

Each suite returns (checked, failures) so the acceptance test can report counts.
"""

import itertools

from oracles import (block_involution, box_values, decomposition_splits, reflection_by_formula, seeded,
                     sturm_inertia, random_symmetric)

from dpmod import diophantine as dio
from dpmod.equivariant import decompose_involution
from dpmod.lattice import Sublattice, custom_lattice, evaluate_form, m_n, reflect, reflection_matrix, \
    restricted_signature


def involution_suite(count=1200, seed=11):
    rng = seeded(seed)
    shapes = [s for n in range(1, 7) for s in decomposition_splits(n)]
    failures = []
    for i in range(count):
        t, c, r = shapes[i % len(shapes)]
        m = block_involution(rng, t, c, r)
        d = decompose_involution(None, m)
        if (d.t, d.c, d.r) != (t, c, r):
            failures.append((m, (t, c, r), (d.t, d.c, d.r)))
    return count, failures


def norm_equation_suite(radius=30):
    """Every form of rank 1 or 2 with entries in [-5, 5] against |k| <= 10, both nonzero modes."""
    failures = []
    checked = 0
    forms = [((a,),) for a in range(-5, 6)]
    forms += [((a, b), (b, c)) for a in range(-5, 6) for b in range(-5, 6) for c in range(-5, 6)]
    for gram in forms:
        found = box_values(gram, radius)
        det = gram[0][0] if len(gram) == 1 else gram[0][0] * gram[1][1] - gram[0][1] ** 2
        definite = det > 0 and gram[0][0] != 0 if len(gram) == 2 else gram[0][0] != 0
        for k in range(-10, 11):
            for nonzero in (True, False):
                checked += 1
                v = dio.solve_form(gram, k, nonzero)
                brute = k in found or (k == 0 and not nonzero)
                if v.status == dio.UNKNOWN:
                    failures.append((gram, k, nonzero, "unknown"))
                elif v.status == dio.UNSOLVABLE and brute:
                    failures.append((gram, k, nonzero, f"box search finds {found.get(k, 0)}"))
                elif v.status == dio.SOLVABLE:
                    x = v.coeffs
                    val = sum(gram[i][j] * x[i] * x[j] for i in range(len(x)) for j in range(len(x)))
                    if val != k or (nonzero and not any(x)):
                        failures.append((gram, k, nonzero, f"bad witness {x}"))
                    elif definite and not brute:
                        # the box covers every solution of a definite form at these sizes
                        failures.append((gram, k, nonzero, "solvable but box search is empty"))
    return checked, failures


def signature_suite(count=1200, seed=23):
    """restricted_signature against Sturm counts.

    The random matrix S sits as the first block of the ambient form [[S, I], [I, 0]],
    which is unimodular for every S, so degenerate S are covered too.
    """
    rng = seeded(seed)
    failures = []
    for i in range(count):
        k = 1 + i % 4
        s = random_symmetric(rng, k)
        n = 2 * k
        gram = [[0] * n for _ in range(n)]
        for a in range(k):
            for b in range(k):
                gram[a][b] = s[a][b]
            gram[a][k + a] = gram[k + a][a] = 1
        L = custom_lattice("probe", gram)
        sub = Sublattice.span(L, [[1 if j == a else 0 for j in range(n)] for a in range(k)])
        got = restricted_signature(L, sub)
        want = sturm_inertia(s)
        if tuple(got) != tuple(want):
            failures.append((s, got, want))
    return count, failures


def reflection_suite(count=1200, seed=37):
    """reflect preserves the form and is involutive; its matrix matches the rational formula."""
    rng = seeded(seed)
    failures = []
    done = 0
    while done < count:
        n = rng.randint(1, 8)
        L = m_n(n)
        v = tuple(rng.randint(-3, 3) for _ in range(n + 1))
        q = evaluate_form(L, v, v)
        if q not in (1, -1, 2, -2):
            continue
        w1 = tuple(rng.randint(-9, 9) for _ in range(n + 1))
        w2 = tuple(rng.randint(-9, 9) for _ in range(n + 1))
        r1, r2 = reflect(L, v, w1), reflect(L, v, w2)
        ok = evaluate_form(L, r1, r2) == evaluate_form(L, w1, w2)
        ok = ok and reflect(L, v, r1).vector == w1
        ok = ok and reflect(L, v, v).vector == tuple(-x for x in v)
        if done % 10 == 0:
            want = reflection_by_formula(L.gram, v)
            got = reflection_matrix(L, v)
            ok = ok and [[int(x) for x in row] for row in want.tolist()] == [list(r) for r in got]
        if not ok:
            failures.append((n, v, w1, w2))
        done += 1
    return count, failures


def catalog_fixture_texts():
    from importlib.resources import files
    d = files("dpmod") / "data" / "catalog"
    return sorted((f.name, f.read_text()) for f in d.iterdir() if f.name.endswith(".txt"))


def mutate_matrix_line(text, which=0, entry=0):
    """Add 1 to one entry of the which-th 'matrix =' line."""
    lines = text.splitlines()
    hits = [i for i, ln in enumerate(lines) if ln.strip().startswith("matrix =")]
    i = hits[which % len(hits)]
    key, rows = lines[i].split("=", 1)
    nums = rows.replace(";", " ; ").split()
    idx = [j for j, tok in enumerate(nums) if tok != ";"][entry]
    nums[idx] = str(int(nums[idx]) + 1)
    lines[i] = key + "= " + " ".join(nums).replace(" ; ", "; ")
    return "\n".join(lines) + "\n"


def catalog_mutation_suite():
    """Corrupt one generator matrix entry per fixture; each must fail a named check."""
    import dataclasses

    from dpmod.catalog import parametric_entry_Mn, parse_entry, verify_entry

    results = []
    for name, text in catalog_fixture_texts():
        e = parse_entry(mutate_matrix_line(text), name)
        rep = verify_entry(e)
        results.append((name, rep.passed, [n for n, _ in rep.failures()]))
    for n in range(1, 9):
        e = parametric_entry_Mn(n)
        g = e.generators[0]
        m = [list(r) for r in g.matrix]
        m[0][-1] += 1
        bad = dataclasses.replace(g, matrix=tuple(tuple(r) for r in m))
        e2 = dataclasses.replace(e, generators=(bad,) + tuple(e.generators[1:]))
        rep = verify_entry(e2)
        results.append((e.name, rep.passed, [n for n, _ in rep.failures()]))
    return results

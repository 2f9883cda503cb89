"""Command-line front end.

Every command builds a report (a plain dict), prints it as an aligned table or
as JSON, and can also write the JSON to a file. Reports contain no timings or
thread counts, so the same inputs always give byte-identical output.

Exit status: 0 completed, 2 rejected input, 3 some verdict Undetermined,
4 a catalog check or certificate replay failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .catalog import CatalogError, load_catalog, parametric_entry_Mn, verify_entry
from .certificate import (CertificateError, check_certificate, load_certificate, parse_certificate,
                          shipped_certificates)
from .coxeter import (coxeter_system, describe_group, gram_consistency_check, maximal_finite_candidates,
                      pair_order_table, parabolic_subgroup)
from .equivariant import (DEFAULT_MAX_COMPLEXITY, DEFAULT_MAX_COMPONENTS, EquivariantError, complete_caps,
                          decompose_involution, empty_fixed_set_possible, enumerate_profiles, is_involution)
from .isometry import (INFINITE, Isometry, IsometryError, MatrixGroup, close_group, enumerate_subgroups,
                       isomorphism_fingerprint)
from .lattice import (CANONICAL, S_BASIS, S_BASIS_CONVENTION, LatticeError, custom_lattice, lattice_by_name,
                      m_n, sublattice_gram)
from .obstruction import (BIHOLOMORPHIC, ANTI_BIHOLOMORPHIC, DEFAULT_SPLIT_CAP, branch_search,
                          classify_finite_subgroup, make_hypothesis, maximal_groups, order2_profile_report)
from .signature_defect import defect_budget, parity_prune
from .textdata import DocumentError, evaluate_expression, format_matrix, matrix_from_rows, parse_document, \
    parse_matrix, read_document, split_list
from .verdict import OBSTRUCTED, REJECTED, UNDETERMINED, ObstructionError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNDETERMINED = 3
EXIT_CHECK_FAILED = 4

CONVENTIONS = (
    "matrices act on column vectors; column j is the image of basis vector j",
    "canonical basis (H, E1, ..., En) with Q = diag(1, -1, ..., -1)",
    f"M2 S basis: {S_BASIS_CONVENTION}",
    "Ref(v) is the reflection x -> x - 2 Q(x,v)/Q(v,v) v",
)


class InputError(ValueError):
    pass


def _report(command: str, inputs: dict) -> dict:
    return {"command": command, "inputs": inputs, "engine_version": __version__,
            "conventions": list(CONVENTIONS), "results": [], "catalog_references": []}


def _verdict_dict(label: str, v, extra: dict | None = None) -> dict:
    d = {"subject": label, "verdict": v.status, "headline": v.headline(), "trace": list(v.trace)}
    if v.entry:
        d["entry"] = v.entry
    if v.witness:
        d["witness"] = list(v.witness)
    if extra:
        d.update(extra)
    return d


# ---- classify ----

_M2_NAMES = (("A", "Ref(E1-E2)"), ("B", "Ref(H-E1-E2)"), ("-I", "-I"), ("AB", "Ref(E1-E2) Ref(H-E1-E2)"),
             ("-A", "-Ref(E1-E2)"), ("-B", "-Ref(H-E1-E2)"), ("-AB", "-Ref(E1-E2) Ref(H-E1-E2)"))
_M2_PREFERRED = (("A", "-B"), ("A", "B"), ("-AB", "-A"), ("A", "-I"), ("B", "-B"), ("AB", "-I"), ("AB", "-B"))
_M3_ROOT_NAMES = {"H-E1-E2-E3": "psi", "E1-E2": "s12", "E2-E3": "s23", "E3": "r3"}


def _label_m2_subgroup(g: MatrixGroup) -> str:
    L = g.lattice
    named = {n: evaluate_expression(L, e, {}) for n, e in _M2_NAMES}
    keys = g.keyset()
    pairs = list(_M2_PREFERRED) + [(a, b) for a, _ in _M2_NAMES for b, _ in _M2_NAMES if a < b]
    for a, b in pairs:
        sub = close_group(MatrixGroup.generated_by(L, [named[a], named[b]]))
        if sub and sub.order == g.order and sub.keyset() == keys:
            return f"<{a}, {b}>"
    return "<" + ", ".join(format_matrix(x.matrix(S_BASIS)) for x in g.generators) + ">"


def cmd_classify(n: int, threads: int = 1, split_cap: int = DEFAULT_SPLIT_CAP, certificates=None) -> dict:
    if n not in (2, 3):
        raise InputError("classify supports n = 2 and n = 3")
    rep = _report("classify", {"n": n, "split_cap": split_cap,
                               "certificates": "shipped" if certificates is None else "custom"})
    groups = maximal_groups(n)
    cache = {}
    refs = set()

    def run(label, g, extra=None):
        v = classify_finite_subgroup(g, n, certificates=certificates, maximal=groups, threads=threads,
                                     split_cap=split_cap, replay_cache=cache)
        if v.entry:
            refs.add(v.entry)
        rep["results"].append(_verdict_dict(label, v, dict(extra or {}, order=g.order,
                                                           fingerprint=str(isomorphism_fingerprint(g)))))

    if n == 2:
        by_root = dict(groups)
        g1, g2 = by_root["E2"], by_root["H-E1-E2"]
        subs = [s for s in enumerate_subgroups(g1) if s.order == 4]
        labelled = sorted(((_label_m2_subgroup(s), s) for s in subs), key=lambda x: x[0])
        for label, s in labelled:
            run(label, s, {"ambient": "<A, B, -I>"})
        run("<Phi, Psi, -I>", g2, {"ambient": "maximal"})
    else:
        for root, g in groups:
            names = [_M3_ROOT_NAMES[r] for r in coxeter_system(3).root_names if r != root]
            run("<" + ", ".join(names + ["-I"]) + ">", g, {"omitted_root": root})
    rep["catalog_references"] = sorted(refs)
    return rep


# ---- obstruct ----

def _load_group_spec(text: str, source: str = "spec"):
    sections = parse_document(text, source)
    heads = [s for s in sections if s.kind == "group"]
    if len(heads) != 1:
        raise InputError("a group spec needs exactly one [group] section")
    head = heads[0]
    lat_name = head.get("lattice", "M2")
    try:
        if lat_name == "custom":
            L = custom_lattice(head.get("name", "custom"), parse_matrix(head.require("gram")),
                               split_list(head.get("labels")) if head.get("labels") else None)
        else:
            L = lattice_by_name(lat_name)
    except (LatticeError, DocumentError) as e:
        raise InputError(f"{source}: {e}") from None
    basis = head.get("basis", CANONICAL)
    mats = {}
    for s in sections:
        if s.kind != "matrix":
            continue
        if not s.name:
            raise InputError(f"{source}:{s.line}: a [matrix] section needs a name")
        try:
            rows = s.rows if s.rows else [(s.require("rows"), s.line)]
            m = matrix_from_rows(rows) if s.rows else parse_matrix(rows[0][0], s.line)
            mats[s.name] = Isometry.from_matrix(L, m, basis)
        except (DocumentError, IsometryError, LatticeError) as e:
            raise InputError(f"{source}:{s.line}: matrix {s.name}: {e}") from None
    if not mats:
        raise InputError(f"{source}: no [matrix] sections")
    return L, basis, mats, head


def cmd_obstruct(spec_text: str, source: str = "spec", focus: str | None = None, witnesses=None,
                 max_components: int = DEFAULT_MAX_COMPONENTS, max_complexity: int = DEFAULT_MAX_COMPLEXITY,
                 split_cap: int = DEFAULT_SPLIT_CAP, threads: int = 1) -> dict:
    L, basis, mats, head = _load_group_spec(spec_text, source)
    focus = focus or head.get("focus")
    if witnesses is None and head.get("witnesses"):
        witnesses = split_list(head.get("witnesses"))
    rep = _report("obstruct", {"spec": source, "lattice": L.name, "basis": basis,
                               "generators": {k: format_matrix(v.matrix(basis)) for k, v in sorted(mats.items())},
                               "focus": focus, "witnesses": list(witnesses) if witnesses else None,
                               "max_components": max_components, "max_complexity": max_complexity,
                               "split_cap": split_cap})
    g = close_group(MatrixGroup.generated_by(L, list(mats.values())))
    if not g:
        raise InputError("the generators do not close to a finite group"
                         + (f"; {format_matrix(g.witness.matrix(basis))} has infinite order ({g.witness_certificate.reason})"
                            if g.witness is not None else ""))
    if focus is None:
        invs = g.involutions()
        if invs:
            raise InputError("the group has involutions; name one with --focus")
        from .verdict import CONSISTENT, Verdict
        v = Verdict(CONSISTENT, ("the group has no involution, nothing to obstruct",))
        rep["results"].append(_verdict_dict(f"group of order {g.order}", v))
        return rep
    if focus not in mats:
        raise InputError(f"unknown focus {focus!r}; defined: {', '.join(sorted(mats))}")
    f = mats[focus]
    if f.is_identity() or not is_involution(f):
        sq = f * f
        bad = next(((i, j) for i in range(L.rank) for j in range(L.rank)
                    if sq.canonical_matrix[i][j] != (1 if i == j else 0)), None)
        raise InputError(f"focus {focus} is not an involution"
                         + (f": entry ({bad[0] + 1},{bad[1] + 1}) of its square is not that of the identity"
                            if bad else " (it is the identity)"))
    wit = None
    if witnesses:
        missing = [w for w in witnesses if w not in mats]
        if missing:
            raise InputError(f"unknown witness {missing[0]!r}")
        wit = [mats[w] for w in witnesses]
    try:
        h = make_hypothesis(g, f, wit)
    except ObstructionError as e:
        raise InputError(str(e)) from None
    v = branch_search(h, max_components=max_components, max_complexity=max_complexity, split_cap=split_cap,
                      threads=threads)
    rep["results"].append(_verdict_dict(f"focus {focus} in a group of order {g.order}", v))
    return rep


# ---- complex flags ----

def designated_class(which: str):
    """The order-2 class examined for complex structures on each manifold."""
    if which in ("star", "*", "Mstar"):
        L = lattice_by_name("star")
        return L, Isometry.minus_identity(L), "-I"
    n = int(which)
    if not 0 <= n <= 8:
        raise InputError("n must lie in 0..8 or be 'star'")
    L = m_n(n)
    if n == 0:
        return L, Isometry.minus_identity(L), "-I"
    if n == 2:
        return L, evaluate_expression(L, "Ref(E1) Ref(E2)", {}), "Ref(E1) Ref(E2)"
    expr = " ".join(["Ref(H)"] + [f"Ref(E{k})" for k in range(1, n)])
    return L, evaluate_expression(L, expr, {}), expr


def _closing_equation(L, m, budget: int) -> str:
    from .lattice import eigenlattice
    ep = eigenlattice(L, m, 1)
    gram = sublattice_gram(ep)
    if ep.rank == 0:
        return f"[S] = 0, so Q(S,S) = 0 against the budget {budget}"
    if ep.rank == 1:
        q = gram[0][0]
        coeff = {1: "", -1: "-"}.get(q, f"{q}")
        return f"[S] = a*{ep.describe()[2:-1]}, so {coeff}a^2 = {budget}"
    return f"[S] in {ep.describe()} with gram {format_matrix(gram)}, Q(S,S) = {budget}"


def cmd_complex_flags(which: str, split_cap: int = DEFAULT_SPLIT_CAP) -> dict:
    L, m, expr = designated_class(which)
    rep = _report("complex-flags", {"manifold": L.name, "class": expr})
    r = order2_profile_report(L, m, split_cap=split_cap)
    entries = list(load_catalog())
    if L.name.startswith("M") and L.name[1:].isdigit() and 1 <= int(L.name[1:]) <= 8:
        entries.append(parametric_entry_Mn(int(L.name[1:])))
    refs = [e.name for e in entries if e.manifold == L.name and e.group.contains(m)]
    flags = {}
    for name in (BIHOLOMORPHIC, ANTI_BIHOLOMORPHIC):
        f = dict(r.flags[name])
        f["source"] = "lattice"
        if not f["infeasible"]:
            for e in entries:
                rec = e.flag(name.replace("_", "-")) or e.flag(name)
                if e.manifold == L.name and rec and e.element(rec[0]).key() == m.key():
                    f = {"infeasible": True, "reason": f"{rec[1]} (entry {e.name})", "source": "catalog"}
        flags[name] = f
    rep["results"].append({
        "subject": f"{expr} on {L.name}",
        "decomposition": str(r.decomposition),
        "budget": r.budget,
        "profiles": [str(p) for p in r.profiles],
        "branches": list(r.branch_lines),
        "closing_equation": _closing_equation(L, m, r.budget),
        "orientable_hypothesis": r.orientable_hypothesis,
        "orientable_hypothesis_closes": r.orientable_hypothesis_closes,
        "flags": flags,
        "notes": list(r.notes),
    })
    rep["catalog_references"] = refs
    return rep


# ---- coxeter ----

def cmd_coxeter(n: int) -> dict:
    if n not in (2, 3):
        raise InputError("coxeter supports n = 2 and n = 3")
    c = coxeter_system(n)
    rep = _report("coxeter", {"n": n})
    table = pair_order_table(c)

    def fmt(x):
        return "inf" if x == INFINITE else str(int(x))

    rep["results"].append({"subject": "pair orders", "roots": list(c.root_names),
                           "table": [[fmt(x) for x in row] for row in table],
                           "labels_match": all(table[i][j] == c.label(i, j)
                                               for i in range(len(table)) for j in range(len(table)))})
    g = gram_consistency_check(c)
    rep["results"].append({"subject": "Gram consistency", "passed": g.passed, "failures": list(g.failures)})
    for root in c.root_names:
        p = parabolic_subgroup(c, root)
        d = {"subject": f"parabolic subgroup without {root}", "finite": p.finite}
        if p.finite:
            d["order"] = p.order
            d["group"] = describe_group(p.group)
        elif p.witness is not None:
            d["witness"] = format_matrix(p.witness.canonical_matrix)
            d["reason"] = p.witness_certificate.reason
            d["charpoly"] = " ".join(str(x) for x in p.witness_certificate.charpoly)
        rep["results"].append(d)
    for root, grp in maximal_finite_candidates(c, include_minus_identity=True):
        rep["results"].append({"subject": f"maximal candidate without {root}, with -I",
                               "order": grp.order, "group": describe_group(grp)})
    return rep


# ---- catalog ----

def cmd_catalog(action: str) -> dict:
    rep = _report("catalog " + action, {})
    entries = list(load_catalog()) + [parametric_entry_Mn(n) for n in range(1, 9)]
    for e in entries:
        d = {"subject": e.name, "manifold": e.manifold, "construction": e.construction,
             "fingerprint": e.fingerprint, "generators": [g.name for g in e.generators]}
        if e.flags:
            d["flags"] = [f"{f} ({el}): {why}" for f, el, why in e.flags]
        if action == "verify":
            v = verify_entry(e)
            d["passed"] = v.passed
            d["checks"] = [f"{'ok' if ok else 'FAIL'} {n}{': ' + det if det else ''}" for n, ok, det in v.checks]
        rep["results"].append(d)
    return rep


# ---- decompose ----

def cmd_decompose(lattice: str, matrix_text: str, basis: str = CANONICAL,
                  max_components: int = DEFAULT_MAX_COMPONENTS, max_complexity: int = DEFAULT_MAX_COMPLEXITY) -> dict:
    try:
        L = lattice_by_name(lattice)
        path = Path(matrix_text)
        if path.is_file():
            rows = [(ln.strip(), i) for i, ln in enumerate(path.read_text().splitlines(), 1)
                    if ln.strip() and not ln.strip().startswith("#")]
            mat = matrix_from_rows(rows)
        else:
            mat = parse_matrix(matrix_text)
        m = Isometry.from_matrix(L, mat, basis)
        d = decompose_involution(L, m)
    except (LatticeError, DocumentError, EquivariantError) as e:
        raise InputError(str(e)) from None
    b = defect_budget(L, m)
    mc, mx = complete_caps(d, max_components, max_complexity)
    profiles = enumerate_profiles(d, mc, mx)
    rep = _report("decompose", {"lattice": L.name, "basis": basis, "matrix": format_matrix(mat)})
    rep["results"].append({
        "subject": "involution",
        "decomposition": str(d), "lefschetz": d.lefschetz, "budget": b.budget,
        "quotient_signature": b.sigma_quotient,
        "profiles": [f"{p}{'' if parity_prune(b, p) else ' (pruned by the budget)'}" for p in profiles],
        "empty_fixed_set": "admissible" if empty_fixed_set_possible(d) and b.budget == 0 else "excluded",
    })
    return rep


# ---- replay ----

def cmd_replay(path: str) -> dict:
    try:
        c = load_certificate(path)
    except (CertificateError, DocumentError, OSError) as e:
        raise InputError(str(e)) from None
    rep = _report("replay", {"certificate": Path(path).name})
    v = check_certificate(c)
    rep["results"].append(_verdict_dict(c.name, v, {"role": c.role, "group_order": c.hypothesis.group.order}))
    return rep


# ---- output ----

def render_structured(rep: dict) -> str:
    return json.dumps(rep, indent=2, sort_keys=True) + "\n"


def render_table(rep: dict) -> str:
    lines = [f"dpmod {rep['engine_version']}  {rep['command']}"]
    for k in sorted(rep["inputs"]):
        v = rep["inputs"][k]
        if isinstance(v, dict):
            for kk in sorted(v):
                lines.append(f"  {k}.{kk} = {v[kk]}")
        elif v is not None:
            lines.append(f"  {k} = {v}")
    results = rep["results"]
    if results and all("verdict" in r for r in results):
        w = max(len(r["subject"]) for r in results)
        lines.append("")
        for r in results:
            extra = f"  order {r['order']}" if "order" in r else ""
            lines.append(f"{r['subject']:<{w}}  {r['headline']}{extra}")
        for r in results:
            if r["trace"] or r.get("witness"):
                lines.append("")
                lines.append(f"{r['subject']}:")
                lines += ["  " + t for t in r["trace"]]
                lines += ["  witness: " + x for x in r.get("witness", [])]
    else:
        for r in results:
            lines.append("")
            lines.append(r["subject"])
            for k in sorted(r):
                if k == "subject":
                    continue
                v = r[k]
                if isinstance(v, list) and v and isinstance(v[0], list):
                    lines.append(f"  {k}:")
                    lines += ["    " + "  ".join(f"{x:>4}" for x in row) for row in v]
                elif isinstance(v, list):
                    lines.append(f"  {k}:")
                    lines += ["    " + str(x) for x in v]
                elif isinstance(v, dict):
                    lines.append(f"  {k}:")
                    for kk in sorted(v):
                        f = v[kk]
                        if isinstance(f, dict) and "infeasible" in f:
                            f = f"{'infeasible' if f['infeasible'] else 'not excluded'} [{f['source']}]: {f['reason']}"
                        lines.append(f"    {kk}: {f}")
                else:
                    lines.append(f"  {k}: {v}")
    if rep["catalog_references"]:
        lines.append("")
        lines.append("catalog references: " + ", ".join(rep["catalog_references"]))
    lines.append("")
    lines += ["convention: " + c for c in rep["conventions"]]
    return "\n".join(lines) + "\n"


def exit_status(rep: dict) -> int:
    results = rep["results"]
    if any(r.get("verdict") == REJECTED or r.get("passed") is False for r in results):
        return EXIT_CHECK_FAILED
    if any(r.get("verdict") == UNDETERMINED for r in results):
        return EXIT_UNDETERMINED
    return EXIT_OK


def _certificates_from(directory: str | None):
    if directory is None:
        return None
    d = Path(directory)
    if not d.is_dir():
        raise InputError(f"{directory} is not a directory")
    out = []
    for f in sorted(d.glob("*.txt")):
        try:
            out.append(parse_certificate(f.read_text(), f.name, lambda nm: (d / nm).read_text()))
        except (CertificateError, DocumentError) as e:
            raise InputError(str(e)) from None
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dpmod", description="Finite subgroups of lattice automorphism groups "
                                                          "and homological obstructions to lifting them.")
    p.add_argument("--version", action="version", version=f"dpmod {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "structured"), default="table")
    common.add_argument("--report", metavar="PATH", help="also write the structured report here")
    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--max-components", type=int, default=DEFAULT_MAX_COMPONENTS)
    search.add_argument("--max-complexity", type=int, default=DEFAULT_MAX_COMPLEXITY)
    search.add_argument("--split-cap", type=int, default=DEFAULT_SPLIT_CAP)
    search.add_argument("--threads", type=int, default=1)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common, search], help="verdicts for the maximal finite candidates")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--certificates", metavar="DIR", help="replace the shipped certificates")

    o = sub.add_parser("obstruct", parents=[common, search], help="branch search for one involution")
    o.add_argument("spec", help="group spec file")
    o.add_argument("--focus")
    o.add_argument("--witnesses", help="comma-separated matrix names")

    f = sub.add_parser("complex-flags", parents=[common], help="complex-structure flags for the designated class")
    f.add_argument("--n", required=True, help="0..8 or star")
    f.add_argument("--split-cap", type=int, default=DEFAULT_SPLIT_CAP)

    x = sub.add_parser("coxeter", parents=[common], help="reflection group data")
    x.add_argument("--n", type=int, required=True)

    k = sub.add_parser("catalog", parents=[common], help="list or verify realization entries")
    k.add_argument("action", choices=("list", "verify"))

    d = sub.add_parser("decompose", parents=[common], help="(t, c, r) and fixed-set shapes of an involution")
    d.add_argument("matrix", help="rows separated by ';', or a file with one row per line")
    d.add_argument("--lattice", default="M2")
    d.add_argument("--basis", default=CANONICAL)
    d.add_argument("--max-components", type=int, default=DEFAULT_MAX_COMPONENTS)
    d.add_argument("--max-complexity", type=int, default=DEFAULT_MAX_COMPLEXITY)

    r = sub.add_parser("replay", parents=[common], help="replay a certificate file")
    r.add_argument("certificate")
    return p


def run(argv=None) -> tuple:
    """Parse arguments and build the report; returns (report, exit status)."""
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        raise InputError("--threads must be at least 1")
    if args.command == "classify":
        rep = cmd_classify(args.n, args.threads, args.split_cap, _certificates_from(args.certificates))
    elif args.command == "obstruct":
        try:
            text = Path(args.spec).read_text()
        except OSError as e:
            raise InputError(str(e)) from None
        wit = split_list(args.witnesses) if args.witnesses else None
        rep = cmd_obstruct(text, Path(args.spec).name, args.focus, wit, args.max_components,
                           args.max_complexity, args.split_cap, args.threads)
    elif args.command == "complex-flags":
        rep = cmd_complex_flags(args.n, args.split_cap)
    elif args.command == "coxeter":
        rep = cmd_coxeter(args.n)
    elif args.command == "catalog":
        rep = cmd_catalog(args.action)
    elif args.command == "decompose":
        rep = cmd_decompose(args.lattice, args.matrix, args.basis, args.max_components, args.max_complexity)
    else:
        rep = cmd_replay(args.certificate)
    return rep, args


def main(argv=None) -> int:
    try:
        rep, args = run(argv)
    except (InputError, DocumentError, CatalogError, LatticeError) as e:
        print(f"dpmod: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    text = render_structured(rep) if args.format == "structured" else render_table(rep)
    sys.stdout.write(text)
    if args.report:
        Path(args.report).write_text(render_structured(rep))
    return exit_status(rep)


if __name__ == "__main__":
    sys.exit(main())

from importlib.resources import files

import pytest

from dpmod.certificate import (CertificateError, check_certificate, load_certificate, parse_certificate,
                               shipped_certificate, shipped_certificates)
from dpmod.textdata import DocumentError
from dpmod.verdict import OBSTRUCTED, REJECTED, UNDETERMINED

CERT_DIR = files("dpmod") / "data" / "certificates"
LEMMA = "lemma-m3-swap-reflection-point.txt"


def _text(name):
    return (CERT_DIR / name).read_text()


def _parse(text, name="tampered.txt"):
    return parse_certificate(text, name, lambda nm: _text(nm))


def test_shipped_set():
    names = sorted(c.name for c in shipped_certificates())
    assert names == ["m3-cremona-swap-reflection", "m3-signed-permutations", "m3-swap-reflection-point"]


def test_lemma_leaves_the_two_sphere_branch_open():
    v = check_certificate(shipped_certificate("m3-swap-reflection-point"))
    assert v.status == UNDETERMINED
    assert any("two-spheres" in t for t in v.trace[-2:])


@pytest.mark.parametrize("name,steps", [("m3-signed-permutations", 30), ("m3-cremona-swap-reflection", 44)])
def test_proofs_replay(name, steps):
    v = check_certificate(shipped_certificate(name))
    assert v.status == OBSTRUCTED and v.rejected_step is None
    assert sum(1 for t in v.trace if t[0].isdigit()) == steps


def test_proof_groups():
    assert shipped_certificate("m3-signed-permutations").hypothesis.group.order == 48
    assert shipped_certificate("m3-cremona-swap-reflection").hypothesis.group.order == 16


def test_nonzero_rule_refused_for_a_single_component():
    t = """[hypothesis]
name = single-sphere
role = proof
lattice = star
schema = 1
element w = Ref(S1-S2)
generators = w

[step]
kind = Decompose
element = w

[step]
kind = AssertProfile
element = w
profile = [S2]
names = F

[step]
kind = NonzeroByLemma
component = w:F
"""
    v = check_certificate(_parse(t))
    assert v.status == REJECTED and v.rejected_step == 3
    assert "need not carry a nonzero class" in v.message


def test_empty_fixed_set_must_be_addressed():
    t = """[hypothesis]
name = torus
role = proof
lattice = star
schema = 1
element c = -I
generators = c

[step]
kind = Decompose
element = c

[step]
kind = Branch
on = profile c
case = torus : [T2] : T
case = bottle : [K] : K
"""
    v = check_certificate(_parse(t))
    assert v.status == REJECTED and "empty fixed set" in v.message


@pytest.mark.parametrize("old,new,step", [
    ("expect = E3", "expect = H", 12),
    ("profile = [RP2, pt]", "profile = [RP2, pt, pt]", 2),
    ("sign = -", "sign = +", 11),
    ("reason = tangent-conflict", "reason = unsolvable", 6),
])
def test_tampered_lemma_steps_are_rejected_with_their_index(old, new, step):
    text = _text(LEMMA)
    assert old in text
    v = check_certificate(_parse(text.replace(old, new, 1), LEMMA))
    assert v.status == REJECTED
    assert v.rejected_step == step


def test_tampering_inside_an_included_lemma_is_reported_globally():
    proof = _text("m3-signed-permutations.txt")
    lemma = _text(LEMMA).replace("expect = E3", "expect = H", 1)
    c = parse_certificate(proof, "p.txt", lambda nm: lemma)
    v = check_certificate(c)
    assert v.status == REJECTED and v.rejected_step == 12


def test_dropping_a_closing_step_leaves_the_proof_open():
    text = _text("m3-signed-permutations.txt")
    blocks = text.split("\n[step]")
    last = blocks.pop()
    assert "CloseBranch" in last
    v = check_certificate(_parse("\n[step]".join(blocks), "p.txt"))
    assert v.status == UNDETERMINED


def test_removing_the_nonzero_fact_breaks_the_zero_lattice_close():
    text = _text("m3-signed-permutations.txt")
    blocks = text.split("\n[step]")
    idx = max(i for i, b in enumerate(blocks) if "NonzeroByLemma" in b)
    del blocks[idx]
    v = check_certificate(_parse("\n[step]".join(blocks), "p.txt"))
    assert v.status == REJECTED


def test_malformed_certificates():
    with pytest.raises((CertificateError, DocumentError)):
        _parse("[step]\nkind = Decompose\n")
    bad = _text(LEMMA).replace("kind = Decompose", "kind = Guess", 1)
    with pytest.raises((CertificateError, DocumentError)):
        _parse(bad)
    bad = _text(LEMMA).replace("element s12r3 = s12 r3", "element s12r3 = Ref(H)", 1)
    with pytest.raises((CertificateError, DocumentError)):
        _parse(bad)


def test_load_from_a_directory(tmp_path):
    for name in (LEMMA, "m3-signed-permutations.txt"):
        (tmp_path / name).write_text(_text(name))
    c = load_certificate(tmp_path / "m3-signed-permutations.txt")
    assert check_certificate(c).status == OBSTRUCTED

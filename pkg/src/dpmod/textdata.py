"""Line-oriented text documents shared by certificates, catalog entries and CLI inputs.

A document is a list of sections. A header line ``[kind]`` or ``[kind name]``
opens a section; inside it, ``key = value`` lines record fields (keys may
repeat) and any other non-blank line is kept as a raw row, which is how
matrices are written one row per line. ``#`` followed by a space starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .isometry import Isometry
from .lattice import LatticeError, LorentzianLattice, reflection_matrix

# '#' opens a comment only when it stands alone, so names such as #3RP2 survive
_COMMENT = re.compile(r"(?:^|\s)#(?=\s|$)")
_HEADER = re.compile(r"\[\s*([A-Za-z][\w-]*)(?:\s+([^\]]*?))?\s*\]")


class DocumentError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = ""):
        where = f"{source}:{line}: " if line is not None and source else (f"line {line}: " if line else "")
        super().__init__(where + message)
        self.line = line


@dataclass
class Section:
    kind: str
    name: str
    line: int
    fields: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    source: str = ""

    def get(self, key: str, default=None):
        vals = self.get_all(key)
        if len(vals) > 1:
            raise self.error(f"key {key!r} given more than once")
        return vals[0] if vals else default

    def require(self, key: str) -> str:
        v = self.get(key)
        if v is None:
            raise self.error(f"missing key {key!r}")
        return v

    def get_all(self, key: str) -> list:
        return [v for k, v, _ in self.fields if k == key]

    def line_of(self, key: str) -> int:
        for k, _, ln in self.fields:
            if k == key:
                return ln
        return self.line

    def keys(self) -> set:
        return {k for k, _, _ in self.fields}

    def error(self, message: str, key: str | None = None) -> DocumentError:
        ln = self.line_of(key) if key else self.line
        return DocumentError(f"[{self.kind}{' ' + self.name if self.name else ''}] {message}", ln, self.source)


def parse_document(text: str, source: str = "") -> list:
    sections = []
    current = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = _COMMENT.split(raw, 1)[0].strip()
        if not line:
            continue
        m = _HEADER.fullmatch(line)
        if m:
            current = Section(m.group(1).lower(), (m.group(2) or "").strip(), i, source=source)
            sections.append(current)
            continue
        if current is None:
            raise DocumentError("content before the first section header", i, source)
        if "=" in line:
            k, v = line.split("=", 1)
            current.fields.append((k.strip(), v.strip(), i))
        else:
            current.rows.append((line, i))
    return sections


def read_document(path) -> list:
    p = Path(path)
    return parse_document(p.read_text(), str(p.name))


# ---- values ----

def parse_int_row(text: str, line: int | None = None) -> tuple:
    parts = text.replace(",", " ").split()
    try:
        return tuple(int(x) for x in parts)
    except ValueError:
        raise DocumentError(f"row {text!r} is not a list of integers", line) from None


def parse_matrix(text: str, line: int | None = None) -> tuple:
    """Rows separated by ';', entries by whitespace or commas."""
    rows = [parse_int_row(r, line) for r in text.split(";") if r.strip()]
    _check_square(rows, line)
    return tuple(rows)


def matrix_from_rows(rows: list) -> tuple:
    out = tuple(parse_int_row(text, ln) for text, ln in rows)
    _check_square(out, rows[0][1] if rows else None)
    return out


def _check_square(rows, line):
    if not rows:
        raise DocumentError("empty matrix", line)
    n = len(rows)
    for i, r in enumerate(rows):
        if len(r) != n:
            raise DocumentError(f"matrix row {i + 1} has {len(r)} entries, expected {n}", line)


def split_list(text: str) -> list:
    return [x.strip() for x in re.split(r"[,\s]+", text.strip()) if x.strip()]


def format_matrix(m) -> str:
    return "; ".join(" ".join(str(x) for x in row) for row in m)


# ---- element expressions ----

_TOKEN = re.compile(r"\s*(Ref\(([^)]*)\)|-?I\b|[A-Za-z_][\w]*)\s*")


def evaluate_expression(L: LorentzianLattice, text: str, names: dict) -> Isometry:
    """Evaluate a product such as '-Ref(E1-E2) Ref(E2)', 'I', '-I' or 'psi s12'.

    Factors are reflections Ref(v), the identity I, or previously defined names;
    a leading '-' negates the whole product.
    """
    s = text.strip()
    sign = 1
    if s.startswith("-") and not s.startswith("-I"):
        sign, s = -1, s[1:].strip()
    if not s:
        raise LatticeError("empty element expression")
    result = Isometry.identity(L)
    pos = 0
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m or m.end() == pos:
            raise LatticeError(f"cannot parse element expression {text!r} near {s[pos:]!r}")
        tok = m.group(1)
        if m.group(2) is not None:
            factor = Isometry.from_matrix(L, reflection_matrix(L, L.parse(m.group(2))))
        elif tok == "I":
            factor = Isometry.identity(L)
        elif tok == "-I":
            factor = Isometry.minus_identity(L)
        elif tok in names:
            factor = names[tok]
        else:
            raise LatticeError(f"unknown element {tok!r} in {text!r}")
        result = result * factor
        pos = m.end()
    return -result if sign < 0 else result

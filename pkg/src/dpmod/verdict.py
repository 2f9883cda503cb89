"""Verdicts shared by the search engine, the certificate checker and the classifier."""

from __future__ import annotations

from dataclasses import dataclass

OBSTRUCTED = "Obstructed"
CONSISTENT = "ConsistentConstraints"
REALIZED = "RealizedByCatalog"
UNDETERMINED = "Undetermined"
REJECTED = "Rejected"

STATUSES = (OBSTRUCTED, CONSISTENT, REALIZED, UNDETERMINED, REJECTED)


class ObstructionError(ValueError):
    pass


@dataclass(frozen=True)
class Verdict:
    status: str
    trace: tuple = ()
    entry: str | None = None
    witness: tuple = ()
    rejected_step: int | None = None
    message: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ObstructionError(f"unknown verdict status {self.status!r}")

    @property
    def obstructed(self) -> bool:
        return self.status == OBSTRUCTED

    def headline(self) -> str:
        if self.status == REALIZED and self.entry:
            return f"{self.status} ({self.entry})"
        if self.status == REJECTED:
            return f"{self.status} at step {self.rejected_step}: {self.message}"
        return self.status

    def render(self, indent: str = "") -> list:
        out = [indent + self.headline()]
        out += [indent + "  " + line for line in self.trace]
        if self.witness:
            out += [indent + "  witness: " + w for w in self.witness]
        return out

"""Small shared result types for checks that must report witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field

PASS = "pass"
SAMPLED_PASS = "sampled-pass"
FAIL = "fail"
REJECTED = "rejected"

_OK = (PASS, SAMPLED_PASS)


@dataclass(frozen=True)
class Verdict:
    """Outcome of a single check.

    status is one of pass / sampled-pass / fail / rejected.  "pass" means the
    property was verified exhaustively (or is exact by construction);
    "sampled-pass" means a sampling budget was exhausted without finding a
    counterexample.  witness carries the offending data for failures, as
    strings so it can go straight into a JSON report.
    """

    status: str
    witness: dict = field(default_factory=dict)
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.status in _OK

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.witness:
            out["witness"] = dict(sorted(self.witness.items()))
        if self.note:
            out["note"] = self.note
        return out


def passed(exhaustive: bool, note: str = "") -> Verdict:
    return Verdict(PASS if exhaustive else SAMPLED_PASS, note=note)


def failed(witness: dict, note: str = "") -> Verdict:
    return Verdict(FAIL, witness=witness, note=note)

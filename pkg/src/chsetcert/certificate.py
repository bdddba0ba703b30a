"""Verification certificates and their line-oriented serialisation.

A structured certificate is a sequence of ``key = value`` lines.  Keys are
dotted paths; the first line carries the schema version.  Parameters are
echoed under ``param.`` in the same syntax the config parser reads, so the
block can be fed back to :func:`chsetcert.cli.parse_config` verbatim.
Derived run facts (the circumference actually used, box ranges) go under
``info.``.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import __version__
from .intervals import Interval

SCHEMA = "chsetcert-certificate/1"

CONCLUSION = (
    "invariant C0 manifold homeomorphic to T^1 inside U_epsilon, "
    "with the covering and cone hypotheses verified for F and F^-1"
)
NO_CONCLUSION = "no conclusion: at least one hypothesis failed"
PARTIAL_CONCLUSION = "all recorded inequalities hold; partial check, no manifold conclusion"


@dataclass(frozen=True)
class InequalityRecord:
    """One verified inequality ``bound REL threshold``.

    ``relation`` is one of ``<``, ``<=``, ``>``, ``>=``.  Set inclusions are
    recorded through their worst endpoint gap compared with 0.
    """

    name: str
    bound: Interval
    relation: str
    threshold: float
    passed: bool
    slack: float
    note: str = ""

    @classmethod
    def compare(cls, name: str, value: Interval, relation: str, threshold: float, note: str = "") -> "InequalityRecord":
        thr = Interval.point(threshold)
        if relation in ("<", "<="):
            slack = (thr - value).lo
            passed = value.hi < threshold if relation == "<" else value.hi <= threshold
        elif relation in (">", ">="):
            slack = (value - thr).lo
            passed = value.lo > threshold if relation == ">" else value.lo >= threshold
        else:
            raise ValueError(f"unknown relation {relation!r}")
        return cls(name, value, relation, float(threshold), passed, slack, note)


@dataclass
class VerificationCertificate:
    parameters: dict[str, str]
    records: list[InequalityRecord] = field(default_factory=list)
    info: dict[str, str] = field(default_factory=dict)
    complete: bool = True  # False when only part of the hypotheses were checked
    tool_version: str = __version__
    timestamp: str = ""

    @property
    def certified(self) -> bool:
        return bool(self.records) and all(r.passed for r in self.records)

    @property
    def conclusion(self) -> str:
        if not self.certified:
            return NO_CONCLUSION
        return CONCLUSION if self.complete else PARTIAL_CONCLUSION

    @property
    def failures(self) -> list[InequalityRecord]:
        return [r for r in self.records if not r.passed]

    def record(self, name: str) -> InequalityRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def extend(self, other: "VerificationCertificate") -> "VerificationCertificate":
        merged = dict(self.parameters)
        merged.update(other.parameters)
        info = dict(self.info)
        info.update(other.info)
        return VerificationCertificate(
            merged,
            self.records + other.records,
            info,
            self.complete and other.complete,
            self.tool_version,
            self.timestamp,
        )

    def stamp(self, when: _dt.datetime | None = None) -> "VerificationCertificate":
        when = when or _dt.datetime.now(_dt.timezone.utc)
        self.timestamp = when.replace(microsecond=0).isoformat()
        return self

    # -- output ---------------------------------------------------------

    def to_lines(self, include_timestamp: bool = True) -> list[str]:
        lines = [f"schema = {SCHEMA}", f"tool_version = {self.tool_version}"]
        if include_timestamp:
            lines.append(f"timestamp = {self.timestamp}")
        lines.extend(f"param.{k} = {v}" for k, v in self.parameters.items())
        lines.extend(f"info.{k} = {v}" for k, v in self.info.items())
        for r in self.records:
            key = f"record.{r.name}"
            lines.append(f"{key}.bound = [{r.bound.lo!r}, {r.bound.hi!r}]")
            lines.append(f"{key}.relation = {r.relation}")
            lines.append(f"{key}.threshold = {r.threshold!r}")
            lines.append(f"{key}.pass = {'true' if r.passed else 'false'}")
            lines.append(f"{key}.slack = {r.slack!r}")
            if r.note:
                lines.append(f"{key}.note = {r.note}")
        lines.append(f"records = {len(self.records)}")
        lines.append(f"verdict = {'certified' if self.certified else 'not-certified'}")
        lines.append(f"conclusion = {self.conclusion}")
        return lines

    def to_structured(self, include_timestamp: bool = True) -> str:
        return "\n".join(self.to_lines(include_timestamp)) + "\n"

    def to_text(self) -> str:
        width = max([len(r.name) for r in self.records] + [10])
        out = [f"chsetcert {self.tool_version}"]
        out.extend(f"  {k:<12} {v}" for k, v in self.parameters.items())
        out.extend(f"  {k:<12} {v}" for k, v in self.info.items())
        out.append("")
        out.append(f"  {'inequality':<{width}}  {'bound':<45} rel  {'threshold':<22} {'slack':<12} ok")
        for r in self.records:
            bound = f"[{r.bound.lo:.12g}, {r.bound.hi:.12g}]"
            out.append(
                f"  {r.name:<{width}}  {bound:<45} {r.relation:<3}  {r.threshold:<22.15g} "
                f"{r.slack:<12.4g} {'PASS' if r.passed else 'FAIL'}"
            )
        out.append("")
        out.append(f"verdict: {'CERTIFIED' if self.certified else 'NOT CERTIFIED'}")
        out.append(f"conclusion: {self.conclusion}")
        return "\n".join(out) + "\n"


def parse_structured(text: str) -> dict[str, str]:
    """Read a structured certificate back into a flat key/value mapping."""
    out: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise ValueError(f"line {n}: expected 'key = value', got {line!r}")
        out[key.strip()] = value
    return out


def echoed_parameters(fields: Mapping[str, str]) -> str:
    """The ``param.*`` block of a parsed certificate as config text."""
    return "".join(f"{k[len('param.'):]} = {v}\n" for k, v in fields.items() if k.startswith("param."))


def format_parameters(items: Iterable[tuple[str, object]]) -> dict[str, str]:
    return {k: str(v) for k, v in items}

"""Command-line front end.

Usage:
  chsetcert [CONFIG] [--epsilon 0.5] [--tau 3] [--eta 0.075] [--mode henon-verify]
            [--m-forward 2] [--m-backward 200] [--out FILE] [--format text|structured]

A config file holds ``key = value`` lines (``#`` starts a comment); flags
override it.  Exit status: 0 certified, 1 not certified, 2 invalid
configuration, 3 internal inconsistency of the parameters.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .atlas import AtlasError, CircleAtlas
from .certificate import InequalityRecord, VerificationCertificate
from .henon import (
    DEFAULT_V_POWER,
    GOLDEN_OMEGA,
    HenonError,
    HenonParams,
    atlas_record,
    format_fraction,
    region_bound,
    scan_certified_epsilon,
    verify,
)
from .intervals import Interval, IntervalError

log = logging.getLogger(__name__)

EXIT_CERTIFIED = 0
EXIT_NOT_CERTIFIED = 1
EXIT_INVALID_CONFIG = 2
EXIT_INCONSISTENT = 3

MODES = ("henon-verify", "henon-scan", "cones-check", "covering-check", "atlas-validate")
FORMATS = ("text", "structured")
STDOUT = "-"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: str = "henon-verify"
    a: Fraction = Fraction("0.68")
    b: Fraction = Fraction("0.1")
    omega: Fraction = GOLDEN_OMEGA
    epsilon: Fraction = Fraction("0.5")
    tau: Fraction = Fraction(3)
    eta: Fraction = Fraction("0.075")
    v: Optional[int] = None
    m_forward: Fraction = Fraction(2)
    m_backward: Fraction = Fraction(200)
    out: str = STDOUT
    format: str = "text"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode: expected one of {', '.join(MODES)}, got {self.mode!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format: expected one of {', '.join(FORMATS)}, got {self.format!r}")
        for key in ("m_forward", "m_backward"):
            if not getattr(self, key) > 1:
                raise ConfigError(f"{key}: the cone rate must exceed 1, got {getattr(self, key)}")
        try:
            self.params()
        except HenonError as exc:
            raise ConfigError(str(exc)) from exc

    def params(self) -> HenonParams:
        return HenonParams(self.a, self.b, self.omega, self.epsilon, self.tau, self.eta, self.v)

    def echo(self) -> dict[str, str]:
        """Parameters in config syntax, in field order."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Fraction):
                out[f.name] = format_fraction(value)
            elif value is None:
                out[f.name] = "auto"
            else:
                out[f.name] = str(value)
        return out


_EXACT = ("a", "b", "omega", "epsilon", "tau", "eta", "m_forward", "m_backward")


def _coerce(key: str, raw: str) -> object:
    raw = raw.strip()
    if key in _EXACT:
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{key}: not an exact decimal or fraction: {raw!r}") from exc
    if key == "v":
        if raw == "auto":
            return None
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"v: expected an integer or 'auto', got {raw!r}") from exc
    if key == "out" and not raw:
        raise ConfigError("out: empty path")
    return raw


def build_config(values: dict[str, str], base: RunConfig | None = None) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    changes = {}
    for key, raw in values.items():
        norm = key.replace("-", "_")
        if norm not in known:
            raise ConfigError(f"unknown key {key!r}")
        changes[norm] = _coerce(norm, raw)
    try:
        return replace(base or RunConfig(), **changes)
    except HenonError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text: str) -> RunConfig:
    """Read ``key = value`` lines; blank lines and ``#`` comments are skipped."""
    values: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {n}: expected 'key = value', got {line!r}")
        if key in values:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        values[key] = value
    return build_config(values)


# ---------------------------------------------------------------------------
# runs


def _select(cert: VerificationCertificate, prefixes: Sequence[str]) -> list[InequalityRecord]:
    return [r for r in cert.records if r.name.startswith(tuple(prefixes))]


def _box_info(p: HenonParams) -> dict[str, str]:
    region = region_bound(p)
    out = {}
    for label, box in (("D", region.box), ("U_eps", region.u_eps)):
        for axis in ("theta", "x", "y"):
            iv: Interval = getattr(box, axis)
            out[f"box.{label}.{axis}"] = f"[{iv.lo!r}, {iv.hi!r}]"
    return out


def execute(cfg: RunConfig, dump_boxes: bool = False) -> VerificationCertificate:
    """Run the configured check and return its certificate (unstamped)."""
    p = cfg.params()
    m_f, m_b = float(cfg.m_forward), float(cfg.m_backward)
    info: dict[str, str] = {}
    if cfg.mode == "henon-scan":
        res = scan_certified_epsilon(p, m_f, m_b)
        info["scan.eps_max"] = format_fraction(res.eps_max)
        info["scan.eps_fail"] = "none" if res.eps_fail is None else format_fraction(res.eps_fail)
        info["scan.resolution"] = format_fraction(res.resolution)
        info["scan.evaluations"] = str(res.evaluations)
        records = [
            InequalityRecord.compare(
                "scan.eps-max",
                Interval.exact(res.eps_max),
                ">=",
                float(p.epsilon),
                f"largest certified grid epsilon; bracket [{float(res.eps_max)!r}, "
                f"{'inf' if res.eps_fail is None else repr(float(res.eps_fail))})",
            )
        ]
    elif cfg.mode == "atlas-validate":
        v = p.v if p.v is not None else 2**DEFAULT_V_POWER
        try:
            CircleAtlas(v)
        except AtlasError as exc:
            raise ConfigError(str(exc)) from exc
        info["v_used"] = str(v)
        records = [atlas_record(v)]
    else:
        report = verify(p, m_f, m_b)
        info.update(report.certificate.info)
        if cfg.mode == "henon-verify":
            records = list(report.certificate.records)
        elif cfg.mode == "cones-check":
            records = _select(report.certificate, ["cone-est1."])
        else:
            records = _select(report.certificate, ["der-encl", "zero-image", "cover-est-"])
    if dump_boxes:
        info.update(_box_info(p))
    complete = cfg.mode == "henon-verify"
    return VerificationCertificate(parameters=cfg.echo(), records=records, info=info, complete=complete)


def render(cert: VerificationCertificate, fmt: str, include_timestamp: bool = True) -> str:
    if fmt == "structured":
        return cert.to_structured(include_timestamp)
    return cert.to_text()


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chsetcert", description="Interval certificates for the rotating Henon map.")
    ap.add_argument("config", nargs="?", help="config file with 'key = value' lines")
    ap.add_argument("--mode", choices=MODES)
    ap.add_argument("--epsilon")
    ap.add_argument("--tau")
    ap.add_argument("--eta")
    ap.add_argument("--a")
    ap.add_argument("--b")
    ap.add_argument("--omega")
    ap.add_argument("--v", help="atlas circumference, or 'auto'")
    ap.add_argument("--m-forward")
    ap.add_argument("--m-backward")
    ap.add_argument("--out", help="output path ('-' for stdout)")
    ap.add_argument("--format", choices=FORMATS)
    ap.add_argument("--dump-boxes", action="store_true", help="add the |D| and U_eps box ranges to the output")
    ap.add_argument("--no-timestamp", action="store_true", help="omit the timestamp line from structured output")
    ap.add_argument("-q", "--quiet", action="store_true", help="do not echo the verdict to stderr")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        base = parse_config(Path(args.config).read_text(encoding="utf-8")) if args.config else RunConfig()
        flags = {
            k: v
            for k, v in vars(args).items()
            if v is not None and k not in ("config", "dump_boxes", "no_timestamp", "quiet")
        }
        cfg = build_config(flags, base)
    except (ConfigError, OSError) as exc:
        print(f"chsetcert: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG

    try:
        cert = execute(cfg, dump_boxes=args.dump_boxes).stamp()
    except ConfigError as exc:
        print(f"chsetcert: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except (HenonError, IntervalError) as exc:
        print(f"chsetcert: inconsistent parameters: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT

    text = render(cert, cfg.format, include_timestamp=not args.no_timestamp)
    if cfg.out == STDOUT:
        sys.stdout.write(text)
    else:
        Path(cfg.out).write_text(text, encoding="utf-8")
    if not args.quiet:
        verdict = "certified" if cert.certified else "not certified: " + ", ".join(r.name for r in cert.failures)
        print(f"chsetcert: {verdict}", file=sys.stderr)
    return EXIT_CERTIFIED if cert.certified else EXIT_NOT_CERTIFIED

if __name__ == "__main__":
    raise SystemExit(main())

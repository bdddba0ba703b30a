"""Covering relation ``D => D`` from derivative enclosures on chart triples.

For each triple ``(j, i0, i1)`` (a window ``V_j`` inside ``U_i0`` whose
image lands in ``U_i1``) three things are checked:

* the image of the zero section stays in ``eta_i1(U_i1)`` times the closed
  balls of radii ``eps_u`` and ``eps_s``;
* expansion: ``|A22|_m - |A23| > 1 + eps_u`` for the unstable block row;
* contraction: ``|A32| + |A33| < 1 - eps_s`` for the stable block row.

The first column of the derivative never enters, because the tested
vectors have zero central component.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .cones import BlockBounds
from .intervals import Interval, add_rd


@dataclass(frozen=True)
class ChartTripleInput:
    j: int
    i0: int
    i1: int
    # enclosure of f_{i1 i0}(theta, 0, 0) over theta in eta_i0(V_j): central
    # components, then unstable, then stable
    zero_image: tuple[Interval, ...]
    target_window: Interval  # closure of eta_i1(U_i1) per central coordinate
    jac: BlockBounds
    eps_u: float
    eps_s: float

    def __post_init__(self) -> None:
        # expansion needs eps_u > 0 only; eps_u < 1 is not used by the argument
        if not self.eps_u > 0.0:
            raise ValueError(f"eps_u must be positive, got {self.eps_u}")
        if not 0.0 < self.eps_s < 1.0:
            raise ValueError(f"eps_s must lie in (0, 1), got {self.eps_s}")
        object.__setattr__(self, "zero_image", tuple(self.zero_image))

    @property
    def label(self) -> str:
        return f"(j={self.j}, i0={self.i0}, i1={self.i1})"


@dataclass(frozen=True)
class TripleDiagnostics:
    label: str
    expansion_lower: float
    contraction_upper: float
    zero_image_ok: bool
    expansion_ok: bool
    contraction_ok: bool

    @property
    def ok(self) -> bool:
        return self.zero_image_ok and self.expansion_ok and self.contraction_ok


@dataclass(frozen=True)
class CoveringVerdict:
    holds: bool
    triples: tuple[TripleDiagnostics, ...] = field(default=())

    @property
    def failures(self) -> list[TripleDiagnostics]:
        return [t for t in self.triples if not t.ok]

    @property
    def expansion_lower(self) -> float:
        return min(t.expansion_lower for t in self.triples)

    @property
    def contraction_upper(self) -> float:
        return max(t.contraction_upper for t in self.triples)


def _ball_ok(components: Sequence[Interval], radius: float) -> bool:
    if not components:
        return True
    if len(components) == 1:
        return components[0].mag <= radius
    sq = Interval(0.0, 0.0)
    for c in components:
        sq = sq + c.sqr()
    return sq.hi <= (Interval.point(radius).sqr()).lo


def check_zero_image(t: ChartTripleInput) -> bool:
    c, u, s = t.jac.dims
    if len(t.zero_image) != c + u + s:
        raise ValueError(f"zero image has {len(t.zero_image)} components, expected {c + u + s}")
    if c != 1:
        raise ValueError("only a one-dimensional central direction is supported")
    base = t.zero_image[0]
    if not base.subset_of(t.target_window):
        return False
    return _ball_ok(t.zero_image[c:c + u], t.eps_u) and _ball_ok(t.zero_image[c + u:], t.eps_s)


def expansion_lower(jac: BlockBounds) -> float:
    """Lower bound of ``inf |pi_x A(0, x, y)|`` over ``|x| = 1, |y| <= 1``."""
    return add_rd(jac.min_norm(2, 2), -jac.norm(2, 3), False)


def contraction_upper(jac: BlockBounds) -> float:
    """Upper bound of ``sup |pi_y A(0, x, y)|`` over ``|x|, |y| <= 1``."""
    return add_rd(jac.norm(3, 2), jac.norm(3, 3), True)


def check_expansion(t: ChartTripleInput) -> bool:
    return expansion_lower(t.jac) > (Interval.point(1.0) + t.eps_u).hi


def check_contraction(t: ChartTripleInput) -> bool:
    return contraction_upper(t.jac) < (Interval.point(1.0) - t.eps_s).lo


def diagnose(t: ChartTripleInput, _norms: dict | None = None) -> TripleDiagnostics:
    # triples often share one enclosure; its norms are computed once
    key = (id(t.jac), t.eps_u, t.eps_s)
    if _norms is not None and key in _norms:
        exp, contr, exp_ok, contr_ok = _norms[key]
    else:
        exp, contr = expansion_lower(t.jac), contraction_upper(t.jac)
        exp_ok, contr_ok = check_expansion(t), check_contraction(t)
        if _norms is not None:
            _norms[key] = (exp, contr, exp_ok, contr_ok)
    return TripleDiagnostics(
        label=t.label,
        expansion_lower=exp,
        contraction_upper=contr,
        zero_image_ok=check_zero_image(t),
        expansion_ok=exp_ok,
        contraction_ok=contr_ok,
    )


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CHSETCERT_THREADS", "1")))
    except ValueError:
        return 1


def check_covering(triples: Sequence[ChartTripleInput], threads: int | None = None) -> CoveringVerdict:
    """Check every triple; diagnostics keep the input order."""
    if not triples:
        raise ValueError("no chart triples to check")
    n = threads if threads is not None else _threads()
    if n > 1 and len(triples) > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            diags = tuple(pool.map(diagnose, triples))
    else:
        norms: dict = {}
        diags = tuple(diagnose(t, norms) for t in triples)
    return CoveringVerdict(holds=all(d.ok for d in diags), triples=diags)

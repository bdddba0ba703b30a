"""Good atlas on the circle ``R/v`` built from short overlapping arcs.

``V_j = j + (0, 5) mod v`` and ``U_i = i + (0, 9) mod v``; the chart
``eta_i`` unrolls ``U_i`` onto ``(i, i + 9)``.  Cones are given by the unit
forms ``Q_h = x^2 - y^2 - theta^2`` and ``Q_v = x^2 - y^2 + theta^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

MIN_CIRCUMFERENCE = 9
DEFAULT_SHADOW_RADIUS = 1.0


class AtlasError(ValueError):
    pass


@dataclass(frozen=True)
class Arc:
    """Open arc ``(start, start + length)`` on ``R/v``."""

    index: int
    start: float
    length: float
    v: int

    def offset(self, theta: float) -> float:
        return (theta - self.start) % self.v

    def contains(self, theta: float) -> bool:
        d = self.offset(theta)
        return 0.0 < d < self.length

    def contains_closed_arc(self, center: float, radius: float) -> bool:
        """Whether ``[center - radius, center + radius]`` lies inside this open arc."""
        if 2 * radius >= self.length:
            return False
        d = self.offset(center - radius)
        return 0.0 < d and d + 2 * radius < self.length

    def inside(self, other: "Arc") -> bool:
        """Whether this open arc is contained in ``other``."""
        if self.length > other.length:
            return False
        d = other.offset(self.start)
        return d + self.length <= other.length

    def __contains__(self, theta: float) -> bool:
        return self.contains(theta)


@dataclass(frozen=True)
class ChartMap:
    """``eta_i(i + x mod v) = i + x`` for ``x`` in ``(0, length)``."""

    index: int
    v: int
    length: float = 9.0

    def __call__(self, theta: float) -> float:
        x = (theta - self.index) % self.v
        if not 0.0 < x < self.length:
            raise AtlasError(f"point {theta} mod {self.v} is outside U_{self.index}")
        return self.index + x

    def inverse(self, x: float) -> float:
        if not self.index < x < self.index + self.length:
            raise AtlasError(f"{x} is outside eta_{self.index}(U_{self.index})")
        return x % self.v


@dataclass(frozen=True)
class ConePairing:
    theta: float
    j: int
    i: int
    V: Arc
    U: Arc


@dataclass(frozen=True)
class CircleAtlas:
    v: int
    v_length: float = 5.0
    u_length: float = 9.0

    def __post_init__(self) -> None:
        if int(self.v) != self.v:
            raise AtlasError(f"circumference must be an integer, got {self.v}")
        object.__setattr__(self, "v", int(self.v))
        if self.v < MIN_CIRCUMFERENCE:
            raise AtlasError(f"circumference must be at least {MIN_CIRCUMFERENCE}, got {self.v}")

    def V(self, j: int) -> Arc:
        j %= self.v
        return Arc(j, float(j), self.v_length, self.v)

    def U(self, i: int) -> Arc:
        i %= self.v
        return Arc(i, float(i), self.u_length, self.v)

    def eta(self, i: int) -> ChartMap:
        return ChartMap(i % self.v, self.v, self.u_length)

    @property
    def indices(self) -> range:
        """Index set ``{0, ..., v}``; ``v`` names the same window as 0."""
        return range(self.v + 1)

    @property
    def V_windows(self) -> tuple[Arc, ...]:
        return tuple(self.V(j) for j in self.indices)

    @property
    def U_windows(self) -> tuple[Arc, ...]:
        return tuple(self.U(i) for i in self.indices)

    def containing_U(self, j: int) -> list[int]:
        """All ``i`` (mod v) with ``V_j`` inside ``U_i``."""
        vj = self.V(j)
        lo = j - math.ceil(self.u_length) - 1
        cands = sorted({i % self.v for i in range(lo, j + 2)})
        return [i for i in cands if vj.inside(self.U(i))]

    def V_containing(self, theta: float) -> list[int]:
        lo = math.floor(theta - self.v_length) - 1
        cands = sorted({j % self.v for j in range(lo, math.floor(theta) + 2)})
        return [j for j in cands if self.V(j).contains(theta)]

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.v))


def build_atlas(v: int) -> CircleAtlas:
    return CircleAtlas(v)


def cone_pair_for(atlas: CircleAtlas, theta: float) -> ConePairing:
    """The pair ``(V_{i-2}, U_{i-4})`` with ``i = floor(theta) mod v``."""
    i = math.floor(theta) % atlas.v
    j0, i0 = (i - 2) % atlas.v, (i - 4) % atlas.v
    return ConePairing(theta=theta, j=j0, i=i0, V=atlas.V(j0), U=atlas.U(i0))


def _is_enclosing_pair(atlas: CircleAtlas, theta: float, j: int, i: int, radius: float) -> bool:
    vj, ui = atlas.V(j), atlas.U(i)
    return vj.contains(theta) and vj.inside(ui) and vj.contains_closed_arc(theta, radius)


def _has_sub_window(atlas: CircleAtlas, theta: float, i: int, radius: float) -> bool:
    ui = atlas.U(i)
    lo = math.floor(theta + radius - atlas.v_length) - 1
    ks = {k % atlas.v for k in range(lo, math.ceil(theta - radius) + 2)}
    return any(atlas.V(k).inside(ui) and atlas.V(k).contains_closed_arc(theta, radius) for k in ks)


def _grid(v: int, step: Fraction) -> Iterator[float]:
    t = Fraction(0)
    while t < v:
        yield float(t)
        t += step


def validate_cone_containment(
    atlas: CircleAtlas,
    shadow_radius: float = DEFAULT_SHADOW_RADIUS,
    step: Fraction = Fraction(1, 4),
    full: bool | None = None,
) -> bool:
    """Check both cone-pair conditions for the unit forms on a base-point grid.

    The theta-shadow of a unit cone attached at ``theta`` is the closed arc
    ``theta +- shadow_radius``.  Window ends are integers and the grid
    contains them, and between grid points the containment pattern does not
    change, so the grid check is exhaustive for integer window data.

    The atlas is invariant under the rotation ``theta -> theta + 1``, so
    checking one unit cell and one window settles every other one; that
    reduction is used when ``full`` is false (default: only for v > 1024).
    """
    if step > Fraction(1, 4):
        raise ValueError("grid step must be at most 1/4")
    v = atlas.v
    if full is None:
        full = v <= 1024
    span = v if full else 1
    # condition 1: the rule (V_{i-2}, U_{i-4}) encloses every base point;
    # integer points sit in two unit cells, both rules must work
    for theta in _grid(span, step):
        cells = {math.floor(theta) % v}
        if theta == math.floor(theta):
            cells.add((math.floor(theta) - 1) % v)
        for cell in cells:
            pair = cone_pair_for(atlas, cell + 0.5)
            if not _is_enclosing_pair(atlas, theta, pair.j, pair.i, shadow_radius):
                return False
    # condition 2: each V_j has one U_i serving all base points over V_j;
    # the closure of V_j is sampled, which is at least as demanding
    for j in range(span):
        candidates = atlas.containing_U(j)
        if not candidates:
            return False
        points = [j + float(k * step) for k in range(int(atlas.v_length / step) + 1)]
        if not any(all(_has_sub_window(atlas, th % v, i, shadow_radius) for th in points) for i in candidates):
            return False
    # every point of the circle lies in some V_j
    return all(atlas.V_containing(theta) for theta in _grid(span, step))


def transition(atlas: CircleAtlas, i_from: int, i_to: int, x: float) -> float:
    """``eta_{i_to}(eta_{i_from}^{-1}(x))``."""
    point = atlas.eta(i_from).inverse(x)
    if i_from % atlas.v == i_to % atlas.v:
        return x
    return atlas.eta(i_to)(point)

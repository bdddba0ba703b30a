"""Quadratic-form cone conditions from block bounds of a derivative.

The horizontal form is ``Q_h(p) = -|p1|^2 + |p2|^2 - |p3|^2`` on
``R^c x R^u x R^s`` (central, unstable, stable).  A map whose derivative
enclosure satisfies the inequalities checked here expands ``Q_h`` by a
factor ``m > 1`` along differences of points.

All inequality sides are evaluated in interval arithmetic and compared with
the endpoint that is unfavourable for the verdict, so ``holds=True`` is
rigorous.  A failing verdict is only advisory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .intervals import Interval, IntervalMatrix, min_norm_lower, op_norm_upper

BLOCK_NAMES = ("c", "u", "s")


@dataclass(frozen=True)
class BlockBounds:
    """Interval enclosure of a ``(c+u+s)`` square matrix split into 3x3 blocks.

    ``blocks[k][l]`` is the enclosure of block ``A_{k+1,l+1}``; rows of block
    row ``k`` have dimension ``dims[k]`` and columns of block column ``l``
    have dimension ``dims[l]``.
    """

    dims: tuple[int, int, int]
    blocks: tuple[tuple[IntervalMatrix, ...], ...]

    def __post_init__(self) -> None:
        if len(self.dims) != 3 or any(d < 0 for d in self.dims):
            raise ValueError(f"bad block dimensions {self.dims}")
        if len(self.blocks) != 3 or any(len(r) != 3 for r in self.blocks):
            raise ValueError("need a 3x3 grid of blocks")
        for k in range(3):
            for l in range(3):
                b = self.blocks[k][l]
                if b.shape != (self.dims[k], self.dims[l]):
                    raise ValueError(
                        f"block A{k + 1}{l + 1} has shape {b.shape}, "
                        f"expected {(self.dims[k], self.dims[l])}"
                    )

    @classmethod
    def from_matrix(cls, a: IntervalMatrix, dims: tuple[int, int, int]) -> "BlockBounds":
        n = sum(dims)
        if a.shape != (n, n):
            raise ValueError(f"matrix shape {a.shape} does not match dims {dims}")
        offs = np.cumsum((0,) + tuple(dims))
        blocks = tuple(
            tuple(
                IntervalMatrix(
                    [[a[i, j] for j in range(offs[l], offs[l + 1])] for i in range(offs[k], offs[k + 1])],
                    cols=dims[l],
                )
                for l in range(3)
            )
            for k in range(3)
        )
        return cls(tuple(dims), blocks)  # type: ignore[arg-type]

    @classmethod
    def from_array(cls, a: np.ndarray, dims: tuple[int, int, int]) -> "BlockBounds":
        return cls.from_matrix(IntervalMatrix.from_array(a), dims)

    def block(self, k: int, l: int) -> IntervalMatrix:
        """Block ``A_kl`` with 1-based indices, as in the usual notation."""
        return self.blocks[k - 1][l - 1]

    def to_matrix(self) -> IntervalMatrix:
        rows = []
        for k in range(3):
            for i in range(self.dims[k]):
                row = []
                for l in range(3):
                    row.extend(self.blocks[k][l][i, j] for j in range(self.dims[l]))
                rows.append(row)
        return IntervalMatrix(rows, cols=sum(self.dims))

    def norm(self, k: int, l: int) -> float:
        return op_norm_upper(self.block(k, l))

    def min_norm(self, k: int, l: int) -> float:
        return min_norm_lower(self.block(k, l))

    def permuted(self, order: tuple[int, int, int]) -> "BlockBounds":
        """Reorder the three coordinate groups, e.g. ``(0, 2, 1)`` swaps u and s."""
        dims = tuple(self.dims[o] for o in order)
        blocks = tuple(tuple(self.blocks[ok][ol] for ol in order) for ok in order)
        return BlockBounds(dims, blocks)  # type: ignore[arg-type]


@dataclass(frozen=True)
class DerivativeBounds:
    """Scalar bounds on the block norms of a derivative enclosure.

    ``|A11| <= C``, ``|A12|, |A13| <= eps_c``, ``mu <= |A21|_m <= |A21| <= M``,
    ``alpha <= |A22|_m <= |A22| <= A_up``, ``|A23| <= eps_u``, ``|A31| <= M``,
    ``|A32| <= eps_s``, ``|A33| <= beta``.
    """

    C: float
    eps_c: float
    mu: float
    M: float
    A_up: float
    alpha: float
    eps_u: float
    eps_s: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("C", "eps_c", "mu", "M", "A_up", "alpha", "eps_u", "eps_s", "beta"):
            val = float(getattr(self, name))
            if math.isnan(val) or val < 0.0:
                raise ValueError(f"{name} must be a nonnegative number, got {val!r}")
            object.__setattr__(self, name, val)
        if self.alpha > self.A_up:
            raise ValueError(f"alpha={self.alpha} exceeds A_up={self.A_up}")

    @classmethod
    def from_blocks(cls, blocks: BlockBounds) -> "DerivativeBounds":
        """Tightest bounds this module can certify for a block enclosure."""
        return cls(
            C=blocks.norm(1, 1),
            eps_c=max(blocks.norm(1, 2), blocks.norm(1, 3)),
            mu=blocks.min_norm(2, 1),
            M=max(blocks.norm(2, 1), blocks.norm(3, 1)),
            A_up=blocks.norm(2, 2),
            alpha=blocks.min_norm(2, 2),
            eps_u=blocks.norm(2, 3),
            eps_s=blocks.norm(3, 2),
            beta=blocks.norm(3, 3),
        )

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in ("C", "eps_c", "mu", "M", "A_up", "alpha", "eps_u", "eps_s", "beta")}


@dataclass(frozen=True)
class AbcCoefficients:
    a: float
    b: float
    c: float


@dataclass(frozen=True)
class ConeInequality:
    """One evaluated inequality ``lhs < m`` (``direction='<'``) or ``lhs > m``."""

    name: str
    lhs: Interval
    direction: str
    threshold: float

    @property
    def slack(self) -> float:
        """Rigorous lower bound on the distance to failure (negative if failing)."""
        if self.direction == "<":
            return (Interval.point(self.threshold) - self.lhs).lo
        return (self.lhs - Interval.point(self.threshold)).lo

    @property
    def holds(self) -> bool:
        if self.direction == "<":
            return self.lhs.hi < self.threshold
        return self.lhs.lo > self.threshold


@dataclass(frozen=True)
class ConeVerdict:
    holds: bool
    m: float
    margin: float
    rescale_v: Optional[float] = None
    inequalities: tuple[ConeInequality, ...] = field(default=(), compare=False)


def _sq(x: float) -> Interval:
    return Interval.point(x).sqr()


def _n(x: float) -> Interval:
    return Interval.point(x)


def coeffs_abc(blocks: BlockBounds) -> AbcCoefficients:
    """Coefficients with ``Q_h(Ap) >= -a|p1|^2 + b|p2|^2 - c|p3|^2``.

    Holds for every member ``A`` of ``blocks``; ``a`` and ``c`` are rounded
    up, ``b`` down.
    """
    nrm = [[_n(blocks.norm(k, l)) for l in (1, 2, 3)] for k in (1, 2, 3)]
    mins = [_n(blocks.min_norm(k, k2)) for k, k2 in ((2, 1), (2, 2), (2, 3))]

    def cross(col: int) -> Interval:
        others = [l for l in range(3) if l != col]
        acc = _n(0.0)
        for i in range(3):
            acc = acc + nrm[i][col] * (nrm[i][others[0]] + nrm[i][others[1]])
        return acc

    a = nrm[0][0].sqr() - mins[0].sqr() + nrm[2][0].sqr() + cross(0)
    b = -nrm[0][1].sqr() + mins[1].sqr() - nrm[2][1].sqr() - cross(1)
    c = nrm[0][2].sqr() - mins[2].sqr() + nrm[2][2].sqr() + cross(2)
    return AbcCoefficients(a=a.hi, b=b.lo, c=c.hi)


def _check_m(m: float) -> float:
    m = float(m)
    if not m > 1.0:
        raise ValueError(f"cone expansion rate must satisfy m > 1, got {m}")
    return m


def _verdict(ineqs: list[ConeInequality], m: float, v: Optional[float]) -> ConeVerdict:
    margin = min(q.slack for q in ineqs)
    return ConeVerdict(
        holds=all(q.holds for q in ineqs),
        m=m,
        margin=margin,
        rescale_v=v,
        inequalities=tuple(ineqs),
    )


def cone_inequalities(b: DerivativeBounds, m: float, v: float = 1.0) -> list[ConeInequality]:
    """Left-hand sides of the three cone inequalities after ``theta -> v*theta``.

    With ``v == 1`` these are the unscaled inequalities.
    """
    m = _check_m(m)
    vi = Interval.exact(v) if not isinstance(v, float) else _n(v)
    C, ec, mu, M = _n(b.C), _n(b.eps_c), _n(b.mu), _n(b.M)
    A, al, eu, es, be = _n(b.A_up), _n(b.alpha), _n(b.eps_u), _n(b.eps_s), _n(b.beta)
    if v == 1:
        mu_v, M_v, ec_v = mu, M, ec
    else:
        mu_v, M_v, ec_v = mu / vi, M / vi, ec * vi

    central = C.sqr() - mu_v.sqr() + M_v.sqr() + 2 * C * ec_v + M_v * (A + eu + es + be)
    unstable = (
        -ec_v.sqr() + al.sqr() - es.sqr() - ec_v * (C + ec_v) - A * (M_v + eu) - es * (M_v + be)
    )
    stable = ec_v.sqr() + be.sqr() + ec_v * (C + ec_v) + eu * (M_v + A) + be * (M_v + es)
    return [
        ConeInequality("central", central, "<", m),
        ConeInequality("unstable", unstable, ">", m),
        ConeInequality("stable", stable, "<", m),
    ]


def check_cone_conditions(b: DerivativeBounds, m: float) -> ConeVerdict:
    m = _check_m(m)
    return _verdict(cone_inequalities(b, m), m, None)


def check_cone_conditions_rescaled(b: DerivativeBounds, m: float, v: float) -> ConeVerdict:
    """Cone test after rescaling the central coordinate by ``v > 0``.

    The fourth condition ``1 < m`` is enforced as a precondition.
    """
    m = _check_m(m)
    if not v > 0:
        raise ValueError(f"rescaling factor must be positive, got {v}")
    return _verdict(cone_inequalities(b, m, v), m, float(v))


def suggest_v(b: DerivativeBounds, m: float, max_power: int = 64) -> Optional[float]:
    """First ``v`` in ``1, 2, 4, ..., 2**max_power`` passing the rescaled test."""
    _check_m(m)
    for k in range(max_power + 1):
        v = float(2**k)
        if check_cone_conditions_rescaled(b, m, v).holds:
            return v
    return None

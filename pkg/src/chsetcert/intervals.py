"""Outward-rounded interval arithmetic and rigorous matrix norm bounds.

Python gives no portable access to the FPU rounding mode.  ``+ - * /`` and
``sqrt`` are evaluated in round-to-nearest and the rounding error is
recovered exactly with error-free transformations (TwoSum, Veltkamp/Dekker
TwoProduct); the endpoint is stepped one ulp outward only when the error
points the wrong way, which reproduces directed rounding.  Outside the
range where those transformations are exact the endpoint is simply nudged
one ulp.  ``sin``/``cos`` from libm are only faithful, so they get a two-ulp
nudge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

Number = Union[int, float, Fraction, Decimal, str]

_INF = math.inf


def down(x: float, ulps: int = 1) -> float:
    for _ in range(ulps):
        x = math.nextafter(x, -_INF)
    return x


def up(x: float, ulps: int = 1) -> float:
    for _ in range(ulps):
        x = math.nextafter(x, _INF)
    return x


class IntervalError(ArithmeticError):
    """Raised for operations undefined on (part of) an interval."""


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]`` of reals with float endpoints."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise IntervalError("NaN endpoint")
        if lo > hi:
            raise IntervalError(f"empty interval [{lo!r}, {hi!r}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    # -- construction ---------------------------------------------------

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @classmethod
    def exact(cls, value: Number) -> "Interval":
        """Tightest float interval containing the exact rational ``value``.

        Strings are read as exact decimals (``"0.68"`` is 68/100, not the
        nearest double), ``"3/40"`` style fractions are accepted too.
        """
        if isinstance(value, Interval):
            return value
        if isinstance(value, float):
            return cls(value, value)
        q = Fraction(value) if not isinstance(value, str) else Fraction(value.strip())
        f = float(q)
        fq = Fraction(f)
        if fq == q:
            return cls(f, f)
        if fq < q:
            return cls(f, up(f))
        return cls(down(f), f)

    @classmethod
    def hull(cls, values: Iterable[Union[float, "Interval"]]) -> "Interval":
        los, his = [], []
        for v in values:
            iv = _as_interval(v)
            los.append(iv.lo)
            his.append(iv.hi)
        if not los:
            raise IntervalError("hull of nothing")
        return cls(min(los), max(his))

    @classmethod
    def symmetric(cls, radius: float) -> "Interval":
        r = abs(radius)
        return cls(-r, r)

    # -- queries --------------------------------------------------------

    @property
    def mid(self) -> float:
        return 0.5 * self.lo + 0.5 * self.hi

    @property
    def width(self) -> float:
        """Upper bound on ``hi - lo``."""
        return add_rd(self.hi, -self.lo, True)

    @property
    def mag(self) -> float:
        """max |x| over the interval (exact)."""
        return max(abs(self.lo), abs(self.hi))

    @property
    def mig(self) -> float:
        """min |x| over the interval (exact); 0 if it straddles zero."""
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def __contains__(self, x: object) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, (Fraction, Decimal)):
            return Fraction(self.lo) <= x <= Fraction(self.hi)
        return self.lo <= x <= self.hi  # type: ignore[operator]

    def subset_of(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0.0 <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    # -- arithmetic -----------------------------------------------------

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __pos__(self) -> "Interval":
        return self

    def __add__(self, other: object) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return iadd(self, o)

    __radd__ = __add__

    def __sub__(self, other: object) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return isub(self, o)

    def __rsub__(self, other: object) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return isub(o, self)

    def __mul__(self, other: object) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return imul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return idiv(self, o)

    def __rtruediv__(self, other: object) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return idiv(o, self)

    def __abs__(self) -> "Interval":
        return iabs(self)

    def sqr(self) -> "Interval":
        """Square, tighter than ``self * self`` when the interval holds 0."""
        lo2 = self.mig
        hi2 = self.mag
        # squares are nonnegative; the downward product may underflow below 0
        return Interval(max(0.0, mul_rd(lo2, lo2, False)), mul_rd(hi2, hi2, True))

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __str__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


def _coerce(x: object) -> Interval | None:
    if isinstance(x, Interval):
        return x
    if isinstance(x, (int, Fraction, Decimal)):
        return Interval.exact(x)
    if isinstance(x, float):
        return Interval(x, x)
    return None


def _as_interval(x: object) -> Interval:
    iv = _coerce(x)
    if iv is None:
        raise TypeError(f"cannot make an interval from {type(x).__name__}")
    return iv


_SPLITTER = 134217729.0  # 2**27 + 1
_TINY = 2.0 ** -960
_HUGE = 2.0 ** 990


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bp = s - a
    ap = s - bp
    return s, (a - ap) + (b - bp)


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> tuple[float, float] | None:
    """``(p, e)`` with ``p + e == a*b`` exactly, or None outside the safe range."""
    p = a * b
    if p == 0.0 or not math.isfinite(p):
        return None
    if abs(p) < _TINY or abs(a) > _HUGE or abs(b) > _HUGE:
        return None
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _directed(r: float, err: float, upward: bool) -> float:
    if upward:
        return up(r) if err > 0.0 else r
    return down(r) if err < 0.0 else r


def add_rd(a: float, b: float, upward: bool) -> float:
    s, e = _two_sum(a, b)
    if not math.isfinite(s) or not math.isfinite(e):
        return up(s) if upward else down(s)
    return _directed(s, e, upward)


def mul_rd(a: float, b: float, upward: bool) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    pe = _two_prod(a, b)
    if pe is None:
        p = a * b
        return up(p) if upward else down(p)
    return _directed(pe[0], pe[1], upward)


def div_rd(a: float, b: float, upward: bool) -> float:
    if a == 0.0:
        return 0.0
    q = a / b
    pe = _two_prod(q, b)
    if pe is None or not math.isfinite(q):
        return up(q) if upward else down(q)
    p, e = pe
    # exact a - q*b; a - p is exact because p is within a factor 2 of a
    rem = (a - p) - e
    # a/b - q = rem/b; only the sign matters, and rem/b itself may underflow
    err = math.copysign(1.0, b) * rem
    return _directed(q, err, upward)


def sqrt_rd(x: float, upward: bool) -> float:
    if x == 0.0:
        return 0.0
    s = math.sqrt(x)
    pe = _two_prod(s, s)
    if pe is None:
        return up(s) if upward else max(0.0, down(s))
    p, e = pe
    # sign of x - s*s decides on which side the exact root lies
    err = (x - p) - e
    return _directed(s, err, upward)


def iadd(a: Interval, b: Interval) -> Interval:
    return Interval(add_rd(a.lo, b.lo, False), add_rd(a.hi, b.hi, True))


def isub(a: Interval, b: Interval) -> Interval:
    return Interval(add_rd(a.lo, -b.hi, False), add_rd(a.hi, -b.lo, True))


def imul(a: Interval, b: Interval) -> Interval:
    pairs = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
    return Interval(
        min(mul_rd(x, y, False) for x, y in pairs),
        max(mul_rd(x, y, True) for x, y in pairs),
    )


def idiv(a: Interval, b: Interval) -> Interval:
    if b.contains_zero():
        raise IntervalError(f"division by interval containing zero: {b}")
    pairs = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
    return Interval(
        min(div_rd(x, y, False) for x, y in pairs),
        max(div_rd(x, y, True) for x, y in pairs),
    )


def iabs(a: Interval) -> Interval:
    return Interval(a.mig, a.mag)


def isqrt(a: Interval) -> Interval:
    if a.lo < 0.0:
        raise IntervalError(f"sqrt of interval reaching negative values: {a}")
    return Interval(sqrt_rd(a.lo, False), sqrt_rd(a.hi, True))


# pi = 3.14159265358979323846...; math.pi is the double just below it
PI = Interval(math.pi, up(math.pi))
TWO_PI = Interval(2.0 * math.pi, up(2.0 * math.pi))
HALF_PI = Interval(0.5 * math.pi, up(0.5 * math.pi))

_TRIG_ULPS = 2


def _may_contain_multiple(a: Interval, period: Interval, offset: Interval) -> bool:
    """Whether ``offset + k*period`` may lie in ``a`` for some integer k."""
    klo = math.floor(down((a.lo - offset.hi) / period.hi)) - 1
    khi = math.ceil(up((a.hi - offset.lo) / period.lo)) + 1
    pmid, omid = period.mid, offset.mid
    for k in range(klo, khi + 1):
        # cheap float prefilter; the margin dwarfs every rounding error here
        approx = omid + k * pmid
        margin = 1e-9 * (1.0 + abs(approx))
        if approx + margin < a.lo or approx - margin > a.hi:
            continue
        # k is a small integer, hence an exact double
        point = offset + Interval.point(float(k)) * period
        if point.intersects(a):
            return True
    return False


def icos(a: Interval) -> Interval:
    if a.lo == 0.0 and a.hi == 0.0:
        return Interval(1.0, 1.0)
    if a.width >= TWO_PI.lo:
        return Interval(-1.0, 1.0)
    c1, c2 = math.cos(a.lo), math.cos(a.hi)
    lo = max(-1.0, down(min(c1, c2), _TRIG_ULPS))
    hi = min(1.0, up(max(c1, c2), _TRIG_ULPS))
    zero = Interval(0.0, 0.0)
    if _may_contain_multiple(a, TWO_PI, zero):
        hi = 1.0
    if _may_contain_multiple(a, TWO_PI, PI):
        lo = -1.0
    return Interval(lo, hi)


def isin(a: Interval) -> Interval:
    if a.lo == 0.0 and a.hi == 0.0:
        return Interval(0.0, 0.0)
    if a.width >= TWO_PI.lo:
        return Interval(-1.0, 1.0)
    s1, s2 = math.sin(a.lo), math.sin(a.hi)
    lo = max(-1.0, down(min(s1, s2), _TRIG_ULPS))
    hi = min(1.0, up(max(s1, s2), _TRIG_ULPS))
    if _may_contain_multiple(a, TWO_PI, HALF_PI):
        hi = 1.0
    if _may_contain_multiple(a, TWO_PI, PI + HALF_PI):
        lo = -1.0
    return Interval(lo, hi)


# ---------------------------------------------------------------------------
# matrices


class IntervalMatrix:
    """Immutable rectangular block of intervals.

    A point matrix ``P`` is a *member* when every ``P[i, j]`` lies in the
    corresponding entry.
    """

    __slots__ = ("_rows", "shape")

    def __init__(self, entries: Sequence[Sequence[object]], cols: int | None = None):
        rows = tuple(tuple(_as_interval(e) for e in row) for row in entries)
        if rows:
            ncols = len(rows[0])
            if any(len(r) != ncols for r in rows):
                raise ValueError("ragged interval matrix")
        else:
            ncols = cols or 0
        object.__setattr__(self, "_rows", rows)
        object.__setattr__(self, "shape", (len(rows), ncols))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("IntervalMatrix is immutable")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntervalMatrix":
        z = Interval(0.0, 0.0)
        return cls([[z] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, n: int) -> "IntervalMatrix":
        return cls([[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)], cols=n)

    @classmethod
    def from_array(cls, a: np.ndarray) -> "IntervalMatrix":
        a = np.atleast_2d(np.asarray(a, dtype=float))
        return cls([[float(x) for x in row] for row in a], cols=a.shape[1])

    @classmethod
    def from_bounds(cls, lo: np.ndarray, hi: np.ndarray) -> "IntervalMatrix":
        lo = np.atleast_2d(np.asarray(lo, dtype=float))
        hi = np.atleast_2d(np.asarray(hi, dtype=float))
        return cls(
            [[Interval(l, h) for l, h in zip(rl, rh)] for rl, rh in zip(lo, hi)],
            cols=lo.shape[1],
        )

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    def __getitem__(self, ij: tuple[int, int]) -> Interval:
        i, j = ij
        return self._rows[i][j]

    def __iter__(self) -> Iterator[tuple[Interval, ...]]:
        return iter(self._rows)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntervalMatrix) and self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self.shape, self._rows))

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(str(e) for e in r) + "]" for r in self._rows)
        return f"IntervalMatrix([{body}])"

    def lower(self) -> np.ndarray:
        return np.array([[e.lo for e in r] for r in self._rows], dtype=float).reshape(self.shape)

    def upper(self) -> np.ndarray:
        return np.array([[e.hi for e in r] for r in self._rows], dtype=float).reshape(self.shape)

    def abs_upper(self) -> np.ndarray:
        """Entrywise max |.| (exact)."""
        return np.array([[e.mag for e in r] for r in self._rows], dtype=float).reshape(self.shape)

    def contains(self, p: object) -> bool:
        """Membership of a point matrix, or inclusion of an interval matrix."""
        if isinstance(p, IntervalMatrix):
            return p.shape == self.shape and all(
                q.subset_of(e) for rs, rp in zip(self._rows, p._rows) for e, q in zip(rs, rp)
            )
        arr = np.atleast_2d(np.asarray(p, dtype=float))
        if arr.shape != self.shape:
            return False
        return bool(np.all(self.lower() <= arr) and np.all(arr <= self.upper()))

    def __contains__(self, p: object) -> bool:
        return self.contains(p)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        lo, hi = self.lower(), self.upper()
        return lo + (hi - lo) * rng.random(self.shape)

    def __add__(self, other: "IntervalMatrix") -> "IntervalMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return IntervalMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self._rows, other._rows)],
            cols=self.cols,
        )

    def __sub__(self, other: "IntervalMatrix") -> "IntervalMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return IntervalMatrix(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self._rows, other._rows)],
            cols=self.cols,
        )

    def scale(self, s: object) -> "IntervalMatrix":
        k = _as_interval(s)
        return IntervalMatrix([[k * e for e in r] for r in self._rows], cols=self.cols)

    def __matmul__(self, other: "IntervalMatrix") -> "IntervalMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = Interval(0.0, 0.0)
                for k in range(self.cols):
                    acc = acc + self[i, k] * other[k, j]
                row.append(acc)
            out.append(row)
        return IntervalMatrix(out, cols=other.cols)

    def apply(self, vec: Sequence[object]) -> tuple[Interval, ...]:
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        xs = [_as_interval(v) for v in vec]
        out = []
        for r in self._rows:
            acc = Interval(0.0, 0.0)
            for e, x in zip(r, xs):
                acc = acc + e * x
            out.append(acc)
        return tuple(out)


def _sum_up(values: Iterable[float]) -> float:
    acc = 0.0
    for v in values:
        acc = add_rd(acc, v, True)
    return acc


def _abs_norm_bound(b: np.ndarray) -> float:
    """Upper bound of sqrt(||B||_1 ||B||_inf) for a nonnegative matrix B."""
    rows, cols = b.shape
    if rows == 0 or cols == 0:
        return 0.0
    n1 = max(_sum_up(b[:, j]) for j in range(cols))
    ninf = max(_sum_up(b[i, :]) for i in range(rows))
    return sqrt_rd(mul_rd(n1, ninf, True), True)


def op_norm_upper(a: IntervalMatrix) -> float:
    """Upper bound on the Euclidean operator norm of every member of ``a``.

    Uses ``||P||_2 <= sqrt(||P||_1 ||P||_inf) <= sqrt(||B||_1 ||B||_inf)``
    with ``B`` the entrywise magnitude matrix.  Exact for 1x1 blocks.
    """
    if a.rows == 0 or a.cols == 0:
        return 0.0
    if a.shape == (1, 1):
        return a[0, 0].mag
    return _abs_norm_bound(a.abs_upper())


def _mid_rad(a: IntervalMatrix) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = a.lower(), a.upper()
    mid = 0.5 * lo + 0.5 * hi
    rad = np.empty_like(mid)
    for idx in np.ndindex(mid.shape):
        rad[idx] = max(add_rd(hi[idx], -mid[idx], True), add_rd(mid[idx], -lo[idx], True))
    return mid, rad


def _inverse_norm_upper(m: np.ndarray) -> float | None:
    """Rigorous upper bound on ||m^{-1}||_2 for a point matrix, or None.

    With ``R`` an approximate inverse and ``E = I - R m`` enclosed in
    interval arithmetic, ``||m^{-1}|| <= ||R|| / (1 - ||E||)`` whenever
    ``||E|| < 1``.
    """
    n = m.shape[0]
    try:
        r = np.linalg.inv(m)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(r)):
        return None
    rm = IntervalMatrix.from_array(r) @ IntervalMatrix.from_array(m)
    e = IntervalMatrix.identity(n) - rm
    e_norm = op_norm_upper(e)
    if not e_norm < 1.0:
        return None
    r_norm = op_norm_upper(IntervalMatrix.from_array(r))
    denom = add_rd(1.0, -e_norm, False)
    if denom <= 0.0:
        return None
    return div_rd(r_norm, denom, True)


def min_norm_lower(a: IntervalMatrix) -> float:
    """Lower bound on ``inf_{|x|=1} |P x|`` over every member ``P`` of ``a``.

    Returns 0 when no positive bound can be established.
    """
    if a.rows == 0 or a.cols == 0:
        return 0.0
    if a.shape == (1, 1):
        return a[0, 0].mig
    if a.rows != a.cols:
        return 0.0
    mid, rad = _mid_rad(a)
    inv_norm = _inverse_norm_upper(mid)
    if inv_norm is None or inv_norm == 0.0:
        return 0.0
    sigma_min = div_rd(1.0, inv_norm, False)
    bound = add_rd(sigma_min, -_abs_norm_bound(rad), False)
    return max(0.0, bound)

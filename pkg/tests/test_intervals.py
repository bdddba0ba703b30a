import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chsetcert.intervals import (
    PI,
    TWO_PI,
    Interval,
    IntervalError,
    IntervalMatrix,
    add_rd,
    div_rd,
    icos,
    isin,
    isqrt,
    min_norm_lower,
    mul_rd,
    op_norm_upper,
    sqrt_rd,
)

mpmath.mp.prec = 200


def _rand_interval(rng: random.Random, scale: float = 10.0) -> Interval:
    a, b = rng.uniform(-scale, scale), rng.uniform(-scale, scale)
    return Interval(min(a, b), max(a, b))


def _member(rng: random.Random, a: Interval) -> float:
    return a.lo + (a.hi - a.lo) * rng.random()


def _in(x: Fraction, a: Interval) -> bool:
    return Fraction(a.lo) <= x <= Fraction(a.hi)


# -- basic operations ------------------------------------------------------


def test_exact_sum_is_not_widened():
    assert Interval(1, 2) + Interval(3, 4) == Interval(4, 6)


def test_symmetric_product():
    assert Interval(-1, 1) * Interval(-1, 1) == Interval(-1, 1)


def test_quotient_contains_corner_hull():
    q = Interval(1, 2) / Interval(2, 4)
    corners = [Fraction(x, y) for x in (1, 2) for y in (2, 4)]
    assert all(_in(c, q) for c in corners)
    assert _in(Fraction(1, 4), q) and _in(Fraction(1), q)


def test_division_by_interval_containing_zero_raises():
    with pytest.raises(IntervalError):
        Interval(1, 2) / Interval(-1, 1)


def test_empty_and_nan_rejected():
    with pytest.raises(IntervalError):
        Interval(2, 1)
    with pytest.raises(IntervalError):
        Interval(float("nan"), 1)


def test_exact_decimal_enclosure():
    iv = Interval.exact("0.1")
    assert _in(Fraction(1, 10), iv)
    assert iv.hi == math.nextafter(iv.lo, math.inf)
    assert Interval.exact("0.5") == Interval(0.5, 0.5)
    assert _in(Fraction(3, 40), Interval.exact("3/40"))


def test_directed_primitives_bracket_exact_results():
    rng = random.Random(7)
    for _ in range(2000):
        a, b = rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3)
        fa, fb = Fraction(a), Fraction(b)
        assert Fraction(add_rd(a, b, False)) <= fa + fb <= Fraction(add_rd(a, b, True))
        assert Fraction(mul_rd(a, b, False)) <= fa * fb <= Fraction(mul_rd(a, b, True))
        if b != 0:
            assert Fraction(div_rd(a, b, False)) <= fa / fb <= Fraction(div_rd(a, b, True))
        x = abs(a)
        lo, hi = Fraction(sqrt_rd(x, False)), Fraction(sqrt_rd(x, True))
        assert lo * lo <= Fraction(x) <= hi * hi


def test_directed_primitives_handle_tiny_products():
    # below the error-free range the fallback nudge must still bracket
    a, b = 1e-160, 3e-170
    lo, hi = mul_rd(a, b, False), mul_rd(a, b, True)
    assert Fraction(lo) <= Fraction(a) * Fraction(b) <= Fraction(hi)


# -- elementary functions --------------------------------------------------


def test_icos_at_zero():
    assert icos(Interval(0, 0)) == Interval(1, 1)


def test_isin_on_half_period_reaches_one():
    s = isin(Interval(0.0, PI.hi))
    assert s.hi == 1.0 and s.lo <= 0.0


def test_isqrt_endpoint_accuracy():
    r = isqrt(Interval(4, 9))
    assert r.lo <= 2 <= r.lo + 2 * math.ulp(2.0)
    assert r.hi >= 3 >= r.hi - 2 * math.ulp(3.0)


def test_isqrt_rejects_negative():
    with pytest.raises(IntervalError):
        isqrt(Interval(-1, 1))


def test_trig_against_mpmath():
    rng = random.Random(11)
    for _ in range(2000):
        a = _rand_interval(rng, 20.0)
        c, s = icos(a), isin(a)
        for _ in range(3):
            x = mpmath.mpf(_member(rng, a))
            assert mpmath.mpf(c.lo) <= mpmath.cos(x) <= mpmath.mpf(c.hi)
            assert mpmath.mpf(s.lo) <= mpmath.sin(x) <= mpmath.mpf(s.hi)


def test_icos_detects_interior_extrema():
    c = icos(Interval(-0.1, 0.1))
    assert c.hi == 1.0
    c = icos(Interval(3.0, 3.3))
    assert c.lo == -1.0
    assert icos(Interval(0.0, TWO_PI.hi + 1)) == Interval(-1, 1)


def test_pi_enclosures():
    assert mpmath.mpf(PI.lo) <= mpmath.pi <= mpmath.mpf(PI.hi)
    assert mpmath.mpf(TWO_PI.lo) <= 2 * mpmath.pi <= mpmath.mpf(TWO_PI.hi)


# -- inclusion properties ----------------------------------------------------


def test_point_containment_soundness_arithmetic():
    """10^5 random point evaluations against exact rational results."""
    rng = random.Random(2024)
    ops = [
        (lambda x, y: x + y, lambda a, b: a + b),
        (lambda x, y: x - y, lambda a, b: a - b),
        (lambda x, y: x * y, lambda a, b: a * b),
        (lambda x, y: x / y, lambda a, b: a / b),
    ]
    violations = 0
    n = 0
    while n < 100_000:
        a, b = _rand_interval(rng), _rand_interval(rng)
        for exact_op, iv_op in ops:
            if iv_op is ops[3][1] and b.contains_zero():
                continue
            res = iv_op(a, b)
            x, y = Fraction(_member(rng, a)), Fraction(_member(rng, b))
            violations += not _in(exact_op(x, y), res)
            n += 1
    assert violations == 0


def test_point_containment_sqrt_against_mpmath():
    rng = random.Random(5)
    for _ in range(3000):
        lo = rng.uniform(0, 100)
        a = Interval(lo, lo + rng.uniform(0, 10))
        r = isqrt(a)
        x = mpmath.mpf(_member(rng, a))
        assert mpmath.mpf(r.lo) <= mpmath.sqrt(x) <= mpmath.mpf(r.hi)


intervals = st.tuples(
    st.floats(-1e6, 1e6, allow_nan=False), st.floats(-1e6, 1e6, allow_nan=False)
).map(lambda t: Interval(min(t), max(t)))


@st.composite
def nested(draw):
    """An interval and a sub-interval of it."""
    outer = draw(intervals)
    f = draw(st.floats(0, 1))
    g = draw(st.floats(0, 1))
    lo = outer.lo + (outer.hi - outer.lo) * min(f, g)
    hi = outer.lo + (outer.hi - outer.lo) * max(f, g)
    # rounding can push either endpoint outside the outer interval
    lo = min(max(lo, outer.lo), outer.hi)
    hi = min(max(hi, outer.lo), outer.hi)
    return Interval(min(lo, hi), max(lo, hi)), outer


@settings(max_examples=300, deadline=None)
@given(nested(), nested())
def test_inclusion_monotonicity(pa, pb):
    (a, a2), (b, b2) = pa, pb
    assert (a + b).subset_of(a2 + b2)
    assert (a - b).subset_of(a2 - b2)
    assert (a * b).subset_of(a2 * b2)
    if not b2.contains_zero():
        assert (a / b).subset_of(a2 / b2)
    assert icos(a).subset_of(icos(a2))
    assert abs(a).subset_of(abs(a2))


@settings(max_examples=200, deadline=None)
@given(intervals)
def test_sqr_is_nonnegative_and_contains_squares(a):
    s = a.sqr()
    assert s.lo >= 0.0
    for x in (a.lo, a.hi, a.mid):
        assert _in(Fraction(x) ** 2, s)


# -- matrices and norms ------------------------------------------------------


def test_norm_scalar_cases():
    assert op_norm_upper(IntervalMatrix([[Interval(-3, 2)]])) == 3.0
    assert min_norm_lower(IntervalMatrix([[Interval(2, 3)]])) == 2.0
    assert min_norm_lower(IntervalMatrix([[Interval(-1, 1)]])) == 0.0


def test_norm_diagonal():
    d = IntervalMatrix([[Interval(2, 2), 0.0], [0.0, Interval(1, 1)]])
    bound = op_norm_upper(d)
    assert 2.0 <= bound <= 2.0 * (1 + 1e-12)


def test_op_norm_dominates_sampled_members():
    rng = np.random.default_rng(3)
    lo = rng.uniform(-2, 2, (3, 3))
    a = IntervalMatrix.from_bounds(lo, lo + rng.uniform(0, 0.5, (3, 3)))
    bound = op_norm_upper(a)
    norms = [np.linalg.norm(a.sample(rng), 2) for _ in range(10_000)]
    assert max(norms) <= bound


def test_min_norm_is_below_sampled_members():
    rng = np.random.default_rng(4)
    mid = np.array([[3.0, 0.5], [-0.4, 2.0]])
    a = IntervalMatrix.from_bounds(mid - 0.1, mid + 0.1)
    bound = min_norm_lower(a)
    assert bound > 0.0
    sv = [np.linalg.svd(a.sample(rng), compute_uv=False)[-1] for _ in range(10_000)]
    assert bound <= min(sv)


def test_min_norm_inconclusive_cases_return_zero():
    assert min_norm_lower(IntervalMatrix([[1.0, 2.0]])) == 0.0
    singular = IntervalMatrix([[1.0, 1.0], [1.0, 1.0]])
    assert min_norm_lower(singular) == 0.0


def test_matrix_product_contains_point_products():
    rng = np.random.default_rng(9)
    lo_a, lo_b = rng.uniform(-1, 1, (2, 3)), rng.uniform(-1, 1, (3, 2))
    a = IntervalMatrix.from_bounds(lo_a, lo_a + 0.2)
    b = IntervalMatrix.from_bounds(lo_b, lo_b + 0.2)
    ab = a @ b
    for _ in range(500):
        assert ab.contains(a.sample(rng) @ b.sample(rng))


def test_matrix_is_immutable():
    m = IntervalMatrix.identity(2)
    with pytest.raises(AttributeError):
        m.shape = (3, 3)

import math

import numpy as np
import pytest

from chsetcert.cones import BlockBounds
from chsetcert.covering import (
    ChartTripleInput,
    check_contraction,
    check_covering,
    check_expansion,
    check_zero_image,
    contraction_upper,
    expansion_lower,
)
from chsetcert.intervals import Interval, IntervalMatrix

ZERO = Interval(0, 0)
WINDOW = Interval(0, 9)


def _jac(a22=(2, 2), a23=(0, 0), a32=(0, 0), a33=(0.1, 0.1)) -> BlockBounds:
    m = IntervalMatrix(
        [
            [1.0, 0.0, 0.0],
            [0.0, Interval(*a22), Interval(*a23)],
            [0.0, Interval(*a32), Interval(*a33)],
        ]
    )
    return BlockBounds.from_matrix(m, (1, 1, 1))


def _triple(jac=None, fiber=(ZERO, ZERO), eps_u=0.5, eps_s=0.5, base=Interval(2, 7), j=0) -> ChartTripleInput:
    return ChartTripleInput(j, 0, 0, (base, *fiber), WINDOW, jac or _jac(), eps_u, eps_s)


def test_zero_section_maps_inside():
    assert check_zero_image(_triple())


def test_zero_image_outside_ball():
    t = _triple(fiber=(Interval(0, 1.01 * 0.5), ZERO))
    assert not check_zero_image(t)


def test_zero_image_base_outside_window():
    assert not check_zero_image(_triple(base=Interval(8, 10)))


def test_zero_image_on_sphere_is_inside_closed_ball():
    assert check_zero_image(_triple(fiber=(Interval(-0.5, 0.5), Interval(-0.5, 0.5))))


def test_expansion_examples():
    assert check_expansion(_triple())
    bad = _triple(jac=_jac(a22=(1.1, 1.2), a23=(-0.5, 0.5)))
    assert not check_expansion(bad)
    assert expansion_lower(bad.jac) <= 1.1 - 0.5


def test_contraction_examples():
    assert check_contraction(_triple())
    assert not check_contraction(_triple(jac=_jac(a33=(0.9, 0.9)), eps_s=0.2))


def test_invalid_radii_rejected():
    with pytest.raises(ValueError):
        _triple(eps_u=0.0)
    with pytest.raises(ValueError):
        _triple(eps_s=1.0)


def test_covering_single_and_mixed():
    assert check_covering([_triple()]).holds
    triples = [_triple(j=k) for k in range(5)]
    triples[3] = _triple(jac=_jac(a33=(0.9, 0.9)), j=3)
    verdict = check_covering(triples)
    assert not verdict.holds
    assert [d.label for d in verdict.failures] == [triples[3].label]
    assert not verdict.failures[0].contraction_ok


def test_covering_empty_rejected():
    with pytest.raises(ValueError):
        check_covering([])


def test_threaded_run_matches_serial(monkeypatch):
    triples = [_triple(j=k, jac=_jac(a33=(0.1 * (k % 9), 0.1 * (k % 9)))) for k in range(40)]
    serial = check_covering(triples, threads=1)
    monkeypatch.setenv("CHSETCERT_THREADS", "4")
    threaded = check_covering(triples)
    assert serial == threaded


def test_expansion_soundness_by_sampling():
    rng = np.random.default_rng(1)
    jac = _jac(a22=(2.5, 2.8), a23=(-0.3, 0.2), a32=(-0.1, 0.1), a33=(-0.2, 0.3))
    t = _triple(jac=jac, eps_u=0.9, eps_s=0.4)
    assert check_expansion(t) and check_contraction(t)
    m = jac.to_matrix()
    exp_floor = (Interval.point(1.0) + t.eps_u).hi
    for _ in range(10_000):
        P = m.sample(rng)
        x = rng.choice([-1.0, 1.0])
        y = rng.uniform(-1, 1)
        img = P @ np.array([0.0, x, y])
        assert abs(img[1]) > exp_floor
        x2, y2 = rng.uniform(-1, 1, 2)
        assert abs((P @ np.array([0.0, x2, y2]))[2]) < 1 - t.eps_s


def test_bounds_exact_for_scalar_blocks():
    jac = _jac(a22=(2.5, 2.8), a23=(-0.3, 0.2), a32=(-0.1, 0.1), a33=(-0.2, 0.3))
    # exact up to the final directed rounding
    assert 0 <= (2.5 - 0.3) - expansion_lower(jac) <= math.ulp(2.2)
    assert 0 <= contraction_upper(jac) - (0.1 + 0.3) <= math.ulp(0.4)


def test_determinism():
    triples = [_triple(j=k) for k in range(10)]
    assert check_covering(triples) == check_covering(triples)

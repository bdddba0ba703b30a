import numpy as np
import pytest

from chsetcert.cones import (
    BlockBounds,
    DerivativeBounds,
    check_cone_conditions,
    check_cone_conditions_rescaled,
    coeffs_abc,
    cone_inequalities,
    suggest_v,
)
from chsetcert.intervals import Interval, IntervalMatrix

from oracles import DIMS, lemma_violations, random_blocks


def _diag_bounds(**kw) -> DerivativeBounds:
    base = dict(C=1.0, eps_c=0.0, mu=0.0, M=0.0, A_up=3.0, alpha=3.0, eps_u=0.0, eps_s=0.0, beta=0.1)
    base.update(kw)
    return DerivativeBounds(**base)


def test_abc_diagonal():
    m = IntervalMatrix.from_array(np.diag([1.0, 2.0, 0.5]))
    abc = coeffs_abc(BlockBounds.from_matrix(m, (1, 1, 1)))
    assert (abc.a, abc.b, abc.c) == (1.0, 4.0, 0.25)


def test_abc_zero():
    abc = coeffs_abc(BlockBounds.from_matrix(IntervalMatrix.zeros(3, 3), (1, 1, 1)))
    assert (abc.a, abc.b, abc.c) == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("dims", DIMS)
def test_abc_sampling_oracle(dims):
    rng = np.random.default_rng(sum(dims))
    total = 0
    for _ in range(60):
        total += lemma_violations(random_blocks(rng, dims), rng, 500)
    assert total == 0


def test_abc_monotone_under_enlargement():
    rng = np.random.default_rng(12)
    for _ in range(50):
        small = random_blocks(rng, (1, 1, 1))
        m = small.to_matrix()
        widened = IntervalMatrix([[e + Interval(-0.05, 0.05) for e in row] for row in m])
        big = BlockBounds.from_matrix(widened, (1, 1, 1))
        s, b = coeffs_abc(small), coeffs_abc(big)
        assert b.b <= s.b and b.a >= s.a and b.c >= s.c


def test_block_shapes_validated():
    with pytest.raises(ValueError):
        BlockBounds.from_matrix(IntervalMatrix.zeros(3, 3), (1, 1, 2))


def test_permutation_swaps_fibers():
    m = IntervalMatrix.from_array(np.diag([1.0, 2.0, 3.0]))
    b = BlockBounds.from_matrix(m, (1, 1, 1)).permuted((0, 2, 1))
    assert b.block(2, 2)[0, 0] == Interval(3, 3)
    assert b.block(3, 3)[0, 0] == Interval(2, 2)


def test_decoupled_diagonal_holds():
    v = check_cone_conditions(_diag_bounds(), 2.0)
    assert v.holds
    lhs = {q.name: q.lhs for q in v.inequalities}
    assert 1.0 in lhs["central"] and 9.0 in lhs["unstable"] and 0.01 in lhs["stable"]


def test_m_must_exceed_one():
    with pytest.raises(ValueError):
        check_cone_conditions(_diag_bounds(), 1.0)
    with pytest.raises(ValueError):
        check_cone_conditions_rescaled(_diag_bounds(), 0.5, 10.0)


def test_alpha_above_A_rejected():
    with pytest.raises(ValueError):
        _diag_bounds(alpha=4.0)
    with pytest.raises(ValueError):
        _diag_bounds(M=-1.0)


def test_rescaled_at_one_reproduces_unscaled():
    b = _diag_bounds(eps_c=0.01, mu=0.1, M=0.3, eps_u=0.05, eps_s=0.02)
    plain = cone_inequalities(b, 2.0)
    scaled = cone_inequalities(b, 2.0, 1.0)
    assert [q.lhs for q in plain] == [q.lhs for q in scaled]


def test_large_v_rescues_coupling():
    # eps_c = 0, beta <= C < alpha, m between max(C^2, 1) and alpha^2
    b = DerivativeBounds(C=1.0, eps_c=0.0, mu=0.0, M=5.0, A_up=3.0, alpha=3.0, eps_u=0.1, eps_s=0.1, beta=0.5)
    assert not check_cone_conditions(b, 4.0).holds
    assert check_cone_conditions_rescaled(b, 4.0, 1e6).holds


def test_transition_in_powers_of_ten():
    b = DerivativeBounds(C=1.0, eps_c=0.0, mu=0.0, M=50.0, A_up=3.0, alpha=3.0, eps_u=0.1, eps_s=0.1, beta=0.5)
    verdicts = [check_cone_conditions_rescaled(b, 4.0, 10.0**k).holds for k in range(8)]
    assert verdicts[0] is False and verdicts[-1] is True
    first = verdicts.index(True)
    assert all(verdicts[first:])


def test_suggest_v():
    assert suggest_v(_diag_bounds(), 2.0) == 1.0
    b = DerivativeBounds(C=1.0, eps_c=0.0, mu=0.0, M=5.0, A_up=3.0, alpha=3.0, eps_u=0.1, eps_s=0.1, beta=0.5)
    v = suggest_v(b, 4.0)
    assert v is not None and check_cone_conditions_rescaled(b, 4.0, v).holds
    assert suggest_v(_diag_bounds(alpha=0.9, A_up=0.9), 2.0) is None


def test_pass_set_in_m_is_an_interval():
    b = _diag_bounds(eps_c=0.0, M=0.05, eps_u=0.05, eps_s=0.05, beta=0.3)
    ms = np.linspace(1.01, 12.0, 200)
    passes = [check_cone_conditions(b, m).holds for m in ms]
    idx = [i for i, p in enumerate(passes) if p]
    assert idx and idx == list(range(idx[0], idx[-1] + 1))


def test_rigorous_rounding_direction():
    v = check_cone_conditions(_diag_bounds(), 2.0)
    for q in v.inequalities:
        assert q.lhs.lo <= q.lhs.hi
        assert q.slack > 0


def test_sampling_oracle_detects_wrong_coefficients(monkeypatch):
    import oracles
    from chsetcert.cones import AbcCoefficients

    real = oracles.coeffs_abc
    monkeypatch.setattr(oracles, "coeffs_abc", lambda b: AbcCoefficients(real(b).a - 1.0, real(b).b + 1.0, real(b).c))
    rng = np.random.default_rng(0)
    # diagonal point matrix: the true bound is attained, so any tightening shows
    tight = BlockBounds.from_matrix(IntervalMatrix.from_array(np.diag([1.0, 2.0, 0.5])), (1, 1, 1))
    assert lemma_violations(tight, rng, 500) > 0

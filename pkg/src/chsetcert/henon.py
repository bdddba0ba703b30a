"""The rotating Henon map and the interval checks for its invariant circle.

    theta' = theta + omega (mod 1)
    x'     = 1 + y - a x^2 + epsilon cos(2 pi theta)
    y'     = b x

Near the saddle ``(x-, y-)`` of the unforced map, points are written in the
scaled eigen-coordinates ``(x~, y~) = Phi_eps (x - x-, y - y-)`` and the base
is stretched to the circle ``R/v``.  The set ``|D|`` is the preimage of
``R/v x [-1, 1] x [-1, 1]``.  In those coordinates the fiber part of the
derivative is ``J + R_eps`` (forward) or ``J^-1 + R'_eps`` (backward) with
explicit rank-one perturbations that are enclosed here in interval
arithmetic.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Optional

import numpy as np

from .atlas import CircleAtlas, validate_cone_containment
from .certificate import InequalityRecord, VerificationCertificate
from .cones import BlockBounds, ConeVerdict, DerivativeBounds, check_cone_conditions
from .covering import ChartTripleInput, CoveringVerdict, check_covering
from .intervals import (
    TWO_PI,
    Interval,
    IntervalError,
    IntervalMatrix,
    add_rd,
    icos,
    isqrt,
)

log = logging.getLogger(__name__)

GOLDEN_OMEGA = Fraction("0.6180339887498949")
DEFAULT_V_POWER = 10
MAX_V_POWER = 40
MIN_CONE_SLACK = 1e-6
# explicit chart-triple enumeration up to this circumference; beyond it the
# rotation invariance of the atlas reduces the check to one window
MAX_ENUMERATED_V = 4096

# half-widths of U_eps in units of epsilon
U_EPS_X = Fraction("1.1")
U_EPS_Y = Fraction("0.12")

# printed perturbation coefficients of the forward/backward enclosures
FWD_XX = Fraction(1, 2)
FWD_YY = Fraction(6, 1000)
BWD_XX = Fraction(6, 10)
BWD_YY = Fraction(50)

ZERO = Interval(0.0, 0.0)
UNIT = Interval(-1.0, 1.0)


class HenonError(ValueError):
    """Inconsistent parameters (no real saddle, degenerate spectrum, ...)."""


def to_fraction(value: object) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (int, float)):
        return Fraction(value)
    raise TypeError(f"cannot read {value!r} as an exact number")


def format_fraction(q: Fraction) -> str:
    """Exact decimal when the denominator allows it, ``p/q`` otherwise."""
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{q.numerator}/{q.denominator}"
    places = max(twos, fives)
    scaled = q * 10**places
    assert scaled.denominator == 1
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    sign = "-" if q < 0 else ""
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


@dataclass(frozen=True)
class HenonParams:
    a: Fraction = Fraction("0.68")
    b: Fraction = Fraction("0.1")
    omega: Fraction = GOLDEN_OMEGA
    epsilon: Fraction = Fraction(1, 2)
    tau: Fraction = Fraction(3)
    eta: Fraction = Fraction(3, 40)
    v: Optional[int] = None  # None: choose the circumference automatically

    def __post_init__(self) -> None:
        for name in ("a", "b", "omega", "epsilon", "tau", "eta"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        if self.b == 0:
            raise HenonError("b must be nonzero for the map to be invertible")
        if self.a == 0:
            raise HenonError("a must be nonzero")
        if (1 - self.b) ** 2 + 4 * self.a <= 0:
            raise HenonError("(1-b)^2 + 4a must be positive for real fixed points")
        if self.tau <= 0 or self.eta <= 0:
            raise HenonError("tau and eta must be positive")
        if self.epsilon < 0:
            raise HenonError("epsilon must be nonnegative")
        if self.v is not None:
            if int(self.v) != self.v or self.v < 9:
                raise HenonError(f"v must be an integer >= 9, got {self.v}")
            object.__setattr__(self, "v", int(self.v))

    def with_(self, **changes: object) -> "HenonParams":
        return replace(self, **changes)

    def iv(self, name: str) -> Interval:
        """Interval enclosure of an exact parameter."""
        return Interval.exact(getattr(self, name))

    def items(self) -> list[tuple[str, str]]:
        out = [(k, format_fraction(getattr(self, k))) for k in ("a", "b", "omega", "epsilon", "tau", "eta")]
        out.append(("v", "auto" if self.v is None else str(self.v)))
        return out


@dataclass(frozen=True)
class JordanFrame:
    """Saddle, spectrum and the eigen-frame ``Phi_eps``.

    ``basis = eps * Phi_eps`` and ``basis_inv = Phi_eps^-1 / eps`` do not
    depend on epsilon; ``Phi``/``PhiInv`` are None at epsilon = 0 where the
    scaled frame degenerates.
    """

    x_minus: Interval
    y_minus: Interval
    lambda1: Interval
    lambda2: Interval
    kappa: Interval
    basis: IntervalMatrix
    basis_inv: IntervalMatrix
    epsilon: Interval
    Phi: Optional[IntervalMatrix]
    PhiInv: Optional[IntervalMatrix]

    @property
    def J(self) -> IntervalMatrix:
        return IntervalMatrix([[self.lambda1, ZERO], [ZERO, self.lambda2]])

    @property
    def J_inv(self) -> IntervalMatrix:
        return IntervalMatrix([[1 / self.lambda1, ZERO], [ZERO, 1 / self.lambda2]])


def _unforced_jacobian(p: HenonParams, x: Interval) -> IntervalMatrix:
    return IntervalMatrix([[-2 * p.iv("a") * x, 1.0], [p.iv("b"), 0.0]])


def fixed_point(p: HenonParams) -> tuple[Interval, Interval]:
    """The saddle ``x- = (-(1-b) - sqrt((1-b)^2 + 4a)) / (2a)``, ``y- = b x-``."""
    return saddle_point(p.a, p.b)


def saddle_point(a_value: object, b_value: object) -> tuple[Interval, Interval]:
    """Fixed-point formula for any exact ``a != 0`` and ``b``, including ``b = 0``."""
    a, b = Interval.exact(to_fraction(a_value)), Interval.exact(to_fraction(b_value))
    if a.contains_zero():
        raise HenonError("a must be nonzero")
    one_minus_b = 1 - b
    disc = one_minus_b.sqr() + 4 * a
    if disc.lo < 0:
        raise HenonError(f"discriminant {disc} reaches negative values")
    x = (-one_minus_b - isqrt(disc)) / (2 * a)
    return x, b * x


def eigen_data(p: HenonParams) -> JordanFrame:
    a, b = p.iv("a"), p.iv("b")
    tau, eta, eps = p.iv("tau"), p.iv("eta"), p.iv("epsilon")
    x, y = fixed_point(p)
    ax = a * x
    root = isqrt(b + ax.sqr())
    l1 = -ax + root
    l2 = -ax - root
    try:
        kappa = 1 / (l2 - l1)
    except IntervalError as exc:
        raise HenonError("eigenvalues are not separated; kappa undefined") from exc
    basis = IntervalMatrix([[-l1 / tau, -1 / tau], [l2 / eta, 1 / eta]])
    basis_inv = IntervalMatrix([[tau, eta], [-tau * l2, -l1 * eta]]).scale(kappa)
    if p.epsilon == 0:
        phi = phi_inv = None
    else:
        phi = basis.scale(1 / eps)
        phi_inv = basis_inv.scale(eps)
    return JordanFrame(x, y, l1, l2, kappa, basis, basis_inv, eps, phi, phi_inv)


# ---------------------------------------------------------------------------
# point maps (plain floats; used by tests and for plotting ranges)


def henon_map(p: HenonParams, theta: float, x: float, y: float) -> tuple[float, float, float]:
    a, b, eps, om = float(p.a), float(p.b), float(p.epsilon), float(p.omega)
    return (theta + om) % 1.0, 1 + y - a * x * x + eps * math.cos(2 * math.pi * theta), b * x


def henon_inverse(p: HenonParams, theta: float, x: float, y: float) -> tuple[float, float, float]:
    a, b, eps, om = float(p.a), float(p.b), float(p.epsilon), float(p.omega)
    th = (theta - om) % 1.0
    return th, y / b, x - 1 + a / (b * b) * y * y - eps * math.cos(2 * math.pi * th)


# ---------------------------------------------------------------------------
# derivative enclosures in the phi-coordinates, block order (theta, x~, y~)


def _circumference(p: HenonParams) -> int:
    return p.v if p.v is not None else 2**DEFAULT_V_POWER


def _fiber_forward_computed(p: HenonParams, fr: JordanFrame) -> IntervalMatrix:
    a, eps = p.iv("a"), fr.epsilon
    tau, eta = p.iv("tau"), p.iv("eta")
    l1, l2 = fr.lambda1, fr.lambda2
    s = tau * UNIT + eta * UNIT  # tau x~ + eta y~ over the unit square
    k = -2 * a * eps * fr.kappa.sqr() * s
    r = IntervalMatrix([[k * -l1, k * (-(eta / tau) * l1)], [k * ((tau / eta) * l2), k * l2]])
    return fr.J + r


def _fiber_forward_printed(p: HenonParams, fr: JordanFrame) -> IntervalMatrix:
    tau, eta, eps = p.iv("tau"), p.iv("eta"), fr.epsilon
    scale = eps * (tau + eta)
    half, small = Interval.exact(FWD_XX), Interval.exact(FWD_YY)
    pert = IntervalMatrix(
        [[half * UNIT, half * (eta / tau) * UNIT], [small * (tau / eta) * UNIT, small * UNIT]]
    ).scale(scale)
    return fr.J + pert


def _fiber_backward_computed(p: HenonParams, fr: JordanFrame) -> IntervalMatrix:
    a, b, eps = p.iv("a"), p.iv("b"), fr.epsilon
    tau, eta = p.iv("tau"), p.iv("eta")
    l1, l2 = fr.lambda1, fr.lambda2
    s = tau * l2 * UNIT + eta * l1 * UNIT
    k = 2 * a / b.sqr() * eps * fr.kappa.sqr() * s
    r = IntervalMatrix([[k * -l2, k * (-(eta / tau) * l1)], [k * ((tau / eta) * l2), k * l1]])
    return fr.J_inv + r


def _backward_scale(p: HenonParams, fr: JordanFrame) -> Interval:
    """``tau |lambda2| + eta |lambda1|``."""
    return p.iv("tau") * abs(fr.lambda2) + p.iv("eta") * abs(fr.lambda1)


def _fiber_backward_printed(p: HenonParams, fr: JordanFrame) -> IntervalMatrix:
    tau, eta, eps = p.iv("tau"), p.iv("eta"), fr.epsilon
    scale = eps * _backward_scale(p, fr)
    c6, c50 = Interval.exact(BWD_XX), Interval.exact(BWD_YY)
    pert = IntervalMatrix(
        [[c6 * UNIT, c50 * (eta / tau) * UNIT], [(tau / eta) * c6 * UNIT, c50 * UNIT]]
    ).scale(scale)
    return fr.J_inv + pert


def _coupling(p: HenonParams, forward: bool, fr: JordanFrame) -> tuple[Interval, Interval]:
    """Theta-column of the derivative: effect of the forcing on (x~, y~).

    Forward: d/dtheta of eps cos(2 pi theta / v) pushed through Phi_eps gives
    ``(2 pi lambda1 / (v tau), -2 pi lambda2 / (v eta)) * sin``; epsilon
    cancels against the 1/eps of Phi_eps.  Backward: the forcing sits in the
    y-equation and gives ``(-2 pi / (v tau), 2 pi / (v eta)) * sin``.
    """
    if p.epsilon == 0:
        return ZERO, ZERO
    v = Interval.exact(_circumference(p))
    tau, eta = p.iv("tau"), p.iv("eta")
    base = TWO_PI / v * UNIT  # sin over the whole circle
    if forward:
        return base * fr.lambda1 / tau, -(base * fr.lambda2 / eta)
    return -(base / tau), base / eta


def _assemble(cu: Interval, cs: Interval, fiber: IntervalMatrix) -> BlockBounds:
    m = IntervalMatrix(
        [
            [Interval(1.0, 1.0), ZERO, ZERO],
            [cu, fiber[0, 0], fiber[0, 1]],
            [cs, fiber[1, 0], fiber[1, 1]],
        ]
    )
    return BlockBounds.from_matrix(m, (1, 1, 1))


def forward_jac_enclosure(p: HenonParams, frame: JordanFrame | None = None) -> BlockBounds:
    """Enclosure of d(F_eps)_phi over N(Lambda), computed from J + R_eps."""
    fr = frame or eigen_data(p)
    cu, cs = _coupling(p, True, fr)
    return _assemble(cu, cs, _fiber_forward_computed(p, fr))


def printed_forward_enclosure(p: HenonParams, frame: JordanFrame | None = None) -> BlockBounds:
    """The coarser forward enclosure with the 1/2, 6/1000 coefficients."""
    fr = frame or eigen_data(p)
    cu, cs = _coupling(p, True, fr)
    return _assemble(cu, cs, _fiber_forward_printed(p, fr))


def backward_jac_enclosure(p: HenonParams, frame: JordanFrame | None = None) -> BlockBounds:
    """Enclosure of d(F_eps^-1)_phi over N(Lambda) in (theta, x~, y~) order."""
    fr = frame or eigen_data(p)
    cu, cs = _coupling(p, False, fr)
    return _assemble(cu, cs, _fiber_backward_computed(p, fr))


def printed_backward_enclosure(p: HenonParams, frame: JordanFrame | None = None) -> BlockBounds:
    fr = frame or eigen_data(p)
    cu, cs = _coupling(p, False, fr)
    return _assemble(cu, cs, _fiber_backward_printed(p, fr))


# inverse map: x~ is the stable and y~ the unstable direction
SWAP_FIBERS = (0, 2, 1)


def enclosure_slack(inner: BlockBounds, outer: BlockBounds, fiber_only: bool = True) -> float:
    """Smallest endpoint gap of ``inner`` inside ``outer`` (negative if not inside).

    The base row and coupling column are built by the same formula in both
    enclosures, so by default only the fiber block is compared.
    """
    a, b = inner.to_matrix(), outer.to_matrix()
    start = 1 if fiber_only else 0
    gaps = []
    for i in range(start, a.rows):
        for j in range(start, a.cols):
            gaps.append(add_rd(a[i, j].lo, -b[i, j].lo, False))
            gaps.append(add_rd(b[i, j].hi, -a[i, j].hi, False))
    return min(gaps)


# ---------------------------------------------------------------------------
# scalar bounds for the cone conditions


def _upper(x: Interval) -> float:
    return x.hi


def _lower_nonneg(x: Interval) -> float:
    return max(0.0, x.lo)


def assemble_forward_bounds(p: HenonParams, frame: JordanFrame | None = None) -> DerivativeBounds:
    fr = frame or eigen_data(p)
    tau, eta, eps = p.iv("tau"), p.iv("eta"), fr.epsilon
    te = eps * (tau + eta)
    half, small = Interval.exact(FWD_XX), Interval.exact(FWD_YY)
    l1 = abs(fr.lambda1)
    cu, cs = _coupling(p, True, fr)
    return DerivativeBounds(
        C=1.0,
        eps_c=0.0,
        mu=0.0,
        M=max(cu.mag, cs.mag),
        A_up=_upper(l1 + half * te),
        alpha=_lower_nonneg(l1 - half * te),
        eps_u=_upper(half * (eta / tau) * te),
        eps_s=_upper(small * (tau / eta) * te),
        beta=_upper(abs(fr.lambda2) + small * te),
    )


def assemble_backward_bounds(p: HenonParams, frame: JordanFrame | None = None) -> DerivativeBounds:
    """Bounds for F^-1 with the unstable direction y~ listed first."""
    fr = frame or eigen_data(p)
    tau, eta, eps = p.iv("tau"), p.iv("eta"), fr.epsilon
    k = eps * _backward_scale(p, fr)
    c6, c50 = Interval.exact(BWD_XX), Interval.exact(BWD_YY)
    inv_l2 = abs(1 / fr.lambda2)
    cu, cs = _coupling(p, False, fr)
    return DerivativeBounds(
        C=1.0,
        eps_c=0.0,
        mu=0.0,
        M=max(cu.mag, cs.mag),
        A_up=_upper(inv_l2 + c50 * k),
        alpha=_lower_nonneg(inv_l2 - c50 * k),
        eps_u=_upper(k * (tau / eta) * c6),
        eps_s=_upper(k * c50 * (eta / tau)),
        beta=_upper(abs(1 / fr.lambda1) + c6 * k),
    )


# ---------------------------------------------------------------------------
# chart triples


def _zero_fiber(p: HenonParams, fr: JordanFrame, forward: bool, cos_range: Interval) -> tuple[Interval, Interval]:
    """Fiber part of (F_eps)_phi(theta, 0, 0) in (unstable, stable) order.

    The saddle is fixed by the unforced map, so only the forcing survives:
    ``Phi_eps (eps c, 0) = basis (c, 0)`` forward and
    ``Phi_eps (0, -eps c) = -basis (0, c)`` backward.
    """
    if p.epsilon == 0:
        return ZERO, ZERO
    if forward:
        return fr.basis[0, 0] * cos_range, fr.basis[1, 0] * cos_range
    x_part = -(fr.basis[0, 1] * cos_range)
    y_part = -(fr.basis[1, 1] * cos_range)
    return y_part, x_part


def zero_image_radii(p: HenonParams, fr: JordanFrame, forward: bool) -> tuple[float, float]:
    """``(eps_u, eps_s)``: |lambda1|/tau, |lambda2|/eta forward; 1/eta, 1/tau backward."""
    if forward:
        return (abs(fr.lambda1) / p.iv("tau")).hi, (abs(fr.lambda2) / p.iv("eta")).hi
    return (1 / p.iv("eta")).hi, (1 / p.iv("tau")).hi


def chart_triples(
    p: HenonParams,
    fr: JordanFrame,
    jac: BlockBounds,
    forward: bool,
    atlas: CircleAtlas | None = None,
) -> list[ChartTripleInput]:
    """All ``(j, i0, i1)`` with ``V_j`` in ``U_i0`` and its image in ``U_i1``.

    The image window is found from the rotation offset ``+-v omega``.  Above
    MAX_ENUMERATED_V only ``j = 0`` is listed; every other window is a
    translate of it.
    """
    v = _circumference(p)
    atlas = atlas or CircleAtlas(v)
    vi = Interval.exact(v)
    shift = vi * Interval.exact(p.omega)
    if not forward:
        shift = -shift
    eps_u, eps_s = zero_image_radii(p, fr, forward)
    js = range(v) if v <= MAX_ENUMERATED_V else range(1)
    rate = TWO_PI / vi
    phase_shift = ZERO if forward else TWO_PI * Interval.exact(p.omega)
    # the atlas is invariant under theta -> theta + 1, so the charts holding
    # V_j are those holding V_0, translated by j
    offsets = atlas.containing_U(0)
    out: list[ChartTripleInput] = []
    for j in js:
        window = Interval(float(j), float(j) + atlas.v_length)
        if p.epsilon == 0:
            fu, fs = ZERO, ZERO
        else:
            fu, fs = _zero_fiber(p, fr, forward, icos(window * rate - phase_shift))
        base = window + shift
        i1_unrolled = math.floor(base.lo)
        i1 = i1_unrolled % v
        base_in_chart = base - Interval.point(float(i1_unrolled - i1))
        target = Interval(float(i1), float(i1) + atlas.u_length)
        zero_image = (base_in_chart, fu, fs)
        for k in offsets:
            out.append(ChartTripleInput(j, (k + j) % v, i1, zero_image, target, jac, eps_u, eps_s))
    return out


# ---------------------------------------------------------------------------
# verification


@dataclass
class DirectionResult:
    """Intermediate objects of one direction's check, kept for inspection."""

    forward: bool
    v: int
    frame: JordanFrame
    computed: BlockBounds
    printed: BlockBounds
    covering: CoveringVerdict
    bounds: DerivativeBounds
    cone: ConeVerdict
    certificate: VerificationCertificate = field(repr=False)


def _check_m(m: float) -> float:
    m = float(m)
    if not m > 1.0:
        raise ValueError(f"cone expansion rate must satisfy m > 1, got {m}")
    return m


def choose_v(p: HenonParams, m: float, forward: bool, frame: JordanFrame | None = None) -> tuple[int, ConeVerdict]:
    """Circumference for the cone check: given ``p.v``, or the first power of
    two from 2**10 whose verdict holds with slack >= MIN_CONE_SLACK."""
    fr = frame or eigen_data(p)
    assemble = assemble_forward_bounds if forward else assemble_backward_bounds
    if p.v is not None:
        return p.v, check_cone_conditions(assemble(p, fr), m)
    verdict = None
    v = 2**DEFAULT_V_POWER
    for k in range(DEFAULT_V_POWER, MAX_V_POWER + 1):
        v = 2**k
        verdict = check_cone_conditions(assemble(p.with_(v=v), fr), m)
        if verdict.holds and verdict.margin >= MIN_CONE_SLACK:
            break
    assert verdict is not None
    return v, verdict


def _verify_direction(p: HenonParams, m: float, forward: bool) -> DirectionResult:
    m = _check_m(m)
    fr = eigen_data(p)
    v, _ = choose_v(p, m, forward, fr)
    pv = p.with_(v=v)
    if forward:
        computed = forward_jac_enclosure(pv, fr)
        printed = printed_forward_enclosure(pv, fr)
        bounds = assemble_forward_bounds(pv, fr)
        jac = printed
        tags = ("der-encl-forw-n", "zero-image", "cover-est-henon1", "cover-est-henon2", "forward")
    else:
        computed = backward_jac_enclosure(pv, fr)
        printed = printed_backward_enclosure(pv, fr)
        bounds = assemble_backward_bounds(pv, fr)
        jac = printed.permuted(SWAP_FIBERS)
        tags = ("der-encl-back", "zero-image-inv", "cover-est-henon3", "cover-est-henon4", "backward")
    encl_tag, zero_tag, exp_tag, contr_tag, direction = tags

    triples = chart_triples(pv, fr, jac, forward)
    covering = check_covering(triples)
    cone = check_cone_conditions(bounds, m)

    records = [
        InequalityRecord.compare(
            encl_tag,
            Interval.point(enclosure_slack(computed, printed)),
            ">=",
            0.0,
            "slack of the computed Jacobian enclosure inside the printed one",
        )
    ]
    eps_u, eps_s = triples[0].eps_u, triples[0].eps_s
    worst_u = max(t.zero_image[1].mag for t in triples)
    worst_s = max(t.zero_image[2].mag for t in triples)
    base_gap = min(
        min(add_rd(t.zero_image[0].lo, -t.target_window.lo, False), add_rd(t.target_window.hi, -t.zero_image[0].hi, False))
        for t in triples
    )
    records.append(InequalityRecord.compare(f"{zero_tag}.base", Interval.point(base_gap), ">=", 0.0, "image window margin"))
    records.append(InequalityRecord.compare(f"{zero_tag}.u", Interval(0.0, worst_u), "<=", eps_u, "eps_u ball"))
    records.append(InequalityRecord.compare(f"{zero_tag}.s", Interval(0.0, worst_s), "<=", eps_s, "eps_s ball"))
    one = Interval(1.0, 1.0)
    records.append(
        InequalityRecord.compare(
            exp_tag, Interval.point(covering.expansion_lower), ">", (one + eps_u).hi, "expansion, lower bound"
        )
    )
    records.append(
        InequalityRecord.compare(
            contr_tag, Interval.point(covering.contraction_upper), "<", (one - eps_s).lo, "contraction, upper bound"
        )
    )
    for q in cone.inequalities:
        records.append(InequalityRecord.compare(f"cone-est1.{direction}.{q.name}", q.lhs, q.direction, q.threshold, f"m={m:g}"))

    cover_records_ok = all(r.passed for r in records[1:6])
    if cover_records_ok != covering.holds:
        raise RuntimeError("covering verdict disagrees with its aggregated records")

    cert = VerificationCertificate(parameters={}, records=records, info={f"{direction}.v": str(v)}, complete=False)
    return DirectionResult(forward, v, fr, computed, printed, covering, bounds, cone, cert)


def verify_forward(p: HenonParams, m: float = 2.0) -> VerificationCertificate:
    return _verify_direction(p, m, True).certificate


def verify_backward(p: HenonParams, m: float = 200.0) -> VerificationCertificate:
    return _verify_direction(p, m, False).certificate


@dataclass(frozen=True)
class RegionBox:
    theta: Interval
    x: Interval
    y: Interval
    x_halfwidth: Interval
    y_halfwidth: Interval


@dataclass(frozen=True)
class RegionResult:
    box: RegionBox  # enclosure of |D|
    u_eps: RegionBox
    contained: bool
    records: tuple[InequalityRecord, ...]


def region_bound(p: HenonParams, frame: JordanFrame | None = None) -> RegionResult:
    """Box around ``|D|`` and its inclusion in ``U_eps``.

    ``|D| = T^1 x ((x-, y-) + Phi_eps^-1 [-1,1]^2)`` lies inside the box of
    half-widths ``eps |kappa| (tau + eta)`` and
    ``eps |kappa| (tau |lambda2| + eta |lambda1|)``.
    """
    fr = frame or eigen_data(p)
    eps = fr.epsilon
    k = abs(fr.kappa)
    hx = eps * k * (p.iv("tau") + p.iv("eta"))
    hy = eps * k * _backward_scale(p, fr)
    ux = eps * Interval.exact(U_EPS_X)
    uy = eps * Interval.exact(U_EPS_Y)
    circle = Interval(0.0, 1.0)
    box = RegionBox(circle, fr.x_minus + Interval.symmetric(hx.hi), fr.y_minus + Interval.symmetric(hy.hi), hx, hy)
    u_box = RegionBox(circle, fr.x_minus + Interval.symmetric(ux.lo), fr.y_minus + Interval.symmetric(uy.lo), ux, uy)
    # both boxes share the exact centre (x-, y-): compare half-widths
    records = (
        InequalityRecord.compare("U-epsilon.x", hx, "<=", ux.lo, "x half-width of |D| vs 1.1 eps"),
        InequalityRecord.compare("U-epsilon.y", hy, "<=", uy.lo, "y half-width of |D| vs 0.12 eps"),
    )
    return RegionResult(box, u_box, all(r.passed for r in records), records)


def atlas_record(v: int) -> InequalityRecord:
    ok = validate_cone_containment(CircleAtlas(v))
    return InequalityRecord(
        "atlas-henon.cone-pairs",
        Interval.point(1.0 if ok else 0.0),
        ">=",
        1.0,
        ok,
        0.0 if ok else -1.0,
        "unit-cone enclosing and chart pairs",
    )


@dataclass
class HenonReport:
    params: HenonParams
    v: int
    forward: DirectionResult
    backward: DirectionResult
    region: RegionResult
    certificate: VerificationCertificate


def verify(p: HenonParams, m_forward: float = 2.0, m_backward: float = 200.0) -> HenonReport:
    """Both directions on one common atlas, the region bound and the atlas."""
    _check_m(m_forward)
    _check_m(m_backward)
    if p.v is None:
        fr = eigen_data(p)
        v_f, _ = choose_v(p, m_forward, True, fr)
        v_b, _ = choose_v(p, m_backward, False, fr)
        p_run = p.with_(v=max(v_f, v_b))
    else:
        p_run = p
    fwd = _verify_direction(p_run, m_forward, True)
    bwd = _verify_direction(p_run, m_backward, False)
    region = region_bound(p_run, fwd.frame)
    records = fwd.certificate.records + bwd.certificate.records + list(region.records) + [atlas_record(p_run.v)]
    cert = VerificationCertificate(parameters={}, records=records, info={"v_used": str(p_run.v)})
    return HenonReport(p, p_run.v, fwd, bwd, region, cert)  # type: ignore[arg-type]


# ---------------------------------------------------------------------------
# epsilon scan


@dataclass(frozen=True)
class ScanResult:
    eps_max: Fraction  # largest certified grid point
    eps_fail: Optional[Fraction]  # smallest failing grid point seen, None if capped
    resolution: Fraction
    evaluations: int


CHECKS = ("forward", "backward", "region")


def _certifier(m_fwd: float, m_bwd: float, checks: Iterable[str]) -> Callable[[HenonParams], bool]:
    checks = tuple(checks)
    unknown = set(checks) - set(CHECKS)
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)}")

    def certified(p: HenonParams) -> bool:
        if "region" in checks and not region_bound(p).contained:
            return False
        if "forward" in checks and not _verify_direction(p, m_fwd, True).certificate.certified:
            return False
        if "backward" in checks and not _verify_direction(p, m_bwd, False).certificate.certified:
            return False
        return True

    return certified


def scan_certified_epsilon(
    template: HenonParams,
    m_fwd: float = 2.0,
    m_bwd: float = 200.0,
    checks: Iterable[str] = CHECKS,
    resolution_power: int = 20,
    eps_cap: Fraction = Fraction(64),
) -> ScanResult:
    """Bisection for the largest certified epsilon on the grid ``k 2**-resolution_power``.

    Every bound grows monotonically with epsilon, so the certified set is an
    interval containing 0.
    """
    _check_m(m_fwd)
    _check_m(m_bwd)
    certified = _certifier(m_fwd, m_bwd, checks)
    res = Fraction(1, 2**resolution_power)
    n = 0

    def ok(eps: Fraction) -> bool:
        nonlocal n
        n += 1
        ok_ = certified(template.with_(epsilon=eps))
        log.debug("eps=%s certified=%s", eps, ok_)
        return ok_

    if not ok(Fraction(0)):
        raise HenonError("parameters do not certify even at epsilon = 0")
    lo, hi = Fraction(0), Fraction(1, 2)
    while ok(hi):
        lo = hi
        if hi >= eps_cap:
            return ScanResult(lo, None, res, n)
        hi *= 2
    while hi - lo > res:
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return ScanResult(lo, hi, res, n)


def max_certified_epsilon(
    template: HenonParams,
    m_fwd: float = 2.0,
    m_bwd: float = 200.0,
    checks: Iterable[str] = CHECKS,
) -> float:
    return float(scan_certified_epsilon(template, m_fwd, m_bwd, checks).eps_max)


def jacobian_phi_point(p: HenonParams, fr: JordanFrame, q: tuple[float, float, float], forward: bool = True) -> np.ndarray:
    """Float derivative of (F_eps)_phi or (F_eps^-1)_phi at a point by the chain rule.

    Independent of the simplified R_eps formulas; used as a test oracle.
    ``q = (theta, x~, y~)`` with theta on R/v.
    """
    v = _circumference(p)
    eps = float(p.epsilon)
    phi = np.array([[e.mid for e in row] for row in fr.basis]) / eps
    phi_inv = np.array([[e.mid for e in row] for row in fr.basis_inv]) * eps
    xm, ym = fr.x_minus.mid, fr.y_minus.mid
    th, xt, yt = q
    x, y = phi_inv @ np.array([xt, yt]) + np.array([xm, ym])
    a, b, om = float(p.a), float(p.b), float(p.omega)
    s = th / v
    if forward:
        dF = np.array([[-2 * a * x, 1.0], [b, 0.0]])
        dth = np.array([-eps * 2 * math.pi * math.sin(2 * math.pi * s), 0.0])
    else:
        dF = np.array([[0.0, 1 / b], [1.0, 2 * a / (b * b) * y]])
        dth = np.array([0.0, eps * 2 * math.pi * math.sin(2 * math.pi * (s - om))])
    out = np.zeros((3, 3))
    out[0, 0] = 1.0
    out[1:, 0] = phi @ dth / v
    out[1:, 1:] = phi @ dF @ phi_inv
    return out

"""Transform-layer behavior: domain gate, images, inversion, the solver,
and the classical audit.

The key oracles: e^{-2sz} has the explicit coefficient expansion
sum_m (2s)^m (-z)^m / m!, the pairing-level integral of delta(t-2s) e^{-zt}
is computed by an independent code path (quadrature + jet weights), and the
classical catalog round-trips through tables that can be checked by hand.
"""

import math
from fractions import Fraction

import pytest

from lcgf.errors import DomainError, DomainMembershipError, UnsupportedError
from lcgf.genfunc import DEFAULT_ALGEBRA, FALSE, TRUE, integral_compact
from lcgf.laplace import (
    AuditProblem,
    ClassicalTerm,
    IVPSpec,
    LaplaceDomainElement,
    LaplaceImage,
    RationalZ,
    audit_classical,
    check_lemma_6_2,
    classical_table,
    derivative_rule,
    from_genfunction,
    inverse_transform,
    one_sided_initial,
    solve_ivp,
    transform,
    transform_derivative_shifted,
)
from lcgf.levicivita import LCReal, as_lc_complex
from lcgf.smooth import AffineFn, CosFn, ExpFn, PolyFn, SinFn, exp_lc

ALG = DEFAULT_ALGEBRA
S = ALG.s
CTX = ALG.ctx
Z_PROBES = (1.0, 2.0, 1.0 + 1.0j)


def _max_abs(lc, qmax=None) -> float:
    return max((abs(lc.coeff(q)) for q in lc.exponents()
                if qmax is None or q <= qmax), default=0.0)


def _lc(x):
    return as_lc_complex(x, CTX)


# ---------------------------------------------------------------------------
# rational-function layer
# ---------------------------------------------------------------------------


def test_rational_arithmetic_and_reduction():
    a = RationalZ([1.0], (0.0, 1.0), CTX)            # 1/z
    b = RationalZ([1.0], (1.0, 1.0), CTX)            # 1/(z+1)
    c = a + b                                        # (2z+1)/(z(z+1))
    z = _lc(3.0)
    want = 1.0 / 3.0 + 1.0 / 4.0
    assert abs(c.evaluate(z).coeff(0) - want) <= 1e-12
    # (z^2-1)/(z-1) reduces to z+1
    r = RationalZ([-1.0, 0.0, 1.0], (-1.0, 1.0), CTX).reduce()
    assert len(r.den) == 1
    assert abs(r.evaluate(_lc(5.0)).coeff(0) - 6.0) <= 1e-12


def test_rational_derivative():
    # d/dz [1/(z^2+1)] = -2z/(z^2+1)^2
    r = RationalZ([1.0], (1.0, 0.0, 1.0), CTX).derivative()
    z = _lc(2.0)
    assert abs(r.evaluate(z).coeff(0) - (-4.0 / 25.0)) <= 1e-12


def test_image_payload_shape():
    img = transform_derivative_shifted(1)
    payload = img.to_payload()
    assert set(payload) == {"terms", "region"}
    (term,) = payload["terms"]
    assert set(term) == {"num", "den", "shift"}
    assert term["num"][0] == []  # zero z^0 coefficient
    assert term["num"][1] == [{"exp": "0", "re": 1.0, "im": 0.0}]
    assert term["shift"] == [{"exp": "1", "re": 2.0, "im": 0.0}]


# ---------------------------------------------------------------------------
# the domain gate
# ---------------------------------------------------------------------------


def test_unshifted_delta_is_rejected():
    with pytest.raises(DomainMembershipError):
        from_genfunction(ALG.delta())


def test_shifted_delta_is_admitted():
    el = from_genfunction(ALG.delta(shift=2.0 * S))
    assert len(el.generalized_parts) == 1
    img = transform(el)
    assert len(img.terms) == 1


def test_negative_side_support_is_rejected():
    with pytest.raises(DomainMembershipError):
        from_genfunction(ALG.delta(center=-1.0))


def test_barely_shifted_delta_sits_on_the_boundary():
    # internal support [0, 2s] has lower endpoint < s: rejected
    with pytest.raises(DomainMembershipError):
        from_genfunction(ALG.delta(shift=S))
    # [s, 3s] is admitted (boundary inclusive)
    from_genfunction(ALG.delta(shift=2.0 * S))


# ---------------------------------------------------------------------------
# delta images (criterion-7 material)
# ---------------------------------------------------------------------------


def test_delta_image_is_symbolically_exact():
    img = transform(from_genfunction(ALG.delta(shift=2.0 * S)))
    ((shift, rat),) = img.terms
    assert (shift - 2.0 * S).is_zero
    assert len(rat.num) == 1 and (rat.num[0] - _lc(1.0)).is_zero
    assert rat.den == (1.0 + 0.0j,)
    assert img.equal(transform_derivative_shifted(0))


def test_delta_image_matches_pairing_integral():
    d = ALG.delta(shift=2.0 * S)
    img = transform(from_genfunction(d))
    for zv in Z_PROBES:
        z = _lc(zv)
        direct = integral_compact(d * ALG.exp_kernel(z))
        assert _max_abs(direct - img.evaluate(z)) <= 1e-8


def test_delta_image_coefficients_follow_the_exponential_series():
    img = transform(from_genfunction(ALG.delta(shift=2.0 * S)))
    for zv in Z_PROBES:
        z = complex(zv)
        val = img.evaluate(_lc(zv))
        for m in range(5):
            want = ((-z) ** m) * (2.0 ** m) / math.factorial(m)
            assert abs(val.coeff(m) - want) <= 1e-8


def test_derivative_images_through_order_three():
    for n in range(4):
        img = transform_derivative_shifted(n)
        d = ALG.delta(shift=2.0 * S, order=n)
        assert img.equal(transform(from_genfunction(d)))
        z = _lc(1.0)
        direct = integral_compact(d * ALG.exp_kernel(z))
        assert _max_abs(direct - img.evaluate(z), qmax=3) <= 1e-8


def test_shift_law():
    psi = ALG.delta(shift=2.0 * S, order=1)
    img0 = transform(from_genfunction(psi))
    for h in (0.5, 1.0):
        img1 = transform(from_genfunction(psi.translate(h)))
        for zv in Z_PROBES:
            z = _lc(zv)
            phase = exp_lc(-(_lc(h) * z), CTX)
            assert _max_abs(img1.evaluate(z) - phase * img0.evaluate(z)) <= 1e-8


def test_linearity_is_exact_at_term_level():
    a = from_genfunction(ALG.delta(shift=2.0 * S))
    b = from_genfunction(ALG.heaviside() * ALG.smooth(SinFn()))
    lhs = transform(a.scale(3.0) + b.scale(-2.0))
    rhs = transform(a).scale(3.0) + transform(b).scale(-2.0)
    assert lhs.equal(rhs)


# ---------------------------------------------------------------------------
# classical catalog and inversion
# ---------------------------------------------------------------------------


CATALOG = [
    ("step sine", lambda: ALG.heaviside() * ALG.smooth(SinFn())),
    ("step cosine", lambda: ALG.heaviside() * ALG.smooth(CosFn())),
    ("ramp", lambda: ALG.heaviside() * ALG.smooth(PolyFn((0.0, 1.0)))),
    ("quadratic", lambda: ALG.heaviside() * ALG.smooth(PolyFn((0.0, 0.0, 1.0)))),
    ("decay", lambda: ALG.heaviside() * ALG.smooth(AffineFn(ExpFn(), -3.0, 0.0))),
    ("damped ramp", lambda: ALG.heaviside() * ALG.smooth(PolyFn((0.0, 1.0)))
     * ALG.smooth(AffineFn(ExpFn(), -1.0, 0.0))),
    ("delayed sine", lambda: ALG.heaviside(shift=2.0 * S)
     * ALG.smooth(SinFn(), shift=2.0 * S)),
    ("classically delayed cosine", lambda: ALG.heaviside(center=1.0)
     * ALG.smooth(CosFn(), shift=1.0)),
]


@pytest.mark.parametrize("name,make", CATALOG, ids=[c[0] for c in CATALOG])
def test_catalog_round_trips(name, make):
    el = from_genfunction(make())
    img = transform(el)
    back = transform(inverse_transform(img))
    assert img.equal(back)


def test_known_images():
    img = transform(from_genfunction(ALG.heaviside() * ALG.smooth(SinFn())))
    ((shift, rat),) = img.terms
    assert shift.is_zero
    assert rat.equal(RationalZ([1.0], (1.0, 0.0, 1.0), CTX))
    img = transform(from_genfunction(
        ALG.heaviside() * ALG.smooth(PolyFn((0.0, 0.0, 1.0)))))
    ((_, rat),) = img.terms
    assert rat.equal(RationalZ([2.0], (0.0, 0.0, 0.0, 1.0), CTX))


def test_mismatched_step_and_phase_rebase():
    # H(t - 2s) sin(t): L = e^{-2sz} (cos(2s) + z sin(2s)) / (z^2 + 1)
    el = from_genfunction(ALG.heaviside(shift=2.0 * S) * ALG.smooth(SinFn()))
    img = transform(el)
    z = _lc(2.0)
    a = _lc(2.0 * S)
    rot = exp_lc(a * complex(0.0, 1.0), CTX)
    want = exp_lc(-(a * z), CTX) * (_lc(rot.im) * z + _lc(rot.re)) * _lc(0.2)
    assert _max_abs(img.evaluate(z) - want) <= 1e-10


def test_polynomial_image_parts_invert_to_deltas():
    img = transform_derivative_shifted(1)  # z e^{-2sz}
    el = inverse_transform(img)
    assert not el.classical_parts
    ((coef, gf),) = el.generalized_parts
    assert (coef - _lc(1.0)).is_zero
    assert transform(el).equal(img)


def test_constant_image_cannot_invert():
    img = LaplaceImage(ctx=CTX)
    img.add_term(LCReal.zero(CTX), RationalZ([1.0], (1.0,), CTX))
    with pytest.raises(DomainMembershipError):
        inverse_transform(img)


def test_derivative_rule_recovers_cosine():
    Fs = classical_table(("sin", 1.0))
    Fc = classical_table(("cos", 1.0))
    assert derivative_rule(Fs, 0.0).equal(Fc)


def test_table_rulesets_disagree_exactly_at_zero():
    naive = classical_table(("delta", 0, 0.0), "naive")
    ((shift, rat),) = naive.terms
    assert shift.is_zero and rat.equal(RationalZ([1.0], (1.0,), CTX))
    with pytest.raises(DomainMembershipError):
        classical_table(("delta", 0, 0.0), "engineer")
    eng = classical_table(("delta", 0, 0.25), "engineer")
    ((shift, _),) = eng.terms
    assert shift.standard_part() == 0.25


def test_one_sided_initial_reads_the_desk_convention():
    parts = (ClassicalTerm(_lc(2.0), 0, 0.0, 1.0, "sin", LCReal.zero(CTX)),)
    assert one_sided_initial(parts, 0, CTX).is_zero
    assert one_sided_initial(parts, 1, CTX).coeff(0) == 2.0
    delayed = (ClassicalTerm(_lc(5.0), 0, 0.0, 1.0, "cos",
                             LCReal.from_real(0.5, CTX)),)
    assert one_sided_initial(delayed, 0, CTX).is_zero


# ---------------------------------------------------------------------------
# the solver (criterion-8 material)
# ---------------------------------------------------------------------------


def test_solve_ivp_impulse_with_unit_velocity():
    rhs = from_genfunction(ALG.delta(shift=2.0 * S))
    res = solve_ivp(IVPSpec(1.0, 0.0, 1.0, rhs, _lc(0.0), _lc(1.0)))
    assert res.pretty_solution() == "sin(t) + H(t - 2*s)*sin((t - 2*s))"
    y0, yp0 = res.initial_checks
    assert y0.exact and (y0.obtained - _lc(0.0)).is_zero
    assert yp0.exact and (yp0.obtained - _lc(1.0)).is_zero
    assert res.ode_verdict is TRUE
    assert res.verified


def test_solve_ivp_impulse_at_rest():
    rhs = from_genfunction(ALG.delta(shift=2.0 * S))
    res = solve_ivp(IVPSpec(1.0, 0.0, 1.0, rhs, _lc(0.0), _lc(0.0)))
    assert res.pretty_solution() == "H(t - 2*s)*sin((t - 2*s))"
    assert all(c.exact for c in res.initial_checks)
    assert res.ode_verdict is TRUE and res.verified


def test_solve_ivp_smooth_forcing():
    # y'' + y = H e^{-t}, y(0) = 0, y'(0) = 0:
    # y = (e^{-t} - cos t + sin t)/2 for t >= 0
    rhs = from_genfunction(ALG.heaviside() * ALG.smooth(AffineFn(ExpFn(), -1.0, 0.0)))
    res = solve_ivp(IVPSpec(1.0, 0.0, 1.0, rhs, _lc(0.0), _lc(0.0)))
    assert all(c.exact or c.discrepancy <= 1e-10 for c in res.initial_checks)
    assert res.ode_verdict is TRUE
    y = res.genfunction
    t0 = 1.3
    want = 0.5 * (math.exp(-t0) - math.cos(t0) + math.sin(t0))
    assert abs(y.evaluate_at(t0).coeff(0) - want) <= 1e-9


def test_solve_ivp_first_order():
    # y' + 2 y = delta(t - 2s), y(0) = 1: y = e^{-2t} + H(t-2s) e^{-2(t-2s)}
    rhs = from_genfunction(ALG.delta(shift=2.0 * S))
    res = solve_ivp(IVPSpec(0.0, 1.0, 2.0, rhs, _lc(1.0), _lc(0.0)))
    (y0,) = res.initial_checks
    assert y0.exact
    assert res.ode_verdict is TRUE
    t0 = 0.5
    want = math.exp(-1.0) + math.exp(-1.0)  # both branches active at t=1/2
    assert abs(res.genfunction.evaluate_at(t0).coeff(0) - want) <= 1e-9


def test_solve_rejects_degenerate_operator():
    rhs = from_genfunction(ALG.delta(shift=2.0 * S))
    with pytest.raises(DomainError):
        solve_ivp(IVPSpec(0.0, 0.0, 1.0, rhs, _lc(0.0), _lc(0.0)))


# ---------------------------------------------------------------------------
# the audit (criterion-9 material)
# ---------------------------------------------------------------------------


def test_naive_audit_reproduces_two_equals_one():
    prob = AuditProblem(1.0, 0.0, 1.0, ("delta", 0, 0.0), 0.0, 1.0)
    rep = audit_classical(prob, "naive")
    assert rep.verdict == "inconsistent"
    assert rep.solution_text == "2*sin(t)"
    (v,) = rep.violations
    assert v.condition == "y'(0+)"
    assert v.expected.coeff(0) == 1.0
    assert v.obtained.coeff(0) == 2.0
    assert v.discrepancy == 1.0
    assert any("L[delta(t)] = 1" in line for line in rep.trace)
    assert any("L[y''] = z^2*L[y] - z*y(0) - y'(0)" in line
               for line in rep.trace)


def test_naive_audit_from_rest_is_also_inconsistent():
    prob = AuditProblem(1.0, 0.0, 1.0, ("delta", 0, 0.0), 0.0, 0.0)
    rep = audit_classical(prob, "naive")
    assert rep.verdict == "inconsistent"
    assert rep.solution_text == "sin(t)"
    (v,) = rep.violations
    assert v.discrepancy == 1.0


def test_engineer_audit_blames_the_limit():
    prob = AuditProblem(1.0, 0.0, 1.0, ("delta", 0, 0.0), 0.0, 1.0)
    rep = audit_classical(prob, "engineer", epsilons=(0.1, 0.01))
    assert rep.verdict == "inconsistent"
    assert rep.solution_text == "2*sin(t)"
    (v,) = rep.violations
    assert v.discrepancy == 1.0
    # each fixed epsilon was internally consistent
    assert sum("initial data hold" in line for line in rep.trace) == 2
    assert any("weak limit" in line for line in rep.trace)


def test_hat_pipeline_has_no_violation_to_report():
    # the same problem, solved in the algebra, is simply consistent
    rhs = from_genfunction(ALG.delta(shift=2.0 * S))
    res = solve_ivp(IVPSpec(1.0, 0.0, 1.0, rhs, _lc(0.0), _lc(1.0)))
    assert res.verified


# ---------------------------------------------------------------------------
# the consistency lemma (criterion-11 material)
# ---------------------------------------------------------------------------


def _lemma_catalog():
    H, sin, cos = ALG.heaviside(), ALG.smooth(SinFn()), ALG.smooth(CosFn())
    ramp = ALG.smooth(PolyFn((0.0, 1.0)))
    quad = ALG.smooth(PolyFn((0.0, 0.0, 1.0)))
    exp1 = ALG.smooth(AffineFn(ExpFn(), -1.0, 0.0))
    exp2 = ALG.smooth(AffineFn(ExpFn(), -2.0, 0.0))
    d2 = ALG.delta(shift=2.0 * S)
    gf = from_genfunction
    delayed_sine = inverse_transform(transform_derivative_shifted(0).div_poly((1.0, 0.0, 1.0)))
    return [
        ("same shifted delta", gf(d2), gf(ALG.delta(shift=2.0 * S)), True),
        ("different shifts", gf(d2), gf(ALG.delta(shift=3.0 * S)), False),
        ("delta vs derivative", gf(d2), gf(ALG.delta(shift=2.0 * S, order=1)), False),
        ("sine vs doubled sine", gf(H * sin), gf(2.0 * (H * sin)), False),
        ("sine vs itself", gf(H * sin), gf(H * sin), True),
        ("inverse of delayed image", gf(ALG.heaviside(shift=2.0 * S)
                                        * ALG.smooth(SinFn(), shift=2.0 * S)),
         delayed_sine, True),
        ("sum order", gf(d2) + gf(H * cos), gf(H * cos) + gf(d2), True),
        ("ramp vs quadratic", gf(H * ramp), gf(H * quad), False),
        ("different decay rates", gf(H * exp1), gf(H * exp2), False),
        ("split delta", gf(0.5 * d2) + gf(0.5 * ALG.delta(shift=2.0 * S)),
         gf(d2), True),
    ]


def test_lemma_catalog_has_ten_decisive_pairs():
    catalog = _lemma_catalog()
    assert len(catalog) == 10
    for name, f, g, want_equal in catalog:
        chk = check_lemma_6_2(f, g)
        assert chk.weak_verdict in (TRUE, FALSE), name
        assert chk.image_equal == want_equal, name
        assert chk.agree, name

"""Unit tests for truncated Levi-Civita arithmetic.

Oracles are deliberately independent re-implementations: termwise merge for
addition, a brute-force double loop for multiplication, and multiply-back
residual checks for inversion and roots.
"""
import math
from fractions import Fraction

import numpy as np
import pytest

from lcgf import (
    Classification,
    ContextMismatchError,
    DomainError,
    INFINITE_VALUATION,
    LCComplex,
    LCReal,
    LCZeroDivisionError,
    NotFiniteError,
    TruncationContext,
    compare,
    exp_scale,
    lc_to_records,
    records_to_lc,
)

CTX = TruncationContext()
S = LCReal.scale(CTX)
ONE = LCReal.from_real(1.0, CTX)

# exponent lattice used by the random generator
_LATTICE = sorted({Fraction(n, d) for d in (1, 2, 3, 4, 6) for n in range(0, 25)})


def rand_lc(rng, vmin=Fraction(-1), vmax=Fraction(2), max_terms=5, ctx=CTX):
    """Random canonical scalar with valuation in [vmin, vmax]."""
    lead_choices = [q for q in _LATTICE if vmin <= q + vmin <= vmax]
    v0 = vmin + _LATTICE[rng.integers(0, len(_LATTICE))]
    while v0 > vmax:
        v0 = vmin + _LATTICE[rng.integers(0, len(_LATTICE))]
    n = int(rng.integers(1, max_terms + 1))
    increments = sorted(rng.choice(len(_LATTICE), size=n - 1, replace=False)) if n > 1 else []
    expos = [v0] + [v0 + _LATTICE[i] for i in increments if _LATTICE[i] > 0]
    expos = sorted(set(q for q in expos if q <= ctx.q_max))
    coeffs = rng.uniform(0.1, 10.0, size=len(expos)) * rng.choice([-1.0, 1.0], size=len(expos))
    terms = list(zip(expos, coeffs))
    terms[0] = (terms[0][0], abs(terms[0][1]) if rng.random() < 0.5 else terms[0][1])
    return LCReal(terms, ctx)


# ---------------------------------------------------------------------------
# oracles

def oracle_add(a: LCReal, b: LCReal) -> dict:
    acc = {}
    for q, c in list(a.terms) + list(b.terms):
        acc[q] = acc.get(q, 0.0) + c
    return {q: c for q, c in acc.items() if c != 0.0 and q <= CTX.q_max}


def oracle_mul(a: LCReal, b: LCReal) -> dict:
    acc = {}
    for qa, ca in a.terms:
        for qb, cb in b.terms:
            acc[qa + qb] = acc.get(qa + qb, 0.0) + ca * cb
    return {q: c for q, c in acc.items() if c != 0.0 and q <= CTX.q_max}


def as_dict(x: LCReal) -> dict:
    return dict(x.terms)


# ---------------------------------------------------------------------------
# canonical form

def test_zero_is_empty_sequence():
    z = LCReal.zero(CTX)
    assert z.terms == ()
    assert z.is_zero
    assert z.valuation() is INFINITE_VALUATION
    assert (S - S).terms == ()


def test_canonicalization_merges_sorts_and_truncates():
    x = LCReal([(Fraction(2), 1.0), (Fraction(0), 3.0), (Fraction(2), -1.0),
                (Fraction(9), 4.0)], CTX)
    assert x.terms == ((Fraction(0), 3.0),)


def test_user_input_below_floor_is_not_pruned():
    x = LCReal([(Fraction(0), 1e-40)], CTX)
    assert x.terms == ((Fraction(0), 1e-40),)
    # ... but arithmetic prunes
    y = x * ONE
    assert y.is_zero


def test_valuation_examples():
    assert S.valuation() == 1
    assert (ONE + S).valuation() == 0
    assert exp_scale(Fraction(-1, 2), CTX).valuation() == Fraction(-1, 2)
    assert INFINITE_VALUATION > CTX.q_max  # comparable as promised


# ---------------------------------------------------------------------------
# ring operations against oracles

def test_add_mul_against_oracles_bulk():
    rng = np.random.default_rng(20260819)
    for _ in range(2000):
        a, b = rand_lc(rng), rand_lc(rng)
        assert as_dict(a + b) == pytest.approx(oracle_add(a, b), abs=0.0)
        got = as_dict(a * b)
        want = oracle_mul(a, b)
        assert set(got) == set(want)
        for q in want:
            assert got[q] == want[q]  # identical float path, bitwise equal


def test_valuation_laws_hold_exactly():
    rng = np.random.default_rng(7)
    for _ in range(2000):
        a, b = rand_lc(rng), rand_lc(rng)
        assert (a * b).valuation() == a.valuation() + b.valuation()
        v = (a + b).valuation()
        lo = min(a.valuation(), b.valuation())
        assert v is INFINITE_VALUATION or v >= lo


def test_ultrametric_inequality_exact():
    rng = np.random.default_rng(11)
    for _ in range(2000):
        x, y, z = rand_lc(rng), rand_lc(rng), rand_lc(rng)
        dxz = (x - z).ultra_norm()
        dxy = (x - y).ultra_norm()
        dyz = (y - z).ultra_norm()
        assert dxz <= max(dxy, dyz)


# ---------------------------------------------------------------------------
# inversion, division, roots

def test_geometric_series_example():
    g = (ONE - S).invert()
    assert g.terms == tuple((Fraction(k), 1.0) for k in range(7))


def test_invert_multiplies_back_to_one():
    # Two caveats make the bound interesting: (1) the inverse is representable
    # only through q_max, so for infinite inputs (v < 0) the product exposes
    # truncation error above q_max + v; (2) float cancellation noise scales
    # with the series amplification, which Sum|a| * Sum|a^-1| measures.
    rng = np.random.default_rng(23)
    for _ in range(500):
        a = rand_lc(rng)
        inv = a.invert()
        res = a * inv - ONE
        amp = (sum(abs(c) for _, c in a.terms)
               * sum(abs(c) for _, c in inv.terms))
        res = res.prune(1e-8 * amp)
        bound = CTX.q_max + min(a.valuation(), 0)
        assert res.is_zero or res.valuation() > bound, (a, res)


def test_invert_zero_raises():
    with pytest.raises(LCZeroDivisionError):
        LCReal.zero(CTX).invert()


def test_sqrt_4_plus_4s():
    r = (LCReal.from_real(4, CTX) + 4 * S).sqrt()
    assert r.coeff(0) == 2.0
    assert r.coeff(1) == 1.0
    assert r.coeff(2) == -0.25
    assert ((r * r) - (LCReal.from_real(4, CTX) + 4 * S)).prune(1e-12).is_zero


def rand_positive(rng, ctx=CTX):
    """Well-scaled positive scalar: half-integer exponents, coefficients in a
    factor-4 band of the lead.  Root series amplify coefficient ratios
    exponentially, so round-trip checks use conditioned inputs."""
    n = int(rng.integers(1, 6))
    expos = sorted(rng.choice(13, size=n, replace=False))
    expos = [Fraction(int(k), 2) for k in expos]
    c0 = rng.uniform(0.5, 2.0)
    coeffs = [c0] + list(rng.uniform(0.25 * c0, 4 * c0, size=n - 1)
                         * rng.choice([-1.0, 1.0], size=n - 1))
    return LCReal(list(zip(expos, coeffs)), ctx)


def test_nth_root_round_trip_positive_values():
    rng = np.random.default_rng(31)
    for _ in range(300):
        a = rand_positive(rng)
        for n in (2, 3, 5):
            r = a.nth_root(n)
            assert r.valuation() == a.valuation() / n
            res = (r ** n) - a
            scale = max(abs(c) for _, c in a.terms)
            assert res.prune(1e-9 * scale).is_zero, (a, n, res)


def test_nth_root_infinite_value_closes_to_guaranteed_order():
    # v(x) = -2 < 0: the root loses n-th of the budget; residual valuation
    # must still exceed q_max + q*(1 - 1/n)
    x = exp_scale(-2, CTX) * (ONE + S)
    r = x.nth_root(2)
    res = (r * r - x).prune(1e-12)
    bound = CTX.q_max + Fraction(-2) * Fraction(1, 2)
    assert res.is_zero or res.valuation() > bound


def test_nth_root_domain_errors():
    with pytest.raises(DomainError):
        (-ONE).nth_root(2)
    r = (-LCReal.from_real(8, CTX)).nth_root(3)
    assert r.coeff(0) == -2.0
    with pytest.raises(DomainError):
        ONE.nth_root(0)


# ---------------------------------------------------------------------------
# order, classification, standard part

def test_compare_s_smaller_than_any_positive_real():
    assert compare(S, 1e-9) == -1
    assert compare(S, LCReal.zero(CTX)) == 1
    assert S < 1e-9
    assert exp_scale(Fraction(1, 2), CTX) > S


def test_exp_scale_strictly_decreasing_and_exact():
    qs = [Fraction(0), Fraction(1, 3), Fraction(1, 2), Fraction(1), Fraction(5, 2),
          Fraction(6)]
    vals = [exp_scale(q, CTX) for q in qs]
    for lo, hi in zip(vals, vals[1:]):
        assert hi < lo
    assert exp_scale(Fraction(1, 2), CTX) ** 2 == S
    assert exp_scale(7, CTX).is_zero  # beyond q_max: truncates to zero


def test_classify_boundaries():
    assert S.classify() is Classification.INFINITESIMAL
    assert LCReal.zero(CTX).classify() is Classification.INFINITESIMAL
    assert (ONE + S).classify() is Classification.FINITE
    assert exp_scale(Fraction(-1, 2), CTX).classify() is Classification.INFINITE


def test_standard_part():
    assert (LCReal.from_real(3.5, CTX) + 2 * S).standard_part() == 3.5
    assert S.standard_part() == 0.0
    with pytest.raises(NotFiniteError):
        exp_scale(-1, CTX).standard_part()


def test_abs_and_sign():
    assert abs(-S) == S
    assert abs(S - 1) == ONE - S


# ---------------------------------------------------------------------------
# complex scalars

def test_complex_basics():
    i = LCComplex.from_complex(1j, CTX)
    assert (i * i).standard_part() == -1
    z = LCComplex.from_complex(1 + 2j, CTX) + S
    assert z.standard_part() == 1 + 2j
    assert z.conj().standard_part() == 1 - 2j
    assert z.valuation() == 0
    w = z * i
    assert w.standard_part() == (1 + 2j) * 1j


def _rand_modest_part(rng, lead_zero):
    # mirrors actual usage (transform residues): few terms, integer exponents,
    # O(1) coefficients; wilder inputs amplify |z|^2 conditioning beyond any
    # fixed tolerance
    n = int(rng.integers(1, 4))
    pool = np.arange(0 if lead_zero else 1, 7)
    expos = sorted(rng.choice(pool, size=min(n, len(pool)), replace=False))
    if lead_zero:
        expos[0] = 0
    coeffs = rng.uniform(0.5, 2.0, size=len(expos)) * rng.choice([-1.0, 1.0], size=len(expos))
    return LCReal([(Fraction(int(k)), c) for k, c in zip(expos, coeffs)], CTX)


def test_complex_invert_round_trip():
    rng = np.random.default_rng(41)
    for _ in range(500):
        z = LCComplex(_rand_modest_part(rng, True),
                      _rand_modest_part(rng, rng.random() < 0.5))
        w = (z * z.invert() - 1).prune(1e-9)
        assert w.is_zero, (z, w)


def test_complex_valuation_is_min_of_parts():
    z = LCComplex(S, exp_scale(Fraction(1, 2), CTX))
    assert z.valuation() == Fraction(1, 2)
    assert z.ultra_norm() == math.exp(-0.5)
    assert z.classify() is Classification.INFINITESIMAL


def test_context_mismatch_raises():
    other = TruncationContext(q_max=Fraction(4))
    with pytest.raises(ContextMismatchError):
        S + LCReal.scale(other)
    with pytest.raises(ContextMismatchError):
        LCComplex.from_complex(1j, CTX) * LCReal.scale(other)


def test_truncation_context_respected():
    ctx4 = TruncationContext(q_max=Fraction(4))
    g = (LCReal.from_real(1, ctx4) - LCReal.scale(ctx4)).invert()
    assert g.terms == tuple((Fraction(k), 1.0) for k in range(5))


# ---------------------------------------------------------------------------
# serialization

def test_records_round_trip():
    z = LCComplex(ONE + 2 * S, exp_scale(Fraction(1, 2), CTX))
    rec = lc_to_records(z)
    assert rec == [
        {"exp": "0", "re": 1.0, "im": 0.0},
        {"exp": "1/2", "re": 0.0, "im": 1.0},
        {"exp": "1", "re": 2.0, "im": 0.0},
    ]
    back = records_to_lc(rec, CTX)
    assert back == z


def test_pretty_printing():
    assert str(ONE + S) == "1 + s"
    assert str(3 * S - 2 * S * S) == "3*s - 2*s^2"
    assert str(exp_scale(Fraction(1, 2), CTX)) == "s^(1/2)"
    assert str(LCReal.zero(CTX)) == "0"

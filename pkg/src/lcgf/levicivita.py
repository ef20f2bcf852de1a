"""Truncated Levi-Civita scalars.

A scalar is a finite, exponent-sorted sequence of (rational exponent, float64
coefficient) pairs standing for sum(c_q * s**q), where s is the canonical
positive infinitesimal scale.  Truncation keeps exponents <= q_max; the zero
element is the empty sequence.  Exponents are exact `fractions.Fraction`
values, so exponent arithmetic never rounds -- only coefficients live in
float64.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import (
    ContextMismatchError,
    DomainError,
    LCZeroDivisionError,
    NotFiniteError,
)

#: Valuation of the zero element; compares correctly against any Fraction.
INFINITE_VALUATION = math.inf

_FRACTIONABLE = (int, Fraction)


def _as_fraction(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    if isinstance(q, str):
        return Fraction(q)
    raise DomainError(f"exponent must be rational, got {q!r}")


@dataclass(frozen=True)
class TruncationContext:
    """Shared truncation parameters for a family of scalars.

    q_max        largest exponent retained in canonical form
    coeff_floor  magnitude below which coefficients are pruned -- but only
                 after arithmetic, never on user-supplied input
    """

    q_max: Fraction = Fraction(6)
    coeff_floor: float = 1e-30

    def __post_init__(self):
        object.__setattr__(self, "q_max", _as_fraction(self.q_max))
        if self.q_max < 0:
            raise DomainError("q_max must be nonnegative")
        if not (self.coeff_floor >= 0.0):
            raise DomainError("coeff_floor must be nonnegative")


DEFAULT_CONTEXT = TruncationContext()

Terms = tuple  # tuple[tuple[Fraction, float], ...]


# ---------------------------------------------------------------------------
# term-tuple kernels (exact exponent arithmetic, float coefficients)

def _canonical(pairs: Iterable, cap: Fraction, floor: float, prune: bool) -> Terms:
    acc: dict = {}
    for q, c in pairs:
        q = _as_fraction(q)
        c = float(c)
        if q in acc:
            acc[q] += c
        else:
            acc[q] = c
    out = []
    for q in sorted(acc):
        if q > cap:
            continue
        c = acc[q]
        if c == 0.0:
            continue
        if prune and abs(c) < floor:
            continue
        out.append((q, c))
    return tuple(out)


def _merge(a: Terms, b: Terms, cap: Fraction, floor: float) -> Terms:
    return _canonical(list(a) + list(b), cap, floor, prune=True)


def _scale(t: Terms, factor: float) -> Terms:
    if factor == 0.0:
        return ()
    return tuple((q, c * factor) for q, c in t)


def _shift(t: Terms, dq: Fraction, cap: Fraction) -> Terms:
    return tuple((q + dq, c) for q, c in t if q + dq <= cap)


def _convolve(a: Terms, b: Terms, cap: Fraction, floor: float) -> Terms:
    acc: dict = {}
    for qa, ca in a:
        for qb, cb in b:
            q = qa + qb
            if q > cap:
                continue
            acc[q] = acc.get(q, 0.0) + ca * cb
    return _canonical(acc.items(), cap, floor, prune=True)


class Classification(Enum):
    INFINITESIMAL = "infinitesimal"
    FINITE = "finite-noninfinitesimal"
    INFINITE = "infinite"


class LCReal:
    """Real truncated Levi-Civita scalar."""

    __slots__ = ("terms", "ctx")

    def __init__(self, terms, ctx: TruncationContext = DEFAULT_CONTEXT,
                 _canonical_terms: bool = False):
        if _canonical_terms:
            self.terms = terms
        else:
            self.terms = _canonical(terms, ctx.q_max, ctx.coeff_floor, prune=False)
        self.ctx = ctx

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, ctx: TruncationContext = DEFAULT_CONTEXT) -> "LCReal":
        return cls((), ctx, _canonical_terms=True)

    @classmethod
    def from_real(cls, c: float, ctx: TruncationContext = DEFAULT_CONTEXT) -> "LCReal":
        c = float(c)
        if c == 0.0:
            return cls.zero(ctx)
        return cls(((Fraction(0), c),), ctx, _canonical_terms=True)

    @classmethod
    def monomial(cls, q, c: float = 1.0,
                 ctx: TruncationContext = DEFAULT_CONTEXT) -> "LCReal":
        q = _as_fraction(q)
        c = float(c)
        if c == 0.0 or q > ctx.q_max:
            # canonical form cannot hold exponents beyond q_max; the monomial
            # truncates to the zero element (documented consequence)
            return cls.zero(ctx)
        return cls(((q, c),), ctx, _canonical_terms=True)

    @classmethod
    def scale(cls, ctx: TruncationContext = DEFAULT_CONTEXT) -> "LCReal":
        """The canonical infinitesimal s."""
        return cls.monomial(1, 1.0, ctx)

    def _wrap(self, terms: Terms) -> "LCReal":
        return LCReal(terms, self.ctx, _canonical_terms=True)

    # -- basic structure -----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def leading(self):
        """(exponent, coefficient) of the lowest-exponent term, or None."""
        return self.terms[0] if self.terms else None

    def valuation(self):
        """Leading exponent; INFINITE_VALUATION for the zero element."""
        return self.terms[0][0] if self.terms else INFINITE_VALUATION

    def coeff(self, q) -> float:
        q = _as_fraction(q)
        for e, c in self.terms:
            if e == q:
                return c
            if e > q:
                break
        return 0.0

    def ultra_norm(self) -> float:
        v = self.valuation()
        return 0.0 if v is INFINITE_VALUATION else math.exp(-float(v))

    def classify(self) -> Classification:
        v = self.valuation()
        if v is INFINITE_VALUATION or v > 0:
            return Classification.INFINITESIMAL
        if v < 0:
            return Classification.INFINITE
        return Classification.FINITE

    def standard_part(self) -> float:
        if self.classify() is Classification.INFINITE:
            raise NotFiniteError("standard part of an infinite scalar")
        return self.coeff(0)

    def prune(self, floor: float) -> "LCReal":
        """Drop coefficients with magnitude below `floor` (explicit request)."""
        return self._wrap(tuple((q, c) for q, c in self.terms if abs(c) >= floor))

    # -- context handling ----------------------------------------------------

    def _ctx_of(self, other) -> TruncationContext:
        if isinstance(other, (LCReal, LCComplex)):
            if other.ctx != self.ctx:
                raise ContextMismatchError(
                    f"mixed truncation contexts: {self.ctx} vs {other.ctx}")
        return self.ctx

    def _coerce(self, other) -> "LCReal":
        if isinstance(other, LCReal):
            self._ctx_of(other)
            return other
        if isinstance(other, _FRACTIONABLE) or isinstance(other, float):
            return LCReal.from_real(float(other), self.ctx)
        return NotImplemented

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (complex, LCComplex)):
            return LCComplex.from_lcreal(self) + other
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._wrap(_merge(self.terms, o.terms, self.ctx.q_max,
                                 self.ctx.coeff_floor))

    __radd__ = __add__

    def __neg__(self):
        return self._wrap(_scale(self.terms, -1.0))

    def __sub__(self, other):
        if isinstance(other, (complex, LCComplex)):
            return LCComplex.from_lcreal(self) - other
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (complex, LCComplex)):
            return LCComplex.from_lcreal(self) * other
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._wrap(_convolve(self.terms, o.terms, self.ctx.q_max,
                                    self.ctx.coeff_floor))

    __rmul__ = __mul__

    def invert(self) -> "LCReal":
        """Multiplicative inverse via the geometric series.

        Intermediate terms are truncated at q_max + v(a), not q_max, so the
        final shift by -v(a) does not lose representable terms.
        """
        if self.is_zero:
            raise LCZeroDivisionError("inverse of zero")
        q, c = self.terms[0]
        cap = self.ctx.q_max + q
        floor = self.ctx.coeff_floor
        # u = a / (c s^q) - 1, so v(u) > 0
        u = tuple((e - q, k / c) for e, k in self.terms[1:])
        neg_u = _scale(u, -1.0)
        acc: dict = {Fraction(0): 1.0}
        p: Terms = ((Fraction(0), 1.0),)
        while True:
            p = _convolve(p, neg_u, cap, floor)
            if not p:
                break
            for e, k in p:
                acc[e] = acc.get(e, 0.0) + k
        series = _canonical(acc.items(), cap, floor, prune=True)
        out = _shift(_scale(series, 1.0 / c), -q, self.ctx.q_max)
        return self._wrap(_canonical(out, self.ctx.q_max, floor, prune=True))

    def __truediv__(self, other):
        if isinstance(other, (complex, LCComplex)):
            return LCComplex.from_lcreal(self) / other
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.invert()

    def __rtruediv__(self, other):
        return self.invert() * other

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.invert() ** (-k)
        out = LCReal.from_real(1.0, self.ctx)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def nth_root(self, n: int) -> "LCReal":
        """Principal n-th root via the binomial series.

        Even roots of scalars with negative leading coefficient raise a
        domain error; odd roots of negatives factor out the sign.  The
        leading exponent must stay rational, which it always does (q/n).
        """
        if not isinstance(n, int) or n < 1:
            raise DomainError("root index must be a positive integer")
        if n == 1:
            return self
        if self.is_zero:
            return self
        q, c = self.terms[0]
        if c < 0:
            if n % 2 == 0:
                raise DomainError("even root of a scalar with negative leading part")
            return -((-self).nth_root(n))
        q_root = q / n
        if q_root > self.ctx.q_max:
            return LCReal.zero(self.ctx)
        cap = self.ctx.q_max - q_root
        floor = self.ctx.coeff_floor
        u = tuple((e - q, k / c) for e, k in self.terms[1:])
        acc: dict = {Fraction(0): 1.0}
        p: Terms = ((Fraction(0), 1.0),)
        binom = 1.0
        k = 0
        while True:
            binom *= (1.0 / n - k) / (k + 1)
            k += 1
            p = _convolve(p, u, cap, floor)
            if not p:
                break
            for e, kc in p:
                acc[e] = acc.get(e, 0.0) + binom * kc
        series = _canonical(acc.items(), cap, floor, prune=True)
        lead = c ** (1.0 / n)
        out = _shift(_scale(series, lead), q_root, self.ctx.q_max)
        return self._wrap(_canonical(out, self.ctx.q_max, floor, prune=True))

    def sqrt(self) -> "LCReal":
        return self.nth_root(2)

    # -- order ----------------------------------------------------------------

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is NotImplemented:
            raise TypeError(f"cannot compare LCReal with {type(other).__name__}")
        d = self - o
        if d.is_zero:
            return 0
        return 1 if d.terms[0][1] > 0 else -1

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, LCReal):
            return self.terms == other.terms and self.ctx == other.ctx
        if isinstance(other, (int, float, Fraction)):
            return self._cmp(other) == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.terms, self.ctx))

    def __abs__(self):
        return -self if self._cmp(0) < 0 else self

    # -- display ---------------------------------------------------------------

    def __repr__(self):
        return f"LCReal({self})"

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = []
        for q, c in self.terms:
            mono = _monomial_str(q)
            if mono is None:
                body = _num_str(c)
            elif abs(c) == 1.0:
                body = mono
            else:
                body = f"{_num_str(abs(c))}*{mono}"
            if not parts:
                parts.append(body if c > 0 or mono is None else f"-{body}")
                if mono is None and c < 0:
                    parts[-1] = _num_str(c)
            else:
                parts.append(f"{'+' if c > 0 else '-'} {body}"
                             if mono is not None else
                             f"{'+' if c > 0 else '-'} {_num_str(abs(c))}")
        return " ".join(parts)


def _num_str(c: float) -> str:
    if c == int(c) and abs(c) < 1e16:
        return str(int(c))
    return repr(c)


def _monomial_str(q: Fraction):
    if q == 0:
        return None
    if q == 1:
        return "s"
    if q.denominator == 1 and q > 0:
        return f"s^{q}"
    return f"s^({q})"


def compare(a: LCReal, b) -> int:
    """Total-order comparison: -1, 0, or +1."""
    return a._cmp(b)


def exp_scale(q, ctx: TruncationContext = DEFAULT_CONTEXT) -> LCReal:
    """The monomial s^q for rational q.

    Only rational exponents are representable; anything else raises.  A
    rational q > q_max truncates to the zero element since canonical form
    cannot retain the term.
    """
    return LCReal.monomial(_as_fraction(q), 1.0, ctx)


class LCComplex:
    """Complex truncated Levi-Civita scalar: re + i*im with shared context."""

    __slots__ = ("re", "im", "ctx")

    def __init__(self, re: LCReal, im: LCReal):
        if re.ctx != im.ctx:
            raise ContextMismatchError("real/imaginary parts disagree on context")
        self.re = re
        self.im = im
        self.ctx = re.ctx

    # -- constructors -----------------------------------------------------------

    @classmethod
    def zero(cls, ctx: TruncationContext = DEFAULT_CONTEXT) -> "LCComplex":
        z = LCReal.zero(ctx)
        return cls(z, z)

    @classmethod
    def from_complex(cls, c, ctx: TruncationContext = DEFAULT_CONTEXT) -> "LCComplex":
        c = complex(c)
        return cls(LCReal.from_real(c.real, ctx), LCReal.from_real(c.imag, ctx))

    @classmethod
    def from_lcreal(cls, a: LCReal) -> "LCComplex":
        return cls(a, LCReal.zero(a.ctx))

    def _coerce(self, other) -> "LCComplex":
        if isinstance(other, LCComplex):
            if other.ctx != self.ctx:
                raise ContextMismatchError(
                    f"mixed truncation contexts: {self.ctx} vs {other.ctx}")
            return other
        if isinstance(other, LCReal):
            if other.ctx != self.ctx:
                raise ContextMismatchError(
                    f"mixed truncation contexts: {self.ctx} vs {other.ctx}")
            return LCComplex.from_lcreal(other)
        if isinstance(other, (int, float, complex, Fraction)):
            return LCComplex.from_complex(complex(other), self.ctx)
        return NotImplemented

    # -- structure ---------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.re.is_zero and self.im.is_zero

    @property
    def is_real(self) -> bool:
        return self.im.is_zero

    def valuation(self):
        return min(self.re.valuation(), self.im.valuation())

    def ultra_norm(self) -> float:
        v = self.valuation()
        return 0.0 if v is INFINITE_VALUATION else math.exp(-float(v))

    def classify(self) -> Classification:
        v = self.valuation()
        if v is INFINITE_VALUATION or v > 0:
            return Classification.INFINITESIMAL
        if v < 0:
            return Classification.INFINITE
        return Classification.FINITE

    def standard_part(self) -> complex:
        if self.classify() is Classification.INFINITE:
            raise NotFiniteError("standard part of an infinite scalar")
        return complex(self.re.coeff(0), self.im.coeff(0))

    def conj(self) -> "LCComplex":
        return LCComplex(self.re, -self.im)

    def abs_squared(self) -> LCReal:
        return self.re * self.re + self.im * self.im

    def prune(self, floor: float) -> "LCComplex":
        return LCComplex(self.re.prune(floor), self.im.prune(floor))

    def coeff(self, q) -> complex:
        return complex(self.re.coeff(q), self.im.coeff(q))

    def exponents(self):
        return sorted({q for q, _ in self.re.terms} | {q for q, _ in self.im.terms})

    # -- arithmetic ----------------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return LCComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return LCComplex(-self.re, -self.im)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if self.im.is_zero and o.im.is_zero:
            return LCComplex(self.re * o.re, LCReal.zero(self.ctx))
        return LCComplex(self.re * o.re - self.im * o.im,
                         self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def invert(self) -> "LCComplex":
        if self.is_zero:
            raise LCZeroDivisionError("inverse of zero")
        if self.im.is_zero:
            return LCComplex.from_lcreal(self.re.invert())
        d = self.abs_squared().invert()
        return LCComplex(self.re * d, -(self.im * d))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.invert()

    def __rtruediv__(self, other):
        return self.invert() * other

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.invert() ** (-k)
        out = LCComplex.from_complex(1.0, self.ctx)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"LCComplex({self})"

    def __str__(self):
        if self.im.is_zero:
            return str(self.re)
        if self.re.is_zero:
            return f"({self.im})*i"
        return f"({self.re}) + ({self.im})*i"


LCNumber = Union[LCReal, LCComplex]


def as_lc_complex(x, ctx: TruncationContext = DEFAULT_CONTEXT) -> LCComplex:
    if isinstance(x, LCComplex):
        return x
    if isinstance(x, LCReal):
        return LCComplex.from_lcreal(x)
    return LCComplex.from_complex(complex(x), ctx)


def as_lc_real(x, ctx: TruncationContext = DEFAULT_CONTEXT) -> LCReal:
    if isinstance(x, LCReal):
        return x
    if isinstance(x, LCComplex):
        if not x.im.is_zero:
            raise DomainError("expected a real scalar")
        return x.re
    return LCReal.from_real(float(x), ctx)


# -- serialization -------------------------------------------------------------

def lc_to_records(x: LCNumber) -> list:
    """Ordered [{exp, re, im}] records, exponents as exact 'p/q' strings."""
    z = x if isinstance(x, LCComplex) else LCComplex.from_lcreal(x)
    return [{"exp": str(q), "re": z.re.coeff(q), "im": z.im.coeff(q)}
            for q in z.exponents()]


def records_to_lc(records: Sequence[dict],
                  ctx: TruncationContext = DEFAULT_CONTEXT) -> LCComplex:
    re_terms = [(Fraction(r["exp"]), float(r.get("re", 0.0))) for r in records]
    im_terms = [(Fraction(r["exp"]), float(r.get("im", 0.0))) for r in records]
    return LCComplex(LCReal(re_terms, ctx), LCReal(im_terms, ctx))

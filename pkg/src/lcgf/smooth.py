"""Smooth-function objects with exact jet oracles.

Every object can report the jet [f(x0), f'(x0), ..., f^(K)(x0)] at a point,
which is what the scalar lift, the pairing reductions, and the transform all
consume.  Jets are exact up to float rounding -- no finite differences.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

from .errors import DomainError, NotFiniteError, UnsupportedError
from .levicivita import (
    Classification,
    LCComplex,
    LCReal,
    TruncationContext,
    as_lc_complex,
)

_INV_FACT = [1.0]
while len(_INV_FACT) < 171:
    _INV_FACT.append(_INV_FACT[-1] / len(_INV_FACT))


class SmoothFn:
    """Base class; subclasses are immutable value objects."""

    domain: Optional[Tuple[float, float]] = None  # open interval, None = all reals
    support_hint: Optional[Tuple[float, float]] = None

    def jet(self, x0, order: int) -> list:
        raise NotImplementedError

    def derivative(self) -> "SmoothFn":
        raise NotImplementedError

    def value(self, x):
        return self.jet(x, 0)[0]

    def pretty(self, var: str = "t") -> str:
        return repr(self)

    def derivative_n(self, n: int) -> "SmoothFn":
        f = self
        for _ in range(n):
            f = f.derivative()
        return f


@dataclass(frozen=True)
class PolyFn(SmoothFn):
    coeffs: tuple  # ascending powers; complex or float entries

    def __post_init__(self):
        cs = tuple(self.coeffs)
        while cs and cs[-1] == 0:
            cs = cs[:-1]
        object.__setattr__(self, "coeffs", cs)

    def jet(self, x0, order: int) -> list:
        out = []
        cs = list(self.coeffs)
        for k in range(order + 1):
            acc = 0.0
            for c in reversed(cs):
                acc = acc * x0 + c
            out.append(acc)
            cs = [j * c for j, c in enumerate(cs)][1:]
            if not cs:
                out.extend([0.0] * (order - k))
                break
        return out[: order + 1]

    def derivative(self) -> "PolyFn":
        return PolyFn(tuple(j * c for j, c in enumerate(self.coeffs))[1:] or (0.0,))

    def value(self, x):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def pretty(self, var: str = "t") -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for j, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if j == 0:
                parts.append(_fmt_num(c))
            else:
                mono = var if j == 1 else f"{var}^{j}"
                parts.append(mono if c == 1 else f"{_fmt_num(c)}*{mono}")
        return " + ".join(parts).replace("+ -", "- ") or "0"


def _fmt_num(c) -> str:
    if isinstance(c, complex):
        if c.imag == 0:
            c = c.real
        else:
            return f"({c.real:g}{c.imag:+g}i)"
    if c == int(c):
        return str(int(c))
    return f"{c:g}"


@dataclass(frozen=True)
class ExpFn(SmoothFn):
    rate: complex = 1.0

    def jet(self, x0, order: int) -> list:
        base = cmath.exp(self.rate * x0)
        if isinstance(x0, float) or isinstance(x0, int):
            if isinstance(self.rate, float) or (isinstance(self.rate, complex)
                                                and self.rate.imag == 0):
                base = math.exp((self.rate.real if isinstance(self.rate, complex)
                                 else self.rate) * x0)
        return [base * self.rate ** k for k in range(order + 1)]

    def derivative(self) -> SmoothFn:
        return ScaledFn(self.rate, self)

    def value(self, x):
        r = self.rate
        if isinstance(r, complex) and r.imag == 0:
            r = r.real
        if isinstance(r, float) and isinstance(x, (int, float)):
            return math.exp(r * x)
        return cmath.exp(r * x)

    def pretty(self, var: str = "t") -> str:
        if self.rate == 1:
            return f"exp({var})"
        return f"exp({_fmt_num(self.rate)}*{var})"


@dataclass(frozen=True)
class SinFn(SmoothFn):
    omega: float = 1.0

    def jet(self, x0, order: int) -> list:
        w = self.omega
        if isinstance(x0, complex):
            s, c = cmath.sin(w * x0), cmath.cos(w * x0)
        else:
            s, c = math.sin(w * x0), math.cos(w * x0)
        cycle = [s, c, -s, -c]
        return [cycle[k % 4] * w ** k for k in range(order + 1)]

    def derivative(self) -> SmoothFn:
        return ScaledFn(self.omega, CosFn(self.omega))

    def value(self, x):
        return math.sin(self.omega * x) if isinstance(x, (int, float)) \
            else cmath.sin(self.omega * x)

    def pretty(self, var: str = "t") -> str:
        return f"sin({var})" if self.omega == 1 else f"sin({_fmt_num(self.omega)}*{var})"


@dataclass(frozen=True)
class CosFn(SmoothFn):
    omega: float = 1.0

    def jet(self, x0, order: int) -> list:
        w = self.omega
        if isinstance(x0, complex):
            s, c = cmath.sin(w * x0), cmath.cos(w * x0)
        else:
            s, c = math.sin(w * x0), math.cos(w * x0)
        cycle = [c, -s, -c, s]
        return [cycle[k % 4] * w ** k for k in range(order + 1)]

    def derivative(self) -> SmoothFn:
        return ScaledFn(-self.omega, SinFn(self.omega))

    def value(self, x):
        return math.cos(self.omega * x) if isinstance(x, (int, float)) \
            else cmath.cos(self.omega * x)

    def pretty(self, var: str = "t") -> str:
        return f"cos({var})" if self.omega == 1 else f"cos({_fmt_num(self.omega)}*{var})"


@dataclass(frozen=True)
class ScaledFn(SmoothFn):
    factor: complex
    fn: SmoothFn

    def __post_init__(self):
        # collapse nested scalings so structural equality works harder
        if isinstance(self.fn, ScaledFn):
            object.__setattr__(self, "factor", self.factor * self.fn.factor)
            object.__setattr__(self, "fn", self.fn.fn)

    @property
    def domain(self):
        return self.fn.domain

    @property
    def support_hint(self):
        return self.fn.support_hint

    def jet(self, x0, order: int) -> list:
        return [self.factor * v for v in self.fn.jet(x0, order)]

    def derivative(self) -> SmoothFn:
        return ScaledFn(self.factor, self.fn.derivative())

    def value(self, x):
        return self.factor * self.fn.value(x)

    def pretty(self, var: str = "t") -> str:
        if self.factor == 1:
            return self.fn.pretty(var)
        return f"{_fmt_num(self.factor)}*{self.fn.pretty(var)}"


@dataclass(frozen=True)
class AffineFn(SmoothFn):
    """fn(a*x + b)."""
    fn: SmoothFn
    a: float
    b: float

    def jet(self, x0, order: int) -> list:
        inner = self.fn.jet(self.a * x0 + self.b, order)
        return [inner[k] * self.a ** k for k in range(order + 1)]

    def derivative(self) -> SmoothFn:
        return ScaledFn(self.a, AffineFn(self.fn.derivative(), self.a, self.b))

    def value(self, x):
        return self.fn.value(self.a * x + self.b)

    @property
    def domain(self):
        if self.fn.domain is None:
            return None
        lo, hi = self.fn.domain
        if self.a > 0:
            return ((lo - self.b) / self.a, (hi - self.b) / self.a)
        return ((hi - self.b) / self.a, (lo - self.b) / self.a)

    @property
    def support_hint(self):
        if self.fn.support_hint is None:
            return None
        lo, hi = self.fn.support_hint
        if self.a > 0:
            return ((lo - self.b) / self.a, (hi - self.b) / self.a)
        return ((hi - self.b) / self.a, (lo - self.b) / self.a)

    def pretty(self, var: str = "t") -> str:
        if self.a == 1:
            if self.b == 0:
                inner = var
            else:
                inner = f"{var} + {_fmt_num(self.b)}".replace("+ -", "- ")
        else:
            inner = f"{_fmt_num(self.a)}*{var}"
            if self.b != 0:
                inner = f"{inner} + {_fmt_num(self.b)}".replace("+ -", "- ")
        return self.fn.pretty(inner)


@dataclass(frozen=True)
class SumFn(SmoothFn):
    terms: tuple  # tuple[SmoothFn]

    def jet(self, x0, order: int) -> list:
        out = [0.0] * (order + 1)
        for t in self.terms:
            for k, v in enumerate(t.jet(x0, order)):
                out[k] = out[k] + v
        return out

    def derivative(self) -> SmoothFn:
        return SumFn(tuple(t.derivative() for t in self.terms))

    def value(self, x):
        return sum(t.value(x) for t in self.terms)

    def pretty(self, var: str = "t") -> str:
        return " + ".join(t.pretty(var) for t in self.terms).replace("+ -", "- ")


@dataclass(frozen=True)
class ProductFn(SmoothFn):
    factors: tuple  # tuple[SmoothFn]

    def jet(self, x0, order: int) -> list:
        out = None
        for f in self.factors:
            j = f.jet(x0, order)
            out = j if out is None else jet_product(out, j)
        return out if out is not None else [1.0] + [0.0] * order

    def derivative(self) -> SmoothFn:
        fs = self.factors
        terms = []
        for i in range(len(fs)):
            terms.append(ProductFn(fs[:i] + (fs[i].derivative(),) + fs[i + 1:]))
        return SumFn(tuple(terms))

    def value(self, x):
        out = 1.0
        for f in self.factors:
            out *= f.value(x)
        return out

    @property
    def support_hint(self):
        # product support is contained in the intersection of hints
        lo, hi = -math.inf, math.inf
        seen = False
        for f in self.factors:
            h = f.support_hint
            if h is not None:
                seen = True
                lo, hi = max(lo, h[0]), min(hi, h[1])
        if not seen:
            return None
        return (lo, hi) if lo < hi else (0.0, 0.0)

    def pretty(self, var: str = "t") -> str:
        return "*".join(f"({f.pretty(var)})" for f in self.factors)


@dataclass(frozen=True)
class ParamExpFn(SmoothFn):
    """exp(-lam * x) for a (possibly non-standard) complex scalar lam.

    Jets are LC-valued; the derivative is handled at the atom level because
    the factor -lam is itself an LC scalar.
    """
    lam: LCComplex

    def jet(self, x0, order: int) -> list:
        base = exp_lc(self.lam * (-x0), self.lam.ctx)
        neg = -self.lam
        out = [base]
        for _ in range(order):
            out.append(out[-1] * neg)
        return out

    def derivative(self) -> SmoothFn:
        raise UnsupportedError("parametric exponentials differentiate at the atom level")

    def value(self, x):
        raise UnsupportedError("parametric exponentials have LC values; use jets")

    def pretty(self, var: str = "t") -> str:
        return f"exp(-({self.lam})*{var})"


def jet_product(a: list, b: list) -> list:
    """Leibniz convolution of two jets of equal length."""
    n = len(a)
    out = []
    for k in range(n):
        acc = 0.0
        for i in range(k + 1):
            acc = acc + math.comb(k, i) * a[i] * b[k - i]
        out.append(acc)
    return out


def jet_depth(v, budget) -> int:
    """Largest K with K*v <= budget (the next term would truncate away)."""
    if v is None:
        return 0
    return int(Fraction(budget) / Fraction(v))


def lift_smooth(fn: SmoothFn, x, ctx: TruncationContext = None) -> LCComplex:
    """Evaluate a smooth function at a finite LC point via its Taylor jet.

    Exact (up to float rounding) for real arguments; the infinitesimal part
    feeds a Taylor expansion truncated once increments leave canonical form.
    """
    if ctx is None and hasattr(x, "ctx"):
        ctx = x.ctx
    if ctx is None:
        from .levicivita import DEFAULT_CONTEXT
        ctx = DEFAULT_CONTEXT
    z = as_lc_complex(x, ctx)
    if z.classify() is Classification.INFINITE:
        raise NotFiniteError("smooth lift requires a finite argument")
    st = z.standard_part()
    x0 = st.real if st.imag == 0 else st
    if fn.domain is not None:
        lo, hi = fn.domain
        if st.imag != 0 or not (lo < st.real < hi):
            raise DomainError(f"{st} outside the function domain {fn.domain}")
    h = z - st
    if h.is_zero:
        return as_lc_complex(fn.jet(x0, 0)[0], ctx)
    K = jet_depth(h.valuation(), ctx.q_max)
    jet = fn.jet(x0, K)
    acc = as_lc_complex(jet[K] * _INV_FACT[K], ctx)
    for k in range(K - 1, -1, -1):
        acc = acc * h + jet[k] * _INV_FACT[k]
    return acc


def exp_lc(w, ctx: TruncationContext = None) -> LCComplex:
    """exp of a finite LC scalar."""
    return lift_smooth(ExpFn(1.0), w, ctx)

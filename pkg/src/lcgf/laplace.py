"""Contradiction-free Laplace transform over the LC scalars, plus the
classical desk-table pipeline used for auditing.

Domain elements split into classical signal parts -- H(t-a)(t-a)^k
e^{alpha(t-a)} trig(omega(t-a)) atoms with LC-valued nonnegative shifts --
and generalized parts, which must be compactly supported with internal
support inside [s, infinity).  That support gate is what rejects L(delta)
while admitting L(delta(t - 2s)) = e^{-2sz}.

Images are finite sums R_j(z) e^{-a_j z} with rational R_j; numerators carry
LC coefficients, denominators stay complex-float (every denominator in the
pipeline comes from a characteristic polynomial or the table itself).
"""

import cmath
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

from .errors import (
    DomainError,
    DomainMembershipError,
    UnsupportedError,
)
from .genfunc import (
    Algebra,
    DEFAULT_ALGEBRA,
    DeltaAtom,
    GenFunction,
    SmoothAtom,
    Term,
    TRUE,
    Verdict,
    _functional,
    _product_jets_lc,
    _terms_to_node,
    normalize,
    weak_equal,
)
from .levicivita import (
    LCComplex,
    LCReal,
    as_lc_complex,
    as_lc_real,
    lc_to_records,
)
from .smooth import (
    AffineFn,
    CosFn,
    ExpFn,
    PolyFn,
    ProductFn,
    ScaledFn,
    SinFn,
    SmoothFn,
    SumFn,
    exp_lc,
    _INV_FACT,
)

_DUST = 1e-12


def _negligible(c: LCComplex, tol: float = _DUST) -> bool:
    return c.prune(tol).is_zero


# ---------------------------------------------------------------------------
# rational functions of z
# ---------------------------------------------------------------------------


def _cstrip(coeffs: Sequence[complex]) -> tuple:
    out = list(coeffs)
    while len(out) > 1 and abs(out[-1]) <= 1e-13:
        out.pop()
    return tuple(complex(c) for c in out)


class RationalZ:
    """num(z)/den(z); num has LCComplex coefficients, den complex floats."""

    __slots__ = ("num", "den", "ctx")

    def __init__(self, num, den=(1.0,), ctx=None):
        if ctx is None:
            ctx = DEFAULT_ALGEBRA.ctx
            for c in num:
                if isinstance(c, (LCComplex, LCReal)):
                    ctx = c.ctx
                    break
        self.ctx = ctx
        num = [as_lc_complex(c, ctx) for c in num]
        while len(num) > 1 and _negligible(num[-1]):
            num.pop()
        den = _cstrip(den)
        lead = den[-1]
        if abs(lead) == 0.0:
            raise DomainError("zero denominator")
        if lead != 1.0:  # monic denominator keeps comparisons canonical
            den = tuple(c / lead for c in den)
            num = [c * (1.0 / lead) for c in num]
        self.num = tuple(num)
        self.den = den

    # -- helpers ---------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return all(_negligible(c) for c in self.num)

    def copy_with(self, num=None, den=None) -> "RationalZ":
        return RationalZ(self.num if num is None else num,
                         self.den if den is None else den, self.ctx)

    def __add__(self, other: "RationalZ") -> "RationalZ":
        if self.den == other.den:
            num = _poly_add(self.num, other.num, self.ctx)
            return RationalZ(num, self.den, self.ctx)
        num = _poly_add(_poly_mul_mixed(self.num, other.den, self.ctx),
                        _poly_mul_mixed(other.num, self.den, self.ctx), self.ctx)
        return RationalZ(num, _poly_mul_c(self.den, other.den), self.ctx).reduce()

    def scale(self, c) -> "RationalZ":
        c = as_lc_complex(c, self.ctx)
        return RationalZ([a * c for a in self.num], self.den, self.ctx)

    def mul_poly(self, poly: Sequence[complex]) -> "RationalZ":
        return RationalZ(_poly_mul_mixed(self.num, _cstrip(poly), self.ctx),
                         self.den, self.ctx).reduce()

    def div_poly(self, poly: Sequence[complex]) -> "RationalZ":
        return RationalZ(self.num, _poly_mul_c(self.den, _cstrip(poly)), self.ctx)

    def derivative(self) -> "RationalZ":
        dn = _poly_deriv_lc(self.num, self.ctx)
        dd = _poly_deriv_c(self.den)
        num = _poly_sub(_poly_mul_mixed(dn, self.den, self.ctx),
                        _poly_mul_mixed(self.num, dd, self.ctx), self.ctx)
        return RationalZ(num, _poly_mul_c(self.den, self.den), self.ctx).reduce()

    def evaluate(self, z) -> LCComplex:
        z = as_lc_complex(z, self.ctx)
        n = _poly_eval_lc(self.num, z, self.ctx)
        d = _poly_eval_c(self.den, z, self.ctx)
        return n * d.invert()

    def reduce(self) -> "RationalZ":
        """Cancel denominator roots that exactly divide the numerator."""
        num, den = list(self.num), list(self.den)
        changed = True
        while changed and len(den) > 1:
            changed = False
            for p in _poly_roots(den):
                q, rem = _poly_divmod_lc(num, (-p, 1.0), self.ctx)
                if _negligible(rem, 1e-10 * max(1.0, _poly_scale(num))):
                    num = q
                    den = _poly_deflate(den, p)
                    changed = True
                    break
        return RationalZ(num, den, self.ctx)

    def equal(self, other: "RationalZ", tol: float = 1e-9) -> bool:
        cross = _poly_sub(_poly_mul_mixed(self.num, other.den, self.ctx),
                          _poly_mul_mixed(other.num, self.den, self.ctx), self.ctx)
        scale = max(1.0, _poly_scale(self.num), _poly_scale(other.num))
        return all(_negligible(c, tol * scale) for c in cross)

    def pretty(self, var: str = "z") -> str:
        num = _poly_pretty_lc(self.num, var)
        if len(self.den) == 1:
            return num
        den = _poly_pretty_c(self.den, var)
        return f"({num})/({den})"

    def __repr__(self):
        return f"RationalZ({self.pretty()})"


def _poly_scale(num) -> float:
    worst = 0.0
    for c in num:
        if isinstance(c, LCComplex):
            for q in c.exponents():
                worst = max(worst, abs(c.coeff(q)))
        else:
            worst = max(worst, abs(c))
    return worst


def _poly_add(a, b, ctx):
    out = [as_lc_complex(0.0, ctx)] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] = out[i] + c
    for i, c in enumerate(b):
        out[i] = out[i] + c
    return out


def _poly_sub(a, b, ctx):
    return _poly_add(a, [-c for c in b], ctx)


def _poly_mul_mixed(a, b, ctx):
    """a: LC coefficients, b: LC or complex coefficients."""
    out = [as_lc_complex(0.0, ctx) for _ in range(len(a) + len(b) - 1)]
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] = out[i + j] + ca * cb
    return out


def _poly_mul_c(a, b):
    out = [0.0j] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return tuple(out)


def _poly_deriv_lc(a, ctx):
    if len(a) <= 1:
        return [as_lc_complex(0.0, ctx)]
    return [a[i] * float(i) for i in range(1, len(a))]


def _poly_deriv_c(a):
    if len(a) <= 1:
        return (0.0j,)
    return tuple(a[i] * i for i in range(1, len(a)))


def _poly_eval_lc(a, z: LCComplex, ctx) -> LCComplex:
    acc = as_lc_complex(0.0, ctx)
    for c in reversed(a):
        acc = acc * z + c
    return acc


def _poly_eval_c(a, z: LCComplex, ctx) -> LCComplex:
    acc = as_lc_complex(0.0, ctx)
    for c in reversed(a):
        acc = acc * z + as_lc_complex(c, ctx)
    return acc


def _poly_eval_c_at_c(a, p: complex) -> complex:
    acc = 0.0j
    for c in reversed(a):
        acc = acc * p + c
    return acc


def _poly_divmod_lc(num, lin, ctx):
    """Divide LC-coefficient num by the linear complex poly lin=(c0, c1)."""
    c0, c1 = lin
    work = [as_lc_complex(c, ctx) for c in num]
    if len(work) == 1:
        return [as_lc_complex(0.0, ctx)], work[0]
    out = [as_lc_complex(0.0, ctx)] * (len(work) - 1)
    for i in range(len(work) - 1, 0, -1):
        q = work[i] * (1.0 / c1)
        out[i - 1] = q
        work[i - 1] = work[i - 1] - q * c0
    return out, work[0]


def _poly_deflate(den, p):
    """den/(z - p) by synthetic division (exactness assumed checked)."""
    n = len(den) - 1
    out = [0.0j] * n
    carry = den[n]
    for i in range(n - 1, -1, -1):
        out[i] = carry
        carry = den[i] + carry * p
    return tuple(out)


def _poly_roots(den) -> list:
    """Roots of a complex-float polynomial; exact formulas through degree 2."""
    d = _cstrip(den)
    if len(d) == 1:
        return []
    if len(d) == 2:
        return [-d[0] / d[1]]
    if len(d) == 3:
        c, b, a = d[0], d[1], d[2]
        disc = cmath.sqrt(b * b - 4.0 * a * c)
        # pick the branch that avoids cancellation
        if abs(-b + disc) >= abs(-b - disc):
            r1 = (-b + disc) / (2.0 * a)
        else:
            r1 = (-b - disc) / (2.0 * a)
        r2 = (c / a) / r1 if r1 != 0 else -b / a
        return [r1, r2]
    import numpy as np
    return [complex(r) for r in np.roots(list(reversed(d)))]


def _cluster_roots(roots, tol=1e-7):
    """[(root, multiplicity)] with nearby roots averaged together."""
    out = []
    for r in roots:
        for i, (p, m) in enumerate(out):
            if abs(r - p) <= tol * max(1.0, abs(p)):
                out[i] = ((p * m + r) / (m + 1), m + 1)
                break
        else:
            out.append((r, 1))
    # snap tiny real/imag parts so catalog poles come out clean
    snapped = []
    for p, m in out:
        re = 0.0 if abs(p.real) < 1e-10 else p.real
        im = 0.0 if abs(p.imag) < 1e-10 else p.imag
        snapped.append((complex(re, im), m))
    return snapped


def _poly_pretty_c(a, var):
    bits = []
    for i, c in enumerate(a):
        if abs(c) <= 1e-13:
            continue
        cc = c.real if abs(c.imag) <= 1e-13 else c
        s = _fmt_c(cc)
        if i == 0:
            bits.append(s)
        elif i == 1:
            bits.append(f"{var}" if s == "1" else f"{s}*{var}")
        else:
            bits.append(f"{var}^{i}" if s == "1" else f"{s}*{var}^{i}")
    return " + ".join(bits) if bits else "0"


def _poly_pretty_lc(a, var):
    bits = []
    for i, c in enumerate(a):
        if _negligible(c):
            continue
        s = _fmt_lc(c)
        if i == 0:
            bits.append(s)
        elif i == 1:
            bits.append(f"{var}" if s == "1" else f"{s}*{var}")
        else:
            bits.append(f"{var}^{i}" if s == "1" else f"{s}*{var}^{i}")
    return " + ".join(bits) if bits else "0"


def _fmt_c(c) -> str:
    if isinstance(c, complex):
        return f"({c.real:g}{c.imag:+g}i)"
    if c == int(c):
        return str(int(c))
    return f"{c:g}"


def _fmt_lc(c: LCComplex) -> str:
    exps = c.exponents()
    if len(exps) == 1 and exps[0] == 0 and c.is_real:
        return _fmt_c(c.coeff(0).real)
    return f"({c})"


# ---------------------------------------------------------------------------
# Laplace images
# ---------------------------------------------------------------------------


class LaplaceImage:
    """Finite sum of R_j(z) * e^(-a_j z) with nonnegative LC shifts a_j."""

    def __init__(self, terms=None, region: float = 0.0, ctx=None):
        self.ctx = ctx or DEFAULT_ALGEBRA.ctx
        self.region = float(region)
        self._terms = {}
        if terms:
            for shift, rat in terms:
                self.add_term(shift, rat)

    def add_term(self, shift: LCReal, rat: RationalZ):
        shift = as_lc_real(shift, self.ctx)
        if shift < LCReal.zero(self.ctx):
            raise DomainError("image shifts must be nonnegative")
        key = shift
        if key in self._terms:
            self._terms[key] = self._terms[key] + rat
        else:
            self._terms[key] = rat
        if self._terms[key].is_zero:
            del self._terms[key]

    @property
    def terms(self) -> list:
        return sorted(self._terms.items(), key=lambda kv: str(kv[0]))

    def __add__(self, other: "LaplaceImage") -> "LaplaceImage":
        out = LaplaceImage(ctx=self.ctx, region=max(self.region, other.region))
        for shift, rat in self.terms:
            out.add_term(shift, rat)
        for shift, rat in other.terms:
            out.add_term(shift, rat)
        return out

    def scale(self, c) -> "LaplaceImage":
        out = LaplaceImage(ctx=self.ctx, region=self.region)
        for shift, rat in self.terms:
            out.add_term(shift, rat.scale(c))
        return out

    def div_poly(self, poly) -> "LaplaceImage":
        out = LaplaceImage(ctx=self.ctx, region=self.region)
        for shift, rat in self.terms:
            out.add_term(shift, rat.div_poly(poly))
        return out

    def evaluate(self, z) -> LCComplex:
        z = as_lc_complex(z, self.ctx)
        acc = as_lc_complex(0.0, self.ctx)
        for shift, rat in self.terms:
            phase = exp_lc(-(as_lc_complex(shift, self.ctx) * z), self.ctx)
            acc = acc + rat.evaluate(z) * phase
        return acc

    def equal(self, other: "LaplaceImage", tol: float = 1e-9) -> bool:
        mine = dict(self.terms)
        theirs = dict(other.terms)
        for key in set(mine) | set(theirs):
            a = mine.get(key)
            b = theirs.get(key)
            if a is None or b is None:
                missing = a if b is None else b
                if not missing.is_zero:
                    return False
                continue
            if not a.equal(b, tol):
                return False
        return True

    def pretty(self) -> str:
        if not self._terms:
            return "0"
        bits = []
        for shift, rat in self.terms:
            body = rat.pretty()
            if shift.is_zero:
                bits.append(body)
            else:
                bits.append(f"exp(-({shift})*z)*{body}" if body != "1"
                            else f"exp(-({shift})*z)")
        joined = " + ".join(bits)
        return joined

    def to_payload(self) -> dict:
        out = []
        for shift, rat in self.terms:
            out.append({
                "num": [lc_to_records(c) for c in rat.num],
                "den": [[c.real, c.imag] for c in rat.den],
                "shift": lc_to_records(as_lc_complex(shift, self.ctx)),
            })
        return {"terms": out, "region": self.region}

    def __repr__(self):
        return f"LaplaceImage({self.pretty()})"


# ---------------------------------------------------------------------------
# time-domain elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassicalTerm:
    """coef * H(t-a) * (t-a)^k * e^{alpha (t-a)} * trig(omega (t-a)).

    trig: "" (constant 1), "cos", or "sin".  The shift a is a nonnegative
    LC real; its standard part gives the classical step location and its
    infinitesimal part rides along exactly through the shift law.
    """
    coef: LCComplex
    k: int = 0
    alpha: float = 0.0
    omega: float = 0.0
    trig: str = ""
    shift: LCReal = None

    def __post_init__(self):
        if self.trig not in ("", "cos", "sin"):
            raise DomainError("trig must be '', 'cos', or 'sin'")
        if self.trig == "" and self.omega != 0.0:
            raise DomainError("constant part cannot carry a frequency")
        sh = self.shift if self.shift is not None else LCReal.zero(self.coef.ctx)
        object.__setattr__(self, "shift", sh)
        if sh < LCReal.zero(sh.ctx):
            raise DomainError("classical shifts must be nonnegative")

    def pretty(self, var: str = "t") -> str:
        sh = self.shift
        if sh.is_zero:
            u = var
            gate = f"H({var})"
        else:
            u = f"({var} - {sh})".replace("- -", "+ ")
            gate = f"H({var} - {sh})"
        pieces = []
        if self.k == 1:
            pieces.append(u)
        elif self.k > 1:
            pieces.append(f"{u}^{self.k}")
        if self.alpha:
            pieces.append(f"exp({_fmt_c(self.alpha)}*{u})")
        if self.trig:
            w = "" if self.omega == 1.0 else f"{_fmt_c(self.omega)}*"
            pieces.append(f"{self.trig}({w}{u})")
        if not pieces:
            pieces.append("1")
        body = "*".join(pieces)
        cs = _fmt_lc(self.coef)
        lead = "" if cs == "1" else f"{cs}*"
        return f"{lead}{gate}*{body}"

    def base_image(self, ctx) -> RationalZ:
        """L of the unshifted body (t^k e^{alpha t} trig(omega t))."""
        a, w = self.alpha, self.omega
        if self.trig == "":
            rat = RationalZ([1.0], (-a, 1.0), ctx)
        elif self.trig == "cos":
            rat = RationalZ([-a, 1.0], (a * a + w * w, -2.0 * a, 1.0), ctx)
        else:
            rat = RationalZ([w], (a * a + w * w, -2.0 * a, 1.0), ctx)
        for _ in range(self.k):  # L[t f] = -F'(z)
            rat = rat.derivative().scale(-1.0)
        return rat.scale(self.coef)


@dataclass
class LaplaceDomainElement:
    """Definition-style domain element: classical signal + generalized parts."""

    classical_parts: Tuple[ClassicalTerm, ...] = ()
    generalized_parts: Tuple[Tuple[LCComplex, GenFunction], ...] = ()
    algebra: Algebra = None

    def __post_init__(self):
        self.algebra = self.algebra or DEFAULT_ALGEBRA
        for coef, gf in self.generalized_parts:
            _gate_generalized(gf)

    @property
    def growth(self) -> float:
        return max((t.alpha for t in self.classical_parts), default=0.0)

    def __add__(self, other: "LaplaceDomainElement") -> "LaplaceDomainElement":
        return LaplaceDomainElement(
            _merge_classical(self.classical_parts + other.classical_parts),
            self.generalized_parts + other.generalized_parts,
            self.algebra)

    def scale(self, c) -> "LaplaceDomainElement":
        c = as_lc_complex(c, self.algebra.ctx)
        return LaplaceDomainElement(
            tuple(replace(t, coef=t.coef * c) for t in self.classical_parts),
            tuple((w * c, gf) for w, gf in self.generalized_parts),
            self.algebra)

    def to_genfunction(self, mode: str = "signal") -> GenFunction:
        """GenFunction form; mode 'solution' leaves zero-shift parts ungated.

        'signal' gates every classical part with its step (table semantics);
        'solution' uses the smooth extension for exact-zero shifts so initial
        values evaluate sharply at 0.
        """
        alg = self.algebra
        acc = alg.zero()
        for t in self.classical_parts:
            fn = _classical_fn(t)
            smooth = alg.smooth(fn, shift=t.shift)
            if mode == "solution" and t.shift.is_zero:
                acc = acc + t.coef * smooth
            else:
                st = t.shift.standard_part()
                gate = alg.heaviside(center=st, shift=t.shift - st)
                acc = acc + t.coef * (gate * smooth)
        for coef, gf in self.generalized_parts:
            acc = acc + coef * gf
        return acc

    def pretty(self, mode: str = "signal") -> str:
        bits = []
        for t in self.classical_parts:
            txt = t.pretty()
            if mode == "solution" and t.shift.is_zero:
                txt = txt.replace("H(t)*", "")
            bits.append(txt)
        for coef, gf in self.generalized_parts:
            cs = _fmt_lc(coef)
            body = _pretty_generalized(gf)
            bits.append(body if cs == "1" else f"{cs}*{body}")
        return " + ".join(bits) if bits else "0"


def _classical_fn(t: ClassicalTerm) -> SmoothFn:
    parts = []
    if t.k > 0:
        parts.append(PolyFn((0.0,) * t.k + (1.0,)))
    if t.alpha:
        parts.append(AffineFn(ExpFn(), t.alpha, 0.0))
    if t.trig == "cos":
        parts.append(CosFn() if t.omega == 1.0 else AffineFn(CosFn(), t.omega, 0.0))
    elif t.trig == "sin":
        parts.append(SinFn() if t.omega == 1.0 else AffineFn(SinFn(), t.omega, 0.0))
    if not parts:
        return PolyFn((1.0,))
    if len(parts) == 1:
        return parts[0]
    return ProductFn(tuple(parts))


def _pretty_generalized(gf: GenFunction) -> str:
    bits = []
    for term in normalize(gf):
        atoms = []
        for sh, k in term.deltas:
            arg = "t" if (term.center == 0 and sh.is_zero) else \
                f"t - {_fmt_shift(term.center, sh)}"
            name = "delta" if k == 0 else f"delta^({k})"
            atoms.append(f"{name}({arg})")
        for sh in term.heavisides:
            arg = "t" if (term.center == 0 and sh.is_zero) else \
                f"t - {_fmt_shift(term.center, sh)}"
            atoms.append(f"H({arg})")
        for a in term.smooths:
            atoms.append(a.fn.pretty("t"))
        cs = _fmt_lc(term.coef)
        body = "*".join(atoms) if atoms else "1"
        bits.append(body if cs == "1" else f"{cs}*{body}")
    return " + ".join(bits) if bits else "0"


def _fmt_shift(center: float, sh: LCReal) -> str:
    total = sh + center
    return str(total)


def _merge_classical(parts) -> tuple:
    merged = {}
    order = []
    for t in parts:
        key = (t.k, t.alpha, t.omega, t.trig, t.shift)
        if key in merged:
            merged[key] = replace(merged[key], coef=merged[key].coef + t.coef)
        else:
            merged[key] = t
            order.append(key)
    return tuple(merged[k] for k in order if not _negligible(merged[k].coef))


def _gate_generalized(gf: GenFunction):
    """Definition 's generalized-part admission: compact external support in
    [0, inf) and internal support bounded below by the scale."""
    info = gf.support()
    if not info.external_bounded():
        raise DomainMembershipError(
            "generalized parts need compact external support")
    s = gf.algebra.s
    if any(lo < 0.0 for lo, _ in info.external):
        raise DomainMembershipError(
            "generalized parts must live on the nonnegative axis")
    for lo_lc, _hi in info.internal:
        if lo_lc < s:
            raise DomainMembershipError(
                "internal support must stay at or above the scale s; "
                "an unshifted delta is therefore outside dom(L)")


# ---------------------------------------------------------------------------
# the transform
# ---------------------------------------------------------------------------


def transform(f: LaplaceDomainElement) -> LaplaceImage:
    """L-hat by linearity: classical table + generalized-part pairings."""
    alg = f.algebra
    ctx = alg.ctx
    img = LaplaceImage(ctx=ctx, region=max(f.growth, 0.0))
    for t in f.classical_parts:
        img.add_term(t.shift, t.base_image(ctx))
    for coef, gf in f.generalized_parts:
        part = _transform_generalized(gf, alg)
        img = img + part.scale(coef)
    return img


def _transform_generalized(gf: GenFunction, alg: Algebra) -> LaplaceImage:
    ctx = alg.ctx
    img = LaplaceImage(ctx=ctx)
    for term in normalize(gf):
        if term.center is None:
            raise UnsupportedError(
                "smooth compactly-supported parts are outside the "
                "transform catalog")
        if len(term.deltas) == 1 and not term.heavisides:
            # exact: integral of delta^{(k)}(x-c-h) G(x) e^{-zx}
            #      = (-1)^k sum_j C(k,j) G^{(k-j)}(c+h) (-z)^j e^{-(c+h)z}
            h, k = term.deltas[0]
            shift = h + term.center
            x_eval = as_lc_complex(LCReal.from_real(term.center, ctx) + h, ctx)
            gj = _product_jets_lc(term.smooths, x_eval, k, alg)
            sign = (-1.0) ** k
            num = [term.coef * (sign * math.comb(k, j) * (-1.0) ** j) * gj[k - j]
                   for j in range(k + 1)]
            img.add_term(shift, RationalZ(num, (1.0,), ctx))
            continue
        fun = _functional(term, alg)
        if fun.halflines:
            raise UnsupportedError(
                "half-line parts are classical, not generalized")
        num_len = max(list(fun.w_sym) + list(fun.w_quad), default=0) + 1
        num = [as_lc_complex(0.0, ctx) for _ in range(num_len)]
        for m, w in fun.w_sym.items():
            num[m] = num[m] + w * ((-1.0) ** m)
        for m, w in fun.w_quad.items():
            num[m] = num[m] + w * ((-1.0) ** m)
        img.add_term(LCReal.from_real(fun.center, ctx), RationalZ(num, (1.0,), ctx))
    return img


def transform_derivative_shifted(n: int, shift=None,
                                 algebra: Algebra = None) -> LaplaceImage:
    """The image z^n e^{-a z} of delta^{(n)}(t - a), default a = 2s."""
    alg = algebra or DEFAULT_ALGEBRA
    if n < 0:
        raise DomainError("derivative order must be nonnegative")
    a = as_lc_real(shift, alg.ctx) if shift is not None else 2.0 * alg.s
    num = [as_lc_complex(0.0, alg.ctx)] * n + [as_lc_complex(1.0, alg.ctx)]
    img = LaplaceImage(ctx=alg.ctx)
    img.add_term(a, RationalZ(num, (1.0,), alg.ctx))
    return img


def derivative_rule(F: LaplaceImage, f0) -> LaplaceImage:
    """The desk rule L[f'] = z L[f] - f(0) applied at the image level."""
    out = LaplaceImage(ctx=F.ctx, region=F.region)
    for shift, rat in F.terms:
        out.add_term(shift, rat.mul_poly((0.0, 1.0)))
    out.add_term(LCReal.zero(F.ctx), RationalZ([-as_lc_complex(f0, F.ctx)],
                                               (1.0,), F.ctx))
    return out


# ---------------------------------------------------------------------------
# inversion
# ---------------------------------------------------------------------------


def inverse_transform(F: LaplaceImage,
                      algebra: Algebra = None) -> LaplaceDomainElement:
    alg = algebra or DEFAULT_ALGEBRA
    ctx = alg.ctx
    classical = []
    generalized = []
    for shift, rat in F.terms:
        rat = rat.reduce()
        num, den = list(rat.num), list(rat.den)
        poly_part = []
        if len(num) >= len(den) and len(den) > 1:
            poly_part, num = _poly_long_division(num, den, ctx)
        elif len(den) == 1:
            poly_part, num = num, []
        if num and len(den) > 1:
            classical.extend(_invert_proper(num, den, shift, ctx))
        for k, c in enumerate(poly_part):
            if _negligible(c):
                continue
            # c * z^k e^{-az}  <-  c * delta^{(k)}(t - a)
            if shift.is_zero or shift < alg.s:
                raise DomainMembershipError(
                    "polynomial image parts invert to deltas, which need "
                    "a shift of at least the scale s")
            st = shift.standard_part()
            gf = GenFunction(DeltaAtom(st, shift - st, k), alg)
            generalized.append((c, gf))
    return LaplaceDomainElement(_merge_classical(classical), tuple(generalized), alg)


def _poly_long_division(num, den, ctx):
    num = list(num)
    dn = len(den) - 1
    lead = den[-1]
    quot = [as_lc_complex(0.0, ctx)] * (len(num) - dn)
    for i in range(len(num) - 1, dn - 1, -1):
        q = num[i] * (1.0 / lead)
        quot[i - dn] = q
        for j in range(dn + 1):
            num[i - dn + j] = num[i - dn + j] - q * den[j]
    rem = num[:dn]
    while len(rem) > 1 and _negligible(rem[-1]):
        rem.pop()
    return quot, rem


def _invert_proper(num, den, shift, ctx) -> list:
    """Partial fractions of num/den (deg num < deg den) into time atoms."""
    pieces = []  # (pole, j, coef) meaning coef / (z - pole)^j
    for p, m in _cluster_roots(_poly_roots(den)):
        q = list(den)
        for _ in range(m):
            q = list(_poly_deflate(q, p))
        # Taylor of num/q at p, to order m-1
        ntay = _taylor_lc(num, p, m, ctx)
        qtay = _taylor_c(q, p, m)
        dd = _series_divide(ntay, qtay, m, ctx)
        for j in range(m):
            coef = dd[j]
            if not _negligible(coef):
                pieces.append((p, m - j, coef))
    out = []
    used = set()
    plist = list(pieces)
    for idx, (p, j, coef) in enumerate(plist):
        if idx in used:
            continue
        if abs(p.imag) <= 1e-12:
            out.append(ClassicalTerm(coef * _INV_FACT[j - 1], j - 1,
                                     p.real, 0.0, "", shift))
            used.add(idx)
            continue
        mate = None
        for jdx in range(idx + 1, len(plist)):
            if jdx in used:
                continue
            p2, j2, _ = plist[jdx]
            if j2 == j and abs(p2 - p.conjugate()) <= 1e-9 * max(1.0, abs(p)):
                mate = jdx
                break
        if mate is None:
            raise UnsupportedError(
                "unpaired complex pole is outside the real time catalog")
        coef2 = plist[mate][2]
        used.add(idx)
        used.add(mate)
        alpha, omega = p.real, abs(p.imag)
        if p.imag < 0:
            coef, coef2 = coef2, coef
        ccos = (coef + coef2) * _INV_FACT[j - 1]
        csin = (coef - coef2) * complex(0.0, 1.0) * _INV_FACT[j - 1]
        if not _negligible(ccos):
            out.append(ClassicalTerm(ccos, j - 1, alpha, omega, "cos", shift))
        if not _negligible(csin):
            out.append(ClassicalTerm(csin, j - 1, alpha, omega, "sin", shift))
    return out


def _taylor_lc(num, p, order, ctx):
    """[f(p), f'(p)/1!, ...] for an LC-coefficient polynomial f."""
    out = []
    work = [as_lc_complex(c, ctx) for c in num]
    fact = 1.0
    for j in range(order):
        out.append(_poly_eval_lc(work, as_lc_complex(p, ctx), ctx) * (1.0 / fact))
        work = _poly_deriv_lc(work, ctx)
        fact *= (j + 1)
    return out


def _taylor_c(poly, p, order):
    out = []
    work = list(poly)
    fact = 1.0
    for j in range(order):
        out.append(_poly_eval_c_at_c(work, p) / fact)
        work = list(_poly_deriv_c(work))
        fact *= (j + 1)
    return out


def _series_divide(n, d, order, ctx):
    """Coefficients of (sum n_j x^j)/(sum d_j x^j) up to x^{order-1}."""
    if abs(d[0]) == 0.0:
        raise DomainError("nonzero constant term required in series division")
    inv0 = 1.0 / d[0]
    out = []
    for j in range(order):
        acc = n[j] if j < len(n) else as_lc_complex(0.0, ctx)
        for i in range(j):
            if j - i < len(d):
                acc = acc - out[i] * d[j - i]
        out.append(acc * inv0)
    return out


# ---------------------------------------------------------------------------
# recognizing GenFunctions as domain elements
# ---------------------------------------------------------------------------
#
# A "piece" is a 5-tuple (coef: LCComplex, k: int, alpha: float, omega: float,
# trig: str) standing for coef * v^k * e^{alpha v} * trig(omega v) in some
# agreed variable v.  Addition formulas move pieces between variables exactly,
# with LC scalars absorbing infinitesimal offsets.


def _norm_piece(coef, k, alpha, omega, trig):
    if trig and omega < 0.0:
        if trig == "sin":
            coef = coef * (-1.0)
        omega = -omega
    if trig and omega == 0.0:
        if trig == "sin":
            coef = coef * 0.0
        trig, omega = "", 0.0
    if not trig:
        omega = 0.0
    return (coef, k, alpha, omega, trig)


def _combine_pieces(base, extra):
    out = []
    for c1, k1, a1, w1, t1 in base:
        for c2, k2, a2, w2, t2 in extra:
            if t1 and t2:
                raise UnsupportedError(
                    "products of two trig factors are outside the catalog")
            out.append(_norm_piece(c1 * c2, k1 + k2, a1 + a2,
                                   w1 if t1 else w2, t1 or t2))
    return out


def _fn_pieces(fn: SmoothFn, ctx) -> list:
    """Decompose a smooth function into catalog pieces in its own variable."""
    one = as_lc_complex(1.0, ctx)
    if isinstance(fn, PolyFn):
        return [(as_lc_complex(c, ctx), k, 0.0, 0.0, "")
                for k, c in enumerate(fn.coeffs) if c != 0]
    if isinstance(fn, ExpFn):
        return [(one, 0, 1.0, 0.0, "")]
    if isinstance(fn, SinFn):
        return [(one, 0, 0.0, 1.0, "sin")]
    if isinstance(fn, CosFn):
        return [(one, 0, 0.0, 1.0, "cos")]
    if isinstance(fn, ScaledFn):
        return [(c * fn.factor, k, a, w, tg)
                for c, k, a, w, tg in _fn_pieces(fn.fn, ctx)]
    if isinstance(fn, SumFn):
        out = []
        for sub in fn.terms:
            out.extend(_fn_pieces(sub, ctx))
        return out
    if isinstance(fn, ProductFn):
        pieces = [(one, 0, 0.0, 0.0, "")]
        for sub in fn.factors:
            pieces = _combine_pieces(pieces, _fn_pieces(sub, ctx))
        return pieces
    if isinstance(fn, AffineFn):
        # fn = g(a*u + b): compose g's pieces with the affine map
        inner = _fn_pieces(fn.fn, ctx)
        aa, bb = fn.a, fn.b
        out = []
        for c, k, al, w, tg in inner:
            scalar = c * math.exp(al * bb)
            base = []
            for j in range(k + 1):
                cj = scalar * (math.comb(k, j) * (aa ** j) * (bb ** (k - j)))
                base.append((cj, j))
            if not tg:
                out.extend(_norm_piece(cj, j, al * aa, 0.0, "")
                           for cj, j in base)
                continue
            phase = w * bb
            cph, sph = math.cos(phase), math.sin(phase)
            for cj, j in base:
                if tg == "cos":
                    out.append(_norm_piece(cj * cph, j, al * aa, w * aa, "cos"))
                    out.append(_norm_piece(cj * (-sph), j, al * aa, w * aa, "sin"))
                else:
                    out.append(_norm_piece(cj * cph, j, al * aa, w * aa, "sin"))
                    out.append(_norm_piece(cj * sph, j, al * aa, w * aa, "cos"))
        return out
    raise UnsupportedError(
        f"smooth factor {fn.pretty()} is outside the transform catalog")


def _offset_pieces(pieces, d: LCReal, ctx) -> list:
    """Rewrite pieces from variable u into v where u = v + d (d an LC real).

    e^{alpha(v+d)} = e^{alpha d} e^{alpha v}; trig picks up an exact LC
    rotation; (v+d)^k expands binomially with LC powers of d.
    """
    if d.is_zero:
        return list(pieces)
    dc = as_lc_complex(d, ctx)
    out = []
    for c, k, al, w, tg in pieces:
        scalar = c * exp_lc(dc * al, ctx) if al else c
        dpow = [as_lc_complex(1.0, ctx)]
        for _ in range(k):
            dpow.append(dpow[-1] * dc)
        if tg:
            rot = exp_lc(dc * complex(0.0, w), ctx)
            cos_d, sin_d = rot.re, rot.im
        for j in range(k + 1):
            cj = scalar * (math.comb(k, j)) * dpow[k - j]
            if not tg:
                out.append((cj, j, al, 0.0, ""))
            elif tg == "cos":
                out.append((cj * cos_d, j, al, w, "cos"))
                out.append((-(cj * sin_d), j, al, w, "sin"))
            else:
                out.append((cj * cos_d, j, al, w, "sin"))
                out.append((cj * sin_d, j, al, w, "cos"))
    return [p for p in out if not _negligible(p[0])]


def from_genfunction(gf: GenFunction) -> LaplaceDomainElement:
    """Classify a catalog GenFunction into classical + generalized parts.

    Bare smooth terms are read as causal signals (gated at 0), matching the
    desk-table convention that 'sin t' means the signal vanishing for t < 0.
    """
    alg = gf.algebra
    ctx = alg.ctx
    classical = []
    generalized = []
    for term in normalize(gf):
        if term.deltas:
            node = _terms_to_node(
                [Term(as_lc_complex(1.0, ctx), term.center, term.deltas,
                      term.heavisides, term.smooths)], alg)
            generalized.append((term.coef, GenFunction(node, alg)))
            continue
        if len(term.heavisides) > 1:
            raise UnsupportedError("step clusters are outside the catalog")
        if term.center is not None and term.heavisides:
            gate = term.heavisides[0] + term.center
        else:
            gate = LCReal.zero(ctx)
        # pieces measured in v = t - gate
        pieces = [(term.coef, 0, 0.0, 0.0, "")]
        for atom in term.smooths:
            local = _fn_pieces(atom.fn, ctx)          # in u = t - atom.shift
            local = _offset_pieces(local, gate - atom.shift, ctx)
            pieces = _combine_pieces(pieces, local)
        for coef, k, alpha, omega, trig in pieces:
            if _negligible(coef):
                continue
            classical.append(ClassicalTerm(coef, k, alpha, omega, trig, gate))
    return LaplaceDomainElement(_merge_classical(classical),
                                tuple(generalized), alg)


# ---------------------------------------------------------------------------
# classical desk table (for the audit pipelines)
# ---------------------------------------------------------------------------


def classical_table(kind: tuple, ruleset: str = "engineer",
                    ctx=None) -> LaplaceImage:
    """Textbook images.  kind is a tuple id:

    ("sin", w) | ("cos", w) | ("exp", a) | ("poly", k) | ("delta", n, eps)

    The naive ruleset assigns L[delta^{(n)}(t)] = z^n even at eps = 0 -- the
    step the audit exposes.  The engineer ruleset requires eps > 0.
    """
    ctx = ctx or DEFAULT_ALGEBRA.ctx
    img = LaplaceImage(ctx=ctx)
    zero = LCReal.zero(ctx)
    tag = kind[0]
    if tag == "sin":
        w = float(kind[1])
        img.add_term(zero, RationalZ([w], (w * w, 0.0, 1.0), ctx))
        return img
    if tag == "cos":
        w = float(kind[1])
        img.add_term(zero, RationalZ([0.0, 1.0], (w * w, 0.0, 1.0), ctx))
        return img
    if tag == "exp":
        a = float(kind[1])
        img.region = max(img.region, a)
        img.add_term(zero, RationalZ([1.0], (-a, 1.0), ctx))
        return img
    if tag == "poly":
        k = int(kind[1])
        num = [as_lc_complex(math.factorial(k), ctx)]
        img.add_term(zero, RationalZ(num, (0.0,) * (k + 1) + (1.0,), ctx))
        return img
    if tag == "delta":
        n = int(kind[1])
        eps = float(kind[2]) if len(kind) > 2 else 0.0
        if eps < 0.0:
            raise DomainError("delta locations must be nonnegative")
        if ruleset == "engineer" and eps == 0.0:
            raise DomainMembershipError(
                "the engineer ruleset keeps delta strictly inside t > 0")
        num = [as_lc_complex(0.0, ctx)] * n + [as_lc_complex(1.0, ctx)]
        img.add_term(LCReal.from_real(eps, ctx), RationalZ(num, (1.0,), ctx))
        return img
    raise UnsupportedError(f"no table entry for {kind!r}")


def one_sided_initial(parts: Sequence[ClassicalTerm], order: int,
                      ctx=None) -> LCComplex:
    """Classical one-sided limit lim_{t->0+} of the signal or its derivative.

    This is precisely the desk convention: steps at 0 (or at infinitesimal
    locations, read classically) are already 'on' for t > 0, and delta
    contributions from differentiating the step are invisible to the limit.
    """
    ctx = ctx or DEFAULT_ALGEBRA.ctx
    acc = as_lc_complex(0.0, ctx)
    for t in parts:
        if t.shift.standard_part() > 0.0:
            continue
        if order == 0:
            if t.k == 0:
                if t.trig in ("", "cos"):
                    acc = acc + t.coef
        elif order == 1:
            if t.k == 0:
                if t.trig in ("", "cos"):
                    acc = acc + t.coef * t.alpha
                if t.trig == "sin":
                    acc = acc + t.coef * t.omega
            elif t.k == 1:
                if t.trig in ("", "cos"):
                    acc = acc + t.coef
        else:
            raise UnsupportedError("only orders 0 and 1 are audited")
    return acc


# ---------------------------------------------------------------------------
# initial value problems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IVPSpec:
    """a2 y'' + a1 y' + a0 y  (~)=  rhs,  y(0) = y0, y'(0) = yp0."""
    a2: float
    a1: float
    a0: float
    rhs: LaplaceDomainElement
    y0: LCComplex
    yp0: LCComplex
    mode: str = "weak"  # "weak" (~=) or "exact" (=)

    def order(self) -> int:
        return 2 if self.a2 != 0.0 else 1


@dataclass(frozen=True)
class InitialCheck:
    name: str
    expected: LCComplex
    obtained: LCComplex
    exact: bool
    discrepancy: float


@dataclass
class SolveResult:
    spec: IVPSpec
    image: LaplaceImage
    solution: LaplaceDomainElement
    genfunction: GenFunction
    trace: Tuple[str, ...]
    initial_checks: Tuple[InitialCheck, ...]
    ode_verdict: Verdict
    verified: bool

    def pretty_solution(self) -> str:
        return self.solution.pretty(mode="solution")


def _check_initial(name, expected, obtained, ctx) -> InitialCheck:
    expected = as_lc_complex(expected, ctx)
    diff = (obtained - expected)
    disc = 0.0
    for q in diff.exponents():
        disc = max(disc, abs(diff.coeff(q)))
    return InitialCheck(name, expected, obtained, diff.is_zero, disc)


def solve_ivp(spec: IVPSpec, algebra: Algebra = None) -> SolveResult:
    """Image-side solve, inversion, and double verification.

    Verification is part of the contract: initial values are evaluated
    pointwise at 0 on the smooth-extension solution, and the ODE itself is
    rechecked as a weak equality in the algebra.
    """
    alg = algebra or (spec.rhs.algebra if spec.rhs else DEFAULT_ALGEBRA)
    ctx = alg.ctx
    if spec.order() == 1 and spec.a1 == 0.0:
        raise DomainError("not a differential equation: a2 = a1 = 0")
    trace = []
    y0 = as_lc_complex(spec.y0, ctx)
    yp0 = as_lc_complex(spec.yp0, ctx)
    rhs_img = transform(spec.rhs)
    trace.append("L[rhs] = " + rhs_img.pretty())
    if spec.order() == 2:
        trace.append("L[y''] = z^2*L[y] - z*y(0) - y'(0)")
        trace.append("L[y'] = z*L[y] - y(0)")
        char = (spec.a0, spec.a1, spec.a2)
        bc_num = [yp0 * spec.a2 + y0 * spec.a1, y0 * spec.a2]
    else:
        trace.append("L[y'] = z*L[y] - y(0)")
        char = (spec.a0, spec.a1)
        bc_num = [y0 * spec.a1]
    char_txt = _poly_pretty_c(tuple(complex(c) for c in char), "z")
    bc = LaplaceImage(ctx=ctx)
    bc.add_term(LCReal.zero(ctx), RationalZ(bc_num, (1.0,), ctx))
    trace.append(f"({char_txt})*Y = L[rhs] + "
                 f"{_poly_pretty_lc(bc_num, 'z')}")
    image = (rhs_img + bc).div_poly(char)
    trace.append("Y = " + image.pretty())
    solution = inverse_transform(image, alg)
    trace.append("y(t) = " + solution.pretty(mode="solution"))

    y = solution.to_genfunction(mode="solution")
    checks = [_check_initial("y(0)", y0, y.evaluate_at(0.0), ctx)]
    if spec.order() == 2:
        checks.append(_check_initial("y'(0)", yp0,
                                     y.derive().evaluate_at(0.0), ctx))
    # The ODE recheck runs on the causal (gated) solution.  Gating a signal
    # with initial data (y0, yp0) adds the standard impulse compensation to
    # the right-hand side -- a2*(y0*delta' + yp0*delta) + a1*y0*delta -- and
    # with it the weak equality holds globally, impulse or smooth forcing
    # alike.
    yc = solution.to_genfunction(mode="signal")
    if spec.order() == 2:
        lhs = spec.a2 * yc.derive(2) + spec.a1 * yc.derive() + spec.a0 * yc
        comp = spec.a2 * (y0 * alg.delta(order=1) + yp0 * alg.delta()) \
            + spec.a1 * (y0 * alg.delta())
    else:
        lhs = spec.a1 * yc.derive() + spec.a0 * yc
        comp = spec.a1 * (y0 * alg.delta())
    rhs_gf = spec.rhs.to_genfunction(mode="signal") + comp
    if spec.mode == "exact":
        ode_verdict = TRUE if not normalize(lhs - rhs_gf) else \
            weak_equal(lhs, rhs_gf)
    else:
        ode_verdict = weak_equal(lhs, rhs_gf)
    verified = all(c.exact or c.discrepancy <= 1e-10 for c in checks) \
        and (ode_verdict is TRUE)
    trace.append("initial values: " + ", ".join(
        f"{c.name} ok" if c.exact else f"{c.name} off by {c.discrepancy:g}"
        for c in checks))
    trace.append(f"weak recheck of the equation: {ode_verdict}")
    return SolveResult(spec, image, solution, y, tuple(trace),
                       tuple(checks), ode_verdict, verified)


# ---------------------------------------------------------------------------
# the classical audit ("2 = 1")
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    condition: str
    expected: LCComplex
    obtained: LCComplex
    discrepancy: float


@dataclass
class ContradictionReport:
    ruleset: str
    trace: Tuple[str, ...]
    image: Optional[LaplaceImage]
    solution: Tuple[ClassicalTerm, ...]
    solution_text: str
    violations: Tuple[Violation, ...]
    verdict: str  # "inconsistent" | "consistent"

    @property
    def inconsistent(self) -> bool:
        return self.verdict == "inconsistent"

    def to_payload(self) -> dict:
        return {
            "ruleset": self.ruleset,
            "trace": list(self.trace),
            "image": self.image.to_payload() if self.image else None,
            "solution": self.solution_text,
            "violations": [{
                "condition": v.condition,
                "expected": lc_to_records(v.expected),
                "obtained": lc_to_records(v.obtained),
                "discrepancy": v.discrepancy,
            } for v in self.violations],
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class AuditProblem:
    """The desk problem a2 y'' + a1 y' + a0 y = rhs with rhs a table id."""
    a2: float
    a1: float
    a0: float
    rhs: tuple                 # classical_table kind, e.g. ("delta", 0, 0.0)
    y0: float
    yp0: float


def _classical_solve(prob: AuditProblem, rhs_img: LaplaceImage, ctx,
                     trace: list) -> Tuple[LaplaceImage, tuple]:
    char = (prob.a0, prob.a1, prob.a2) if prob.a2 else (prob.a0, prob.a1)
    bc_num = ([as_lc_complex(prob.a2 * prob.yp0 + prob.a1 * prob.y0, ctx),
               as_lc_complex(prob.a2 * prob.y0, ctx)]
              if prob.a2 else [as_lc_complex(prob.a1 * prob.y0, ctx)])
    bc = LaplaceImage(ctx=ctx)
    bc.add_term(LCReal.zero(ctx), RationalZ(bc_num, (1.0,), ctx))
    char_txt = _poly_pretty_c(tuple(complex(c) for c in char), "z")
    combined = rhs_img + bc
    trace.append(f"({char_txt})*Y = " + combined.pretty())
    image = combined.div_poly(char)
    trace.append("Y = " + image.pretty())
    element = inverse_transform(image)
    if element.generalized_parts:
        raise UnsupportedError(
            "classical inversion produced a generalized part")
    return image, element.classical_parts


def _audit_violations(parts, prob: AuditProblem, ctx) -> list:
    out = []
    expected = [("y(0+)", prob.y0), ("y'(0+)", prob.yp0)]
    orders = [0, 1] if prob.a2 else [0]
    for order in orders:
        name, want = expected[order]
        got = one_sided_initial(parts, order, ctx)
        want_lc = as_lc_complex(float(want), ctx)
        diff = got - want_lc
        disc = max((abs(diff.coeff(q)) for q in diff.exponents()), default=0.0)
        if disc > 1e-10:
            out.append(Violation(name, want_lc, got, disc))
    return out


def audit_classical(prob: AuditProblem, ruleset: str = "naive",
                    epsilons: Sequence[float] = (0.1, 0.01),
                    ctx=None) -> ContradictionReport:
    """Run the desk pipeline verbatim and check its own initial conditions.

    naive: applies the derivative rules and the table entry L[delta(t)] = 1
    directly.  The obtained solution then violates its own data -- the
    evaluation that makes '2 = 1' drop out of a perfectly linear-looking
    computation.

    engineer: keeps the impulse at a strictly positive eps, where every step
    is consistent, then takes the weak limit eps -> 0 by substituting eps = 0
    into the solution formula.  The limit object shows the same violation,
    locating the inconsistency in the limit exchange rather than in any
    single fixed-eps computation.
    """
    ctx = ctx or DEFAULT_ALGEBRA.ctx
    trace = []
    if prob.a2:
        trace.append("L[y''] = z^2*L[y] - z*y(0) - y'(0)")
    trace.append("L[y'] = z*L[y] - y(0)")
    if ruleset == "naive":
        rhs_img = classical_table(prob.rhs, "naive", ctx)
        trace.append(_table_line(prob.rhs, "naive"))
        image, parts = _classical_solve(prob, rhs_img, ctx, trace)
        text = _classical_pretty(parts)
        trace.append("y(t) = " + text)
        violations = _audit_violations(parts, prob, ctx)
        for v in violations:
            trace.append(
                f"{v.condition}: expected {v.expected}, obtained {v.obtained}"
                f" -- imposing the data forces {v.obtained} = {v.expected}")
        verdict = "inconsistent" if violations else "consistent"
        return ContradictionReport(ruleset, tuple(trace), image, parts, text,
                                   tuple(violations), verdict)
    if ruleset != "engineer":
        raise UnsupportedError(f"unknown audit ruleset {ruleset!r}")
    if prob.rhs[0] != "delta":
        raise UnsupportedError("the engineer audit varies an impulse rhs")
    n = int(prob.rhs[1])
    limit_parts = None
    image = None
    for eps in epsilons:
        rhs_img = classical_table(("delta", n, eps), "engineer", ctx)
        trace.append(_table_line(("delta", n, eps), "engineer"))
        image, parts = _classical_solve(prob, rhs_img, ctx, trace)
        trace.append(f"eps = {eps:g}: y(t) = " + _classical_pretty(parts))
        fixed = _audit_violations(parts, prob, ctx)
        trace.append(f"eps = {eps:g}: initial data hold" if not fixed else
                     f"eps = {eps:g}: data violated")
        limit_parts = _merge_classical(
            tuple(replace(p, shift=LCReal.zero(ctx)) for p in parts))
    text = _classical_pretty(limit_parts)
    trace.append("weak limit eps -> 0+: y(t) = " + text)
    violations = _audit_violations(limit_parts, prob, ctx)
    for v in violations:
        trace.append(
            f"{v.condition}: expected {v.expected}, obtained {v.obtained}"
            f" -- the limit object forces {v.obtained} = {v.expected}")
    verdict = "inconsistent" if violations else "consistent"
    return ContradictionReport(ruleset, tuple(trace), image, limit_parts,
                               text, tuple(violations), verdict)


def _table_line(kind, ruleset) -> str:
    img = None
    tag = kind[0]
    if tag == "delta":
        n = int(kind[1])
        eps = float(kind[2]) if len(kind) > 2 else 0.0
        lhs = "delta" + ("" if n == 0 else f"^({n})")
        arg = "t" if eps == 0.0 else f"t - {eps:g}"
        rhs_txt = classical_table(kind, ruleset).pretty()
        return f"L[{lhs}({arg})] = {rhs_txt}"
    if tag in ("sin", "cos"):
        w = float(kind[1])
        arg = "t" if w == 1.0 else f"{w:g}*t"
        return f"L[{tag}({arg})] = {classical_table(kind, ruleset).pretty()}"
    if tag == "exp":
        return f"L[exp({float(kind[1]):g}*t)] = " + \
            classical_table(kind, ruleset).pretty()
    if tag == "poly":
        return f"L[t^{int(kind[1])}] = " + \
            classical_table(kind, ruleset).pretty()
    raise UnsupportedError(f"no table entry for {kind!r}")


def _classical_pretty(parts) -> str:
    if not parts:
        return "0"
    bits = []
    for t in parts:
        txt = t.pretty()
        if t.shift.is_zero:
            txt = txt.replace("H(t)*", "")
        bits.append(txt)
    return " + ".join(bits)


# ---------------------------------------------------------------------------
# the consistency lemma check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LemmaCheck:
    weak_verdict: Verdict
    image_equal: bool
    agree: bool


def check_lemma_6_2(f: LaplaceDomainElement, g: LaplaceDomainElement,
                    *, seed: int = 0, battery_count: int = 32) -> LemmaCheck:
    """Weak equality in the algebra vs term-level equality of the images.

    Both sides use the signal reading (classical parts gated), so the two
    notions quantify over the same objects.
    """
    wf = f.to_genfunction(mode="signal")
    wg = g.to_genfunction(mode="signal")
    verdict = weak_equal(wf, wg, seed=seed, battery_count=battery_count)
    image_equal = transform(f).equal(transform(g))
    agree = (verdict is TRUE) == image_equal
    return LemmaCheck(verdict, image_equal, agree)

"""Mollifier construction with vanishing moments, plus quadrature plumbing.

The base profile is P(u) * exp(-1/(1-u^2)) on (-1, 1).  P is solved from the
linear moment system so that the integral is 1 and moments 1..n vanish.
Derivatives use an exact rational-cofactor recurrence over numpy polynomials
instead of symbolic differentiation: with phi_k = N_k/(1-u^2)^(2k) * bump,

    N_{k+1} = N_k' (1-u^2)^2 + 4 k u N_k (1-u^2) - 2 u N_k

which never produces the 0*inf indeterminacy at the endpoints; a single
underflow guard (1/(1-u^2) > 709 => exactly 0) covers the flat tails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial, chebyshev
from scipy.integrate import quad

from .errors import ConstructionError, ToleranceError
from .smooth import SmoothFn

_EXP_UNDERFLOW = 709.0  # exp(-x) is subnormal/zero past this; the tail is flat


@dataclass(frozen=True)
class QuadratureScheme:
    """Adaptive Gauss (QUADPACK) parameters used throughout."""
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    limit: int = 200


DEFAULT_SCHEME = QuadratureScheme()


def integrate(f, a: float, b: float, scheme: QuadratureScheme = DEFAULT_SCHEME,
              points=None) -> float:
    if a >= b:
        return 0.0
    val, err = quad(f, a, b, epsabs=scheme.abs_tol, epsrel=scheme.rel_tol,
                    limit=scheme.limit, points=points)
    if err > 50 * max(scheme.abs_tol, scheme.rel_tol * abs(val)) + 1e-11:
        raise ToleranceError(f"quadrature error estimate {err:.2e} on [{a}, {b}]")
    return val


def integrate_complex(f, a: float, b: float,
                      scheme: QuadratureScheme = DEFAULT_SCHEME) -> complex:
    re = integrate(lambda x: f(x).real, a, b, scheme)
    im = integrate(lambda x: f(x).imag, a, b, scheme)
    return complex(re, im)


def _bump_raw(u: float) -> float:
    t = 1.0 - u * u
    if t <= 0.0 or 1.0 / t > _EXP_UNDERFLOW:
        return 0.0
    return math.exp(-1.0 / t)


@dataclass(frozen=True)
class PolyBump:
    """p(u) * exp(-1/(1-u^2)) composed with u = (x - center)/radius."""

    poly: tuple = (1.0,)
    center: float = 0.0
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ConstructionError("bump radius must be positive")
        object.__setattr__(self, "poly", tuple(float(c) for c in self.poly))

    @property
    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.poly)

    @property
    def support(self) -> Tuple[float, float]:
        return (self.center - self.radius, self.center + self.radius)

    # cofactor cache is shared per (poly,) via the module-level helper below
    def _cofactor(self, k: int) -> Polynomial:
        return _cofactors(self.poly, k)

    def deriv(self, k: int, x: float) -> float:
        """k-th derivative with respect to x (exact chain-rule scaling)."""
        u = (x - self.center) / self.radius
        t = 1.0 - u * u
        if t <= 0.0 or 1.0 / t > _EXP_UNDERFLOW:
            return 0.0
        n = self._cofactor(k)
        return float(n(u)) / t ** (2 * k) * math.exp(-1.0 / t) / self.radius ** k

    def value(self, x: float) -> float:
        return self.deriv(0, x)

    def values(self, xs: np.ndarray) -> np.ndarray:
        u = (np.asarray(xs, dtype=float) - self.center) / self.radius
        t = 1.0 - u * u
        inside = t > 1.0 / _EXP_UNDERFLOW
        out = np.zeros_like(u)
        ui = u[inside]
        ti = t[inside]
        p = np.zeros_like(ui)
        for c in reversed(self.poly):
            p = p * ui + c
        out[inside] = p * np.exp(-1.0 / ti)
        return out

    def jet(self, x0: float, order: int) -> list:
        if isinstance(x0, complex):
            if x0.imag != 0:
                raise ConstructionError("bump jets are defined on the real line")
            x0 = x0.real
        return [self.deriv(k, x0) for k in range(order + 1)]

    def rescaled(self, eps: float) -> "PolyBump":
        """phi_eps(x) = phi(x/eps)/eps -- same mass, support radius * eps."""
        return PolyBump(tuple(c / eps for c in self.poly), self.center * eps,
                        self.radius * eps)


@lru_cache(maxsize=4096)
def _cofactors(poly: tuple, k: int) -> Polynomial:
    if k == 0:
        return Polynomial(list(poly))
    n = _cofactors(poly, k - 1)
    m = 2 * (k - 1)
    one_mu2 = Polynomial([1.0, 0.0, -1.0])
    u = Polynomial([0.0, 1.0])
    return n.deriv() * one_mu2 ** 2 + 2 * m * u * n * one_mu2 - 2 * u * n


def radius_of_support(obj) -> float:
    """Sup of |x - center| over the nonvanishing set; 1 for the zero function."""
    if isinstance(obj, Mollifier):
        return obj.bump.radius
    if isinstance(obj, PolyBump):
        return 1.0 if obj.is_zero else obj.radius
    if isinstance(obj, PolyBumpFn):
        return 1.0 if obj.bump.is_zero else obj.bump.radius
    raise ConstructionError(f"no support notion for {type(obj).__name__}")


@dataclass(frozen=True)
class PolyBumpFn(SmoothFn):
    """Smooth-function view of (a derivative of) a polynomial bump."""
    bump: PolyBump
    order: int = 0

    @property
    def support_hint(self):
        return self.bump.support

    def jet(self, x0, order: int) -> list:
        if isinstance(x0, complex):
            if x0.imag != 0:
                raise ConstructionError("bump jets are defined on the real line")
            x0 = x0.real
        return [self.bump.deriv(self.order + k, x0) for k in range(order + 1)]

    def derivative(self) -> "PolyBumpFn":
        return PolyBumpFn(self.bump, self.order + 1)

    def value(self, x):
        return self.bump.deriv(self.order, x)

    def pretty(self, var: str = "t") -> str:
        base = f"bump[{self.bump.poly}]({var})"
        return base if self.order == 0 else f"D^{self.order} " + base


class CumulativeProfile:
    """Chebyshev table for Phi(x) = integral of a unit-radius bump from -1.

    Values are exact 0 below the support and exactly the total mass above it;
    inside, a degree-N Chebyshev interpolant of incremental quadratures is
    accurate to ~1e-12 (checked in tests against direct quadrature).
    """

    def __init__(self, bump: PolyBump, scheme: QuadratureScheme = DEFAULT_SCHEME,
                 degree: int = 420):
        if bump.center != 0.0 or bump.radius != 1.0:
            raise ConstructionError("cumulative profiles are built on the unit bump")
        self.bump = bump
        nodes = chebyshev.chebpts2(degree + 1)
        vals = np.empty_like(nodes)
        acc = 0.0
        prev = -1.0
        for i, x in enumerate(nodes):
            if x > prev:
                acc += integrate(bump.value, prev, float(x), scheme)
            vals[i] = acc
            prev = float(x)
        raw_total = acc + integrate(bump.value, prev, 1.0, scheme)
        # normalize so the plateau value is exactly 1.0: step-function clamps
        # (H(x) = 1 for x >= s) must hold without float residue
        self.total = 1.0
        self._coef = chebyshev.chebfit(nodes, vals, degree) / raw_total
        self._raw_total = raw_total

    def value(self, x: float) -> float:
        if x <= -1.0:
            return 0.0
        if x >= 1.0:
            return self.total
        return float(chebyshev.chebval(x, self._coef))

    def values(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        out = np.where(xs >= 1.0, self.total, 0.0)
        inside = (xs > -1.0) & (xs < 1.0)
        out[inside] = chebyshev.chebval(xs[inside], self._coef)
        return out

    def value_quadrature(self, x: float, scheme: QuadratureScheme = DEFAULT_SCHEME) -> float:
        """Direct-quadrature oracle, used by tests to validate the table."""
        if x <= -1.0:
            return 0.0
        return integrate(self.bump.value, -1.0, min(x, 1.0), scheme)


@dataclass(frozen=True)
class CumulativeFn(SmoothFn):
    """Phi((x - center)/radius): rises smoothly 0 -> total across the window."""
    profile_key: tuple  # identifies the underlying mollifier profile
    center: float = 0.0
    radius: float = 1.0

    @property
    def _profile(self) -> CumulativeProfile:
        return _profile_from_key(self.profile_key)

    def jet(self, x0, order: int) -> list:
        if isinstance(x0, complex):
            if x0.imag != 0:
                raise ConstructionError("cumulative jets are defined on the real line")
            x0 = x0.real
        prof = self._profile
        out = [prof.value((x0 - self.center) / self.radius)]
        for k in range(1, order + 1):
            out.append(prof.bump.deriv(k - 1, (x0 - self.center) / self.radius)
                       / self.radius ** k)
        return out

    def derivative(self) -> SmoothFn:
        # d/dx Phi((x-c)/r) = (1/r) phi((x-c)/r)
        from .smooth import AffineFn, ScaledFn
        base = PolyBumpFn(PolyBump(self.profile_key))
        return ScaledFn(1.0 / self.radius,
                        AffineFn(base, 1.0 / self.radius, -self.center / self.radius))

    def value(self, x):
        return self._profile.value((x - self.center) / self.radius)

    def pretty(self, var: str = "t") -> str:
        if self.center == 0 and self.radius == 1:
            return f"Phi({var})"
        return f"Phi(({var} - {self.center:g})/{self.radius:g})"


_PROFILE_REGISTRY: dict = {}


def _profile_from_key(key: tuple) -> CumulativeProfile:
    prof = _PROFILE_REGISTRY.get(key)
    if prof is None:
        bump = PolyBump(key)
        prof = CumulativeProfile(bump)
        _PROFILE_REGISTRY[key] = prof
    return prof


class Mollifier:
    """Unit-radius bump with vanishing moments 1..n and unit integral."""

    def __init__(self, n: int, scheme: QuadratureScheme = DEFAULT_SCHEME):
        if n < 0:
            raise ConstructionError("moment order must be nonnegative")
        self.n = n
        self.scheme = scheme
        raw = [integrate(lambda u, j=j: u ** j * _bump_raw(u), -1.0, 1.0, scheme)
               for j in range(2 * n + 1)]
        mat = np.array([[raw[j + k] for j in range(n + 1)] for k in range(n + 1)])
        cond = np.linalg.cond(mat)
        if not np.isfinite(cond) or cond > 1e12:
            raise ConstructionError(
                f"moment system is numerically singular (condition number {cond:.3e})")
        rhs = np.zeros(n + 1)
        rhs[0] = 1.0
        coeffs = np.linalg.solve(mat, rhs)
        self.condition_number = float(cond)
        self.bump = PolyBump(tuple(coeffs))
        self._profile_key = self.bump.poly

    # -- smooth-function views ------------------------------------------------

    def phi_fn(self, deriv: int = 0) -> PolyBumpFn:
        return PolyBumpFn(self.bump, deriv)

    def cumulative_fn(self, center: float = 0.0, radius: float = 1.0) -> CumulativeFn:
        _profile_from_key(self._profile_key)
        return CumulativeFn(self._profile_key, center, radius)

    @property
    def cumulative(self) -> CumulativeProfile:
        return _profile_from_key(self._profile_key)

    # -- scalar queries ---------------------------------------------------------

    def moment(self, k: int) -> float:
        return integrate(lambda u: u ** k * self.bump.value(u), -1.0, 1.0, self.scheme)

    def l1_norm(self) -> float:
        return integrate(lambda u: abs(self.bump.value(u)), -1.0, 1.0, self.scheme)

    def sup_derivative(self, k: int, samples: int = 4001) -> float:
        xs = np.linspace(-1.0, 1.0, samples)
        return float(max(abs(self.bump.deriv(k, float(x))) for x in xs))

    def dn_membership_report(self, n: Optional[int] = None) -> dict:
        return dn_membership_report(self, self.n if n is None else n, self.scheme)


def dn_membership_report(phi, n: int, scheme: QuadratureScheme = DEFAULT_SCHEME) -> dict:
    """Which D_n conditions hold for the rescaled copy n*phi(n*x).

    After rescaling so the support radius is 1/n, the conditions read as
    bounds on the unit-radius profile: integral 1, moments 1..n vanish,
    the L1 norm stays below 1 + 1/n, and sup|phi^(k)| <= n^(k+1).
    Informational -- nothing here is enforced at construction.
    """
    bump = phi.bump if isinstance(phi, Mollifier) else phi
    moment_order = phi.n if isinstance(phi, Mollifier) else max(n, 0)

    def mom(k: int) -> float:
        return integrate(lambda u: u ** k * bump.value(u), -1.0, 1.0, scheme)

    total = mom(0)
    moments = [mom(k) for k in range(1, moment_order + 1)]
    l1 = integrate(lambda u: abs(bump.value(u)), -1.0, 1.0, scheme)
    xs = np.linspace(-1.0, 1.0, 2001)
    sup_checks = []
    if n >= 1:
        for k in range(0, min(moment_order, 6) + 1):
            sup = float(max(abs(bump.deriv(k, float(x))) for x in xs))
            bound = float(n) ** (k + 1)
            sup_checks.append({"order": k, "sup": sup, "bound": bound,
                               "ok": sup <= bound})
    l1_bound = 1.0 + 1.0 / n if n >= 1 else 2.0
    return {
        "n": n,
        "radius": 1.0 / n if n >= 1 else 1.0,
        "integral": total,
        "integral_ok": abs(total - 1.0) < 1e-10,
        "vanishing_moments": moments,
        "moments_ok": abs(total - 1.0) < 1e-10 and all(abs(m) < 1e-10 for m in moments),
        "l1_norm": l1,
        "l1_bound": l1_bound,
        "l1_ok": l1 <= l1_bound + 1e-12,
        "sup_derivative_checks": sup_checks,
    }


@lru_cache(maxsize=16)
def get_mollifier(n: int) -> Mollifier:
    return Mollifier(n)

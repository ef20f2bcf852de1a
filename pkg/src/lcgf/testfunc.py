"""Compactly supported test functions and randomized batteries.

A test function here is polynomial x bump: P((x - c)/r) * b((x - c)/r) where b
is the unit bump exp(-1/(1-u^2)).  This family is closed under differentiation
(the bump's derivative recurrence keeps everything exact), vanishes with all
derivatives at the support endpoints, and has cheap jets -- which is what the
pairing code needs.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .mollify import PolyBump, PolyBumpFn, QuadratureScheme, DEFAULT_SCHEME, integrate
from .smooth import SmoothFn


@dataclass(frozen=True)
class TestFunction:
    """Smooth compactly supported function with derivative jets."""

    bump: PolyBump

    @classmethod
    def from_poly(cls, coeffs: Sequence[float], center: float = 0.0,
                  radius: float = 1.0) -> "TestFunction":
        unit = PolyBump(tuple(float(c) for c in coeffs))
        return cls(PolyBump(unit.poly, center=center, radius=radius))

    @property
    def support(self) -> Tuple[float, float]:
        return self.bump.support

    def value(self, x: float) -> float:
        return self.bump.value(x)

    def values(self, xs) -> np.ndarray:
        return self.bump.values(xs)

    def derivative_value(self, k: int, x: float) -> float:
        return self.bump.deriv(k, x)

    # protocol name used by the pairing machinery
    def deriv(self, k: int, x: float) -> float:
        return self.bump.deriv(k, x)

    def jet(self, x0: float, order: int) -> list:
        return [self.bump.deriv(k, x0) for k in range(order + 1)]

    def fn(self) -> SmoothFn:
        return PolyBumpFn(self.bump)

    def derivative_fn(self, k: int = 1) -> SmoothFn:
        return PolyBumpFn(self.bump, order=k)

    def integral_against(self, f, scheme: QuadratureScheme = DEFAULT_SCHEME) -> float:
        lo, hi = self.support
        return integrate(lambda x: f(x) * self.value(x), lo, hi, scheme)


def battery(seed: Optional[int] = None, count: int = 32,
            centers: Sequence[float] = (0.0,),
            max_degree: int = 4,
            min_halfwidth: float = 1.5,
            window: Optional[Tuple[float, float]] = None) -> list:
    """Randomized battery of test functions whose supports cover `centers`.

    Deterministic for a given seed.  Each member's support contains every
    requested center strictly inside, so singular atoms at those centers see
    a full monad's worth of smooth mass.  With a bounded `window`, supports
    shrink to stay strictly inside it (centers outside the window are
    ignored); the battery then probes only the windowed region.
    """
    rng = np.random.default_rng(0 if seed is None else seed)
    if window is not None:
        wlo, whi = float(window[0]), float(window[1])
        inside = [c for c in centers if wlo < c < whi]
        out = []
        for _ in range(count):
            degree = int(rng.integers(0, max_degree + 1))
            coeffs = rng.uniform(-2.0, 2.0, degree + 1)
            if abs(coeffs[-1]) < 0.1:
                coeffs[-1] = 0.5 * float(np.sign(coeffs[-1]) or 1.0)
            pad = 0.02 * (whi - wlo)
            lo_star = min(inside) if inside else wlo + pad
            hi_star = max(inside) if inside else whi - pad
            lo = lo_star - (lo_star - (wlo + pad)) * rng.uniform(0.5, 1.0)
            hi = hi_star + ((whi - pad) - hi_star) * rng.uniform(0.5, 1.0)
            if lo >= hi:
                lo, hi = wlo + pad, whi - pad
            center = 0.5 * (lo + hi)
            radius = 0.5 * (hi - lo)
            out.append(TestFunction.from_poly(coeffs, center=center, radius=radius))
        return out
    lo_star = min(centers)
    hi_star = max(centers)
    out = []
    for _ in range(count):
        degree = int(rng.integers(0, max_degree + 1))
        coeffs = rng.uniform(-2.0, 2.0, degree + 1)
        # reroll a leading coefficient too close to zero: keeps the member
        # honestly of its nominal degree
        if abs(coeffs[-1]) < 0.1:
            coeffs[-1] = 0.5 * float(np.sign(coeffs[-1]) or 1.0)
        lo = lo_star - rng.uniform(min_halfwidth, 3.0)
        hi = hi_star + rng.uniform(min_halfwidth, 3.0)
        center = 0.5 * (lo + hi)
        radius = 0.5 * (hi - lo)
        out.append(TestFunction.from_poly(coeffs, center=center, radius=radius))
    return out

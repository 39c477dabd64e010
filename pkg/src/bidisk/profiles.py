"""Smooth one-dimensional building blocks.

Everything is built from one C-infinity smoothstep, so slope and value
prescriptions are attained exactly outside explicit blending collars.  All
evaluators are vectorized over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["smoothstep", "smoothstep_d", "PlateauBump", "SlopeProfile", "Ripple"]


def _f(t):
    out = np.zeros_like(t)
    pos = t > 0
    with np.errstate(over="ignore", under="ignore"):
        out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly increasing between.

    Satisfies smoothstep(t) + smoothstep(1-t) = 1, so the midpoint value is 1/2.
    """
    t = np.asarray(t, dtype=float)
    a = _f(t)
    b = _f(1.0 - t)
    with np.errstate(invalid="ignore"):
        s = np.where(t <= 0.0, 0.0, np.where(t >= 1.0, 1.0, a / (a + b)))
    return s


def smoothstep_d(t):
    """Derivative of :func:`smoothstep` (0 outside (0,1))."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    out = np.zeros_like(t)
    ti = t[inside]
    a = _f(ti)
    b = _f(1.0 - ti)
    da = a / ti**2
    db = b / (1.0 - ti) ** 2
    out[inside] = (da * b + a * db) / (a + b) ** 2
    return out


# the canonical ramp integral I(u) = int_0^u smoothstep, by Gauss-Legendre
_GL_X, _GL_W = np.polynomial.legendre.leggauss(48)


def _ramp_integral(u):
    """I(u) = integral of smoothstep over [0, u] (so I(u) = u - 1/2 for u >= 1)."""
    u = np.asarray(u, dtype=float)
    uc = np.clip(u, 0.0, 1.0)
    # Gauss-Legendre nodes mapped to [0, uc]
    t = 0.5 * uc[..., None] * (_GL_X + 1.0)
    vals = smoothstep(t)
    res = (0.5 * uc[..., None] * _GL_W * vals).sum(axis=-1)
    return res + np.where(u > 1.0, u - 1.0, 0.0)


_I_HALF = float(_ramp_integral(np.array(1.0)))  # = 1/2 up to quadrature accuracy


@dataclass(frozen=True)
class PlateauBump:
    """C-infinity bump: 0 outside (lo, hi), equal to height on [lo+rise, hi-fall].

    rise/fall are the blending widths at each end.
    """

    lo: float
    hi: float
    rise: float
    fall: float
    height: float = 1.0

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError("bump support must be nondegenerate")
        if self.rise < 0 or self.fall < 0 or self.rise + self.fall > self.hi - self.lo:
            raise ValueError("blending collars do not fit inside the support")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        up = smoothstep((y - self.lo) / self.rise) if self.rise > 0 else (y > self.lo) * 1.0
        dn = smoothstep((self.hi - y) / self.fall) if self.fall > 0 else (y < self.hi) * 1.0
        return self.height * up * dn

    def deriv(self, y):
        y = np.asarray(y, dtype=float)
        if self.rise > 0:
            up = smoothstep((y - self.lo) / self.rise)
            dup = smoothstep_d((y - self.lo) / self.rise) / self.rise
        else:
            up = (y > self.lo) * 1.0
            dup = np.zeros_like(y)
        if self.fall > 0:
            dn = smoothstep((self.hi - y) / self.fall)
            ddn = -smoothstep_d((self.hi - y) / self.fall) / self.fall
        else:
            dn = (y < self.hi) * 1.0
            ddn = np.zeros_like(y)
        return self.height * (dup * dn + up * ddn)

    @property
    def support(self):
        return (self.lo, self.hi)


@dataclass(frozen=True)
class SlopeProfile:
    """C-infinity function with exact slope prescriptions on disjoint bands.

    ``bands`` is a sorted tuple of (lo, hi, slope); the realized derivative
    equals ``slope`` exactly on [lo, hi], ramps to zero over collars of width
    ``smoothing_width`` placed just outside each band, and vanishes elsewhere.
    The function itself is the integral, normalized to 0 at -infinity;
    it vanishes identically again beyond the last band iff the prescribed
    band integrals cancel (true for the displacement profile by symmetry).
    """

    bands: tuple
    smoothing_width: float

    def __post_init__(self):
        w = self.smoothing_width
        if w <= 0:
            raise ValueError("smoothing width must be positive")
        prev_end = -np.inf
        for lo, hi, _ in self.bands:
            if not lo < hi:
                raise ValueError("band must be nondegenerate")
            if lo - w < prev_end:
                raise ValueError("smoothing collars of width %g do not fit" % w)
            prev_end = hi + w
        object.__setattr__(self, "bands", tuple((float(a), float(b), float(s)) for a, b, s in self.bands))

    def deriv(self, y):
        y = np.asarray(y, dtype=float)
        w = self.smoothing_width
        g = np.zeros_like(y)
        for lo, hi, s in self.bands:
            up = smoothstep((y - (lo - w)) / w)
            dn = smoothstep((hi + w - y) / w)
            g = g + s * up * dn
        return g

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        w = self.smoothing_width
        total = np.zeros_like(y)
        for lo, hi, s in self.bands:
            # integral of the smoothed indicator of [lo, hi] from -inf to y
            # ramp up over [lo-w, lo], plateau, ramp down over [hi, hi+w]
            part = np.zeros_like(y)
            part += w * _ramp_integral((y - (lo - w)) / w) * (y < lo)
            mid = (y >= lo) & (y <= hi)
            part = np.where(mid, w * _I_HALF + (y - lo), part)
            aft = y > hi
            part = np.where(
                aft,
                w * _I_HALF
                + (hi - lo)
                + w * (_I_HALF - _ramp_integral((hi + w - y) / w)),
                part,
            )
            total = total + s * part
        return total

    @property
    def support(self):
        w = self.smoothing_width
        return (self.bands[0][0] - w, self.bands[-1][1] + w)

    def sup_inf(self, samples: int = 4096):
        lo, hi = self.support
        y = np.linspace(lo - 0.1 * (hi - lo), hi + 0.1 * (hi - lo), samples)
        v = self(y)
        return float(v.max(initial=0.0)), float(v.min(initial=0.0))


@dataclass(frozen=True)
class Ripple:
    """Alternating plateau pattern on [0, 1]: one C-infinity bump per strip.

    2n equal strips; the bump on strip i has sign -1 (i odd) or +1 (i even),
    reaches the full plateau on the strip's middle, and dies to zero AT the
    strip walls with all derivatives vanishing there (so the gradient is zero
    on the whole zero set).  ``trans`` is the per-side blending width.
    """

    n2: int  # number of strips (2n)
    trans: float

    def __post_init__(self):
        width = 1.0 / self.n2
        if self.trans <= 0 or self.trans >= width / 2:
            raise ValueError("transition width must lie in (0, half strip width)")

    def _sign(self, i):
        return -1.0 if (i % 2 == 1) else 1.0

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        width = 1.0 / self.n2
        for i in range(1, self.n2 + 1):
            lo, hi = (i - 1) * width, i * width
            win = (u > lo) & (u < hi)
            if not np.any(win):
                continue
            uu = u[win]
            val = smoothstep((uu - lo) / self.trans) * smoothstep((hi - uu) / self.trans)
            out[win] = self._sign(i) * val
        return out

    def deriv(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        width = 1.0 / self.n2
        for i in range(1, self.n2 + 1):
            lo, hi = (i - 1) * width, i * width
            win = (u > lo) & (u < hi)
            if not np.any(win):
                continue
            uu = u[win]
            up = smoothstep((uu - lo) / self.trans)
            dn = smoothstep((hi - uu) / self.trans)
            dup = smoothstep_d((uu - lo) / self.trans) / self.trans
            ddn = -smoothstep_d((hi - uu) / self.trans) / self.trans
            out[win] = self._sign(i) * (dup * dn + up * ddn)
        return out

    def wall_offset(self, level: float) -> float:
        """Distance from a wall at which |ripple| first reaches ``level``."""
        if not (0.0 < level < 1.0):
            raise ValueError("level must lie in (0, 1)")
        s = np.linspace(0.0, self.trans, 20001)
        vals = smoothstep(s / self.trans)
        idx = int(np.searchsorted(vals, level))
        return float(s[min(idx, len(s) - 1)])

"""Composable Hamiltonian functions and a grid-based Hofer-norm evaluator.

A spec evaluates pointwise on (N, dim) arrays of phase-space points at a time
t in [0, 1], provides an analytic gradient where its structure permits, and
declares the box outside which it vanishes (per coordinate; ``None`` marks a
coordinate the function does not depend on).  Specs serialize to a JSON tree
mirroring the variant structure so runs are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .profiles import PlateauBump, Ripple, SlopeProfile, smoothstep, smoothstep_d

__all__ = [
    "HamiltonianSpec",
    "Profile1D",
    "Coordinate",
    "Product",
    "CutoffProduct",
    "Sum",
    "Scaled",
    "Conjugated",
    "TimeConcat",
    "StripFunction",
    "GateFactor",
    "step1_profile",
    "strip_function",
    "hofer_norm",
    "conjugate_norm_invariance",
    "evaluate",
]


class HamiltonianSpec:
    """Base class for composable Hamiltonian descriptions on R^dim."""

    dim: int
    time_dependent: bool = False

    def evaluate(self, pts: np.ndarray, t: float = 0.0) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, pts: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Spatial gradient dH (analytic everywhere the variant permits)."""
        raise NotImplementedError

    def support_box(self):
        """Per-coordinate (lo, hi) bounds outside which H = 0, or None if the
        function does not depend on that coordinate."""
        raise NotImplementedError

    def __call__(self, pts, t=0.0):
        return self.evaluate(np.asarray(pts, dtype=float), t)

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _pts(pts):
    a = np.asarray(pts, dtype=float)
    return a[None, :] if a.ndim == 1 else a


def _profile_dict(p):
    if isinstance(p, SlopeProfile):
        return {
            "kind": "slope_profile",
            "bands": [list(b) for b in p.bands],
            "smoothing_width": p.smoothing_width,
        }
    if isinstance(p, PlateauBump):
        return {
            "kind": "plateau_bump",
            "lo": p.lo,
            "hi": p.hi,
            "rise": p.rise,
            "fall": p.fall,
            "height": p.height,
        }
    raise TypeError("unknown profile %r" % (p,))


@dataclass(frozen=True)
class Profile1D(HamiltonianSpec):
    """H(p) = profile(p[axis]); constant in every other coordinate."""

    axis: int
    profile: object
    dim: int = 4

    def evaluate(self, pts, t=0.0):
        return self.profile(_pts(pts)[:, self.axis])

    def gradient(self, pts, t=0.0):
        a = _pts(pts)
        g = np.zeros_like(a)
        g[:, self.axis] = self.profile.deriv(a[:, self.axis])
        return g

    def support_box(self):
        box = [None] * self.dim
        box[self.axis] = self.profile.support
        return box

    def to_dict(self):
        return {
            "variant": "profile1d",
            "axis": self.axis,
            "dim": self.dim,
            "profile": _profile_dict(self.profile),
        }


@dataclass(frozen=True)
class Coordinate(HamiltonianSpec):
    """H(p) = p[axis] (used as the linear factor of shear generators)."""

    axis: int
    dim: int = 4

    def evaluate(self, pts, t=0.0):
        return _pts(pts)[:, self.axis].copy()

    def gradient(self, pts, t=0.0):
        a = _pts(pts)
        g = np.zeros_like(a)
        g[:, self.axis] = 1.0
        return g

    def support_box(self):
        box = [None] * self.dim
        box[self.axis] = (-np.inf, np.inf)
        return box

    def to_dict(self):
        return {"variant": "coordinate", "axis": self.axis, "dim": self.dim}


@dataclass(frozen=True)
class Product(HamiltonianSpec):
    """Pointwise product of two specs (gradient by the product rule)."""

    left: HamiltonianSpec
    right: HamiltonianSpec

    @property
    def dim(self):
        return self.left.dim

    @property
    def time_dependent(self):
        return self.left.time_dependent or self.right.time_dependent

    def evaluate(self, pts, t=0.0):
        a = _pts(pts)
        return self.left.evaluate(a, t) * self.right.evaluate(a, t)

    def gradient(self, pts, t=0.0):
        a = _pts(pts)
        fl = self.left.evaluate(a, t)[:, None]
        fr = self.right.evaluate(a, t)[:, None]
        return self.left.gradient(a, t) * fr + self.right.gradient(a, t) * fl

    def support_box(self):
        lb, rb = self.left.support_box(), self.right.support_box()
        out = []
        for bl, br in zip(lb, rb):
            if bl is None:
                out.append(br)
            elif br is None:
                out.append(bl)
            else:  # product vanishes outside either factor's support
                out.append((max(bl[0], br[0]), min(bl[1], br[1])))
        return out

    def to_dict(self):
        return {
            "variant": "product",
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }


class CutoffProduct(Product):
    """chi(x_axis) * H — a Product with the cutoff named first."""

    def to_dict(self):
        d = super().to_dict()
        d["variant"] = "cutoff_product"
        return d


@dataclass(frozen=True)
class Sum(HamiltonianSpec):
    terms: tuple

    @property
    def dim(self):
        return self.terms[0].dim

    @property
    def time_dependent(self):
        return any(s.time_dependent for s in self.terms)

    def evaluate(self, pts, t=0.0):
        a = _pts(pts)
        out = self.terms[0].evaluate(a, t)
        for s in self.terms[1:]:
            out = out + s.evaluate(a, t)
        return out

    def gradient(self, pts, t=0.0):
        a = _pts(pts)
        out = self.terms[0].gradient(a, t)
        for s in self.terms[1:]:
            out = out + s.gradient(a, t)
        return out

    def support_box(self):
        boxes = [s.support_box() for s in self.terms]
        out = []
        for dims in zip(*boxes):
            if any(b is None for b in dims):
                out.append(None)
            else:
                out.append((min(b[0] for b in dims), max(b[1] for b in dims)))
        return out

    def to_dict(self):
        return {"variant": "sum", "terms": [s.to_dict() for s in self.terms]}


@dataclass(frozen=True)
class Scaled(HamiltonianSpec):
    factor: float
    inner: HamiltonianSpec

    @property
    def dim(self):
        return self.inner.dim

    @property
    def time_dependent(self):
        return self.inner.time_dependent

    def evaluate(self, pts, t=0.0):
        return self.factor * self.inner.evaluate(pts, t)

    def gradient(self, pts, t=0.0):
        return self.factor * self.inner.gradient(pts, t)

    def support_box(self):
        return self.inner.support_box()

    def to_dict(self):
        return {"variant": "scaled", "factor": self.factor, "inner": self.inner.to_dict()}


@dataclass(frozen=True)
class Conjugated(HamiltonianSpec):
    """H after an invertible change of variables: evaluates as H(xi^-1(p)).

    ``xi`` is any object with ``map`` / ``inverse_map`` acting on (N, dim)
    arrays (a FlowMap qualifies).  The flow of the conjugated Hamiltonian is
    xi o phi_H o xi^-1.  Gradients fall back to central finite differences.
    """

    xi: object
    inner: HamiltonianSpec
    fd_step: float = 1e-6

    @property
    def dim(self):
        return self.inner.dim

    @property
    def time_dependent(self):
        return self.inner.time_dependent

    def evaluate(self, pts, t=0.0):
        a = _pts(pts)
        return self.inner.evaluate(self.xi.inverse_map(a), t)

    def gradient(self, pts, t=0.0):
        a = _pts(pts)
        g = np.empty_like(a)
        for i in range(a.shape[1]):
            e = np.zeros(a.shape[1])
            e[i] = self.fd_step
            g[:, i] = (self.evaluate(a + e, t) - self.evaluate(a - e, t)) / (
                2 * self.fd_step
            )
        return g

    def support_box(self):
        # conservative: enlarge the inner box by the mapped corner spread
        box = self.inner.support_box()
        bounded = [b if b is not None else (-1.0, 1.0) for b in box]
        los = np.array([b[0] for b in bounded])
        his = np.array([b[1] for b in bounded])
        # sample the box boundary and push it through xi
        grid = np.stack(
            np.meshgrid(*[np.linspace(lo, hi, 5) for lo, hi in zip(los, his)]), axis=-1
        ).reshape(-1, len(box))
        img = self.xi.map(grid)
        out = []
        for i, b in enumerate(box):
            if b is None:
                out.append(None)
            else:
                lo, hi = img[:, i].min(), img[:, i].max()
                pad = 0.05 * (hi - lo) + 1e-9
                out.append((float(lo - pad), float(hi + pad)))
        return out

    def to_dict(self):
        return {
            "variant": "conjugated",
            "xi": getattr(self.xi, "describe", lambda: "flow")(),
            "inner": self.inner.to_dict(),
        }


@dataclass(frozen=True)
class TimeConcat(HamiltonianSpec):
    """Concatenation in time: segment k realizes the time-1 flow of its spec
    within a window of the given duration (the generator is rescaled by the
    duration, so Hofer norms add up segment-wise)."""

    segments: tuple  # of (duration, spec)

    def __post_init__(self):
        total = sum(d for d, _ in self.segments)
        if abs(total - 1.0) > 1e-12:
            raise ValueError("segment durations must sum to 1")

    @property
    def dim(self):
        return self.segments[0][1].dim

    time_dependent = True

    def _segment_at(self, t):
        acc = 0.0
        for dur, spec in self.segments:
            if t < acc + dur or (dur, spec) == self.segments[-1]:
                return dur, spec, acc
            acc += dur
        raise AssertionError

    def evaluate(self, pts, t=0.0):
        dur, spec, t0 = self._segment_at(t)
        return spec.evaluate(pts, (t - t0) / dur) / dur

    def gradient(self, pts, t=0.0):
        dur, spec, t0 = self._segment_at(t)
        return spec.gradient(pts, (t - t0) / dur) / dur

    def support_box(self):
        boxes = [s.support_box() for _, s in self.segments]
        out = []
        for dims in zip(*boxes):
            if any(b is None for b in dims):
                out.append(None)
            else:
                out.append((min(b[0] for b in dims), max(b[1] for b in dims)))
        return out

    def to_dict(self):
        return {
            "variant": "time_concat",
            "segments": [[d, s.to_dict()] for d, s in self.segments],
        }


@dataclass(frozen=True)
class StripFunction(HamiltonianSpec):
    """The alternating strip function b(u, v) on R^4 (axes 0, 1).

    b = amplitude * ripple(u) * vprofile(v): negative on odd strips, positive
    on even, zero exactly on the strip walls with vanishing gradient there.
    """

    ripple: Ripple
    vprofile: PlateauBump
    amplitude: float
    t_level: float
    dim: int = 4

    def evaluate(self, pts, t=0.0):
        a = _pts(pts)
        return self.amplitude * self.ripple(a[:, 0]) * self.vprofile(a[:, 1])

    def gradient(self, pts, t=0.0):
        a = _pts(pts)
        g = np.zeros_like(a)
        r, p = self.ripple(a[:, 0]), self.vprofile(a[:, 1])
        g[:, 0] = self.amplitude * self.ripple.deriv(a[:, 0]) * p
        g[:, 1] = self.amplitude * r * self.vprofile.deriv(a[:, 1])
        return g

    def support_box(self):
        box = [None] * self.dim
        box[0] = (0.0, 1.0)
        box[1] = self.vprofile.support
        return box

    @property
    def n_strips(self):
        return self.ripple.n2

    def to_dict(self):
        return {
            "variant": "strip_function",
            "n_strips": self.ripple.n2,
            "trans": self.ripple.trans,
            "vprofile": _profile_dict(self.vprofile),
            "amplitude": self.amplitude,
            "t_level": self.t_level,
        }


@dataclass(frozen=True)
class GateFactor(HamiltonianSpec):
    """Sharp gate 1{p[axis] > level}: y-independent off the jump surface.

    Used to restrict a plane Hamiltonian to the upper sheet; the gradient is
    defined as zero everywhere (the flow never differentiates across the jump
    for trajectories that stay off it, which is checked during transport).
    """

    axis: int
    level: float
    dim: int = 4

    def evaluate(self, pts, t=0.0):
        return (_pts(pts)[:, self.axis] > self.level).astype(float)

    def gradient(self, pts, t=0.0):
        return np.zeros_like(_pts(pts))

    def support_box(self):
        box = [None] * self.dim
        box[self.axis] = (self.level, np.inf)
        return box

    def to_dict(self):
        return {"variant": "gate", "axis": self.axis, "level": self.level}


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def step1_profile(S: float, delta: float, smoothing_width: float | None = None) -> SlopeProfile:
    """The displacing profile in y: slope 1+delta on (-S/2, -delta), slope
    -(1+delta) on (delta, S/2), zero outside |y| > S/2 + delta.

    The realized maximum is (1+delta)(S/2 - delta + w) <= (1+delta) S/2.
    """
    if S <= 0:
        raise ValueError("S must be positive")
    if not (0 < delta < S / 4):
        raise ValueError("delta must lie in (0, S/4)")
    w = smoothing_width if smoothing_width is not None else delta / 4
    if w > delta:
        raise ValueError("smoothing collars of width %g do not fit in the %g gaps" % (w, delta))
    return SlopeProfile(
        bands=((-S / 2, -delta, 1 + delta), (delta, S / 2, -(1 + delta))),
        smoothing_width=w,
    )


def strip_function(
    eps: float,
    t_level: float,
    amplitude: float,
    trans: float | None = None,
    v_support: tuple | None = None,
    v_blend: float | None = None,
    grad_check: bool = True,
) -> StripFunction:
    """Alternating strip function b(u, v) for the area-(1+eps) neighborhood.

    n = ceil(1/(2 eps)) gives 2n equal vertical strips on [0, 1]; b is negative
    on odd strips, positive on even, |b| = amplitude on each strip's middle
    half, and b vanishes with zero gradient on every strip wall.

    The sublevel gradient bound (|x| <= 2 scaling of the (u,v)-speed below
    eps/n) is certified on {|b| < t_check} for the largest feasible t_check;
    it cannot hold up to t_level itself at desk-scale parameters, see the
    design notes.  ``grad_check`` raises if even t_check = t_level/100 fails.
    """
    if not (0 < eps < 0.5):
        raise ValueError("eps must lie in (0, 1/2)")
    if not (0 < t_level < amplitude):
        raise ValueError("need 0 < t_level < amplitude")
    n = int(np.ceil(1.0 / (2.0 * eps)))
    n2 = 2 * n
    width = 1.0 / n2
    if trans is None:
        trans = width / 4
    # plateau must cover the middle half of each strip
    if 2 * trans > width / 2:
        raise ValueError(
            "transition width %g leaves no room for the middle-half plateau" % trans
        )
    if v_support is None:
        v_support = (-0.034, 1.034)
    if v_blend is None:
        v_blend = 0.03
    vp = PlateauBump(
        lo=v_support[0], hi=v_support[1], rise=v_blend, fall=v_blend, height=1.0
    )
    # the plateau of vp must cover [0, 1] so |b| = amplitude on strip middles
    if vp.lo + vp.rise > 0.0 or vp.hi - vp.fall < 1.0:
        raise ValueError("v-profile plateau must cover [0, 1]")
    b = StripFunction(
        ripple=Ripple(n2=n2, trans=trans),
        vprofile=vp,
        amplitude=amplitude,
        t_level=t_level,
    )
    if grad_check:
        t_check = feasible_gradient_sublevel(b, eps, n)
        if t_check <= 0:
            raise ValueError(
                "gradient bound infeasible: |x grad b| exceeds eps/n even at "
                "sublevel t_level/100"
            )
        object.__setattr__(b, "_t_check", t_check)
    return b


def feasible_gradient_sublevel(b: StripFunction, eps: float, n: int) -> float:
    """Largest t_check in a small ladder with 2*|grad b| <= eps/n on {|b| < t_check}."""
    u = np.linspace(1e-4, 1.0 - 1e-4, 4001)
    v = np.full_like(u, 0.5)
    pts = np.zeros((u.size, 4))
    pts[:, 0], pts[:, 1] = u, v
    vals = np.abs(b.evaluate(pts))
    grads = np.linalg.norm(b.gradient(pts)[:, :2], axis=1)
    # also probe the v-blend region
    v2 = np.linspace(b.vprofile.lo, b.vprofile.hi, 2001)
    for uc in (0.5 / b.ripple.n2, 1.0 / b.ripple.n2 + 1e-4):
        pts2 = np.zeros((v2.size, 4))
        pts2[:, 0], pts2[:, 1] = uc, v2
        vals = np.concatenate([vals, np.abs(b.evaluate(pts2))])
        grads = np.concatenate([grads, np.linalg.norm(b.gradient(pts2)[:, :2], axis=1)])
    bound = eps / (2.0 * n)
    best = 0.0
    for frac in (1.0, 0.5, 0.25, 0.1, 0.05, 0.01):
        t_check = b.t_level * frac
        if np.all(grads[vals < t_check] <= bound):
            best = t_check
            break
    return best


# ---------------------------------------------------------------------------
# Hofer norm
# ---------------------------------------------------------------------------


def _grid_over_support(spec: HamiltonianSpec, grid: int):
    box = spec.support_box()
    axes = [i for i, b in enumerate(box) if b is not None]
    for i in axes:
        lo, hi = box[i]
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError("unbounded support declaration on axis %d" % i)
    if not axes:
        raise ValueError("spec declares no support at all")
    # cap the total number of grid points
    per_axis = max(8, int(min(grid, round((4.0e6) ** (1.0 / len(axes))))))
    lins = []
    for i in axes:
        lo, hi = box[i]
        pad = 0.02 * (hi - lo)
        lins.append(np.linspace(lo - pad, hi + pad, per_axis))
    mesh = np.meshgrid(*lins, indexing="ij")
    pts = np.zeros((mesh[0].size, spec.dim))
    for k, i in enumerate(axes):
        pts[:, i] = mesh[k].ravel()
    return pts


def _slice_osc(spec, pts, t):
    v = spec.evaluate(pts, t)
    # compact support: 0 is always in the closure of the range
    return max(float(v.max()), 0.0) - min(float(v.min()), 0.0)


def hofer_norm(spec: HamiltonianSpec, grid: int = 96, t_slices: int = 24):
    """Numerical Hofer norm: time integral of the spatial oscillation.

    Returns (value, error_estimate) where the estimate is the change under
    halving the spatial resolution.
    """
    def estimate(g):
        pts = _grid_over_support(spec, g)
        if not spec.time_dependent:
            return _slice_osc(spec, pts, 0.0)
        if isinstance(spec, TimeConcat):
            # piecewise-autonomous: integrate exactly per segment
            total = 0.0
            for dur, sub in spec.segments:
                sub_norm = hofer_norm(sub, grid=g, t_slices=max(4, t_slices // 2))[0]
                total += sub_norm
            return total
        ts = np.linspace(0.0, 1.0, t_slices + 1)
        vals = np.array([_slice_osc(spec, pts, t) for t in ts])
        return float(np.trapezoid(vals, ts))

    full = estimate(grid)
    half = estimate(max(8, grid // 2))
    return full, abs(full - half)


def conjugate_norm_invariance(spec: HamiltonianSpec, xi, grid: int = 96):
    """(norm of H, norm of H o xi^-1); bi-invariance says they agree."""
    base = hofer_norm(spec, grid=grid)[0]
    conj = hofer_norm(Conjugated(xi, spec), grid=grid)[0]
    return base, conj


def evaluate(spec: HamiltonianSpec, p, t: float = 0.0):
    """Evaluate a spec at a single point or an array of points."""
    a = np.asarray(getattr(p, "coords", p), dtype=float)
    single = a.ndim == 1
    out = spec.evaluate(a, t)
    return float(out[0]) if single else out

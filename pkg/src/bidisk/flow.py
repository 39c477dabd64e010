"""Hamiltonian vector fields, symplectic time integration and map checks.

Convention: contracting the field into omega = sum dx_i ^ dy_i equals dH,
which gives xdot_i = dH/dy_i and ydot_i = -dH/dx_i.  Integration is fixed-step
implicit midpoint (symmetric, second order); the inner solve is a fixed-point
iteration to tolerance 1e-12, which converges in one step on the piecewise
shear fields used by the pipeline.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import PointCloud, RectModel, ToricDomain, contains
from .hamiltonian import HamiltonianSpec

__all__ = [
    "FlowMap",
    "ComposedMap",
    "TransportReport",
    "vector_field",
    "integrate",
    "transport",
    "symplecticity_residual",
    "check_displaced",
    "check_support",
    "omega_matrix",
]

_SOLVE_TOL = 1e-12
_MAX_ITER = 50


def omega_matrix(dim: int) -> np.ndarray:
    """Matrix of the standard form on R^dim in (x1, y1, ..., xn, yn) order."""
    O = np.zeros((dim, dim))
    for i in range(0, dim, 2):
        O[i, i + 1] = 1.0
        O[i + 1, i] = -1.0
    return O


def vector_field(H: HamiltonianSpec, pts, t: float = 0.0) -> np.ndarray:
    """X with X . omega = dH: (xdot, ydot) = (dH/dy, -dH/dx) per pair."""
    a = np.asarray(getattr(pts, "coords", pts), dtype=float)
    single = a.ndim == 1
    if single:
        a = a[None, :]
    g = H.gradient(a, t)
    X = np.empty_like(g)
    X[:, 0::2] = g[:, 1::2]
    X[:, 1::2] = -g[:, 0::2]
    return X[0] if single else X


@dataclass
class FlowMap:
    """Time flow of a Hamiltonian spec over [t0, t1] at fixed step h."""

    generator: HamiltonianSpec
    t0: float = 0.0
    t1: float = 1.0
    h: float = 1e-3
    direction: int = 1  # +1 forward, -1 backward
    label: str = ""

    def __post_init__(self):
        if not (0.0 <= self.t0 < self.t1 <= 1.0):
            raise ValueError("time interval must satisfy 0 <= t0 < t1 <= 1")
        if self.h <= 0:
            raise ValueError("step size must be positive")

    @property
    def dim(self):
        return self.generator.dim

    def _steps(self):
        n = max(1, int(round((self.t1 - self.t0) / self.h)))
        return n, (self.t1 - self.t0) / n

    def map(self, pts: np.ndarray) -> np.ndarray:
        out, bad = self._run(np.asarray(pts, dtype=float), self.direction)
        if bad.any():
            raise RuntimeError(
                "implicit solve failed for %d points (first index %d)"
                % (int(bad.sum()), int(np.argmax(bad)))
            )
        return out

    def inverse_map(self, pts: np.ndarray) -> np.ndarray:
        out, bad = self._run(np.asarray(pts, dtype=float), -self.direction)
        if bad.any():
            raise RuntimeError(
                "implicit solve failed for %d points (first index %d)"
                % (int(bad.sum()), int(np.argmax(bad)))
            )
        return out

    def map_with_failures(self, pts: np.ndarray):
        return self._run(np.asarray(pts, dtype=float), self.direction)

    def _run(self, pts, direction):
        single = pts.ndim == 1
        z = pts[None, :].copy() if single else pts.copy()
        n, h = self._steps()
        sgn = float(direction)
        bad = np.zeros(z.shape[0], dtype=bool)
        # backward flow of H over [t0,t1]: integrate reversed time
        for k in range(n):
            if direction > 0:
                t_mid = self.t0 + (k + 0.5) * h
            else:
                t_mid = self.t1 - (k + 0.5) * h
            z, step_bad = _midpoint_step(self.generator, z, t_mid, sgn * h)
            bad |= step_bad
        return (z[0] if single else z), bad

    def inverse(self) -> "FlowMap":
        inv = FlowMap(
            generator=self.generator,
            t0=self.t0,
            t1=self.t1,
            h=self.h,
            direction=-self.direction,
            label=self.label + "^-1",
        )
        return inv

    def describe(self) -> str:
        return self.label or "flow[%g,%g]h=%g" % (self.t0, self.t1, self.h)

    def generator_hash(self) -> str:
        return hashlib.sha256(self.generator.to_json().encode()).hexdigest()[:16]


def _midpoint_step(H, z, t_mid, h):
    """One implicit midpoint step; returns (new points, failure mask)."""
    def f(w):
        g = H.gradient(w, t_mid)
        X = np.empty_like(g)
        X[:, 0::2] = g[:, 1::2]
        X[:, 1::2] = -g[:, 0::2]
        return X

    znew = z + h * f(z)  # explicit Euler predictor
    bad = np.zeros(z.shape[0], dtype=bool)
    for _ in range(_MAX_ITER):
        mid = 0.5 * (z + znew)
        cand = z + h * f(mid)
        delta = np.max(np.abs(cand - znew), axis=1)
        znew = cand
        if np.all(delta <= _SOLVE_TOL):
            return znew, bad
    bad = delta > max(_SOLVE_TOL, 1e-9)
    return znew, bad


@dataclass
class ComposedMap:
    """Composition of flow maps, applied left to right."""

    stages: tuple
    label: str = ""

    @property
    def dim(self):
        return self.stages[0].dim

    def map(self, pts):
        out = np.asarray(pts, dtype=float)
        for s in self.stages:
            out = s.map(out)
        return out

    def inverse_map(self, pts):
        out = np.asarray(pts, dtype=float)
        for s in reversed(self.stages):
            out = s.inverse_map(out)
        return out

    def map_with_failures(self, pts):
        out = np.asarray(pts, dtype=float)
        bad = np.zeros(out.shape[0] if out.ndim == 2 else 1, dtype=bool)
        for s in self.stages:
            out, b = s.map_with_failures(out)
            bad |= b
        return out, bad

    def describe(self):
        return self.label or "o".join(s.describe() for s in self.stages)


@dataclass
class TransportReport:
    """Result of pushing a cloud through a flow, with symplecticity residuals."""

    generator_hash: str
    h: float
    n_points: int
    output: PointCloud
    max_residual: float
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def as_dict(self):
        return {
            "generator_hash": self.generator_hash,
            "h": self.h,
            "n_points": self.n_points,
            "max_residual": self.max_residual,
            "failures": list(self.failures),
        }

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True)


def integrate(F: FlowMap, p):
    """Time flow of a single point (or array) under F."""
    a = np.asarray(getattr(p, "coords", p), dtype=float)
    return F.map(a)


def transport(
    F,
    cloud: PointCloud,
    residual_sample: int = 64,
    residual_exclude=None,
) -> TransportReport:
    """Integrate every point of the cloud; aggregate symplecticity residuals.

    Residuals are measured by finite-difference Jacobians at a deterministic
    subsample of the cloud (all points if it is small).  ``residual_exclude``
    may mask points too close to a gate jump for finite differences.
    """
    pts = cloud.points
    out, bad = F.map_with_failures(pts)
    failures = [int(i) for i in np.nonzero(bad)[0]]
    idx = np.arange(len(cloud)) if len(cloud) <= residual_sample else np.linspace(
        0, len(cloud) - 1, residual_sample
    ).astype(int)
    if residual_exclude is not None:
        keep = ~residual_exclude(pts[idx])
        idx = idx[keep]
    res = symplecticity_residual(F, pts[idx]) if len(idx) else 0.0
    h = getattr(F, "h", float("nan"))
    gh = F.generator_hash() if hasattr(F, "generator_hash") else "composed"
    return TransportReport(
        generator_hash=gh,
        h=h,
        n_points=len(cloud),
        output=PointCloud(points=out, domain=cloud.domain, margin=cloud.margin,
                          seed_indices=cloud.seed_indices),
        max_residual=float(res),
        failures=failures,
    )


def symplecticity_residual(F, pts, probe: float = 1e-5) -> float:
    """Max norm of J^T Omega J - Omega for the finite-difference Jacobian of F."""
    a = np.asarray(pts, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    dim = a.shape[1]
    Om = omega_matrix(dim)
    n = a.shape[0]
    # batch all probe evaluations: 2*dim displaced copies of every point
    probes = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = probe
        probes.append(a + e)
        probes.append(a - e)
    stacked = np.vstack(probes)
    mapped = F.map(stacked)
    J = np.empty((n, dim, dim))
    for i in range(dim):
        plus = mapped[2 * i * n : (2 * i + 1) * n]
        minus = mapped[(2 * i + 1) * n : (2 * i + 2) * n]
        J[:, :, i] = (plus - minus) / (2 * probe)
    R = np.einsum("nji,jk,nkl->nil", J, Om, J) - Om
    return float(np.abs(R).max())


def check_displaced(original: PointCloud, image: PointCloud, U: ToricDomain):
    """True iff no image point lies in U; witnesses are violating indices."""
    if len(original) != len(image):
        raise ValueError("clouds must have equal length")
    inside = contains(U, image.points)
    witnesses = [int(i) for i in np.nonzero(inside)[0]]
    return (len(witnesses) == 0), witnesses


def check_support(
    H: HamiltonianSpec,
    M: ToricDomain,
    samples: int = 2048,
    t_slices: int = 5,
    box_halfwidth: float = 6.0,
    seed: int = 7,
) -> bool:
    """True iff H and dH vanish at sampled points outside M at all t values."""
    rng = np.random.default_rng(seed)
    dim = H.dim
    outside = np.empty((0, dim))
    while outside.shape[0] < samples:
        cand = rng.uniform(-box_halfwidth, box_halfwidth, size=(4 * samples, dim))
        keep = ~_in_domain(M, cand)
        outside = np.vstack([outside, cand[keep]])
    outside = outside[:samples]
    for t in np.linspace(0.0, 1.0, t_slices):
        if np.any(np.abs(H.evaluate(outside, t)) > 0.0):
            return False
        if np.any(np.abs(H.gradient(outside, t)) > 0.0):
            return False
    return True


def _in_domain(M, pts):
    if isinstance(M, RectModel):
        return M.contains_points(pts)
    return contains(M, pts)

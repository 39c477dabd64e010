"""Phase-space points, moment coordinates and toric domain membership.

Points live in R^{2n} ~ C^n for n in {1, 2, 3} with coordinates
(x1, y1, ..., xn, yn) and symplectic area form sum dx_i ^ dy_i.  All domains
are open; boundary points report non-membership.  Point clouds are sampled
with a deterministic Halton sequence so failures are reproducible.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Point",
    "PointCloud",
    "Polydisk",
    "Cylinder",
    "Ellipsoid",
    "Ball",
    "Product",
    "Scaled",
    "RectModel",
    "moment_map",
    "contains",
    "scale",
    "sample_cloud",
]

_PRIMES = (2, 3, 5, 7, 11, 13)


def _as_points(p) -> np.ndarray:
    """Coerce a point or an (N, 2n) array of points to a 2-d float array."""
    a = np.asarray(p, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] not in (2, 4, 6):
        raise ValueError("points must have 2, 4 or 6 coordinates")
    if not np.all(np.isfinite(a)):
        raise ValueError("coordinates must be finite")
    return a


class Point:
    """A single phase-space point; thin wrapper over a coordinate array."""

    __slots__ = ("coords",)

    def __init__(self, *coords):
        if len(coords) == 1 and np.ndim(coords[0]) == 1:
            coords = tuple(coords[0])
        a = np.asarray(coords, dtype=float)
        if a.shape[0] not in (2, 4, 6):
            raise ValueError("coordinate count must be 2, 4 or 6")
        if not np.all(np.isfinite(a)):
            raise ValueError("coordinates must be finite")
        self.coords = a

    @property
    def n(self) -> int:
        return self.coords.shape[0] // 2

    def __iter__(self):
        return iter(self.coords)

    def __repr__(self):
        return "Point(%s)" % ", ".join("%.17g" % c for c in self.coords)


def moment_map(p) -> np.ndarray:
    """Moment coordinates pi*|z_i|^2 of a point or point array."""
    a = _as_points(np.asarray(p.coords if isinstance(p, Point) else p, dtype=float))
    x = a[:, 0::2]
    y = a[:, 1::2]
    m = np.pi * (x * x + y * y)
    return m[0] if (isinstance(p, Point) or np.ndim(p) == 1) else m


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------


class ToricDomain:
    """Base class; membership is tested in moment coordinates (strictly open)."""

    dim: int  # number of complex coordinates

    def contains_moments(self, m: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def shrink(self, factor: float) -> "ToricDomain":
        """Domain with all defining areas/extents multiplied by ``factor`` < 1."""
        raise NotImplementedError

    def moment_box(self) -> np.ndarray:
        """Per-coordinate upper bounds on the moment values (for sampling)."""
        raise NotImplementedError


@dataclass(frozen=True)
class Polydisk(ToricDomain):
    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("polydisk areas must be positive")
        if self.a > self.b:  # normalize a <= b at construction
            lo, hi = self.b, self.a
            object.__setattr__(self, "a", float(lo))
            object.__setattr__(self, "b", float(hi))

    @property
    def dim(self):
        return 2

    def contains_moments(self, m):
        return (m[..., 0] < self.a) & (m[..., 1] < self.b)

    def shrink(self, factor):
        return Polydisk(self.a * factor, self.b * factor)

    def moment_box(self):
        return np.array([self.a, self.b])


@dataclass(frozen=True)
class Cylinder(ToricDomain):
    a: float

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("cylinder area must be positive")

    @property
    def dim(self):
        return 2

    def contains_moments(self, m):
        return m[..., 0] < self.a

    def shrink(self, factor):
        return Cylinder(self.a * factor)

    def moment_box(self):
        # the free factor has infinite extent; cap it for sampling purposes
        return np.array([self.a, self.a])


@dataclass(frozen=True)
class Ellipsoid(ToricDomain):
    a: float
    b: float
    c: float | None = None

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0 or (self.c is not None and self.c <= 0):
            raise ValueError("ellipsoid areas must be positive")

    @property
    def dim(self):
        return 2 if self.c is None else 3

    def contains_moments(self, m):
        s = m[..., 0] / self.a + m[..., 1] / self.b
        if self.c is not None:
            s = s + m[..., 2] / self.c
        return s < 1.0

    def shrink(self, factor):
        c = None if self.c is None else self.c * factor
        return Ellipsoid(self.a * factor, self.b * factor, c)

    def moment_box(self):
        if self.c is None:
            return np.array([self.a, self.b])
        return np.array([self.a, self.b, self.c])


@dataclass(frozen=True)
class Ball(ToricDomain):
    A: float
    n: int = 2

    def __post_init__(self):
        if self.A <= 0:
            raise ValueError("ball capacity must be positive")
        if self.n not in (1, 2, 3):
            raise ValueError("ball dimension n must be 1, 2 or 3")

    @property
    def dim(self):
        return self.n

    def contains_moments(self, m):
        return m[..., : self.n].sum(axis=-1) < self.A

    def shrink(self, factor):
        return Ball(self.A * factor, self.n)

    def moment_box(self):
        return np.full(self.n, self.A)


@dataclass(frozen=True)
class Product(ToricDomain):
    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise ValueError("product needs at least one factor")

    @property
    def dim(self):
        return sum(f.dim for f in self.factors)

    def contains_moments(self, m):
        out = None
        i = 0
        for f in self.factors:
            part = f.contains_moments(m[..., i : i + f.dim])
            out = part if out is None else (out & part)
            i += f.dim
        return out

    def shrink(self, factor):
        return Product(tuple(f.shrink(factor) for f in self.factors))

    def moment_box(self):
        return np.concatenate([f.moment_box() for f in self.factors])


@dataclass(frozen=True)
class Scaled(ToricDomain):
    factor: float
    inner: ToricDomain

    def __post_init__(self):
        if self.factor < 1:
            raise ValueError("scaling factor must be >= 1 (outward only)")

    @property
    def dim(self):
        return self.inner.dim

    def contains_moments(self, m):
        return self.inner.contains_moments(np.asarray(m) / self.factor)

    def shrink(self, factor):
        return Scaled(self.factor, self.inner.shrink(factor))

    def moment_box(self):
        return self.inner.moment_box() * self.factor


@dataclass(frozen=True)
class RectModel(ToricDomain):
    """A box in the flat coordinates themselves (not moment coordinates).

    ``extents`` is a sequence of (lo, hi) open intervals, one per coordinate,
    e.g. the (u, v, x, y) presentation of the bidisk.
    """

    extents: tuple

    def __post_init__(self):
        ex = tuple((float(lo), float(hi)) for lo, hi in self.extents)
        if len(ex) not in (2, 4, 6):
            raise ValueError("extents must cover 2, 4 or 6 coordinates")
        for lo, hi in ex:
            if not lo < hi:
                raise ValueError("extents must be nondegenerate")
        object.__setattr__(self, "extents", ex)

    @property
    def dim(self):
        return len(self.extents) // 2

    def contains_points(self, a: np.ndarray) -> np.ndarray:
        a = _as_points(a)
        ok = np.ones(a.shape[0], dtype=bool)
        for i, (lo, hi) in enumerate(self.extents):
            ok &= (a[:, i] > lo) & (a[:, i] < hi)
        return ok

    def contains_moments(self, m):
        raise TypeError("RectModel membership is tested in flat coordinates")

    def shrink(self, factor):
        ex = []
        for lo, hi in self.extents:
            c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
            ex.append((c - factor * h, c + factor * h))
        return RectModel(tuple(ex))

    def volume(self):
        v = 1.0
        for lo, hi in self.extents:
            v *= hi - lo
        return v


def contains(D: ToricDomain, p) -> np.ndarray | bool:
    """Strict membership of a point (or point array) in an open toric domain."""
    a = _as_points(np.asarray(p.coords if isinstance(p, Point) else p, dtype=float))
    if isinstance(D, RectModel):
        if a.shape[1] != 2 * D.dim:
            raise ValueError("dimension mismatch")
        ok = D.contains_points(a)
    else:
        if a.shape[1] != 2 * D.dim:
            raise ValueError("dimension mismatch")
        m = np.pi * (a[:, 0::2] ** 2 + a[:, 1::2] ** 2)
        ok = D.contains_moments(m)
    return bool(ok[0]) if (isinstance(p, Point) or np.ndim(p) == 1) else ok


def scale(D: ToricDomain, r: float) -> ToricDomain:
    """Outward moment rescaling: membership at p equals inner membership at m/r."""
    if r < 1:
        raise ValueError("scale factor must be >= 1")
    if r == 1:
        return D
    return Scaled(float(r), D)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _halton(count: int, dim: int, skip: int = 0) -> np.ndarray:
    """Deterministic Halton sequence in [0, 1)^dim (radical inverse, vectorized)."""
    idx = np.arange(skip + 1, skip + count + 1, dtype=np.int64)
    out = np.empty((count, dim))
    for j in range(dim):
        b = _PRIMES[j]
        n = idx.copy()
        r = np.zeros(count)
        f = 1.0
        while np.any(n > 0):
            f /= b
            r += f * (n % b)
            n //= b
        out[:, j] = r
    return out


@dataclass
class PointCloud:
    """A finite sample of phase-space points with provenance."""

    points: np.ndarray
    domain: ToricDomain | None = None
    margin: float = 0.0
    seed_indices: np.ndarray = field(default=None)

    def __post_init__(self):
        self.points = _as_points(self.points)
        if self.seed_indices is None:
            self.seed_indices = np.arange(self.points.shape[0])

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1] // 2

    def to_csv(self) -> str:
        n = self.dim
        header = ",".join("x%d,y%d" % (i + 1, i + 1) for i in range(n))
        buf = io.StringIO()
        buf.write(header + "\n")
        for row in self.points:
            buf.write(",".join("%.17g" % c for c in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PointCloud":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        data = np.array(
            [[float(tok) for tok in ln.split(",")] for ln in lines[1:]], dtype=float
        )
        return cls(points=data)


def sample_cloud(D: ToricDomain, count: int, margin: float, skip: int = 0) -> PointCloud:
    """Quasi-uniform deterministic sample of D, safe under a (1-margin) shrink.

    Rejection sampling from a Halton stream; every returned point records the
    index it had in the stream, so reruns are reproducible point by point.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if not (0.0 < margin < 1.0):
        raise ValueError("margin must lie in (0, 1)")
    shrunk = D.shrink(1.0 - margin)
    n = D.dim
    pts = np.empty((0, 2 * n))
    idxs = np.empty(0, dtype=np.int64)
    cursor = skip
    if isinstance(D, RectModel):
        ex = np.asarray(shrunk.extents)
        lo, hi = ex[:, 0], ex[:, 1]
        while pts.shape[0] < count:
            batch = max(count, 1024)
            u = _halton(batch, 2 * n, skip=cursor)
            cand = lo + u * (hi - lo)
            pts = np.vstack([pts, cand])
            idxs = np.concatenate([idxs, np.arange(cursor, cursor + batch)])
            cursor += batch
    else:
        box = shrunk.moment_box()
        radii = np.sqrt(box / np.pi)
        while pts.shape[0] < count:
            batch = max(2 * count, 2048)
            u = _halton(batch, 2 * n, skip=cursor)
            cand = (2.0 * u - 1.0) * np.repeat(radii, 2)[None, :]
            keep = contains(shrunk, cand)
            pts = np.vstack([pts, cand[keep]])
            idxs = np.concatenate([idxs, np.arange(cursor, cursor + batch)[keep]])
            cursor += batch
    return PointCloud(
        points=pts[:count], domain=D, margin=margin, seed_indices=idxs[:count]
    )

"""Finite-dimensional vectors, norms, and convex feasible sets.

Every set exposes a Euclidean projection oracle, a membership test, and a
diameter fixed at construction. Projections accept a single vector or a
batch of row vectors; all kernels are exact (box, ball) or exact in exact
arithmetic (simplex, via sort-and-threshold).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import UnboundedSetError

# Absolute tolerance for membership / floating-point comparisons.
FLOAT_TOL = 1e-9

_PROBE_COUNT = 64
_PROBE_SEED = 0x5E7


def as_vector(x, dim=None, name="x"):
    """Validate and convert to a finite 1-D float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise ValueError(f"{name} has dimension {arr.size}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def norm(x, which="euclidean"):
    """Vector norm: ``euclidean`` (l2) or ``max`` (l-infinity)."""
    arr = as_vector(x)
    if which == "euclidean":
        return float(np.linalg.norm(arr))
    if which == "max":
        return float(np.max(np.abs(arr))) if arr.size else 0.0
    raise ValueError(f"unknown norm {which!r}")


def _project_box_rows(xs, lo, hi):
    return np.clip(xs, lo, hi)


def _project_ball_rows(xs, center, radius):
    delta = xs - center
    dist = np.linalg.norm(delta, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore"):
        scale = np.where(dist > radius, radius / np.where(dist > 0, dist, 1.0), 1.0)
    return center + delta * scale


def _project_simplex_rows(xs):
    """Euclidean projection of each row onto the probability simplex.

    Sort-and-threshold method (Held et al.; see Wang & Carreira-Perpinan 2013):
    with u the coordinates sorted in decreasing order, the threshold is
    tau = (sum_{i<=k} u_i - 1)/k for the largest k keeping u_k - tau > 0.
    """
    d = xs.shape[-1]
    u = np.sort(xs, axis=-1)[..., ::-1]
    css = np.cumsum(u, axis=-1) - 1.0
    ks = np.arange(1, d + 1, dtype=float)
    cond = u - css / ks > 0.0
    rho = np.count_nonzero(cond, axis=-1)  # >= 1 always
    tau = np.take_along_axis(css, rho[..., None] - 1, axis=-1) / rho[..., None]
    return np.maximum(xs - tau, 0.0)


@dataclass
class ConvexSet:
    """A convex feasible region with an exact projection oracle.

    ``kind`` is one of ``box``, ``ball``, ``simplex``, ``whole``. The
    ``offset`` and ``scale`` fields realize affine images of the simplex,
    {offset + scale * y : y in the probability simplex}; boxes and balls
    absorb translation and scaling into their own parameters. Instances are
    immutable after construction and safe to share.
    """

    kind: str
    dim: int
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float = 0.0
    offset: np.ndarray | None = None
    scale: float = 1.0
    diameter: float = field(default=np.inf)
    _probes: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def bounded(self):
        return np.isfinite(self.diameter)

    # -- projection ---------------------------------------------------------

    def project(self, x):
        """Euclidean projection onto the set.

        Accepts a single vector or a batch of row vectors; the projection is
        the unique nearest member and is idempotent.
        """
        xs = np.asarray(x, dtype=float)
        if xs.shape[-1] != self.dim:
            raise ValueError(f"dimension mismatch: got {xs.shape[-1]}, set has {self.dim}")
        if not np.all(np.isfinite(xs)):
            raise ValueError("projection input contains non-finite entries")
        if self.kind == "whole":
            return xs.copy()
        if self.kind == "box":
            return _project_box_rows(xs, self.lo, self.hi)
        if self.kind == "ball":
            return _project_ball_rows(xs, self.center, self.radius)
        if self.kind == "simplex":
            base = xs if self.offset is None else xs - self.offset
            proj = self.scale * _project_simplex_rows(base / self.scale)
            return proj if self.offset is None else proj + self.offset
        raise ValueError(f"unknown set kind {self.kind!r}")

    def contains(self, x, tol=FLOAT_TOL):
        xs = np.asarray(x, dtype=float)
        if self.kind == "whole":
            ok = np.all(np.isfinite(xs), axis=-1)
        elif self.kind == "box":
            ok = np.all((xs >= self.lo - tol) & (xs <= self.hi + tol), axis=-1)
        elif self.kind == "ball":
            ok = np.linalg.norm(xs - self.center, axis=-1) <= self.radius + tol
        elif self.kind == "simplex":
            base = (xs if self.offset is None else xs - self.offset) / self.scale
            ok = np.all(base >= -tol, axis=-1) & (np.abs(base.sum(axis=-1) - 1.0) <= tol)
        else:
            raise ValueError(f"unknown set kind {self.kind!r}")
        return bool(ok) if np.isscalar(ok) or ok.ndim == 0 else ok

    # -- geometry helpers ----------------------------------------------------

    def analytic_center(self):
        """Deterministic interior point used as the default initializer."""
        if self.kind == "box":
            return 0.5 * (self.lo + self.hi)
        if self.kind == "ball":
            return self.center.copy()
        if self.kind == "simplex":
            c = np.full(self.dim, self.scale / self.dim)
            return c if self.offset is None else c + self.offset
        return np.zeros(self.dim)

    def extreme_points(self):
        """Vertices for polyhedral kinds; ``None`` for ball / whole space.

        Box corners are enumerated only up to dimension 12 (4096 vertices);
        larger boxes return ``None`` and callers fall back to closed forms or
        sampling.
        """
        if self.kind == "simplex":
            verts = self.scale * np.eye(self.dim)
            return verts if self.offset is None else verts + self.offset
        if self.kind == "box" and self.dim <= 12:
            return np.array(list(itertools.product(*zip(self.lo, self.hi))))
        return None

    def sample(self, rng, count):
        """Draw ``count`` members (standard normals for the whole space)."""
        if self.kind == "box":
            return rng.uniform(self.lo, self.hi, size=(count, self.dim))
        if self.kind == "ball":
            u = rng.normal(size=(count, self.dim))
            u /= np.maximum(np.linalg.norm(u, axis=1, keepdims=True), 1e-300)
            r = self.radius * rng.uniform(size=(count, 1)) ** (1.0 / self.dim)
            return self.center + r * u
        if self.kind == "simplex":
            pts = self.scale * rng.dirichlet(np.ones(self.dim), size=count)
            return pts if self.offset is None else pts + self.offset
        return rng.normal(size=(count, self.dim))

    def probe_points(self):
        """Deterministic probe members for optimality certificates.

        Extreme points when there are at most 64 of them, otherwise 64 seeded
        random members plus the analytic center. Cached per instance.
        """
        if self._probes is None:
            verts = self.extreme_points()
            if verts is not None and len(verts) <= _PROBE_COUNT:
                probes = verts
            else:
                rng = np.random.default_rng(_PROBE_SEED + self.dim)
                probes = self.sample(rng, _PROBE_COUNT)
            probes = np.vstack([probes, self.analytic_center()[None, :]])
            object.__setattr__(self, "_probes", probes)
        return self._probes


def box(lo, hi):
    lo = as_vector(lo, name="lo")
    hi = as_vector(hi, dim=lo.size, name="hi")
    if np.any(hi < lo):
        raise ValueError("box requires lo <= hi componentwise")
    return ConvexSet("box", lo.size, lo=lo, hi=hi, diameter=float(np.linalg.norm(hi - lo)))


def ball(center, radius):
    center = as_vector(center, name="center")
    radius = float(radius)
    if radius < 0:
        raise ValueError("radius must be non-negative")
    return ConvexSet("ball", center.size, center=center, radius=radius, diameter=2.0 * radius)


def simplex(dim, offset=None, scale=1.0):
    if dim < 1:
        raise ValueError("simplex dimension must be positive")
    if scale <= 0:
        raise ValueError("scale must be positive")
    off = None if offset is None else as_vector(offset, dim=dim, name="offset")
    diam = float(scale * np.sqrt(2.0)) if dim > 1 else 0.0
    return ConvexSet("simplex", int(dim), offset=off, scale=float(scale), diameter=diam)


def whole_space(dim):
    if dim < 1:
        raise ValueError("dimension must be positive")
    return ConvexSet("whole", int(dim), diameter=np.inf)


def translate(base, shift):
    """Affine translate of a set: {x + shift : x in base}."""
    shift = as_vector(shift, dim=base.dim, name="shift")
    if base.kind == "box":
        return box(base.lo + shift, base.hi + shift)
    if base.kind == "ball":
        return ball(base.center + shift, base.radius)
    if base.kind == "simplex":
        off = shift if base.offset is None else base.offset + shift
        return simplex(base.dim, offset=off, scale=base.scale)
    if base.kind == "whole":
        return whole_space(base.dim)
    raise ValueError(f"unknown set kind {base.kind!r}")


def inner_subset(base, shrink=0.5):
    """A strictly smaller copy of the set, shrunk toward its analytic center.

    Used as a feasible target for indicator-of-set comparators: the result is
    always contained in ``base``.
    """
    if not 0.0 < shrink <= 1.0:
        raise ValueError("shrink must lie in (0, 1]")
    if base.kind == "box":
        mid = 0.5 * (base.lo + base.hi)
        half = 0.5 * (base.hi - base.lo)
        return box(mid - shrink * half, mid + shrink * half)
    if base.kind == "ball":
        return ball(base.center, shrink * base.radius)
    if base.kind == "simplex":
        center = base.analytic_center()
        new_scale = shrink * base.scale
        uniform = np.full(base.dim, 1.0 / base.dim)
        return simplex(base.dim, offset=center - new_scale * uniform, scale=new_scale)
    raise UnboundedSetError("cannot shrink an unbounded set")


def project(s, x):
    """Functional form of :meth:`ConvexSet.project`."""
    return s.project(x)


def diameter(s):
    """Exact diameter; raises :class:`UnboundedSetError` for unbounded sets."""
    if not s.bounded:
        raise UnboundedSetError("set is unbounded; supply a comparator radius explicitly")
    return s.diameter

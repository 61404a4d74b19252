"""Projectable convex sets.

Every solver step ends with a Euclidean projection, so each set variant
exposes ``project``, ``contains`` and (when compact) ``sample`` and
``norm_bound``.  The module-level functions dispatch to these methods.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


class UnboundedSetError(ValueError):
    """Raised when an operation needs a compact set."""


class ProjectionResult(NamedTuple):
    point: np.ndarray
    converged: bool
    sweeps: int
    max_violation: float


def _vec(x, n=None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if n is not None and x.shape != (n,):
        raise ValueError(f"expected a vector of length {n}, got shape {x.shape}")
    return x


class SetSpec:
    """Base class; subclasses are immutable dataclasses."""

    dim: int
    compact: bool = False

    def project(self, z) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x, tol: float = 1e-9) -> bool:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise UnboundedSetError(f"{type(self).__name__} is unbounded")

    def norm_bound(self) -> tuple[float, bool]:
        """Return ``(M_X, exact)`` with ``M_X >= sup ||x||`` over the set."""
        raise UnboundedSetError(f"{type(self).__name__} is unbounded")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        lo, hi = self.bounding_box()
        return rng.uniform(lo, hi, size=(size, self.dim))

    def _check(self, z) -> np.ndarray:
        return _vec(z, self.dim)


@dataclass(frozen=True)
class WholeSpace(SetSpec):
    dim: int

    def project(self, z):
        return self._check(z).copy()

    def contains(self, x, tol=1e-9):
        return bool(np.all(np.isfinite(self._check(x))))


@dataclass(frozen=True)
class NonnegativeOrthant(SetSpec):
    dim: int

    def project(self, z):
        return np.maximum(self._check(z), 0.0)

    def contains(self, x, tol=1e-9):
        return bool(np.all(self._check(x) >= -tol))


@dataclass(frozen=True, eq=False)
class Box(SetSpec):
    lower: np.ndarray
    upper: np.ndarray
    compact = True

    def __post_init__(self):
        lo = _vec(self.lower)
        hi = _vec(self.upper)
        if lo.shape != hi.shape:
            raise ValueError("lower and upper bounds differ in length")
        if np.any(lo > hi):
            raise ValueError("box needs lower <= upper componentwise")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box bounds must be finite")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, n: int, lo: float, hi: float) -> "Box":
        return cls(np.full(n, float(lo)), np.full(n, float(hi)))

    @property
    def dim(self):
        return self.lower.size

    def project(self, z):
        return np.clip(self._check(z), self.lower, self.upper)

    def contains(self, x, tol=1e-9):
        x = self._check(x)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def bounding_box(self):
        return self.lower, self.upper

    def norm_bound(self):
        corner = np.maximum(np.abs(self.lower), np.abs(self.upper))
        return float(np.linalg.norm(corner)), True

    def vertices(self) -> np.ndarray:
        if self.dim > 20:
            raise ValueError("vertex enumeration limited to n <= 20")
        return np.array(list(itertools.product(*zip(self.lower, self.upper))), dtype=float)


@dataclass(frozen=True, eq=False)
class Ball(SetSpec):
    center: np.ndarray
    radius: float
    compact = True

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", _vec(self.center))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.size

    def project(self, z):
        z = self._check(z)
        d = z - self.center
        nd = np.linalg.norm(d)
        if nd <= self.radius:
            return z.copy()
        return self.center + d * (self.radius / nd)

    def contains(self, x, tol=1e-9):
        return bool(np.linalg.norm(self._check(x) - self.center) <= self.radius + tol)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def norm_bound(self):
        return float(np.linalg.norm(self.center) + self.radius), True

    def sample(self, rng, size):
        g = rng.standard_normal((size, self.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        rad = self.radius * rng.uniform(size=(size, 1)) ** (1.0 / self.dim)
        return self.center + g * rad


@dataclass(frozen=True, eq=False)
class Polyhedron(SetSpec):
    """``{x : A x <= c}`` optionally intersected with box bounds.

    A feasible ``witness`` point certifies nonemptiness.  Projection uses
    Dykstra's algorithm over the halfspaces and the box.
    """

    A: np.ndarray
    c: np.ndarray
    witness: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    tol: float = 1e-10
    max_sweeps: int = 10_000
    _row_sq: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        c = _vec(self.c)
        if A.shape[0] != c.size:
            raise ValueError("A and c disagree on the number of halfspaces")
        w = _vec(self.witness, A.shape[1])
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "witness", w)
        if self.lower is not None:
            object.__setattr__(self, "lower", _vec(self.lower, A.shape[1]))
        if self.upper is not None:
            object.__setattr__(self, "upper", _vec(self.upper, A.shape[1]))
        row_sq = np.einsum("ij,ij->i", A, A)
        if np.any(row_sq == 0):
            raise ValueError("halfspace with zero normal")
        object.__setattr__(self, "_row_sq", row_sq)
        if not self.contains(w, tol=1e-8):
            raise ValueError("witness point is not feasible; polyhedron may be empty")

    @property
    def dim(self):
        return self.A.shape[1]

    @property
    def compact(self):
        return self.lower is not None and self.upper is not None

    def violation(self, x) -> float:
        x = self._check(x)
        v = float(np.max(self.A @ x - self.c, initial=0.0))
        if self.lower is not None:
            v = max(v, float(np.max(self.lower - x, initial=0.0)))
        if self.upper is not None:
            v = max(v, float(np.max(x - self.upper, initial=0.0)))
        return v

    def contains(self, x, tol=1e-9):
        return self.violation(x) <= tol

    def _project_box(self, z):
        lo = -np.inf if self.lower is None else self.lower
        hi = np.inf if self.upper is None else self.upper
        return np.clip(z, lo, hi)

    def project_dykstra(self, z, max_sweeps=None, tol=None) -> ProjectionResult:
        max_sweeps = self.max_sweeps if max_sweeps is None else max_sweeps
        tol = self.tol if tol is None else tol
        z = self._check(z)
        if self.contains(z, tol=0.0):
            return ProjectionResult(z.copy(), True, 0, 0.0)
        n_half = self.A.shape[0]
        has_box = self.lower is not None or self.upper is not None
        # one correction vector per constraint set
        incr = np.zeros((n_half + int(has_box), self.dim))
        x = z.copy()
        for sweep in range(1, max_sweeps + 1):
            x_prev, incr_prev = x.copy(), incr.copy()
            for j in range(n_half):
                y = x + incr[j]
                s = self.A[j] @ y - self.c[j]
                x = y - (s / self._row_sq[j]) * self.A[j] if s > 0 else y
                incr[j] = y - x
            if has_box:
                y = x + incr[-1]
                x = self._project_box(y)
                incr[-1] = y - x
            # x can stall for a sweep while the corrections still move
            if np.linalg.norm(x - x_prev) < tol and np.linalg.norm(incr - incr_prev) < tol:
                viol = self.violation(x)
                if viol <= max(tol, 1e-9):
                    return ProjectionResult(x, True, sweep, viol)
        return ProjectionResult(x, False, max_sweeps, self.violation(x))

    def project(self, z):
        res = self.project_dykstra(z)
        if not res.converged:
            warnings.warn(
                f"Dykstra projection stopped after {res.sweeps} sweeps "
                f"(violation {res.max_violation:.2e})",
                RuntimeWarning,
                stacklevel=2,
            )
        return res.point

    def bounding_box(self):
        if not self.compact:
            raise UnboundedSetError("polyhedron without box bounds")
        return self.lower, self.upper

    def norm_bound(self):
        # box corner bound: a valid upper estimate, not the exact sup
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi)))), False

    def sample(self, rng, size):
        lo, hi = self.bounding_box()
        out = []
        tries = 0
        while len(out) < size and tries < 200 * size:
            x = rng.uniform(lo, hi)
            tries += 1
            if self.contains(x, tol=0.0):
                out.append(x)
        # thin polyhedra: fall back to projected box samples
        while len(out) < size:
            out.append(self.project(rng.uniform(lo, hi)))
        return np.array(out)


def project(s: SetSpec, z) -> np.ndarray:
    """Euclidean projection of ``z`` onto ``s``."""
    return s.project(z)


def project_polyhedron(s: Polyhedron, z, max_sweeps: int = 10_000, tol: float = 1e-10) -> ProjectionResult:
    return s.project_dykstra(z, max_sweeps=max_sweeps, tol=tol)


def contains(s: SetSpec, x, tol: float = 1e-9) -> bool:
    return s.contains(x, tol)


def diameter_bound(s: SetSpec) -> float:
    """``M_X = sup_{x in X} ||x||``; exact for boxes and balls."""
    return s.norm_bound()[0]


def sampling_box(s: SetSpec, box: Box | None = None) -> Box:
    if box is not None:
        return box
    try:
        lo, hi = s.bounding_box()
    except UnboundedSetError:
        raise ValueError("unbounded set: supply a sampling box") from None
    return Box(lo, hi)


def sample_points(s: SetSpec, rng: np.random.Generator, size: int, box: Box | None = None) -> np.ndarray:
    """Points of ``s``; unbounded sets are sampled through ``box`` and projected."""
    if s.compact and box is None:
        return s.sample(rng, size)
    b = sampling_box(s, box)
    pts = b.sample(rng, size)
    return np.array([s.project(p) for p in pts])


def is_finite_vector(x) -> bool:
    return bool(np.all(np.isfinite(x)))


__all__ = [
    "SetSpec",
    "WholeSpace",
    "NonnegativeOrthant",
    "Box",
    "Ball",
    "Polyhedron",
    "ProjectionResult",
    "UnboundedSetError",
    "project",
    "project_polyhedron",
    "contains",
    "diameter_bound",
    "sample_points",
    "sampling_box",
]

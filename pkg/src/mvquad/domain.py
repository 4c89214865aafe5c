"""Measured domains: intervals and boxes with optional density, finite atoms.

Points are plain float arrays of the domain dimension. Discrete atoms also
carry coordinates so the same predicates and integrands apply to them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import expr as ex
from .cubature import MAX_DIM, adaptive_cubature
from .errors import ConfigError, EvalError

Indicator = Callable[[np.ndarray], np.ndarray]


def _exact_normalize(masses: list[float]) -> tuple[float, ...]:
    """Scale masses to sum to 1, nudging the largest so fsum is exactly 1.0."""
    total = math.fsum(masses)
    w = [m / total for m in masses]
    big = max(range(len(w)), key=lambda i: w[i])
    for _ in range(8):
        s = math.fsum(w)
        if s == 1.0:
            break
        w[big] += 1.0 - s
    return tuple(w)


@dataclass(frozen=True)
class BoxMeasure:
    """Lebesgue measure on [lo, hi], optionally weighted by a density expression."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    density: Optional[ex.Expr] = None
    kind: str = "box"

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ConfigError("box bounds must be nonempty and of equal length")
        if len(self.lo) > MAX_DIM:
            raise ConfigError(f"box dimension {len(self.lo)} exceeds supported maximum {MAX_DIM}")
        if not all(math.isfinite(v) for v in self.lo + self.hi):
            raise ConfigError("box bounds must be finite")
        if not all(a < b for a, b in zip(self.lo, self.hi)):
            raise ConfigError("box requires lo < hi componentwise")
        if self.density is not None and ex.max_var_index(self.density) > len(self.lo):
            raise ConfigError("density references a coordinate beyond the domain dimension")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def supports_paths(self) -> bool:
        return True

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in zip(self.lo, self.hi))

    def contains(self, point) -> bool:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        return p.shape == (self.dim,) and bool(np.all(p >= self.lo) and np.all(p <= self.hi))

    def density_at(self, points: np.ndarray) -> np.ndarray:
        """Density values at rows of ``points``; 1 when no density is given."""
        if self.density is None:
            return np.ones(len(points))
        rho = ex.evaluate_many(self.density, points)
        bad = rho < 0
        if bad.any():
            raise EvalError("negative density", points[int(np.flatnonzero(bad)[0])])
        return rho

    def to_json(self) -> dict:
        if self.kind == "interval":
            out = {"type": "interval", "a": self.lo[0], "b": self.hi[0]}
        else:
            out = {"type": "box", "lo": list(self.lo), "hi": list(self.hi)}
        return out


def interval(a: float, b: float, density=None) -> BoxMeasure:
    if isinstance(density, str):
        density = ex.parse(density)
    return BoxMeasure((float(a),), (float(b),), density, kind="interval")


def box(lo, hi, density=None) -> BoxMeasure:
    if isinstance(density, str):
        density = ex.parse(density)
    return BoxMeasure(tuple(map(float, lo)), tuple(map(float, hi)), density, kind="box")


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely many atoms; masses are normalized at construction.

    Zero-mass atoms are dropped. ``raw_total`` keeps the unnormalized
    total mass for the ``--unnormalized`` output convention.
    """

    points: tuple[tuple[float, ...], ...]
    masses: tuple[float, ...]
    raw_total: float = field(default=1.0)

    kind = "discrete"

    @classmethod
    def from_atoms(cls, atoms) -> "DiscreteMeasure":
        pts, ms = [], []
        for point, mass in atoms:
            coords = tuple(float(c) for c in np.atleast_1d(point))
            mass = float(mass)
            if not all(math.isfinite(c) for c in coords):
                raise ConfigError("atom coordinates must be finite")
            if not (math.isfinite(mass) and mass >= 0):
                raise ConfigError(f"atom mass must be finite and nonnegative, got {mass}")
            if mass > 0:
                pts.append(coords)
                ms.append(mass)
        if not pts:
            raise ConfigError("discrete measure needs at least one atom with positive mass")
        if len({len(p) for p in pts}) != 1:
            raise ConfigError("all atoms must have the same dimension")
        w = _exact_normalize(ms)
        if min(w) <= 0:
            # masses too small to survive normalization count as zero
            pts = [p for p, wi in zip(pts, w) if wi > 0]
            w = _exact_normalize([wi for wi in w if wi > 0])
        return cls(tuple(pts), w, math.fsum(ms))

    @property
    def dim(self) -> int:
        return len(self.points[0])

    @property
    def supports_paths(self) -> bool:
        return False

    @property
    def coords(self) -> np.ndarray:
        return np.array(self.points, dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.array(self.masses, dtype=float)

    def contains(self, point) -> bool:
        p = tuple(float(c) for c in np.atleast_1d(point))
        return p in self.points

    def to_json(self) -> dict:
        return {
            "type": "discrete",
            "atoms": [{"point": list(p), "mass": m} for p, m in zip(self.points, self.masses)],
        }


Measure = BoxMeasure | DiscreteMeasure


def measure_from_json(spec: dict, density=None) -> Measure:
    """Build a measure from its JSON fragment.

    ``density`` may be given separately (top-level config key) or inside
    the domain object; both spellings are accepted.
    """
    if not isinstance(spec, dict):
        raise ConfigError("domain must be a JSON object")
    density = spec.get("density", density)
    kind = spec.get("type")
    try:
        if kind == "interval":
            m = interval(spec["a"], spec["b"], density)
        elif kind == "box":
            m = box(spec["lo"], spec["hi"], density)
        elif kind == "discrete":
            if density is not None:
                raise ConfigError("density is only allowed for interval and box domains")
            m = DiscreteMeasure.from_atoms((a["point"], a["mass"]) for a in spec["atoms"])
        else:
            raise ConfigError(f"unknown domain type {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed {kind} domain: {exc!r}") from exc
    return m


@dataclass(frozen=True)
class PathSpec:
    """Straight segment from ``start`` (lambda=0) to ``end`` (lambda=1)."""

    start: tuple[float, ...]
    end: tuple[float, ...]


def make_path(measure: Measure, start, end) -> PathSpec:
    if not measure.supports_paths:
        raise ConfigError("discrete domains are not path connected; no path exists")
    a = tuple(float(c) for c in np.atleast_1d(start))
    b = tuple(float(c) for c in np.atleast_1d(end))
    if not (measure.contains(a) and measure.contains(b)):
        raise ConfigError("path endpoints must lie inside the domain")
    return PathSpec(a, b)


def path_eval(path: PathSpec, lam: float) -> np.ndarray:
    """Point at parameter ``lam``; endpoints are returned bit-exactly."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"path parameter must lie in [0, 1], got {lam}")
    return path_points(path, np.array([lam]))[0]


def path_points(path: PathSpec, lams: np.ndarray) -> np.ndarray:
    """Vectorized path evaluation, shape (len(lams), d)."""
    a = np.asarray(path.start)
    b = np.asarray(path.end)
    lams = np.asarray(lams, dtype=float)
    pts = (1.0 - lams)[:, None] * a[None, :] + lams[:, None] * b[None, :]
    pts[lams == 0.0] = a
    pts[lams == 1.0] = b
    return pts


def total_mass(measure: Measure, tol: float = 1e-12, max_evals: int = 4_000_000) -> float:
    """mu(S) before normalization."""
    if isinstance(measure, DiscreteMeasure):
        return measure.raw_total
    if measure.density is None:
        return measure.volume
    res = adaptive_cubature(
        lambda p: measure.density_at(p), measure.lo, measure.hi,
        lambda v, e: e / max(abs(v[0]), 1e-300), tol, max_evals)
    if res.values[0] <= 0:
        raise ConfigError("density integrates to a nonpositive total mass")
    return float(res.values[0])


def prob(measure: Measure, indicator: Indicator, tol: float = 1e-10,
         max_evals: int = 4_000_000) -> float:
    """P(B) for the set B = {indicator true}, i.e. the normalized measure of B.

    ``indicator`` maps an (k, d) array of points to k booleans. Discrete
    measures sum masses exactly; boxes integrate indicator x density
    adaptively (raising IntegrationError with the best estimate on
    budget exhaustion).
    """
    if isinstance(measure, DiscreteMeasure):
        mask = np.asarray(indicator(measure.coords), dtype=bool)
        return math.fsum(m for m, keep in zip(measure.masses, mask) if keep)

    def integrand(p):
        rho = measure.density_at(p)
        return np.column_stack([rho, rho * np.asarray(indicator(p), dtype=float)])

    def err_norm(v, e):
        mass = max(abs(v[0]), 1e-300)
        return np.array([(e[1] + abs(v[1] / mass) * e[0]) / mass])

    res = adaptive_cubature(integrand, measure.lo, measure.hi, err_norm, tol, max_evals)
    return float(res.values[1] / res.values[0])

"""Mean vectors E X and their finite (Riemann) convex-combination surrogates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .caratheodory import ConvexCombination
from .cubature import adaptive_cubature
from .domain import BoxMeasure, DiscreteMeasure, Measure
from .errors import DiscretizationError, EvalError, IntegrationError

DEFAULT_TOL = 1e-9
DEFAULT_RESOLUTION = 4096
MAX_ATOMS = 2**20


@dataclass
class MeanVector:
    values: np.ndarray
    error_estimate: np.ndarray
    function_evals: int
    total_mass: float


def images(fns, points) -> np.ndarray:
    """X(t) for each row of ``points``, attributing failures to the function."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    cols = []
    for k, f in enumerate(fns):
        try:
            cols.append(ex.evaluate_many(f, pts))
        except EvalError as exc:
            raise EvalError(f"function {k + 1} ({ex.to_source(f)}): {exc.message}", exc.point) from exc
    return np.column_stack(cols)


def mean_vector(fns, measure: Measure, tol: float = DEFAULT_TOL,
                max_evals: int = 4_000_000) -> MeanVector:
    """Normalized integrals E X_k = (1/mu(S)) * integral of X_k dmu.

    Discrete measures give the exact weighted sum. Boxes run adaptive
    Gauss-Kronrod cubature on [rho, rho*X_1, ..., rho*X_n] and control the
    error of each ratio; on budget exhaustion an IntegrationError carries
    the best mean estimate and its achieved error.
    """
    if not fns:
        raise ValueError("need at least one function")
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    if isinstance(measure, DiscreteMeasure):
        vals = images(fns, measure.coords)
        w = measure.masses
        mean = np.array([math.fsum(wi * v for wi, v in zip(w, vals[:, k])) for k in range(len(fns))])
        return MeanVector(mean, np.zeros(len(fns)), vals.size, measure.raw_total)

    def integrand(p):
        rho = measure.density_at(p)
        return np.column_stack([rho, rho[:, None] * images(fns, p)])

    def err_norm(v, e):
        mass = max(abs(v[0]), 1e-300)
        return (e[1:] + np.abs(v[1:] / mass) * e[0]) / mass

    try:
        res = adaptive_cubature(integrand, measure.lo, measure.hi, err_norm, tol, max_evals)
    except IntegrationError as exc:
        v, e = exc.estimate, exc.error
        raise IntegrationError(
            f"mean_vector: {exc}", estimate=v[1:] / v[0], error=err_norm(v, e),
            evaluations=exc.evaluations) from exc
    mass = float(res.values[0])
    if mass <= 0:
        raise IntegrationError("density has zero total mass on the domain")
    return MeanVector(res.values[1:] / mass, err_norm(res.values, res.errors),
                      res.evaluations * len(fns), mass)


def _grid(measure: BoxMeasure, resolution: int):
    d = measure.dim
    per_axis = resolution if d == 1 else max(1, int(round(resolution ** (1.0 / d))))
    axes = []
    for a, b in zip(measure.lo, measure.hi):
        h = (b - a) / per_axis
        axes.append(a + h * (np.arange(per_axis) + 0.5))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def riemann_atoms(fns, measure: Measure, resolution: int = DEFAULT_RESOLUTION,
                  target=None, residual_tol: float | None = None,
                  max_atoms: int = MAX_ATOMS) -> ConvexCombination:
    """Midpoint-rule discretization of the measure as a convex combination.

    Cell midpoints of a uniform partition carry weight density x cell volume
    (normalized). When ``residual_tol`` is given the resolution doubles
    until the distance to ``target`` is within it, up to ``max_atoms``.
    Discrete measures pass through unchanged.
    """
    if target is None:
        target = mean_vector(fns, measure).values
    target = np.asarray(target, dtype=float)
    if isinstance(measure, DiscreteMeasure):
        return ConvexCombination.build(measure.coords, measure.weights,
                                       images(fns, measure.coords), target)
    if resolution < len(fns) + 2:
        raise ValueError(f"resolution must be at least n+2 = {len(fns) + 2}")
    while True:
        pts = _grid(measure, resolution)
        if measure.density is None:
            w = np.full(len(pts), 1.0 / len(pts))
        else:
            rho = measure.density_at(pts)
            w = rho / math.fsum(rho)
        comb = ConvexCombination.build(pts, w, images(fns, pts), target)
        if residual_tol is None or comb.residual <= residual_tol:
            return comb
        if 2 * resolution > max_atoms:
            raise DiscretizationError(
                f"discretization residual {comb.residual:.3e} exceeds {residual_tol:.3e} at "
                f"{len(pts)} atoms; raise the resolution limit", comb.residual, resolution, comb)
        resolution *= 2

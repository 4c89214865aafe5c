"""Property checks on concrete measures: Markov, finite additivity, hull membership.

Only countably additive measures can be built here (Lebesgue with density,
finite atoms), which is the setting in which the positivity axiom is known
to hold; nothing attempts to test it over all integrands.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .caratheodory import prune, refit_weights
from .domain import DiscreteMeasure, Measure, prob
from .errors import MVQError, StageError
from .integrate import DEFAULT_RESOLUTION, mean_vector, riemann_atoms

MARKOV_SLACK = 1e-9
FAP_TOL = 1e-12


@dataclass
class PropertyReport:
    property_name: str
    cases_run: int = 0
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, case: str, observed, bound):
        self.failures.append({"case": case, "observed": observed, "bound": bound})

    def to_json(self) -> dict:
        return {
            "property_name": self.property_name,
            "cases_run": self.cases_run,
            "failures": self.failures,
            "passed": self.passed,
            **({"details": self.details} if self.details else {}),
        }


def _sample_points(measure: Measure, per_axis: int = 64) -> np.ndarray:
    if isinstance(measure, DiscreteMeasure):
        return measure.coords
    axes = [np.linspace(a, b, per_axis) for a, b in zip(measure.lo, measure.hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def check_markov(fn: ex.Expr, measure: Measure, epsilons, tol: float = 1e-10) -> PropertyReport:
    """P(X > eps) <= E X / eps for a nonnegative X, at each eps."""
    pts = _sample_points(measure, 1025 if measure.dim == 1 else 64)
    vals = ex.evaluate_many(fn, pts)
    if vals.min() < 0:
        i = int(np.argmin(vals))
        raise ValueError(f"markov check needs X >= 0; X({pts[i].tolist()}) = {vals[i]}")
    mean = float(mean_vector([fn], measure, tol).values[0])
    report = PropertyReport("markov")
    for eps in epsilons:
        eps = float(eps)
        if not eps > 0:
            raise ValueError("epsilon must be positive")
        p = prob(measure, lambda q, e=eps: ex.evaluate_many(fn, q) > e, tol)
        bound = mean / eps
        report.cases_run += 1
        if p > bound + MARKOV_SLACK:
            report.fail(f"eps={eps!r}", p, bound)
    report.details = {"mean": mean}
    return report


def random_split(coords: np.ndarray, rng: np.random.Generator):
    """Disjoint predicates {h < c} and {h > c} for a random linear functional h."""
    a = rng.standard_normal(coords.shape[1])
    h = coords @ a
    if rng.random() < 0.25:
        c = float(h[rng.integers(len(h))])
    else:
        c = float(rng.uniform(h.min() - 0.1, h.max() + 0.1))

    def below(q):
        return q @ a < c

    def above(q):
        return q @ a > c

    return below, above


def check_fap(measure: DiscreteMeasure, trials: int, seed: int) -> PropertyReport:
    """Finite additivity, nonnegativity and P(S) = 1 on random disjoint pairs."""
    if not isinstance(measure, DiscreteMeasure):
        raise ValueError("check_fap needs a discrete measure")
    rng = np.random.default_rng(seed)
    report = PropertyReport("fap")
    whole = prob(measure, lambda q: np.ones(len(q), dtype=bool))
    empty = prob(measure, lambda q: np.zeros(len(q), dtype=bool))
    if whole != 1.0:
        report.fail("P(S)", whole, 1.0)
    if empty != 0.0:
        report.fail("P(empty)", empty, 0.0)
    coords = measure.coords
    for t in range(trials):
        below, above = random_split(coords, rng)
        pa = prob(measure, below)
        pb = prob(measure, above)
        pab = prob(measure, lambda q: below(q) | above(q))
        report.cases_run += 1
        if abs(pab - pa - pb) > FAP_TOL:
            report.fail(f"trial {t}: additivity", pab - pa - pb, FAP_TOL)
        if min(pa, pb) < 0:
            report.fail(f"trial {t}: nonnegativity", min(pa, pb), 0.0)
    return report


def check_hull_membership(fns, measure: Measure, tol: float = 1e-9,
                          resolution: int = DEFAULT_RESOLUTION) -> PropertyReport:
    """Certify E X in conv X(S) by an explicit pruned convex combination."""
    report = PropertyReport("hull")

    def stage(name, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except MVQError as exc:
            raise StageError(name, exc) from exc

    mv = stage("integrate", mean_vector, fns, measure, tol)
    comb = stage("discretize", riemann_atoms, fns, measure, resolution, mv.values, 10 * tol)
    comb = refit_weights(stage("prune", prune, comb))
    report.cases_run = 1
    w = comb.weights
    if comb.residual > tol:
        report.fail("residual", comb.residual, tol)
    if w.min() < -1e-12:
        report.fail("min weight", float(w.min()), -1e-12)
    if abs(w.sum() - 1.0) > 1e-12:
        report.fail("weight sum", float(w.sum()), 1.0)
    report.details = {
        "target": mv.values.tolist(),
        "nodes": comb.points.tolist(),
        "weights": w.tolist(),
        "residual": comb.residual,
        "atoms": comb.size,
    }
    return report


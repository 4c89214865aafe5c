"""End-to-end synthesis of shared-weight quadrature rules.

integrate -> discretize -> prune -> refit -> reduce (continuous integrands
on convex domains only) -> emit, with an independent re-verification.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .caratheodory import combine, prune, refit_weights
from .config import Config
from .domain import DiscreteMeasure, total_mass
from .errors import ConfigError, DiscretizationError, MVQError, StageError
from .integrate import MAX_ATOMS, mean_vector, riemann_atoms
from .path_reduce import reduce

log = logging.getLogger(__name__)

#: Riemann discretization must land within this multiple of the tolerance.
DISCRETIZATION_SLACK = 10.0
#: Atom budget for d >= 2, where midpoint error only falls like 1/N.
MAX_ATOMS_MULTI = 2**16
WEIGHT_SUM_TOL = 1e-12


@dataclass
class QuadratureRule:
    nodes: list
    weights: list
    target: list
    residual: float
    reduced: bool
    total_mass: float = 1.0
    trace: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "nodes": [[float(c) for c in p] for p in self.nodes],
            "weights": [float(w) for w in self.weights],
            "target": [float(v) for v in self.target],
            "residual": float(self.residual),
            "reduced": bool(self.reduced),
            "total_mass": float(self.total_mass),
        }

    @classmethod
    def from_json(cls, data: dict) -> "QuadratureRule":
        try:
            return cls(
                nodes=[[float(c) for c in p] for p in data["nodes"]],
                weights=[float(w) for w in data["weights"]],
                target=[float(v) for v in data["target"]],
                residual=float(data["residual"]),
                reduced=bool(data["reduced"]),
                total_mass=float(data.get("total_mass", 1.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed rule: {exc!r}") from exc

    def meets(self, tol: float) -> bool:
        return self.residual <= tol * self.total_mass


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except StageError:
        raise
    except MVQError as exc:
        raise StageError(name, exc) from exc


def emission_residual(fns, nodes, weights, target) -> float:
    """sup-norm of sum_i w_i X(t_i) - target, evaluating X afresh."""
    imgs = ex.evaluate_system(fns, np.asarray(nodes, dtype=float))
    return float(np.max(np.abs(combine(weights, imgs) - np.asarray(target, dtype=float))))


def synthesize(config: Config, trace: bool = False) -> QuadratureRule:
    """Build a rule with at most n nodes (n+1 if reduction does not apply)."""
    fns = config.fns
    tol = config.tolerance
    measure = config.measure
    mv = _stage("integrate", mean_vector, fns, measure, tol)
    budget = MAX_ATOMS if measure.dim == 1 else MAX_ATOMS_MULTI
    shortfall = None
    try:
        comb = riemann_atoms(fns, measure, config.resolution, mv.values,
                             DISCRETIZATION_SLACK * tol, budget)
    except DiscretizationError as exc:
        # keep going: refitting the pruned weights usually absorbs the drift
        log.info("%s; continuing with the refit step", exc)
        comb, shortfall = exc.best, exc
    except MVQError as exc:
        raise StageError("discretize", exc) from exc
    log.debug("discretized into %d atoms, residual %.3e", comb.size, comb.residual)
    comb = _stage("prune", prune, comb, trace=trace)
    comb = refit_weights(comb)
    if shortfall is not None and comb.residual > tol:
        raise StageError("discretize", shortfall)
    if config.continuous and measure.supports_paths and comb.size > config.n:
        comb = _stage("reduce", reduce, comb, fns, measure)
        if comb.not_reduced:
            log.warning("path reduction failed for every atom pair; keeping %d nodes", comb.size)

    weights = np.asarray(comb.weights, dtype=float)
    target = np.asarray(mv.values, dtype=float)
    mass = 1.0
    if config.unnormalized:
        mass = mv.total_mass
        weights = weights * mass
        target = target * mass
    nodes = comb.points.tolist()
    residual = _stage("emit", emission_residual, fns, nodes, weights, target)
    return QuadratureRule(nodes, weights.tolist(), target.tolist(), residual,
                          reduced=comb.size <= config.n, total_mass=mass, trace=comb.trace)


def verify(rule: QuadratureRule, config: Config) -> dict:
    """Recheck a rule against a tighter recomputation of the target."""
    n = config.n
    if len(rule.target) != n:
        raise ConfigError(f"rule has {len(rule.target)} target components, config has {n} functions")
    if len(rule.nodes) != len(rule.weights) or not rule.nodes:
        raise ConfigError("rule nodes and weights differ in length or are empty")
    if any(len(p) != config.measure.dim for p in rule.nodes):
        raise ConfigError(f"rule nodes must have dimension {config.measure.dim}")

    fns = config.fns
    mv = mean_vector(fns, config.measure, config.tolerance / 10)
    expected_mass = 1.0
    if config.unnormalized or abs(rule.total_mass - 1.0) > WEIGHT_SUM_TOL:
        expected_mass = (config.measure.raw_total if isinstance(config.measure, DiscreteMeasure)
                         else total_mass(config.measure))
    expected = mv.values * expected_mass
    imgs = ex.evaluate_system(fns, np.asarray(rule.nodes, dtype=float))
    achieved = combine(rule.weights, imgs)
    discrepancy = np.abs(achieved - expected)
    weight_sum = math.fsum(rule.weights)
    limit = config.tolerance * expected_mass
    checks = {
        "discrepancy": bool(discrepancy.max() <= limit),
        "nonnegative_weights": bool(min(rule.weights) >= 0),
        "weight_sum": bool(abs(weight_sum - expected_mass) <= WEIGHT_SUM_TOL * expected_mass),
        "total_mass": bool(abs(rule.total_mass - expected_mass) <= 1e-9 * expected_mass),
        "nodes_in_domain": all(config.measure.contains(p) for p in rule.nodes),
        "node_count": len(rule.nodes) <= (n if rule.reduced else n + 1),
    }
    return {
        "passed": all(checks.values()),
        "checks": checks,
        "discrepancy": discrepancy.tolist(),
        "max_discrepancy": float(discrepancy.max()),
        "target_recomputed": expected.tolist(),
        "target_drift": float(np.max(np.abs(np.asarray(rule.target) - expected))),
        "weight_sum": weight_sum,
        "tolerance": config.tolerance,
    }

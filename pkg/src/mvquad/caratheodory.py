"""Finite convex combinations and Carathéodory atom elimination."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import PruneError

DROP_WEIGHT = 1e-15
PIVOT_RTOL = 1e-12


@dataclass
class ConvexCombination:
    """Atoms (point, weight, image) together with the vector they represent.

    ``residual`` is the sup-norm distance between the weighted image sum
    and ``target``; use :meth:`build` to have it computed.
    """

    points: np.ndarray
    weights: np.ndarray
    images: np.ndarray
    target: np.ndarray
    residual: float
    not_reduced: bool = False
    trace: list = field(default_factory=list)

    @classmethod
    def build(cls, points, weights, images, target, **kw) -> "ConvexCombination":
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        weights = np.asarray(weights, dtype=float)
        images = np.asarray(images, dtype=float)
        if images.ndim == 1:
            images = images[:, None]
        target = np.asarray(target, dtype=float)
        return cls(points, weights, images, target, weighted_residual(weights, images, target), **kw)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def n(self) -> int:
        return self.images.shape[1]

    def weighted_sum(self) -> np.ndarray:
        return combine(self.weights, self.images)


def combine(weights, images) -> np.ndarray:
    """Sum of weight_i * image_i, accumulated with fsum per component."""
    weights = np.asarray(weights, dtype=float)
    images = np.asarray(images, dtype=float)
    prods = weights[:, None] * images
    return np.array([math.fsum(prods[:, j]) for j in range(images.shape[1])])


def weighted_residual(weights, images, target) -> float:
    return float(np.max(np.abs(combine(weights, images) - np.asarray(target, dtype=float))))


def _eliminate(rows):
    """Completely pivoted Gauss-Jordan elimination.

    Returns the reduced rows, the (row, column) pivots and the free columns.
    Entries below ``PIVOT_RTOL * max|entry|`` count as zero.
    """
    a = [list(r) for r in rows]
    m = len(a)
    ncol = len(a[0])
    scale = max((abs(v) for r in a for v in r), default=0.0)
    thresh = PIVOT_RTOL * scale
    pivots = []
    free = list(range(ncol))
    for r in range(m):
        best, bi, bj = thresh, -1, -1
        for i in range(r, m):
            row = a[i]
            for j in free:
                v = abs(row[j])
                if v > best:
                    best, bi, bj = v, i, j
        if bi < 0:
            break
        a[r], a[bi] = a[bi], a[r]
        prow = a[r]
        piv = prow[bj]
        for i in range(m):
            if i != r:
                f = a[i][bj] / piv
                if f != 0.0:
                    ri = a[i]
                    for j in free:
                        ri[j] -= f * prow[j]
                    ri[bj] = 0.0
        pivots.append((r, bj))
        free.remove(bj)
    return a, pivots, free


def pivoted_rank(rows) -> int:
    return len(_eliminate(rows)[1])


def null_vector(rows: list[list[float]]) -> list[float] | None:
    """A nontrivial solution of rows @ g = 0 (None if the columns are independent)."""
    a, pivots, free = _eliminate(rows)
    ncol = len(a[0])
    if not free:
        return None
    g = [0.0] * ncol
    jf = free[0]
    g[jf] = 1.0
    for r, j in pivots:
        g[j] = -a[r][jf] / a[r][j]
    return g


def prune(comb: ConvexCombination, trace: bool = False) -> ConvexCombination:
    """Eliminate atoms until at most n+1 remain, keeping the represented vector.

    Works on the first n+2 surviving atoms at a time: find an affine
    dependence among their images, shift weight along it until one weight
    hits zero (smallest index on ties), drop every weight <= 1e-15.
    Surviving atoms keep their input order.
    """
    n = comb.n
    m = comb.size
    if m <= n + 1:
        return comb
    if comb.weights.min() < 0 or abs(math.fsum(comb.weights) - 1.0) > 1e-12:
        raise PruneError("input weights must be nonnegative and sum to 1")
    w = [float(v) for v in comb.weights]
    imgs = [tuple(float(c) for c in row) for row in comb.images]
    alive = [True] * m
    window: list[int] = []
    stream = 0
    mass = math.fsum(w)
    remaining = m
    rounds = []
    k = 0
    while remaining > n + 1:
        while len(window) < n + 2:
            window.append(stream)
            stream += 1
        rows = [[imgs[i][c] for i in window] for c in range(n)]
        rows.append([1.0] * len(window))
        g = null_vector(rows)
        if g is None:
            raise PruneError(f"no affine dependence among atoms {window} (round {k})")
        gmax = max(abs(v) for v in g)
        g = [v / gmax for v in g]
        theta, pos = math.inf, -1
        for p, i in enumerate(window):
            if g[p] > 0:
                ratio = w[i] / g[p]
                if ratio < theta:
                    theta, pos = ratio, p
        if pos < 0:
            raise PruneError(f"degenerate dependence without positive entries (round {k})")
        before = math.fsum(w[i] for i in window)
        eliminated = []
        for p, i in enumerate(window):
            w[i] = 0.0 if p == pos else w[i] - theta * g[p]
        survivors = []
        for i in window:
            if w[i] <= DROP_WEIGHT:
                alive[i] = False
                eliminated.append(i)
                w[i] = 0.0
            else:
                survivors.append(i)
        mass += math.fsum(w[i] for i in window) - before
        remaining -= len(eliminated)
        window = survivors
        k += 1
        if abs(mass - 1.0) > 1e-12:
            raise PruneError(f"weight mass drifted to {mass!r} in round {k}")
        if trace:
            rounds.append({"round": k, "atoms": remaining, "theta": theta,
                           "eliminated": eliminated, "mass": mass})

    keep = np.flatnonzero(alive)
    weights = np.array([w[i] for i in keep])
    weights = weights / math.fsum(weights)
    out = ConvexCombination.build(
        comb.points[keep], weights, comb.images[keep], comb.target,
        not_reduced=comb.not_reduced, trace=list(comb.trace) + rounds)
    bound = comb.residual + 1e-10 * (1.0 + float(np.max(np.abs(comb.target))))
    if out.residual > bound:
        raise PruneError(f"residual grew from {comb.residual:.3e} to {out.residual:.3e}")
    return out


def refit_weights(comb: ConvexCombination, clamp: float = 1e-12) -> ConvexCombination:
    """Re-solve the weights of an affinely independent combination to hit ``target``.

    Used after pruning to remove discretization drift: with k <= n+1 atoms
    the system [images^T; 1] w = [target; 1] is solved in least squares.
    The refit is accepted only if it keeps weights nonnegative (within
    ``clamp``) and lowers the residual; otherwise the input is returned.
    """
    a = np.vstack([comb.images.T, np.ones(comb.size)])
    b = np.concatenate([comb.target, [1.0]])
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    if sol.min() < -clamp or not np.all(np.isfinite(sol)):
        return comb
    sol = np.clip(sol, 0.0, None)
    sol = sol / math.fsum(sol)
    res = weighted_residual(sol, comb.images, comb.target)
    if res >= comb.residual:
        return comb
    return replace(comb, weights=sol, residual=res)

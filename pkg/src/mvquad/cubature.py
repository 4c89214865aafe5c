"""Globally adaptive Gauss-Kronrod cubature on axis-aligned boxes.

Each cell carries a 15-point Kronrod rule with its embedded 7-point Gauss
rule (tensor products for d > 1). The cell with the largest error
contribution is bisected along the axis whose Gauss/Kronrod discrepancy
dominates, until a caller-supplied acceptance test passes.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import IntegrationError

MAX_DIM = 3

# QUADPACK qk15 abscissae/weights, positive half; index 7 is the centre.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# Gauss weights attach to _XGK[1], _XGK[3], _XGK[5], _XGK[7].
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

#: Kronrod nodes on [-1, 1], ascending.
KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
#: Kronrod weights aligned with KRONROD_NODES.
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
#: Gauss weights on the Kronrod grid (zero at Kronrod-only nodes).
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[2::-1]


@lru_cache(maxsize=None)
def _tensor_rule(d: int):
    """Reference nodes on [-1,1]^d with Kronrod, Gauss and per-axis mixed weights."""
    grids = np.meshgrid(*([KRONROD_NODES] * d), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)

    def outer(vectors):
        w = vectors[0]
        for v in vectors[1:]:
            w = np.multiply.outer(w, v)
        return np.asarray(w).ravel()

    wk = outer([KRONROD_WEIGHTS] * d)
    wg = outer([GAUSS_WEIGHTS] * d)
    mixed = np.stack([
        outer([GAUSS_WEIGHTS if a == ax else KRONROD_WEIGHTS for a in range(d)])
        for ax in range(d)
    ])
    return nodes, wk, wg, mixed


@dataclass
class CubatureResult:
    values: np.ndarray
    errors: np.ndarray
    evaluations: int
    cells: int


@dataclass
class _Cell:
    lo: np.ndarray
    hi: np.ndarray
    value: np.ndarray
    error: np.ndarray
    axis_error: np.ndarray


def _evaluate_cells(func, cells_lo, cells_hi):
    """Apply the tensor rule to a batch of cells in one integrand call."""
    d = cells_lo.shape[1]
    nodes, wk, wg, mixed = _tensor_rule(d)
    half = 0.5 * (cells_hi - cells_lo)
    mid = 0.5 * (cells_hi + cells_lo)
    pts = (mid[:, None, :] + half[:, None, :] * nodes[None, :, :]).reshape(-1, d)
    vals = np.asarray(func(pts), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    vals = vals.reshape(len(cells_lo), len(nodes), -1)
    jac = np.prod(half, axis=1)[:, None]
    kron = jac * np.einsum("q,cqm->cm", wk, vals)
    gauss = jac * np.einsum("q,cqm->cm", wg, vals)
    per_axis = jac[:, None, :] * np.einsum("aq,cqm->cam", mixed, vals)
    axis_err = np.abs(per_axis - kron[:, None, :]).max(axis=2)
    return kron, np.abs(kron - gauss), axis_err, len(pts)


def adaptive_cubature(
    func: Callable[[np.ndarray], np.ndarray],
    lo,
    hi,
    error_norm: Callable[[np.ndarray, np.ndarray], np.ndarray],
    tol: float,
    max_evals: int = 4_000_000,
) -> CubatureResult:
    """Integrate a vector-valued ``func`` over the box [lo, hi].

    ``func`` maps an (k, d) array of points to (k, m) values.
    ``error_norm(values, errors)`` converts raw integral/error totals into
    the per-target error measures that must all fall below ``tol``; it is
    also used to rank cells for refinement.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    d = lo.size
    if d > MAX_DIM:
        raise ValueError(f"cubature supports d <= {MAX_DIM}, got {d}")
    span = hi - lo
    kron, err, axis_err, evals = _evaluate_cells(func, lo[None], hi[None])
    cells = [_Cell(lo, hi, kron[0], err[0], axis_err[0])]
    heap: list[tuple[float, int]] = []
    frozen: list[int] = []
    total_val = kron[0].copy()
    total_err = err[0].copy()

    def push(idx):
        cell = cells[idx]
        width = (cell.hi - cell.lo) / span
        if width.max() < 1e-13:
            frozen.append(idx)
            return
        key = float(np.max(error_norm(total_val, cell.error)))
        heapq.heappush(heap, (-key, idx))

    push(0)
    since_resum = 0
    while True:
        if np.all(error_norm(total_val, total_err) <= tol):
            total_val, total_err = _resum(cells)
            since_resum = 0
            if np.all(error_norm(total_val, total_err) <= tol):
                break
        if not heap:
            raise IntegrationError(
                "cells reached minimal width without meeting tolerance",
                estimate=total_val, error=total_err, evaluations=evals)
        if evals >= max_evals:
            raise IntegrationError(
                f"evaluation budget {max_evals} exhausted",
                estimate=total_val, error=total_err, evaluations=evals)
        _, idx = heapq.heappop(heap)
        cell = cells[idx]
        ratios = cell.axis_error
        axis = int(np.argmax(ratios)) if ratios.max() > 0 else int(np.argmax((cell.hi - cell.lo) / span))
        cut = 0.5 * (cell.lo[axis] + cell.hi[axis])
        lo_a, hi_a = cell.lo.copy(), cell.hi.copy()
        hi_a[axis] = cut
        lo_b, hi_b = cell.lo.copy(), cell.hi.copy()
        lo_b[axis] = cut
        kron, err, axis_err, n = _evaluate_cells(func, np.stack([lo_a, lo_b]), np.stack([hi_a, hi_b]))
        evals += n
        total_val += kron[0] + kron[1] - cell.value
        total_err += err[0] + err[1] - cell.error
        cells[idx] = None
        cells.append(_Cell(lo_a, hi_a, kron[0], err[0], axis_err[0]))
        cells.append(_Cell(lo_b, hi_b, kron[1], err[1], axis_err[1]))
        since_resum += 1
        if since_resum >= 256:
            total_val, total_err = _resum(cells)
            since_resum = 0
        push(len(cells) - 2)
        push(len(cells) - 1)

    live = sum(c is not None for c in cells)
    return CubatureResult(total_val, total_err, evals, live)


def _resum(cells):
    live = [c for c in cells if c is not None]
    m = live[0].value.size
    vals = np.array([math.fsum(c.value[j] for c in live) for j in range(m)])
    errs = np.array([math.fsum(c.error[j] for c in live) for j in range(m)])
    return vals, errs

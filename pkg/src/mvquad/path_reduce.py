"""Drop one atom from an (n+1)-point convex combination by walking a path.

With the target translated to the origin, the images of atoms 1..n form a
basis and atom 0 has strictly negative coordinates in it. Moving atom 0
along a straight path towards atom 1, the coordinates of its image start
negative and coordinate 1 ends at +1, so some coordinate reaches zero
first. At that parameter the moved point and the remaining n-1 basis atoms
already represent the origin with nonnegative weights.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np
import scipy.linalg

from .caratheodory import ConvexCombination, null_vector, pivoted_rank, weighted_residual
from .domain import Measure, make_path, path_points
from .errors import ConfigError, EvalError, ReductionError
from .integrate import images

MAX_COND = 1e12
GRID = 1024
MAX_GRID = 2**16
BRACKET_WIDTH = 1e-14
ZERO_RTOL = 1e-11
NEG_CLAMP = 1e-12
NEG_FAIL = 1e-9


@dataclass
class BarycentricFrame:
    """Coordinates relative to n translated atom images.

    ``basis`` holds the translated images as columns; ``origin`` is the
    target vector subtracted before solving.
    """

    basis: np.ndarray
    negative_point: np.ndarray
    origin: np.ndarray
    lu: tuple
    cond: float

    @classmethod
    def from_images(cls, basis_images, negative_image, origin) -> "BarycentricFrame":
        origin = np.asarray(origin, dtype=float)
        basis = (np.asarray(basis_images, dtype=float) - origin).T
        neg = np.asarray(negative_image, dtype=float) - origin
        cond = float(np.linalg.cond(basis))
        if not cond <= MAX_COND:
            raise ReductionError(f"basis condition number {cond:.3e} exceeds {MAX_COND:.0e}")
        frame = cls(basis, neg, origin, scipy.linalg.lu_factor(basis), cond)
        p0 = frame.coords(neg[None, :])[0]
        if not np.all(p0 < 0):
            raise ReductionError(f"distinguished atom coordinates not all negative: {p0}")
        return frame

    def coords(self, translated: np.ndarray) -> np.ndarray:
        """Solve for coordinates of each row of ``translated`` (already shifted)."""
        v = np.atleast_2d(translated)
        p = scipy.linalg.lu_solve(self.lu, v.T).T
        resid = np.abs(p @ self.basis.T - v).max(axis=1)
        bound = 1e-10 * (1.0 + np.abs(v).max(axis=1))
        if np.any(resid > bound):
            raise ReductionError("barycentric solve residual too large; frame is ill-conditioned")
        return p


def barycentric(frame: BarycentricFrame, v) -> np.ndarray:
    """Coordinates p with sum_j p_j * basis_j = v (v measured from the frame origin)."""
    v = np.asarray(v, dtype=float)
    return frame.coords(v[None, :])[0]


@dataclass
class ReductionTrace:
    lambda_zero: float
    vanished_index: int
    crossings_scanned: int
    bisection_steps: int
    coords: np.ndarray
    point: np.ndarray
    distinguished: int = 0
    partner: int = 1

    def to_json(self) -> dict:
        d = asdict(self)
        d["coords"] = [float(c) for c in self.coords]
        d["point"] = [float(c) for c in self.point]
        return d


def first_zero_crossing(frame: BarycentricFrame, fns, path, grid: int = GRID,
                        max_grid: int = MAX_GRID) -> ReductionTrace:
    """Smallest lambda at which some path coordinate f_j(lambda) vanishes.

    Scans a uniform grid for the first point where max_j f_j reaches
    -tol_zero, then bisects the sign of max_j f_j inside that bracket down
    to width 1e-14. ``vanished_index`` is 0-based into the frame basis.
    """

    def coords_at(lams):
        pts = path_points(path, lams)
        try:
            imgs = images(fns, pts)
        except EvalError as exc:
            raise ReductionError(f"integrand failed on path: {exc}") from exc
        return frame.coords(imgs - frame.origin), pts

    scanned = 0
    while True:
        lams = np.arange(grid + 1) / grid
        f, _ = coords_at(lams)
        scanned += grid + 1
        if not np.all(f[0] < 0):
            raise ReductionError("path does not start at negative coordinates")
        tol_zero = ZERO_RTOL * (1.0 + float(np.abs(f).max()))
        g = f.max(axis=1)
        hit = np.flatnonzero(g[1:] >= -tol_zero)
        if hit.size:
            i = int(hit[0]) + 1
            break
        if 2 * grid > max_grid:
            raise ReductionError(f"no coordinate crossing found on a {grid}-point grid")
        grid *= 2

    lo, hi = float(lams[i - 1]), float(lams[i])
    g_lo, g_hi = float(g[i - 1]), float(g[i])
    steps = 0
    if g_hi >= 0:
        while hi - lo > BRACKET_WIDTH and steps < 200:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            g_mid = float(coords_at(np.array([mid]))[0].max())
            steps += 1
            if g_mid >= 0:
                hi, g_hi = mid, g_mid
            else:
                lo, g_lo = mid, g_mid
        lam = lo if abs(g_lo) < abs(g_hi) else hi
    else:
        lam = hi
    f_star, pts = coords_at(np.array([lam]))
    f_star = f_star[0]
    k = int(np.argmax(f_star))
    return ReductionTrace(lam, k, scanned, steps, f_star, pts[0])


def _drop_dependent(comb: ConvexCombination):
    """One elimination on n+1 atoms whose translated images are rank deficient."""
    y = comb.images - comb.target
    rows = [list(y[:, c]) for c in range(comb.n)] + [[1.0] * comb.size]
    g = null_vector(rows)
    if g is None:
        return None
    g = np.array(g)
    g /= np.abs(g).max()
    pos = np.flatnonzero(g > 0)
    if pos.size == 0:
        return None
    ratios = comb.weights[pos] / g[pos]
    j = int(pos[np.argmin(ratios)])
    w = comb.weights - ratios.min() * g
    w[j] = 0.0
    keep = np.flatnonzero(w > 1e-15)
    w = w[keep] / math.fsum(w[keep])
    return ConvexCombination.build(comb.points[keep], w, comb.images[keep], comb.target,
                                   trace=list(comb.trace) + [{"stage": "reduce", "degenerate": True}])


def reduce(comb: ConvexCombination, fns, measure: Measure, grid: int = GRID) -> ConvexCombination:
    """Replace an (n+1)-atom combination with one of at most n atoms.

    Tries every distinguished atom and path partner in index order until
    one walk succeeds; if all fail, returns the input flagged
    ``not_reduced`` rather than a wrong answer.
    """
    n = comb.n
    if comb.size <= n:
        return comb
    if comb.size != n + 1:
        raise ValueError(f"reduce expects n+1 = {n + 1} atoms, got {comb.size}")
    if np.any(comb.weights <= 0):
        keep = np.flatnonzero(comb.weights > 0)
        w = comb.weights[keep] / math.fsum(comb.weights[keep])
        return ConvexCombination.build(comb.points[keep], w, comb.images[keep], comb.target,
                                       trace=list(comb.trace))
    if not measure.supports_paths:
        return replace(comb, not_reduced=True)

    target = comb.target
    bound = comb.residual + 1e-8 * (1.0 + float(np.abs(target).max()))
    y = comb.images - target
    if pivoted_rank([list(y[:, c]) for c in range(n)]) < n:
        out = _drop_dependent(comb)
        if out is not None and out.residual <= bound and out.size <= n:
            return out

    failures = []
    for d0 in range(n + 1):
        others = [j for j in range(n + 1) if j != d0]
        try:
            frame = BarycentricFrame.from_images(comb.images[others], comb.images[d0], target)
        except (ReductionError, np.linalg.LinAlgError, ValueError) as exc:
            failures.append(f"atom {d0}: {exc}")
            continue
        for slot, partner in enumerate(others):
            # the partner must be basis vector 0 so that f_0(1) = 1
            order = [partner] + [j for j in others if j != partner]
            if slot:
                try:
                    frame = BarycentricFrame.from_images(comb.images[order], comb.images[d0], target)
                except (ReductionError, np.linalg.LinAlgError, ValueError) as exc:
                    failures.append(f"atom {d0} -> {partner}: {exc}")
                    continue
            try:
                path = make_path(measure, comb.points[d0], comb.points[partner])
                tr = first_zero_crossing(frame, fns, path, grid=grid)
            except (ReductionError, ConfigError) as exc:
                failures.append(f"atom {d0} -> {partner}: {exc}")
                continue
            out = _assemble(comb, fns, order, tr, bound)
            if isinstance(out, str):
                failures.append(f"atom {d0} -> {partner}: {out}")
                continue
            tr.distinguished, tr.partner = d0, partner
            out.trace = list(comb.trace) + [{"stage": "reduce", **tr.to_json()}]
            return out
    return replace(comb, not_reduced=True,
                   trace=list(comb.trace) + [{"stage": "reduce", "not_reduced": failures}])


def _assemble(comb, fns, order, tr: ReductionTrace, bound: float):
    k = tr.vanished_index
    kept = [j for pos, j in enumerate(order) if pos != k]
    coef = np.concatenate([[1.0], -np.delete(tr.coords, k)])
    w = coef / math.fsum(coef)
    if w.min() < -NEG_FAIL:
        return f"negative weight {w.min():.3e}"
    if w.min() < 0:
        w = np.clip(w, 0.0, None)
        w = w / math.fsum(w)
    pts = np.vstack([tr.point[None, :], comb.points[kept]])
    try:
        imgs = np.vstack([images(fns, tr.point[None, :]), comb.images[kept]])
    except EvalError as exc:
        return str(exc)
    res = weighted_residual(w, imgs, comb.target)
    if res > bound:
        return f"residual {res:.3e} exceeds {bound:.3e}"
    return ConvexCombination(pts, w, imgs, comb.target, res)

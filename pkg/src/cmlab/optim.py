"""Optimization of penalized objectives over auxiliary joints.

The inner min/max of each penalized objective is attacked by multi-start
projected gradient on the probability simplex. Because every reported
value is attained by the returned point, an optimizer output is a one-sided
bound: an upper bound on a minimum, a lower bound on a maximum. Exhaustive
lattice searches over factored (Markov-feasible) channels give an
independent baseline on binary and ternary instances.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .objectives import (
    AuxModel,
    CompiledObjective,
    ObjectiveParams,
    Problem,
    StructuredAux,
    assemble,
    constrained_terms_value,
    induced_q,
    objective,
    objective_terms,
    penalty_terms,
)
from .prob_core import kl_div, named_product
from .reports import ChainReport
from .validation import CapExceededError

WORKERS_ENV = "CMLAB_WORKERS"
GRID_CAP = 2_000_000


def n_workers() -> int:
    """Worker count from the ``CMLAB_WORKERS`` environment variable (default 1)."""
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class OptBudget:
    restarts: int = 32
    max_iters: int = 400
    step0: float = 1.0
    seed: int = 0
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")


def project_simplex(v: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    """Euclidean projection onto the probability simplex.

    Entries where ``mask`` is True are pinned to zero and the rest are
    projected onto the simplex of the remaining coordinates.
    """
    v = np.asarray(v, dtype=float)
    flat = v.ravel()
    out = np.zeros_like(flat)
    free = np.ones(flat.size, dtype=bool) if mask is None else ~mask.ravel()
    w = flat[free]
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, u.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    out[free] = np.maximum(w - theta, 0.0)
    return out.reshape(v.shape)


def _descend(f: CompiledObjective, p: np.ndarray, budget: OptBudget):
    """Projected gradient with Armijo backtracking on ``sign * value``."""
    sign = f.sign
    val, grad = f.value_and_grad(p)
    val, grad = sign * val, sign * grad
    step = budget.step0
    for t in range(1, budget.max_iters + 1):
        step = min(2.0 * step, budget.step0 / math.sqrt(t))
        accepted = False
        for _ in range(40):
            cand = project_simplex(p - step * grad, f.forbidden)
            move = p - cand
            decrease = float(np.sum(grad * move))
            if decrease <= 0:
                step *= 0.5
                continue
            cval = sign * f.value(cand)
            if cval <= val - 1e-4 * decrease:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        gain = val - cval
        p = cand
        val, grad = f.value_and_grad(p)
        val, grad = sign * val, sign * grad
        if gain < budget.tolerance:
            break
    return p, sign * val


def _clean(p, forbidden):
    p = np.where(forbidden, 0.0, np.maximum(p, 0.0))
    return p / p.sum()


def _factor_layout(problem: Problem, sizes: dict[str, int]):
    """Names of the factored parametrization: fixed part and two channels.

    Each channel is a list of axis names whose trailing group is the output;
    ``n_in`` gives the number of leading input axes.
    """
    r = problem.roles()
    X, Y = r["X"], r["Y"]
    if problem.kind == "WT":
        ch = problem.channel_n()
        fixed = (list(ch.input_names + ch.output_names), ch.matrix)
        return fixed, [(["U"], 0), (["U"] + X, 1)]
    last = r["Z"] if problem.kind == "WZ" else r["V"]
    fixed = (X + Y, problem.source_n().marginal(X + Y))
    return fixed, [(X + ["U"], len(X)), (["U"] + Y + last, 1 + len(Y))]


def _project_rows(t: np.ndarray, n_in: int) -> np.ndarray:
    k = math.prod(t.shape[n_in:])
    rows = t.reshape(-1, k)
    return np.stack([project_simplex(row) for row in rows]).reshape(t.shape)


def _factored_descent(f: CompiledObjective, problem, sizes, rng, budget):
    """Projected gradient over Markov-feasible points, each channel row on its simplex."""
    names = f.names
    dims = dict(zip(names, f.shape))
    fixed, layout = _factor_layout(problem, sizes)
    chans = []
    for axes, n_in in layout:
        shape = [dims[a] for a in axes]
        k = math.prod(shape[n_in:])
        rows = rng.dirichlet(np.ones(k), size=math.prod(shape[:n_in]))
        chans.append(rows.reshape(shape))

    def joint(cs):
        return named_product(names, [fixed] + [(axes, c) for (axes, _), c in
                                               zip(layout, cs)])

    def grads(g, cs):
        out = []
        for i, (axes, _) in enumerate(layout):
            others = [fixed] + [(a, c) for j, ((a, _), c) in enumerate(zip(layout, cs))
                                if j != i]
            full = named_product(names, [(names, g)] + others)
            drop = tuple(k for k, nm in enumerate(names) if nm not in axes)
            red = full.sum(axis=drop)
            kept = [nm for nm in names if nm in axes]
            out.append(np.transpose(red, [kept.index(a) for a in axes]))
        return out

    sign = f.sign
    val, g = f.value_and_grad(joint(chans))
    val, g = sign * val, sign * g
    step = budget.step0
    for t in range(1, budget.max_iters + 1):
        gs = grads(g, chans)
        step = min(2.0 * step, budget.step0 / math.sqrt(t))
        accepted = False
        for _ in range(40):
            cand = [_project_rows(c - step * gc, n_in)
                    for c, gc, (_, n_in) in zip(chans, gs, layout)]
            decrease = sum(float(np.sum(gc * (c - cc)))
                           for c, gc, cc in zip(chans, gs, cand))
            if decrease <= 0:
                step *= 0.5
                continue
            cval = sign * f.value(joint(cand))
            if cval <= val - 1e-4 * decrease:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        gain = val - cval
        chans = cand
        val, g = f.value_and_grad(joint(chans))
        val, g = sign * val, sign * g
        if gain < budget.tolerance:
            break
    return joint(chans)


def _run_restart(problem, sizes, params, budget, index, seed_seq, init):
    f = CompiledObjective(problem, sizes, params)
    if init is None:
        rng = np.random.default_rng(seed_seq)
        if index % 2 == 0:
            p0 = rng.dirichlet(np.ones(f.forbidden.size)).reshape(f.shape)
        else:
            p0 = _factored_descent(f, problem, sizes, rng, budget)
        p0 = _clean(p0, f.forbidden)
    else:
        p0 = _clean(np.asarray(init, dtype=float).reshape(f.shape), f.forbidden)
    p, v = _descend(f, p0, budget)
    return p, v


def _better(a: float, b: float, is_min: bool) -> bool:
    return a < b if is_min else a > b


@dataclass(frozen=True, eq=False)
class OptResult:
    aux: AuxModel
    value: float
    restart_values: tuple
    best_restart: int


def optimize(problem: Problem, params: ObjectiveParams, budget: OptBudget = OptBudget(),
             sizes: dict[str, int] | None = None, inits=(), workers: int | None = None
             ) -> tuple[AuxModel, float]:
    """Best penalized objective found over auxiliary joints.

    Returns ``(aux, value)``; ``value`` is the reference evaluation of
    ``aux`` and therefore an attained one-sided bound.
    """
    res = optimize_full(problem, params, budget, sizes, inits, workers)
    return res.aux, res.value


def optimize_full(problem, params, budget=OptBudget(), sizes=None, inits=(),
                  workers=None) -> OptResult:
    sizes = dict(problem.default_sizes() if sizes is None else sizes)
    workers = n_workers() if workers is None else workers
    seeds = np.random.SeedSequence(budget.seed).spawn(budget.restarts)
    jobs = [(i, s, None) for i, s in enumerate(seeds)]
    jobs += [(len(jobs) + k, None, np.asarray(x)) for k, x in enumerate(inits)]
    if workers > 1 and len(jobs) > 1:
        from joblib import Parallel, delayed
        results = Parallel(n_jobs=workers)(
            delayed(_run_restart)(problem, sizes, params, budget, i, s, init)
            for i, s, init in jobs)
    else:
        results = [_run_restart(problem, sizes, params, budget, i, s, init)
                   for i, s, init in jobs]
    best_i, best_v = None, None
    for i, (_, v) in enumerate(results):
        if not math.isfinite(v):
            continue
        if best_v is None or _better(v, best_v, problem.is_min):
            best_i, best_v = i, v
    if best_i is None:
        raise RuntimeError("optimizer found no finite-valued point")
    aux = AuxModel.from_array(problem, results[best_i][0])
    value = objective(problem, aux, params)
    return OptResult(aux, value, tuple(v for _, v in results), best_i)


def embed_point(problem: Problem, aux: AuxModel, sizes: dict[str, int]) -> np.ndarray:
    """Zero-pad the U (and V) axes of ``aux`` to ``sizes``, e.g. to warm-start
    :func:`optimize` from a lattice point."""
    mass = aux.joint.mass
    pad = []
    for a in aux.joint.axes:
        want = sizes.get(a.name, a.size) if a.name in ("U", "V") else a.size
        if want < a.size:
            raise ValueError(f"cannot embed axis {a.name} of size {a.size} into {want}")
        pad.append((0, want - a.size))
    return np.pad(mass, pad)


# ---------------------------------------------------------------------------
# exhaustive lattice baselines

def simplex_lattice(k: int, resolution: int) -> np.ndarray:
    """All points of the k-simplex with coordinates in ``(1/resolution) Z``."""
    pts = []
    for bars in itertools.combinations(range(resolution + k - 1), k - 1):
        prev, counts = -1, []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(resolution + k - 2 - prev)
        pts.append(counts)
    return np.asarray(pts, dtype=float) / resolution


def set_partitions(n: int) -> list[tuple[int, ...]]:
    """Restricted-growth labelings of ``range(n)``: one per set partition."""
    out = []

    def rec(prefix, top):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for lab in range(top + 2):
            rec(prefix + [lab], max(top, lab))

    rec([0], 0) if n else out.append(())
    return out


def _xlogx(a, axis):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(a > 0, a * np.log2(np.where(a > 0, a, 1.0)), 0.0)
    return t.sum(axis=axis)


def _h(a, axes):
    """Entropy of each batch element, summing over ``axes``."""
    return -_xlogx(a, axes)


@dataclass(frozen=True, eq=False)
class GridResult:
    value: float
    slack: float
    point: StructuredAux | None
    resolution: int
    size: int


def _row_grid(n_rows: int, k: int, resolution: int, cap: int) -> np.ndarray:
    rows = simplex_lattice(k, resolution)
    total = rows.shape[0] ** n_rows
    if total > cap:
        raise CapExceededError(f"grid of {total} points exceeds cap {cap}")
    idx = np.array(list(itertools.product(range(rows.shape[0]), repeat=n_rows)))
    return rows[idx]  # (N, n_rows, k)


def _local_rows(center: np.ndarray, resolution: int, radius: float) -> np.ndarray:
    """Lattice points near ``center`` (rows independently), at ``resolution``."""
    n_rows, k = center.shape
    rows = simplex_lattice(k, resolution)
    choices = []
    for r in range(n_rows):
        near = rows[np.max(np.abs(rows - center[r]), axis=1) <= radius + 1e-12]
        choices.append(near)
    idx = itertools.product(*[range(c.shape[0]) for c in choices])
    return np.array([[choices[r][i] for r, i in enumerate(t)] for t in idx])


def _wz_eval(problem, chans, mu):
    """Constrained WZ value for a batch of P(u|x); the decoder is optimized exactly."""
    pxy = problem.source.mass
    j = pxy[None, :, :, None] * chans[:, :, None, :]  # (N, x, y, u)
    h_u_y = _h(j.sum(axis=1), (1, 2)) - _h(pxy.sum(axis=0), (0,))
    h_u_x = _h(j.sum(axis=2), (1, 2)) - _h(pxy.sum(axis=1), (0,))
    rate = h_u_y - h_u_x
    cost = np.einsum("nxyu,xz->nyuz", j, problem.distortion)
    dist = cost.min(axis=-1).sum(axis=(1, 2))
    vals = rate + mu * dist
    return vals, cost.argmin(axis=-1)


def _cr_eval(problem, chans, mu):
    pxy = problem.source.mass
    ny = pxy.shape[1]
    j = pxy[None, :, :, None] * chans[:, :, None, :]  # (N, x, y, u)
    pu = j.sum(axis=(1, 2))
    pxu = j.sum(axis=2)
    pyu = j.sum(axis=1)
    i_ux = _h(pxy.sum(axis=1), (0,)) + _h(pu, (1,)) - _h(pxu, (1, 2))
    h_x_y = _h(pxy, (0, 1)) - _h(pxy.sum(axis=0), (0,))
    h_x_uy = _h(j, (1, 2, 3)) - _h(pyu, (1, 2))
    i_ux_y = h_x_y - h_x_uy
    parts = set_partitions(ny)
    best = np.full(pu.shape, -np.inf)
    arg = np.zeros(pu.shape, dtype=int)
    for gi, g in enumerate(parts):
        onehot = np.eye(max(g) + 1)[list(g)]
        jv = np.einsum("nxyu,yv->nxuv", j, onehot)
        h_vu = -_xlogx(jv.sum(axis=1), 2) + _xlogx(pu, ())
        h_vxu = -_xlogx(jv, (1, 3)) + _xlogx(pxu, 1)
        score = h_vu - mu * h_vxu
        better = score > best + 1e-15
        best = np.where(better, score, best)
        arg = np.where(better, gi, arg)
    vals = i_ux - mu * i_ux_y + best.sum(axis=1)
    return vals, arg, parts


def _fc_eval(problem, chans):
    pxy = problem.source.mass
    f = problem.function
    nx, ny = pxy.shape
    j = pxy[None, :, :, None] * chans[:, :, None, :]
    pu = j.sum(axis=(1, 2))
    pxu = j.sum(axis=2)
    pyu = j.sum(axis=1)
    h_x_y = _h(pxy, (0, 1)) - _h(pxy.sum(axis=0), (0,))
    h_x_uy = _h(j, (1, 2, 3)) - _h(pyu, (1, 2))
    i_ux_y = h_x_y - h_x_uy
    support = j > 0  # (N, x, y, u)
    # H(F|Y,U) = 0: f constant over x on every supported (y, u)
    ok = np.ones(chans.shape[0], dtype=bool)
    for y in range(ny):
        for x1 in range(nx):
            for x2 in range(x1 + 1, nx):
                if f[x1, y] != f[x2, y]:
                    ok &= ~np.any(support[:, x1, y, :] & support[:, x2, y, :], axis=1)
    parts = set_partitions(ny)
    best = np.full(pu.shape, np.inf)
    arg = np.zeros(pu.shape, dtype=int)
    for gi, g in enumerate(parts):
        # H(F|X,U,V) = 0: within a block of g, f constant over supported y
        feas = np.ones(pu.shape, dtype=bool)
        for x in range(nx):
            for y1 in range(ny):
                for y2 in range(y1 + 1, ny):
                    if g[y1] == g[y2] and f[x, y1] != f[x, y2]:
                        feas &= ~(support[:, x, y1, :] & support[:, x, y2, :])
        onehot = np.eye(max(g) + 1)[list(g)]
        jv = np.einsum("nxyu,yv->nxuv", j, onehot)
        score = np.where(feas, -_xlogx(jv, (1, 3)) + _xlogx(pxu, 1), np.inf)
        better = score < best - 1e-15
        best = np.where(better, score, best)
        arg = np.where(better, gi, arg)
    vals = np.where(ok, i_ux_y + best.sum(axis=1), np.inf)
    return vals, arg, parts


def _wt_eval(problem, pu, px_u):
    """I(U∧Y) − I(U∧Z) for a batch of (P(u), P(x|u))."""
    w1, w2 = problem.w1, problem.w2
    pux = pu[:, :, None] * px_u  # (N, u, x)
    out = []
    for w in (w1, w2):
        puy = np.einsum("nux,xy->nuy", pux, w)
        py = puy.sum(axis=1)
        mi = _h(py, (1,)) + _h(pu, (1,)) - _h(puy, (1, 2))
        out.append(mi)
    return out[0] - out[1]


def _grid_values(problem, params, rows, extra=None):
    kind = problem.kind
    if kind == "WZ":
        vals, arg = _wz_eval(problem, rows, params.mu)
        return vals, ("wz", arg)
    if kind in ("CR", "SK"):
        mu = params.mu + 1 if kind == "SK" else params.mu
        vals, arg, parts = _cr_eval(problem, rows, mu)
        return vals, ("v", arg, parts)
    if kind == "FC":
        vals, arg, parts = _fc_eval(problem, rows)
        return vals, ("v", arg, parts)
    raise ValueError(kind)


def _structured_from(problem, row, info, i):
    ny = problem.y_size
    nu = row.shape[1]
    if info[0] == "wz":
        nz = problem.z_size
        second = np.zeros((nu, ny, nz))
        arg = info[1][i]  # (y, u)
        for u in range(nu):
            for y in range(ny):
                second[u, y, arg[y, u]] = 1.0
        return StructuredAux(row, second)
    _, arg, parts = info
    second = np.zeros((nu, ny, ny))
    for u in range(nu):
        g = parts[arg[i, u]]
        for y in range(ny):
            second[u, y, g[y]] = 1.0
    return StructuredAux(row, second)


def grid_baseline(problem: Problem, params: ObjectiveParams, resolution: int = 64,
                  cap: int = GRID_CAP, refine: int = 4) -> GridResult:
    """Exhaustive lattice search over factored auxiliary channels.

    The value is the best constrained objective on the lattice (attained by
    a feasible point, so an upper bound on a constrained minimum and a lower
    bound on a constrained maximum). The slack is the improvement found by a
    local search at ``refine`` times the resolution around the best point:
    an empirical modulus, not a proven bound.
    """
    if problem.n != 1:
        raise ValueError("grid baselines are single-letter")
    is_min = problem.is_min
    if problem.kind == "WT":
        return _wt_grid(problem, resolution, cap, refine)
    nx = problem.x_size
    rows = _row_grid(nx, nx, resolution, cap)
    vals, info = _grid_values(problem, params, rows)
    i = int(np.argmin(vals) if is_min else np.argmax(vals))
    best = float(vals[i])
    point = _structured_from(problem, rows[i], info, i) if math.isfinite(best) else None
    slack = 0.0
    if refine > 1 and math.isfinite(best):
        local = _local_rows(rows[i], resolution * refine, 1.0 / resolution)
        if local.shape[0] <= cap:
            lv, _ = _grid_values(problem, params, local)
            fine = float(np.min(lv) if is_min else np.max(lv))
            if math.isfinite(fine):
                slack = max(0.0, (best - fine) if is_min else (fine - best))
    if point is not None:
        check = constrained_terms_value(
            problem.kind, objective_terms(problem, assemble(problem, point)), params.mu)
        if abs(check - best) > 1e-9:
            raise ArithmeticError(f"grid value {best} does not match its point ({check})")
    return GridResult(best, slack, point, resolution, rows.shape[0])


def _wt_grid(problem, resolution, cap, refine):
    nx = problem.x_size
    nu = nx
    pus = simplex_lattice(nu, resolution)
    rows = simplex_lattice(nx, resolution)
    total = pus.shape[0] * rows.shape[0] ** nu
    if total > cap:
        raise CapExceededError(f"grid of {total} points exceeds cap {cap}")
    idx = np.array(list(itertools.product(range(rows.shape[0]), repeat=nu)))
    conds = rows[idx]  # (M, u, x)
    best, arg = -np.inf, None
    for a in range(pus.shape[0]):
        pu = np.broadcast_to(pus[a], (conds.shape[0], nu))
        vals = _wt_eval(problem, pu, conds)
        k = int(np.argmax(vals))
        if vals[k] > best + 1e-15:
            best, arg = float(vals[k]), (a, k)
    pu0, cond0 = pus[arg[0]], conds[arg[1]]
    slack = 0.0
    if refine > 1:
        fine_res = resolution * refine
        rad = 1.0 / resolution
        fp = _local_rows(pu0[None, :], fine_res, rad)[:, 0, :]
        fc = _local_rows(cond0, fine_res, rad)
        if fp.shape[0] * fc.shape[0] <= cap:
            fine = -np.inf
            for a in range(fp.shape[0]):
                v = _wt_eval(problem, np.broadcast_to(fp[a], (fc.shape[0], nu)), fc)
                fine = max(fine, float(v.max()))
            slack = max(0.0, fine - best)
    point = StructuredAux(pu0, cond0)
    return GridResult(best, slack, point, resolution, total)


# ---------------------------------------------------------------------------
# alpha scans

DEFAULT_ALPHAS = tuple(2.0 ** k for k in range(-4, 11))


def penalty_norm(problem: Problem, aux: AuxModel) -> float:
    """D(P‖Q) between a point and its induced reference distribution."""
    return kl_div(aux.joint, induced_q(problem, aux))


@dataclass(frozen=True, eq=False)
class AlphaScan:
    grid: tuple
    values: tuple
    points: tuple
    penalty_norms: tuple
    constrained: float | None = None
    slack: float = 0.0

    def __post_init__(self):
        g = self.grid
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ValueError("alpha grid must be strictly increasing")

    @property
    def limit_estimate(self) -> float:
        return self.values[-1]

    def gaps(self, is_min: bool) -> list[float]:
        if self.constrained is None:
            return [math.nan] * len(self.values)
        if is_min:
            return [self.constrained - v for v in self.values]
        return [v - self.constrained for v in self.values]

    def rows(self, is_min: bool):
        return [(a, v, gp, pn) for a, v, gp, pn in
                zip(self.grid, self.values, self.gaps(is_min), self.penalty_norms)]


def alpha_scan(problem: Problem, mu: float, grid=DEFAULT_ALPHAS,
               budget: OptBudget = OptBudget(), sizes=None, resolution: int | None = 64,
               workers: int | None = None) -> AlphaScan:
    """Optimize at each alpha in turn.

    Each alpha is warm-started from the previous best point and, when
    ``resolution`` is given, from the constrained lattice optimum, which is
    feasible at every alpha.
    """
    grid = tuple(float(a) for a in grid)
    sizes = dict(problem.default_sizes() if sizes is None else sizes)
    constrained, slack, lattice = None, 0.0, None
    if resolution:
        g = grid_baseline(problem, ObjectiveParams(mu, grid[-1]), resolution)
        constrained, slack = g.value, g.slack
        if g.point is not None:
            lattice = embed_point(problem, assemble(problem, g.point), sizes)
    values, points, norms = [], [], []
    prev = None
    for k, alpha in enumerate(grid):
        params = ObjectiveParams(mu, alpha)
        b = replace(budget, seed=int(np.random.SeedSequence([budget.seed, k])
                                     .generate_state(1)[0]))
        inits = [] if prev is None else [prev.joint.mass]
        if lattice is not None:
            inits.append(lattice)
        aux, value = optimize(problem, params, b, sizes, tuple(inits), workers)
        values.append(value)
        points.append(aux)
        norms.append(penalty_norm(problem, aux))
        prev = aux
    return AlphaScan(grid, tuple(values), tuple(points), tuple(norms), constrained, slack)


def appendix_constant(problem: Problem, mu: float) -> float:
    """Bound ``a`` with ``alpha * D(P‖Q) <= a`` at any near-optimal point."""
    nx, ny = problem.x_size, problem.y_size
    if problem.kind == "WZ":
        return math.log2(nx) + mu * float(problem.distortion.max())
    if problem.kind == "FC":
        return math.log2(nx * ny)
    if problem.kind in ("CR", "SK"):
        m = mu + 1 if problem.kind == "SK" else mu
        return (1 + m) * math.log2(nx * ny)
    return math.log2(ny)


def penalty_decay_check(problem: Problem, mu: float, alpha: float, best: AuxModel,
                        constrained: float | None = None, slack: float = 0.0,
                        tol: float = 1e-9) -> list[ChainReport]:
    """Check the penalty-decay mechanism at an optimizer output.

    Every weighted penalty is bounded by the value (min forms) or by the
    trivial upper bound minus the value (max forms); and when the value is
    within ``slack`` of the constrained optimum, D(P‖Q) <= a / alpha + slack.
    """
    params = ObjectiveParams(mu, alpha)
    v = objective(problem, best, params)
    terms = objective_terms(problem, best)
    pens = penalty_terms(problem.kind, terms, mu, alpha)
    nx, ny = problem.x_size, problem.y_size
    out = []
    if problem.is_min:
        ceiling = v
    elif problem.kind == "WT":
        ceiling = math.log2(ny) - v
    else:
        ceiling = math.log2(nx * ny) - v
    for name, val in pens.items():
        out.append(ChainReport.make(f"penalty {name} <= budget", "penalty-decay",
                                    val, ceiling, "<=", tol))
    out.append(ChainReport.make("total penalty <= budget", "penalty-decay",
                                sum(pens.values()), ceiling, "<=", tol))
    d = penalty_norm(problem, best) if problem.kind != "WT" else terms["channel_div"]
    a = appendix_constant(problem, mu)
    near = constrained is None or (
        v <= constrained + slack + tol if problem.is_min else v >= constrained - slack - tol)
    if near:
        out.append(ChainReport.make("divergence <= a/alpha", "penalty-decay-rate",
                                    d, a / alpha + slack, "<=", tol))
    return out


# ---------------------------------------------------------------------------
# estimator wrappers

class PenalizedRate(BaseEstimator):
    """Estimator-style wrapper around :func:`optimize`.

    ``fit(problem)`` stores the best point in ``aux_`` and its value in
    ``value_``.
    """

    def __init__(self, mu=0.0, alpha=1.0, restarts=32, max_iters=400, seed=0,
                 sizes=None):
        self.mu = mu
        self.alpha = alpha
        self.restarts = restarts
        self.max_iters = max_iters
        self.seed = seed
        self.sizes = sizes

    def fit(self, problem: Problem, y=None):
        budget = OptBudget(self.restarts, self.max_iters, seed=self.seed)
        res = optimize_full(problem, ObjectiveParams(self.mu, self.alpha), budget,
                            self.sizes)
        self.aux_ = res.aux
        self.value_ = res.value
        self.restart_values_ = np.asarray(res.restart_values)
        return self

    def score(self, problem=None, y=None) -> float:
        check_is_fitted(self, "value_")
        return self.value_


class AlphaScanner(BaseEstimator):
    """Estimator-style wrapper around :func:`alpha_scan`; result in ``scan_``."""

    def __init__(self, mu=0.0, grid=DEFAULT_ALPHAS, restarts=32, max_iters=400, seed=0,
                 resolution=64, sizes=None):
        self.mu = mu
        self.grid = grid
        self.restarts = restarts
        self.max_iters = max_iters
        self.seed = seed
        self.resolution = resolution
        self.sizes = sizes

    def fit(self, problem: Problem, y=None):
        budget = OptBudget(self.restarts, self.max_iters, seed=self.seed)
        self.scan_ = alpha_scan(problem, self.mu, self.grid, budget, self.sizes,
                                self.resolution)
        self.is_min_ = problem.is_min
        return self

    def transform(self, problem=None):
        check_is_fitted(self, "scan_")
        return np.asarray(self.scan_.rows(self.is_min_), dtype=float)

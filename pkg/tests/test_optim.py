import math
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmlab.objectives import (
    AuxModel,
    ObjectiveParams,
    Problem,
    assemble,
    constrained_value,
    objective,
    random_aux,
)
from cmlab.optim import (
    DEFAULT_ALPHAS,
    AlphaScan,
    AlphaScanner,
    OptBudget,
    PenalizedRate,
    alpha_scan,
    appendix_constant,
    embed_point,
    grid_baseline,
    n_workers,
    optimize,
    optimize_full,
    penalty_decay_check,
    project_simplex,
    set_partitions,
    simplex_lattice,
)
from cmlab.prob_core import dsbs, mutual_info
from cmlab.suites import standard_problems
from cmlab.validation import CapExceededError


def _h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


PROBS = standard_problems()
# constrained values at lattice resolution 64; the first, third and fifth
# have closed forms (distortion-weighted zero rate, I(X;Y), h(0.3) - h(0.1))
GRID_GOLDENS = {
    ("WZ", 2.0): 0.2,
    ("FC", 0.0): 0.703493390383922,
    ("CR", 1.0): 0.5310044064107197,
    ("SK", 0.0): 0.5310044064107197,
    ("WT", 0.0): 0.41229530564141115,
}


@pytest.mark.parametrize("k,res", [(1, 5), (2, 64), (3, 10), (4, 7)])
def test_simplex_lattice_count(k, res):
    pts = simplex_lattice(k, res)
    assert pts.shape == (comb(res + k - 1, k - 1), k)
    assert np.allclose(pts.sum(axis=1), 1.0)
    assert (pts >= 0).all()
    assert len({tuple(p) for p in pts}) == pts.shape[0]


def test_set_partitions_are_bell_numbers():
    assert [len(set_partitions(n)) for n in range(6)] == [1, 1, 2, 5, 15, 52]


@settings(max_examples=300)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=12))
def test_projection_lands_on_simplex(v):
    p = project_simplex(np.array(v))
    assert p.sum() == pytest.approx(1.0)
    assert (p >= 0).all()
    # idempotent
    assert project_simplex(p) == pytest.approx(p, abs=1e-12)


def test_projection_respects_mask():
    mask = np.array([True, False, False])
    p = project_simplex(np.array([10.0, 0.2, 0.1]), mask)
    assert p[0] == 0.0 and p.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("kind,mu", list(GRID_GOLDENS))
def test_grid_goldens(kind, mu):
    g = grid_baseline(PROBS[kind], ObjectiveParams(mu, 1.0), 64)
    assert g.value == pytest.approx(GRID_GOLDENS[kind, mu], abs=1e-12)
    assert g.slack >= 0
    if g.point is not None:
        assert constrained_value(PROBS[kind], g.point, mu) == pytest.approx(g.value, abs=1e-9)


def test_grid_closed_forms_independently():
    assert GRID_GOLDENS["CR", 1.0] == pytest.approx(mutual_info(dsbs(0.1), "X", "Y"), abs=1e-12)
    assert GRID_GOLDENS["WT", 0.0] == pytest.approx(_h2(0.3) - _h2(0.1), abs=1e-12)
    assert GRID_GOLDENS["WZ", 2.0] == pytest.approx(2 * 0.1)


def test_grid_cap():
    with pytest.raises(CapExceededError):
        grid_baseline(PROBS["CR"], ObjectiveParams(1.0, 1.0), 64, cap=100)
    with pytest.raises(ValueError):
        grid_baseline(PROBS["CR"].extend(2), ObjectiveParams(1.0, 1.0), 4)


@pytest.mark.parametrize("kind,mu", [("WZ", 2.0), ("CR", 1.0), ("WT", 0.0)])
def test_penalized_relaxes_constrained(kind, mu):
    prob = PROBS[kind]
    params = ObjectiveParams(mu, 64.0)
    g = grid_baseline(prob, params, 64)
    aux, v = optimize(prob, params, OptBudget(8, 200, seed=3))
    assert v == pytest.approx(objective(prob, aux, params), abs=1e-12)
    if prob.is_min:
        assert v <= g.value + g.slack + 1e-3
    else:
        assert v >= g.value - g.slack - 1e-3


def test_optimizer_is_seed_deterministic():
    prob, params = PROBS["CR"], ObjectiveParams(1.0, 4.0)
    a = optimize_full(prob, params, OptBudget(4, 50, seed=11))
    b = optimize_full(prob, params, OptBudget(4, 50, seed=11), workers=2)
    assert a.restart_values == b.restart_values
    assert a.value == b.value


def test_warm_start_from_lattice_point():
    prob, params = PROBS["WZ"], ObjectiveParams(2.0, 16.0)
    g = grid_baseline(prob, params, 64)
    seed = embed_point(prob, assemble(prob, g.point), {"U": 3})
    res = optimize_full(prob, params, OptBudget(1, 100, seed=0), {"U": 3}, inits=(seed,))
    assert res.value <= g.value + 1e-12
    assert len(res.restart_values) == 2


def test_embed_point_pads_with_zeros(rng):
    prob = PROBS["CR"]
    aux = random_aux(prob, {"U": 2, "V": 1}, rng, "dirichlet")
    big = embed_point(prob, aux, {"U": 3, "V": 2})
    assert big.shape == (3, 2, 2, 2)
    assert big.sum() == pytest.approx(1.0)
    back = AuxModel.from_array(prob, big)
    prm = ObjectiveParams(1.0, 2.0)
    assert objective(prob, back, prm) == pytest.approx(objective(prob, aux, prm), abs=1e-12)
    with pytest.raises(ValueError):
        embed_point(prob, back, {"U": 1, "V": 1})


def test_budget_validation(monkeypatch):
    with pytest.raises(ValueError):
        OptBudget(restarts=0)
    with pytest.raises(ValueError):
        OptBudget(tolerance=0)
    monkeypatch.setenv("CMLAB_WORKERS", "3")
    assert n_workers() == 3
    monkeypatch.setenv("CMLAB_WORKERS", "x")
    assert n_workers() == 1


def test_short_alpha_scan_and_decay():
    prob = PROBS["WZ"]
    grid = (1.0, 8.0, 64.0)
    scan = alpha_scan(prob, 2.0, grid, OptBudget(4, 150, seed=1), resolution=32)
    assert len(scan.values) == 3
    # a min form is nondecreasing in alpha
    assert all(b >= a - 1e-3 for a, b in zip(scan.values, scan.values[1:]))
    assert all(g >= -scan.slack - 1e-3 for g in scan.gaps(True))
    for a, aux in zip(scan.grid, scan.points):
        for rep in penalty_decay_check(prob, 2.0, a, aux, scan.constrained, scan.slack, 1e-3):
            assert rep.passed, rep
    with pytest.raises(ValueError):
        AlphaScan((2.0, 1.0), (0, 0), (None, None), (0, 0))


def test_appendix_constants():
    assert appendix_constant(PROBS["WZ"], 2.0) == pytest.approx(3.0)
    assert appendix_constant(PROBS["CR"], 1.0) == pytest.approx(4.0)
    assert appendix_constant(PROBS["SK"], 0.0) == pytest.approx(4.0)
    assert appendix_constant(PROBS["WT"], 0.0) == pytest.approx(1.0)
    assert DEFAULT_ALPHAS[0] == 2.0 ** -4 and DEFAULT_ALPHAS[-1] == 2.0 ** 10


def test_estimators():
    from sklearn.base import clone
    est = PenalizedRate(mu=1.0, alpha=4.0, restarts=3, max_iters=60, seed=2)
    assert clone(est).get_params() == est.get_params()
    est.fit(PROBS["CR"])
    assert est.score() == est.value_
    assert est.restart_values_.shape == (3,)
    sc = AlphaScanner(mu=1.0, grid=(1.0, 4.0), restarts=2, max_iters=40, resolution=16)
    out = sc.fit(PROBS["CR"]).transform()
    assert out.shape == (2, 4)


def test_zero_rate_and_corner_points():
    wz = PROBS["WZ"]
    cr = PROBS["CR"]
    hxy = 2.0 - GRID_GOLDENS["CR", 1.0]  # H(X,Y) = H(X) + H(Y) - I(X;Y)
    assert grid_baseline(wz, ObjectiveParams(0.0, 1.0), 16).value == pytest.approx(0.0, abs=1e-12)
    assert grid_baseline(cr, ObjectiveParams(0.0, 1.0), 16).value == pytest.approx(hxy, abs=1e-12)
    noiseless = Problem.wt(np.eye(2), np.full((2, 2), 0.5))
    assert grid_baseline(noiseless, ObjectiveParams(0.0, 1.0), 8).value == pytest.approx(1.0)
    _, v = optimize(wz, ObjectiveParams(0.0, 1.0), OptBudget(4, 100))
    assert v <= 1e-6
    _, v = optimize(cr, ObjectiveParams(0.0, 1.0), OptBudget(4, 100))
    assert v >= hxy - 1e-6


def test_scan_without_distortion_weight_is_flat():
    scan = alpha_scan(PROBS["WZ"], 0.0, (1.0, 4.0, 16.0), OptBudget(3, 100), resolution=16)
    assert np.allclose(scan.values, 0.0, atol=1e-9)


def test_feasible_point_has_zero_penalties_and_bound_halves():
    prob = PROBS["WZ"]
    g = grid_baseline(prob, ObjectiveParams(2.0, 1.0), 32)
    aux = assemble(prob, g.point)
    reps = penalty_decay_check(prob, 2.0, 16.0, aux, g.value, g.slack)
    pens = [r for r in reps if r.name.startswith("penalty ")]
    assert all(abs(r.lhs) <= 1e-10 for r in pens)
    bound16 = next(r.rhs for r in reps if r.name == "divergence <= a/alpha")
    reps32 = penalty_decay_check(prob, 2.0, 32.0, aux, g.value, g.slack)
    bound32 = next(r.rhs for r in reps32 if r.name == "divergence <= a/alpha")
    assert bound32 - g.slack == pytest.approx((bound16 - g.slack) / 2)

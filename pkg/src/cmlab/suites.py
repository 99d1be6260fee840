"""Randomized check suites shared by the ``check`` command and the acceptance tests.

Every suite draws its instances from one seeded generator per instance
(``default_rng([seed, index])``), so a suite is reproducible instance by
instance and the order of evaluation never changes the draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .additivity import EXACT_TOL, THEOREM_TOL, prop1_sides, random_joint_n, theorem_check
from .objectives import AuxModel, ObjectiveParams, Problem, objective, random_aux
from .optim import (
    DEFAULT_ALPHAS,
    OptBudget,
    alpha_scan,
    penalty_decay_check,
)
from .prob_core import (
    EventSet,
    JointPmf,
    ckm_difference,
    dsbs,
    kl_div,
    product_extend,
    tilt_on_event,
)
from .reports import ChainReport

OPTIMIZER_TOL = 1e-3
AUX_STYLES = ("dirichlet", "sparse", "structured", "near")


@dataclass(frozen=True)
class InstanceRow:
    """One sampled instance: ``(problem, n, seed, lhs, rhs, margin, pass)``."""

    problem: str
    n: int
    seed: str
    report: ChainReport

    def as_row(self):
        r = self.report
        return (self.problem, self.n, self.seed, r.lhs, r.rhs, r.margin, r.passed)


ROW_HEADER = ("problem", "n", "seed", "lhs", "rhs", "margin", "pass")


def _rng(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng([seed, i])


def standard_problems() -> dict[str, Problem]:
    """The binary instances used throughout the suites and sweeps."""
    xy = dsbs(0.1)
    return {
        "WZ": Problem.wz(xy, np.array([[0.0, 1.0], [1.0, 0.0]])),
        "FC": Problem.fc(xy, np.array([[0, 0], [0, 1]])),
        "CR": Problem.cr(xy),
        "SK": Problem.sk(xy),
        "WT": Problem.wt(np.array([[0.9, 0.1], [0.1, 0.9]]),
                         np.array([[0.7, 0.3], [0.3, 0.7]])),
    }


# ---------------------------------------------------------------------------
# exact identities

def _random_pmf(rng, names, sizes, sparse=False) -> JointPmf:
    k = math.prod(sizes)
    mass = rng.dirichlet(np.full(k, 0.2 if sparse else 1.0)).reshape(sizes)
    return JointPmf.from_array(names, mass, validate=False)


def _tilt_instance(rng) -> ChainReport:
    k = int(rng.integers(1, 4))
    names = [f"A{j}" for j in range(k)]
    sizes = [int(s) for s in rng.integers(2, 4, size=k)]
    p = _random_pmf(rng, names, sizes, sparse=bool(rng.integers(2)))
    sub = names[: int(rng.integers(1, k + 1))]
    shape = [p.size_of(a) for a in sub]
    member = rng.random(shape) < 0.5
    marg = p.marginal(sub)
    if not (member & (marg > 0)).any():
        member.flat[int(np.argmax(marg))] = True
    event = EventSet([p.alphabet(a) for a in sub], member)
    tilted, cost = tilt_on_event(p, event)
    return ChainReport.make("tilt cost identity", "tilt-cost", kl_div(tilted, p), cost,
                            "==", EXACT_TOL)


def _ckm_instance(rng) -> ChainReport:
    n = int(rng.integers(2, 4))
    names = [f"X_{j}" for j in range(1, n + 1)] + [f"Y_{j}" for j in range(1, n + 1)] + ["U"]
    p = _random_pmf(rng, names, [2] * (2 * n) + [int(rng.integers(1, 4))])
    lhs, rhs = ckm_difference(p, names[:n], names[n:2 * n], ["U"])
    return ChainReport.make("telescoping identity", "csiszar-korner-marton", lhs, rhs,
                            "==", EXACT_TOL)


def _chain_rule_instance(rng) -> ChainReport:
    sizes = [int(s) for s in rng.integers(2, 4, size=2)]
    p = _random_pmf(rng, ["A", "B"], sizes)
    q = _random_pmf(rng, ["A", "B"], sizes)
    lhs = kl_div(p, q)
    rhs = kl_div(p.marginalize(["A"]), q.marginalize(["A"])) + kl_div(p, q, ["A"])
    return ChainReport.make("divergence chain rule", "divergence-chain-rule", lhs, rhs,
                            "==", EXACT_TOL)


def _sk_delegation_instance(rng) -> ChainReport:
    sk = Problem.sk(_random_pmf(rng, ["X", "Y"], [2, 2]))
    cr = Problem.cr(sk.source)
    sizes = {"U": int(rng.integers(1, 4)), "V": int(rng.integers(1, 4))}
    aux = random_aux(sk, sizes, rng, AUX_STYLES[int(rng.integers(len(AUX_STYLES)))])
    mu, alpha = float(rng.uniform(0, 3)), float(2.0 ** rng.uniform(-3, 6))
    lhs = objective(sk, aux, ObjectiveParams(mu, alpha))
    rhs = objective(cr, AuxModel(cr, aux.joint), ObjectiveParams(mu + 1, alpha))
    return ChainReport.make("secret key as shifted common randomness", "sk-delegation",
                            lhs, rhs, "==", EXACT_TOL)


IDENTITIES = {
    "tilt": _tilt_instance,
    "ckm": _ckm_instance,
    "chain_rule": _chain_rule_instance,
    "sk_delegation": _sk_delegation_instance,
}


def identity_suite(samples: int = 1000, seed: int = 0) -> list[InstanceRow]:
    """``samples`` random instances of each exact identity (tolerance 1e-10)."""
    rows = []
    for k, (name, make) in enumerate(IDENTITIES.items()):
        for i in range(samples):
            rows.append(InstanceRow(name, 1, f"{seed}:{k}:{i}", make(_rng(seed, k * 10**6 + i))))
    return rows


# ---------------------------------------------------------------------------
# entropy-plus-divergence superadditivity

def prop1_suite(samples: int = 1000, seed: int = 0, iid: int = 100) -> list[InstanceRow]:
    """Random n-letter joints (n in {2, 3}, binary or ternary) and i.i.d. equality cases."""
    rows = []
    for i in range(samples):
        rng = _rng(seed, i)
        n = int(rng.integers(2, 4))
        ternary = n == 2 and bool(rng.integers(2))
        sizes = {"X": 3 if ternary else 2, "Y": 3 if ternary and rng.integers(2) else 2}
        base = _random_pmf(rng, ["X", "Y"], [sizes["X"], sizes["Y"]])
        joint = random_joint_n(rng, sizes, n, concentration=float(rng.choice([0.2, 1.0])))
        lhs, rhs = prop1_sides(joint, base, n)
        rep = ChainReport.make(f"superadditivity n={n}", "entropy-divergence-superadditivity",
                               lhs, rhs, ">=", EXACT_TOL)
        rows.append(InstanceRow(f"prop1 {sizes['X']}x{sizes['Y']}", n, f"{seed}:{i}", rep))
    for i in range(iid):
        rng = _rng(seed, 10**6 + i)
        n = int(rng.integers(2, 4))
        base = _random_pmf(rng, ["X", "Y"], [2, 2])
        other = _random_pmf(rng, ["X", "Y"], [2, 2])
        joint = product_extend(other, n)
        lhs, rhs = prop1_sides(joint, base, n)
        rep = ChainReport.make(f"i.i.d. equality n={n}", "entropy-divergence-superadditivity",
                               lhs, rhs, "==", EXACT_TOL)
        rows.append(InstanceRow("prop1 iid", n, f"{seed}:iid:{i}", rep))
    return rows


# ---------------------------------------------------------------------------
# pointwise single-letterization

def _aux_sizes(kind: str, rng) -> dict:
    sizes = {"U": int(rng.integers(1, 4))}
    if kind in ("FC", "CR", "SK"):
        sizes["V"] = int(rng.integers(1, 4))
    return sizes


def theorem_suite(kind: str, n: int = 2, samples: int = 500, seed: int = 0,
                  problem: Problem | None = None, params: ObjectiveParams | None = None,
                  components: bool = False) -> list[InstanceRow]:
    """Random n-letter auxiliary models checked against their time-sharing witness.

    Weights are drawn per instance unless ``params`` is given. With
    ``components`` every report of :func:`theorem_check` is returned, otherwise
    only the main inequality.
    """
    base = problem if problem is not None else standard_problems()[kind]
    pn = base.extend(n)
    rows = []
    for i in range(samples):
        rng = _rng(seed, i)
        style = AUX_STYLES[i % len(AUX_STYLES)]
        aux = random_aux(pn, _aux_sizes(base.kind, rng), rng, style)
        prm = params or ObjectiveParams(float(rng.choice([0.0, 0.5, 1.0, 2.0])),
                                        float(2.0 ** rng.integers(-2, 7)))
        reps = theorem_check(pn, aux, prm, n, THEOREM_TOL)
        for rep in (reps if components else reps[:1]):
            rows.append(InstanceRow(base.kind, n, f"{seed}:{i}", rep))
    return rows


# ---------------------------------------------------------------------------
# convergence of the penalized values

@dataclass(frozen=True)
class ConvergenceResult:
    problem: str
    mu: float
    scan: object
    reports: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)


def convergence_check(problem: Problem, mu: float, grid=DEFAULT_ALPHAS,
                      budget: OptBudget = OptBudget(), resolution: int = 64,
                      gap: float = 0.02, tol: float = OPTIMIZER_TOL) -> ConvergenceResult:
    """α-scan against the constrained lattice optimum.

    Checks that the scan is monotone in α (within ``tol``), that the final
    gap is at most ``gap`` plus the lattice slack, and the penalty-decay
    bounds at every scanned point.
    """
    scan = alpha_scan(problem, mu, grid, budget, resolution=resolution)
    is_min = problem.is_min
    reps = []
    for (a0, v0), (a1, v1) in zip(zip(scan.grid, scan.values),
                                  zip(scan.grid[1:], scan.values[1:])):
        reps.append(ChainReport.make(f"monotone alpha={a0:g}->{a1:g}", "alpha-monotone",
                                     v1, v0, ">=" if is_min else "<=", tol))
    final_gap = scan.gaps(is_min)[-1]
    reps.append(ChainReport.make(f"final gap alpha={scan.grid[-1]:g}", "alpha-limit",
                                 abs(final_gap), gap + scan.slack, "<=", tol))
    if is_min:
        reps.append(ChainReport.make("scan below constrained value", "alpha-limit",
                                     scan.values[-1], scan.constrained + scan.slack, "<=",
                                     tol))
    else:
        reps.append(ChainReport.make("scan above constrained value", "alpha-limit",
                                     scan.values[-1], scan.constrained - scan.slack, ">=",
                                     tol))
    for a, aux in zip(scan.grid, scan.points):
        for r in penalty_decay_check(problem, mu, a, aux, scan.constrained, scan.slack, tol):
            reps.append(ChainReport.make(f"{r.name} alpha={a:g}", r.anchor, r.lhs, r.rhs,
                                         r.direction, r.tolerance))
    return ConvergenceResult(problem.kind, mu, scan, tuple(reps))


def convergence_suite(budget: OptBudget = OptBudget(), grid=DEFAULT_ALPHAS,
                      resolution: int = 64) -> list[ConvergenceResult]:
    """The two standard scans: WZ with μ=2 and CR with μ=1 on DSBS(0.1)."""
    probs = standard_problems()
    return [convergence_check(probs["WZ"], 2.0, grid, budget, resolution),
            convergence_check(probs["CR"], 1.0, grid, budget, resolution)]


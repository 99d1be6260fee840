"""Pointwise single-letterization checks.

For an arbitrary n-letter auxiliary joint, each additivity argument produces
an explicit single-letter witness: the auxiliary of letter ``j`` is extended
by the past of one block and the future of the other, and the letter index
``J`` is uniform. The inequality between the n-letter objective and ``n``
times the witness objective holds at every point, so it can be checked
without any optimization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .objectives import (
    AuxModel,
    ObjectiveParams,
    Problem,
    objective,
    with_function_axis,
)
from .prob_core import (
    Alphabet,
    JointPmf,
    block_names,
    channel_divergence,
    entropy,
    kl_div,
    mutual_info,
    product_extend,
    time_shared_marginal,
)
from .reports import ChainReport

EXACT_TOL = 1e-10
THEOREM_TOL = 1e-9
MARGINAL_TOL = 1e-12


def prop1_sides(joint_n: JointPmf, base: JointPmf, n: int,
                target: str = "X", given: str = "Y") -> tuple[float, float]:
    """Both sides of the entropy-plus-divergence superadditivity bound.

    Returns ``(H(Aⁿ|Bⁿ) + D(P̃ⁿ‖Pⁿ), n [H(A_J|B_J) + D(P̃_J‖P)])`` where the
    second uses the time-shared marginal of ``joint_n``.
    """
    a, b = block_names(target, n), block_names(given, n)
    ref = product_extend(base.transpose([target, given]), n)
    pn = joint_n.marginalize([name for pair in zip(a, b) for name in pair])
    lhs = entropy(pn, a, b) + kl_div(pn, ref)
    shared = time_shared_marginal(pn, [target, given], n)
    rhs = n * (entropy(shared, target, given)
               + kl_div(shared, base.transpose([target, given])))
    return lhs, rhs


def prop1_check(joint_n: JointPmf, base: JointPmf, n: int,
                target: str = "X", given: str = "Y",
                tol: float = EXACT_TOL) -> ChainReport:
    lhs, rhs = prop1_sides(joint_n, base, n, target, given)
    return ChainReport.make(f"prop1 n={n}", "entropy-divergence-superadditivity",
                            lhs, rhs, ">=", tol)


@dataclass(frozen=True, eq=False)
class WitnessModel:
    """Single-letter witness built from an n-letter auxiliary joint.

    For WZ/FC/CR/SK, ``aux`` is a single-letter :class:`AuxModel` whose ``U``
    axis is the compound (U, past X, future Y, J), laid out as a disjoint
    union over J. For WT, ``joint`` carries an extra axis ``T`` holding the
    compound (past Y, future Z, J); the witness objective is the average over
    T-slices, and ``slices`` lists ``(P(T=t), slice aux)``.
    """

    problem: Problem
    n: int
    joint: JointPmf
    provenance: AuxModel
    aux: AuxModel | None = None
    slices: tuple = ()

    def value(self, params: ObjectiveParams) -> float:
        if self.aux is not None:
            return objective(self.problem, self.aux, params)
        return sum(w * objective(self.problem, s, params) for w, s in self.slices)

    def max_slice_value(self, params: ObjectiveParams) -> float:
        if self.aux is not None:
            return self.value(params)
        return max(objective(self.problem, s, params) for _, s in self.slices)


def _single(problem_n: Problem) -> Problem:
    return Problem(problem_n.kind, problem_n.source, problem_n.distortion,
                   problem_n.function, problem_n.w1, problem_n.w2)


def build_witness(problem_n: Problem, aux_n: AuxModel, n: int | None = None) -> WitnessModel:
    """Materialize the time-sharing witness by explicit marginalization."""
    n = problem_n.n if n is None else n
    if n != problem_n.n or aux_n.problem.n != n:
        raise ValueError(f"blocklength mismatch: n={n}, problem n={problem_n.n}, "
                         f"aux n={aux_n.problem.n}")
    p1 = _single(problem_n)
    p = aux_n.joint
    r = problem_n.roles()
    X, Y = r["X"], r["Y"]
    letters = ["X", "Y"] + (["Z"] if "Z" in r else [])
    blocks = []
    if problem_n.kind == "WT":
        Z = r["Z"]
        for j in range(n):
            compound = Y[:j] + Z[j + 1:]
            m = p.marginal(compound + ["U", X[j], Y[j], Z[j]])
            blocks.append(m.reshape((-1,) + m.shape[len(compound):]) / 1.0)
        t_mass = np.concatenate(blocks, axis=0) / n
        sizes = t_mass.shape
        axes = [Alphabet("T", sizes[0]), Alphabet("U", sizes[1])] + [
            Alphabet(b, s) for b, s in zip(letters, sizes[2:])]
        joint = JointPmf(axes, t_mass, validate=False)
        weights = t_mass.reshape(sizes[0], -1).sum(axis=1)
        slices = []
        for t, w in enumerate(weights):
            if w <= 0:
                continue
            sl = JointPmf(axes[1:], t_mass[t] / w, validate=False)
            slices.append((float(w), AuxModel(p1, sl)))
        return WitnessModel(p1, n, joint, aux_n, None, tuple(slices))
    extra = ["V"] if problem_n.has_v else []
    tail_names = ["X", "Y"] + (["Z"] if "Z" in r else [])
    for j in range(n):
        compound = ["U"] + X[:j] + Y[j + 1:]
        tail = [X[j], Y[j]] + ([r["Z"][j]] if "Z" in r else [])
        m = p.marginal(compound + extra + tail)
        blocks.append(m.reshape((-1,) + m.shape[len(compound):]))
    mass = np.concatenate(blocks, axis=0) / n
    names = ["U"] + extra + tail_names
    joint = JointPmf.from_array(names, mass, validate=False)
    return WitnessModel(p1, n, joint, aux_n, AuxModel(p1, joint))


def witness_marginal_gap(problem_n: Problem, witness: WitnessModel) -> float:
    """Max abs difference between the witness letter marginal and the time-shared one."""
    r = problem_n.roles()
    base = ["X", "Y"] + (["Z"] if "Z" in r else [])
    shared = time_shared_marginal(witness.provenance.joint, base, problem_n.n)
    return float(np.max(np.abs(witness.joint.marginal(base) - shared.marginal(base))))


def _split_terms(problem: Problem, p: JointPmf, params: ObjectiveParams):
    """The (G1, G2) decomposition used by each single-letterization argument.

    ``G1`` depends only on the source marginal; ``G2`` collects the rest.
    """
    mu, alpha = params.mu, params.alpha
    r = problem.roles()
    U, X, Y = r["U"], r["X"], r["Y"]
    src = kl_div(p.marginalize(X + Y), problem.source_n())
    kind = problem.kind
    if kind == "WZ":
        Z = r["Z"]
        g1 = entropy(p, X, Y) + alpha * entropy(p, Y, X) + (alpha + 1) * src
        ed = sum(float(np.sum(p.marginal([x, z]) * problem.distortion))
                 for x, z in zip(X, Z))
        g2 = (-entropy(p, X, U + Y) + mu * ed
              + alpha * (-entropy(p, Y, U + X) + mutual_info(p, Z, X, U + Y)))
        return g1, g2
    V = r["V"]
    if kind == "FC":
        g1 = (entropy(p, X, Y) + src) + (2 * alpha + 1) * (entropy(p, Y, X) + src)
        pf = with_function_axis(problem, p)
        g2 = (-entropy(p, X, Y + U + V) - entropy(p, Y, X + U + V)
              - 2 * alpha * entropy(p, Y, X + U) + alpha * mutual_info(p, V, X, Y + U)
              + alpha * entropy(pf, "F", Y + U) + alpha * entropy(pf, "F", X + U + V))
        return g1, g2
    if kind == "SK":
        mu = mu + 1
    g1 = (entropy(p, X) - mu * (entropy(p, X, Y) + src)
          - (alpha + mu) * (entropy(p, Y, X) + src))
    g2 = (-entropy(p, X, U) + mutual_info(p, V, Y, U)
          + mu * (entropy(p, X, Y + U + V) + entropy(p, Y, X + U + V))
          + alpha * (entropy(p, Y, X + U) - mutual_info(p, V, X, Y + U)))
    return g1, g2


def theorem_check(problem_n: Problem, aux_n: AuxModel, params: ObjectiveParams,
                  n: int | None = None, tol: float = THEOREM_TOL) -> list[ChainReport]:
    """Check the pointwise single-letterization inequality at ``aux_n``.

    The first report is the main inequality; the remaining ones are the
    component bounds of the argument (G1/G2 split, or for WT the information
    identity and the divergence bound) plus the witness marginal check.
    """
    n = problem_n.n if n is None else n
    w = build_witness(problem_n, aux_n, n)
    kind = problem_n.kind
    tag = f"{kind} n={n}"
    out = []
    if kind == "WT":
        big = objective(problem_n, aux_n, ObjectiveParams(params.mu, 2 * params.alpha))
        small = w.value(params)
        out.append(ChainReport.make(f"{tag} pointwise", "wiretap-subadditivity",
                                    big, n * small, "<=", tol))
        out.extend(_wt_components(problem_n, aux_n, w, params, tol))
        out.append(ChainReport.make(f"{tag} best slice", "wiretap-slice-maximum",
                                    w.max_slice_value(params), small, ">=", tol))
    else:
        big = objective(problem_n, aux_n, params)
        small = w.value(params)
        anchor = {"WZ": "wz-superadditivity", "FC": "fc-superadditivity",
                  "CR": "cr-subadditivity", "SK": "sk-subadditivity"}[kind]
        direction = ">=" if problem_n.is_min else "<="
        out.append(ChainReport.make(f"{tag} pointwise", anchor, big, n * small,
                                    direction, tol))
        g1n, g2n = _split_terms(problem_n, aux_n.joint, params)
        g11, g21 = _split_terms(w.problem, w.aux.joint, params)
        out.append(ChainReport.make(f"{tag} G1", anchor + ":G1", g1n, n * g11,
                                    direction, tol))
        out.append(ChainReport.make(f"{tag} G2", anchor + ":G2", g2n, n * g21,
                                    direction, tol))
    out.append(ChainReport.make(f"{tag} witness marginal", "time-sharing-marginal",
                                witness_marginal_gap(problem_n, w), 0.0, "<=",
                                MARGINAL_TOL))
    return out


def _wt_components(problem_n, aux_n, w, params, tol):
    p, r = aux_n.joint, problem_n.roles()
    n = problem_n.n
    Y, Z, X = r["Y"], r["Z"], r["X"]
    lhs = mutual_info(p, "U", Y) - mutual_info(p, "U", Z)
    wj = w.joint
    rhs = n * (mutual_info(wj, "U", "Y", "T") - mutual_info(wj, "U", "Z", "T"))
    ch1 = _single(problem_n).channel_n()
    d_n = channel_divergence(p, Y + Z, ["U"] + X, problem_n.channel_n())
    d_1 = channel_divergence(wj, ["Y", "Z"], ["T", "U", "X"], ch1)
    return [
        ChainReport.make(f"WT n={n} information identity", "wiretap-information-identity",
                         lhs, rhs, "==", tol),
        ChainReport.make(f"WT n={n} divergence", "wiretap-divergence-subadditivity",
                         2 * d_n, n * d_1, ">=", tol),
    ]


def product_aux(aux1: AuxModel, n: int) -> AuxModel:
    """i.i.d. n-letter aux whose U (and V) are the tuples of per-letter values."""
    problem_n = aux1.problem.extend(n)
    p = product_extend(aux1.joint, n)
    r = problem_n.roles()
    groups = {"U": block_names("U", n)}
    if problem_n.has_v:
        groups["V"] = block_names("V", n)
    order = [nm for nm in groups["U"]] + groups.get("V", []) + [
        nm for g in ("X", "Y", "Z") if g in r for nm in r[g]]
    mass = p.marginal(order)
    sizes = [aux1.joint.size_of("U") ** n]
    if problem_n.has_v:
        sizes.append(aux1.joint.size_of("V") ** n)
    rest = mass.shape[len(order) - sum(len(r[g]) for g in ("X", "Y", "Z") if g in r):]
    mass = mass.reshape(tuple(sizes) + rest)
    return AuxModel.from_array(problem_n, mass)


def random_joint_n(rng: np.random.Generator, sizes: dict[str, int], n: int,
                   concentration: float = 1.0) -> JointPmf:
    """Dirichlet-random joint over n blocks of the named base alphabets."""
    names = [f"{b}_{j}" if n > 1 else b for j in range(1, n + 1) for b in sizes]
    shape = [sizes[nm.split("_")[0]] for nm in names]
    mass = rng.dirichlet(np.full(math.prod(shape), concentration)).reshape(shape)
    return JointPmf.from_array(names, mass, validate=False)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmlab.additivity import (
    build_witness,
    prop1_check,
    prop1_sides,
    product_aux,
    random_joint_n,
    theorem_check,
    witness_marginal_gap,
)
from cmlab.objectives import ObjectiveParams, Problem, objective, random_aux
from cmlab.prob_core import EventSet, JointPmf, dsbs, product_extend, tilt_on_event
from cmlab.suites import AUX_STYLES, standard_problems

KINDS = ["WZ", "FC", "CR", "SK", "WT"]


def _sizes(kind, u=2, v=2):
    return {"U": u, "V": v} if kind in ("FC", "CR", "SK") else {"U": u}


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]), st.sampled_from([0.2, 1.0]))
def test_superadditivity_random(seed, n, conc):
    rng = np.random.default_rng(seed)
    base = JointPmf.from_array(["X", "Y"], rng.dirichlet(np.ones(4)).reshape(2, 2))
    joint = random_joint_n(rng, {"X": 2, "Y": 2}, n, conc)
    assert prop1_check(joint, base, n).passed


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
def test_superadditivity_tight_for_iid(seed, n):
    rng = np.random.default_rng(seed)
    base = JointPmf.from_array(["X", "Y"], rng.dirichlet(np.ones(4)).reshape(2, 2))
    other = JointPmf.from_array(["X", "Y"], rng.dirichlet(np.ones(4)).reshape(2, 2))
    lhs, rhs = prop1_sides(product_extend(other, n), base, n)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_superadditivity_ternary():
    rng = np.random.default_rng(5)
    base = JointPmf.from_array(["X", "Y"], rng.dirichlet(np.ones(6)).reshape(3, 2))
    for _ in range(20):
        joint = random_joint_n(rng, {"X": 3, "Y": 2}, 2, 0.3)
        assert prop1_check(joint, base, 2).passed


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("n", [2, 3])
def test_theorem_holds_pointwise(kind, n):
    base = standard_problems()[kind]
    pn = base.extend(n)
    for i in range(12 if n == 2 else 4):
        rng = np.random.default_rng([n, i])
        aux = random_aux(pn, _sizes(kind, 1 + i % 3, 1 + i % 2), rng, AUX_STYLES[i % 4])
        prm = ObjectiveParams(float(rng.choice([0.0, 1.0, 2.0])), float(2.0 ** rng.integers(-2, 6)))
        for rep in theorem_check(pn, aux, prm):
            assert rep.passed, rep


@pytest.mark.parametrize("kind", KINDS)
def test_witness_matches_time_shared_marginal(kind, rng):
    pn = standard_problems()[kind].extend(2)
    aux = random_aux(pn, _sizes(kind), rng, "dirichlet")
    w = build_witness(pn, aux)
    assert witness_marginal_gap(pn, w) <= 1e-12
    assert w.joint.mass.sum() == pytest.approx(1.0)
    if kind == "WT":
        assert sum(wt for wt, _ in w.slices) == pytest.approx(1.0)
        prm = ObjectiveParams(0.0, 2.0)
        assert w.max_slice_value(prm) >= w.value(prm) - 1e-12


def test_witness_rejects_blocklength_mismatch(rng):
    pn = standard_problems()["CR"].extend(2)
    aux = random_aux(pn, _sizes("CR"), rng, "dirichlet")
    with pytest.raises(ValueError):
        build_witness(pn, aux, 3)


@pytest.mark.parametrize("kind", ["WZ", "FC", "CR", "SK"])
def test_iid_aux_is_additive(kind, rng):
    p1 = standard_problems()[kind]
    aux1 = random_aux(p1, _sizes(kind), rng, "structured")
    prm = ObjectiveParams(1.0, 3.0)
    aux2 = product_aux(aux1, 2)
    assert objective(aux2.problem, aux2, prm) == pytest.approx(
        2 * objective(p1, aux1, prm), abs=1e-9)


def test_iid_wiretap_code_is_additive(rng):
    p1 = standard_problems()["WT"]
    aux1 = random_aux(p1, {"U": 2}, rng, "structured")
    aux2 = product_aux(aux1, 2)
    prm = ObjectiveParams(0.0, 3.0)
    assert objective(aux2.problem, aux2, prm) == pytest.approx(
        2 * objective(p1, aux1, prm), abs=1e-9)


def test_random_joint_layout(rng):
    j = random_joint_n(rng, {"X": 2, "Y": 3}, 2)
    assert j.names == ("X_1", "Y_1", "X_2", "Y_2")
    assert j.shape == (2, 3, 2, 3)
    assert random_joint_n(rng, {"X": 2}, 1).names == ("X",)


def test_single_letter_cr_witness_on_product_source():
    # a witness of an i.i.d. aux attains at least the per-letter value
    p1 = standard_problems()["CR"]
    rng = np.random.default_rng(0)
    aux1 = random_aux(p1, _sizes("CR"), rng, "structured")
    aux2 = product_aux(aux1, 2)
    prm = ObjectiveParams(1.0, 2.0)
    w = build_witness(aux2.problem, aux2)
    assert 2 * w.value(prm) >= objective(aux2.problem, aux2, prm) - 1e-9
    assert dsbs(0.1).mass == pytest.approx(w.joint.marginal(["X", "Y"]))


def test_single_letter_witness_is_the_model_itself(rng):
    p1 = standard_problems()["CR"]
    aux = random_aux(p1, _sizes("CR"), rng, "dirichlet")
    w = build_witness(p1, aux)
    prm = ObjectiveParams(1.0, 2.0)
    assert w.value(prm) == pytest.approx(objective(p1, aux, prm), abs=1e-12)


@pytest.mark.parametrize("kind", ["WZ", "FC", "CR", "SK"])
def test_iid_feasible_aux_gives_equality(kind, rng):
    p1 = standard_problems()[kind]
    aux1 = random_aux(p1, _sizes(kind), rng, "structured")
    aux2 = product_aux(aux1, 2)
    prm = ObjectiveParams(1.0, 2.0)
    main = theorem_check(aux2.problem, aux2, prm)[0]
    assert main.lhs == pytest.approx(main.rhs, abs=1e-9)


def test_wiretap_symmetric_eavesdropper_both_sides_nonpositive(rng):
    w = np.array([[0.8, 0.2], [0.3, 0.7]])
    p2 = Problem.wt(w, w).extend(2)
    for _ in range(10):
        aux = random_aux(p2, {"U": 2}, rng, "structured")
        main = theorem_check(p2, aux, ObjectiveParams(0.0, 1.0))[0]
        assert main.lhs <= 1e-12 and main.rhs <= 1e-12
        assert main.passed


def test_superadditivity_on_half_space_tilt():
    base = JointPmf.from_array(["X", "Y"], [[0.4, 0.1], [0.2, 0.3]])
    b2 = product_extend(base, 2)
    member = np.zeros(b2.shape, dtype=bool)
    member[0] = True           # X_1 = 0
    tilted, _ = tilt_on_event(b2, EventSet(b2.axes, member))
    lhs, rhs = prop1_sides(tilted, base, 2)
    assert lhs >= rhs - 1e-10
    assert lhs - rhs > 1e-6

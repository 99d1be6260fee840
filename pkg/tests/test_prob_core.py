import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmlab.prob_core import (
    INF,
    Alphabet,
    Channel,
    EventSet,
    JointPmf,
    block_names,
    ckm_difference,
    conditional,
    dsbs,
    entropy,
    kl_div,
    min_entropy,
    mutual_info,
    product_extend,
    set_max_entries,
    tilt_on_event,
    time_shared_marginal,
    tv_distance,
)
from cmlab.validation import AxisError, CapExceededError, ZeroProbabilityError
from strategies import joint_pmfs, pmf_arrays

# high-precision values (mpmath, 30 digits)
H_QUARTER = 0.811278124459132863909695792039
KL_HALF_VS_QUARTER = 0.207518749639421909273130528026
DSBS_01_MI = 0.531004406410718778746410669617


def _mp_entropy(p):
    mpmath.mp.dps = 30
    return float(-sum(mpmath.mpf(x) * mpmath.log(mpmath.mpf(x), 2) for x in p if x > 0))


def test_entropy_golden():
    p = JointPmf.from_array(["A"], [0.25, 0.75])
    assert entropy(p, "A") == pytest.approx(H_QUARTER, abs=1e-12)
    assert round(entropy(p, "A"), 6) == 0.811278


def test_kl_golden():
    p = JointPmf.from_array(["A"], [0.5, 0.5])
    q = JointPmf.from_array(["A"], [0.25, 0.75])
    assert kl_div(p, q) == pytest.approx(KL_HALF_VS_QUARTER, abs=1e-12)


def test_tv_golden():
    p = JointPmf.from_array(["A"], [0.5, 0.5])
    q = JointPmf.from_array(["A"], [0.25, 0.75])
    assert tv_distance(p, q) == pytest.approx(0.25)


def test_dsbs_mutual_information_golden():
    mpmath.mp.dps = 30
    c = mpmath.mpf("0.1")
    oracle = float(1 - (-c * mpmath.log(c, 2) - (1 - c) * mpmath.log(1 - c, 2)))
    assert oracle == pytest.approx(DSBS_01_MI, abs=1e-15)
    assert mutual_info(dsbs(0.1), "X", "Y") == pytest.approx(DSBS_01_MI, abs=1e-12)


def test_point_mass_and_uniform():
    axes = [Alphabet("A", 3), Alphabet("B", 2)]
    assert entropy(JointPmf.point(axes, (1, 0)), ["A", "B"]) == 0.0
    assert entropy(JointPmf.uniform(axes), ["A", "B"]) == pytest.approx(math.log2(6))


def test_divergence_infinite_off_support():
    p = JointPmf.from_array(["A"], [0.5, 0.5])
    q = JointPmf.from_array(["A"], [1.0, 0.0])
    assert kl_div(p, q) == INF
    assert kl_div(q, p) == pytest.approx(1.0)


def test_rejects_unnormalized_and_duplicate_names():
    with pytest.raises(ValueError):
        JointPmf.from_array(["A"], [0.5, 0.6])
    with pytest.raises(ValueError):
        JointPmf.from_array(["A"], [1.5, -0.5])
    with pytest.raises(AxisError):
        JointPmf.from_array(["A", "A"], np.full((2, 2), 0.25))


def test_unknown_axis():
    p = dsbs(0.1)
    with pytest.raises(AxisError):
        entropy(p, "Q")
    with pytest.raises(AxisError):
        entropy(p, "X", "X")


def test_dense_cap():
    old = set_max_entries(100)
    try:
        with pytest.raises(CapExceededError):
            product_extend(dsbs(0.1), 4)
    finally:
        set_max_entries(old)


def test_tilt_rejects_null_event():
    p = JointPmf.from_array(["A"], [1.0, 0.0])
    ev = EventSet([Alphabet("A", 2)], [False, True])
    with pytest.raises(ZeroProbabilityError):
        tilt_on_event(p, ev)
    with pytest.raises(ValueError):
        EventSet([Alphabet("A", 2)], [False, False])


def test_block_layout_is_row_major():
    p = JointPmf.from_array(["Z"], [0.7, 0.3])
    p2 = product_extend(p, 2)
    assert p2.names == ("Z_1", "Z_2")
    assert p2.mass.reshape(-1) == pytest.approx([0.49, 0.21, 0.21, 0.09])
    assert block_names("X", 1) == ["X"]


def test_product_extend_orders_letters_by_block():
    p2 = product_extend(dsbs(0.1), 2)
    assert p2.names == ("X_1", "Y_1", "X_2", "Y_2")
    assert mutual_info(p2, ["X_1", "X_2"], ["Y_1", "Y_2"]) == pytest.approx(2 * DSBS_01_MI)


def test_channel_joint_and_parallel():
    w = Channel.from_matrix("X", "Y", [[0.9, 0.1], [0.2, 0.8]])
    px = JointPmf.from_array(["X"], [0.5, 0.5])
    pxy = w.joint(px)
    assert pxy.marginal(["Y"]) == pytest.approx([0.55, 0.45])
    v = Channel.from_matrix("X", "Z", [[1.0, 0.0], [0.5, 0.5]])
    both = Channel.parallel(w, v)
    assert both.matrix.shape == (2, 2, 2)
    assert both.matrix.sum(axis=(1, 2)) == pytest.approx(np.ones(2))
    joint = both.joint(px)
    assert mutual_info(joint, "Y", "Z", "X") == pytest.approx(0.0, abs=1e-12)


def test_event_json_roundtrip():
    axes = [Alphabet("A", 2), Alphabet("B", 3)]
    ev = EventSet.from_members(axes, [(0, 1), (1, 2)])
    back = EventSet.from_json(ev.to_json())
    assert back.members() == [(0, 1), (1, 2)]
    assert EventSet.from_json({"axes": ["X"], "members": [[0]]}, dsbs(0.1)).members() == [(0,)]


def test_min_entropy_conditional_worst_case():
    p = JointPmf.from_array(["K", "T"], [[0.45, 0.05], [0.05, 0.45]])
    assert min_entropy(p, "K") == pytest.approx(1.0)
    assert min_entropy(p, "K", "T") == pytest.approx(-math.log2(0.9))


# --- properties -------------------------------------------------------------

@settings(max_examples=1000)
@given(pmf_arrays(max_axes=1, max_size=6))
def test_entropy_matches_mpmath(mass):
    p = JointPmf.from_array(["A"], mass, validate=False)
    assert entropy(p, "A") == pytest.approx(_mp_entropy(mass.tolist()), abs=1e-10)


@settings(max_examples=1000)
@given(joint_pmfs())
def test_entropy_bounds_and_chain_rule(p):
    names = list(p.names)
    h = entropy(p, names)
    assert -1e-12 <= h <= math.log2(p.mass.size) + 1e-12
    if len(names) >= 2:
        a, rest = names[:1], names[1:]
        assert h == pytest.approx(entropy(p, rest) + entropy(p, a, rest), abs=1e-10)


@settings(max_examples=1000)
@given(joint_pmfs())
def test_mutual_information_nonnegative_and_symmetric(p):
    names = list(p.names)
    if len(names) < 2:
        return
    a, b = names[:1], names[1:2]
    c = names[2:]
    i_ab = mutual_info(p, a, b, c)
    assert i_ab >= -1e-12
    assert i_ab == pytest.approx(mutual_info(p, b, a, c), abs=1e-12)


@settings(max_examples=1000)
@given(pmf_arrays(shape=(2, 3)), pmf_arrays(shape=(2, 3), allow_zeros=False))
def test_divergence_chain_rule_and_pinsker(pm, qm):
    p = JointPmf.from_array(["A", "B"], pm, validate=False)
    q = JointPmf.from_array(["A", "B"], qm, validate=False)
    d = kl_div(p, q)
    assert d >= -1e-12
    split = kl_div(p.marginalize(["A"]), q.marginalize(["A"])) + kl_div(p, q, ["A"])
    assert d == pytest.approx(split, abs=1e-10)
    tv = tv_distance(p, q)
    assert d >= 2 / math.log(2) * tv ** 2 - 1e-12


@settings(max_examples=1000)
@given(joint_pmfs(allow_zeros=True), st.data())
def test_tilt_cost_identity(p, data):
    shape = p.shape
    member = data.draw(pmf_arrays(shape=shape)) > 0
    if not (member & (p.mass > 0)).any():
        member = p.mass > 0
    ev = EventSet(p.axes, member)
    tilted, cost = tilt_on_event(p, ev)
    assert kl_div(tilted, p) == pytest.approx(cost, abs=1e-12)
    assert tilted.prob(ev) == pytest.approx(1.0)


@settings(max_examples=300)
@given(pmf_arrays(shape=(2, 2, 2, 2, 3)))
def test_telescoping_identity(mass):
    p = JointPmf.from_array(["X_1", "X_2", "Y_1", "Y_2", "U"], mass, validate=False)
    lhs, rhs = ckm_difference(p, ["X_1", "X_2"], ["Y_1", "Y_2"], ["U"])
    assert lhs == pytest.approx(rhs, abs=1e-10)


@settings(max_examples=300)
@given(pmf_arrays(shape=(2, 2, 2, 2)))
def test_time_shared_marginal_of_product_is_base(mass):
    base = JointPmf.from_array(["X", "Y"], mass[0, 0] / mass[0, 0].sum()
                               if mass[0, 0].sum() > 0 else np.full((2, 2), 0.25),
                               validate=False)
    shared = time_shared_marginal(product_extend(base, 3), ["X", "Y"], 3)
    assert shared.mass == pytest.approx(base.mass, abs=1e-12)
    idx = time_shared_marginal(product_extend(base, 3), ["X", "Y"], 3, with_index=True)
    assert idx.marginal(["J"]) == pytest.approx(np.full(3, 1 / 3))


@settings(max_examples=300)
@given(joint_pmfs())
def test_axis_order_is_irrelevant(p):
    rev = p.transpose(list(reversed(p.names)))
    assert entropy(rev, list(p.names)) == pytest.approx(entropy(p, list(p.names)))
    assert kl_div(p, rev) == pytest.approx(0.0, abs=1e-12)


def test_conditional_rows_sum_to_one():
    p = JointPmf.from_array(["A", "B"], [[0.5, 0.0], [0.25, 0.25]])
    c = conditional(p, ["A"], ["B"])
    assert c.sum(axis=1) == pytest.approx([1.0, 1.0])


def test_tilt_examples():
    p = JointPmf.from_array(["A"], [0.25] * 4)
    tilted, cost = tilt_on_event(p, EventSet.from_members(p.axes, [(0,), (1,)]))
    assert tilted.mass == pytest.approx([0.5, 0.5, 0, 0])
    assert cost == pytest.approx(1.0)
    full, cost = tilt_on_event(p, EventSet(p.axes, np.ones(4, dtype=bool)))
    assert full.mass == pytest.approx(p.mass) and cost == 0.0
    q = JointPmf.from_array(["A"], [0.1, 0.2, 0.3, 0.4])
    _, cost = tilt_on_event(q, EventSet.from_members(q.axes, [(0,), (1,)]))
    assert cost == pytest.approx(math.log2(1 / 0.3), abs=1e-12)


def test_min_entropy_examples():
    assert min_entropy(JointPmf.from_array(["K"], [1 / 8] * 8), "K") == pytest.approx(3.0)
    assert min_entropy(JointPmf.from_array(["K"], [0.5, 0.25, 0.25]), "K") == pytest.approx(1.0)


def test_ckm_examples():
    p2 = product_extend(dsbs(0.1), 2)
    # a constant auxiliary carries no information on either side
    joint = JointPmf.from_array(list(p2.names) + ["U"], p2.mass[..., None], validate=False)
    lhs, rhs = ckm_difference(joint, ["X_1", "X_2"], ["Y_1", "Y_2"], ["U"])
    assert lhs == pytest.approx(0.0, abs=1e-12) and rhs == pytest.approx(0.0, abs=1e-12)

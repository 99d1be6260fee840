import itertools
import json

import numpy as np
import pytest

from cmlab.oracles import (
    ORACLE_ALPHAS,
    BlockCode,
    SweepSpec,
    code_at,
    count_codes,
    default_sweeps,
    enumerate_codes,
    eval_cr,
    eval_fc,
    eval_intrinsic_randomness,
    eval_lossless,
    eval_wiretap,
    eval_wz,
    ir_single_letter,
    lossless_single_letter,
    run_sweep,
    _wz_batch_chunk,
    single_letter_bound,
    spec_bound,
    table_specs,
)
from cmlab.objectives import Problem
from cmlab.prob_core import JointPmf, dsbs
from cmlab.suites import standard_problems
from cmlab.validation import CapExceededError

SRC = JointPmf.from_array(["Z"], [0.7, 0.3])
# mpmath, 30 digits, at P = (0.7, 0.3)
CLOSED_FORMS = {
    0.25: (0.128643293207439560107087528064, 0.975023238971730869474434528633),
    1.0: (0.514573172829758240428350112258, 0.938485394361346920507289865489),
    4.0: (0.846459868466995015661757131511, 0.903518076100215318872923046954),
    16.0: (0.874095878323510339075613754454, 0.887730217907675661811093979567),
    64.0: (0.879567783974239034937097730836, 0.882966904053221174200302369221),
}
PROTO = {"x": 2, "y": 2, "n": 1, "l1": 1, "l2": 1, "k": 2}


def _grid_objective(alpha, sign):
    q = np.linspace(0.0, 1.0, 400001)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.nan_to_num(q * np.log2(q)) - np.nan_to_num((1 - q) * np.log2(1 - q))
        d = np.nan_to_num(q * np.log2(q / 0.7)) + np.nan_to_num((1 - q) * np.log2((1 - q) / 0.3))
    return h + sign * alpha * d


@pytest.mark.parametrize("alpha", ORACLE_ALPHAS)
def test_single_letter_closed_forms(alpha):
    lossless, ir = CLOSED_FORMS[alpha]
    assert lossless_single_letter([0.7, 0.3], alpha) == pytest.approx(lossless, abs=1e-12)
    assert ir_single_letter([0.7, 0.3], alpha) == pytest.approx(ir, abs=1e-12)
    # independent route: brute force over a fine binary grid
    assert _grid_objective(alpha, +1).min() == pytest.approx(lossless, abs=1e-6)
    assert _grid_objective(alpha, -1).max() == pytest.approx(ir, abs=1e-6)


@pytest.mark.parametrize("kind,sizes,count", [
    ("lossless", {"z": 2, "n": 1, "m": 2}, 16),
    ("WZ", {"x": 2, "y": 2, "z": 2, "n": 1, "m": 2}, 64),
    ("CR", PROTO, 16384),
    ("IR", {"z": 2, "n": 2, "k": 3}, 81),
    ("WT", {"x": 2, "y": 2, "n": 1, "m": 2}, 16),
])
def test_family_counts(kind, sizes, count):
    assert count_codes(kind, sizes) == count


def test_code_at_matches_enumeration():
    sizes = {"x": 2, "y": 2, "z": 2, "n": 1, "m": 2}
    for i, code in enumerate(enumerate_codes("WZ", sizes)):
        assert code.code_id == i
        other = code_at("WZ", sizes, i)
        for name in code.tables:
            assert np.array_equal(code[name], other[name])
    with pytest.raises(IndexError):
        code_at("WZ", sizes, 64)


def test_enumeration_first_table_most_significant():
    codes = list(enumerate_codes("lossless", {"z": 2, "n": 1, "m": 2}))
    assert codes[0]["encoder"].tolist() == [0, 0]
    assert codes[1]["encoder"].tolist() == [0, 0]
    assert codes[1]["decoder"].tolist() == [0, 1]
    assert codes[4]["encoder"].tolist() == [0, 1]


def test_enumeration_cap_is_eager():
    with pytest.raises(CapExceededError):
        enumerate_codes("CR", PROTO, cap=1000)


def test_blockcode_validation():
    with pytest.raises(ValueError):
        BlockCode("lossless", 1, {"encoder": np.array([0, 2]), "decoder": np.array([0, 1])},
                  {"encoder": 2, "decoder": 2})
    with pytest.raises(ValueError):
        BlockCode("lossless", 1, {"encoder": np.array([0.5, 1])}, {"encoder": 2})
    with pytest.raises(ValueError):
        BlockCode("nope", 1, {}, {})
    with pytest.raises(ValueError):
        BlockCode("WT", 1, {"encoder": np.array([[0.5, 0.6]]), "decoder": np.array([0, 0])},
                  {"encoder": 2, "decoder": 1})
    with pytest.raises(ValueError):
        BlockCode("CR", 1, {"phi1": np.zeros(2), "phi2": np.zeros((2, 3)),
                            "psi1": np.zeros((2, 2)), "psi2": np.zeros((2, 3))},
                  {"phi1": 3, "phi2": 2, "psi1": 2, "psi2": 2})


def test_blockcode_json_roundtrip():
    code = code_at("CR", PROTO, 12345)
    back = BlockCode.from_json(json.loads(json.dumps(code.to_json())))
    assert back.code_id == 12345 and back.comm_bits == 2
    for name in code.tables:
        assert np.array_equal(back[name], code[name])
    with pytest.raises(ValueError):
        back["phi1"][0] = 1


def test_table_specs_layout():
    specs = table_specs("FC", PROTO)
    assert [s[0] for s in specs] == ["phi1", "phi2", "psi1", "psi2"]
    assert specs[1] == ("phi2", (2, 2), 2)
    assert table_specs("WT", {"x": 2, "y": 2, "n": 1, "m": 2, "resolution": 2})[0][2] == 3


def test_lossless_identity_code():
    code = BlockCode("lossless", 1, {"encoder": np.array([0, 1]), "decoder": np.array([0, 1])},
                     {"encoder": 2, "decoder": 2})
    res = eval_lossless(SRC, code)
    assert res.eps == pytest.approx(0.0)
    assert res.passed and not res.skipped
    assert res.p_good == pytest.approx(1.0) and res.tilt_cost == pytest.approx(0.0)


def test_lossless_empty_correct_set_is_flagged():
    code = BlockCode("lossless", 1, {"encoder": np.array([1, 0]), "decoder": np.array([0, 1])},
                     {"encoder": 2, "decoder": 2})
    res = eval_lossless(SRC, code)
    assert res.skipped and res.eps == pytest.approx(1.0)
    assert res.note == "empty correct set"
    assert res.as_record()["skipped"] is True


def test_intrinsic_randomness_identity_extractor():
    code = BlockCode("IR", 1, {"extractor": np.array([0, 1])}, {"extractor": 2})
    res = eval_intrinsic_randomness(SRC, code)
    assert res.delta == pytest.approx(0.2)
    assert res.passed


@pytest.mark.parametrize("d_level", [0.0, 1.0])
def test_wz_all_codes_pass(d_level):
    prob = standard_problems()["WZ"]
    bound = single_letter_bound(prob, 2.0)
    sizes = {"x": 2, "y": 2, "z": 2, "n": 1, "m": 2}
    for code in enumerate_codes("WZ", sizes):
        res = eval_wz(prob, code, d_level, 2.0, bound=bound)
        assert res.passed, [r for r in res.chain if not r.passed]


def _wz_spec(n, d_level):
    return SweepSpec("wz", "WZ", (("x", 2), ("y", 2), ("z", 2), ("n", n), ("m", 2)),
                     standard_problems()["WZ"], (("d_level", d_level), ("mu", 2.0)))


def test_wz_batch_agrees_with_reference():
    spec = _wz_spec(1, 0.0)
    bound = spec_bound(spec)
    ref = run_sweep(spec, workers=1)
    assert ref.n_codes == 64 and ref.n_violations == 0
    parts = [_wz_batch_chunk(spec, e, ORACLE_ALPHAS, bound, 1e-9, 1) for e in range(4)]
    rec = np.concatenate([p.records for p in parts])
    assert np.array_equal(rec["code_id"], ref.records["code_id"])
    assert np.array_equal(rec["skipped"], ref.records["skipped"])
    assert np.allclose(rec["eps"], ref.records["eps"])
    assert np.allclose(rec["worst_margin"], ref.records["worst_margin"], atol=1e-9,
                       equal_nan=True)
    for p in parts:
        agree = p.checks["batch and reference agreement"]
        assert agree.count == 16 and agree.violations == 0


def test_wz_two_letter_batch_cross_checks():
    spec = _wz_spec(2, 0.5)
    part = _wz_batch_chunk(spec, 9, ORACLE_ALPHAS, spec_bound(spec), 1e-9, 2039)
    assert part.n_codes == 4 ** 8
    assert part.n_violations == 0
    # sampling restarts in every 8192-code chunk: 8 chunks, 5 samples each
    assert part.checks["batch and reference agreement"].count == 40


@pytest.mark.parametrize("kind", ["FC", "CR", "SK"])
def test_protocol_samples_pass(kind):
    prob = standard_problems()[kind]
    mu = {"FC": 0.0, "CR": 1.0, "SK": 0.0}[kind]
    bound = single_letter_bound(prob, mu)
    rng = np.random.default_rng(7)
    ids = itertools.chain(range(4), rng.integers(0, count_codes(kind, PROTO), 40))
    for i in ids:
        code = code_at(kind, PROTO, int(i))
        if kind == "FC":
            res = eval_fc(prob, code, bound=bound)
        else:
            res = eval_cr(prob, code, kind, bound=bound, mu=mu)
        assert res.passed, (i, [r for r in res.chain if not r.passed])


def test_wiretap_family_passes():
    prob = standard_problems()["WT"]
    bound = single_letter_bound(prob, 0.0)
    for code in enumerate_codes("WT", {"x": 2, "y": 2, "n": 1, "m": 2}):
        res = eval_wiretap(prob, code, bound=bound)
        assert res.passed


def test_randomized_wiretap_encoder():
    prob = standard_problems()["WT"]
    sizes = {"x": 2, "y": 2, "n": 1, "m": 2, "resolution": 2}
    codes = list(enumerate_codes("WT", sizes))
    assert len(codes) == 9 * 4
    assert any(np.any((c["encoder"] > 0) & (c["encoder"] < 1)) for c in codes)
    for c in codes:
        assert eval_wiretap(prob, c).passed


@pytest.mark.parametrize("label", ["lossless n=1 M=2", "IR n=2 K=3", "WT n=1 N=2"])
def test_small_default_sweeps(label):
    spec = next(s for s in default_sweeps() if s.label == label)
    out = run_sweep(spec, workers=1)
    assert out.n_codes == spec.count()
    assert out.n_violations == 0
    assert len(out.records) == out.n_codes
    assert list(out.records["code_id"]) == list(range(out.n_codes))


def test_sweep_digest_is_reproducible():
    spec = next(s for s in default_sweeps() if s.label == "lossless n=2 M=2")
    a, b = run_sweep(spec, workers=1), run_sweep(spec, workers=2)
    assert a.digest == b.digest
    assert a.group_rows() == b.group_rows()


def test_sweep_cap():
    spec = next(s for s in default_sweeps() if s.kind == "CR")
    with pytest.raises(CapExceededError):
        run_sweep(spec, cap=10)


def test_default_sweeps_cover_every_family():
    kinds = {s.kind for s in default_sweeps()}
    assert kinds == {"lossless", "IR", "WZ", "FC", "CR", "SK", "WT"}
    assert len({s.label for s in default_sweeps()}) == len(default_sweeps())


# --- worked codes ---------------------------------------------------------

EQUAL_BITS = JointPmf.from_array(["X", "Y"], [[0.5, 0.0], [0.0, 0.5]])


def _protocol(kind, phi1, phi2, psi1, psi2, ranges):
    tables = {"phi1": np.array(phi1), "phi2": np.array(phi2),
              "psi1": np.array(psi1), "psi2": np.array(psi2)}
    return BlockCode(kind, 1, tables, dict(zip(("phi1", "phi2", "psi1", "psi2"), ranges)))


def test_lossless_constant_decoder_on_uniform_bit():
    code = BlockCode("lossless", 1, {"encoder": np.array([0, 0]), "decoder": np.array([0])},
                     {"encoder": 1, "decoder": 2})
    res = eval_lossless(JointPmf.from_array(["Z"], [0.5, 0.5]), code)
    assert res.eps == pytest.approx(0.5)
    assert res.tilt_cost == pytest.approx(1.0)
    assert res.passed


def test_parity_extractor_on_biased_pairs():
    code = BlockCode("IR", 2, {"extractor": np.array([0, 1, 1, 0])}, {"extractor": 2})
    res = eval_intrinsic_randomness(SRC, code)
    # P(parity 0) = 0.49 + 0.09 = 0.58
    assert res.delta == pytest.approx(0.08)
    assert res.passed


def test_wz_perfect_code_on_equal_bits():
    prob = Problem.wz(EQUAL_BITS, np.array([[0.0, 1.0], [1.0, 0.0]]))
    code = BlockCode("WZ", 1, {"encoder": np.array([0, 0]), "decoder": np.array([[0, 1]])},
                     {"encoder": 1, "decoder": 2})
    res = eval_wz(prob, code, 0.0, 1.0)
    assert res.eps == 0.0 and res.p_good == pytest.approx(1.0)
    assert res.passed


def test_wz_constant_encoder_mu_one():
    prob = standard_problems()["WZ"]
    code = BlockCode("WZ", 1, {"encoder": np.array([0, 0]), "decoder": np.array([[0, 1]])},
                     {"encoder": 1, "decoder": 2})
    res = eval_wz(prob, code, 0.0, 1.0, bound=single_letter_bound(prob, 1.0))
    assert res.eps == pytest.approx(0.1)
    assert res.passed


def test_fc_and_with_full_disclosure():
    # Alice sends x, Bob replies with x AND y
    code = _protocol("FC", [0, 1], [[0, 0], [0, 1]], [[0, 1], [0, 1]], [[0, 0], [0, 1]],
                     (2, 2, 2, 2))
    res = eval_fc(standard_problems()["FC"], code)
    assert res.eps == 0.0 and res.passed


def test_fc_constant_function_needs_no_communication():
    prob = Problem.fc(dsbs(0.1), np.zeros((2, 2), dtype=int))
    code = _protocol("FC", [0, 0], [[0], [0]], [[0], [0]], [[0], [0]], (1, 1, 1, 1))
    res = eval_fc(prob, code)
    assert res.eps == 0.0 and res.passed


def test_cr_silent_protocol_on_equal_bits():
    code = _protocol("CR", [0, 0], [[0], [0]], [[0], [1]], [[0], [1]], (1, 1, 2, 2))
    res = eval_cr(Problem.cr(EQUAL_BITS), code, "CR")
    assert (res.eps, res.delta, res.p_good) == (0.0, 0.0, pytest.approx(1.0))
    hmin = next(r for r in res.chain if r.name == "min-entropy bound")
    assert hmin.lhs == pytest.approx(1.0)
    assert res.passed
    sk = _protocol("SK", [0, 0], [[0], [0]], [[0], [1]], [[0], [1]], (1, 1, 2, 2))
    assert eval_cr(Problem.sk(EQUAL_BITS), sk, "SK").passed
    with pytest.raises(ValueError):
        eval_cr(Problem.cr(EQUAL_BITS), code, "SK")


def test_wiretap_identity_code_noiseless_main_channel():
    prob = Problem.wt(np.eye(2), np.full((2, 2), 0.5))
    code = BlockCode("WT", 1, {"encoder": np.eye(2), "decoder": np.array([0, 1])},
                     {"encoder": 2, "decoder": 2})
    res = eval_wiretap(prob, code, bound=single_letter_bound(prob))
    assert res.eps == 0.0 and res.delta == pytest.approx(0.0)
    size = next(r for r in res.chain if r.name == "expurgated set size")
    assert size.lhs == 2.0
    assert res.passed


def test_wiretap_symmetric_eavesdropper():
    w = np.array([[0.9, 0.1], [0.2, 0.8]])
    prob = Problem.wt(w, w)
    bound = single_letter_bound(prob)
    assert bound.value == pytest.approx(0.0, abs=1e-12)
    for code in enumerate_codes("WT", {"x": 2, "y": 2, "n": 1, "m": 2}):
        assert eval_wiretap(prob, code, bound=bound).passed

"""Exhaustive evaluation of concrete codes and protocols at tiny blocklengths.

Each evaluator builds the event on which a code behaves ideally, tilts the
underlying law onto that event, and checks every inequality of the resulting
converse chain numerically. The chains end at a single-letter penalized
optimum, which cannot be computed exactly; it is represented by a certified
one-sided bound. For a minimum that is the smaller of two attained values
(the time-sharing witness of the tilted point and the lattice optimum of the
constrained problem), for a maximum the larger of the two. Passing against
either certifies the inequality against the true optimum.

The lattice value alone, minus its reported slack, is also compared as a
diagnostic. That comparison is stronger than what the chain guarantees, so
its misses are reported separately and do not count as violations.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from .additivity import build_witness
from .objectives import (
    AuxModel,
    ObjectiveParams,
    Problem,
    combine_terms,
    objective,
    objective_terms,
)
from .optim import grid_baseline, simplex_lattice
from .prob_core import (
    EventSet,
    JointPmf,
    entropy,
    kl_div,
    min_entropy,
    mutual_info,
    product_extend,
    tilt_on_event,
)
from .reports import ChainReport, flag_report, margin_array
from .validation import CapExceededError, check_stochastic

CODE_KINDS = ("lossless", "IR", "WZ", "FC", "CR", "SK", "WT")
CHAIN_TOL = 1e-9
ZERO_TOL = 1e-10
IDENTITY_TOL = 1e-12
DIST_TOL = 1e-12
ENUM_CAP = 2_000_000
ORACLE_ALPHAS = (0.25, 1.0, 4.0, 16.0, 64.0)

_TABLES = {
    "lossless": ("encoder", "decoder"),
    "IR": ("extractor",),
    "WZ": ("encoder", "decoder"),
    "FC": ("phi1", "phi2", "psi1", "psi2"),
    "CR": ("phi1", "phi2", "psi1", "psi2"),
    "SK": ("phi1", "phi2", "psi1", "psi2"),
    "WT": ("encoder", "decoder"),
}


def _log_inv(p: float) -> float:
    return math.inf if p <= 0 else -math.log2(p)


def _is_pow2(k: int) -> bool:
    return k >= 1 and (k & (k - 1)) == 0


# ---------------------------------------------------------------------------
# codes and their enumeration

@dataclass(frozen=True, eq=False)
class BlockCode:
    """Tables of a block code or a 2-round protocol.

    Blocks are flattened row-major over letters, so the first letter is the
    most significant digit. ``ranges`` maps each table to the size of its
    output alphabet.

    ``lossless``: encoder (|Z|ⁿ,) → M, decoder (M,) → |Z|ⁿ.
    ``IR``: extractor (|Z|ⁿ,) → K.
    ``WZ``: encoder (|X|ⁿ,) → M, decoder (M, |Y|ⁿ) → |Z|ⁿ.
    ``FC``/``CR``/``SK``: phi1 (|X|ⁿ,) → 2^l1, phi2 (|Y|ⁿ, 2^l1) → 2^l2,
    psi1 (|X|ⁿ, 2^l2) → K, psi2 (|Y|ⁿ, 2^l1) → K. For ``FC``, K indexes
    function blocks with the first letter least significant.
    ``WT``: encoder (N, |X|ⁿ) with pmf rows, decoder (|Y|ⁿ,) → N.
    """

    kind: str
    n: int
    tables: Mapping[str, np.ndarray]
    ranges: Mapping[str, int]
    code_id: int = -1

    def __post_init__(self):
        if self.kind not in CODE_KINDS:
            raise ValueError(f"unknown code kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("blocklength must be >= 1")
        want = _TABLES[self.kind]
        if sorted(self.tables) != sorted(want) or sorted(self.ranges) != sorted(want):
            raise ValueError(f"{self.kind} code needs tables {want}")
        tables = {}
        for name in want:
            r = int(self.ranges[name])
            if self.kind == "WT" and name == "encoder":
                t = check_stochastic(self.tables[name], n_in_axes=1, tol=1e-9)
                if t.ndim != 2 or t.shape[1] != r:
                    raise ValueError("WT encoder must have shape (N, |X|ⁿ)")
            else:
                t = np.asarray(self.tables[name])
                if t.size and not np.issubdtype(t.dtype, np.integer):
                    if np.any(t != np.round(t)):
                        raise ValueError(f"table {name!r} must hold integers")
                t = t.astype(np.int64)
                if t.size and (t.min() < 0 or t.max() >= r):
                    raise ValueError(f"table {name!r} has entries outside range({r})")
            t = t.copy()
            t.flags.writeable = False
            tables[name] = t
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "ranges", {k: int(v) for k, v in self.ranges.items()})
        self._check_shapes()

    def _check_shapes(self):
        t, r = self.tables, self.ranges
        bad = False
        if self.kind == "lossless":
            bad = t["decoder"].shape != (r["encoder"],) or r["decoder"] != t["encoder"].size
        elif self.kind == "WZ":
            bad = t["encoder"].ndim != 1 or t["decoder"].ndim != 2 or (
                t["decoder"].shape[0] != r["encoder"])
        elif self.kind in ("FC", "CR", "SK"):
            xn, yn = t["phi1"].shape[0], t["phi2"].shape[0]
            bad = (t["phi1"].ndim != 1
                   or t["phi2"].shape != (yn, r["phi1"])
                   or t["psi1"].shape != (xn, r["phi2"])
                   or t["psi2"].shape != (yn, r["phi1"])
                   or r["psi1"] != r["psi2"]
                   or not (_is_pow2(r["phi1"]) and _is_pow2(r["phi2"])))
        elif self.kind == "WT":
            bad = t["decoder"].ndim != 1 or r["decoder"] != t["encoder"].shape[0]
        elif self.kind == "IR":
            bad = t["extractor"].ndim != 1
        if bad:
            raise ValueError(f"inconsistent {self.kind} table shapes")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tables[name]

    @property
    def comm_bits(self) -> int:
        """Protocol length l1 + l2 in bits."""
        return int(round(math.log2(self.ranges["phi1"]) + math.log2(self.ranges["phi2"])))

    def to_json(self) -> dict:
        return {"kind": self.kind, "n": self.n, "code_id": self.code_id,
                "ranges": dict(self.ranges),
                "tables": {k: v.tolist() for k, v in self.tables.items()}}

    @classmethod
    def from_json(cls, obj) -> "BlockCode":
        return cls(obj["kind"], int(obj["n"]),
                   {k: np.asarray(v) for k, v in obj["tables"].items()},
                   obj["ranges"], int(obj.get("code_id", -1)))


def table_specs(kind: str, sizes: Mapping[str, int]) -> list[tuple[str, tuple, int]]:
    """``(name, shape, range)`` of every table of a code family.

    ``sizes`` keys: lossless ``z, n, m``; IR ``z, n, k``; WZ ``x, y, z, n, m``;
    FC/CR/SK ``x, y, n, l1, l2, k``; WT ``x, y, n, m`` and optionally
    ``resolution`` (lattice for randomized encoder rows; the WT encoder
    spec then counts lattice rows rather than inputs).
    """
    s = dict(sizes)
    n = int(s["n"])
    if kind == "lossless":
        zn = s["z"] ** n
        return [("encoder", (zn,), s["m"]), ("decoder", (s["m"],), zn)]
    if kind == "IR":
        return [("extractor", (s["z"] ** n,), s["k"])]
    if kind == "WZ":
        xn, yn, zn = s["x"] ** n, s["y"] ** n, s["z"] ** n
        return [("encoder", (xn,), s["m"]), ("decoder", (s["m"], yn), zn)]
    if kind in ("FC", "CR", "SK"):
        xn, yn = s["x"] ** n, s["y"] ** n
        a, b = 2 ** s["l1"], 2 ** s["l2"]
        return [("phi1", (xn,), a), ("phi2", (yn, a), b),
                ("psi1", (xn, b), s["k"]), ("psi2", (yn, a), s["k"])]
    if kind == "WT":
        xn, yn = s["x"] ** n, s["y"] ** n
        res = s.get("resolution")
        rows = xn if res is None else simplex_lattice(xn, int(res)).shape[0]
        return [("encoder", (s["m"],), rows), ("decoder", (yn,), s["m"])]
    raise ValueError(f"unknown code kind {kind!r}")


def count_codes(kind: str, sizes: Mapping[str, int]) -> int:
    return math.prod(r ** math.prod(shape) for _, shape, r in table_specs(kind, sizes))


def _all_tables(shape: tuple, r: int) -> np.ndarray:
    """Every table of ``shape`` over ``range(r)`` in lexicographic order."""
    cells = math.prod(shape)
    idx = np.arange(r ** cells, dtype=np.int64)
    powers = r ** np.arange(cells - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] // powers) % r).reshape((-1,) + tuple(shape))


def _wt_rows(sizes) -> np.ndarray:
    xn = sizes["x"] ** sizes["n"]
    res = sizes.get("resolution")
    return np.eye(xn) if res is None else simplex_lattice(xn, int(res))


def _make_code(kind, sizes, specs, choice, code_id, rows=None) -> BlockCode:
    tables, ranges = {}, {}
    for (name, shape, r), t in zip(specs, choice):
        if kind == "WT" and name == "encoder":
            tables[name] = rows[np.asarray(t)]
            ranges[name] = rows.shape[1]
        else:
            tables[name] = np.asarray(t).reshape(shape)
            ranges[name] = r
    return BlockCode(kind, int(sizes["n"]), tables, ranges, code_id)


def enumerate_codes(kind: str, sizes: Mapping[str, int], cap: int = ENUM_CAP
                    ) -> Iterator[BlockCode]:
    """Deterministic exhaustive stream of codes (first table most significant).

    Raises :class:`CapExceededError` before yielding when the family is
    larger than ``cap``.
    """
    specs = table_specs(kind, sizes)
    total = count_codes(kind, sizes)
    if total > cap:
        raise CapExceededError(f"{total} {kind} codes exceed the enumeration cap {cap}")
    rows = _wt_rows(sizes) if kind == "WT" else None

    def stream():
        per_table = [itertools.product(range(r), repeat=math.prod(shape))
                     for _, shape, r in specs]
        for i, choice in enumerate(itertools.product(*per_table)):
            yield _make_code(kind, sizes, specs, choice, i, rows)

    return stream()


def code_at(kind: str, sizes: Mapping[str, int], code_id: int) -> BlockCode:
    """The code at position ``code_id`` of :func:`enumerate_codes`."""
    specs = table_specs(kind, sizes)
    counts = [r ** math.prod(shape) for _, shape, r in specs]
    if not 0 <= code_id < math.prod(counts):
        raise IndexError(code_id)
    choice, rem = [], code_id
    for k, (_, shape, r) in enumerate(specs):
        below = math.prod(counts[k + 1:])
        t, rem = divmod(rem, below)
        cells = math.prod(shape)
        choice.append([(t // r ** (cells - 1 - c)) % r for c in range(cells)])
    rows = _wt_rows(sizes) if kind == "WT" else None
    return _make_code(kind, sizes, specs, choice, code_id, rows)


# ---------------------------------------------------------------------------
# results

@dataclass(frozen=True, eq=False)
class EvalResult:
    """Outcome of evaluating one code.

    ``eps`` is the error (or excess-distortion) probability, ``delta`` the
    uniformity or secrecy deviation (NaN where it does not apply),
    ``p_good`` the probability of the constructed good event and
    ``tilt_cost`` equals −log₂ ``p_good``. ``sets`` holds the constructed
    sets as boolean arrays or index lists; ``tilted`` the tilted law.
    ``chain`` lists the counted inequalities, ``diagnostics`` the lattice-only
    comparisons, which never count as failures.
    """

    kind: str
    code_id: int
    eps: float
    delta: float
    p_good: float
    tilt_cost: float
    chain: tuple
    diagnostics: tuple = ()
    sets: dict = field(default_factory=dict)
    tilted: JointPmf | None = None
    skipped: bool = False
    note: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.chain)

    @property
    def worst_margin(self) -> float:
        vals = [r.margin for r in self.chain if not math.isnan(r.margin)]
        return min(vals) if vals else math.inf

    def as_record(self) -> dict:
        return {"code_id": self.code_id, "kind": self.kind, "eps": self.eps,
                "delta": self.delta, "p_good": self.p_good,
                "tilt_cost": self.tilt_cost, "worst_margin": self.worst_margin,
                "pass": self.passed, "skipped": self.skipped, "note": self.note,
                "chain": [r.as_dict() for r in self.chain],
                "diagnostics": [r.as_dict() for r in self.diagnostics]}


@dataclass(frozen=True)
class _Check:
    name: str
    anchor: str
    lhs: object
    rhs: object
    direction: str
    tol: float = CHAIN_TOL
    diagnostic: bool = False


def _tag(name: str, alpha: float) -> str:
    return f"{name} [alpha={alpha:g}]"


def group_of(name: str) -> str:
    """Check name without its parameter suffix."""
    return name.split(" [")[0]


def _reports(checks) -> tuple[tuple, tuple]:
    chain, diag = [], []
    for c in checks:
        rep = ChainReport.make(c.name, c.anchor, float(c.lhs), float(c.rhs),
                               c.direction, c.tol)
        (diag if c.diagnostic else chain).append(rep)
    return tuple(chain), tuple(diag)


def _skipped(kind, code, eps, delta, p_good, message, anchor, sets=None) -> EvalResult:
    return EvalResult(kind, code.code_id, eps, delta, p_good, _log_inv(p_good),
                      (flag_report(f"{kind} chain", anchor, message),), (),
                      sets or {}, None, True, message)


@dataclass(frozen=True)
class SingleLetterBound:
    """Lattice optimum of the constrained single-letter problem.

    ``value`` is attained by a feasible point, so it upper-bounds a minimum
    and lower-bounds a maximum, for every penalty weight.
    """

    value: float
    slack: float
    sense: str


def single_letter_bound(problem: Problem, mu: float = 0.0,
                        resolution: int = 32) -> SingleLetterBound:
    g = grid_baseline(problem, ObjectiveParams(mu, 1.0), resolution=resolution)
    return SingleLetterBound(g.value, g.slack, problem.sense)


def _certified(witness: float, bound: SingleLetterBound | None, is_min: bool) -> float:
    if bound is None:
        return witness
    return min(witness, bound.value) if is_min else max(witness, bound.value)


def _term_values(problem: Problem, aux: AuxModel, mu: float, alphas) -> list[float]:
    """Objective at each α from one evaluation of the terms (forms cross-checked once)."""
    terms = objective_terms(problem, aux)
    vals = [combine_terms(problem.kind, terms, mu, a) for a in alphas]
    ref = objective(problem, aux, ObjectiveParams(mu, alphas[0]))
    if not (ref == vals[0] or abs(ref - vals[0]) <= 1e-9):
        raise ArithmeticError("objective terms disagree with the checked objective")
    return vals


def _witness_values(problem_n: Problem, aux: AuxModel, mu: float, alphas) -> list[float]:
    if problem_n.n == 1:
        return _term_values(problem_n, aux, mu, alphas)
    w = build_witness(problem_n, aux)
    if w.aux is not None:
        return _term_values(w.problem, w.aux, mu, alphas)
    out = np.zeros(len(alphas))
    for weight, sl in w.slices:
        out += weight * np.asarray(_term_values(w.problem, sl, mu, alphas))
    return [float(v) for v in out]


# ---------------------------------------------------------------------------
# lossless source coding and intrinsic randomness

def lossless_single_letter(p, alpha: float) -> float:
    """min over Q of H(Q) + α D(Q‖P), in closed form.

    For α ≤ 1 the objective is concave and the minimum sits at a point mass
    (α·H_min(P)); for α > 1 it is −(α−1) log₂ Σ P^{α/(α−1)}.
    """
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    if alpha <= 1:
        return float(-alpha * np.log2(p.max()))
    return float(-(alpha - 1) * np.log2(np.sum(p ** (alpha / (alpha - 1)))))


def ir_single_letter(p, alpha: float) -> float:
    """max over Q of H(Q) − α D(Q‖P) = (1+α) log₂ Σ P^{α/(1+α)}."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float((1 + alpha) * np.log2(np.sum(p ** (alpha / (1 + alpha)))))


def _flat_block(source: JointPmf, n: int) -> JointPmf:
    if len(source.names) != 1:
        raise ValueError("lossless and IR sources have a single axis")
    return product_extend(source, n)


def eval_lossless(source: JointPmf, code: BlockCode, alphas=ORACLE_ALPHAS,
                  tol: float = CHAIN_TOL) -> EvalResult:
    """Change-of-measure chain for a fixed-length lossless code."""
    if code.kind != "lossless":
        raise ValueError("expected a lossless code")
    n = code.n
    pn = _flat_block(source, n)
    flat = pn.mass.reshape(-1)
    enc, dec = code["encoder"], code["decoder"]
    if enc.size != flat.size:
        raise ValueError("encoder does not cover the source block alphabet")
    good = dec[enc] == np.arange(flat.size)
    p_good = float(flat[good].sum())
    eps = min(1.0, max(0.0, 1.0 - p_good))
    sets = {"C": good.copy()}
    anchor = "lossless-converse"
    if p_good <= 0:
        return _skipped("lossless", code, eps, math.nan, p_good, "empty correct set",
                        anchor, sets)
    event = EventSet(pn.axes, good.reshape(pn.shape))
    tilted, cost = tilt_on_event(pn, event)
    div = kl_div(tilted, pn)
    bound = _log_inv(1.0 - eps)
    tflat = tilted.mass.reshape(-1)
    h = entropy(tilted, pn.names)
    log_c = math.log2(int(good.sum()))
    log_m = math.log2(code.ranges["encoder"])
    checks = [
        _Check("tilt cost identity", anchor + ":tilt", div, cost, "==", IDENTITY_TOL),
        _Check("tilt cost bound", anchor + ":tilt", div, bound, "<=", tol),
        _Check("zero error under tilt", anchor + ":zero-error",
               float(tflat[~good].sum()), 0.0, "==", ZERO_TOL),
        _Check("message set size", anchor + ":size", log_m, log_c, ">=", tol),
        _Check("entropy bound", anchor + ":entropy", log_c, h, ">=", tol),
    ]
    for a in alphas:
        single = lossless_single_letter(source.mass, a)
        checks += [
            _Check(_tag("penalized entropy", a), anchor + ":penalized",
                   log_c / n, h / n + a / n * (div - bound), ">=", tol),
            _Check(_tag("single-letterization", a), anchor + ":superadditivity",
                   (h + a * div) / n, single, ">=", tol),
            _Check(_tag("final rate bound", a), anchor + ":final",
                   log_m / n, single - a / n * bound, ">=", tol),
        ]
    chain, diag = _reports(checks)
    return EvalResult("lossless", code.code_id, eps, math.nan, p_good, cost, chain,
                      diag, sets, tilted, extras={"rate": log_m / n})


def eval_intrinsic_randomness(source: JointPmf, code: BlockCode, alphas=ORACLE_ALPHAS,
                              delta_target: float | None = None,
                              tol: float = CHAIN_TOL) -> EvalResult:
    """Change-of-measure chain for a randomness extractor ``Zⁿ → K``.

    The uniformity deviation δ = d(P_K, unif) is measured first; the good set
    keeps the inputs mapped to keys of high entropy density.
    """
    if code.kind != "IR":
        raise ValueError("expected an extractor (kind 'IR')")
    n = code.n
    pn = _flat_block(source, n)
    flat = pn.mass.reshape(-1)
    ext = code["extractor"]
    if ext.size != flat.size:
        raise ValueError("extractor does not cover the source block alphabet")
    k = code.ranges["extractor"]
    pk = np.bincount(ext, weights=flat, minlength=k)
    delta = 0.5 * float(np.abs(pk - 1.0 / k).sum())
    if delta_target is not None and delta > delta_target + IDENTITY_TOL:
        raise ValueError(f"measured deviation {delta} exceeds the target {delta_target}")
    if delta >= 1:
        raise ValueError("uniformity deviation must be < 1")
    anchor = "intrinsic-randomness-converse"
    g = math.log2(2.0 / (1.0 - delta))
    with np.errstate(divide="ignore"):
        density = -np.log2(pk)
    typical = density >= math.log2(k) - g
    good = typical[ext]
    p_good = float(flat[good].sum())
    sets = {"C": good.copy(), "typical_keys": typical.copy()}
    if p_good <= 0:
        return _skipped("IR", code, math.nan, delta, p_good, "empty good set", anchor, sets)
    event = EventSet(pn.axes, good.reshape(pn.shape))
    tilted, cost = tilt_on_event(pn, event)
    div = kl_div(tilted, pn)
    tk = np.bincount(ext, weights=tilted.mass.reshape(-1), minlength=k)
    h_min = float(-np.log2(tk.max()))
    h_k = float(-np.sum(tk[tk > 0] * np.log2(tk[tk > 0])))
    h = entropy(tilted, pn.names)
    log_k = math.log2(k)
    atyp = float(pk[~typical].sum())
    checks = [
        _Check("typicality deviation", anchor + ":typical", delta,
               atyp - 2.0 ** -g, ">=", tol),
        _Check("good-set probability", anchor + ":good-set", p_good,
               (1 - delta) / 2, ">=", tol),
        _Check("tilt cost identity", anchor + ":tilt", div, cost, "==", IDENTITY_TOL),
        _Check("tilt cost bound", anchor + ":tilt", div, g, "<=", tol),
        _Check("min-entropy bound", anchor + ":min-entropy", h_min, log_k - 2 * g,
               ">=", tol),
        _Check("min-entropy step", anchor + ":chain", log_k, h_min + 2 * g, "<=", tol),
        _Check("Shannon entropy step", anchor + ":chain", h_min, h_k, "<=", tol),
        _Check("data processing step", anchor + ":chain", h_k, h, "<=", tol),
    ]
    for a in alphas:
        single = ir_single_letter(source.mass, a)
        checks += [
            _Check(_tag("penalized entropy", a), anchor + ":penalized", log_k / n,
                   h / n - a / n * (div - g) + 2 * g / n, "<=", tol),
            _Check(_tag("single-letterization", a), anchor + ":subadditivity",
                   (h - a * div) / n, single, "<=", tol),
            _Check(_tag("final rate bound", a), anchor + ":final", log_k / n,
                   single + (a + 2) * g / n, "<=", tol),
        ]
    chain, diag = _reports(checks)
    return EvalResult("IR", code.code_id, math.nan, delta, p_good, cost, chain, diag,
                      sets, tilted, extras={"rate": log_k / n})


# ---------------------------------------------------------------------------
# Wyner-Ziv

def block_distortion(distortion: np.ndarray, n: int) -> np.ndarray:
    """Additive block distortion, shape (|X|ⁿ, |Z|ⁿ)."""
    d = np.asarray(distortion, dtype=float)
    out = np.zeros((1, 1))
    for _ in range(n):
        out = (out[:, None, :, None] + d[None, :, None, :]).reshape(
            out.shape[0] * d.shape[0], out.shape[1] * d.shape[1])
    return out


def _block_source(problem_n: Problem) -> np.ndarray:
    r = problem_n.roles()
    m = problem_n.source_n().marginal(r["X"] + r["Y"])
    return m.reshape(problem_n.x_size ** problem_n.n, problem_n.y_size ** problem_n.n)


def _wz_checks(v: Mapping, n: int, log_m: float, d_level: float, mu: float, alphas,
               bound: SingleLetterBound | None, tol: float) -> list[_Check]:
    """The Wyner-Ziv chain from scalar or array-valued quantities ``v``."""
    anchor = "wz-converse"
    lhs_rate = log_m + mu * n * d_level
    b = v["tilt_bound"]
    checks = [
        _Check("tilt cost identity", anchor + ":tilt", v["div"], v["cost"], "==",
               IDENTITY_TOL),
        _Check("tilt cost bound", anchor + ":tilt", v["div"], b, "<=", tol),
        _Check("zero excess distortion under tilt", anchor + ":zero-error",
               v["excess"], 0.0, "==", ZERO_TOL),
        _Check("expected distortion under tilt", anchor + ":distortion",
               v["distortion"], n * d_level, "<=", tol),
        _Check("message entropy", anchor + ":rate", log_m, v["h_s"], ">=", tol),
        _Check("conditional information", anchor + ":rate", v["h_s"], v["rate"], ">=", tol),
        _Check("rate-distortion step", anchor + ":rate", lhs_rate,
               v["rate"] + mu * v["distortion"], ">=", tol),
        _Check("encoder Markov cost", anchor + ":markov", v["markov_u"], 0.0, "==",
               ZERO_TOL),
        _Check("decoder Markov cost", anchor + ":markov", v["markov_z"], 0.0, "==",
               ZERO_TOL),
    ]
    for i, a in enumerate(alphas):
        obj_n, wit = v["obj_n"][i], v["witness"][i]
        corr = (a + 1) * b
        cert = wit if bound is None else np.minimum(wit, bound.value)
        checks += [
            _Check(_tag("n-letter objective step", a), anchor + ":penalized",
                   lhs_rate, obj_n - corr, ">=", tol),
            _Check(_tag("single-letterization", a), anchor + ":superadditivity",
                   obj_n, n * wit, ">=", tol),
            _Check(_tag("final rate bound", a), anchor + ":final",
                   lhs_rate / n, cert - corr / n, ">=", tol),
        ]
        if bound is not None:
            checks.append(_Check(_tag("final rate bound vs lattice", a),
                                 anchor + ":final-lattice", lhs_rate / n,
                                 bound.value - bound.slack - corr / n, ">=", tol,
                                 diagnostic=True))
    return checks


def _wz_tables(problem_n: Problem, code: BlockCode, d_level: float):
    n = problem_n.n
    pxy = _block_source(problem_n)
    dist = block_distortion(problem_n.distortion, n)
    xn, yn = pxy.shape
    enc, dec = code["encoder"], code["decoder"]
    if enc.shape != (xn,) or dec.shape[1] != yn or code.ranges["decoder"] != dist.shape[1]:
        raise ValueError("code tables do not match the problem alphabets")
    zsel = dec[enc[:, None], np.arange(yn)[None, :]]
    dsel = dist[np.arange(xn)[:, None], zsel]
    good = dsel <= n * d_level + DIST_TOL
    return pxy, dist, zsel, dsel, good


def eval_wz(problem: Problem, code: BlockCode, d_level: float, mu: float = 0.0,
            alphas=ORACLE_ALPHAS, bound: SingleLetterBound | None = None,
            tol: float = CHAIN_TOL) -> EvalResult:
    """Change-of-measure chain for a Wyner-Ziv code at distortion level ``d_level``.

    ``bound`` is the lattice optimum of the constrained problem; pass it in
    to avoid recomputing it for every code.
    """
    if problem.kind != "WZ" or problem.n != 1 or code.kind != "WZ":
        raise ValueError("expected a single-letter WZ problem and a WZ code")
    n = code.n
    pn = problem.extend(n)
    pxy, dist, zsel, dsel, good = _wz_tables(pn, code, d_level)
    p_good = float(pxy[good].sum())
    eps = min(1.0, max(0.0, 1.0 - p_good))
    sets = {"D": good.copy()}
    anchor = "wz-converse"
    if p_good <= 0:
        return _skipped("WZ", code, eps, math.nan, p_good, "empty good set", anchor, sets)
    r = pn.roles()
    src = pn.source_n()
    xy_axes = [src.alphabet(a) for a in r["X"] + r["Y"]]
    event = EventSet(xy_axes, good)
    tilted, cost = tilt_on_event(src, event)
    txy = tilted.marginal(r["X"] + r["Y"]).reshape(pxy.shape)
    m = code.ranges["encoder"]
    xn, yn = pxy.shape
    mass = np.zeros((m, xn, yn, dist.shape[1]))
    xs, ys = np.meshgrid(np.arange(xn), np.arange(yn), indexing="ij")
    mass[code["encoder"][xs], xs, ys, zsel] = txy
    shape = (m,) + (pn.x_size,) * n + (pn.y_size,) * n + (pn.z_size,) * n
    aux = AuxModel.from_array(pn, mass.reshape(shape))
    terms = objective_terms(pn, aux)
    if bound is None:
        bound = single_letter_bound(problem, mu)
    v = {
        "div": kl_div(tilted, src), "cost": cost, "tilt_bound": _log_inv(1 - eps),
        "excess": float(txy[~good].sum()), "distortion": terms["distortion"],
        "h_s": entropy(aux.joint, "U"), "rate": terms["rate"],
        "markov_u": terms["markov_u"], "markov_z": terms["markov_z"],
        "obj_n": _term_values(pn, aux, mu, alphas),
        "witness": _witness_values(pn, aux, mu, alphas),
    }
    checks = _wz_checks(v, n, math.log2(m), d_level, mu, alphas, bound, tol)
    chain, diag = _reports(checks)
    return EvalResult("WZ", code.code_id, eps, math.nan, p_good, cost, chain, diag,
                      sets, tilted, extras={"aux": aux, "values": v})


def _bH(t: np.ndarray, keep) -> np.ndarray:
    """Batched entropy of the marginal on axes ``keep`` (axis 0 is the batch)."""
    drop = tuple(a for a in range(1, t.ndim) if a not in keep)
    m = t.sum(axis=drop).reshape(t.shape[0], -1) if drop else t.reshape(t.shape[0], -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.where(m > 0, m * np.log2(np.where(m > 0, m, 1.0)), 0.0).sum(axis=1)


def _bI(t, a, b, c=()) -> np.ndarray:
    a, b, c = tuple(a), tuple(b), tuple(c)
    return _bH(t, a + c) + _bH(t, b + c) - _bH(t, a + b + c) - _bH(t, c) if c else (
        _bH(t, a) + _bH(t, b) - _bH(t, a + b))


def wz_batch_values(problem: Problem, n: int, m: int, encoder: np.ndarray,
                    decoders: np.ndarray, d_level: float, mu: float, alphas):
    """Chain quantities for one encoder and a batch of decoders, vectorized.

    Returns ``(values, ok)`` where ``values`` maps quantity names to arrays
    over the batch and ``ok`` marks decoders with a nonempty good set.
    Independent of :func:`eval_wz`, against which it is cross-checked.
    """
    pn = problem.extend(n)
    pxy = _block_source(pn)
    dist = block_distortion(problem.distortion, n)
    d1 = np.asarray(problem.distortion, dtype=float)
    p1 = problem.source.mass
    xn, yn = pxy.shape
    zn = dist.shape[1]
    bsz = decoders.shape[0]
    dec = decoders.reshape(bsz, m, yn)
    zsel = dec[:, encoder, :]
    dsel = dist[np.arange(xn)[None, :, None], zsel]
    good = dsel <= n * d_level + DIST_TOL
    pg = (pxy[None] * good).sum(axis=(1, 2))
    ok = pg > 0
    safe = np.where(ok, pg, 1.0)
    txy = np.where(good, pxy[None], 0.0) / safe[:, None, None]
    t = np.zeros((bsz, m, xn, yn, zn))
    bb, xx, yy = np.meshgrid(np.arange(bsz), np.arange(xn), np.arange(yn), indexing="ij")
    t[bb, encoder[xx], xx, yy, zsel] = txy
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(txy > 0, txy / pxy[None], 1.0)
        div = np.sum(np.where(txy > 0, txy * np.log2(ratio), 0.0), axis=(1, 2))
        cost = -np.log2(safe)
    v = {
        "div": div, "cost": cost, "tilt_bound": cost.copy(), "p_good": pg,
        "excess": np.where(good, 0.0, txy).sum(axis=(1, 2)),
        "distortion": (txy * dsel).sum(axis=(1, 2)),
        "h_s": _bH(t, (1,)),
        "rate": _bI(t, (1,), (2,), (3,)),
        "markov_u": _bI(t, (1,), (3,), (2,)),
        "markov_z": _bI(t, (4,), (2,), (1, 3)),
    }
    obj = []
    for a in alphas:
        obj.append(v["rate"] + mu * v["distortion"] + (a + 1) * v["div"]
                   + a * (v["markov_u"] + v["markov_z"]))
    v["obj_n"] = obj
    # time-sharing witness: U_j = (S, X_<j, Y_>j), letters (X_j, Y_j, Z_j)
    nx, ny, nz = problem.x_size, problem.y_size, problem.z_size
    tb = t.reshape((bsz, m) + (nx,) * n + (ny,) * n + (nz,) * n)
    ax_x = [2 + j for j in range(n)]
    ax_y = [2 + n + j for j in range(n)]
    ax_z = [2 + 2 * n + j for j in range(n)]
    blocks = []
    for j in range(n):
        keep = [0, 1] + ax_x[:j] + ax_y[j + 1:] + [ax_x[j], ax_y[j], ax_z[j]]
        drop = tuple(a for a in range(tb.ndim) if a not in keep)
        mm = tb.sum(axis=drop)
        order = [sorted(keep).index(a) for a in keep]
        mm = np.transpose(mm, order)
        blocks.append(mm.reshape(bsz, -1, nx, ny, nz))
    w = np.concatenate(blocks, axis=1) / n
    wxy = w.sum(axis=(1, 4))
    with np.errstate(divide="ignore", invalid="ignore"):
        wsrc = np.sum(np.where(wxy > 0, wxy * np.log2(np.where(wxy > 0, wxy, 1.0) / p1), 0.0),
                      axis=(1, 2))
    wdist = (w.sum(axis=(1, 3)) * d1[None]).sum(axis=(1, 2))
    w_rate = _bI(w, (1,), (2,), (3,))
    w_mu = _bI(w, (1,), (3,), (2,))
    w_mz = _bI(w, (4,), (2,), (1, 3))
    v["witness"] = [w_rate + mu * wdist + (a + 1) * wsrc + a * (w_mu + w_mz)
                    for a in alphas]
    return v, ok


# ---------------------------------------------------------------------------
# interactive protocols: function computation, common randomness, secret keys

_PROTO_AXES = ("PI1", "PI2", "K1", "K2", "XB", "YB")


def _run_protocol(code: BlockCode, xn: int, yn: int):
    phi1, phi2 = code["phi1"], code["phi2"]
    psi1, psi2 = code["psi1"], code["psi2"]
    if phi1.shape[0] != xn or phi2.shape[0] != yn:
        raise ValueError("protocol tables do not match the source alphabets")
    xs = np.arange(xn)[:, None]
    ys = np.arange(yn)[None, :]
    p1 = np.broadcast_to(phi1[:, None], (xn, yn))
    p2 = phi2[ys, p1]
    k1 = psi1[xs, p2]
    k2 = psi2[ys, p1]
    return p1, p2, k1, k2


def _transcript_pmf(pxy: np.ndarray, code: BlockCode, runs) -> JointPmf:
    """Joint law of (Π₁, Π₂, K₁, K₂, Xⁿ, Yⁿ) with blocks flattened."""
    p1, p2, k1, k2 = runs
    xn, yn = pxy.shape
    a, b, k = code.ranges["phi1"], code.ranges["phi2"], code.ranges["psi1"]
    mass = np.zeros((a, b, k, k, xn, yn))
    xs, ys = np.meshgrid(np.arange(xn), np.arange(yn), indexing="ij")
    mass[p1, p2, k1, k2, xs, ys] = pxy
    return JointPmf.from_array(_PROTO_AXES, mass, validate=False)


def _protocol_aux(problem_n: Problem, code: BlockCode, txy: np.ndarray, runs,
                  with_key: bool) -> AuxModel:
    """U = Π₁ and V = Π₂ (FC) or V = (Π₂, K₂) (CR/SK)."""
    p1, p2, _, k2 = runs
    xn, yn = txy.shape
    a, b, k = code.ranges["phi1"], code.ranges["phi2"], code.ranges["psi1"]
    vsize = b * k if with_key else b
    v = p2 * k + k2 if with_key else p2
    mass = np.zeros((a, vsize, xn, yn))
    xs, ys = np.meshgrid(np.arange(xn), np.arange(yn), indexing="ij")
    mass[p1, v, xs, ys] = txy
    n = problem_n.n
    shape = (a, vsize) + (problem_n.x_size,) * n + (problem_n.y_size,) * n
    return AuxModel.from_array(problem_n, mass.reshape(shape))


def _tilt_xy(problem_n: Problem, good: np.ndarray):
    r = problem_n.roles()
    src = problem_n.source_n()
    xy = r["X"] + r["Y"]
    event = EventSet([src.alphabet(a) for a in xy],
                     good.reshape(tuple(src.size_of(a) for a in xy)))
    tilted, cost = tilt_on_event(src, event)
    txy = tilted.marginal(xy).reshape(good.shape)
    return tilted, cost, txy, kl_div(tilted, src)


def eval_fc(problem: Problem, code: BlockCode, alphas=ORACLE_ALPHAS,
            bound: SingleLetterBound | None = None, tol: float = CHAIN_TOL) -> EvalResult:
    """Change-of-measure chain for an interactive function-computation protocol.

    The rate correction is ((2α+2)/n) log₂ 1/(1−ε): under the tilted law all
    Markov and functional penalties vanish and only the source-divergence
    term, weighted 2α+2, remains.
    """
    if problem.kind != "FC" or problem.n != 1 or code.kind != "FC":
        raise ValueError("expected a single-letter FC problem and an FC protocol")
    n = code.n
    pn = problem.extend(n)
    pxy = _block_source(pn)
    xn, yn = pxy.shape
    fvals = pn.function_indicator().argmax(axis=-1).reshape(xn, yn)
    if code.ranges["psi1"] != pn.f_size ** n:
        raise ValueError("protocol outputs must range over function blocks")
    runs = _run_protocol(code, xn, yn)
    good = (runs[2] == fvals) & (runs[3] == fvals)
    p_good = float(pxy[good].sum())
    eps = min(1.0, max(0.0, 1.0 - p_good))
    anchor = "fc-converse"
    sets = {"D": good.copy()}
    if p_good <= 0:
        return _skipped("FC", code, eps, math.nan, p_good, "empty good set", anchor, sets)
    tilted, cost, txy, div = _tilt_xy(pn, good)
    tp = _transcript_pmf(txy, code, runs)
    aux = _protocol_aux(pn, code, txy, runs, with_key=False)
    terms = objective_terms(pn, aux)
    if bound is None:
        bound = single_letter_bound(problem)
    obj = _term_values(pn, aux, 0.0, alphas)
    wit = _witness_values(pn, aux, 0.0, alphas)
    length = code.comm_bits
    pi = ["PI1", "PI2"]
    h_pi = entropy(tp, pi)
    h_px, h_py = entropy(tp, pi, ["XB"]), entropy(tp, pi, ["YB"])
    b = _log_inv(1 - eps)
    checks = [
        _Check("tilt cost identity", anchor + ":tilt", div, cost, "==", IDENTITY_TOL),
        _Check("tilt cost bound", anchor + ":tilt", div, b, "<=", tol),
        _Check("zero error under tilt", anchor + ":zero-error",
               float(txy[~good].sum()), 0.0, "==", ZERO_TOL),
        _Check("transcript length", anchor + ":rate", length, h_pi, ">=", tol),
        _Check("interactive communication", anchor + ":interactive", h_pi,
               h_px + h_py, ">=", tol),
        _Check("information cost identity", anchor + ":rate", h_px + h_py,
               terms["comm"], "==", ZERO_TOL),
        _Check("first-round Markov cost", anchor + ":markov", terms["markov_u"], 0.0,
               "==", ZERO_TOL),
        _Check("second-round Markov cost", anchor + ":markov", terms["markov_v"], 0.0,
               "==", ZERO_TOL),
        _Check("recoverability at Y", anchor + ":function", terms["func_y"], 0.0,
               "==", ZERO_TOL),
        _Check("recoverability at X", anchor + ":function", terms["func_x"], 0.0,
               "==", ZERO_TOL),
    ]
    for i, a in enumerate(alphas):
        corr = (2 * a + 2) * b
        cert = _certified(wit[i], bound, True)
        checks += [
            _Check(_tag("n-letter objective step", a), anchor + ":penalized",
                   length, obj[i] - corr, ">=", tol),
            _Check(_tag("single-letterization", a), anchor + ":superadditivity",
                   obj[i], n * wit[i], ">=", tol),
            _Check(_tag("final rate bound", a), anchor + ":final", length / n,
                   cert - corr / n, ">=", tol),
            _Check(_tag("final rate bound vs lattice", a), anchor + ":final-lattice",
                   length / n, bound.value - bound.slack - corr / n, ">=", tol,
                   diagnostic=True),
        ]
    chain, diag = _reports(checks)
    return EvalResult("FC", code.code_id, eps, math.nan, p_good, cost, chain, diag,
                      sets, tilted, extras={"aux": aux})


def _cr_tail(tp: JointPmf, mu: float, alpha: float, gamma: float, div: float,
             obj_n: float, start: float, anchor: str, tol: float) -> list[_Check]:
    """Chain from H(Π̃,K̃₁) − μ H(Π̃)-type start values to the n-letter objective."""
    pi, pik2 = ["PI1", "PI2"], ["PI1", "PI2", "K2"]
    s2 = entropy(tp, pi + ["K1"]) - mu * (entropy(tp, pi, ["XB"]) + entropy(tp, pi, ["YB"]))
    s3 = entropy(tp, pik2) - mu * (entropy(tp, pik2, ["XB"]) + entropy(tp, pik2, ["YB"]))
    s4 = mutual_info(tp, pik2, ["XB", "YB"]) - mu * (
        mutual_info(tp, pik2, ["XB"], ["YB"]) + mutual_info(tp, pik2, ["YB"], ["XB"]))
    c1 = mutual_info(tp, ["PI1"], ["YB"], ["XB"])
    c2 = mutual_info(tp, ["PI2", "K2"], ["XB"], ["YB", "PI1"])
    s5 = s4 - (alpha + 1) * (c1 + c2) - (alpha + 2 * mu) * div + (alpha + 2 * mu) * gamma
    s6 = obj_n + (alpha + 2 * mu) * gamma
    t = lambda name: _tag(name, alpha)
    return [
        _Check(t("interactive communication step"), anchor + ":chain", start, s2, "<=", tol),
        _Check(t("key recoverability identity"), anchor + ":chain", s2, s3, "==", ZERO_TOL),
        _Check(t("information step"), anchor + ":chain", s3, s4, "<=", tol),
        _Check(t("penalty step"), anchor + ":chain", s4, s5, "<=", tol),
        _Check(t("n-letter objective step"), anchor + ":penalized", s5, s6, "<=", tol),
    ]


def eval_cr(problem: Problem, code: BlockCode, mode: str | None = None,
            alphas=ORACLE_ALPHAS, bound: SingleLetterBound | None = None,
            mu: float = 0.0, tol: float = CHAIN_TOL) -> EvalResult:
    """Change-of-measure chain for common randomness (``CR``) or a secret key (``SK``).

    ε = P(K₁ ≠ K₂); δ is d(P_K₁, unif) for CR and d(P_K₁Π, unif × P_Π) for SK.
    With γ = log₂ 2/(1−ε−δ) the final bound carries ((α+2μ+2)/n)γ for CR.
    For SK the chain runs through the CR chain at μ+1 and then adds the
    2γ of the min-entropy step, giving ((α+2μ+4)/n)γ.
    """
    mode = (mode or problem.kind).upper()
    if mode not in ("CR", "SK") or problem.kind != mode or code.kind != mode:
        raise ValueError("problem kind, protocol kind and mode must agree (CR or SK)")
    if problem.n != 1:
        raise ValueError("expected a single-letter problem")
    n = code.n
    pn = problem.extend(n)
    pxy = _block_source(pn)
    xn, yn = pxy.shape
    runs = _run_protocol(code, xn, yn)
    p1, p2, k1, k2 = runs
    k = code.ranges["psi1"]
    tp0 = _transcript_pmf(pxy, code, runs)
    eps = float(pxy[k1 != k2].sum())
    pk1 = tp0.marginal(["K1"])
    anchor = "cr-converse" if mode == "CR" else "sk-converse"
    if mode == "CR":
        delta = 0.5 * float(np.abs(pk1 - 1.0 / k).sum())
    else:
        pkp = tp0.marginal(["K1", "PI1", "PI2"])
        delta = 0.5 * float(np.abs(pkp - pkp.sum(axis=0, keepdims=True) / k).sum())
    if eps + delta >= 1:
        return _skipped(mode, code, eps, delta, math.nan, "eps + delta >= 1", anchor)
    gamma = math.log2(2.0 / (1.0 - eps - delta))
    thr = math.log2(k) - gamma
    with np.errstate(divide="ignore"):
        if mode == "CR":
            typical = -np.log2(pk1) >= thr
            in_t = typical[k1]
            atyp = float(pk1[~typical].sum())
        else:
            pkp = tp0.marginal(["K1", "PI1", "PI2"])
            ppi = pkp.sum(axis=0)
            cond = np.where(ppi > 0, pkp / np.where(ppi > 0, ppi, 1.0), 0.0)
            typical = -np.log2(cond) >= thr
            in_t = typical[k1, p1, p2]
            atyp = float(pkp[~typical].sum())
    good = in_t & (k1 == k2)
    p_good = float(pxy[good].sum())
    sets = {"T": typical.copy(), "D": good.copy()}
    if p_good <= 0:
        return _skipped(mode, code, eps, delta, p_good, "empty good set", anchor, sets)
    tilted, cost, txy, div = _tilt_xy(pn, good)
    tp = _transcript_pmf(txy, code, runs)
    aux = _protocol_aux(pn, code, txy, runs, with_key=True)
    if bound is None:
        bound = single_letter_bound(problem, mu)
    obj = _term_values(pn, aux, mu, alphas)
    wit = _witness_values(pn, aux, mu, alphas)
    log_k, length = math.log2(k), code.comm_bits
    pi = ["PI1", "PI2"]
    s0 = log_k - mu * length - 2 * gamma
    checks = [
        _Check("typicality deviation", anchor + ":typical", delta,
               atyp - 2.0 ** -gamma, ">=", tol),
        _Check("good-set probability (union bound)", anchor + ":good-set", p_good,
               1 - atyp - eps, ">=", tol),
        _Check("good-set probability", anchor + ":good-set", p_good,
               (1 - eps - delta) / 2, ">=", tol),
        _Check("tilt cost identity", anchor + ":tilt", div, cost, "==", IDENTITY_TOL),
        _Check("tilt cost bound", anchor + ":tilt", div, gamma, "<=", tol),
        _Check("agreement under tilt", anchor + ":zero-error",
               float(txy[k1 != k2].sum()), 0.0, "==", ZERO_TOL),
        _Check("interactive communication", anchor + ":interactive",
               entropy(tp, pi), entropy(tp, pi, ["XB"]) + entropy(tp, pi, ["YB"]),
               ">=", tol),
        _Check("first-round Markov cost", anchor + ":markov",
               mutual_info(tp, ["PI1"], ["YB"], ["XB"]), 0.0, "==", ZERO_TOL),
        _Check("second-round Markov cost", anchor + ":markov",
               mutual_info(tp, ["PI2", "K2"], ["XB"], ["YB", "PI1"]), 0.0, "==",
               ZERO_TOL),
        _Check("transcript length", anchor + ":rate", length, entropy(tp, pi), ">=", tol),
    ]
    if mode == "CR":
        tk = tp.marginal(["K1"])
        supp = tk > 0
        checks += [
            _Check("tilted key mass", anchor + ":min-entropy",
                   float(np.max(tk[supp] - pk1[supp] / p_good)), 0.0, "<=", tol),
            _Check("tilted key mass bound", anchor + ":min-entropy",
                   float(np.max(pk1[supp] / p_good)), 2.0 ** gamma / (p_good * k),
                   "<=", tol),
            _Check("min-entropy bound", anchor + ":min-entropy",
                   min_entropy(tp, ["K1"]), log_k - 2 * gamma, ">=", tol),
        ]
        s1 = entropy(tp, ["K1"]) - mu * entropy(tp, pi)
        checks.append(_Check("rate step", anchor + ":chain", s0, s1, "<=", tol))
        mu_eff, extra = mu, 2
        checks.append(_Check("joint entropy step", anchor + ":chain", s1,
                             entropy(tp, pi + ["K1"]) - mu * entropy(tp, pi), "<=", tol))
        start = entropy(tp, pi + ["K1"]) - mu * entropy(tp, pi)
    else:
        checks.append(_Check("conditional min-entropy bound", anchor + ":min-entropy",
                             min_entropy(tp, ["K1"], pi), log_k - 2 * gamma, ">=", tol))
        s1 = entropy(tp, ["K1"], pi) - mu * entropy(tp, pi)
        start = entropy(tp, pi + ["K1"]) - (mu + 1) * entropy(tp, pi)
        checks += [
            _Check("rate step", anchor + ":chain", s0, s1, "<=", tol),
            _Check("chain rule identity", anchor + ":chain", s1, start, "==", ZERO_TOL),
        ]
        mu_eff, extra = mu + 1, 4
    rate = (log_k - mu * length) / n
    for i, a in enumerate(alphas):
        checks += _cr_tail(tp, mu_eff, a, gamma, div, obj[i], start, anchor, tol)
        corr = (a + 2 * mu + extra) * gamma / n
        cert = _certified(wit[i], bound, False)
        checks += [
            _Check(_tag("single-letterization", a), anchor + ":subadditivity",
                   obj[i], n * wit[i], "<=", tol),
            _Check(_tag("final rate bound", a), anchor + ":final", rate, cert + corr,
                   "<=", tol),
            _Check(_tag("final rate bound vs lattice", a), anchor + ":final-lattice",
                   rate, bound.value - bound.slack + corr, "<=", tol, diagnostic=True),
        ]
    chain, diag = _reports(checks)
    return EvalResult(mode, code.code_id, eps, delta, p_good, cost, chain, diag,
                      sets, tilted, extras={"aux": aux, "gamma": gamma})


# ---------------------------------------------------------------------------
# wiretap channel

def factorized_channel(w, x_size: int, y_size: int, z_size: int, tol: float = 1e-12):
    """Split W(y,z|x), shape (|X|, |Y|, |Z|), into (W₁, W₂) or raise if it does not factor."""
    w = np.asarray(w, dtype=float).reshape(x_size, y_size, z_size)
    check_stochastic(w, n_in_axes=1)
    w1, w2 = w.sum(axis=2), w.sum(axis=1)
    if np.max(np.abs(w - w1[:, :, None] * w2[:, None, :])) > tol:
        raise ValueError("channel does not factor as W1(y|x) W2(z|x)")
    return w1, w2


def _wt_blocks(problem_n: Problem):
    ch = problem_n.channel_n()
    xn = problem_n.x_size ** problem_n.n
    yn = problem_n.y_size ** problem_n.n
    zn = problem_n.z_size ** problem_n.n
    wn = ch.matrix.reshape(xn, yn, zn)
    return wn, wn.sum(axis=2), wn.sum(axis=1)


def wiretap_delta_terms(eps: float, delta: float) -> dict:
    """γ, η and the additive terms of the wiretap rate bound."""
    s = 1.0 - eps - delta
    eta = 1.0 - s / 4
    root = 1.0 - math.sqrt(eta)
    return {"gamma": math.log2(4.0 / s), "eta": eta, "sqrt_gap": root,
            "Delta": 2 * math.log2(1 / s) + 2 * math.log2(1 / root) + 3}


def eval_wiretap(problem: Problem, code: BlockCode, alphas=ORACLE_ALPHAS,
                 bound: SingleLetterBound | None = None,
                 tol: float = CHAIN_TOL) -> EvalResult:
    """Expurgation and change-of-measure chain for a wiretap code.

    Builds the expurgated message set, the decoding sets, the low-leakage
    sets and the per-message input sets, constructs the tilted
    (Ũ, X̃ⁿ, Ỹⁿ, Z̃ⁿ) and checks every inequality down to
    log N ≤ n C^α + 2 log 1/(1−ε−δ) + (2α+2) log 1/(1−√η) + 3.
    """
    if problem.kind != "WT" or problem.n != 1 or code.kind != "WT":
        raise ValueError("expected a single-letter WT problem and a WT code")
    n = code.n
    pn = problem.extend(n)
    wn, w1n, w2n = _wt_blocks(pn)
    xn, yn, zn = wn.shape
    enc, dec = code["encoder"], code["decoder"]
    if enc.shape[1] != xn or dec.shape != (yn,):
        raise ValueError("code tables do not match the channel alphabets")
    anchor = "wiretap-converse"
    big_n = enc.shape[0]
    pm = 1.0 / big_n
    # per-message laws
    py_m = enc @ w1n                       # (N, Yn)
    pz_m = enc @ w2n                       # (N, Zn)
    pz = pz_m.mean(axis=0)
    correct = np.zeros((big_n, yn), dtype=bool)
    correct[dec, np.arange(yn)] = True     # A_m indicator
    e_m = 1.0 - (py_m * correct).sum(axis=1)
    d_m = 0.5 * np.abs(pz_m - pz[None]).sum(axis=1)
    eps = float(np.mean(e_m))
    joint_mz = pz_m * pm
    delta = 0.5 * float(np.abs(joint_mz - pm * pz[None]).sum())
    if eps + delta >= 1:
        return _skipped("WT", code, eps, delta, math.nan, "eps + delta >= 1", anchor)
    c = wiretap_delta_terms(eps, delta)
    gamma, eta, root = c["gamma"], c["eta"], c["sqrt_gap"]
    s = 1.0 - eps - delta
    keep = e_m + d_m <= (1 + eps + delta) / 2 + IDENTITY_TOL
    kept = np.flatnonzero(keep)
    sets = {"M_prime": kept.tolist(), "A": correct.copy()}
    if kept.size == 0:
        return _skipped("WT", code, eps, delta, math.nan, "empty expurgated set",
                        anchor, sets)
    with np.errstate(divide="ignore", invalid="ignore"):
        llr = np.where(pz_m > 0, np.log2(pz_m / np.where(pz > 0, pz, 1.0)[None]), -np.inf)
    low = llr <= gamma                     # B_m indicator, (N, Zn)
    sets["B"] = low.copy()
    # acceptance probability of (A_m, B_m) given each input
    acc = np.einsum("xyz,my,mz->mx", wn, correct.astype(float), low.astype(float))
    ok_x = (acc >= 1 - math.sqrt(eta) - IDENTITY_TOL) & (enc > 0)
    sets["C"] = ok_x.copy()
    if not np.all(ok_x[kept].any(axis=1)):
        return _skipped("WT", code, eps, delta, math.nan, "empty input set", anchor, sets)
    checks = [
        _Check("average criterion identity", anchor + ":expurgation", eps + delta,
               float(np.mean(e_m + d_m)), "==", ZERO_TOL),
        _Check("expurgated set size", anchor + ":expurgation", kept.size,
               s * big_n / (1 + eps + delta), ">=", tol),
        _Check("per-message criterion", anchor + ":expurgation",
               float(np.max((e_m + d_m)[kept])), (1 + eps + delta) / 2, "<=", tol),
        _Check("low-leakage set tail under P_Z", anchor + ":leakage-set",
               float(np.max(np.where(low, 0.0, pz[None]).sum(axis=1)[kept])),
               2.0 ** -gamma, "<=", tol),
        _Check("low-leakage set tail given m", anchor + ":leakage-set",
               float(np.max((np.where(low, 0.0, pz_m).sum(axis=1) - d_m)[kept])),
               2.0 ** -gamma, "<=", tol),
    ]
    pa_m = (py_m * correct).sum(axis=1)
    pb_m = np.where(low, pz_m, 0.0).sum(axis=1)
    joint_ok = np.einsum("mx,mx->m", enc, acc)
    checks += [
        _Check("joint acceptance union bound", anchor + ":acceptance",
               float(np.min((joint_ok - (pa_m + pb_m - 1))[kept])), 0.0, ">=", tol),
        _Check("joint acceptance", anchor + ":acceptance", float(np.min(joint_ok[kept])),
               s / 4, ">=", tol),
        _Check("input set probability", anchor + ":input-set",
               float(np.min(np.where(ok_x, enc, 0.0).sum(axis=1)[kept])),
               1 - math.sqrt(eta), ">=", tol),
    ]
    # tilted variables: U uniform on M', X̃ | U restricted to C_u, (Ỹ, Z̃) | X̃ restricted
    mk = kept.size
    px_u = np.where(ok_x[kept], enc[kept], 0.0)
    px_u /= px_u.sum(axis=1, keepdims=True)
    a_u = correct[kept].astype(float)
    b_u = low[kept].astype(float)
    num = wn[None] * a_u[:, None, :, None] * b_u[:, None, None, :]       # (u,x,y,z)
    den = acc[kept]
    cond = np.where(den[:, :, None, None] > 0,
                    num / np.where(den > 0, den, 1.0)[:, :, None, None], 0.0)
    mass = (px_u / mk)[:, :, None, None] * cond
    py_part = w1n[None] * a_u[:, None, :]
    pz_part = w2n[None] * b_u[:, None, :]
    ny = py_part.sum(axis=2, keepdims=True)
    nz = pz_part.sum(axis=2, keepdims=True)
    prod = (np.where(ny > 0, py_part / np.where(ny > 0, ny, 1), 0)[:, :, :, None]
            * np.where(nz > 0, pz_part / np.where(nz > 0, nz, 1), 0)[:, :, None, :])
    live = px_u > 0
    prod_gap = float(np.max(np.abs(cond - prod)[live])) if live.any() else 0.0
    zmarg = cond.sum(axis=2)
    z_gap = float(np.max(np.abs(zmarg - np.where(nz > 0, pz_part / np.where(nz > 0, nz, 1), 0))[live]))
    shape = (mk,) + (pn.x_size,) * n + (pn.y_size,) * n + (pn.z_size,) * n
    aux = AuxModel.from_array(pn, mass.reshape(shape))
    p = aux.joint
    r = pn.roles()
    ty = mass.sum(axis=(1, 3))                                          # (u, y)
    decode_err = float(np.where(dec[None, :] == kept[:, None], 0.0, ty).sum())
    i_y = mutual_info(p, "U", r["Y"])
    i_z = mutual_info(p, "U", r["Z"])
    tz_u = mass.sum(axis=(1, 2)) * mk                                   # P̃(z|u)
    tz = tz_u.mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        d_zz = float(np.sum(np.where(tz > 0, tz * np.log2(tz / np.where(pz > 0, pz, 1)), 0)))
        lhs_leak = i_z + d_zz
        expect = float(np.sum(np.where(tz_u > 0, tz_u / mk * np.log2(
            tz_u / np.where(pz > 0, pz, 1)[None]), 0.0)))
        supp = (tz_u > 0) & b_u.astype(bool)
        r1 = np.where(supp, tz_u / np.where(pz > 0, pz, 1)[None], 0.0)
        pz_mk = pz_m[kept]
        r2 = np.where(supp, tz_u / np.where(pz_mk > 0, pz_mk, 1), 0.0)
        restricted = np.einsum("ux,xz->uz", np.where(ok_x[kept], enc[kept], 0.0), w2n)
        r3 = np.where(supp, tz_u / np.where(restricted > 0, restricted, 1), 0.0)
    max_r1 = float(np.log2(r1.max()))
    max_r2 = float(np.log2(r2.max()))
    leak_bound = gamma + 2 * math.log2(1 / root)
    ch_div = objective_terms(pn, aux)["channel_div"]
    ch_div_direct = float(np.sum(mass.sum(axis=(2, 3)) * -np.log2(
        np.where(den > 0, den, 1.0))))
    log_n = math.log2(big_n)
    checks += [
        _Check("product-form conditional", anchor + ":construction", prod_gap, 0.0, "==",
               IDENTITY_TOL),
        _Check("eavesdropper conditional", anchor + ":construction", z_gap, 0.0, "==",
               IDENTITY_TOL),
        _Check("decodability under tilt", anchor + ":zero-error", decode_err, 0.0, "==",
               ZERO_TOL),
        _Check("expurgation loss", anchor + ":rate", log_n - math.log2(2 / s),
               math.log2(mk), "<=", tol),
        _Check("message information", anchor + ":rate", math.log2(mk), i_y, "<=", tol),
        _Check("leakage identity", anchor + ":leakage", lhs_leak, expect, "==", ZERO_TOL),
        _Check("leakage maximum", anchor + ":leakage", expect, max_r1, "<=", tol),
        _Check("leakage threshold step", anchor + ":leakage", max_r1, gamma + max_r2,
               "<=", tol),
        _Check("restricted ratio", anchor + ":leakage", float(np.max(r2 - r3)), 0.0,
               "<=", tol),
        _Check("restricted ratio bound", anchor + ":leakage", float(r3.max()),
               1 / root ** 2, "<=", tol),
        _Check("leakage bound", anchor + ":leakage", i_z, leak_bound, "<=", tol),
        _Check("rate-leakage step", anchor + ":rate", log_n, i_y - i_z + c["Delta"],
               "<=", tol),
        _Check("channel divergence identity", anchor + ":divergence", ch_div,
               ch_div_direct, "==", ZERO_TOL),
        _Check("channel divergence bound", anchor + ":divergence", ch_div,
               math.log2(1 / root), "<=", tol),
    ]
    if bound is None:
        bound = single_letter_bound(problem)
    obj2 = _term_values(pn, aux, 0.0, [2 * a for a in alphas])
    wit = _witness_values(pn, aux, 0.0, alphas)
    for i, a in enumerate(alphas):
        final = 2 * math.log2(1 / s) + (2 * a + 2) * math.log2(1 / root) + 3
        cert = _certified(wit[i], bound, False)
        checks += [
            _Check(_tag("penalized rate step", a), anchor + ":penalized", log_n,
                   obj2[i] + 2 * a * ch_div + c["Delta"], "<=", tol),
            _Check(_tag("single-letterization", a), anchor + ":subadditivity",
                   obj2[i], n * wit[i], "<=", tol),
            _Check(_tag("final rate bound", a), anchor + ":final", log_n,
                   n * cert + final, "<=", tol),
            _Check(_tag("final rate bound vs lattice", a), anchor + ":final-lattice",
                   log_n, n * (bound.value - bound.slack) + final, "<=", tol,
                   diagnostic=True),
        ]
    chain, diag = _reports(checks)
    p_good = float(np.mean(joint_ok[kept]))
    return EvalResult("WT", code.code_id, eps, delta, p_good, _log_inv(p_good), chain,
                      diag, sets, p, extras={"aux": aux, **c})


# ---------------------------------------------------------------------------
# sweeps

RECORD_DTYPE = np.dtype([("code_id", "i8"), ("eps", "f8"), ("delta", "f8"),
                         ("worst_margin", "f8"), ("passed", "?"), ("skipped", "?")])


@dataclass
class _Tally:
    count: int = 0
    violations: int = 0
    worst: float = math.inf
    worst_code: int = -1

    def add(self, margins: np.ndarray, passed: np.ndarray, ids: np.ndarray):
        if margins.size == 0:
            return
        self.count += int(margins.size)
        self.violations += int((~passed).sum())
        valid = ~np.isnan(margins)
        if valid.any():
            i = int(np.argmin(np.where(valid, margins, np.inf)))
            if margins[i] < self.worst:
                self.worst, self.worst_code = float(margins[i]), int(ids[i])


@dataclass
class SweepSummary:
    """Aggregate outcome of an exhaustive sweep.

    ``checks`` and ``diagnostics`` map check groups to tallies; ``records``
    holds one ``(code_id, eps, delta, worst_margin, passed, skipped)`` row
    per code in enumeration order (rounded to 12 digits so that last-ulp
    noise cannot flip determinism checks); ``digest`` hashes the records.
    """

    label: str
    kind: str
    n_codes: int = 0
    n_skipped: int = 0
    checks: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    _chunks: list = field(default_factory=list, repr=False)
    _rows: list = field(default_factory=list, repr=False)

    def add_records(self, rec: np.ndarray):
        self._flush()
        self._chunks.append(rec)

    def _flush(self):
        if self._rows:
            self._chunks.append(np.array(self._rows, dtype=RECORD_DTYPE))
            self._rows = []

    @property
    def records(self) -> np.ndarray:
        """Per-code rows (structured array, enumeration order)."""
        self._flush()
        if not self._chunks:
            return np.zeros(0, dtype=RECORD_DTYPE)
        if len(self._chunks) > 1:
            self._chunks = [np.concatenate(self._chunks)]
        return self._chunks[0]

    @property
    def n_checks(self) -> int:
        return sum(t.count for t in self.checks.values())

    @property
    def n_violations(self) -> int:
        return sum(t.violations for t in self.checks.values())

    @property
    def worst_margin(self) -> float:
        return min((t.worst for t in self.checks.values()), default=math.inf)

    @property
    def digest(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.records).tobytes()).hexdigest()

    def group_rows(self, diagnostic: bool = False):
        src = self.diagnostics if diagnostic else self.checks
        return [(name, t.count, t.violations, t.worst, t.worst_code)
                for name, t in sorted(src.items())]

    def _tally(self, name: str, diagnostic: bool) -> _Tally:
        d = self.diagnostics if diagnostic else self.checks
        return d.setdefault(group_of(name), _Tally())

    def add_result(self, res: EvalResult):
        self.n_codes += 1
        self.n_skipped += int(res.skipped)
        for diag, reps in ((False, res.chain), (True, res.diagnostics)):
            for rep in reps:
                if diag is False and res.skipped:
                    continue
                self._tally(rep.name, diag).add(
                    np.array([rep.margin]), np.array([rep.passed]), np.array([res.code_id]))
                if not rep.passed and not diag and len(self.failures) < 50:
                    self.failures.append((res.code_id, rep.name, rep.margin))
        self._rows.append((res.code_id, _r(res.eps), _r(res.delta),
                           _r(res.worst_margin if not res.skipped else math.nan),
                           res.passed, res.skipped))

    def merge(self, other: "SweepSummary"):
        self.n_codes += other.n_codes
        self.n_skipped += other.n_skipped
        for mine, theirs in ((self.checks, other.checks),
                             (self.diagnostics, other.diagnostics)):
            for name, t in theirs.items():
                m = mine.setdefault(name, _Tally())
                m.count += t.count
                m.violations += t.violations
                if t.worst < m.worst:
                    m.worst, m.worst_code = t.worst, t.worst_code
        self._flush()
        self._chunks.extend(other._chunks)
        self._rows.extend(other._rows)
        self.failures.extend(other.failures[: max(0, 50 - len(self.failures))])


def _r(x: float) -> float:
    x = float(x)
    return x if not math.isfinite(x) else round(x, 12)


@dataclass(frozen=True)
class SweepSpec:
    """One exhaustive sweep: a code family and the law it runs on.

    ``target`` is a single-axis :class:`JointPmf` for ``lossless``/``IR``
    and a single-letter :class:`Problem` otherwise; ``options`` holds
    ``d_level``/``mu`` where they apply.
    """

    label: str
    kind: str
    sizes: tuple
    target: object
    options: tuple = ()

    @property
    def size_map(self) -> dict:
        return dict(self.sizes)

    @property
    def option_map(self) -> dict:
        return dict(self.options)

    def count(self) -> int:
        return count_codes(self.kind, self.size_map)


def evaluate(spec: SweepSpec, code: BlockCode, alphas=ORACLE_ALPHAS,
             bound: SingleLetterBound | None = None, tol: float = CHAIN_TOL) -> EvalResult:
    """Dispatch one code of a sweep to its evaluator."""
    o = spec.option_map
    k = spec.kind
    if k == "lossless":
        return eval_lossless(spec.target, code, alphas, tol)
    if k == "IR":
        return eval_intrinsic_randomness(spec.target, code, alphas, tol=tol)
    if k == "WZ":
        return eval_wz(spec.target, code, o["d_level"], o.get("mu", 0.0), alphas,
                       bound, tol)
    if k == "FC":
        return eval_fc(spec.target, code, alphas, bound, tol)
    if k in ("CR", "SK"):
        return eval_cr(spec.target, code, k, alphas, bound, o.get("mu", 0.0), tol)
    if k == "WT":
        return eval_wiretap(spec.target, code, alphas, bound, tol)
    raise ValueError(k)


def spec_bound(spec: SweepSpec) -> SingleLetterBound | None:
    if spec.kind in ("lossless", "IR"):
        return None
    return single_letter_bound(spec.target, spec.option_map.get("mu", 0.0))


def _eval_chunk(spec, ids, alphas, bound, tol) -> SweepSummary:
    out = SweepSummary(spec.label, spec.kind)
    sizes = spec.size_map
    for i in ids:
        out.add_result(evaluate(spec, code_at(spec.kind, sizes, int(i)), alphas, bound, tol))
    return out


def _wz_batch_chunk(spec, enc_index, alphas, bound, tol, xcheck_stride) -> SweepSummary:
    """All decoders for one encoder, vectorized, with sampled reference cross-checks."""
    sizes = spec.size_map
    specs = table_specs("WZ", sizes)
    (_, eshape, er), (_, dshape, dr) = specs
    n_dec = dr ** math.prod(dshape)
    enc = _all_tables(eshape, er)[enc_index] if er ** math.prod(eshape) <= 1 << 20 else None
    if enc is None:
        raise CapExceededError("encoder family too large for batch evaluation")
    decs = _all_tables(dshape, dr)
    o = spec.option_map
    n, m = int(sizes["n"]), int(sizes["m"])
    problem = spec.target
    out = SweepSummary(spec.label, "WZ")
    ids = enc_index * n_dec + np.arange(n_dec)
    chunk = 8192
    for lo in range(0, n_dec, chunk):
        sl = slice(lo, min(n_dec, lo + chunk))
        v, ok = wz_batch_values(problem, n, m, enc, decs[sl], o["d_level"],
                                o.get("mu", 0.0), alphas)
        cks = _wz_checks(v, n, math.log2(m), o["d_level"], o.get("mu", 0.0), alphas,
                         bound, tol)
        cid = ids[sl]
        worst = np.full(cid.size, np.inf)
        allpass = np.ones(cid.size, dtype=bool)
        for c in cks:
            marg = margin_array(np.broadcast_to(c.lhs, cid.shape),
                                np.broadcast_to(c.rhs, cid.shape), c.direction)
            passed = marg >= -c.tol
            out._tally(c.name, c.diagnostic).add(marg[ok], passed[ok], cid[ok])
            if not c.diagnostic:
                worst = np.minimum(worst, np.where(ok, marg, np.inf))
                allpass &= passed | ~ok
                if len(out.failures) < 50:
                    for j in np.flatnonzero(~passed & ok)[:5]:
                        out.failures.append((int(cid[j]), c.name, float(marg[j])))
        rec = np.zeros(cid.size, dtype=RECORD_DTYPE)
        rec["code_id"] = cid
        rec["eps"] = np.round(np.clip(1 - v["p_good"], 0, 1), 12)
        rec["delta"] = math.nan
        rec["worst_margin"] = np.where(ok, np.round(worst, 12), math.nan)
        rec["passed"] = allpass | ~ok
        rec["skipped"] = ~ok
        out.add_records(rec)
        out.n_codes += cid.size
        out.n_skipped += int((~ok).sum())
        # reference cross-check on a deterministic sample of this chunk
        for j in range(0, cid.size, xcheck_stride):
            code = code_at("WZ", sizes, int(cid[j]))
            ref = eval_wz(problem, code, o["d_level"], o.get("mu", 0.0), alphas, bound, tol)
            agree = _batch_agrees(ref, cks, j, bool(ok[j]))
            out._tally("batch and reference agreement", False).add(
                np.array([0.0 if agree else -1.0]), np.array([agree]), np.array([cid[j]]))
            if not agree and len(out.failures) < 50:
                out.failures.append((int(cid[j]), "batch and reference agreement", -1.0))
    return out


def _pick(v, j: int) -> float:
    v = np.asarray(v, dtype=float)
    return float(v if v.ndim == 0 else v[j])


def _batch_agrees(ref: EvalResult, cks, j: int, ok: bool) -> bool:
    if ref.skipped or not ok:
        return ref.skipped and not ok
    ref_reps = {r.name: r for r in ref.chain + ref.diagnostics}
    for c in cks:
        r = ref_reps.get(c.name)
        if r is None:
            return False
        lhs, rhs = _pick(c.lhs, j), _pick(c.rhs, j)
        for a, b in ((lhs, r.lhs), (rhs, r.rhs)):
            if not (a == b or abs(a - b) <= 1e-9):
                return False
    return True


def run_sweep(spec: SweepSpec, alphas=ORACLE_ALPHAS, tol: float = CHAIN_TOL,
              workers: int | None = None, cap: int = ENUM_CAP,
              batch: bool = True, xcheck_stride: int = 4099) -> SweepSummary:
    """Evaluate every code of ``spec`` and merge the results in enumeration order.

    Wyner-Ziv families at n ≥ 2 go through the vectorized path (one encoder
    per task) with a reference cross-check every ``xcheck_stride`` codes.
    """
    from .optim import n_workers
    total = spec.count()
    if total > cap:
        raise CapExceededError(f"{total} codes exceed the enumeration cap {cap}")
    bound = spec_bound(spec)
    workers = n_workers() if workers is None else workers
    if spec.kind == "WZ" and batch and int(spec.size_map["n"]) >= 2:
        (_, eshape, er), _ = table_specs("WZ", spec.size_map)
        tasks = [("wz", e) for e in range(er ** math.prod(eshape))]
    else:
        step = 512
        tasks = [("ref", range(lo, min(total, lo + step))) for lo in range(0, total, step)]

    def run(task):
        what, arg = task
        if what == "wz":
            return _wz_batch_chunk(spec, arg, alphas, bound, tol, xcheck_stride)
        return _eval_chunk(spec, arg, alphas, bound, tol)

    if workers > 1 and len(tasks) > 1:
        from joblib import Parallel, delayed
        parts = Parallel(n_jobs=workers)(delayed(run)(t) for t in tasks)
    else:
        parts = [run(t) for t in tasks]
    out = SweepSummary(spec.label, spec.kind)
    for p in parts:
        out.merge(p)
    return out


def bernoulli(p1: float, name: str = "Z") -> JointPmf:
    return JointPmf.from_array([name], [1.0 - p1, p1])


def default_sweeps() -> list[SweepSpec]:
    """The binary exhaustive sweeps run by the acceptance suite."""
    from .prob_core import dsbs
    src = bernoulli(0.3)
    xy = dsbs(0.1)
    ham = np.array([[0.0, 1.0], [1.0, 0.0]])
    wz = Problem.wz(xy, ham)
    fc = Problem.fc(xy, np.array([[0, 0], [0, 1]]))
    cr, sk = Problem.cr(xy), Problem.sk(xy)
    wt = Problem.wt(np.array([[0.9, 0.1], [0.1, 0.9]]), np.array([[0.7, 0.3], [0.3, 0.7]]))
    out = []
    for n in (1, 2):
        for m in range(1, 2 ** n + 1):
            out.append(SweepSpec(f"lossless n={n} M={m}", "lossless",
                                 (("z", 2), ("n", n), ("m", m)), src))
    for n in (1, 2):
        for k in range(2, 2 ** n + 1):
            out.append(SweepSpec(f"IR n={n} K={k}", "IR", (("z", 2), ("n", n), ("k", k)), src))
    for n in (1, 2):
        levels = (0.0, 1.0) if n == 1 else (0.0, 0.5)
        for m in (1, 2):
            for d in levels:
                out.append(SweepSpec(f"WZ n={n} M={m} D={d:g}", "WZ",
                                     (("x", 2), ("y", 2), ("z", 2), ("n", n), ("m", m)),
                                     wz, (("d_level", d), ("mu", 2.0))))
    proto = (("x", 2), ("y", 2), ("n", 1), ("l1", 1), ("l2", 1), ("k", 2))
    out.append(SweepSpec("FC n=1 l1=l2=1", "FC", proto, fc))
    out.append(SweepSpec("CR n=1 l1=l2=1", "CR", proto, cr, (("mu", 1.0),)))
    out.append(SweepSpec("SK n=1 l1=l2=1", "SK", proto, sk, (("mu", 0.0),)))
    for n, ms in ((1, (2,)), (2, (2, 3, 4))):
        for m in ms:
            out.append(SweepSpec(f"WT n={n} N={m}", "WT",
                                 (("x", 2), ("y", 2), ("n", n), ("m", m)), wt))
    return out

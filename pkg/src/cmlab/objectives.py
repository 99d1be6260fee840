"""Penalized rate objectives for the five coding problems.

Each problem has a single-letter objective in which the Markov chains,
functional constraints and the source (or channel) law are relaxed into
penalties weighted by ``alpha``. Three independent routes evaluate it:

* the mutual-information form, from :func:`~cmlab.prob_core.mutual_info`;
* the divergence form, through the induced reference distribution Q;
* a compiled entropy expression (:class:`CompiledObjective`) with an
  analytic gradient, used by the optimizer.

Minimization problems are ``WZ`` (lossy coding with decoder side
information) and ``FC`` (interactive function computation). ``CR`` (common
randomness), ``SK`` (secret key) and ``WT`` (wiretap) are maximizations.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .prob_core import (
    INF,
    Alphabet,
    Channel,
    JointPmf,
    block_names,
    channel_divergence,
    conditional,
    entropy,
    kl_div,
    mutual_info,
    named_product,
    product_extend,
)
from .validation import AxisError, check_params, check_stochastic

KINDS = ("WZ", "FC", "CR", "SK", "WT")
MIN_KINDS = ("WZ", "FC")

FORM_TOL = 1e-9
FEASIBLE_TOL = 1e-10


class FormMismatchError(ArithmeticError):
    """Two evaluation routes of the same objective disagree."""


@dataclass(frozen=True)
class ObjectiveParams:
    mu: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        check_params(self.mu, self.alpha)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Problem:
    """A coding problem at blocklength ``n``.

    Parameters
    ----------
    kind : {'WZ', 'FC', 'CR', 'SK', 'WT'}
    source : JointPmf over axes ``X, Y``
        Source law, unused for ``WT``.
    distortion : ndarray, shape (|X|, |Z|)
        Per-letter distortion for ``WZ``; block distortion is additive.
    function : ndarray of int, shape (|X|, |Y|)
        Function table for ``FC``, values in ``range(n_values)``.
    w1, w2 : ndarray
        Legitimate and eavesdropper channel matrices for ``WT``.
    n : int
        Blocklength. Use :meth:`extend` rather than setting it directly.
    """

    kind: str
    source: JointPmf | None = None
    distortion: np.ndarray | None = None
    function: np.ndarray | None = None
    w1: np.ndarray | None = None
    w2: np.ndarray | None = None
    n: int = 1
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        kind = str(self.kind).upper()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("blocklength must be >= 1")
        if kind == "WT":
            if self.w1 is None or self.w2 is None:
                raise ValueError("WT needs channel matrices w1 and w2")
            w1 = check_stochastic(self.w1)
            w2 = check_stochastic(self.w2)
            if w1.ndim != 2 or w2.ndim != 2 or w1.shape[0] != w2.shape[0]:
                raise ValueError("w1 and w2 must be matrices with a shared input")
            object.__setattr__(self, "w1", _frozen(w1))
            object.__setattr__(self, "w2", _frozen(w2))
            return
        if self.source is None:
            raise ValueError(f"{kind} needs a source pmf")
        src = self.source
        if len(src.names) != 2:
            raise AxisError("source must have exactly two axes")
        if src.names != ("X", "Y"):
            src = src.rename(dict(zip(src.names, ("X", "Y"))))
            object.__setattr__(self, "source", src)
        if kind == "WZ":
            if self.distortion is None:
                raise ValueError("WZ needs a distortion matrix")
            d = np.asarray(self.distortion, dtype=float)
            if d.ndim != 2 or d.shape[0] != src.shape[0]:
                raise ValueError("distortion must have shape (|X|, |Z|)")
            if not np.all(np.isfinite(d)) or np.any(d < 0):
                raise ValueError("distortion entries must be finite and >= 0")
            object.__setattr__(self, "distortion", _frozen(d))
        if kind == "FC":
            if self.function is None:
                raise ValueError("FC needs a function table")
            f = np.asarray(self.function)
            if f.shape != src.shape or np.any(f != np.round(f)) or f.min() < 0:
                raise ValueError("function table must hold integers >= 0, "
                                 "shape (|X|, |Y|)")
            f = f.astype(int)
            f.flags.writeable = False
            object.__setattr__(self, "function", f)

    # constructors -------------------------------------------------------
    @classmethod
    def wz(cls, source, distortion):
        return cls("WZ", source=source, distortion=distortion)

    @classmethod
    def fc(cls, source, function):
        return cls("FC", source=source, function=function)

    @classmethod
    def cr(cls, source):
        return cls("CR", source=source)

    @classmethod
    def sk(cls, source):
        return cls("SK", source=source)

    @classmethod
    def wt(cls, w1, w2):
        return cls("WT", w1=w1, w2=w2)

    def extend(self, n: int) -> "Problem":
        """The same problem over blocks of length ``n`` (from a single-letter one)."""
        if self.n != 1:
            raise ValueError("extend() expects a single-letter problem")
        if n == 1:
            return self
        return Problem(self.kind, self.source, self.distortion, self.function,
                       self.w1, self.w2, n=n)

    @property
    def is_min(self) -> bool:
        return self.kind in MIN_KINDS

    @property
    def sense(self) -> str:
        return "min" if self.is_min else "max"

    @property
    def x_size(self) -> int:
        return self.w1.shape[0] if self.kind == "WT" else self.source.shape[0]

    @property
    def y_size(self) -> int:
        return self.w1.shape[1] if self.kind == "WT" else self.source.shape[1]

    @property
    def z_size(self) -> int | None:
        """Per-letter size of the ``Z`` coordinate, or None when absent."""
        if self.kind == "WZ":
            return self.distortion.shape[1]
        if self.kind == "WT":
            return self.w2.shape[1]
        return None

    @property
    def f_size(self) -> int:
        return int(self.function.max()) + 1

    @property
    def has_v(self) -> bool:
        return self.kind in ("FC", "CR", "SK")

    def roles(self) -> dict[str, list[str]]:
        """Axis names of each coordinate group at this blocklength."""
        r = {"U": ["U"], "X": block_names("X", self.n), "Y": block_names("Y", self.n)}
        if self.has_v:
            r["V"] = ["V"]
        if self.z_size is not None:
            r["Z"] = block_names("Z", self.n)
        return r

    def aux_names(self) -> list[str]:
        r = self.roles()
        order = ["U", "V", "X", "Y", "Z"]
        return [name for g in order if g in r for name in r[g]]

    def letter_sizes(self) -> dict[str, int]:
        s = {"X": self.x_size, "Y": self.y_size}
        if self.z_size is not None:
            s["Z"] = self.z_size
        return s

    def default_sizes(self) -> dict[str, int]:
        """Auxiliary cardinalities at the support-lemma caps."""
        x, y = self.x_size ** self.n, self.y_size ** self.n
        if self.kind in ("WZ", "WT"):
            return {"U": x * y * self.z_size ** self.n}
        return {"U": x * y, "V": (x * y) ** 2}

    def axes_for(self, sizes: dict[str, int]) -> list[Alphabet]:
        letters = self.letter_sizes()
        out = []
        for name in self.aux_names():
            base = name.split("_")[0]
            size = sizes[base] if base in ("U", "V") else letters[base]
            out.append(Alphabet(name, size))
        return out

    def source_n(self) -> JointPmf:
        if "source_n" not in self._cache:
            self._cache["source_n"] = product_extend(self.source, self.n)
        return self._cache["source_n"]

    def channel_n(self) -> Channel:
        """The block channel Wⁿ from X-block to (Y-block, Z-block)."""
        if "channel_n" not in self._cache:
            r = self.roles()
            x, y, z = r["X"], r["Y"], r["Z"]
            factors = []
            for j in range(self.n):
                factors.append(((x[j], y[j]), self.w1))
                factors.append(((x[j], z[j]), self.w2))
            mat = named_product(x + y + z, factors)
            sx, sy, sz = self.x_size, self.y_size, self.z_size
            self._cache["channel_n"] = Channel(
                [Alphabet(a, sx) for a in x],
                [Alphabet(a, sy) for a in y] + [Alphabet(a, sz) for a in z], mat)
        return self._cache["channel_n"]

    def function_indicator(self) -> np.ndarray:
        """Indicator over (X-block, Y-block, F) of the componentwise function."""
        if "f_ind" not in self._cache:
            n, r = self.n, self.f_size
            sx, sy = self.x_size, self.y_size
            shape = (sx,) * n + (sy,) * n
            fval = np.zeros(shape, dtype=int)
            for idx in np.ndindex(*shape):
                v = 0
                for j in range(n):
                    v += int(self.function[idx[j], idx[n + j]]) * r ** j
                fval[idx] = v
            ind = np.zeros(shape + (r ** n,))
            np.put_along_axis(ind, fval[..., None], 1.0, axis=-1)
            ind.flags.writeable = False
            self._cache["f_ind"] = ind
        return self._cache["f_ind"]

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.source is not None:
            out["source"] = self.source.to_json()
        if self.distortion is not None:
            out["distortion"] = self.distortion.tolist()
        if self.function is not None:
            out["function"] = self.function.tolist()
        if self.w1 is not None:
            out["w1"] = self.w1.tolist()
            out["w2"] = self.w2.tolist()
        return out

    @classmethod
    def from_json(cls, obj) -> "Problem":
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = str(obj["kind"]).upper()
        src = JointPmf.from_json(obj["source"]) if "source" in obj else None
        return cls(kind, source=src,
                   distortion=obj.get("distortion"),
                   function=obj.get("function"),
                   w1=obj.get("w1"), w2=obj.get("w2"))


def load_problem(path):
    """Read a problem file; returns ``(problem, params or None)``."""
    with open(path) as fh:
        obj = json.load(fh)
    params = None
    if "mu" in obj or "alpha" in obj:
        params = ObjectiveParams(float(obj.get("mu", 0.0)), float(obj.get("alpha", 1.0)))
    return Problem.from_json(obj), params


@dataclass(frozen=True, eq=False)
class AuxModel:
    """A joint pmf over a problem's auxiliary and observed coordinates."""

    problem: Problem
    joint: JointPmf

    def __post_init__(self):
        want = self.problem.aux_names()
        if sorted(self.joint.names) != sorted(want):
            raise AxisError(f"{self.problem.kind} aux needs axes {want}, "
                            f"got {list(self.joint.names)}")
        letters = self.problem.letter_sizes()
        for name in want:
            base = name.split("_")[0]
            if base in letters and self.joint.size_of(name) != letters[base]:
                raise AxisError(f"axis {name!r} must have size {letters[base]}")
        if list(self.joint.names) != want:
            object.__setattr__(self, "joint", self.joint.transpose(want))

    @classmethod
    def from_array(cls, problem: Problem, mass) -> "AuxModel":
        mass = np.asarray(mass, dtype=float)
        return cls(problem, JointPmf.from_array(problem.aux_names(), mass))

    @property
    def sizes(self) -> dict[str, int]:
        out = {"U": self.joint.size_of("U")}
        if self.problem.has_v:
            out["V"] = self.joint.size_of("V")
        return out


# ---------------------------------------------------------------------------
# mutual-information form

def _source_div(problem: Problem, p: JointPmf) -> float:
    r = problem.roles()
    return kl_div(p.marginalize(r["X"] + r["Y"]), problem.source_n())


def _expected_distortion(problem: Problem, p: JointPmf) -> float:
    r = problem.roles()
    return float(sum(np.sum(p.marginal([x, z]) * problem.distortion)
                     for x, z in zip(r["X"], r["Z"])))


def with_function_axis(problem: Problem, p: JointPmf) -> JointPmf:
    """Append the derived axis ``F`` = componentwise f(X, Y)."""
    r = problem.roles()
    xy = r["X"] + r["Y"]
    ind = problem.function_indicator()
    names = list(p.names) + ["F"]
    mass = named_product(names, [(p.names, p.mass), (xy + ["F"], ind)])
    return JointPmf(list(p.axes) + [Alphabet("F", ind.shape[-1])], mass,
                    validate=False)


def objective_terms(problem: Problem, aux: AuxModel) -> dict[str, float]:
    """Nonnegative building blocks of the penalized objective (bits)."""
    p, r = aux.joint, problem.roles()
    U, X, Y = r["U"], r["X"], r["Y"]
    kind = problem.kind
    if kind == "WZ":
        Z = r["Z"]
        return {
            "rate": mutual_info(p, U, X, Y),
            "distortion": _expected_distortion(problem, p),
            "source_div": _source_div(problem, p),
            "markov_u": mutual_info(p, U, Y, X),
            "markov_z": mutual_info(p, Z, X, U + Y),
        }
    if kind == "WT":
        Z = r["Z"]
        ch = problem.channel_n()
        return {
            "rate_y": mutual_info(p, U, Y),
            "rate_z": mutual_info(p, U, Z),
            "channel_div": channel_divergence(p, Y + Z, U + X, ch),
        }
    V = r["V"]
    UV = U + V
    terms = {
        "comm": mutual_info(p, UV, X, Y) + mutual_info(p, UV, Y, X),
        "source_div": _source_div(problem, p),
        "markov_u": mutual_info(p, U, Y, X),
        "markov_v": mutual_info(p, V, X, Y + U),
    }
    if kind == "FC":
        pf = with_function_axis(problem, p)
        terms["func_y"] = entropy(pf, "F", Y + U)
        terms["func_x"] = entropy(pf, "F", X + UV)
    else:
        terms["common"] = mutual_info(p, UV, X + Y)
    return terms


def combine_terms(kind: str, terms: dict[str, float], mu: float, alpha: float) -> float:
    """Weighted sum of :func:`objective_terms` output."""
    t = terms
    if kind == "WZ":
        return (t["rate"] + mu * t["distortion"] + (alpha + 1) * t["source_div"]
                + alpha * (t["markov_u"] + t["markov_z"]))
    if kind == "FC":
        return (t["comm"] + (2 * alpha + 2) * t["source_div"]
                + alpha * (2 * t["markov_u"] + t["markov_v"]
                           + t["func_y"] + t["func_x"]))
    if kind == "SK":
        mu = mu + 1
    if kind in ("CR", "SK"):
        return (t["common"] - mu * t["comm"] - (alpha + 2 * mu) * t["source_div"]
                - (alpha + 1) * (t["markov_u"] + t["markov_v"]))
    if kind == "WT":
        return t["rate_y"] - t["rate_z"] - alpha * t["channel_div"]
    raise ValueError(kind)


def penalty_terms(kind: str, terms: dict[str, float], mu: float,
                  alpha: float) -> dict[str, float]:
    """The penalty contributions (weighted, all >= 0 in magnitude)."""
    t = terms
    if kind == "WZ":
        return {"source": (alpha + 1) * t["source_div"],
                "markov_u": alpha * t["markov_u"],
                "markov_z": alpha * t["markov_z"]}
    if kind == "FC":
        return {"source": (2 * alpha + 2) * t["source_div"],
                "markov_u": 2 * alpha * t["markov_u"],
                "markov_v": alpha * t["markov_v"],
                "func_y": alpha * t["func_y"], "func_x": alpha * t["func_x"]}
    if kind in ("CR", "SK"):
        m = mu + 1 if kind == "SK" else mu
        return {"source": (alpha + 2 * m) * t["source_div"],
                "markov_u": (alpha + 1) * t["markov_u"],
                "markov_v": (alpha + 1) * t["markov_v"]}
    return {"channel": alpha * t["channel_div"]}


# ---------------------------------------------------------------------------
# divergence form

def induced_q(problem: Problem, aux: AuxModel) -> JointPmf:
    """Reference joint that keeps the aux conditionals but restores the source.

    ``WZ``: P(z|u,y) P(u|x) P_XY.  ``FC``/``CR``/``SK``: P(v|u,y) P(u|x) P_XY.
    ``WT``: P(u,x) W(y,z|x). Conditionals given zero-mass events are uniform.
    """
    if aux.problem is not problem and aux.problem.kind != problem.kind:
        raise ValueError("aux model belongs to a different problem kind")
    p, r = aux.joint, problem.roles()
    U, X, Y = r["U"], r["X"], r["Y"]
    names = list(p.names)
    if problem.kind == "WT":
        ch = problem.channel_n()
        mass = named_product(names, [(U + X, p.marginal(U + X)),
                                     (list(ch.input_names + ch.output_names),
                                      ch.matrix)])
        return JointPmf(p.axes, mass, validate=False)
    src = problem.source_n()
    u_x = conditional(p, U, X)
    factors = [(X + Y, src.marginal(X + Y)), (X + U, u_x)]
    if problem.kind == "WZ":
        factors.append((U + Y + r["Z"], conditional(p, r["Z"], U + Y)))
    else:
        factors.append((U + Y + r["V"], conditional(p, r["V"], U + Y)))
    return JointPmf(p.axes, named_product(names, factors), validate=False)


def _structure_q(problem: Problem, p: JointPmf) -> JointPmf:
    """P(u|x) P(v|u,y) P̃(x,y): aux conditionals on the aux's own source marginal."""
    r = problem.roles()
    U, V, X, Y = r["U"], r["V"], r["X"], r["Y"]
    names = list(p.names)
    mass = named_product(names, [(X + Y, p.marginal(X + Y)),
                                 (X + U, conditional(p, U, X)),
                                 (U + Y + V, conditional(p, V, U + Y))])
    return JointPmf(p.axes, mass, validate=False)


def divergence_form(problem: Problem, aux: AuxModel, params: ObjectiveParams) -> float:
    """The objective evaluated through D(P‖Q) with Q from :func:`induced_q`."""
    mu, alpha = params.mu, params.alpha
    p, r = aux.joint, problem.roles()
    U, X, Y = r["U"], r["X"], r["Y"]
    kind = problem.kind
    if kind == "WT":
        q = induced_q(problem, aux)
        Z = r["Z"]
        return (mutual_info(p, U, Y) - mutual_info(p, U, Z)
                - alpha * kl_div(p, q))
    d_pq = kl_div(p, induced_q(problem, aux))
    src = kl_div(p.marginalize(X + Y), problem.source_n())
    if kind == "WZ":
        return (mutual_info(p, U, X, Y) + mu * _expected_distortion(problem, p)
                + alpha * d_pq + src)
    V = r["V"]
    UV = U + V
    comm = mutual_info(p, UV, X, Y) + mutual_info(p, UV, Y, X)
    if kind == "FC":
        uxy = p.marginalize(U + X + Y)
        q_uxy = JointPmf(uxy.axes, named_product(
            list(uxy.names), [(X + Y, uxy.marginal(X + Y)),
                              (X + U, conditional(uxy, U, X))]), validate=False)
        pf = with_function_axis(problem, p)
        return (comm + alpha * d_pq + (alpha + 2) * src
                + alpha * (kl_div(uxy, q_uxy) + entropy(pf, "F", Y + U)
                           + entropy(pf, "F", X + UV)))
    if kind == "SK":
        mu = mu + 1
    structure = kl_div(p, _structure_q(problem, p))
    return (mutual_info(p, UV, X + Y) - mu * comm - alpha * d_pq
            - structure - (2 * mu * src if mu else 0.0))


def _agree(a: float, b: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= FORM_TOL


def objective(problem: Problem, aux: AuxModel, params: ObjectiveParams, *,
              cross_check: bool = True) -> float:
    """Penalized objective value (mutual-information form), in bits.

    With ``cross_check`` the divergence form is also evaluated and a
    :class:`FormMismatchError` is raised if the two differ by more than 1e-9.
    """
    terms = objective_terms(problem, aux)
    value = combine_terms(problem.kind, terms, params.mu, params.alpha)
    if cross_check:
        other = divergence_form(problem, aux, params)
        if not _agree(value, other):
            raise FormMismatchError(
                f"{problem.kind}: MI form {value!r} vs divergence form {other!r}")
    return value


def _checked(kind):
    def run(problem, aux, params, **kw):
        if problem.kind != kind:
            raise ValueError(f"expected a {kind} problem, got {problem.kind}")
        return objective(problem, aux, params, **kw)
    run.__name__ = f"{kind.lower()}_objective"
    run.__doc__ = f"Penalized {kind} objective; see :func:`objective`."
    return run


wz_objective = _checked("WZ")
fc_objective = _checked("FC")
cr_objective = _checked("CR")
wt_objective = _checked("WT")


def sk_objective(problem, aux, params, **kw):
    """Secret-key objective: the common-randomness objective at ``mu + 1``."""
    if problem.kind != "SK":
        raise ValueError(f"expected an SK problem, got {problem.kind}")
    cr = Problem("CR", source=problem.source, n=problem.n)
    shifted = ObjectiveParams(params.mu + 1, params.alpha)
    return objective(cr, AuxModel(cr, aux.joint), shifted, **kw)


# ---------------------------------------------------------------------------
# structured (Markov-feasible) points

@dataclass(frozen=True, eq=False)
class StructuredAux:
    """Factored auxiliary channels that satisfy the Markov chains by construction.

    ``WZ``: ``first`` = P(u|x), shape (|X|, |U|); ``second`` = P(z|u,y),
    shape (|U|, |Y|, |Z|).  ``FC``/``CR``/``SK``: ``first`` = P(u|x),
    ``second`` = P(v|u,y), shape (|U|, |Y|, |V|).  ``WT``: ``first`` = P(u),
    shape (|U|,); ``second`` = P(x|u), shape (|U|, |X|).
    """

    first: np.ndarray
    second: np.ndarray

    def __post_init__(self):
        first = np.asarray(self.first, dtype=float)
        second = np.asarray(self.second, dtype=float)
        check_stochastic(first, n_in_axes=first.ndim - 1)
        check_stochastic(second, n_in_axes=second.ndim - 1)
        object.__setattr__(self, "first", first)
        object.__setattr__(self, "second", second)


def assemble(problem: Problem, s: StructuredAux) -> AuxModel:
    """Joint pmf of a structured point (single-letter problems)."""
    if problem.n != 1:
        raise ValueError("structured points are single-letter")
    names = problem.aux_names()
    if problem.kind == "WT":
        if s.first.ndim != 1 or s.second.shape != (s.first.size, problem.x_size):
            raise ValueError("WT factors must be P(u) and P(x|u)")
        factors = [(["U"], s.first), (["U", "X"], s.second),
                   (["X", "Y"], problem.w1), (["X", "Z"], problem.w2)]
        return AuxModel.from_array(problem, named_product(names, factors))
    nx, ny = problem.x_size, problem.y_size
    if s.first.ndim != 2 or s.first.shape[0] != nx:
        raise ValueError("first factor must be P(u|x) with shape (|X|, |U|)")
    nu = s.first.shape[1]
    if s.second.ndim != 3 or s.second.shape[:2] != (nu, ny):
        raise ValueError("second factor must have shape (|U|, |Y|, k)")
    last = "Z" if problem.kind == "WZ" else "V"
    if problem.kind == "WZ" and s.second.shape[2] != problem.z_size:
        raise ValueError("P(z|u,y) has the wrong reproduction size")
    factors = [(["X", "Y"], problem.source.mass), (["X", "U"], s.first),
               (["U", "Y", last], s.second)]
    return AuxModel.from_array(problem, named_product(names, factors))


def constrained_terms_value(kind: str, terms: dict[str, float], mu: float) -> float:
    """Hard-constrained objective from penalty-free terms."""
    if kind == "WZ":
        return terms["rate"] + mu * terms["distortion"]
    if kind == "FC":
        if terms["func_y"] > FEASIBLE_TOL or terms["func_x"] > FEASIBLE_TOL:
            return INF
        return terms["comm"]
    if kind == "SK":
        mu = mu + 1
    if kind in ("CR", "SK"):
        return terms["common"] - mu * terms["comm"]
    return terms["rate_y"] - terms["rate_z"]


def constrained_value(problem: Problem, structured: StructuredAux, mu: float = 0.0) -> float:
    """Hard-constrained objective at a factored point.

    Markov penalties vanish by construction; for ``FC`` the functional
    constraints are checked and an infeasible point is worth :data:`INF`.
    """
    aux = assemble(problem, structured)
    terms = objective_terms(problem, aux)
    residual = [v for k, v in terms.items()
                if k in ("source_div", "markov_u", "markov_v", "markov_z",
                         "channel_div")]
    if any(abs(v) > FEASIBLE_TOL for v in residual):
        raise ArithmeticError(f"structured point has nonzero penalty: {terms}")
    return constrained_terms_value(problem.kind, terms, mu)


# ---------------------------------------------------------------------------
# compiled entropy expression

class _Expr:
    """Linear combination of joint entropies plus expectation terms."""

    def __init__(self):
        self.h = defaultdict(float)
        self.linear = []

    def H(self, a, given=(), c=1.0):
        a, given = list(a), list(given)
        self.h[frozenset(a + given)] += c
        if given:
            self.h[frozenset(given)] -= c

    def I(self, a, b, given=(), c=1.0):
        a, b, given = list(a), list(b), list(given)
        self.H(a, given, c)
        self.H(a, b + given, -c)

    def expect(self, names, table, c=1.0):
        self.linear.append((list(names), np.asarray(table, dtype=float), c))


def _neglog(t):
    with np.errstate(divide="ignore"):
        return -np.log2(t)


def _build_expr(problem: Problem, mu: float, alpha: float) -> _Expr:
    r = problem.roles()
    U, X, Y = r["U"], r["X"], r["Y"]
    e = _Expr()
    kind = problem.kind

    def source_div(c):
        e.H(X + Y, (), -c)
        for x, y in zip(X, Y):
            e.expect([x, y], _neglog(problem.source.mass), c)

    if kind == "WZ":
        Z = r["Z"]
        e.I(U, X, Y)
        for x, z in zip(X, Z):
            e.expect([x, z], problem.distortion, mu)
        source_div(alpha + 1)
        e.I(U, Y, X, alpha)
        e.I(Z, X, U + Y, alpha)
    elif kind == "FC":
        V = r["V"]
        e.I(U + V, X, Y)
        e.I(U + V, Y, X)
        source_div(2 * alpha + 2)
        e.I(U, Y, X, 2 * alpha)
        e.I(V, X, Y + U, alpha)
        e.H(["F"], Y + U, alpha)
        e.H(["F"], X + U + V, alpha)
    elif kind in ("CR", "SK"):
        m = mu + 1 if kind == "SK" else mu
        V = r["V"]
        e.I(U + V, X + Y)
        e.I(U + V, X, Y, -m)
        e.I(U + V, Y, X, -m)
        source_div(-(alpha + 2 * m))
        e.I(U, Y, X, -(alpha + 1))
        e.I(V, X, Y + U, -(alpha + 1))
    else:
        Z = r["Z"]
        e.I(U, Y)
        e.I(U, Z, (), -1.0)
        e.H(Y + Z, U + X, alpha)
        for x, y, z in zip(X, Y, Z):
            e.expect([x, y], _neglog(problem.w1), -alpha)
            e.expect([x, z], _neglog(problem.w2), -alpha)
    return e


_LN2 = math.log(2.0)


class CompiledObjective:
    """Fast value and gradient of a penalized objective on raw tensors.

    The aux joint is a plain array over ``problem.aux_names()``. Entries
    where the objective would be infinite (source or channel zeros) are
    reported by :attr:`forbidden` and must carry zero mass.
    """

    def __init__(self, problem: Problem, sizes: dict[str, int], params: ObjectiveParams,
                 floor: float = 1e-15):
        self.problem = problem
        self.params = params
        self.names = problem.aux_names()
        self.shape = tuple(a.size for a in problem.axes_for(sizes))
        self.floor = floor
        expr = _build_expr(problem, params.mu, params.alpha)
        pos = {n: i for i, n in enumerate(self.names)}
        nd = len(self.names)
        lin = np.zeros(self.shape)
        with np.errstate(invalid="ignore"):
            for names, table, c in expr.linear:
                order = sorted(names, key=pos.get)
                t = np.transpose(table, [names.index(n) for n in order])
                shape = [1] * nd
                for n, s in zip(order, t.shape):
                    shape[pos[n]] = s
                lin = lin + c * t.reshape(shape)
        self.forbidden = ~np.isfinite(lin)
        self.linear = np.where(self.forbidden, 0.0, lin)
        self.terms = []
        self.f_terms = []
        for subset, c in expr.h.items():
            if abs(c) < 1e-15:
                continue
            drop = tuple(i for i, n in enumerate(self.names) if n not in subset)
            (self.f_terms if "F" in subset else self.terms).append((drop, c))
        if self.f_terms:
            r = problem.roles()
            ind = problem.function_indicator()
            shape = [1] * nd + [ind.shape[-1]]
            for k, n in enumerate(r["X"] + r["Y"]):
                shape[pos[n]] = ind.shape[k]
            self.indicator = ind.reshape(shape)
        self.sign = 1.0 if problem.is_min else -1.0

    def value(self, p: np.ndarray) -> float:
        """Objective value in its natural sense (min or max form)."""
        total = float(np.sum(p * self.linear))
        for drop, c in self.terms:
            m = p.sum(axis=drop) if drop else p
            total -= c * _xlogx_arr(m)
        if self.f_terms:
            a = p[..., None] * self.indicator
            for drop, c in self.f_terms:
                m = a.sum(axis=drop) if drop else a
                total -= c * _xlogx_arr(m)
        if np.any(p[self.forbidden] > 0):
            return self.sign * INF
        return total

    def value_and_grad(self, p: np.ndarray) -> tuple[float, np.ndarray]:
        total = float(np.sum(p * self.linear))
        grad = self.linear.copy()
        for drop, c in self.terms:
            m = p.sum(axis=drop, keepdims=True) if drop else p
            total -= c * _xlogx_arr(m)
            grad += c * (-np.log2(np.maximum(m, self.floor)) - 1.0 / _LN2)
        if self.f_terms:
            a = p[..., None] * self.indicator
            ga = np.zeros(a.shape)
            for drop, c in self.f_terms:
                m = a.sum(axis=drop, keepdims=True) if drop else a
                total -= c * _xlogx_arr(m)
                ga = ga + c * (-np.log2(np.maximum(m, self.floor)) - 1.0 / _LN2)
            grad += np.sum(ga * self.indicator, axis=-1)
        return total, grad


def _xlogx_arr(m: np.ndarray) -> float:
    nz = m[m > 0]
    return float(np.dot(nz, np.log2(nz)))


# ---------------------------------------------------------------------------
# random points

def _random_rows(rng, n_rows, k, concentration=1.0):
    return rng.dirichlet(np.full(k, concentration), size=n_rows)


def structured_joint(problem: Problem, sizes: dict[str, int],
                     rng: np.random.Generator, concentration: float = 1.0) -> np.ndarray:
    """Random Markov-feasible joint (any blocklength) with the true source law."""
    r = problem.roles()
    names = problem.aux_names()
    shape = {a.name: a.size for a in problem.axes_for(sizes)}
    X, Y = r["X"], r["Y"]
    nx = math.prod(shape[x] for x in X)
    ny = math.prod(shape[y] for y in Y)
    nu = sizes["U"]
    if problem.kind == "WT":
        pu = rng.dirichlet(np.full(nu, concentration))
        px_u = _random_rows(rng, nu, nx, concentration)
        ch = problem.channel_n()
        factors = [(["U"], pu),
                   (["U"] + X, px_u.reshape([nu] + [shape[x] for x in X])),
                   (list(ch.input_names + ch.output_names), ch.matrix)]
        return named_product(names, factors)
    pu_x = _random_rows(rng, nx, nu, concentration)
    last = r["Z"] if problem.kind == "WZ" else r["V"]
    nl = math.prod(shape[z] for z in last)
    pl_uy = _random_rows(rng, nu * ny, nl, concentration)
    factors = [(X + Y, problem.source_n().marginal(X + Y)),
               (X + ["U"], pu_x.reshape([shape[x] for x in X] + [nu])),
               (["U"] + Y + last,
                pl_uy.reshape([nu] + [shape[y] for y in Y] + [shape[z] for z in last]))]
    return named_product(names, factors)


def random_aux(problem: Problem, sizes: dict[str, int], rng: np.random.Generator,
               style: str = "dirichlet") -> AuxModel:
    """Random auxiliary joint.

    ``style`` is ``'dirichlet'`` (flat), ``'sparse'`` (concentration 0.1,
    many near-zero entries), ``'structured'`` (Markov-feasible) or
    ``'near'`` (a structured point mixed with 5% flat noise).
    """
    shape = tuple(a.size for a in problem.axes_for(sizes))
    k = math.prod(shape)
    if style == "dirichlet":
        mass = rng.dirichlet(np.ones(k))
    elif style == "sparse":
        mass = rng.dirichlet(np.full(k, 0.1))
    elif style == "structured":
        mass = structured_joint(problem, sizes, rng)
    elif style == "near":
        mass = (0.95 * structured_joint(problem, sizes, rng).ravel()
                + 0.05 * rng.dirichlet(np.ones(k)))
    else:
        raise ValueError(f"unknown style {style!r}")
    mass = np.asarray(mass).reshape(shape)
    return AuxModel.from_array(problem, mass / mass.sum())

"""Finite-alphabet probability kernel.

Every distribution is a dense tensor whose axes carry names. Marginals,
conditionals and information measures are taken by axis *name*, never by
position, so a reordered tensor means the same thing.

All information quantities are in bits. ``0 log 0`` is 0, and a divergence
with ``p > 0`` where ``q == 0`` is :data:`INF`.
"""

from __future__ import annotations

import json
import math
import string
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .validation import (
    AxisError,
    CapExceededError,
    ZeroProbabilityError,
    check_mass,
    check_names,
)

INF = math.inf
"""Sentinel for infinite divergence. Propagates through sums and comparisons."""

NORMALIZATION_TOL = 1e-12

_max_entries = 10**6


def set_max_entries(cap: int) -> int:
    """Set the dense-tensor size cap; returns the previous value."""
    global _max_entries
    previous, _max_entries = _max_entries, int(cap)
    return previous


def max_entries() -> int:
    return _max_entries


def _check_cap(size: int) -> None:
    if size > _max_entries:
        raise CapExceededError(
            f"dense tensor with {size} entries exceeds cap {_max_entries}")


@dataclass(frozen=True)
class Alphabet:
    name: str
    size: int

    def __post_init__(self):
        if int(self.size) < 1:
            raise ValueError(f"alphabet {self.name!r} must have size >= 1")


def block_name(base: str, j: int, n: int) -> str:
    """Name of coordinate ``base`` at position ``j`` (1-based) of an n-block."""
    return base if n == 1 else f"{base}_{j}"


def block_names(base: str, n: int) -> list[str]:
    return [block_name(base, j, n) for j in range(1, n + 1)]


def _xlogx(m: np.ndarray) -> float:
    nz = m[m > 0]
    return float(np.dot(nz, np.log2(nz)))


class JointPmf:
    """Probability tensor over an ordered list of named finite alphabets."""

    __slots__ = ("axes", "mass", "_index")

    def __init__(self, axes: Sequence[Alphabet], mass, *, validate: bool = True):
        axes = tuple(axes)
        names = check_names([a.name for a in axes])
        mass = np.asarray(mass, dtype=float)
        shape = tuple(a.size for a in axes)
        if mass.size != math.prod(shape):
            raise ValueError(
                f"mass has {mass.size} entries, axes need {math.prod(shape)}")
        _check_cap(mass.size)
        mass = mass.reshape(shape)
        if validate:
            check_mass(mass, NORMALIZATION_TOL)
        mass = mass.copy() if mass.flags.writeable else mass
        mass.flags.writeable = False
        self.axes = axes
        self.mass = mass
        self._index = {n: i for i, n in enumerate(names)}

    @classmethod
    def from_array(cls, names: Sequence[str], mass, *, validate: bool = True):
        mass = np.asarray(mass, dtype=float)
        if mass.ndim != len(names):
            raise AxisError(f"{len(names)} names for a {mass.ndim}-d tensor")
        axes = [Alphabet(n, s) for n, s in zip(names, mass.shape)]
        return cls(axes, mass, validate=validate)

    @classmethod
    def uniform(cls, axes: Sequence[Alphabet]):
        shape = tuple(a.size for a in axes)
        return cls(axes, np.full(shape, 1.0 / math.prod(shape)))

    @classmethod
    def point(cls, axes: Sequence[Alphabet], index: Sequence[int]):
        mass = np.zeros(tuple(a.size for a in axes))
        mass[tuple(index)] = 1.0
        return cls(axes, mass)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mass.shape

    def size_of(self, name: str) -> int:
        return self.mass.shape[self.axis(name)]

    def alphabet(self, name: str) -> Alphabet:
        return self.axes[self.axis(name)]

    def axis(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise AxisError(f"unknown axis {name!r}; have {self.names}") from None

    def __repr__(self):
        body = ", ".join(f"{a.name}:{a.size}" for a in self.axes)
        return f"JointPmf({body})"

    def marginal(self, names: Sequence[str]) -> np.ndarray:
        """Marginal tensor on ``names``, axes in the order given."""
        names = list(names)
        idx = [self.axis(n) for n in names]
        if len(set(idx)) != len(idx):
            raise AxisError(f"repeated axis in {names}")
        drop = tuple(i for i in range(self.mass.ndim) if i not in idx)
        m = self.mass.sum(axis=drop) if drop else self.mass
        kept = [i for i in range(self.mass.ndim) if i in idx]
        return np.transpose(m, [kept.index(i) for i in idx])

    def marginalize(self, names: Sequence[str]) -> "JointPmf":
        axes = [self.alphabet(n) for n in names]
        return JointPmf(axes, self.marginal(names), validate=False)

    def transpose(self, names: Sequence[str]) -> "JointPmf":
        if sorted(names) != sorted(self.names):
            raise AxisError(f"{names} is not a permutation of {self.names}")
        return self.marginalize(names)

    def rename(self, mapping: Mapping[str, str]) -> "JointPmf":
        axes = [Alphabet(mapping.get(a.name, a.name), a.size) for a in self.axes]
        return JointPmf(axes, self.mass, validate=False)

    def prob(self, event: "EventSet") -> float:
        m = self.marginal(event.names)
        return float(m[event.membership].sum())

    def aligned(self, other: "JointPmf") -> np.ndarray:
        """``other.mass`` permuted into this pmf's axis order."""
        if set(other.names) != set(self.names):
            raise AxisError(f"axis mismatch: {self.names} vs {other.names}")
        for name in self.names:
            if self.size_of(name) != other.size_of(name):
                raise AxisError(f"size mismatch on axis {name!r}")
        return other.marginal(self.names)

    def to_json(self) -> dict:
        return {"axes": [{"name": a.name, "size": a.size} for a in self.axes],
                "mass": [float(v) for v in self.mass.ravel()]}

    @classmethod
    def from_json(cls, obj) -> "JointPmf":
        if isinstance(obj, str):
            obj = json.loads(obj)
        axes = [Alphabet(a["name"], int(a["size"])) for a in obj["axes"]]
        return cls(axes, np.asarray(obj["mass"], dtype=float))


class Channel:
    """Stochastic map from input alphabets to output alphabets.

    ``matrix`` has shape ``input sizes + output sizes``; every slice over the
    output axes is a pmf.
    """

    def __init__(self, inputs: Sequence[Alphabet], outputs: Sequence[Alphabet],
                 matrix):
        self.inputs = tuple(inputs)
        self.outputs = tuple(outputs)
        check_names([a.name for a in self.inputs + self.outputs])
        shape = tuple(a.size for a in self.inputs + self.outputs)
        matrix = np.asarray(matrix, dtype=float).reshape(shape)
        if np.any(matrix < 0) or not np.all(np.isfinite(matrix)):
            raise ValueError("channel entries must be finite and nonnegative")
        out_axes = tuple(range(len(self.inputs), len(shape)))
        rows = matrix.sum(axis=out_axes)
        if np.any(np.abs(rows - 1.0) > NORMALIZATION_TOL):
            raise ValueError("channel rows must sum to 1")
        matrix = matrix.copy()
        matrix.flags.writeable = False
        self.matrix = matrix

    @classmethod
    def from_matrix(cls, input_name: str, output_name: str, matrix) -> "Channel":
        matrix = np.asarray(matrix, dtype=float)
        return cls([Alphabet(input_name, matrix.shape[0])],
                   [Alphabet(output_name, matrix.shape[1])], matrix)

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.inputs)

    @property
    def output_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.outputs)

    def joint(self, p_in: JointPmf) -> JointPmf:
        """Joint pmf of (inputs of ``p_in``, outputs) when ``p_in`` feeds the channel."""
        for a in self.inputs:
            if p_in.size_of(a.name) != a.size:
                raise AxisError(f"input size mismatch on {a.name!r}")
        names = list(p_in.names) + list(self.output_names)
        mass = named_product(names, [(p_in.names, p_in.mass),
                                     (self.input_names + self.output_names,
                                      self.matrix)])
        return JointPmf(list(p_in.axes) + list(self.outputs), mass, validate=False)

    @staticmethod
    def parallel(first: "Channel", second: "Channel") -> "Channel":
        """Channel with shared inputs whose outputs are conditionally independent."""
        if first.inputs != second.inputs:
            raise AxisError("parallel channels need identical inputs")
        names = first.input_names + first.output_names + second.output_names
        mass = named_product(names, [
            (first.input_names + first.output_names, first.matrix),
            (second.input_names + second.output_names, second.matrix)])
        return Channel(first.inputs, first.outputs + second.outputs, mass)


class EventSet:
    """Boolean membership tensor over a subset of named axes."""

    def __init__(self, axes: Sequence[Alphabet], membership, *,
                 allow_empty: bool = False):
        self.axes = tuple(axes)
        check_names(self.names)
        membership = np.asarray(membership, dtype=bool).reshape(
            tuple(a.size for a in self.axes))
        if not allow_empty and not membership.any():
            raise ValueError("event is empty (pass allow_empty=True to permit)")
        membership = membership.copy()
        membership.flags.writeable = False
        self.membership = membership

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    @classmethod
    def from_members(cls, axes: Sequence[Alphabet], members: Iterable[Sequence[int]],
                     **kw) -> "EventSet":
        membership = np.zeros(tuple(a.size for a in axes), dtype=bool)
        for idx in members:
            membership[tuple(idx)] = True
        return cls(axes, membership, **kw)

    @classmethod
    def full(cls, axes: Sequence[Alphabet]) -> "EventSet":
        return cls(axes, np.ones(tuple(a.size for a in axes), dtype=bool))

    def members(self) -> list[tuple[int, ...]]:
        return [tuple(int(i) for i in idx) for idx in np.argwhere(self.membership)]

    def complement(self) -> "EventSet":
        return EventSet(self.axes, ~self.membership, allow_empty=True)

    def to_json(self) -> dict:
        return {"axes": [{"name": a.name, "size": a.size} for a in self.axes],
                "members": [list(m) for m in self.members()]}

    @classmethod
    def from_json(cls, obj, pmf: JointPmf | None = None) -> "EventSet":
        if isinstance(obj, str):
            obj = json.loads(obj)
        axes = []
        for a in obj["axes"]:
            if isinstance(a, str):
                if pmf is None:
                    raise AxisError("bare axis names need a reference pmf")
                axes.append(pmf.alphabet(a))
            else:
                axes.append(Alphabet(a["name"], int(a["size"])))
        return cls.from_members(axes, obj["members"], allow_empty=True)


def named_product(names: Sequence[str],
                  factors: Sequence[tuple[Sequence[str], np.ndarray]]) -> np.ndarray:
    """Pointwise product of named tensors, laid out over ``names``."""
    letters = {n: string.ascii_letters[i] for i, n in enumerate(names)}
    spec = ",".join("".join(letters[n] for n in fn) for fn, _ in factors)
    spec += "->" + "".join(letters[n] for n in names)
    return np.einsum(spec, *[np.asarray(t, dtype=float) for _, t in factors])


def conditional(p: JointPmf, target: Sequence[str], given: Sequence[str]) -> np.ndarray:
    """Tensor of P(target | given) over ``given + target``.

    Rows whose conditioning event has zero mass are set to uniform.
    """
    target, given = list(target), list(given)
    joint = p.marginal(given + target)
    if not given:
        return joint
    g = joint.sum(axis=tuple(range(len(given), joint.ndim)), keepdims=True)
    k = math.prod(joint.shape[len(given):])
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(g > 0, joint / np.where(g > 0, g, 1.0), 1.0 / k)
    return out


def _names(axes) -> list[str]:
    if isinstance(axes, str):
        return [axes]
    return list(axes)


def entropy(p: JointPmf, axes, given=()) -> float:
    """H(axes | given) in bits."""
    axes, given = _names(axes), _names(given)
    if not axes:
        raise AxisError("entropy needs at least one axis")
    if set(axes) & set(given):
        raise AxisError("target and conditioning axes overlap")
    h = -_xlogx(p.marginal(axes + given))
    if given:
        h += _xlogx(p.marginal(given))
    return h


def mutual_info(p: JointPmf, group_a, group_b, conditioning=()) -> float:
    """I(A ∧ B | C) in bits."""
    a, b, c = _names(group_a), _names(group_b), _names(conditioning)
    if not a or not b:
        raise AxisError("mutual information needs nonempty groups")
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise AxisError("groups must be disjoint")
    h = lambda names: -_xlogx(p.marginal(names)) if names else 0.0
    return h(a + c) + h(b + c) - h(a + b + c) - h(c)


def _kl_arrays(pm: np.ndarray, qm: np.ndarray) -> float:
    support = pm > 0
    if np.any(qm[support] <= 0):
        return INF
    ps, qs = pm[support], qm[support]
    return float(np.dot(ps, np.log2(ps / qs)))


def kl_div(p: JointPmf, q: JointPmf, given=()) -> float:
    """D(P‖Q), or D(P_{A|B}‖Q_{A|B}|P_B) when ``given`` names B."""
    qm = p.aligned(q)
    given = _names(given)
    if not given:
        return _kl_arrays(p.mass, qm)
    rest = [n for n in p.names if n not in given]
    pc = conditional(p, rest, given)
    qq = JointPmf(q.axes, q.mass, validate=False)
    qc = conditional(qq, rest, given)
    weight = p.marginal(given + rest)
    support = weight > 0
    if np.any(qc[support] <= 0):
        return INF
    return float(np.dot(weight[support], np.log2(pc[support] / qc[support])))


def channel_divergence(p: JointPmf, outputs, given, channel: Channel) -> float:
    """D(P_{outputs|given} ‖ W | P_given) for a channel W from a subset of ``given``."""
    outputs, given = _names(outputs), _names(given)
    if list(channel.output_names) != outputs:
        raise AxisError(f"channel outputs {channel.output_names} != {outputs}")
    if not set(channel.input_names) <= set(given):
        raise AxisError("channel inputs must be among the conditioning axes")
    pc = conditional(p, outputs, given)
    weight = p.marginal(given + outputs)
    w = np.broadcast_to(
        _expand(channel.matrix, list(channel.input_names + channel.output_names),
                given + outputs), weight.shape)
    support = weight > 0
    if np.any(w[support] <= 0):
        return INF
    return float(np.dot(weight[support], np.log2(pc[support] / w[support])))


def _expand(tensor: np.ndarray, tensor_names: list[str], names: list[str],
            p: JointPmf | None = None) -> np.ndarray:
    """Reshape a tensor over ``tensor_names`` so it broadcasts over ``names``."""
    order = [tensor_names.index(n) for n in names if n in tensor_names]
    t = np.transpose(tensor, order)
    shape = [t.shape[order.index(tensor_names.index(n))] if n in tensor_names else 1
             for n in names]
    return t.reshape(shape)


def tv_distance(p: JointPmf, q: JointPmf) -> float:
    """Total variation distance ½ Σ |P − Q|."""
    return 0.5 * float(np.abs(p.mass - p.aligned(q)).sum())


def min_entropy(p: JointPmf, axes, conditioning=()) -> float:
    """Min-entropy; with ``conditioning`` the worst case over the support."""
    axes, cond = _names(axes), _names(conditioning)
    m = p.marginal(axes + cond)
    support = m > 0
    if not support.any():
        raise ZeroProbabilityError("empty support")
    if not cond:
        return float(-np.log2(m.max()))
    c = conditional(p, axes, cond)
    # conditional() returns given-first layout; align with m (axes + cond)
    c = np.moveaxis(c, list(range(len(cond))),
                    list(range(len(axes), len(axes) + len(cond))))
    return float(-np.log2(c[support].max()))


def product_extend(p: JointPmf, n: int) -> JointPmf:
    """n-fold i.i.d. extension; block j renames ``A`` to ``A_j``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return p
    _check_cap(p.mass.size ** n)
    mass = p.mass
    for _ in range(n - 1):
        mass = np.multiply.outer(mass, p.mass)
    axes = [Alphabet(block_name(a.name, j, n), a.size)
            for j in range(1, n + 1) for a in p.axes]
    return JointPmf(axes, mass, validate=False)


def tilt_on_event(p: JointPmf, event: EventSet) -> tuple[JointPmf, float]:
    """Condition ``p`` on ``event``; returns the new pmf and D(P̃‖P) = −log P(event)."""
    for a in event.axes:
        if p.size_of(a.name) != a.size:
            raise AxisError(f"event axis {a.name!r} size mismatch")
    mask = _expand(event.membership, list(event.names), list(p.names))
    kept = np.where(mask, p.mass, 0.0)
    prob = float(kept.sum())
    if prob <= 0:
        raise ZeroProbabilityError("cannot condition on a zero-probability event")
    return JointPmf(p.axes, kept / prob, validate=False), float(-np.log2(prob))


def time_shared_marginal(p: JointPmf, base: Sequence[str], n: int, *,
                         with_index: bool = False) -> JointPmf:
    """(1/n) Σ_j of the block-j marginal, relabelled to the base names.

    With ``with_index`` the result is the joint of (J, block-J coordinates)
    with J uniform on {0, …, n−1} under the axis name ``"J"``.
    """
    base = list(base)
    blocks = []
    for j in range(1, n + 1):
        names = [block_name(b, j, n) for b in base]
        try:
            blocks.append(p.marginal(names))
        except AxisError as exc:
            raise AxisError(f"inconsistent block structure: {exc}") from None
    if any(b.shape != blocks[0].shape for b in blocks):
        raise AxisError("blocks have different alphabet sizes")
    axes = [Alphabet(b, s) for b, s in zip(base, blocks[0].shape)]
    if with_index:
        return JointPmf([Alphabet("J", n)] + axes, np.stack(blocks) / n,
                        validate=False)
    return JointPmf(axes, sum(blocks) / n, validate=False)


def ckm_difference(p: JointPmf, x_names: Sequence[str], y_names: Sequence[str],
                   u_names: Sequence[str] = ()) -> tuple[float, float]:
    """Both sides of the telescoping identity for H(Xⁿ|U) − H(Yⁿ|U).

    Returns ``(H(Xⁿ|U) − H(Yⁿ|U), Σ_i H(X_i|X^{i−1}, Y_{i+1}^n, U) − H(Y_i|same))``.
    """
    x_names, y_names, u_names = list(x_names), list(y_names), list(u_names)
    if len(x_names) != len(y_names) or not x_names:
        raise AxisError("x and y blocks must have equal nonzero length")
    lhs = entropy(p, x_names, u_names) - entropy(p, y_names, u_names)
    rhs = 0.0
    n = len(x_names)
    for i in range(n):
        cond = x_names[:i] + y_names[i + 1:] + u_names
        rhs += entropy(p, x_names[i], cond) - entropy(p, y_names[i], cond)
    return lhs, rhs


def load_pmf(path) -> JointPmf:
    with open(path) as fh:
        return JointPmf.from_json(json.load(fh))


def dsbs(crossover: float, x: str = "X", y: str = "Y") -> JointPmf:
    """Doubly symmetric binary source with the given crossover probability."""
    c = float(crossover)
    return JointPmf.from_array([x, y], [[(1 - c) / 2, c / 2], [c / 2, (1 - c) / 2]])

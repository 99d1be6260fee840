"""Hypothesis strategies for probability tensors."""

import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cmlab.prob_core import JointPmf


@st.composite
def pmf_arrays(draw, shape=None, max_axes=3, max_size=3, allow_zeros=True):
    """Normalized nonnegative arrays; exact zeros appear with some probability.

    Nonzero entries are at least 1e-6 before normalization (subnormal masses
    say nothing about the measures and only probe float overflow).
    """
    if shape is None:
        k = draw(st.integers(1, max_axes))
        shape = tuple(draw(st.lists(st.integers(2, max_size), min_size=k, max_size=k)))
    raw = draw(arrays(np.float64, shape, elements=st.floats(1e-6, 1.0)))
    if allow_zeros:
        mask = draw(arrays(np.bool_, shape))
        raw = np.where(mask, raw, 0.0)
    if raw.sum() <= 1e-9:
        raw = raw.copy()
        raw.flat[0] = 1.0
    return raw / raw.sum()


@st.composite
def joint_pmfs(draw, names=("A", "B", "C"), max_size=3, allow_zeros=True):
    k = draw(st.integers(1, len(names)))
    shape = tuple(draw(st.lists(st.integers(2, max_size), min_size=k, max_size=k)))
    mass = draw(pmf_arrays(shape=shape, allow_zeros=allow_zeros))
    return JointPmf.from_array(list(names[:k]), mass, validate=False)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pyXvaEngine.utils import (TimeOrderError, as_float_array, canonical_json, config_hash, negative_part,
                               positive_part, time_check)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@given(finite)
def test_parts_split_the_value(x):
    assert positive_part(x) >= 0.0
    assert negative_part(x) <= 0.0
    assert positive_part(x) + negative_part(x) == x


def test_parts_are_elementwise():
    x = np.array([-2.0, 0.0, 3.0])
    assert positive_part(x).tolist() == [0.0, 0.0, 3.0]
    assert negative_part(x).tolist() == [-2.0, 0.0, 0.0]


@time_check()
def _span(label, t, T):
    return T - t


@time_check(strict=True)
def _strict_span(label, t, T):
    return T - t


def test_time_check_allows_ordered_times():
    assert _span("x", 0.5, 1.0) == 0.5
    assert _span("x", 1.0, 1.0) == 0.0
    assert _span("x", t=0.0, T=2.0) == 2.0


def test_time_check_rejects_reversed_times():
    with pytest.raises(TimeOrderError):
        _span("x", 1.0, 0.5)
    with pytest.raises(TimeOrderError):
        _strict_span("x", 1.0, 1.0)


def test_time_check_reads_arrays():
    with pytest.raises(TimeOrderError):
        _span("x", np.array([0.0, 2.0]), np.array([1.0, 1.0]))


def test_config_hash_ignores_key_order():
    a = {"mc": {"seed": 1, "paths": 10}, "mode": "bccva"}
    b = {"mode": "bccva", "mc": {"paths": 10, "seed": 1}}
    assert canonical_json(a) == canonical_json(b)
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 64
    assert config_hash(a) != config_hash(dict(a, mode="bccfva"))


def test_as_float_array():
    assert as_float_array(1).shape == (1,)
    assert as_float_array([1, 2]).dtype == float

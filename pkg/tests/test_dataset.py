import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mstree.dataset import Dataset, DatasetError, load_table, standardize
from mstree.synthetic import combustion_analog, dataset_to_csv

CSV_3ROW = "a,b,|,y\n0,1,,2\n1,0,,3\n2,2,,4\n"


def test_load_basic_csv():
    ds = load_table(CSV_3ROW, active_output="y")
    assert ds.n == 3 and ds.d == 2
    assert ds.dim_names == ("a", "b")
    assert ds.output_names == ("y",)
    assert np.array_equal(ds.outputs[:, 0], [2, 3, 4])


def test_load_rejects_nan_cell():
    text = "a,|,y\n0,,1\nnan,,2\n1,,0\n"
    with pytest.raises(DatasetError, match=r"non-finite value at \(row 2, col 'a'\)"):
        load_table(text, active_output="y")


def test_load_rejects_non_numeric():
    text = "a,|,y\n0,,1\nfoo,,2\n"
    with pytest.raises(DatasetError, match="non-numeric"):
        load_table(text, active_output="y")


def test_load_missing_header():
    with pytest.raises(DatasetError):
        load_table("", active_output="y")


def test_load_unknown_output_name():
    with pytest.raises(DatasetError, match="unknown output name"):
        load_table(CSV_3ROW, active_output="z")


def test_load_duplicate_columns():
    with pytest.raises(DatasetError, match="duplicate column"):
        load_table("a,a,|,y\n0,1,,2\n1,2,,3\n", active_output="y")


def test_output_columns_flag_wins_over_marker():
    text = "a,b,|,y\n0,1,,2\n1,0,,3\n2,2,,4\n"
    ds = load_table(text, active_output="b", output_columns=["b", "y"])
    assert ds.dim_names == ("a",)
    assert ds.output_names == ("b", "y")
    assert ds.active_output == 0


def test_load_at_reference_scale():
    ds = combustion_analog()
    text = dataset_to_csv(ds)
    loaded = load_table(text, active_output="temp")
    assert loaded.n == 5172 and loaded.d == 10


def test_standardize_two_point_column():
    # (x - mean) / population sd: [0, 2] has mean 1, sd 1
    ds = load_table("a,|,y\n0,,0\n2,,1\n", active_output="y")
    std = standardize(ds)
    assert np.allclose(std.inputs[:, 0], [-1.0, 1.0])


def test_standardize_idempotent():
    ds = standardize(combustion_analog(n=100, d=3))
    again = standardize(ds)
    assert np.allclose(ds.inputs, again.inputs, atol=1e-9)
    assert np.allclose(ds.outputs, again.outputs, atol=1e-9)


def test_standardize_already_normal_unchanged():
    rng = np.random.default_rng(3)
    x = rng.normal(size=200)
    x = (x - x.mean()) / x.std()
    y = rng.normal(size=200)
    y = (y - y.mean()) / y.std()
    ds = standardize(make(x, y))
    assert np.allclose(ds.inputs[:, 0], x, atol=1e-12)
    assert np.allclose(ds.outputs[:, 0], y, atol=1e-12)


def test_standardize_constant_column():
    ds = make([5.0, 5.0, 5.0], [1.0, 2.0, 3.0])
    std = standardize(ds)
    assert np.array_equal(std.inputs[:, 0], [0, 0, 0])
    assert std.raw_scales[0] == 1.0
    assert std.raw_means[0] == 5.0


def test_round_trip_recovers_raw():
    raw = combustion_analog(n=300, d=4)
    std = standardize(raw)
    inp, out = std.restore_raw()
    assert np.allclose(inp, raw.inputs, rtol=1e-9)
    assert np.allclose(out, raw.outputs, rtol=1e-9)


def test_double_standardize_still_round_trips():
    raw = combustion_analog(n=120, d=3)
    twice = standardize(standardize(raw))
    inp, out = twice.restore_raw()
    assert np.allclose(inp, raw.inputs, rtol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_standardize_commutes_with_row_permutation(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 40))
    ds = make(rng.normal(size=n), rng.normal(size=n))
    order = rng.permutation(n)
    a = standardize(ds.take_rows(order))
    b = standardize(ds).take_rows(order)
    assert np.array_equal(a.inputs, b.inputs)
    assert np.array_equal(a.outputs, b.outputs)


def test_standardized_columns_have_unit_moments():
    std = standardize(combustion_analog(n=500, d=5))
    cols = np.hstack([std.inputs, std.outputs])
    assert np.abs(cols.mean(axis=0)).max() < 1e-9
    assert np.abs(cols.std(axis=0) - 1.0).max() < 1e-9


def test_rejects_single_row():
    with pytest.raises(DatasetError):
        load_table("a,|,y\n0,,1\n", active_output="y")


def make(x, y):
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    y = np.asarray(y, dtype=float).reshape(-1, 1)
    return Dataset(inputs=x, outputs=y, active_output=0,
                   dim_names=("x1",), output_names=("y",),
                   raw_means=np.zeros(2), raw_scales=np.ones(2))

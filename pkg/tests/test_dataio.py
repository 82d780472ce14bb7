import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracvisc import (DataError, EmptyDataError, MasterCurve, OrderError, ParseError,
                      load_master_curve, model_moduli, relative_error, save_master_curve,
                      synthesize_curve)
from fracvisc.dataio import dumps, format_curve_csv, model_from_dict, model_to_dict, save_json
from fracvisc.reference import reference_model

HEADER = "omega_shifted,e_storage,e_loss\n"


def test_load_three_rows():
    c = load_master_curve(HEADER + "1,2,3\n2,3,4\n3,4,5\n")
    assert len(c) == 3 and c.n_points == 3
    np.testing.assert_array_equal(c.x, [1, 2, 3])


def test_load_from_bytes_stream_and_path(tmp_path):
    text = HEADER + "1,2,3\n10,3,4\n"
    p = tmp_path / "c.csv"
    p.write_text(text)
    a = load_master_curve(io.BytesIO(text.encode()))
    b = load_master_curve(p)
    assert np.array_equal(a.x, b.x) and b.label == "c"
    assert a.decades == pytest.approx(1.0)


def test_non_ascending_is_order_error():
    with pytest.raises(OrderError):
        load_master_curve(HEADER + "1,2,3\n0.5,2,3\n")


@pytest.mark.parametrize("text", ["", HEADER, HEADER + "1,2,3\n"])
def test_empty_error(text):
    with pytest.raises(EmptyDataError):
        load_master_curve(text if text else io.StringIO(""))


@pytest.mark.parametrize("text", [
    "x,y,z\n1,2,3\n2,3,4\n", HEADER + "1,2,abc\n2,3,4\n", HEADER + "1,2\n2,3,4\n"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        load_master_curve(text)


def test_non_positive_is_domain_data_error():
    with pytest.raises(DataError):
        load_master_curve(HEADER + "1,2,3\n2,-3,4\n")


def test_curve_is_read_only():
    c = MasterCurve([1, 2], [1, 1], [1, 1])
    with pytest.raises(ValueError):
        c.x[0] = 5


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(1e-300, 1e300), st.floats(1e-300, 1e300)), min_size=2, max_size=20))
def test_csv_round_trip_bit_identical(vals):
    x = np.cumsum(np.full(len(vals), 1.5))
    c = MasterCurve(x, [v[0] for v in vals], [v[1] for v in vals])
    back = load_master_curve(format_curve_csv(c))
    assert np.array_equal(back.x, c.x)
    assert np.array_equal(back.e_storage, c.e_storage)
    assert np.array_equal(back.e_loss, c.e_loss)


def test_save_then_load(tmp_path):
    c = synthesize_curve(reference_model("20HS/0.0"), np.logspace(-3, 2, 11))
    save_master_curve(c, tmp_path / "sub" / "c.csv")
    back = load_master_curve(tmp_path / "sub" / "c.csv")
    assert np.array_equal(back.e_loss, c.e_loss)
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["c.csv"]


def test_synthesize_noiseless_is_exact(grid):
    m = reference_model("40HS/0.0", constrained=True)
    c = synthesize_curve(m, grid)
    e1, e2 = model_moduli(m, grid)
    assert np.array_equal(c.e_storage, e1) and np.array_equal(c.e_loss, e2)
    assert relative_error(m, c) < 1e-12


def test_synthesize_noise_statistic():
    m = reference_model("20HS/0.0")
    g = np.logspace(-6, 2, 1000)
    c = synthesize_curve(m, g, 0.01, seed=3)
    e1, e2 = model_moduli(m, g)
    r = np.abs(np.log10(np.concatenate([c.e_storage / e1, c.e_loss / e2])))
    assert r.mean() == pytest.approx(0.01 * math.sqrt(2 / math.pi), rel=0.05)


def test_synthesize_deterministic():
    m = reference_model("20HS/0.0")
    g = np.logspace(-6, 2, 50)
    assert synthesize_curve(m, g, 0.02, seed=9) == synthesize_curve(m, g, 0.02, seed=9)
    assert synthesize_curve(m, g, 0.02, seed=9) != synthesize_curve(m, g, 0.02, seed=10)
    with pytest.raises(DataError):
        synthesize_curve(m, g, -1.0)


def test_model_json_round_trip(tmp_path):
    m = reference_model("30HS/0.5", constrained=True)
    d = json.loads(dumps(model_to_dict(m)))
    assert set(d) == {"kind", "branch1", "branch2", "tau2_constrained"}
    assert model_from_dict(d) == m
    d["branch2"].pop("tau_c")
    assert model_from_dict(d) == m
    save_json(model_to_dict(m), tmp_path / "m.json")
    assert json.loads((tmp_path / "m.json").read_text()) == json.loads(dumps(model_to_dict(m)))


def test_model_json_malformed():
    with pytest.raises(DataError):
        model_from_dict({"kind": "FMM-FMG", "branch1": {"E_c": 1}})


def test_dumps_is_deterministic_and_nan_safe():
    s = dumps({"b": np.float64(np.nan), "a": np.arange(3), "c": np.bool_(True)})
    assert s == '{\n  "a": [\n    0,\n    1,\n    2\n  ],\n  "b": null,\n  "c": true\n}\n'

import copy
import json
import math
from importlib import resources

import numpy as np
import pytest

from fvi.errors import ModelError
from fvi.factored import build_sysadmin, flatten, flatten_basis
from fvi.modelfile import load_model, parse_model, to_document
from fvi.report import dumps, emit_report
from builders import random_fmdp

DATA = resources.files("fvi") / "data"


def test_shipped_fixtures_load():
    fmdp, basis = load_model(DATA / "sysadmin-3.json")
    assert fmdp.m == 3 and basis.K == 4
    fmdp, basis = load_model(DATA / "divergence-2.json")
    assert fmdp.space.size == 2 and fmdp.gamma == 0.9


def test_round_trip_preserves_flat_model():
    for seed in range(4):
        fmdp, basis = random_fmdp(np.random.default_rng(seed), (2, 3, 2))
        doc = json.loads(dumps(to_document(fmdp, basis)))
        g, b = parse_model(doc)
        np.testing.assert_array_equal(flatten(g).P, flatten(fmdp).P)
        np.testing.assert_array_equal(flatten(g).r, flatten(fmdp).r)
        np.testing.assert_array_equal(flatten_basis(b, g.space), flatten_basis(basis, fmdp.space))


def test_listed_scope_order_is_little_endian():
    fmdp, basis = build_sysadmin(3)
    doc = to_document(fmdp, basis)
    # rewrite a two-variable basis function with its scope listed backwards
    doc["basis"].append({"scope": ["m2", "m0"], "table": [0.0, 1.0, 2.0, 3.0]})
    _, b = parse_model(doc)
    h = b.functions[-1]
    assert h.scope == (0, 2)
    # listed order: m2 is the low digit, so (m0=1, m2=0) -> entry 2
    assert h(np.array([[1, 0, 0]]))[0] == 2.0
    assert h(np.array([[0, 0, 1]]))[0] == 1.0


def _doc():
    return to_document(*build_sysadmin(3))


def test_bad_row_sum_names_path(tmp_path):
    doc = _doc()
    doc["factors"][1]["table"][0][2] = [0.5, 0.4]
    with pytest.raises(ModelError) as exc:
        parse_model(doc)
    assert exc.value.path == "factors[1].table[0][2]"
    assert "factors[1].table[0][2]" in str(exc.value)


def test_unknown_variable_in_scope():
    doc = _doc()
    doc["rewards"][0]["scope"] = ["nope"]
    with pytest.raises(ModelError) as exc:
        parse_model(doc)
    assert exc.value.path == "rewards[0].scope[0]"


@pytest.mark.parametrize("mutate, path", [
    (lambda d: d.pop("actions"), None),
    (lambda d: d["variables"].append({"name": "m0", "size": 2}), "variables[3].name"),
    (lambda d: d["factors"].pop(), "factors"),
    (lambda d: d.__setitem__("gamma", "high"), "gamma"),
    (lambda d: d.__setitem__("start", [0, 0]), "start"),
    (lambda d: d["basis"][0].__setitem__("table", [1.0, 2.0]), "basis[0].table"),
])
def test_structural_errors(mutate, path):
    doc = copy.deepcopy(_doc())
    mutate(doc)
    with pytest.raises(ModelError) as exc:
        parse_model(doc)
    if path:
        assert exc.value.path == path


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ModelError):
        load_model(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ModelError):
        load_model(bad)


def test_canonical_json_format(tmp_path):
    text = dumps({"b": [1.0, float("nan")], "a": {"z": 0.1, "y": []}, "c": np.float64(3), "d": None})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert '"NaN"' in text and "0.10000000000000001" in text and "3.0" in text
    assert '"y": []' in text
    out = tmp_path / "r.json"
    emit_report({"x": [float("inf"), -float("inf")]}, out)
    assert json.loads(out.read_text()) == {"x": ["Infinity", "-Infinity"]}


def test_floats_round_trip_exactly():
    rng = np.random.default_rng(0)
    vals = rng.standard_normal(50).tolist() + [1e-300, 5e300, 0.0, -0.0, math.pi]
    assert json.loads(dumps(vals)) == vals

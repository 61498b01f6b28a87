import io
import json

import pytest
from hypothesis import given

from conftest import instance_and_direction, instances
from stokeslab.cli import (GeneratorError, GeneratorSpec, InputError, e2_presentation,
                           gen_random, main, parse_document, serialize)
from stokeslab.costokes import extract_stokes_data
from stokeslab.presentation import validate


def call(argv, tmp_path=None, doc=None):
    if doc is not None:
        path = tmp_path / "in.json"
        path.write_text(doc)
        argv = [*argv, "--input", str(path)]
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


@pytest.fixture
def e2_doc():
    return serialize(e2_presentation())


def test_validate_e2(tmp_path, e2_doc):
    code, text = call(["validate"], tmp_path, e2_doc)
    assert code == 0
    assert json.loads(text)["payload"]["verdict"] == "valid"


def test_compare_e2_agrees(tmp_path, e2_doc):
    code, text = call(["compare", "--theta", "1/1"], tmp_path, e2_doc)
    assert code == 0
    assert json.loads(text)["payload"]["verdict"] == "Agree"
    code, text = call(["compare", "--theta", "1/1", "--quiet"], tmp_path, e2_doc)
    assert (code, text) == (0, "Agree\n")


def test_monodromy_e2(tmp_path, e2_doc):
    code, text = call(["monodromy"], tmp_path, e2_doc)
    assert json.loads(text)["payload"]["monodromy"] == [["7/1", "1/1"], ["15/1", "3/1"]]


def test_laplace_and_inverse(tmp_path, e2_doc):
    code, text = call(["laplace", "--theta", "1/1"], tmp_path, e2_doc)
    assert code == 0
    payload = json.loads(text)["payload"]
    assert payload["S"] == [["1/1", "1/3"], ["0/1", "1/1"]]
    assert payload["Q"] == [["2/1", "0/1"], ["15/1", "3/1"]]
    code, back = call(["inverse-laplace"], tmp_path, text)
    assert code == 0
    p = parse_document(back)
    assert [[p.T(i, j)[0, 0] for j in range(2)] for i in range(2)] == [[2, 1], [5, 3]]


def test_cohomology_and_decompose(tmp_path, e2_doc):
    code, text = call(["cohomology", "--xi", "0"], tmp_path, e2_doc)
    rep = json.loads(text)["payload"]
    assert (code, rep["h0"], rep["h1"]) == (0, 0, 1)
    code, text = call(["decompose", "--theta=-1/-1"], tmp_path, e2_doc)
    rep = json.loads(text)["payload"]
    assert code == 0 and rep["stokes"] == rep["vanishing_cycle"]


def test_roundtrip_command(tmp_path, e2_doc):
    code, text = call(["roundtrip", "--quiet"], tmp_path, e2_doc)
    assert (code, text) == (0, "pass\n")


def test_input_errors_exit_2(tmp_path, e2_doc):
    code, text = call(["validate"], tmp_path, "not json")
    assert code == 2
    assert json.loads(text)["kind"] == "error"
    code, _ = call(["compare", "--theta", "0/1"], tmp_path, e2_doc)  # Stokes direction
    assert code == 2
    code, _ = call(["compare", "--theta", "one"], tmp_path, e2_doc)
    assert code == 2
    code, _ = call(["frobnicate"])
    assert code == 2
    bad = json.loads(e2_doc)
    bad["payload"]["maps"][0][0] = [["0/1"]]
    code, text = call(["validate"], tmp_path, json.dumps(bad))
    assert code == 2 and json.loads(text)["payload"]["error"] == "SingularDiagonalBlock"


def test_generate_deterministic():
    argv = ["generate", "--seed", "7", "--n", "3", "--maxdim", "2"]
    assert call(argv) == call(argv)
    assert call(argv)[0] == 0


def test_seed_env_overrides(monkeypatch):
    monkeypatch.setenv("STOKESLAB_SEED", "11")
    a = call(["generate", "--seed", "7"])
    b = call(["generate", "--seed", "99"])
    monkeypatch.delenv("STOKESLAB_SEED")
    c = call(["generate", "--seed", "11"])
    assert a == b == c


def test_selftest_quiet():
    assert call(["selftest", "--instances", "3", "--quiet"]) == (0, "pass\n")


def test_generator_seed_sweep():
    for seed in range(1, 101):
        validate(gen_random(GeneratorSpec(seed=seed, n=1 + seed % 5, maxdim=1 + seed % 4)))
    p = gen_random(GeneratorSpec(seed=1, n=1, maxdim=1))
    validate(p)
    assert p.n == 1 and p.N == 1


def test_generator_spec_checked():
    with pytest.raises(InputError):
        GeneratorSpec(seed=1, n=0)
    with pytest.raises(InputError):
        GeneratorSpec(seed=1, n=2, maxdim=9)
    assert issubclass(GeneratorError, RuntimeError)


@given(instances())
def test_presentation_serialization_roundtrip(p):
    text = serialize(p)
    q = parse_document(text)
    assert q == p
    assert serialize(q) == text


@given(instance_and_direction())
def test_stokes_serialization_roundtrip(pt):
    p, theta = pt
    d = extract_stokes_data(p, theta)
    text = serialize(d)
    assert serialize(parse_document(text)) == text

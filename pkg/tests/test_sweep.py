import math

import pytest

from polyra import sweep
from polyra.core import ProblemInstance


def _one(spec_dict):
    return sweep.read_csv(sweep.to_csv(sweep.spec_from_dict(spec_dict)))


def test_two_type_row():
    d = _one({"K": 2, "M": [1, 0], "gammas": [0.5]})
    assert d["optimal_cr_M1"] == [0.8]
    assert d["optimal_cr_M0"] == [pytest.approx(0.666667, abs=1e-6)]


def test_three_type_row():
    d = _one({"K": 3, "M": [1], "gammas": [0.25], "quantities": ["optimal_cr", "gamma_up"]})
    assert d["optimal_cr_M1"][0] == pytest.approx(0.48, abs=1e-6)
    assert d["gamma_up_M1"][0] >= d["optimal_cr_M1"][0]


def test_f_sweep_value():
    d = _one({"kind": "f", "G": [1.5], "cases": ["large"], "quantities": ["f1f2"]})
    assert d["f1f2_large"][0] == pytest.approx(0.816, abs=5e-4)


def test_columns_and_grid():
    spec = sweep.spec_from_dict({"K": 3, "M": [2, 1], "gammas": {"start": 0.1, "stop": 0.9, "num": 9},
                                 "quantities": ["optimal_cr", "L"]})
    assert spec.columns() == ["gamma", "optimal_cr_M2", "optimal_cr_M1", "L_M2", "L_M1"]
    assert spec.gammas[4] == 0.5
    assert len(sweep.to_csv(spec).splitlines()) == 10


def test_inapplicable_cells_are_blank():
    text = sweep.to_csv(sweep.spec_from_dict({"K": 2, "M": [0], "gammas": [0.5], "quantities": ["gamma_up"]}))
    assert text.splitlines()[1] == "0.500000,"
    assert math.isnan(sweep.read_csv(text)["gamma_up_M0"][0])


def test_deterministic_output():
    spec = sweep.standard_specs()["three_type"]
    assert sweep.to_csv(spec) == sweep.to_csv(spec)


@pytest.mark.parametrize("name", ["two_type", "three_type", "f_small", "f_large"])
def test_reference_curves_reproduced(name):
    worst, n = sweep.compare_to_reference(name, sweep.to_csv(sweep.standard_specs()[name]))
    assert n > 50
    assert worst <= 5e-4 + 1e-12


@pytest.mark.parametrize(
    "bad",
    [
        {"K": 2, "M": [1], "gammas": []},
        {"K": 2, "M": [1], "gammas": [0.0, 0.5]},
        {"K": 2, "M": [1], "gammas": [0.5, 0.4]},
        {"K": 2, "M": [2], "gammas": [0.5]},
        {"K": 2, "M": [1], "gammas": [0.5], "quantities": ["nope"]},
        {"K": 2, "M": [1], "gammas": {"start": 0.1}},
        {"M": [1], "gammas": [0.5]},
        {"kind": "f", "G": [0.5]},
        {"kind": "f", "G": [2.0], "cases": ["medium"]},
        {"kind": "other"},
    ],
)
def test_spec_validation(bad):
    with pytest.raises(sweep.SweepError):
        sweep.spec_from_dict(bad)


def test_atomic_write(tmp_path):
    target = tmp_path / "out.csv"
    sweep.write_atomic(target, "a,b\n")
    assert target.read_text() == "a,b\n"


    with pytest.raises(TypeError):
        sweep.write_atomic(target, 123)  # not text
    assert target.read_text() == "a,b\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]


def test_optimal_cr_dispatch():
    assert sweep.optimal_cr(ProblemInstance(2, 0, 1.0, (1, 2))) == pytest.approx(2 / 3)
    assert math.isnan(sweep.optimal_cr(ProblemInstance(4, 1, 1.0, (1, 2, 3, 4))))

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from rowplan import DomainError, FieldFileError, FieldSpec, FieldValidationError, Plant, SpeciesSpec
from rowplan import generate_field, load_field, reach_probability, save_field
from rowplan.field import field_from_dict, field_to_dict, make_field
from rowplan.oracle import monte_carlo_reach

from conftest import weed

DATA = __import__("pathlib").Path(__file__).parent / "data"


def test_zero_density_gives_crops_only():
    f = generate_field(FieldSpec(lam=0.0, length=10, crop_spacing=0.25))
    assert f.weeds == []
    assert len(f.crops) == 40


def test_mean_gap_matches_arrival_rate_over_1000_seeds():
    spec = FieldSpec(lam=3.1, length=100)
    eta = spec.arrival_rate
    means = []
    for seed in range(1000):
        xs = np.array([p.x for p in generate_field(FieldSpec(lam=3.1, length=100, seed=seed)).weeds])
        means.append(np.diff(np.r_[0.0, xs]).mean())
    expected = 1 / eta
    assert expected == pytest.approx(0.232, abs=1e-3)
    # each per-seed mean has sd ~ 1/(eta sqrt(n)); the grand mean is much tighter
    n = eta * 100
    assert abs(np.mean(means) - expected) < 3 * expected / math.sqrt(n * 1000)


def test_gaps_are_exponential():
    f = generate_field(FieldSpec(lam=8.2, length=200, seed=11))
    xs = np.array([p.x for p in f.weeds])
    gaps = np.diff(np.r_[0.0, xs])
    eta = 8.2 * 1.39
    assert stats.kstest(gaps, "expon", args=(0, 1 / eta)).pvalue > 0.01
    ys = np.array([p.y for p in f.weeds])
    assert stats.kstest(ys, "uniform", args=(0, 1.39)).pvalue > 0.01


def test_generation_is_deterministic_per_seed():
    a = generate_field(FieldSpec(lam=15.4, length=20, seed=4, crop_spacing=0.25))
    b = generate_field(FieldSpec(lam=15.4, length=20, seed=4, crop_spacing=0.25))
    c = generate_field(FieldSpec(lam=15.4, length=20, seed=5, crop_spacing=0.25))
    assert a == b
    assert a != c


def test_species_mix_fractions():
    mix = (SpeciesSpec("dicot", 10 / 11, priority="low"), SpeciesSpec("grass", 1 / 11, priority="high"))
    f = generate_field(FieldSpec(lam=22.3, length=100, species_mix=mix, seed=2))
    share = np.mean([w.species == "grass" for w in f.weeds])
    n = len(f.weeds)
    assert abs(share - 1 / 11) < 3 * math.sqrt((1 / 11) * (10 / 11) / n)
    assert {w.priority for w in f.weeds if w.species == "grass"} == {"high"}


def test_plants_sorted_with_unique_ids():
    f = generate_field(FieldSpec(lam=8.2, length=10, crop_spacing=0.25, seed=1))
    keys = [(p.x, p.y, p.id) for p in f.plants]
    assert keys == sorted(keys)
    assert len({p.id for p in f.plants}) == len(f.plants)
    assert all(0 <= p.y < 1.39 for p in f.plants)


@pytest.mark.parametrize("bad", [dict(lam=-1), dict(lam=float("nan")), dict(lam=1, width=0),
                                 dict(lam=1, species_mix=(SpeciesSpec("a", 0.5),))])
def test_invalid_spec(bad):
    with pytest.raises(FieldValidationError):
        FieldSpec(**bad)


# reach probability


def test_reach_trivial_cases():
    assert reach_probability(0.0, 0.5, 5.0, 4.309) == 1.0
    assert reach_probability(0.36, 0.0, 5.0, 4.309) == 1.0


def test_reach_matches_monte_carlo_at_1e6():
    p = reach_probability(0.36, 0.5, 5.0, 4.309)
    f = monte_carlo_reach(0.36, 0.5, 5.0, 4.309, samples=10**6, seed=1)
    assert abs(p - f) <= 3 * math.sqrt(p * (1 - p) / 10**6)


def test_reach_vectorised():
    out = reach_probability(np.array([0.0, 0.1, 0.2]), 0.5, 5.0, 10.0)
    assert out.shape == (3,)
    assert np.all(np.diff(out) < 0)


@pytest.mark.parametrize("args", [(-0.1, 0.5, 5, 1), (0.1, -0.5, 5, 1), (0.1, 0.5, 0, 1), (0.1, 0.5, 5, -1)])
def test_reach_domain_errors(args):
    with pytest.raises(DomainError):
        reach_probability(*args)


@given(st.floats(0, 2), st.floats(0.01, 2), st.floats(0.1, 10), st.floats(0, 100))
def test_reach_in_unit_interval(dy, g, th, eta):
    p = reach_probability(dy, g, th, eta)
    assert 0.0 <= p <= 1.0


# file I/O


def test_round_trip(tmp_path):
    f = generate_field(FieldSpec(lam=8.2, length=5, crop_spacing=0.25, seed=9))
    save_field(f, tmp_path / "f.json")
    assert load_field(tmp_path / "f.json") == f


def test_round_trip_ingested_spec(tmp_path):
    f = make_field({"width": 1.39, "note": "x"}, [weed(0, 0.1, 0.2)])
    save_field(f, tmp_path / "f.json")
    assert load_field(tmp_path / "f.json") == f


def test_hand_written_three_plant_file():
    with pytest.warns(UserWarning, match="re-sorted"):
        f = load_field(DATA / "three_plants.json")
    assert [p.id for p in f.plants] == [3, 5, 7]
    assert [p.kind for p in f.plants] == ["crop", "weed", "weed"]
    assert f.by_id()[5].priority == "low"
    assert f.width == 1.39


def _doc(y):
    return {"spec": {"width": 1.39}, "plants": [
        {"id": 0, "x_m": 0.1, "y_m": y, "kind": "weed", "species": "w", "area_mm2": 1, "beta": 1,
         "priority": "high"}]}


def test_y_equal_width_rejected(tmp_path):
    (tmp_path / "f.json").write_text(json.dumps(_doc(1.39)))
    with pytest.raises(FieldValidationError, match=r"y_m=1.39"):
        load_field(tmp_path / "f.json")


def test_schema_error_names_field():
    doc = _doc(0.1)
    doc["plants"][0]["kind"] = "tree"
    with pytest.raises(FieldFileError) as ei:
        field_from_dict(doc)
    assert ei.value.field == "plants.0.kind"


def test_bad_json_reports_line(tmp_path):
    (tmp_path / "f.json").write_text('{\n "spec": {"width": 1.39},\n "plants": [,]\n}')
    with pytest.raises(FieldFileError) as ei:
        load_field(tmp_path / "f.json")
    assert ei.value.line == 3


def test_duplicate_ids_rejected():
    with pytest.raises(FieldValidationError, match="not unique"):
        make_field({"width": 1.39}, [weed(0, 0.1, 0.2), weed(0, 0.3, 0.2)])


def test_near_duplicates_dropped():
    with pytest.warns(UserWarning, match="dropped 1"):
        f = make_field({"width": 1.39}, [weed(0, 0.1, 0.2), weed(1, 0.1004, 0.2003)])
    assert [p.id for p in f.plants] == [0]


def test_plant_validation():
    with pytest.raises(FieldValidationError):
        Plant(0, 0.0, 0.0, area_mm2=0)
    with pytest.raises(FieldValidationError):
        Plant(0, 0.0, 0.0, priority="medium")


@settings(max_examples=30)
@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 1.389)), max_size=20))
def test_save_load_property(pts):
    f = make_field({"width": 1.39}, [weed(i, x, y) for i, (x, y) in enumerate(pts)], warn=False)
    assert field_from_dict(json.loads(json.dumps(field_to_dict(f)))) == f

import numpy as np
import pytest
from scipy import stats as sps

from liftsched.simulation import BuildingConfig
from liftsched.traffic import TrafficSpec, generate, load_traffic, save_traffic


BUILDING = BuildingConfig(floors=8, cars=3, population=100)


def test_spec_validation():
    with pytest.raises(ValueError):
        TrafficSpec("sideways", 10, 3600, 1)
    with pytest.raises(ValueError):
        TrafficSpec("interfloor", 0, 3600, 1)
    with pytest.raises(ValueError):
        TrafficSpec("interfloor", 10, -5, 1)
    with pytest.raises(ValueError):
        TrafficSpec("mixed", 10, 3600, 1, mixed_weights=(0.5, 0.5, 0.5))


def test_zero_passengers_for_tiny_duration():
    spec = TrafficSpec("interfloor", 10, 1e-9, seed=1)
    assert generate(spec, BUILDING) == []


def test_poisson_count_within_three_sigma():
    # population 100 at 10%/5min: 10 arrivals per 300 s, so 120 per hour
    expected = (10 / 100) * 100 / 300 * 3600
    counts = [len(generate(TrafficSpec("interfloor", 10, 3600, seed=s), BUILDING))
              for s in range(100)]
    mean = np.mean(counts)
    sigma = np.sqrt(expected / 100)
    assert abs(mean - expected) < 3 * sigma


def test_interfloor_never_touches_lobby():
    spec = TrafficSpec("interfloor", 30, 3600, seed=3)
    for p in generate(spec, BUILDING):
        assert p.origin != 1 and p.destination != 1
        assert p.origin != p.destination


def test_up_peak_and_down_peak_endpoints():
    for p in generate(TrafficSpec("up_peak", 20, 3600, seed=4), BUILDING):
        assert p.origin == 1 and p.destination > 1
    for p in generate(TrafficSpec("down_peak", 20, 3600, seed=5), BUILDING):
        assert p.destination == 1 and p.origin > 1


def test_mixed_composition():
    spec = TrafficSpec("mixed", 30, 3600 * 5, seed=6)
    ps = generate(spec, BUILDING)
    down = sum(1 for p in ps if p.destination == 1)
    up = sum(1 for p in ps if p.origin == 1)
    inter = len(ps) - down - up
    # 45/45/10 split within loose sampling bounds
    assert abs(down / len(ps) - 0.45) < 0.05
    assert abs(up / len(ps) - 0.45) < 0.05
    assert abs(inter / len(ps) - 0.10) < 0.04


def test_arrivals_strictly_increasing_within_duration():
    spec = TrafficSpec("interfloor", 30, 3600, seed=7)
    ps = generate(spec, BUILDING)
    times = [p.arrival_time for p in ps]
    assert all(b > a for a, b in zip(times, times[1:]))
    assert all(0 <= t < 3600 for t in times)
    ids = [p.id for p in ps]
    assert ids == list(range(len(ps)))


def test_determinism_per_seed():
    spec = TrafficSpec("interfloor", 25, 3600, seed=11)
    a = generate(spec, BUILDING)
    b = generate(spec, BUILDING)
    assert [(p.arrival_time, p.origin, p.destination) for p in a] == \
        [(p.arrival_time, p.origin, p.destination) for p in b]
    c = generate(TrafficSpec("interfloor", 25, 3600, seed=12), BUILDING)
    assert [(p.arrival_time) for p in c] != [(p.arrival_time) for p in a]


def test_origin_destination_pairs_uniform_chi_square():
    # large sample of inter-floor trips: all ordered non-lobby pairs equally
    # likely at the 1% level
    spec = TrafficSpec("interfloor", 30, 3600 * 40, seed=13)
    ps = generate(spec, BUILDING)
    pairs = [(p.origin, p.destination) for p in ps]
    floors = range(2, 9)
    categories = [(o, d) for o in floors for d in floors if o != d]
    counts = [sum(1 for q in pairs if q == cat) for cat in categories]
    _, pvalue = sps.chisquare(counts)
    assert pvalue > 0.01


def test_pin_file_round_trip(tmp_path):
    spec = TrafficSpec("interfloor", 20, 3600, seed=9)
    ps = generate(spec, BUILDING)
    path = tmp_path / "pin.tsv"
    save_traffic(path, ps)
    back = load_traffic(path)
    assert [(p.id, p.arrival_time, p.origin, p.destination) for p in back] == \
        [(p.id, p.arrival_time, p.origin, p.destination) for p in ps]
    with pytest.raises(ValueError):
        bad = tmp_path / "bad.tsv"
        bad.write_text("nonsense\n")
        load_traffic(bad)


def test_population_required():
    spec = TrafficSpec("interfloor", 10, 60, seed=1)
    with pytest.raises(ValueError):
        generate(spec, BuildingConfig(floors=8, cars=1, population=0))

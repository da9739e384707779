import numpy as np
import pytest

from radtd.errors import ConfigError
from radtd.synthetic import KINDS, AnomalySpec, synth_series


def test_spike_at_requested_position():
    series = synth_series("spike", 500, AnomalySpec(positions=(250,)), seed=1)
    assert series.labels.sum() == 1
    assert series.labels[250]
    assert np.argmax(np.abs(series.values[:, 0])) == 250
    assert series.name == "spike_1"


def test_level_shift_labels_whole_block():
    series = synth_series("level_shift", 400, AnomalySpec(positions=(200,), width=20), seed=0)
    np.testing.assert_array_equal(np.flatnonzero(series.labels), np.arange(200, 220))


@pytest.mark.parametrize("kind", KINDS)
def test_same_seed_same_series(kind):
    a = synth_series(kind, 300, seed=4)
    b = synth_series(kind, 300, seed=4)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_random_positions_avoid_the_training_prefix():
    series = synth_series("ar1_spike", 500, AnomalySpec(count=3), seed=9)
    hits = np.flatnonzero(series.labels)
    assert hits.size == 3
    assert hits.min() >= 200


def test_seasonal_switch_has_no_anomalies():
    series = synth_series("seasonal_switch", 400, seed=0)
    assert not series.labels.any()


def test_out_of_range_position():
    with pytest.raises(ConfigError, match="out of range"):
        synth_series("level_shift", 200, AnomalySpec(positions=(190,), width=30))


def test_too_short():
    with pytest.raises(ConfigError):
        synth_series("spike", 50)


def test_unknown_kind():
    with pytest.raises(ConfigError):
        synth_series("drift", 200)


def test_more_anomalies_than_room():
    with pytest.raises(ConfigError, match="out of range"):
        synth_series("spike", 100, AnomalySpec(count=100))
    with pytest.raises(ConfigError, match="out of range"):
        synth_series("level_shift", 100, AnomalySpec(count=1, width=80))

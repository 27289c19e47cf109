import json
import math

import numpy as np
import pytest

pd = pytest.importorskip("pseudodice")


def test_first_digits():
    assert pd.gen_digits("pi", 10).text() == "1415926535"
    assert pd.gen_digits("e", 10).text() == "7182818284"
    assert pd.gen_digits("sqrt2", 10).text() == "4142135623"
    assert pd.gen_digits("pi", 2000) == pd.gen_digits_alt("pi", 2000)


def test_digit_errors():
    with pytest.raises(pd.ConfigError):
        pd.gen_digits("tau", 10)
    with pytest.raises(pd.CapacityError):
        pd.gen_digits("pi", 101, max_digits=100)
    assert issubclass(pd.CapacityError, pd.Error)


def test_binarize():
    bits = pd.binarize_digits(pd.gen_digits("pi", 10))
    assert bits.bits().tolist() == [0, 0, 0, 1, 1, 0, 1, 1, 0, 1]
    assert bits.label == "digits:pi:ge5"
    assert bits.at(4) == 1
    with pytest.raises(IndexError):
        bits.at(11)


def test_mt19937():
    mt = pd.Mt19937(5489)
    assert mt.next_u32() == 3499211612
    ref = pd.Mt19937.from_array([0x123, 0x234, 0x345, 0x456])
    assert ref.next_u32() == 1067595299
    r = pd.Mt19937(1).next_real53()
    assert 0.0 <= r < 1.0


def test_census_matches_numpy():
    seq = pd.mt_binary_sequence(3, 5000)
    bits = seq.bits()
    counts = pd.pattern_census(seq, 5000, 3)
    windows = np.lib.stride_tricks.sliding_window_view(bits, 3)
    values = windows[:, 0] * 4 + windows[:, 1] * 2 + windows[:, 2]
    assert counts == np.bincount(values, minlength=8).tolist()


def test_stats():
    assert pd.null_sigma(2, 10000) == pytest.approx(0.005)
    assert pd.sigma_exceeds(0.5132, 40000, 2, 5)
    e = [0.50079, 0.50075, 0.50003, 0.50130, 0.50164, 0.50255, 0.50163, 0.50098, 0.50086]
    assert pd.subgroup_lcl(e) == pytest.approx(0.5004782777, abs=1e-9)
    assert pd.normality_bound(10000) == pytest.approx(0.525)


def test_normality_and_majority():
    alt = pd.BitSequence(np.tile(np.array([0, 1], dtype=np.uint8), 5003))
    report = pd.normality_test(alt, alt.count)
    assert report["statistic"] == 1.0
    assert report["violated"]
    label, c0, c1 = pd.majority_label(alt, alt.count, "010101")
    assert label == 0 and c1 == 0 and c0 > 0
    assert pd.ideal_predictor_rate(alt, alt.count) == 1.0
    with pytest.raises(pd.ValidationError):
        pd.BitSequence(np.array([0, 2], dtype=np.uint8))


def test_training_respects_ideal_rate():
    seq = pd.mt_binary_sequence(1, 2006)
    result = pd.train_and_score(seq, 1, 2000, max_epochs=20)
    assert len(result["losses"]) == 20
    assert result["accuracy"] <= result["ideal_rate"]
    assert all(math.isfinite(x) for x in result["losses"])


def test_run_experiment_b():
    text = pd.run_experiment("b", "seeds=1,2\ntrials=2\nmax_epochs=5\n")
    report = json.loads(text)
    assert report["experiment"] == "b"
    assert len(report["b"]["seeds"]) == 2
    assert text == pd.run_experiment("b", "seeds=1,2\ntrials=2\nmax_epochs=5\n")
    with pytest.raises(pd.ConfigError):
        pd.run_experiment("b", "no_such_key=1\n")

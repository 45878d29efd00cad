import numpy as np
import pytest

from elmrules import elm
from elmrules.dataset import Dataset, Discretizer, discretize, zscore_fit_apply
from elmrules.extraction import (
    SamplingConfig,
    extract,
    feature_ranges,
    fidelity,
    generate_inputs,
    label_with_model,
)
from elmrules.miner import MinerConfig, Rule, RuleList, Term, mine
from elmrules.seeding import derive_seed
from elmrules.synthetic import step_dataset

SMALL = MinerConfig(n_ants=60, max_iterations=30)


@pytest.fixture(scope="module")
def step_model():
    std, _ = zscore_fit_apply(step_dataset(seed=1))
    return elm.train(std.rows, std.labels, L=50, seed=1), std


def tanh_unit():
    # score = tanh(x); +1 exactly when x > 0
    return elm.ElmModel(np.array([[1.0]]), np.array([0.0]), np.array([1.0]), activation="tanh")


class TestInputs:
    def test_deterministic_and_in_range(self):
        ranges = np.array([[-1.0, 2.0], [0.0, 0.5]])
        a, b = generate_inputs(ranges, 500, 3), generate_inputs(ranges, 500, 3)
        assert np.array_equal(a, b)
        assert np.all(a >= ranges[:, 0]) and np.all(a <= ranges[:, 1])
        assert not np.array_equal(a, generate_inputs(ranges, 500, 4))

    def test_constant_range(self):
        rows = generate_inputs(np.array([[0.0, 1.0], [3.0, 3.0]]), 50, 0)
        assert np.all(rows[:, 1] == 3.0)

    def test_bad_range(self):
        with pytest.raises(ValueError):
            generate_inputs(np.array([[1.0, 0.0]]), 5, 0)

    def test_feature_ranges(self):
        np.testing.assert_array_equal(feature_ranges([[1, 5], [3, 2]]), [[1, 3], [2, 5]])

    def test_labels_come_from_model(self):
        rows = np.linspace(-1, 1, 21)[:, None]
        ds = label_with_model(tanh_unit(), rows)
        assert np.array_equal(ds.labels, elm.predict(tanh_unit(), rows))
        assert ds.labels[0] == -1 and ds.labels[-1] == 1 and ds.labels[10] == -1


class TestFidelity:
    def test_counting(self):
        probe = np.concatenate([np.full(97, 0.5), np.full(3, -0.5)])[:, None]
        always_pos = RuleList((), 1)
        disc = Discretizer(((0.0,),))
        assert fidelity(always_pos, tanh_unit(), probe, disc) == pytest.approx(0.97)

    def test_perfect(self):
        probe = np.linspace(-1, 1, 40)[:, None] + 0.01
        rules = RuleList((Rule((Term(0, 1),), 1),), -1)
        assert fidelity(rules, tanh_unit(), probe, Discretizer(((0.0,),))) == 1.0

    def test_empty_probe(self):
        with pytest.raises(ValueError):
            fidelity(RuleList((), 1), tanh_unit(), np.empty((0, 1)), Discretizer(((0.0,),)))


class TestExtract:
    def test_zero_examples(self, step_model):
        model, std = step_model
        res = extract(model, std, SamplingConfig(n_examples=0))
        assert res.rules.rules == () and res.n_examples == 0
        assert res.rules.default_class == (1 if np.mean(elm.predict(model, std.rows) == 1) > 0.5 else -1)

    def test_step_fidelity(self, step_model):
        model, std = step_model
        res = extract(model, std, SamplingConfig(seed=1))
        assert res.fidelity >= 0.99
        assert res.n_examples == 10 * std.n_samples

    def test_threshold_zero_is_plain_mining(self, step_model):
        model, std = step_model
        cfg = SamplingConfig(seed=2, n_examples=2000, fidelity_threshold=0.0)
        res = extract(model, std, cfg, SMALL)
        rows = generate_inputs(feature_ranges(std.rows), 2000, derive_seed(2, "examples"))
        binned, _ = discretize(label_with_model(model, rows), 6)
        assert res.rules == mine(binned, SMALL)

    def test_training_labels_unused(self, step_model):
        model, std = step_model
        flipped = Dataset.from_arrays(std.rows, -std.labels, std.names)
        cfg = SamplingConfig(seed=3, n_examples=1500)
        assert extract(model, std, cfg, SMALL).rules == extract(model, flipped, cfg, SMALL).rules

    def test_only_ranges_of_training_rows_matter(self, step_model):
        model, std = step_model
        perm = np.random.default_rng(0).permutation(std.n_samples)
        shuffled = Dataset.from_arrays(std.rows[perm], std.labels[perm], std.names)
        cfg = SamplingConfig(seed=4, n_examples=1500)
        a, b = extract(model, std, cfg, SMALL), extract(model, shuffled, cfg, SMALL)
        assert a.rules == b.rules and a.fidelity == b.fidelity

    def test_deterministic(self, step_model):
        model, std = step_model
        cfg = SamplingConfig(seed=5, n_examples=1500)
        a, b = extract(model, std, cfg, SMALL), extract(model, std, cfg, SMALL)
        assert a.to_dict() == b.to_dict()

    def test_gate_rejections_reported(self, step_model):
        model, std = step_model
        res = extract(model, std, SamplingConfig(seed=6, n_examples=1500, fidelity_threshold=1.0), SMALL)
        assert "rejections" in res.stats and res.stats["rejections"] >= 0

    def test_more_examples_help_on_average(self, step_model):
        model, std = step_model
        small, large = [], []
        for s in range(10):
            small.append(extract(model, std, SamplingConfig(seed=s, n_examples=200), SMALL).fidelity)
            large.append(extract(model, std, SamplingConfig(seed=s, n_examples=2000), SMALL).fidelity)
        assert np.mean(large) >= np.mean(small)

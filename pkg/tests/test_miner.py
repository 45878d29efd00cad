import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elmrules.dataset import Dataset, Discretizer, discretize
from elmrules.metrics import ConfusionCounts
from elmrules.miner import (
    EvaporationPolicy,
    MinerConfig,
    NoEligibleTerm,
    OpCounter,
    PheromoneTable,
    Rule,
    RuleList,
    SearchStats,
    Term,
    TermSpace,
    adapt_evaporation,
    classify,
    construct_rule,
    density_heuristic,
    entropy_heuristic,
    init_pheromone,
    mine,
    prune_rule,
    pure_group_rules,
    rule_quality,
    rule_score,
    term_probability,
    update_pheromone,
)
from elmrules.synthetic import planted_benchmark
from oracles import brute_force_best, rule_q


def binned(bins, labels, n_bins=None):
    bins = np.asarray(bins)
    n_bins = n_bins or int(bins.max()) + 1
    cuts = tuple(v + 0.5 for v in range(n_bins - 1))
    ds = Dataset.from_arrays(bins.astype(float), labels)
    return discretize(ds, discretizer=Discretizer((cuts,) * bins.shape[1]))[0]


def random_binned(seed, n=60, a=3, b=3):
    r = np.random.default_rng(seed)
    bins = r.integers(0, b, size=(n, a))
    labels = np.where(r.random(n) < 0.5, 1, -1)
    return binned(bins, labels, b)


FAST = MinerConfig(n_ants=40, max_iterations=20)


class TestPheromone:
    @pytest.mark.parametrize("b,value", [((3, 2), 0.2), ((1,), 1.0), ((2, 2, 2, 2), 0.125)])
    def test_init(self, b, value):
        t = init_pheromone(TermSpace(b))
        assert np.all(t.tau == value) and t.t == 0

    def test_update_on_path(self):
        rule = Rule((Term(0, 0),), -1, 0.72)
        new = update_pheromone(PheromoneTable(np.array([0.2, 0.2]), 0), rule, EvaporationPolicy("fixed", rho=0.15),
                               path=[0])
        assert abs(new.tau[0] - (0.85 * 0.2 + 0.72 / 1.72 * 0.2)) <= 1e-12
        assert abs(new.tau[0] - 0.2537209302325581) <= 1e-12
        assert abs(new.tau[1] - 0.17) <= 1e-12
        assert new.t == 1

    def test_zero_quality_only_evaporates(self):
        rule = Rule((Term(0, 1),), 1, 0.0)
        new = update_pheromone(PheromoneTable(np.array([0.2, 0.2]), 3), rule, EvaporationPolicy("fixed", rho=0.15),
                               space=TermSpace((2,)))
        np.testing.assert_allclose(new.tau, [0.17, 0.17], atol=1e-12)

    def test_normalize_flag(self):
        rule = Rule((Term(0, 0),), -1, 0.5)
        tau = PheromoneTable(np.full(4, 0.25), 0)
        plain = update_pheromone(tau, rule, EvaporationPolicy("fixed"), path=[0])
        normed = update_pheromone(tau, rule, EvaporationPolicy("fixed"), path=[0], normalize=True)
        assert abs(normed.tau.sum() - 1) <= 1e-12 and abs(plain.tau.sum() - 1) > 1e-3

    @given(st.floats(0.01, 0.99), st.integers(1, 30))
    def test_geometric_decay(self, rho, steps):
        tau = PheromoneTable(np.array([0.3, 0.7]), 0)
        pol = EvaporationPolicy("fixed", rho=rho)
        for _ in range(steps):
            tau = update_pheromone(tau, None, pol)
        np.testing.assert_allclose(tau.tau, np.array([0.3, 0.7]) * (1 - rho) ** steps, rtol=1e-12)

    @pytest.mark.parametrize("retention,expected", [(0.15, 0.1425), (0.05, 0.05), (0.052, 0.05)])
    def test_adapt_examples(self, retention, expected):
        pol = adapt_evaporation(EvaporationPolicy("adaptive", rho=1 - retention, rho_min=0.05))
        assert abs(pol.retention - expected) <= 1e-12

    @given(st.floats(0.06, 0.95), st.floats(0.01, 0.05))
    def test_adapt_schedule(self, retention0, floor):
        pol = EvaporationPolicy("adaptive", rho=1 - retention0, rho_min=floor)
        bound = math.ceil(math.log(floor / retention0) / math.log(0.95))
        seq = [pol.retention]
        for _ in range(bound):
            pol = adapt_evaporation(pol)
            seq.append(pol.retention)
        assert all(b <= a + 1e-15 for a, b in zip(seq, seq[1:]))
        assert min(seq) >= floor - 1e-15
        assert abs(seq[-1] - floor) <= 1e-12


class TestHeuristics:
    def test_entropy_pure(self):
        d = binned([[0], [0], [1]], [1, 1, -1])
        assert entropy_heuristic(Term(0, 0), d) == 1.0

    def test_entropy_split(self):
        d = binned([[0], [0], [1]], [1, -1, -1])
        assert entropy_heuristic(Term(0, 0), d) == 0.0

    def test_entropy_empty(self):
        d = binned([[0], [0], [2]], [1, -1, -1], 3)
        assert entropy_heuristic(Term(0, 1), d) == 0.0

    def test_density(self):
        bins = [[0]] * 10 + [[1]] * 90
        d = binned(bins, [1] * 100)
        assert density_heuristic(Term(0, 0), d) == 0.1
        d2 = binned([[0]] * 5 + [[2]] * 5, [1] * 10, 3)
        assert density_heuristic(Term(0, 1), d2) == 0.0
        assert density_heuristic(Term(0, 0), binned([[0], [0]], [1, -1], 2)) == 1.0


class TestProbability:
    def test_zero_heuristic_excluded(self):
        np.testing.assert_array_equal(term_probability([0.2, 0.2], [1, 0], [0, 1]), [1, 0])

    def test_uniform(self):
        np.testing.assert_allclose(term_probability([0.1] * 4, [1] * 4, range(4)), [0.25] * 4)

    def test_arithmetic(self):
        np.testing.assert_allclose(term_probability([0.3, 0.1], [0.5, 0.5], [0, 1]), [0.75, 0.25])

    def test_no_eligible(self):
        with pytest.raises(NoEligibleTerm):
            term_probability([0.2, 0.2], [0, 0], [0, 1])

    @given(st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=20), st.data())
    def test_sums_to_one(self, tau, data):
        eta = data.draw(st.lists(st.floats(1e-6, 1.0), min_size=len(tau), max_size=len(tau)))
        elig = data.draw(st.sets(st.integers(0, len(tau) - 1), min_size=1))
        p = term_probability(tau, eta, elig)
        assert abs(p.sum() - 1) <= 1e-12 and np.all(p >= 0)
        assert np.all(p[[i for i in range(len(tau)) if i not in elig]] == 0)


class TestQuality:
    def test_examples(self):
        assert rule_quality(ConfusionCounts(TP=8, FN=2, TN=9, FP=1)) == pytest.approx(0.72)
        assert rule_quality(ConfusionCounts(TP=5, FN=0, TN=7, FP=0)) == 1.0
        assert rule_quality(ConfusionCounts(TP=5, FN=0, TN=0, FP=7)) == 0.0


class TestConstructPrune:
    def test_separating_term_found(self):
        r = np.random.default_rng(0)
        bins = r.integers(0, 3, size=(120, 3))
        labels = np.where(bins[:, 1] == 2, -1, 1)
        d = binned(bins, labels, 3)
        cfg = MinerConfig(heuristic="entropy")
        tau = init_pheromone(TermSpace(d.b))
        rng = np.random.default_rng(1)
        rules = [prune_rule(construct_rule(d, tau, cfg, rng), d) for _ in range(cfg.n_ants)]
        best = max(rules, key=lambda x: x.quality)
        assert Term(1, 2) in best.antecedent

    def test_min_cases_n_gives_empty(self):
        d = random_binned(3, n=30)
        rule = construct_rule(d, init_pheromone(TermSpace(d.b)), MinerConfig(min_cases_per_rule=30),
                              np.random.default_rng(0))
        assert rule.antecedent == ()
        assert rule.consequent == (1 if np.sum(d.labels == 1) > np.sum(d.labels == -1) else -1)

    def test_construct_deterministic(self):
        d = random_binned(4)
        tau = init_pheromone(TermSpace(d.b))
        a = [construct_rule(d, tau, FAST, np.random.default_rng(9)) for _ in range(5)]
        b = [construct_rule(d, tau, FAST, np.random.default_rng(9)) for _ in range(5)]
        assert a == b

    def test_construct_respects_eligibility(self):
        d = random_binned(5, n=80)
        rng = np.random.default_rng(2)
        tau = init_pheromone(TermSpace(d.b))
        for _ in range(50):
            rule = construct_rule(d, tau, MinerConfig(min_cases_per_rule=5), rng)
            assert len({t.attribute for t in rule.antecedent}) == len(rule.antecedent)
            assert rule.cover >= 5

    def test_noise_term_removed(self):
        r = np.random.default_rng(1)
        bins = r.integers(0, 2, size=(200, 2))
        labels = np.where(bins[:, 0] == 1, -1, 1)
        d = binned(bins, labels, 2)
        noisy = Rule((Term(0, 1), Term(1, 0)), -1)
        pruned = prune_rule(noisy, d)
        _, q = brute_force_best(d.bins, d.labels, d.b, max_terms=2)
        assert pruned.antecedent == (Term(0, 1),)
        assert pruned.quality == q == 1.0

    def test_single_term_unchanged(self):
        d = random_binned(6)
        rule = prune_rule(Rule((Term(2, 1),), 1), d)
        assert rule.antecedent == (Term(2, 1),)

    def test_all_removals_worse(self):
        bins = np.array([[a, b] for a in range(2) for b in range(2)] * 10)
        labels = np.where((bins[:, 0] == 1) & (bins[:, 1] == 1), -1, 1)
        d = binned(bins, labels, 2)
        rule = prune_rule(Rule((Term(0, 1), Term(1, 1)), -1), d)
        assert len(rule.antecedent) == 2 and rule.quality == 1.0

    @given(st.integers(0, 10_000))
    def test_prune_monotone(self, seed):
        d = random_binned(seed, n=40)
        r = np.random.default_rng(seed)
        attrs = sorted(r.choice(3, size=r.integers(1, 4), replace=False).tolist())
        rule = Rule(tuple(Term(int(a), int(r.integers(0, 3))) for a in attrs), 1)
        _, q_in, _ = rule_q(d.bins, d.labels, [(t.attribute, t.value) for t in rule.antecedent])
        out = prune_rule(rule, d)
        assert out.quality >= q_in - 1e-15
        assert set(out.antecedent) <= set(rule.antecedent)


class TestMine:
    def test_single_term_target(self):
        r = np.random.default_rng(2)
        bins = r.integers(0, 3, size=(150, 3))
        labels = np.where(bins[:, 0] == 2, -1, 1)
        d = binned(bins, labels, 3)
        rules = mine(d, MinerConfig(n_ants=100))
        assert np.mean(rules.predict(d.bins) == labels) == 1.0
        assert set(rules.rules[0].antecedent) <= {Term(0, 2)}
        _, q = brute_force_best(d.bins, d.labels, d.b, 2, 5)
        assert abs(rules.rules[0].quality - q) <= 1e-12

    def test_max_uncovered_large(self):
        d = random_binned(7, n=30)
        rules = mine(d, MinerConfig(max_uncovered=30))
        assert rules.rules == ()

    def test_heuristics_agree(self):
        d = planted_benchmark(seed=1)
        accs = [np.mean(mine(d, cfg).predict(d.bins) == d.labels)
                for cfg in (MinerConfig(n_ants=100), MinerConfig.classic(n_ants=100))]
        assert abs(accs[0] - accs[1]) <= 0.02

    def test_deterministic(self):
        d = random_binned(8, n=80)
        assert mine(d, FAST) == mine(d, FAST)

    @given(st.integers(0, 10_000))
    def test_coverage_and_majority_floor(self, seed):
        d = random_binned(seed, n=50)
        cfg = MinerConfig(n_ants=15, max_iterations=8, min_cases_per_rule=4, max_uncovered=3)
        rl = mine(d, cfg)
        remaining = np.ones(d.n_samples, dtype=bool)
        for rule in rl.rules:
            cov = rule.covers(d.bins) & remaining
            assert rule.antecedent == () or cov.sum() >= min(cfg.min_cases_per_rule, remaining.sum())
            remaining &= ~cov
        majority = max(np.mean(d.labels == 1), np.mean(d.labels == -1))
        assert np.mean(rl.predict(d.bins) == d.labels) >= majority - 1e-12

    def test_rejected_rule_keeps_cases(self):
        d = planted_benchmark(seed=0)
        seen = []

        def accept(candidate, covered):
            seen.append(candidate.rules[-1].key())
            return len(seen) > 1  # reject the very first proposal

        stats = SearchStats()
        rl = mine(d, MinerConfig(n_ants=50), accept=accept, stats=stats)
        assert stats.rejections == 1
        assert rl.rules[0].key() != seen[0]
        assert seen[0] not in [r.key() for r in rl.rules[:1]]

    def test_op_counter(self):
        d = planted_benchmark()
        counts = {}
        for cfg in (MinerConfig(n_ants=20, max_iterations=3), MinerConfig.classic(n_ants=20, max_iterations=3)):
            c = OpCounter()
            mine(d, cfg, counter=c)
            counts[cfg.heuristic] = c.ops
        assert counts["density"] < counts["entropy"]

    def test_pure_groups(self):
        d = binned([[0, 0]] * 6 + [[1, 1]] * 3 + [[0, 1], [0, 1]], [1] * 6 + [-1] * 3 + [1, -1], 2)
        groups = pure_group_rules(d, min_cases=1)
        assert [g.antecedent for g in groups] == [(Term(0, 0), Term(1, 0)), (Term(0, 1), Term(1, 1))]


class TestRuleList:
    def _list(self):
        r0 = Rule((Term(0, 1),), -1, 1.0, ConfusionCounts(TP=9, FP=0, FN=0, TN=10))
        r1 = Rule((Term(1, 0),), 1, 0.5, ConfusionCounts(TP=0, FP=0, FN=3, TN=3))
        r2 = Rule((Term(0, 1), Term(1, 0)), 1)
        return RuleList((r0, r1, r2), 1, (3, 4))

    def test_first_match(self):
        assert classify(self._list(), np.array([1, 0])) == (-1, 0)

    def test_default(self):
        assert classify(self._list(), np.array([0, 1])) == (1, -1)

    def test_empty_antecedent_matches(self):
        rl = RuleList((Rule((), -1),), 1)
        assert classify(rl, np.array([5, 5])) == (-1, 0)

    def test_scores(self):
        rl = self._list()
        assert rule_score(rl, np.array([1, 1])) == pytest.approx(-10 / 11)
        assert rule_score(rl, np.array([0, 0])) == 0.5
        assert rule_score(rl, np.array([0, 1])) == pytest.approx(4 / 6)
        assert rule_score(rl, np.array([1, 0])) == rule_score(rl, np.array([1, 1]))

    def test_positive_laplace(self):
        rl = RuleList((Rule((Term(0, 0),), 1, 1.0, ConfusionCounts(TP=9)),), -1)
        assert rule_score(rl, np.array([0])) == pytest.approx(10 / 11)

    def test_render_grammar(self):
        disc = Discretizer(((0.5,), (1.0, 2.0)))
        text = self._list().render(["a", "b"], disc).splitlines()
        assert text[0] == "IF a in [0.5,inf) THEN class=-1 (Q=1.0000, cover=9)"
        assert text[2] == "IF a in [0.5,inf) AND b in [-inf,1) THEN class=+1 (Q=0.0000, cover=0)"
        assert text[-1] == "DEFAULT class=+1"

    def test_json_round_trip(self, tmp_path):
        rl = self._list()
        rl.save(tmp_path / "r.json")
        assert RuleList.load(tmp_path / "r.json") == rl

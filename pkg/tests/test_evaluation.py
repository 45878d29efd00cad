import numpy as np
import pytest

from elmrules.dataset import Dataset, stratified_kfold
from elmrules.evaluation import (
    HEADERS,
    Aggregate,
    MalformedCSV,
    _fold_job,
    comparison_table,
    cross_validate,
    external_metrics,
    metrics_json,
    parameter_sweep,
    render_csv,
    render_text,
    roc_csv,
    surface_csv,
)
from elmrules.extraction import SamplingConfig
from elmrules.metrics import Metrics
from elmrules.miner import EvaporationPolicy, MinerConfig
from elmrules.pipeline import PipelineConfig, fit_pipeline
from elmrules.seeding import derive_seed
from elmrules.synthetic import planted_continuous, rule_dataset

# plain mining on the planted continuous benchmark: three bins recover the planted cells
PLANTED = PipelineConfig(method="rules", sampling=SamplingConfig(bins_per_feature=3),
                         miner=MinerConfig(n_ants=100))
QUICK = PipelineConfig(sampling=SamplingConfig(n_examples=1000), miner=MinerConfig(n_ants=40, max_iterations=20))


@pytest.fixture(scope="module")
def planted():
    return planted_continuous()


@pytest.fixture(scope="module")
def small_rule_data():
    return rule_dataset(n=300, seed=3)


class TestCrossValidate:
    @pytest.mark.parametrize("method", ["elm-rules", "rules"])
    def test_constant_labels(self, rng, method):
        ds = Dataset.from_arrays(rng.normal(size=(100, 3)), np.ones(100))
        rep = cross_validate(ds, PipelineConfig(method=method), k=5, seed=0)
        assert all(agg.mean["acc"] == 1.0 for agg in rep.methods.values())
        assert all(f["degenerate_roc"] for f in rep.folds)
        assert all(agg.mean["auc"] is None for agg in rep.methods.values())
        assert rep.roc == []

    def test_deterministic(self, small_rule_data):
        a = cross_validate(small_rule_data, QUICK, k=3, seed=1)
        b = cross_validate(small_rule_data, QUICK, k=3, seed=1)
        assert metrics_json(a) == metrics_json(b) and a.roc == b.roc

    def test_parallel_matches_serial(self, small_rule_data):
        a = cross_validate(small_rule_data, QUICK, k=3, seed=2, jobs=1)
        b = cross_validate(small_rule_data, QUICK, k=3, seed=2, jobs=2)
        assert metrics_json(a) == metrics_json(b)

    def test_report_contents(self, small_rule_data):
        rep = cross_validate(small_rule_data, QUICK, k=3, seed=0)
        assert set(rep.methods) == {"ELM-rules", "ELM"}
        assert rep.methods["ELM"].mean["n_rules"] is None
        fold = rep.folds[0]
        assert {"fidelity_val", "fidelity_probe", "dropped_features", "metrics"} <= set(fold)
        assert fold["seed"] == derive_seed(0, "fold", 0)
        assert sum(f["n_val"] for f in rep.folds) == small_rule_data.n_samples
        pts = np.array(rep.roc)
        assert pts[0, 1:].tolist() == [0.0, 0.0] and pts[-1, 1:].tolist() == [1.0, 1.0]

    def test_plain_mining_method_name(self, planted):
        rep = cross_validate(planted, PLANTED, k=5, seed=0)
        assert list(rep.methods) == ["Ant-Miner"]
        assert rep.methods["Ant-Miner"].mean["acc"] >= 0.95

    def test_no_leakage(self, small_rule_data):
        ds = small_rule_data
        tr, va = stratified_kfold(ds.labels, 3, 0)[0]
        r = np.random.default_rng(0)
        rows, labels = ds.rows.copy(), ds.labels.copy()
        labels[va] = r.permutation(labels[va])
        rows[va] = r.normal(size=rows[va].shape) * 50
        tampered = Dataset.from_arrays(rows, labels, ds.names)
        a = _fold_job((ds, QUICK, tr, va, 11, 0))
        b = _fold_job((tampered, QUICK, tr, va, 11, 0))
        fa, fb = a[0], b[0]
        assert fa["fidelity_probe"] == fb["fidelity_probe"]
        assert a[1]["ELM-rules"].n_rules == b[1]["ELM-rules"].n_rules
        pa, pb = fit_pipeline(ds.subset(tr), QUICK, 11), fit_pipeline(tampered.subset(tr), QUICK, 11)
        assert pa.rules == pb.rules and pa.model == pb.model and pa.discretizer == pb.discretizer

    @pytest.mark.slow
    def test_rule_generated_dataset(self):
        # threshold from a pilot run (0.9225 at seed 0)
        rep = cross_validate(rule_dataset(), PipelineConfig(), k=5, seed=0)
        assert rep.methods["ELM-rules"].mean["acc"] >= 0.90


class TestSweep:
    def test_single_cell_matches_cv(self, planted):
        cells = parameter_sweep(planted, [0.85], [100], PLANTED, k=5, seed=0)
        direct = cross_validate(planted, PLANTED, k=5, seed=0)
        assert cells == [(0.85, 100, direct.methods["Ant-Miner"].mean["acc"])]

    def test_cells_override_parameters(self, planted):
        base = PipelineConfig(method="rules", sampling=SamplingConfig(bins_per_feature=3),
                              miner=MinerConfig(n_ants=7, evaporation=EvaporationPolicy(rho=0.5)))
        cells = parameter_sweep(planted, [0.85], [100], base, k=5, seed=0)
        assert cells == parameter_sweep(planted, [0.85], [100], PLANTED, k=5, seed=0)

    def test_repeated_rows_identical(self, planted):
        cells = parameter_sweep(planted, [0.85, 0.85], [50], PLANTED, k=5, seed=1)
        assert cells[0] == cells[1]

    def test_more_ants_not_worse(self, planted):
        (_, _, a50), (_, _, a400) = parameter_sweep(planted, [0.85], [50, 400], PLANTED, k=5, seed=0)
        assert a400 >= a50 - 0.02

    def test_empty_grid(self, planted):
        with pytest.raises(ValueError):
            parameter_sweep(planted, [], [50], PLANTED)

    def test_surface_csv(self):
        assert surface_csv([(0.85, 50, 0.9)]) == "rho,n_ants,acc\n0.85,50,0.9\n"


def _agg():
    m = [Metrics(acc=0.9, prec=0.8, auc=0.95, eta=(0.9 + 0.8 + 0.95) / 3, n_rules=4, terms_per_rule=1.5),
         Metrics(acc=0.95, prec=0.9, auc=0.97, eta=0.94, n_rules=5, terms_per_rule=2.0)]
    return Aggregate.of(m)


class TestTables:
    def test_aggregate_sample_std(self):
        agg = _agg()
        assert agg.mean["acc"] == pytest.approx(0.925)
        assert agg.std["acc"] == pytest.approx(np.std([0.9, 0.95], ddof=1))
        assert agg.n_folds == 2

    def test_one_row(self):
        rows = comparison_table({"ELM-rules": _agg()})
        assert len(rows) == 1 and list(rows[0]) == list(HEADERS)
        assert rows[0]["Acc (%)"].startswith("92.50±")
        assert rows[0]["#R"] == "4.5±0.71"

    def test_external(self, tmp_path):
        p = tmp_path / "svm.csv"
        p.write_text("score,label\n0.9,1\n0.4,1\n-0.2,-1\n-0.8,-1\n0.1,-1\n")
        rows = comparison_table({"ELM-rules": _agg()}, {"SVM": p})
        assert [r["Method"] for r in rows] == ["ELM-rules", "SVM"]
        m = external_metrics(p)
        assert m.acc == pytest.approx(0.8) and m.prec == 1.0 and m.auc == 1.0
        assert rows[1]["#R"] == "—"

    def test_external_missing_labels(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("score\n0.3\n")
        with pytest.raises(MalformedCSV):
            comparison_table({}, {"X": p})

    def test_external_bad_label(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("score,label\n0.3,0\n")
        with pytest.raises(MalformedCSV):
            external_metrics(p)

    def test_render(self):
        rows = comparison_table({"ELM-rules": _agg()})
        text = render_text(rows)
        assert text.splitlines()[0].split() == ["Method", "Acc", "(%)", "Prec", "(%)", "AUC", "#R", "#T/R", "eta"]
        assert text.rstrip().endswith("positive class for Prec: -1")
        assert render_csv(rows).splitlines()[0] == ",".join(HEADERS)

    def test_roc_csv(self):
        text = roc_csv([(float("inf"), 0.0, 0.0), (0.5, 0.25, 1.0)])
        assert text == "threshold,fpr,tpr\ninf,0.0,0.0\n0.5,0.25,1.0\n"

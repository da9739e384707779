import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import roc_auc_score

from radtd.artifacts import write_series_csv
from radtd.config import make_config
from radtd.errors import ConfigError, ShapeError, UndefinedAucError
from radtd.evaluation import ALL_FAMILY, BenchRecord, BenchReport, auc, bench
from radtd.detector import fit_detect
from radtd.synthetic import AnomalySpec, synth_series


def pair_count_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


def test_auc_examples():
    assert auc([0.1, 0.9], [False, True]) == 1.0
    assert auc([0.9, 0.1], [False, True]) == 0.0
    assert auc([0.5, 0.5, 0.5], [False, True, False]) == 0.5
    assert auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75


def test_auc_matches_sklearn():
    rng = np.random.default_rng(0)
    scores = np.round(rng.random(300), 2)
    labels = rng.random(300) < 0.3
    assert auc(scores, labels) == pytest.approx(roc_auc_score(labels, scores), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 6), st.booleans()), min_size=2, max_size=30).filter(
        lambda rows: 0 < sum(y for _, y in rows) < len(rows)
    )
)
def test_auc_counts_pairs(rows):
    scores = [float(s) for s, _ in rows]
    labels = [y for _, y in rows]
    assert auc(scores, labels) == pytest.approx(pair_count_auc(scores, labels), abs=1e-12)
    # any strictly increasing map leaves the ranking alone
    assert auc([2 * s + 1 for s in scores], labels) == auc(scores, labels)


def test_auc_single_class():
    with pytest.raises(UndefinedAucError):
        auc([0.1, 0.2], [False, False])


def test_auc_length_mismatch():
    with pytest.raises(ShapeError):
        auc([0.1, 0.2], [True])


def test_aggregate_adds_all_family_and_ranks():
    report = BenchReport(
        [
            BenchRecord("A", "a1", "radtd", 0, 0.9),
            BenchRecord("A", "a1", "rqa_rr", 0, 0.6, 1.2),
            BenchRecord("B", "b1", "radtd", 0, 0.7),
            BenchRecord("B", "b1", "rqa_rr", 0, 0.8, 0.4),
            BenchRecord("B", "b2", "radtd", 0, status="failed", note="boom"),
        ]
    )
    agg = report.aggregate().set_index(["dataset", "method"])
    assert agg.loc[("A", "radtd"), "rank"] == 1
    assert agg.loc[("B", "rqa_rr"), "rank"] == 1
    assert agg.loc[(ALL_FAMILY, "radtd"), "mean_auc"] == pytest.approx(0.8)
    assert agg.loc[(ALL_FAMILY, "radtd"), "count"] == 2
    assert agg.loc[(ALL_FAMILY, "rqa_rr"), "median_optimal_epsilon"] == pytest.approx(0.8)


def _dataset(root):
    fam_a = root / "famA"
    fam_b = root / "famB"
    fam_a.mkdir(parents=True)
    fam_b.mkdir()
    write_series_csv(synth_series("spike", 300, seed=0), fam_a / "spike_0.csv")
    (fam_a / "broken.csv").write_text("timestamp,value,is_anomaly\n1,abc,0\n", encoding="utf-8")
    write_series_csv(synth_series("spike", 300, seed=3), fam_a / "spike_all.csv")
    write_series_csv(synth_series("level_shift", 300, seed=1), fam_b / "level_shift_1.csv")
    write_series_csv(synth_series("seasonal_switch", 300, seed=2), fam_b / "seasonal.csv")
    return root


@pytest.fixture
def dataset(tmp_path):
    return _dataset(tmp_path / "data")


def test_bench_records_failures_and_skips(dataset):
    report = bench(dataset, methods=("radtd", "rqa_rr"), cfg=make_config(), seeds=(0, 1))
    frame = report.to_frame()
    ok = frame[frame["status"] == "ok"]
    failed = frame[frame["status"] == "failed"]
    assert len(ok) == 8
    assert len(failed) == 4
    assert set(failed["instance"]) == {"famA/broken.csv"}
    assert not frame["instance"].str.endswith("_all.csv").any()
    assert len(report.notes) == 1 and "seasonal.csv" in report.notes[0]
    assert ok["auc"].between(0, 1).all()
    assert ok[ok["method"] == "radtd"]["optimal_epsilon"].isna().all()

    agg = report.aggregate().set_index(["dataset", "method"])
    for (family, method), row in agg.iterrows():
        rows = ok if family == ALL_FAMILY else ok[ok["dataset"] == family]
        rows = rows[rows["method"] == method]
        assert row["mean_auc"] == pytest.approx(rows["auc"].astype(float).mean())


def test_bench_rejects_unknown_method(dataset):
    with pytest.raises(ConfigError):
        bench(dataset, methods=("radtd", "isolation_forest"))


def test_bench_missing_root(tmp_path):
    with pytest.raises(FileNotFoundError):
        bench(tmp_path / "absent")


@pytest.mark.slow
def test_bench_jobs_match_serial(dataset):
    cfg = make_config()
    serial = bench(dataset, methods=("radtd", "rqa_lam"), cfg=cfg, seeds=(0,))
    parallel = bench(dataset, methods=("radtd", "rqa_lam"), cfg=cfg, seeds=(0,), jobs=2)
    assert serial.to_frame().equals(parallel.to_frame())


@pytest.mark.slow
def test_radtd_detects_synthetic_anomalies():
    cfg = make_config()
    fixtures = [("spike", seed, AnomalySpec()) for seed in range(7)]
    # blocks shorter than the window, so every covering window sees an edge
    fixtures += [("level_shift", seed, AnomalySpec(width=10)) for seed in range(7)]
    fixtures += [("ar1_spike", seed, AnomalySpec()) for seed in range(6)]
    aucs = []
    for kind, seed, spec in fixtures:
        series = synth_series(kind, 1000, spec, seed=seed)
        aucs.append(auc(fit_detect(series, cfg).point_scores(), series.labels))
    assert len(aucs) == 20
    assert np.mean(aucs) >= 0.90
    assert min(aucs) >= 0.80, dict(zip([f"{k}_{s}" for k, s, _ in fixtures], aucs))

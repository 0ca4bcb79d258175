import itertools
import json

import pytest

import spatial_trust as st


def test_generate_and_roundtrip(tmp_path):
    records = st.generate(50, seed=7)
    assert len(records) == 50
    assert records == st.generate(50, seed=7)
    path = tmp_path / "d.jsonl"
    st.write_dataset(str(path), records)
    assert st.parse_dataset(str(path)) == records
    first = json.loads(path.read_text().splitlines()[0])
    assert set(first) >= {"sample_id", "vlm_relation", "det1", "det2", "label"}


def test_bad_record_raises(tmp_path):
    path = tmp_path / "bad.jsonl"
    rec = st.generate(1)[0]
    rec["det1"]["score"] = 1.3
    path.write_text(json.dumps(rec) + "\n")
    with pytest.raises(ValueError, match="score out of range"):
        st.parse_dataset(str(path))


def test_features_and_metrics():
    rec = st.generate(1, overrides={"detection_failure_rate": 0.0})[0]
    f = st.extract_features(rec)
    assert len(f) == len(st.FEATURE_NAMES) == 4
    assert all(0.0 <= v <= 1.0 for v in f)
    assert st.iou([0, 0, 2, 2], [1, 1, 3, 3]) == pytest.approx(1 / 7)

    scores, labels = [0.9, 0.8, 0.7, 0.1], [True, False, True, False]
    assert st.auroc(scores, labels) == 0.75
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    pairs = [(p > n) + 0.5 * (p == n) for p, n in itertools.product(pos, neg)]
    assert st.auroc(scores, labels) == sum(pairs) / len(pairs)
    assert st.youden_threshold([0.9, 0.6, 0.55, 0.2], [True, True, False, False]) == pytest.approx(0.575)
    cov = st.coverage_at_accuracy([6, 5, 4, 3, 2, 1], [1, 1, 0, 1, 0, 0], 0.66)
    assert cov["retained"] == 4


def test_train_predict_save(tmp_path):
    records = st.generate(400, seed=3)
    x = [st.extract_features(r) for r in records]
    y = [r["label"] for r in records]
    model = st.train(x, y, n_trees=20)
    assert model.n_trees == 20
    p = model.predict_proba(x)
    assert all(0.0 < v < 1.0 for v in p)
    assert st.auroc(p, y) > 0.6
    assert sum(model.feature_importance()) == pytest.approx(1.0)
    path = tmp_path / "m.json"
    model.save(str(path))
    assert st.load_model(str(path)).predict_proba(x) == p
    with pytest.raises(ValueError, match="degenerate"):
        st.train(x[:4], [True] * 4)


def test_sweep():
    records = st.generate(100)
    conf = [1.0 if r["label"] else 0.0 for r in records]
    rows = st.sweep_tau(records, conf, [0.0, 0.5, 1.1])
    assert rows[0]["coverage"] == 1.0
    assert rows[1]["precision"] == 1.0
    assert rows[2]["retained"] == 0

import numpy as np
import pytest

from myohand import evaluation as ev
from myohand.classifier import Network, TrainConfig, predict_proba, train
from myohand.dataset import feature_matrix, labeled_windows, preprocess, synthetic_corpus


def diag_matrix(total, correct):
    counts = np.zeros((5, 5), dtype=int)
    per = [correct // 5 + (1 if i < correct % 5 else 0) for i in range(5)]
    wrong = total - correct
    for i in range(5):
        counts[i, i] = per[i]
    counts[0, 1] += wrong
    return ev.ConfusionMatrix(counts)


def test_accuracy_reported_values():
    assert ev.accuracy(diag_matrix(500, 466)) == pytest.approx(0.932, abs=1e-15)
    assert ev.accuracy(diag_matrix(625, 593)) == pytest.approx(0.9488, abs=1e-15)
    assert ev.accuracy(ev.ConfusionMatrix(np.eye(5, dtype=int) * 7)) == 1.0


def test_accuracy_empty():
    with pytest.raises(ValueError):
        ev.accuracy(ev.ConfusionMatrix(np.zeros((5, 5))))


def test_confusion_csv_round_trip():
    cm = diag_matrix(40, 31)
    back = ev.ConfusionMatrix.from_csv(cm.to_csv())
    np.testing.assert_array_equal(back.counts, cm.counts)
    assert back.class_names == cm.class_names


@pytest.fixture(scope="module")
def trained():
    recs = [preprocess(r) for r in synthetic_corpus(2, 3.0, seed=8)]
    ws = labeled_windows(recs)
    x, _ = feature_matrix(ws.windows, "td")
    net, _ = train(x, ws.labels, TrainConfig(max_epochs=30, seed=1))  # undertrained on purpose
    return net, x, ws.labels


def test_evaluate_single_example(trained):
    net, x, y = trained
    pred = int(np.argmax(predict_proba(net, x[0])))
    cm = ev.evaluate(net, x[:1], np.array([pred]))
    assert cm.total == 1 and cm.counts[pred, pred] == 1


def test_evaluate_order_invariant_and_independent_loop(trained):
    net, x, y = trained
    cm = ev.evaluate(net, x, y)
    perm = np.random.default_rng(0).permutation(len(y))
    np.testing.assert_array_equal(ev.evaluate(net, x[perm], y[perm]).counts, cm.counts)
    agree = 0
    for xi, yi in zip(x, y):
        p = predict_proba(net, xi)
        agree += int(max(range(5), key=lambda k: (p[k], -k)) == yi)
    assert np.trace(cm.counts) == agree
    assert ev.accuracy(cm) == 1 - (len(y) - agree) / len(y)
    np.testing.assert_array_equal(cm.counts.sum(axis=1), np.bincount(y, minlength=5))


def test_evaluate_empty(trained):
    net, x, _ = trained
    with pytest.raises(ValueError):
        ev.evaluate(net, x[:0], np.array([], dtype=int))


def test_benchmark_timing_only():
    recs = synthetic_corpus(1, 1.0, seed=2)
    rep = ev.benchmark(recs, trials=3, train_models=False)
    assert rep.n_windows == 5 * 15
    assert rep.td.extraction_ms_per_window > 0 and rep.fd.extraction_ms_per_window > 0
    assert rep.td.extraction_ms_per_window < rep.fd.extraction_ms_per_window
    assert "Feature Extraction Time/Window (ms)" in rep.table()
    assert '"backend"' in rep.to_json()


def test_benchmark_errors():
    recs = synthetic_corpus(1, 1.0, seed=2)
    with pytest.raises(ValueError, match="trials"):
        ev.benchmark(recs, trials=0)
    with pytest.raises(ValueError, match="insufficient"):
        ev.benchmark(recs, trials=3, window_len=4096, train_models=False)


def test_benchmark_with_training():
    recs = [preprocess(r) for r in synthetic_corpus(1, 3.0, seed=3)]
    rep = ev.benchmark(recs, trials=3, train_config=TrainConfig(max_epochs=200))
    for r in (rep.td, rep.fd):
        assert 0 <= r.accuracy <= 1 and r.training_epochs >= 1 and r.training_time_s > 0

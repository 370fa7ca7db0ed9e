import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from myohand import classifier as clf
from myohand.classifier import Network, TrainConfig
from myohand.dataset import feature_matrix, labeled_windows, preprocess, synthetic_corpus
from myohand.dataset import DEFAULT_GAIN
from myohand.signal_io import GestureClass, default_profile, synthesize_emg, window_stream
from oracles import finite_difference


def mini_network():
    return Network(
        w1=np.eye(2), b1=np.zeros(2),
        w2=np.array([[1.0, -1.0], [0.0, 0.0]]), b2=np.array([0.25, 0.0]),
        norm_mean=np.zeros(2), norm_scale=np.ones(2), class_names=("a", "b"),
    )


def random_network(rng, d=4, h=3, k=5):
    net = Network.initialize(d, k, h, seed=int(rng.integers(2**31)))
    net.w1 = rng.standard_normal((h, d))
    net.b1 = rng.standard_normal(h)
    net.w2 = rng.standard_normal((k, h))
    net.b2 = rng.standard_normal(k)
    net.norm_mean = rng.standard_normal(d)
    net.norm_scale = rng.uniform(0.5, 2.0, d)
    return net


def test_zero_network_is_uniform():
    net = Network.initialize(9, seed=0)
    for p in net.params():
        p[...] = 0
    pred = clf.forward(net, np.random.default_rng(0).standard_normal(9))
    np.testing.assert_allclose(pred.probabilities, [0.2] * 5, rtol=1e-15)
    assert pred.label == 0  # tie-break toward the lower ordinal


def test_transfer_identities():
    assert clf.tansig(0.0) == 0.0
    np.testing.assert_allclose(clf.softmax(np.full(5, 3.3)), np.full(5, 0.2))


def test_mini_network_hand_calculation():
    # a1 = tanh(+-0.5); z2 = [2 tanh(0.5) + 0.25, 0]; values from 30-digit evaluation
    pred = clf.forward(mini_network(), [0.5, -0.5])
    np.testing.assert_allclose(pred.probabilities, [0.76390953498131455, 0.23609046501868545], rtol=1e-14)
    assert pred.label == 0 and pred.confidence == pred.probabilities[0]


def test_forward_errors():
    net = Network.initialize(9)
    with pytest.raises(clf.DimensionError):
        clf.forward(net, np.zeros(24))
    with pytest.raises(ValueError, match="non-finite"):
        clf.forward(net, np.full(9, np.nan))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=5, max_size=5), st.floats(-1e3, 1e3))
def test_softmax_properties(logits, c):
    p = clf.softmax(np.array(logits))
    assert abs(p.sum() - 1) < 1e-9
    assert np.all((p >= 0) & (p <= 1))
    assert np.argmax(clf.softmax(np.array(logits) + c)) == np.argmax(p)


def numeric_gradient(net, x, y):
    f = lambda: clf.loss(net, x, y)
    return [finite_difference(f, p) for p in net.params()]


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    for _ in range(10):
        net = random_network(rng)
        x = rng.standard_normal((6, 4))
        y = rng.integers(0, 5, 6)
        _, g = clf.gradient(net, x, y)
        for analytic, numeric in zip(g.arrays(), numeric_gradient(net, x, y)):
            np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-8)


def test_output_bias_gradient_identity():
    net = Network.initialize(3, seed=0)
    for p in net.params():
        p[...] = 0
    x = np.random.default_rng(1).standard_normal((1, 3))
    _, g = clf.gradient(net, x, np.array([2]))
    target = np.zeros(5)
    target[2] = 1
    np.testing.assert_allclose(g.b2, np.full(5, 0.2) - target, rtol=1e-15)


def test_gradient_duplicated_batch():
    rng = np.random.default_rng(2)
    net = random_network(rng)
    x, y = rng.standard_normal((5, 4)), rng.integers(0, 5, 5)
    _, g1 = clf.gradient(net, x, y)
    _, g2 = clf.gradient(net, np.repeat(x, 2, axis=0), np.repeat(y, 2))
    for a, b in zip(g1.arrays(), g2.arrays()):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


def two_clusters(n=40, seed=0):
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.normal(-2, 0.5, (n, 2)), rng.normal(2, 0.5, (n, 2))])
    return x, np.repeat([0, 1], n)


def test_train_separable_toy():
    x, y = two_clusters()
    cfg = TrainConfig(max_epochs=200, validation_fraction=0.0, test_fraction=0.0, seed=3)
    net, rep = clf.train(x, y, cfg, n_classes=2)
    assert rep.train_accuracy == 1.0 and rep.epochs <= 200


def test_train_deterministic():
    x, y = two_clusters()
    cfg = TrainConfig(max_epochs=50, seed=11)
    a, _ = clf.train(x, y, cfg, n_classes=2)
    b, _ = clf.train(x, y, cfg, n_classes=2)
    for p, q in zip(a.params() + (a.norm_mean,), b.params() + (b.norm_mean,)):
        np.testing.assert_array_equal(p, q)


def test_training_loss_non_increasing_small_lr():
    x, y = two_clusters(seed=4)
    cfg = TrainConfig(max_epochs=300, learning_rate=1e-3, validation_fraction=0.0, test_fraction=0.0)
    _, rep = clf.train(x, y, cfg, n_classes=2)
    assert np.all(np.diff(rep.loss_history) <= 1e-15)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_train_errors():
    x, y = two_clusters()
    with pytest.raises(clf.TrainingError, match="absent"):
        clf.train(x, y, TrainConfig(), n_classes=3)
    with pytest.raises(clf.TrainingError, match="diverged"):
        clf.train(x, y, TrainConfig(learning_rate=1e308), n_classes=2)
    with pytest.raises(ValueError):
        TrainConfig(validation_fraction=0.6, test_fraction=0.5)


def test_normalization_fitted_on_training_split_only():
    x, y = two_clusters(n=50)
    cfg = TrainConfig(max_epochs=5, seed=1)
    net, rep = clf.train(x, y, cfg, n_classes=2)
    tr, _, _ = clf.stratified_split(y, cfg.validation_fraction, cfg.test_fraction, cfg.seed)
    np.testing.assert_allclose(net.norm_mean, x[tr].mean(axis=0))
    # 0.15 * 50 = 7.5 rounds half-to-even to 8 per class
    assert rep.split_sizes == {"train": 68, "validation": 16, "test": 16}


def test_stratified_split_proportions():
    y = np.repeat(np.arange(5), 100)
    tr, va, te = clf.stratified_split(y, 0.15, 0.15, seed=0)
    assert len(set(tr) | set(va) | set(te)) == 500
    for c in range(5):
        assert np.sum(y[te] == c) == 15 and np.sum(y[va] == c) == 15


@pytest.fixture(scope="module")
def small_td_model():
    recs = [preprocess(r) for r in synthetic_corpus(2, 4.0, seed=5)]
    ws = labeled_windows(recs)
    x, _ = feature_matrix(ws.windows, "td")
    net, _ = clf.train(x, ws.labels, TrainConfig(max_epochs=800, seed=2))
    return net


def test_classify_stream_majority(small_td_model):
    rec = preprocess(synthesize_emg(GestureClass.ROTATE_CW, 2.0, seed=99, profile=default_profile(DEFAULT_GAIN)))
    preds = list(clf.classify_stream(small_td_model, window_stream(rec)))
    assert len(preds) == 31
    labels = [p.label for p in preds]
    assert max(set(labels), key=labels.count) == GestureClass.ROTATE_CW
    assert all(p.latency_s > 0 for p in preds)


def test_classify_stream_empty_and_mismatch(small_td_model):
    assert list(clf.classify_stream(small_td_model, [])) == []
    with pytest.raises(clf.DimensionError):
        list(clf.classify_stream(small_td_model, [], "fd"))

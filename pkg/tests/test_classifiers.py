import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from labelguard.classifiers import (
    ALL_KINDS,
    AlgorithmKind,
    C45Classifier,
    ClassifierConfig,
    GaussianNBClassifier,
    KNNClassifier,
    LDAClassifier,
    SVMClassifier,
    accuracy,
    make_classifier,
    predict,
    train,
)
from labelguard.classifiers.c45 import choose_split, entropy
from labelguard.classifiers.svm import kernel_matrix, smo
from labelguard.dataset import SampleSet
from labelguard.labels import ClassLabel


def _set(X, y):
    X = np.asarray(X, dtype=float)
    return SampleSet(X, y, [f"r{i}" for i in range(len(X))])


def _blobs(seed=0, n=50, gap=2.0):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-3, 3, size=(n, 2))
    b = rng.uniform(-3, 3, size=(n, 2))
    a[:, 0] = rng.uniform(-5, -gap / 2, n)
    b[:, 0] = rng.uniform(gap / 2, 5, n)
    return np.vstack([a, b]), np.repeat([0, 2], n)


# -- shared contract ---------------------------------------------------------

@pytest.mark.parametrize("kind", ALL_KINDS)
def test_single_class_is_degenerate(kind):
    model = train(kind, _set([[0.0, 1.0], [2.0, 3.0]], [3, 3]))
    assert predict(model, [100.0, -5.0]) is ClassLabel.RB
    assert accuracy(model, _set([[9.0, 9.0]], [3])) == 1.0


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_empty_and_dimension_errors(kind):
    with pytest.raises(ValueError):
        train(kind, SampleSet.empty(2))
    model = train(kind, _set([[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [6.0, 6.0]], [0, 0, 1, 1]))
    with pytest.raises(ValueError):
        predict(model, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        accuracy(model, SampleSet.empty(2))


@pytest.mark.parametrize("kind", [AlgorithmKind.SVM, AlgorithmKind.LDA, AlgorithmKind.NB, AlgorithmKind.C45])
def test_separable_blobs_fit_perfectly(kind):
    X, y = _blobs()
    # the generated classes are separated along x0 by a gap of at least 2
    assert X[y == 2, 0].min() - X[y == 0, 0].max() >= 2.0
    model = train(kind, _set(X, y))
    assert accuracy(model, _set(X, y)) == 1.0


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_deterministic(kind):
    rng = np.random.default_rng(9)
    X = rng.normal(size=(120, 4))
    y = rng.integers(0, 4, 120)
    Q = rng.normal(size=(40, 4))
    a = train(kind, _set(X, y)).predict(Q)
    b = train(kind, _set(X, y)).predict(Q)
    assert np.array_equal(a, b)


def test_accuracy_of_random_guesser_is_chance():
    class Guesser:
        def __init__(self):
            self.rng = np.random.default_rng(0)

        def predict(self, X):
            return self.rng.integers(0, 6, len(X))

    n = 6000
    test = _set(np.zeros((n, 1)), np.repeat(np.arange(6), n // 6))
    acc = accuracy(Guesser(), test)
    assert abs(acc - 1 / 6) < 4 * math.sqrt((1 / 6) * (5 / 6) / n)


def test_config_validation():
    with pytest.raises(ValueError):
        ClassifierConfig(svm_c=0)
    with pytest.raises(ValueError):
        ClassifierConfig(knn_k=0)
    with pytest.raises(ValueError):
        AlgorithmKind.parse("forest")
    assert AlgorithmKind.parse("c4.5") is AlgorithmKind.C45


# -- KNN ---------------------------------------------------------------------

def test_knn_nearest_example():
    model = KNNClassifier(k=1).fit([[0, 0], [10, 10]], [0, 2])
    assert predict(model, [1.0, 1.0]) is ClassLabel.N


def test_knn_k1_memorizes():
    X = np.random.default_rng(1).normal(size=(60, 3))
    y = np.arange(60) % 6
    assert accuracy(KNNClassifier(k=1).fit(X, y), _set(X, y)) == 1.0


def _knn_oracle(X, y, q, k):
    """Exhaustive search: sort every training point by (distance, row)."""
    ranked = sorted(range(len(X)), key=lambda i: (math.sqrt(sum((a - b) ** 2 for a, b in zip(X[i], q))), i))
    chosen = ranked[:k]
    votes, dist = {}, {}
    for i in chosen:
        d = math.sqrt(sum((a - b) ** 2 for a, b in zip(X[i], q)))
        votes[y[i]] = votes.get(y[i], 0) + 1
        dist[y[i]] = dist.get(y[i], 0.0) + d
    return min(votes, key=lambda c: (-votes[c], dist[c], c))


grid = st.integers(-4, 4).map(lambda v: v / 2)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 2).flatmap(lambda d: st.tuples(
    st.lists(st.tuples(*[grid] * d), min_size=1, max_size=8),
    st.lists(st.tuples(*[grid] * d), min_size=1, max_size=5))),
    st.data(), st.integers(1, 8))
def test_knn_matches_exhaustive_search(points, data, k):
    train_pts, queries = points
    y = data.draw(st.lists(st.integers(0, 5), min_size=len(train_pts), max_size=len(train_pts)))
    model = KNNClassifier(k=k).fit(train_pts, y)
    got = model.predict(np.asarray(queries, dtype=float)).tolist()
    if len(set(y)) == 1:
        assert got == [y[0]] * len(queries)
        return
    assert got == [_knn_oracle(train_pts, y, q, k) for q in queries]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(-1e3, 1e3))
def test_translation_invariance(seed, shift):
    rng = np.random.default_rng(seed)
    X = rng.integers(-8, 8, size=(30, 2)).astype(float)
    y = rng.integers(0, 3, 30)
    Q = rng.integers(-8, 8, size=(10, 2)).astype(float) + 0.25
    knn = KNNClassifier(k=3)
    assert np.array_equal(knn.fit(X, y).predict(Q), KNNClassifier(k=3).fit(X + shift, y).predict(Q + shift))
    base = SVMClassifier(C=1.0).fit(X, y)
    moved = SVMClassifier(C=1.0).fit(X + shift, y)
    dec = base.decision_function(Q)
    # only compare where no pairwise decision is within rounding distance of 0
    clear = np.all(np.abs(dec) > 1e-6, axis=1)
    assert np.array_equal(base.predict(Q)[clear], moved.predict(Q + shift)[clear])


# -- SVM ---------------------------------------------------------------------

def test_svm_two_point_hand_solution():
    # dual: max 2a - 2a^2 -> a = 1/2, w = 1, b = 0
    model = SVMClassifier(C=10.0, kernel="linear").fit([[1.0], [-1.0]], [0, 2])
    sol = model.pairs_[0].solution
    assert np.allclose(sol.alpha, [0.5, 0.5], atol=1e-12)
    assert abs(sol.bias) < 1e-12
    assert predict(model, [0.5]) is ClassLabel.N
    assert predict(model, [-0.5]) is ClassLabel.V


def _dual_objective(alpha, y, K):
    v = alpha * y
    return alpha.sum() - 0.5 * v @ K @ v


def test_smo_matches_generic_qp_solver():
    rng = np.random.default_rng(4)
    X = np.vstack([rng.normal(-1, 1, size=(15, 2)), rng.normal(1, 1, size=(15, 2))])
    y = np.repeat([1.0, -1.0], 15)
    C = 2.0
    K = kernel_matrix(X, X, "rbf", 0.5)
    sol = smo(K, y, C, tol=1e-8)
    res = minimize(lambda a: -_dual_objective(a, y, K), np.full(30, 0.1),
                   jac=lambda a: -(1 - y * (K @ (a * y))),
                   bounds=[(0, C)] * 30, constraints=[{"type": "eq", "fun": lambda a: a @ y}],
                   method="SLSQP", options={"maxiter": 500, "ftol": 1e-12})
    assert res.success
    assert _dual_objective(sol.alpha, y, K) >= _dual_objective(res.x, y, K) - 1e-6
    assert np.allclose(sol.alpha, res.x, atol=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from([0.1, 1.0, 10.0]), st.integers(2, 4))
def test_svm_dual_feasibility(seed, C, n_classes):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 3))
    y = rng.integers(0, n_classes, 40)
    if len(np.unique(y)) < 2:
        return
    model = SVMClassifier(C=C).fit(X, y)
    for pair in model.pairs_:
        a = pair.solution.alpha
        assert np.all(a >= 0) and np.all(a <= C)
        assert abs(np.sum(a * pair.solution.y)) <= 1e-6
        assert pair.solution.converged


def test_svm_ovo_tie_uses_decision_strength():
    # three classes on a line; a query between classes gets the stronger side
    X = np.array([[0.0], [0.1], [5.0], [5.1], [10.0], [10.1]])
    y = np.array([0, 0, 1, 1, 2, 2])
    model = SVMClassifier(C=10.0, kernel="linear").fit(X, y)
    assert model.predict([[0.05], [5.05], [10.05]]).tolist() == [0, 1, 2]
    assert model.summary()["support_vectors"] == len(model.support_)


# -- Naive Bayes -------------------------------------------------------------

def test_nb_prior_decides_equal_likelihoods():
    X = [[-1.0], [1.0], [-1.0], [1.0]]
    model = GaussianNBClassifier(priors={0: 0.9, 2: 0.1}).fit(X, [0, 0, 2, 2])
    assert predict(model, [0.3]) is ClassLabel.N
    flipped = GaussianNBClassifier(priors={0: 0.1, 2: 0.9}).fit(X, [0, 0, 2, 2])
    assert predict(flipped, [0.3]) is ClassLabel.V


def test_nb_matches_direct_posterior():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(30, 2))
    y = np.repeat([0, 1, 4], 10)
    m = GaussianNBClassifier().fit(X, y)
    q = np.array([0.3, -0.7])
    scores = []
    for c in (0, 1, 4):
        rows = X[y == c]
        mu, var = rows.mean(axis=0), rows.var(axis=0)
        logp = math.log(1 / 3) + sum(-0.5 * math.log(2 * math.pi * v) - (qi - u) ** 2 / (2 * v)
                                     for qi, u, v in zip(q, mu, var))
        scores.append(logp)
    assert np.allclose(m.joint_log_likelihood(q[None, :])[0], scores)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)), min_size=2, max_size=20),
       st.data())
def test_nb_log_posterior_never_nan(rows, data):
    y = data.draw(st.lists(st.integers(0, 2), min_size=len(rows), max_size=len(rows)))
    if len(set(y)) < 2:
        return
    model = GaussianNBClassifier().fit(rows, y)
    Q = np.array([[0.0, 0.0], [1e8, -1e8], rows[0]])
    assert not np.any(np.isnan(model.joint_log_likelihood(Q)))


# -- LDA ---------------------------------------------------------------------

def test_lda_two_class_direction_is_fisher():
    rng = np.random.default_rng(7)
    cov = np.array([[2.0, 0.8], [0.8, 1.0]])
    L = np.linalg.cholesky(cov)
    X = np.vstack([rng.normal(size=(200, 2)) @ L.T, rng.normal(size=(200, 2)) @ L.T + [2.0, 0.5]])
    y = np.repeat([0, 1], 200)
    m = LDAClassifier(ridge=0.0).fit(X, y)
    w = m.coef_[0] - m.coef_[1]
    # the Fisher direction maximizes the criterion: beat every other direction on a fine grid
    best = m.fisher_criterion(w, X, y, 0, 1)
    for theta in np.linspace(0, np.pi, 361):
        u = np.array([math.cos(theta), math.sin(theta)])
        assert m.fisher_criterion(u, X, y, 0, 1) <= best + 1e-9


def test_lda_handles_singular_scatter():
    X = np.array([[0.0, 1.0], [1.0, 1.0], [5.0, 1.0], [6.0, 1.0]])
    model = LDAClassifier().fit(X, [0, 0, 1, 1])
    assert model.predict([[0.5, 1.0], [5.5, 1.0]]).tolist() == [0, 1]


# -- C4.5 --------------------------------------------------------------------

def test_entropy_values():
    assert entropy([5, 5]) == pytest.approx(1.0)
    assert entropy([4, 0]) == 0.0
    assert entropy([1, 1, 2]) == pytest.approx(1.5)


def test_split_prefers_gain_ratio_among_informative_features():
    # feature 0 splits 1 vs 7 (pure on the small side), feature 1 splits 4 vs 4
    X = np.array([[0, 0], [1, 0], [1, 0], [1, 0], [1, 1], [1, 1], [1, 1], [1, 1]], dtype=float)
    y = np.array([0, 0, 0, 0, 1, 1, 1, 0])
    onehot = np.eye(2)[y]
    split = choose_split(X, onehot)

    def gain_and_ratio(col, thr):
        left = y[X[:, col] <= thr]
        right = y[X[:, col] > thr]
        h = lambda v: entropy(np.bincount(v, minlength=2)) if len(v) else 0.0
        g = h(y) - (len(left) * h(left) + len(right) * h(right)) / len(y)
        p = len(left) / len(y)
        return g, g / -(p * math.log2(p) + (1 - p) * math.log2(1 - p))

    g0, r0 = gain_and_ratio(0, 0.5)
    g1, r1 = gain_and_ratio(1, 0.5)
    assert g1 > g0
    expected = 1 if g0 < (g0 + g1) / 2 else (0 if r0 > r1 else 1)
    assert split.feature == expected
    assert split.threshold == 0.5
    assert split.gain == pytest.approx(g1 if expected == 1 else g0)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=2, max_size=40, unique=True),
       st.data())
def test_c45_fits_consistent_data(points, data):
    y = data.draw(st.lists(st.integers(0, 5), min_size=len(points), max_size=len(points)))
    X = np.asarray(points, dtype=float)
    model = C45Classifier(max_depth=None, min_samples=1).fit(X, y)
    assert np.array_equal(model.predict(X), np.asarray(y))


def test_c45_stopping_rules():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(300, 3))
    y = rng.integers(0, 3, 300)
    shallow = C45Classifier(max_depth=2, min_samples=1).fit(X, y)
    assert shallow.depth <= 2
    assert C45Classifier(max_depth=None, min_samples=1).fit(X, y).node_count > shallow.node_count


def test_make_classifier_uses_config():
    cfg = ClassifierConfig(knn_k=7, svm_c=3.0, c45_max_depth=4)
    assert make_classifier("KNN", cfg).k == 7
    assert make_classifier(AlgorithmKind.SVM, cfg).C == 3.0
    assert make_classifier("C45", cfg).max_depth == 4


def test_all_pairs_present_in_svm():
    X = np.random.default_rng(3).normal(size=(60, 2))
    y = np.arange(60) % 4
    model = SVMClassifier().fit(X, y)
    assert [(p.positive, p.negative) for p in model.pairs_] == list(itertools.combinations(range(4), 2))

"""End-to-end checks of the Python bindings against independent oracles:
scikit-learn's categorical naive Bayes for the tables and scipy's L-BFGS
for the optimizer. The heavy numerical properties are covered by the C++
suites; these tests pin the binding layer and cross-library agreement."""

import json
import math
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import minimize as scipy_minimize
from sklearn.naive_bayes import CategoricalNB

import fedbayes

DATA = Path(__file__).resolve().parents[2] / "data" / "tic_tac_toe.arff"


def random_dataset(rng, m, cards, n_classes, balanced=False):
    x = [[int(rng.integers(c)) for c in cards] for _ in range(m)]
    if balanced:
        assert m % n_classes == 0
        y = [i % n_classes for i in range(m)]
    else:
        y = [int(rng.integers(n_classes)) for _ in range(m)]
        y[:n_classes] = list(range(n_classes))  # every class present
    data = fedbayes.Dataset.from_arrays(
        feature_names=[f"f{j}" for j in range(len(cards))],
        feature_values=[[f"v{l}" for l in range(c)] for c in cards],
        class_labels=[f"c{k}" for k in range(n_classes)],
        x=x,
        y=y,
    )
    return data, np.array(x), np.array(y)


def test_endgame_file_loads_with_known_composition():
    data = fedbayes.load_data(str(DATA))
    assert data.rows == 958
    assert data.features == 9
    assert data.class_labels == ["positive", "negative"]
    labels = [data.label(i) for i in range(data.rows)]
    assert labels.count(0) == 626  # positive
    assert labels.count(1) == 332


def test_conditional_tables_match_sklearn():
    rng = np.random.default_rng(3)
    cards = [3, 2, 4]
    data, x, y = random_dataset(rng, 240, cards, 2)
    model = fedbayes.fit(data, alpha=1.0)

    clf = CategoricalNB(alpha=1.0, min_categories=np.array(cards))
    clf.fit(x, y)
    for j, card in enumerate(cards):
        for k in range(2):
            for l in range(card):
                assert model.log_cond(j, l, k) == pytest.approx(
                    clf.feature_log_prob_[j][k][l], abs=1e-12
                )


def test_posteriors_and_predictions_match_sklearn_on_balanced_data():
    # balanced classes make the smoothed and unsmoothed priors coincide,
    # so the full posterior is comparable
    rng = np.random.default_rng(4)
    cards = [3, 2, 2, 3]
    data, x, y = random_dataset(rng, 300, cards, 3, balanced=True)
    model = fedbayes.fit(data, alpha=1.0)

    clf = CategoricalNB(alpha=1.0, min_categories=np.array(cards))
    clf.fit(x, y)
    expected = clf.predict_log_proba(x)
    predictions = clf.predict(x)
    for i in range(data.rows):
        ours = model.log_posterior(data.row(i))
        assert np.allclose(ours, expected[i], atol=1e-9)
        assert model.predict(data.row(i)) == predictions[i]


def test_minimize_agrees_with_scipy_on_rosenbrock():
    def value_grad(x):
        a, b = x
        value = (1 - a) ** 2 + 100 * (b - a * a) ** 2
        grad = [-2 * (1 - a) - 400 * a * (b - a * a), 200 * (b - a * a)]
        return value, grad

    report = fedbayes.minimize(
        value_grad, [-1.2, 1.0], max_iterations=200, grad_tolerance=1e-8
    )
    reference = scipy_minimize(
        lambda x: value_grad(list(x))[0],
        [-1.2, 1.0],
        jac=lambda x: np.array(value_grad(list(x))[1]),
        method="L-BFGS-B",
    )
    assert report["termination"] == "gradient_tolerance"
    assert np.allclose(report["x"], [1.0, 1.0], atol=1e-5)
    assert np.allclose(reference.x, [1.0, 1.0], atol=1e-4)
    trace = report["trace"]
    assert all(b <= a for a, b in zip(trace, trace[1:]))


def test_cll_gradient_matches_finite_differences():
    rng = np.random.default_rng(5)
    data, _, _ = random_dataset(rng, 40, [2, 3], 2)
    model = fedbayes.fit(data, alpha=1.0)
    w = [1.0 + 0.1 * math.sin(i) for i in range(model.dim)]
    value, grad = model.cll(data, weights=w)
    h = 1e-6
    for i in [0, 3, model.dim - 1]:
        hi, lo = list(w), list(w)
        hi[i] += h
        lo[i] -= h
        fd = (model.cll(data, weights=hi)[0] - model.cll(data, weights=lo)[0]) / (
            2 * h
        )
        assert grad[i] == pytest.approx(fd, rel=1e-4, abs=1e-8)


def test_federation_is_deterministic_and_seed_sensitive():
    data = fedbayes.load_data(str(DATA))
    kwargs = dict(n_clients=3, rounds=3, opt_iters=5, seed=11)
    first = fedbayes.federate(data, **kwargs)
    second = fedbayes.federate(data, **kwargs)
    assert first["global_weights"] == second["global_weights"]
    assert [r["global_test_acc"] for r in first["rounds"]] == [
        r["global_test_acc"] for r in second["rounds"]
    ]
    other = fedbayes.federate(data, n_clients=3, rounds=3, opt_iters=5, seed=12)
    assert other["global_weights"] != first["global_weights"]


def test_federation_beats_its_own_generative_start():
    data = fedbayes.load_data(str(DATA))
    result = fedbayes.federate(data, n_clients=5, rounds=10, opt_iters=5, seed=1)
    accs = [r["global_test_acc"] for r in result["rounds"]]
    assert accs[-1] > 0.85
    assert accs[-1] > accs[0]


def test_model_json_round_trip():
    data = fedbayes.load_data(str(DATA))
    model = fedbayes.fit(data, alpha=0.5)
    back = fedbayes.Model.from_json(model.to_json(), data)
    assert back.accuracy(data) == model.accuracy(data)
    assert back.log_prior == model.log_prior


def test_partition_and_folds_cover_without_overlap():
    data = fedbayes.load_data(str(DATA))
    shards = fedbayes.partition_clients(data, 5, seed=2, min_client_size=5)
    seen = set()
    for shard in shards:
        assert not (seen & set(shard))
        seen.update(shard)
    assert len(seen) == data.rows
    folds = fedbayes.make_folds(data, shards[0], 5, seed=3)
    assert sorted(r for fold in folds for r in fold) == sorted(shards[0])


def test_run_experiment_writes_summary(tmp_path):
    config = {
        "datasets": [str(DATA)],
        "algorithms": ["nb", "fednbw"],
        "client_counts": [3],
        "folds": 3,
        "repetitions": 1,
        "master_seed": 5,
        "opt_iters": [2],
        "rounds": 2,
        "alpha": 1.0,
        "out_dir": str(tmp_path / "out"),
    }
    rows = fedbayes.run_experiment(json.dumps(config))
    models = {row["model"] for row in rows}
    assert {"nb", "fednbw_2_g", "fednbw_2_l"} <= models
    assert (tmp_path / "out" / "summary.csv").exists()
    assert (tmp_path / "out" / "records.csv").exists()
    assert (tmp_path / "out" / "traces" / "tic_tac_toe_3.csv").exists()


def test_errors_surface_as_fedbayes_error():
    data = fedbayes.load_data(str(DATA))
    with pytest.raises(fedbayes.FedbayesError):
        fedbayes.partition_clients(data, 500, seed=1, min_client_size=5)
    with pytest.raises(fedbayes.FedbayesError):
        fedbayes.load_data("/nonexistent/file.csv")

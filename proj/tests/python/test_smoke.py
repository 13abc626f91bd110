"""End-to-end smoke tests for the python bindings."""

import math

import pytest

import mvlstm


def random_window(shape, seed=0):
    import random

    rng = random.Random(seed)
    return [[rng.gauss(0, 1) for _ in range(shape.n_vars)] for _ in range(shape.window)]


def test_forward_is_deterministic_and_on_simplex():
    shape = mvlstm.CellShape(n_vars=3, per_var_dim=2, window=4)
    params = mvlstm.MvLstmParams.random(shape, 42)
    window = random_window(shape, 1)

    pred1, alpha1 = mvlstm.network_forward(params, window)
    pred2, alpha2 = mvlstm.network_forward(params, window)
    assert pred1 == pred2
    assert alpha1 == alpha2
    assert math.isfinite(pred1)
    assert all(0.0 < a < 1.0 for a in alpha1)
    assert abs(sum(alpha1) - 1.0) < 1e-12
    assert mvlstm.forward_predict(params, window) == pytest.approx(pred1, abs=1e-15)


def test_gradients_match_finite_differences():
    shape = mvlstm.CellShape(n_vars=3, per_var_dim=2, window=5)
    params = mvlstm.MvLstmParams.random(shape, 7)
    window = random_window(shape, 2)
    err = mvlstm.fd_check(params, window, target=0.25, epsilon=1e-5)
    assert err <= 1e-4


def test_shape_validation_raises():
    with pytest.raises(ValueError):
        mvlstm.CellShape(n_vars=1, per_var_dim=2, window=4)
    shape = mvlstm.CellShape(n_vars=3, per_var_dim=2, window=4)
    params = mvlstm.MvLstmParams.random(shape, 1)
    with pytest.raises(ValueError):
        mvlstm.network_forward(params, [[0.0, 0.0, 0.0]])  # wrong row count


def test_granger_separates_signal_from_noise():
    import random

    rng = random.Random(3)
    n = 600
    x = [rng.gauss(0, 1) for _ in range(n)]
    noise = [rng.gauss(0, 1) for _ in range(n)]
    y = [0.0] * n
    for t in range(1, n):
        y[t] = 0.5 * y[t - 1] + 0.8 * x[t - 1] + 0.1 * rng.gauss(0, 1)

    causal = mvlstm.granger_test(y, x, p=3, level=0.05)
    assert causal.causal
    assert causal.p_value < 0.01

    null = mvlstm.granger_test(y, noise, p=3, level=0.001)
    assert not null.causal


def test_synth_generate_and_rank():
    spec = mvlstm.ArxSpec()
    spec.n_exo = 3
    spec.exo_coef = [[0.9], [0.0], [0.3]]
    spec.self_coef = [0.3]
    spec.noise_std = 0.1
    spec.length = 400
    spec.seed = 5

    frame = mvlstm.generate(spec)
    assert frame.columns == ["x1", "x2", "x3", "y"]
    assert frame.n_rows == 400

    again = mvlstm.generate(spec)
    assert frame.values == again.values

    rank = mvlstm.ground_truth_rank(spec)
    assert [idx for idx, _ in rank] == [0, 2, 1]


def test_fit_quickly_on_a_small_series():
    spec = mvlstm.ArxSpec()
    spec.n_exo = 1
    spec.exo_coef = [[0.8]]
    spec.self_coef = [0.4]
    spec.noise_std = 0.1
    spec.length = 400
    spec.seed = 9
    frame = mvlstm.generate(spec)

    ds = mvlstm.make_windows(frame, 4, mvlstm.SplitFractions(0.7, 0.15, 0.15))
    assert ds.n_train > 0 and ds.n_val > 0 and ds.n_test > 0

    cfg = mvlstm.TrainConfig()
    cfg.window = 4
    cfg.per_var_dim = 2
    cfg.max_epochs = 15
    cfg.patience = 15
    cfg.seed = 3
    result = mvlstm.fit(ds, cfg)
    assert math.isfinite(result.test_rmse)
    assert len(result.test_alphas) == ds.n_test
    assert all(abs(sum(a) - 1.0) < 1e-12 for a in result.test_alphas)

    again = mvlstm.fit(ds, cfg)
    assert result.test_rmse == again.test_rmse
    assert result.params.to_flat() == again.params.to_flat()


def test_metrics_and_softmax():
    assert mvlstm.rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(math.sqrt(12.5))
    assert mvlstm.mae([0.0, 0.0], [3.0, 4.0]) == pytest.approx(3.5)
    out = mvlstm.softmax([0.0, 0.0, 0.0, 0.0])
    assert out == pytest.approx([0.25] * 4)


def test_model_file_round_trip(tmp_path):
    shape = mvlstm.CellShape(n_vars=2, per_var_dim=2, window=3)
    params = mvlstm.MvLstmParams.random(shape, 11)
    path = str(tmp_path / "model.mvlstm")

    stats = mvlstm.make_windows(
        mvlstm.generate(_small_spec()), 3, mvlstm.SplitFractions(0.7, 0.15, 0.15)
    ).stats
    mvlstm.save_model(path, params, stats, ["a", "y"])
    loaded_params, loaded_stats, loaded_columns = mvlstm.load_model(path)
    assert loaded_params.to_flat() == params.to_flat()
    assert loaded_columns == ["a", "y"]
    assert loaded_stats.mean == stats.mean


def _small_spec():
    spec = mvlstm.ArxSpec()
    spec.n_exo = 1
    spec.exo_coef = [[0.5]]
    spec.noise_std = 0.2
    spec.length = 120
    spec.seed = 2
    return spec

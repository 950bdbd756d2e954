import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigennet import mlp
from eigennet.eigenfaces import FeatureVector
from eigennet.errors import ContractError, DivergenceError

from oracles import (
    finite_difference_gradients,
    loop_objective,
    per_neuron_forward,
    random_batch,
    random_network,
)

XOR = mlp.Batch(
    np.array([[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]]),
    np.array([[-1.0], [1.0], [1.0], [-1.0]]),
)


def relative_errors(analytic, numeric):
    a = np.concatenate([g.ravel() for g in analytic])
    f = np.concatenate([g.ravel() for g in numeric])
    return np.abs(a - f) / np.maximum(np.maximum(np.abs(a), np.abs(f)), 1e-300)


def fixed_net(weights, biases):
    weights = [np.atleast_2d(np.asarray(w, dtype=np.float64)) for w in weights]
    biases = [np.asarray(b, dtype=np.float64) for b in biases]
    sizes = (weights[0].shape[1], *(w.shape[0] for w in weights))
    return mlp.MlpNetwork(sizes, weights, biases)


class TestTargets:
    def test_first_of_three(self):
        assert mlp.make_targets(1, 3).tolist() == [1.0, -1.0, -1.0]

    def test_last_of_forty(self):
        t = mlp.make_targets(40, 40)
        assert t[39] == 1.0
        assert np.all(t[:39] == -1.0)

    def test_column_sums(self):
        total = sum(mlp.make_targets(s, 40) for s in range(1, 41))
        assert total.tolist() == [-38.0] * 40

    @pytest.mark.parametrize("subject", [0, 4])
    def test_out_of_range(self, subject):
        with pytest.raises(ContractError):
            mlp.make_targets(subject, 3)


class TestInit:
    def test_deterministic(self):
        a, b = mlp.init_network((5, 4, 3), 11), mlp.init_network((5, 4, 3), 11)
        for wa, wb in zip(a.weights, b.weights):
            np.testing.assert_array_equal(wa, wb)

    def test_shapes_and_zero_biases(self):
        net = mlp.init_network((80, 40, 40), 0)
        assert [w.shape for w in net.weights] == [(40, 80), (40, 40)]
        assert all(np.all(b == 0) for b in net.biases)

    def test_bounds(self):
        net = mlp.init_network((16, 9, 4), 3)
        assert np.abs(net.weights[0]).max() <= 0.25
        assert np.abs(net.weights[1]).max() <= 1 / 3

    def test_mean_within_three_standard_errors(self):
        weights = mlp.init_network((100, 100), 7).weights[0].ravel()
        bound = 0.1
        standard_error = bound / math.sqrt(3) / math.sqrt(weights.size)
        assert weights.size == 10**4
        assert abs(weights.mean()) <= 3 * standard_error

    @pytest.mark.parametrize("sizes", [(3,), (3, 0, 2)])
    def test_invalid_sizes(self, sizes):
        with pytest.raises(ContractError):
            mlp.init_network(sizes, 0)


class TestForward:
    def test_zero_network(self):
        net = fixed_net([np.zeros((3, 4)), np.zeros((2, 3))], [np.zeros(3), np.zeros(2)])
        assert forward_list(net, [1.0, -2.0, 3.0, 0.5]) == [0.0, 0.0]

    def test_single_unit(self):
        net = fixed_net([[[0.7]]], [[0.0]])
        assert mlp.forward(net, [2.0])[0] == pytest.approx(math.tanh(1.4), abs=1e-15)

    def test_against_per_neuron_oracle(self, rng):
        net = random_network(rng, (6, 5, 4, 3))
        for x in rng.normal(size=(5, 6)):
            np.testing.assert_allclose(mlp.forward(net, x), per_neuron_forward(net, x), rtol=0, atol=1e-12)

    def test_batch_rows_match_single(self, rng):
        net = random_network(rng, (4, 3, 2))
        inputs = rng.normal(size=(6, 4))
        batch = mlp.forward(net, inputs)
        for row, x in zip(batch, inputs):
            np.testing.assert_allclose(row, mlp.forward(net, x), rtol=0, atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ContractError):
            mlp.forward(mlp.init_network((3, 2), 0), np.zeros(4))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.1, 3.0))
    def test_outputs_inside_open_interval(self, seed, magnitude):
        rng = np.random.default_rng(seed)
        net = random_network(rng, (4, 6, 3))
        net.weights = [w * magnitude for w in net.weights]
        out = mlp.forward(net, rng.normal(0, 3, size=(10, 4)))
        assert np.all(np.abs(out) < 1.0)


def forward_list(net, x):
    return mlp.forward(net, np.asarray(x)).tolist()


class TestMse:
    def test_equal(self):
        assert mlp.mse([1.0, -1.0], [1.0, -1.0]) == 0.0

    def test_hand_computed(self):
        assert mlp.mse([1.0, -1.0], [0.0, 0.0]) == 1.0

    def test_against_loop(self, rng):
        t, a = rng.normal(size=13), rng.normal(size=13)
        oracle = sum((ti - ai) ** 2 for ti, ai in zip(t, a)) / 13
        assert abs(mlp.mse(t, a) - oracle) <= 1e-15

    def test_length_mismatch(self):
        with pytest.raises(ContractError):
            mlp.mse([1.0], [1.0, 2.0])


class TestMsereg:
    def test_gamma_one_is_mse(self, rng):
        net = random_network(rng, (3, 4, 2))
        assert mlp.msereg(1.0, 0.123456789, net) == 0.123456789

    def test_gamma_zero_zero_weights(self):
        net = fixed_net([np.zeros((2, 3))], [np.ones(2)])
        assert mlp.msereg(0.0, 5.0, net) == 0.0

    def test_hand_computed(self):
        net = fixed_net([[[1.0, 2.0]]], [[0.0]])
        expected = 0.5 * 4 + 0.5 * (1 + 4 + 0) / 3
        assert abs(mlp.msereg(0.5, 4.0, net) - expected) <= 1e-12
        assert expected == pytest.approx(2.8333333333333335)

    def test_biases_excluded_from_penalty(self):
        a = fixed_net([[[1.0, 2.0]]], [[0.0]])
        b = fixed_net([[[1.0, 2.0]]], [[9.0]])
        assert mlp.msereg(0.3, 1.0, a) == mlp.msereg(0.3, 1.0, b)

    def test_rejects_bad_gamma(self, rng):
        with pytest.raises(ContractError):
            mlp.msereg(1.5, 1.0, random_network(rng, (2, 1)))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0, 0.999), st.floats(1.0, 3.0))
    def test_monotone_in_weight_magnitude(self, seed, gamma, growth):
        rng = np.random.default_rng(seed)
        net = random_network(rng, (3, 3, 2))
        bigger = net.copy()
        i = rng.integers(0, 3)
        bigger.weights[0][i, 0] *= growth
        assert mlp.msereg(gamma, 0.5, bigger) >= mlp.msereg(gamma, 0.5, net)

    def test_objective_matches_loop_oracle(self, rng):
        net = random_network(rng, (4, 3, 2))
        batch = random_batch(rng, (4, 3, 2), 5)
        expected = loop_objective(net, batch.inputs, batch.targets, 0.7)
        assert mlp.objective(net, batch, 0.7) == pytest.approx(expected, rel=1e-13)


class TestGradients:
    def test_penalty_only(self, rng):
        net = random_network(rng, (3, 4, 2))
        n = net.parameter_count
        for batch in (random_batch(rng, (3, 4, 2), 2), random_batch(rng, (3, 4, 2), 7)):
            weight_grads, bias_grads = mlp.gradients(net, batch, 0.0)
            for g, w in zip(weight_grads, net.weights):
                np.testing.assert_allclose(g, 2 * w / n, rtol=1e-15)
            assert all(np.all(g == 0) for g in bias_grads)

    def test_zero_error_batch(self, rng):
        net = random_network(rng, (3, 4, 2))
        inputs = rng.normal(size=(4, 3))
        batch = mlp.Batch(inputs, mlp.forward(net, inputs))
        weight_grads, bias_grads = mlp.gradients(net, batch, 1.0)
        assert all(np.all(g == 0) for g in (*weight_grads, *bias_grads))

    @pytest.mark.parametrize("sizes", [(3, 4, 2), (2, 5, 3, 1), (6, 1)])
    def test_finite_differences(self, rng, sizes):
        net = random_network(rng, sizes)
        batch = random_batch(rng, sizes, 6)
        gamma = float(rng.uniform(0, 1))
        errors = relative_errors(
            [*sum(mlp.gradients(net, batch, gamma), [])],
            [*sum(finite_difference_gradients(net, batch, gamma), [])],
        )
        assert errors.max() <= 1e-6


def _xor_config(**overrides):
    settings = dict(epochs=2000, gamma=1.0, multi_starts=1)
    settings.update(overrides)
    return mlp.TrainConfig(**settings)


class TestTrain:
    def test_xor_is_learned_by_some_seed(self):
        finals = []
        for seed in range(5):
            _, report = mlp.train(mlp.init_network((2, 4, 1), seed), XOR, _xor_config())
            finals.append(report.objective[-1])
        assert min(finals) < 1e-2

    def test_learning_rate_trace(self):
        config = _xor_config(epochs=300, gamma=0.9)
        _, report = mlp.train(mlp.init_network((2, 4, 1), 1), XOR, config)
        objectives = [report.initial_objective, *report.objective]
        rates = [report.initial_learning_rate, *report.learning_rate]
        for e in range(len(report.objective)):
            if report.rejected[e]:
                assert rates[e + 1] == rates[e] * config.lr_decrease
                assert objectives[e + 1] == objectives[e]
            elif objectives[e + 1] < objectives[e]:
                assert rates[e + 1] == rates[e] * config.lr_increase
            else:
                assert rates[e + 1] == rates[e]
        assert len(report.objective) == len(report.learning_rate) == 300

    def test_best_so_far_is_monotone(self, rng):
        batch = random_batch(rng, (5, 8, 3), 30)
        config = mlp.TrainConfig(epochs=400, initial_learning_rate=0.5, multi_starts=1)
        _, report = mlp.train(mlp.init_network((5, 8, 3), 2), batch, config)
        assert any(report.rejected)
        assert np.all(np.diff(report.best_objective) <= 0)
        assert report.best_objective[-1] == min(report.objective)

    def test_determinism(self, rng):
        batch = random_batch(rng, (4, 6, 3), 12)
        config = mlp.TrainConfig(epochs=150, multi_starts=1)
        a, _ = mlp.train(mlp.init_network((4, 6, 3), 9), batch, config)
        b, _ = mlp.train(mlp.init_network((4, 6, 3), 9), batch, config)
        for x, y in zip((*a.weights, *a.biases), (*b.weights, *b.biases)):
            assert x.tobytes() == y.tobytes()

    def test_input_network_untouched(self):
        net = mlp.init_network((2, 4, 1), 0)
        before = [w.copy() for w in net.weights]
        mlp.train(net, XOR, _xor_config(epochs=20))
        for w, b in zip(net.weights, before):
            np.testing.assert_array_equal(w, b)

    def test_divergence_reports_epoch(self):
        config = mlp.TrainConfig(epochs=50, initial_learning_rate=1e300, gamma=0.5, multi_starts=1)
        with pytest.raises(DivergenceError) as info:
            mlp.train(mlp.init_network((2, 4, 1), 0), XOR, config)
        assert info.value.epoch == 1

    def test_accepts_pair_sequence(self):
        pairs = list(zip(XOR.inputs, XOR.targets))
        _, a = mlp.train(mlp.init_network((2, 3, 1), 4), pairs, _xor_config(epochs=10))
        _, b = mlp.train(mlp.init_network((2, 3, 1), 4), XOR, _xor_config(epochs=10))
        assert a.objective == b.objective

    @pytest.mark.parametrize(
        "overrides",
        [dict(gamma=1.5), dict(momentum=1.0), dict(lr_increase=1.0), dict(lr_decrease=1.2), dict(epochs=0)],
    )
    def test_config_validation(self, overrides):
        with pytest.raises(ContractError):
            mlp.TrainConfig(**overrides)


def _overfit_task(seed=0):
    rng = np.random.default_rng(seed)
    train = mlp.Batch(rng.normal(size=(20, 10)), rng.choice([-1.0, 1.0], size=(20, 1)))
    validation = mlp.Batch(rng.normal(size=(20, 10)), rng.choice([-1.0, 1.0], size=(20, 1)))
    return train, validation


class TestEarlyStopping:
    def test_stops_on_overfit_task(self):
        train, validation = _overfit_task()
        config = mlp.TrainConfig(epochs=3000, gamma=1.0, multi_starts=1, early_stopping=mlp.EarlyStopping(100))
        net, report = mlp.train_early_stopping(mlp.init_network((10, 50, 1), 0), train, validation, config)
        assert report.stop_epoch < config.epochs
        returned = mlp.mse(validation.targets, mlp.forward(net, validation.inputs))
        assert returned <= report.validation[-1]
        assert report.stop_epoch - report.best_epoch == 100

    def test_infinite_patience_returns_best_epoch(self):
        train, validation = _overfit_task(1)
        config = mlp.TrainConfig(epochs=500, gamma=1.0, multi_starts=1, early_stopping=mlp.EarlyStopping())
        net, report = mlp.train_early_stopping(mlp.init_network((10, 50, 1), 0), train, validation, config)
        assert report.stop_epoch == 500
        returned = mlp.mse(validation.targets, mlp.forward(net, validation.inputs))
        history = [report.initial_validation, *report.validation]
        assert returned == history[report.best_epoch] == min(history)

    def test_validation_equal_training_tracks_training_error(self):
        train, _ = _overfit_task(2)
        config = mlp.TrainConfig(epochs=200, gamma=1.0, multi_starts=1, early_stopping=mlp.EarlyStopping(10))
        _, report = mlp.train_early_stopping(mlp.init_network((10, 8, 1), 0), train, train, config)
        np.testing.assert_allclose(report.validation, report.objective, rtol=1e-12)

    def test_requires_config(self):
        train, validation = _overfit_task()
        with pytest.raises(ContractError):
            mlp.train_early_stopping(mlp.init_network((10, 2, 1), 0), train, validation, mlp.TrainConfig())


class TestMultistart:
    def test_single_start_equals_train(self):
        config = _xor_config(epochs=200, seed=3)
        a, report_a = mlp.train_multistart((2, 4, 1), XOR, config)
        net = mlp.with_standardization(mlp.init_network((2, 4, 1), 3), XOR.inputs)
        b, report_b = mlp.train(net, XOR, config)
        assert report_a.objective == report_b.objective
        for x, y in zip(a.weights, b.weights):
            np.testing.assert_array_equal(x, y)

    def test_selects_minimum(self):
        _, report = mlp.train_multistart((2, 4, 1), XOR, _xor_config(epochs=200, multi_starts=4))
        assert len(report.start_objectives) == 4
        assert report.final_objective == min(report.start_objectives)
        assert report.start_objectives[report.selected_start] == report.final_objective

    @pytest.mark.slow
    def test_more_starts_succeed_at_least_as_often(self):
        xor = mlp.Batch(XOR.inputs, XOR.targets)
        single = multi = 0
        for trial in range(20):
            base = 100 * trial
            _, one = mlp.train_multistart((2, 4, 1), xor, _xor_config(epochs=2000, seed=base))
            _, five = mlp.train_multistart((2, 4, 1), xor, _xor_config(epochs=2000, seed=base, multi_starts=5))
            single += one.final_objective < 1e-2
            multi += five.final_objective < 1e-2
        assert multi >= single


class TestClassify:
    def test_argmax(self):
        net = fixed_net([np.eye(3)], [np.zeros(3)])
        probe = FeatureVector(np.arctanh(np.array([-0.9, 0.2, -0.5])))
        subject, scores = mlp.classify(net, probe)
        assert subject == 2
        np.testing.assert_allclose(scores, [-0.9, 0.2, -0.5])

    def test_tie_goes_to_lowest_index(self):
        net = fixed_net([np.zeros((3, 2))], [np.array([0.1, 0.3, 0.3])])
        assert mlp.classify(net, FeatureVector(np.zeros(2)))[0] == 2

    def test_dimension_mismatch(self):
        with pytest.raises(ContractError):
            mlp.classify(mlp.init_network((3, 2), 0), FeatureVector(np.zeros(2)))


def test_network_round_trip(tmp_path, rng):
    net = random_network(rng, (5, 4, 3))
    mlp.save_network(net, tmp_path / "n.txt", gamma=0.9)
    loaded, gamma = mlp.load_network(tmp_path / "n.txt")
    assert gamma == 0.9
    assert loaded.layer_sizes == (5, 4, 3)
    for a, b in zip((*net.weights, *net.biases, net.input_shift, net.input_scale),
                    (*loaded.weights, *loaded.biases, loaded.input_shift, loaded.input_scale)):
        np.testing.assert_array_equal(a, b)
    mlp.save_network(loaded, tmp_path / "m.txt", gamma)
    assert (tmp_path / "m.txt").read_bytes() == (tmp_path / "n.txt").read_bytes()
    lines = (tmp_path / "n.txt").read_text().splitlines()
    assert lines[0] == "mlp 1 5 4 3"
    assert len(lines) == 4 + 4 + 3 + 2

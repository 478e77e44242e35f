"""Smoke tests for the python bindings: the main operations round-trip
through numpy and a miniature end-to-end attack works."""

import numpy as np
import pytest

import zooattack as zoo


def test_tensor_numpy_round_trip():
    a = np.arange(12, dtype=np.float64).reshape(2, 3, 2)
    t = zoo.Tensor(a)
    assert t.shape == [2, 3, 2]
    np.testing.assert_array_equal(t.numpy(), a)
    buf = np.asarray(t)
    np.testing.assert_array_equal(buf, a)


def test_numerics_ops():
    t = zoo.Tensor(np.array([3.0, 4.0]))
    assert zoo.l2_norm(t) == pytest.approx(5.0)

    grid = zoo.Tensor(np.array([[0.0, 1.0], [2.0, 3.0]]).reshape(2, 2, 1))
    up = zoo.bilinear_resize(grid, 3, 3).numpy().reshape(3, 3)
    np.testing.assert_allclose(
        up, [[0.0, 0.5, 1.0], [1.0, 1.5, 2.0], [2.0, 2.5, 3.0]]
    )

    pooled = zoo.maxpool_abs(grid, 2).numpy()
    assert pooled.reshape(()) == 3.0

    clamped = zoo.project_box(zoo.Tensor(np.array([-0.2, 0.5, 1.3])), 0.0, 1.0)
    np.testing.assert_allclose(clamped.numpy(), [0.0, 0.5, 1.0])


def test_dataset_and_idx():
    data = zoo.synthetic_dataset(7, 20, 8, 2)
    assert len(data) == 20
    assert all(0 <= s.label < 2 for s in data)
    imgs = [zoo.Tensor(s.image) for s in data]
    blob = zoo.write_idx_images(imgs)
    parsed = zoo.parse_idx_images(blob)
    assert len(parsed) == 20


def train_tiny_model():
    data = zoo.synthetic_dataset(7, 300, 12, 2)
    cfg = zoo.TrainConfig()
    cfg.epochs = 4
    cfg.batch_size = 64
    cfg.learning_rate = 0.5
    cfg.seed = 1
    return zoo.train(zoo.make_mlp([12, 12, 1], [8], 2, 1), data, cfg), data


def test_train_and_oracle_counting():
    net, data = train_tiny_model()
    assert zoo.accuracy(net, data) >= 0.95

    oracle = zoo.ModelOracle(net)
    f = oracle.query(zoo.Tensor(data[0].image))
    assert oracle.total_queries == 1
    assert len(f.probs) == 2
    assert sum(f.probs) == pytest.approx(1.0, abs=1e-9)


def test_end_to_end_attack_and_ledger():
    net, data = train_tiny_model()
    oracle = zoo.ModelOracle(net)

    x0 = zoo.Tensor(data[0].image)
    cfg = zoo.SolverConfig()
    cfg.batch = 16
    cfg.max_iterations = 500
    goal = zoo.AttackGoal("untargeted", data[0].label)
    res = zoo.solve(
        x0, goal, 10.0, cfg, zoo.full_space_config([12, 12, 1]), oracle, seed=3
    )

    assert res["success"]
    assert res["estimator_queries"] == 2 * 16 * res["iterations"]
    assert res["total_queries"] == oracle.total_queries

    adv = res["adversarial_image"]
    assert adv.shape == (12, 12, 1)
    assert adv.min() >= 0.0 and adv.max() <= 1.0
    delta = adv - x0.numpy()
    assert res["l2_distortion"] == pytest.approx(np.sqrt((delta**2).sum()), rel=1e-12)

    f_adv = oracle.query(zoo.Tensor(adv))
    assert zoo.is_success(f_adv, goal)

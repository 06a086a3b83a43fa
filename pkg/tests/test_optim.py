# tests/test_optim.py
import numpy as np
import pytest

from protoverb.optim import Adam
from protoverb.utils import ShapeError


def test_first_step_moves_by_the_learning_rate():
    """Bias correction makes the first update exactly lr * sign(g)."""

    p = {"w": np.array([1.0, -2.0, 0.5])}
    opt = Adam(lr=0.1).init_moments(p)
    opt.step(p, {"w": np.array([3.0, -0.2, 40.0])})
    np.testing.assert_allclose(p["w"], [0.9, -1.9, 0.4], atol=1e-8)
    assert opt.t == 1


def test_updates_are_in_place():
    w = np.ones(3)
    opt = Adam(lr=0.01).init_moments({"w": w})
    opt.step({"w": w}, {"w": np.ones(3)})
    assert (w < 1.0).all()


def test_minimizes_a_quadratic():
    p = {"w": np.array([3.0, -4.0])}
    opt = Adam(lr=0.1).init_moments(p)
    for _ in range(500):
        opt.step(p, {"w": 2 * p["w"]})
    assert np.linalg.norm(p["w"]) < 0.1


def test_zero_learning_rate_still_tracks_moments():
    p = {"w": np.array([1.0])}
    opt = Adam(lr=0.0).init_moments(p)
    opt.step(p, {"w": np.array([2.0])})
    assert p["w"][0] == 1.0
    assert opt.m["w"][0] == pytest.approx(0.2)


def test_shape_mismatch():
    p = {"w": np.zeros((2, 2))}
    with pytest.raises(ShapeError):
        Adam().init_moments(p).step(p, {"w": np.zeros(4)})

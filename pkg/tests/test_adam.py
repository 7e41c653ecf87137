from __future__ import annotations

import numpy as np
import pytest

from minitower.errors import TrainingError
from minitower.nn import Adam, Tensor


def test_zero_gradient_is_fixed_point():
    p = Tensor(np.array([1.0, -2.0, 3.0]))
    opt = Adam({"p": p})
    for _ in range(5):
        p.zero_grad()
        opt.step(lr=0.1)
    np.testing.assert_array_equal(p.data, [1.0, -2.0, 3.0])
    assert opt.step_count == 5


def test_first_step_moves_by_minus_lr():
    # bias correction makes both moments ~g on step one, so delta ~ -lr
    p = Tensor(np.array([0.0]))
    opt = Adam({"p": p})
    p.grad[...] = 1.0
    opt.step(lr=0.01)
    assert p.data[0] == pytest.approx(-0.01, rel=1e-7)


def test_zero_lr_updates_moments_only():
    p = Tensor(np.array([5.0]))
    opt = Adam({"p": p})
    p.grad[...] = 2.0
    opt.step(lr=0.0)
    assert p.data[0] == 5.0
    assert opt.m["p"][0] == pytest.approx(0.2)
    assert opt.v["p"][0] == pytest.approx(0.004)
    assert opt.step_count == 1


def test_nan_gradient_aborts_update():
    p = Tensor(np.array([1.0]))
    opt = Adam({"p": p})
    p.grad[...] = np.nan
    with pytest.raises(TrainingError, match="p"):
        opt.step(lr=0.1)
    assert p.data[0] == 1.0
    assert opt.step_count == 0


def test_state_roundtrip():
    p = Tensor(np.array([1.0, 2.0]))
    opt = Adam({"p": p})
    p.grad[...] = [0.5, -0.5]
    opt.step(lr=0.1)
    state = {k: v.copy() for k, v in opt.state_arrays().items()}

    q = Tensor(np.array([1.0, 2.0]))
    opt2 = Adam({"p": q})
    opt2.load_state_arrays(state)
    assert opt2.step_count == 1
    np.testing.assert_array_equal(opt2.m["p"], opt.m["p"])
    np.testing.assert_array_equal(opt2.v["p"], opt.v["p"])

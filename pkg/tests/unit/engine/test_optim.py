"""Tests for update rules, the poly schedule and gradient capping."""

import numpy as np
import pytest

from asmlab.engine.optim import (
    OptimizerState,
    clip_gradients,
    global_grad_norm,
    optimizer_step,
    poly_lr,
)
from asmlab.engine.tensor import Tensor
from asmlab.exceptions import ConfigurationError, UsageError


def with_grad(values, grad):
    t = Tensor(np.array(values, dtype=float), requires_grad=True)
    t.grad = np.array(grad, dtype=float)
    return t


class TestOptimizerStep:
    """Tests for optimizer_step."""

    def test_plain_sgd(self):
        """Momentum 0 is vanilla gradient descent."""
        p = with_grad([1.0, -2.0], [2.0, 0.5])
        optimizer_step(OptimizerState("sgd-momentum", 0.1, momentum=0.0), [p], lr=0.1)
        np.testing.assert_allclose(p.values, [0.8, -2.05])

    def test_momentum_accumulates(self):
        """The second step adds momentum times the first velocity."""
        state = OptimizerState("sgd-momentum", 1.0, momentum=0.5)
        p = with_grad([0.0], [1.0])
        optimizer_step(state, [p], lr=1.0)
        p.grad = np.array([1.0])
        optimizer_step(state, [p], lr=1.0)
        np.testing.assert_allclose(p.values, [-2.5])

    def test_adam_first_step_is_sign_sized(self):
        """Bias correction makes the first Adam step lr * sign(grad)."""
        p = with_grad([1.0, 1.0], [4.0, -0.01])
        optimizer_step(OptimizerState("adam", 0.1), [p], lr=0.1)
        np.testing.assert_allclose(p.values, [0.9, 1.1], atol=1e-6)

    def test_step_clears_gradients(self):
        p = with_grad([1.0], [1.0])
        optimizer_step(OptimizerState("adam", 0.1), [p], lr=0.1)
        assert p.grad is None

    def test_decoupled_weight_decay(self):
        """Weight decay shrinks parameters before the gradient update."""
        p = with_grad([10.0], [0.0])
        state = OptimizerState("sgd-momentum", 0.1, momentum=0.0, weight_decay=0.5)
        optimizer_step(state, [p], lr=0.1)
        np.testing.assert_allclose(p.values, [9.5])

    def test_missing_gradient_rejected(self):
        """Every parameter needs a gradient."""
        p = Tensor(np.ones(2), requires_grad=True, name="w")
        with pytest.raises(UsageError) as exc_info:
            optimizer_step(OptimizerState("adam", 0.1), [p], lr=0.1)
        assert exc_info.value.context["params"] == ["w"]

    def test_changed_parameter_set_rejected(self):
        state = OptimizerState("adam", 0.1)
        optimizer_step(state, [with_grad([1.0], [1.0])], lr=0.1)
        with pytest.raises(UsageError):
            optimizer_step(state, [with_grad([1.0], [1.0]), with_grad([1.0], [1.0])], lr=0.1)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigurationError):
            OptimizerState("rmsprop", 0.1)  # type: ignore[arg-type]

    def test_momentum_range(self):
        with pytest.raises(ConfigurationError):
            OptimizerState("sgd-momentum", 0.1, momentum=1.0)


class TestPolyLr:
    """Tests for the poly learning-rate schedule."""

    def test_endpoints(self):
        assert poly_lr(0.01, 0, 100) == 0.01
        assert poly_lr(0.01, 100, 100) == 0.0

    def test_linear_power(self):
        """Power 1 decays linearly."""
        assert poly_lr(0.01, 5, 10, power=1.0) == pytest.approx(0.005)

    def test_monotone(self):
        rates = [poly_lr(1.0, i, 20) for i in range(21)]
        assert all(a >= b for a, b in zip(rates, rates[1:]))

    def test_past_max_iter_rejected(self):
        """iter > max_iter is a precondition violation."""
        with pytest.raises(UsageError):
            poly_lr(0.01, 11, 10)

    def test_zero_max_iter_rejected(self):
        with pytest.raises(UsageError):
            poly_lr(0.01, 0, 0)


class TestClipping:
    """Tests for global-norm gradient clipping."""

    def test_clip_rescales(self):
        """A 3-4-5 gradient capped at 1 keeps its direction."""
        p = with_grad([0.0, 0.0], [3.0, 4.0])
        before = clip_gradients([p], max_norm=1.0)
        assert before == pytest.approx(5.0)
        np.testing.assert_allclose(p.grad, [0.6, 0.8])

    def test_small_gradients_untouched(self):
        p = with_grad([0.0], [0.5])
        clip_gradients([p], max_norm=1.0)
        np.testing.assert_array_equal(p.grad, [0.5])

    def test_norm_spans_parameters(self):
        """The norm is global over every parameter."""
        params = [with_grad([0.0], [3.0]), with_grad([0.0], [4.0])]
        assert global_grad_norm(params) == pytest.approx(5.0)

    def test_non_positive_norm_rejected(self):
        with pytest.raises(UsageError):
            clip_gradients([with_grad([0.0], [1.0])], max_norm=0.0)

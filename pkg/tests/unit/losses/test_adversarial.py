"""Tests for the GAN objectives."""

import math

import numpy as np
import pytest

from asmlab.engine.gradcheck import grad_check
from asmlab.engine.tensor import Tensor
from asmlab.exceptions import UsageError
from asmlab.losses.adversarial import gan_losses, generator_loss
from asmlab.nets.network import build_network, forward_with_taps
from asmlab.nets.spec import discriminator_spec, load_template


class TestGanLosses:
    """Tests for gan_losses."""

    def test_zero_logits(self):
        d_loss, g_loss = gan_losses(Tensor(np.zeros(4)), Tensor(np.zeros(4)))
        assert d_loss.item() == pytest.approx(2 * math.log(2))
        assert g_loss.item() == pytest.approx(math.log(2))

    def test_perfect_discriminator(self):
        d_loss, _ = gan_losses(Tensor(np.full(2, 50.0)), Tensor(np.full(2, -50.0)))
        assert d_loss.item() < 1e-20

    def test_shape_mismatch(self):
        with pytest.raises(UsageError):
            gan_losses(Tensor(np.zeros(2)), Tensor(np.zeros(3)))

    def test_generator_gradient_through_discriminator(self):
        """Finite differences of the generator loss w.r.t. the critic's input."""
        spec = discriminator_spec(load_template("desk_analyzer", width_divisor=8), 2)
        critic = build_network(spec, seed=1)
        rng = np.random.default_rng(0)
        fake = Tensor(rng.uniform(size=(2, 2, 8, 8)), requires_grad=True, name="fake")

        def loss():
            heads, _ = forward_with_taps(critic, fake)
            return generator_loss(heads["output"])

        assert grad_check(loss, [fake, *critic.parameters()], max_samples=8).passed

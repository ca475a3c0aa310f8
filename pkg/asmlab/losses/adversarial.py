"""Non-saturating GAN objectives on raw discriminator logits."""

from asmlab.engine import ops
from asmlab.engine.tensor import Tensor
from asmlab.exceptions import UsageError

GAN_WEIGHT = 0.01


def generator_loss(d_fake: Tensor) -> Tensor:
    """mean softplus(-d_fake): the predictor wants its outputs judged real."""
    return ops.mean(ops.softplus(ops.scale(d_fake, -1.0)))


def gan_losses(d_real: Tensor, d_fake: Tensor) -> tuple[Tensor, Tensor]:
    """(d_loss, g_loss) with d_loss = mean[softplus(-d_real) + softplus(d_fake)]
    and g_loss = mean softplus(-d_fake).

    Raises:
        UsageError: If the logit tensors differ in shape
    """
    if d_real.shape != d_fake.shape:
        raise UsageError(
            "Discriminator logits differ in shape", real=d_real.shape, fake=d_fake.shape
        )
    d_loss = ops.add(
        ops.mean(ops.softplus(ops.scale(d_real, -1.0))),
        ops.mean(ops.softplus(d_fake)),
    )
    return d_loss, generator_loss(d_fake)

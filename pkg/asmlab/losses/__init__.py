"""Scalar objectives: structure matching, structure regularization, IID and GAN losses."""

from asmlab.losses.adversarial import GAN_WEIGHT, gan_losses, generator_loss
from asmlab.losses.pixelwise import iid_loss, normalized_l2, one_hot, sr_loss
from asmlab.losses.result import LossValue
from asmlab.losses.structure import asm_loss, export_loss_maps

__all__ = [
    "GAN_WEIGHT",
    "LossValue",
    "asm_loss",
    "export_loss_maps",
    "gan_losses",
    "generator_loss",
    "iid_loss",
    "normalized_l2",
    "one_hot",
    "sr_loss",
]

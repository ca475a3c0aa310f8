"""Result type shared by every objective."""

from dataclasses import dataclass, field

from asmlab.engine.tensor import Array, Tensor


@dataclass
class LossValue:
    """Scalar objective on the tape plus optional per-layer spatial loss maps.

    maps[layer] has shape N x H x W for the tapped layer's extent.
    """

    value: Tensor
    maps: dict[str, Array] = field(default_factory=dict)

    def item(self) -> float:
        return self.value.item()

    @property
    def layers(self) -> list[str]:
        return list(self.maps)

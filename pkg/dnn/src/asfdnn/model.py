"""The fully connected estimator network.

Five layers of 128, 256, 512, 1024 and 128 neurons; rectifier activations
on the four initial layers and a soft-max output, so every prediction is a
nonnegative grid density summing to one.  Trained with the l1 distance
between predicted and true grid densities.
"""

from dataclasses import dataclass, field

import torch
from torch import nn

__all__ = ["NetworkSpec", "build_network", "l1_loss", "save_model", "load_model"]


@dataclass(frozen=True)
class NetworkSpec:
    layer_widths: tuple = (128, 256, 512, 1024, 128)
    input_dim: int = 128

    def __post_init__(self):
        if len(self.layer_widths) < 2:
            raise ValueError("need at least two layers")

    @property
    def output_dim(self) -> int:
        return self.layer_widths[-1]


def build_network(spec: NetworkSpec = NetworkSpec()) -> nn.Sequential:
    layers = []
    prev = spec.input_dim
    for width in spec.layer_widths[:-1]:
        layers += [nn.Linear(prev, width), nn.ReLU()]
        prev = width
    layers += [nn.Linear(prev, spec.layer_widths[-1]), nn.Softmax(dim=-1)]
    return nn.Sequential(*layers)


def l1_loss(predicted: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean over the batch of ||gamma - gamma_hat||_1 (sum over grid cells).

    torch's |x| has zero subgradient at exact ties, which is the convention
    used here.
    """
    return (predicted - target).abs().sum(dim=-1).mean()


def save_model(model: nn.Module, spec: NetworkSpec, path, training_log=None):
    torch.save(
        {
            "state_dict": model.state_dict(),
            "layer_widths": list(spec.layer_widths),
            "input_dim": spec.input_dim,
            "training_log": training_log or [],
        },
        path,
    )


def load_model(path):
    doc = torch.load(path, map_location="cpu", weights_only=True)
    spec = NetworkSpec(
        layer_widths=tuple(doc["layer_widths"]), input_dim=doc["input_dim"]
    )
    model = build_network(spec)
    model.load_state_dict(doc["state_dict"])
    model.eval()
    return model, spec

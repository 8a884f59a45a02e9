"""Stochastic-gradient training with a held-out split and plateau decay."""

import math
from dataclasses import dataclass

import numpy as np
import torch

from .data import Dataset, encode_features
from .model import NetworkSpec, build_network, l1_loss, save_model

__all__ = ["TrainConfig", "train"]


@dataclass
class TrainConfig:
    """Plain SGD with momentum and plateau decay.

    The default learning rate reflects the soft-max + l1 pairing: gradients
    w.r.t. the output logits scale like the predicted probabilities (~1/G),
    so useful steps need a rate near G times the usual 1e-3.
    """

    epochs: int = 150
    batch_size: int = 256
    learning_rate: float = 0.5
    momentum: float = 0.9
    holdout_frac: float = 0.05
    plateau_patience: int = 8
    plateau_factor: float = 0.5
    min_lr: float = 1e-5
    seed: int = 0


def _to_tensors(dataset: Dataset, spec: NetworkSpec):
    feats = encode_features(dataset.sigma, spec.input_dim)
    x = torch.from_numpy(feats).float()
    y = torch.from_numpy(np.asarray(dataset.labels)).float()
    return x, y


def train(dataset: Dataset, spec: NetworkSpec = NetworkSpec(),
          config: TrainConfig = TrainConfig(), artifact_path=None, verbose=False):
    """Returns (model, log); log has one dict per epoch with train/val loss.

    Deterministic given config.seed up to platform numerics.  Raises on a
    non-finite loss (divergence).
    """
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    torch.manual_seed(config.seed)
    x, y = _to_tensors(dataset, spec)
    n = x.shape[0]
    if config.holdout_frac > 0 and n > 1:
        n_val = min(max(int(config.holdout_frac * n), 1), n - 1)
    else:
        n_val = 0
    perm = torch.randperm(n, generator=torch.Generator().manual_seed(config.seed))
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    x_train, y_train = x[train_idx], y[train_idx]
    x_val, y_val = x[val_idx], y[val_idx]

    model = build_network(spec)
    opt = torch.optim.SGD(model.parameters(), lr=config.learning_rate,
                          momentum=config.momentum)
    sched = torch.optim.lr_scheduler.ReduceLROnPlateau(
        opt, factor=config.plateau_factor, patience=config.plateau_patience,
        min_lr=config.min_lr)
    shuffler = torch.Generator().manual_seed(config.seed + 1)

    log = []
    for epoch in range(config.epochs):
        model.train()
        order = torch.randperm(x_train.shape[0], generator=shuffler)
        total = 0.0
        for start in range(0, x_train.shape[0], config.batch_size):
            idx = order[start : start + config.batch_size]
            opt.zero_grad()
            loss = l1_loss(model(x_train[idx]), y_train[idx])
            if not math.isfinite(loss.item()):
                raise RuntimeError(
                    f"training diverged at epoch {epoch}: loss {loss.item()}"
                )
            loss.backward()
            opt.step()
            total += loss.item() * idx.shape[0]
        train_loss = total / x_train.shape[0]
        model.eval()
        with torch.no_grad():
            val_loss = (
                l1_loss(model(x_val), y_val).item() if n_val else train_loss
            )
        sched.step(val_loss)  # falls back to train loss when no holdout
        log.append(
            {
                "epoch": epoch,
                "train_loss": train_loss,
                "val_loss": val_loss,
                "lr": opt.param_groups[0]["lr"],
            }
        )
        if verbose and (epoch % 10 == 0 or epoch == config.epochs - 1):
            print(
                f"epoch {epoch:4d}  train {train_loss:.4f}  val {val_loss:.4f}  "
                f"lr {opt.param_groups[0]['lr']:.2e}"
            )
    model.eval()
    if artifact_path is not None:
        save_model(model, spec, artifact_path, training_log=log)
    return model, log

"""Mini-batch training loop with validation-based early stopping.

Stops on whichever comes first:
  - no validation-loss improvement for `patience` epochs,
  - the overfit rule holding for `overfit_epochs` consecutive epochs
    (train loss below overfit_train_loss while validation loss sits at
    least overfit_val_gap above the best seen), or
  - max_epochs.
The returned model carries the parameters from the best-validation epoch.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .losses import LOSSES
from .model import Model
from .optim import make_optimizer


@dataclass
class TrainConfig:
    optimizer: str = "sgd_momentum"
    lr: float = 1e-3
    momentum: float = 0.9
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    batch_size: int = 16
    max_epochs: int = 1000
    patience: int = 50
    loss: str = "cross_entropy"
    overfit_train_loss: float = 0.1
    overfit_val_gap: float = 0.25
    overfit_epochs: int = 15
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass
class History:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = 0  # 1-based
    stop_reason: str = ""

    def to_dict(self) -> dict:
        return dict(train_loss=self.train_loss, val_loss=self.val_loss,
                    best_epoch=self.best_epoch, stop_reason=self.stop_reason)


class EarlyStopper:
    """Epoch-level stopping rules shared by the training loop.

    update() returns "patience", "overfit" or "" and flags whether the
    epoch improved on the best validation loss.
    """

    def __init__(self, cfg: TrainConfig):
        self.cfg = cfg
        self.best_val = np.inf
        self.best_epoch = 0
        self.epochs_since_best = 0
        self.overfit_streak = 0
        self.epoch = 0

    def update(self, train_loss: float, val_loss: float) -> tuple[str, bool]:
        self.epoch += 1
        improved = val_loss < self.best_val
        if improved:
            self.best_val = val_loss
            self.best_epoch = self.epoch
            self.epochs_since_best = 0
        else:
            self.epochs_since_best += 1
        overfit_now = (train_loss < self.cfg.overfit_train_loss
                       and val_loss >= self.best_val + self.cfg.overfit_val_gap)
        self.overfit_streak = self.overfit_streak + 1 if overfit_now else 0
        if self.epochs_since_best >= self.cfg.patience:
            return "patience", improved
        if self.overfit_streak >= self.cfg.overfit_epochs:
            return "overfit", improved
        return "", improved


def _batches(n: int, batch_size: int, rng: np.random.Generator | None):
    order = rng.permutation(n) if rng is not None else np.arange(n)
    for start in range(0, n, batch_size):
        batch = order[start:start + batch_size]
        if len(batch) == 1 and n > 1:
            continue  # batch-norm needs >= 2 samples
        yield batch


# evaluation batches stay small: conv column buffers past ~32 MB fall off
# the allocator's mmap-reuse cliff on typical glibc settings
def dataset_loss(model: Model, x: np.ndarray, y: np.ndarray, loss_kind: str,
                 batch_size: int = 64) -> float:
    loss_fn = LOSSES[loss_kind]
    total, count = 0.0, 0
    for batch in _batches(len(y), batch_size, None):
        total += loss_fn(model.forward(x[batch]), y[batch]).item() * len(batch)
        count += len(batch)
    return total / count


def train_loop(model: Model, train_set, val_set, cfg: TrainConfig) -> History:
    x_train, y_train = train_set
    x_val, y_val = val_set
    if len(y_train) == 0 or len(y_val) == 0:
        raise ValueError("train and validation sets must be nonempty")
    loss_fn = LOSSES[cfg.loss]
    opt = make_optimizer(cfg.optimizer, model.params(), cfg.lr,
                         momentum=cfg.momentum, betas=cfg.betas, eps=cfg.eps)
    seeds = np.random.SeedSequence(cfg.seed).spawn(2)
    shuffle_rng = np.random.default_rng(seeds[0])
    model.set_rng(np.random.default_rng(seeds[1]))

    history = History()
    stopper = EarlyStopper(cfg)
    best_snapshot = model.param_snapshot()

    for _ in range(cfg.max_epochs):
        model.train()
        running, seen = 0.0, 0
        for batch in _batches(len(y_train), cfg.batch_size, shuffle_rng):
            opt.zero_grad()
            loss = loss_fn(model.forward(x_train[batch]), y_train[batch])
            loss.backward()
            opt.step()
            running += loss.item() * len(batch)
            seen += len(batch)
        train_loss = running / seen

        model.eval()
        val_loss = dataset_loss(model, x_val, y_val, cfg.loss)
        history.train_loss.append(train_loss)
        history.val_loss.append(val_loss)

        verdict, improved = stopper.update(train_loss, val_loss)
        if improved:
            best_snapshot = model.param_snapshot()
            history.best_epoch = stopper.best_epoch
        if verdict:
            history.stop_reason = verdict
            break
    else:
        history.stop_reason = "max_epochs"

    model.load_param_snapshot(best_snapshot)
    model.eval()
    return history

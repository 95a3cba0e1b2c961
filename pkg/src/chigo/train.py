"""Supervised training of the policy network on chunked datasets."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import chunkstore
from .adadelta import AdadeltaState, adadelta_step
from .checkpoint import save_checkpoint
from .network import Network

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainMetrics:
    epoch: int
    loss: float
    top1_accuracy: float
    samples_seen: int

    def as_line(self) -> str:
        return (
            f"epoch={self.epoch} loss={self.loss:.6f} "
            f"accuracy={self.top1_accuracy:.6f} samples={self.samples_seen}"
        )


def evaluate(
    network: Network,
    data_dir: str | Path,
    batch_size: int = chunkstore.BATCH_SIZE,
) -> tuple[float, float]:
    """Mean cross-entropy loss and top-1 accuracy over a chunk directory."""
    total_loss = 0.0
    correct = 0
    total = 0
    for batch in chunkstore.read_batches(data_dir, batch_size):
        probs = network.forward(batch.features)
        n = len(batch)
        picks = probs[np.arange(n), batch.labels.astype(np.int64)]
        total_loss += float(-np.log(np.clip(picks, 1e-30, None)).sum())
        correct += int((probs.argmax(axis=1) == batch.labels).sum())
        total += n
    if total == 0:
        raise ValueError(f"no full batches in {data_dir}")
    return total_loss / total, correct / total


def train_supervised(
    network: Network,
    train_dir: str | Path,
    test_dir: str | Path,
    epochs: int,
    seed: int = 0,
    batch_size: int = chunkstore.BATCH_SIZE,
    out: str | Path | None = None,
    stop_accuracy: float | None = None,
    optimizer: AdadeltaState | None = None,
) -> tuple[Network, list[TrainMetrics]]:
    """Run epochs of shuffled mini-batch Adadelta updates.

    Each epoch streams read_batches(train_dir, batch_size, seed + epoch),
    then measures top-1 accuracy on test_dir; a checkpoint is written to
    ``out`` after every epoch.  ``stop_accuracy`` ends training early once
    the test accuracy reaches it.  Returns the trained network and one
    metrics record per completed epoch.
    """
    if epochs > 0:
        n_available = chunkstore.count_batched_samples(train_dir, batch_size)
        if n_available == 0:
            raise ValueError(f"no full batches in {train_dir}")
    state = optimizer if optimizer is not None else AdadeltaState()
    history: list[TrainMetrics] = []
    samples_seen = 0
    for epoch in range(epochs):
        epoch_loss = 0.0
        epoch_samples = 0
        for batch in chunkstore.read_batches(train_dir, batch_size, seed + epoch):
            loss, grads = network.loss_and_gradients(batch.features, batch.labels)
            adadelta_step(network.params, grads, state)
            epoch_loss += loss * len(batch)
            epoch_samples += len(batch)
        samples_seen += epoch_samples
        _, accuracy = evaluate(network, test_dir, batch_size)
        metrics = TrainMetrics(
            epoch=epoch,
            loss=epoch_loss / epoch_samples,
            top1_accuracy=accuracy,
            samples_seen=samples_seen,
        )
        history.append(metrics)
        logger.info("%s", metrics.as_line())
        if out is not None:
            save_checkpoint(
                out,
                network,
                meta={"epoch": epoch, "samples_seen": samples_seen},
                optimizer=state,
            )
        if stop_accuracy is not None and accuracy >= stop_accuracy:
            break
    return network, history

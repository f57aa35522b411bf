"""Calibration harness for the learnability acceptance run.

Not part of the package: explores epoch/lr settings so the acceptance
suite can pin configurations that clear the R^2 bars within budget.
"""

import dataclasses
import sys
import time

import numpy as np

from wahls.benchmark import r2
from wahls.core import TARGET_NAMES
from wahls.synth import generate_dataset
from wahls.surrogates import train
from wahls.surrogates.train import TrainConfig


def split(ds, n_train):
    return (
        dataclasses.replace(ds, samples=ds.samples[:n_train]),
        dataclasses.replace(ds, samples=ds.samples[n_train:]),
    )


def heldout_r2(model, val_ds):
    preds = model.predict_many([(s.architecture, s.hls_config) for s in val_ds])
    truth = np.array([s.targets().as_tuple() for s in val_ds])
    pred = np.array([p.as_tuple() for p in preds])
    return {t: r2(truth[:, i], pred[:, i]) for i, t in enumerate(TARGET_NAMES)}


def main():
    kind = sys.argv[1]
    epochs = int(sys.argv[2])
    lr = float(sys.argv[3]) if len(sys.argv) > 3 else 1e-3
    batch = int(sys.argv[4]) if len(sys.argv) > 4 else 256

    ds = generate_dataset(2024, 2000, {"dense": 1.0})
    train_ds, val_ds = split(ds, 1600)

    cfg = TrainConfig(
        epochs=epochs, batch_size=batch, optimizer="adamw", lr=lr,
        schedule="plateau", loss="mse", seed=0, plateau_patience=8,
    )
    start = time.time()
    model = train(kind, train_ds, val_ds, cfg)
    train_time = time.time() - start
    scores = heldout_r2(model, val_ds)
    print(f"kind={kind} epochs={epochs} lr={lr} batch={batch} time={train_time:.0f}s")
    print("  val_loss tail:", [round(v, 4) for v in model.history["val_loss"][-5:]])
    for t, v in scores.items():
        print(f"  R2[{t}] = {v:.4f}")


if __name__ == "__main__":
    main()

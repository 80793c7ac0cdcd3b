"""SGD stepping and finite-difference gradient verification."""

from __future__ import annotations

import math

import numpy as np

from .params import NNError, ParamBank

# Above this many weights the check switches to a random 1% sample.
_FULL_CHECK_LIMIT = 100_000


def sgd_step(bank: ParamBank, run, lr: float, clip: float | None = 5.0) -> float:
    """One training step: zero grads, run forward+backward, update.

    ``run`` computes the batch loss and accumulates gradients into the
    bank. The update is -lr times the (norm-clipped) analytic gradient.
    A non-finite loss aborts before touching the weights.
    """
    if lr < 0:
        raise NNError("negative learning rate")
    bank.zero_grads()
    loss = float(run())
    if not math.isfinite(loss):
        raise NNError(f"training halted: non-finite loss {loss}")
    bank.step(lr, clip)
    return loss


def gradient_check(
    bank: ParamBank,
    run,
    epsilon: float,
    rng: np.random.Generator | None = None,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``run`` recomputes the full loss from current weights and fills the
    gradients; it is invoked twice per checked coordinate. All weights are
    checked unless the bank is large, then a random 1% sample is drawn.
    Relative error uses max(|analytic|, |numeric|, 1e-6) as denominator so
    zero-gradient coordinates do not divide by zero.
    """
    if not 1e-6 <= epsilon <= 1e-3:
        raise NNError("epsilon outside [1e-6, 1e-3]")
    bank.zero_grads()
    run()
    analytic = bank.snapshot_grads()

    coords: list[tuple[str, int]] = [
        (name, i) for name, p in bank.params.items() for i in range(p.size)
    ]
    if len(coords) > _FULL_CHECK_LIMIT:
        if rng is None:
            rng = np.random.default_rng(0)
        picked = rng.choice(len(coords), size=max(1, len(coords) // 100), replace=False)
        coords = [coords[i] for i in picked]

    worst = 0.0
    for name, i in coords:
        flat = bank.params[name].reshape(-1)
        original = flat[i]
        flat[i] = original + epsilon
        bank.zero_grads()
        loss_plus = float(run())
        flat[i] = original - epsilon
        bank.zero_grads()
        loss_minus = float(run())
        flat[i] = original
        numeric = (loss_plus - loss_minus) / (2.0 * epsilon)
        a = analytic[name].reshape(-1)[i]
        rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-6)
        worst = max(worst, rel)

    # leave the bank's gradient buffers holding the analytic gradient
    for name, g in bank.grads.items():
        np.copyto(g, analytic[name])
    return worst

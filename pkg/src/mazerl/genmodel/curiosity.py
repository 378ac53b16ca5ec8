"""Intrinsic reward scores, both clamped to [0, 1].

Hidden-state curiosity is the divergence between the posterior and prior
inner-state distributions induced by the next observation; the reward for
the action at t is the information gained from the observation at t+1.
Prediction-error curiosity is the mean squared error of the decoded next
observation over all 257 scalars.
"""

from __future__ import annotations

import numpy as np

from ..diffcore import kl_np
from .forward import OBS_SCALARS, ForwardState


def curiosity_hidden(fs_next: ForwardState) -> np.ndarray:
    """Per-row clamp(KL(posterior || prior), 0, 1) from the step after the
    rewarded action."""
    return curiosity_hidden_np(
        fs_next.posterior.mean.data,
        fs_next.posterior.std.data,
        fs_next.prior.mean.data,
        fs_next.prior.std.data,
    )


def curiosity_hidden_np(mu_q, sd_q, mu_p, sd_p) -> np.ndarray:
    return np.clip(kl_np(mu_q, sd_q, mu_p, sd_p), 0.0, 1.0)


def curiosity_prediction(predicted, actual) -> float:
    """clamp(MSE over all observation scalars, 0, 1) for a single pair of
    observations (image + speed)."""
    err = float(
        ((np.asarray(predicted.image) - np.asarray(actual.image)) ** 2).sum()
        + (float(predicted.speed) - float(actual.speed)) ** 2
    )
    return float(np.clip(err / OBS_SCALARS, 0.0, 1.0))


def curiosity_prediction_np(pred_img, pred_spd, img, spd) -> np.ndarray:
    """Batched form: (N,4,8,8)/(N,1) predictions against same-shape actuals."""
    n = img.shape[0]
    err = ((pred_img - img) ** 2).reshape(n, -1).sum(axis=1)
    err += ((pred_spd - spd) ** 2).reshape(n, -1).sum(axis=1)
    return np.clip(err / OBS_SCALARS, 0.0, 1.0)

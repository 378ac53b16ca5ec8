"""Teacher-forced batch pass through the forward model.

Runs the filtering loop over every observation slot of a padded batch,
producing the free-energy loss pieces (per-cell divergence and
reconstruction error) plus detached hidden states and curiosity values
for the policy/critic stages.

Layout: time-major flattening (row t*B + b) keeps per-step slices
contiguous. Convolutional encoding and decoding run only on rows that
exist in their episode; padded rows stay zero, which is harmless because
padding is always a suffix and every loss is masked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diffcore import (
    GaussianParams,
    Tensor,
    add,
    concat,
    diag_gaussian_kl,
    mul,
    narrow0,
    reparam_sample,
    scatter_rows,
    take_rows,
    tsum,
)
from .curiosity import curiosity_prediction_np
from .forward import ForwardModel, accuracy_nll


@dataclass
class BatchView:
    """Precomputed time-major views of a padded batch."""

    b: int
    t1: int  # transition slots
    t2: int  # observation slots
    imgs_tm: np.ndarray  # (T2*B, 8, 8, 4)
    spds_tm: np.ndarray  # (T2*B, 1)
    acts_tm: np.ndarray  # (T2*B, 2)
    rewards_tm: np.ndarray  # (T1, B)
    dones_tm: np.ndarray  # (T1, B)
    masks_tm: np.ndarray  # (T1, B)
    mask_flat: np.ndarray  # (T1*B,)
    mask_total: float
    trans_idx: np.ndarray  # rows of real transition cells in [0, T1*B)
    obs_idx: np.ndarray  # rows of real observation slots in [0, T2*B)


def make_view(batch) -> BatchView:
    b, t1 = batch.rewards.shape
    t2 = t1 + 1
    imgs_tm = np.ascontiguousarray(batch.images.transpose(1, 0, 2, 3, 4)).reshape(
        t2 * b, 8, 8, 4
    )
    spds_tm = np.ascontiguousarray(batch.speeds.transpose(1, 0)).reshape(t2 * b, 1)
    acts_tm = np.ascontiguousarray(batch.actions.transpose(1, 0, 2)).reshape(t2 * b, 2)
    masks_tm = np.ascontiguousarray(batch.masks.transpose(1, 0))
    mask_flat = masks_tm.reshape(t1 * b)
    slots = np.arange(t2)[:, None]
    obs_mask = (slots <= batch.lengths[None, :]).reshape(t2 * b)
    return BatchView(
        b=b,
        t1=t1,
        t2=t2,
        imgs_tm=imgs_tm,
        spds_tm=spds_tm,
        acts_tm=acts_tm,
        rewards_tm=np.ascontiguousarray(batch.rewards.transpose(1, 0)),
        dones_tm=np.ascontiguousarray(batch.dones.transpose(1, 0)),
        masks_tm=masks_tm,
        mask_flat=mask_flat,
        mask_total=float(mask_flat.sum()),
        trans_idx=np.nonzero(mask_flat > 0)[0],
        obs_idx=np.nonzero(obs_mask)[0],
    )


@dataclass
class Unroll:
    """Everything one forward-model pass yields for a padded batch."""

    view: BatchView
    kl_cells: Tensor  # (T1*B,) divergence per transition cell, time-major
    nll_real: Tensor  # (len(trans_idx),) reconstruction error on real cells
    h_detached: np.ndarray  # (B, T2, 32) hidden states, detached
    kl_values: np.ndarray  # (B, T2) detached divergence at every slot
    curiosity_hidden: np.ndarray  # (B, T1) clamp(KL at t+1)
    curiosity_prediction: np.ndarray  # (B, T1) clamp(MSE of next-obs prediction)


def unroll(fm: ForwardModel, batch, rng: np.random.Generator, view: BatchView | None = None) -> Unroll:
    v = view if view is not None else make_view(batch)
    b, t1, t2 = v.b, v.t1, v.t2

    o_enc_real = fm.encode_obs(Tensor(v.imgs_tm[v.obs_idx]), Tensor(v.spds_tm[v.obs_idx]))
    o_enc_all = scatter_rows(o_enc_real, v.obs_idx, t2 * b)
    a_enc_all = fm.encode_action(Tensor(v.acts_tm))

    # sequential part: only the posterior -> sample -> advance path
    h = fm.zero_hidden(b)
    h_list: list[Tensor] = []
    post_mean: list[Tensor] = []
    post_std: list[Tensor] = []
    noise = rng.standard_normal((t2, b, 32))
    for t in range(t2):
        a_enc = narrow0(a_enc_all, t * b, (t + 1) * b)
        o_enc = narrow0(o_enc_all, t * b, (t + 1) * b)
        posterior = fm.posterior(h, a_enc, o_enc)
        z = reparam_sample(posterior, Tensor(noise[t]))
        h = fm.advance(h, z)
        h_list.append(h)
        post_mean.append(posterior.mean)
        post_std.append(posterior.std)

    # priors depend only on (h_{t-1}, a_enc_t): one batched pass
    h_prev_all = concat([fm.zero_hidden(b)] + h_list[:-1], axis=0)
    prior_all = fm.prior(h_prev_all, a_enc_all)
    posterior_all = GaussianParams(
        concat(post_mean, axis=0), concat(post_std, axis=0)
    )
    kl_all = diag_gaussian_kl(posterior_all, prior_all)  # (T2*B,) mean over dims
    kl_cells = narrow0(kl_all, 0, t1 * b)

    # decode o_{t+1} from (h_t, a_t) on real transition cells only
    h_dec = take_rows(concat(h_list[:t1], axis=0), v.trans_idx)
    a_enc_dec = take_rows(a_enc_all, v.trans_idx + b)
    pred_img, pred_spd = fm.decode(h_dec, a_enc_dec)
    target_img = Tensor(v.imgs_tm[v.trans_idx + b])
    target_spd = Tensor(v.spds_tm[v.trans_idx + b])
    nll_real = accuracy_nll(pred_img, pred_spd, target_img, target_spd)

    kl_values = np.ascontiguousarray(kl_all.data.reshape(t2, b).transpose(1, 0))
    h_detached = np.stack([hh.data for hh in h_list], axis=1)  # (B, T2, 32)

    cur_hidden = np.clip(kl_values[:, 1:], 0.0, 1.0)  # (B, T1)
    cur_pred_flat = np.zeros(t1 * b)
    cur_pred_flat[v.trans_idx] = curiosity_prediction_np(
        pred_img.data, pred_spd.data, target_img.data, target_spd.data
    )

    return Unroll(
        view=v,
        kl_cells=kl_cells,
        nll_real=nll_real,
        h_detached=h_detached,
        kl_values=kl_values,
        curiosity_hidden=cur_hidden,
        curiosity_prediction=np.ascontiguousarray(
            cur_pred_flat.reshape(t1, b).transpose(1, 0)
        ),
    )


def free_energy_from_unroll(u: Unroll, beta: float) -> Tensor:
    """Masked mean over real cells of beta * divergence + reconstruction
    error. The complexity term is the full factorized divergence (the
    per-dimension mean scaled back by the latent width), matching the
    summed-error accuracy term."""
    from .forward import LATENT_DIM

    kl_masked = tsum(mul(u.kl_cells, Tensor(u.view.mask_flat)))
    total = add(mul(kl_masked, beta * LATENT_DIM), tsum(u.nll_real))
    return mul(total, 1.0 / max(u.view.mask_total, 1.0))


def free_energy(fm: ForwardModel, batch, beta: float, rng: np.random.Generator) -> Tensor:
    """Scalar training loss for the forward model on one padded batch."""
    return free_energy_from_unroll(unroll(fm, batch, rng), beta)

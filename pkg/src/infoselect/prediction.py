"""Prediction-space Monte Carlo estimators and rank correlation.

These estimators work purely from posterior weight draws and the predictive
distributions they induce, never from curvature matrices, which makes them
the reference the weight-space approximations are correlated against.
Label configurations are always enumerated exactly (up to a guard), never
sampled. Entropies are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import (
    DegenerateConstantInput,
    EmptyEvalSet,
    LengthMismatch,
    TooFewSamples,
    TooManyConfigurations,
)
from .glm import CATEGORICAL, Head
from .posterior import GaussianPosterior, sample_weights

JOINT_CONFIG_BUDGET = 10**5


@dataclass(frozen=True)
class PosteriorSamples:
    """Weight draws from a posterior, one flattened vector per row."""

    weights: np.ndarray
    seed: int
    posterior: GaussianPosterior | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2:
            raise ValueError(f"weights must be 2-d, got shape {w.shape}")
        object.__setattr__(self, "weights", w)

    @property
    def n_samples(self) -> int:
        return self.weights.shape[0]


def draw_posterior_samples(
    post: GaussianPosterior, n_samples: int, seed: int
) -> PosteriorSamples:
    return PosteriorSamples(sample_weights(post, n_samples, seed), seed, post)


def _require_categorical(head: Head):
    if head.kind != CATEGORICAL:
        raise ValueError("prediction-space entropies need a categorical head")


def predictive_probs(samples: PosteriorSamples, head: Head, xs) -> np.ndarray:
    """Per-sample class probabilities, shape (n_points, n_samples, C).

    xs is an (n_points, D) array; weight rows are unflattened class-major.
    """
    _require_categorical(head)
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    c = head.num_outputs
    d = xs.shape[1]
    w = samples.weights.reshape(samples.n_samples, c, d)
    logits = np.einsum("sci,ni->nsc", w, xs)
    logits -= logits.max(axis=-1, keepdims=True)
    probs = np.exp(logits)
    probs /= probs.sum(axis=-1, keepdims=True)
    return probs


def _entropy(p: np.ndarray, axis: int = -1) -> np.ndarray:
    return -xlogy(p, p).sum(axis=axis)


def bald_mc(samples: PosteriorSamples, model_head: Head, x) -> float:
    """Disagreement between the mixture predictive and its members.

    H[mean_s pi_s] - mean_s H[pi_s], clamped to be nonnegative. Maximize.
    """
    if samples.n_samples < 2:
        raise TooFewSamples("entropy estimates need at least two samples")
    probs = predictive_probs(samples, model_head, np.atleast_2d(x))[0]
    mixture = probs.mean(axis=0)
    value = float(_entropy(mixture) - _entropy(probs, axis=-1).mean())
    return max(0.0, value)


def bald_mc_pool(samples: PosteriorSamples, model_head: Head, xs) -> np.ndarray:
    """Vectorized bald_mc over the rows of xs."""
    if samples.n_samples < 2:
        raise TooFewSamples("entropy estimates need at least two samples")
    probs = predictive_probs(samples, model_head, xs)
    mixture = probs.mean(axis=1)
    values = _entropy(mixture) - _entropy(probs).mean(axis=1)
    return np.maximum(0.0, values)


def joint_eig_exact(samples: PosteriorSamples, model_head: Head, batch_xs) -> float:
    """Joint-label disagreement over a whole batch, enumerated exactly.

    The joint predictive over C^B label configurations is the sample mean
    of the per-sample product distributions; the value is the entropy of
    that mixture minus the mean per-sample joint entropy.
    """
    if samples.n_samples < 2:
        raise TooFewSamples("entropy estimates need at least two samples")
    xs = np.atleast_2d(np.asarray(batch_xs, dtype=float))
    b = xs.shape[0]
    c = model_head.num_outputs
    if c**b > JOINT_CONFIG_BUDGET:
        raise TooManyConfigurations(
            f"C^B = {c}^{b} exceeds the {JOINT_CONFIG_BUDGET} configuration budget"
        )
    probs = predictive_probs(samples, model_head, xs)
    mixture = np.zeros(c**b)
    sample_entropy = 0.0
    for s in range(samples.n_samples):
        table = np.ones(1)
        for i in range(b):
            table = np.kron(table, probs[i, s])
        mixture += table
        sample_entropy += float(_entropy(table))
    mixture /= samples.n_samples
    return float(_entropy(mixture)) - sample_entropy / samples.n_samples


def epig_mc(samples: PosteriorSamples, model_head: Head, x_acq, eval_xs) -> float:
    """Mean pairwise label dependence between candidate and eval points.

    For each eval point, the joint over (y_eval, y_acq) is the sample mean
    of outer products of predictive vectors; the mutual information of that
    C x C table is averaged over the eval set. Maximize.
    """
    if samples.n_samples < 2:
        raise TooFewSamples("entropy estimates need at least two samples")
    eval_arr = np.atleast_2d(np.asarray(eval_xs, dtype=float))
    if eval_arr.size == 0:
        raise EmptyEvalSet("epig needs at least one eval point")
    probs_acq = predictive_probs(samples, model_head, np.atleast_2d(x_acq))[0]
    probs_eval = predictive_probs(samples, model_head, eval_arr)
    total = 0.0
    for e in range(eval_arr.shape[0]):
        joint = probs_eval[e].T @ probs_acq / samples.n_samples
        marg_eval = joint.sum(axis=1)
        marg_acq = joint.sum(axis=0)
        total += float(
            _entropy(marg_eval) + _entropy(marg_acq) - _entropy(joint.reshape(-1))
        )
    return total / eval_arr.shape[0]


def epig_mc_pool(
    samples: PosteriorSamples, model_head: Head, pool_xs, eval_xs, chunk: int = 64
) -> np.ndarray:
    """Vectorized epig_mc over a candidate pool.

    Evaluation predictives are computed once; candidates are processed in
    chunks so the (eval * C, chunk * C) joint blocks stay small.
    """
    if samples.n_samples < 2:
        raise TooFewSamples("entropy estimates need at least two samples")
    eval_arr = np.atleast_2d(np.asarray(eval_xs, dtype=float))
    if eval_arr.size == 0:
        raise EmptyEvalSet("epig needs at least one eval point")
    pool = np.atleast_2d(np.asarray(pool_xs, dtype=float))
    n, m = pool.shape[0], eval_arr.shape[0]
    s = samples.n_samples
    c = model_head.num_outputs

    probs_eval = predictive_probs(samples, model_head, eval_arr)
    # (m*C, S) layout so each chunk is a single matrix product.
    eval_flat = probs_eval.transpose(0, 2, 1).reshape(m * c, s)
    h_eval = _entropy(probs_eval.mean(axis=1))

    out = np.empty(n)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        probs_acq = predictive_probs(samples, model_head, pool[start:stop])
        bsize = stop - start
        acq_flat = probs_acq.transpose(1, 0, 2).reshape(s, bsize * c)
        # joint[(e, ce), (a, ca)] = mean_s pi_e[s, ce] * pi_a[s, ca]
        joint = (eval_flat @ acq_flat) / s
        joint = joint.reshape(m, c, bsize, c)
        h_joint = -xlogy(joint, joint).sum(axis=(1, 3))
        h_acq = _entropy(probs_acq.mean(axis=1))
        mi = h_eval[:, None] + h_acq[None, :] - h_joint
        out[start:stop] = mi.mean(axis=0)
    return out


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks starting at 1; tied values share the mean of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0])
    sorted_values = values[order]
    i = 0
    n = values.shape[0]
    while i < n:
        j = i
        while j + 1 < n and sorted_values[j + 1] == sorted_values[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(a, b) -> float:
    """Rank correlation: Pearson correlation of average ranks."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"shapes {a.shape} and {b.shape}")
    if a.shape[0] < 3:
        raise LengthMismatch("need at least three pairs")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise DegenerateConstantInput("rank correlation of a constant is undefined")
    ra = _average_ranks(a)
    rb = _average_ranks(b)
    ra -= ra.mean()
    rb -= rb.mean()
    return float((ra @ rb) / np.sqrt((ra @ ra) * (rb @ rb)))

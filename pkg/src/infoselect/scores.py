"""Weight-space score functions for candidate batches.

Every score reduces to log determinants or traces of curvature matrices
against the posterior precision P. Log-det and trace variants are returned
together as a ScorePair; the log-det never exceeds the trace for the
expected-information scores.

Orientation: the expected/joint information scores (eig, ig) and the two
gradient-norm baselines are maximization objectives. The transductive
proxies (epig, jepig, pig, jpig) measure how much the evaluation predictions
still depend on the weights after acquiring the candidates, so LOWER is
better; callers rank on the negated values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, EmptyEvalSet, EmptySampleSet
from .glm import (
    Dataset,
    GlmModel,
    fisher_batch,
    fisher_information,
    observed_information,
    score_jacobian,
)
from .linalg import PsdMatrix, _cholesky_jittered, chol_logdet
from .posterior import LOG_TWO_PI_E, GaussianPosterior


@dataclass(frozen=True)
class ScorePair:
    """Log-det and trace variants of one score, both in nats."""

    logdet: float
    trace: float


class Scorer:
    """Binds a fitted model to its posterior and caches the factorization.

    The precision Cholesky factor and log determinant are computed once at
    construction; scoring calls reuse them. Instances are immutable, so
    concurrent scoring of disjoint candidate sets needs no coordination.
    """

    def __init__(self, model: GlmModel, posterior: GaussianPosterior):
        if model.num_weights != posterior.num_weights:
            raise DimensionMismatch(
                f"model has {model.num_weights} weights, "
                f"posterior {posterior.num_weights}"
            )
        self.model = model
        self.posterior = posterior
        self._prec = posterior.precision.values
        self._prec_factor, _ = _cholesky_jittered(self._prec)
        self._prec_logdet = float(
            2.0 * np.sum(np.log(np.diagonal(self._prec_factor)))
        )

    @property
    def num_weights(self) -> int:
        return self.model.num_weights

    def solve_precision(self, b) -> np.ndarray:
        """P^-1 b through the cached factor."""
        return scipy.linalg.cho_solve((self._prec_factor, True), np.asarray(b))

    @property
    def precision_logdet(self) -> float:
        return self._prec_logdet


def _as_pairs(cands):
    """Normalize labeled candidates: a labeled Dataset or (x, y) pairs."""
    if isinstance(cands, Dataset):
        return list(zip(cands.features, cands.require_labels()))
    return [(np.asarray(x, dtype=float), y) for x, y in cands]


def _observed_sum(model: GlmModel, pairs) -> np.ndarray:
    k = model.num_weights
    total = np.zeros((k, k))
    for x, y in pairs:
        total += observed_information(model, x, y).values
    return total


def eig_score(s: Scorer, cand_xs) -> ScorePair:
    """Expected information gain of labeling the candidate batch (maximize).

    logdet = 1/2 [logdet(F + P) - logdet(P)], trace = 1/2 tr(P^-1 F), where
    F is the summed candidate Fisher information. The trace is additive over
    candidates; the log-det accounts for their redundancy.
    """
    xs = np.asarray(cand_xs, dtype=float)
    if xs.size == 0:
        return ScorePair(0.0, 0.0)
    f = fisher_batch(s.model, xs).values
    logdet = 0.5 * (chol_logdet(f + s._prec) - s.precision_logdet)
    trace = 0.5 * float(np.trace(s.solve_precision(f)))
    return ScorePair(logdet, trace)


def ig_score(s: Scorer, cands) -> ScorePair:
    """Information gain of the given labeled batch (maximize).

    Same formulas as eig_score with observed information in place of the
    Fisher; the two coincide for this model family.
    """
    pairs = _as_pairs(cands)
    if not pairs:
        return ScorePair(0.0, 0.0)
    h = _observed_sum(s.model, pairs)
    logdet = 0.5 * (chol_logdet(h + s._prec) - s.precision_logdet)
    trace = 0.5 * float(np.trace(s.solve_precision(h)))
    return ScorePair(logdet, trace)


def conditional_entropy_proxy(s: Scorer, cand_xs) -> float:
    """Negated posterior entropy after absorbing the candidate batch.

    Equals 1/2 logdet(F + P) - (k/2) log(2 pi e): eig_score.logdet shifted
    by a batch-independent constant, so argmax rankings agree. Higher means
    a tighter posterior once the batch is labeled.
    """
    xs = np.asarray(cand_xs, dtype=float)
    k = s.num_weights
    f = fisher_batch(s.model, xs).values if xs.size else np.zeros((k, k))
    return 0.5 * chol_logdet(f + s._prec) - 0.5 * k * LOG_TWO_PI_E


def _eval_fisher(s: Scorer, eval_xs, reduce: str) -> np.ndarray:
    xs = np.asarray(eval_xs, dtype=float)
    if xs.size == 0:
        raise EmptyEvalSet("transductive score needs at least one eval point")
    total = fisher_batch(s.model, xs).values
    if reduce == "mean":
        return total / xs.shape[0]
    return total


def _transductive_pair(s: Scorer, cand_term: np.ndarray, eval_term: np.ndarray) -> ScorePair:
    """Proxy MI between weights and eval predictions given the batch.

    q = cand_term + P is the posterior precision after the candidates;
    logdet = 1/2 [logdet(eval_term + q) - logdet(q)],
    trace  = 1/2 tr(q^-1 eval_term). Both shrink as the batch explains the
    evaluation directions, hence minimization.
    """
    q = cand_term + s._prec
    q_factor, _ = _cholesky_jittered(q)
    q_logdet = float(2.0 * np.sum(np.log(np.diagonal(q_factor))))
    logdet = 0.5 * (chol_logdet(eval_term + q) - q_logdet)
    trace = 0.5 * float(
        np.trace(scipy.linalg.cho_solve((q_factor, True), eval_term))
    )
    return ScorePair(logdet, trace)


def epig_score(s: Scorer, cand_xs, eval_xs) -> ScorePair:
    """Expected transductive proxy, eval Fisher averaged (minimize)."""
    eval_term = _eval_fisher(s, eval_xs, "mean")
    xs = np.asarray(cand_xs, dtype=float)
    k = s.num_weights
    cand_term = fisher_batch(s.model, xs).values if xs.size else np.zeros((k, k))
    return _transductive_pair(s, cand_term, eval_term)


def jepig_score(s: Scorer, cand_xs, eval_xs) -> ScorePair:
    """Joint transductive proxy, eval Fisher summed (minimize).

    The trace variant is exactly M times the epig trace for M eval points;
    the log-det variants genuinely differ for M >= 2.
    """
    eval_term = _eval_fisher(s, eval_xs, "sum")
    xs = np.asarray(cand_xs, dtype=float)
    k = s.num_weights
    cand_term = fisher_batch(s.model, xs).values if xs.size else np.zeros((k, k))
    return _transductive_pair(s, cand_term, eval_term)


def _observed_eval(s: Scorer, eval_pairs, reduce: str) -> np.ndarray:
    pairs = _as_pairs(eval_pairs)
    if not pairs:
        raise EmptyEvalSet("transductive score needs at least one eval point")
    total = _observed_sum(s.model, pairs)
    if reduce == "mean":
        return total / len(pairs)
    return total


def pig_score(s: Scorer, cands, eval_pairs) -> ScorePair:
    """Labeled counterpart of epig_score (minimize).

    Observed information replaces the Fisher on both sides; for this model
    family the result equals epig_score on the same inputs.
    """
    eval_term = _observed_eval(s, eval_pairs, "mean")
    cand_term = _observed_sum(s.model, _as_pairs(cands))
    return _transductive_pair(s, cand_term, eval_term)


def jpig_score(s: Scorer, cands, eval_pairs) -> ScorePair:
    """Labeled counterpart of jepig_score (minimize)."""
    eval_term = _observed_eval(s, eval_pairs, "sum")
    cand_term = _observed_sum(s.model, _as_pairs(cands))
    return _transductive_pair(s, cand_term, eval_term)


def eig_pool_scores(s: Scorer, pool_xs) -> list[ScorePair]:
    """eig_score of each pool candidate alone, sharing the cached factor."""
    out = []
    for x in np.atleast_2d(np.asarray(pool_xs, dtype=float)):
        f = fisher_information(s.model, x).values
        logdet = 0.5 * (chol_logdet(f + s._prec) - s.precision_logdet)
        trace = 0.5 * float(np.trace(s.solve_precision(f)))
        out.append(ScorePair(logdet, trace))
    return out


def _transductive_pool(s: Scorer, pool_xs, eval_term) -> list[ScorePair]:
    out = []
    for x in np.atleast_2d(np.asarray(pool_xs, dtype=float)):
        f = fisher_information(s.model, x).values
        out.append(_transductive_pair(s, f, eval_term))
    return out


def epig_pool_scores(s: Scorer, pool_xs, eval_xs) -> list[ScorePair]:
    """epig_score of each pool candidate; the eval Fisher is built once."""
    return _transductive_pool(s, pool_xs, _eval_fisher(s, eval_xs, "mean"))


def jepig_pool_scores(s: Scorer, pool_xs, eval_xs) -> list[ScorePair]:
    """jepig_score of each pool candidate; the eval Fisher is built once."""
    return _transductive_pool(s, pool_xs, _eval_fisher(s, eval_xs, "sum"))


def egl_score(s: Scorer, x) -> float:
    """Expected squared gradient norm under the predictive distribution.

    Computed by exact summation over classes (never sampled); equals the
    trace of the Fisher information at x. Maximize.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (s.model.dim,):
        raise DimensionMismatch(f"feature shape {x.shape}, expected ({s.model.dim},)")
    head = s.model.head
    if head.kind == "gaussian":
        # E[(z - y)^2] = 1 under the model, so the expectation collapses
        # to the Fisher trace ||x||^2 without any enumeration.
        return float(x @ x)
    pi = head.predictive(s.model.weights.T @ x)
    total = 0.0
    for y in range(head.num_outputs):
        j = score_jacobian(s.model, x, y)
        total += float(pi[y]) * float(j @ j)
    return total


def grand_score(s: Scorer, x, y, weight_samples) -> float:
    """Mean squared gradient norm of a labeled point over weight draws.

    weight_samples holds flattened weight vectors, one per row. Maximize.
    """
    samples = np.atleast_2d(np.asarray(weight_samples, dtype=float))
    if samples.size == 0:
        raise EmptySampleSet("need at least one weight sample")
    head = s.model.head
    total = 0.0
    for flat in samples:
        m = GlmModel.from_flat(head, s.model.dim, flat)
        j = score_jacobian(m, x, y)
        total += float(j @ j)
    return total / samples.shape[0]

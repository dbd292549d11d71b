"""Generalized linear models with exponential-family output heads.

A model maps features x in R^D to natural parameters z = W^T x in R^C and
scores a label through the head's negative log likelihood. The two heads are
a unit-variance Gaussian (C = 1) and a softmax categorical (C >= 2).

Weight vectors are flattened class-major: flat index c * D + i addresses the
weight of feature i for output c. Under this layout curvature matrices take
the Kronecker form d2A(z) (x) x x^T, where d2A is the C x C Hessian of the
head's log normalizer at the current logits. Because that curvature does not
depend on the observed label, the observed information equals the Fisher
information at the same weights for any label choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.special

from .errors import (
    DidNotConverge,
    DimensionMismatch,
    LabelOutOfRange,
    MissingLabels,
)
from .linalg import PsdMatrix, kron, solve_psd

# Predictive probabilities are clamped to this band before any log.
PROB_FLOOR = 1e-12

GAUSSIAN = "gaussian"
CATEGORICAL = "categorical"

# 0.5 * log(2 pi), the constant part of the Gaussian nll.
HALF_LOG_TWO_PI = 0.5 * float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class Dataset:
    """Feature rows with optional labels.

    features: (n, D) float array.
    labels: length-n vector or None. Integer valued for categorical heads,
        real valued for the Gaussian head; validation against a head happens
        at the point of use.
    """

    features: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        if feats.ndim != 2:
            raise DimensionMismatch(f"features must be 2-d, got shape {feats.shape}")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features must be finite")
        object.__setattr__(self, "features", feats)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
                raise DimensionMismatch(
                    f"{labels.shape} labels for {feats.shape[0]} rows"
                )
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def is_labeled(self) -> bool:
        return self.labels is not None

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise MissingLabels("dataset has no labels")
        return self.labels

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        labels = self.labels[idx] if self.labels is not None else None
        return Dataset(self.features[idx], labels)


@dataclass(frozen=True)
class Head:
    """Exponential-family output head: distribution kind plus output count."""

    kind: str
    num_outputs: int

    def __post_init__(self):
        if self.kind == GAUSSIAN:
            if self.num_outputs != 1:
                raise ValueError("gaussian head has exactly one output")
        elif self.kind == CATEGORICAL:
            if self.num_outputs < 2:
                raise ValueError("categorical head needs at least two classes")
        else:
            raise ValueError(f"unknown head kind {self.kind!r}")

    @classmethod
    def gaussian(cls) -> "Head":
        return cls(GAUSSIAN, 1)

    @classmethod
    def categorical(cls, num_classes: int) -> "Head":
        return cls(CATEGORICAL, num_classes)

    def predictive(self, logits: np.ndarray) -> np.ndarray:
        """Predictive distribution parameters at the given logits.

        Categorical: softmax probabilities clamped away from 0 and 1.
        Gaussian: the mean (the logit itself).
        """
        z = np.asarray(logits, dtype=float)
        if self.kind == GAUSSIAN:
            return z
        probs = np.exp(z - scipy.special.logsumexp(z, axis=-1, keepdims=True))
        return np.clip(probs, PROB_FLOOR, 1.0 - PROB_FLOOR)

    def curvature(self, logits: np.ndarray) -> np.ndarray:
        """C x C Hessian of the log normalizer at the given logits.

        Gaussian: [[1]]. Categorical: diag(pi) - pi pi^T.
        """
        if self.kind == GAUSSIAN:
            return np.ones((1, 1))
        pi = self.predictive(logits)
        return np.diag(pi) - np.outer(pi, pi)

    def validate_label(self, y):
        if self.kind == GAUSSIAN:
            y = float(y)
            if not np.isfinite(y):
                raise LabelOutOfRange(f"gaussian label must be finite, got {y}")
            return y
        yi = int(y)
        if yi != y or not 0 <= yi < self.num_outputs:
            raise LabelOutOfRange(
                f"label {y!r} outside [0, {self.num_outputs}) for categorical head"
            )
        return yi

    def sample_label(self, logits: np.ndarray, rng: np.random.Generator):
        """Draw one label from the predictive distribution at the logits."""
        if self.kind == GAUSSIAN:
            return float(rng.normal(loc=float(logits[0]), scale=1.0))
        return int(rng.choice(self.num_outputs, p=self._normalized(logits)))

    def _normalized(self, logits):
        pi = self.predictive(logits)
        return pi / pi.sum()


@dataclass(frozen=True)
class GlmModel:
    """Linear map into an exponential-family head.

    weights has shape (D, C); column c holds the weights of output c.
    """

    head: Head
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[1] != self.head.num_outputs:
            raise DimensionMismatch(
                f"weights shape {w.shape} does not match head with "
                f"{self.head.num_outputs} outputs"
            )
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @property
    def num_outputs(self) -> int:
        return self.head.num_outputs

    @property
    def num_weights(self) -> int:
        return self.weights.size

    def flat_weights(self) -> np.ndarray:
        """Class-major flattening: entry c * D + i is weights[i, c]."""
        return self.weights.T.reshape(-1).copy()

    @classmethod
    def from_flat(cls, head: Head, dim: int, flat: np.ndarray) -> "GlmModel":
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (dim * head.num_outputs,):
            raise DimensionMismatch(
                f"flat weight vector of shape {flat.shape} for "
                f"dim {dim} and {head.num_outputs} outputs"
            )
        return cls(head, flat.reshape(head.num_outputs, dim).T)


def _check_features(model: GlmModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise DimensionMismatch(f"feature shape {x.shape}, expected ({model.dim},)")
    return x


def logits(model: GlmModel, x) -> np.ndarray:
    """Natural parameters z = W^T x, a length-C vector."""
    x = _check_features(model, x)
    return model.weights.T @ x


def predictive(model: GlmModel, x) -> np.ndarray:
    return model.head.predictive(logits(model, x))


def nll(model: GlmModel, x, y) -> float:
    """Negative log likelihood of label y at input x.

    Categorical uses the log-sum-exp form for stability; Gaussian is
    0.5 * (y - z)^2 + 0.5 * log(2 pi) with unit variance.
    """
    z = logits(model, x)
    y = model.head.validate_label(y)
    if model.head.kind == GAUSSIAN:
        return float(0.5 * (y - z[0]) ** 2 + HALF_LOG_TWO_PI)
    return float(scipy.special.logsumexp(z) - z[y])


def score_jacobian(model: GlmModel, x, y) -> np.ndarray:
    """Gradient of the nll in the flattened weights, a length-k vector.

    Categorical block c is (pi_c - 1{c == y}) * x; Gaussian is (z - y) * x.
    """
    x = _check_features(model, x)
    z = model.weights.T @ x
    y = model.head.validate_label(y)
    if model.head.kind == GAUSSIAN:
        return (z[0] - y) * x
    resid = model.head.predictive(z).copy()
    resid[y] -= 1.0
    return np.outer(resid, x).reshape(-1)


def observed_information(model: GlmModel, x, y=None) -> PsdMatrix:
    """Hessian of the nll in the flattened weights: d2A(z) (x) x x^T.

    The label argument is accepted for signature symmetry but the result
    does not depend on it (it is validated when given).
    """
    x = _check_features(model, x)
    if y is not None:
        model.head.validate_label(y)
    lam = model.head.curvature(model.weights.T @ x)
    return PsdMatrix(kron(lam, np.outer(x, x)))


def fisher_information(model: GlmModel, x) -> PsdMatrix:
    """Label-averaged curvature at x; equals observed_information here."""
    x = _check_features(model, x)
    lam = model.head.curvature(model.weights.T @ x)
    return PsdMatrix(kron(lam, np.outer(x, x)))


def fisher_batch(model: GlmModel, xs) -> PsdMatrix:
    """Sum of per-sample Fisher information over the rows of xs."""
    xs = np.asarray(xs, dtype=float)
    k = model.num_weights
    if xs.size == 0:
        return PsdMatrix.zeros(k)
    if xs.ndim != 2 or xs.shape[1] != model.dim:
        raise DimensionMismatch(f"batch shape {xs.shape}, expected (n, {model.dim})")
    zs = xs @ model.weights
    lams = np.stack([model.head.curvature(z) for z in zs])
    total = np.einsum("ncd,ni,nj->cidj", lams, xs, xs).reshape(k, k)
    return PsdMatrix(total)


@dataclass(frozen=True)
class FitInfo:
    """Terminal diagnostics of a MAP fit."""

    grad_norm: float
    iterations: int


def _map_objective(model, data, lam):
    total = sum(nll(model, x, y) for x, y in zip(data.features, data.labels))
    return total + 0.5 * lam * float(model.flat_weights() @ model.flat_weights())


def _map_gradient(model, data, lam):
    g = lam * model.flat_weights()
    for x, y in zip(data.features, data.labels):
        g += score_jacobian(model, x, y)
    return g


def _map_curvature(model, data, lam):
    k = model.num_weights
    h = fisher_batch(model, data.features).values + lam * np.eye(k)
    return h


def map_fit(
    data: Dataset,
    head: Head,
    prior_precision: float,
    max_iters: int = 100,
    tol: float = 1e-6,
    full_output: bool = False,
):
    """Ridge-regularized maximum a posteriori fit by damped Newton steps.

    Minimizes sum_i nll(x_i, y_i) + (lam / 2) ||w||^2 from a zero start.
    Steps solve (H + mu I) d = -g with mu escalated until the objective
    decreases; the exact curvature keeps plain Newton steps effective on
    this convex objective. Converged means ||g||_inf <= tol.

    With full_output=True returns (model, FitInfo); otherwise the model.
    Raises DidNotConverge (carrying the last iterate) past max_iters.
    """
    if data.n < 1:
        raise ValueError("need at least one observation")
    if prior_precision <= 0.0:
        raise ValueError("prior precision must be positive")
    labels = data.require_labels()
    for y in labels:
        head.validate_label(y)

    lam = float(prior_precision)
    model = GlmModel(head, np.zeros((data.dim, head.num_outputs)))
    value = _map_objective(model, data, lam)
    mu = 0.0
    iterations = 0
    for _ in range(max_iters):
        grad = _map_gradient(model, data, lam)
        grad_norm = float(np.max(np.abs(grad)))
        if grad_norm <= tol:
            info = FitInfo(grad_norm=grad_norm, iterations=iterations)
            return (model, info) if full_output else model
        hess = _map_curvature(model, data, lam)
        scale = np.trace(hess) / hess.shape[0]
        for _ in range(60):
            step = solve_psd(hess + mu * np.eye(hess.shape[0]), -grad)
            trial = GlmModel.from_flat(head, data.dim, model.flat_weights() + step)
            trial_value = _map_objective(trial, data, lam)
            if trial_value <= value:
                model, value = trial, trial_value
                mu = 0.0 if mu < 1e-8 * scale else mu / 10.0
                break
            mu = 1e-6 * scale if mu == 0.0 else mu * 10.0
        else:
            raise DidNotConverge(
                "damping escalation failed to reduce the objective",
                weights=model.weights,
                grad_norm=grad_norm,
                iterations=iterations,
            )
        iterations += 1

    grad = _map_gradient(model, data, lam)
    grad_norm = float(np.max(np.abs(grad)))
    if grad_norm <= tol:
        info = FitInfo(grad_norm=grad_norm, iterations=iterations)
        return (model, info) if full_output else model
    raise DidNotConverge(
        f"gradient norm {grad_norm:.3e} above {tol:.1e} after {max_iters} iterations",
        weights=model.weights,
        grad_norm=grad_norm,
        iterations=iterations,
    )

"""Marginal-entropy test-time adaptation over random zoom-in crops.

For one test image: draw K random resized crops, take the entropy of the
mean predictive distribution across them as the loss, run a few plain
gradient-descent steps on the scorer's parameters, then predict on the
standard-preprocessed original image with the adapted parameters. The
adaptation is episodic: the caller's parameters are never mutated, and
each test point starts from scratch.

The built-in scorer is a linear-softmax model over a flattened 16x16
grayscale downsample, with closed-form gradients, so the whole loop runs
without any external framework.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from ._util import compensated_mean, compensated_sum
from .buffer import ImageBuffer, resize_to
from .errors import DataError
from .geometry import RrcParams, center_zoom, rrc_batch

TOY_FEATURE_SIDE = 16
TOY_FEATURE_DIM = TOY_FEATURE_SIDE * TOY_FEATURE_SIDE


class BatchLoss(Protocol):
    """A scalar loss over a (K, C) logit batch, with its logit gradient."""

    def value(self, logits: np.ndarray) -> float: ...

    def logits_grad(self, logits: np.ndarray) -> np.ndarray: ...


class DifferentiableScorer(Protocol):
    """Parameterised classifier contract used by the adaptation loop.

    Each scorer owns its input pipeline: ``featurize`` maps a crop to the
    feature vector its ``forward`` expects.
    """

    class_count: int

    def featurize(self, img: ImageBuffer) -> np.ndarray: ...

    def forward(self, theta: np.ndarray, features: np.ndarray) -> np.ndarray: ...

    def forward_batch(self, theta: np.ndarray, features: np.ndarray) -> np.ndarray: ...

    def loss_gradient(
        self, theta: np.ndarray, features: np.ndarray, loss: BatchLoss
    ) -> np.ndarray: ...


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    # overflow from pathological inputs surfaces as NaN and is rejected by
    # the finiteness checks downstream, so silence the intermediate warnings
    with np.errstate(over="ignore", invalid="ignore"):
        z = logits - np.max(logits, axis=1, keepdims=True)
        e = np.exp(z)
        return e / np.sum(e, axis=1, keepdims=True)


class MarginalEntropyLoss:
    """Entropy of the mean softmax distribution over the crop batch.

    Bounded by [0, ln C]; 0 * ln 0 is taken as 0. Reductions over crops and
    classes use exact compensated summation so the value is invariant under
    crop permutation.
    """

    def value(self, logits: np.ndarray) -> float:
        probs = _softmax_rows(np.asarray(logits, dtype=np.float64))
        pbar = compensated_mean(probs, axis=0)
        terms = np.where(pbar > 0.0, -pbar * np.log(np.where(pbar > 0.0, pbar, 1.0)), 0.0)
        return float(compensated_sum(terms, axis=0))

    def logits_grad(self, logits: np.ndarray) -> np.ndarray:
        probs = _softmax_rows(np.asarray(logits, dtype=np.float64))
        k = probs.shape[0]
        pbar = compensated_mean(probs, axis=0)
        # dL/dpbar_c = -(ln pbar_c + 1); cells with pbar == 0 contribute 0.
        u = np.where(pbar > 0.0, -(np.log(np.where(pbar > 0.0, pbar, 1.0)) + 1.0), 0.0)
        inner = probs @ u  # (K,)
        return (probs * (u[None, :] - inner[:, None])) / k


def marginal_entropy(
    scorer: DifferentiableScorer, theta: np.ndarray, features: np.ndarray
) -> float:
    """Loss value for a (K, D) feature batch under parameters theta."""
    return MarginalEntropyLoss().value(scorer.forward_batch(theta, features))


@dataclass(frozen=True)
class ToyLinearSoftmax:
    """Linear-softmax scorer over 16x16 grayscale features, D = 256.

    theta packs the weight matrix row-major followed by the bias:
    theta = [W.flatten() (C*D), b (C)].
    """

    class_count: int
    feature_dim: int = TOY_FEATURE_DIM

    @property
    def theta_dim(self) -> int:
        return self.class_count * self.feature_dim + self.class_count

    def init_theta(self, seed: int = 0, scale: float = 0.01) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(seed))
        return rng.normal(0.0, scale, self.theta_dim)

    def _unpack(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.theta_dim,):
            raise ValueError(f"theta must have shape ({self.theta_dim},), got {theta.shape}")
        split = self.class_count * self.feature_dim
        return theta[:split].reshape(self.class_count, self.feature_dim), theta[split:]

    def forward(self, theta: np.ndarray, features: np.ndarray) -> np.ndarray:
        w, b = self._unpack(theta)
        with np.errstate(over="ignore", invalid="ignore"):
            return w @ np.asarray(features, dtype=np.float64) + b

    def forward_batch(self, theta: np.ndarray, features: np.ndarray) -> np.ndarray:
        w, b = self._unpack(theta)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.asarray(features, dtype=np.float64) @ w.T + b

    def featurize(self, img: ImageBuffer) -> np.ndarray:
        return toy_features(img)

    def loss_gradient(
        self, theta: np.ndarray, features: np.ndarray, loss: BatchLoss
    ) -> np.ndarray:
        """Closed-form d loss / d theta via the chain rule through the logits."""
        x = np.asarray(features, dtype=np.float64)
        g = loss.logits_grad(self.forward_batch(theta, x))  # (K, C)
        # Per-crop outer products summed with compensated accumulation, so the
        # gradient is invariant under crop permutation like the loss itself.
        contributions = g[:, :, None] * x[:, None, :]  # (K, C, D)
        grad_w = compensated_sum(contributions, axis=0)
        grad_b = compensated_sum(g, axis=0)
        return np.concatenate([grad_w.reshape(-1), grad_b])


def toy_features(img: ImageBuffer) -> np.ndarray:
    """Flattened 16x16 grayscale downsample (channel mean) of a crop."""
    gray = np.mean(img.pixels, axis=2, keepdims=True)
    small = resize_to(ImageBuffer(gray), TOY_FEATURE_SIDE, TOY_FEATURE_SIDE)
    return small.pixels.reshape(-1)


@dataclass(frozen=True)
class MemoConfig:
    k: int = 16
    steps: int = 1
    lr: float = 1e-3
    seed: int = 0
    augmentation: RrcParams = field(default_factory=RrcParams)
    preprocess_scale: int = 256

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if self.lr < 0.0:
            raise ValueError(f"learning rate must be >= 0, got {self.lr}")


@dataclass(frozen=True)
class MemoResult:
    theta: np.ndarray
    baseline_class: int
    adapted_class: int
    entropy_before: float
    entropy_after: float

    def as_dict(self) -> dict:
        return {
            "baseline_class": self.baseline_class,
            "adapted_class": self.adapted_class,
            "entropy_before": self.entropy_before,
            "entropy_after": self.entropy_after,
        }


def standard_preprocess(img: ImageBuffer, scale: int = 256, crop_size: int = 224) -> ImageBuffer:
    """The classic resize-then-center-crop evaluation transform."""
    return center_zoom(img, scale, crop_size)


def memo_adapt(
    scorer: DifferentiableScorer,
    theta0: np.ndarray,
    img: ImageBuffer,
    cfg: MemoConfig,
) -> MemoResult:
    """Adapt parameters on one test image, then predict on the original.

    theta0 is copied, never mutated; adaptation state is discarded between
    test points (episodic reset).
    """
    loss = MarginalEntropyLoss()
    crops = rrc_batch(img, cfg.augmentation, cfg.seed, cfg.k)
    features = np.stack([scorer.featurize(c) for c in crops])
    theta = np.array(theta0, dtype=np.float64, copy=True)

    plain = scorer.featurize(standard_preprocess(img, cfg.preprocess_scale))
    baseline_class = int(np.argmax(scorer.forward(theta, plain)))

    entropy_before = loss.value(scorer.forward_batch(theta, features))
    if not math.isfinite(entropy_before):
        raise DataError(f"marginal entropy is not finite: {entropy_before}")
    for step in range(cfg.steps):
        grad = scorer.loss_gradient(theta, features, loss)
        if not np.all(np.isfinite(grad)):
            raise DataError(f"non-finite gradient at step {step}")
        theta = theta - cfg.lr * grad
    entropy_after = loss.value(scorer.forward_batch(theta, features))
    if not math.isfinite(entropy_after):
        raise DataError(f"marginal entropy diverged: {entropy_after}")

    adapted_class = int(np.argmax(scorer.forward(theta, plain)))
    return MemoResult(theta, baseline_class, adapted_class, entropy_before, entropy_after)

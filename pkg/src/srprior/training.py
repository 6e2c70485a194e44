"""Regularized objective, its output gradient, and the SGD training loop.

The per-patch objective is::

    E = 0.5 * ||Y_g - Y||_F**2 + alpha * smooth_rank(Y) - beta * sharpness(Y)

With ``alpha = beta = 0`` it reduces to the plain MSE objective.
"""

import csv
import io
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import network
from .exceptions import ConfigurationError, DimensionError, TrainingDivergedError
from .imaging import PatchSet, bicubic_upscale
from .metrics import psnr
from .network import ParamGrads, backward, check_spec, forward, init_params
from .priors import sharpness_and_gradient, smooth_rank_and_gradient
from .validation import check_image, check_same_shape

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HyperParams:
    delta: float = 0.01
    alpha: float = 0.1
    beta: float = 5e-5
    eta: float = 1e-4
    batch_size: int = 16
    epochs: int = 200
    seed: int = 0
    eta_last_layer_ratio: float = 0.1
    init_std: float = 0.001
    # abort when beta * sharpness exceeds this multiple of the MSE term; None disables
    sharpness_ceiling: float = 10.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ConfigurationError("delta must be positive")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigurationError("alpha and beta must be nonnegative")
        if not self.eta >= 0:
            raise ConfigurationError("eta must be nonnegative")
        if self.batch_size < 1 or self.epochs < 0:
            raise ConfigurationError("batch_size must be positive and epochs nonnegative")
        if not self.eta_last_layer_ratio > 0 or not self.init_std > 0:
            raise ConfigurationError("eta_last_layer_ratio and init_std must be positive")


@dataclass
class LossBreakdown:
    mse: float = 0.0
    rank_term: float = 0.0
    sharpness_term: float = 0.0

    @property
    def total(self):
        return self.mse + self.rank_term - self.sharpness_term


def _check_pair(y, y_g):
    y = check_image(y, "y")
    y_g = check_image(y_g, "y_g")
    check_same_shape(y, y_g, ("y", "y_g"))
    return y, y_g


def _objective(y, y_g, hp, need_grad):
    diff = y - y_g
    parts = LossBreakdown(mse=0.5 * float(np.sum(diff * diff)))
    grad = diff if need_grad else None
    if hp.alpha:
        rank, rank_grad = smooth_rank_and_gradient(y, hp.delta)
        parts.rank_term = hp.alpha * rank
        if need_grad:
            grad = grad + hp.alpha * rank_grad
    if hp.beta:
        sharp, sharp_grad = sharpness_and_gradient(y)
        parts.sharpness_term = hp.beta * sharp
        if need_grad:
            grad = grad - hp.beta * sharp_grad
    return parts, grad


def loss(y, y_g, hp):
    """Evaluate the regularized objective for one output patch.

    A prior whose weight is zero is not evaluated and contributes exactly 0.
    """
    y, y_g = _check_pair(y, y_g)
    return _objective(y, y_g, hp, need_grad=False)[0]


def loss_output_gradient(y, y_g, hp):
    """Gradient of :func:`loss` total with respect to the output ``y``.

    ``-(y_g - y) + alpha * D_rank - beta * D_sharpness``; feeding it to
    :func:`network.backward` gives the parameter gradient.
    """
    y, y_g = _check_pair(y, y_g)
    return _objective(y, y_g, hp, need_grad=True)[1]


def sgd_step(params, grads, hp):
    """Return ``params - eta * grads``; the last layer uses ``eta * eta_last_layer_ratio``."""
    if len(grads.weights) != len(params.weights):
        raise DimensionError("gradient layer count does not match parameters")
    n_layers = len(params.weights)
    weights, biases = [], []
    for l, (w, b, gw, gb) in enumerate(zip(params.weights, params.biases, grads.weights, grads.biases)):
        if gw.shape != w.shape or gb.shape != b.shape:
            raise DimensionError(f"gradient shape mismatch in layer {l}")
        rate = hp.eta * (hp.eta_last_layer_ratio if l == n_layers - 1 else 1.0)
        weights.append(w - rate * gw)
        biases.append(b - rate * gb)
    return network.NetworkParams(list(params.specs), weights, biases)


@dataclass
class EpochStats:
    epoch: int
    mse: float
    rank_term: float
    sharpness_term: float
    total: float
    val_psnr: float
    seconds: float


REPORT_COLUMNS = [f.name for f in fields(EpochStats)]


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)
    checkpoint_path: str = None

    def to_csv(self, path=None, include_timing=True):
        """Write one row per epoch; returns the CSV text when ``path`` is None."""
        cols = REPORT_COLUMNS if include_timing else REPORT_COLUMNS[:-1]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in self.epochs:
            d = asdict(row)
            writer.writerow([repr(d[c]) if isinstance(d[c], float) else d[c] for c in cols])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        return path


def subsample_pairs(pairs, fraction, seed=0):
    """Deterministic subset holding ``ceil(fraction * len(pairs))`` pairs.

    Subsets for increasing fractions under one seed are nested.
    """
    if not 0 < fraction <= 1:
        raise ConfigurationError(f"fraction must be in (0, 1], got {fraction}")
    n = len(pairs)
    order = np.random.default_rng((seed, 2)).permutation(n)
    keep = sorted(order[: max(1, math.ceil(fraction * n))].tolist())
    return pairs.subset(keep)


def evaluate_pairs(params, pairs):
    """Mean PSNR of network outputs against targets."""
    if not len(pairs):
        return math.nan
    return float(np.mean([psnr(forward(x, params).output, t) for x, t in zip(pairs.inputs, pairs.targets)]))


def train(pairs, spec, hp, priors=True, val_pairs=None, callback=None):
    """Fit network parameters by mini-batch SGD on the regularized objective.

    Parameters
    ----------
    pairs : PatchSet
        Training (input, target) patches.
    spec : list of LayerSpec
    hp : HyperParams
    priors : bool
        When False, the output gradient is the plain residual ``Y - Y_g`` and
        no prior is evaluated, whatever ``alpha`` and ``beta`` are.
    val_pairs : PatchSet, optional
        Patches scored after each epoch; ``val_psnr`` is NaN without them.
    callback : callable, optional
        Called as ``callback(epoch_stats, params)`` after every epoch.

    Returns
    -------
    params : NetworkParams
    report : TrainReport
    """
    if not isinstance(pairs, PatchSet) or len(pairs) == 0:
        raise ConfigurationError("training needs a non-empty PatchSet")
    spec = check_spec(spec)
    params = init_params(spec, hp.seed, std=hp.init_std)
    objective_hp = hp if priors else HyperParams(**{**asdict(hp), "alpha": 0.0, "beta": 0.0})
    rng = np.random.default_rng((hp.seed, 1))
    report = TrainReport()
    n = len(pairs)

    for epoch in range(1, hp.epochs + 1):
        started = time.perf_counter()
        order = rng.permutation(n)
        sums = np.zeros(3)
        for start in range(0, n, hp.batch_size):
            batch = order[start:start + hp.batch_size]
            gw = [np.zeros_like(w) for w in params.weights]
            gb = [np.zeros_like(b) for b in params.biases]
            batch_sums = np.zeros(3)
            for idx in batch:
                trace = forward(pairs.inputs[idx], params)
                parts, out_grad = _objective(trace.output, pairs.targets[idx], objective_hp, True)
                batch_sums += (parts.mse, parts.rank_term, parts.sharpness_term)
                grads = backward(trace, params, out_grad)
                for l in range(len(gw)):
                    gw[l] += grads.weights[l]
                    gb[l] += grads.biases[l]
            m = len(batch)
            mse, rank_term, sharp_term = batch_sums / m
            total = mse + rank_term - sharp_term
            if not math.isfinite(total):
                raise TrainingDivergedError(epoch, "non-finite loss")
            if (
                hp.sharpness_ceiling is not None
                and sharp_term > hp.sharpness_ceiling * mse
            ):
                raise TrainingDivergedError(
                    epoch, f"sharpness term {sharp_term:.3g} exceeded {hp.sharpness_ceiling}x MSE"
                )
            params = sgd_step(
                params, ParamGrads([g / m for g in gw], [g / m for g in gb]), hp
            )
            sums += batch_sums
        mse, rank_term, sharp_term = sums / n
        stats = EpochStats(
            epoch=epoch,
            mse=float(mse),
            rank_term=float(rank_term),
            sharpness_term=float(sharp_term),
            total=float(mse + rank_term - sharp_term),
            val_psnr=evaluate_pairs(params, val_pairs) if val_pairs is not None else math.nan,
            seconds=time.perf_counter() - started,
        )
        report.epochs.append(stats)
        logger.info(
            "epoch %d: mse=%.6g rank=%.6g sharp=%.6g total=%.6g val_psnr=%.3f",
            epoch, stats.mse, stats.rank_term, stats.sharpness_term, stats.total, stats.val_psnr,
        )
        if callback is not None:
            callback(stats, params)
    return params, report


def infer(x, params, s):
    """Bicubic-upscale a low-resolution image by ``s`` and run the network."""
    x_s = bicubic_upscale(check_image(x, "x"), s)
    return forward(x_s, params).output

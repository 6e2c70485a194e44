"""scikit-learn style wrapper around the training loop."""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigurationError
from .imaging import DegradationSpec, make_training_pairs, modcrop
from .metrics import psnr
from .network import get_profile
from .training import HyperParams, subsample_pairs, train, infer
from .validation import check_image, check_image_list


class SuperResolver(BaseEstimator, RegressorMixin):
    """Patch-trained super-resolution network with optional structural priors.

    ``fit`` takes high-resolution images only; the low-resolution inputs are
    simulated with the configured blur and scale. ``predict`` takes
    low-resolution images and returns images ``scale`` times larger.

    Parameters
    ----------
    profile : str
        Network profile name, ``"915"`` or ``"tiny"``.
    alpha, beta, delta : float
        Rank weight, sharpness weight and rank scale.
    priors : bool
        Set False to train on the plain MSE objective.
    eta, eta_last_layer_ratio, batch_size, epochs, init_std : SGD settings.
    blur_sigma : float
    scale : int
    patch, stride : int
        Training patch size and extraction stride on the upscaled grid.
    fraction : float
        Fraction of extracted pairs kept for training.
    sharpness_ceiling : float or None
    random_state : int

    Attributes
    ----------
    params_ : NetworkParams
    report_ : TrainReport
    n_pairs_ : int
    """

    def __init__(
        self,
        profile="915",
        alpha=0.1,
        beta=5e-5,
        delta=0.01,
        priors=True,
        eta=1e-4,
        eta_last_layer_ratio=0.1,
        batch_size=16,
        epochs=200,
        init_std=0.001,
        blur_sigma=1.0,
        scale=2,
        patch=40,
        stride=20,
        fraction=1.0,
        sharpness_ceiling=10.0,
        random_state=0,
    ):
        self.profile = profile
        self.alpha = alpha
        self.beta = beta
        self.delta = delta
        self.priors = priors
        self.eta = eta
        self.eta_last_layer_ratio = eta_last_layer_ratio
        self.batch_size = batch_size
        self.epochs = epochs
        self.init_std = init_std
        self.blur_sigma = blur_sigma
        self.scale = scale
        self.patch = patch
        self.stride = stride
        self.fraction = fraction
        self.sharpness_ceiling = sharpness_ceiling
        self.random_state = random_state

    def _hyperparams(self):
        return HyperParams(
            delta=self.delta,
            alpha=self.alpha,
            beta=self.beta,
            eta=self.eta,
            batch_size=self.batch_size,
            epochs=self.epochs,
            seed=self.random_state,
            eta_last_layer_ratio=self.eta_last_layer_ratio,
            init_std=self.init_std,
            sharpness_ceiling=self.sharpness_ceiling,
        )

    def fit(self, X, y=None):
        """Train on high-resolution images ``X`` (a list or a 3-D stack)."""
        images = check_image_list(X, "X")
        spec = DegradationSpec(self.blur_sigma, self.scale)
        hp = self._hyperparams()
        pairs = make_training_pairs(images, spec, self.patch, self.stride)
        if not len(pairs):
            raise ConfigurationError("no training patches; images smaller than patch size?")
        if self.fraction < 1:
            pairs = subsample_pairs(pairs, self.fraction, self.random_state)
        self.params_, self.report_ = train(pairs, get_profile(self.profile), hp, priors=self.priors)
        self.n_pairs_ = len(pairs)
        return self

    def predict(self, X):
        """Super-resolve low-resolution images; returns a list of arrays."""
        check_is_fitted(self, "params_")
        return [infer(x, self.params_, self.scale) for x in check_image_list(X, "X")]

    def score(self, X, y):
        """Mean PSNR of ``predict(X)`` against high-resolution ``y``."""
        preds = self.predict(X)
        targets = [modcrop(check_image(t, "y"), self.scale) for t in check_image_list(y, "y")]
        if len(preds) != len(targets):
            raise ConfigurationError("X and y hold different numbers of images")
        return float(np.mean([psnr(p, t) for p, t in zip(preds, targets)]))

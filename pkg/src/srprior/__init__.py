"""Super-resolution CNN trained with low-rank and sharpness output priors."""

from .estimator import SuperResolver
from .exceptions import (
    ConfigurationError,
    ConvergenceError,
    DimensionError,
    FormatError,
    NumericError,
    SRPriorError,
    TrainingDivergedError,
)
from .imaging import DegradationSpec, degrade, make_training_pairs, read_pgm, synth_phantom, write_pgm
from .linalg import conv2d_backward, conv2d_same, svd
from .metrics import psnr, ssim
from .network import LayerSpec, NetworkParams, get_profile, load_params, save_params
from .priors import sharpness, sharpness_gradient, smooth_rank, smooth_rank_gradient
from .training import HyperParams, infer, loss, loss_output_gradient, train

__version__ = "0.1.0"

__all__ = [
    "SuperResolver", "SRPriorError", "ConfigurationError", "ConvergenceError", "DimensionError",
    "FormatError", "NumericError", "TrainingDivergedError", "DegradationSpec", "degrade",
    "make_training_pairs", "read_pgm", "synth_phantom", "write_pgm", "conv2d_backward",
    "conv2d_same", "svd", "psnr", "ssim", "LayerSpec", "NetworkParams", "get_profile",
    "load_params", "save_params", "sharpness", "sharpness_gradient", "smooth_rank",
    "smooth_rank_gradient", "HyperParams", "infer", "loss", "loss_output_gradient", "train",
]

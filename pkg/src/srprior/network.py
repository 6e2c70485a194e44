"""Three-layer convolutional super-resolution network with manual backprop.

The architecture is data-driven from a list of :class:`LayerSpec`; the
default profile is 64 filters of 9x9, 32 filters of 1x1, and a single 5x5
reconstruction filter, with ReLU after every layer except the last.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError, DimensionError, FormatError
from .linalg import _conv_backward, _conv_forward
from .validation import check_image

ACTIVATIONS = ("relu", "none")


@dataclass(frozen=True)
class LayerSpec:
    kernel_height: int
    kernel_width: int
    input_depth: int
    kernel_count: int
    activation: str = "relu"

    def __post_init__(self):
        counts = (self.kernel_height, self.kernel_width, self.input_depth, self.kernel_count)
        if min(counts) < 1:
            raise ConfigurationError(f"layer counts must be positive, got {counts}")
        if self.kernel_height % 2 == 0 or self.kernel_width % 2 == 0:
            raise ConfigurationError("kernel sizes must be odd for same-size convolution")
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f"unknown activation {self.activation!r}")

    @property
    def weight_shape(self):
        return (self.kernel_count, self.input_depth, self.kernel_height, self.kernel_width)


PROFILES = {
    "915": (
        LayerSpec(9, 9, 1, 64, "relu"),
        LayerSpec(1, 1, 64, 32, "relu"),
        LayerSpec(5, 5, 32, 1, "none"),
    ),
    "tiny": (
        LayerSpec(3, 3, 1, 4, "relu"),
        LayerSpec(1, 1, 4, 4, "relu"),
        LayerSpec(3, 3, 4, 1, "none"),
    ),
}


def get_profile(name):
    try:
        return list(PROFILES[name])
    except KeyError:
        raise ConfigurationError(
            f"unknown network profile {name!r}; choose from {sorted(PROFILES)}"
        ) from None


def check_spec(spec):
    spec = list(spec)
    if not spec:
        raise ConfigurationError("network needs at least one layer")
    if spec[0].input_depth != 1:
        raise ConfigurationError("first layer must take a single-channel image")
    if spec[-1].kernel_count != 1:
        raise ConfigurationError("last layer must produce a single channel")
    if spec[-1].activation != "none":
        raise ConfigurationError("last layer must not have an activation")
    for prev, nxt in zip(spec, spec[1:]):
        if nxt.input_depth != prev.kernel_count:
            raise ConfigurationError(
                f"layer input depth {nxt.input_depth} does not match "
                f"previous kernel count {prev.kernel_count}"
            )
    return spec


@dataclass
class NetworkParams:
    """Filters and biases for every layer, aligned with ``specs``."""

    specs: list
    weights: list
    biases: list

    def __post_init__(self):
        self.specs = check_spec(self.specs)
        if len(self.weights) != len(self.specs) or len(self.biases) != len(self.specs):
            raise DimensionError("need one weight and one bias array per layer")
        for spec, w, b in zip(self.specs, self.weights, self.biases):
            if w.shape != spec.weight_shape or b.shape != (spec.kernel_count,):
                raise DimensionError(
                    f"parameter shapes {w.shape}, {b.shape} do not match {spec}"
                )

    def copy(self):
        return NetworkParams(
            list(self.specs), [w.copy() for w in self.weights], [b.copy() for b in self.biases]
        )

    @property
    def n_parameters(self):
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))


@dataclass
class ParamGrads:
    weights: list
    biases: list


@dataclass
class ForwardTrace:
    """Activations cached by :func:`forward` for :func:`backward`.

    ``inputs[l]`` is the stack fed to layer ``l`` and ``pre[l]`` its output
    before the activation.
    """

    inputs: list = field(default_factory=list)
    pre: list = field(default_factory=list)
    output: np.ndarray = None


def init_params(spec, seed, std=0.001):
    """Gaussian(0, std) weights and zero biases, deterministic in ``seed``."""
    spec = check_spec(spec)
    rng = np.random.default_rng(seed)
    weights = [rng.normal(0.0, std, size=s.weight_shape) for s in spec]
    biases = [np.zeros(s.kernel_count) for s in spec]
    return NetworkParams(spec, weights, biases)


def forward(x_s, params):
    """Run the network on an (already upscaled) image and keep the trace."""
    x = check_image(x_s, "x_s")[np.newaxis]
    trace = ForwardTrace()
    for spec, w, b in zip(params.specs, params.weights, params.biases):
        trace.inputs.append(x)
        z = _conv_forward(x, w, b)
        trace.pre.append(z)
        x = np.maximum(z, 0.0) if spec.activation == "relu" else z
    trace.output = x[0]
    return trace


def predict(x_s, params):
    return forward(x_s, params).output


def backward(trace, params, output_grad):
    """Parameter gradients of ``sum(output_grad * Y)`` for ``Y = trace.output``.

    ReLU passes gradient only where the cached pre-activation is strictly
    positive.
    """
    g = np.asarray(output_grad, dtype=np.float64)
    if g.shape != trace.output.shape:
        raise DimensionError(
            f"output gradient shape {g.shape} does not match output {trace.output.shape}"
        )
    g = g[np.newaxis]
    n_layers = len(params.specs)
    wgrads = [None] * n_layers
    bgrads = [None] * n_layers
    for l in range(n_layers - 1, -1, -1):
        if params.specs[l].activation == "relu":
            g = g * (trace.pre[l] > 0.0)
        g, wgrads[l], bgrads[l] = _conv_backward(
            trace.inputs[l], params.weights[l], g, need_input_grad=l > 0
        )
    return ParamGrads(wgrads, bgrads)


MAGIC = b"DNSP"
FORMAT_VERSION = 1
_ACT_TAGS = {"none": 0, "relu": 1}
_TAG_ACTS = {v: k for k, v in _ACT_TAGS.items()}


def dumps_params(params):
    """Serialize to the little-endian binary checkpoint layout."""
    out = [MAGIC, struct.pack("<HH", FORMAT_VERSION, len(params.specs))]
    for spec, w, b in zip(params.specs, params.weights, params.biases):
        out.append(
            struct.pack(
                "<IIIIB",
                spec.kernel_height,
                spec.kernel_width,
                spec.input_depth,
                spec.kernel_count,
                _ACT_TAGS[spec.activation],
            )
        )
        # per kernel: (m, n, d) row-major weights, then the bias
        flat = w.transpose(0, 2, 3, 1).reshape(spec.kernel_count, -1)
        block = np.concatenate([flat, b[:, None]], axis=1)
        out.append(block.astype("<f8").tobytes())
    return b"".join(out)


def loads_params(data):
    if len(data) < 8 or data[:4] != MAGIC:
        raise FormatError("not a checkpoint: bad magic bytes")
    version, n_layers = struct.unpack_from("<HH", data, 4)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported checkpoint version {version}")
    offset = 8
    specs, weights, biases = [], [], []
    try:
        for _ in range(n_layers):
            m, n, d, k, tag = struct.unpack_from("<IIIIB", data, offset)
            offset += 17
            spec = LayerSpec(m, n, d, k, _TAG_ACTS[tag])
            count = k * (m * n * d + 1)
            block = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
            offset += 8 * count
            block = block.astype(np.float64).reshape(k, m * n * d + 1)
            specs.append(spec)
            weights.append(np.ascontiguousarray(block[:, :-1].reshape(k, m, n, d).transpose(0, 3, 1, 2)))
            biases.append(block[:, -1].copy())
    except (struct.error, ValueError, KeyError, ConfigurationError) as exc:
        raise FormatError(f"truncated or corrupt checkpoint: {exc}") from exc
    if offset != len(data):
        raise FormatError("trailing bytes after last layer")
    try:
        return NetworkParams(specs, weights, biases)
    except (ConfigurationError, DimensionError) as exc:
        raise FormatError(f"inconsistent checkpoint: {exc}") from exc


def save_params(params, path):
    with open(path, "wb") as fh:
        fh.write(dumps_params(params))


def load_params(path):
    with open(path, "rb") as fh:
        return loads_params(fh.read())

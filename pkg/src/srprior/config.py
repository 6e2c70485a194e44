"""``key = value`` run configuration merged with command-line overrides."""

from dataclasses import asdict, dataclass, fields

from .exceptions import ConfigurationError
from .imaging import DegradationSpec
from .network import get_profile
from .training import HyperParams


@dataclass
class RunConfig:
    # optimization
    delta: float = 0.01
    alpha: float = 0.1
    beta: float = 5e-5
    eta: float = 1e-4
    batch_size: int = 16
    epochs: int = 200
    seed: int = 0
    eta_last_layer_ratio: float = 0.1
    init_std: float = 0.001
    sharpness_ceiling: float = 10.0
    priors: bool = True
    # data
    blur_sigma: float = 1.0
    scale: int = 2
    patch: int = 40
    stride: int = 20
    fraction: float = 1.0
    profile: str = "915"
    # paths
    data_dir: str = ""
    val_dir: str = ""
    out_dir: str = ""

    def hyperparams(self):
        names = {f.name for f in fields(HyperParams)}
        return HyperParams(**{k: v for k, v in asdict(self).items() if k in names})

    def degradation(self):
        return DegradationSpec(self.blur_sigma, self.scale)

    def layer_spec(self):
        return get_profile(self.profile)

    def to_text(self):
        return "".join(f"{k} = {_format(v)}\n" for k, v in asdict(self).items())


_TYPES = {f.name: f.type for f in fields(RunConfig)}
_NULLABLE = {"sharpness_ceiling"}


def _format(value):
    return "none" if value is None else str(value).lower() if isinstance(value, bool) else str(value)


def _coerce(key, raw):
    kind = _TYPES[key]
    text = str(raw).strip()
    if key in _NULLABLE and text.lower() in ("none", ""):
        return None
    try:
        if kind in (bool, "bool"):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind in (int, "int"):
            return int(text)
        if kind in (float, "float"):
            return float(text)
        return text
    except ValueError:
        raise ConfigurationError(f"bad value for {key}: {raw!r}") from None


def parse_config_text(text, source="<config>"):
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value)
    return values


def load_config_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), str(path))


def resolve_config(file_values=None, overrides=None):
    """File values first, then non-None ``overrides``; unknown keys are rejected."""
    merged = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in _TYPES:
                raise ConfigurationError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, value) if isinstance(value, str) else value
    cfg = RunConfig(**merged)
    if not 0 < cfg.fraction <= 1:
        raise ConfigurationError("fraction must be in (0, 1]")
    cfg.hyperparams()
    cfg.degradation()
    cfg.layer_spec()
    return cfg

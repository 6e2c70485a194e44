import pytest

from srprior.config import RunConfig, parse_config_text, resolve_config
from srprior.exceptions import ConfigurationError


def test_parse_types_and_comments():
    text = "# header\nalpha = 0.5  # trailing\nepochs=3\npriors = false\n\nprofile = tiny\n"
    values = parse_config_text(text)
    assert values == {"alpha": 0.5, "epochs": 3, "priors": False, "profile": "tiny"}


def test_unknown_key_rejected():
    with pytest.raises(ConfigurationError, match="unknown key"):
        parse_config_text("alhpa = 0.1\n")


def test_missing_equals_rejected():
    with pytest.raises(ConfigurationError, match="key = value"):
        parse_config_text("alpha 0.1\n")


def test_bad_value_rejected():
    with pytest.raises(ConfigurationError):
        parse_config_text("epochs = many\n")


def test_overrides_win_and_none_is_ignored():
    cfg = resolve_config({"alpha": 0.5, "epochs": 3}, {"alpha": 0.25, "epochs": None})
    assert cfg.alpha == 0.25
    assert cfg.epochs == 3


def test_nullable_ceiling():
    assert parse_config_text("sharpness_ceiling = none\n")["sharpness_ceiling"] is None
    assert resolve_config({}, {"sharpness_ceiling": "none"}).hyperparams().sharpness_ceiling is None


@pytest.mark.parametrize("overrides", [{"fraction": 0.0}, {"fraction": 1.5}, {"profile": "nope"}, {"delta": 0.0}])
def test_invalid_resolved_values(overrides):
    with pytest.raises(ConfigurationError):
        resolve_config({}, overrides)


def test_text_roundtrip():
    cfg = resolve_config({}, {"alpha": 0.03, "priors": False, "data_dir": "d"})
    again = resolve_config(parse_config_text(cfg.to_text()))
    assert again == cfg


def test_defaults_match_hyperparams():
    hp = RunConfig().hyperparams()
    assert (hp.alpha, hp.beta, hp.delta, hp.eta, hp.batch_size, hp.epochs) == (0.1, 5e-5, 0.01, 1e-4, 16, 200)

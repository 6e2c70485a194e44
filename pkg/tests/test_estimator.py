import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from srprior import SuperResolver
from srprior.imaging import DegradationSpec, simulate_lowres, synth_phantom


def _small(**kw):
    base = dict(profile="tiny", epochs=2, batch_size=4, stride=24, init_std=0.05, random_state=1)
    base.update(kw)
    return SuperResolver(**base)


def test_get_params_and_clone():
    est = _small(alpha=0.02)
    params = est.get_params()
    assert params["alpha"] == 0.02 and params["profile"] == "tiny"
    twin = clone(est)
    assert twin.get_params() == params
    assert not hasattr(twin, "params_")


def test_predict_before_fit():
    with pytest.raises(NotFittedError):
        _small().predict([np.zeros((8, 8))])


def test_fit_predict_score():
    hr = [synth_phantom(s, 64) for s in range(2)]
    est = _small().fit(hr)
    assert len(est.report_.epochs) == 2
    assert est.n_pairs_ > 0
    lr = [simulate_lowres(h, DegradationSpec()) for h in hr]
    out = est.predict(lr)
    assert [o.shape for o in out] == [(64, 64), (64, 64)]
    assert np.isfinite(est.score(lr, hr))


def test_fit_is_deterministic():
    hr = [synth_phantom(0, 64)]
    a = _small().fit(hr).params_
    b = _small().fit(hr).params_
    for wa, wb in zip(a.weights, b.weights):
        np.testing.assert_array_equal(wa, wb)


def test_fraction_reduces_pairs():
    hr = [synth_phantom(0, 64), synth_phantom(1, 64)]
    full = _small(epochs=0).fit(hr)
    half = _small(epochs=0, fraction=0.5).fit(hr)
    assert half.n_pairs_ == int(np.ceil(full.n_pairs_ / 2))

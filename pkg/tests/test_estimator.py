import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from fracvisc import FractionalMaxwellRegressor, model_moduli
from fracvisc.reference import reference_model


def _data():
    m = reference_model("20HS/0.0", constrained=True)
    x = np.logspace(-8, 2, 41)
    return x, np.column_stack(model_moduli(m, x))


def test_params_and_clone():
    est = FractionalMaxwellRegressor(n_pop=10, n_iter=5, n_runs=1, random_state=3)
    p = est.get_params()
    assert p["n_pop"] == 10 and p["random_state"] == 3 and p["kind"] == "FMM-FMG"
    c = clone(est).set_params(n_iter=7)
    assert c.n_iter == 7 and est.n_iter == 5


def test_fit_predict_score():
    x, y = _data()
    est = FractionalMaxwellRegressor(n_pop=20, n_iter=80, n_runs=2, random_state=0)
    assert est.fit(x.reshape(-1, 1), y) is est
    pred = est.predict(x.reshape(-1, 1))
    assert pred.shape == (x.size, 2) and np.all(pred > 0)
    assert est.score(x, y) > 0.9
    assert set(est.params_) >= {"E_c1", "tau_c2"}
    again = clone(est).fit(x, y)
    assert np.array_equal(again.predict(x), pred)


def test_input_validation():
    x, y = _data()
    est = FractionalMaxwellRegressor(n_pop=4, n_iter=2, n_runs=1)
    with pytest.raises(NotFittedError):
        est.predict(x)
    with pytest.raises(ValueError):
        est.fit(x, y[:, 0])
    with pytest.raises(ValueError):
        est.fit(np.column_stack([x, x]), y)

import numpy as np
import pytest
from sklearn.base import clone

from rowplan import FieldSpec, generate_field
from rowplan.estimator import InterventionPlanner, check_field


def _X(n=80, seed=0):
    rng = np.random.default_rng(seed)
    return np.c_[np.sort(rng.uniform(0, 6, n)), rng.uniform(0, 1.39, n)]


def test_fit_predict_labels_bands():
    X = _X()
    est = InterventionPlanner().fit(X)
    labels = est.predict()
    assert labels.shape == (80,)
    treated = labels >= 0
    ys = np.array([p.y for p in est.field_.weeds])
    assert np.all((ys[treated] * 4 / 1.39).astype(int) == labels[treated])
    assert est.score() == pytest.approx(treated.mean())


def test_params_and_clone():
    est = InterventionPlanner(omega=12.0, mode="segment")
    c = clone(est)
    assert c.get_params()["omega"] == 12.0
    c.set_params(rho=0.7)
    assert c.rho == 0.7 and est.rho == 0.6


def test_accepts_field_model():
    f = generate_field(FieldSpec(lam=8.2, length=4, seed=3, crop_spacing=0.25))
    est = InterventionPlanner(biodiv=True)
    assert est.fit_predict(f).shape == (len(f.weeds),)


def test_predict_before_fit():
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        InterventionPlanner().predict()


def test_check_field_shape():
    with pytest.raises(ValueError):
        check_field(np.zeros((3, 3)), 1.39)
    assert check_field(np.zeros((0, 2)), 1.39).plants == ()

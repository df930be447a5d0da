"""scikit-learn style front end to the planner.

:class:`InterventionPlanner` treats a row of weed positions as ``X`` and
"predicts" which axis treats each weed (``-1`` when the planner skips it).
Hyperparameters mirror the tool and planner configs so the estimator works
with ``get_params`` / ``set_params`` / ``clone`` and grid searches over
``omega`` or ``rho``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .experiment import plan_with_fallback
from .field import FieldModel, Plant, make_field
from .kinematics import ToolConfig
from .planner import HarmfulnessContext, PlannerConfig
from .simulator import SimConfig, simulate_run


def check_field(X, width: float) -> FieldModel:
    """Coerce ``X`` into a :class:`FieldModel`.

    ``X`` is a FieldModel (returned unchanged) or an array of shape
    ``(n, 2)`` holding weed ``x, y`` in meters. Array rows become weeds with
    ids ``0..n-1`` in input order.
    """
    if isinstance(X, FieldModel):
        return X
    arr = check_array(X, ensure_min_samples=0, dtype=float)
    if arr.shape[1] != 2:
        raise ValueError(f"X must have 2 columns (x, y), got {arr.shape[1]}")
    plants = [Plant(id=i, x=float(x), y=float(y), kind="weed", species="weed")
              for i, (x, y) in enumerate(arr)]
    return make_field({"width": width}, plants, warn=False)


class InterventionPlanner(BaseEstimator):
    def __init__(self, heads=4, width=1.39, gamma=0.5, theta=5.0, omega=30.0, rho=0.6, mode="rolling",
                 biodiv=False, window_length=1.0, stride_fraction=0.5):
        self.heads = heads
        self.width = width
        self.gamma = gamma
        self.theta = theta
        self.omega = omega
        self.rho = rho
        self.mode = mode
        self.biodiv = biodiv
        self.window_length = window_length
        self.stride_fraction = stride_fraction

    def _configs(self) -> tuple[ToolConfig, PlannerConfig]:
        tool = ToolConfig(heads=self.heads, width=self.width, gamma=self.gamma, theta=self.theta)
        cfg = PlannerConfig(omega=self.omega, rho=self.rho, mode=self.mode, biodiv=self.biodiv,
                            window_length=self.window_length, stride_fraction=self.stride_fraction)
        return tool, cfg

    def fit(self, X, y=None):
        """Plan the row ``X``; ``y`` is ignored."""
        tool, cfg = self._configs()
        model = check_field(X, self.width)
        window, (plan,) = plan_with_fallback(model, tool, [cfg], HarmfulnessContext())
        self.field_ = model
        self.plan_ = plan
        self.window_length_ = window
        self.tool_ = tool
        self.n_features_in_ = 2
        return self

    def _labels(self) -> np.ndarray:
        axis_of = {i: a.axis_id for a in self.plan_.axes for i in a.nodes}
        return np.array([axis_of.get(p.id, -1) for p in self.field_.weeds], dtype=int)

    def predict(self, X=None):
        """Treating axis per weed (``-1`` if untreated), in the field's sorted weed order.

        Without ``X`` the fitted row is labelled; otherwise ``X`` is planned first.
        """
        check_is_fitted(self, "plan_")
        if X is None:
            return self._labels()
        return self.fit(X)._labels()

    def fit_predict(self, X, y=None):
        return self.fit(X)._labels()

    def score(self, X=None, y=None) -> float:
        """Fraction of weeds treated when the plan runs without actuation noise."""
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "plan_")
        m = simulate_run(self.field_, self.plan_, self.tool_, SimConfig())
        return 1.0 - m.loss_pct / 100.0

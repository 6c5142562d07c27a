"""Regression metrics shared by the model search and the bench harness."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import MetricError


@dataclass(frozen=True)
class Metrics:
    rmse: float
    mape: float
    accuracy_pct: float
    r2: float

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "Metrics":
        return cls(rmse=d["rmse"], mape=d["mape"],
                   accuracy_pct=d["accuracy_pct"], r2=d["r2"])


def compute_metrics(y_true, y_pred) -> Metrics:
    """RMSE, MAPE, accuracy (100*(1-MAPE), clipped to [0,100]) and R^2.

    MAPE is undefined for non-positive truth values; the first offending row
    is named in the error.
    """
    yt = np.asarray(y_true, dtype=float)
    yp = np.asarray(y_pred, dtype=float)
    if yt.shape != yp.shape or yt.ndim != 1 or len(yt) == 0:
        raise MetricError("need two equal-length non-empty 1-D arrays")
    bad = np.nonzero(yt <= 0)[0]
    if len(bad):
        raise MetricError(f"MAPE undefined: non-positive truth at row {int(bad[0])}")
    err = yp - yt
    rmse = float(np.sqrt(np.mean(err ** 2)))
    mape = float(np.mean(np.abs(err) / yt))
    accuracy = min(100.0, max(0.0, 100.0 * (1.0 - mape)))
    ss_res = float(np.sum(err ** 2))
    ss_tot = float(np.sum((yt - yt.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return Metrics(rmse=rmse, mape=mape, accuracy_pct=accuracy, r2=r2)

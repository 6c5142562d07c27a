"""Regression model zoo: ridge, knn, CART, random forest, extra trees, GBM.

Implemented directly on numpy so every fitted model serializes to plain
JSON and predictions are bit-identical after a save/load round trip.
All models operate in min-max normalized feature space; the scaler is
stored alongside the fitted state.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, TwinFormatError
from .metrics import Metrics

FAMILIES = ("ridge", "knn", "cart", "random_forest", "extra_trees", "gbm")

_UNLIMITED_DEPTH = 64

_DEFAULT_PARAMS = {
    "ridge": {"lam": 1.0},
    "knn": {"k": 5},
    "cart": {"max_depth": None, "min_leaf": 1},
    "random_forest": {"n_estimators": 100, "max_depth": None, "min_leaf": 1,
                      "feature_fraction": 1.0},
    "extra_trees": {"n_estimators": 100, "max_depth": None, "min_leaf": 1,
                    "feature_fraction": 1.0},
    "gbm": {"rounds": 300, "learning_rate": 0.1, "max_depth": 3, "subsample": 1.0},
}


@dataclass(frozen=True)
class ModelSpec:
    family: str
    params: tuple  # sorted (name, value) pairs so specs are hashable

    @classmethod
    def make(cls, family: str, **overrides) -> "ModelSpec":
        if family == "weighted_ensemble":
            return cls(family, tuple(sorted(overrides.items())))
        if family not in FAMILIES:
            raise InvalidConfigError(f"unknown model family {family!r}")
        params = dict(_DEFAULT_PARAMS[family])
        unknown = set(overrides) - set(params)
        if unknown:
            raise InvalidConfigError(f"unknown {family} parameter(s): {sorted(unknown)}")
        params.update(overrides)
        _validate_params(family, params)
        return cls(family, tuple(sorted(params.items())))

    def param_dict(self) -> dict:
        return dict(self.params)

    def label(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in self.params)
        return f"{self.family}({inner})"


def _validate_params(family: str, p: dict) -> None:
    def positive(name):
        if p[name] is not None and p[name] < 1:
            raise InvalidConfigError(f"{family}.{name} must be >= 1, got {p[name]}")

    if family == "ridge":
        if p["lam"] < 0:
            raise InvalidConfigError(f"ridge.lam must be >= 0, got {p['lam']}")
    elif family == "knn":
        positive("k")
    elif family in ("cart", "random_forest", "extra_trees"):
        positive("min_leaf")
        if p["max_depth"] is not None and p["max_depth"] < 0:
            raise InvalidConfigError("max_depth must be >= 0 or None")
        if family != "cart":
            positive("n_estimators")
            if not 0 < p["feature_fraction"] <= 1:
                raise InvalidConfigError("feature_fraction must be in (0, 1]")
    elif family == "gbm":
        positive("rounds")
        if not 0 < p["learning_rate"] <= 1:
            raise InvalidConfigError("learning_rate must be in (0, 1]")
        if p["max_depth"] < 0:
            raise InvalidConfigError("gbm.max_depth must be >= 0")
        if not 0 < p["subsample"] <= 1:
            raise InvalidConfigError("subsample must be in (0, 1]")


@dataclass(frozen=True)
class FeatureScaler:
    lo: tuple
    hi: tuple

    @classmethod
    def from_data(cls, X: np.ndarray) -> "FeatureScaler":
        return cls(tuple(X.min(axis=0).tolist()), tuple(X.max(axis=0).tolist()))

    def transform(self, X: np.ndarray) -> np.ndarray:
        lo = np.array(self.lo)
        span = np.array(self.hi) - lo
        span[span == 0] = 1.0
        return (np.asarray(X, dtype=float) - lo) / span

    def to_json(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi)}

    @classmethod
    def from_json(cls, d: dict) -> "FeatureScaler":
        return cls(tuple(d["lo"]), tuple(d["hi"]))


# ---------------------------------------------------------------------------
# decision trees (flat array representation; feature == -1 marks a leaf)

def _best_split(X, y, feat_ids, min_leaf, rng, extra):
    """Lowest-SSE (feature, threshold) among the candidate features, or None.

    All candidate features are scored in one vectorized pass; ties resolve
    deterministically by flattened argmin position.
    """
    n = len(y)
    cols = X[:, feat_ids]  # (n, k)
    if extra:
        lo = cols.min(axis=0)
        hi = cols.max(axis=0)
        thr = lo + (hi - lo) * rng.random(len(feat_ids))
        left = cols <= thr
        nl = left.sum(axis=0)
        valid = (lo < hi) & (nl >= min_leaf) & (n - nl >= min_leaf)
        if not valid.any():
            return None
        nl_safe = np.where(nl == 0, 1, nl)
        nr_safe = np.where(nl == n, 1, n - nl)
        sum_l = (y[:, None] * left).sum(axis=0)
        sq_l = ((y * y)[:, None] * left).sum(axis=0)
        total, total_sq = y.sum(), np.sum(y * y)
        sse = (sq_l - sum_l ** 2 / nl_safe) + \
              ((total_sq - sq_l) - (total - sum_l) ** 2 / nr_safe)
        sse = np.where(valid, sse, np.inf)
        j = int(np.argmin(sse))
        return float(sse[j]), int(feat_ids[j]), float(thr[j])
    order = np.argsort(cols, axis=0, kind="stable")
    xs = np.take_along_axis(cols, order, axis=0)
    ys = y[order]
    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys * ys, axis=0)
    nl = np.arange(1, n, dtype=float)[:, None]
    valid = (xs[1:] != xs[:-1]) & (nl >= min_leaf) & (n - nl >= min_leaf)
    if not valid.any():
        return None
    sse = (csq[:-1] - csum[:-1] ** 2 / nl) + \
          ((csq[-1] - csq[:-1]) - (csum[-1] - csum[:-1]) ** 2 / (n - nl))
    sse = np.where(valid, sse, np.inf)
    i = int(np.argmin(sse))
    row, col = divmod(i, sse.shape[1])
    if not np.isfinite(sse[row, col]):
        return None
    thr = (xs[row, col] + xs[row + 1, col]) / 2.0
    return float(sse[row, col]), int(feat_ids[col]), float(thr)


def _fit_tree(X, y, max_depth, min_leaf, feature_fraction, rng, extra):
    n_features = X.shape[1]
    k = max(1, int(round(feature_fraction * n_features)))
    depth_cap = _UNLIMITED_DEPTH if max_depth is None else max_depth
    feature, thr, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        thr.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    def build(idx, depth):
        node = new_node()
        ys = y[idx]
        value[node] = float(ys.mean())
        if depth >= depth_cap or len(idx) < 2 * min_leaf or np.all(ys == ys[0]):
            return node
        if k < n_features:
            feat_ids = np.sort(rng.choice(n_features, size=k, replace=False))
        else:
            feat_ids = np.arange(n_features)
        found = _best_split(X[idx], ys, feat_ids, min_leaf, rng, extra)
        if found is None:
            return node
        _, f, t = found
        go_left = X[idx, f] <= t
        feature[node] = int(f)
        thr[node] = t
        left[node] = build(idx[go_left], depth + 1)
        right[node] = build(idx[~go_left], depth + 1)
        return node

    build(np.arange(len(y)), 0)
    return {"feature": feature, "threshold": thr, "left": left,
            "right": right, "value": value}


def _stack_trees(trees):
    """Pad the flat node arrays of a tree list into (n_trees, max_nodes)
    matrices so a whole forest can be traversed in lockstep."""
    m = max(len(t["feature"]) for t in trees)
    n_trees = len(trees)
    feat = np.full((n_trees, m), -1, dtype=int)
    thr = np.zeros((n_trees, m))
    left = np.zeros((n_trees, m), dtype=int)
    right = np.zeros((n_trees, m), dtype=int)
    value = np.zeros((n_trees, m))
    for i, t in enumerate(trees):
        k = len(t["feature"])
        feat[i, :k] = t["feature"]
        thr[i, :k] = t["threshold"]
        left[i, :k] = t["left"]
        right[i, :k] = t["right"]
        value[i, :k] = t["value"]
    return {"feature": feat, "threshold": thr, "left": left,
            "right": right, "value": value}


def _stacked_cache(state):
    cache = state.get("_stacked")
    if cache is None:
        cache = state["_stacked"] = _stack_trees(state["trees"])
    return cache


def _forest_values(stacked, X):
    """(n_trees, n_rows) leaf values; every tree descends one level per pass."""
    feat = stacked["feature"]
    thr = stacked["threshold"]
    left = stacked["left"]
    right = stacked["right"]
    n_trees = feat.shape[0]
    idx = np.zeros((n_trees, len(X)), dtype=int)
    tree_rows = np.arange(n_trees)[:, None]
    while True:
        f = feat[tree_rows, idx]
        active = f >= 0
        if not active.any():
            break
        t_i, r_i = np.nonzero(active)
        cur = idx[t_i, r_i]
        go_left = X[r_i, f[t_i, r_i]] <= thr[t_i, cur]
        idx[t_i, r_i] = np.where(go_left, left[t_i, cur], right[t_i, cur])
    return stacked["value"][tree_rows, idx]


def _strip_private(obj):
    """Drop underscore-prefixed keys (in-memory caches) before serialization."""
    if isinstance(obj, dict):
        return {k: _strip_private(v) for k, v in obj.items() if not k.startswith("_")}
    if isinstance(obj, list):
        return [_strip_private(v) for v in obj]
    return obj


def _tree_predict(tree, X):
    feat = np.asarray(tree["feature"], dtype=int)
    thr = np.asarray(tree["threshold"], dtype=float)
    left = np.asarray(tree["left"], dtype=int)
    right = np.asarray(tree["right"], dtype=int)
    value = np.asarray(tree["value"], dtype=float)
    idx = np.zeros(len(X), dtype=int)
    rows = np.arange(len(X))
    while True:
        f = feat[idx]
        active = f >= 0
        if not active.any():
            break
        r = rows[active]
        cur = idx[active]
        go_left = X[r, f[active]] <= thr[cur]
        idx[active] = np.where(go_left, left[cur], right[cur])
    return value[idx]


# ---------------------------------------------------------------------------
# family fit/predict dispatch (X is already normalized)

def _fit_ridge(X, y, p, rng):
    a = np.column_stack([np.ones(len(y)), X])
    lam = p["lam"]
    if lam == 0:
        beta, *_ = np.linalg.lstsq(a, y, rcond=None)
    else:
        penalty = lam * np.eye(a.shape[1])
        penalty[0, 0] = 0.0  # intercept unpenalized
        beta = np.linalg.solve(a.T @ a + penalty, a.T @ y)
    return {"beta": beta.tolist()}


def _predict_ridge(state, X):
    beta = np.asarray(state["beta"])
    # elementwise form instead of a BLAS matvec: the result for a row must
    # not depend on how many other rows are in the batch
    return beta[0] + (X * beta[1:]).sum(axis=1)


def _fit_knn(X, y, p, rng):
    k = p["k"]
    if k > len(y):
        warnings.warn(f"knn k={k} clipped to training size {len(y)}")
        k = len(y)
    return {"k": k, "X": X.tolist(), "y": y.tolist()}


def _predict_knn(state, X):
    train = np.asarray(state["X"])
    y = np.asarray(state["y"])
    k = state["k"]
    d = np.sum((train[None, :, :] - X[:, None, :]) ** 2, axis=2)
    nearest = np.argsort(d, axis=1, kind="stable")[:, :k]  # ties break by row index
    return y[nearest].mean(axis=1)


def _fit_cart(X, y, p, rng):
    return {"tree": _fit_tree(X, y, p["max_depth"], p["min_leaf"], 1.0, rng, extra=False)}


def _predict_cart(state, X):
    return _tree_predict(state["tree"], X)


def _fit_forest(X, y, p, rng, extra):
    trees = []
    n = len(y)
    for _ in range(p["n_estimators"]):
        if extra:
            idx = np.arange(n)  # classic extra-trees: no bootstrap
        else:
            idx = rng.integers(0, n, size=n)
        trees.append(_fit_tree(X[idx], y[idx], p["max_depth"], p["min_leaf"],
                               p["feature_fraction"], rng, extra))
    return {"trees": trees}


def _ordered_colsum(values):
    # strict tree-order accumulation; numpy's axis-0 reduction picks a
    # batch-size-dependent blocking, which would break batch == pointwise
    acc = values[0].copy()
    for row in values[1:]:
        acc += row
    return acc


def _predict_forest(state, X):
    values = _forest_values(_stacked_cache(state), X)
    return _ordered_colsum(values) / len(state["trees"])


def _fit_gbm(X, y, p, rng):
    n = len(y)
    init = float(y.mean())
    preds = np.full(n, init)
    trees = []
    n_sub = max(1, int(round(p["subsample"] * n)))
    for _ in range(p["rounds"]):
        if n_sub < n:
            idx = rng.choice(n, size=n_sub, replace=False)
        else:
            idx = np.arange(n)
        resid = y[idx] - preds[idx]
        tree = _fit_tree(X[idx], resid, p["max_depth"], 1, 1.0, rng, extra=False)
        trees.append(tree)
        preds += p["learning_rate"] * _tree_predict(tree, X)
    return {"init": init, "learning_rate": p["learning_rate"], "trees": trees,
            "y_min": float(y.min()), "y_max": float(y.max())}


def _predict_gbm(state, X):
    values = _forest_values(_stacked_cache(state), X)
    acc = state["init"] + state["learning_rate"] * _ordered_colsum(values)
    # keep the boosted sum inside the training-target range
    return np.clip(acc, state["y_min"], state["y_max"])


def predict_normalized(family: str, state: dict, X: np.ndarray) -> np.ndarray:
    if family == "weighted_ensemble":
        acc = np.zeros(len(X))
        for member, w in zip(state["members"], state["weights"]):
            acc += w * predict_normalized(member["family"], member["state"], X)
        return acc
    try:
        fn = _PREDICTORS[family]
    except KeyError:
        raise TwinFormatError(f"unknown model family {family!r}") from None
    return fn(state, X)


_FITTERS = {
    "ridge": _fit_ridge,
    "knn": _fit_knn,
    "cart": _fit_cart,
    "random_forest": lambda X, y, p, rng: _fit_forest(X, y, p, rng, extra=False),
    "extra_trees": lambda X, y, p, rng: _fit_forest(X, y, p, rng, extra=True),
    "gbm": _fit_gbm,
}

_PREDICTORS = {
    "ridge": _predict_ridge,
    "knn": _predict_knn,
    "cart": _predict_cart,
    "random_forest": _predict_forest,
    "extra_trees": _predict_forest,
    "gbm": _predict_gbm,
}


@dataclass
class TrainedRegressor:
    spec: ModelSpec
    scaler: FeatureScaler
    state: dict
    fit_time_s: float = 0.0
    predict_time_s: float = 0.0
    val_metrics: Metrics | None = None

    def predict(self, X_raw) -> np.ndarray:
        X = self.scaler.transform(np.atleast_2d(np.asarray(X_raw, dtype=float)))
        return predict_normalized(self.spec.family, self.state, X)

    def to_json(self) -> dict:
        d = {
            "family": self.spec.family,
            "params": [[k, v] for k, v in self.spec.params],
            "state": _strip_private(self.state),
            "fit_time_s": self.fit_time_s,
            "predict_time_s": self.predict_time_s,
        }
        if self.val_metrics is not None:
            d["val_metrics"] = self.val_metrics.to_json()
        return d

    @classmethod
    def from_json(cls, d: dict, scaler: FeatureScaler) -> "TrainedRegressor":
        family = d["family"]
        if family != "weighted_ensemble" and family not in FAMILIES:
            raise TwinFormatError(f"unknown model family {family!r}")
        spec = ModelSpec(family, tuple((k, v) for k, v in d["params"]))
        vm = Metrics.from_json(d["val_metrics"]) if "val_metrics" in d else None
        return cls(spec=spec, scaler=scaler, state=d["state"],
                   fit_time_s=d.get("fit_time_s", 0.0),
                   predict_time_s=d.get("predict_time_s", 0.0), val_metrics=vm)


def fit(spec: ModelSpec, train, target: str, seed: int,
        scaler: FeatureScaler | None = None) -> TrainedRegressor:
    """Fit one candidate on a dataset; deterministic given (spec, train, seed)."""
    if not len(train):
        raise InvalidConfigError("training dataset is empty")
    X_raw = train.features()
    y = train.latencies(target)
    if scaler is None:
        scaler = FeatureScaler.from_data(X_raw)
    X = scaler.transform(X_raw)
    rng = np.random.Generator(np.random.PCG64(seed))
    t0 = time.perf_counter()
    state = _FITTERS[spec.family](X, y, spec.param_dict(), rng)
    fit_time = time.perf_counter() - t0
    return TrainedRegressor(spec=spec, scaler=scaler, state=state, fit_time_s=fit_time)

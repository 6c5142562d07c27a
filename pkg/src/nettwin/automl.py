"""Budgeted model search, greedy weighted ensembling, and the Twin bundle.

The observable contract mirrors what tabular AutoML frameworks expose:
a preset-controlled candidate schedule, a wall-clock budget, a leaderboard
sorted by validation error, and a weighted ensemble layered on top of the
trained pool.
"""

from __future__ import annotations

import datetime
import hashlib
import io
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, split
from .errors import InvalidConfigError, TwinFormatError
from .jsonio import load_json, save_json
from .metrics import Metrics, compute_metrics
from .models import FAMILIES, FeatureScaler, ModelSpec, TrainedRegressor, fit
from .seeding import derive_seed

FEATURE_SCHEMA = ("bw1_mbps", "q1_pkts", "bw2_mbps", "q2_pkts")
TARGETS = ("path1", "path2")
PRESETS = ("fast", "good", "best")
VALIDATION_FRAC = 0.25
ENSEMBLE_MAX_ITERS = 25
TWIN_SCHEMA_VERSION = 1

_BEST_RANDOM_DRAWS = 20


def evaluate(obj, data: Dataset, target: str) -> Metrics:
    """Metrics of a regressor or twin against a dataset's true latencies."""
    y = data.latencies(target)
    if isinstance(obj, Twin):
        pred = obj.regressors[target].predict(data.features())
    else:
        pred = obj.predict(data.features())
    return compute_metrics(y, pred)


def candidate_schedule(preset: str, seed: int) -> list[ModelSpec]:
    """Deterministic candidate list; the first entry is always the mandatory
    ridge default."""
    if preset not in PRESETS:
        raise InvalidConfigError(f"preset must be one of {PRESETS}, got {preset!r}")
    specs = [ModelSpec.make("ridge")]
    if preset == "fast":
        specs += [ModelSpec.make(f) for f in FAMILIES if f != "ridge"]
        return specs
    specs += [
        ModelSpec.make("ridge", lam=0.1),
        ModelSpec.make("knn"),
        ModelSpec.make("knn", k=3),
        ModelSpec.make("knn", k=10),
        ModelSpec.make("cart"),
        ModelSpec.make("cart", max_depth=8, min_leaf=5),
        ModelSpec.make("random_forest"),
        ModelSpec.make("random_forest", feature_fraction=0.5),
        ModelSpec.make("extra_trees"),
        ModelSpec.make("extra_trees", feature_fraction=0.5),
        ModelSpec.make("gbm"),
        ModelSpec.make("gbm", learning_rate=0.05, max_depth=5),
        ModelSpec.make("gbm", rounds=500, learning_rate=0.05),
    ]
    if preset == "best":
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "schedule")))
        for _ in range(_BEST_RANDOM_DRAWS):
            family = ["random_forest", "extra_trees", "gbm", "knn", "cart"][int(rng.integers(5))]
            if family == "knn":
                spec = ModelSpec.make("knn", k=int(rng.integers(1, 25)))
            elif family == "cart":
                spec = ModelSpec.make("cart", max_depth=int(rng.integers(2, 16)),
                                      min_leaf=int(rng.integers(1, 8)))
            elif family == "gbm":
                spec = ModelSpec.make(
                    "gbm", rounds=int(rng.integers(100, 600)),
                    learning_rate=float(np.round(rng.uniform(0.02, 0.3), 3)),
                    max_depth=int(rng.integers(2, 6)),
                    subsample=float(np.round(rng.uniform(0.5, 1.0), 2)))
            else:
                spec = ModelSpec.make(
                    family, n_estimators=int(rng.integers(50, 300)),
                    feature_fraction=float(np.round(rng.uniform(0.25, 1.0), 2)),
                    min_leaf=int(rng.integers(1, 6)))
            if spec not in specs:
                specs.append(spec)
    return specs


@dataclass
class LeaderboardEntry:
    spec: ModelSpec
    metrics: Metrics
    fit_time_s: float
    predict_time_s: float
    model: TrainedRegressor | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "model": self.spec.label(),
            "family": self.spec.family,
            "accuracy_pct": self.metrics.accuracy_pct,
            "rmse": self.metrics.rmse,
            "r2": self.metrics.r2,
            "fit_time_s": self.fit_time_s,
            "predict_time_s": self.predict_time_s,
        }


@dataclass
class Leaderboard:
    entries: list[LeaderboardEntry]
    budget_s: float
    elapsed_s: float
    preset: str

    def head(self) -> LeaderboardEntry:
        return self.entries[0]

    def families(self) -> set:
        return {e.spec.family for e in self.entries}

    def max_fit_time_s(self) -> float:
        return max(e.fit_time_s for e in self.entries)

    def to_json(self) -> dict:
        return {
            "preset": self.preset,
            "budget_s": self.budget_s,
            "elapsed_s": self.elapsed_s,
            "entries": [e.to_json() for e in self.entries],
        }


def greedy_ensemble(pool: list[TrainedRegressor], val: Dataset, target: str,
                    max_iters: int = ENSEMBLE_MAX_ITERS) -> TrainedRegressor:
    """Forward stepwise selection with replacement (selection-count weights).

    Starts from the best single model by validation RMSE and adds whichever
    pool member most reduces the ensemble RMSE, so the result is never worse
    than the best single model on the validation set.
    """
    if not pool:
        raise InvalidConfigError("ensemble pool is empty")
    y = val.latencies(target)
    X = val.features()
    preds = [m.predict(X) for m in pool]

    def rmse(p):
        return float(np.sqrt(np.mean((p - y) ** 2)))

    errors = [rmse(p) for p in preds]
    best_i = int(np.argmin(errors))
    counts = np.zeros(len(pool), dtype=int)
    counts[best_i] = 1
    total = preds[best_i].copy()
    current = errors[best_i]
    for _ in range(max_iters):
        n_next = counts.sum() + 1
        scores = [rmse((total + p) / n_next) for p in preds]
        cand = int(np.argmin(scores))
        if scores[cand] >= current:
            break
        counts[cand] += 1
        total = total + preds[cand]
        current = scores[cand]
    total_count = int(counts.sum())
    members = []
    weights = []
    for m, c in zip(pool, counts):
        if c > 0:
            members.append({"family": m.spec.family,
                            "params": [[k, v] for k, v in m.spec.params],
                            "state": m.state})
            weights.append(c / total_count)
    spec = ModelSpec("weighted_ensemble", (("max_iters", max_iters),))
    ens = TrainedRegressor(spec=spec, scaler=pool[0].scaler,
                           state={"members": members, "weights": weights})
    ens.val_metrics = compute_metrics(y, ens.predict(X))
    return ens


def search(train: Dataset, budget_s: float, preset: str, seed: int,
           target: str = "path1", scaler: FeatureScaler | None = None) -> Leaderboard:
    """Train the candidate schedule for one target under a wall-clock budget.

    Every candidate is fitted on a seeded 75/25 split of `train` and scored
    on the held-back validation part. New candidates stop starting once the
    remaining budget is smaller than the previous candidate's fit time; the
    mandatory ridge default is always trained. The greedy ensemble over the
    trained pool is added as the final entry before sorting by RMSE.
    """
    if budget_s <= 0:
        raise InvalidConfigError(f"budget must be positive, got {budget_s}")
    t_start = time.perf_counter()
    if scaler is None:
        scaler = FeatureScaler.from_data(train.features())
    sub_train, val = split(train, VALIDATION_FRAC, derive_seed(seed, "validation-split"))
    val_X = val.features()
    val_y = val.latencies(target)
    entries: list[LeaderboardEntry] = []
    pool: list[TrainedRegressor] = []
    last_fit = 0.0
    for i, spec in enumerate(candidate_schedule(preset, seed)):
        elapsed = time.perf_counter() - t_start
        if i > 0 and budget_s - elapsed < last_fit:
            break
        model = fit(spec, sub_train, target, derive_seed(seed, f"candidate:{i}"), scaler)
        t0 = time.perf_counter()
        pred = model.predict(val_X)
        model.predict_time_s = time.perf_counter() - t0
        model.val_metrics = compute_metrics(val_y, pred)
        pool.append(model)
        entries.append(LeaderboardEntry(spec, model.val_metrics,
                                        model.fit_time_s, model.predict_time_s, model))
        last_fit = model.fit_time_s
    if len(entries) == 1:
        warnings.warn("budget allowed only the mandatory ridge candidate")
    t0 = time.perf_counter()
    ens = greedy_ensemble(pool, val, target)
    ens.fit_time_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    ens.predict(val_X)
    ens.predict_time_s = time.perf_counter() - t0
    entries.append(LeaderboardEntry(ens.spec, ens.val_metrics,
                                    ens.fit_time_s, ens.predict_time_s, ens))
    entries.sort(key=lambda e: e.metrics.rmse)
    return Leaderboard(entries=entries, budget_s=budget_s,
                       elapsed_s=time.perf_counter() - t_start, preset=preset)


def dataset_fingerprint(ds: Dataset) -> str:
    buf = io.StringIO()
    import csv as _csv
    from .data import CSV_HEADER
    w = _csv.writer(buf)
    w.writerow(CSV_HEADER)
    for s in ds.rows:
        w.writerow([repr(s.config.path1.bandwidth_mbps), s.config.path1.queue_pkts,
                    repr(s.config.path2.bandwidth_mbps), s.config.path2.queue_pkts,
                    repr(s.latency1_s), repr(s.latency2_s)])
    return hashlib.sha256(buf.getvalue().encode()).hexdigest()


@dataclass
class Twin:
    regressors: dict  # {"path1": TrainedRegressor, "path2": TrainedRegressor}
    scaler: FeatureScaler
    metadata: dict

    def __post_init__(self):
        missing = [t for t in TARGETS if t not in self.regressors]
        if missing:
            raise TwinFormatError(f"twin is missing target(s): {missing}")

    @property
    def feature_schema(self) -> tuple:
        return FEATURE_SCHEMA

    def to_json(self) -> dict:
        return {
            "schema_version": TWIN_SCHEMA_VERSION,
            "feature_schema": list(FEATURE_SCHEMA),
            "normalization": self.scaler.to_json(),
            "targets": {t: self.regressors[t].to_json() for t in TARGETS},
            "metadata": self.metadata,
        }


def build_twin(train: Dataset, budget_s: float, preset: str, seed: int,
               ) -> tuple[Twin, dict]:
    """Run the search once per latency target and bundle the leaderboard heads.

    The budget is split equally between the two targets. Returns the twin and
    a {"path1": Leaderboard, "path2": Leaderboard} map.
    """
    scaler = FeatureScaler.from_data(train.features())
    leaderboards = {}
    regressors = {}
    for target in TARGETS:
        lb = search(train, budget_s / 2.0, preset, derive_seed(seed, f"search:{target}"),
                    target=target, scaler=scaler)
        leaderboards[target] = lb
        regressors[target] = lb.head().model
    metadata = {
        "train_fingerprint": dataset_fingerprint(train),
        "train_rows": len(train),
        "seed": seed,
        "preset": preset,
        "budget_s": budget_s,
        "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    return Twin(regressors=regressors, scaler=scaler, metadata=metadata), leaderboards


def save_twin(twin: Twin, path) -> None:
    save_json(twin.to_json(), path)


def load_twin(path) -> Twin:
    doc = load_json(path)
    for key in ("schema_version", "feature_schema", "normalization", "targets", "metadata"):
        if key not in doc:
            raise TwinFormatError(f"twin document missing {key!r}")
    if doc["schema_version"] != TWIN_SCHEMA_VERSION:
        raise TwinFormatError(
            f"unsupported twin schema version {doc['schema_version']!r} "
            f"(expected {TWIN_SCHEMA_VERSION})")
    if tuple(doc["feature_schema"]) != FEATURE_SCHEMA:
        raise TwinFormatError(f"unexpected feature schema {doc['feature_schema']!r}")
    scaler = FeatureScaler.from_json(doc["normalization"])
    if len(scaler.lo) != len(FEATURE_SCHEMA) or len(scaler.hi) != len(FEATURE_SCHEMA):
        raise TwinFormatError("normalization parameters do not match the feature schema")
    regressors = {}
    for target in TARGETS:
        if target not in doc["targets"]:
            raise TwinFormatError(f"twin document missing target {target!r}")
        regressors[target] = TrainedRegressor.from_json(doc["targets"][target], scaler)
    return Twin(regressors=regressors, scaler=scaler, metadata=doc["metadata"])

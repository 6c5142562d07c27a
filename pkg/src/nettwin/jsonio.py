"""JSON helpers and the timing-field quarantine.

Measured wall times and timestamps live under a fixed set of key names so
that determinism checks can strip them mechanically and compare the rest
byte for byte.
"""

from __future__ import annotations

import json

from .errors import TwinFormatError

QUARANTINED_KEYS = frozenset({
    "fit_time_s",
    "predict_time_s",
    "elapsed_s",
    "created_at",
    "timing",
    "wall_time_s",
})


def strip_quarantined(obj):
    """Recursively drop quarantined keys from a JSON-like structure."""
    if isinstance(obj, dict):
        return {k: strip_quarantined(v) for k, v in obj.items()
                if k not in QUARANTINED_KEYS}
    if isinstance(obj, list):
        return [strip_quarantined(v) for v in obj]
    return obj


def save_json(obj, path) -> None:
    with open(path, "w") as f:
        json.dump(obj, f, indent=2)
        f.write("\n")


def load_json(path) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise TwinFormatError(f"{path}: invalid JSON ({exc})") from None

"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors -> 2, I/O -> 3,
domain errors (anything below) -> 4.
"""


class NettwinError(Exception):
    """Base class for all domain errors."""


class InvalidConfigError(NettwinError):
    """A network/flow/sweep/filter configuration violates its invariants."""


class SimulationStuckError(NettwinError):
    """The event cap was exceeded; the simulation would not terminate."""


class DatasetError(NettwinError):
    """Dataset construction or CSV parsing failed."""


class MetricError(NettwinError):
    """A metric is undefined for the given data (e.g. MAPE on zero truth)."""


class TwinFormatError(NettwinError):
    """A persisted twin/leaderboard/report document is invalid or unsupported."""

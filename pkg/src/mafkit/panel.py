"""Panel container for concurrent time series (rows = time steps, columns = series)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class TimeSeriesPanel:
    """An n x p panel of p concurrent series observed at n common time steps.

    Parameters
    ----------
    values : ndarray, shape (n, p)
        One column per series, rows in time order. All entries must be finite.
    labels : sequence of str, optional
        Per-series names (length p).
    time : ndarray, optional
        Strictly increasing time stamps (length n). Row order is always taken
        as time order; `time` is carried for reporting only.
    """

    values: np.ndarray
    labels: tuple[str, ...] | None = None
    time: np.ndarray | None = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InvalidInputError(f"panel values must be 2-D, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise InvalidInputError(f"panel must be non-empty, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise InvalidInputError(
                f"panel contains a non-finite value at row {bad[0] + 1}, column {bad[1] + 1}"
            )
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != values.shape[1]:
                raise InvalidInputError(
                    f"got {len(labels)} labels for {values.shape[1]} series"
                )
            object.__setattr__(self, "labels", labels)
        if self.time is not None:
            time = np.asarray(self.time, dtype=float)
            if time.shape != (values.shape[0],):
                raise InvalidInputError(
                    f"time index length {time.shape} does not match {values.shape[0]} rows"
                )
            if not np.all(np.isfinite(time)):
                raise InvalidInputError("time index contains non-finite values")
            if np.any(np.diff(time) <= 0):
                raise InvalidInputError("time index must be strictly increasing")
            object.__setattr__(self, "time", time)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def column_labels(self) -> tuple[str, ...]:
        """Labels if present, else generated `series_1..series_p` names."""
        if self.labels is not None:
            return self.labels
        return tuple(f"series_{j + 1}" for j in range(self.p))


def as_panel(data) -> TimeSeriesPanel:
    """Coerce an array or panel into a TimeSeriesPanel."""
    if isinstance(data, TimeSeriesPanel):
        return data
    return TimeSeriesPanel(np.asarray(data, dtype=float))

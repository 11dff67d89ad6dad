"""Linear inter-row predictors.

Each predictor estimates a row from its upper and lower neighbors with a
fixed 6-point stencil: weight ``a`` on the four diagonal neighbors
(columns j-1, j+1 of both rows) and weight ``b`` on the two vertical
neighbors (column j of both rows), with ``4a + 2b = 1`` so constants are
preserved. Out-of-range columns at the borders clamp to the nearest valid
column, which keeps the weight sum intact there too.

* P1: plain average of the two rows, ``a = 0, b = 1/2``.
* P2: uniform average of all six neighbors, ``a = b = 1/6``.
* P3: distance-weighted average, ``a = (2 - sqrt(2))/4, b = (sqrt(2) - 1)/2``.
"""

from __future__ import annotations

import enum

import numpy as np


class PredictorKind(enum.Enum):
    P1 = "p1"
    P2 = "p2"
    P3 = "p3"


_P3_A = (2.0 - np.sqrt(2.0)) / 4.0
_P3_B = (np.sqrt(2.0) - 1.0) / 2.0

STENCIL_WEIGHTS: dict[PredictorKind, tuple[float, float]] = {
    PredictorKind.P1: (0.0, 0.5),
    PredictorKind.P2: (1.0 / 6.0, 1.0 / 6.0),
    PredictorKind.P3: (_P3_A, _P3_B),
}


def _shift_clamped(row: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left- and right-shifted copies with edge replication."""
    left = np.concatenate((row[:1], row[:-1]))
    right = np.concatenate((row[1:], row[-1:]))
    return left, right


def stencil_predict(upper: np.ndarray, lower: np.ndarray, a: float, b: float) -> np.ndarray:
    """Apply the 6-point stencil with explicit weights (a diagonals, b vertical)."""
    upper = np.asarray(upper, dtype=np.float64)
    lower = np.asarray(lower, dtype=np.float64)
    if upper.ndim != 1 or upper.shape != lower.shape:
        raise ValueError(f"upper and lower must be equal-length rows, got {upper.shape}, {lower.shape}")
    ul, ur = _shift_clamped(upper)
    ll, lr = _shift_clamped(lower)
    return a * (ul + ur + ll + lr) + b * (upper + lower)


def predict(kind: PredictorKind, upper: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """Predict a row from its two neighbors with the given predictor."""
    a, b = STENCIL_WEIGHTS[kind]
    return stencil_predict(upper, lower, a, b)

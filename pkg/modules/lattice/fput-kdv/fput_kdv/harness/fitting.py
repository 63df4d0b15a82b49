"""Log-log least squares."""

import math
from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from fput_kdv.exceptions import DegenerateFitError


class SlopeFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    slope: float
    intercept: float
    residual: float


def fit_slope(points: Sequence[Tuple[float, float]]) -> SlopeFit:
    """Fit ``ln y = slope ln x + intercept`` by least squares.

    Args:
        points: ``(x, y)`` pairs with ``x, y > 0`` and at least two distinct x.

    Returns:
        Slope, intercept and the root-mean-square residual in log space.

    Raises:
        DegenerateFitError: On fewer than two distinct x or nonpositive data.
    """
    if any(x <= 0.0 or y <= 0.0 for x, y in points):
        raise DegenerateFitError("log-log fit requires positive data")
    if len({x for x, _ in points}) < 2:
        raise DegenerateFitError("log-log fit requires at least two distinct abscissae")
    log_x = np.log([x for x, _ in points])
    log_y = np.log([y for _, y in points])
    slope, intercept = np.polyfit(log_x, log_y, 1)
    residual = log_y - (slope * log_x + intercept)
    return SlopeFit(
        slope=float(slope), intercept=float(intercept), residual=math.sqrt(float(np.mean(residual**2)))
    )

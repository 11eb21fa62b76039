"""Descriptive statistics and the Jarque-Bera normality test.

All moments use the population convention (divide by n). Kurtosis is the
non-excess (Pearson) kurtosis, so a normal law has kurtosis 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class SeriesSummary:
    n: int
    mean: float
    median: float
    min: float
    max: float
    std: float
    skewness: float  # nan when std == 0
    kurtosis: float  # nan when std == 0

    @property
    def degenerate(self) -> bool:
        return not self.std > 0


@dataclass(frozen=True)
class JbResult:
    statistic: float
    p_value: float
    h: bool
    alpha: float


def _as_series(series) -> np.ndarray:
    x = np.asarray(series, dtype=np.float64).ravel()
    if not np.all(np.isfinite(x)):
        raise ValidationError("series contains non-finite values")
    return x


def _moments(x: np.ndarray) -> tuple[float, float, float, float]:
    """Mean, population std, skewness and kurtosis (nan shape when std == 0)."""
    mean = float(x.mean())
    if x.max() == x.min():
        return float(x[0]), 0.0, math.nan, math.nan
    # shape moments are scale free; rescale so tiny or huge data cannot under/overflow
    scale = float(np.abs(x).max())
    y = x / scale
    dev = y - y.mean()
    std_scaled = math.sqrt(float(np.mean(dev**2)))
    if not std_scaled > 0:
        return mean, 0.0, math.nan, math.nan
    z = dev / std_scaled
    return mean, std_scaled * scale, float(np.mean(z**3)), float(np.mean(z**4))


def summarize(series) -> SeriesSummary:
    """Mean, median, extremes, population std, skewness and kurtosis."""
    x = _as_series(series)
    if x.size < 2:
        raise ValidationError(f"summarize needs at least 2 observations, got {x.size}")
    mean, std, skew, kurt = _moments(x)
    return SeriesSummary(
        n=int(x.size),
        mean=mean,
        median=float(np.median(x)),
        min=float(x.min()),
        max=float(x.max()),
        std=std,
        skewness=skew,
        kurtosis=kurt,
    )


def jb_from_moments(n: int, skewness: float, kurtosis: float, alpha: float = 0.05) -> JbResult:
    """Jarque-Bera result from sample size and (non-excess) moments.

    The p-value is the chi-square(2) survival function, which has the closed
    form ``exp(-x / 2)``.
    """
    if not 0 < alpha < 1:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    stat = n / 6.0 * (skewness**2 + (kurtosis - 3.0) ** 2 / 4.0)
    p = math.exp(-stat / 2.0)
    return JbResult(statistic=stat, p_value=p, h=p < alpha, alpha=alpha)


def jarque_bera(series, alpha: float = 0.05) -> JbResult:
    x = _as_series(series)
    if x.size < 8:
        raise ValidationError(f"jarque_bera needs at least 8 observations, got {x.size}")
    s = summarize(x)
    if s.degenerate:
        raise ValidationError("jarque_bera is undefined for a constant series")
    return jb_from_moments(s.n, s.skewness, s.kurtosis, alpha)

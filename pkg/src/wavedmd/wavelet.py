"""Orthonormal dyadic wavelet transform and additive multiresolution analysis.

Level ``j = 1`` is the finest scale and ``j = J`` the coarsest, so a level-6
decomposition yields components ``A_6, D_1, ..., D_6`` with
``x = A_6 + D_1 + ... + D_6``.

Boundaries are handled by periodic extension, which keeps the transform
exactly orthonormal. Series whose length is not a multiple of ``2**J`` can be
zero-padded symmetrically (``boundary="zeropad"``); components are cropped
back to the original support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LevelError, StructureError, ValidationError

BOUNDARIES = ("periodic", "zeropad")


@dataclass(frozen=True, eq=False)
class FilterPair:
    name: str
    lowpass: np.ndarray
    highpass: np.ndarray

    @classmethod
    def from_lowpass(cls, name, h) -> "FilterPair":
        h = np.asarray(h, dtype=np.float64)
        # quadrature mirror: g[k] = (-1)^k h[L-1-k]
        g = h[::-1] * (-1.0) ** np.arange(h.size)
        return cls(name, h, g)

    def __len__(self):
        return self.lowpass.size


def _db2_lowpass():
    s3 = math.sqrt(3.0)
    return np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * math.sqrt(2.0))


FILTERS = {
    "haar": FilterPair.from_lowpass("haar", [1 / math.sqrt(2.0), 1 / math.sqrt(2.0)]),
    "db2": FilterPair.from_lowpass("db2", _db2_lowpass()),
}


def get_filter(name) -> FilterPair:
    if isinstance(name, FilterPair):
        return name
    try:
        return FILTERS[str(name).lower()]
    except KeyError:
        raise ValidationError(f"unknown wavelet filter {name!r}; choose from {sorted(FILTERS)}") from None


@dataclass(frozen=True, eq=False)
class WaveletCoefficients:
    """Pyramid output: ``details[j - 1]`` holds level-j detail coefficients."""

    details: tuple
    approx: np.ndarray
    length: int
    filter_name: str = "haar"
    pad_left: int = 0
    pad_right: int = 0

    @property
    def levels(self) -> int:
        return len(self.details)

    def detail(self, j: int) -> np.ndarray:
        if not 1 <= j <= self.levels:
            raise LevelError(f"level {j} outside 1..{self.levels}")
        return self.details[j - 1]

    @property
    def padded(self) -> bool:
        return bool(self.pad_left or self.pad_right)

    def energy(self) -> float:
        return float(sum(np.dot(d, d) for d in self.details) + np.dot(self.approx, self.approx))


@dataclass(frozen=True, eq=False)
class MraDecomposition:
    approximation: np.ndarray
    details: tuple = field(default_factory=tuple)

    @property
    def levels(self) -> int:
        return len(self.details)

    def total(self) -> np.ndarray:
        return self.approximation + np.sum(self.details, axis=0)


def _analysis_step(x, f: FilterPair):
    n = x.size
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(len(f))[None, :]) % n
    win = x[idx]
    return win @ f.lowpass, win @ f.highpass


def _synthesis_step(a, d, f: FilterPair):
    half = a.size
    n = 2 * half
    out = np.zeros(n)
    idx = (2 * np.arange(half)[:, None] + np.arange(len(f))[None, :]) % n
    np.add.at(out, idx, a[:, None] * f.lowpass[None, :] + d[:, None] * f.highpass[None, :])
    return out


def _check_levels(length: int, levels: int):
    if int(levels) != levels or levels < 1:
        raise LevelError(f"level count must be a positive integer, got {levels}")
    if length < 2**levels:
        raise LevelError(f"series of length {length} is too short for {levels} levels (needs {2**levels})")


def dwt_forward(series, filt="haar", levels: int = 6, boundary: str = "periodic") -> WaveletCoefficients:
    """Mallat pyramid: level 1 from the series, level j from the level j-1 approximation.

    Raises
    ------
    LevelError
        If the series is shorter than ``2**levels``, or (periodic boundary)
        its length is not a multiple of ``2**levels``.
    """
    f = get_filter(filt)
    x = np.asarray(series, dtype=np.float64).ravel()
    if boundary not in BOUNDARIES:
        raise ValidationError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
    _check_levels(x.size, levels)
    block = 2**levels
    pad_left = pad_right = 0
    if x.size % block:
        if boundary == "periodic":
            raise LevelError(
                f"length {x.size} is not a multiple of 2**{levels}={block}; use boundary='zeropad'"
            )
        extra = block - x.size % block
        pad_left, pad_right = extra // 2, extra - extra // 2
        x = np.concatenate([np.zeros(pad_left), x, np.zeros(pad_right)])

    details = []
    a = x
    for _ in range(levels):
        a, d = _analysis_step(a, f)
        details.append(d)
    return WaveletCoefficients(tuple(details), a, x.size - pad_left - pad_right, f.name, pad_left, pad_right)


def dwt_inverse(coeffs: WaveletCoefficients, filt=None) -> np.ndarray:
    """Perfect-reconstruction synthesis; returns the series on its original support."""
    f = get_filter(filt if filt is not None else coeffs.filter_name)
    if f.name != coeffs.filter_name:
        raise StructureError(f"coefficients came from {coeffs.filter_name!r}, not {f.name!r}")
    full = coeffs.length + coeffs.pad_left + coeffs.pad_right
    J = coeffs.levels
    if J < 1:
        raise StructureError("no detail levels")
    for j, d in enumerate(coeffs.details, start=1):
        if np.asarray(d).size != full // 2**j:
            raise StructureError(f"level {j} has {np.asarray(d).size} coefficients, expected {full // 2**j}")
    if np.asarray(coeffs.approx).size != full // 2**J:
        raise StructureError(f"approximation has {np.asarray(coeffs.approx).size} coefficients, expected {full // 2**J}")

    a = np.asarray(coeffs.approx, dtype=np.float64)
    for d in reversed(coeffs.details):
        a = _synthesis_step(a, np.asarray(d, dtype=np.float64), f)
    return a[coeffs.pad_left : coeffs.pad_left + coeffs.length]


def _keep_only(coeffs: WaveletCoefficients, level: int | None) -> WaveletCoefficients:
    details = tuple(
        np.asarray(d) if j == level else np.zeros_like(d) for j, d in enumerate(coeffs.details, start=1)
    )
    approx = coeffs.approx if level is None else np.zeros_like(coeffs.approx)
    return WaveletCoefficients(details, approx, coeffs.length, coeffs.filter_name, coeffs.pad_left, coeffs.pad_right)


def mra_from_coefficients(coeffs: WaveletCoefficients) -> MraDecomposition:
    approx = dwt_inverse(_keep_only(coeffs, None))
    details = tuple(dwt_inverse(_keep_only(coeffs, j)) for j in range(1, coeffs.levels + 1))
    return MraDecomposition(approx, details)


def mra(series, filt="haar", levels: int = 6, boundary: str = "periodic") -> MraDecomposition:
    """Split a series into its level-J approximation and the detail components D_1..D_J."""
    return mra_from_coefficients(dwt_forward(series, filt, levels, boundary))

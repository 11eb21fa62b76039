"""Wavelet multifractal spectrum.

Pipeline: detail coefficients -> structure functions ``S_j(p) = sum_k |d_jk|^p``
-> Besov exponent ``b(p)`` -> singularity spectrum
``d(alpha) = min_p (alpha * p - b(p) + 1)`` -> concavity verdict.

The Besov exponent is defined through the growth of ``S_j(p)`` as the
resolution refines. Levels here are numbered from the finest (``j = 1``) to
the coarsest (``j = J``), so the regression runs on the resolution index
``r_j = J - j``, which increases toward fine scales::

    b(p) = 1 - slope of log2 S_j(p) against r_j

With this orientation a series whose coefficient magnitudes do not change
across scales has ``b(p) = 0`` for every p, and a binomial cascade with
weights (m0, m1) has ``b(p) = 1 - log2(m0**p + m1**p)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, ValidationError
from .wavelet import WaveletCoefficients

CONCAVITY_TOL_EXACT = 1e-8
CONCAVITY_TOL_ESTIMATED = 1e-3


def default_p_grid(all_nonzero: bool = True) -> np.ndarray:
    start = -5.0 if all_nonzero else 0.0
    return np.round(np.arange(start, 5.0 + 1e-9, 0.25), 10)


def default_alpha_grid() -> np.ndarray:
    return np.round(np.arange(0.0, 1.5 + 1e-9, 0.01), 10)


def default_fit_range(levels: int) -> tuple[int, int]:
    """Levels 2..J-1: drops the finest and the shortest (coarsest) level."""
    return (2, levels - 1)


@dataclass(frozen=True, eq=False)
class StructureFunctions:
    """``values[j - 1, m]`` is S_j(p_grid[m]); ``zero_counts[j - 1]`` counts exact zeros."""

    levels: np.ndarray
    p_grid: np.ndarray
    values: np.ndarray
    zero_counts: np.ndarray
    n_levels: int


@dataclass(frozen=True, eq=False)
class MultifractalSpectrum:
    p_grid: np.ndarray
    S: np.ndarray
    b: np.ndarray
    fit_residual: np.ndarray
    alpha_grid: np.ndarray
    d: np.ndarray
    argmin_p: np.ndarray
    fit_range: tuple
    concave: bool
    concavity_gap: float
    zero_counts: np.ndarray


def structure_functions(coeffs: WaveletCoefficients, p_grid) -> StructureFunctions:
    """Exact sums of ``|d_jk|^p`` per level and order.

    Zero coefficients are left out of the sum for ``p < 0``.
    """
    p = np.asarray(p_grid, dtype=np.float64).ravel()
    if p.size == 0:
        raise ValidationError("p_grid is empty")
    if not np.all(np.isfinite(p)):
        raise ValidationError("p_grid must be finite")
    J = coeffs.levels
    S = np.zeros((J, p.size))
    zeros = np.zeros(J, dtype=np.int64)
    usable = 0
    for j in range(1, J + 1):
        a = np.abs(np.asarray(coeffs.detail(j), dtype=np.float64))
        nz = a[a > 0]
        zeros[j - 1] = a.size - nz.size
        if nz.size:
            usable += 1
        for m, pm in enumerate(p):
            if pm < 0:
                S[j - 1, m] = np.sum(nz**pm)
            else:
                S[j - 1, m] = np.sum(a**pm)
    if usable < 3:
        raise EstimationError(f"only {usable} levels carry nonzero coefficients; need at least 3")
    return StructureFunctions(np.arange(1, J + 1), p, S, zeros, J)


def _check_fit_range(fit_range, n_levels):
    lo, hi = (int(v) for v in fit_range)
    if lo < 1 or hi > n_levels or hi - lo + 1 < 3:
        raise ValidationError(f"fit range {lo}:{hi} must hold at least 3 levels within 1..{n_levels}")
    return lo, hi


def besov_exponent(S, fit_range=None, n_levels: int | None = None, p_grid=None):
    """OLS estimate of ``b(p)`` over the levels in ``fit_range`` (inclusive, 1-based).

    ``S`` is either a :class:`StructureFunctions` or a (levels x orders)
    array whose row ``j - 1`` belongs to level j. Returns ``(b, residual)``
    where ``residual`` is the max-abs residual of each log-log fit.
    """
    if isinstance(S, StructureFunctions):
        n_levels = S.n_levels
        p_grid = S.p_grid
        values = S.values
    else:
        values = np.atleast_2d(np.asarray(S, dtype=np.float64))
        n_levels = n_levels or values.shape[0]
    if fit_range is None:
        fit_range = default_fit_range(n_levels)
    lo, hi = _check_fit_range(fit_range, n_levels)
    block = values[lo - 1 : hi]
    bad = np.argwhere(~(block > 0))
    if bad.size:
        j, m = bad[0]
        p_label = p_grid[m] if p_grid is not None else m
        raise EstimationError(f"S_j(p) is not positive at j={lo + j}, p={p_label}")
    resolution = n_levels - np.arange(lo, hi + 1, dtype=np.float64)
    y = np.log2(block)
    design = np.column_stack([resolution, np.ones_like(resolution)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    slope = coef[0]
    residual = np.max(np.abs(y - design @ coef), axis=0)
    return 1.0 - slope, residual


def singularity_spectrum(b, p_grid, alpha_grid):
    """Discrete Legendre transform ``d(alpha) = min_p (alpha p - b(p) + 1)``.

    Returns ``(d, argmin_p)``; ties go to the smallest p.
    """
    b = np.asarray(b, dtype=np.float64).ravel()
    p = np.asarray(p_grid, dtype=np.float64).ravel()
    alpha = np.asarray(alpha_grid, dtype=np.float64).ravel()
    if p.size == 0 or alpha.size == 0:
        raise ValidationError("p and alpha grids must be nonempty")
    if b.shape != p.shape:
        raise ValidationError(f"{b.size} exponents for {p.size} orders")
    if not np.all(np.isfinite(b)):
        raise ValidationError("Besov exponents must be finite")
    table = alpha[:, None] * p[None, :] - b[None, :] + 1.0
    k = np.argmin(table, axis=1)
    return table[np.arange(alpha.size), k], p[k]


def concavity_test(alpha, d, tol: float = CONCAVITY_TOL_EXACT) -> tuple[bool, float]:
    """Check that second differences of ``d`` over ``alpha`` stay below ``tol``.

    For a non-uniform grid the slope change is scaled by the mean of the two
    neighbouring steps, which reduces to the plain second difference on a
    uniform grid. Returns ``(concave, gap)`` with gap the largest positive
    second difference (0 when there is none).
    """
    a = np.asarray(alpha, dtype=np.float64).ravel()
    y = np.asarray(d, dtype=np.float64).ravel()
    if a.size != y.size:
        raise ValidationError("alpha and d must have equal length")
    if a.size < 3:
        raise ValidationError("concavity test needs at least 3 points")
    h = np.diff(a)
    if np.any(h <= 0):
        raise ValidationError("alpha must be strictly increasing")
    slopes = np.diff(y) / h
    second = np.diff(slopes) * (h[:-1] + h[1:]) / 2.0
    gap = float(max(0.0, second.max()))
    return gap <= tol, gap


def multifractal_spectrum(
    coeffs: WaveletCoefficients,
    p_grid=None,
    alpha_grid=None,
    fit_range=None,
    tol: float = CONCAVITY_TOL_ESTIMATED,
) -> MultifractalSpectrum:
    if p_grid is None:
        all_nonzero = all(np.all(np.asarray(d) != 0) for d in coeffs.details)
        p_grid = default_p_grid(all_nonzero)
    if alpha_grid is None:
        alpha_grid = default_alpha_grid()
    sf = structure_functions(coeffs, p_grid)
    if fit_range is None:
        fit_range = default_fit_range(sf.n_levels)
    b, residual = besov_exponent(sf, fit_range)
    alpha = np.asarray(alpha_grid, dtype=np.float64)
    d, argmin = singularity_spectrum(b, sf.p_grid, alpha)
    concave, gap = concavity_test(alpha, d, tol) if alpha.size >= 3 else (True, 0.0)
    return MultifractalSpectrum(
        p_grid=sf.p_grid,
        S=sf.values,
        b=b,
        fit_residual=residual,
        alpha_grid=alpha,
        d=d,
        argmin_p=argmin,
        fit_range=tuple(int(v) for v in fit_range),
        concave=bool(concave),
        concavity_gap=gap,
        zero_counts=sf.zero_counts,
    )

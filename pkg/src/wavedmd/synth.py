"""Seeded synthetic generators used as oracles for the estimators.

Randomness always comes from ``numpy.random.Generator(numpy.random.PCG64(seed))``;
Gaussian noise is drawn with ``Generator.standard_normal`` (ziggurat), which
numpy keeps stable for a given seed and bit generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .ingest import Panel
from .wavelet import WaveletCoefficients

INFINITE = math.inf

# Target daily frequencies and cycle durations of an eight-mode price panel,
# most powerful first.
PRICE_CYCLE_FREQUENCIES = (0.0011, 0.0015, 0.0, 0.2154, 0.0517, 0.0320, 0.1436, 0.0030)
PRICE_CYCLE_DURATIONS = (925, 654, INFINITE, 5, 19, 31, 7, 332)
# The frequencies are rounded to 4 decimals: 1/0.0011 is 909 days, not
# 925. Plant the whole-day period where it reproduces the rounded frequency,
# otherwise the period implied by the frequency.
PRICE_CYCLE_PERIODS = tuple(
    INFINITE if f == 0 else (float(d) if round(1.0 / d, 4) == f else 1.0 / f)
    for f, d in zip(PRICE_CYCLE_FREQUENCIES, PRICE_CYCLE_DURATIONS)
)


def rng_for(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class CycleSpec:
    """One planted cycle.

    ``loading`` may be complex: entry ``n`` then scales series ``n`` by
    ``|loading[n]|`` and shifts its phase by ``angle(loading[n])``. A real
    loading puts the cycle on a single direction of the panel, which no
    linear one-step model can oscillate in, so DMD oracles use complex
    loadings.
    """

    period: float
    loading: np.ndarray
    amplitude: float = 1.0
    phase: float = 0.0
    growth_rate: float = 0.0

    def __post_init__(self):
        if not (self.period > 0):
            raise ValidationError(f"period must be positive or INFINITE, got {self.period}")
        if self.amplitude < 0:
            raise ValidationError(f"amplitude must be non-negative, got {self.amplitude}")
        object.__setattr__(self, "loading", np.atleast_1d(np.asarray(self.loading)))

    @property
    def frequency(self) -> float:
        return 0.0 if math.isinf(self.period) else 1.0 / self.period


def _series_ids(n: int, prefix: str = "B") -> list:
    return [f"{prefix}{i + 1}" for i in range(n)]


def gen_linear_system(A, x0, T: int, series_ids=None) -> Panel:
    """Columns ``x_k = A^k x0`` for k = 0..T-1."""
    A = np.asarray(A, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"A must be square, got shape {A.shape}")
    if A.shape[0] != x0.size:
        raise ValidationError(f"A is {A.shape[0]}x{A.shape[1]} but x0 has {x0.size} entries")
    if T < 2:
        raise ValidationError(f"T must be at least 2, got {T}")
    X = np.empty((x0.size, T))
    X[:, 0] = x0
    for k in range(1, T):
        X[:, k] = A @ X[:, k - 1]
    return Panel(series_ids or _series_ids(x0.size), np.arange(T), X, 1)


def gen_planted_cycles(specs, T: int, noise_std: float = 0.0, seed=0, series_ids=None) -> Panel:
    """Sum of ``amplitude * exp(growth t) * Re(loading * exp(i(2 pi t / period + phase)))`` plus noise."""
    specs = list(specs)
    if not specs:
        raise ValidationError("at least one cycle spec is required")
    n = specs[0].loading.size
    if any(s.loading.size != n for s in specs):
        raise ValidationError("all cycle loadings must have the same length")
    if noise_std < 0:
        raise ValidationError(f"noise_std must be non-negative, got {noise_std}")
    if T < 2:
        raise ValidationError(f"T must be at least 2, got {T}")
    t = np.arange(T, dtype=np.float64)
    X = np.zeros((n, T))
    for s in specs:
        arg = 2 * np.pi * s.frequency * t + s.phase
        carrier = s.amplitude * np.exp(s.growth_rate * t) * np.exp(1j * arg)
        X += (s.loading.astype(complex)[:, None] * carrier[None, :]).real
    if noise_std > 0:
        X += noise_std * rng_for(seed).standard_normal((n, T))
    return Panel(series_ids or _series_ids(n), np.arange(T), X, 1)


def price_cycle_specs(n_series: int = 16, seed=0, growth_rate: float = -1e-4, scale: float = 10.0):
    """Cycle specs whose power ranking and frequencies reproduce the eight price-cycle targets.

    Periods are ``PRICE_CYCLE_PERIODS`` (e.g. the "5 day" cycle has period
    1/0.2154 = 4.64 days). Powers decrease in list order; oscillating
    loadings are random complex unit vectors and the constant offset has a
    positive real loading. ``N >= 15`` is needed for the 15 modes to be
    separable.
    """
    rng = rng_for(seed)
    n_rows = len(PRICE_CYCLE_FREQUENCIES)
    specs = []
    for rank, period in enumerate(PRICE_CYCLE_PERIODS):
        z = rng.standard_normal(n_series) + 1j * rng.standard_normal(n_series)
        target = scale * (n_rows - rank)  # sqrt of the intended mode power
        if math.isinf(period):
            z = np.abs(z)
            amp, growth = target, 0.0
        else:
            # a cosine splits into two conjugate modes of amplitude amp / 2 each
            amp, growth = 2.0 * target, growth_rate
        specs.append(CycleSpec(period=period, loading=z / np.linalg.norm(z), amplitude=amp, growth_rate=growth))
    return specs


def random_diagonalizable(n: int, rng: np.random.Generator, radius=(0.9, 1.04)):
    """Real n x n matrix with distinct eigenvalues of modulus in ``radius``.

    Eigenvalues come in conjugate pairs (plus one real eigenvalue when n is
    odd); eigenvectors are random, so A is generally non-normal.
    """
    lo, hi = radius
    vals = []
    vecs = []
    for _ in range(n // 2):
        mod = rng.uniform(lo, hi)
        ang = rng.uniform(0.05, np.pi - 0.05)
        vals.append(mod * np.exp(1j * ang))
        vecs.append(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    # realify: blocks [[Re, Im], [-Im, Re]] on the basis (Re v, Im v)
    V = np.zeros((n, n))
    D = np.zeros((n, n))
    for k, (lam, v) in enumerate(zip(vals, vecs)):
        V[:, 2 * k], V[:, 2 * k + 1] = v.real, v.imag
        D[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = [[lam.real, lam.imag], [-lam.imag, lam.real]]
    if n % 2:
        V[:, -1] = rng.standard_normal(n)
        D[-1, -1] = rng.uniform(lo, hi) * rng.choice([-1.0, 1.0])
    A = V @ D @ np.linalg.inv(V)
    return A


def gen_cascade(depth: int, multipliers=(0.4, 0.6), seed=0) -> WaveletCoefficients:
    """Binomial multiplicative cascade on the dyadic tree of detail coefficients.

    The coarsest level (``j = depth``) holds a single coefficient of
    magnitude 1; each coefficient at level j hands its magnitude times
    ``m0`` to one child and times ``m1`` to the other at level j-1. The seed
    picks which child gets which weight and the coefficient signs, neither of
    which affects ``S_j(p) = (m0**p + m1**p) ** (depth - j)``.
    """
    m0, m1 = (float(m) for m in multipliers)
    if not (m0 > 0 and m1 > 0):
        raise ValidationError(f"cascade multipliers must be positive, got {multipliers}")
    if int(depth) != depth or depth < 3:
        raise ValidationError(f"cascade depth must be an integer >= 3, got {depth}")
    rng = rng_for(seed)
    mags = [np.ones(1)]
    for _ in range(depth - 1):
        parent = mags[-1]
        swap = rng.random(parent.size) < 0.5
        left = np.where(swap, m1, m0)
        right = np.where(swap, m0, m1)
        child = np.empty(2 * parent.size)
        child[0::2] = parent * left
        child[1::2] = parent * right
        mags.append(child)
    # mags[0] is the coarsest level; details are stored finest first
    details = tuple(m * rng.choice([-1.0, 1.0], size=m.size) for m in reversed(mags))
    return WaveletCoefficients(details, np.zeros(1), 2**depth, "haar")


def cascade_structure_function(depth: int, multipliers, level: int, p: float) -> float:
    """Closed form ``S_j(p)`` of :func:`gen_cascade`."""
    m0, m1 = multipliers
    return float((m0**p + m1**p) ** (depth - level))

"""Exact dynamic mode decomposition of a panel and power-ranked mode reports.

The panel is read as a sequence of snapshots ``x_1..x_T`` (one column per
day). Exact DMD fits the one-step linear map ``x_{k+1} ~ A x_k`` in the
least-squares sense and expands the data as::

    x(t) = sum_i Phi_i * b_i * exp(omega_i * (t - t_0)),   omega_i = ln(lambda_i) / dt

Mode power is ``|b_i|**2`` (modes have unit norm, so the amplitude carries
the scale); ``power="amplitude"`` ranks by ``|b_i|`` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RankError, ValidationError
from .ingest import Panel

DEFAULT_ENERGY = 0.999
POWER_KINDS = ("squared", "amplitude")
INF = math.inf


@dataclass(frozen=True, eq=False)
class DmdModel:
    eigenvalues: np.ndarray
    modes: np.ndarray  # N x r, unit-norm columns
    amplitudes: np.ndarray
    omega: np.ndarray  # nan where lambda == 0
    dt: float
    t0: int
    t_end: int
    svd_energy: float
    singular_values: np.ndarray
    series_ids: tuple

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    @property
    def decayed(self) -> np.ndarray:
        """Modes with ``lambda == 0`` (gone after one step; omega undefined)."""
        return self.eigenvalues == 0

    @property
    def frequencies(self) -> np.ndarray:
        """Cycles per day, ``|Im omega| / 2 pi``."""
        return np.abs(np.angle(self.eigenvalues)) / (2 * np.pi * self.dt)

    @property
    def growth_rates(self) -> np.ndarray:
        return self.omega.real


@dataclass(frozen=True)
class ModeRow:
    mode: int  # index into DmdModel.eigenvalues
    eigenvalue: complex
    power: float
    frequency: float
    duration: float  # whole days, or math.inf
    growth_rate: float
    nyquist: bool = False
    decayed: bool = False

    @property
    def duration_label(self) -> str:
        return "Inf" if math.isinf(self.duration) else str(int(self.duration))


@dataclass(frozen=True)
class ModeReport:
    """One row per real mode or conjugate pair, sorted by power (rank order)."""

    rows: tuple
    power_kind: str = "squared"

    def __len__(self):
        return len(self.rows)

    def top(self, k: int) -> tuple:
        return self.rows[:k]

    @property
    def rank_order(self) -> list:
        return [r.mode for r in self.rows]


def cycle_duration(frequency: float) -> float:
    """Nearest whole number of days per cycle; ``inf`` for zero frequency."""
    if frequency == 0:
        return INF
    return float(math.floor(1.0 / frequency + 0.5))


def _select_rank(s: np.ndarray, rank, energy) -> int:
    if rank is not None:
        if rank < 0 or int(rank) != rank:
            raise ValidationError(f"rank must be a non-negative integer, got {rank}")
        return int(rank)
    energy = DEFAULT_ENERGY if energy is None else energy
    if not 0 < energy <= 1:
        raise ValidationError(f"energy threshold must be in (0, 1], got {energy}")
    total = np.sum(s**2)
    if total == 0:
        return 0
    cum = np.cumsum(s**2) / total
    return int(np.searchsorted(cum, energy - 1e-15) + 1)


def fit_dmd(panel: Panel, rank: int | None = None, energy: float | None = None) -> DmdModel:
    """Exact DMD with SVD truncation.

    Give either an explicit ``rank`` or an ``energy`` threshold (smallest
    rank whose squared singular values reach that fraction; default 0.999).

    Raises
    ------
    RankError
        A singular value inside the truncation is numerically zero.
    """
    X = panel.values
    n, t = X.shape
    if t < 3:
        raise ValidationError(f"DMD needs at least 3 snapshots, got {t}")
    X1, X2 = X[:, :-1], X[:, 1:]
    U, s, Vh = np.linalg.svd(X1, full_matrices=False)
    r = _select_rank(s, rank, energy)
    if r > min(n, t - 1):
        raise ValidationError(f"rank {r} exceeds min(N, T-1) = {min(n, t - 1)}")
    zero_tol = max(X1.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    if r and (s[r - 1] <= zero_tol or s[0] == 0):
        raise RankError(f"singular value {r} is numerically zero; choose a rank below {int(np.sum(s > zero_tol))}")
    energy_kept = float(np.sum(s[:r] ** 2) / np.sum(s**2)) if np.any(s) else 0.0
    if r == 0:
        empty = np.zeros(0, dtype=complex)
        return DmdModel(empty, np.zeros((n, 0), dtype=complex), empty, empty, float(panel.dt),
                        int(panel.times[0]), int(panel.times[-1]), energy_kept, s, panel.series_ids)

    Ur, sr, Vr = U[:, :r], s[:r], Vh[:r].conj().T
    X2V = X2 @ Vr / sr
    Atilde = Ur.conj().T @ X2V
    lam, W = np.linalg.eig(Atilde)
    Phi = X2V @ W
    norms = np.linalg.norm(Phi, axis=0)
    # a mode with lambda == 0 can have a null exact mode; fall back to the projected one
    small = norms <= 1e-14 * max(1.0, norms.max())
    if np.any(small):
        Phi[:, small] = Ur @ W[:, small]
        norms = np.linalg.norm(Phi, axis=0)
    Phi = Phi / norms
    b, *_ = np.linalg.lstsq(Phi, X[:, 0].astype(complex), rcond=None)

    lam = lam.astype(complex)
    omega = np.full(r, np.nan + 0j)
    nz = lam != 0
    omega[nz] = np.log(lam[nz]) / panel.dt
    return DmdModel(lam, Phi, b, omega, float(panel.dt), int(panel.times[0]), int(panel.times[-1]),
                    energy_kept, s, panel.series_ids)


def mode_power(model: DmdModel, kind: str = "squared") -> np.ndarray:
    if kind not in POWER_KINDS:
        raise ValidationError(f"power kind must be one of {POWER_KINDS}, got {kind!r}")
    a = np.abs(model.amplitudes)
    return a**2 if kind == "squared" else a


def mode_report(model: DmdModel, power: str = "squared") -> ModeReport:
    """Rank modes by power; conjugate pairs collapse to their positive-frequency member.

    Ties in power are broken by ascending frequency, then ascending mode index.
    """
    pw = mode_power(model, power)
    freq = model.frequencies
    rows = []
    for i, lam in enumerate(model.eigenvalues):
        if lam.imag < 0:
            continue
        decayed = lam == 0
        nyquist = lam.imag == 0 and lam.real < 0
        f = float(freq[i])
        rows.append(
            ModeRow(
                mode=i,
                eigenvalue=complex(lam),
                power=float(pw[i]),
                frequency=f,
                duration=cycle_duration(f),
                growth_rate=-INF if decayed else float(model.omega[i].real),
                nyquist=bool(nyquist),
                decayed=bool(decayed),
            )
        )
    rows.sort(key=lambda r: (-r.power, r.frequency, r.mode))
    return ModeReport(tuple(rows), power)


def _time_offsets(model: DmdModel, times) -> np.ndarray:
    return np.asarray(times, dtype=np.float64) - model.t0


def is_extrapolation(model: DmdModel, times) -> bool:
    t = np.asarray(times)
    return bool(np.any(t < model.t0) or np.any(t > model.t_end))


def temporal_dynamics(model: DmdModel, times, combine: bool = False):
    """Per-mode traces ``b_i exp(omega_i (t - t0))``.

    Returns ``(mode_indices, traces)`` where ``traces`` has one row per
    listed mode. Modes with ``lambda == 0`` are left out. With
    ``combine=True`` each conjugate pair becomes one real trace
    ``2 Re(b exp(omega t))`` listed under its positive-frequency member, and
    real modes contribute their real part.
    """
    dtau = _time_offsets(model, times)
    keep = [i for i in range(model.rank) if not model.decayed[i]]
    if combine:
        keep = [i for i in keep if model.eigenvalues[i].imag >= 0]
    if not keep:
        return np.zeros(0, dtype=int), np.zeros((0, dtau.size), dtype=complex if not combine else float)
    idx = np.array(keep)
    traces = model.amplitudes[idx, None] * np.exp(model.omega[idx, None] * dtau[None, :])
    if combine:
        factor = np.where(model.eigenvalues[idx].imag > 0, 2.0, 1.0)
        traces = factor[:, None] * traces.real
    return idx, traces


def reconstruct_values(model: DmdModel, times) -> np.ndarray:
    """Complex N x len(times) sum of mode contributions (decayed modes excluded)."""
    dtau = _time_offsets(model, times)
    n = len(model.series_ids)
    if model.rank == 0:
        return np.zeros((n, dtau.size), dtype=complex)
    idx, traces = temporal_dynamics(model, times)
    return model.modes[:, idx] @ traces


def reconstruct(model: DmdModel, times=None) -> Panel:
    """Real part of the mode expansion as a Panel (defaults to the fitted time span)."""
    if times is None:
        times = np.arange(model.t0, model.t_end + 1, int(model.dt))
    times = np.asarray(times)
    values = reconstruct_values(model, times).real
    dt = int(times[1] - times[0]) if times.size > 1 else int(model.dt)
    return Panel(model.series_ids, times, values, dt)


def phase_magnitude(model: DmdModel, mode: int):
    """Element-wise magnitude and phase in (-pi, pi] of one mode, in series order."""
    if not 0 <= mode < model.rank:
        raise IndexError(f"mode {mode} out of range 0..{model.rank - 1}")
    phi = model.modes[:, mode]
    mag = np.abs(phi)
    phase = np.angle(phi)
    phase = np.where(phase <= -np.pi, np.pi, phase)
    return mag, phase

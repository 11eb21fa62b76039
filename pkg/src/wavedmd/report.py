"""Stable CSV/JSON output for analysis results.

Display tables are rounded (daily frequencies to 4 decimals, descriptive
statistics to 2); JSON files and plot-data CSVs carry full precision
(``repr`` floats). Every bundle directory
gets a ``manifest.json`` listing each file with its SHA-256, so two runs can
be compared byte for byte.

Manifest layout::

    {
      "schema": "wavedmd.manifest/1",
      "tool": "wavedmd", "version": "...",
      "provenance": {"config_hash": ..., "seed": ..., "input_sha256": ...},
      "panel": {"series_ids": [...], "n_series": N, "n_times": T, "dt": 1, ...},
      "artifacts": {
        "<class>": {"status": "ok", "files": [{"path": ..., "bytes": ..., "sha256": ...}]}
                 | {"status": "skipped"}
      }
    }

with artifact classes ``panel``, ``stats``, ``wavelet``, ``multifractal`` and
``dmd``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dmd import DmdModel, ModeReport, phase_magnitude, temporal_dynamics
from .errors import ValidationError, WavedmdError
from .ingest import Panel, panel_to_csv, stack_for_plot
from .multifractal import MultifractalSpectrum
from .wavelet import MraDecomposition

ARTIFACT_CLASSES = ("panel", "stats", "wavelet", "multifractal", "dmd")
MANIFEST_SCHEMA = "wavedmd.manifest/1"


class WriteError(WavedmdError):
    exit_code = 1


@dataclass
class AnalysisBundle:
    """Everything one pipeline run produced; ``None`` marks a skipped stage."""

    panel: Panel
    analysed_panel: Panel | None = None
    normalize: str = "minmax"
    summaries: dict | None = None  # id -> (SeriesSummary, JbResult | None)
    decompositions: dict | None = None  # id -> MraDecomposition
    spectra: dict | None = None  # id -> MultifractalSpectrum
    dmd_model: DmdModel | None = None
    mode_report: ModeReport | None = None
    top_k: int = 8
    stack_gap: float = 1.2
    provenance: dict = field(default_factory=dict)

    def stage_status(self) -> dict:
        return {
            "panel": "ok",
            "stats": "ok" if self.summaries is not None else "skipped",
            "wavelet": "ok" if self.decompositions is not None else "skipped",
            "multifractal": "ok" if self.spectra is not None else "skipped",
            "dmd": "ok" if self.dmd_model is not None else "skipped",
        }


def _num(v) -> str:
    return repr(float(v))


def _fixed(v, digits) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    out = f"{v:.{digits}f}"
    return "0." + "0" * digits if out == "-0." + "0" * digits else out


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "Inf" if v > 0 else "-Inf"
        return v
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


# -- tables -----------------------------------------------------------------


def mode_table_csv(report: ModeReport, k: int) -> str:
    """Rows ``mode, daily_frequency, duration`` for the ``k`` most powerful modes."""
    if k < 0 or k > len(report):
        raise ValidationError(f"k={k} outside 0..{len(report)}")
    rows = [[rank, _fixed(r.frequency, 4), r.duration_label] for rank, r in enumerate(report.top(k), start=1)]
    return _csv_text(["mode", "daily_frequency", "duration"], rows)


def emit_mode_table(report: ModeReport, k: int, path) -> Path:
    return _write(Path(path), mode_table_csv(report, k))


STATS_COLUMNS = ["id", "mean", "median", "min", "max", "std", "skewness", "kurtosis", "jb_h", "jb_p"]


def stats_csv(summaries: dict) -> str:
    """Descriptive statistics table (2 decimals; kurtosis is non-excess, normal = 3)."""
    rows = []
    for sid, (s, jb) in summaries.items():
        jb_h = "" if jb is None else str(int(jb.h))
        jb_p = "" if jb is None else _fixed(jb.p_value, 2)
        rows.append([sid, *(_fixed(getattr(s, c), 2) for c in STATS_COLUMNS[1:8]), jb_h, jb_p])
    return _csv_text(STATS_COLUMNS, rows)


def stats_json(summaries: dict) -> str:
    out = {}
    for sid, (s, jb) in summaries.items():
        entry = {k: getattr(s, k) for k in ("n", "mean", "median", "min", "max", "std", "skewness", "kurtosis")}
        entry["jarque_bera"] = None if jb is None else {
            "statistic": jb.statistic, "p_value": jb.p_value, "h": jb.h, "alpha": jb.alpha}
        out[sid] = entry
    return dumps_json({"kurtosis_convention": "non-excess (normal = 3)", "std_convention": "population",
                       "series": out})


def component_names(levels: int) -> list:
    return ["x", f"A_{levels}", *(f"D_{j}" for j in range(1, levels + 1))]


def decomposition_long_csv(decomp: MraDecomposition, times, x) -> str:
    """Long-format plot data ``t, component, value`` with components x, A_J, D_1..D_J."""
    times = np.asarray(times)
    comps = [np.asarray(x), decomp.approximation, *decomp.details]
    rows = []
    for name, values in zip(component_names(decomp.levels), comps):
        rows.extend([int(t), name, _num(v)] for t, v in zip(times, values))
    return _csv_text(["t", "component", "value"], rows)


def emit_decomposition(decomp: MraDecomposition, series_id, times, x, path) -> Path:
    del series_id  # carried by the file name
    return _write(Path(path), decomposition_long_csv(decomp, times, x))


def decomposition_wide_csv(decomp: MraDecomposition, times, x) -> str:
    J = decomp.levels
    header = ["t", "x", f"AX_{J}", *(f"DX_{j}" for j in range(1, J + 1))]
    cols = [np.asarray(x), decomp.approximation, *decomp.details]
    rows = [[int(t), *(_num(c[i]) for c in cols)] for i, t in enumerate(times)]
    return _csv_text(header, rows)


def besov_csv(spec: MultifractalSpectrum) -> str:
    rows = [[_num(p), _num(b), _num(r)] for p, b, r in zip(spec.p_grid, spec.b, spec.fit_residual)]
    return _csv_text(["p", "b", "fit_residual"], rows)


def spectrum_csv(spec: MultifractalSpectrum) -> str:
    rows = [[_num(a), _num(d), _num(p)] for a, d, p in zip(spec.alpha_grid, spec.d, spec.argmin_p)]
    return _csv_text(["alpha", "d", "argmin_p"], rows)


def concavity_verdict(series_id, spec: MultifractalSpectrum) -> str:
    word = "concave (multifractal)" if spec.concave else "not concave"
    return f"{series_id}: spectrum {word}; gap={spec.concavity_gap:.3e}; fit levels {spec.fit_range[0]}:{spec.fit_range[1]}"


def spectrum_json(spectra: dict) -> str:
    out = {}
    for sid, s in spectra.items():
        out[sid] = {
            "fit_range": list(s.fit_range),
            "concave": s.concave,
            "concavity_gap": s.concavity_gap,
            "zero_coefficients": s.zero_counts,
            "p": s.p_grid,
            "b": s.b,
            "alpha": s.alpha_grid,
            "d": s.d,
            "argmin_p": s.argmin_p,
            "structure_functions": s.S,
        }
    return dumps_json(out)


def spatial_magnitude_csv(model: DmdModel, report: ModeReport, k: int) -> str:
    rows = []
    for rank, r in enumerate(report.top(k), start=1):
        mag, phase = phase_magnitude(model, r.mode)
        rows.extend([rank, r.mode, sid, _num(m), _num(ph)] for sid, m, ph in zip(model.series_ids, mag, phase))
    return _csv_text(["rank", "mode", "series", "magnitude", "phase"], rows)


def phase_magnitude_csv(model: DmdModel, report: ModeReport, k: int) -> str:
    """Scatter data: one point per (mode, series) with magnitude and phase."""
    rows = []
    for rank, r in enumerate(report.top(k), start=1):
        mag, phase = phase_magnitude(model, r.mode)
        rows.extend([rank, sid, _num(ph), _num(m)] for sid, m, ph in zip(model.series_ids, mag, phase))
    return _csv_text(["rank", "series", "phase", "magnitude"], rows)


def temporal_csv(model: DmdModel, report: ModeReport, k: int, times) -> str:
    """Real combined trace per top mode (conjugate pairs summed)."""
    times = np.asarray(times)
    idx, traces = temporal_dynamics(model, times, combine=True)
    lookup = {int(i): tr for i, tr in zip(idx, traces)}
    chosen = [r for r in report.top(k) if r.mode in lookup]
    header = ["t", *(f"mode_{rank}" for rank, r in enumerate(report.top(k), start=1) if r.mode in lookup)]
    rows = [[int(t), *(_num(lookup[r.mode][i]) for r in chosen)] for i, t in enumerate(times)]
    return _csv_text(header, rows)


def dmd_json(model: DmdModel, report: ModeReport) -> str:
    return dumps_json({
        "rank": model.rank,
        "dt": model.dt,
        "svd_energy": model.svd_energy,
        "power": report.power_kind,
        "series_ids": list(model.series_ids),
        "eigenvalues": model.eigenvalues,
        "omega": model.omega,
        "amplitudes": model.amplitudes,
        "rank_order": report.rank_order,
        "rows": [
            {"mode": r.mode, "power": r.power, "frequency": r.frequency, "duration": r.duration,
             "growth_rate": r.growth_rate, "nyquist": r.nyquist, "decayed": r.decayed}
            for r in report.rows
        ],
    })


# -- bundle -----------------------------------------------------------------


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _safe_name(series_id: str) -> str:
    keep = "".join(c if c.isalnum() or c in "-_." else "_" for c in series_id)
    return keep or "series"


def bundle_files(bundle: AnalysisBundle) -> dict:
    """Map artifact class -> list of (relative path, text); skipped classes are absent."""
    files = {}
    analysed = bundle.analysed_panel or bundle.panel
    files["panel"] = [
        ("panel/panel.csv", panel_to_csv(bundle.panel)),
        ("panel/analysed.csv", panel_to_csv(analysed)),
        ("panel/stacked.csv", panel_to_csv(stack_for_plot(analysed, bundle.stack_gap))),
    ]
    if bundle.summaries is not None:
        files["stats"] = [("stats/stats.csv", stats_csv(bundle.summaries)),
                          ("stats/stats.json", stats_json(bundle.summaries))]
    if bundle.decompositions is not None:
        files["wavelet"] = [
            (f"wavelet/{_safe_name(sid)}.csv", decomposition_long_csv(dec, bundle.panel.times, bundle.panel.series(sid)))
            for sid, dec in bundle.decompositions.items()
        ]
    if bundle.spectra is not None:
        out = []
        for sid, spec in bundle.spectra.items():
            out.append((f"multifractal/{_safe_name(sid)}_besov.csv", besov_csv(spec)))
            out.append((f"multifractal/{_safe_name(sid)}_spectrum.csv", spectrum_csv(spec)))
        verdicts = "".join(concavity_verdict(sid, s) + "\n" for sid, s in bundle.spectra.items())
        out.append(("multifractal/verdicts.txt", verdicts))
        out.append(("multifractal/multifractal.json", spectrum_json(bundle.spectra)))
        files["multifractal"] = out
    if bundle.dmd_model is not None:
        m, rep = bundle.dmd_model, bundle.mode_report
        k = min(bundle.top_k, len(rep))
        files["dmd"] = [
            ("dmd/modes.csv", mode_table_csv(rep, k)),
            ("dmd/spatial_magnitude.csv", spatial_magnitude_csv(m, rep, k)),
            ("dmd/temporal.csv", temporal_csv(m, rep, k, analysed.times)),
            ("dmd/phase_magnitude.csv", phase_magnitude_csv(m, rep, k)),
            ("dmd/dmd.json", dmd_json(m, rep)),
        ]
    return files


def build_manifest(bundle: AnalysisBundle, hashes: dict) -> dict:
    status = bundle.stage_status()
    artifacts = {}
    for cls in ARTIFACT_CLASSES:
        if status[cls] == "skipped":
            artifacts[cls] = {"status": "skipped"}
        else:
            artifacts[cls] = {"status": "ok", "files": hashes.get(cls, [])}
    p = bundle.panel
    return {
        "schema": MANIFEST_SCHEMA,
        "tool": "wavedmd",
        "version": __version__,
        "provenance": dict(sorted(bundle.provenance.items())),
        "panel": {
            "series_ids": list(p.series_ids),
            "n_series": p.n_series,
            "n_times": p.n_times,
            "dt": p.dt,
            "first_time": p.time_labels()[0],
            "normalize": bundle.normalize,
        },
        "artifacts": artifacts,
    }


def emit_bundle(bundle: AnalysisBundle, outdir) -> Path:
    """Write every artifact under ``outdir`` and return the manifest path."""
    outdir = Path(outdir)
    hashes = {}
    for cls, entries in bundle_files(bundle).items():
        listed = []
        for rel, text in entries:
            path = _write(outdir / rel, text)
            listed.append({"path": rel, "bytes": path.stat().st_size, "sha256": _sha256(path)})
        hashes[cls] = listed
    manifest = build_manifest(bundle, hashes)
    return _write(outdir / "manifest.json", dumps_json(manifest))


def hash_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def hash_file(path) -> str:
    return _sha256(Path(os.fspath(path)))

"""End-to-end analysis: ingest -> stats / wavelet / multifractal / DMD -> bundle.

Descriptive statistics, wavelet decompositions and multifractal spectra are
computed on the panel in data units; DMD runs on the normalized panel.
"""

from __future__ import annotations

import logging

import numpy as np

from . import __version__
from .config import RunConfig
from .dmd import fit_dmd, mode_report
from .errors import StageError, WavedmdError
from .ingest import IngestConfig, load_panel, normalize
from .multifractal import default_p_grid, multifractal_spectrum
from .report import AnalysisBundle, hash_file, hash_text
from .stats import jarque_bera, summarize
from .synth import gen_planted_cycles, price_cycle_specs
from .wavelet import dwt_forward, mra_from_coefficients

log = logging.getLogger(__name__)


def _grid(lo, hi, step):
    n = int(np.floor((hi - lo) / step + 1e-9))
    return np.round(lo + step * np.arange(n + 1), 10)


def _stage(name):
    def wrap(fn):
        def inner(*args, **kwargs):
            log.info("stage %s", name)
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except (WavedmdError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
                raise StageError(name, exc) from exc
        return inner
    return wrap


@_stage("ingest")
def _load(cfg: RunConfig):
    if cfg.synth == "price-cycles":
        panel = gen_planted_cycles(price_cycle_specs(16, seed=cfg.seed), 1024, noise_std=1e-3, seed=cfg.seed + 1)
        source_hash = hash_text(f"synth:price-cycles:{cfg.seed}")
    else:
        panel = load_panel(cfg.input_path, IngestConfig(cfg.date_column, cfg.missing))
        source_hash = hash_file(cfg.input_path)
    if cfg.series:
        panel = panel.select(cfg.series)
    return panel, source_hash


@_stage("stats")
def _stats(panel, cfg):
    out = {}
    for sid, row in zip(panel.series_ids, panel.values):
        s = summarize(row)
        jb = None if s.degenerate or s.n < 8 else jarque_bera(row, cfg.alpha)
        out[sid] = (s, jb)
    return out


@_stage("wavelet")
def _wavelet(panel, cfg):
    return {sid: dwt_forward(row, cfg.filter, cfg.levels, cfg.boundary)
            for sid, row in zip(panel.series_ids, panel.values)}


@_stage("multifractal")
def _multifractal(coeffs, cfg):
    alpha = _grid(cfg.alpha_min, cfg.alpha_max, cfg.alpha_step)
    out = {}
    for sid, c in coeffs.items():
        if cfg.pmin is None:
            all_nonzero = all(np.all(np.asarray(d) != 0) for d in c.details)
            p = default_p_grid(all_nonzero)
            p = p[p <= cfg.pmax + 1e-12]
        else:
            p = _grid(cfg.pmin, cfg.pmax, cfg.pstep)
        out[sid] = multifractal_spectrum(c, p, alpha, cfg.fit_levels, cfg.concavity_tol)
    return out


@_stage("dmd")
def _dmd(panel, cfg):
    model = fit_dmd(panel, rank=cfg.rank, energy=cfg.energy)
    return model, mode_report(model, cfg.power)


def run(config: RunConfig) -> AnalysisBundle:
    """Run every enabled stage; a failing stage raises StageError naming it."""
    cfg = config.validated()
    panel, source_hash = _load(cfg)
    analysed = normalize(panel, cfg.normalize)
    bundle = AnalysisBundle(
        panel=panel,
        analysed_panel=analysed,
        normalize=cfg.normalize,
        top_k=cfg.top,
        stack_gap=cfg.stack_gap,
        provenance={
            "config_hash": cfg.digest(),
            "seed": cfg.seed,
            "input_sha256": source_hash,
            "tool_version": __version__,
        },
    )
    if cfg.stats:
        bundle.summaries = _stats(panel, cfg)
    coeffs = None
    if cfg.wavelet or cfg.multifractal:
        coeffs = _wavelet(panel, cfg)
    if cfg.wavelet:
        bundle.decompositions = {sid: mra_from_coefficients(c) for sid, c in coeffs.items()}
    if cfg.multifractal:
        bundle.spectra = _multifractal(coeffs, cfg)
    if cfg.dmd:
        bundle.dmd_model, bundle.mode_report = _dmd(analysed, cfg)
    return bundle

"""Wavelet multiresolution, multifractal spectra and DMD mode ranking for time-series panels."""

__version__ = "0.1.0"

from .dmd import DmdModel, ModeReport, fit_dmd, mode_report, phase_magnitude, reconstruct, temporal_dynamics
from .ingest import IngestConfig, Panel, load_panel, normalize, stack_for_plot
from .multifractal import (
    MultifractalSpectrum,
    besov_exponent,
    concavity_test,
    multifractal_spectrum,
    singularity_spectrum,
    structure_functions,
)
from .stats import JbResult, SeriesSummary, jarque_bera, summarize
from .wavelet import FILTERS, FilterPair, MraDecomposition, WaveletCoefficients, dwt_forward, dwt_inverse, mra

__all__ = [
    "DmdModel", "ModeReport", "fit_dmd", "mode_report", "phase_magnitude", "reconstruct", "temporal_dynamics",
    "IngestConfig", "Panel", "load_panel", "normalize", "stack_for_plot",
    "MultifractalSpectrum", "besov_exponent", "concavity_test", "multifractal_spectrum",
    "singularity_spectrum", "structure_functions",
    "JbResult", "SeriesSummary", "jarque_bera", "summarize",
    "FILTERS", "FilterPair", "MraDecomposition", "WaveletCoefficients", "dwt_forward", "dwt_inverse", "mra",
]

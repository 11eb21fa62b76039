"""Command-line front end.

Subcommands: ``stats``, ``wavelet``, ``mfspectrum``, ``dmd``, ``synth`` and
``run``. Exit codes: 0 ok, 2 validation error, 3 numerical failure.
Set ``WAVEDMD_LOG`` (e.g. ``INFO`` or ``DEBUG``) for log output on stderr.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config, parse_levels
from .dmd import fit_dmd, mode_report
from .errors import ConfigError, NumericalError, ValidationError, WavedmdError
from .ingest import IngestConfig, load_panel, normalize, panel_to_csv
from .multifractal import default_p_grid, multifractal_spectrum
from .pipeline import run
from .report import (
    _write,
    besov_csv,
    concavity_verdict,
    decomposition_wide_csv,
    emit_bundle,
    mode_table_csv,
    phase_magnitude_csv,
    spatial_magnitude_csv,
    spectrum_csv,
    stats_csv,
    temporal_csv,
)
from .stats import jarque_bera, summarize
from .synth import CycleSpec, gen_linear_system, gen_planted_cycles, random_diagonalizable, rng_for, price_cycle_specs
from .wavelet import mra

log = logging.getLogger("wavedmd")


def _add_input(p):
    p.add_argument("input", help="panel CSV (header: date,<id1>,...,<idN>)")
    p.add_argument("--date-column", default="date")
    p.add_argument("--missing", choices=["reject", "forward-fill"], default="reject")
    p.add_argument("--normalize", choices=["minmax", "zscore", "none"], default=None)


def _panel(args, default_norm):
    panel = load_panel(args.input, IngestConfig(args.date_column, args.missing))
    return normalize(panel, args.normalize or default_norm)


def _emit(text, out):
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        _write(Path(out), text)


def cmd_stats(args):
    panel = _panel(args, "none")
    table = {}
    for sid, row in zip(panel.series_ids, panel.values):
        s = summarize(row)
        table[sid] = (s, None if s.degenerate or s.n < 8 else jarque_bera(row, args.alpha))
    _emit(stats_csv(table), args.out)


def cmd_wavelet(args):
    panel = _panel(args, "none")
    out = Path(args.out)
    for sid, row in zip(panel.series_ids, panel.values):
        dec = mra(row, args.filter, args.levels, args.boundary)
        _write(out / f"{sid}.csv", decomposition_wide_csv(dec, panel.times, row))


def _grid(lo, hi, step):
    n = int(np.floor((hi - lo) / step + 1e-9))
    return np.round(lo + step * np.arange(n + 1), 10)


def cmd_mfspectrum(args):
    from .wavelet import dwt_forward

    panel = _panel(args, "none")
    out = Path(args.out)
    fit = parse_levels(args.fit_levels) if args.fit_levels else None
    alpha = _grid(args.alpha_min, args.alpha_max, args.alpha_step)
    for sid, row in zip(panel.series_ids, panel.values):
        coeffs = dwt_forward(row, args.filter, args.levels)
        if args.pmin is None:
            p = default_p_grid(all(np.all(d != 0) for d in coeffs.details))
            p = p[p <= args.pmax + 1e-12]
        else:
            p = _grid(args.pmin, args.pmax, args.pstep)
        spec = multifractal_spectrum(coeffs, p, alpha, fit, args.tol)
        _write(out / f"{sid}_besov.csv", besov_csv(spec))
        _write(out / f"{sid}_spectrum.csv", spectrum_csv(spec))
        print(concavity_verdict(sid, spec))


def cmd_dmd(args):
    panel = _panel(args, "minmax")
    out = Path(args.out)
    model = fit_dmd(panel, rank=args.rank, energy=args.energy)
    rep = mode_report(model, args.power)
    k = min(args.top, len(rep))
    _write(out / "modes.csv", mode_table_csv(rep, k))
    _write(out / "spatial_magnitude.csv", spatial_magnitude_csv(model, rep, k))
    _write(out / "temporal.csv", temporal_csv(model, rep, k, panel.times))
    _write(out / "phase_magnitude.csv", phase_magnitude_csv(model, rep, k))
    sys.stdout.write(mode_table_csv(rep, k))


def _parse_periods(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        out.append(math.inf if tok in ("inf", "infinite") else float(tok))
    return out


def cmd_synth(args):
    if args.kind == "price-cycles":
        panel = gen_planted_cycles(price_cycle_specs(args.n_series, seed=args.seed), args.length,
                                   noise_std=args.noise, seed=args.seed + 1)
    elif args.kind == "cycles":
        if not args.periods:
            raise ValidationError("synth cycles needs --periods")
        rng = rng_for(args.seed)
        specs = []
        for period in _parse_periods(args.periods):
            z = rng.standard_normal(args.n_series) + 1j * rng.standard_normal(args.n_series)
            if math.isinf(period):
                z = np.abs(z)
            specs.append(CycleSpec(period, z / np.linalg.norm(z), amplitude=1.0, growth_rate=args.growth))
        panel = gen_planted_cycles(specs, args.length, noise_std=args.noise, seed=args.seed + 1)
    else:
        rng = rng_for(args.seed)
        A = random_diagonalizable(args.n_series, rng, (args.radius_min, args.radius_max))
        panel = gen_linear_system(A, rng.standard_normal(args.n_series), args.length)
    _emit(panel_to_csv(panel), args.out)


def cmd_run(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = cfg.with_overrides(
        input_path=args.input, normalize=args.normalize, filter=args.filter, levels=args.levels,
        rank=args.rank, energy=args.energy, top=args.top, seed=args.seed, out=args.out,
    )
    if cfg.out is None:
        raise ConfigError("an output directory is required (--out or [output] dir)")
    bundle = run(cfg)
    manifest = emit_bundle(bundle, cfg.out)
    print(manifest)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavedmd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wavedmd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="descriptive statistics and Jarque-Bera per series")
    _add_input(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("wavelet", help="multiresolution decomposition plot data per series")
    _add_input(p)
    p.add_argument("--filter", choices=["haar", "db2"], default="haar")
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--boundary", choices=["periodic", "zeropad"], default="periodic")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_wavelet)

    p = sub.add_parser("mfspectrum", help="Besov exponents and singularity spectrum per series")
    _add_input(p)
    p.add_argument("--filter", choices=["haar", "db2"], default="haar")
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--pmin", type=float, default=None)
    p.add_argument("--pmax", type=float, default=5.0)
    p.add_argument("--pstep", type=float, default=0.25)
    p.add_argument("--alpha-min", type=float, default=0.0)
    p.add_argument("--alpha-max", type=float, default=1.5)
    p.add_argument("--alpha-step", type=float, default=0.01)
    p.add_argument("--fit-levels", default=None, help="inclusive level range a:b")
    p.add_argument("--tol", type=float, default=1e-3, help="concavity tolerance")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_mfspectrum)

    p = sub.add_parser("dmd", help="exact DMD mode table and plot data")
    _add_input(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--rank", type=int, default=None)
    g.add_argument("--energy", type=float, default=None)
    p.add_argument("--top", type=int, default=8)
    p.add_argument("--power", choices=["squared", "amplitude"], default="squared")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_dmd)

    p = sub.add_parser("synth", help="write a synthetic panel in the ingest CSV format")
    p.add_argument("kind", choices=["price-cycles", "cycles", "linear"])
    p.add_argument("--n-series", type=int, default=16)
    p.add_argument("--length", type=int, default=1024)
    p.add_argument("--noise", type=float, default=1e-3)
    p.add_argument("--periods", default=None, help="comma list of periods in days; 'inf' for a constant")
    p.add_argument("--growth", type=float, default=0.0)
    p.add_argument("--radius-min", type=float, default=0.9)
    p.add_argument("--radius-max", type=float, default=1.04)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("--config", default=None)
    p.add_argument("--input", default=None)
    p.add_argument("--normalize", choices=["minmax", "zscore", "none"], default=None)
    p.add_argument("--filter", choices=["haar", "db2"], default=None)
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--energy", type=float, default=None)
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("WAVEDMD_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except WavedmdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return NumericalError.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ValidationError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: simulation, processing, studies, and fitting.

Subcommands share a JSON configuration file (see io.load_run_config) and
a few global flags. Randomized commands print the seed they ran with, so
any run can be reproduced afterwards; when no seed is given anywhere one
is drawn from system entropy. Exit codes: 0 success, 2 parse or
configuration failure, 3 processing failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import replace

import numpy as np

from .errors import ConfigError, FringelabError, SpectrumFormatError
from .filmsim import add_noise, measure_snr, simulate_reflectance
from .io import (
    RunConfig,
    load_run_config,
    read_concentration_table,
    read_manifest,
    read_spectrum,
    write_polyline_svg,
    write_spectrum,
)
from .isotherm import (
    ConcentrationSeries,
    fit_redlich_peterson,
    lod_concentration,
    model_eval,
)
from .lamp import lamp_signal, lamp_to_delta_eot
from .legacy import iaw, rifts_eot
from .lodstudy import LodStudyConfig, run_table1
from .wavegrid import WavenumberGrid

PARSE_EXIT = 2
PROCESS_EXIT = 3

METHOD_CHOICES = ("rifts", "iaw", "lamp")


def _float_pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected LO,HI")
    return float(parts[0]), float(parts[1])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration file")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--range", type=_float_pair, dest="range_nm",
                        help="wavelength range LO,HI in nm")
    common.add_argument("--out", help="output file path")
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="structured output format")

    parser = argparse.ArgumentParser(
        prog="fringelab",
        description="thin-film fringe simulation and signal processing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common],
                       help="simulate reflectance spectra and write them out")
    p.add_argument("--clean-out", help="also write the noiseless spectrum here")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("process", parents=[common],
                       help="run one method on analyte spectra against a reference")
    p.add_argument("--method", choices=METHOD_CHOICES, required=True)
    p.add_argument("reference", help="reference spectrum file")
    p.add_argument("analytes", nargs="+", help="analyte spectrum files")
    p.set_defaults(handler=cmd_process)

    p = sub.add_parser("timeseries", parents=[common],
                       help="process a timestamped manifest against its reference")
    p.add_argument("--manifest", required=True)
    p.add_argument("--methods", default="rifts,iaw,lamp",
                   help="comma-separated subset of rifts,iaw,lamp")
    p.add_argument("--normalize", action="store_true",
                   help="map each method's series to [0, 1] by its min/max")
    p.add_argument("--svg", help="also write a line plot to this path")
    p.set_defaults(handler=cmd_timeseries)

    p = sub.add_parser("lod-table", parents=[common],
                       help="Monte-Carlo detection-limit matrix over methods and drifts")
    p.add_argument("--trials", type=int, help="override the trial count")
    p.set_defaults(handler=cmd_lod_table)

    p = sub.add_parser("fit", parents=[common],
                       help="fit the adsorption isotherm to a concentration table")
    p.add_argument("series", help="concentration,unit,response table")
    p.add_argument("--three-sigma-blank", type=float, required=True,
                   help="noise floor above the intercept defining the LOD")
    p.add_argument("--curve-points", type=int, default=200)
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("snr", parents=[common],
                       help="signal-to-noise ratio between a clean and a noisy spectrum")
    p.add_argument("clean")
    p.add_argument("noisy")
    p.set_defaults(handler=cmd_snr)

    return parser


def _load_config(args) -> RunConfig:
    config = load_run_config(args.config)
    if getattr(args, "range_nm", None) is not None:
        config = replace(
            config,
            range_nm=args.range_nm,
            rifts=replace(config.rifts, range_nm=args.range_nm),
            iaw=replace(config.iaw, range_nm=args.range_nm),
            lamp=replace(config.lamp, range_nm=args.range_nm),
        )
    return config


def _resolve_seed(args, config: RunConfig) -> int:
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        return args.seed
    if config.seed is not None:
        return config.seed
    return int(np.random.SeedSequence().generate_state(1, np.uint64)[0])


def _write_text(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _rows_to_text(rows: list, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    if not rows:
        return ""
    buffer = []
    writer_target = _ListWriter(buffer)
    writer = csv.writer(writer_target, lineterminator="\n")
    writer.writerow(rows[0].keys())
    for row in rows:
        writer.writerow(_format_cell(v) for v in row.values())
    return "".join(buffer)


class _ListWriter:
    def __init__(self, buffer):
        self.buffer = buffer

    def write(self, data):
        self.buffer.append(data)


def _format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def cmd_simulate(args) -> int:
    config = _load_config(args)
    if args.out is None and args.clean_out is None:
        raise ConfigError("give --out and/or --clean-out")
    seed = _resolve_seed(args, config)
    wavelengths = np.linspace(config.range_nm[0], config.range_nm[1], config.n_points)
    clean = simulate_reflectance(config.stack, wavelengths)
    if args.clean_out is not None:
        write_spectrum(args.clean_out, clean)
    print(f"seed: {seed}")
    if args.out is not None:
        noisy = add_noise(clean, replace(config.noise, seed=seed))
        write_spectrum(args.out, noisy)
        snr = measure_snr(clean, noisy)
        label = "infinite" if snr == float("inf") else f"{snr:.2f} dB"
        print(f"achieved S/N: {label}")
    return 0


def _process_one(method: str, config: RunConfig, reference, analyte) -> dict:
    if method == "rifts":
        eot = rifts_eot(analyte, config.rifts)
        reference_eot = rifts_eot(reference, config.rifts)
        return {"signal": eot, "eot_nm": eot, "delta_eot_nm": eot - reference_eot}
    if method == "iaw":
        return {"signal": iaw(reference, analyte, config.iaw)}
    phase = lamp_signal(reference, analyte, config.lamp)
    grid = WavenumberGrid.from_wavelength_range(config.lamp.range_nm, config.lamp.n_points)
    return {
        "signal": phase,
        "delta_phase_rad": phase,
        "delta_eot_nm": lamp_to_delta_eot(phase, grid),
    }


def cmd_process(args) -> int:
    config = _load_config(args)
    reference = read_spectrum(args.reference)
    rows = []
    failures = []
    for path in args.analytes:
        try:
            analyte = read_spectrum(path)
            rows.append({"file": path, **_process_one(args.method, config, reference, analyte)})
        except SpectrumFormatError as exc:
            failures.append(("parse", path, exc))
        except FringelabError as exc:
            failures.append(("process", path, exc))
    _write_text(args.out, _rows_to_text(rows, args.format))
    for kind, path, exc in failures:
        print(f"error ({kind}): {path}: {exc}", file=sys.stderr)
    if failures:
        return PROCESS_EXIT if any(k == "process" for k, _, _ in failures) else PARSE_EXIT
    return 0


def cmd_timeseries(args) -> int:
    config = _load_config(args)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    unknown = set(methods) - set(METHOD_CHOICES)
    if not methods or unknown:
        raise ConfigError(f"--methods must name a subset of {METHOD_CHOICES}")
    entries = read_manifest(args.manifest)
    reference_entry = next(e for e in entries if e.role == "reference")
    reference = read_spectrum(reference_entry.path)
    stamps = [e.timestamp_s for e in entries]
    table = {method: [] for method in methods}
    for entry in entries:
        try:
            spectrum = read_spectrum(entry.path)
            for method in methods:
                table[method].append(_process_one(method, config, reference, spectrum)["signal"])
        except FringelabError as exc:
            raise type(exc)(f"at timestamp {entry.timestamp_s:g}: {exc}") from exc
    if args.normalize:
        for method in methods:
            values = np.asarray(table[method])
            span = values.max() - values.min()
            table[method] = (
                ((values - values.min()) / span) if span else np.zeros_like(values)
            ).tolist()
    rows = [
        {"timestamp_s": stamp, **{m: table[m][i] for m in methods}}
        for i, stamp in enumerate(stamps)
    ]
    _write_text(args.out, _rows_to_text(rows, args.format))
    if args.svg is not None:
        write_polyline_svg(args.svg, {m: (stamps, table[m]) for m in methods})
    return 0


def cmd_lod_table(args) -> int:
    config = _load_config(args)
    seed = _resolve_seed(args, config)
    study = dict(config.study)
    if args.trials is not None:
        study["n_trials"] = args.trials
    try:
        study_cfg = LodStudyConfig(
            stack=config.stack,
            noise=replace(config.noise, seed=seed),
            rifts=config.rifts,
            iaw=config.iaw,
            lamp=config.lamp,
            **study,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"study configuration: {exc}") from exc
    smoke = study_cfg.n_trials < 100
    print(f"seed: {seed}")
    if smoke:
        print("smoke mode: trial count below the reporting minimum", file=sys.stderr)
    started = time.perf_counter()
    report = run_table1(study_cfg, allow_smoke_trials=smoke)
    payload = report.to_dict()
    payload["runtime_s"] = time.perf_counter() - started
    payload["smoke"] = smoke
    _write_text(args.out, json.dumps(payload, indent=2) + "\n")
    for key, message in sorted(report.failures.items()):
        print(f"cell failed: {key[0]}/{key[1]}: {message}", file=sys.stderr)
    return PROCESS_EXIT if report.failures else 0


def cmd_fit(args) -> int:
    concentrations, unit, groups = read_concentration_table(args.series)
    order = np.argsort(concentrations)
    try:
        series = ConcentrationSeries.from_display(
            [concentrations[i] for i in order],
            [groups[i] for i in order],
            unit=unit,
        )
        fit = fit_redlich_peterson(series)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    lod = lod_concentration(fit, args.three_sigma_blank)
    display = series.display_concentrations()
    positive = display[display > 0]
    curve_c = np.geomspace(positive.min() / 10.0, positive.max(), args.curve_points)
    curve = [
        {"concentration": float(c), "theta_fit": float(model_eval(fit, c))}
        for c in curve_c
    ]
    report = {
        "unit": unit,
        "intercept": fit.intercept,
        "a": fit.a,
        "b": fit.b,
        "beta": fit.beta,
        "reduced_chi2": fit.reduced_chi2,
        "three_sigma_blank": args.three_sigma_blank,
        "lod_concentration": lod,
    }
    if args.format == "csv":
        print(json.dumps(report))
        _write_text(args.out, _rows_to_text(curve, "csv"))
    else:
        _write_text(args.out, json.dumps({**report, "curve": curve}, indent=2) + "\n")
    return 0


def cmd_snr(args) -> int:
    clean = read_spectrum(args.clean)
    noisy = read_spectrum(args.noisy)
    value = measure_snr(clean, noisy)
    label = "infinite" if value == float("inf") else f"{value:.2f} dB"
    print(f"S/N: {label}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (SpectrumFormatError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PARSE_EXIT
    except FringelabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PROCESS_EXIT


if __name__ == "__main__":
    sys.exit(main())

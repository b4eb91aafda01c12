"""Command-line experiment drivers.

Each experiment reproduces one standard figure-style dataset as CSV files
plus a meta.json capturing the resolved parameters, seed, version, wall
times, and output list.  Output is data only; plot with any external tool.

    xxprobe --experiment fig2 --n 10 --out runs/fig2

Identical manifests produce byte-identical CSV payloads; timestamps live
only in meta.json.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import bounce_function, current_peak_table, gamma_c_numeric, gamma_c_single_mode, lightcone_grid
from .closed import evolve_closed, qubit_occupation, tcl2_closed_n0
from .disorder import DisorderSpec, ensemble_average_n0, sample_fields
from .lindblad import evolve_lindblad_sector, tcl2_dephasing_n0
from .model import (
    ModelConfig,
    TimeSeries,
    chain_modes,
    config_from_file,
    config_from_mapping,
    config_to_mapping,
    grid_times,
    validate_config,
)

__all__ = ["ExperimentManifest", "parse_args", "run_experiment", "emit_meta", "main"]

EXPERIMENTS = (
    "fig2-tcl2-vs-exact",
    "fig3-bounce-scan",
    "fig3-gammac-table",
    "fig4-current-scan",
    "fig5-disorder",
    "fig6-lightcone",
    "fig7-distinguish",
)

# scans at strong dephasing need their interior maxima / arrivals in view
_DEFAULT_T_MAX = {"fig4-current-scan": 1000.0, "fig6-lightcone": 1500.0}

_DEFAULTS = dict(n=10, j=4.0, g=0.2, omega0=0.0, gamma=0.0, dt=0.01, t_max=60.0)


@dataclass(frozen=True)
class ExperimentManifest:
    experiment: str
    config: ModelConfig
    disorder: DisorderSpec | None = None
    sweep: dict | None = None
    output_dir: str = "."


def _resolve_experiment(name: str) -> str:
    if name in EXPERIMENTS:
        return name
    hits = [e for e in EXPERIMENTS if e.startswith(name)]
    if len(hits) == 1:
        return hits[0]
    if hits:
        raise ValueError(f"ambiguous experiment {name!r}: matches {hits}")
    raise ValueError(f"unknown experiment {name!r}; choose from {list(EXPERIMENTS)}")


def parse_args(argv) -> ExperimentManifest:
    """Build a manifest from flags; explicit flag > config file > default."""
    parser = argparse.ArgumentParser(
        prog="xxprobe",
        description="Reproduce probe-qubit / XX-chain experiments as CSV data.",
    )
    parser.add_argument("--experiment", required=True,
                        help=f"one of {', '.join(EXPERIMENTS)} (unique prefixes ok)")
    parser.add_argument("--n", type=int, help="chain length N (default 10)")
    parser.add_argument("--j", type=float, help="chain coupling J (default 4)")
    parser.add_argument("--g", type=float, help="qubit-chain coupling g (default 0.2)")
    parser.add_argument("--omega0", type=float, help="qubit splitting (default 0)")
    parser.add_argument("--gamma", type=float, help="dephasing rate (default 0)")
    parser.add_argument("--w", type=float, help="disorder width W (default 10 for fig5/fig7)")
    parser.add_argument("--realizations", type=int, help="disorder ensemble size (default 200)")
    parser.add_argument("--seed", type=int, default=None, help="disorder seed (default 1)")
    parser.add_argument("--dt", type=float, help="time step (default 0.01)")
    parser.add_argument("--t-max", dest="t_max", type=float,
                        help="horizon (default 60; fig4: 1000, fig6: 1500)")
    parser.add_argument("--out", default=None, help="output directory (default .)")
    parser.add_argument("--config", default=None, help="JSON config file (flat keys n,j,g,omega0,gamma,fields,dt,t_max)")
    args = parser.parse_args(argv)

    try:
        experiment = _resolve_experiment(args.experiment)
    except ValueError as exc:
        parser.error(str(exc))

    merged = dict(_DEFAULTS)
    merged["t_max"] = _DEFAULT_T_MAX.get(experiment, merged["t_max"])
    fields = None
    if args.config is not None:
        try:
            file_cfg = config_from_file(args.config)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            parser.error(f"bad config file: {exc}")
        merged.update(
            n=file_cfg.n_sites, j=file_cfg.j_coupling, g=file_cfg.g_coupling,
            omega0=file_cfg.omega0, gamma=file_cfg.gamma,
            dt=file_cfg.time_step, t_max=file_cfg.t_max,
        )
        fields = file_cfg.fields
    for key in ("n", "j", "g", "omega0", "gamma", "dt", "t_max"):
        val = getattr(args, key)
        if val is not None:
            merged[key] = val
            if key == "n":
                fields = None

    try:
        config = validate_config(ModelConfig(
            n_sites=merged["n"], j_coupling=merged["j"], g_coupling=merged["g"],
            omega0=merged["omega0"], gamma=merged["gamma"], fields=fields,
            time_step=merged["dt"], t_max=merged["t_max"],
        ))
    except ValueError as exc:
        parser.error(str(exc))

    disorder = None
    if experiment in ("fig5-disorder", "fig7-distinguish"):
        try:
            disorder = DisorderSpec(
                width=args.w if args.w is not None else 10.0,
                n_realizations=args.realizations if args.realizations is not None else 200,
                seed=args.seed if args.seed is not None else 1,
            )
        except ValueError as exc:
            parser.error(str(exc))
    elif args.w is not None or args.realizations is not None:
        parser.error(f"--w/--realizations apply only to fig5/fig7, not {experiment}")

    return ExperimentManifest(
        experiment=experiment,
        config=config,
        disorder=disorder,
        output_dir=args.out if args.out is not None else ".",
    )


# ---------------------------------------------------------------------------
# CSV emission: \n endings, '.' decimals, 17 significant digits

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_series(path, series: TimeSeries, columns: str) -> None:
    times = series.times
    vals = np.atleast_2d(np.asarray(series.values).T).T
    _write_csv(path, columns, (np.concatenate(([t], row)) for t, row in zip(times, vals)))


def _pop_header(dim: int) -> str:
    return "t," + ",".join(f"n_{i}" for i in range(dim))


# ---------------------------------------------------------------------------
# experiment bodies; each returns a list of written filenames

def _run_fig2(manifest: ExperimentManifest, outdir) -> list[str]:
    cfg = manifest.config
    times = grid_times(cfg)
    exact = qubit_occupation(evolve_closed(cfg, times))
    tcl = tcl2_closed_n0(chain_modes(cfg), cfg, times)
    _write_series(outdir / "exact.csv", exact, "t,n0")
    _write_series(outdir / "tcl2.csv", tcl, "t,n0")
    return ["exact.csv", "tcl2.csv"]


def _run_fig3_bounce(manifest: ExperimentManifest, outdir) -> list[str]:
    cfg = manifest.config
    sweep = manifest.sweep or {}
    n_values = sweep.get("n_values", [4, 6, 8, 10])
    gammas = sweep.get("gammas", [round(0.01 * k, 2) for k in range(1, 31)])
    written = []
    for n in n_values:
        run_cfg = cfg.with_(n_sites=int(n))
        rows = []
        for gamma in gammas:
            gcfg = run_cfg.with_(gamma=float(gamma))
            horizon = max(200.0, 8.0 / gamma)
            n0 = tcl2_dephasing_n0(chain_modes(gcfg), gcfg, grid_times(gcfg, t_max=horizon))
            rows.append((gamma, bounce_function(n0).value))
        name = f"bounce_n{n}.csv"
        _write_csv(outdir / name, "gamma,b_phi", rows)
        written.append(name)
    return written


def _run_fig3_gammac(manifest: ExperimentManifest, outdir) -> list[str]:
    cfg = manifest.config
    sweep = manifest.sweep or {}
    n_values = sweep.get("n_values", [4, 6, 8, 10])
    rows = []
    for n in n_values:
        run_cfg = cfg.with_(n_sites=int(n))
        for method in ("tcl2", "exact"):
            est = gamma_c_numeric(run_cfg, method=method)
            rows.append((n, est.gamma_c, est.method))
        if n % 2 == 0:
            est = gamma_c_single_mode(int(n), cfg.j_coupling)
            rows.append((n, est.gamma_c, est.method))
    with open(outdir / "gammac.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,gamma_c,method\n")
        for n, gc, method in rows:
            fh.write(f"{n},{_fmt(gc)},{method}\n")
    return ["gammac.csv"]


def _run_fig4(manifest: ExperimentManifest, outdir) -> list[str]:
    cfg = manifest.config
    sweep = manifest.sweep or {}
    gammas = sweep.get("gammas", [10.0, 20.0, 40.0, 80.0])
    bonds = sweep.get("bonds", [0, 1, 2, 3])
    times = grid_times(cfg, dt=max(cfg.time_step, 0.05))
    table = current_peak_table(cfg, bonds, gammas, times)
    rows = [
        (gamma, peak, bond)
        for gamma, peaks in table
        for bond, peak in zip(bonds, peaks)
    ]
    _write_csv(outdir / "current_scan.csv", "gamma,max_current,bond", rows)
    return ["current_scan.csv"]


def _run_fig5(manifest: ExperimentManifest, outdir) -> list[str]:
    cfg, spec = manifest.config, manifest.disorder
    times = grid_times(cfg)
    mean, stderr = ensemble_average_n0(cfg, spec, "exact-closed", times)
    _write_csv(outdir / "ensemble.csv", "t,mean_n0,stderr",
               zip(mean.times, mean.values, stderr.values))
    single_cfg = cfg.with_(fields=tuple(sample_fields(spec, cfg.n_sites, 0)))
    single = qubit_occupation(evolve_closed(single_cfg, times))
    _write_series(outdir / "single_realization.csv", single, "t,n0")
    sidecar = {
        "seed": spec.seed, "w": spec.width,
        "n_realizations": spec.n_realizations, "engine": "exact-closed",
    }
    with open(outdir / "disorder.json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ["ensemble.csv", "single_realization.csv", "disorder.json"]


def _run_fig6(manifest: ExperimentManifest, outdir) -> list[str]:
    cfg = manifest.config
    sweep = manifest.sweep or {}
    gammas = sweep.get("gammas", [10.0, 20.0])
    times = grid_times(cfg, dt=max(cfg.time_step, 0.25))
    written = []
    for gamma in gammas:
        run_cfg = cfg.with_(gamma=float(gamma))
        pops = lightcone_grid(run_cfg, times)
        name = f"lightcone_gamma{gamma:g}.csv"
        _write_series(outdir / name, pops, _pop_header(run_cfg.dim))
        written.append(name)
    return written


def _run_fig7(manifest: ExperimentManifest, outdir) -> list[str]:
    cfg, spec = manifest.config, manifest.disorder
    times = grid_times(cfg)
    base = cfg.with_(gamma=0.0)
    mean, _ = ensemble_average_n0(base, spec, "exact-closed", times)
    _write_series(outdir / "localized.csv", mean, "t,n0")
    clean = qubit_occupation(evolve_closed(base, times))
    _write_series(outdir / "delocalized.csv", clean, "t,n0")
    deph_gamma = cfg.gamma if cfg.gamma > 0 else 2.0
    deph = evolve_lindblad_sector(cfg.with_(gamma=deph_gamma), times, record="n0")
    _write_series(outdir / "dephasing.csv", deph, "t,n0")
    return ["localized.csv", "delocalized.csv", "dephasing.csv"]


_RUNNERS = {
    "fig2-tcl2-vs-exact": _run_fig2,
    "fig3-bounce-scan": _run_fig3_bounce,
    "fig3-gammac-table": _run_fig3_gammac,
    "fig4-current-scan": _run_fig4,
    "fig5-disorder": _run_fig5,
    "fig6-lightcone": _run_fig6,
    "fig7-distinguish": _run_fig7,
}


def emit_meta(manifest: ExperimentManifest, timings: dict, outputs: list[str],
              status: str = "ok", error: str | None = None):
    """Write meta.json next to the data; deterministic key order."""
    meta = {
        "experiment": manifest.experiment,
        "config": config_to_mapping(manifest.config),
        "disorder": None if manifest.disorder is None else {
            "w": manifest.disorder.width,
            "n_realizations": manifest.disorder.n_realizations,
            "seed": manifest.disorder.seed,
        },
        "sweep": manifest.sweep,
        "output_dir": str(manifest.output_dir),
        "outputs": outputs,
        "timings_s": {k: round(v, 6) for k, v in timings.items()},
        "version": __version__,
        "status": status,
    }
    if error is not None:
        meta["error"] = error
    path = Path(manifest.output_dir) / "meta.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def manifest_from_meta(path) -> ExperimentManifest:
    """Rebuild the manifest recorded in a meta.json (round-trip support)."""
    with open(path, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    disorder = None
    if meta.get("disorder"):
        d = meta["disorder"]
        disorder = DisorderSpec(width=d["w"], n_realizations=d["n_realizations"], seed=d["seed"])
    return ExperimentManifest(
        experiment=meta["experiment"],
        config=config_from_mapping(meta["config"]),
        disorder=disorder,
        sweep=meta.get("sweep"),
        output_dir=meta["output_dir"],
    )


def run_experiment(manifest: ExperimentManifest) -> int:
    """Execute one experiment; returns 0 on success, 1 on failure.

    Writes one CSV per curve plus meta.json.  On failure after the output
    directory exists, meta.json carries status "error" and the message; no
    data files are left half-written (each CSV is written atomically small
    enough to either complete or raise before creation).
    """
    if manifest.experiment not in _RUNNERS:
        print(f'{{"status": "error", "error": "unknown experiment {manifest.experiment}"}}',
              file=sys.stderr)
        return 1
    outdir = Path(manifest.output_dir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(json.dumps({"status": "error", "error": f"cannot create output dir: {exc}"}),
              file=sys.stderr)
        return 1

    if manifest.experiment in ("fig5-disorder", "fig7-distinguish") and manifest.disorder is None:
        emit_meta(manifest, {}, [], status="error", error="experiment requires a disorder spec")
        print(json.dumps({"status": "error", "error": "experiment requires a disorder spec"}),
              file=sys.stderr)
        return 1

    start = time.perf_counter()
    try:
        outputs = _RUNNERS[manifest.experiment](manifest, outdir)
    except Exception as exc:
        timings = {"total": time.perf_counter() - start}
        emit_meta(manifest, timings, [], status="error", error=str(exc))
        print(json.dumps({"status": "error", "error": str(exc)}), file=sys.stderr)
        return 1
    timings = {"total": time.perf_counter() - start}
    emit_meta(manifest, timings, outputs)
    return 0


def main(argv=None) -> int:
    manifest = parse_args(sys.argv[1:] if argv is None else argv)
    return run_experiment(manifest)


if __name__ == "__main__":
    sys.exit(main())

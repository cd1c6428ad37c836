"""Reproducible experiment runner.

Jobs are described by flat key = value config files with one section per
subcommand.  Every run writes an RFC-4180 CSV with a header row, a JSON
metadata sidecar (config echo plus a content hash of the inputs), and,
unless disabled, a rendered figure next to the CSV.  Identical config
and seed give byte-identical CSVs at any worker count.

Exit codes: 0 success, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np


class ConfigError(Exception):
    pass


# schema: key -> (type tag, required)
SCHEMAS = {
    "engine-sweep": {
        "n_sites": ("int", True),
        "realizations": ("int", True),
        "h_goe": ("float", True),
        "h_mbl": ("float", True),
        "energy_unit": ("float", True),
        "beta_c": ("beta", True),
        "beta_h": ("beta", True),
        "wb_over_delta": ("float_list", True),
        "seed": ("int", True),
        "workers": ("int", False),
    },
    "engine-diabatic": {
        "n_sites": ("int", True),
        "realizations": ("int", True),
        "h_goe": ("float", True),
        "h_mbl": ("float", True),
        "energy_unit": ("float", True),
        "beta_c": ("beta", True),
        "beta_h": ("beta", True),
        "wb_over_delta": ("float", True),
        "delta_minus_realizations": ("int", True),
        "v_points": ("int", True),
        "v_decades": ("float", True),
        "dt_fraction": ("float", True),
        "seed": ("int", True),
        "workers": ("int", False),
    },
    "gapstats": {
        "n_sites": ("int", True),
        "realizations": ("int", True),
        "h_goe": ("float", True),
        "h_mbl": ("float", True),
        "energy_unit": ("float", True),
        "window_fraction": ("float", True),
        "seed": ("int", True),
    },
    "otoc": {
        "n_sites": ("int", True),
        "h": ("float", True),
        "g": ("float", True),
        "t_min": ("float", True),
        "t_max": ("float", True),
        "t_points": ("int", True),
        "w_axis": ("str", True),
        "v_axis": ("str", True),
        "seed": ("int", True),
    },
    "brownian": {
        "n_qubits": ("int", True),
        "dt": ("float", True),
        "shots": ("int", True),
        "t_min": ("float", True),
        "t_max": ("float", True),
        "t_points": ("int", True),
        "seed": ("int", True),
    },
    "nats-audit": {
        "n_min": ("int", True),
        "n_max": ("int", True),
        "eta0": ("float", True),
        "target_x": ("float", True),
        "target_y": ("float", True),
        "target_z": ("float", True),
        "typicality_shots": ("int", True),
        "channels": ("int", True),
        "seed": ("int", True),
    },
}


def _convert(key, raw, kind, line_no):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "beta":
            return math.inf if raw.strip().lower() in ("inf", "infinity") else float(raw)
        if kind == "float_list":
            return [float(x) for x in raw.replace(",", " ").split()]
        if kind == "str":
            return raw.strip()
    except ValueError:
        raise ConfigError(
            f"line {line_no}: key '{key}' expects {kind}, got '{raw.strip()}'"
        ) from None
    raise ConfigError(f"line {line_no}: unknown type tag {kind}")


def parse_config(text: str, subcommand: str) -> dict:
    """Parse a key = value section for one subcommand.

    Unknown keys, missing required keys, and type mismatches are rejected
    with line-numbered diagnostics; physics parameters have no defaults.
    """
    if subcommand not in SCHEMAS:
        raise ConfigError(f"unknown subcommand '{subcommand}'")
    schema = SCHEMAS[subcommand]
    section = None
    values = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {line_no}: expected key = value, got '{stripped}'")
        if section != subcommand:
            continue
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in schema:
            raise ConfigError(f"line {line_no}: unknown key '{key}' for [{subcommand}]")
        if key in values:
            raise ConfigError(f"line {line_no}: duplicate key '{key}'")
        values[key] = _convert(key, raw, schema[key][0], line_no)
    missing = [k for k, (_, required) in schema.items() if required and k not in values]
    if missing:
        raise ConfigError(
            f"section [{subcommand}] is missing required keys: {', '.join(sorted(missing))}"
        )
    return values


def _format(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "undefined"
        return f"{x:.12g}"
    return str(x)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(x) for x in row])


def write_metadata(path: Path, subcommand, config, config_text, extra=None) -> None:
    meta = {
        "subcommand": subcommand,
        "config": {k: (None if isinstance(v, float) and math.isnan(v) else v)
                   for k, v in config.items()},
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "package": "qtherm 0.1.0",
    }
    if extra:
        meta["derived"] = extra
    meta = json.loads(json.dumps(meta, default=lambda o: repr(o)))
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommand runners
# ---------------------------------------------------------------------------


def run_engine_sweep(config, out: Path, plot: bool):
    from .engine import CycleConfig, ensemble_sweep
    from .spinchain import HeisenbergParams

    params = HeisenbergParams(
        n_sites=config["n_sites"],
        energy_unit=config["energy_unit"],
        h_goe=config["h_goe"],
        h_mbl=config["h_mbl"],
    )
    delta = params.mean_gap
    configs = [
        CycleConfig(wb=frac * delta, beta_c=config["beta_c"], beta_h=config["beta_h"])
        for frac in config["wb_over_delta"]
    ]
    points = ensemble_sweep(
        params,
        configs,
        config["realizations"],
        config["seed"],
        workers=config.get("workers", 1),
    )
    header = [
        "wb", "wb_over_delta", "mean_w1", "se_w1", "mean_w3", "se_w3",
        "mean_q2", "se_q2", "mean_q4", "se_q4", "mean_wtot", "se_wtot",
        "eta", "se_eta",
    ]
    rows = []
    for p, frac in zip(points, config["wb_over_delta"]):
        rows.append(
            [
                p.config.wb, frac,
                p.mean["w1"], p.stderr["w1"], p.mean["w3"], p.stderr["w3"],
                p.mean["q2"], p.stderr["q2"], p.mean["q4"], p.stderr["q4"],
                p.mean["w_tot"], p.stderr["w_tot"],
                p.eta if p.eta_defined else math.nan,
                p.eta_err if p.eta_defined else math.nan,
            ]
        )
    write_csv(out, header, rows)
    extra = {"mean_gap": delta}
    if plot:
        from .plotting import plot_engine_sweep

        plot_engine_sweep(points, delta, out.with_suffix(".png"))
    return extra


def run_engine_diabatic(config, out: Path, plot: bool):
    from .engine import diabatic_work_curve, pooled_mbl_gaps
    from .spinchain import HeisenbergParams, level_repulsion_scale

    params = HeisenbergParams(
        n_sites=config["n_sites"],
        energy_unit=config["energy_unit"],
        h_goe=config["h_goe"],
        h_mbl=config["h_mbl"],
    )
    delta = params.mean_gap
    wb = config["wb_over_delta"] * delta
    gaps = pooled_mbl_gaps(params, config["delta_minus_realizations"], config["seed"])
    delta_minus = level_repulsion_scale(gaps, float(gaps.mean()))
    v_star = wb**3 / delta_minus
    half = config["v_decades"] / 2.0
    v_grid = np.geomspace(
        v_star * 10 ** (-half), v_star * 10 ** half, config["v_points"]
    )
    points = diabatic_work_curve(
        params,
        wb,
        v_grid,
        config["realizations"],
        config["seed"],
        beta_c=config["beta_c"],
        beta_h=config["beta_h"],
        dt_fraction=config["dt_fraction"],
        workers=config.get("workers", 1),
    )
    adiabatic = points[0]
    header = ["v", "v_over_vstar", "mean_wtot", "se_wtot", "fraction_of_adiabatic"]
    rows = [[0.0, 0.0, adiabatic.mean["w_tot"], adiabatic.stderr["w_tot"], 1.0]]
    for p in points[1:]:
        rows.append(
            [
                p.config.speed,
                p.config.speed / v_star,
                p.mean["w_tot"],
                p.stderr["w_tot"],
                p.mean["w_tot"] / adiabatic.mean["w_tot"],
            ]
        )
    write_csv(out, header, rows)
    extra = {"mean_gap": delta, "delta_minus": delta_minus, "v_star": v_star}
    if plot:
        from .plotting import plot_engine_diabatic

        plot_engine_diabatic(points, v_star, out.with_suffix(".png"))
    return extra


def run_gapstats(config, out: Path, plot: bool):
    from .spinchain import (
        HeisenbergParams,
        build_heisenberg,
        draw_realization,
        gap_statistics,
    )

    params = HeisenbergParams(
        n_sites=config["n_sites"],
        energy_unit=config["energy_unit"],
        h_goe=config["h_goe"],
        h_mbl=config["h_mbl"],
    )
    header = ["h", "realization", "mean_gap", "ks_poisson", "ks_goe", "classified"]
    rows = []
    plot_rows = []
    for alpha, h in ((0.0, config["h_goe"]), (1.0, config["h_mbl"])):
        for r in range(config["realizations"]):
            real = draw_realization(config["n_sites"], config["seed"], r)
            vals = np.linalg.eigvalsh(build_heisenberg(params, real, alpha))
            stat = gap_statistics(vals, config["window_fraction"])
            label = "poisson" if stat.looks_poissonian else "goe"
            rows.append(
                [h, r, stat.mean_gap, stat.ks_poisson, stat.ks_goe, label]
            )
            plot_rows.append({"h": h, "gaps": stat.gaps / stat.mean_gap})
    write_csv(out, header, rows)
    if plot:
        from .plotting import plot_gapstats

        plot_gapstats(plot_rows, out.with_suffix(".png"))
    return {}


def run_otoc(config, out: Path, plot: bool):
    from .quasiprob import (
        QuasiprobTable,
        ising_setting,
        otoc,
        sixteen_term_expansion,
    )

    setting = ising_setting(
        config["n_sites"],
        h=config["h"],
        g=config["g"],
        w_axis=config["w_axis"],
        v_axis=config["v_axis"],
    )
    times = np.linspace(config["t_min"], config["t_max"], config["t_points"])
    header = ["t", "re_f", "im_f"]
    for label in QuasiprobTable.abcd_labels():
        header += [f"re_a_{label}", f"im_a_{label}"]
    rows = []
    f_values = []
    tables = []
    for t in times:
        table = sixteen_term_expansion(setting, float(t))
        f = otoc(setting, float(t))
        f_values.append(f)
        tables.append(table)
        row = [float(t), f.real, f.imag]
        for key in QuasiprobTable.coarse_keys():
            row += [table[key].real, table[key].imag]
        rows.append(row)
    write_csv(out, header, rows)
    if plot:
        from .plotting import plot_otoc

        plot_otoc(times, f_values, tables, out.with_suffix(".png"))
    return {}


def run_brownian(config, out: Path, plot: bool):
    from .quasiprob import brownian_average
    from .quasiprob.core import QuasiprobTable

    t_grid = np.linspace(config["t_min"], config["t_max"], config["t_points"])
    result = brownian_average(
        config["n_qubits"],
        config["dt"],
        config["shots"],
        t_grid,
        config["seed"],
    )
    header = ["t", "re_f", "se_f", "re_g", "im_g", "se_g"]
    for label in QuasiprobTable.abcd_labels():
        header += [f"re_a_{label}", f"se_a_{label}"]
    rows = []
    for point in result.points:
        row = [
            point.t, point.f_mean.real, point.f_err,
            point.g_mean.real, point.g_mean.imag, point.g_err,
        ]
        for key in QuasiprobTable.coarse_keys():
            row += [point.table_mean[key].real, point.table_err[key]]
        rows.append(row)
    write_csv(out, header, rows)
    extra = {"discarded_shots": result.discarded}
    if plot:
        from .plotting import plot_brownian

        plot_brownian(result, out.with_suffix(".png"))
    return extra


def run_nats_audit(config, out: Path, plot: bool):
    from .linops import SIGMA_X, SIGMA_Y, SIGMA_Z, stream_rng
    from .nats import (
        ChargeSet,
        amc_subspace,
        microcanonical_reduction,
        second_law_audit,
        solve_potentials,
        typicality_probe,
    )

    charges = ChargeSet(operators=(SIGMA_X, SIGMA_Y, SIGMA_Z))
    target = [config["target_x"], config["target_y"], config["target_z"]]
    solved = solve_potentials(charges, target)
    rng = stream_rng(config["seed"], 0)
    audit = second_law_audit(
        np.diag([0.85, 0.15]).astype(complex),
        ChargeSet(operators=(SIGMA_Z,)),
        ChargeSet(operators=(SIGMA_Z,)),
        [0.7],
        n_channels=config["channels"],
        alphas=(0.0, 0.5, 1.0, 2.0),
        rng=rng,
    )
    header = [
        "n", "dim_m", "mean_d", "max_trace_dist", "pinsker_margin",
        "typicality_mean", "typicality_bound", "worst_falpha_violation",
    ]
    rows = []
    plot_rows = []
    for n in range(config["n_min"], config["n_max"] + 1):
        eta = config["eta0"] * math.sqrt(config["n_min"] / n)
        basis = amc_subspace(charges, target, n, eta=eta)
        reduction = microcanonical_reduction(basis, charges, solved.mu, n)
        margin = min(
            d - dist**2 / 2
            for d, dist in zip(
                reduction.relative_entropies, reduction.trace_distances
            )
        )
        typ = typicality_probe(
            basis, charges, solved.mu, n,
            shots=config["typicality_shots"],
            rng=stream_rng(config["seed"], n),
        )
        rows.append(
            [
                n, basis.shape[1], reduction.mean_relative_entropy,
                max(reduction.trace_distances), margin,
                typ.mean_distance, typ.bound, audit.worst_violation,
            ]
        )
        plot_rows.append(
            {
                "n": n,
                "mean_d": reduction.mean_relative_entropy,
                "max_dist": max(reduction.trace_distances),
            }
        )
    write_csv(out, header, rows)
    extra = {"fixed_point_error": audit.fixed_point_error}
    if plot:
        from .plotting import plot_nats_audit

        plot_nats_audit(plot_rows, out.with_suffix(".png"))
    return extra


RUNNERS = {
    "engine-sweep": run_engine_sweep,
    "engine-diabatic": run_engine_diabatic,
    "gapstats": run_gapstats,
    "otoc": run_otoc,
    "brownian": run_brownian,
    "nats-audit": run_nats_audit,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qtherm",
        description="engine, scrambling, and thermal-state experiment runner",
    )
    parser.add_argument("subcommand", choices=sorted(RUNNERS))
    parser.add_argument("--config", required=True, help="key = value config file")
    parser.add_argument("--seed", type=int, default=None, help="override master seed")
    parser.add_argument("--out", default=None, help="output CSV path")
    parser.add_argument(
        "--no-plot", dest="plot", action="store_false",
        help="skip figure rendering next to the CSV",
    )
    args = parser.parse_args(argv)

    try:
        config_text = Path(args.config).read_text()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        config = parse_config(config_text, args.subcommand)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config["seed"] = args.seed
    out = Path(args.out) if args.out else Path(f"{args.subcommand}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)

    try:
        extra = RUNNERS[args.subcommand](config, out, args.plot)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    write_metadata(
        out.with_suffix(".meta.json"), args.subcommand, config, config_text, extra
    )
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

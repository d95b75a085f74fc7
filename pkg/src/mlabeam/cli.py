"""Command-line front end: config parsing, subcommand dispatch, CSV emission.

Config files are line-based `key = value` with `#` comments; flag overrides
mirror the config keys and win over the file. All unit-bearing keys carry the
unit in their name (frequency_ghz, power_dbm, aperture_m, ...) and are
converted to SI/watts/radians exactly once, here.

Exit codes: 0 success, 2 config error, 3 infeasible design, 4 numerical
degeneracy, 5 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from .channel import dbm_to_watts
from .design import DesignInput, design_num_arrays
from .experiments import TrialConfig, run_localization_experiment, run_se_sweep
from .gain import (GainProfile, NullNotFoundError, crossrange_gain, focus_chain,
                   gain_exact_sweep, gain_mla_fresnel, half_power_beamwidth)
from .geometry import (Carrier, InfeasibleArrayError, ModularArray, derived_metrics,
                       spacing_for_aperture)
from .localization import DegenerateSubspaceError, IllConditionedTriangulationError


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class _Key:
    kind: str  # int | float | bool | str | int_list | float_list
    default: object = None
    required: bool = False
    positive: bool = False


_GEOMETRY_KEYS = {
    "frequency_ghz": _Key("float", 15.0, positive=True),
    "spacing_m": _Key("float", None, positive=True),
    "num_subarrays": _Key("int", 2, positive=True),
    "antennas_per_subarray": _Key("int", 64, positive=True),
    "aperture_m": _Key("float", 2.0, positive=True),
    "gap_m": _Key("float", None, positive=True),
    "seed": _Key("int", 1),
}

_MONTE_CARLO_KEYS = {
    "frequency_ghz": _Key("float", 15.0, positive=True),
    "spacing_m": _Key("float", None, positive=True),
    "aperture_m": _Key("float", 2.0, positive=True),
    "num_subarrays": _Key("int", 4, positive=True),
    "antennas_per_subarray": _Key("int", 16, positive=True),
    "trials": _Key("int", 500, positive=True),
    "noise_dbm": _Key("float", -78.0),
    "snapshots": _Key("int", 100, positive=True),
    "angle_min_deg": _Key("float", -60.0),
    "angle_max_deg": _Key("float", 60.0),
    "distance_min_m": _Key("float", 4.0, positive=True),
    "distance_max_m": _Key("float", 40.0, positive=True),
    "angle_step_rad": _Key("float", 0.002, positive=True),
    "ridge": _Key("float", 0.0),
    "seed": _Key("int", 1),
}

SCHEMAS = {
    "beampattern": {
        **_GEOMETRY_KEYS,
        "focus_m": _Key("float", required=True, positive=True),
        "x_min_m": _Key("float", -2.0),
        "x_max_m": _Key("float", 2.0),
        "x_points": _Key("int", 81, positive=True),
        "z_min_m": _Key("float", 10.0, positive=True),
        "z_max_m": _Key("float", 100.0, positive=True),
        "z_points": _Key("int", 61, positive=True),
        "log_z": _Key("bool", False),
    },
    "cutline": {
        **_GEOMETRY_KEYS,
        "focus_m": _Key("float", required=True, positive=True),
        "x_points": _Key("int", 401, positive=True),
        "x_halfwidth_m": _Key("float", None, positive=True),
    },
    "depth": {
        **_GEOMETRY_KEYS,
        "focus_m": _Key("float", required=True, positive=True),
        "z_min_m": _Key("float", None, positive=True),
        "z_max_m": _Key("float", None, positive=True),
        "z_points": _Key("int", 400, positive=True),
        "chain": _Key("int", 1, positive=True),
        "include_exact": _Key("bool", False),
        "depth_threshold": _Key("float", 0.05, positive=True),
    },
    "design": {
        "frequency_ghz": _Key("float", 15.0, positive=True),
        "spacing_m": _Key("float", None, positive=True),
        "aperture_m": _Key("float", required=True, positive=True),
        "focus_m": _Key("float", required=True, positive=True),
        "antenna_counts": _Key("int_list", (1, 2, 4, 8, 16, 32, 64), positive=True),
        "grid_points": _Key("int", 300, positive=True),
        "seed": _Key("int", 1),
    },
    "localize": {
        **_MONTE_CARLO_KEYS,
        "power_dbm": _Key("float", 20.0),
        "sweep_variable": _Key("str", "antennas_per_subarray"),
        "sweep_values": _Key("int_list", (4, 8, 16, 32), positive=True),
    },
    "se": {
        **_MONTE_CARLO_KEYS,
        "power_dbm_values": _Key("float_list", (10.0, 15.0, 20.0)),
        "include_2d": _Key("bool", True),
        "distance_step_m": _Key("float", 0.02, positive=True),
    },
}

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}


def _parse_value(key: str, spec: _Key, raw: str, where: str):
    raw = raw.strip()
    try:
        if spec.kind == "int":
            value = int(raw)
        elif spec.kind == "float":
            value = float(raw)
        elif spec.kind == "str":
            value = raw
        elif spec.kind == "bool":
            low = raw.lower()
            if low in _TRUE:
                value = True
            elif low in _FALSE:
                value = False
            else:
                raise ValueError("expected a boolean")
        elif spec.kind == "int_list":
            value = tuple(int(v.strip()) for v in raw.split(","))
        elif spec.kind == "float_list":
            value = tuple(float(v.strip()) for v in raw.split(","))
        else:  # pragma: no cover - schema bug
            raise ValueError(f"unhandled kind {spec.kind}")
    except ValueError as exc:
        raise ConfigError(f"invalid value for '{key}' ({where}): {exc}") from None
    if spec.positive:
        vals = value if isinstance(value, tuple) else (value,)
        if any(v <= 0 for v in vals):
            raise ConfigError(f"'{key}' must be positive ({where})")
    return value


def parse_config(text: str, schema: dict, overrides: dict | None = None) -> dict:
    """Typed config from file text plus flag overrides (overrides win).

    Raises ConfigError naming the offending key and line for unknown keys,
    bad values, and missing required keys.
    """
    cfg = {k: spec.default for k, spec in schema.items()}
    provided = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in schema:
            raise ConfigError(f"unknown key '{key}' (line {lineno})")
        cfg[key] = _parse_value(key, schema[key], raw, f"line {lineno}")
        provided.add(key)
    for key, raw in (overrides or {}).items():
        if raw is None:
            continue
        cfg[key] = _parse_value(key, schema[key], str(raw), "flag")
        provided.add(key)
    for key, spec in schema.items():
        if spec.required and key not in provided:
            raise ConfigError(f"missing required key '{key}'")
    return cfg


def _resolved_comment(cfg: dict) -> str:
    return " ".join(f"{k}={cfg[k]!r}".replace(" ", "") for k in sorted(cfg))


def _write_csv(path: str, cfg: dict, header, rows, extra_comments=()):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# config: {_resolved_comment(cfg)}\n")
        for comment in extra_comments:
            f.write(f"# {comment}\n")
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join("%.17g" % v if isinstance(v, float) else str(v)
                             for v in row) + "\n")


def _carrier(cfg: dict) -> Carrier:
    return Carrier.from_frequency(cfg["frequency_ghz"] * 1e9)


def _resolve_array(cfg: dict):
    carrier = _carrier(cfg)
    spacing = cfg["spacing_m"] if cfg["spacing_m"] is not None else carrier.wavelength / 2
    L, N = cfg["num_subarrays"], cfg["antennas_per_subarray"]
    if cfg.get("gap_m") is not None:
        gap = cfg["gap_m"]
    elif cfg.get("aperture_m") is not None:
        gap = spacing_for_aperture(cfg["aperture_m"], L, N, spacing) if L > 1 else spacing
    else:
        raise ConfigError("either 'aperture_m' or 'gap_m' must be set")
    return ModularArray(L, N, spacing, gap), carrier


def _cmd_beampattern(cfg: dict, out: str) -> int:
    mla, carrier = _resolve_array(cfg)
    xs = np.linspace(cfg["x_min_m"], cfg["x_max_m"], cfg["x_points"])
    if cfg["log_z"]:
        zs = np.geomspace(cfg["z_min_m"], cfg["z_max_m"], cfg["z_points"])
    else:
        zs = np.linspace(cfg["z_min_m"], cfg["z_max_m"], cfg["z_points"])
    X, Z = np.meshgrid(xs, zs)
    gains = np.minimum(gain_exact_sweep(mla, X, Z, cfg["focus_m"], carrier), 1.0)
    profile = GainProfile("plane_xz", (xs, zs), gains, cfg["focus_m"])
    rows = ((float(z), float(x), float(g))
            for z, xrow, grow in zip(zs, [xs] * len(zs), profile.gain)
            for x, g in zip(xrow, grow))
    _write_csv(out, cfg, ["z_m", "x_m", "gain"], rows)
    print(f"wrote {cfg['z_points'] * cfg['x_points']} gain samples to {out}")
    return 0


def _cmd_cutline(cfg: dict, out: str) -> int:
    mla, carrier = _resolve_array(cfg)
    metrics = derived_metrics(mla, carrier)
    focus = cfg["focus_m"]
    bw = half_power_beamwidth(mla.elements_per_subarray, focus)
    halfwidth = cfg["x_halfwidth_m"] if cfg["x_halfwidth_m"] is not None else bw
    xs = np.linspace(-halfwidth, halfwidth, cfg["x_points"])
    g, env = crossrange_gain(mla.num_subarrays, mla.elements_per_subarray,
                             metrics.half_pitch, focus, xs, carrier)
    GainProfile("cross_range_x", (xs,), np.minimum(g, 1.0), focus)
    rows = ((float(x), float(gv), float(ev), int(abs(x) <= bw / 2))
            for x, gv, ev in zip(xs, g, env))
    _write_csv(out, cfg, ["x_m", "gain", "envelope", "in_halfpower_window"], rows,
               extra_comments=[f"halfpower_beamwidth_m: {bw!r}"])
    print(f"wrote cross-range cut ({cfg['x_points']} samples, beamwidth {bw:.4g} m) to {out}")
    return 0


def _cmd_depth(cfg: dict, out: str) -> int:
    mla, carrier = _resolve_array(cfg)
    metrics = derived_metrics(mla, carrier)
    L, N = mla.num_subarrays, mla.elements_per_subarray
    foci = [float(f) for f in focus_chain(L, N, metrics.half_pitch, cfg["focus_m"],
                                          carrier, cfg["chain"], cfg["depth_threshold"],
                                          mla.spacing)]
    z_lo = cfg["z_min_m"] if cfg["z_min_m"] is not None else foci[0] / 2
    z_hi = cfg["z_max_m"] if cfg["z_max_m"] is not None else foci[-1] * 2.5
    zs = np.linspace(z_lo, z_hi, cfg["z_points"])
    columns = ["z_m"] + [f"gain_focus_{i + 1}" for i in range(len(foci))]
    series = [np.array([gain_mla_fresnel(L, N, metrics.half_pitch, f, z, carrier,
                                         mla.spacing) for z in zs]) for f in foci]
    for f, g in zip(foci, series):
        GainProfile("depth_z", (zs,), np.minimum(g, 1.0), f)
    if cfg["include_exact"]:
        columns += [f"exact_focus_{i + 1}" for i in range(len(foci))]
        series += [gain_exact_sweep(mla, np.zeros_like(zs), zs, f, carrier) for f in foci]
    rows = ((float(z), *(float(s[i]) for s in series)) for i, z in enumerate(zs))
    _write_csv(out, cfg, columns, rows,
               extra_comments=["foci_m: " + ",".join(repr(f) for f in foci)])
    for i, f in enumerate(foci, start=1):
        print(f"focus {i}: {f:.4f} m")
    print(f"wrote {len(zs)} depth samples to {out}")
    return 0


def _cmd_design(cfg: dict, out: str) -> int:
    carrier = _carrier(cfg)
    results = []
    print(f"{'N':>5} {'L':>5} {'gap_m':>10} {'peaks':>6}  note")
    for n in cfg["antenna_counts"]:
        res = design_num_arrays(DesignInput(cfg["aperture_m"], cfg["focus_m"], int(n),
                                            carrier, cfg["spacing_m"], cfg["grid_points"]))
        note = "guard-limited" if res.guard_limited else (
            "aperture-filled" if res.aperture_filled else "")
        print(f"{n:>5} {res.num_subarrays:>5} {res.gap:>10.4f} {res.final_peak_count:>6}  {note}")
        results.append((int(n), res))
    _write_csv(out, cfg, ["antennas_per_subarray", "num_subarrays", "gap_m",
                          "final_peak_count", "guard_limited"],
               ((n, r.num_subarrays, float(r.gap), r.final_peak_count,
                 int(r.guard_limited)) for n, r in results))
    return 0


def _trial_config(cfg: dict, sweep_variable: str, sweep_values: tuple) -> TrialConfig:
    return TrialConfig(
        aperture=cfg["aperture_m"],
        num_subarrays=cfg["num_subarrays"],
        elements_per_subarray=cfg["antennas_per_subarray"],
        carrier=_carrier(cfg),
        power=dbm_to_watts(cfg["power_dbm"]) if "power_dbm" in cfg else float("nan"),
        noise_power=dbm_to_watts(cfg["noise_dbm"]),
        sweep_variable=sweep_variable,
        sweep_values=sweep_values,
        num_snapshots=cfg["snapshots"],
        angle_bounds_deg=(cfg["angle_min_deg"], cfg["angle_max_deg"]),
        distance_bounds=(cfg["distance_min_m"], cfg["distance_max_m"]),
        trials=cfg["trials"],
        base_seed=cfg["seed"],
        angle_step=cfg["angle_step_rad"],
        distance_step=cfg.get("distance_step_m", 0.02),
        ridge=cfg["ridge"],
        spacing=cfg["spacing_m"],
    )


def _cmd_localize(cfg: dict, out: str) -> int:
    variable = {"antennas_per_subarray": "elements_per_subarray",
                "num_subarrays": "num_subarrays"}.get(cfg["sweep_variable"])
    if variable is None:
        raise ConfigError(f"invalid value for 'sweep_variable': {cfg['sweep_variable']!r}")
    config = _trial_config(cfg, variable, tuple(cfg["sweep_values"]))
    result = run_localization_experiment(config, out_path=out)
    for agg in result.aggregates:
        print(f"sweep={agg['sweep_value']:g} nmse={agg['nmse']:.6e} "
              f"excluded={agg['excluded']}/{agg['trials']}")
    print(f"wrote {len(result.records)} records to {out}")
    return 0


def _cmd_se(cfg: dict, out: str) -> int:
    powers = tuple(dbm_to_watts(p) for p in cfg["power_dbm_values"])
    config = _trial_config(cfg, "power", powers)
    result = run_se_sweep(config, out_path=out, include_2d=cfg["include_2d"])
    for agg in result.aggregates:
        parts = [f"power_w={agg['sweep_value']:.6g}",
                 f"se_proposed={agg['mean_se_proposed']:.4f}",
                 f"se_perfect={agg['mean_se_perfect']:.4f}"]
        if cfg["include_2d"] and not math.isnan(agg["mean_se_2d"]):
            parts.insert(2, f"se_2d={agg['mean_se_2d']:.4f}")
        print(" ".join(parts))
    print(f"wrote {len(result.records)} records to {out}")
    return 0


_COMMANDS = {
    "beampattern": _cmd_beampattern,
    "cutline": _cmd_cutline,
    "depth": _cmd_depth,
    "design": _cmd_design,
    "localize": _cmd_localize,
    "se": _cmd_se,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlabeam",
        description="Near-field beamfocusing with modular linear arrays")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name, help=f"{name} computation")
        sp.add_argument("--config", help="path to a key = value config file")
        sp.add_argument("--out", default=f"mlabeam_{name}.csv", help="output CSV path")
        for key in schema:
            sp.add_argument(f"--{key}", dest=f"key_{key}", metavar="VALUE",
                            help=f"override config key {key}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    schema = SCHEMAS[args.command]
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as f:
                text = f.read()
        else:
            text = ""
        overrides = {k: getattr(args, f"key_{k}") for k in schema}
        cfg = parse_config(text, schema, overrides)
        return _COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleArrayError as exc:
        print(f"infeasible design: {exc}", file=sys.stderr)
        return 3
    except (DegenerateSubspaceError, IllConditionedTriangulationError,
            NullNotFoundError) as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())

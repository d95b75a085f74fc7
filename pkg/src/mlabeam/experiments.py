"""Seeded Monte-Carlo studies: localization error sweeps and rate comparison.

Per-trial randomness is derived from a base seed so runs are reproducible
bit-for-bit; the user draw and the snapshot noise use disjoint derived
streams, and the user draw depends only on the trial index so every sweep
point sees the same users. Records stream to CSV as they are produced, with
an aggregate footer written last.
"""

from __future__ import annotations

import dataclasses
import hashlib
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .channel import estimate_channel, friis_beta, spectral_efficiency
from .geometry import Carrier, ModularArray, spacing_for_aperture, subarray_centers
from .localization import (DegenerateSubspaceError, IllConditionedTriangulationError,
                           NearFieldGrid, Scenario, SearchCounter, centered_angle_grid,
                           default_angle_grid, default_distance_grid, locate, music_2d,
                           near_steering, synthesize_snapshots, triangulate)

_USER_STREAM = 0
_SNAPSHOT_STREAM = 1


def derive_trial_seed(base_seed: int, trial: int, stream: int = 0) -> int:
    """Per-trial 64-bit seed: base XOR SHA-256(trial, stream) truncated.

    Different streams of the same trial never share RNG state; the same
    (trial, stream) pair is identical across sweep points.
    """
    digest = hashlib.sha256(trial.to_bytes(8, "big") + stream.to_bytes(2, "big")).digest()
    return (int(base_seed) ^ int.from_bytes(digest[:8], "big")) & 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class TrialConfig:
    """Shared Monte-Carlo configuration.

    The user is drawn uniformly in angle (degrees about broadside) and
    distance (meters). sweep_variable selects what varies across sweep
    points: 'elements_per_subarray', 'num_subarrays', or 'power' (values in
    watts). Power values are in watts throughout.
    """

    aperture: float
    num_subarrays: int
    elements_per_subarray: int
    carrier: Carrier
    power: float
    noise_power: float
    sweep_variable: str
    sweep_values: tuple
    num_snapshots: int = 100
    angle_bounds_deg: tuple = (-60.0, 60.0)
    distance_bounds: tuple = (4.0, 40.0)
    trials: int = 500
    base_seed: int = 1
    angle_step: float = 0.002
    distance_step: float = 0.02
    ridge: float = 0.0
    spacing: float | None = None  # defaults to half a wavelength

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if not (self.angle_bounds_deg[0] < self.angle_bounds_deg[1]
                and self.distance_bounds[0] < self.distance_bounds[1]):
            raise ValueError("user distribution bounds must be ordered")
        if self.sweep_variable not in ("elements_per_subarray", "num_subarrays", "power"):
            raise ValueError(f"unknown sweep variable {self.sweep_variable!r}")
        if not self.sweep_values:
            raise ValueError("sweep needs at least one value")

    @property
    def element_spacing(self) -> float:
        return self.carrier.wavelength / 2 if self.spacing is None else self.spacing

    def array_for(self, num_subarrays: int, elements_per_subarray: int) -> ModularArray:
        gap = spacing_for_aperture(self.aperture, num_subarrays, elements_per_subarray,
                                   self.element_spacing)
        return ModularArray(num_subarrays, elements_per_subarray,
                            self.element_spacing, gap)

    def draw_user(self, trial: int):
        """(angle radians, distance meters) for one trial; same across sweeps."""
        rng = np.random.default_rng(derive_trial_seed(self.base_seed, trial, _USER_STREAM))
        lo, hi = self.angle_bounds_deg
        angle = math.pi / 2 + math.radians(rng.uniform(lo, hi))
        distance = rng.uniform(*self.distance_bounds)
        return angle, distance


@dataclass(frozen=True)
class ExperimentRecord:
    """One Monte-Carlo trial row. Fields that a run does not produce are NaN;
    excluded=1 flags trials dropped from the aggregates (ill-conditioned
    triangulation or a degenerate subspace)."""

    sweep_value: float
    trial: int
    seed: int
    true_x: float
    true_z: float
    est_x: float
    est_z: float
    sq_error: float
    est_x_2d: float
    est_z_2d: float
    sq_error_2d: float
    se_proposed: float
    se_2d: float
    se_perfect: float
    excluded: int


RECORD_FIELDS = tuple(f.name for f in dataclasses.fields(ExperimentRecord))


@dataclass
class ExperimentResult:
    config: TrialConfig
    records: list
    aggregates: list  # one dict per sweep point
    excluded_total: int = 0
    search_cost_proposed: int = 0
    search_cost_2d: int = 0


def _fmt(value) -> str:
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _config_fields(config: TrialConfig) -> dict:
    fields = {}
    for f in dataclasses.fields(config):
        v = getattr(config, f.name)
        if isinstance(v, Carrier):
            fields["frequency"] = repr(v.frequency)
        elif isinstance(v, tuple):
            fields[f.name] = ",".join(repr(x) for x in v)
        else:
            fields[f.name] = repr(v)
    return fields


class _StreamWriter:
    """Incremental CSV emission: config comment, header, rows, aggregate footer."""

    def __init__(self, path, config: TrialConfig):
        self.f = open(path, "w", encoding="utf-8", newline="\n")
        items = " ".join(f"{k}={v}" for k, v in _config_fields(config).items())
        self.f.write(f"# config: {items}\n")
        self.f.write(",".join(RECORD_FIELDS) + "\n")

    def row(self, record: ExperimentRecord):
        self.f.write(",".join(_fmt(v) for v in dataclasses.astuple(record)) + "\n")
        self.f.flush()

    def finish(self, aggregates):
        for agg in aggregates:
            items = " ".join(f"{k}={_fmt(v)}" for k, v in agg.items())
            self.f.write(f"# aggregate: {items}\n")
        self.f.close()


def write_records_csv(path, result: ExperimentResult):
    w = _StreamWriter(path, result.config)
    for r in result.records:
        w.row(r)
    w.finish(result.aggregates)


def read_records_csv(path):
    """Parse an emitted CSV back into (config dict, record dicts, aggregate dicts)."""
    config, records, aggregates = {}, [], []
    header = None
    with open(path, encoding="utf-8", newline="\n") as f:
        for line in f:
            line = line.rstrip("\n")
            if line.startswith("# config: "):
                config = dict(kv.split("=", 1) for kv in line[len("# config: "):].split(" "))
            elif line.startswith("# aggregate: "):
                pairs = dict(kv.split("=", 1) for kv in line[len("# aggregate: "):].split(" "))
                aggregates.append({k: float(v) for k, v in pairs.items()})
            elif header is None:
                header = line.split(",")
            else:
                vals = [float(v) for v in line.split(",")]
                records.append(dict(zip(header, vals)))
    return config, records, aggregates


def _nmse_aggregates(records, method_fields=("sq_error",)):
    """Recompute per-sweep aggregates from the record list itself, so a reader
    summing the emitted rows reproduces them exactly."""
    aggregates = []
    for v in dict.fromkeys(r.sweep_value for r in records):
        rows = [r for r in records if r.sweep_value == v]
        kept = [r for r in rows if not r.excluded]
        agg = {"sweep_value": v, "trials": len(rows), "excluded": len(rows) - len(kept)}
        norm = sum(r.true_x**2 + r.true_z**2 for r in kept)
        for fieldname in method_fields:
            total = sum(getattr(r, fieldname) for r in kept)
            key = "nmse" if fieldname == "sq_error" else "nmse_2d"
            agg[key] = total / norm if kept else float("nan")
        aggregates.append(agg)
    return aggregates


def _se_aggregates(records):
    aggregates = []
    for v in dict.fromkeys(r.sweep_value for r in records):
        rows = [r for r in records if r.sweep_value == v]
        kept = [r for r in rows if not r.excluded]
        agg = {"sweep_value": v, "trials": len(rows), "excluded": len(rows) - len(kept)}
        for name in ("se_proposed", "se_2d", "se_perfect"):
            vals = [getattr(r, name) for r in kept]
            finite = [x for x in vals if not math.isnan(x)]
            agg["mean_" + name] = sum(finite) / len(finite) if finite else float("nan")
        aggregates.append(agg)
    return aggregates


def run_localization_experiment(config: TrialConfig, out_path=None) -> ExperimentResult:
    """Position-error sweep over a geometry variable.

    Per sweep value, runs config.trials independent trials of the full
    pipeline (synthesize, per-sub-array angle spectra, bearing intersection)
    and aggregates the error into one NMSE per sweep point. Ill-conditioned
    trials are flagged, kept in the records, and excluded from the NMSE with
    their count reported.
    """
    if config.sweep_variable == "power":
        raise ValueError("use run_se_sweep for power sweeps")
    grid = default_angle_grid(config.angle_step)
    counter = SearchCounter()
    writer = _StreamWriter(out_path, config) if out_path else None
    records = []
    for v in config.sweep_values:
        if config.sweep_variable == "elements_per_subarray":
            mla = config.array_for(config.num_subarrays, int(v))
        else:
            mla = config.array_for(int(v), config.elements_per_subarray)
        for trial in range(config.trials):
            angle, distance = config.draw_user(trial)
            seed = derive_trial_seed(config.base_seed, trial, _SNAPSHOT_STREAM)
            scenario = Scenario(mla, config.carrier, distance, angle,
                                config.power, config.noise_power, config.num_snapshots)
            snaps = synthesize_snapshots(scenario, seed)
            tx, tz = scenario.user_xz
            nan = float("nan")
            try:
                est = locate(snaps, grid, counter=counter, ridge=config.ridge)
                sq = (est.x - tx) ** 2 + (est.z - tz) ** 2
                rec = ExperimentRecord(float(v), trial, seed, tx, tz, est.x, est.z, sq,
                                       nan, nan, nan, nan, nan, nan, 0)
            except (IllConditionedTriangulationError, DegenerateSubspaceError):
                rec = ExperimentRecord(float(v), trial, seed, tx, tz, nan, nan, nan,
                                       nan, nan, nan, nan, nan, nan, 1)
            records.append(rec)
            if writer:
                writer.row(rec)
    aggregates = _nmse_aggregates(records)
    if writer:
        writer.finish(aggregates)
    return ExperimentResult(config, records, aggregates,
                            excluded_total=sum(r.excluded for r in records),
                            search_cost_proposed=counter.count)


def run_se_sweep(config: TrialConfig, out_path=None, include_2d: bool = True,
                 grid_2d: NearFieldGrid | None = None) -> ExperimentResult:
    """Mean uplink rate per transmit power for the proposed pipeline, the
    whole-array 2D search baseline, and perfect channel knowledge.

    The perfect-knowledge rate is closed-form per trial. The 2D baseline
    shares one precomputed steering grid across all trials.
    """
    if config.sweep_variable != "power":
        raise ValueError("run_se_sweep expects a power sweep")
    mla = config.array_for(config.num_subarrays, config.elements_per_subarray)
    n_total = mla.num_elements
    grid = default_angle_grid(config.angle_step)
    counter_1d = SearchCounter()
    counter_2d = SearchCounter()
    if include_2d and grid_2d is None:
        grid_2d = NearFieldGrid(mla, config.carrier, centered_angle_grid(step=config.angle_step),
                                default_distance_grid(step=config.distance_step))
    writer = _StreamWriter(out_path, config) if out_path else None
    records = []
    for power in config.sweep_values:
        for trial in range(config.trials):
            angle, distance = config.draw_user(trial)
            seed = derive_trial_seed(config.base_seed, trial, _SNAPSHOT_STREAM)
            scenario = Scenario(mla, config.carrier, distance, angle,
                                float(power), config.noise_power, config.num_snapshots)
            snaps = synthesize_snapshots(scenario, seed)
            tx, tz = scenario.user_xz
            h_true = near_steering(mla, config.carrier, angle, distance)
            beta = friis_beta(config.carrier, distance)
            se_perfect = math.log2(1 + float(power) * beta * n_total / config.noise_power)
            nan = float("nan")
            try:
                est = locate(snaps, grid, counter=counter_1d, ridge=config.ridge)
            except (IllConditionedTriangulationError, DegenerateSubspaceError):
                rec = ExperimentRecord(float(power), trial, seed, tx, tz, nan, nan, nan,
                                       nan, nan, nan, nan, nan, se_perfect, 1)
                records.append(rec)
                if writer:
                    writer.row(rec)
                continue
            ch = estimate_channel(mla, config.carrier, est.angle, est.distance)
            se_prop = spectral_efficiency(h_true, ch.vector, float(power), beta,
                                          config.noise_power)
            sq = (est.x - tx) ** 2 + (est.z - tz) ** 2
            ex2 = ez2 = sq2 = se_2d = nan
            if include_2d:
                stacked = snaps.data.transpose(1, 0, 2).reshape(config.num_snapshots, -1)
                phi2, d2 = music_2d(stacked, mla, config.carrier,
                                    precomputed=grid_2d, counter=counter_2d)
                ch2 = estimate_channel(mla, config.carrier, phi2, d2)
                se_2d = spectral_efficiency(h_true, ch2.vector, float(power), beta,
                                            config.noise_power)
                ex2, ez2 = d2 * math.cos(phi2), d2 * math.sin(phi2)
                sq2 = (ex2 - tx) ** 2 + (ez2 - tz) ** 2
            rec = ExperimentRecord(float(power), trial, seed, tx, tz, est.x, est.z, sq,
                                   ex2, ez2, sq2, se_prop, se_2d, se_perfect, 0)
            records.append(rec)
            if writer:
                writer.row(rec)
    aggregates = _se_aggregates(records)
    if writer:
        writer.finish(aggregates)
    return ExperimentResult(config, records, aggregates,
                            excluded_total=sum(r.excluded for r in records),
                            search_cost_proposed=counter_1d.count,
                            search_cost_2d=counter_2d.count)


def bracketing_floor(mla: ModularArray, truth_xz, grid) -> float:
    """Worst position error from snapping each sub-array's true bearing to a
    neighboring grid angle.

    A noiseless angle spectrum peaks at one of the two grid angles bracketing
    the true bearing, so triangulating every floor/ceil combination bounds
    the grid-induced error of the noiseless pipeline.
    """
    centers = subarray_centers(mla)
    x, z = truth_xz
    grid = np.asarray(grid, dtype=float)
    options = []
    for c in centers:
        phi = math.atan2(z, x - c)
        i = int(np.searchsorted(grid, phi))
        options.append((grid[max(i - 1, 0)], grid[min(i, grid.size - 1)]))
    worst = 0.0
    for combo in itertools.product(*options):
        est = triangulate(np.array(combo), centers)
        worst = max(worst, math.hypot(est.x - x, est.z - z))
    return worst

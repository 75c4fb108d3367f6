"""End-to-end experiment orchestration: relMSE curves over scale and noise.

Protocol per noise level: perturb the base cloud, rebuild the dictionary on
the perturbed points, then for each requested scale and oversampling factor
draw num_draws fresh measurement matrices with m = min(d_j * f, D) rows and
run batch recovery over every point.  The dictionary is shared across the
draws of one noise level; only the matrix is redrawn.  All randomness is
derived from the master seed by fixed spawn keys, so the result rows (and
the CSV they serialize to) are a pure function of the config.  Wall-clock
timings are inherently non-reproducible and therefore live in a separate
timing CSV, keeping the results file byte-stable across reruns.
"""

import csv
import json
import os
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import geometry, gmra, measurement, recovery
from .svgplot import render_curves

RESULTS_COLUMNS = [
    "dataset",
    "sigma",
    "j",
    "f",
    "draw",
    "relMSE",
    "relMSE_J",
    "d_j",
    "m",
    "max_sq_rel_err",
    "status",
]

TIMING_COLUMNS = ["dataset", "sigma", "j", "f", "draw", "ms_per_point", "sparsa_ms_per_point"]


def rel_mse(points, reconstructions):
    """Root mean squared relative error between matching point rows."""
    value, _ = rel_mse_with_max(points, reconstructions)
    return value


def rel_mse_with_max(points, reconstructions):
    """relMSE together with the largest per-point squared relative error."""
    pts = points.points if isinstance(points, geometry.PointCloud) else np.asarray(points, dtype=np.float64)
    rec = (
        reconstructions.points
        if isinstance(reconstructions, geometry.PointCloud)
        else np.asarray(reconstructions, dtype=np.float64)
    )
    if pts.shape != rec.shape:
        raise ValueError("points and reconstructions must share shape, got %s vs %s" % (pts.shape, rec.shape))
    norms_sq = np.einsum("ij,ij->i", pts, pts)
    zero = np.nonzero(norms_sq == 0.0)[0]
    if zero.size:
        raise ValueError("point %d has zero norm; relative error is undefined" % int(zero[0]))
    err_sq = np.einsum("ij,ij->i", pts - rec, pts - rec) / norms_sq
    return float(np.sqrt(err_sq.mean())), float(err_sq.max())


def rel_mse_baseline(points, dictionary, finest=None):
    """Uncompressed finest-scale relMSE: project each point on its nearest cell."""
    if finest is None:
        finest = dictionary.max_scale
    pts = points.points if isinstance(points, geometry.PointCloud) else np.asarray(points, dtype=np.float64)
    recon = project_at_scale(dictionary, finest, pts)
    return rel_mse(points, recon)


def project_at_scale(dictionary, j, pts):
    """Apply the nearest-center projector at scale j to every row of pts."""
    assign = gmra.nearest_center_batch(dictionary, j, pts)
    out = np.empty_like(pts)
    for k in np.unique(assign):
        sel = assign == k
        out[sel] = gmra.apply_projector_batch(dictionary.scales[j][k], pts[sel])
    return out


@dataclass
class ExperimentConfig:
    """Everything run_experiment needs; JSON-roundtrippable."""

    dataset: dict  # {"generator": "swiss-roll"|"sphere", "n": int, "d": int} or {"csv": path}
    noise_sigmas: list = field(default_factory=lambda: [0.0])
    oversampling: list = field(default_factory=lambda: [2, 4, 16])
    num_draws: int = 10
    seed: int = 0
    scales: list = field(default_factory=lambda: list(range(7)))
    output_dir: str = "experiment-out"
    local_dim: int | None = None
    max_local_dim: int | None = None
    energy_threshold: float = 0.95
    min_points: int | None = None
    sep_constant_hint: float = 1.0
    ensemble: str = "haar-orthoprojection"
    max_scale: int | None = None  # dictionary depth; default: deepest requested scale

    def __post_init__(self):
        if self.num_draws < 1:
            raise ValueError("num_draws must be >= 1")
        if not self.scales:
            raise ValueError("scales must be nonempty")
        for f in self.oversampling:
            if int(f) != f or f < 1:
                raise ValueError("oversampling factors must be positive integers, got %r" % (f,))
        if self.ensemble not in ("haar-orthoprojection", "gaussian"):
            raise ValueError("unknown ensemble %r" % self.ensemble)

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls(**json.load(fh))

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list  # long-form result rows (deterministic)
    timing_rows: list  # wall-clock rows (not reproducible)
    baselines: dict  # sigma -> relMSE_J
    mean_norms: dict  # sigma -> mean point norm of the evaluated cloud
    aggregates: dict  # (sigma, j, f) -> (mean, std)
    d_by_scale: dict  # (sigma, j) -> d_j

    def curve(self, sigma, f):
        """(scales, means, stds) for one noise level and oversampling factor."""
        js = sorted({j for (s, j, ff) in self.aggregates if s == sigma and ff == f})
        means = [self.aggregates[(sigma, j, f)][0] for j in js]
        stds = [self.aggregates[(sigma, j, f)][1] for j in js]
        return js, means, stds


def derive_seed(master, *key):
    """Deterministic child seed for the given spawn key."""
    return int(np.random.SeedSequence(master, spawn_key=tuple(int(k) for k in key)).generate_state(1, dtype=np.uint64)[0])


def load_dataset(descriptor):
    """Materialize the configured base cloud (generator or CSV)."""
    if "csv" in descriptor:
        return geometry.load_csv(descriptor["csv"], label=descriptor.get("label", "csv"))
    gen = descriptor.get("generator")
    if gen == "swiss-roll":
        return geometry.gen_swiss_roll(descriptor["n"], descriptor.get("seed", 0))
    if gen == "sphere":
        return geometry.gen_sphere(descriptor["n"], descriptor["d"], descriptor.get("seed", 0))
    raise ValueError("dataset needs a csv path or a known generator, got %r" % (descriptor,))


def run_experiment(config, verbose=False):
    """Run the full relMSE grid and write results.csv, timing.csv, and SVG plots."""
    base = load_dataset(config.dataset)
    dataset_label = base.label or "dataset"
    max_scale = max(config.scales) if config.max_scale is None else config.max_scale
    rows = []
    timing_rows = []
    baselines = {}
    mean_norms = {}
    aggregates = {}
    d_by_scale = {}

    for s_idx, sigma in enumerate(config.noise_sigmas):
        cloud = geometry.add_noise(base, sigma, derive_seed(config.seed, 1, s_idx))
        if verbose:
            print("[experiment] sigma=%g: building dictionary (n=%d)" % (sigma, cloud.n))
        dictionary = gmra.build_dictionary(
            cloud,
            local_dim=config.local_dim,
            max_scale=max_scale,
            sep_constant_hint=config.sep_constant_hint,
            energy_threshold=config.energy_threshold,
            max_local_dim=config.max_local_dim,
            min_points=config.min_points,
        )
        baseline = rel_mse_baseline(cloud, dictionary)
        baselines[sigma] = baseline
        mean_norms[sigma] = float(np.linalg.norm(cloud.points, axis=1).mean())
        dim = cloud.ambient_dim
        for j in config.scales:
            if j > dictionary.max_scale:
                rows.append(
                    {
                        "dataset": dataset_label,
                        "sigma": sigma,
                        "j": j,
                        "f": "",
                        "draw": "",
                        "relMSE": "",
                        "relMSE_J": baseline,
                        "d_j": "",
                        "m": "",
                        "max_sq_rel_err": "",
                        "status": "skipped: scale beyond dictionary",
                    }
                )
                continue
            d_j = dictionary.max_local_dim(j)
            d_by_scale[(sigma, j)] = d_j
            for f in config.oversampling:
                m = min(d_j * int(f), dim)
                values = []
                for draw in range(config.num_draws):
                    # one fixed matrix per drawn dimension: scales sharing m
                    # within a draw see the same projection
                    seed = derive_seed(config.seed, 2, s_idx, f, draw, m)
                    if config.ensemble == "haar-orthoprojection":
                        matrix = measurement.orthoprojection_matrix(m, dim, seed)
                    else:
                        matrix = measurement.gaussian_matrix(m, dim, seed)
                    comp = matrix.apply(cloud.points)
                    t0 = time.perf_counter()
                    batch = recovery.recover_batch(comp, matrix, dictionary, j)
                    elapsed = time.perf_counter() - t0
                    value, max_sq = rel_mse_with_max(cloud, batch.reconstructions)
                    values.append(value)
                    rows.append(
                        {
                            "dataset": dataset_label,
                            "sigma": sigma,
                            "j": j,
                            "f": int(f),
                            "draw": draw,
                            "relMSE": value,
                            "relMSE_J": baseline,
                            "d_j": d_j,
                            "m": m,
                            "max_sq_rel_err": max_sq,
                            "status": "ok",
                        }
                    )
                    timing_rows.append(
                        {
                            "dataset": dataset_label,
                            "sigma": sigma,
                            "j": j,
                            "f": int(f),
                            "draw": draw,
                            "ms_per_point": elapsed * 1000.0 / cloud.n,
                            "sparsa_ms_per_point": "",
                        }
                    )
                arr = np.array(values)
                aggregates[(sigma, j, int(f))] = (float(arr.mean()), float(arr.std()))
            if verbose:
                print("[experiment] sigma=%g scale=%d done" % (sigma, j))

    result = ExperimentResult(
        config=config,
        rows=rows,
        timing_rows=timing_rows,
        baselines=baselines,
        mean_norms=mean_norms,
        aggregates=aggregates,
        d_by_scale=d_by_scale,
    )
    os.makedirs(config.output_dir, exist_ok=True)
    write_results_csv(result, os.path.join(config.output_dir, "results.csv"))
    write_timing_csv(result, os.path.join(config.output_dir, "timing.csv"))
    emit_plot(result, config.output_dir)
    return result


def _cell(value):
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def write_results_csv(result, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_COLUMNS)
        for row in result.rows:
            writer.writerow([_cell(row[c]) for c in RESULTS_COLUMNS])


def write_timing_csv(result, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TIMING_COLUMNS)
        for row in result.timing_rows:
            writer.writerow([_cell(row[c]) for c in TIMING_COLUMNS])


def load_results_csv(path):
    """Rebuild an ExperimentResult (aggregates and baselines) from results.csv.

    Enough for replotting; timing rows and the original config are not
    recoverable from the results file.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for raw in reader:
            rows.append(raw)
    if not rows:
        raise ValueError("no rows in %s" % path)
    parsed = []
    baselines = {}
    draws = {}
    for raw in rows:
        if raw["status"] != "ok":
            continue
        sigma = float(raw["sigma"])
        j = int(raw["j"])
        f = int(raw["f"])
        value = float(raw["relMSE"])
        parsed.append(raw)
        baselines[sigma] = float(raw["relMSE_J"])
        draws.setdefault((sigma, j, f), []).append(value)
    if not draws:
        raise ValueError("no usable result rows in %s" % path)
    aggregates = {
        key: (float(np.mean(vals)), float(np.std(vals))) for key, vals in draws.items()
    }
    sigmas = sorted({s for (s, _, _) in aggregates})
    config = ExperimentConfig(
        dataset={"csv": path},
        noise_sigmas=sigmas,
        oversampling=sorted({f for (_, _, f) in aggregates}),
        num_draws=max(len(v) for v in draws.values()),
        scales=sorted({j for (_, j, _) in aggregates}),
    )
    result_rows = [
        {"dataset": raw["dataset"], "sigma": float(raw["sigma"])} for raw in parsed[:1]
    ]
    return ExperimentResult(
        config=config,
        rows=result_rows,
        timing_rows=[],
        baselines=baselines,
        mean_norms={},
        aggregates=aggregates,
        d_by_scale={},
    )


def emit_plot(result, out_dir):
    """One SVG per noise level: relMSE against scale, one curve per factor."""
    if not result.aggregates:
        raise ValueError("nothing to plot: experiment produced no aggregates")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for sigma in result.config.noise_sigmas:
        factors = sorted({f for (s, _, f) in result.aggregates if s == sigma})
        if not factors:
            raise ValueError("nothing to plot for sigma=%g" % sigma)
        scales = sorted({j for (s, j, _) in result.aggregates if s == sigma})
        curves = []
        for f in factors:
            means = [
                result.aggregates.get((sigma, j, f), (None, None))[0] for j in scales
            ]
            stds = [
                result.aggregates.get((sigma, j, f), (None, 0.0))[1] for j in scales
            ]
            curves.append(("f=%d" % f, means, stds))
        svg = render_curves(
            scales,
            curves,
            result.baselines.get(sigma),
            "%s, sigma=%g" % (result.rows[0]["dataset"] if result.rows else "dataset", sigma),
        )
        path = os.path.join(out_dir, "relmse_sigma_%s.svg" % ("%g" % sigma))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(svg)
        paths.append(path)
    return paths

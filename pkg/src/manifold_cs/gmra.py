"""Multiscale piecewise-linear dictionary: build, query, validate, persist.

The dictionary is a tree of affine projectors over dyadic scales
j = 0 .. J.  Scale-j cells are Voronoi regions of a farthest-point-sampling
net at radius r_0 * 2^-j; each cell's projector is the least-squares plane
through its points (cell mean plus top principal directions).  Construction
details that matter for the invariants:

* One global FPS ordering is computed once; every scale's net is a prefix of
  it, so net seeds are nested across scales and pairwise separation at scale
  j exceeds r_0 * 2^-j by construction.
* A new seed is accepted at scale j only when its cell keeps at least
  min_points points; cells that can no longer refine carry their projector
  forward unchanged (the deepest available fit keeps serving that region),
  which keeps every query scale total and the per-scale counts monotone.
* Centers are cell means, not sample points, so the recorded separation
  constant is measured on the built centers rather than assumed.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import FileFormatError
from .geometry import farthest_point_ordering
from .storage import DICT_MAGIC, read_container, write_container

DICT_FORMAT_VERSION = 1

ORTHONORMALITY_TOL = 1e-10
IDEMPOTENCY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class AffineProjector:
    """Affine projection onto a d-dimensional plane: x -> B^T B (x - c) + c."""

    center: np.ndarray
    basis: np.ndarray  # d x D, orthonormal rows
    scale: int
    index: int
    local_dim: int
    origin_scale: int  # scale at which this fit was last refreshed

    def __post_init__(self):
        center = np.ascontiguousarray(self.center, dtype=np.float64)
        basis = np.ascontiguousarray(self.basis, dtype=np.float64)
        if basis.ndim != 2 or basis.shape[0] != self.local_dim or basis.shape[1] != center.shape[0]:
            raise ValueError("basis must be local_dim x D")
        center.setflags(write=False)
        basis.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "basis", basis)

    @property
    def ambient_dim(self):
        return self.center.shape[0]


def apply_projector(proj, x):
    """Evaluate the affine projection at x (a single D-vector)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != proj.center.shape:
        raise ValueError(
            "dimension mismatch: point has shape %s, projector lives in R^%d"
            % (x.shape, proj.ambient_dim)
        )
    rel = x - proj.center
    return proj.center + proj.basis.T @ (proj.basis @ rel)


def apply_projector_batch(proj, pts):
    """Evaluate the affine projection on an n x D block of points."""
    rel = pts - proj.center
    return proj.center + (rel @ proj.basis.T) @ proj.basis


class MultiscaleDictionary:
    """Tree of affine projectors across scales 0..J with parent links."""

    def __init__(self, scales, parent, sep_constant, root_radius, provenance):
        self.scales = scales
        self.parent = parent
        self.sep_constant = float(sep_constant)
        self.root_radius = float(root_radius)
        self.provenance = provenance
        self._center_cache = {}
        self._validate_shape()

    def _validate_shape(self):
        if not self.scales or not self.scales[0]:
            raise ValueError("dictionary needs at least one projector at scale 0")
        counts = [len(layer) for layer in self.scales]
        for j in range(len(counts) - 1):
            if counts[j] > counts[j + 1]:
                raise ValueError(
                    "per-scale counts must be nondecreasing, got K_%d=%d > K_%d=%d"
                    % (j, counts[j], j + 1, counts[j + 1])
                )
        if len(self.parent) != len(self.scales):
            raise ValueError("parent table must have one row per scale")
        if self.parent[0]:
            raise ValueError("scale 0 projectors are roots and take no parent")
        for j in range(1, len(self.scales)):
            row = self.parent[j]
            if len(row) != counts[j]:
                raise ValueError("parent row %d has %d entries, expected %d" % (j, len(row), counts[j]))
            for k, p in enumerate(row):
                if not (0 <= p < counts[j - 1]):
                    raise ValueError("parent of (%d,%d) out of range: %d" % (j, k, p))

    @property
    def max_scale(self):
        return len(self.scales) - 1

    @property
    def ambient_dim(self):
        return self.scales[0][0].ambient_dim

    def counts(self):
        return [len(layer) for layer in self.scales]

    def centers(self, j):
        """Stacked K_j x D matrix of scale-j centers (cached)."""
        if j not in self._center_cache:
            self._center_cache[j] = np.array([p.center for p in self.scales[j]])
        return self._center_cache[j]

    def local_dims(self, j):
        return [p.local_dim for p in self.scales[j]]

    def max_local_dim(self, j):
        return max(self.local_dims(j))


def _cell_fit(points, mode):
    """Mean and top right-singular-vector basis of a cell.

    mode is either ("fixed", d) or ("adaptive", energy_threshold, d_max).
    """
    mean = points.mean(axis=0)
    centered = points - mean
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    if mode[0] == "fixed":
        d = mode[1]
    else:
        _, threshold, d_max = mode
        energy = svals**2
        total = energy.sum()
        if total <= 0.0:
            d = 1
        else:
            frac = np.cumsum(energy) / total
            d = int(np.searchsorted(frac, threshold - 1e-12) + 1)
        d = min(d, d_max, points.shape[1])
    d = min(d, vt.shape[0])
    return mean, vt[:d], d


def _nearest_rows(pts, seeds, block=1024):
    """Index of each point's nearest seed row (ties to the lowest index)."""
    seed_sq = np.einsum("ij,ij->i", seeds, seeds)
    out = np.empty(pts.shape[0], dtype=np.intp)
    for lo in range(0, pts.shape[0], block):
        chunk = pts[lo : lo + block]
        d2 = seed_sq[None, :] - 2.0 * (chunk @ seeds.T)
        out[lo : lo + block] = np.argmin(d2, axis=1)
    return out


def build_dictionary(
    cloud,
    local_dim=None,
    max_scale=6,
    sep_constant_hint=1.0,
    energy_threshold=0.95,
    max_local_dim=None,
    min_points=None,
):
    """Build a multiscale dictionary over the cloud.

    local_dim fixes the plane dimension everywhere; pass None to pick it per
    cell as the smallest dimension holding at least energy_threshold of the
    cell's spectral energy, capped at max_local_dim.  min_points is the
    smallest cell allowed to refine (defaults to local_dim + 1, the least
    count that determines a d-plane).
    """
    if max_scale < 0:
        raise ValueError("max_scale must be >= 0")
    if local_dim is not None:
        if local_dim < 1:
            raise ValueError("local_dim must be >= 1")
        mode = ("fixed", int(local_dim))
        min_required = local_dim + 1
    else:
        if max_local_dim is None:
            raise ValueError("adaptive mode needs max_local_dim")
        mode = ("adaptive", float(energy_threshold), int(max_local_dim))
        min_required = 2
    if min_points is None:
        min_points = min_required
    min_points = max(int(min_points), min_required)
    pts = cloud.points
    n = pts.shape[0]
    if n < min_required:
        raise ValueError("cloud has %d points, need at least %d" % (n, min_required))

    order, radii = farthest_point_ordering(pts, stop_fraction=2.0 ** -(max_scale + 1))
    root_radius = float(radii[0])
    # net_len[j]: length of the FPS prefix whose covering radius is <= r_0 2^-j
    net_len = []
    for j in range(max_scale + 1):
        target = root_radius * 2.0**-j
        hit = np.nonzero(radii <= target)[0]
        net_len.append(int(hit[0]) + 1 if hit.size else len(order))

    seeds_idx = []  # accepted seeds, stable across scales (cell k <-> seeds_idx[k])
    scales = []
    parents = [[]]
    fresh_per_scale = []
    reused_per_scale = []
    copied_per_scale = []
    prev_pops = None

    for j in range(max_scale + 1):
        net = order[: net_len[j]]
        if j == 0:
            new_seeds = [int(net[0])]
        else:
            known = set(seeds_idx)
            candidates = [int(i) for i in net if int(i) not in known]
            if candidates:
                pool = np.concatenate([np.array(seeds_idx, dtype=np.intp), np.array(candidates, dtype=np.intp)])
                first = _nearest_rows(pts, pts[pool])
                first_pops = np.bincount(first, minlength=len(pool))
                new_seeds = [
                    candidates[i]
                    for i in range(len(candidates))
                    if first_pops[len(seeds_idx) + i] >= min_points
                ]
            else:
                new_seeds = []
        n_old = len(seeds_idx)
        seeds_idx.extend(new_seeds)
        seed_arr = pts[np.array(seeds_idx, dtype=np.intp)]
        assign_full = _nearest_rows(pts, seed_arr)
        pops = np.bincount(assign_full, minlength=len(seeds_idx))

        layer = []
        fresh = reused = copied = 0
        for k in range(len(seeds_idx)):
            prev = scales[j - 1][k] if k < n_old else None
            if prev is not None and pops[k] == prev_pops[k]:
                # cells only ever lose points to newly accepted seeds, so an
                # unchanged population means an unchanged cell: keep the fit
                layer.append(
                    AffineProjector(
                        prev.center, prev.basis, scale=j, index=k,
                        local_dim=prev.local_dim, origin_scale=prev.origin_scale,
                    )
                )
                reused += 1
            elif pops[k] >= min_points or (j == 0 and k == 0):
                cell = pts[assign_full == k]
                mean, basis, d = _cell_fit(cell, mode)
                layer.append(
                    AffineProjector(mean, basis, scale=j, index=k, local_dim=d, origin_scale=j)
                )
                fresh += 1
            else:
                # too few points left to refit: the coarser fit keeps serving
                layer.append(
                    AffineProjector(
                        prev.center, prev.basis, scale=j, index=k,
                        local_dim=prev.local_dim, origin_scale=prev.origin_scale,
                    )
                )
                copied += 1
        scales.append(layer)
        fresh_per_scale.append(fresh)
        reused_per_scale.append(reused)
        copied_per_scale.append(copied)
        prev_pops = pops
        if j >= 1:
            prev_centers = np.array([p.center for p in scales[j - 1]])
            parents.append(
                [int(np.argmin(np.linalg.norm(prev_centers - p.center, axis=1))) for p in layer]
            )

    sep = _observed_separation(scales)
    if sep is None:
        sep_constant = sep_constant_hint * root_radius
    else:
        sep_constant = min(sep_constant_hint * root_radius, sep * (1.0 - 1e-9))

    provenance = {
        "builder": "fps-voronoi-tree",
        "n": int(n),
        "ambient_dim": int(cloud.ambient_dim),
        "cloud_sha256": hashlib.sha256(pts.tobytes()).hexdigest(),
        "cloud_label": cloud.label,
        "local_dim": None if local_dim is None else int(local_dim),
        "energy_threshold": float(energy_threshold) if local_dim is None else None,
        "max_local_dim": None if max_local_dim is None else int(max_local_dim),
        "min_points": int(min_points),
        "max_scale": int(max_scale),
        "sep_constant_hint": float(sep_constant_hint),
        "fresh_per_scale": fresh_per_scale,
        "reused_per_scale": reused_per_scale,
        "copied_per_scale": copied_per_scale,
        "net_radius_per_scale": [root_radius * 2.0**-j for j in range(max_scale + 1)],
    }
    return MultiscaleDictionary(scales, parents, sep_constant, root_radius, provenance)


def _observed_separation(scales):
    """Smallest center separation normalized by 2^-j, over scales with >= 2 cells."""
    worst = None
    for j, layer in enumerate(scales):
        if len(layer) < 2:
            continue
        centers = np.array([p.center for p in layer])
        d2 = _pairwise_sq_dists(centers)
        m = float(np.sqrt(d2.min())) * 2.0**j
        worst = m if worst is None else min(worst, m)
    return worst


def _pairwise_sq_dists(centers):
    sq = np.einsum("ij,ij->i", centers, centers)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (centers @ centers.T)
    np.fill_diagonal(d2, np.inf)
    return np.maximum(d2, 0.0)


def nearest_center(dictionary, j, x):
    """Index of the scale-j center nearest to x; ties break to the lowest index."""
    if not (0 <= j <= dictionary.max_scale):
        raise ValueError("scale %d outside [0, %d]" % (j, dictionary.max_scale))
    x = np.asarray(x, dtype=np.float64)
    centers = dictionary.centers(j)
    if x.shape != (centers.shape[1],):
        raise ValueError("point has shape %s, centers live in R^%d" % (x.shape, centers.shape[1]))
    return int(np.argmin(np.linalg.norm(centers - x, axis=1)))


def nearest_center_batch(dictionary, j, pts):
    """Vectorized nearest_center over the rows of pts."""
    return _nearest_rows(np.asarray(pts, dtype=np.float64), dictionary.centers(j))


@dataclass
class StructureReport:
    """Recomputable audit of the dictionary invariants against a cloud."""

    counts: list
    k_monotone: bool
    separation_ok: bool
    separation_margin: float
    separation_worst_pair: tuple | None
    parent_total: bool
    parent_margin: float
    parent_worst: tuple | None
    orthonormal_ok: bool
    orthonormal_worst: float
    idempotent_ok: bool
    idempotent_worst: float
    tube_j0: int | None
    tube_margins: list
    mean_error_per_scale: list
    decay_slope: float
    decay_slope_ci: tuple
    monotone_refinement_ok: bool
    ctilde_factor16: float
    ctilde_factor8: float
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return (
            self.k_monotone
            and self.separation_ok
            and self.parent_total
            and self.orthonormal_ok
            and self.idempotent_ok
        )


def validate_structure(dictionary, cloud, probe_budget=200, rng_seed=0):
    """Exhaustively check the structural invariants and estimate the soft constants.

    Hard checks: nondecreasing per-scale counts, pairwise center separation
    against the recorded constant, parent totality with the strict
    nearest-parent inequality, orthonormal bases, idempotent projections.
    Soft quantities (reported, not gated): the tube scale j_0, per-scale mean
    approximation error with its fitted dyadic decay exponent, and the
    near-center error constants under both the 16x and 8x qualifying radii.
    """
    failures = []
    counts = dictionary.counts()
    k_monotone = all(counts[j] <= counts[j + 1] for j in range(len(counts) - 1))
    if not k_monotone:
        failures.append("per-scale counts decrease")

    sep_ok, sep_margin, sep_pair = _check_separation(dictionary)
    if not sep_ok:
        failures.append("separation violated at scale %d between centers %d and %d" % sep_pair)

    parent_total, parent_margin, parent_worst = _check_parents(dictionary)
    if not parent_total:
        failures.append("parent inequality violated at %s" % (parent_worst,))

    ortho_ok, ortho_worst = _check_orthonormal(dictionary)
    if not ortho_ok:
        failures.append("basis rows not orthonormal (worst %.3g)" % ortho_worst)

    idem_ok, idem_worst = _check_idempotent(dictionary, rng_seed)
    if not idem_ok:
        failures.append("projector not idempotent (worst %.3g)" % idem_worst)

    tube_j0, tube_margins = _estimate_tube_scale(dictionary, cloud)

    errors = mean_error_per_scale(dictionary, cloud)
    slope, ci = _fit_decay(errors)
    mono = all(
        errors[j + 1] <= errors[j] * 1.05 + 1e-15 for j in range(len(errors) - 1)
    )

    c16, c8 = _estimate_near_center_constants(dictionary, cloud, probe_budget, rng_seed)

    return StructureReport(
        counts=counts,
        k_monotone=k_monotone,
        separation_ok=sep_ok,
        separation_margin=sep_margin,
        separation_worst_pair=sep_pair,
        parent_total=parent_total,
        parent_margin=parent_margin,
        parent_worst=parent_worst,
        orthonormal_ok=ortho_ok,
        orthonormal_worst=ortho_worst,
        idempotent_ok=idem_ok,
        idempotent_worst=idem_worst,
        tube_j0=tube_j0,
        tube_margins=tube_margins,
        mean_error_per_scale=errors,
        decay_slope=slope,
        decay_slope_ci=ci,
        monotone_refinement_ok=mono,
        ctilde_factor16=c16,
        ctilde_factor8=c8,
        failures=failures,
    )


def _check_separation(dictionary):
    worst_margin = np.inf
    worst_pair = None
    ok = True
    c1 = dictionary.sep_constant
    for j in range(dictionary.max_scale + 1):
        centers = dictionary.centers(j)
        if centers.shape[0] < 2:
            continue
        d2 = _pairwise_sq_dists(centers)
        k1, k2 = np.unravel_index(np.argmin(d2), d2.shape)
        k1, k2 = int(k1), int(k2)
        min_dist = float(np.sqrt(d2[k1, k2]))
        margin = min_dist / (c1 * 2.0**-j) - 1.0
        if margin < worst_margin:
            worst_margin = margin
            worst_pair = (j, min(k1, k2), max(k1, k2))
        if min_dist <= c1 * 2.0**-j:
            ok = False
    if worst_pair is None:
        worst_margin = np.inf
    return ok, float(worst_margin), worst_pair


def _check_parents(dictionary):
    total = True
    worst_margin = np.inf
    worst = None
    for j in range(1, dictionary.max_scale + 1):
        prev = dictionary.centers(j - 1)
        row = dictionary.parent[j]
        for k, proj in enumerate(dictionary.scales[j]):
            dists = np.linalg.norm(prev - proj.center, axis=1)
            p = row[k]
            if prev.shape[0] == 1:
                margin = np.inf
            else:
                others = np.delete(dists, p)
                second = float(others.min())
                margin = (second - dists[p]) / second if second > 0 else -np.inf
            if margin < worst_margin:
                worst_margin = margin
                worst = (j, k)
            if dists[p] >= dists.min() + 1e-12 or margin < 0:
                total = False
    return total, float(worst_margin), worst


def _check_orthonormal(dictionary):
    worst = 0.0
    for layer in dictionary.scales:
        for proj in layer:
            gram = proj.basis @ proj.basis.T
            dev = float(np.max(np.abs(gram - np.eye(proj.local_dim))))
            worst = max(worst, dev)
    return worst < ORTHONORMALITY_TOL, worst


def _check_idempotent(dictionary, rng_seed, probes=100):
    rng = np.random.default_rng(rng_seed)
    dim = dictionary.ambient_dim
    pts = rng.standard_normal(size=(probes, dim)) * (1.0 + dictionary.root_radius)
    worst = 0.0
    for layer in dictionary.scales:
        for proj in layer:
            once = apply_projector_batch(proj, pts)
            twice = apply_projector_batch(proj, once)
            dev = np.linalg.norm(twice - once, axis=1) / (1.0 + np.linalg.norm(pts, axis=1))
            worst = max(worst, float(dev.max()))
    return worst < IDEMPOTENCY_TOL, worst


def _estimate_tube_scale(dictionary, cloud):
    """Smallest j0 such that all deeper scales keep centers inside the shrinking tube."""
    pts = cloud.points
    margins = []
    hold = []
    for j in range(dictionary.max_scale + 1):
        centers = dictionary.centers(j)
        dists = _min_dist_to_rows(centers, pts)
        allowed = dictionary.sep_constant * 2.0 ** (-j - 2)
        worst = float(dists.max())
        margins.append(allowed - worst)
        hold.append(worst < allowed)
    j0 = None
    for j in range(len(hold)):
        if all(hold[j:]):
            j0 = j
            break
    return j0, margins


def _min_dist_to_rows(a, b, block=4096):
    """For each row of a, the distance to the nearest row of b (blocked over b)."""
    a_sq = np.einsum("ij,ij->i", a, a)
    best = np.full(a.shape[0], np.inf)
    for lo in range(0, b.shape[0], block):
        chunk = b[lo : lo + block]
        b_sq = np.einsum("ij,ij->i", chunk, chunk)
        d2 = a_sq[:, None] + b_sq[None, :] - 2.0 * (a @ chunk.T)
        np.minimum(best, d2.min(axis=1), out=best)
    return np.sqrt(np.maximum(best, 0.0))


def mean_error_per_scale(dictionary, cloud):
    """Mean distance from each cloud point to its nearest-center projection, per scale."""
    pts = cloud.points
    errors = []
    for j in range(dictionary.max_scale + 1):
        assign = nearest_center_batch(dictionary, j, pts)
        err = np.empty(pts.shape[0])
        for k in np.unique(assign):
            sel = assign == k
            proj = apply_projector_batch(dictionary.scales[j][k], pts[sel])
            err[sel] = np.linalg.norm(pts[sel] - proj, axis=1)
        errors.append(float(err.mean()))
    return errors


def _fit_decay(errors, min_scale=1):
    """OLS slope of log2(error) against scale, with a 95 percent interval."""
    usable = [(j, e) for j, e in enumerate(errors) if e > 0 and j >= min_scale]
    if len(usable) < 2:
        return float("nan"), (float("nan"), float("nan"))
    xs = np.array([j for j, _ in usable], dtype=float)
    ys = np.log2([e for _, e in usable])
    fit = stats.linregress(xs, ys)
    if len(usable) > 2:
        half = stats.t.ppf(0.975, len(usable) - 2) * fit.stderr
    else:
        half = np.inf
    return float(fit.slope), (float(fit.slope - half), float(fit.slope + half))


def _estimate_near_center_constants(dictionary, cloud, budget, rng_seed):
    """Largest error-to-scale ratio over near-qualifying centers, at factors 16 and 8."""
    rng = np.random.default_rng(rng_seed)
    pts = cloud.points
    if pts.shape[0] > budget:
        pts = pts[rng.choice(pts.shape[0], size=budget, replace=False)]
    c16 = 0.0
    c8 = 0.0
    for j in range(dictionary.max_scale + 1):
        centers = dictionary.centers(j)
        floor = dictionary.sep_constant * 2.0 ** (-j - 1)
        for x in pts:
            dists = np.linalg.norm(centers - x, axis=1)
            base = max(float(dists.min()), floor)
            for k in np.nonzero(dists <= 16.0 * base)[0]:
                err = float(np.linalg.norm(x - apply_projector(dictionary.scales[j][k], x)))
                ratio = err * 2.0**j
                if dists[k] <= 8.0 * base:
                    c8 = max(c8, ratio)
                c16 = max(c16, ratio)
    return c16, c8


def save_dictionary(dictionary, path):
    """Write the dictionary as a manifest plus one little-endian float64 blob."""
    blob_parts = []
    offset = 0
    proj_meta = []
    for layer in dictionary.scales:
        for proj in layer:
            center_bytes = proj.center.astype("<f8").tobytes()
            proj_meta.append(
                {
                    "scale": proj.scale,
                    "index": proj.index,
                    "local_dim": proj.local_dim,
                    "origin_scale": proj.origin_scale,
                    "center_offset": offset,
                }
            )
            blob_parts.append(center_bytes)
            offset += len(center_bytes)
    for i, layer_proj in enumerate(p for layer in dictionary.scales for p in layer):
        basis_bytes = layer_proj.basis.astype("<f8").tobytes()
        proj_meta[i]["basis_offset"] = offset
        blob_parts.append(basis_bytes)
        offset += len(basis_bytes)
    manifest = {
        "version": DICT_FORMAT_VERSION,
        "ambient_dim": dictionary.ambient_dim,
        "max_scale": dictionary.max_scale,
        "counts": dictionary.counts(),
        "sep_constant": dictionary.sep_constant,
        "root_radius": dictionary.root_radius,
        "parent": dictionary.parent,
        "projectors": proj_meta,
        "provenance": dictionary.provenance,
    }
    write_container(path, DICT_MAGIC, manifest, b"".join(blob_parts))


def load_dictionary(path):
    """Read a dictionary container, rejecting structural violations at load time."""
    manifest, blob = read_container(path, DICT_MAGIC)
    if manifest.get("version") != DICT_FORMAT_VERSION:
        raise FileFormatError("unsupported dictionary version %r" % manifest.get("version"))
    dim = manifest["ambient_dim"]
    counts = manifest["counts"]
    max_scale = manifest["max_scale"]
    if len(counts) != max_scale + 1:
        raise FileFormatError("count table does not match max_scale")
    metas = manifest["projectors"]
    if len(metas) != sum(counts):
        raise FileFormatError("projector table does not match counts")
    scales = [[] for _ in range(max_scale + 1)]
    for meta in metas:
        d = meta["local_dim"]
        center = _read_floats(blob, meta["center_offset"], dim)
        basis = _read_floats(blob, meta["basis_offset"], d * dim).reshape(d, dim)
        proj = AffineProjector(
            center,
            basis,
            scale=meta["scale"],
            index=meta["index"],
            local_dim=d,
            origin_scale=meta["origin_scale"],
        )
        gram = basis @ basis.T
        if float(np.max(np.abs(gram - np.eye(d)))) >= ORTHONORMALITY_TOL:
            raise FileFormatError("non-orthonormal basis for projector (%d,%d)" % (proj.scale, proj.index))
        scales[meta["scale"]].append(proj)
    for j, layer in enumerate(scales):
        if len(layer) != counts[j]:
            raise FileFormatError("scale %d holds %d projectors, manifest says %d" % (j, len(layer), counts[j]))
        layer.sort(key=lambda p: p.index)
        if [p.index for p in layer] != list(range(len(layer))):
            raise FileFormatError("projector indices at scale %d are not 0..K-1" % j)
    try:
        return MultiscaleDictionary(
            scales,
            manifest["parent"],
            manifest["sep_constant"],
            manifest["root_radius"],
            manifest.get("provenance", {}),
        )
    except ValueError as exc:
        raise FileFormatError("invariant rejected at load time: %s" % exc) from exc


def _read_floats(blob, offset, count):
    end = offset + count * 8
    if end > len(blob):
        raise FileFormatError("truncated blob: need %d bytes, have %d" % (end, len(blob)))
    return np.frombuffer(blob[offset:end], dtype="<f8").astype(np.float64)

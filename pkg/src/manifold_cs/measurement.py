"""Random measurement matrices and empirical near-isometry certification.

Two ensembles are provided.  Gaussian matrices carry i.i.d. N(0, 1/m)
entries so that E||Mv||^2 = ||v||^2; Haar orthoprojections are the first m
rows of a Haar-random orthogonal matrix scaled by sqrt(D/m), which share the
same normalization.  Verification is empirical and exact on the probe sets
it is handed: pairwise distortion, restricted isometry by support
enumeration, and the item-by-item assumption checks used by the recovery
guarantees.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import FileFormatError, ResourceLimitError
from .geometry import epsilon_net_ball
from .gmra import apply_projector_batch
from .storage import MATRIX_MAGIC, read_container, write_container

MATRIX_FORMAT_VERSION = 1
ORTHO_ROW_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """m x D measurement matrix with its generating recipe."""

    entries: np.ndarray
    ensemble: str
    seed: int
    target_epsilon: float

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] < 1 or entries.shape[1] < 1:
            raise ValueError("entries must be a nonempty m x D matrix")
        if not np.all(np.isfinite(entries)):
            raise ValueError("matrix contains non-finite entries")
        if self.ensemble not in ("gaussian", "haar-orthoprojection"):
            raise ValueError("unknown ensemble %r" % self.ensemble)
        if self.ensemble == "haar-orthoprojection":
            m, dim = entries.shape
            gram = entries @ entries.T
            if np.max(np.abs(gram - (dim / m) * np.eye(m))) > ORTHO_ROW_TOL * max(1.0, dim / m):
                raise ValueError("haar-orthoprojection rows must be orthogonal with norm sqrt(D/m)")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def m(self):
        return self.entries.shape[0]

    @property
    def ambient_dim(self):
        return self.entries.shape[1]

    def apply(self, vectors):
        """Compress one D-vector or a block of row vectors."""
        return np.asarray(vectors, dtype=np.float64) @ self.entries.T


def gaussian_matrix(m, dim, seed, target_epsilon=0.3):
    """i.i.d. N(0, 1/m) entries; E||Mv||^2 = ||v||^2."""
    if m < 1 or dim < 1:
        raise ValueError("matrix dimensions must be positive, got %d x %d" % (m, dim))
    rng = np.random.default_rng(seed)
    entries = rng.standard_normal(size=(m, dim)) / np.sqrt(m)
    return MeasurementMatrix(entries, "gaussian", int(seed), float(target_epsilon))


def orthoprojection_matrix(m, dim, seed, target_epsilon=0.3):
    """First m rows of a Haar-random orthogonal matrix, scaled by sqrt(D/m)."""
    if m < 1 or dim < 1:
        raise ValueError("matrix dimensions must be positive, got %d x %d" % (m, dim))
    if m > dim:
        raise ValueError("orthoprojection needs m <= D, got m=%d > D=%d" % (m, dim))
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diag(r))  # sign fix makes the distribution exactly Haar
    entries = q[:m] * np.sqrt(dim / m)
    return MeasurementMatrix(entries, "haar-orthoprojection", int(seed), float(target_epsilon))


@dataclass
class DistortionReport:
    """Worst-case pairwise distortion of a matrix over a finite probe set."""

    max_distortion: float
    worst_pair: tuple
    epsilon: float
    passed: bool
    pairs_checked: int
    pairs_skipped: int


def verify_distortion(matrix, probes, eps):
    """Exact max over probe pairs of | ||Mu-Mv||^2 / ||u-v||^2 - 1 |.

    Coincident pairs are skipped; if every pair is coincident the check is
    undefined and an error is raised.  Distances are computed by direct
    subtraction (not Gram expansion) so near-coincident pairs keep full
    relative accuracy.
    """
    probes = np.asarray(probes, dtype=np.float64)
    if probes.ndim != 2 or probes.shape[0] < 2:
        raise ValueError("need at least two probe vectors")
    if probes.shape[1] != matrix.ambient_dim:
        raise ValueError(
            "probe dimension %d does not match matrix D=%d" % (probes.shape[1], matrix.ambient_dim)
        )
    d2 = pdist(probes, metric="sqeuclidean")
    md2 = pdist(matrix.apply(probes), metric="sqeuclidean")
    alive = d2 > 0.0
    if not np.any(alive):
        raise ValueError("all probes coincide; distortion is undefined")
    ratios = np.where(alive, np.abs(md2 / np.where(alive, d2, 1.0) - 1.0), -np.inf)
    worst_flat = int(np.argmax(ratios))
    max_distortion = float(ratios[worst_flat])
    worst_pair = _condensed_to_pair(worst_flat, probes.shape[0])
    return DistortionReport(
        max_distortion=max_distortion,
        worst_pair=worst_pair,
        epsilon=float(eps),
        passed=bool(max_distortion <= eps),
        pairs_checked=int(alive.sum()),
        pairs_skipped=int((~alive).sum()),
    )


def _condensed_to_pair(k, n):
    """Map a condensed pdist index back to its (i, j) pair, i < j."""
    i = 0
    row = n - 1
    while k >= row:
        k -= row
        i += 1
        row -= 1
    return (i, i + 1 + k)


@dataclass
class RipReport:
    """Restricted isometry audit over every size-d coordinate support."""

    passed: bool
    sparsity: int
    epsilon: float
    worst_support: tuple
    worst_deviation: float
    min_sq_singular: float
    max_sq_singular: float


def rip_check_bruteforce(matrix, sparsity, eps):
    """Enumerate all C(D, d) supports and bound the squared singular values.

    Passes iff every m x d column submatrix has all squared singular values
    inside [1-eps, 1+eps].  Refuses supports counts above 10^6.
    """
    dim = matrix.ambient_dim
    if not (1 <= sparsity <= dim):
        raise ValueError("sparsity must lie in [1, D]")
    n_supports = math.comb(dim, sparsity)
    if n_supports > 10**6:
        raise ResourceLimitError(
            "C(%d, %d) = %d supports exceeds the 1e6 budget" % (dim, sparsity, n_supports)
        )
    worst_support = None
    worst_dev = -1.0
    global_min = np.inf
    global_max = -np.inf
    passed = True
    for support in itertools.combinations(range(dim), sparsity):
        sub = matrix.entries[:, support]
        svals = np.linalg.svd(sub, compute_uv=False)
        lo = float(svals[-1] ** 2)
        hi = float(svals[0] ** 2)
        dev = max(abs(hi - 1.0), abs(lo - 1.0))
        global_min = min(global_min, lo)
        global_max = max(global_max, hi)
        if dev > worst_dev:
            worst_dev = dev
            worst_support = support
        if lo < 1.0 - eps or hi > 1.0 + eps:
            passed = False
    return RipReport(
        passed=passed,
        sparsity=sparsity,
        epsilon=float(eps),
        worst_support=tuple(int(i) for i in worst_support),
        worst_deviation=float(worst_dev),
        min_sq_singular=float(global_min),
        max_sq_singular=float(global_max),
    )


def e_m_bound(y, eps, sparsity):
    """Closed-form compression bound sqrt(1+eps) * (||y||_2 + ||y||_1 / sqrt(d)).

    Dominates ||My|| whenever M satisfies the restricted isometry property at
    sparsity d and level eps.  eps = 0 is accepted as the isometric limit.
    """
    if sparsity < 1:
        raise ValueError("sparsity must be >= 1")
    if not (0 <= eps < 0.5):
        raise ValueError("eps must lie in [0, 1/2)")
    y = np.asarray(y, dtype=np.float64)
    return float(
        np.sqrt(1.0 + eps)
        * (np.linalg.norm(y) + np.linalg.norm(y, ord=1) / np.sqrt(sparsity))
    )


@dataclass
class ItemCheck:
    name: str
    passed: bool
    margin: float
    detail: str


@dataclass
class AssumptionReport:
    which: int
    epsilon: float
    items: list

    @property
    def passed(self):
        return all(item.passed for item in self.items)

    def item(self, name):
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)


def assumption_set_vectors(dictionary, x):
    """The finite set whose embedding fidelity the nonuniform guarantee needs.

    For a fixed query x this is every in-plane component B^T B (x - c), every
    offset x - c, and the zero vector, across all scales and cells.
    """
    x = np.asarray(x, dtype=np.float64)
    rows = [np.zeros((1, dictionary.ambient_dim))]
    for j in range(dictionary.max_scale + 1):
        offsets = x[None, :] - dictionary.centers(j)
        rows.append(offsets)
        proj_parts = np.empty_like(offsets)
        for k, proj in enumerate(dictionary.scales[j]):
            proj_parts[k] = proj.basis.T @ (proj.basis @ offsets[k])
        rows.append(proj_parts)
    return np.vstack(rows)


def verify_assumption_set(
    matrix,
    dictionary,
    x=None,
    which=1,
    eps=0.3,
    cloud=None,
    budget=2000,
    rng_seed=0,
):
    """Empirically check one of the two measurement assumption sets.

    which=1 (nonuniform, per-query): (a) pairwise distortion on the finite
    query-dependent vector set, (b) subspace isometry on every projector's
    plane probed through a ball net.  Requires x.

    which=2 (uniform, stability): (a) pairwise distortion on sampled manifold
    points plus all centers, (b) domination of ||My|| by the closed-form
    compression bound on random probes, (c) subspace isometry as above,
    (d) the projector-residual embedding inequality with additive 2^-J slack
    on sampled manifold points.  Requires cloud samples from the manifold;
    samples beyond the budget are subsampled.  This is a sampled audit, not a
    proof: set-membership is checked on finitely many probes.
    """
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    rng = np.random.default_rng(rng_seed)
    items = []
    if which == 1:
        if x is None:
            raise ValueError("assumption set 1 is query-dependent: x is required")
        vectors = assumption_set_vectors(dictionary, x)
        report = verify_distortion(matrix, vectors, eps)
        items.append(
            ItemCheck(
                "a-distortion-query-set",
                report.passed,
                eps - report.max_distortion,
                "max pairwise distortion %.4g over %d pairs" % (report.max_distortion, report.pairs_checked),
            )
        )
        items.append(_subspace_item(matrix, dictionary, eps))
        return AssumptionReport(1, float(eps), items)

    if cloud is None:
        raise ValueError("assumption set 2 needs manifold samples: pass cloud")
    pts = cloud.points
    if pts.shape[0] > budget:
        pts = pts[rng.choice(pts.shape[0], size=budget, replace=False)]
    all_centers = np.vstack([dictionary.centers(j) for j in range(dictionary.max_scale + 1)])
    probes = np.vstack([pts, all_centers])
    report = verify_distortion(matrix, probes, eps)
    items.append(
        ItemCheck(
            "a-distortion-manifold-and-centers",
            report.passed,
            eps - report.max_distortion,
            "max pairwise distortion %.4g over %d pairs (sampled)" % (report.max_distortion, report.pairs_checked),
        )
    )

    sparsity = max(dictionary.max_local_dim(j) for j in range(dictionary.max_scale + 1))
    rand = rng.standard_normal(size=(1000, dictionary.ambient_dim))
    norms_m = np.linalg.norm(matrix.apply(rand), axis=1)
    bounds = np.array([e_m_bound(y, eps, sparsity) for y in rand])
    margin_b = float((bounds - norms_m).min())
    items.append(
        ItemCheck(
            "b-compression-bound-domination",
            margin_b >= 0.0,
            margin_b,
            "min slack of the closed-form bound over 1000 random probes",
        )
    )

    items.append(_subspace_item(matrix, dictionary, eps))

    slack = 2.0 ** -dictionary.max_scale
    margin_d = np.inf
    for j in range(dictionary.max_scale + 1):
        for proj in dictionary.scales[j]:
            projected = apply_projector_batch(proj, pts)
            resid = np.linalg.norm(pts - projected, axis=1)
            m_resid = np.linalg.norm(matrix.apply(pts) - matrix.apply(projected), axis=1)
            upper = (1.0 + eps) * resid + slack
            lower = (1.0 - eps) * resid - slack
            margin_d = min(margin_d, float((upper - m_resid).min()), float((m_resid - lower).min()))
    items.append(
        ItemCheck(
            "d-residual-embedding",
            margin_d >= 0.0,
            margin_d,
            "min slack of the residual inequality with additive 2^-J, sampled points",
        )
    )
    return AssumptionReport(2, float(eps), items)


def _subspace_item(matrix, dictionary, eps):
    """Isometry of M on each projector plane, probed through a ball net."""
    nets = {}
    worst = np.inf
    worst_at = None
    for j in range(dictionary.max_scale + 1):
        for proj in dictionary.scales[j]:
            d = proj.local_dim
            if d not in nets:
                nets[d] = epsilon_net_ball(d, eps)
            net = nets[d]
            images = (net @ proj.basis) @ matrix.entries.T
            norms_in = np.linalg.norm(net, axis=1)
            norms_out = np.linalg.norm(images, axis=1)
            margin = np.minimum(
                norms_out - (1.0 - eps) * norms_in,
                (1.0 + eps) * norms_in - norms_out,
            ).min()
            if margin < worst:
                worst = float(margin)
                worst_at = (j, proj.index)
    return ItemCheck(
        "c-subspace-isometry",
        worst >= 0.0,
        float(worst),
        "min two-sided slack over ball-net probes, worst at cell %s" % (worst_at,),
    )


def save_matrix(matrix, path):
    """Write the matrix with the shared manifest-plus-blob container."""
    blob = matrix.entries.astype("<f8").tobytes()
    manifest = {
        "version": MATRIX_FORMAT_VERSION,
        "m": matrix.m,
        "ambient_dim": matrix.ambient_dim,
        "ensemble": matrix.ensemble,
        "seed": matrix.seed,
        "target_epsilon": matrix.target_epsilon,
        "entries_offset": 0,
    }
    write_container(path, MATRIX_MAGIC, manifest, blob)


def load_matrix(path):
    manifest, blob = read_container(path, MATRIX_MAGIC)
    if manifest.get("version") != MATRIX_FORMAT_VERSION:
        raise FileFormatError("unsupported matrix version %r" % manifest.get("version"))
    m, dim = manifest["m"], manifest["ambient_dim"]
    need = manifest["entries_offset"] + m * dim * 8
    if need > len(blob):
        raise FileFormatError("truncated blob: need %d bytes, have %d" % (need, len(blob)))
    entries = np.frombuffer(
        blob[manifest["entries_offset"] : need], dtype="<f8"
    ).astype(np.float64).reshape(m, dim)
    return MeasurementMatrix(
        entries, manifest["ensemble"], manifest["seed"], manifest["target_epsilon"]
    )

"""Point-cloud generation, noise injection, covering nets, and CSV ingestion.

Synthetic manifolds used throughout:

* swiss roll: (t*cos(t), h, t*sin(t)) with t uniform on [3*pi/2, 9*pi/2] and
  h uniform on [0, 21].  A 2-dimensional surface in R^3 with computable
  extent, so covering and decay behaviour can be checked analytically.
* unit d-sphere in R^(d+1), sampled by normalizing i.i.d. Gaussians
  (exactly uniform in any dimension).
"""

from dataclasses import dataclass

import numpy as np

from .errors import CsvParseError, ResourceLimitError

SWISS_ROLL_T_MIN = 3.0 * np.pi / 2.0
SWISS_ROLL_T_MAX = 9.0 * np.pi / 2.0
SWISS_ROLL_HEIGHT = 21.0

# Candidate budget for the rejection-sampled ball nets (dim >= 3).
_NET_CANDIDATE_CAP = 400_000
_NET_SAMPLING_SEED = 0x5EED


@dataclass(frozen=True, eq=False)
class PointCloud:
    """n points in R^D, immutable after construction."""

    points: np.ndarray
    ambient_dim: int
    label: str | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-d array, got shape %s" % (pts.shape,))
        n, dim = pts.shape
        if n < 1 or dim < 1:
            raise ValueError("point cloud needs n >= 1 and D >= 1, got %dx%d" % (n, dim))
        if dim != self.ambient_dim:
            raise ValueError("ambient_dim %d does not match point width %d" % (self.ambient_dim, dim))
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite entries")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class CoverResult:
    """Indices of selected cover centers and the cover radius delta."""

    center_indices: list[int]
    radius: float


def gen_swiss_roll(n, seed):
    """Sample n points uniformly in parameter space of the swiss roll surface."""
    if n < 1:
        raise ValueError("n must be >= 1, got %d" % n)
    rng = np.random.default_rng(seed)
    t = rng.uniform(SWISS_ROLL_T_MIN, SWISS_ROLL_T_MAX, size=n)
    h = rng.uniform(0.0, SWISS_ROLL_HEIGHT, size=n)
    pts = np.stack([t * np.cos(t), h, t * np.sin(t)], axis=1)
    return PointCloud(pts, 3, label="swiss-roll")


def swiss_roll_point(t, h):
    """Map swiss roll parameters (t, h) to a point in R^3."""
    return np.array([t * np.cos(t), h, t * np.sin(t)])


def gen_sphere(n, d, seed):
    """Sample n points uniformly on the unit d-sphere in R^(d+1)."""
    if n < 1:
        raise ValueError("n must be >= 1, got %d" % n)
    if d < 1:
        raise ValueError("intrinsic dimension d must be >= 1, got %d" % d)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(size=(n, d + 1))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # Resample the (measure-zero) rows that landed numerically at the origin.
    while np.any(norms < 1e-12):
        bad = norms[:, 0] < 1e-12
        g[bad] = rng.standard_normal(size=(int(bad.sum()), d + 1))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
    return PointCloud(g / norms, d + 1, label="sphere-%d" % d)


def add_noise(cloud, sigma, seed):
    """Perturb each point independently by N(0, sigma^2/D * I_D) noise.

    Per-point streams are split off the master seed with the counter scheme
    SeedSequence(seed, spawn_key=(i,)) for point i, so any subset of points
    can be regenerated independently (and in parallel) without drawing the
    rest.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0, got %g" % sigma)
    if sigma == 0:
        return PointCloud(cloud.points.copy(), cloud.ambient_dim, cloud.label)
    dim = cloud.ambient_dim
    scale = sigma / np.sqrt(dim)
    noise = np.empty_like(cloud.points)
    for i in range(cloud.n):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        noise[i] = rng.standard_normal(dim)
    return PointCloud(cloud.points + scale * noise, dim, cloud.label)


def greedy_delta_cover(cloud, delta):
    """Farthest-point-sampling cover of the cloud at radius delta.

    Starts from index 0 and keeps adding the point farthest from the chosen
    set while that distance exceeds delta.  The result is simultaneously a
    delta-cover (every point within delta of a center) and a delta-packing
    (centers pairwise more than delta apart).
    """
    if delta <= 0:
        raise ValueError("delta must be positive, got %g" % delta)
    pts = cloud.points
    order, dist = farthest_point_ordering(pts, stop_radius=delta)
    del dist
    return CoverResult(center_indices=[int(i) for i in order], radius=float(delta))


def farthest_point_ordering(pts, stop_radius=0.0, stop_fraction=None, max_count=None):
    """Greedy farthest-point ordering of the rows of pts, seeded at row 0.

    Stops once every point is within stop_radius of the selected prefix (or
    max_count points were selected).  stop_fraction, when given, is applied
    relative to the first covering radius (the max distance from row 0).
    Returns (indices, covered_radius) where covered_radius[k] is the max
    distance of any point to the first k+1 selections; every prefix of the
    ordering is a net at its covered radius.
    """
    n = pts.shape[0]
    if n == 0:
        raise ValueError("empty cloud")
    if max_count is None:
        max_count = n
    order = [0]
    dist = np.linalg.norm(pts - pts[0], axis=1)
    radii = [float(dist.max())]
    if stop_fraction is not None:
        stop_radius = max(stop_radius, radii[0] * stop_fraction)
    while radii[-1] > stop_radius and len(order) < max_count:
        nxt = int(np.argmax(dist))
        order.append(nxt)
        np.minimum(dist, np.linalg.norm(pts - pts[nxt], axis=1), out=dist)
        radii.append(float(dist.max()))
    return np.array(order, dtype=np.intp), np.array(radii)


def epsilon_net_ball(dim, eps):
    """An (eps/4)-net of the unit ball in R^dim, plus the zero vector.

    The net radius eps/4 matches the covering argument behind the subspace
    isometry checks; the zero vector is always the first row.  A fine grid is
    used for dim <= 2 (deterministic coverage guarantee); higher dimensions
    fall back to rejection sampling of candidates inside the ball, which
    covers up to sampling density.  Refuses inputs whose projected net size
    (12/eps)^dim exceeds 10^7.
    """
    if not (0 < eps < 0.5):
        raise ValueError("eps must lie in (0, 1/2), got %g" % eps)
    if dim < 1:
        raise ValueError("dim must be >= 1, got %d" % dim)
    projected = (12.0 / eps) ** dim
    if projected > 1e7:
        raise ResourceLimitError(
            "projected net size (12/eps)^dim = %.3g exceeds the 1e7 budget" % projected
        )
    radius = eps / 4.0
    pack = 0.75 * radius
    if dim <= 2:
        # Grid spacing such that any ball point is within radius/4 of a
        # candidate after projecting outside candidates back onto the ball.
        h = radius / (2.0 * np.sqrt(dim))
        axis = np.arange(-1.0, 1.0 + h, h)
        grid = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
        norms = np.linalg.norm(grid, axis=1)
        keep = norms <= 1.0 + radius / 4.0
        cand = grid[keep]
        norms = norms[keep]
        outside = norms > 1.0
        cand[outside] /= norms[outside, None]
    else:
        rng = np.random.default_rng(_NET_SAMPLING_SEED)
        want = int(min(_NET_CANDIDATE_CAP, max(10_000, 200 * projected)))
        g = rng.standard_normal(size=(want, dim))
        r = rng.uniform(size=want) ** (1.0 / dim)
        cand = g / np.linalg.norm(g, axis=1, keepdims=True) * r[:, None]
    # Greedy packing at 3/4 of the net radius: kept points cover all
    # candidates within pack, and candidates cover the ball within radius/4,
    # so the kept set is a net at the full radius.  Row 0 is the zero vector
    # and is always kept (FPS is seeded there).
    stacked = np.vstack([np.zeros((1, dim)), cand])
    order, _ = farthest_point_ordering(stacked, stop_radius=pack)
    return stacked[order]


def save_csv(cloud, path):
    """Write the cloud as comma-separated rows with 17 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in cloud.points:
            fh.write(",".join("%.17g" % v for v in row))
            fh.write("\n")


def load_csv(path, label=None):
    """Read a point cloud from CSV; a single non-numeric header row is allowed."""
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            try:
                values = [float(f) for f in fields]
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise CsvParseError("non-numeric value at row %d" % lineno, row=lineno)
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise CsvParseError(
                    "ragged row %d: expected %d columns, got %d" % (lineno, width, len(values)),
                    row=lineno,
                )
            rows.append(values)
    if not rows:
        raise CsvParseError("no data rows in %s" % path)
    return PointCloud(np.array(rows, dtype=np.float64), width, label=label)

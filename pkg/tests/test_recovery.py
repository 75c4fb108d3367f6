import numpy as np
import pytest

from manifold_cs import geometry, gmra, measurement, recovery


def test_least_squares_overdetermined():
    a = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    b = np.array([3.0, 4.0, 9.0])
    assert np.allclose(recovery.least_squares(a, b), [3.0, 4.0])


def test_least_squares_zero_rhs():
    a = np.random.default_rng(0).standard_normal((5, 3))
    assert np.array_equal(recovery.least_squares(a, np.zeros(5)), np.zeros(3))


def test_least_squares_duplicate_columns_min_norm():
    a = np.array([[1.0, 1.0], [1.0, 1.0]])
    b = np.array([2.0, 2.0])
    u = recovery.least_squares(a, b)
    assert np.allclose(u, [1.0, 1.0])
    # grid oracle: no grid point achieves a smaller residual, and among the
    # near-minimal ones none has smaller norm than the returned solution
    grid = np.linspace(-3, 3, 121)
    uu, vv = np.meshgrid(grid, grid)
    res = np.hypot(uu + vv - 2.0, uu + vv - 2.0)
    best = res.min()
    assert np.linalg.norm(a @ u - b) <= best + 1e-6
    near = res <= best + 1e-9
    norms = np.hypot(uu, vv)
    assert np.linalg.norm(u) <= norms[near].min() + 1e-9


def test_recover_center_fixed_point(circle_dict):
    M = measurement.gaussian_matrix(4, 2, seed=5)
    c = circle_dict.scales[3][2].center
    out = recovery.recover(M.apply(c), M, circle_dict, 3)
    assert out.chosen_center == 2
    assert np.array_equal(out.reconstruction, c)
    assert np.array_equal(out.coefficients, np.zeros_like(out.coefficients))


def test_recover_exact_on_plane(swiss_dict):
    rng = np.random.default_rng(3)
    M = measurement.gaussian_matrix(8, 3, seed=17)
    j = 3
    sep = swiss_dict.sep_constant * 2.0**-j
    for case in range(50):
        k = int(rng.integers(len(swiss_dict.scales[j])))
        proj = swiss_dict.scales[j][k]
        u = rng.standard_normal(proj.local_dim)
        u *= 0.02 * sep / np.linalg.norm(u)
        x = proj.center + proj.basis.T @ u
        out = recovery.recover(M.apply(x), M, swiss_dict, j)
        assert out.chosen_center == k
        assert np.linalg.norm(out.reconstruction - x) <= 1e-8 * np.linalg.norm(x)
        assert not out.ill_conditioned


def test_recover_full_rank_matches_uncompressed(swiss_cloud, swiss_dict):
    M = measurement.orthoprojection_matrix(3, 3, seed=23)
    comp = M.apply(swiss_cloud.points)
    for j in (0, 2, 4):
        batch = recovery.recover_batch(comp[:200], M, swiss_dict, j)
        for i in range(200):
            x = swiss_cloud.points[i]
            k = gmra.nearest_center(swiss_dict, j, x)
            px = gmra.apply_projector(swiss_dict.scales[j][k], x)
            assert batch.chosen_centers[i] == k
            assert np.linalg.norm(batch.reconstructions[i] - px) <= 1e-10


def test_recover_batch_matches_single(swiss_cloud, swiss_dict):
    M = measurement.gaussian_matrix(10, 3, seed=29)
    comp = M.apply(swiss_cloud.points[:50])
    batch = recovery.recover_batch(comp, M, swiss_dict, 2)
    for i in range(50):
        single = recovery.recover(comp[i], M, swiss_dict, 2)
        assert single.chosen_center == batch.chosen_centers[i]
        assert np.allclose(single.reconstruction, batch.reconstructions[i], atol=1e-12)
        assert single.compressed_residual == pytest.approx(batch.residuals[i], abs=1e-12)


def test_recover_dimension_mismatch(circle_dict):
    M = measurement.gaussian_matrix(4, 2, seed=5)
    with pytest.raises(ValueError):
        recovery.recover(np.zeros(5), M, circle_dict, 1)
    with pytest.raises(ValueError):
        recovery.recover(np.zeros(4), M, circle_dict, 99)


def test_recover_flags_rank_deficiency(swiss_dict):
    # one measurement row cannot determine two plane coefficients
    M = measurement.gaussian_matrix(1, 3, seed=7)
    out = recovery.recover(np.zeros(1), M, swiss_dict, 2)
    assert out.ill_conditioned


def test_recover_auto_scale_reports_fresh_fit():
    rng = np.random.default_rng(5)
    pts = rng.standard_normal((4, 3)) * 0.1
    cloud = geometry.PointCloud(pts, 3)
    d = gmra.build_dictionary(cloud, local_dim=2, max_scale=3)
    M = measurement.orthoprojection_matrix(3, 3, seed=1)
    out = recovery.recover(M.apply(pts[0]), M, d, "auto")
    # every scale past 0 is a stalled copy for this tiny cloud
    assert out.chosen_scale == d.scales[d.max_scale][out.chosen_center].origin_scale


def test_scale_invariance_of_center_choice(swiss_cloud):
    d1 = gmra.build_dictionary(swiss_cloud, local_dim=2, max_scale=4)
    scaled = geometry.PointCloud(swiss_cloud.points * 3.0, 3)
    d3 = gmra.build_dictionary(scaled, local_dim=2, max_scale=4)
    assert d1.counts() == d3.counts()
    M = measurement.gaussian_matrix(6, 3, seed=31)
    rng = np.random.default_rng(9)
    for _ in range(20):
        x = swiss_cloud.points[int(rng.integers(swiss_cloud.n))] + rng.standard_normal(3) * 0.1
        a = recovery.recover(M.apply(x), M, d1, 3)
        b = recovery.recover(M.apply(3.0 * x), M, d3, 3)
        assert a.chosen_center == b.chosen_center


def test_least_squares_local_minimality(swiss_dict):
    rng = np.random.default_rng(11)
    M = measurement.gaussian_matrix(8, 3, seed=37)
    j = 2
    for _ in range(100):
        x = rng.standard_normal(3) * 5.0
        out = recovery.recover(M.apply(x), M, swiss_dict, j)
        proj = swiss_dict.scales[j][out.chosen_center]
        a_sub = M.entries @ proj.basis.T
        rhs = M.apply(x) - M.apply(proj.center)
        base = np.linalg.norm(a_sub @ out.coefficients - rhs)
        for i in range(proj.local_dim):
            for step in (1e-4, -1e-4):
                u = out.coefficients.copy()
                u[i] += step
                assert np.linalg.norm(a_sub @ u - rhs) >= base - 1e-12


def test_certify_isometric_case(swiss_cloud, swiss_dict):
    M = measurement.orthoprojection_matrix(3, 3, seed=41)
    x = swiss_cloud.points[5]
    out = recovery.recover(M.apply(x), M, swiss_dict, 3)
    cert = recovery.certify(x, M, swiss_dict, out, eps=0.01)
    # the chosen center is the true nearest center, so the ratio is exactly 1
    assert cert.line3_lhs <= cert.line3_rhs
    assert cert.line4_lhs <= 1e-10
    assert cert.line3_holds and cert.line4_holds


def test_certify_monte_carlo_circle(circle_cloud, circle_dict):
    eps = 0.3
    M = measurement.gaussian_matrix(715, 2, seed=3)
    rng = np.random.default_rng(13)
    angles = rng.uniform(0, 2 * np.pi, size=100)
    probes = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    for x in probes:
        out = recovery.recover(M.apply(x), M, circle_dict, 3)
        cert = recovery.certify(x, M, circle_dict, out, eps=eps)
        assert cert.line3_holds
        assert cert.line4_holds


def test_certify_with_oracle_point(circle_cloud, circle_dict):
    M = measurement.gaussian_matrix(200, 2, seed=19)
    x = np.array([1.05, 0.02])
    x_opt = recovery.nearest_point_oracle(x, "sphere")
    out = recovery.recover(M.apply(x), M, circle_dict, 4)
    cert = recovery.certify(x, M, circle_dict, out, eps=0.3, x_opt=x_opt, tube_delta=0.1)
    assert cert.optimal_error_bound == pytest.approx(100.3 * np.linalg.norm(x - x_opt))
    assert cert.optimal_error_excess is not None
    assert cert.line3_set2_rhs >= cert.line3_rhs
    assert cert.tube_lhs is not None and cert.tube_rhs >= 0.1
    with pytest.raises(ValueError):
        recovery.certify(x, M, circle_dict, out, eps=0.7)


def test_optimal_error_excess_negative_at_fine_scales(circle_dict):
    # off-circle probes with the radial oracle: the 100.3x comparison leaves
    # plenty of room at fine scales, so the reported excess is negative
    M = measurement.gaussian_matrix(200, 2, seed=47)
    rng = np.random.default_rng(17)
    for _ in range(50):
        ang = rng.uniform(0, 2 * np.pi)
        radius = 1.0 + rng.uniform(0.02, 0.3) * rng.choice([-1.0, 1.0])
        x = radius * np.array([np.cos(ang), np.sin(ang)])
        x_opt = recovery.nearest_point_oracle(x, "sphere")
        out = recovery.recover(M.apply(x), M, circle_dict, 5)
        cert = recovery.certify(x, M, circle_dict, out, eps=0.3, x_opt=x_opt)
        assert cert.optimal_error_excess < 0


def test_reconstruction_assembles_from_parts(circle_dict):
    M = measurement.gaussian_matrix(6, 2, seed=43)
    x = np.array([0.4, 0.9])
    out = recovery.recover(M.apply(x), M, circle_dict, 4)
    proj = circle_dict.scales[4][out.chosen_center]
    manual = proj.basis.T @ out.coefficients + proj.center
    assert np.linalg.norm(manual - out.reconstruction) <= 1e-12


def test_sphere_oracle():
    x = np.zeros(6)
    x[0] = 2.0
    out = recovery.nearest_point_oracle(x, "sphere")
    want = np.zeros(6)
    want[0] = 1.0
    assert np.array_equal(out, want)
    padded = recovery.nearest_point_oracle(np.array([0.0, 3.0, 0.0, 4.0, 9.9]), "sphere", intrinsic_dim=3)
    assert np.allclose(padded, [0.0, 0.6, 0.0, 0.8, 0.0])
    with pytest.raises(ValueError):
        recovery.nearest_point_oracle(np.zeros(4), "sphere")


def test_dense_cloud_oracle_orders():
    rng = np.random.default_rng(21)
    pts = rng.standard_normal((300, 4))
    cloud = geometry.PointCloud(pts, 4)
    shuffled = geometry.PointCloud(pts[rng.permutation(300)], 4)
    for _ in range(20):
        x = rng.standard_normal(4)
        a = recovery.nearest_point_oracle(x, cloud)
        b = recovery.nearest_point_oracle(x, shuffled)
        assert np.array_equal(a, b)


def test_swiss_roll_oracle_beats_grid():
    rng = np.random.default_rng(23)
    ts = np.linspace(geometry.SWISS_ROLL_T_MIN, geometry.SWISS_ROLL_T_MAX, 100000)
    spiral = np.stack([ts * np.cos(ts), ts * np.sin(ts)], axis=1)
    for _ in range(100):
        x = rng.uniform([-15, -3, -15], [15, 24, 15])
        opt = recovery.nearest_point_oracle(x, "swiss-roll")
        h = np.clip(x[1], 0.0, geometry.SWISS_ROLL_HEIGHT)
        grid_best = np.sqrt(
            ((spiral - np.array([x[0], x[2]])) ** 2).sum(axis=1).min() + (h - x[1]) ** 2
        )
        assert np.linalg.norm(opt - x) <= grid_best + 1e-12


def test_unknown_manifold_descriptor():
    with pytest.raises(ValueError):
        recovery.nearest_point_oracle(np.zeros(3), "torus")

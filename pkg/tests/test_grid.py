import numpy as np
import pytest

from g2speckle.correlations import DriveParams, g2_closed_form
from g2speckle.errors import InvalidArgumentError
from g2speckle.geometry import generate_chain
from g2speckle.analysis.grid import AngularGrid, angular_map, map_data, plane_scan, scan_plane_basis


@pytest.mark.parametrize("shape", [(1, 1), (7, 13), (180, 360), (360, 720)])
def test_weights_cover_sphere(shape):
    g = AngularGrid(*shape)
    assert g.weights.sum() == pytest.approx(4 * np.pi, rel=1e-6)
    assert np.allclose(np.linalg.norm(g.points, axis=1), 1.0, atol=1e-15)
    assert len(g) == shape[0] * shape[1]


def test_grid_order_theta_major():
    g = AngularGrid(3, 4)
    assert np.all(g.theta[:4] == g.theta[0])
    assert g.phi[:4].tolist() == pytest.approx([0, np.pi / 2, np.pi, 3 * np.pi / 2])
    with pytest.raises(InvalidArgumentError):
        AngularGrid(0, 4)


def test_single_emitter_map_is_zero():
    recs = angular_map([[0.3, -1, 2]], DriveParams(1e-3), AngularGrid(6, 12))
    assert len(recs) == 72
    assert all(r.g2 == 0.0 for r in recs)


def test_map_matches_pointwise(cloud100, rng):
    drive = DriveParams(1e-4)
    g = AngularGrid(9, 18)
    md = map_data(cloud100, drive, g, orders=(2, 3))
    idx = rng.integers(0, len(g), 5)
    for i in idx:
        k = g.points[i] - np.array(drive.k_laser)
        assert md.g2[i] == pytest.approx(g2_closed_form(cloud100, drive, k), rel=1e-12)
    assert set(md.gm) == {3}
    assert np.all(md.one_minus_exp_neg_g2 >= 0) and np.all(md.one_minus_exp_neg_g2 <= 1)


def test_forward_pixel_intensity(cloud100):
    drive = DriveParams(1e-6)
    recs = plane_scan(cloud100, drive, (0, 1, 0), 4).records()
    assert recs[0].g1_normalized == pytest.approx(1e-6 * 100 + 100**2, rel=1e-12)


def test_cloud_map_has_both_extremes(cloud100):
    md = map_data(cloud100, DriveParams(1e-6), AngularGrid(180, 360))
    assert md.g2.max() > 100
    assert md.g2.min() < 0.1


def test_scan_geometry_on_chain():
    # chain along x, laser along z, xz-plane: phase step is d sin(theta)
    chain = generate_chain(20, 1.3)
    md = plane_scan(chain, DriveParams(1e-3), (0, 1, 0), 16)
    t = md.theta
    np.testing.assert_allclose(md.k_obs, np.stack([np.sin(t), 0 * t, np.cos(t)], axis=1), atol=1e-15)
    from g2speckle.structure import chain_structure_factor

    for i in range(16):
        assert abs(md.S[i] - chain_structure_factor(20, 1.3 * np.sin(t[i]))) < 1e-10


def test_scan_mirror_symmetry():
    pos = [[1.0, 0.0, 0.5], [-1.0, 0.0, 0.5]]
    md = plane_scan(pos, DriveParams(1e-2), (0, 1, 0), 64)
    g = md.g2
    # theta -> -theta maps index j to (n - j) mod n
    mirrored = g[(-np.arange(64)) % 64]
    assert np.max(np.abs(g - mirrored)) <= 1e-10 * np.max(g)


def test_scan_amplitude_grows_as_s_drops(cloud100):
    spreads = []
    for s in (1e-6, 1e-4, 1e-2, 1.0, 10.0):
        g = plane_scan(cloud100, DriveParams(s), (0, 1, 0), 720).g2
        spreads.append(np.std(np.log(g)))
    assert all(a > b for a, b in zip(spreads, spreads[1:]))


def test_scan_errors():
    with pytest.raises(InvalidArgumentError):
        scan_plane_basis((0, 0, 1), (0, 0, 0))
    with pytest.raises(InvalidArgumentError):
        scan_plane_basis((0, 0, 1), (0, 0, 2))
    with pytest.raises(InvalidArgumentError):
        plane_scan([[0, 0, 0]], DriveParams(1.0), (0, 1, 0), 1)

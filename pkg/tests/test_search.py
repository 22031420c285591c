import numpy as np
import pytest

from g2speckle.correlations import DriveParams
from g2speckle.errors import InvalidArgumentError
from g2speckle.geometry import generate_chain
from g2speckle.analysis.grid import AngularGrid, map_data
from g2speckle.analysis.search import extremum_search, find_condition_directions, sphere_extrema

SMALL = AngularGrid(60, 120)


def test_single_emitter_extrema_are_zero():
    cfg = [[0.0, 0.0, 0.0]]
    for w in ("max", "min"):
        assert extremum_search(cfg, DriveParams(1e-3), which=w, grid=SMALL).value == 0.0


def test_two_atom_max_at_destructive_direction():
    pos = [[0.0, 0.0, 0.0], [np.pi, 0.0, 0.0]]
    s = 1e-3
    e = extremum_search(pos, DriveParams(s), which="max", grid=SMALL)
    assert e.value == pytest.approx((1 + 1 / s) ** 2, rel=1e-3)


def test_refinement_never_worse(cloud100):
    res = sphere_extrema(cloud100, [1e-6, 1e-3], grid=SMALL)
    coarse = map_data(cloud100, DriveParams(1e-6), SMALL).g2
    for e in res["max"]:
        assert all(b >= a for a, b in zip(e.history, e.history[1:]))
        assert e.value >= e.coarse_value
    for e in res["min"]:
        assert all(b <= a for a, b in zip(e.history, e.history[1:]))
        assert e.value <= e.coarse_value
    assert res["max"][0].value >= coarse.max()
    assert res["min"][0].value <= coarse.min()


def test_extrema_deterministic(cloud100):
    a = sphere_extrema(cloud100, [1e-5], grid=SMALL)
    b = sphere_extrema(cloud100, [1e-5], grid=SMALL)
    assert a["max"][0].value == b["max"][0].value
    assert np.array_equal(a["min"][0].k_obs, b["min"][0].k_obs)


def test_cloud_superbunching_is_large(cloud100):
    e = extremum_search(cloud100, DriveParams(1e-6), which="max")
    assert e.value > 1e4


def _chain_phase(d):
    return d.k_obs[0]  # chain along x with unit spacing, laser along z


def test_chain_destructive_roots():
    n = 100
    chain = generate_chain(n, 1.0)
    found = find_condition_directions(chain, kind="destructive", n_seeds=20)
    assert found
    for d in found:
        assert d.residual < 1e-18 * n**2
        q = _chain_phase(d) / (2 * np.pi / n)
        assert abs(q - round(q)) < 1e-6 and round(q) % n != 0


def test_chain_antibunch_roots():
    n = 100
    chain = generate_chain(n, 1.0)
    found = find_condition_directions(chain, m=2, kind="generalized_antibunch", n_seeds=60)
    good = [d for d in found if d.residual < 1e-18 * n**2]
    assert good
    for d in good:
        q = _chain_phase(d) / (2 * np.pi / (n - 1))
        assert abs(q - round(q)) < 1e-4


def test_cloud_destructive_residual(cloud100):
    found = find_condition_directions(cloud100, kind="destructive", n_seeds=5)
    assert found[0].residual / 100**2 < 1e-4
    assert [d.residual for d in found] == sorted(d.residual for d in found)


def test_condition_errors(cloud100):
    with pytest.raises(InvalidArgumentError):
        find_condition_directions(cloud100, kind="other")
    with pytest.raises(InvalidArgumentError):
        find_condition_directions(cloud100, n_seeds=0)

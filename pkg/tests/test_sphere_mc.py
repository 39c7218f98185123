"""Monte Carlo oracle: determinism, geometry, and statistical agreement."""

import math

import numpy as np
import pytest

from sphereheat.eigenmethod import heat_moment_x1_eigen
from sphereheat.operators import SphereConfig
from sphereheat.sphere_mc import (
    McConfig,
    McEstimate,
    mc_endpoints,
    mc_moment,
    mc_moments,
    mc_refinement_diffs,
    path_generator,
    simulate_endpoint,
)

SEED = 20240601


def make_mc(n=6, t=0.5, k=2, paths=2000, h=2e-3, seed=SEED, ell=4):
    return McConfig(
        cfg=SphereConfig(N=n, t=t, k=k, ell=ell), step_h=h, n_paths=paths, seed=seed
    )


# ----------------------------------------------------------------------
# geometry and determinism
# ----------------------------------------------------------------------


def test_zero_time_returns_base_point():
    mc = make_mc(t=0.0)
    end = simulate_endpoint(mc, path_generator(SEED, 0))
    assert end[0] == pytest.approx(0.0, abs=1e-14)  # sqrt(N) - m(0, N) = 0
    assert np.all(end[1:] == 0.0)


def test_radius_preserved_after_every_step():
    cfg = SphereConfig(N=5, t=0.2, k=2, ell=2)
    mc = McConfig(cfg=cfg, step_h=1e-2, n_paths=1, seed=3)
    end = simulate_endpoint(mc, path_generator(3, 0))
    shifted = end.copy()
    shifted[0] += cfg.m
    rel = abs(np.linalg.norm(shifted) - math.sqrt(5)) / math.sqrt(5)
    assert rel <= 1e-12


def test_step_sizes_cover_time_exactly():
    mc = make_mc(t=0.5, h=2e-3)
    assert mc.step_sizes().sum() == pytest.approx(0.5, abs=1e-12)
    mc = make_mc(t=0.35, h=0.1)  # non-dividing step: short last step
    steps = mc.step_sizes()
    assert len(steps) == 4 and steps[-1] == pytest.approx(0.05)
    assert steps.sum() == pytest.approx(0.35, abs=1e-12)


def test_bitwise_determinism():
    mc = make_mc(paths=1500)
    a = mc_endpoints(mc, workers=1)
    b = mc_endpoints(mc, workers=1)
    c = mc_endpoints(mc, workers=2)
    assert np.array_equal(a, b)
    assert np.array_equal(a, c)
    e1 = mc_moment(mc, (0, 2), endpoints=a)
    e2 = mc_moment(mc, (0, 2), endpoints=c)
    assert e1 == e2  # identical McEstimate, bit for bit


def test_single_path_matches_batched_run():
    mc = make_mc(paths=1100)  # crosses one batch boundary
    ends = mc_endpoints(mc, workers=1)
    for p in (0, 1023, 1024, 1099):
        single = simulate_endpoint(mc, path_generator(SEED, p))
        assert np.array_equal(single, ends[p])


def test_different_seeds_decorrelate():
    a = mc_endpoints(make_mc(paths=64, seed=1), workers=1)
    b = mc_endpoints(make_mc(paths=64, seed=2), workers=1)
    assert not np.array_equal(a, b)


def test_config_validation():
    with pytest.raises(ValueError):
        make_mc(h=0.0)
    with pytest.raises(ValueError):
        make_mc(t=0.5, h=0.7)
    with pytest.raises(ValueError):
        make_mc(paths=0)
    with pytest.raises(ValueError):
        McConfig(cfg=SphereConfig(N=6, t=0.5, k=2, ell=2), step_h=1e-3,
                 n_paths=10, seed=0, scheme="euler")
    with pytest.raises(ValueError):
        McEstimate(mean=0.0, stderr=-1.0, n_paths=10)
    with pytest.raises(ValueError):
        mc_moment(make_mc(k=2), (0, 0, 2))


# ----------------------------------------------------------------------
# statistical agreement (moderate sizes; three-sigma gates)
# ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def medium_run():
    mc = make_mc(n=8, t=1.0, k=3, paths=20000, h=2e-3, ell=4)
    return mc, mc_endpoints(mc)


def test_first_coordinate_mean_vanishes(medium_run):
    mc, ends = medium_run
    est = mc_moment(mc, (1, 0, 0), endpoints=ends)
    assert abs(est.mean) <= 4 * est.stderr


def test_rest_second_moment(medium_run):
    mc, ends = medium_run
    est = mc_moment(mc, (0, 2, 0), endpoints=ends)
    exact = 1 - math.exp(-1.0)
    assert abs(est.mean - exact) <= 3 * est.stderr + 0.5 * mc.step_h


def test_first_second_moment_matches_eigen_route(medium_run):
    mc, ends = medium_run
    est = mc_moment(mc, (2, 0, 0), endpoints=ends)
    cfg1 = SphereConfig(N=8, t=1.0, k=1, ell=2)
    exact = heat_moment_x1_eigen(2, cfg1)
    assert abs(est.mean - exact) <= 3 * est.stderr + 0.5 * mc.step_h


def test_rotational_symmetry(medium_run):
    mc, ends = medium_run
    e2 = mc_moment(mc, (0, 2, 0), endpoints=ends)
    e3 = mc_moment(mc, (0, 0, 2), endpoints=ends)
    assert abs(e2.mean - e3.mean) <= 3 * (e2.stderr + e3.stderr)


def test_drift_of_shifted_coordinate():
    # E[x1 + m] / sqrt(N) should be exp((t/2)(-1 + 1/N))
    cfg = SphereConfig(N=3, t=1.0, k=2, ell=2)
    mc = McConfig(cfg=cfg, step_h=2e-3, n_paths=20000, seed=SEED)
    ends = mc_endpoints(mc)
    vals = (ends[:, 0] + cfg.m) / math.sqrt(3)
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    assert abs(mean - math.exp(-1 / 3)) <= 3 * stderr + 2e-3


def test_shared_ensemble_equals_individual_calls():
    mc = make_mc(paths=1000)
    batch = mc_moments(mc, [(1, 0), (0, 2)])
    assert batch[0] == mc_moment(mc, (1, 0))
    assert batch[1] == mc_moment(mc, (0, 2))


def test_discretization_bias_is_first_order():
    # coupled h vs h/2 vs h/4 differences; their means are ~C h/2 and ~C h/4
    mc = McConfig(
        cfg=SphereConfig(N=4, t=1.0, k=2, ell=2),
        step_h=0.1,
        n_paths=60000,
        seed=SEED,
    )
    d1, d2 = mc_refinement_diffs(mc, (2, 0))
    assert abs(d1.mean) > 5 * d1.stderr, "bias difference not resolved"
    assert abs(d2.mean) > 5 * d2.stderr, "bias difference not resolved"
    assert 1.5 <= d1.mean / d2.mean <= 2.5


def test_refinement_requires_divisible_time():
    mc = McConfig(
        cfg=SphereConfig(N=4, t=0.35, k=2, ell=2), step_h=0.1, n_paths=16, seed=1
    )
    with pytest.raises(ValueError):
        mc_refinement_diffs(mc, (2, 0))


def test_estimate_fields(medium_run):
    mc, ends = medium_run
    est = mc_moment(mc, (0, 2, 0), endpoints=ends)
    assert est.n_paths == mc.n_paths
    assert est.stderr > 0
    assert "O(step_h)" in est.bias_note

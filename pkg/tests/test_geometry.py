import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foldylax import (CapacityExceeded, IncidentWave, OverlappingSpheres,
                      RegimeParams, RegimeViolation, ScattererCloud,
                      cloud_stats, generate_grid_cloud, layer_count)

from conftest import make_cloud


def std_regime(**kw):
    base = dict(a=0.05, s=2.0, t=1.0, beta=0.0, M_max=1.0,
                d_min=1.0, d_max=2.0, lambda0=-0.5)
    base.update(kw)
    return RegimeParams(**base)


class TestRegimeParams:
    def test_counts_and_impedance(self):
        rg = std_regime(a=0.1, s=1.5, beta=0.5, lambda0=-2.0)
        assert rg.M == 31
        assert rg.impedance == pytest.approx(-2.0 * 0.1**-0.5)

    def test_count_floor_is_one(self):
        assert std_regime(a=0.5, s=0.0, M_max=1.0).M == 1
        assert std_regime(a=0.5, s=1.0, M_max=0.1).M == 1

    def test_count_floor_exact_boundary(self):
        # M_max * a^(-s) = 8 exactly; floor must not lose it to roundoff
        assert std_regime(a=0.25, s=1.5, M_max=1.0).M == 8

    @pytest.mark.parametrize("bad", [
        dict(s=2.5, beta=0.0),          # s <= 2 - beta
        dict(s=2.0, beta=0.5),
        dict(beta=1.5),                 # beta <= 1
        dict(s=1.5, t=0.4),             # s/3 <= t
    ])
    def test_admissibility_rejected(self, bad):
        with pytest.raises(RegimeViolation):
            std_regime(**bad)

    def test_admissibility_boundaries_allowed(self):
        std_regime(s=2.0, beta=0.0)     # s = 2 - beta
        std_regime(s=1.5, beta=0.5, t=0.5)
        std_regime(beta=1.0, s=1.0)     # beta = 1 admissible (general variant refuses later)

    @pytest.mark.parametrize("bad", [dict(a=0.0), dict(a=-0.1), dict(d_min=0.0),
                                     dict(d_min=3.0), dict(M_max=0.0),
                                     dict(lambda0=0.0)])
    def test_invalid_parameters(self, bad):
        with pytest.raises((RegimeViolation, ValueError)):
            std_regime(**bad)


class TestLayerCount:
    def test_small_values(self):
        assert layer_count(1) == 26
        assert layer_count(2) == 98
        assert layer_count(3) == 218

    def test_closed_form_and_telescoping(self):
        # layer n = (2n+1)^3 - (2n-1)^3 and layers 1..N fill the shell (2N+1)^3 - 1
        total = 0
        for n in range(1, 1001):
            ln = layer_count(n)
            assert ln == (2 * n + 1) ** 3 - (2 * n - 1) ** 3
            total += ln
        assert total == (2 * 1000 + 1) ** 3 - 1

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            layer_count(0)


class TestGenerateGridCloud:
    def test_single_sphere_at_origin(self):
        cloud = generate_grid_cloud(std_regime(a=0.3, s=0.0), box_side=10.0)
        assert cloud.M == 1
        assert np.all(cloud.centers[0] == 0.0)
        assert cloud.radii[0] == pytest.approx(0.15)

    def test_counts_and_window(self):
        rg = std_regime(a=0.05, s=2.0)
        cloud = generate_grid_cloud(rg, box_side=math.inf)
        assert cloud.M == 400
        lo, hi = rg.d_min * rg.a, rg.d_max * rg.a
        assert lo * (1 - 1e-12) <= cloud.d_eff <= hi * (1 + 1e-12)
        assert cloud.a_eff == pytest.approx(rg.a)

    def test_determinism_bitwise(self):
        rg = std_regime(a=0.1, s=1.5)
        c1 = generate_grid_cloud(rg, box_side=math.inf, jitter=0.3, seed=11)
        c2 = generate_grid_cloud(rg, box_side=math.inf, jitter=0.3, seed=11)
        assert np.array_equal(c1.centers, c2.centers)
        assert np.array_equal(c1.radii, c2.radii)
        assert np.array_equal(c1.impedances, c2.impedances)

    def test_seed_changes_jittered_centers(self):
        rg = std_regime(a=0.1, s=1.5)
        c1 = generate_grid_cloud(rg, box_side=math.inf, jitter=0.3, seed=1)
        c2 = generate_grid_cloud(rg, box_side=math.inf, jitter=0.3, seed=2)
        assert not np.array_equal(c1.centers, c2.centers)

    @pytest.mark.parametrize("seed", range(100))
    def test_jitter_preserves_window(self, seed):
        rg = std_regime(a=0.08, s=1.7, t=1.0)
        cloud = generate_grid_cloud(rg, box_side=math.inf, jitter=0.45, seed=seed)
        lo, hi = rg.d_min * rg.a**rg.t, rg.d_max * rg.a**rg.t
        assert lo * (1 - 1e-12) <= cloud.d_eff <= hi * (1 + 1e-12)

    def test_jitter_window_compatibility(self):
        # worst-case approach of two jittered neighbors is (1+2*jitter)*d_min
        with pytest.raises(RegimeViolation):
            generate_grid_cloud(std_regime(a=0.05, s=2.0), box_side=math.inf,
                                jitter=0.6, seed=0)
        with pytest.raises(RegimeViolation):
            generate_grid_cloud(std_regime(a=0.05, s=2.0), box_side=math.inf,
                                jitter=1.0, seed=0)

    def test_capacity(self):
        rg = std_regime(a=0.05, s=2.0)  # M = 400, lattice spans ~0.8
        with pytest.raises(CapacityExceeded):
            generate_grid_cloud(rg, box_side=0.3)
        generate_grid_cloud(rg, box_side=2.0)

    def test_regime_tag_attached(self):
        rg = std_regime(a=0.05, s=2.0)
        cloud = generate_grid_cloud(rg, box_side=math.inf)
        assert cloud.regime is rg
        stats = cloud_stats(cloud)
        assert stats.M == 400
        assert stats.lambda_plus == pytest.approx(0.5)
        assert stats.lambda_minus == pytest.approx(0.5)

    def test_beta_scaling_recovered_by_stats(self):
        rg = std_regime(a=0.04, s=1.0, beta=0.5, lambda0=-0.3)
        cloud = generate_grid_cloud(rg, box_side=math.inf)
        assert np.allclose(cloud.impedances, -0.3 * 0.04**-0.5)
        stats = cloud_stats(cloud)
        assert stats.lambda_plus == pytest.approx(0.3)


class TestScattererCloud:
    def test_overlap_rejected(self):
        with pytest.raises(OverlappingSpheres):
            make_cloud([[0, 0, 0], [0.1, 0, 0]], 0.06, -1.0)

    def test_zero_impedance_rejected(self):
        with pytest.raises(ValueError):
            make_cloud([[0, 0, 0]], 0.1, 0.0)

    def test_regime_window_enforced(self):
        rg = std_regime(a=0.05, s=2.0)
        # separation 0.3 is far above d_max * a = 0.1
        with pytest.raises(RegimeViolation):
            ScattererCloud(centers=np.array([[0, 0, 0], [0.3, 0, 0]]),
                           radii=np.full(2, 0.025), impedances=np.full(2, -0.5 + 0j),
                           regime=rg)

    def test_single_sphere_exempt_from_count_rule(self):
        rg = std_regime(a=0.05, s=0.0, M_max=0.2)  # M_max * a^0 < 1
        make_cloud([[0, 0, 0]], 0.025, -0.5, regime=rg)

    def test_general_areas_flag(self):
        c = make_cloud([[0, 0, 0]], 0.1, -1.0, areas=np.array([0.2]))
        assert not c.is_spherical
        assert c.areas[0] == pytest.approx(0.2)
        c2 = make_cloud([[0, 0, 0]], 0.1, -1.0)
        assert c2.is_spherical
        assert c2.areas[0] == pytest.approx(4 * np.pi * 0.01)

    def test_arrays_read_only(self):
        c = make_cloud([[0, 0, 0]], 0.1, -1.0)
        with pytest.raises(ValueError):
            c.centers[0, 0] = 1.0


class TestIncidentWave:
    def test_unit_tolerance(self):
        IncidentWave(kappa=1.0, theta=np.array([0.0, 0.0, 1.0 + 9e-15]))
        with pytest.raises(ValueError):
            IncidentWave(kappa=1.0, theta=np.array([0.0, 0.0, 1.0 + 1e-12]))

    def test_kappa_window(self):
        with pytest.raises(ValueError):
            IncidentWave(kappa=0.0, theta=np.array([0.0, 0.0, 1.0]))
        with pytest.raises(ValueError):
            IncidentWave(kappa=7.0, theta=np.array([0.0, 0.0, 1.0]))
        IncidentWave(kappa=7.0, theta=np.array([0.0, 0.0, 1.0]), kappa_max=10.0)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(0.01, 0.3), s=st.floats(0.0, 2.0),
       seed=st.integers(0, 2**31 - 1), jitter=st.floats(0.0, 0.45))
def test_generated_cloud_invariants(a, s, seed, jitter):
    """Any admissible generated cloud satisfies its own regime window."""
    rg = RegimeParams(a=a, s=s, t=1.0, beta=0.0, M_max=min(1.0, 30.0 * a**s),
                      d_min=1.0, d_max=2.0, lambda0=-1.0)
    cloud = generate_grid_cloud(rg, box_side=math.inf, jitter=jitter, seed=seed)
    assert 1 <= cloud.M <= max(1, int(rg.M_max * a**-s + 1e-9))
    assert cloud.a_eff <= a * (1 + 1e-12)
    if cloud.M >= 2:
        assert rg.d_min * a * (1 - 1e-12) <= cloud.d_eff <= rg.d_max * a * (1 + 1e-12)
    # rebuilding with the same data revalidates cleanly
    dataclasses.replace(cloud)

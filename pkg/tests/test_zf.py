import numpy as np
import pytest

from conftest import iid_channels, random_instance
from cjtsim import metrics, scenario
from cjtsim.errors import NumericalError
from cjtsim.zf import extract_targets, normalize_total_power, zf_precoders


class TestZfPrecoders:
    def test_unit_gain_and_nulling(self, rng):
        topo, h, _, _ = random_instance(3, 16, 8, "overlap", seed=1)
        w = zf_precoders(h, topo)
        for p in range(3):
            for i in topo.serving_map[p]:
                assert np.vdot(h[i, p], w[(p, i)]) == pytest.approx(1.0, abs=1e-9)
                for j in range(topo.n_ue):
                    if j != i:
                        assert abs(np.vdot(h[j, p], w[(p, i)])) <= 1e-9

    def test_min_norm_solution(self, rng):
        # the min-norm interpolant lies in the row space of the channels
        topo = scenario.build_topology(1, 8, 3, [[0, 1, 2]])
        h = iid_channels(3, 1, 8, rng)
        w = zf_precoders(h, topo)
        hmat = h[:, 0, :]  # (3, 8)
        for i in range(3):
            # residual after projecting onto span{h_j} must vanish
            coef, *_ = np.linalg.lstsq(hmat.T, w[(0, i)], rcond=None)
            assert np.linalg.norm(hmat.T @ coef - w[(0, i)]) <= 1e-10

    def test_single_ue_matched_filter(self, rng):
        # [DERIVED] one UE: w = h / ||h||^2
        topo = scenario.build_topology(1, 4, 1, [[0]])
        h = iid_channels(1, 1, 4, rng)
        w = zf_precoders(h, topo)
        hn2 = float(np.vdot(h[0, 0], h[0, 0]).real)
        assert np.allclose(w[(0, 0)], h[0, 0] / hn2, rtol=1e-10)

    def test_overloaded_bs_rejected(self, rng):
        # more constrained UEs than antennas cannot be nulled
        topo = scenario.build_topology(1, 2, 3, [[0, 1, 2]])
        h = iid_channels(3, 1, 2, rng)
        with pytest.raises(NumericalError):
            zf_precoders(h, topo)


class TestNormalization:
    def test_exact_total_power(self, rng):
        topo, h, _, _ = random_instance(3, 16, 8, "overlap", seed=2)
        w = normalize_total_power(zf_precoders(h, topo), 10.0)
        assert metrics.total_power(w) == pytest.approx(10.0, rel=1e-12)

    def test_common_scalar_preserves_ratios(self, rng):
        topo, h, _, _ = random_instance(2, 8, 4, "disjoint", seed=3)
        w0 = zf_precoders(h, topo)
        w1 = normalize_total_power(w0, 10.0)
        pairs = list(w0)
        r0 = np.linalg.norm(w0[pairs[0]]) / np.linalg.norm(w0[pairs[1]])
        r1 = np.linalg.norm(w1[pairs[0]]) / np.linalg.norm(w1[pairs[1]])
        assert r1 == pytest.approx(r0, rel=1e-12)

    def test_invalid_power_rejected(self, rng):
        topo, h, _, _ = random_instance(1, 4, 2, [[0, 1]], seed=4)
        w = zf_precoders(h, topo)
        with pytest.raises(ValueError):
            normalize_total_power(w, 0.0)


class TestTargetExtraction:
    def test_zf_point_meets_own_targets(self, rng):
        topo, h, _, sigma2 = random_instance(3, 16, 8, "overlap", seed=5)
        w = normalize_total_power(zf_precoders(h, topo), 10.0)
        targets = extract_targets(h, w, sigma2, topo)
        sinr = metrics.sinr_per_pair(h, w, sigma2, topo)
        assert np.array_equal(targets, sinr)
        for p in range(3):
            for i in topo.serving_map[p]:
                assert targets[p, i] > 0.0

    def test_targets_near_interference_free_value(self, rng):
        # ZF nulls all interference, so the target is ~ |h^H w|^2 / sigma2
        topo, h, _, sigma2 = random_instance(2, 12, 4, "disjoint", seed=6)
        w = normalize_total_power(zf_precoders(h, topo), 10.0)
        targets = extract_targets(h, w, sigma2, topo)
        for p in range(2):
            for i in topo.serving_map[p]:
                expect = abs(np.vdot(h[i, p], w[(p, i)])) ** 2 / sigma2
                assert targets[p, i] == pytest.approx(expect, rel=1e-9)

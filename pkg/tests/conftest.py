import numpy as np
import pytest

from cjtsim import scenario, zf


def iid_channels(n_ue, n_bs, n_tx, rng):
    return (rng.standard_normal((n_ue, n_bs, n_tx))
            + 1j * rng.standard_normal((n_ue, n_bs, n_tx))) / np.sqrt(2.0)


def uniform_targets(topology, gamma):
    t = np.zeros((topology.n_bs, topology.n_ue))
    for p in range(topology.n_bs):
        for i in topology.serving_map[p]:
            t[p, i] = gamma
    return t


def random_instance(n_bs, n_tx, n_ue, pattern, gamma=2.0, sigma2=0.01, seed=0):
    """Small iid-channel instance with uniform SINR targets."""
    topo = scenario.build_topology(n_bs, n_tx, n_ue, pattern)
    rng = np.random.default_rng(seed)
    h = iid_channels(n_ue, n_bs, n_tx, rng)
    return topo, h, uniform_targets(topo, gamma), sigma2


def desk_instance(n_tx, seed, n_bs=3, n_ue=12, snr_db=20.0):
    """Desk-scale realization with ZF-extracted targets (the trial pipeline
    up to and including target extraction)."""
    topo = scenario.build_topology(n_bs, n_tx, n_ue, "overlap")
    model = scenario.ChannelModel()
    ss = np.random.SeedSequence(seed)
    cov_ss, fade_ss = ss.spawn(2)
    theta = scenario.synth_covariances(topo, model, cov_ss)
    h = scenario.draw_channels(theta, fade_ss)
    sigma2 = scenario.calibrate_noise(h, topo, snr_db).sigma2
    w_zf = zf.normalize_total_power(zf.zf_precoders(h, topo), 10.0)
    targets = zf.extract_targets(h, w_zf, sigma2, topo)
    return topo, theta, h, sigma2, targets, w_zf


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

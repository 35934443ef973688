"""SINR and rate evaluation for a complete precoder set.

Two SINR definitions coexist: the per-(BS, UE)-link form used as the design
constraint (incoherent across a UE's serving BSs), and the coherent per-UE
form used for performance evaluation, where serving-BS signals add in
amplitude and interference sums coherently per interfering UE.
"""

from __future__ import annotations

import numpy as np


def _gains(channels, precoders, topology):
    """g[i][(q, j)] = h_iq^H w_jq for every UE i and served pair (q, j)."""
    h = np.asarray(channels)
    pairs = topology.served_pairs()
    g = np.empty((topology.n_ue, len(pairs)), dtype=complex)
    for col, (q, j) in enumerate(pairs):
        for i in range(topology.n_ue):
            g[i, col] = np.vdot(h[i, q], precoders[(q, j)])
    return g, pairs


def sinr_per_pair(channels, precoders, sigma2, topology):
    """Per-link SINR: desired |h_ip^H w_ip|^2 over all other streams' power.

    Streams of UE i transmitted by its other serving BSs are excluded from
    the interference. Returns (n_bs, n_ue), zero at unserved pairs.
    """
    g, pairs = _gains(channels, precoders, topology)
    out = np.zeros((topology.n_bs, topology.n_ue))
    for i in range(topology.n_ue):
        interf = sum(abs(g[i, col]) ** 2
                     for col, (q, j) in enumerate(pairs) if j != i)
        for col, (q, j) in enumerate(pairs):
            if j == i:
                out[q, i] = abs(g[i, col]) ** 2 / (interf + sigma2)
    return out


def sinr_coherent(channels, precoders, sigma2, topology):
    """Coherent per-UE SINR: serving-BS amplitudes add in the numerator,
    each interfering UE's streams add in amplitude before squaring."""
    g, pairs = _gains(channels, precoders, topology)
    n_ue = topology.n_ue
    # amp[i, j] = sum over BSs serving j of h_iq^H w_jq
    amp = np.zeros((n_ue, n_ue), dtype=complex)
    for col, (q, j) in enumerate(pairs):
        amp[:, j] += g[:, col]
    out = np.empty(n_ue)
    for i in range(n_ue):
        interf = sum(abs(amp[i, j]) ** 2 for j in range(n_ue) if j != i)
        out[i] = abs(amp[i, i]) ** 2 / (interf + sigma2)
    return out


def evaluate_metrics(channels, precoders, sigma2, topology):
    """Both SINR maps plus the coherent sum rate (bits/s/Hz)."""
    pair = sinr_per_pair(channels, precoders, sigma2, topology)
    orig = sinr_coherent(channels, precoders, sigma2, topology)
    sum_rate = float(np.sum(np.log2(1.0 + orig)))
    return pair, orig, sum_rate


def total_power(precoders):
    return sum(float(np.vdot(v, v).real) for v in precoders.values())


def per_bs_power(precoders, topology):
    out = np.zeros(topology.n_bs)
    for (p, _i), v in precoders.items():
        out[p] += float(np.vdot(v, v).real)
    return out

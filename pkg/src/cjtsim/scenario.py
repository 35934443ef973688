"""Network topology, channel covariance synthesis, fading draws, noise calibration.

Channels follow a correlated Rayleigh model: the vector from BS p to UE i is
h_ip = Theta_ip^{1/2} z_ip with z_ip standard circularly-symmetric Gaussian.
The covariance Theta_ip absorbs large-scale pathloss; antenna correlation uses
the exponential model R[m, n] = rho^|m-n|.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError

# Eigenvalues below -PSD_REL_TOL * max_eig indicate a genuinely indefinite
# matrix; anything above is treated as roundoff and clamped to zero.
PSD_REL_TOL = 1e-10

MIN_UE_DISTANCE_M = 35.0


@dataclass(frozen=True)
class Topology:
    """Cell layout: which BS serves which UE.

    serving_map[p] is the ordered tuple of UE indices served by BS p (U_p);
    coop_map[i] the ordered tuple of BSs serving UE i (T_i). Indices 0-based.
    """

    n_bs: int
    n_tx: int
    n_ue: int
    serving_map: tuple
    coop_map: tuple

    def served_pairs(self):
        """All (bs, ue) pairs in BS-major order, U_p order within a BS."""
        return [(p, i) for p in range(self.n_bs) for i in self.serving_map[p]]


@dataclass(frozen=True)
class ChannelModel:
    rho: float = 0.5
    pathloss_exp: float = 3.76
    cell_radius_m: float = 250.0
    ref_loss_db: float = 128.1


@dataclass(frozen=True)
class NoiseSpec:
    sigma2: float
    snr_db: float


def build_topology(n_bs, n_tx, n_ue, serving_pattern) -> Topology:
    """Build a topology from a named pattern or an explicit serving map.

    serving_pattern is one of:
      - "overlap": sliding blocks of width 2*N_c/(N_B+1); interior UEs are
        served by two adjacent BSs (requires N_c divisible by N_B+1, or N_B=1)
      - "disjoint": equal contiguous split, no cooperation
      - explicit sequence of per-BS UE index lists (0-based)
    """
    if n_bs < 1 or n_tx < 1 or n_ue < 1:
        raise ConfigError("n_bs, n_tx, n_ue must all be >= 1")

    if serving_pattern == "overlap":
        if n_bs == 1:
            serving = [list(range(n_ue))]
        else:
            if n_ue % (n_bs + 1) != 0:
                raise ConfigError(
                    f"overlap pattern requires n_ue divisible by n_bs+1 "
                    f"(got n_ue={n_ue}, n_bs={n_bs})")
            stride = n_ue // (n_bs + 1)
            serving = [list(range(p * stride, p * stride + 2 * stride))
                       for p in range(n_bs)]
    elif serving_pattern == "disjoint":
        serving = [list(chunk) for chunk in np.array_split(np.arange(n_ue), n_bs)]
    else:
        serving = [list(ues) for ues in serving_pattern]
        if len(serving) != n_bs:
            raise ConfigError("explicit serving pattern must list one UE set per BS")

    for p, ues in enumerate(serving):
        if not ues:
            raise ConfigError(f"BS {p} serves no UE")
        if any(i < 0 or i >= n_ue for i in ues):
            raise ConfigError(f"BS {p} serving set has out-of-range UE index")
        if len(set(ues)) != len(ues):
            raise ConfigError(f"BS {p} serving set has duplicate UE index")

    coop = [[] for _ in range(n_ue)]
    for p, ues in enumerate(serving):
        for i in ues:
            coop[i].append(p)
    for i, bss in enumerate(coop):
        if not bss:
            raise ConfigError(f"UE {i} has no serving BS")

    return Topology(
        n_bs=n_bs, n_tx=n_tx, n_ue=n_ue,
        serving_map=tuple(tuple(u) for u in serving),
        coop_map=tuple(tuple(b) for b in coop),
    )


def exponential_correlation(n_tx, rho):
    """R[m, n] = rho^|m-n|, the exponential antenna-correlation model."""
    idx = np.arange(n_tx)
    return np.power(rho, np.abs(idx[:, None] - idx[None, :])).astype(complex)


def _bs_positions(n_bs, radius_m):
    if n_bs == 1:
        return np.zeros((1, 2))
    ang = 2 * np.pi * np.arange(n_bs) / n_bs
    return radius_m * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def synth_covariances(topology, model: ChannelModel, rng_seed):
    """Synthesize Theta[i][p] = beta_ip * R(rho), deterministic given the seed.

    Pathloss beta_ip follows a log-distance law with the UE dropped uniformly
    in a disk around the centroid of its serving BSs; distances in km.
    Returns an array of shape (n_ue, n_bs, n_tx, n_tx).
    """
    if not 0.0 <= model.rho < 1.0:
        raise ConfigError(f"rho must satisfy 0 <= rho < 1, got {model.rho}")
    rng = np.random.default_rng(rng_seed)
    n_ue, n_bs, n_tx = topology.n_ue, topology.n_bs, topology.n_tx

    bs_pos = _bs_positions(n_bs, model.cell_radius_m)
    corr = exponential_correlation(n_tx, model.rho)

    theta = np.empty((n_ue, n_bs, n_tx, n_tx), dtype=complex)
    for i in range(n_ue):
        center = bs_pos[list(topology.coop_map[i])].mean(axis=0)
        # uniform drop in the disk, resampled until clear of every BS
        while True:
            r = model.cell_radius_m * np.sqrt(rng.uniform())
            phi = rng.uniform(0.0, 2 * np.pi)
            pos = center + r * np.array([np.cos(phi), np.sin(phi)])
            dists = np.linalg.norm(bs_pos - pos, axis=1)
            if dists.min() >= MIN_UE_DISTANCE_M:
                break
        for p in range(n_bs):
            d_km = dists[p] / 1000.0
            loss_db = model.ref_loss_db + 10.0 * model.pathloss_exp * np.log10(d_km)
            beta = 10.0 ** (-loss_db / 10.0)
            theta[i, p] = beta * corr
    return theta


def hermitian_sqrt(mat, rel_tol=PSD_REL_TOL):
    """Principal square root of a Hermitian PSD matrix.

    Tiny negative eigenvalues (roundoff) are clamped to zero; eigenvalues
    below -rel_tol * max_eig raise NumericalError.
    """
    evals, evecs = np.linalg.eigh(mat)
    top = max(float(evals.max()), 0.0)
    floor = -rel_tol * top if top > 0.0 else -rel_tol
    if evals.min() < floor:
        raise NumericalError(
            f"matrix is not PSD: min eigenvalue {evals.min():.3e} vs max {top:.3e}")
    evals = np.clip(evals, 0.0, None)
    return (evecs * np.sqrt(evals)) @ evecs.conj().T


def draw_channels(covset, rng_seed):
    """Draw h[i][p] = Theta_ip^{1/2} z_ip with z standard complex Gaussian.

    Returns an array of shape (n_ue, n_bs, n_tx).
    """
    theta = np.asarray(covset)
    n_ue, n_bs, n_tx = theta.shape[0], theta.shape[1], theta.shape[2]
    rng = np.random.default_rng(rng_seed)
    z = (rng.standard_normal((n_ue, n_bs, n_tx))
         + 1j * rng.standard_normal((n_ue, n_bs, n_tx))) / np.sqrt(2.0)
    h = np.empty((n_ue, n_bs, n_tx), dtype=complex)
    for i in range(n_ue):
        for p in range(n_bs):
            h[i, p] = hermitian_sqrt(theta[i, p]) @ z[i, p]
    return h


def calibrate_noise(channels, topology, snr_db) -> NoiseSpec:
    """Noise power giving the requested average receive SNR without precoding.

    sigma2 = 10^G * 10^(-snr_db/10) with G the arithmetic mean of
    log10 ||h_ip||^2 over all served (p, i in U_p) pairs, i.e. sigma2 is the
    geometric mean of the served-channel gains scaled down by the SNR.
    """
    h = np.asarray(channels)
    logs = []
    for p in range(topology.n_bs):
        for i in topology.serving_map[p]:
            g = float(np.vdot(h[i, p], h[i, p]).real)
            if g <= 0.0:
                raise NumericalError(f"served channel (bs={p}, ue={i}) has zero norm")
            logs.append(np.log10(g))
    sigma2 = 10.0 ** float(np.mean(logs)) * 10.0 ** (-snr_db / 10.0)
    return NoiseSpec(sigma2=sigma2, snr_db=float(snr_db))


def write_channel_dump(path, channels):
    """Dump channels as a binary matrix: u32 rows, u32 cols (little-endian),
    then row-major interleaved real/imag float64. Rows are (ue, bs) pairs in
    UE-major order, columns the antenna index."""
    h = np.asarray(channels)
    rows = h.shape[0] * h.shape[1]
    cols = h.shape[2]
    flat = h.reshape(rows, cols)
    with open(path, "wb") as f:
        f.write(struct.pack("<II", rows, cols))
        inter = np.empty((rows, 2 * cols))
        inter[:, 0::2] = flat.real
        inter[:, 1::2] = flat.imag
        f.write(inter.astype("<f8").tobytes())


def read_channel_dump(path):
    """Inverse of write_channel_dump; returns a (rows, cols) complex matrix."""
    with open(path, "rb") as f:
        rows, cols = struct.unpack("<II", f.read(8))
        data = np.frombuffer(f.read(rows * cols * 16), dtype="<f8")
    inter = data.reshape(rows, 2 * cols)
    return inter[:, 0::2] + 1j * inter[:, 1::2]

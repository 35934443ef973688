"""Centralized power-minimization precoding via uplink-downlink duality.

Solves the network-wide problem: minimize total transmit power subject to a
per-(BS, served UE) SINR target. The virtual-uplink multipliers lambda come
from a fixed-point iteration, precoder directions from a regularized
resolvent, and per-pair power scalings delta from a linear coupling system.
The exact inter-cell interference produced at the optimum (tau toward served
UEs, eps toward non-served UEs) is extracted for the decentralized scheme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleTargetsError, NumericalError


@dataclass
class PairIndex:
    """Flat indexing of served (BS, UE) pairs: BS-major, U_p order."""

    pairs: list

    def __post_init__(self):
        self.flat = {pair: k for k, pair in enumerate(self.pairs)}

    def __len__(self):
        return len(self.pairs)


def make_pair_index(topology) -> PairIndex:
    return PairIndex(topology.served_pairs())


def _aggregate_lambda(lam, topology):
    """alpha_j = sum of lambda_jq over serving BSs q of UE j."""
    alpha = np.zeros(topology.n_ue)
    for p in range(topology.n_bs):
        for i in topology.serving_map[p]:
            alpha[i] += lam[p, i]
    return alpha


def solve_lambda_fixed_point(channels, targets, topology, tol=1e-8, max_iter=500):
    """Fixed point of the virtual-uplink multiplier equations.

    lambda_ip = gamma_ip / (h_ip^H (N_T I + sum_{j != i} alpha_j h_jp h_jp^H)^{-1} h_ip)
    with alpha_j the UE-aggregated multiplier. Returns an (n_bs, n_ue) array
    (zero at unserved pairs). Initialization gamma * N_T / ||h||^2 is exact in
    the interference-free case.
    """
    h = np.asarray(channels)
    n_bs, n_ue, n_tx = topology.n_bs, topology.n_ue, topology.n_tx

    lam = np.zeros((n_bs, n_ue))
    for p in range(n_bs):
        for i in topology.serving_map[p]:
            lam[p, i] = targets[p, i] * n_tx / float(np.vdot(h[i, p], h[i, p]).real)
    lam0_max = float(lam.max())

    for it in range(max_iter):
        alpha = _aggregate_lambda(lam, topology)
        new = np.zeros_like(lam)
        max_resid = 0.0
        for p in range(n_bs):
            # full resolvent at BS p; per-UE exclusion via rank-1 downdate
            hp = h[:, p, :]                                   # (n_ue, n_tx)
            a_p = n_tx * np.eye(n_tx, dtype=complex) + (hp.T * alpha) @ hp.conj()
            binv_h = np.linalg.solve(a_p, hp.T)               # columns B^{-1} h_j
            m_full = np.einsum("ij,ji->i", hp.conj(), binv_h).real  # h_j^H B^{-1} h_j
            for i in topology.serving_map[p]:
                m_excl = m_full[i] / (1.0 - alpha[i] * m_full[i])
                if not np.isfinite(m_excl) or m_excl <= 0.0:
                    raise NumericalError(
                        f"non-positive resolvent quadratic form at (bs={p}, ue={i})")
                cand = targets[p, i] / m_excl
                new[p, i] = cand
                max_resid = max(max_resid, abs(lam[p, i] - cand) / cand)
        if max_resid <= tol:
            # lam itself satisfies the fixed-point equation to tol
            return lam
        lam = new
        if not np.all(np.isfinite(lam)) or lam.max() > 1e20 * lam0_max:
            raise InfeasibleTargetsError(
                "multiplier fixed point diverged; targets infeasible",
                detail={"iteration": it, "lambda_max": float(lam.max())})
    raise InfeasibleTargetsError(
        f"multiplier fixed point did not converge in {max_iter} iterations "
        f"(residual {max_resid:.3e})",
        detail={"residual": max_resid})


def dual_directions(channels, lam, topology):
    """Unnormalized dual precoder directions.

    what_ip = (N_T I + sum_{j != i} alpha_j h_jp h_jp^H)^{-1} h_ip, computed
    with one factorization per BS and a rank-1 downdate per served UE.
    Returns a dict {(p, i): vector}.
    """
    h = np.asarray(channels)
    n_tx = topology.n_tx
    alpha = _aggregate_lambda(lam, topology)
    what = {}
    for p in range(topology.n_bs):
        hp = h[:, p, :]
        a_p = n_tx * np.eye(n_tx, dtype=complex) + (hp.T * alpha) @ hp.conj()
        binv_h = np.linalg.solve(a_p, hp.T)
        for i in topology.serving_map[p]:
            bi = binv_h[:, i]
            m_i = float(np.vdot(h[i, p], bi).real)
            what[(p, i)] = bi / (1.0 - alpha[i] * m_i)
    return what


def coupling_matrix(channels, what, targets, topology, index: PairIndex | None = None):
    """Coupling matrix F over served pairs (BS-major flat indexing).

    Diagonal: |what_ip^H h_ip|^2 / gamma_ip. Off-diagonal against pair (q, j)
    with j in U_q \\ i: -|what_jq^H h_iq|^2. Structural zeros where the column
    pair serves the same UE from another BS.
    """
    h = np.asarray(channels)
    if index is None:
        index = make_pair_index(topology)
    n = len(index)
    f = np.zeros((n, n))
    for (p, i) in index.pairs:
        row = index.flat[(p, i)]
        for (q, j) in index.pairs:
            col = index.flat[(q, j)]
            if q == p and j == i:
                f[row, col] = abs(np.vdot(what[(p, i)], h[i, p])) ** 2 / targets[p, i]
            elif j != i:
                f[row, col] = -abs(np.vdot(what[(q, j)], h[i, q])) ** 2
    return f


def scaling_factors(coupling, sigma2, n_tx):
    """Solve F delta = N_T sigma^2 1; non-positive entries mean infeasible targets."""
    n = coupling.shape[0]
    rhs = n_tx * sigma2 * np.ones(n)
    try:
        delta = np.linalg.solve(coupling, rhs)
    except np.linalg.LinAlgError as exc:
        raise InfeasibleTargetsError("singular coupling matrix") from exc
    if np.any(delta <= 0.0):
        raise InfeasibleTargetsError(
            "non-positive scaling factor; targets infeasible under duality",
            detail={"delta_min": float(delta.min())})
    return delta


def centralized_precoders(what, delta, n_tx, index: PairIndex):
    """w_ip = sqrt(delta_ip / N_T) * what_ip. Returns {(p, i): vector}."""
    if np.any(np.asarray(delta) < 0.0):
        raise InfeasibleTargetsError("negative scaling factor")
    return {pair: np.sqrt(delta[index.flat[pair]] / n_tx) * what[pair]
            for pair in index.pairs}


def interference_terms(channels, what, delta, topology, index: PairIndex):
    """Exact inter-cell interference at the duality optimum.

    tau[(i, q)] for q serving i: cross-stream leakage from BS q toward its own
    UE i; eps[(i, q)] for q not serving i: total leakage from BS q toward UE i.
    """
    h = np.asarray(channels)
    n_tx = topology.n_tx
    tau, eps = {}, {}
    for q in range(topology.n_bs):
        served = topology.serving_map[q]
        for i in range(topology.n_ue):
            total = 0.0
            for j in served:
                if j == i:
                    continue
                total += (delta[index.flat[(q, j)]] / n_tx
                          * abs(np.vdot(h[i, q], what[(q, j)])) ** 2)
            if i in served:
                tau[(i, q)] = total
            else:
                eps[(i, q)] = total
    return tau, eps


@dataclass
class DualitySolution:
    lam: np.ndarray
    what: dict
    coupling: np.ndarray
    delta: np.ndarray
    precoders: dict
    tau: dict
    eps: dict
    index: PairIndex

    @property
    def total_power(self):
        return sum(float(np.vdot(w, w).real) for w in self.precoders.values())


def solve_centralized(channels, targets, topology, sigma2,
                      tol=1e-8, max_iter=500) -> DualitySolution:
    """Full duality pipeline: multipliers, directions, coupling, scalings,
    precoders and exact interference terms."""
    index = make_pair_index(topology)
    lam = solve_lambda_fixed_point(channels, targets, topology, tol, max_iter)
    what = dual_directions(channels, lam, topology)
    f = coupling_matrix(channels, what, targets, topology, index)
    delta = scaling_factors(f, sigma2, topology.n_tx)
    w = centralized_precoders(what, delta, topology.n_tx, index)
    tau, eps = interference_terms(channels, what, delta, topology, index)
    return DualitySolution(lam=lam, what=what, coupling=f, delta=delta,
                           precoders=w, tau=tau, eps=eps, index=index)

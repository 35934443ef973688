"""Covariance-only deterministic equivalents of the duality quantities.

Large-system approximations of the virtual-uplink multipliers, the coupling
matrix and the power scalings, computed from channel covariances alone. These
yield the approximated interference budgets (tau_bar, eps_bar) that each BS
can use without any instantaneous cross-BS channel knowledge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DEInfeasibleError, NumericalError
from .duality import PairIndex, make_pair_index

# Budget entries in (-NEG_CLAMP_REL * scale, 0) are roundoff and clamp to 0;
# anything more negative indicates an assembly bug.
NEG_CLAMP_REL = 1e-12


@dataclass
class DEState:
    m_bar: np.ndarray          # (n_ue, n_bs), all pairs
    lambda_bar: np.ndarray     # (n_bs, n_ue), zero at unserved pairs
    t_mat: list                # per-BS resolvent matrices T_q
    m_prime: list              # per-BS (n_ue, n_ue); [j, i] = mprime_{j,i,q}
    f_bar: np.ndarray = None   # DE coupling matrix over served pairs
    delta_bar: np.ndarray = None
    index: PairIndex = None
    tau_bar: dict = None       # (ue, serving bs) -> cross-stream budget
    eps_bar: dict = None       # (ue, non-serving bs) -> leakage budget


def _aggregate(lambda_bar, topology):
    alpha = np.zeros(topology.n_ue)
    for p in range(topology.n_bs):
        for i in topology.serving_map[p]:
            alpha[i] += lambda_bar[p, i]
    return alpha


def _m_sweep(theta, alpha, m_bar, n_tx):
    """One substitution sweep of the resolvent-moment equations."""
    n_ue, n_bs = theta.shape[0], theta.shape[1]
    out = np.empty_like(m_bar)
    for p in range(n_bs):
        d = n_tx * np.eye(n_tx, dtype=complex)
        for j in range(n_ue):
            w = alpha[j] / (1.0 + alpha[j] * m_bar[j, p])
            if w != 0.0:
                d = d + w * theta[j, p]
        inv = np.linalg.inv(d)
        for i in range(n_ue):
            out[i, p] = np.einsum("ab,ba->", theta[i, p], inv).real
    return out


def solve_de_fixed_point(covset, targets, topology, tol=1e-8, max_iter=1000):
    """Joint fixed point of the covariance-only moment/multiplier system.

    m_bar_ip = Tr(Theta_ip (sum_j alpha_j Theta_jp / (1 + alpha_j m_bar_jp)
    + N_T I)^{-1}) with lambda_bar_ip = gamma_ip / m_bar_ip maintained exactly
    at every iterate; plain substitution from the interference-free start
    m_bar = Tr(Theta)/N_T.
    """
    theta = np.asarray(covset)
    n_ue, n_bs, n_tx = theta.shape[0], theta.shape[1], theta.shape[2]

    m_bar = np.einsum("ipaa->ip", theta).real / n_tx
    lambda_bar = _lambda_from_m(m_bar, targets, topology)

    for _ in range(max_iter):
        alpha = _aggregate(lambda_bar, topology)
        m_new = _m_sweep(theta, alpha, m_bar, n_tx)
        served_pos = all(m_new[i, p] > 0.0
                         for p in range(n_bs) for i in topology.serving_map[p])
        if not served_pos:
            raise NumericalError("non-positive resolvent moment at a served pair")
        scale = np.maximum(np.abs(m_bar), np.abs(m_new))
        resid = float(np.max(np.abs(m_new - m_bar) / np.where(scale > 0, scale, 1.0)))
        if resid <= tol:
            return m_bar, lambda_bar
        m_bar = m_new
        lambda_bar = _lambda_from_m(m_bar, targets, topology)
    raise NumericalError(
        f"deterministic-equivalent fixed point did not converge in {max_iter} "
        f"iterations (residual {resid:.3e})")


def _lambda_from_m(m_bar, targets, topology):
    lam = np.zeros((topology.n_bs, topology.n_ue))
    for p in range(topology.n_bs):
        for i in topology.serving_map[p]:
            if m_bar[i, p] <= 0.0:
                raise NumericalError(
                    f"non-positive moment at served pair (bs={p}, ue={i})")
            lam[p, i] = targets[p, i] / m_bar[i, p]
    return lam


def de_resolvent_T(covset, m_bar, lambda_bar, topology, q):
    """Per-BS DE resolvent T_q = ((1/N_T) sum_k alpha_k Theta_kq /
    (1 + alpha_k m_bar_kq) + I)^{-1}; Hermitian PD with eigenvalues <= 1."""
    theta = np.asarray(covset)
    n_tx = topology.n_tx
    alpha = _aggregate(lambda_bar, topology)
    d = np.eye(n_tx, dtype=complex)
    for k in range(topology.n_ue):
        w = alpha[k] / (1.0 + alpha[k] * m_bar[k, q])
        if w != 0.0:
            d = d + (w / n_tx) * theta[k, q]
    return np.linalg.inv(d)


def _per_bs_derivatives(covset, m_bar, lambda_bar, topology, q, t_q):
    """Solve (I - L_q) m' = u_iq for all i at once.

    Returns the (n_ue, n_ue) matrix with [j, i] = mprime_{j,i,q}.
    """
    theta = np.asarray(covset)
    n_ue, n_tx = topology.n_ue, topology.n_tx
    alpha = _aggregate(lambda_bar, topology)

    # G[h, l] = Tr(Theta_hq T_q Theta_lq T_q), symmetric nonnegative
    prods = np.einsum("hab,bc->hac", theta[:, q, :, :], t_q)
    g = np.einsum("hab,lba->hl", prods, prods).real

    denom = (1.0 + alpha * m_bar[:, q]) ** 2
    l_q = g * (alpha ** 2 / denom)[None, :] / n_tx ** 2
    rad = float(np.max(np.abs(np.linalg.eigvals(l_q))))
    if rad >= 1.0:
        raise DEInfeasibleError(
            f"derivative system invalid at BS {q}: spectral radius {rad:.6f} >= 1",
            detail={"bs": q, "spectral_radius": rad})

    lu = scipy.linalg.lu_factor(np.eye(n_ue) - l_q)
    return scipy.linalg.lu_solve(lu, g / n_tx)


def de_coupling(covset, m_bar, lambda_bar, targets, topology,
                index: PairIndex | None = None):
    """Assemble the DE coupling matrix and the per-BS derivative tables.

    Returns (f_bar, t_mats, m_primes). Diagonal entries m_bar^2/gamma;
    cross entries -(1/N_T) mprime_{j,i,q} / (1 + alpha_i m_bar_iq)^2 with the
    same structural zeros as the exact coupling matrix.
    """
    if index is None:
        index = make_pair_index(topology)
    n_tx = topology.n_tx
    alpha = _aggregate(lambda_bar, topology)

    t_mats, m_primes = [], []
    for q in range(topology.n_bs):
        t_q = de_resolvent_T(covset, m_bar, lambda_bar, topology, q)
        t_mats.append(t_q)
        m_primes.append(_per_bs_derivatives(covset, m_bar, lambda_bar,
                                            topology, q, t_q))

    n = len(index)
    f_bar = np.zeros((n, n))
    for (p, i) in index.pairs:
        row = index.flat[(p, i)]
        for (q, j) in index.pairs:
            col = index.flat[(q, j)]
            if q == p and j == i:
                f_bar[row, col] = m_bar[i, p] ** 2 / targets[p, i]
            elif j != i:
                f_bar[row, col] = (-m_primes[q][j, i]
                                   / (n_tx * (1.0 + alpha[i] * m_bar[i, q]) ** 2))
    return f_bar, t_mats, m_primes


def de_scaling(f_bar, sigma2, n_tx):
    """Solve F_bar delta_bar = N_T sigma^2 1; positivity required."""
    rhs = n_tx * sigma2 * np.ones(f_bar.shape[0])
    try:
        delta_bar = np.linalg.solve(f_bar, rhs)
    except np.linalg.LinAlgError as exc:
        raise DEInfeasibleError("singular DE coupling matrix") from exc
    if np.any(delta_bar <= 0.0):
        raise DEInfeasibleError(
            "non-positive DE scaling factor; targets DE-infeasible",
            detail={"delta_bar_min": float(delta_bar.min())})
    return delta_bar


def de_interference(state: DEState, topology):
    """Approximated budgets from the DE coupling rows of each BS's own block.

    tau_bar[(i, q)] for q serving i, eps_bar[(i, q)] otherwise; the cross-row
    formula extends to UEs outside U_q. Tiny negative values clamp to zero.
    """
    n_tx = topology.n_tx
    alpha = _aggregate(state.lambda_bar, topology)
    tau_bar, eps_bar = {}, {}
    raw_scale = 0.0
    raw = {}
    for q in range(topology.n_bs):
        served = topology.serving_map[q]
        for i in range(topology.n_ue):
            total = 0.0
            denom_i = (1.0 + alpha[i] * state.m_bar[i, q]) ** 2
            for j in served:
                if j == i:
                    continue
                f_entry = -state.m_prime[q][j, i] / (n_tx * denom_i)
                total += -(state.delta_bar[state.index.flat[(q, j)]]
                           * f_entry / n_tx)
            raw[(i, q)] = total
            raw_scale = max(raw_scale, abs(total))
    floor = -NEG_CLAMP_REL * max(raw_scale, 1e-300)
    for (i, q), val in raw.items():
        if val < floor:
            raise DEInfeasibleError(
                f"materially negative DE budget at (ue={i}, bs={q}): {val:.3e}")
        val = max(val, 0.0)
        if i in topology.serving_map[q]:
            tau_bar[(i, q)] = val
        else:
            eps_bar[(i, q)] = val
    return tau_bar, eps_bar


def solve_de(covset, targets, topology, sigma2, tol=1e-8, max_iter=1000) -> DEState:
    """Full covariance-only pipeline: fixed point, coupling, scalings, budgets."""
    index = make_pair_index(topology)
    m_bar, lambda_bar = solve_de_fixed_point(covset, targets, topology, tol, max_iter)
    f_bar, t_mats, m_primes = de_coupling(covset, m_bar, lambda_bar, targets,
                                          topology, index)
    delta_bar = de_scaling(f_bar, sigma2, topology.n_tx)
    state = DEState(m_bar=m_bar, lambda_bar=lambda_bar, t_mat=t_mats,
                    m_prime=m_primes, f_bar=f_bar, delta_bar=delta_bar,
                    index=index)
    state.tau_bar, state.eps_bar = de_interference(state, topology)
    return state

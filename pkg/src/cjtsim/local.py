"""Per-BS power-minimization subproblem with fixed interference budgets.

Given SINR targets for its own UEs, leakage caps toward every UE, and the
interference constants contributed by the other BSs' caps, each BS solves a
small second-order cone program over its own precoders only. This is the
online step of the decentralized scheme; BSs can solve independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConfigError, NumericalError
from .socp import solve_socp


@dataclass
class LocalProblem:
    bs_index: int
    local_channels: np.ndarray      # (n_ue, n_tx), BS p's channels to all UEs
    served: tuple                   # UE indices in U_p
    targets: dict                   # ue -> gamma (linear)
    incoming: dict                  # ue -> c_i (budget constants + sigma2)
    tau_caps: dict                  # ue in U_p -> cap on cross-stream leakage
    eps_caps: dict                  # ue not in U_p -> cap on leakage
    sigma2: float


@dataclass
class LocalSolution:
    w: dict                         # ue -> precoder vector
    status: str                     # optimal | infeasible | max-iter
    objective: float
    kkt_gap: float
    iterations: int = 0
    cert_res: float = np.inf


def build_subproblem(channels, topology, p, targets, tau, eps, sigma2) -> LocalProblem:
    """Assemble BS p's subproblem from the global budget maps.

    tau[(i, q)] must exist for every served pair, eps[(i, q)] for every
    non-serving pair; c_i sums the caps of all other BSs toward UE i.
    """
    h = np.asarray(channels)
    served = topology.serving_map[p]
    gam, incoming, tau_caps, eps_caps = {}, {}, {}, {}
    try:
        for i in served:
            gam[i] = float(targets[p, i])
            c_i = sigma2
            for q in topology.coop_map[i]:
                if q != p:
                    c_i += tau[(i, q)]
            for q in range(topology.n_bs):
                if q not in topology.coop_map[i]:
                    c_i += eps[(i, q)]
            incoming[i] = c_i
            tau_caps[i] = tau[(i, p)]
        for i in range(topology.n_ue):
            if i not in served:
                eps_caps[i] = eps[(i, p)]
    except KeyError as exc:
        raise ConfigError(f"missing interference budget entry {exc}") from exc
    return LocalProblem(bs_index=p, local_channels=h[:, p, :].copy(),
                        served=tuple(served), targets=gam, incoming=incoming,
                        tau_caps=tau_caps, eps_caps=eps_caps, sigma2=sigma2)


def _inner_rows(hvec, n_tx, n_served, slot):
    """Real/imag coefficient rows of h^H w_slot over [Re w; Im w] blocks."""
    re = np.zeros(2 * n_tx * n_served)
    im = np.zeros(2 * n_tx * n_served)
    base = slot * 2 * n_tx
    re[base:base + n_tx] = hvec.real
    re[base + n_tx:base + 2 * n_tx] = hvec.imag
    im[base:base + n_tx] = -hvec.imag
    im[base + n_tx:base + 2 * n_tx] = hvec.real
    return re, im


def solve_subproblem(problem: LocalProblem, tol=1e-7, feas_tol=1e-8,
                     max_iter=100) -> LocalSolution:
    """Solve the subproblem with the embedded interior-point cone solver.

    The SINR constraints are rotated second-order cones (signal inner product
    made real nonnegative WLOG); leakage caps are norm bounds. Zero caps are
    eliminated exactly by restricting the precoders to the nullspace of the
    corresponding leakage rows.
    """
    h = problem.local_channels
    served = list(problem.served)
    k = len(served)
    n_tx = h.shape[1]
    nvar = 1 + 2 * n_tx * k       # [t, Re/Im precoder blocks]

    # scale channels for conditioning; the SINR/cap constraints are invariant
    # under (h, c, caps) -> (h/s, c/s^2, caps/s^2) and precoders are untouched
    norms2 = np.array([float(np.vdot(h[i], h[i]).real) for i in range(h.shape[0])])
    sc2 = float(np.mean(norms2[norms2 > 0])) if np.any(norms2 > 0) else 1.0
    hs = h / np.sqrt(sc2)

    slot = {i: a for a, i in enumerate(served)}
    c_obj = np.zeros(nvar)
    c_obj[0] = 1.0

    G_rows, h_vals, dims = [], [], []
    eq_rows = []

    # objective epigraph cone (t, all precoder coordinates)
    g = np.zeros((nvar, nvar))
    g[0, 0] = -1.0
    g[1:, 1:] = -np.eye(nvar - 1)
    G_rows.append(g)
    h_vals.append(np.zeros(nvar))
    dims.append(nvar)

    def leak_rows(i, exclude):
        rows = []
        for j in served:
            if j == exclude:
                continue
            re, im = _inner_rows(hs[i], n_tx, k, slot[j])
            rows.extend([re, im])
        return rows

    for i in served:
        gam = problem.targets[i]
        c_i = problem.incoming[i] / sc2
        re_sig, _ = _inner_rows(hs[i], n_tx, k, slot[i])
        cross = leak_rows(i, exclude=i)
        # SINR cone: Re(h_i^H w_i) >= sqrt(gam) * ||[cross, sqrt(c_i)]||
        m = 1 + len(cross) + 1
        g = np.zeros((m, nvar))
        hv = np.zeros(m)
        g[0, 1:] = -re_sig[:]
        g[0, 0] = 0.0
        for r, row in enumerate(cross, start=1):
            g[r, 1:] = -np.sqrt(gam) * row
        hv[-1] = np.sqrt(gam * c_i)
        G_rows.append(g)
        h_vals.append(hv)
        dims.append(m)

    def add_cap_cone(i, cap, exclude):
        rows = leak_rows(i, exclude)
        if not rows:
            return
        if cap <= 0.0:
            eq_rows.extend(rows)
            return
        m = 1 + len(rows)
        g = np.zeros((m, nvar))
        hv = np.zeros(m)
        hv[0] = np.sqrt(cap / sc2)
        for r, row in enumerate(rows, start=1):
            g[r, 1:] = -row
        G_rows.append(g)
        h_vals.append(hv)
        dims.append(m)

    for i in served:
        add_cap_cone(i, problem.tau_caps[i], exclude=i)
    for i, cap in problem.eps_caps.items():
        if float(np.vdot(hs[i], hs[i]).real) == 0.0:
            continue
        add_cap_cone(i, cap, exclude=None)

    G = np.vstack(G_rows)
    hvec = np.concatenate(h_vals)

    if eq_rows:
        E = np.zeros((len(eq_rows), nvar))
        for r, row in enumerate(eq_rows):
            E[r, 1:] = row
        Z = scipy.linalg.null_space(E)
        if Z.shape[1] == 0:
            return LocalSolution(w={}, status="infeasible", objective=np.inf,
                                 kkt_gap=np.inf)
        res = solve_socp(c_obj @ Z, G @ Z, hvec, dims,
                         feas_tol=feas_tol, gap_tol=tol, max_iter=max_iter)
        x = Z @ res.x if res.x is not None else None
    else:
        res = solve_socp(c_obj, G, hvec, dims,
                         feas_tol=feas_tol, gap_tol=tol, max_iter=max_iter)
        x = res.x

    if res.status != "optimal":
        return LocalSolution(w={}, status=res.status, objective=np.inf,
                             kkt_gap=res.gap, iterations=res.iterations,
                             cert_res=res.cert_res)

    w = {}
    for i in served:
        base = 1 + slot[i] * 2 * n_tx
        w[i] = x[base:base + n_tx] + 1j * x[base + n_tx:base + 2 * n_tx]
    objective = sum(float(np.vdot(v, v).real) for v in w.values())
    return LocalSolution(w=w, status="optimal", objective=objective,
                         kkt_gap=res.gap, iterations=res.iterations)


def dual_oracle_single_cell(problem: LocalProblem, tol=1e-10,
                            max_iter=20000) -> LocalSolution:
    """Independent verification path for cap-free subproblems.

    Classic power-minimization beamforming: virtual-uplink power fixed point,
    MMSE receive directions, then downlink powers from the SINR-equality
    linear system. Leakage caps are ignored and must be non-binding for the
    comparison against solve_subproblem to be meaningful.
    """
    served = list(problem.served)
    k = len(served)
    n_tx = problem.local_channels.shape[1]
    # fold the per-UE noise constants into the channels
    ht = np.stack([problem.local_channels[i] / np.sqrt(problem.incoming[i])
                   for i in served])
    gam = np.array([problem.targets[i] for i in served])

    q = gam / np.einsum("ij,ij->i", ht.conj(), ht).real
    q0_max = float(q.max())
    for _ in range(max_iter):
        b = np.eye(n_tx, dtype=complex) + (ht.T * q) @ ht.conj()
        binv_h = np.linalg.solve(b, ht.T)
        m_full = np.einsum("ij,ji->i", ht.conj(), binv_h).real
        excl = 1.0 - q * m_full
        if np.any(excl <= 0.0):
            return LocalSolution(w={}, status="infeasible", objective=np.inf,
                                 kkt_gap=np.inf)
        m_excl = m_full / excl
        q_new = gam / m_excl
        change = float(np.max(np.abs(q_new - q) / q_new))
        q = q_new
        if change <= tol:
            break
        if q.max() > 1e14 * max(1.0, q0_max):
            return LocalSolution(w={}, status="infeasible", objective=np.inf,
                                 kkt_gap=np.inf)
    else:
        raise NumericalError("single-cell dual oracle did not converge")

    b = np.eye(n_tx, dtype=complex) + (ht.T * q) @ ht.conj()
    u = np.linalg.solve(b, ht.T)
    u = u / np.linalg.norm(u, axis=0)
    gains = np.abs(ht.conj() @ u) ** 2          # gains[i, j] = |ht_i^H u_j|^2
    m = -gains.copy()
    np.fill_diagonal(m, np.diag(gains) / gam)
    try:
        p = np.linalg.solve(m, np.ones(k))
    except np.linalg.LinAlgError:
        return LocalSolution(w={}, status="infeasible", objective=np.inf,
                             kkt_gap=np.inf)
    if np.any(p <= 0.0):
        return LocalSolution(w={}, status="infeasible", objective=np.inf,
                             kkt_gap=np.inf)
    w = {i: np.sqrt(p[a]) * u[:, a] for a, i in enumerate(served)}
    objective = float(p.sum())
    return LocalSolution(w=w, status="optimal", objective=objective, kkt_gap=0.0)

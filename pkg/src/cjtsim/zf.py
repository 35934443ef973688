"""Centralized zero-forcing baseline and the target-extraction protocol.

Each BS zero-forces toward every UE with a nonzero channel from it (global
nulling, unit gain toward its own UEs), the whole precoder set is normalized
to a common total power, and the per-pair SINRs achieved by that normalized
ZF solution become the targets fed to the other schemes. This keeps all
schemes rate-matched on every realization.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError
from .metrics import sinr_per_pair


def zf_precoders(channels, topology):
    """Per-BS minimum-norm zero-forcing precoders.

    For served pair (p, i): h_ip^H w_ip = 1 and h_jp^H w_ip = 0 for every
    other UE j with a nonzero channel from p. Requires N_T >= number of
    constrained UEs at each BS.
    """
    h = np.asarray(channels)
    w = {}
    for p in range(topology.n_bs):
        hp = h[:, p, :]
        active = [j for j in range(topology.n_ue)
                  if float(np.vdot(hp[j], hp[j]).real) > 0.0]
        if any(i not in active for i in topology.serving_map[p]):
            raise NumericalError(f"BS {p} has a zero channel to a served UE")
        hmat = hp[active].T                      # (n_tx, n_active)
        gram = hmat.conj().T @ hmat
        try:
            # min-norm solution of H^H w = e_col: w = H (H^H H)^{-1} e_col
            coef = np.linalg.solve(gram, np.eye(len(active), dtype=complex))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"zero-forcing constraint system at BS {p} is rank-deficient "
                f"(n_tx={topology.n_tx}, constrained UEs={len(active)})") from exc
        cond = np.linalg.cond(gram)
        if not np.isfinite(cond) or cond > 1e12:
            raise NumericalError(
                f"zero-forcing constraint system at BS {p} is ill-conditioned")
        wall = hmat @ coef
        col = {j: a for a, j in enumerate(active)}
        for i in topology.serving_map[p]:
            w[(p, i)] = wall[:, col[i]]
    return w


def normalize_total_power(precoders, total_power):
    """Scale every precoder by one common scalar to hit the exact total."""
    if total_power <= 0.0:
        raise ValueError("total_power must be positive")
    current = sum(float(np.vdot(v, v).real) for v in precoders.values())
    if current <= 0.0:
        raise NumericalError("cannot normalize an all-zero precoder set")
    scale = np.sqrt(total_power / current)
    return {pair: scale * v for pair, v in precoders.items()}


def extract_targets(channels, precoders, sigma2, topology):
    """Per-pair SINR targets achieved by the (normalized) ZF precoders.

    Evaluates the per-link SINR exactly, including the residual (numerically
    tiny) zero-forcing leakage, so the ZF point itself meets every target
    with equality. Returns an (n_bs, n_ue) array, zero at unserved pairs.
    """
    return sinr_per_pair(channels, precoders, sigma2, topology)

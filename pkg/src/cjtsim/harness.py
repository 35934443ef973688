"""Monte Carlo harness: per-trial pipeline, antenna sweeps, exchange accounting.

One trial evaluates three schemes on the same channel realization and the
same ZF-derived SINR targets: the normalized ZF baseline, the centralized
duality optimum (lower bound), and the decentralized scheme that solves
per-BS cone programs against covariance-only interference budgets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import determ, duality, local, metrics, scenario, zf
from .config import ScenarioConfig
from .errors import DEInfeasibleError, InfeasibleTargetsError

SCHEMES = ("centralized", "decentralized", "zf")

CSV_HEADER = "n_tx,scheme,trials,mean_power_w,std_power_w,mean_gap_pct,infeasible_rate"

BYTES_PER_COMPLEX = 16


@dataclass
class TrialRecord:
    seed: int
    n_tx: int
    scheme: str
    total_power_w: float
    per_bs_power_w: list
    sinr_pair: np.ndarray
    sinr_orig: np.ndarray
    sum_rate_bps_hz: float
    feasible: bool
    solver_iters: int = 0


@dataclass
class ExchangeCost:
    scheme: str
    bytes_per_coherence_block: int
    bytes_per_stationarity_period: int
    blocks_per_period: int


def _record(scheme, seed_label, topology, channels, precoders, sigma2,
            feasible=True, iters=0):
    pair, orig, rate = metrics.evaluate_metrics(channels, precoders, sigma2, topology)
    return TrialRecord(
        seed=seed_label, n_tx=topology.n_tx, scheme=scheme,
        total_power_w=metrics.total_power(precoders),
        per_bs_power_w=list(metrics.per_bs_power(precoders, topology)),
        sinr_pair=pair, sinr_orig=orig, sum_rate_bps_hz=rate,
        feasible=feasible, solver_iters=iters)


def _infeasible_record(scheme, seed_label, n_tx):
    return TrialRecord(seed=seed_label, n_tx=n_tx, scheme=scheme,
                       total_power_w=np.nan, per_bs_power_w=[],
                       sinr_pair=None, sinr_orig=None,
                       sum_rate_bps_hz=np.nan, feasible=False)


def run_trial(config: ScenarioConfig, seed, n_tx=None):
    """Run all three schemes on one realization; returns three TrialRecords.

    The same seed always reproduces the same records. Infeasibility of a
    scheme is recorded, not raised.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seed_label = int(ss.entropy) if np.isscalar(ss.entropy) else -1
    cov_ss, fade_ss = ss.spawn(2)

    n_tx = n_tx if n_tx is not None else config.n_tx
    topo = scenario.build_topology(config.n_bs, n_tx, config.n_ue,
                                   config.serving_pattern)
    theta = scenario.synth_covariances(topo, config.channel, cov_ss)
    h = scenario.draw_channels(theta, fade_ss)
    noise = scenario.calibrate_noise(h, topo, config.snr_db)
    sigma2 = noise.sigma2

    w_zf = zf.normalize_total_power(zf.zf_precoders(h, topo),
                                    config.zf_total_power_w)
    targets = zf.extract_targets(h, w_zf, sigma2, topo)

    records = [_record("zf", seed_label, topo, h, w_zf, sigma2)]

    try:
        central = duality.solve_centralized(h, targets, topo, sigma2)
        records.append(_record("centralized", seed_label, topo, h,
                               central.precoders, sigma2))
    except InfeasibleTargetsError:
        records.append(_infeasible_record("centralized", seed_label, n_tx))

    try:
        de_state = determ.solve_de(theta, targets, topo, sigma2)
        w_dec, iters = {}, 0
        feasible = True
        for p in range(topo.n_bs):
            prob = local.build_subproblem(h, topo, p, targets,
                                          de_state.tau_bar, de_state.eps_bar,
                                          sigma2)
            sol = local.solve_subproblem(prob)
            iters += sol.iterations
            if sol.status != "optimal":
                feasible = False
                break
            for i, v in sol.w.items():
                w_dec[(p, i)] = v
        if feasible:
            records.append(_record("decentralized", seed_label, topo, h,
                                   w_dec, sigma2, iters=iters))
        else:
            records.append(_infeasible_record("decentralized", seed_label, n_tx))
    except DEInfeasibleError:
        records.append(_infeasible_record("decentralized", seed_label, n_tx))

    order = {s: k for k, s in enumerate(SCHEMES)}
    records.sort(key=lambda r: order[r.scheme])
    return records


def _fmt(x):
    return f"{x:.17g}"


@dataclass
class SweepRow:
    n_tx: int
    scheme: str
    trials: int
    mean_power_w: float
    std_power_w: float
    mean_gap_pct: float
    infeasible_rate: float

    def csv(self):
        return ",".join([str(self.n_tx), self.scheme, str(self.trials),
                         _fmt(self.mean_power_w), _fmt(self.std_power_w),
                         _fmt(self.mean_gap_pct), _fmt(self.infeasible_rate)])


def sweep_antennas(config: ScenarioConfig, n_tx_list, n_trials, seed):
    """Power comparison across antenna counts; returns a list of SweepRows.

    Trials where any scheme is infeasible are excluded from the power means
    but counted in the per-scheme infeasible rate. Per-trial seeds derive
    deterministically from (seed, n_tx, trial).
    """
    rows = []
    for n_tx in sorted(set(int(v) for v in n_tx_list)):
        powers = {s: [] for s in SCHEMES}
        infeas = {s: 0 for s in SCHEMES}
        for t in range(n_trials):
            trial_ss = np.random.SeedSequence(entropy=int(seed),
                                              spawn_key=(n_tx, t))
            recs = {r.scheme: r for r in run_trial(config, trial_ss, n_tx=n_tx)}
            for s in SCHEMES:
                if not recs[s].feasible:
                    infeas[s] += 1
            if all(recs[s].feasible for s in SCHEMES):
                for s in SCHEMES:
                    powers[s].append(recs[s].total_power_w)
        included = len(powers["centralized"])
        for s in SCHEMES:
            vals = np.array(powers[s])
            cen = np.array(powers["centralized"])
            if included > 0:
                mean_p = float(vals.mean())
                std_p = float(vals.std(ddof=1)) if included > 1 else 0.0
                gap = float(np.mean(100.0 * (vals - cen) / cen))
            else:
                mean_p = std_p = gap = np.nan
            rows.append(SweepRow(n_tx=n_tx, scheme=s, trials=included,
                                 mean_power_w=mean_p, std_power_w=std_p,
                                 mean_gap_pct=gap,
                                 infeasible_rate=infeas[s] / n_trials))
    return rows


def sweep_csv(rows):
    return "\n".join([CSV_HEADER] + [r.csv() for r in rows]) + "\n"


def exchange_cost(topology, scheme, blocks_per_period) -> ExchangeCost:
    """Per-BS information-exchange accounting.

    Centralized precoding ships every instantaneous channel vector each
    coherence block; the decentralized scheme ships Hermitian covariance
    matrices (upper triangle) once per stationarity period.
    """
    if blocks_per_period < 1:
        raise ValueError("blocks_per_period must be >= 1")
    n_c, n_t = topology.n_ue, topology.n_tx
    if scheme == "centralized":
        per_block = n_c * n_t * BYTES_PER_COMPLEX
        per_period = per_block * blocks_per_period
    elif scheme == "decentralized":
        per_block = 0
        per_period = n_c * (n_t * (n_t + 1) // 2) * BYTES_PER_COMPLEX
    else:
        raise ValueError(f"no exchange model for scheme '{scheme}'")
    return ExchangeCost(scheme=scheme, bytes_per_coherence_block=per_block,
                        bytes_per_stationarity_period=per_period,
                        blocks_per_period=blocks_per_period)

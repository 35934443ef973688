"""Coordinated multi-point joint-transmission precoding simulator.

Centralized duality-based optimal precoding, a covariance-only decentralized
scheme built on deterministic equivalents of the interference terms, a
zero-forcing baseline, and a Monte Carlo comparison harness.
"""

from .config import ScenarioConfig, config_from_dict, load_config
from .determ import DEState, solve_de, solve_de_fixed_point
from .duality import DualitySolution, solve_centralized
from .errors import (CjtsimError, ConfigError, DEInfeasibleError,
                     InfeasibleTargetsError, NumericalError)
from .harness import exchange_cost, run_trial, sweep_antennas, sweep_csv
from .local import (LocalProblem, LocalSolution, build_subproblem,
                    dual_oracle_single_cell, solve_subproblem)
from .metrics import evaluate_metrics, sinr_coherent, sinr_per_pair, total_power
from .scenario import (ChannelModel, NoiseSpec, Topology, build_topology,
                       calibrate_noise, draw_channels, hermitian_sqrt,
                       synth_covariances)
from .zf import extract_targets, normalize_total_power, zf_precoders

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"

"""Path-interference minimization for RIS-aided bistatic sensing systems.

Joint optimization of a unit-modulus space-time analog beamformer, RIS phase
shifts (manifold conjugate gradient) and the transmit statistical covariance
(small SDP) under communication-SNR and sensing-SNDR constraints, plus a
seeded Monte Carlo benchmark harness.
"""

from .bccd import BccdConfig, BccdIteration, BccdResult, bccd_solve, init_rss
from .bench import (Method, SweepSpec, TrialRecord, run_sweep, run_trial,
                    trial_seed, write_records_csv)
from .linalg import EvdResult, hermitian_evd, kron_identity_apply, psd_project
from .metrics import (PowerBreakdown, adc_power, adc_snr, comm_snr,
                      dynamic_range, power_breakdown, power_noise,
                      power_quadratic, sndr)
from .rcg import (BeamformerState, PrecomputedForms, RcgConfig, RcgResult,
                  euclid_grad, line_search, objective, precompute_forms,
                  random_state, rcg_solve, retract, riem_grad, transport)
from .scenario import (ChannelSet, RisSpec, ScenarioConfig, db_to_linear,
                       dbm_to_watt, desk_bench_scenario, desk_scenario,
                       generate_channels, higher_order_gain, linear_to_db,
                       load_config, pathloss_direct, pathloss_reflected,
                       ris_rcs, save_config, watt_to_dbm)
from .sdp import (SdpProblem, SdpSolution, TransmitCovariance, assemble_p2,
                  solve_sdp)
from .selfcheck import CheckReport, self_check
from .sysmodel import (EffectiveChannels, build_comm_channel,
                       build_effective_channels, build_obstacle_channel,
                       build_pi_channel, build_sensing_channel)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

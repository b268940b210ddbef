"""LDPC belief-propagation decoding with informed dynamic schedules,
Gaussian-approximation density evolution, and a seeded Monte Carlo harness.
"""

from .channel import (ChannelConfig, Frame, ebn0_to_sigma, frame_rng,
                      generate_frame, init_llrs, make_channel_config,
                      modulate, transmit)
from .codes import (BaseGraph, CodeError, CodeSpec, ParityCheckMatrix,
                    TannerGraph, apply_puncture, build_tanner, graph_stats,
                    lift_base_graph, load_code, load_manifest,
                    make_random_regular_code, parse_alist, parse_base_graph,
                    serialize_alist, syndrome_ok)
from .gade import (EnsembleSpec, GaDeState, density_p0, f_gamma,
                   ga_de_step, ga_de_trajectory, j_gamma, phi, phi_inv,
                   pr_d_ge_gamma_given_p0, verify_properties)
from .kernels import (Counters, DecoderState, bsgn, c2v_message,
                      conditional_innovation, posterior_p0, residual)
from .schedules import DecodeResult, ScheduleConfig, decode, select_vns
from .sim import (Campaign, SimRecord, estimate_kappa, mc_j_gamma,
                  report_counters, run_convergence, run_fer_sweep)

__all__ = [name for name in dir() if not name.startswith("_")]

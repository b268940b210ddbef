"""Decoding schedules: flooding plus the residual- and innovation-driven
dynamic orders, including the multi-edge group-selected variants.

Every decoder is deterministic given (code, channel LLRs, config): argmax
ties break toward the lowest index and the only randomness (multi-edge group
fill) comes from config.selection_seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _engine
from .codes import CodeSpec, build_tanner
from .kernels import KERNELS, Counters

SCHEDULE_KINDS = ("flooding", "rbp", "cirbp", "lmdrbp", "slmdrbp",
                  "lmd_cirbp", "me_cirbp", "me_lmd_cirbp")


@dataclass(frozen=True)
class ScheduleConfig:
    kind: str
    gamma: float = 0.1
    n_p: int = 1
    n_g: int = 16
    i_max: int = 3
    kernel: str = "exact"
    selection_seed: int = 0

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.n_p < 1 or self.n_g < 1:
            raise ValueError("n_p and n_g must be >= 1")
        if self.i_max < 0:
            raise ValueError("i_max must be >= 0")
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")


@dataclass
class DecodeResult:
    u_hat: np.ndarray
    converged: bool
    iterations_used: Fraction
    counters: Counters
    bit_errors_at: np.ndarray        # per boundary 0..i_max, over all N VNs
    info_bit_errors_at: np.ndarray   # same, restricted to info positions
    kappa_hits_iter: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    kappa_trials_iter: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    trace_llrs: np.ndarray | None = None  # (i_max+1, 2N): totals then pre-totals


def select_vns(ci_values, n_g, n_p, seed, search_set=None):
    """Group-quantized VN selection.

    CI values are quantized into n_g uniform groups; whole top groups are
    taken while they fit in n_p, then the remainder is drawn uniformly at
    random (seeded) from the next group down. Returns (sorted indices,
    comparison count).
    """
    ci_values = np.asarray(ci_values, dtype=np.float64)
    mask = np.zeros(len(ci_values), dtype=np.int8)
    if search_set is None:
        mask[:] = 1
    else:
        mask[np.asarray(list(search_set), dtype=np.int64)] = 1
    if mask.sum() < n_p:
        raise ValueError("search set smaller than n_p")
    out = np.empty(n_p, dtype=np.int64)
    state = np.array([np.int64(np.uint64(seed).astype(np.int64))], dtype=np.int64)
    count = _engine._select_vns(ci_values, mask, n_g, n_p, state, out)
    return out[:count].copy(), n_g


def _decode_arrays(code, graph, channel_llrs, config, want_trace):
    g = graph
    n_edges = len(g.edge_cn)
    kernel = KERNELS[config.kernel]
    chl = np.asarray(channel_llrs, dtype=np.float64)
    if len(chl) != g.n_vars:
        raise ValueError("channel LLR length mismatch")
    c2v = np.zeros(n_edges)
    v2c = np.zeros(n_edges)
    pre_c2v = np.zeros(n_edges)
    res = np.zeros(n_edges)
    total = np.zeros(g.n_vars)
    pre_total = np.zeros(g.n_vars)
    ci = np.zeros(g.n_vars)
    counters = np.zeros(_engine.N_COUNTERS, dtype=np.int64)
    biterr = np.zeros(config.i_max + 1, dtype=np.int64)
    biterr_info = np.zeros(config.i_max + 1, dtype=np.int64)
    if want_trace:
        trace = np.zeros((config.i_max + 1, 2 * g.n_vars))
    else:
        trace = np.zeros((0, 0))
    k_info = code.k_info
    args = (g.edge_cn, g.edge_vn, g.cn_ptr, g.vn_ptr, g.vn_edges, chl,
            kernel, config.i_max, k_info)
    state = (c2v, v2c, pre_c2v, res, total, pre_total, ci,
             counters, biterr, biterr_info, trace)
    return args, state, total, counters, biterr, biterr_info, trace


def decode(code: CodeSpec, channel_llrs, config: ScheduleConfig,
           graph=None, want_trace=False) -> DecodeResult:
    """Run one frame through the configured schedule."""
    if graph is None:
        graph = build_tanner(code.h)
    args, state, total, counters, biterr, biterr_info, trace = \
        _decode_arrays(code, graph, channel_llrs, config, want_trace)
    n_edges = len(graph.edge_cn)
    kappa_hits_iter = np.zeros(0, dtype=np.int64)
    kappa_trials_iter = np.zeros(0, dtype=np.int64)
    if config.kind == "flooding":
        prop, converged = _engine._decode_flooding(*args, *state)
    elif config.kind == "rbp":
        prop, converged = _engine._decode_rbp(*args, *state)
    elif config.kind == "cirbp":
        kappa_hits_iter = np.zeros(config.i_max, dtype=np.int64)
        kappa_trials_iter = np.zeros(config.i_max, dtype=np.int64)
        prop, converged = _engine._decode_cirbp(
            *args, config.gamma, *state, kappa_hits_iter, kappa_trials_iter)
    elif config.kind in ("lmdrbp", "slmdrbp"):
        prop, converged = _engine._decode_lmdrbp(
            *args, config.kind == "slmdrbp", *state)
    elif config.kind == "lmd_cirbp":
        prop, converged = _engine._decode_lmd_cirbp(*args, *state)
    elif config.kind in ("me_cirbp", "me_lmd_cirbp"):
        if config.n_p > graph.n_vars:
            raise ValueError("n_p exceeds the number of variable nodes")
        seed = int(np.uint64(config.selection_seed).astype(np.int64))
        fn = (_engine._decode_me_cirbp if config.kind == "me_cirbp"
              else _engine._decode_me_lmd_cirbp)
        prop, converged = fn(*args, config.n_p, config.n_g, seed, *state)
    else:
        raise ValueError(f"unknown schedule kind {config.kind!r}")
    if config.i_max == 0:
        converged = bool(_engine._syndrome_ok(total, graph.edge_cn,
                                              graph.edge_vn, graph.n_checks))
    u_hat = (total < 0).astype(np.int8)
    return DecodeResult(
        u_hat=u_hat,
        converged=bool(converged),
        iterations_used=Fraction(int(prop), n_edges),
        counters=Counters.from_array(counters),
        bit_errors_at=biterr,
        info_bit_errors_at=biterr_info,
        kappa_hits_iter=kappa_hits_iter,
        kappa_trials_iter=kappa_trials_iter,
        trace_llrs=trace if want_trace else None,
    )


def decode_flooding(code, channel_llrs, config, **kw):
    assert config.kind == "flooding"
    return decode(code, channel_llrs, config, **kw)


def decode_rbp(code, channel_llrs, config, **kw):
    assert config.kind == "rbp"
    return decode(code, channel_llrs, config, **kw)


def decode_cirbp(code, channel_llrs, config, **kw):
    assert config.kind == "cirbp"
    return decode(code, channel_llrs, config, **kw)


def decode_lmdrbp(code, channel_llrs, config, **kw):
    assert config.kind in ("lmdrbp", "slmdrbp")
    return decode(code, channel_llrs, config, **kw)


def decode_lmd_cirbp(code, channel_llrs, config, **kw):
    assert config.kind == "lmd_cirbp"
    return decode(code, channel_llrs, config, **kw)


def decode_me_cirbp(code, channel_llrs, config, **kw):
    assert config.kind == "me_cirbp"
    return decode(code, channel_llrs, config, **kw)


def decode_me_lmd_cirbp(code, channel_llrs, config, **kw):
    assert config.kind == "me_lmd_cirbp"
    return decode(code, channel_llrs, config, **kw)

"""Message arithmetic and decoder state.

Holds the per-edge message arrays (current, precomputed, residual) and the
per-VN totals and conditional innovation values, with incremental maintenance
mirroring the accounting used by the dynamic schedules. A full-recompute
audit path exists for consistency checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _engine
from .codes import TannerGraph

LLR_MAX = _engine.LLR_MAX

KERNELS = {"exact": _engine.KERNEL_EXACT, "minsum": _engine.KERNEL_MINSUM}


@dataclass
class Counters:
    c2v_propagations: int = 0
    v2c_updates: int = 0
    c2v_pre_updates: int = 0
    ci_updates: int = 0
    residual_ci_comparisons: int = 0
    multi_select_comparisons: int = 0
    kappa_hits: int = 0
    kappa_trials: int = 0

    @classmethod
    def from_array(cls, a):
        return cls(c2v_propagations=int(a[_engine.C_PROP]),
                   v2c_updates=int(a[_engine.C_V2C]),
                   c2v_pre_updates=int(a[_engine.C_PRE]),
                   ci_updates=int(a[_engine.C_CI]),
                   residual_ci_comparisons=int(a[_engine.C_CMP]),
                   multi_select_comparisons=int(a[_engine.C_MSEL]),
                   kappa_hits=int(a[_engine.C_KHITS]),
                   kappa_trials=int(a[_engine.C_KTRIALS]))

    def as_dict(self):
        return {
            "c2v_propagations": self.c2v_propagations,
            "v2c_updates": self.v2c_updates,
            "c2v_pre_updates": self.c2v_pre_updates,
            "ci_updates": self.ci_updates,
            "residual_ci_comparisons": self.residual_ci_comparisons,
            "multi_select_comparisons": self.multi_select_comparisons,
            "kappa_hits": self.kappa_hits,
            "kappa_trials": self.kappa_trials,
        }


def bsgn(a):
    """Hard decision: 0 for a >= 0, else 1."""
    return 0 if a >= 0 else 1


def posterior_p0(llr):
    """Pr(bit = 0 | L) = exp(L) / (1 + exp(L)), overflow-safe."""
    if llr >= 0:
        return 1.0 / (1.0 + np.exp(-llr))
    e = np.exp(llr)
    return e / (1.0 + e)


def conditional_innovation(total_llr, pre_total_llr):
    """|p0(L) - p0(L_pre)|, the posterior shift an update would cause."""
    return abs(posterior_p0(total_llr) - posterior_p0(pre_total_llr))


def residual(old_c2v, new_c2v):
    return abs(new_c2v - old_c2v)


def c2v_message(incoming, kernel="exact"):
    """Check-node rule over the incoming V2C values (target edge excluded)."""
    vals = np.clip(np.asarray(incoming, dtype=np.float64), -LLR_MAX, LLR_MAX)
    if vals.size == 0:
        raise ValueError("check node message needs at least one input")
    if kernel == "exact":
        prod = np.prod(np.tanh(0.5 * vals))
        prod = min(max(prod, -_engine.ATANH_CLIP), _engine.ATANH_CLIP)
        out = 2.0 * np.arctanh(prod)
    elif kernel == "minsum":
        out = np.prod(np.sign(vals + 0.0) + (vals == 0)) * np.min(np.abs(vals))
        if np.any(vals == 0):
            out = 0.0
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    return float(np.clip(out, -LLR_MAX, LLR_MAX))


@dataclass
class DecoderState:
    graph: TannerGraph
    channel_llrs: np.ndarray
    kernel: str = "exact"
    maintain_ci: bool = True
    c2v: np.ndarray = field(init=False)
    v2c: np.ndarray = field(init=False)
    pre_c2v: np.ndarray = field(init=False)
    residual: np.ndarray = field(init=False)
    total_llr: np.ndarray = field(init=False)
    pre_total_llr: np.ndarray = field(init=False)
    ci: np.ndarray = field(init=False)
    counters: Counters = field(init=False)
    _raw_counters: np.ndarray = field(init=False)

    def __post_init__(self):
        g = self.graph
        if len(self.channel_llrs) != g.n_vars:
            raise ValueError("channel LLR length mismatch")
        e = len(g.edge_cn)
        self.channel_llrs = np.asarray(self.channel_llrs, dtype=np.float64)
        self.c2v = np.zeros(e)
        self.v2c = np.zeros(e)
        self.pre_c2v = np.zeros(e)
        self.residual = np.zeros(e)
        self.total_llr = np.zeros(g.n_vars)
        self.pre_total_llr = np.zeros(g.n_vars)
        self.ci = np.zeros(g.n_vars)
        self._raw_counters = np.zeros(_engine.N_COUNTERS, dtype=np.int64)
        self.counters = Counters()
        self._tanh_half_v2c = np.empty(e)
        _engine._init_state(self.channel_llrs, g.edge_vn, g.cn_ptr, g.vn_ptr,
                            g.vn_edges, KERNELS[self.kernel],
                            self.c2v, self.v2c, self.pre_c2v, self.residual,
                            self.total_llr, self.pre_total_llr, self.ci,
                            self._tanh_half_v2c)

    def v2c_message(self, edge):
        """Eq.-style V2C value for one edge from the current totals."""
        n = self.graph.edge_vn[edge]
        s = self.channel_llrs[n]
        for _, f in self.graph.vn_neighbors(n):
            if f != edge:
                s += self.c2v[f]
        return float(np.clip(s, -LLR_MAX, LLR_MAX))

    def propagate(self, edge):
        """Forward pre_c2v[edge] and refresh the two-hop neighborhood."""
        g = self.graph
        no_tree = np.zeros(1)
        _engine._propagate(edge, g.edge_cn, g.edge_vn, g.cn_ptr, g.vn_ptr,
                           g.vn_edges, KERNELS[self.kernel],
                           self.channel_llrs, self.c2v, self.v2c,
                           self.pre_c2v, self.residual, self.total_llr,
                           self.pre_total_llr, self.ci, self._raw_counters,
                           self.maintain_ci, no_tree, 0, no_tree, 0,
                           self._tanh_half_v2c)
        self.counters = Counters.from_array(self._raw_counters)

    def hard_decision(self):
        return (self.total_llr < 0).astype(np.int8)

    def recompute_all(self):
        """Audit: rebuild every derived quantity from the message arrays.

        Returns (residual, total_llr, pre_total_llr, ci) arrays computed from
        scratch without touching the incremental state.
        """
        g = self.graph
        pre = np.zeros(len(g.edge_cn))
        for m in range(g.n_checks):
            edges = [e for _, e in g.cn_neighbors(m)]
            for e in edges:
                others = [self.v2c[f] for f in edges if f != e]
                pre[e] = c2v_message(others, self.kernel)
        res = np.abs(pre - self.c2v)
        total = self.channel_llrs.copy()
        np.add.at(total, g.edge_vn, self.c2v)
        pre_total = self.channel_llrs.copy()
        np.add.at(pre_total, g.edge_vn, pre)
        ci = np.array([conditional_innovation(total[n], pre_total[n])
                       for n in range(g.n_vars)])
        return res, total, pre_total, ci

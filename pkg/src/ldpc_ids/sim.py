"""Seeded Monte Carlo harness: FER/BER sweeps, convergence traces, kappa
estimation, empirical J(gamma), and complexity-counter reports.

Frames are drawn from per-frame substreams keyed by (master seed, frame
index) and processed in fixed-size blocks; stopping decisions happen at
block boundaries and aggregation runs in block order, so results do not
depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from importlib import metadata as _metadata

import numpy as np

from . import _engine
from .channel import RNG_NAME, generate_frame, make_channel_config
from .codes import CodeSpec, build_tanner, load_code
from .kernels import Counters, posterior_p0
from .schedules import ScheduleConfig, decode

BLOCK_SIZE = 256

try:
    _VERSION = _metadata.version("artifact")
except _metadata.PackageNotFoundError:
    _VERSION = "unknown"


@dataclass
class Campaign:
    code: object                       # name, manifest path, or CodeSpec
    schedules: list
    snr_grid: list
    min_frame_errors: int = 100
    max_frames: int = 10 ** 6
    master_seed: int = 0
    workers: int = 1
    out_path: str | None = None
    out_format: str = "csv"

    def __post_init__(self):
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be >= 1")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if not self.snr_grid:
            raise ValueError("snr grid must be non-empty")
        if not self.schedules:
            raise ValueError("at least one schedule is required")


@dataclass
class SimRecord:
    code: str
    schedule: str
    gamma: float
    n_p: int
    n_g: int
    kernel: str
    snr_db: float
    i_max: int
    seed: int
    frames: int
    frame_errors: int
    bit_errors: int
    info_bits: int
    fer: float
    ber: float
    fer_ci95: float
    mean_iterations: float
    kappa: float | None
    counters: Counters
    kappa_per_iteration: list = field(default_factory=list)
    frame_errors_at: list = field(default_factory=list)
    bit_errors_at: list = field(default_factory=list)
    wall_clock_s: float = 0.0

    CSV_COLUMNS = ("code", "schedule", "gamma", "n_p", "n_g", "kernel",
                   "snr_db", "i_max", "seed", "frames", "frame_errors",
                   "bit_errors", "info_bits", "fer", "ber", "fer_ci95",
                   "mean_iterations", "kappa", "c2v_propagations",
                   "v2c_updates", "c2v_pre_updates", "ci_updates",
                   "residual_ci_comparisons", "multi_select_comparisons",
                   "kappa_hits", "kappa_trials")

    def csv_row(self):
        # wall clock deliberately excluded: CSV bodies are reproducible
        d = {k: getattr(self, k) for k in self.CSV_COLUMNS
             if not hasattr(self.counters, k)}
        d.update(self.counters.as_dict())
        return {k: _fmt(d[k]) for k in self.CSV_COLUMNS}

    def json_obj(self):
        d = asdict(self)
        d["counters"] = self.counters.as_dict()
        return d


def _fmt(v):
    if v is None:
        return "nan"
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


# ---------------------------------------------------------------------------
# worker-side state and block simulation

_WORK = {}


def _worker_init(code):
    _WORK["code"] = code
    _WORK["graph"] = build_tanner(code.h)


def _sim_block(task):
    config, ebn0_db, seed, start, count, want_trace, gamma_grid = task
    code = _WORK["code"]
    graph = _WORK["graph"]
    chan = make_channel_config(ebn0_db, code, seed)
    i_max = config.i_max
    out = {
        "frames": count,
        "frame_errors": 0,
        "bit_errors": 0,
        "converged": 0,
        "propagations": 0,
        "counters": np.zeros(_engine.N_COUNTERS, dtype=np.int64),
        "frame_errors_at": np.zeros(i_max + 1, dtype=np.int64),
        "bit_errors_at": np.zeros(i_max + 1, dtype=np.int64),
        "kappa_hits_iter": np.zeros(max(i_max, 1), dtype=np.int64),
        "kappa_trials_iter": np.zeros(max(i_max, 1), dtype=np.int64),
    }
    if gamma_grid is not None:
        # counts[k, gi, 0] = correct & D >= gamma, [.., 1] = wrong & D >= gamma
        out["j_counts"] = np.zeros((i_max + 1, len(gamma_grid), 2),
                                   dtype=np.int64)
    for idx in range(start, start + count):
        frame = generate_frame(code, chan, idx)
        res = decode(code, frame.channel_llrs, config, graph=graph,
                     want_trace=want_trace)
        final_err = int(res.bit_errors_at[i_max])
        if final_err > 0:
            out["frame_errors"] += 1
        out["bit_errors"] += int(res.info_bit_errors_at[i_max])
        out["converged"] += int(res.converged)
        out["propagations"] += res.counters.c2v_propagations
        out["counters"] += np.array([
            res.counters.c2v_propagations, res.counters.v2c_updates,
            res.counters.c2v_pre_updates, res.counters.ci_updates,
            res.counters.residual_ci_comparisons,
            res.counters.multi_select_comparisons,
            res.counters.kappa_hits, res.counters.kappa_trials],
            dtype=np.int64)
        out["frame_errors_at"] += (res.bit_errors_at > 0).astype(np.int64)
        out["bit_errors_at"] += res.info_bit_errors_at
        if len(res.kappa_hits_iter):
            out["kappa_hits_iter"][:len(res.kappa_hits_iter)] += \
                res.kappa_hits_iter
            out["kappa_trials_iter"][:len(res.kappa_trials_iter)] += \
                res.kappa_trials_iter
        if gamma_grid is not None:
            n = graph.n_vars
            for k in range(i_max + 1):
                totals = res.trace_llrs[k, :n]
                pres = res.trace_llrs[k, n:]
                p0 = _p0_vec(totals)
                d = np.abs(p0 - _p0_vec(pres))
                correct = totals >= 0
                for gi, gamma in enumerate(gamma_grid):
                    sel = d >= gamma
                    out["j_counts"][k, gi, 0] += int(np.sum(sel & correct))
                    out["j_counts"][k, gi, 1] += int(np.sum(sel & ~correct))
    return out


def _p0_vec(llrs):
    out = np.empty(len(llrs))
    pos = llrs >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-llrs[pos]))
    e = np.exp(llrs[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _merge(acc, blk):
    for k, v in blk.items():
        if k not in acc:
            acc[k] = v.copy() if isinstance(v, np.ndarray) else v
        elif isinstance(v, np.ndarray):
            acc[k] += v
        else:
            acc[k] += v
    return acc


def _run_cell(code, config, ebn0_db, master_seed, min_frame_errors,
              max_frames, workers, want_trace=False, gamma_grid=None,
              fixed_frames=None):
    """Simulate one (schedule, snr) cell in deterministic blocks."""
    max_blocks = -(-max_frames // BLOCK_SIZE)
    if fixed_frames is not None:
        max_blocks = -(-fixed_frames // BLOCK_SIZE)
        min_frame_errors = None

    def tasks():
        for b in range(max_blocks):
            start = b * BLOCK_SIZE
            count = BLOCK_SIZE
            if fixed_frames is not None:
                count = min(count, fixed_frames - start)
            yield (config, ebn0_db, master_seed, start, count,
                   want_trace or gamma_grid is not None, gamma_grid)

    acc = {}
    if workers <= 1:
        _worker_init(code)
        for task in tasks():
            acc = _merge(acc, _sim_block(task))
            if min_frame_errors is not None and \
                    acc["frame_errors"] >= min_frame_errors:
                break
    else:
        # windowed submission, aggregation strictly in block order: the
        # stopping decision sees the same prefix regardless of worker count
        with ProcessPoolExecutor(max_workers=workers,
                                 initializer=_worker_init,
                                 initargs=(code,)) as pool:
            pending = deque()
            task_iter = tasks()
            stopped = False
            while True:
                while not stopped and len(pending) < 2 * workers:
                    task = next(task_iter, None)
                    if task is None:
                        break
                    pending.append(pool.submit(_sim_block, task))
                if not pending:
                    break
                acc = _merge(acc, pending.popleft().result())
                if min_frame_errors is not None and \
                        acc["frame_errors"] >= min_frame_errors:
                    stopped = True
                    for fut in pending:
                        fut.cancel()
                    for fut in pending:
                        if not fut.cancelled():
                            fut.result()
                    pending.clear()
    return acc


def _record_from_cell(code, config, ebn0_db, seed, acc, wall):
    frames = acc["frames"]
    fer = acc["frame_errors"] / frames
    info_bits = frames * code.k_info
    kappa = None
    if acc["counters"][_engine.C_KTRIALS] > 0:
        kappa = float(acc["counters"][_engine.C_KHITS]
                      / acc["counters"][_engine.C_KTRIALS])
    kappa_iter = []
    for h, t in zip(acc["kappa_hits_iter"], acc["kappa_trials_iter"]):
        kappa_iter.append(float(h) / t if t else None)
    e_cnt = len(code.h.entries)
    mean_iters = float(acc["counters"][_engine.C_PROP]) / (frames * e_cnt)
    return SimRecord(
        code=code.label, schedule=config.kind, gamma=config.gamma,
        n_p=config.n_p, n_g=config.n_g, kernel=config.kernel,
        snr_db=ebn0_db, i_max=config.i_max, seed=seed, frames=frames,
        frame_errors=acc["frame_errors"], bit_errors=acc["bit_errors"],
        info_bits=info_bits, fer=fer,
        ber=acc["bit_errors"] / info_bits,
        fer_ci95=1.96 * float(np.sqrt(fer * (1.0 - fer) / frames)),
        mean_iterations=mean_iters,
        kappa=kappa, counters=Counters.from_array(acc["counters"]),
        kappa_per_iteration=kappa_iter,
        frame_errors_at=acc["frame_errors_at"].tolist(),
        bit_errors_at=acc["bit_errors_at"].tolist(),
        wall_clock_s=wall,
    )


def _resolve_code(code):
    if isinstance(code, CodeSpec):
        return code
    return load_code(code)


def run_fer_sweep(campaign: Campaign):
    """FER/BER over the campaign's (schedule, SNR) grid."""
    code = _resolve_code(campaign.code)
    records = []
    for config in campaign.schedules:
        for snr in campaign.snr_grid:
            t0 = time.monotonic()
            acc = _run_cell(code, config, snr, campaign.master_seed,
                            campaign.min_frame_errors, campaign.max_frames,
                            campaign.workers)
            records.append(_record_from_cell(code, config, snr,
                                             campaign.master_seed, acc,
                                             time.monotonic() - t0))
    return records


def run_convergence(campaign: Campaign):
    """Per-iteration FER/BER at a fixed SNR (first grid entry)."""
    records = run_fer_sweep(campaign)
    code = _resolve_code(campaign.code)
    rows = []
    for rec in records:
        for k, (fe, be) in enumerate(zip(rec.frame_errors_at,
                                         rec.bit_errors_at)):
            rows.append({"code": rec.code, "schedule": rec.schedule,
                         "gamma": rec.gamma, "snr_db": rec.snr_db,
                         "iteration": k,
                         "fer": fe / rec.frames,
                         "ber": be / (rec.frames * code.k_info)})
    return records, rows


def estimate_kappa(campaign: Campaign):
    """kappa = Pr(max-CI below gamma) per (snr, gamma), CIRBP only."""
    for config in campaign.schedules:
        if config.kind != "cirbp":
            raise ValueError("kappa estimation requires cirbp schedules")
    return run_fer_sweep(campaign)


def mc_j_gamma(code, config, ebn0_db, gamma_grid, frames, master_seed=0,
               workers=1):
    """Empirical J(gamma) = #(correct and D >= g) / #(wrong and D >= g),
    per iteration boundary. Returns {"gammas", "j": (i_max+1, G) array with
    NaN where the conditioning cell is empty, "counts"}."""
    code = _resolve_code(code)
    acc = _run_cell(code, config, ebn0_db, master_seed, None, frames,
                    workers, want_trace=True, gamma_grid=list(gamma_grid),
                    fixed_frames=frames)
    counts = acc["j_counts"]
    with np.errstate(divide="ignore", invalid="ignore"):
        j = counts[:, :, 0] / counts[:, :, 1]
    j[counts[:, :, 1] == 0] = np.nan
    j[counts.sum(axis=2) == 0] = np.nan
    return {"gammas": list(gamma_grid), "j": j, "counts": counts}


# ---------------------------------------------------------------------------
# complexity report

TABLE_PREDICTIONS = {
    "rbp": "E-1 comparisons per update",
    "slmdrbp": "(dv-1)(dc-1)-1 comparisons per update",
    "lmdrbp": "(dv-1)dc-1 comparisons per update",
    "lmd_cirbp": "(dv-1)(dc-1) CI updates per update",
    "cirbp": "N + (1-kappa)(dv-1) + kappa(E-1) comparisons per update",
}


def report_counters(records, code):
    """Measured per-update/per-iteration counter averages vs closed forms."""
    code = _resolve_code(code)
    graph = build_tanner(code.h)
    e_cnt = graph.n_edges
    n = graph.n_vars
    dv = e_cnt / n
    dc = e_cnt / graph.n_checks
    rows = []

    def add(rec, metric, measured, predicted, deterministic, one_sided=False):
        if one_sided:
            ok = measured <= predicted * (1.0 + 1e-12)
        elif deterministic:
            ok = abs(measured - predicted) <= 0.01 * abs(predicted)
        else:
            ok = True
        rows.append({"schedule": rec.schedule, "metric": metric,
                     "measured": measured, "predicted": predicted,
                     "deterministic": deterministic, "ok": ok})

    for rec in records:
        c = rec.counters
        props = c.c2v_propagations
        if props == 0:
            continue
        per_update = c.residual_ci_comparisons / props
        iters = props / e_cnt
        if rec.schedule == "flooding":
            add(rec, "comparisons_per_update", per_update, 0.0, True)
        elif rec.schedule == "rbp":
            add(rec, "comparisons_per_update", per_update, e_cnt - 1, True)
        elif rec.schedule == "slmdrbp":
            add(rec, "comparisons_per_update", per_update,
                (dv - 1) * (dc - 1) - 1, False)
        elif rec.schedule == "lmdrbp":
            add(rec, "comparisons_per_update", per_update,
                (dv - 1) * dc - 1, False)
        elif rec.schedule == "lmd_cirbp":
            add(rec, "ci_updates_per_update", c.ci_updates / props,
                (dv - 1) * (dc - 1), True)
            add(rec, "comparisons_per_update", per_update,
                (dv - 1) * dc - 1, False)
        elif rec.schedule == "cirbp":
            kappa = rec.kappa if rec.kappa is not None else 0.0
            add(rec, "comparisons_per_update", per_update,
                n + (1 - kappa) * (dv - 1) + kappa * (e_cnt - 1), False)
        elif rec.schedule == "me_cirbp":
            add(rec, "selection_comparisons_per_iteration",
                c.multi_select_comparisons / iters,
                (e_cnt / rec.n_p) * rec.n_g, True)
            add(rec, "residual_comparisons_per_iteration",
                c.residual_ci_comparisons / iters, e_cnt * (dv - 1), True)
        elif rec.schedule == "me_lmd_cirbp":
            add(rec, "selection_comparisons_per_iteration",
                c.multi_select_comparisons / iters,
                (e_cnt / rec.n_p) * rec.n_g, False, one_sided=True)
    return rows


# ---------------------------------------------------------------------------
# output

def metadata_lines(campaign):
    return [f"# version={_VERSION}",
            f"# rng={RNG_NAME}",
            f"# seed={campaign.master_seed}"]


def records_to_csv(records, campaign=None):
    buf = io.StringIO()
    if campaign is not None:
        for ln in metadata_lines(campaign):
            buf.write(ln + "\n")
    writer = csv.DictWriter(buf, fieldnames=SimRecord.CSV_COLUMNS,
                            lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow(rec.csv_row())
    return buf.getvalue()


def records_to_jsonl(records, campaign=None):
    lines = []
    if campaign is not None:
        lines.append(json.dumps({"version": _VERSION, "rng": RNG_NAME,
                                 "seed": campaign.master_seed}))
    for rec in records:
        lines.append(json.dumps(rec.json_obj(), default=float))
    return "\n".join(lines) + "\n"


def write_records(records, campaign):
    text = records_to_csv(records, campaign) \
        if campaign.out_format == "csv" else \
        records_to_jsonl(records, campaign)
    if campaign.out_path:
        with open(campaign.out_path, "w") as fh:
            fh.write(text)
    return text

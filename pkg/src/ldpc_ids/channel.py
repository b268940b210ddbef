"""BPSK over AWGN: modulation, noise, SNR bookkeeping and channel LLRs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LLR_MAX = 30.0

# Per-frame substreams come from a counter-based Philox generator keyed by
# (master seed, frame index), so frames can be produced in any order or in
# parallel and still be bit-identical.
RNG_NAME = "philox4x64"


@dataclass(frozen=True)
class ChannelConfig:
    ebn0_db: float
    sigma: float
    seed: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass
class Frame:
    u: np.ndarray             # codeword bits, length N
    y: np.ndarray             # received reals over transmitted positions
    channel_llrs: np.ndarray  # length N, zero at punctured positions


def ebn0_to_sigma(ebn0_db, code):
    """Noise std dev for Eb/N0 in dB at unit symbol energy.

    sigma = sqrt(1 / (2 * R_tx * 10^(Eb/N0 / 10))) with R_tx = K / N_transmitted.
    """
    return float(np.sqrt(1.0 / (2.0 * code.rate_tx * 10.0 ** (ebn0_db / 10.0))))


def make_channel_config(ebn0_db, code, seed):
    return ChannelConfig(ebn0_db=ebn0_db, sigma=ebn0_to_sigma(ebn0_db, code),
                         seed=seed)


def modulate(u):
    """BPSK map u -> 1 - 2u."""
    return 1.0 - 2.0 * np.asarray(u, dtype=np.float64)


def transmit(x, sigma, rng):
    """Add i.i.d. Gaussian(0, sigma^2) noise."""
    return x + rng.normal(0.0, sigma, size=len(x))


def init_llrs(y, sigma, code):
    """Intrinsic LLRs 2y/sigma^2 at transmitted positions, 0 at punctured."""
    n = code.h.n_cols
    punct = np.zeros(n, dtype=bool)
    punct[list(code.punctured)] = True
    if len(y) != n - punct.sum():
        raise ValueError(f"received vector length {len(y)} != "
                         f"transmitted count {n - punct.sum()}")
    llrs = np.zeros(n)
    llrs[~punct] = np.clip(2.0 * np.asarray(y) / sigma ** 2, -LLR_MAX, LLR_MAX)
    return llrs


def frame_rng(master_seed, frame_index):
    """Independent substream for one frame."""
    key = np.array([master_seed, frame_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def generate_frame(code, config, frame_index):
    """All-zero-codeword frame from the (seed, frame index) substream."""
    rng = frame_rng(config.seed, frame_index)
    n = code.h.n_cols
    u = np.zeros(n, dtype=np.int8)
    transmitted = np.ones(n, dtype=bool)
    transmitted[list(code.punctured)] = False
    x = modulate(u[transmitted])
    y = transmit(x, config.sigma, rng)
    return Frame(u=u, y=y, channel_llrs=init_llrs(y, config.sigma, code))

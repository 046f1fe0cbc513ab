"""Block and repetition statistics shared by both samplers."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidConfigError

__all__ = ["RatioEstimate", "block_statistics", "repetition_statistics"]


@dataclass(frozen=True)
class RatioEstimate:
    """Result of one volume-ratio estimation run.

    ``sigma`` is the sample standard deviation across repetitions for the
    multiphase method, and the standard deviation of the mean (sigma_B /
    sqrt(N_I)) for hit-and-run block statistics.
    """

    mean: float
    sigma: float
    samples: int
    blocks_or_reps: int
    method: str                   # "multiphase" | "hitrun"
    predicate_name: str
    seed: int
    chains: int = 1
    per_phase_hits: Optional[list] = field(default=None)
    # per-chain per-block hit fractions, for CSV diagnostics only;
    # deliberately absent from to_dict() to keep the JSON schema fixed
    block_fraction_lists: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        if not (-1e-12 <= self.mean <= 1 + 1e-12):
            raise InvalidConfigError(f"ratio mean {self.mean} outside [0, 1]")
        if self.sigma < 0:
            raise InvalidConfigError("sigma must be nonnegative")

    def to_dict(self) -> dict:
        out = {
            "ratio_mean": self.mean,
            "ratio_sigma": self.sigma,
            "samples": self.samples,
            "blocks": self.blocks_or_reps,
            "sampler": self.method,
            "predicate": self.predicate_name,
            "seed": self.seed,
            "chains": self.chains,
        }
        if self.per_phase_hits is not None:
            out["per_phase"] = self.per_phase_hits
        return out


def block_statistics(bits, block_size: int):
    """Mean and standard deviation of the mean from blocked Bernoulli data.

    Bits are grouped into full blocks of ``block_size`` (the trailing
    partial block is discarded); the block success fractions f_i give
    mean = sum f_i / N_I, sigma_B = sample std (divisor N_I - 1) and
    sigma_mean = sigma_B / sqrt(N_I).

    Returns (mean, sigma_mean, n_blocks).
    """
    bits = np.asarray(bits)
    if block_size < 1:
        raise InvalidConfigError("block_size must be positive")
    n_blocks = bits.size // block_size
    if n_blocks < 2:
        raise InvalidConfigError(
            f"need at least 2 full blocks ({2 * block_size} samples), "
            f"got {bits.size}"
        )
    fractions = block_fractions(bits, block_size)
    return _mean_sigma_of_mean(fractions)


def block_fractions(bits, block_size: int) -> np.ndarray:
    """Per-block success fractions; trailing partial block discarded."""
    bits = np.asarray(bits)
    n_blocks = bits.size // block_size
    used = bits[: n_blocks * block_size].reshape(n_blocks, block_size)
    return used.mean(axis=1)


def _mean_sigma_of_mean(fractions: np.ndarray):
    n_blocks = fractions.size
    mean = float(fractions.mean())
    sigma_b = float(fractions.std(ddof=1))
    return mean, float(sigma_b / np.sqrt(n_blocks)), n_blocks


def combine_block_fractions(fractions):
    """Equal-weight merge of block fractions from several chains.

    Returns (mean, sigma_mean, n_blocks); reduction order follows the
    given sequence for reproducibility.
    """
    fractions = np.concatenate([np.asarray(f, dtype=float) for f in fractions])
    if fractions.size < 2:
        raise InvalidConfigError("need at least 2 blocks overall")
    return _mean_sigma_of_mean(fractions)


def repetition_statistics(values):
    """Arithmetic mean and sample standard deviation of repetition results."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise InvalidConfigError("need at least 2 repetitions")
    return float(values.mean()), float(values.std(ddof=1))

"""Monte Carlo samplers and ratio estimators over state families.

Two samplers are provided: uniform ball sampling (normalized-Gaussian
direction, radial u^(1/d) scaling) combined with a nested-ball product
estimator, and a hit-and-run Markov chain whose accepted points converge
to the uniform distribution on the state body.  Both consume RngStream
substreams through the selected kernel backend.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .basis import StateFamily
from .bell import (
    DEFAULT_BELL_TOL,
    cg_body_batch,
    violates_12m_batch,
    violates_cg_batch,
    violates_chsh_batch,
)
from .errors import InsufficientStatisticsError, InvalidConfigError
from .positivity import DEFAULT_PSD_TOL
from .rng import RngStream
from .stats import (
    RatioEstimate,
    block_fractions,
    combine_block_fractions,
    repetition_statistics,
)

__all__ = [
    "MultiphaseConfig",
    "WalkState",
    "muller_ball_sample",
    "hit_and_run_step",
    "multiphase_estimate",
    "hit_and_run_ratio",
    "estimate_predicate_ratios",
    "iterate_chain_coords",
    "PREDICATE_NAMES",
]

DEFAULT_BLOCK_SIZE = 10 ** 6
_SEGMENT = 1 << 16
_OPTIMIZER_STREAM_OFFSET = 10_000

PREDICATE_NAMES = ("true", "ppt", "chsh", "12m", "cg", "cg-body", "cg-opt",
                   "cg-or-chsh")


def default_phase_count(d: int) -> int:
    """Number of nested balls, max(2, ceil(d ln d))."""
    return max(2, math.ceil(d * math.log(d)))


def geometric_radii(r_inner: float, r_outer: float, m: int) -> tuple:
    """Geometrically spaced radii from r_inner to r_outer inclusive."""
    if not (0 < r_inner < r_outer) or m < 2:
        raise InvalidConfigError("need 0 < r_inner < r_outer and m >= 2")
    ratio = r_outer / r_inner
    return tuple(r_inner * ratio ** (i / (m - 1)) for i in range(m))


@dataclass(frozen=True)
class MultiphaseConfig:
    """Nested-ball schedule for the product estimator."""

    phase_count: int
    radii: tuple
    samples_per_phase: int
    repetitions: int
    min_hits: int = 10

    def __post_init__(self):
        if self.phase_count < 2 or len(self.radii) != self.phase_count:
            raise InvalidConfigError("need >= 2 phases matching the radii list")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise InvalidConfigError("radii must be strictly ascending")
        if self.samples_per_phase < 1 or self.repetitions < 1:
            raise InvalidConfigError("samples_per_phase and repetitions must be positive")
        if self.min_hits < 1:
            raise InvalidConfigError("min_hits must be >= 1")

    @classmethod
    def for_family(cls, family: StateFamily, samples_per_phase: int,
                   repetitions: int, phase_count: int = None,
                   min_hits: int = 10) -> "MultiphaseConfig":
        """Schedule from the inner (all-states) ball to the enclosing one."""
        m = phase_count or default_phase_count(family.d)
        radii = geometric_radii(family.mehta_radius_coord,
                                family.outer_radius_coord, m)
        return cls(m, radii, samples_per_phase, repetitions, min_hits)


@dataclass
class WalkState:
    """Current chain position in family coordinates."""

    current: np.ndarray
    step_index: int = 0


def muller_ball_sample(d: int, r: float, rng: RngStream) -> np.ndarray:
    """One point uniform in the d-ball of radius r (d normals, 1 uniform)."""
    v = rng.take_normals(d)
    u = rng.take_uniform()
    norm = np.linalg.norm(v)
    return r * u ** (1.0 / d) * v / norm


def hit_and_run_step(family: StateFamily, state: WalkState, rng: RngStream,
                     psd_tol: float = DEFAULT_PSD_TOL) -> WalkState:
    """One hit-and-run transition: uniform point on the chord through
    ``state.current`` along a uniform random direction."""
    out, final, _ = _backend.run_chain(
        family.scaled_generators, family.pt_generators,
        family.outer_radius_coord, 1, 0, psd_tol, rng,
        np.asarray(state.current, dtype=float))
    return WalkState(np.asarray(final), state.step_index + 1)


def _resolve_predicate(family: StateFamily, name: str) -> str:
    if name not in PREDICATE_NAMES:
        raise InvalidConfigError(
            f"unknown predicate {name!r}; choose one of {', '.join(PREDICATE_NAMES)}")
    if name == "cg":
        return "cg-body" if family.name == "bell_diagonal" else "cg-opt"
    return name


def _predicate_bits(family: StateFamily, names, coords: np.ndarray,
                    psd_tol: float, bell_tol: float, restarts: int,
                    opt_rng: RngStream) -> dict:
    """Evaluate each named predicate on a coordinate batch; union
    predicates reuse their components."""
    cache = {}

    def get(name):
        if name in cache:
            return cache[name]
        if name == "true":
            bits = np.ones(coords.shape[0], dtype=bool)
        elif name == "ppt":
            bits = _backend.psd_bits(family.pt_generators, coords,
                                     psd_tol).astype(bool)
        elif name == "chsh":
            bits = violates_chsh_batch(family, coords, bell_tol)
        elif name == "12m":
            bits = violates_12m_batch(family, coords, bell_tol)
        elif name == "cg-body":
            if family.name != "bell_diagonal":
                raise InvalidConfigError(
                    "cg-body requires the bell_diagonal family")
            bits = cg_body_batch(coords, bell_tol)
        elif name == "cg-opt":
            bits = violates_cg_batch(family, coords, bell_tol, restarts,
                                     opt_rng)
        elif name == "cg-or-chsh":
            bits = get(_resolve_predicate(family, "cg")) | get("chsh")
        else:
            raise InvalidConfigError(f"unknown predicate {name!r}")
        cache[name] = bits
        return bits

    return {name: get(_resolve_predicate(family, name)) for name in names}


def multiphase_estimate(family: StateFamily, predicate: str,
                        cfg: MultiphaseConfig, rng: RngStream,
                        psd_tol: float = DEFAULT_PSD_TOL,
                        bell_tol: float = DEFAULT_BELL_TOL,
                        restarts: int = 32) -> RatioEstimate:
    """Volume-ratio estimate via the nested-ball product estimator.

    Per repetition, each phase draws ``samples_per_phase`` points
    uniformly in its ball and counts the states found; the per-phase
    ratio chain telescopes, so the repetition estimate is the target
    fraction among states in the outermost ball.  A repetition aborts
    if any phase finds fewer than ``min_hits`` states; an estimate
    needs at least two surviving repetitions.
    """
    predicate = _resolve_predicate(family, predicate)
    gens = family.scaled_generators
    pt = family.pt_generators
    per_phase = []
    values = []
    for _ in range(cfg.repetitions):
        hits = []
        aborted = False
        target = states = 0
        for i, r in enumerate(cfg.radii):
            if predicate in ("ppt", "true"):
                n_states, n_ppt = _backend.muller_phase(
                    gens, pt, r, cfg.samples_per_phase, 1, psd_tol, rng)
            else:
                n_states, coords = _backend.muller_phase(
                    gens, pt, r, cfg.samples_per_phase, 0, psd_tol, rng)
                n_ppt = 0
                if i == cfg.phase_count - 1 and n_states:
                    bits = _predicate_bits(
                        family, [predicate], coords, psd_tol, bell_tol,
                        restarts, rng)[predicate]
                    n_ppt = int(bits.sum())
            hits.append(int(n_states))
            if n_states < cfg.min_hits:
                aborted = True
                per_phase.append(hits)
                break
            if i == cfg.phase_count - 1:
                states = n_states
                target = n_states if predicate == "true" else n_ppt
        if aborted:
            continue
        per_phase.append(hits)
        values.append(target / states)
    if len(values) < 2:
        raise InsufficientStatisticsError(
            f"only {len(values)} of {cfg.repetitions} repetitions survived "
            f"the {cfg.min_hits}-hit threshold",
            per_phase_hits=per_phase)
    mean, sigma = repetition_statistics(values)
    return RatioEstimate(
        mean=mean, sigma=sigma,
        samples=cfg.repetitions * cfg.phase_count * cfg.samples_per_phase,
        blocks_or_reps=len(values), method="multiphase",
        predicate_name=predicate, seed=rng.seed, chains=1,
        per_phase_hits=per_phase)


def _chain_block_counts(family: StateFamily, names, n_steps: int,
                        block_size: int, seed: int, stream_id: int,
                        psd_tol: float, bell_tol: float,
                        restarts: int) -> dict:
    """Per-block predicate hit counts of one chain started at the origin."""
    stream = RngStream(seed, stream_id)
    gens = family.scaled_generators
    pt = family.pt_generators
    b0 = family.outer_radius_coord
    n_blocks = n_steps // block_size
    resolved = [_resolve_predicate(family, n) for n in names]
    counts = {n: np.zeros(n_blocks, dtype=np.int64) for n in resolved}

    if resolved == ["ppt"]:
        bits, _, _ = _backend.run_chain(gens, pt, b0, n_steps, 1, psd_tol,
                                        stream, np.zeros(family.d))
        fracs = block_fractions(np.asarray(bits), block_size)
        counts["ppt"] = np.round(fracs * block_size).astype(np.int64)
        return counts

    opt_rng = RngStream(seed, _OPTIMIZER_STREAM_OFFSET + stream_id)
    start = np.zeros(family.d)
    pos = 0
    while pos < n_steps:
        seg = min(_SEGMENT, n_steps - pos)
        coords, start, _ = _backend.run_chain(gens, pt, b0, seg, 0, psd_tol,
                                              stream, start)
        coords = np.asarray(coords)
        bit_map = _predicate_bits(family, resolved, coords, psd_tol,
                                  bell_tol, restarts, opt_rng)
        blocks = (pos + np.arange(seg)) // block_size
        in_range = blocks < n_blocks
        for name, bits in bit_map.items():
            sel = bits & in_range
            if sel.any():
                np.add.at(counts[name], blocks[sel], 1)
        pos += seg
    return counts


def estimate_predicate_ratios(family: StateFamily, predicates,
                              total_samples: int,
                              block_size: int = DEFAULT_BLOCK_SIZE,
                              seed: int = 0, chains: int = 1,
                              psd_tol: float = DEFAULT_PSD_TOL,
                              bell_tol: float = DEFAULT_BELL_TOL,
                              restarts: int = 32) -> dict:
    """Hit-and-run estimates for several predicates from one chain run.

    ``total_samples`` is split across ``chains`` independent chains
    (distinct stream ids from the same seed); block statistics never
    span chains and the reduction order is fixed by chain index.
    """
    if chains < 1 or total_samples < 1:
        raise InvalidConfigError("chains and total_samples must be positive")
    per_chain = [total_samples // chains + (1 if i < total_samples % chains else 0)
                 for i in range(chains)]
    if min(per_chain) // block_size < 1 or total_samples // block_size < 2:
        raise InvalidConfigError(
            f"need at least 2 full blocks of {block_size} overall and one "
            f"per chain; got {total_samples} samples over {chains} chains")
    resolved = [_resolve_predicate(family, n) for n in predicates]
    fractions = {n: [] for n in resolved}
    for cid in range(chains):
        counts = _chain_block_counts(family, predicates, per_chain[cid],
                                     block_size, seed, cid, psd_tol,
                                     bell_tol, restarts)
        for name, c in counts.items():
            fractions[name].append(c / block_size)
    out = {}
    for orig, name in zip(predicates, resolved):
        mean, sigma, n_blocks = combine_block_fractions(fractions[name])
        out[orig] = RatioEstimate(
            mean=mean, sigma=sigma, samples=total_samples,
            blocks_or_reps=n_blocks, method="hitrun",
            predicate_name=name, seed=seed, chains=chains,
            block_fraction_lists=tuple(tuple(f) for f in fractions[name]))
    return out


def hit_and_run_ratio(family: StateFamily, predicate: str,
                      total_samples: int,
                      block_size: int = DEFAULT_BLOCK_SIZE,
                      seed: int = 0, chains: int = 1,
                      psd_tol: float = DEFAULT_PSD_TOL,
                      bell_tol: float = DEFAULT_BELL_TOL,
                      restarts: int = 32) -> RatioEstimate:
    """Hit-and-run estimate of one predicate's volume fraction."""
    return estimate_predicate_ratios(
        family, [predicate], total_samples, block_size, seed, chains,
        psd_tol, bell_tol, restarts)[predicate]


def iterate_chain_coords(family: StateFamily, n_steps: int, seed: int = 0,
                         stream_id: int = 0,
                         psd_tol: float = DEFAULT_PSD_TOL,
                         segment: int = _SEGMENT):
    """Yield (offset, coords) segments of one hit-and-run chain.

    The chain starts at the maximally mixed state; segments concatenate
    to the same trajectory a single run_chain call would produce.
    """
    if n_steps < 1:
        raise InvalidConfigError("n_steps must be positive")
    stream = RngStream(seed, stream_id)
    gens = family.scaled_generators
    pt = family.pt_generators
    b0 = family.outer_radius_coord
    start = np.zeros(family.d)
    pos = 0
    while pos < n_steps:
        seg = min(segment, n_steps - pos)
        coords, start, _ = _backend.run_chain(gens, pt, b0, seg, 0, psd_tol,
                                              stream, start)
        yield pos, np.asarray(coords)
        pos += seg

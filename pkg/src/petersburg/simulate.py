"""Monte Carlo oracle for the coin-toss game and the martingale strategy.

Sampling uses the counter-based Philox generator so that every replication
block draws from a substream derived only from (seed, block index):
summaries are bit-identical for a given seed no matter how many shards
execute the blocks.  Toss counts are sampled by inversion, one uniform per
game, so extreme-tail draws cost the same as typical ones.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .errors import DomainError

GENERATOR_NAME = "philox-4x64-10"

# Replications per RNG substream.  Part of the deterministic stream layout:
# changing it changes sampled values (but never the statistical contract).
_BLOCK = 4096

# Max elements drawn per chunk inside a block, to bound memory.
_CHUNK_ELEMENTS = 1 << 21


@dataclass(frozen=True)
class SimConfig:
    """Reproducibility knobs shared by the simulators.

    ``max_tosses`` caps a single game so payoffs stay exact in binary64;
    the cap event has probability 2**-max_tosses and is counted in the
    summary when it fires.
    """

    seed: int = 0
    replications: int = 1000
    max_tosses: int = 60
    parallel_shards: int = 1

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")
        if self.replications < 1:
            raise DomainError("replications must be at least 1")
        if not 1 <= self.max_tosses <= 1023:
            raise DomainError("max_tosses must be in 1..1023")
        if self.parallel_shards < 1:
            raise DomainError("parallel_shards must be at least 1")


@dataclass(frozen=True)
class SimSummary:
    """Per-game winnings statistics across replications of an N-game run."""

    per_game_mean: float
    per_game_median_of_means: float
    n_games: int
    replications: int
    stderr_proxy: float
    seed: int
    generator: str = GENERATOR_NAME
    capped_tosses: int = 0

    def to_json(self) -> dict:
        return {
            "per_game_mean": self.per_game_mean,
            "per_game_median_of_means": self.per_game_median_of_means,
            "n_games": self.n_games,
            "replications": self.replications,
            "stderr_proxy": self.stderr_proxy,
            "seed": self.seed,
            "generator": self.generator,
            "capped_tosses": self.capped_tosses,
        }


@dataclass(frozen=True)
class MartingaleSummary:
    """Empirical mean net outcome of the doubling strategy at each horizon.

    ``stage_means[k]`` estimates the expected value after at most k+1 spins;
    ``stage_stderrs`` are the matching binomial standard errors.
    """

    stage_means: tuple[float, ...]
    stage_stderrs: tuple[float, ...]
    replications: int
    x0: float
    p_win: float
    seed: int
    generator: str = GENERATOR_NAME

    def to_json(self) -> dict:
        return {
            "stage_means": list(self.stage_means),
            "stage_stderrs": list(self.stage_stderrs),
            "replications": self.replications,
            "x0": self.x0,
            "p_win": self.p_win,
            "seed": self.seed,
            "generator": self.generator,
        }

    def to_csv(self, fh: IO[str]) -> None:
        fh.write(f"# replications: {self.replications}\n")
        fh.write(f"# x0: {self.x0:.12g}\n")
        fh.write(f"# p_win: {self.p_win:.12g}\n")
        fh.write(f"# seed: {self.seed}\n")
        fh.write(f"# generator: {self.generator}\n")
        fh.write("stage,mean,stderr\n")
        for k, (m, s) in enumerate(zip(self.stage_means, self.stage_stderrs), 1):
            fh.write(f"{k},{m:.12g},{s:.12g}\n")


def _block_rng(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def _block_bounds(replications: int) -> list[tuple[int, int, int]]:
    """(block index, start, stop) triples partitioning the replications."""
    blocks = []
    start = 0
    index = 0
    while start < replications:
        stop = min(start + _BLOCK, replications)
        blocks.append((index, start, stop))
        start = stop
        index += 1
    return blocks


def _run_blocks(blocks, worker, parallel_shards: int) -> list:
    """Run ``worker(block_triple)`` for every block, in parallel when asked,
    and return results ordered by block index."""
    if parallel_shards <= 1 or len(blocks) <= 1:
        return [worker(b) for b in blocks]
    results: list = [None] * len(blocks)
    with ThreadPoolExecutor(max_workers=parallel_shards) as pool:
        for idx, res in zip(
            (b[0] for b in blocks), pool.map(worker, blocks)
        ):
            results[idx] = res
    return results


def _tosses_from_uniforms(u: np.ndarray, max_tosses: int) -> tuple[np.ndarray, int]:
    """Inversion sampling of the first-tails toss: P(tosses = m) = 2**-m.

    One binary64 uniform per game; its resolution limits raw draws to about
    54, so a cap at the default 60 is unreachable in practice but still
    enforced and counted.
    """
    raw = 1 + np.floor(-np.log2(1.0 - u)).astype(np.int64)
    capped = int(np.count_nonzero(raw > max_tosses))
    return np.minimum(raw, max_tosses), capped


def play_bernoulli_game(
    rng: np.random.Generator, max_tosses: int = 60
) -> tuple[int, float]:
    """Play one coin-toss game: returns (tosses, payoff) with payoff equal
    to 2**tosses, tosses capped at ``max_tosses``."""
    tosses, _ = _tosses_from_uniforms(
        np.array([rng.random()]), max_tosses
    )
    t = int(tosses[0])
    return t, float(2.0 ** t)


def simulate_repeated(n_games: int, config: SimConfig) -> SimSummary:
    """Play ``n_games`` coin-toss games per replication and summarize the
    per-game average winnings across replications.

    The sample mean of this game is heavy-tailed (no finite expectation in
    the limit), so the median of the per-replication means is the robust
    statistic; it grows by about one unit per doubling of ``n_games``.
    """
    if not isinstance(n_games, int) or isinstance(n_games, bool) or n_games < 1:
        raise DomainError(f"n_games must be a positive integer, got {n_games}")

    rows_per_chunk = max(1, _CHUNK_ELEMENTS // n_games)

    def worker(block: tuple[int, int, int]) -> tuple[np.ndarray, int]:
        index, start, stop = block
        rng = _block_rng(config.seed, index)
        means = np.empty(stop - start, dtype=float)
        capped = 0
        for row0 in range(0, stop - start, rows_per_chunk):
            rows = min(rows_per_chunk, stop - start - row0)
            u = rng.random(size=(rows, n_games))
            tosses, c = _tosses_from_uniforms(u, config.max_tosses)
            capped += c
            means[row0 : row0 + rows] = (2.0 ** tosses).mean(axis=1)
        return means, capped

    blocks = _block_bounds(config.replications)
    results = _run_blocks(blocks, worker, config.parallel_shards)
    means = np.concatenate([r[0] for r in results])
    capped_total = sum(r[1] for r in results)

    if config.replications > 1:
        stderr = float(means.std(ddof=1) / math.sqrt(config.replications))
    else:
        stderr = 0.0
    return SimSummary(
        per_game_mean=float(means.mean()),
        per_game_median_of_means=float(np.median(means)),
        n_games=n_games,
        replications=config.replications,
        stderr_proxy=stderr,
        seed=config.seed,
        capped_tosses=capped_total,
    )


def simulate_martingale(
    n_stages: int,
    x0: float,
    p_win: float,
    config: SimConfig,
) -> MartingaleSummary:
    """Simulate the doubling strategy and report the empirical mean net
    outcome at every horizon 1..n_stages.

    A run is determined by the spin of the first win J (geometric with
    parameter ``p_win``): at horizon n the outcome is +x0 when J <= n and
    -(2**n - 1) * x0 when all n spins lost.  Means converge to
    [1 - (2(1-p))^n] * x0.
    """
    if not isinstance(n_stages, int) or isinstance(n_stages, bool) or n_stages < 1:
        raise DomainError(f"n_stages must be a positive integer, got {n_stages}")
    if x0 <= 0.0:
        raise DomainError(f"initial bid must be positive, got {x0}")
    if not 0.0 < p_win < 1.0:
        raise DomainError(f"win probability must be in (0, 1), got {p_win}")

    log_lose = math.log1p(-p_win)

    def worker(block: tuple[int, int, int]) -> np.ndarray:
        index, start, stop = block
        rng = _block_rng(config.seed, index)
        u = rng.random(stop - start)
        first_win = 1 + np.floor(np.log1p(-u) / log_lose).astype(np.int64)
        bucketed = np.minimum(first_win, n_stages + 1)
        return np.bincount(bucketed, minlength=n_stages + 2)

    blocks = _block_bounds(config.replications)
    counts = sum(_run_blocks(blocks, worker, config.parallel_shards))
    win_by = np.cumsum(counts[1 : n_stages + 1])  # wins at spin <= n

    r = config.replications
    q = win_by / r
    horizon = np.arange(1, n_stages + 1, dtype=float)
    scale = 2.0 ** horizon
    means = x0 * (q * scale - (scale - 1.0))
    stderrs = x0 * scale * np.sqrt(q * (1.0 - q) / r)
    return MartingaleSummary(
        stage_means=tuple(float(v) for v in means),
        stage_stderrs=tuple(float(v) for v in stderrs),
        replications=r,
        x0=x0,
        p_win=p_win,
        seed=config.seed,
    )


def repeated_summaries_to_csv(
    summaries: Sequence[SimSummary], fh: IO[str]
) -> None:
    fh.write(
        "n_games,per_game_mean,per_game_median_of_means,replications,"
        "stderr_proxy,seed,generator,capped_tosses\n"
    )
    for s in summaries:
        fh.write(
            f"{s.n_games},{s.per_game_mean:.12g},"
            f"{s.per_game_median_of_means:.12g},{s.replications},"
            f"{s.stderr_proxy:.12g},{s.seed},{s.generator},{s.capped_tosses}\n"
        )

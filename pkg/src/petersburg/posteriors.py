"""Normalized probability distributions over lottery families.

The distribution over lotteries with expected utilities U_n has weights
attribute_weight(prior, U_n) * exp(beta * U_n), normalized over the support.
For unbounded utility families the normalizing series converges only for
beta < 0, and a finite implementation must truncate it: construction streams
log-domain weights and stops once an analytic bound on the omitted tail mass
drops below ``rel_tol`` times the accumulated sum.

Three tail bounds are used, in order of preference:

1. exact geometric-series tail for weights n * r^n (luce prior over U_n = n),
2. a geometric majorant w_n * q/(1-q) when utility increments are positive
   and nondecreasing and attribute ratios are nonincreasing (then every
   future weight ratio is at most q = ratio * exp(beta * increment)),
3. a heuristic stop after 50 consecutive terms each below rel_tol times the
   accumulated sum, recording 50 times the last term as the bound.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .errors import DomainError, SignError, TruncationError
from .lotteries import ExpectedUtilitySeq
from .priors import PriorSpec, log_attribute_weight

_SMALL_TERM_RUN = 50


@dataclass(frozen=True)
class TruncationPolicy:
    """Stopping rule for infinite-support normalizing sums.

    ``rel_tol`` bounds the omitted tail mass relative to the retained sum;
    ``max_index`` caps the support size before giving up.
    """

    rel_tol: float = 1e-14
    max_index: int = 10 ** 6

    def __post_init__(self) -> None:
        if self.rel_tol <= 0.0:
            raise DomainError("rel_tol must be positive")
        if self.max_index < 1:
            raise DomainError("max_index must be at least 1")


@dataclass(frozen=True)
class PosteriorDistribution:
    """Normalized probabilities over lottery indices 1..n_trunc.

    ``tail_bound`` is an upper bound on the probability mass discarded by
    truncation, expressed relative to the retained (pre-normalization) total;
    it is 0 for finite families and may be ``inf`` when the untruncated series
    diverges.  Instances are immutable and safe to share across threads.
    """

    probs: np.ndarray
    utilities: np.ndarray
    beta: float
    n_trunc: int
    tail_bound: float

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float).copy()
        utils = np.asarray(self.utilities, dtype=float).copy()
        probs.flags.writeable = False
        utils.flags.writeable = False
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "utilities", utils)
        if len(probs) != self.n_trunc or len(utils) != self.n_trunc:
            raise DomainError("probs/utilities length must equal n_trunc")
        if np.any(probs < 0.0) or np.any(probs > 1.0):
            raise DomainError("probabilities must lie in [0, 1]")
        if abs(float(probs.sum()) - 1.0) > 1e-12:
            raise DomainError(f"probabilities sum to {probs.sum()}, expected 1")
        if self.tail_bound < 0.0:
            raise DomainError("tail bound must be nonnegative")

    def prob(self, n: int) -> float:
        self._check_index(n)
        return float(self.probs[n - 1])

    def utility(self, n: int) -> float:
        self._check_index(n)
        return float(self.utilities[n - 1])

    def _check_index(self, n: int) -> None:
        if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= self.n_trunc:
            raise DomainError(f"index {n} outside support 1..{self.n_trunc}")

    def to_json(self) -> dict:
        return {
            "meta": {
                "beta": self.beta,
                "n_trunc": self.n_trunc,
                "tail_bound": self.tail_bound,
            },
            "rows": [
                {"n": n + 1, "u": float(self.utilities[n]), "prob": float(self.probs[n])}
                for n in range(self.n_trunc)
            ],
        }

    def to_csv(self, fh: IO[str], max_rows: int | None = None) -> None:
        """Write `n,U_n,prob` rows preceded by `#`-comment metadata lines."""
        fh.write(f"# beta: {self.beta:.12g}\n")
        fh.write(f"# n_trunc: {self.n_trunc}\n")
        fh.write(f"# tail_bound: {self.tail_bound:.12g}\n")
        fh.write("n,U_n,prob\n")
        stop = self.n_trunc if max_rows is None else min(max_rows, self.n_trunc)
        for i in range(stop):
            fh.write(
                f"{i + 1},{self.utilities[i]:.12g},{self.probs[i]:.12g}\n"
            )


class Preference(enum.Enum):
    PREFER_I = "prefer_i"
    PREFER_J = "prefer_j"
    INDIFFERENT = "indifferent"


def _log_weight(prior: PriorSpec, u: float, beta: float) -> float:
    return log_attribute_weight(prior, u) + beta * u


def _stream_truncated(
    prior: PriorSpec,
    utilities: ExpectedUtilitySeq,
    beta: float,
    policy: TruncationPolicy,
) -> tuple[list[float], list[float], float]:
    """Stream log-weights until a tail bound certifies the stopping rule.

    Returns (log_weights, utility_values, tail_fraction) with the tail
    expressed relative to the retained sum.  Raises TruncationError when no
    rule fires by ``policy.max_index``.
    """
    rel_log = math.log(policy.rel_tol)
    log_weights: list[float] = []
    values: list[float] = []

    run_max = -math.inf  # streaming log-sum-exp state
    run_sum = 0.0
    arithmetic = prior.kind == "luce"
    monotone = True
    incs_nondecreasing = True
    ratios_nonincreasing = True
    prev_u: float | None = None
    prev_la: float | None = None
    prev_inc: float | None = None
    prev_ratio: float | None = None
    small_run = 0

    for n in range(1, policy.max_index + 1):
        try:
            u = utilities(n)
        except DomainError as exc:
            if n == 1:
                raise
            raise TruncationError(
                f"family evaluation ended at index {n - 1} before the tail "
                f"bound was met ({exc})"
            ) from exc
        la = log_attribute_weight(prior, u)
        lw = la + beta * u
        log_weights.append(lw)
        values.append(u)

        if lw != -math.inf:
            if lw > run_max:
                run_sum = run_sum * math.exp(run_max - lw) + 1.0
                run_max = lw
            else:
                run_sum += math.exp(lw - run_max)

        arithmetic = arithmetic and u == float(n)
        if prev_u is not None:
            inc = u - prev_u
            monotone = monotone and inc > 0.0
            if prev_inc is not None and inc < prev_inc - 1e-15:
                incs_nondecreasing = False
            prev_inc = inc
            ratio = la - prev_la
            if prev_ratio is not None and not ratio <= prev_ratio + 1e-12:
                ratios_nonincreasing = False
            prev_ratio = ratio
        prev_u, prev_la = u, la

        if run_sum <= 0.0 or n < 4:
            continue
        log_sum = run_max + math.log(run_sum)
        log_tail: float | None = None

        if arithmetic and beta < 0.0:
            # Exact tail of sum_{m>n} m r^m with r = exp(beta):
            # r^(n+1) * (n+1 - n*r) / (1-r)^2
            r = math.exp(beta)
            log_tail = (
                (n + 1) * beta
                + math.log((n + 1) - n * r)
                - 2.0 * math.log1p(-r)
            )
        elif (
            monotone
            and incs_nondecreasing
            and ratios_nonincreasing
            and prev_inc is not None
            and prev_inc > 0.0
            and prev_ratio is not None
            and math.isfinite(prev_ratio)
        ):
            log_q = prev_ratio + beta * prev_inc
            if log_q < 0.0:
                log_tail = lw + log_q - math.log1p(-math.exp(log_q))

        if log_tail is not None and log_tail <= rel_log + log_sum:
            return log_weights, values, math.exp(log_tail - log_sum)

        if lw <= rel_log + log_sum:
            small_run += 1
            if small_run >= _SMALL_TERM_RUN:
                log_tail = math.log(_SMALL_TERM_RUN) + lw
                return log_weights, values, math.exp(log_tail - log_sum)
        else:
            small_run = 0

    raise TruncationError(
        f"tail bound not reached within max_index={policy.max_index} "
        f"(rel_tol={policy.rel_tol}, beta={beta})"
    )


def _normalize(log_weights: list[float]) -> np.ndarray:
    lw = np.asarray(log_weights, dtype=float)
    finite = lw[np.isfinite(lw)]
    if finite.size == 0:
        raise DomainError("all prior weights are zero; distribution undefined")
    shifted = np.exp(lw - finite.max())
    total = shifted.sum()
    return shifted / total


def posterior(
    prior: PriorSpec,
    utilities: ExpectedUtilitySeq,
    beta: float,
    policy: TruncationPolicy | None = None,
) -> PosteriorDistribution:
    """Distribution with probs[n] proportional to
    attribute_weight(prior, U_n) * exp(beta * U_n).

    Finite families accept any beta; families whose utilities grow without
    bound require beta < 0 (otherwise the normalizing sum diverges and a
    SignError is raised).  At beta = 0 the result is exactly the normalized
    prior.
    """
    policy = policy if policy is not None else TruncationPolicy()
    if utilities.finite:
        values = [utilities(n) for n in range(1, utilities.size + 1)]
        log_weights = [_log_weight(prior, u, beta) for u in values]
        tail = 0.0
    else:
        if beta >= 0.0 and utilities.is_unbounded(policy.max_index):
            raise SignError(
                f"beta must be negative for unbounded utilities, got {beta}"
            )
        log_weights, values, tail = _stream_truncated(
            prior, utilities, beta, policy
        )
    probs = _normalize(log_weights)
    return PosteriorDistribution(
        probs=probs,
        utilities=np.asarray(values, dtype=float),
        beta=beta,
        n_trunc=len(probs),
        tail_bound=tail,
    )


def bernoulli_partition_closed(beta: float) -> float:
    """Closed form of sum_{n>=1} n exp(beta n) for beta < 0:
    1 / (4 sinh^2(|beta|/2))."""
    if beta >= 0.0:
        raise SignError(f"partition sum diverges for beta >= 0, got {beta}")
    s = math.sinh(abs(beta) / 2.0)
    return 1.0 / (4.0 * s * s)


def stochastically_optimal(dist: PosteriorDistribution) -> int:
    """Index of the largest probability; ties break to the smallest index."""
    return int(np.argmax(dist.probs)) + 1


def optimal_bracket(
    beta: float, prior: PriorSpec | None = None
) -> tuple[int, int]:
    """Integer bracket around the continuous optimum for a family with
    U_n = n: (entier(x*), entier(x*) + 1), clamped below at index 1.

    With the default luce prior x* = 1/|beta|.
    """
    from .priors import continuous_optimum

    if beta >= 0.0:
        raise SignError(f"bracket requires beta < 0, got {beta}")
    prior = prior if prior is not None else PriorSpec.luce()
    x_star = continuous_optimum(prior, beta)
    low = max(1, math.floor(x_star))
    high = max(low, math.floor(x_star) + 1)
    return low, high


def compare(dist: PosteriorDistribution, i: int, j: int) -> Preference:
    """Stochastic preference between two indices of the same distribution;
    indifferent when the probabilities agree within 1e-12."""
    pi = dist.prob(i)
    pj = dist.prob(j)
    if abs(pi - pj) <= 1e-12:
        return Preference.INDIFFERENT
    return Preference.PREFER_I if pi > pj else Preference.PREFER_J


def global_mean(
    dist: PosteriorDistribution,
    utilities: ExpectedUtilitySeq | None = None,
) -> float:
    """Mean expected utility under the distribution, over the truncated
    support.  ``utilities`` defaults to the values the distribution stores."""
    if utilities is None:
        values = dist.utilities
    else:
        values = np.asarray(
            [utilities(n) for n in range(1, dist.n_trunc + 1)], dtype=float
        )
    return float(np.dot(dist.probs, values))

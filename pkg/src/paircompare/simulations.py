"""Executable demonstrations of classical testing pitfalls.

Three simulations live here: the dependence of a p-value on the
experimenter's stopping intention, the false-positive inflation caused by
peeking at accumulating data, and the sensitivity of Bayesian conclusions to
the prior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bayes import BetaParams, PosteriorPair, conjugate_update
from .core import Direction
from .errors import DomainError
from .frequentist import two_proportion_z_test
from .numerics import RngStream, log_binomial_coefficient, sample_beta, std_normal_cdf
from .posterior import Hdi, bayes_factor_interval_null, hdi_from_samples

# Stream indices reserved by the prior sweep so rows never share draws.
_SWEEP_STREAM_BASE = 20_000


class Tail(Enum):
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class StoppingComparison:
    """One data set, two sampling intentions, two p-values."""

    successes: int
    trials: int
    null_rate: float
    fixed_trials_pvalue: float
    fixed_successes_pvalue: float

    @property
    def gap(self) -> float:
        return abs(self.fixed_trials_pvalue - self.fixed_successes_pvalue)


@dataclass(frozen=True)
class OptionalStoppingReport:
    looks: tuple[int, ...]
    theta: float
    nominal_alpha: float
    trials: int
    false_positives: int
    false_positive_rate: float
    first_rejection_counts: tuple[int, ...]
    master_seed: int


@dataclass(frozen=True)
class PriorSweepRow:
    label: str
    prior: BetaParams
    bf01: float
    hdi: Hdi
    posterior_mean_diff: float


def _log_sum_exp(terms) -> float:
    peak = max(terms)
    if peak == -math.inf:
        return -math.inf
    return peak + math.log(sum(math.exp(t - peak) for t in terms))


def _check_stopping_args(successes: int, trials: int, null_rate: float) -> None:
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials!r}")
    if not 0 <= successes <= trials:
        raise DomainError(f"successes {successes!r} outside [0, {trials!r}]")
    if not 0.0 < null_rate <= 1.0:
        raise DomainError(f"null_rate must lie in (0, 1], got {null_rate!r}")


def pvalue_fixed_n(successes: int, trials: int, null_rate: float,
                   tail: Tail = Tail.LOWER) -> float:
    """Binomial tail probability when the number of trials was fixed.

    ``LOWER`` sums P(K <= successes) under K ~ Binomial(trials, null_rate);
    ``UPPER`` sums the other side.  Terms are accumulated in log space so
    long tails survive underflow.
    """
    _check_stopping_args(successes, trials, null_rate)
    if null_rate == 1.0:
        # All mass sits at K = trials.
        if tail is Tail.LOWER:
            return 1.0 if successes >= trials else 0.0
        return 1.0
    if tail is Tail.LOWER:
        ks = range(0, successes + 1)
    else:
        ks = range(successes, trials + 1)
    log_p = math.log(null_rate)
    log_q = math.log1p(-null_rate)
    terms = [log_binomial_coefficient(trials, k) + k * log_p + (trials - k) * log_q
             for k in ks]
    return min(1.0, math.exp(_log_sum_exp(terms)))


def pvalue_fixed_successes(successes: int, trials: int, null_rate: float,
                           tail: Tail = Tail.LOWER) -> float:
    """Negative-binomial tail when sampling stopped at the final success.

    Under this intention the random quantity is N, the number of trials
    needed to reach ``successes``.  ``LOWER`` returns P(N >= trials): data
    needing at least this many trials are evidence of a low rate, mirroring
    the lower binomial tail.  ``UPPER`` returns P(N <= trials).
    """
    _check_stopping_args(successes, trials, null_rate)
    if successes < 1:
        raise DomainError("stopping on a success count needs at least one success")
    if null_rate == 1.0:
        # N = successes with certainty.
        if tail is Tail.LOWER:
            return 1.0 if trials <= successes else 0.0
        return 1.0 if trials >= successes else 0.0
    log_p = math.log(null_rate)
    log_q = math.log1p(-null_rate)

    def mass_below(limit: int) -> float:
        # P(N <= limit) = sum_{m=a}^{limit} C(m-1, a-1) p^a q^(m-a)
        if limit < successes:
            return 0.0
        terms = [log_binomial_coefficient(m - 1, successes - 1)
                 + successes * log_p + (m - successes) * log_q
                 for m in range(successes, limit + 1)]
        return min(1.0, math.exp(_log_sum_exp(terms)))

    if tail is Tail.LOWER:
        return max(0.0, min(1.0, 1.0 - mass_below(trials - 1)))
    return mass_below(trials)


def stopping_comparison(successes: int, trials: int, null_rate: float) -> StoppingComparison:
    """Evaluate the same counts under both stopping intentions."""
    return StoppingComparison(
        successes=successes,
        trials=trials,
        null_rate=null_rate,
        fixed_trials_pvalue=pvalue_fixed_n(successes, trials, null_rate),
        fixed_successes_pvalue=pvalue_fixed_successes(successes, trials, null_rate),
    )


def optional_stopping_fpr(looks, theta: float, nominal_alpha: float, trials: int,
                          master_seed: int,
                          direction: Direction = Direction.TWO_SIDED) -> OptionalStoppingReport:
    """False-positive rate of a z-test applied at every interim look.

    Both systems share the true rate ``theta``, so every rejection is a
    false positive.  A trial counts as rejected if the test crosses
    ``nominal_alpha`` at any look.  Trial ``t`` draws from the stream
    ``(master_seed, t)``: trials are independent, reproducible, and the same
    seed reuses the same outcome paths for any subset of looks.
    """
    looks = tuple(int(n) for n in looks)
    if not looks or any(n < 2 for n in looks) or list(looks) != sorted(set(looks)):
        raise DomainError("looks must be a strictly increasing sequence of sizes >= 2")
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie in (0, 1), got {theta!r}")
    if not 0.0 < nominal_alpha < 1.0:
        raise DomainError(f"nominal_alpha must lie in (0, 1), got {nominal_alpha!r}")
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials!r}")

    n_max = looks[-1]
    look_arr = np.array(looks)
    false_positives = 0
    first_rejections = [0] * len(looks)
    for t in range(trials):
        gen = RngStream(master_seed, t).generator
        outcomes1 = gen.random(n_max) < theta
        outcomes2 = gen.random(n_max) < theta
        cum1 = np.cumsum(outcomes1)[look_arr - 1]
        cum2 = np.cumsum(outcomes2)[look_arr - 1]
        for i, n in enumerate(looks):
            if _z_test_rejects(int(cum1[i]), int(cum2[i]), n, nominal_alpha, direction):
                false_positives += 1
                first_rejections[i] += 1
                break
    return OptionalStoppingReport(
        looks=looks,
        theta=theta,
        nominal_alpha=nominal_alpha,
        trials=trials,
        false_positives=false_positives,
        false_positive_rate=false_positives / trials,
        first_rejection_counts=tuple(first_rejections),
        master_seed=master_seed,
    )


def _z_test_rejects(c1: int, c2: int, n: int, alpha: float,
                    direction: Direction) -> bool:
    # Inline two-proportion z-test on equal-sized arms; kept in lockstep with
    # frequentist.two_proportion_z_test (see the cross-check in the tests).
    pooled = (c1 + c2) / (2.0 * n)
    if pooled == 0.0 or pooled == 1.0:
        return False
    sigma = math.sqrt(pooled * (1.0 - pooled) * 2.0 / n)
    z = ((c1 - c2) / n) / sigma
    if direction is Direction.GREATER:
        p = std_normal_cdf(-z)
    elif direction is Direction.LESS:
        p = std_normal_cdf(z)
    else:
        p = min(1.0, 2.0 * std_normal_cdf(-abs(z)))
    return p < alpha


def prior_sensitivity_sweep(counts: tuple[tuple[int, int], tuple[int, int]],
                            priors: dict[str, BetaParams],
                            epsilon: float, n_mc: int, master_seed: int,
                            hdi_mass: float = 0.95) -> list[PriorSweepRow]:
    """Re-run the Bayesian analysis under each prior and collect the shifts.

    ``counts`` is the per-system ``(correct, total)`` pair; each prior is
    applied to both systems.  Rows come back ordered by prior label, and a
    fixed stream layout per row makes the sweep reproducible.
    """
    if not priors:
        raise DomainError("priors must not be empty")
    (c1, t1), (c2, t2) = counts
    rows = []
    for i, label in enumerate(sorted(priors)):
        prior = priors[label]
        posts = PosteriorPair(
            conjugate_update(prior, c1, t1),
            conjugate_update(prior, c2, t2),
        )
        bf_stream = RngStream(master_seed, _SWEEP_STREAM_BASE + 2 * i)
        bf = bayes_factor_interval_null((prior, prior), posts, epsilon, n_mc, bf_stream)
        hdi_stream = RngStream(master_seed, _SWEEP_STREAM_BASE + 2 * i + 1)
        gen = hdi_stream.generator
        diffs = sample_beta(posts.post1.alpha, posts.post1.beta, gen, size=n_mc) \
            - sample_beta(posts.post2.alpha, posts.post2.beta, gen, size=n_mc)
        rows.append(PriorSweepRow(
            label=label,
            prior=prior,
            bf01=bf.bf01,
            hdi=hdi_from_samples(diffs, hdi_mass),
            posterior_mean_diff=posts.mean_diff,
        ))
    return rows

"""Randomized search for small faithful representations of L_{r,k}.

For each total dimension, starting from a trivial lower bound, every block
profile whose corner block can hold the center is tried with seeded random
generator images.  The first certified faithful representation wins; the
winner is the smallest (total dimension, profile index, trial index), so
the outcome depends only on the master seed.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field

from .exactq import RatMatrix
from .freenil import FreeNilAlgebra, build_algebra, graded_dims
from .rep import (
    BlockProfile,
    GradedRep,
    ceil_sqrt,
    extend_generators,
    is_faithful,
    mu_formula,
    schur_bound,
)

# Upper bounds from the experiments table, keyed by step then rank.
PUBLISHED_UPPER_BOUNDS = {
    3: {2: 6, 3: 9, 4: 14, 5: 18, 6: 22, 7: 27, 8: 32, 9: 37, 10: 43},
    4: {2: 8, 3: 15, 4: 23, 5: 34, 6: 47, 7: 62, 8: 79, 9: 101, 10: 122},
}


class BudgetExhausted(RuntimeError):
    def __init__(self, message: str, log: list):
        super().__init__(message)
        self.log = log


@dataclass
class SearchConfig:
    r: int
    k: int
    trials_per_profile: int = 200
    entry_bound: int | None = None
    master_seed: int = 1
    dim_budget: int | None = None
    time_budget: float | None = None

    def __post_init__(self):
        if self.r < 2 or self.k < 2:
            raise ValueError("need r >= 2 and k >= 2")
        if self.trials_per_profile < 1:
            raise ValueError("trials_per_profile must be positive")
        if self.entry_bound is None:
            self.entry_bound = 9 if self.k >= 3 else 99


@dataclass
class ProfileAttempt:
    total: int
    index: int
    profile: tuple[int, ...]
    trials: int
    successes: int

    def to_json(self) -> dict:
        return {"total": self.total, "index": self.index, "profile": list(self.profile),
                "trials": self.trials, "successes": self.successes}


@dataclass
class SearchResult:
    best_dim: int
    best_profile: BlockProfile
    representation: GradedRep
    trials_run: int
    winning_trial: int
    attempts: list[ProfileAttempt] = field(default_factory=list)
    reference_bounds: dict = field(default_factory=dict)

    def success_counts(self) -> dict[tuple[int, ...], int]:
        return {a.profile: a.successes for a in self.attempts}


def profile_candidates(r: int, k: int, total_dim: int) -> list[BlockProfile]:
    """Compositions of ``total_dim`` into k+1 positive parts with a_0 a_k >= dim of the center."""
    if total_dim < k + 1:
        return []
    center = graded_dims(r, k)[-1]
    out = []
    # stars and bars over k+1 positive parts
    n, parts = total_dim, k + 1
    stack = [((), n)]
    while stack:
        prefix, left = stack.pop()
        if len(prefix) == parts - 1:
            comp = prefix + (left,)
            if comp[0] * comp[-1] >= center:
                out.append(comp)
            continue
        remaining = parts - len(prefix) - 1
        for v in range(1, left - remaining + 1):
            stack.append((prefix + (v,), left - v))
    out = sorted(set(out), key=lambda p: (-p[0] * p[-1], p))
    return [BlockProfile(p) for p in out]


def trial_seed(master_seed, total: int, index: int, trial: int) -> str:
    return f"{master_seed}:{total}:{index}:{trial}"


def random_trial(alg: FreeNilAlgebra, profile: BlockProfile, seed, entry_bound: int) -> GradedRep | None:
    if profile.k != alg.k:
        raise ValueError("profile length must be k+1")
    rng = random.Random(seed)
    dims = profile.dims
    gens = []
    for _ in range(alg.r):
        blocks = []
        for j in range(1, alg.k + 1):
            rows, cols = dims[j - 1], dims[j]
            blocks.append(RatMatrix(rows, cols, [rng.randint(-entry_bound, entry_bound) for _ in range(rows * cols)]))
        gens.append(blocks)
    rep = extend_generators(alg, profile, gens)
    faithful, _ = is_faithful(rep)
    return rep if faithful else None


def _ceil_sqrt_ratio(num: int, den: int) -> int:
    """Smallest m >= 0 with m*m*den >= num."""
    m = math.isqrt(num // den)
    while m * m * den < num:
        m += 1
    while m > 0 and (m - 1) * (m - 1) * den >= num:
        m -= 1
    return m


def reference_bounds(r: int, k: int) -> dict:
    dim = sum(graded_dims(r, k))
    return {
        "dim": dim,
        "dim_power": dim ** k + 1,
        "binomial": math.comb(k + dim, k),
        "lo_ostheimer": sum(r ** i for i in range(k + 1)),
        "center_asymptote": _ceil_sqrt_ratio(4 * r ** k, k),
        "published": PUBLISHED_UPPER_BOUNDS.get(k, {}).get(r) if k >= 3 else mu_formula(r),
    }


def lower_start(r: int, k: int) -> int:
    center = graded_dims(r, k)[-1]
    return max(k + 1, schur_bound(center))


def search_min_dim(config: SearchConfig) -> SearchResult:
    alg = build_algebra(config.r, config.k)
    refs = reference_bounds(config.r, config.k)
    budget = config.dim_budget
    if budget is None:
        budget = refs["lo_ostheimer"]
    started = time.monotonic()
    log: list[ProfileAttempt] = []
    trials_run = 0
    for total in range(lower_start(config.r, config.k), budget + 1):
        for index, profile in enumerate(profile_candidates(config.r, config.k, total)):
            attempt = ProfileAttempt(total, index, profile.dims, 0, 0)
            log.append(attempt)
            for trial in range(config.trials_per_profile):
                if config.time_budget is not None and time.monotonic() - started > config.time_budget:
                    raise BudgetExhausted(
                        f"time budget of {config.time_budget}s exhausted at total dimension {total}", log)
                rep = random_trial(alg, profile, trial_seed(config.master_seed, total, index, trial),
                                   config.entry_bound)
                attempt.trials += 1
                trials_run += 1
                if rep is not None:
                    attempt.successes += 1
                    return SearchResult(total, profile, rep, trials_run, trial, log, refs)
    raise BudgetExhausted(f"no faithful representation up to total dimension {budget}", log)

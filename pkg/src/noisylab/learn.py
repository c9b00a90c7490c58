"""Learner interface and meta-learners.

Contains the contradictory-pair filter, the subsampling filter, success
amplification by sample splitting, its holdout-selection variant (which is a
counterexample generator, not an improvement), hypothesis selection, the
quartic sample-size calculator, and a Monte-Carlo expected-error estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .core import (
    DiscreteDistribution,
    Hypothesis,
    MixtureHypothesis,
    RngHandle,
    Sample,
    empirical_error,
    error_rate,
)

__all__ = [
    "Learner",
    "AmplifyParams",
    "ice_filter",
    "ice_filter_keep",
    "subsample_filter",
    "amplify",
    "bad_amplify",
    "select_best_hypothesis",
    "bv_sample_size",
    "expected_error_estimate",
    "register_learner",
    "make_learner",
    "learner_names",
]


@dataclass(frozen=True)
class Learner:
    """A base learner: consumes a length-``n`` sample, emits a hypothesis.

    ``train`` must be deterministic given (sample, rng). Oversized samples are
    first reduced with :func:`subsample_filter`; undersized samples are an
    error.
    """

    n: int
    train: Callable[[Sample, RngHandle], Hypothesis]
    name: str = "learner"

    def __call__(self, S: Sample, rng: RngHandle) -> Hypothesis:
        if len(S) > self.n:
            S = subsample_filter(S, self.n, rng.split(0))
        elif len(S) < self.n:
            raise ValueError(f"learner needs {self.n} examples, got {len(S)}")
        return self.train(S, rng.split(1))


@dataclass(frozen=True)
class AmplifyParams:
    """Group count and target slack for success amplification."""

    k: int
    eps_additional: float = 0.1
    delta: float = 0.01

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0, 1)")
        if self.eps_additional <= 0:
            raise ValueError("eps_additional must be > 0")

    @classmethod
    def auto(cls, eps_additional: float, delta: float, C_k: float = 1.0) -> "AmplifyParams":
        """k = ⌈C_k · ln(1/δ) / ε_additional²⌉ (the constant defaults to 1)."""
        k = math.ceil(C_k * math.log(1.0 / delta) / eps_additional**2)
        return cls(k=max(k, 1), eps_additional=eps_additional, delta=delta)


def _cumcount(group_ids: np.ndarray) -> np.ndarray:
    """Number of earlier occurrences of the same id, in array order."""
    order = np.argsort(group_ids, kind="stable")
    sorted_ids = group_ids[order]
    first = np.zeros(len(group_ids), dtype=np.int64)
    if len(group_ids):
        new_group = np.r_[True, sorted_ids[1:] != sorted_ids[:-1]]
        starts = np.flatnonzero(new_group)
        offsets = np.arange(len(group_ids)) - np.repeat(
            starts, np.diff(np.r_[starts, len(group_ids)])
        )
        first[order] = offsets
    return first


def ice_filter_keep(S: Sample) -> np.ndarray:
    """Positions surviving contradictory-pair cancellation (see ice_filter)."""
    if len(S) == 0:
        return np.empty(0, dtype=np.int64)
    uniq, inv = np.unique(S.points, return_inverse=True)
    net = np.bincount(inv, weights=S.labels.astype(np.float64)).astype(np.int64)
    majority = np.where(net >= 0, 1, -1).astype(np.int8)
    quota = np.abs(net)
    matches = S.labels == majority[inv]
    occurrence = np.full(len(S), np.iinfo(np.int64).max, dtype=np.int64)
    occurrence[matches] = _cumcount(inv[matches])
    keep = matches & (occurrence < quota[inv])
    return np.flatnonzero(keep)


def ice_filter(S: Sample) -> Sample:
    """Cancel contradictory pairs ``(x,+1)``/``(x,-1)`` until none remain.

    Canonical form: for each point keep ``|c₊ - c₋|`` copies of its majority
    label, with the earliest occurrences surviving. Any maximal sequence of
    pair cancellations yields this multiset.
    """
    if len(S) == 0:
        return S
    return S.take(ice_filter_keep(S))


def subsample_filter(S: Sample, n: int, rng: RngHandle) -> Sample:
    """Uniform ``n``-subset of ``S`` without replacement, order randomized."""
    if n > len(S):
        raise ValueError(f"cannot subsample {n} from {len(S)} examples")
    perm = rng.generator().permutation(len(S))[:n]
    return S.take(perm)


def _permute_and_split(
    S_big: Sample, group_size: int, k: int, rng: RngHandle
) -> tuple[list[Sample], Sample]:
    perm = rng.generator().permutation(len(S_big))
    shuffled = S_big.take(perm)
    groups = [
        shuffled.take(np.arange(i * group_size, (i + 1) * group_size))
        for i in range(k)
    ]
    holdout = shuffled.take(np.arange(k * group_size, len(S_big)))
    return groups, holdout


def amplify(
    A: Learner, params: AmplifyParams, S_big: Sample, rng: RngHandle
) -> MixtureHypothesis:
    """Success amplification by sample splitting.

    Uniformly permute the ``n·k`` sample, split into ``k`` groups, train one
    hypothesis per group, and return their uniform mixture.
    """
    k = params.k
    if len(S_big) != A.n * k:
        raise ValueError(f"need exactly n·k = {A.n * k} examples, got {len(S_big)}")
    groups, _ = _permute_and_split(S_big, A.n, k, rng.split(0))
    hyps = [A(g, rng.split(1, i)) for i, g in enumerate(groups)]
    return MixtureHypothesis(hyps)


def bad_amplify(
    A: Learner, k: int, n_test: int, S_big: Sample, rng: RngHandle
) -> Hypothesis:
    """Holdout-selection amplification (the flawed variant).

    Permute and split as in :func:`amplify`, hold out ``n_test`` examples, and
    return the trained hypothesis with the lowest empirical error on the
    holdout, ties broken uniformly at random.
    """
    if len(S_big) != A.n * k + n_test:
        raise ValueError(
            f"need exactly n·k + n_test = {A.n * k + n_test} examples, got {len(S_big)}"
        )
    groups, holdout = _permute_and_split(S_big, A.n, k, rng.split(0))
    hyps = [A(g, rng.split(1, i)) for i, g in enumerate(groups)]
    errors = np.array([empirical_error(h, holdout) for h in hyps])
    best = np.flatnonzero(errors == errors.min())
    pick = int(best[rng.split(2).generator().integers(0, len(best))])
    return hyps[pick]


def select_best_hypothesis(
    hyps: list[Hypothesis], S_test: Sample
) -> tuple[int, Hypothesis]:
    """Argmin of empirical test error; ties broken by lowest index."""
    if not hyps:
        raise ValueError("empty hypothesis list")
    if len(S_test) == 0:
        raise ValueError("empty test sample")
    errors = [empirical_error(h, S_test) for h in hyps]
    idx = int(np.argmin(errors))
    return idx, hyps[idx]


def bv_sample_size(n: int, domain_size: int, param: float, C: float = 1.0) -> int:
    """Quartic oversampling bound ``m = ⌈C·n⁴·(log₂(2|X|))²/param⁴⌉``."""
    if param <= 0:
        raise ValueError("param must be > 0")
    if C <= 0:
        raise ValueError("C must be > 0")
    return math.ceil(C * n**4 * math.log2(2 * domain_size) ** 2 / param**4)


def expected_error_estimate(
    A: Learner,
    D: DiscreteDistribution,
    c: Hypothesis,
    noise_process: Callable[[RngHandle], Sample],
    trials: int,
    rng: RngHandle,
) -> tuple[float, float]:
    """Monte-Carlo mean error of ``A`` under a corruption process.

    Returns ``(mean, halfwidth)`` where ``halfwidth`` is a 99%
    normal-approximation confidence radius; with a single trial the halfwidth
    is reported as NaN (flagged as undefined). Only the supplied corruption
    process is evaluated — no supremum over adversaries is attempted.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    errs = np.empty(trials)
    for t in range(trials):
        S = noise_process(rng.split(0, t))
        if isinstance(S, tuple):  # corruptors return (sample, ledger)
            S = S[0]
        h = A(S, rng.split(1, t))
        errs[t] = error_rate(h, c, D)
    mean = float(errs.mean())
    if trials == 1:
        return mean, float("nan")
    halfwidth = 2.5758293035489004 * float(errs.std(ddof=1)) / math.sqrt(trials)
    return mean, halfwidth


# --------------------------------------------------------------------------
# Named learner registry (config files select learners by string id).
# --------------------------------------------------------------------------

_REGISTRY: dict[str, Callable[..., Learner]] = {}


def register_learner(name: str) -> Callable:
    def deco(factory: Callable[..., Learner]) -> Callable:
        if name in _REGISTRY:
            raise ValueError(f"duplicate learner id {name!r}")
        _REGISTRY[name] = factory
        return factory

    return deco


def make_learner(name: str, params: Mapping | None = None) -> Learner:
    if name not in _REGISTRY:
        raise KeyError(f"unknown learner id {name!r}; known: {sorted(_REGISTRY)}")
    return _REGISTRY[name](**dict(params or {}))


def learner_names() -> list[str]:
    return sorted(_REGISTRY)

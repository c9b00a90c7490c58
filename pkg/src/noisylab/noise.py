"""Executable corruption processes for six noise models.

Models: malicious (online per-example η-coin), strong malicious (adversary
sees the whole sample and the coin set), nasty (budget drawn first with a
Bin(n, η) law), fixed-rate nasty (exactly ⌊ηn⌋ replacements), Huber
contamination (mixture with an outlier distribution), and bounded
total-variation resampling.

Every corruptor returns the corrupted sample together with a
:class:`CorruptionLedger` recording exactly which positions were touched and
how, so that tests can audit the adversary's moves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import (
    DiscreteDistribution,
    Hypothesis,
    LabeledExample,
    RngHandle,
    Sample,
)

__all__ = [
    "CorruptionLedger",
    "StrategyResult",
    "NoiseRate",
    "malicious_corrupt",
    "strong_malicious_corrupt",
    "nasty_corrupt",
    "fixed_rate_nasty_corrupt",
    "huber_sample",
    "tv_corrupt",
    "tv_distance",
    "shift_mass",
    "register_strategy",
    "make_strategy",
    "strategy_names",
]

Choice = tuple[int, tuple[int, int]]  # (sample position, (point, label))


@dataclass(frozen=True)
class NoiseRate:
    """A noise rate η in [0, 1)."""

    eta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta < 1.0:
            raise ValueError(f"noise rate must be in [0, 1), got {self.eta}")


@dataclass
class StrategyResult:
    """Adversary output: replacement choices plus an optional trial flag.

    ``choices`` maps distinct sample positions to replacement examples. A
    strategy sets ``flagged`` when the drawn budget was too small to carry out
    its scripted plan (an exhausted / non-malleable trial).
    """

    choices: list[Choice]
    flagged: bool = False
    flag_reason: str | None = None


def _as_result(raw: StrategyResult | Sequence[Choice]) -> StrategyResult:
    if isinstance(raw, StrategyResult):
        return raw
    return StrategyResult(list(raw))


@dataclass
class CorruptionLedger:
    """Full record of one corruption pass.

    ``corrupted_indices``, ``replaced`` and ``introduced`` are parallel:
    position ``corrupted_indices[i]`` held ``replaced[i]`` and now holds
    ``introduced[i]``. ``budget`` is the realized corruption count;
    ``drawn_budget`` is the budget the process drew before the strategy chose
    how much of it to use (for strong malicious, the size of the coin set).
    """

    corrupted_indices: np.ndarray
    replaced: Sample
    introduced: Sample
    budget: int
    drawn_budget: int
    clean: Sample
    coin_set: np.ndarray | None = None
    flagged: bool = False
    flag_reason: str | None = None
    notes: dict = field(default_factory=dict)

    def validate(self) -> None:
        n = len(self.clean)
        if not (len(self.corrupted_indices) == len(self.replaced) == len(self.introduced) == self.budget):
            raise ValueError("ledger arity mismatch")
        if self.budget and (
            self.corrupted_indices.min() < 0 or self.corrupted_indices.max() >= n
        ):
            raise ValueError("corrupted index out of range")
        if len(np.unique(self.corrupted_indices)) != self.budget:
            raise ValueError("corrupted indices must be distinct")

    def reapply(self) -> Sample:
        """Reconstruct the corrupted sample from the clean sample + ledger."""
        return self.clean.replace_at(
            self.corrupted_indices, self.introduced.points, self.introduced.labels
        )


def _apply_choices(S_clean: Sample, result: StrategyResult, drawn_budget: int,
                   coin_set: np.ndarray | None = None) -> tuple[Sample, CorruptionLedger]:
    if result.choices:
        idx = np.array([c[0] for c in result.choices], dtype=np.int64)
        pts = np.array([c[1][0] for c in result.choices], dtype=np.int64)
        labs = np.array([c[1][1] for c in result.choices], dtype=np.int8)
    else:
        idx = np.empty(0, dtype=np.int64)
        pts = np.empty(0, dtype=np.int64)
        labs = np.empty(0, dtype=np.int8)
    ledger = CorruptionLedger(
        corrupted_indices=idx,
        replaced=S_clean.take(idx),
        introduced=Sample(pts, labs),
        budget=len(idx),
        drawn_budget=drawn_budget,
        clean=S_clean,
        coin_set=coin_set,
        flagged=result.flagged,
        flag_reason=result.flag_reason,
    )
    ledger.validate()
    return ledger.reapply(), ledger


def malicious_corrupt(
    D: DiscreteDistribution,
    c: Hypothesis,
    n: int,
    eta: float,
    strategy: Callable[[int, Sample, DiscreteDistribution, Hypothesis, RngHandle], tuple[int, int]],
    rng: RngHandle,
) -> tuple[Sample, CorruptionLedger]:
    """Online malicious corruption.

    For each position independently: with probability 1-η the clean example
    ``(x_i, c(x_i))``, otherwise the strategy's choice. The strategy is called
    once per corrupted position and only ever sees the examples emitted so
    far (the online protocol is enforced by construction: it receives the
    prefix, never the full sample).
    """
    NoiseRate(eta)
    gen = rng.split(0).generator()
    coins = gen.random(n) < eta
    clean_pts = D.sample_points(n, rng.split(1))
    clean_labs = (
        c.evaluate_many(clean_pts) if n else np.empty(0, dtype=np.int8)
    )
    out_pts = clean_pts.copy()
    out_labs = clean_labs.copy()
    heads = np.flatnonzero(coins)
    for j, i in enumerate(heads.tolist()):
        prefix = Sample(out_pts[:i], out_labs[:i])
        point, label = strategy(i, prefix, D, c, rng.split(2, j))
        ex = LabeledExample(int(point), int(label))
        out_pts[i] = ex.point
        out_labs[i] = ex.label
    clean = Sample(clean_pts, clean_labs)
    result = StrategyResult(
        [(int(i), (int(out_pts[i]), int(out_labs[i]))) for i in heads]
    )
    _, ledger = _apply_choices(clean, result, drawn_budget=int(coins.sum()))
    return Sample(out_pts, out_labs), ledger


def strong_malicious_corrupt(
    S_clean: Sample,
    eta: float,
    strategy: Callable[..., StrategyResult | Sequence[Choice]],
    rng: RngHandle,
    c: Hypothesis | None = None,
    D: DiscreteDistribution | None = None,
) -> tuple[Sample, CorruptionLedger]:
    """Strong malicious corruption.

    The coin set Z is drawn as independent η-coins over the positions; the
    strategy sees the entire clean sample and Z, and may replace any subset
    of Z (unused positions keep their clean examples). Writing outside Z is
    an error.
    """
    NoiseRate(eta)
    n = len(S_clean)
    gen = rng.split(0).generator()
    Z = np.flatnonzero(gen.random(n) < eta)
    result = _as_result(strategy(S_clean, Z, c, D, rng.split(1)))
    allowed = set(Z.tolist())
    for pos, _ in result.choices:
        if pos not in allowed:
            raise ValueError(f"strategy wrote outside its coin set: position {pos}")
    sample, ledger = _apply_choices(S_clean, result, drawn_budget=len(Z), coin_set=Z)
    return sample, ledger


def nasty_corrupt(
    S_clean: Sample,
    eta: float,
    strategy: Callable[..., StrategyResult | Sequence[Choice]],
    rng: RngHandle,
    c: Hypothesis | None = None,
    D: DiscreteDistribution | None = None,
) -> tuple[Sample, CorruptionLedger]:
    """Nasty corruption with the budget-first protocol.

    A budget ``z`` is drawn first as the sum of n explicit η-coins (so its
    law is exactly Bin(n, η) and independent of the sample); the strategy
    sees the whole clean sample and ``z`` and returns at most ``z``
    replacements, applied in place.
    """
    NoiseRate(eta)
    n = len(S_clean)
    gen = rng.split(0).generator()
    z = int((gen.random(n) < eta).sum())
    result = _as_result(strategy(S_clean, z, c, D, rng.split(1)))
    if len(result.choices) > z:
        raise ValueError(f"strategy used {len(result.choices)} corruptions, budget {z}")
    return _apply_choices(S_clean, result, drawn_budget=z)


def fixed_rate_nasty_corrupt(
    S_clean: Sample,
    eta: float,
    strategy: Callable[..., StrategyResult | Sequence[Choice]],
    rng: RngHandle | None = None,
    c: Hypothesis | None = None,
    D: DiscreteDistribution | None = None,
) -> tuple[Sample, CorruptionLedger]:
    """Fixed-rate nasty corruption: exactly ⌊ηn⌋ positions replaced."""
    NoiseRate(eta)
    n = len(S_clean)
    k = int(np.floor(eta * n))
    result = _as_result(strategy(S_clean, k, c, D, rng.split(1) if rng else None))
    if len(result.choices) != k:
        raise ValueError(f"fixed-rate strategy must use exactly {k} corruptions, used {len(result.choices)}")
    return _apply_choices(S_clean, result, drawn_budget=k)


def huber_sample(
    D: DiscreteDistribution,
    c: Hypothesis,
    eta: float,
    outliers: DiscreteDistribution,
    n: int,
    rng: RngHandle,
) -> Sample:
    """Huber contamination: each example is clean w.p. 1-η, else an outlier.

    ``outliers`` is a distribution over the labeled-example index space
    (see :func:`noisylab.core.labeled_index`).
    """
    NoiseRate(eta)
    gen = rng.split(0).generator()
    coins = gen.random(n) < eta
    pts = D.sample_points(n, rng.split(1))
    labs = c.evaluate_many(pts) if n else np.empty(0, dtype=np.int8)
    n_out = int(coins.sum())
    if n_out:
        drawn = outliers.sample_points(n_out, rng.split(2))
        pts = pts.copy()
        labs = labs.copy()
        pts[coins] = drawn // 2
        labs[coins] = np.where(drawn % 2 == 1, -1, 1).astype(np.int8)
    return Sample(pts, labs)


def tv_distance(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Total variation distance ½‖p − q‖₁."""
    if len(p) != len(q):
        raise ValueError("distributions live on different domain sizes")
    return 0.5 * float(np.abs(p.weights - q.weights).sum())


def tv_corrupt(
    Dc: DiscreteDistribution, eta: float, Dprime: DiscreteDistribution
) -> DiscreteDistribution:
    """Validate an adversarial resampling distribution against its TV budget."""
    d = tv_distance(Dc, Dprime)
    if d > eta + 1e-12:
        raise ValueError(f"TV budget exceeded: d_TV = {d} > η = {eta}")
    return Dprime


def shift_mass(
    D: DiscreteDistribution, src: int, dst: int, mass: float
) -> DiscreteDistribution:
    """Builder for TV adversaries: move probability mass between two atoms."""
    w = D.weights.copy()
    if w[src] < mass - 1e-15:
        raise ValueError("not enough mass at the source atom")
    w[src] -= mass
    w[dst] += mass
    return DiscreteDistribution(w)


# --------------------------------------------------------------------------
# Named strategy registry (config files select adversaries by string id).
# --------------------------------------------------------------------------

_REGISTRY: dict[str, Callable[..., Callable]] = {}


def register_strategy(name: str) -> Callable:
    def deco(factory: Callable[..., Callable]) -> Callable:
        if name in _REGISTRY:
            raise ValueError(f"duplicate strategy id {name!r}")
        _REGISTRY[name] = factory
        return factory

    return deco


def make_strategy(name: str, params: Mapping | None = None) -> Callable:
    if name not in _REGISTRY:
        raise KeyError(f"unknown strategy id {name!r}; known: {sorted(_REGISTRY)}")
    return _REGISTRY[name](**dict(params or {}))


def strategy_names() -> list[str]:
    return sorted(_REGISTRY)


@register_strategy("noop")
def _noop_factory() -> Callable:
    """Uses no corruptions at all (any offline model)."""

    def strategy(S_clean: Sample, budget, c=None, D=None, rng=None) -> StrategyResult:
        return StrategyResult([])

    return strategy


@register_strategy("flip-first-z-labels")
def _flip_first_factory() -> Callable:
    """Nasty/fixed-rate strategy: flip the labels of the first z positions."""

    def strategy(S_clean: Sample, z: int, c=None, D=None, rng=None) -> StrategyResult:
        z = min(z, len(S_clean))
        return StrategyResult(
            [(i, (int(S_clean.points[i]), -int(S_clean.labels[i]))) for i in range(z)]
        )

    return strategy


@register_strategy("flip-random-labels")
def _flip_random_factory() -> Callable:
    """Nasty/fixed-rate strategy: flip the labels of z uniform positions."""

    def strategy(S_clean: Sample, z: int, c=None, D=None, rng=None) -> StrategyResult:
        z = min(z, len(S_clean))
        idx = rng.generator().choice(len(S_clean), size=z, replace=False)
        return StrategyResult(
            [(int(i), (int(S_clean.points[i]), -int(S_clean.labels[i]))) for i in idx]
        )

    return strategy


@register_strategy("constant-replacement")
def _constant_factory(point: int = 0, label: int = 1) -> Callable:
    """Replace every budgeted position with a fixed labeled example."""

    def strategy(S_clean: Sample, budget, c=None, D=None, rng=None) -> StrategyResult:
        if isinstance(budget, (int, np.integer)):
            positions = range(min(int(budget), len(S_clean)))
        else:  # strong malicious: budget is the coin set
            positions = [int(i) for i in budget]
        return StrategyResult([(int(i), (point, label)) for i in positions])

    return strategy


@register_strategy("contradict-replaced")
def _contradict_replaced_factory() -> Callable:
    """Strong-malicious strategy: each coin position becomes a contradiction
    of a uniformly chosen clean example (the canonical ICE attack)."""

    def strategy(S_clean: Sample, Z: np.ndarray, c=None, D=None, rng=None) -> StrategyResult:
        if len(Z) == 0 or len(S_clean) == 0:
            return StrategyResult([])
        gen = rng.generator()
        targets = gen.integers(0, len(S_clean), size=len(Z))
        return StrategyResult(
            [
                (int(i), (int(S_clean.points[t]), -int(S_clean.labels[t])))
                for i, t in zip(Z.tolist(), targets.tolist())
            ]
        )

    return strategy

"""Key/value separation construction with an erasure-decoding learner.

The domain splits into a key side (a ``kappa`` fraction, partitioned into
``w`` equal blocks) and a value side. A concept is indexed by a low-weight
codeword ``W_p`` of a random linear code and an extractor seed ``q``: key-side
points in block ``j`` are labeled by bit ``j`` of ``W_p``; value-side points
are labeled by the keyed PRF under the extracted key ``Ext(W_p, q)``.

The nasty adversary flips every example in a ``-1`` key block to ``+1``
(erasing the key information carried by corrupted blocks); the learner
estimates each key bit by thresholded per-block counts, erasure-list-decodes
the resulting partial word, and hypothesis-tests every candidate
``(codeword, seed)`` pair on the sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .codes import (
    CodeParams,
    Codeword,
    DecodeFailure,
    GeneratorMatrix,
    ReceivedWord,
    binary_entropy,
    encode,
    erasure_list_decode,
    gen_random_linear_code,
    low_weight_codewords,
    signs_to_mask,
)
from .core import (
    DiscreteDistribution,
    Hypothesis,
    RngHandle,
    Sample,
    TableHypothesis,
)
from .cryptoprim import ExtractorSpec, PrfKey, extract, prf_truth_table
from .learn import select_best_hypothesis
from .noise import StrategyResult

__all__ = [
    "SepParams",
    "SepInstance",
    "SepConcept",
    "sep_concept_eval",
    "sep_nasty_strategy",
    "sep_key_erasure_strategy",
    "sep_malicious_learner",
    "sep_simulate_T_nasty",
]


def _block_size_for(w: int, d: int, kappa: Fraction) -> int:
    """Smallest per-block size making the key fraction exactly ``kappa``
    with an integer value side of at least ``2^d`` points."""
    ratio = (1 - kappa) / kappa  # value_size / key_size
    b = max(1, math.ceil((1 << d) / (ratio * w)))
    while True:
        value = w * b * ratio
        if value.denominator == 1 and value >= (1 << d):
            return b
        b += 1


@dataclass(frozen=True)
class SepParams:
    """Parameter pack for the key/value separation experiment.

    ``eta_N``/``eta_M`` are the two noise rates, ``kappa`` the exact key-side
    mass, ``w`` the block (codeword) count, ``d`` the value-side dimension
    exponent, ``u`` the extractor seed length, ``m_out`` the extracted key
    length, ``n`` the sample size, and ``slack`` the multiplicative slack
    applied to every asymptotic inequality at desk scale.
    """

    eta_N: float
    eta_M: float
    kappa: Fraction
    code: CodeParams
    w: int
    d: int
    u: int
    n: int
    block_size: int
    m_out: int
    slack: float = 1.25

    def __post_init__(self) -> None:
        if not 0 < self.eta_N < 1 or not 0 < self.eta_M < 1:
            raise ValueError("noise rates must be in (0, 1)")
        lower = self.eta_M / ((1 - self.eta_M) * self.code.tau)
        if not lower < self.kappa < 1:
            raise ValueError(
                f"need eta_M/((1-eta_M)*tau) = {lower} < kappa < 1, got {self.kappa}"
            )
        if (Fraction(self.w * self.block_size) * (1 - self.kappa) / self.kappa).denominator != 1:
            raise ValueError("block size does not give an integer value side")
        rows = self.code.rho * self.w
        if abs(rows - round(rows)) > 1e-9:
            raise ValueError("rho*w must be an integer")

    @classmethod
    def create(
        cls,
        eta_N: float,
        eta_M: float,
        kappa: float | Fraction,
        rho: float,
        tau: float,
        w: int,
        d: int,
        u: int,
        n: int | None = None,
        lam: float | None = None,
        m_out: int | None = None,
        L: int = 64,
        slack: float = 1.25,
    ) -> "SepParams":
        """Explicit-rate construction (desk-scale parameter packs)."""
        kap = kappa if isinstance(kappa, Fraction) else Fraction(str(kappa))
        if lam is None:
            lam = 0.5 * (rho + binary_entropy(eta_N) - 1)
        code = CodeParams(rho=rho, tau=tau, lam=lam, eta_N=eta_N, L=L)
        b = _block_size_for(w, d, kap)
        if n is None:
            n = cls._auto_n(w, eta_M, kap)
        if m_out is None:
            m_out = max(1, w // 2)
        return cls(
            eta_N=eta_N, eta_M=eta_M, kappa=kap, code=code,
            w=w, d=d, u=u, n=n, block_size=b, m_out=m_out, slack=slack,
        )

    @classmethod
    def from_ratio(
        cls, r: float, w: int, d: int, u: int, n: int | None = None,
        L: int = 64, slack: float = 1.25,
    ) -> "SepParams":
        """Rate pack derived from the ratio ``r > 1``:
        ``eta_N = 2^(-8r)``, ``eta_M = H(eta_N)/(H(eta_N)+2)``, code constants
        auto-derived, and ``kappa`` placed just above its lower bound."""
        if r <= 1:
            raise ValueError("ratio must be > 1")
        eta_N = 2.0 ** (-8 * r)
        H = binary_entropy(eta_N)
        eta_M = H / (H + 2)
        code = CodeParams.derive(eta_N, eta_M, L=L)
        # Snap the rate down to an integer number of rows at this finite w
        # (the derived rate is asymptotic; rounding down never exceeds it).
        rows = max(1, math.floor(code.rho * w))
        rho_w = rows / w
        code = CodeParams(
            rho=rho_w, tau=code.tau, lam=0.5 * (rho_w + H - 1), eta_N=eta_N, L=L
        )
        kappa_f = 0.998 * eta_M / ((1 - eta_M) * code.tau) + 0.002
        kap = Fraction(kappa_f).limit_denominator(10_000)
        b = _block_size_for(w, d, kap)
        if n is None:
            n = cls._auto_n(w, eta_M, kap)
        return cls(
            eta_N=eta_N, eta_M=eta_M, kappa=kap, code=code,
            w=w, d=d, u=u, n=n, block_size=b, m_out=max(1, w // 2), slack=slack,
        )

    @staticmethod
    def _auto_n(w: int, eta_M: float, kappa: Fraction) -> int:
        # Size n so the threshold slack Delta = n^0.51 is at most D/4.
        base = 4 * w / ((1 - eta_M) * float(kappa))
        return math.ceil(base ** (1 / 0.49))

    @property
    def key_size(self) -> int:
        return self.w * self.block_size

    @property
    def value_size(self) -> int:
        return int(Fraction(self.key_size) * (1 - self.kappa) / self.kappa)

    @property
    def domain_size(self) -> int:
        return self.key_size + self.value_size

    @property
    def D(self) -> float:
        """Expected clean (uncorrupted) examples per key block."""
        return (1 - self.eta_M) * float(self.kappa) * self.n / self.w

    @property
    def Delta(self) -> float:
        """Threshold slack n^0.51."""
        return self.n ** 0.51

    @property
    def extractor_spec(self) -> ExtractorSpec:
        return ExtractorSpec(w=self.w, u=self.u, m_out=self.m_out)

    def block_of(self, points: np.ndarray) -> np.ndarray:
        """Key-block index of each point (caller restricts to the key side)."""
        return points // self.block_size


class SepConcept(Hypothesis):
    """A concept ``c_{p,q}``: key blocks labeled by ``W_p``, value side by
    the PRF under the extracted key. Carries a cached full truth table."""

    def __init__(self, params: SepParams, codeword: Codeword, p: int, q: int):
        self.params = params
        self.codeword = codeword
        self.p = p
        self.q = q
        self.key = PrfKey.from_signs(extract(codeword.bits, q, params.extractor_spec))
        key_side = np.repeat(
            codeword.bits.astype(np.int8), params.block_size
        )
        value_side = prf_truth_table(self.key, params.value_size)
        table = np.concatenate([key_side, value_side])
        table.setflags(write=False)
        self.table = table
        self.domain_size = params.domain_size

    def evaluate_many(
        self, points: np.ndarray, query_rng: RngHandle | None = None
    ) -> np.ndarray:
        return self.table[points]

    def hypothesis(self) -> TableHypothesis:
        return TableHypothesis(self.table)


def sep_concept_eval(c: SepConcept, x: int) -> int:
    """Label of point ``x`` under ``c`` (key-block bit or PRF output)."""
    return c.evaluate(x)


class SepInstance:
    """One sampled experiment instance: parameters plus a concrete code."""

    def __init__(self, params: SepParams, G: GeneratorMatrix):
        if G.w != params.w:
            raise ValueError("code length must equal the block count")
        self.params = params
        self.G = G
        self.low_weight = low_weight_codewords(G, params.eta_N * params.w)

    @classmethod
    def generate(cls, params: SepParams, rng: RngHandle) -> "SepInstance":
        G = gen_random_linear_code(params.code.rho, params.w, rng)
        return cls(params, G)

    def concept(self, p: int, q: int) -> SepConcept:
        return SepConcept(self.params, self.low_weight[p], p, q)

    def distribution(self) -> DiscreteDistribution:
        return DiscreteDistribution.uniform(self.params.domain_size)


def sep_nasty_strategy(inst: SepInstance):
    """Nasty strategy flipping every example in a ``-1`` key block to ``+1``.

    Blocks are processed in index order (sample order within a block); if the
    drawn budget runs out mid-plan the trial is flagged as exhausted.
    """
    params = inst.params

    def strategy(S_clean: Sample, z: int, c: SepConcept, D=None, rng=None) -> StrategyResult:
        minus_blocks = np.flatnonzero(c.codeword.bits == -1)
        key_mask = S_clean.points < params.key_size
        blocks = np.where(key_mask, params.block_of(S_clean.points), -1)
        choices = []
        exhausted = False
        for j in minus_blocks.tolist():
            for pos in np.flatnonzero(blocks == j).tolist():
                if len(choices) >= z:
                    exhausted = True
                    break
                choices.append((int(pos), (int(S_clean.points[pos]), 1)))
            if exhausted:
                break
        return StrategyResult(
            choices,
            flagged=exhausted,
            flag_reason="budget exhausted" if exhausted else None,
        )

    return strategy


def sep_key_erasure_strategy(inst: SepInstance):
    """Strong-malicious strategy erasing whole key blocks.

    Spends the coin set in chunks of ``ceil(D)``: each chunk floods one
    uniformly chosen key block with oppositely-labeled in-block points, which
    pushes both of that block's label counts past the learner's threshold and
    turns its key-bit estimate into an erasure.
    """
    params = inst.params
    chunk = math.ceil(params.D)

    def strategy(S_clean: Sample, Z: np.ndarray, c: SepConcept, D=None, rng=None) -> StrategyResult:
        n_erase = min(len(Z) // chunk, params.w)
        gen = rng.generator()
        blocks = gen.choice(params.w, size=n_erase, replace=False)
        choices = []
        for t, j in enumerate(blocks.tolist()):
            lab = -int(c.codeword.bits[j])
            lo = j * params.block_size
            pts = gen.integers(lo, lo + params.block_size, size=chunk)
            for pos, x in zip(Z[t * chunk : (t + 1) * chunk].tolist(), pts.tolist()):
                choices.append((int(pos), (int(x), lab)))
        return StrategyResult(choices)

    return strategy


def _key_bit_thresholds(S: Sample, params: SepParams) -> np.ndarray:
    """Per-block key-bit estimates: +1 / -1 when one label count clears
    ``D - Delta`` and the other stays below it, 0 (erasure) otherwise."""
    key = S.points < params.key_size
    blocks = params.block_of(S.points[key])
    labels = S.labels[key]
    s_plus = np.bincount(blocks[labels == 1], minlength=params.w)
    s_minus = np.bincount(blocks[labels == -1], minlength=params.w)
    thr = params.D - params.Delta
    z = np.zeros(params.w, dtype=np.int8)
    z[(s_minus < thr) & (thr <= s_plus)] = 1
    z[(s_plus < thr) & (thr <= s_minus)] = -1
    return z


def sep_malicious_learner(
    S: Sample, inst: SepInstance, rng: RngHandle | None = None
) -> tuple[Hypothesis, dict]:
    """Threshold key bits, erasure-list-decode, hypothesis-test candidates.

    Returns ``(hypothesis, details)``; on decode failure or an empty
    candidate list the trial is flagged and a constant fallback returned.
    """
    params = inst.params
    z = _key_bit_thresholds(S, params)
    details: dict = {"z": z, "flagged": False, "flag_reason": None, "candidates": []}

    low_masks = {signs_to_mask(cw.bits): p for p, cw in enumerate(inst.low_weight)}
    try:
        messages = erasure_list_decode(inst.G, ReceivedWord(z), cap=params.code.L)
    except DecodeFailure as exc:
        details.update(flagged=True, flag_reason=f"decode failure: {exc}")
        return TableHypothesis.constant(1, params.domain_size), details

    candidate_ps = []
    for msg in messages:
        cmask = signs_to_mask(encode(inst.G, msg).bits)
        if cmask in low_masks:
            candidate_ps.append(low_masks[cmask])
    candidate_ps = sorted(set(candidate_ps))
    details["candidates"] = candidate_ps

    if not candidate_ps:
        details.update(flagged=True, flag_reason="no low-weight candidate decoded")
        return TableHypothesis.constant(1, params.domain_size), details

    hyps = []
    labels = []
    for p in candidate_ps:
        for q in range(params.extractor_spec.seed_count()):
            hyps.append(inst.concept(p, q))
            labels.append((p, q))
    idx, best = select_best_hypothesis(hyps, S)
    details["selected"] = labels[idx]
    return best, details


def sep_simulate_T_nasty(
    T_value: Sample, inst: SepInstance, rng: RngHandle
) -> Sample:
    """Rebuild the nasty-corrupted sample's law from clean value-side examples.

    Each of the ``n`` positions independently lands in key block ``j`` with
    probability ``kappa/w`` (for each ``j``) and otherwise consumes the next
    fresh example from ``T_value``; block positions become a uniform in-block
    point labeled ``+1``.
    """
    params = inst.params
    n = params.n
    gen = rng.generator()
    u = gen.random(n)
    kap = float(params.kappa)
    is_key = u < kap
    block = np.minimum((u / (kap / params.w)).astype(np.int64), params.w - 1)
    n_value = int((~is_key).sum())
    if n_value > len(T_value):
        raise ValueError(f"simulation needs {n_value} value examples, got {len(T_value)}")
    pts = np.empty(n, dtype=np.int64)
    labs = np.empty(n, dtype=np.int8)
    key_idx = np.flatnonzero(is_key)
    offsets = gen.integers(0, params.block_size, size=key_idx.size)
    pts[key_idx] = block[key_idx] * params.block_size + offsets
    labs[key_idx] = 1
    val_idx = np.flatnonzero(~is_key)
    pts[val_idx] = T_value.points[: val_idx.size]
    labs[val_idx] = T_value.labels[: val_idx.size]
    return Sample(pts, labs)

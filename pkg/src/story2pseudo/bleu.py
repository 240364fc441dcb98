"""BLEU scoring built from first principles.

Clipped n-gram precisions up to a maximum order (default 4), a brevity
penalty for short candidates, and a uniform-weight geometric mean. No
external metric library is involved; everything is counted here.

Tokens are compared exactly (case-sensitive) — for code and pseudocode,
case is semantic. Callers tokenize; the convention throughout the
project is a plain whitespace split.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

# Substituted for a zero numerator when smoothing is enabled.
SMOOTH_EPS = 1e-9

TokenSeq = Sequence[str]


@dataclass(frozen=True)
class NGramProfile:
    """Sliding-window n-gram counts for one token sequence."""

    n: int
    counts: Counter = field(default_factory=Counter)

    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class BleuReport:
    """Per-order precisions plus the combined score.

    ``precisions[i]`` is the order-(i+1) clipped precision as a float;
    ``numerators``/``denominators`` hold the underlying counts. Orders
    whose denominator is zero (no candidate n-grams that long exist)
    are excluded from the geometric mean rather than treated as zero.
    """

    precisions: tuple[float, ...]
    numerators: tuple[int, ...]
    denominators: tuple[int, ...]
    brevity_penalty: float
    score: float
    candidate_len: int
    reference_len: int
    max_n: int
    smoothing: bool


def ngram_profile(tokens: TokenSeq, n: int) -> NGramProfile:
    """Count the n-grams of ``tokens``; empty profile when the window is too long."""
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    counts = Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    return NGramProfile(n=n, counts=counts)


def clipped_precision(
    candidate: TokenSeq, references: Sequence[TokenSeq], n: int
) -> tuple[int, int]:
    """Return (numerator, denominator) of the order-n clipped precision.

    Each candidate n-gram counts at most as often as it appears in the
    single reference where it is most frequent.
    """
    if not candidate:
        raise ValueError("empty candidate")
    cand = ngram_profile(candidate, n)
    ref_profiles = [ngram_profile(ref, n) for ref in references]
    numerator = 0
    for gram, count in cand.counts.items():
        best_ref = max((p.counts.get(gram, 0) for p in ref_profiles), default=0)
        numerator += min(count, best_ref)
    return numerator, cand.total()


def brevity_penalty(candidate_len: int, reference_len: int) -> float:
    """exp(1 - r/c) for candidates shorter than the reference, else 1."""
    if candidate_len <= 0 or reference_len <= 0:
        raise ValueError(
            f"lengths must be positive, got {candidate_len} and {reference_len}"
        )
    if candidate_len >= reference_len:
        return 1.0
    return math.exp(1.0 - reference_len / candidate_len)


def _effective_ref_len(candidate_len: int, references: Sequence[TokenSeq]) -> int:
    # Closest reference length to the candidate; ties broken toward shorter.
    return min((len(r) for r in references), key=lambda L: (abs(L - candidate_len), L))


def corpus_bleu(
    pairs: Sequence[tuple[TokenSeq, Sequence[TokenSeq]]],
    max_n: int = 4,
    smoothing: bool = False,
) -> BleuReport:
    """Corpus-level BLEU over (candidate, references) pairs.

    Clipped numerators and denominators are summed across the corpus per
    order before the ratio is taken. The reference length is, per pair,
    the reference closest in length to the candidate (ties go to the
    shorter one). With ``smoothing`` on, zero numerators are replaced by
    a tiny epsilon instead of annihilating the geometric mean.
    """
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    if not pairs:
        raise ValueError("empty corpus")

    numerators = [0] * max_n
    denominators = [0] * max_n
    candidate_len = 0
    reference_len = 0
    for candidate, references in pairs:
        if not candidate:
            raise ValueError("empty candidate")
        if not references:
            raise ValueError("candidate without references")
        candidate_len += len(candidate)
        reference_len += _effective_ref_len(len(candidate), references)
        for i in range(max_n):
            num, den = clipped_precision(candidate, references, i + 1)
            numerators[i] += num
            denominators[i] += den

    precisions: list[float] = []
    combined: list[float] = []
    for num, den in zip(numerators, denominators):
        if den == 0:
            # No candidate n-grams of this order anywhere: order is
            # undefined, excluded from the mean (not a zero).
            precisions.append(0.0)
            continue
        effective = SMOOTH_EPS if (num == 0 and smoothing) else float(num)
        p = effective / den
        precisions.append(p)
        combined.append(p)

    bp = brevity_penalty(candidate_len, reference_len)
    if not combined or any(p == 0.0 for p in combined):
        score = 0.0
    else:
        score = bp * math.exp(sum(math.log(p) for p in combined) / len(combined))
    return BleuReport(
        precisions=tuple(precisions),
        numerators=tuple(numerators),
        denominators=tuple(denominators),
        brevity_penalty=bp,
        score=score,
        candidate_len=candidate_len,
        reference_len=reference_len,
        max_n=max_n,
        smoothing=smoothing,
    )


def sentence_bleu(
    candidate: TokenSeq,
    references: Sequence[TokenSeq],
    max_n: int = 4,
    smoothing: bool = True,
) -> BleuReport:
    """corpus_bleu on a singleton corpus; smoothing defaults on.

    Sentence-level zeros destroy diagnostics, so the epsilon substitution
    is the default here, unlike at corpus level where a zero is a finding.
    """
    return corpus_bleu([(candidate, references)], max_n=max_n, smoothing=smoothing)


def format_report(report: BleuReport) -> str:
    """Aligned plain-text rendering of a BleuReport."""
    lines = []
    for i, (p, num, den) in enumerate(
        zip(report.precisions, report.numerators, report.denominators), start=1
    ):
        lines.append(f"p{i:<2} {p:12.8f}   ({num}/{den})")
    lines.append(f"bp  {report.brevity_penalty:12.8f}")
    lines.append(f"len {report.candidate_len} candidate / {report.reference_len} reference")
    lines.append(f"BLEU-{report.max_n} = {report.score:.8f}")
    return "\n".join(lines)

"""String-similarity metrics for generated questions: BLEU, ROUGE-L and
CIDEr-D over pre-tokenized inputs.

One tokenizer is used for every system under comparison: lowercase, then
split on whitespace with punctuation separated into its own tokens.
"""

from __future__ import annotations

import math
import re
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

Tokens = Sequence[str]


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _ngrams(tokens: Tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: Tokens, references: Sequence[Tokens], max_n: int = 4, smooth: bool = False) -> float:
    """Sentence BLEU: geometric mean of modified n-gram precisions with the
    brevity penalty.

    Orders longer than the candidate contribute no n-grams and are skipped
    (effective-order), so a candidate identical to a reference scores 1.0
    at any length. Without smoothing, any zero precision at an available
    order zeroes the score; ``smooth`` applies add-one smoothing to orders
    above 1.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    if not references:
        raise ValueError("at least one reference required")
    candidate = list(candidate)
    if not candidate:
        warnings.warn("empty candidate scores 0", stacklevel=2)
        return 0.0
    logs = []
    for n in range(1, max_n + 1):
        cand_counts = _ngrams(candidate, n)
        total = sum(cand_counts.values())
        if total == 0:
            continue
        max_ref = Counter()
        for ref in references:
            for gram, count in _ngrams(list(ref), n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        clipped = sum(min(count, max_ref[gram]) for gram, count in cand_counts.items())
        if smooth and n > 1:
            clipped, total = clipped + 1, total + 1
        if clipped == 0:
            return 0.0
        logs.append(math.log(clipped / total))
    c = len(candidate)
    # closest reference length; ties go to the shorter reference
    r = min((abs(len(ref) - c), len(ref)) for ref in references)[1]
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return bp * math.exp(sum(logs) / len(logs))


class TextPRF(NamedTuple):
    precision: float
    recall: float
    f: float


def rouge_l(candidate: Tokens, reference: Tokens) -> TextPRF:
    """LCS-based ROUGE-L with beta = 1 (plain harmonic mean)."""
    cand, ref = list(candidate), list(reference)
    if not cand or not ref:
        return TextPRF(0.0, 0.0, 0.0)
    # classic LCS length DP, rolling row
    prev = [0] * (len(ref) + 1)
    for tok in cand:
        cur = [0]
        for j, rtok in enumerate(ref, start=1):
            cur.append(prev[j - 1] + 1 if tok == rtok else max(prev[j], cur[-1]))
        prev = cur
    lcs = prev[-1]
    p = lcs / len(cand)
    r = lcs / len(ref)
    f = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return TextPRF(p, r, f)


@dataclass(frozen=True)
class CiderResult:
    per_item: tuple[float, ...]
    mean: float


def cider(
    candidates: Sequence[Tokens],
    references: Sequence[Sequence[Tokens]],
    max_n: int = 4,
    sigma: float = 6.0,
) -> CiderResult:
    """CIDEr-D: TF-IDF weighted n-gram similarity averaged over n = 1..max_n,
    scaled by 10, with a Gaussian length-difference penalty.

    Document frequency of an n-gram counts the corpus items whose reference
    set contains it, so a corpus of at least 2 items is required for a
    meaningful IDF.
    """
    if len(candidates) != len(references):
        raise ValueError("candidates and references must be corpus-aligned")
    if len(candidates) == 0:
        raise ValueError("empty corpus")
    if len(candidates) < 2:
        warnings.warn("single-item corpus has degenerate IDF; scores will be 0", stacklevel=2)

    doc_freq = [Counter() for _ in range(max_n)]
    for refs in references:
        for n in range(1, max_n + 1):
            grams = set()
            for ref in refs:
                grams |= set(_ngrams(list(ref), n))
            for gram in grams:
                doc_freq[n - 1][gram] += 1
    log_corpus = math.log(len(candidates))

    def weighted(tokens: Tokens, n: int) -> tuple[dict, float]:
        vec = {}
        for gram, count in _ngrams(list(tokens), n).items():
            idf = log_corpus - math.log(max(1.0, doc_freq[n - 1][gram]))
            vec[gram] = count * idf
        norm = math.sqrt(sum(v * v for v in vec.values()))
        return vec, norm

    per_item = []
    for cand, refs in zip(candidates, references):
        if not refs:
            raise ValueError("every item needs at least one reference")
        cand = list(cand)
        cand_vecs = [weighted(cand, n) for n in range(1, max_n + 1)]
        acc = [0.0] * max_n
        for ref in refs:
            ref = list(ref)
            penalty = math.exp(-((len(cand) - len(ref)) ** 2) / (2 * sigma**2))
            for n in range(1, max_n + 1):
                cvec, cnorm = cand_vecs[n - 1]
                rvec, rnorm = weighted(ref, n)
                sim = sum(min(w, rvec.get(gram, 0.0)) * rvec.get(gram, 0.0) for gram, w in cvec.items())
                if cnorm > 0 and rnorm > 0:
                    sim /= cnorm * rnorm
                else:
                    sim = 0.0
                acc[n - 1] += sim * penalty
        score = 10.0 * sum(acc) / max_n / len(refs)
        per_item.append(score)
    return CiderResult(per_item=tuple(per_item), mean=float(sum(per_item) / len(per_item)))

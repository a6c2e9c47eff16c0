"""Lexically constrained beam search with disjunctive positive constraints.

The search works over integer token ids from a pluggable scorer. Each
ConstraintSet is satisfied when at least one of its alternatives appears
contiguously in the output; hypotheses are banked by how many sets they
have satisfied and the beam is divided across banks every step so that
constraint-complete hypotheses are never starved. A hypothesis may only
emit the end token once every set is satisfied.
"""

from __future__ import annotations

import json
import math
import re
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, Sequence

import numpy as np

NOUN_TAGS = frozenset({"NOUN", "PROPN", "NN", "NNS", "NNP", "NNPS"})


class TokenScorer(Protocol):
    """Next-token log-probability source.

    ``score(prefix)`` returns one finite log-probability per vocabulary id;
    the exponentiated row must sum to 1 within 1e-6. Implementations must
    be safe for concurrent read-only use.
    """

    @property
    def vocab_size(self) -> int: ...

    @property
    def end_token(self) -> int: ...

    def score(self, prefix: Sequence[int]) -> np.ndarray: ...


class UniformScorer:
    """Every token equally likely at every step."""

    def __init__(self, vocab_size: int, end_token: int | None = None):
        self._n = vocab_size
        self._end = vocab_size - 1 if end_token is None else end_token
        self._row = np.full(vocab_size, -math.log(vocab_size))

    @property
    def vocab_size(self) -> int:
        return self._n

    @property
    def end_token(self) -> int:
        return self._end

    def score(self, prefix: Sequence[int]) -> np.ndarray:
        return self._row


END_WORD = "</s>"


class NgramFileScorer:
    """File-backed n-gram scorer with add-one smoothing, for fixtures.

    Counts file: one "w1 ... wk<TAB>count" per line ('#' lines ignored);
    the vocabulary is the set of unigram words plus the end marker and the
    order is the longest n-gram present. P(w | ctx) uses the longest
    context available: (count(ctx + w) + 1) / (count(ctx) + V).
    """

    def __init__(self, path):
        self.counts: dict[tuple[str, ...], int] = {}
        order = 1
        words: set[str] = set()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            gram_part, _, count_part = line.rpartition("\t")
            if not gram_part:
                raise ValueError(f"bad counts line (need 'ngram<TAB>count'): {line!r}")
            gram = tuple(gram_part.split())
            self.counts[gram] = self.counts.get(gram, 0) + int(count_part)
            order = max(order, len(gram))
            if len(gram) == 1:
                words.add(gram[0])
        words.discard(END_WORD)
        self.order = order
        self.id_to_token = sorted(words) + [END_WORD]
        self.token_to_id = {w: i for i, w in enumerate(self.id_to_token)}

    @property
    def vocab_size(self) -> int:
        return len(self.id_to_token)

    @property
    def end_token(self) -> int:
        return self.token_to_id[END_WORD]

    def tokenize(self, text: str) -> list[int]:
        out = []
        for w in text.split():
            if w not in self.token_to_id:
                raise KeyError(f"word {w!r} not in scorer vocabulary")
            out.append(self.token_to_id[w])
        return out

    def decode(self, tokens: Sequence[int]) -> list[str]:
        return [self.id_to_token[t] for t in tokens]

    def score(self, prefix: Sequence[int]) -> np.ndarray:
        context = tuple(self.id_to_token[t] for t in prefix[max(0, len(prefix) - self.order + 1) :])
        v = self.vocab_size
        ctx_count = self.counts.get(context, 0) if context else sum(
            c for g, c in self.counts.items() if len(g) == 1
        )
        # add-one keeps every numerator positive, so this always normalizes
        probs = np.array(
            [(self.counts.get(context + (w,), 0) + 1) / (ctx_count + v) for w in self.id_to_token]
        )
        return np.log(probs / probs.sum())


class ProcessScorer:
    """Scorer living in an external process.

    Protocol: newline-delimited JSON over stdin/stdout; request
    {"prefix": [ids]}, response {"logprobs": [...]}. Lets a neural decoder
    be attached without importing its runtime.
    """

    def __init__(self, command: Sequence[str], vocab_size: int, end_token: int):
        self._vocab_size = vocab_size
        self._end = end_token
        self._proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    @property
    def vocab_size(self) -> int:
        return self._vocab_size

    @property
    def end_token(self) -> int:
        return self._end

    def score(self, prefix: Sequence[int]) -> np.ndarray:
        assert self._proc.stdin and self._proc.stdout
        self._proc.stdin.write(json.dumps({"prefix": list(prefix)}) + "\n")
        self._proc.stdin.flush()
        line = self._proc.stdout.readline()
        if not line:
            raise RuntimeError("scorer process closed its output")
        logprobs = json.loads(line)["logprobs"]
        if len(logprobs) != self._vocab_size:
            raise ValueError(f"scorer returned {len(logprobs)} logprobs, expected {self._vocab_size}")
        return np.asarray(logprobs, dtype=np.float64)

    def close(self):
        if self._proc.stdin:
            self._proc.stdin.close()
        self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


# --- noun spans and constraint construction ---------------------------------


@dataclass(frozen=True)
class NounSpan:
    """A maximal run of noun-tagged tokens; [start, end) into the source."""

    text: str
    start: int
    end: int


def extract_noun_spans(
    question: Sequence[str],
    pos_tags: Sequence[str],
    noun_tags: frozenset[str] = NOUN_TAGS,
) -> list[NounSpan]:
    """Maximal contiguous noun runs, in order, deduplicated by surface text."""
    if len(question) != len(pos_tags):
        raise ValueError(f"{len(question)} tokens vs {len(pos_tags)} tags")
    spans: list[NounSpan] = []
    seen: set[str] = set()
    i = 0
    n = len(question)
    while i < n:
        if pos_tags[i] in noun_tags:
            j = i
            while j < n and pos_tags[j] in noun_tags:
                j += 1
            text = " ".join(question[i:j])
            if text.lower() not in seen:
                seen.add(text.lower())
                spans.append(NounSpan(text=text, start=i, end=j))
            i = j
        else:
            i += 1
    return spans


def lexicon_pos_tags(tokens: Sequence[str], noun_words: set[str]) -> list[str]:
    """Fallback tagger for fixtures: NOUN if the lowercased token is in the
    word list, X otherwise."""
    return ["NOUN" if t.lower() in noun_words else "X" for t in tokens]


def read_pos_file(path) -> list[tuple[list[str], list[str]]]:
    """Parse token<TAB>tag lines, blank line between sentences."""
    sentences: list[tuple[list[str], list[str]]] = []
    tokens: list[str] = []
    tags: list[str] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            if tokens:
                sentences.append((tokens, tags))
                tokens, tags = [], []
            continue
        if "\t" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'token<TAB>tag'")
        token, tag = line.split("\t", 1)
        tokens.append(token)
        tags.append(tag.strip())
    if tokens:
        sentences.append((tokens, tags))
    return sentences


@dataclass(frozen=True)
class ConstraintSet:
    """Disjunctive positive constraint: satisfied when at least one
    alternative phrase appears contiguously in the output."""

    alternatives: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "alternatives", tuple(tuple(int(t) for t in alt) for alt in self.alternatives)
        )
        if not self.alternatives:
            raise ValueError("constraint set needs at least one alternative")
        if any(len(alt) == 0 for alt in self.alternatives):
            raise ValueError("alternatives must be non-empty")


def compile_constraints(
    spans: Sequence[NounSpan], tokenize: Callable[[str], Sequence[int]]
) -> list[ConstraintSet]:
    """One disjunctive set over all tokenized spans (the output must
    contain at least one of them); no spans means no constraints. Spans
    that tokenize to nothing are dropped with a warning."""
    import warnings

    alternatives = []
    seen = set()
    for span in spans:
        ids = tuple(tokenize(span.text))
        if not ids:
            warnings.warn(f"span {span.text!r} tokenized to nothing; dropped", stacklevel=2)
            continue
        if ids not in seen:
            seen.add(ids)
            alternatives.append(ids)
    if not alternatives:
        return []
    return [ConstraintSet(alternatives=tuple(alternatives))]


# --- match state -------------------------------------------------------------
#
# Per constraint set a hypothesis carries (satisfied, active partial
# matches), where a partial match (alt_index, matched_len) means the first
# matched_len tokens of that alternative are a suffix of the hypothesis.
# Keeping the full set of partials handles overlapping prefixes; a partial
# confers no bank credit until an alternative completes.

MatchState = tuple[bool, frozenset[tuple[int, int]]]

INITIAL_STATE: MatchState = (False, frozenset())


def advance_state(cset: ConstraintSet, state: MatchState, token: int) -> MatchState:
    satisfied, active = state
    if satisfied:
        return state
    new_active: set[tuple[int, int]] = set()
    for alt_idx, matched in active:
        alt = cset.alternatives[alt_idx]
        if alt[matched] == token:
            if matched + 1 == len(alt):
                return (True, frozenset())
            new_active.add((alt_idx, matched + 1))
    for alt_idx, alt in enumerate(cset.alternatives):
        if alt[0] == token:
            if len(alt) == 1:
                return (True, frozenset())
            new_active.add((alt_idx, 1))
    return (False, frozenset(new_active))


def bank_trace(sets: Sequence[ConstraintSet], tokens: Sequence[int]) -> list[int]:
    """Bank (number of satisfied sets) after each token; non-decreasing."""
    states = [INITIAL_STATE] * len(sets)
    trace = []
    for token in tokens:
        states = [advance_state(cs, st, token) for cs, st in zip(sets, states)]
        trace.append(sum(1 for s in states if s[0]))
    return trace


def contains_phrase(tokens: Sequence[int], phrase: Sequence[int]) -> bool:
    """Independent contiguous-subsequence check (no automaton)."""
    tokens, phrase = list(tokens), list(phrase)
    return any(tokens[i : i + len(phrase)] == phrase for i in range(len(tokens) - len(phrase) + 1))


def satisfies(tokens: Sequence[int], sets: Sequence[ConstraintSet]) -> bool:
    return all(any(contains_phrase(tokens, alt) for alt in cs.alternatives) for cs in sets)


# --- the search --------------------------------------------------------------


@dataclass(frozen=True)
class Hypothesis:
    tokens: tuple[int, ...]
    log_score: float
    bank: int
    match_state: tuple[MatchState, ...]


@dataclass(frozen=True)
class DecodeResult:
    tokens: tuple[int, ...]  # includes the end token when finished
    log_score: float
    finished: bool
    bank: int


class SearchExhausted(RuntimeError):
    """No hypothesis satisfied every constraint set within max_len."""

    def __init__(self, best_partial: DecodeResult | None):
        self.best_partial = best_partial
        super().__init__("constrained search exhausted without satisfying all constraint sets")


def _order_key(hyp: Hypothesis):
    # higher score first; ties broken toward smaller token ids
    return (-hyp.log_score, hyp.tokens)


def _allocate(candidates: list[Hypothesis], beam_size: int, n_sets: int) -> list[Hypothesis]:
    """Dynamic beam allocation: split the beam as evenly as possible across
    banks 0..n_sets (leftover slots go to higher banks), then refill any
    unused capacity with the best remaining candidates overall."""
    if len(candidates) <= beam_size:
        return sorted(candidates, key=_order_key)
    by_bank: dict[int, list[Hypothesis]] = {}
    for hyp in candidates:
        by_bank.setdefault(hyp.bank, []).append(hyp)
    n_banks = n_sets + 1
    base, extra = divmod(beam_size, n_banks)
    quotas = {bank: base + (1 if bank >= n_banks - extra else 0) for bank in range(n_banks)}
    chosen: list[Hypothesis] = []
    rest: list[Hypothesis] = []
    for bank, group in by_bank.items():
        group.sort(key=_order_key)
        q = quotas.get(bank, 0)
        chosen.extend(group[:q])
        rest.extend(group[q:])
    free = beam_size - len(chosen)
    if free > 0:
        rest.sort(key=_order_key)
        chosen.extend(rest[:free])
    return sorted(chosen, key=_order_key)


def constrained_beam_search(
    scorer: TokenScorer,
    sets: Sequence[ConstraintSet],
    beam_size: int = 5,
    max_len: int = 20,
) -> DecodeResult:
    """Beam search returning the best end-token-terminated sequence that
    contains at least one alternative of every constraint set.

    Expansion considers the scorer's top-`beam_size` tokens plus any token
    that starts or continues a phrase of an unsatisfied set; the end token
    is only available to fully-banked hypotheses. If nothing finishes
    within max_len steps the best fully-banked unfinished hypothesis is
    returned flagged as incomplete; with no such hypothesis either,
    SearchExhausted carries the best partial seen.
    """
    if beam_size < 1:
        raise ValueError("beam_size must be >= 1")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    sets = list(sets)
    end = scorer.end_token
    for cs in sets:
        for alt in cs.alternatives:
            if end in alt:
                raise ValueError("constraint alternatives must not contain the end token")
            if any(t < 0 or t >= scorer.vocab_size for t in alt):
                raise ValueError("constraint token outside scorer vocabulary")
    n_sets = len(sets)

    live = [Hypothesis(tokens=(), log_score=0.0, bank=0, match_state=(INITIAL_STATE,) * n_sets)]
    best_finished: Hypothesis | None = None
    best_banked: Hypothesis | None = None
    best_any: Hypothesis | None = None

    def better(a: Hypothesis | None, b: Hypothesis) -> Hypothesis:
        if a is None or _order_key(b) < _order_key(a):
            return b
        return a

    for _ in range(max_len):
        if not live:
            break
        candidates: list[Hypothesis] = []
        for hyp in live:
            logp = scorer.score(hyp.tokens)
            expand = set(int(t) for t in np.argsort(-logp, kind="stable")[:beam_size])
            for cs, (satisfied, active) in zip(sets, hyp.match_state):
                if satisfied:
                    continue
                for alt_idx, matched in active:
                    expand.add(cs.alternatives[alt_idx][matched])
                for alt in cs.alternatives:
                    expand.add(alt[0])
            expand.add(end)
            for token in sorted(expand):
                new_score = hyp.log_score + float(logp[token])
                if token == end:
                    if hyp.bank == n_sets:
                        finished = Hypothesis(
                            tokens=hyp.tokens + (end,),
                            log_score=new_score,
                            bank=hyp.bank,
                            match_state=hyp.match_state,
                        )
                        best_finished = better(best_finished, finished)
                    continue
                new_state = tuple(
                    advance_state(cs, st, token) for cs, st in zip(sets, hyp.match_state)
                )
                new_hyp = Hypothesis(
                    tokens=hyp.tokens + (token,),
                    log_score=new_score,
                    bank=sum(1 for s in new_state if s[0]),
                    match_state=new_state,
                )
                candidates.append(new_hyp)
        live = _allocate(candidates, beam_size, n_sets)
        for hyp in live:
            best_any = better(best_any, hyp)
            if hyp.bank == n_sets:
                best_banked = better(best_banked, hyp)

    if best_finished is not None:
        return DecodeResult(
            tokens=best_finished.tokens,
            log_score=best_finished.log_score,
            finished=True,
            bank=best_finished.bank,
        )
    if best_banked is not None:
        return DecodeResult(
            tokens=best_banked.tokens,
            log_score=best_banked.log_score,
            finished=False,
            bank=best_banked.bank,
        )
    partial = None
    if best_any is not None:
        partial = DecodeResult(
            tokens=best_any.tokens,
            log_score=best_any.log_score,
            finished=False,
            bank=best_any.bank,
        )
    raise SearchExhausted(partial)

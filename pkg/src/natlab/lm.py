"""Count-based n-gram language model with interpolated absolute discounting.

The event space of a model is the target vocabulary's corpus tokens plus UNK
and EOS; BOS appears only in contexts.  Every event has strictly positive
probability in every context, and each context distribution sums to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import BOS_ID, EOS_ID, UNK_ID, ParallelCorpus, Sentence, Vocabulary


@dataclass
class NGramLM:
    vocab: Vocabulary
    order: int = 2
    discount: float = 0.4
    # counts[k] maps a (k-1)-token context tuple to {event id: count}; the
    # unigram table lives at counts[1] under the empty context.  Counts are
    # floats so fine-tuning can mix in weighted data.
    counts: dict[int, dict[tuple[int, ...], dict[int, float]]] = field(default_factory=dict)
    totals: dict[int, dict[tuple[int, ...], float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not 0.0 < self.discount < 1.0:
            raise ValueError("discount must lie in (0, 1)")
        for k in range(1, self.order + 1):
            self.counts.setdefault(k, {})
            self.totals.setdefault(k, {})
        self.events: list[int] = list(self.vocab.corpus_ids) + [UNK_ID, EOS_ID]
        self._event_set = set(self.events)

    # -- training ---------------------------------------------------------

    def observe(self, sentence: Sequence[int], weight: float = 1.0) -> None:
        """Add the n-grams of one BOS...EOS-wrapped sentence to the count tables."""
        ids = [t if t in self._event_set else UNK_ID for t in sentence]
        padded = [BOS_ID] * (self.order - 1) + ids + [EOS_ID]
        start = self.order - 1
        for pos in range(start, len(padded)):
            for k in range(1, self.order + 1):
                ctx = tuple(padded[pos - k + 1:pos])
                table = self.counts[k].setdefault(ctx, {})
                table[padded[pos]] = table.get(padded[pos], 0.0) + weight
                self.totals[k][ctx] = self.totals[k].get(ctx, 0.0) + weight

    # -- scoring ----------------------------------------------------------

    def prob(self, event: int, context: Sequence[int]) -> float:
        """p(event | context) under interpolated absolute discounting.

        Backs off through shorter contexts down to a uniform distribution over
        the event space; an unseen context yields its backoff distribution
        exactly.
        """
        if event not in self._event_set:
            event = UNK_ID
        ctx = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        return self._prob(self.order, ctx, event)

    def _prob(self, k: int, context: tuple[int, ...], event: int) -> float:
        if k == 0:
            return 1.0 / len(self.events)
        ctx = context[-(k - 1):] if k > 1 else ()
        total = self.totals[k].get(ctx, 0)
        if total == 0:
            return self._prob(k - 1, ctx, event)
        table = self.counts[k][ctx]
        count = table.get(event, 0)
        lam = self.discount * len(table) / total
        return max(count - self.discount, 0.0) / total + lam * self._prob(k - 1, ctx, event)

    def logprob(self, sentence: Sequence[int]) -> float:
        """Natural-log probability of the sentence including its EOS transition."""
        ids = [t if t in self._event_set else UNK_ID for t in sentence]
        padded = [BOS_ID] * (self.order - 1) + ids + [EOS_ID]
        start = self.order - 1
        total = 0.0
        for pos in range(start, len(padded)):
            total += math.log(self._prob(self.order, tuple(padded[pos - self.order + 1:pos]), padded[pos]))
        return total


def train_lm(
    corpus: ParallelCorpus | Iterable[Sentence],
    order: int = 2,
    discount: float = 0.4,
    vocab: Vocabulary | None = None,
) -> NGramLM:
    """Fit an n-gram model on the target side of a corpus (or a sentence list)."""
    if isinstance(corpus, ParallelCorpus):
        sentences: list[Sentence] = corpus.targets()
        vocab = corpus.target_vocab
    else:
        sentences = list(corpus)
        if vocab is None:
            raise ValueError("training on raw sentences requires an explicit vocab")
    if not sentences:
        raise ValueError("cannot train a language model on an empty corpus")
    lm = NGramLM(vocab=vocab, order=order, discount=discount)
    for sentence in sentences:
        lm.observe(sentence)
    return lm


def lm_logprob(lm: NGramLM, sentence: Sequence[int]) -> float:
    return lm.logprob(sentence)


def perplexity(lm: NGramLM, corpus: ParallelCorpus | Iterable[Sentence]) -> float:
    """Corpus-level perplexity: exp of the negative per-token mean log-prob.

    The token count includes one EOS event per sentence, matching logprob.
    """
    if isinstance(corpus, ParallelCorpus):
        sentences: list[Sentence] = corpus.targets()
    else:
        sentences = list(corpus)
    if not sentences:
        raise ValueError("perplexity of an empty corpus is undefined")
    total_logprob = sum(lm.logprob(s) for s in sentences)
    total_events = sum(len(s) for s in sentences) + len(sentences)
    return math.exp(-total_logprob / total_events)


def save_lm(lm: NGramLM, path: str | Path) -> None:
    """Serialize as a text table: header, then one line per (order, context, event, count)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8") as fh:
        fh.write("# ngram-lm v1\n")
        fh.write(f"order\t{lm.order}\n")
        fh.write(f"discount\t{lm.discount!r}\n")
        fh.write(f"vocab\t{' '.join(lm.vocab.corpus_tokens)}\n")
        for k in sorted(lm.counts):
            for ctx in sorted(lm.counts[k]):
                for event, count in sorted(lm.counts[k][ctx].items()):
                    ctx_text = " ".join(str(i) for i in ctx) if ctx else "-"
                    fh.write(f"count\t{k}\t{ctx_text}\t{event}\t{count}\n")
    tmp.replace(path)


def load_lm(path: str | Path) -> NGramLM:
    path = Path(path)
    order = discount = None
    vocab: Vocabulary | None = None
    count_lines: list[tuple[int, tuple[int, ...], int, int]] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if fields[0] == "order":
            order = int(fields[1])
        elif fields[0] == "discount":
            discount = float(fields[1])
        elif fields[0] == "vocab":
            vocab = Vocabulary(fields[1].split())
        elif fields[0] == "count":
            k = int(fields[1])
            ctx = () if fields[2] == "-" else tuple(int(i) for i in fields[2].split())
            count_lines.append((k, ctx, int(fields[3]), int(fields[4])))
        else:
            raise ValueError(f"{path}:{lineno}: unknown LM field {fields[0]!r}")
    if order is None or discount is None or vocab is None:
        raise ValueError(f"{path}: incomplete LM file")
    lm = NGramLM(vocab=vocab, order=order, discount=discount)
    for k, ctx, event, count in count_lines:
        lm.counts[k].setdefault(ctx, {})[event] = count
        lm.totals[k][ctx] = lm.totals[k].get(ctx, 0) + count
    return lm

"""Parallel-corpus data model, synthetic multi-modal task generation, and corpus I/O.

The corpus file format is one sentence pair per line: source tokens and target
tokens are space-separated, the two sides are separated by a single TAB, and
the file is UTF-8.  Token ids are dense per vocabulary, with the reserved
symbols occupying the first five ids in every vocabulary.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

BOS_TOKEN = "<bos>"
EOS_TOKEN = "<eos>"
NULL_TOKEN = "<null>"
MASK_TOKEN = "<mask>"
UNK_TOKEN = "<unk>"
RESERVED_TOKENS = (BOS_TOKEN, EOS_TOKEN, NULL_TOKEN, MASK_TOKEN, UNK_TOKEN)

BOS_ID, EOS_ID, NULL_ID, MASK_ID, UNK_ID = range(5)

# A sentence is a tuple of vocabulary ids; BOS/EOS are never stored.
Sentence = tuple[int, ...]


class Vocabulary:
    """Ordered token set with dense, stable ids and reserved symbols up front."""

    def __init__(self, tokens: Iterable[str] = ()) -> None:
        self._id_to_token: list[str] = list(RESERVED_TOKENS)
        self._token_to_id: dict[str, int] = {t: i for i, t in enumerate(RESERVED_TOKENS)}
        for token in tokens:
            self.add(token)

    def add(self, token: str) -> int:
        if token in RESERVED_TOKENS:
            raise ValueError(f"corpus token collides with reserved symbol: {token!r}")
        if not token or any(c.isspace() for c in token):
            raise ValueError(f"invalid token: {token!r}")
        existing = self._token_to_id.get(token)
        if existing is not None:
            return existing
        idx = len(self._id_to_token)
        self._id_to_token.append(token)
        self._token_to_id[token] = idx
        return idx

    def id(self, token: str) -> int:
        return self._token_to_id[token]

    def id_or_unk(self, token: str) -> int:
        return self._token_to_id.get(token, UNK_ID)

    def token(self, idx: int) -> str:
        return self._id_to_token[idx]

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    def __len__(self) -> int:
        return len(self._id_to_token)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self._id_to_token == other._id_to_token

    @property
    def corpus_tokens(self) -> list[str]:
        """Tokens beyond the reserved block, in id order."""
        return self._id_to_token[len(RESERVED_TOKENS):]

    @property
    def corpus_ids(self) -> range:
        return range(len(RESERVED_TOKENS), len(self._id_to_token))

    def encode(self, tokens: Sequence[str]) -> Sentence:
        return tuple(self._token_to_id[t] for t in tokens)

    def encode_or_unk(self, tokens: Sequence[str]) -> Sentence:
        return tuple(self._token_to_id.get(t, UNK_ID) for t in tokens)

    def decode(self, sentence: Sequence[int]) -> list[str]:
        return [self._id_to_token[i] for i in sentence]


@dataclass
class ParallelCorpus:
    """Ordered (source, target) sentence pairs over shared vocabularies."""

    pairs: list[tuple[Sentence, Sentence]]
    source_vocab: Vocabulary
    target_vocab: Vocabulary

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[Sentence, Sentence]]:
        return iter(self.pairs)

    def sources(self) -> list[Sentence]:
        return [src for src, _ in self.pairs]

    def targets(self) -> list[Sentence]:
        return [tgt for _, tgt in self.pairs]

    def token_pairs(self) -> list[tuple[list[str], list[str]]]:
        return [
            (self.source_vocab.decode(src), self.target_vocab.decode(tgt))
            for src, tgt in self.pairs
        ]

    def __eq__(self, other: object) -> bool:
        # Corpora are equal when they carry the same token content in the same
        # order, regardless of how ids happen to be assigned.
        return isinstance(other, ParallelCorpus) and self.token_pairs() == other.token_pairs()

    def with_pairs(self, pairs: list[tuple[Sentence, Sentence]]) -> "ParallelCorpus":
        """Same vocabularies, different pair list (used by distill/filter stages)."""
        return ParallelCorpus(pairs, self.source_vocab, self.target_vocab)


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs of the synthetic multi-modal translation task."""

    source_vocab_size: int = 8
    synonyms_per_token: int = 2
    p_consistent: float = 1.0
    p_swap: float = 0.0
    length_range: tuple[int, int] = (3, 8)
    corpus_size: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.source_vocab_size < 1:
            raise ValueError("source_vocab_size must be >= 1")
        if self.synonyms_per_token < 1:
            raise ValueError("synonyms_per_token must be >= 1")
        for name in ("p_consistent", "p_swap"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        lo, hi = self.length_range
        if lo < 1 or lo > hi:
            raise ValueError(f"need 1 <= L_min <= L_max, got ({lo}, {hi})")
        if self.corpus_size < 1:
            raise ValueError("corpus_size must be >= 1")


@dataclass(frozen=True)
class TaskSpec:
    """True source-to-target mapping of a generated task.

    ``synonyms`` maps each source token to its ordered target synonym list;
    together with ``p_consistent`` / ``p_swap`` this fully determines the true
    conditional distribution over targets for any source sentence.
    """

    synonyms: dict[str, tuple[str, ...]]
    p_consistent: float
    p_swap: float

    @property
    def source_tokens(self) -> list[str]:
        return list(self.synonyms)

    @property
    def synonyms_per_token(self) -> int:
        return len(next(iter(self.synonyms.values())))


@dataclass
class GenerationTrace:
    """Pre-swap targets and swap bookkeeping, for validating the swap pass."""

    pre_swap_targets: list[list[str]] = field(default_factory=list)
    swap_decisions: int = 0
    swaps_applied: int = 0


def _source_names(n: int) -> list[str]:
    return [f"s{i}" for i in range(1, n + 1)]


def _synonym_table(n_source: int, m: int) -> dict[str, tuple[str, ...]]:
    return {
        f"s{i}": tuple(f"t{i}_{j}" for j in range(1, m + 1))
        for i in range(1, n_source + 1)
    }


def generate_synthetic(config: GeneratorConfig) -> tuple[ParallelCorpus, TaskSpec]:
    """Generate a synthetic parallel corpus with controllable ambiguity.

    Each source token has ``m`` target synonyms.  With probability
    ``p_consistent`` a sentence picks one synonym index for all its tokens,
    otherwise every token draws its index independently.  A final left-to-right
    pass swaps each adjacent target pair with probability ``p_swap``
    (non-overlapping).  Fully deterministic given ``config.seed``.
    """
    corpus, spec, _ = generate_synthetic_with_trace(config)
    return corpus, spec


def generate_synthetic_with_trace(
    config: GeneratorConfig,
) -> tuple[ParallelCorpus, TaskSpec, GenerationTrace]:
    rng = random.Random(config.seed)
    source_names = _source_names(config.source_vocab_size)
    synonyms = _synonym_table(config.source_vocab_size, config.synonyms_per_token)
    m = config.synonyms_per_token
    lo, hi = config.length_range

    trace = GenerationTrace()
    token_pairs: list[tuple[list[str], list[str]]] = []
    for _ in range(config.corpus_size):
        length = rng.randint(lo, hi)
        # Uniform source draw, avoiding immediate repetition when possible so
        # that adjacent target repeats diagnose model behaviour rather than
        # source artifacts.
        src: list[str] = []
        for _ in range(length):
            choices = [t for t in source_names if not src or t != src[-1]]
            if not choices:
                choices = source_names
            src.append(choices[rng.randrange(len(choices))])

        if rng.random() < config.p_consistent:
            shared = rng.randrange(m)
            indices = [shared] * length
        else:
            indices = [rng.randrange(m) for _ in range(length)]
        tgt = [synonyms[s][j] for s, j in zip(src, indices)]
        trace.pre_swap_targets.append(list(tgt))

        t = 0
        while t < length - 1:
            trace.swap_decisions += 1
            if rng.random() < config.p_swap:
                tgt[t], tgt[t + 1] = tgt[t + 1], tgt[t]
                trace.swaps_applied += 1
                t += 2
            else:
                t += 1
        token_pairs.append((src, tgt))

    source_vocab = Vocabulary(source_names)
    target_vocab = Vocabulary(syn for toks in synonyms.values() for syn in toks)
    pairs = [
        (source_vocab.encode(src), target_vocab.encode(tgt)) for src, tgt in token_pairs
    ]
    corpus = ParallelCorpus(pairs, source_vocab, target_vocab)
    spec = TaskSpec(synonyms=synonyms, p_consistent=config.p_consistent, p_swap=config.p_swap)
    return corpus, spec, trace


def corpus_from_token_pairs(
    token_pairs: Sequence[tuple[Sequence[str], Sequence[str]]],
    source_vocab: Vocabulary | None = None,
    target_vocab: Vocabulary | None = None,
) -> ParallelCorpus:
    """Build a corpus from token pairs; vocabularies default to first-occurrence order."""
    if source_vocab is None:
        source_vocab = Vocabulary(t for src, _ in token_pairs for t in src)
    if target_vocab is None:
        target_vocab = Vocabulary(t for _, tgt in token_pairs for t in tgt)
    pairs = [
        (source_vocab.encode(src), target_vocab.encode(tgt)) for src, tgt in token_pairs
    ]
    return ParallelCorpus(pairs, source_vocab, target_vocab)


def save_corpus(corpus: ParallelCorpus, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8") as fh:
        for src, tgt in corpus.token_pairs():
            fh.write(" ".join(src) + "\t" + " ".join(tgt) + "\n")
    tmp.replace(path)


def load_corpus(path: str | Path) -> ParallelCorpus:
    """Load a TAB-separated corpus file; malformed lines raise with their line number."""
    path = Path(path)
    token_pairs: list[tuple[list[str], list[str]]] = []
    try:
        raw = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ValueError(f"{path}: invalid UTF-8 ({exc})") from exc
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if line.count("\t") != 1:
            raise ValueError(
                f"{path}:{lineno}: expected exactly one TAB between source and target"
            )
        src_text, tgt_text = line.split("\t")
        src, tgt = src_text.split(), tgt_text.split()
        if not src or not tgt:
            raise ValueError(f"{path}:{lineno}: empty {'source' if not src else 'target'} side")
        token_pairs.append((src, tgt))
    return corpus_from_token_pairs(token_pairs)


def save_task_spec(spec: TaskSpec, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8") as fh:
        fh.write("# synthetic task spec v1\n")
        fh.write(f"p_consistent\t{spec.p_consistent!r}\n")
        fh.write(f"p_swap\t{spec.p_swap!r}\n")
        for src, syns in spec.synonyms.items():
            fh.write(f"synonyms\t{src}\t{' '.join(syns)}\n")
    tmp.replace(path)


def load_task_spec(path: str | Path) -> TaskSpec:
    path = Path(path)
    p_consistent = p_swap = None
    synonyms: dict[str, tuple[str, ...]] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if fields[0] == "p_consistent":
            p_consistent = float(fields[1])
        elif fields[0] == "p_swap":
            p_swap = float(fields[1])
        elif fields[0] == "synonyms":
            synonyms[fields[1]] = tuple(fields[2].split())
        else:
            raise ValueError(f"{path}:{lineno}: unknown task spec field {fields[0]!r}")
    if p_consistent is None or p_swap is None or not synonyms:
        raise ValueError(f"{path}: incomplete task spec")
    return TaskSpec(synonyms=synonyms, p_consistent=p_consistent, p_swap=p_swap)


def split_corpus(
    corpus: ParallelCorpus,
    ratios: tuple[float, float, float],
    seed: int,
) -> tuple[ParallelCorpus, ParallelCorpus, ParallelCorpus]:
    """Disjoint train/valid/test split with rounded share sizes, deterministic per seed."""
    if len(corpus) < 3:
        raise ValueError("corpus must hold at least 3 pairs to split")
    if any(r <= 0 for r in ratios):
        raise ValueError("split ratios must be positive")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {sum(ratios)}")
    n = len(corpus)
    n_train = round(n * ratios[0])
    n_valid = round(n * ratios[1])
    n_train = min(n_train, n - 2)
    n_valid = min(n_valid, n - n_train - 1)
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    buckets = (
        sorted(indices[:n_train]),
        sorted(indices[n_train:n_train + n_valid]),
        sorted(indices[n_train + n_valid:]),
    )
    return tuple(
        corpus.with_pairs([corpus.pairs[i] for i in bucket]) for bucket in buckets
    )  # type: ignore[return-value]


def build_vocab(corpus: ParallelCorpus, side: str) -> Vocabulary:
    """Vocabulary of one corpus side: reserved symbols plus first-occurrence tokens."""
    if len(corpus) == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    if side not in ("source", "target"):
        raise ValueError(f"side must be 'source' or 'target', got {side!r}")
    vocab = Vocabulary()
    for src, tgt in corpus.token_pairs():
        for token in src if side == "source" else tgt:
            vocab.add(token)
    return vocab

"""
Synthetic sentiment treebank with contrastive conjunctions.

Plain sentences mix polar words of one polarity with neutral filler, so
their label is a function of the token multiset. Contrastive sentences
follow `A but B` with the label of B and are emitted as mirrored pairs
(`A but B`, `B but A`), so the same multiset appears with both labels and
an order-insensitive model cannot separate them.
"""

import logging
from pathlib import Path

from src.config import SyntheticConfig
from src.data.treebank import NEUTRAL, SentTree, write_treebank
from src.errors import ConfigError
from src.nn.tensor import make_rng

logger = logging.getLogger(__name__)

PIVOT = "but"
MIN_VOCAB_SIZE = 8
MAX_ATTEMPTS_PER_SENTENCE = 50


class Lexicon:
    def __init__(self, vocab_size: int):
        n_polar = max(1, (vocab_size - 1) // 4)
        self.positive = [f"pos{i}" for i in range(n_polar)]
        self.negative = [f"neg{i}" for i in range(n_polar)]
        self.neutral = [f"w{i}" for i in range(vocab_size - 1 - 2 * n_polar)]
        self._polarity = {t: 1 for t in self.positive}
        self._polarity.update({t: -1 for t in self.negative})

    def polarity(self, token: str) -> int:
        return self._polarity.get(token, 0)

    def span_label(self, tokens: list[str]) -> int:
        score = sum(self.polarity(t) for t in tokens)
        if score >= 2:
            return 4
        if score == 1:
            return 3
        if score == -1:
            return 1
        if score <= -2:
            return 0
        return NEUTRAL

    def leaf(self, token: str) -> SentTree:
        return SentTree(label={1: 3, -1: 1}.get(self.polarity(token), NEUTRAL), token=token)

    def phrase_tree(self, tokens: list[str]) -> SentTree:
        if len(tokens) == 1:
            return self.leaf(tokens[0])
        mid = len(tokens) // 2
        return SentTree(
            label=self.span_label(tokens),
            children=[self.phrase_tree(tokens[:mid]), self.phrase_tree(tokens[mid:])],
        )


def _phrase(lexicon: Lexicon, rng, length: int, positive: bool) -> list[str]:
    """`length` tokens holding at least one polar word of the given polarity."""
    polar_words = lexicon.positive if positive else lexicon.negative
    n_polar = int(rng.integers(1, length + 1))
    tokens = [polar_words[int(rng.integers(len(polar_words)))] for _ in range(n_polar)]
    tokens += [lexicon.neutral[int(rng.integers(len(lexicon.neutral)))] for _ in range(length - n_polar)]
    order = rng.permutation(length)
    return [tokens[i] for i in order]


def _contrastive_tree(lexicon: Lexicon, first: list[str], second: list[str]) -> SentTree:
    first_tree = lexicon.phrase_tree(first)
    second_tree = lexicon.phrase_tree(second)
    tail = SentTree(label=second_tree.label, children=[lexicon.leaf(PIVOT), second_tree])
    return SentTree(label=second_tree.label, children=[first_tree, tail])


def _validate(config: SyntheticConfig) -> None:
    if config.vocab_size < MIN_VOCAB_SIZE:
        raise ConfigError(f"vocab_size must be >= {MIN_VOCAB_SIZE}, got {config.vocab_size}")
    if not 0.0 <= config.contrast_rate <= 1.0:
        raise ConfigError(f"contrast_rate must be in [0, 1], got {config.contrast_rate}")
    if config.max_len < 3:
        raise ConfigError(f"max_len must be >= 3, got {config.max_len}")
    if config.n_sentences < 1:
        raise ConfigError(f"n_sentences must be >= 1, got {config.n_sentences}")


def generate_synthetic(config: SyntheticConfig) -> tuple[list[SentTree], list[SentTree], list[SentTree]]:
    """
    Generate (train, dev, test) trees, split 80/10/10.

    Raises:
        ConfigError: vocab_size < 8, contrast_rate outside [0, 1], or too few
            distinct sentences exist for the requested size.
    """
    _validate(config)
    rng = make_rng(config.seed)
    lexicon = Lexicon(config.vocab_size)
    seen: set[tuple[str, ...]] = set()
    trees: list[SentTree] = []
    attempts = 0
    budget = MAX_ATTEMPTS_PER_SENTENCE * config.n_sentences

    while len(trees) < config.n_sentences:
        attempts += 1
        if attempts > budget:
            raise ConfigError(
                f"could only generate {len(trees)} distinct sentences; "
                f"raise vocab_size or max_len"
            )
        label = int(rng.integers(2))
        remaining = config.n_sentences - len(trees)
        if remaining >= 2 and rng.random() < config.contrast_rate:
            len_a = int(rng.integers(1, config.max_len - 1))
            len_b = int(rng.integers(1, config.max_len - len_a))
            clause_a = _phrase(lexicon, rng, len_a, positive=label == 0)
            clause_b = _phrase(lexicon, rng, len_b, positive=label == 1)
            forward = tuple(clause_a + [PIVOT] + clause_b)
            mirrored = tuple(clause_b + [PIVOT] + clause_a)
            if forward in seen or mirrored in seen:
                continue
            seen.update((forward, mirrored))
            trees.append(_contrastive_tree(lexicon, clause_a, clause_b))
            trees.append(_contrastive_tree(lexicon, clause_b, clause_a))
        else:
            length = int(rng.integers(1, config.max_len + 1))
            tokens = _phrase(lexicon, rng, length, positive=label == 1)
            if tuple(tokens) in seen:
                continue
            seen.add(tuple(tokens))
            trees.append(lexicon.phrase_tree(tokens))

    order = rng.permutation(len(trees))
    trees = [trees[i] for i in order]
    n_held = config.n_sentences // 10
    n_train = config.n_sentences - 2 * n_held
    train = trees[:n_train]
    dev = trees[n_train:n_train + n_held]
    test = trees[n_train + n_held:]
    logger.info("Generated %d/%d/%d synthetic sentences (contrast rate %.2f)",
                len(train), len(dev), len(test), config.contrast_rate)
    return train, dev, test


def write_synthetic(out_dir, config: SyntheticConfig) -> dict:
    """Write train.txt / dev.txt / test.txt under `out_dir`; returns the paths."""
    out = Path(out_dir)
    train, dev, test = generate_synthetic(config)
    paths = {}
    for name, trees in (("train", train), ("dev", dev), ("test", test)):
        path = out / f"{name}.txt"
        write_treebank(path, trees)
        paths[name] = path
    return paths

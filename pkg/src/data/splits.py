"""Model-train / decision-train / full-train splits.

The 80/20 partition is drawn over sentences, and every subtree of a
sentence follows it, so no phrase of a decision-train sentence is seen
while training the models that label it.
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.data.treebank import Example, SentTree, binarize, extract_subtrees
from src.data.vocab import Vocab
from src.errors import ConfigError
from src.nn.tensor import make_rng

logger = logging.getLogger(__name__)

MODEL_TRAIN_FRACTION = 0.8
MIN_TRAIN_SENTENCES = 5


@dataclass
class DataSplits:
    model_train: list[Example]
    decision_train: list[Example]
    full_train: list[Example]
    valid: list[Example]
    test: list[Example]
    model_sentence_ids: tuple[int, ...] = ()
    decision_sentence_ids: tuple[int, ...] = ()

    def sizes(self) -> dict:
        return {
            "model_train": len(self.model_train),
            "decision_train": len(self.decision_train),
            "full_train": len(self.full_train),
            "valid": len(self.valid),
            "test": len(self.test),
        }


def sentence_examples(trees: list[SentTree], vocab: Vocab) -> list[Example]:
    """Root-only binary examples (neutral sentences dropped)."""
    examples = []
    for tree in trees:
        example = binarize(tree, vocab)
        if example is not None:
            examples.append(example)
    return examples


def make_splits(train_sentences: list[SentTree], valid: list[SentTree], test: list[SentTree],
                seed: int, vocab: Vocab, use_subtrees: bool = True) -> DataSplits:
    """
    Shuffle training sentences with `seed` and cut them 80/20.

    Raises:
        ConfigError: fewer than five training sentences.
    """
    n = len(train_sentences)
    if n < MIN_TRAIN_SENTENCES:
        raise ConfigError(f"need at least {MIN_TRAIN_SENTENCES} training sentences, got {n}")

    order = make_rng(seed).permutation(n)
    n_model = int(np.floor(MODEL_TRAIN_FRACTION * n + 0.5))
    model_ids = tuple(sorted(int(i) for i in order[:n_model]))
    decision_ids = tuple(sorted(int(i) for i in order[n_model:]))

    def expand(ids):
        examples = []
        for i in ids:
            tree = train_sentences[i]
            if use_subtrees:
                examples.extend(extract_subtrees(tree, vocab))
            else:
                example = binarize(tree, vocab)
                if example is not None:
                    examples.append(example)
        return examples

    model_train = expand(model_ids)
    decision_train = expand(decision_ids)
    splits = DataSplits(
        model_train=model_train,
        decision_train=decision_train,
        full_train=model_train + decision_train,
        valid=sentence_examples(valid, vocab),
        test=sentence_examples(test, vocab),
        model_sentence_ids=model_ids,
        decision_sentence_ids=decision_ids,
    )
    logger.info("Splits: %s", splits.sizes())
    return splits

"""Vocabulary and word-vector tables."""

import hashlib
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
import tqdm

from src.errors import ParameterError, VectorFormatError
from src.nn.tensor import Rng

logger = logging.getLogger(__name__)

UNK_TOKEN = "<unk>"
PAD_TOKEN = "<pad>"
UNK = 0
PAD = 1
INIT_STD = 0.1


class Vocab:
    """Dense token index; unseen tokens map to UNK."""

    def __init__(self, itos: list[str], min_freq: int = 1):
        if itos[:2] != [UNK_TOKEN, PAD_TOKEN]:
            raise ValueError("vocabulary must start with the UNK and PAD specials")
        self.min_freq = min_freq
        self.itos = list(itos)
        self.stoi = {token: i for i, token in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    def lookup(self, token: str) -> int:
        return self.stoi.get(token, UNK)

    def encode(self, tokens: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.lookup(t) for t in tokens)

    def hash(self) -> bytes:
        """SHA-256 over the index -> token list."""
        return hashlib.sha256("\n".join(self.itos).encode("utf-8")).digest()

    def __repr__(self):
        return f"{self.__class__.__name__}(size={len(self)}, min_freq={self.min_freq})"


def build_vocab(sequences: Iterable[Iterable[str]], min_freq: int = 1) -> Vocab:
    """Index every token seen at least `min_freq` times, most frequent first."""
    if min_freq < 1:
        raise ParameterError(f"min_freq must be >= 1, got {min_freq}")
    counts = Counter()
    for sequence in sequences:
        counts.update(sequence)
    kept = sorted(
        (t for t, c in counts.items() if c >= min_freq and t not in (UNK_TOKEN, PAD_TOKEN)),
        key=lambda t: (-counts[t], t),
    )
    return Vocab([UNK_TOKEN, PAD_TOKEN] + kept, min_freq=min_freq)


@dataclass
class EmbeddingTable:
    dim: int
    matrix: np.ndarray
    trainable: bool = True

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[1] != self.dim:
            raise ParameterError(f"embedding matrix {self.matrix.shape} does not have dim {self.dim}")

    @property
    def vocab_size(self) -> int:
        return self.matrix.shape[0]


def init_embeddings(vocab: Vocab, dim: int, rng: Rng, trainable: bool = True) -> EmbeddingTable:
    """Rows from N(0, 0.1^2); UNK and PAD rows zero."""
    matrix = rng.normal(0.0, INIT_STD, size=(len(vocab), dim))
    matrix[UNK] = 0.0
    matrix[PAD] = 0.0
    return EmbeddingTable(dim=dim, matrix=matrix, trainable=trainable)


def _is_header(parts: list[str]) -> bool:
    return len(parts) == 2 and all(p.isdigit() for p in parts)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_word_vectors(path, vocab: Vocab, dim: int, rng: Rng, verbose: bool = False) -> EmbeddingTable:
    """
    Build an embedding table from a `token v1 ... v_dim` text file.

    In-vocabulary rows are copied from the file, the rest are drawn from
    N(0, 0.1^2), and the UNK/PAD rows are zero.

    Raises:
        VectorFormatError: a line has a dimension other than `dim`.
        OSError: the file cannot be read.
    """
    path = Path(path)
    table = init_embeddings(vocab, dim, rng)
    found = 0
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(
            tqdm.tqdm(f, disable=not verbose, ncols=100, desc="Loading vectors"), 1
        ):
            text = line.rstrip("\r\n").rstrip(" ")
            if not text.strip():
                continue
            if line_number == 1 and _is_header(text.split()):
                continue
            # tokens may contain spaces; the last `dim` fields are the values
            parts = text.rsplit(" ", dim)
            token, values = parts[0], parts[1:]
            if " " in token and _is_number(token.rsplit(" ", 1)[1]):
                values = token.split(" ")[1:] + values
            if len(values) != dim:
                raise VectorFormatError(f"expected {dim} values, got {len(values)} in {path}", line_number)
            index = vocab.stoi.get(token)
            if index is None or index in (UNK, PAD):
                continue
            try:
                table.matrix[index] = [float(v) for v in values]
            except ValueError:
                raise VectorFormatError(f"non-numeric value in {path}", line_number) from None
            found += 1
    logger.info("Loaded %d/%d vectors from %s", found, len(vocab) - 2, path)
    return table

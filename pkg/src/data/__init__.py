"""Treebank parsing, vocabulary, splits and the synthetic contrastive corpus."""

from .splits import DataSplits, make_splits, sentence_examples
from .synthetic import Lexicon, generate_synthetic, write_synthetic
from .treebank import (
    Example,
    SentTree,
    binarize,
    extract_subtrees,
    parse_ptb_line,
    read_treebank,
    serialize_tree,
    write_treebank,
)
from .vocab import PAD, UNK, EmbeddingTable, Vocab, build_vocab, init_embeddings, load_word_vectors

__all__ = [
    "DataSplits",
    "EmbeddingTable",
    "Example",
    "Lexicon",
    "PAD",
    "SentTree",
    "UNK",
    "Vocab",
    "binarize",
    "build_vocab",
    "extract_subtrees",
    "generate_synthetic",
    "init_embeddings",
    "load_word_vectors",
    "make_splits",
    "parse_ptb_line",
    "read_treebank",
    "sentence_examples",
    "serialize_tree",
    "write_treebank",
]

"""
Treebank reader - parse SST-format s-expressions and build binary examples.

Each line of an SST file is one tree: `(label child ...)` where a leaf is
`(label token)`. Labels run from 0 (very negative) to 4 (very positive).
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

from src.errors import TreebankParseError

logger = logging.getLogger(__name__)

NEUTRAL = 2
SENTIMENT_LABELS = (0, 1, 2, 3, 4)


@dataclass
class SentTree:
    label: int
    children: list["SentTree"] = field(default_factory=list)
    token: Optional[str] = None

    @property
    def is_leaf(self) -> bool:
        return self.token is not None

    def leaves(self) -> list[str]:
        if self.is_leaf:
            return [self.token]
        tokens = []
        for child in self.children:
            tokens.extend(child.leaves())
        return tokens

    def nodes(self) -> Iterator["SentTree"]:
        """Pre-order traversal (root first)."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass(frozen=True)
class Example:
    tokens: tuple[int, ...]
    label: int
    is_subtree: bool = False

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("example needs at least one token")
        if self.label not in (0, 1):
            raise ValueError(f"binary label expected, got {self.label}")


def _byte_offset(line: str, pos: int) -> int:
    return len(line[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, line: str):
        self.line = line
        self.pos = 0

    def error(self, message: str, pos: int | None = None) -> TreebankParseError:
        return TreebankParseError(message, _byte_offset(self.line, self.pos if pos is None else pos))

    def skip_ws(self) -> None:
        while self.pos < len(self.line) and self.line[self.pos].isspace():
            self.pos += 1

    def atom(self) -> str:
        start = self.pos
        while self.pos < len(self.line) and not self.line[self.pos].isspace() \
                and self.line[self.pos] not in "()":
            self.pos += 1
        return self.line[start:self.pos]

    def node(self) -> SentTree:
        self.skip_ws()
        if self.pos >= len(self.line):
            raise self.error("unexpected end of input")
        if self.line[self.pos] != "(":
            raise self.error(f"expected '(' but found {self.line[self.pos]!r}")
        open_pos = self.pos
        self.pos += 1
        self.skip_ws()
        label_pos = self.pos
        label_text = self.atom()
        if not label_text:
            raise self.error("empty node", open_pos)
        try:
            label = int(label_text)
        except ValueError:
            raise self.error(f"non-integer label {label_text!r}", label_pos) from None
        if label not in SENTIMENT_LABELS:
            raise self.error(f"label {label} outside 0-4", label_pos)

        self.skip_ws()
        if self.pos >= len(self.line):
            raise self.error("unexpected end of input")
        if self.line[self.pos] == ")":
            raise self.error("empty node", open_pos)

        if self.line[self.pos] != "(":
            token = self.atom()
            self.skip_ws()
            if self.pos >= len(self.line):
                raise self.error("unexpected end of input")
            if self.line[self.pos] != ")":
                raise self.error("leaf holds more than one token")
            self.pos += 1
            return SentTree(label=label, token=token)

        children = []
        while True:
            self.skip_ws()
            if self.pos >= len(self.line):
                raise self.error("unexpected end of input")
            if self.line[self.pos] == ")":
                self.pos += 1
                return SentTree(label=label, children=children)
            if self.line[self.pos] != "(":
                raise self.error("bare token next to subtrees")
            children.append(self.node())


def parse_ptb_line(line: str) -> SentTree:
    """
    Parse one SST s-expression.

    Raises:
        TreebankParseError: unbalanced parentheses, non-integer label, empty node
            or trailing text; the error carries the byte offset.
    """
    parser = _Parser(line)
    tree = parser.node()
    parser.skip_ws()
    if parser.pos != len(line):
        raise parser.error("trailing characters after tree")
    return tree


def serialize_tree(tree: SentTree) -> str:
    if tree.is_leaf:
        return f"({tree.label} {tree.token})"
    return f"({tree.label} " + " ".join(serialize_tree(c) for c in tree.children) + ")"


def read_treebank(path) -> list[SentTree]:
    path = Path(path)
    trees = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                trees.append(parse_ptb_line(line.strip()))
            except TreebankParseError as e:
                raise TreebankParseError(f"{path}:{line_number}: {e.detail}", e.offset) from e
    logger.info("Read %d trees from %s", len(trees), path)
    return trees


def write_treebank(path, trees: list[SentTree]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for tree in trees:
            f.write(serialize_tree(tree) + "\n")


def binary_label(label: int) -> Optional[int]:
    """{3,4} -> 1, {0,1} -> 0, neutral -> None."""
    if label == NEUTRAL:
        return None
    return 1 if label > NEUTRAL else 0


def binarize(tree: SentTree, vocab, is_subtree: bool = False) -> Optional[Example]:
    label = binary_label(tree.label)
    if label is None:
        return None
    return Example(tokens=tuple(vocab.lookup(t) for t in tree.leaves()),
                   label=label, is_subtree=is_subtree)


def extract_subtrees(tree: SentTree, vocab) -> list[Example]:
    """All non-neutral nodes as examples, root first, deduplicated by (tokens, label)."""
    examples = []
    seen = set()
    for node in tree.nodes():
        example = binarize(node, vocab, is_subtree=node is not tree)
        if example is None:
            continue
        key = (example.tokens, example.label)
        if key in seen:
            continue
        seen.add(key)
        examples.append(example)
    return examples

"""Bag-of-words classifier: averaged embeddings -> two-layer MLP."""

import numpy as np

from src.data.treebank import Example
from src.data.vocab import EmbeddingTable
from src.models.base import PREDICT_BATCH, Network, check_tokens
from src.nn.layers import Dense, Dropout, softmax, softmax_cross_entropy_batch
from src.nn.tensor import Parameter, Rng


class BowTrunk:
    """Embedding average followed by the relu hidden layer (the BoW's last hidden state)."""

    def __init__(self, name: str, embeddings: np.ndarray, hidden: int,
                 rng: Rng | None = None, trainable_embeddings: bool = True):
        self.name = name
        self.trainable_embeddings = trainable_embeddings
        self.embedding = Parameter(f"{name}.embedding", np.array(embeddings, copy=True))
        self.hidden = Dense(f"{name}.hidden", self.embedding.shape[1], hidden, "relu", rng)
        self._arrays = None

    @property
    def emb_dim(self) -> int:
        return self.embedding.shape[1]

    @property
    def hidden_size(self) -> int:
        return self.hidden.n_out

    def parameters(self) -> list[Parameter]:
        params = [self.embedding] if self.trainable_embeddings else []
        return params + self.hidden.parameters()

    def all_parameters(self) -> list[Parameter]:
        return [self.embedding] + self.hidden.parameters()

    def forward(self, batch_tokens) -> np.ndarray:
        arrays = check_tokens(batch_tokens)
        table = self.embedding.value
        pooled = np.stack([table[ids].mean(axis=0) for ids in arrays])
        self._arrays = arrays
        return self.hidden.forward(pooled)

    def backward(self, d_hidden: np.ndarray) -> None:
        d_pooled = self.hidden.backward(d_hidden)
        if not self.trainable_embeddings:
            return
        for row, ids in enumerate(self._arrays):
            np.add.at(self.embedding.grad, ids, d_pooled[row] / len(ids))

    def copy(self, name: str) -> "BowTrunk":
        """Independent copy (bit-identical values) under a new name prefix."""
        clone = BowTrunk(name, self.embedding.value, self.hidden_size,
                         trainable_embeddings=self.trainable_embeddings)
        clone.hidden.W.value[...] = self.hidden.W.value
        clone.hidden.b.value[...] = self.hidden.b.value
        return clone


class BoWClassifier(Network):
    kind = "bow"

    def __init__(self, embeddings: EmbeddingTable | np.ndarray, hidden: int = 64, dropout: float = 0.5,
                 rng: Rng | None = None, zero_output: bool = False):
        matrix = embeddings.matrix if isinstance(embeddings, EmbeddingTable) else embeddings
        self.trunk = BowTrunk("bow.trunk", matrix, hidden, rng)
        self.drop = Dropout(dropout)
        self.output = Dense("bow.output", hidden, 2, rng=rng, zero=zero_output)

    def parameters(self) -> list[Parameter]:
        return self.trunk.parameters() + self.output.parameters()

    def all_parameters(self) -> list[Parameter]:
        return self.trunk.all_parameters() + self.output.parameters()

    def architecture(self) -> dict:
        return {
            "vocab_size": int(self.trunk.embedding.shape[0]),
            "emb_dim": self.trunk.emb_dim,
            "hidden": self.trunk.hidden_size,
            "dropout": self.drop.p,
        }

    @classmethod
    def from_architecture(cls, arch: dict) -> "BoWClassifier":
        return cls(np.zeros((arch["vocab_size"], arch["emb_dim"])), arch["hidden"], arch["dropout"])

    def forward_batch(self, batch_tokens, mode: str = "eval", rng: Rng | None = None):
        """Returns (last_hidden [B, H], logits [B, 2], probs [B, 2])."""
        last_hidden = self.trunk.forward(batch_tokens)
        dropped = self.drop.forward(last_hidden, mode, rng)
        logits = self.output.forward(dropped)
        return last_hidden, logits, softmax(logits)

    def loss_and_backward(self, examples: list[Example], rng: Rng) -> float:
        _, logits, _ = self.forward_batch([e.tokens for e in examples], "train", rng)
        loss, _, d_logits = softmax_cross_entropy_batch(logits, [e.label for e in examples])
        d_hidden = self.drop.backward(self.output.backward(d_logits))
        self.trunk.backward(d_hidden)
        return loss

    def _eval_batches(self, examples: list[Example]):
        for start in range(0, len(examples), PREDICT_BATCH):
            chunk = examples[start:start + PREDICT_BATCH]
            yield self.forward_batch([e.tokens for e in chunk], "eval")

    def predict_proba(self, examples: list[Example]) -> np.ndarray:
        if not examples:
            return np.zeros((0, 2))
        return np.concatenate([probs for _, _, probs in self._eval_batches(examples)])

    def hidden_states(self, examples: list[Example]) -> np.ndarray:
        if not examples:
            return np.zeros((0, self.trunk.hidden_size))
        return np.concatenate([hidden for hidden, _, _ in self._eval_batches(examples)])


def bow_forward(model: BoWClassifier, tokens, mode: str = "eval", rng: Rng | None = None):
    """Single input: (last_hidden [H], logits [2], probs [2])."""
    last_hidden, logits, probs = model.forward_batch([tokens], mode, rng)
    return last_hidden[0], logits[0], probs[0]

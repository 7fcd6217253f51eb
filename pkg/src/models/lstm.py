"""Bi-LSTM classifier over frozen embeddings with a trainable projection."""

from collections import defaultdict

import numpy as np

from src.data.treebank import Example
from src.data.vocab import EmbeddingTable
from src.models.base import Network, check_tokens
from src.nn.layers import BiLSTM, Dense, Dropout, mean_max_pool, mean_max_pool_backward, softmax, \
    softmax_cross_entropy_batch
from src.nn.tensor import Parameter, Rng


def _length_groups(arrays: list[np.ndarray]) -> list[list[int]]:
    """Indices grouped by sequence length, shortest first; order inside a group is preserved."""
    groups = defaultdict(list)
    for i, ids in enumerate(arrays):
        groups[len(ids)].append(i)
    return [groups[length] for length in sorted(groups)]


class LSTMClassifier(Network):
    kind = "lstm"

    def __init__(self, embeddings: EmbeddingTable | np.ndarray, projection: int = 64, hidden: int = 64,
                 mlp_hidden: int = 64, dropout: float = 0.5, rng: Rng | None = None, zero: bool = False):
        matrix = embeddings.matrix if isinstance(embeddings, EmbeddingTable) else embeddings
        self.embedding = Parameter("lstm.embedding", np.array(matrix, copy=True))
        emb_dim = self.embedding.shape[1]
        init = None if zero else rng
        self.projection = Dense("lstm.projection", emb_dim, projection, "identity", init)
        self.bilstm = BiLSTM("lstm.bilstm", projection, hidden, init, zero=zero)
        self.drop = Dropout(dropout)
        self.mlp_hidden = Dense("lstm.mlp_hidden", 4 * hidden, mlp_hidden, "relu", init)
        self.output = Dense("lstm.output", mlp_hidden, 2, rng=init)
        self._pool_input = None

    def parameters(self) -> list[Parameter]:
        return (self.projection.parameters() + self.bilstm.parameters()
                + self.mlp_hidden.parameters() + self.output.parameters())

    def all_parameters(self) -> list[Parameter]:
        return [self.embedding] + self.parameters()

    def architecture(self) -> dict:
        return {
            "vocab_size": int(self.embedding.shape[0]),
            "emb_dim": int(self.embedding.shape[1]),
            "projection": self.projection.n_out,
            "hidden": self.bilstm.hidden,
            "mlp_hidden": self.mlp_hidden.n_out,
            "dropout": self.drop.p,
        }

    @classmethod
    def from_architecture(cls, arch: dict) -> "LSTMClassifier":
        return cls(np.zeros((arch["vocab_size"], arch["emb_dim"])), arch["projection"], arch["hidden"],
                   arch["mlp_hidden"], arch["dropout"], zero=True)

    def _forward_group(self, ids: np.ndarray, mode: str, rng: Rng | None):
        """ids: [B, T] of equal-length sequences -> (logits, probs)."""
        batch, steps = ids.shape
        embedded = self.embedding.value[ids].reshape(batch * steps, -1)
        projected = self.projection.forward(embedded).reshape(batch, steps, -1)
        states = self.bilstm.forward(projected)
        pooled = mean_max_pool(states)
        self._pool_input = states
        hidden = self.mlp_hidden.forward(self.drop.forward(pooled, mode, rng))
        logits = self.output.forward(hidden)
        return logits, softmax(logits)

    def _backward_group(self, d_logits: np.ndarray) -> None:
        d_pooled = self.drop.backward(self.mlp_hidden.backward(self.output.backward(d_logits)))
        d_states = mean_max_pool_backward(d_pooled, self._pool_input)
        d_projected = self.bilstm.backward(d_states)
        self.projection.backward(d_projected.reshape(-1, d_projected.shape[-1]))
        # embeddings are frozen: gradient stops here

    def forward_batch(self, batch_tokens, mode: str = "eval", rng: Rng | None = None):
        """Returns (logits [B, 2], probs [B, 2]) in input order."""
        arrays = check_tokens(batch_tokens)
        logits = np.zeros((len(arrays), 2))
        for group in _length_groups(arrays):
            ids = np.stack([arrays[i] for i in group])
            group_logits, _ = self._forward_group(ids, mode, rng)
            logits[group] = group_logits
        return logits, softmax(logits)

    def loss_and_backward(self, examples: list[Example], rng: Rng) -> float:
        arrays = check_tokens([e.tokens for e in examples])
        labels = np.array([e.label for e in examples])
        total = len(examples)
        loss = 0.0
        for group in _length_groups(arrays):
            ids = np.stack([arrays[i] for i in group])
            logits, _ = self._forward_group(ids, "train", rng)
            group_loss, _, d_logits = softmax_cross_entropy_batch(logits, labels[group])
            weight = len(group) / total
            loss += weight * group_loss
            self._backward_group(d_logits * weight)
        return loss

    def predict_proba(self, examples: list[Example]) -> np.ndarray:
        if not examples:
            return np.zeros((0, 2))
        _, probs = self.forward_batch([e.tokens for e in examples], "eval")
        return probs


def lstm_forward(model: LSTMClassifier, tokens, mode: str = "eval", rng: Rng | None = None):
    """Single input: (logits [2], probs [2])."""
    logits, probs = model.forward_batch([tokens], mode, rng)
    return logits[0], probs[0]

"""Decision network: a frozen copy of the BoW trunk with a small trainable head.

The head reads the BoW's last hidden state and predicts whether the input
belongs to the LSTM class (LSTM right where the BoW is wrong).
"""

import numpy as np

from src.data.treebank import Example
from src.models.base import PREDICT_BATCH, Network
from src.models.bow import BoWClassifier, BowTrunk
from src.nn.layers import Dense, Dropout, softmax, softmax_cross_entropy_batch
from src.nn.tensor import Parameter, Rng

LSTM_CLASS = 1


class DecisionNet(Network):
    kind = "decision"

    def __init__(self, trunk: BowTrunk, hidden: int = 32, dropout: float = 0.5,
                 rng: Rng | None = None, zero_head: bool = False):
        self.trunk = trunk
        init = None if zero_head else rng
        self.head_hidden = Dense("decision.hidden", trunk.hidden_size, hidden, "relu", init)
        self.drop = Dropout(dropout)
        self.head_output = Dense("decision.output", hidden, 2, rng=init)

    @classmethod
    def from_bow(cls, bow: BoWClassifier, hidden: int = 32, dropout: float = 0.5,
                 rng: Rng | None = None, zero_head: bool = False) -> "DecisionNet":
        """Inherit everything below the BoW output layer (copied, never updated)."""
        return cls(bow.trunk.copy("decision.trunk"), hidden, dropout, rng, zero_head)

    def replace_trunk(self, bow: BoWClassifier) -> None:
        """Swap in another BoW's trunk (used to route with the fine-tuned BoW)."""
        self.trunk = bow.trunk.copy("decision.trunk")

    def parameters(self) -> list[Parameter]:
        return self.head_hidden.parameters() + self.head_output.parameters()

    def all_parameters(self) -> list[Parameter]:
        return self.trunk.all_parameters() + self.parameters()

    def trunk_arrays(self) -> dict[str, np.ndarray]:
        return {p.name: p.value for p in self.trunk.all_parameters()}

    def architecture(self) -> dict:
        return {
            "vocab_size": int(self.trunk.embedding.shape[0]),
            "emb_dim": self.trunk.emb_dim,
            "trunk_hidden": self.trunk.hidden_size,
            "hidden": self.head_hidden.n_out,
            "dropout": self.drop.p,
        }

    @classmethod
    def from_architecture(cls, arch: dict) -> "DecisionNet":
        trunk = BowTrunk("decision.trunk", np.zeros((arch["vocab_size"], arch["emb_dim"])),
                         arch["trunk_hidden"])
        return cls(trunk, arch["hidden"], arch["dropout"], zero_head=True)

    def forward_batch(self, batch_tokens, mode: str = "eval", rng: Rng | None = None):
        """Returns (logits [B, 2], probs [B, 2]); the trunk always runs without dropout."""
        last_hidden = self.trunk.forward(batch_tokens)
        hidden = self.head_hidden.forward(last_hidden)
        logits = self.head_output.forward(self.drop.forward(hidden, mode, rng))
        return logits, softmax(logits)

    def loss_and_backward(self, examples: list[Example], rng: Rng) -> float:
        logits, _ = self.forward_batch([e.tokens for e in examples], "train", rng)
        loss, _, d_logits = softmax_cross_entropy_batch(logits, [e.label for e in examples])
        self.head_hidden.backward(self.drop.backward(self.head_output.backward(d_logits)))
        return loss

    def predict_proba(self, examples: list[Example]) -> np.ndarray:
        if not examples:
            return np.zeros((0, 2))
        chunks = []
        for start in range(0, len(examples), PREDICT_BATCH):
            chunk = examples[start:start + PREDICT_BATCH]
            chunks.append(self.forward_batch([e.tokens for e in chunk], "eval")[1])
        return np.concatenate(chunks)

    def predict_lstm_prob(self, examples: list[Example]) -> np.ndarray:
        return self.predict_proba(examples)[:, LSTM_CLASS]


def decision_forward(net: DecisionNet, tokens, mode: str = "eval", rng: Rng | None = None) -> float:
    """P(LSTM) for a single input."""
    _, probs = net.forward_batch([tokens], mode, rng)
    return float(probs[0, LSTM_CLASS])

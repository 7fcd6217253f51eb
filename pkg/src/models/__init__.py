"""BoW, bi-LSTM and decision networks with their training and persistence."""

from .base import Network
from .bow import BoWClassifier, BowTrunk, bow_forward
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .decision import DecisionNet, decision_forward
from .gradcheck_suite import GradcheckResult, gradcheck_suite
from .lstm import LSTMClassifier, lstm_forward
from .training import DecisionValidation, EpochRecord, relabel, train_classifier, train_decision_net

__all__ = [
    "BoWClassifier",
    "BowTrunk",
    "Checkpoint",
    "DecisionNet",
    "DecisionValidation",
    "EpochRecord",
    "GradcheckResult",
    "LSTMClassifier",
    "Network",
    "bow_forward",
    "decision_forward",
    "gradcheck_suite",
    "load_checkpoint",
    "lstm_forward",
    "relabel",
    "save_checkpoint",
    "train_classifier",
    "train_decision_net",
]

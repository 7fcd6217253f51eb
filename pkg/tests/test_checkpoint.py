"""Tests for the binary checkpoint format."""

import struct

import numpy as np
import pytest

from src.data.treebank import Example
from src.errors import CheckpointIntegrityError, CheckpointVersionError
from src.models.bow import BoWClassifier
from src.models.checkpoint import (
    FORMAT_VERSION,
    MAGIC,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from src.models.decision import DecisionNet
from src.models.lstm import LSTMClassifier
from src.nn.tensor import make_rng

HASH = bytes(range(32))
EXAMPLES = [Example((2, 3), 1), Example((4,), 0), Example((5, 6, 7, 2), 1)]


def _make_models():
    rng = make_rng(7)
    embeddings = rng.normal(size=(9, 4))
    bow = BoWClassifier(embeddings, hidden=5, dropout=0.3, rng=rng)
    lstm = LSTMClassifier(embeddings, projection=3, hidden=2, mlp_hidden=4, dropout=0.3, rng=rng)
    decision = DecisionNet.from_bow(bow, hidden=3, dropout=0.3, rng=rng)
    return {"bow": bow, "lstm": lstm, "decision": decision}


class TestRoundTrip:
    @pytest.mark.parametrize("kind", ["bow", "lstm", "decision"])
    def test_reload_predicts_identically(self, tmp_path, kind):
        model = _make_models()[kind]
        path = save_checkpoint(tmp_path / f"{kind}.ckpt", model, HASH, {"seed": 4})
        checkpoint = load_checkpoint(path)
        assert checkpoint.kind == kind
        assert checkpoint.vocab_hash == HASH
        assert checkpoint.config == {"seed": 4}
        assert checkpoint.version == FORMAT_VERSION
        assert np.array_equal(checkpoint.model.predict_proba(EXAMPLES), model.predict_proba(EXAMPLES))
        assert checkpoint.model.architecture() == model.architecture()

    def test_encoding_is_deterministic(self):
        model = _make_models()["lstm"]
        assert encode_checkpoint(model, HASH) == encode_checkpoint(model, HASH)

    def test_layout_prefix(self):
        data = encode_checkpoint(_make_models()["bow"], HASH)
        assert data[:4] == MAGIC
        assert struct.unpack("<I", data[4:8])[0] == FORMAT_VERSION
        assert struct.unpack("<H", data[8:10])[0] == 3
        assert data[10:13] == b"bow"
        assert data[13:45] == HASH

    def test_hash_length_checked(self):
        with pytest.raises(ValueError):
            encode_checkpoint(_make_models()["bow"], b"short")


class TestCorruption:
    def test_other_version(self):
        data = bytearray(encode_checkpoint(_make_models()["bow"], HASH))
        data[4:8] = struct.pack("<I", FORMAT_VERSION + 1)
        with pytest.raises(CheckpointVersionError):
            decode_checkpoint(bytes(data))

    def test_bad_magic(self):
        data = encode_checkpoint(_make_models()["bow"], HASH)
        with pytest.raises(CheckpointIntegrityError, match="magic"):
            decode_checkpoint(b"XXXX" + data[4:])

    def test_flipped_byte(self):
        data = bytearray(encode_checkpoint(_make_models()["lstm"], HASH))
        data[len(data) // 2] ^= 0xFF
        with pytest.raises(CheckpointIntegrityError, match="checksum"):
            decode_checkpoint(bytes(data))

    def test_truncated(self):
        data = encode_checkpoint(_make_models()["decision"], HASH)
        with pytest.raises(CheckpointIntegrityError):
            decode_checkpoint(data[:-1])
        with pytest.raises(CheckpointIntegrityError):
            decode_checkpoint(data[:-9])
        with pytest.raises(CheckpointIntegrityError):
            decode_checkpoint(data[:6])

    def test_error_names_path(self, tmp_path):
        path = tmp_path / "broken.ckpt"
        path.write_bytes(b"SKRD\x01\x00\x00\x00garbage")
        with pytest.raises(CheckpointIntegrityError, match="broken.ckpt"):
            load_checkpoint(path)

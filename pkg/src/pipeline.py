"""
End-to-end cascade pipeline.

Stages, in order:
    data             load or generate sentences, build vocab, embeddings and splits
    model_train      train BoW and LSTM on model-train
    decision_labels  label decision-train by which model to trust
    decision_train   train the decision head (AUC-selected)
    fine_tune        continue BoW and LSTM training on the full training set
    evaluate         curves, AUCs, diagnostics and report on valid and test

Each stage appends `stage=<name> status=<ok|fail> seconds=<float>` to
<out>/run.log. An INCOMPLETE marker sits in <out> until the run succeeds.
"""

import copy
import dataclasses
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from src.analyzers.acceptance import behavior_checks
from src.analyzers.curves import auc, speed_accuracy_curve
from src.analyzers.diagnostics import bucket_accuracy, cumulative_lstm_usage, usage_thresholds
from src.cascade import STRATEGY_TAGS, EvalPredictions, confusion, generate_decision_labels
from src.config import PipelineConfig, TrainConfig, resolve_threads
from src.data.splits import DataSplits, make_splits
from src.data.synthetic import generate_synthetic
from src.data.treebank import Example, read_treebank
from src.data.vocab import EmbeddingTable, Vocab, build_vocab, init_embeddings, load_word_vectors
from src.errors import AlignmentError, ConfigError, PipelineError
from src.models.bow import BoWClassifier
from src.models.checkpoint import load_checkpoint, save_checkpoint
from src.models.decision import DecisionNet
from src.models.lstm import LSTMClassifier
from src.models.training import DecisionValidation, relabel, train_classifier, train_decision_net
from src.nn.tensor import derive_rng, derive_seed
from src.reporter import SplitEvaluation, build_report, export_report

logger = logging.getLogger(__name__)

STAGES = ("data", "model_train", "decision_labels", "decision_train", "fine_tune", "evaluate")
EVAL_SPLITS = ("valid", "test")
RUN_LOG = "run.log"
INCOMPLETE = "INCOMPLETE"


class RunLog:
    """Line-oriented stage log plus the incomplete-run marker."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.path = self.out_dir / RUN_LOG
        self.marker = self.out_dir / INCOMPLETE
        self.path.write_text("", encoding="utf-8")
        self.marker.write_text("running\n", encoding="utf-8")

    def _append(self, name: str, status: str, seconds: float) -> None:
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(f"stage={name} status={status} seconds={seconds:.3f}\n")

    @contextmanager
    def stage(self, name: str):
        logger.info("stage %s: start", name)
        start = time.perf_counter()
        try:
            yield
        except Exception as e:
            self._append(name, "fail", time.perf_counter() - start)
            self.marker.write_text(f"failed at stage {name}: {e}\n", encoding="utf-8")
            logger.error("stage %s failed: %s", name, e)
            raise PipelineError(name, e) from e
        elapsed = time.perf_counter() - start
        self._append(name, "ok", elapsed)
        logger.info("stage %s: ok (%.1fs)", name, elapsed)

    def complete(self) -> None:
        self.marker.unlink(missing_ok=True)


@dataclass
class PreparedData:
    vocab: Vocab
    embeddings: EmbeddingTable
    splits: DataSplits


@dataclass
class PipelineArtifacts:
    out_dir: Path
    report: dict
    results: list[SplitEvaluation]
    checkpoints: dict[str, Path] = field(default_factory=dict)
    histories: dict[str, list] = field(default_factory=dict)
    decision_label_rate: Optional[float] = None


def stage_seeds(config: PipelineConfig) -> dict:
    """Every sub-seed of a run, derived from the master seed."""
    master = config.seed
    return {
        "master": master,
        "splits": derive_seed(master, "splits"),
        "embeddings": derive_seed(master, "embeddings"),
        "bow": derive_seed(master, f"train.bow.{config.train_bow.seed}"),
        "lstm": derive_seed(master, f"train.lstm.{config.train_lstm.seed}"),
        "decision": derive_seed(master, f"train.decision.{config.train_decision.seed}"),
        "fine_tune.bow": derive_seed(master, f"fine_tune.bow.{config.train_bow.seed}"),
        "fine_tune.lstm": derive_seed(master, f"fine_tune.lstm.{config.train_lstm.seed}"),
    }


def _with_seed(train: TrainConfig, seed: int) -> TrainConfig:
    return dataclasses.replace(train, seed=seed)


def load_sentences(config: PipelineConfig):
    data = config.data
    if data.synthetic is not None:
        return generate_synthetic(data.synthetic)
    root = Path(data.data_dir)
    return tuple(read_treebank(root / name) for name in ("train.txt", "dev.txt", "test.txt"))


def prepare_data(config: PipelineConfig) -> PreparedData:
    train, dev, test = load_sentences(config)
    vocab = build_vocab((tree.leaves() for tree in train), config.data.min_freq)
    rng = derive_rng(config.seed, "embeddings")
    if config.data.vectors_path is not None:
        embeddings = load_word_vectors(config.data.vectors_path, vocab, config.data.emb_dim, rng,
                                       verbose=logger.isEnabledFor(logging.DEBUG))
    else:
        embeddings = init_embeddings(vocab, config.data.emb_dim, rng)
    splits = make_splits(train, dev, test, derive_seed(config.seed, "splits"), vocab, config.data.use_subtrees)
    if not splits.valid or not splits.test:
        raise ConfigError(f"validation and test sets must be non-empty, got sizes {splits.sizes()}")
    logger.info("Vocabulary: %d tokens; splits %s", len(vocab), splits.sizes())
    return PreparedData(vocab, embeddings, splits)


def build_models(config: PipelineConfig, embeddings: EmbeddingTable):
    m = config.model
    bow = BoWClassifier(embeddings, m.bow_hidden, m.dropout, rng=derive_rng(config.seed, "init.bow"))
    lstm = LSTMClassifier(embeddings, m.lstm_projection, m.lstm_hidden, m.lstm_mlp_hidden, m.dropout,
                          rng=derive_rng(config.seed, "init.lstm"))
    return bow, lstm


def _train_pair(bow, lstm, train: list[Example], valid: list[Example], bow_cfg: TrainConfig,
                lstm_cfg: TrainConfig, threads: int, prefix: str) -> dict:
    jobs = [(f"{prefix}bow", bow, bow_cfg), (f"{prefix}lstm", lstm, lstm_cfg)]
    if threads >= 2:
        with ThreadPoolExecutor(max_workers=2) as pool:
            futures = {name: pool.submit(train_classifier, model, train, valid, cfg, name)
                       for name, model, cfg in jobs}
            return {name: future.result()[1] for name, future in futures.items()}
    return {name: train_classifier(model, train, valid, cfg, name)[1] for name, model, cfg in jobs}


def evaluate_split(name: str, examples: list[Example], bow: BoWClassifier, lstm: LSTMClassifier,
                   net: DecisionNet, config: PipelineConfig) -> SplitEvaluation:
    """Route one split with all three strategy families and collect diagnostics."""
    preds = EvalPredictions(
        gold=[e.label for e in examples],
        bow_probs=bow.predict_proba(examples),
        lstm_probs=lstm.predict_proba(examples),
        decision_probs=net.predict_lstm_prob(examples),
        bow_hidden=bow.hidden_states(examples),
    )
    costs = config.costs
    curves = {}
    for strategy in STRATEGY_TAGS:
        curves[strategy] = speed_accuracy_curve(
            strategy, preds, costs, config.grid_size,
            include_decision=config.charge_decision_cost,
            naive_mode=config.naive_mode,
            rng=derive_rng(config.seed, f"naive.{name}"),
        )
    aucs = {strategy: auc(curve) for strategy, curve in curves.items()}
    thresholds = usage_thresholds()
    logger.info("%s: BoW %.4f LSTM %.4f AUC %s", name, preds.bow_accuracy, preds.lstm_accuracy,
                {k: round(v, 2) for k, v in aucs.items()})
    return SplitEvaluation(
        split=name,
        preds=preds,
        confusion=confusion(preds.bow_pred, preds.lstm_pred, preds.gold),
        curves=curves,
        aucs=aucs,
        buckets=bucket_accuracy(preds.bow_max_prob, preds.bow_correct),
        usage_thresholds=thresholds,
        usage=cumulative_lstm_usage(preds.bow_max_prob, thresholds),
    )


def report_settings(config: PipelineConfig) -> dict:
    return {
        "grid_size": config.grid_size,
        "naive_mode": config.naive_mode,
        "decision_trunk": config.decision_trunk,
        "charge_decision_cost": config.charge_decision_cost,
    }


def evaluate(config: PipelineConfig, splits: DataSplits, bow: BoWClassifier, lstm: LSTMClassifier,
             net: DecisionNet, out_dir: Path):
    if config.decision_trunk == "fine_tuned":
        net = copy.deepcopy(net)
        net.replace_trunk(bow)
    results = [evaluate_split(name, getattr(splits, name), bow, lstm, net, config) for name in EVAL_SPLITS]
    report = build_report(results, config.costs, stage_seeds(config), report_settings(config))
    export_report(report, results, out_dir)
    return report, results


def run_pipeline(config: PipelineConfig) -> PipelineArtifacts:
    """
    Run every stage and write checkpoints, curves and the report under config.out_dir.

    Raises:
        PipelineError: a stage failed; `.stage` names it and `.cause` holds the error.
    """
    config.validate()
    out = Path(config.out_dir)
    log = RunLog(out)
    threads = resolve_threads(config)
    seeds = stage_seeds(config)
    artifacts = PipelineArtifacts(out_dir=out, report={}, results=[])

    with log.stage("data"):
        prepared = prepare_data(config)
    splits = prepared.splits
    vocab_hash = prepared.vocab.hash()
    echo = {
        "seeds": seeds,
        "model": dataclasses.asdict(config.model),
        "train": {name: dataclasses.asdict(getattr(config, name))
                  for name in ("train_bow", "train_lstm", "train_decision")},
    }

    with log.stage("model_train"):
        bow, lstm = build_models(config, prepared.embeddings)
        artifacts.histories.update(_train_pair(
            bow, lstm, splits.model_train, splits.valid,
            _with_seed(config.train_bow, seeds["bow"]), _with_seed(config.train_lstm, seeds["lstm"]),
            threads, prefix="",
        ))
        for model in (bow, lstm):
            path = out / "model_train" / f"{model.kind}.ckpt"
            artifacts.checkpoints[f"model_train/{model.kind}"] = save_checkpoint(path, model, vocab_hash, echo)

    with log.stage("decision_labels"):
        if not splits.decision_train:
            raise AlignmentError("decision-train split is empty")
        labels = generate_decision_labels(bow.predict(splits.decision_train), lstm.predict(splits.decision_train),
                                          [e.label for e in splits.decision_train])
        decision_train = relabel(splits.decision_train, labels)
        artifacts.decision_label_rate = float(np.mean(labels))
        logger.info("decision labels: %.1f%% LSTM over %d examples", 100 * artifacts.decision_label_rate,
                    len(labels))

    with log.stage("decision_train"):
        bundle = DecisionValidation(
            examples=splits.valid,
            preds=EvalPredictions(
                gold=[e.label for e in splits.valid],
                bow_probs=bow.predict_proba(splits.valid),
                lstm_probs=lstm.predict_proba(splits.valid),
            ),
            costs=config.costs,
            grid_size=config.grid_size,
            include_decision=config.charge_decision_cost,
        )
        net = DecisionNet.from_bow(bow, config.model.decision_hidden, config.model.dropout,
                                   rng=derive_rng(config.seed, "init.decision"))
        _, artifacts.histories["decision"] = train_decision_net(
            net, decision_train, bundle, _with_seed(config.train_decision, seeds["decision"]))
        artifacts.checkpoints["decision"] = save_checkpoint(out / "decision.ckpt", net, vocab_hash, echo)

    with log.stage("fine_tune"):
        artifacts.histories.update(_train_pair(
            bow, lstm, splits.full_train, splits.valid,
            _with_seed(config.train_bow, seeds["fine_tune.bow"]),
            _with_seed(config.train_lstm, seeds["fine_tune.lstm"]),
            threads, prefix="fine_tune.",
        ))
        for model in (bow, lstm):
            path = out / "fine_tuned" / f"{model.kind}.ckpt"
            artifacts.checkpoints[f"fine_tuned/{model.kind}"] = save_checkpoint(path, model, vocab_hash, echo)

    with log.stage("evaluate"):
        artifacts.report, artifacts.results = evaluate(config, splits, bow, lstm, net, out)

    log.complete()
    return artifacts


def evaluate_from_checkpoints(config: PipelineConfig, checkpoint_dir, out_dir=None) -> PipelineArtifacts:
    """
    Re-run the evaluate stage from a finished run's fine-tuned checkpoints.

    Raises:
        ConfigError: the checkpoints were trained on another vocabulary.
    """
    config.validate()
    root = Path(checkpoint_dir)
    out = Path(out_dir) if out_dir is not None else Path(config.out_dir)
    prepared = prepare_data(config)
    vocab_hash = prepared.vocab.hash()
    loaded = {
        "bow": load_checkpoint(root / "fine_tuned" / "bow.ckpt"),
        "lstm": load_checkpoint(root / "fine_tuned" / "lstm.ckpt"),
        "decision": load_checkpoint(root / "decision.ckpt"),
    }
    for name, checkpoint in loaded.items():
        if checkpoint.vocab_hash != vocab_hash:
            raise ConfigError(f"{name} checkpoint was trained on a different vocabulary")
    report, results = evaluate(config, prepared.splits, loaded["bow"].model, loaded["lstm"].model,
                               loaded["decision"].model, out)
    return PipelineArtifacts(out_dir=out, report=report, results=results,
                             checkpoints={name: root for name in loaded})


def summarize_runs(reports: dict[int, dict]) -> dict:
    """Mean and sample standard deviation of every strategy's AUC per split across seeds."""
    values: dict[tuple[str, str], list[float]] = {}
    accuracies: dict[str, dict[str, list[float]]] = {}
    for report in reports.values():
        for entry in report["results"]:
            values.setdefault((entry["split"], entry["strategy"]), []).append(entry["auc"])
        for split, info in report["splits"].items():
            acc = accuracies.setdefault(split, {"bow": [], "lstm": []})
            acc["bow"].append(info["bow_accuracy"])
            acc["lstm"].append(info["lstm_accuracy"])

    def stats(xs: list[float]) -> dict:
        array = np.asarray(xs, dtype=np.float64)
        std = float(np.std(array, ddof=1)) if array.size > 1 else 0.0
        return {"mean": float(array.mean()), "std": std, "values": [float(x) for x in array]}

    summary: dict = {"seeds": sorted(reports), "auc": {}, "accuracy": {}}
    for (split, strategy), xs in sorted(values.items()):
        summary["auc"].setdefault(split, {})[strategy] = stats(xs)
    for split, acc in sorted(accuracies.items()):
        summary["accuracy"][split] = {model: stats(xs) for model, xs in acc.items()}
    return summary


def run_multiseed(config: PipelineConfig, seeds: Iterable[int], check: bool = False) -> dict:
    """
    Run the pipeline once per master seed under <out>/seed_<n>/ and write <out>/sweep.json.

    With `check`, the summary also carries the behavioral checks over the
    validation split (`"checks"`, see src.analyzers.acceptance).
    """
    seeds = list(seeds)
    if not seeds:
        raise ConfigError("sweep needs at least one seed")
    root = Path(config.out_dir)
    reports = {}
    for seed in seeds:
        run_config = dataclasses.replace(config, seed=seed, out_dir=str(root / f"seed_{seed}"))
        logger.info("sweep: seed %d", seed)
        reports[seed] = run_pipeline(run_config).report
    summary = summarize_runs(reports)
    if check:
        summary["checks"] = [c.as_dict() for c in behavior_checks(reports)]
    root.mkdir(parents=True, exist_ok=True)
    (root / "sweep.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return summary

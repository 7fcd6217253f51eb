"""skimread -- CLI entry point.

Values given on the command line override the JSON config file (last wins);
the config file overrides built-in defaults. SKIMREAD_THREADS (environment
or .env) caps worker threads unless --threads is given.
"""

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from dotenv import load_dotenv

load_dotenv(project_root / ".env")

from src.errors import ConfigError, PipelineError, SkimreadError

logger = logging.getLogger("skimread")

COMMANDS = ("synth", "pipeline", "eval", "gradcheck", "timeit", "sweep")
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
GRADCHECK_SEEDS = list(range(20))


@dataclass
class CliConfig:
    command: str
    config_path: Optional[str] = None
    out: Optional[str] = None
    seed: Optional[int] = None
    cost_bow: Optional[float] = None
    cost_lstm: Optional[float] = None
    grid_size: Optional[int] = None
    threads: Optional[int] = None
    verbosity: int = 0
    # synth
    n_sentences: int = 2000
    vocab_size: int = 40
    max_len: int = 12
    contrast_rate: float = 0.5
    # eval / timeit
    checkpoints: Optional[str] = None
    samples: int = 640
    repeats: int = 3
    # gradcheck / sweep
    seeds: list[int] = field(default_factory=list)
    check: bool = False


def _seed_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress logs, -vv for debug logs and progress bars")
    common.add_argument("-q", "--quiet", action="store_true", help="only log errors")

    overrides = argparse.ArgumentParser(add_help=False)
    overrides.add_argument("--seed", type=int, help="master seed (overrides the config file)")
    overrides.add_argument("--out", help="output directory (overrides out_dir)")
    overrides.add_argument("--cost-bow", type=float, help="BoW ms/sample (overrides cost_model.c_bow)")
    overrides.add_argument("--cost-lstm", type=float, help="LSTM ms/sample (overrides cost_model.c_lstm)")
    overrides.add_argument("--grid-size", type=int, help="knob values per curve (overrides grid_size)")
    overrides.add_argument("--threads", type=int, help="worker cap (overrides config and SKIMREAD_THREADS)")

    parser = argparse.ArgumentParser(
        prog="skimread",
        description="Skim-reading cascades -- route sentences between a cheap BoW and an LSTM",
        epilog="Precedence: command-line flags > config file > defaults.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    synth_p = subparsers.add_parser("synth", parents=[common], help="Write a synthetic contrastive treebank")
    synth_p.add_argument("--out", required=True, help="Directory for train.txt/dev.txt/test.txt")
    synth_p.add_argument("--n", type=int, default=2000, dest="n_sentences", help="Number of sentences")
    synth_p.add_argument("--vocab-size", type=int, default=40)
    synth_p.add_argument("--max-len", type=int, default=12)
    synth_p.add_argument("--contrast-rate", type=float, default=0.5)
    synth_p.add_argument("--seed", type=int, default=1)

    pipeline_p = subparsers.add_parser("pipeline", parents=[common, overrides],
                                       help="Train all models, evaluate and write the report")
    pipeline_p.add_argument("--config", required=True, dest="config_path", help="JSON run config")

    eval_p = subparsers.add_parser("eval", parents=[common, overrides],
                                   help="Curves and AUCs from an existing run's checkpoints")
    eval_p.add_argument("--config", required=True, dest="config_path", help="JSON run config")
    eval_p.add_argument("--checkpoints", help="Run directory holding the checkpoints (default: out_dir)")

    grad_p = subparsers.add_parser("gradcheck", parents=[common], help="Finite-difference gradient checks")
    grad_p.add_argument("--seeds", type=_seed_list, default=GRADCHECK_SEEDS, help="e.g. 0,1,2 (default 0-19)")

    time_p = subparsers.add_parser("timeit", parents=[common],
                                   help="Measure host ms/sample for both models at batch size 64")
    time_p.add_argument("--config", dest="config_path", help="JSON run config (default: synthetic data)")
    time_p.add_argument("--checkpoints", help="Time the fine-tuned models of this run")
    time_p.add_argument("--samples", type=int, default=640)
    time_p.add_argument("--repeats", type=int, default=3)
    time_p.add_argument("--out", help="Also write the cost model JSON here")

    sweep_p = subparsers.add_parser("sweep", parents=[common, overrides],
                                    help="Run the pipeline for several seeds and report mean/std AUC")
    sweep_p.add_argument("--config", required=True, dest="config_path", help="JSON run config")
    sweep_p.add_argument("--seeds", type=_seed_list, required=True, help="e.g. 1,2,3")
    sweep_p.add_argument("--check", action="store_true",
                         help="Assert the behavioral checks over the seeds; exit 1 if any fails")
    return parser


def parse_args(argv) -> CliConfig:
    """Parse argv into a CliConfig; usage errors exit with status 2, --help with 0."""
    args = build_parser().parse_args(argv)
    values = {k: v for k, v in vars(args).items() if k in CliConfig.__dataclass_fields__}
    verbosity = -1 if args.quiet else args.verbose
    return CliConfig(verbosity=verbosity, **values)


def configure_logging(verbosity: int) -> None:
    level = {-1: logging.ERROR, 0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)


def load_pipeline_config(cli: CliConfig):
    from src.config import DataConfig, PipelineConfig, SyntheticConfig, apply_overrides, load_config

    if cli.config_path is None:
        config = PipelineConfig(data=DataConfig(synthetic=SyntheticConfig()))
    else:
        config = load_config(cli.config_path)
    return apply_overrides(config, seed=cli.seed, out_dir=cli.out, cost_bow=cli.cost_bow,
                           cost_lstm=cli.cost_lstm, grid_size=cli.grid_size, threads=cli.threads)


def cmd_synth(cli: CliConfig) -> int:
    """Write a synthetic treebank."""
    from src.config import SyntheticConfig
    from src.data.synthetic import write_synthetic

    config = SyntheticConfig(n_sentences=cli.n_sentences, vocab_size=cli.vocab_size, max_len=cli.max_len,
                             contrast_rate=cli.contrast_rate, seed=cli.seed if cli.seed is not None else 1)
    paths = write_synthetic(cli.out, config)
    for name, path in paths.items():
        print(f"  {name}: {path}")
    print(f"Synthetic treebank written to {cli.out}")
    return EXIT_OK


def cmd_pipeline(cli: CliConfig) -> int:
    """Train, evaluate and report."""
    from src.pipeline import run_pipeline

    config = load_pipeline_config(cli)
    print(f"Running pipeline (seed {config.seed}) into {config.out_dir}...")
    artifacts = run_pipeline(config)
    _print_aucs(artifacts.report)
    print(f"Report written to {Path(config.out_dir) / 'report.json'}")
    return EXIT_OK


def cmd_eval(cli: CliConfig) -> int:
    """Evaluate checkpoints of an earlier run."""
    from src.pipeline import evaluate_from_checkpoints

    config = load_pipeline_config(cli)
    checkpoints = cli.checkpoints or config.out_dir
    artifacts = evaluate_from_checkpoints(config, checkpoints)
    _print_aucs(artifacts.report)
    print(f"Report written to {artifacts.out_dir / 'report.json'}")
    return EXIT_OK


def cmd_gradcheck(cli: CliConfig) -> int:
    """Run the gradient-check suite."""
    from src.models.gradcheck_suite import PASS_THRESHOLD, gradcheck_suite

    results = gradcheck_suite(cli.seeds)
    for r in results:
        status = "ok" if r.passed else "FAIL"
        print(f"  {r.name:<22} seed={r.seed:<3} max rel. err {r.max_rel_error:.3e}  {status}")
    worst = max(r.max_rel_error for r in results)
    print(f"max rel. err {worst:.3e} (threshold {PASS_THRESHOLD:g})")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE


def cmd_timeit(cli: CliConfig) -> int:
    """Measure per-sample inference cost on this host."""
    from src.analyzers.cost_profiler import measure_costs
    from src.models.checkpoint import load_checkpoint
    from src.pipeline import build_models, prepare_data

    config = load_pipeline_config(cli)
    prepared = prepare_data(config)
    if cli.checkpoints:
        root = Path(cli.checkpoints) / "fine_tuned"
        bow = load_checkpoint(root / "bow.ckpt").model
        lstm = load_checkpoint(root / "lstm.ckpt").model
    else:
        bow, lstm = build_models(config, prepared.embeddings)
    pool = prepared.splits.valid + prepared.splits.test
    examples = [pool[i % len(pool)] for i in range(max(1, cli.samples))]
    costs = measure_costs(bow, lstm, examples, repeats=cli.repeats)
    text = json.dumps({"c_bow": costs.c_bow, "c_lstm": costs.c_lstm}, indent=2)
    print(text)
    if cli.out:
        Path(cli.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cli.out).write_text(text + "\n", encoding="utf-8")
        print(f"Cost model written to {cli.out}")
    return EXIT_OK


def cmd_sweep(cli: CliConfig) -> int:
    """Multi-seed pipeline with mean/std summary."""
    from src.pipeline import run_multiseed

    config = load_pipeline_config(cli)
    start = time.perf_counter()
    summary = run_multiseed(config, cli.seeds, check=cli.check)
    elapsed = time.perf_counter() - start
    for split, strategies in summary["auc"].items():
        print(f"\n{split}:")
        for strategy, stats in strategies.items():
            print(f"  {strategy:<16} AUC {stats['mean']:.2f} +/- {stats['std']:.2f}")
    print(f"\n{len(cli.seeds)} seeds in {elapsed:.0f}s")
    failed = [c for c in summary.get("checks", []) if not c["passed"]]
    for c in summary.get("checks", []):
        status = "ok" if c["passed"] else "FAIL"
        print(f"  {c['name']:<24} {len(c['passed_seeds'])}/{c['n_seeds']} seeds (need {c['required']})  {status}")
    print(f"\nSweep summary written to {Path(config.out_dir) / 'sweep.json'}")
    return EXIT_FAILURE if failed else EXIT_OK


def _print_aucs(report: dict) -> None:
    for entry in report["results"]:
        print(f"  {entry['split']:<6} {entry['strategy']:<16} AUC {entry['auc']:.2f}")


HANDLERS = {
    "synth": cmd_synth,
    "pipeline": cmd_pipeline,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
    "timeit": cmd_timeit,
    "sweep": cmd_sweep,
}


def dispatch(cli: CliConfig) -> int:
    """Run one command; returns the process exit code."""
    configure_logging(cli.verbosity)
    try:
        return HANDLERS[cli.command](cli)
    except ConfigError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as e:
        print(f"ERROR: stage {e.stage}: {e.cause}", file=sys.stderr)
        return EXIT_FAILURE
    except (SkimreadError, OSError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_FAILURE


def main(argv=None) -> int:
    return dispatch(parse_args(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())

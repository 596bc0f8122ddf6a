import argparse
import logging
import os
import sys
from typing import List, Optional

from src.helpers.config_helpers import load_pipeline_config
from src.helpers.constants import CONFIGURATION_FILE_PATH, EXIT_OK, RESULTS_FOLDER
from src.helpers.enums import PipelineStage
from src.helpers.errors import FfrToolError, UsageError
from src.helpers.logging_helper import configure_logging
from src.pipeline_stages import STAGES, GenerateStage

logger = logging.getLogger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_non_negative_int, help="seed for every randomised stage")
    common.add_argument("--jobs", type=int, help="worker processes for the injection campaign")
    common.add_argument("--out-dir", help=f"artifact directory (default {RESULTS_FOLDER})")
    common.add_argument("--config", help="pipeline configuration file (.json or .toml)")
    common.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="override a configuration field, e.g. --set train.learning_rate=0.01",
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _ArgumentParser(prog="ffr_predictor", description="SEU functional failure rate prediction")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def command(stage: PipelineStage, help_text: str) -> argparse.ArgumentParser:
        return commands.add_parser(stage.value, parents=[common], help=help_text)

    def netlist_options(sub: argparse.ArgumentParser):
        sub.add_argument("--netlist", help=".bench netlist to analyse")

    def campaign_options(sub: argparse.ArgumentParser):
        sub.add_argument("--stimulus", help="stimulus JSON; a random one is generated when absent")
        sub.add_argument("--cycles", type=int, help="cycles of the generated stimulus")
        sub.add_argument("--fit", type=float, help="raw FIT rate of every flip-flop")

    netlist_options(command(PipelineStage.parse, "write the circuit graph and node features"))

    sub = command(PipelineStage.campaign, "exhaustive SEU injection campaign")
    netlist_options(sub)
    campaign_options(sub)

    sub = command(PipelineStage.embed, "train the embedder and embed the flip-flops")
    netlist_options(sub)
    sub.add_argument("--embed-epochs", type=int, help="embedder training epochs")
    sub.add_argument("--params", help="saved embedder_params.json to embed with instead of training")

    sub = command(PipelineStage.train, "train the regressor on campaign targets")
    sub.add_argument("--epochs", type=int, help="regressor training epochs")

    sub = command(PipelineStage.predict, "predict and write the report")
    sub.add_argument("--fold", choices=["train", "test"], help="fold the metrics are computed on")

    sub = command(PipelineStage.train_predict, "train the regressor, then predict and write the report")
    sub.add_argument("--epochs", type=int, help="regressor training epochs")
    sub.add_argument("--fold", choices=["train", "test"], help="fold the metrics are computed on")

    sub = command(PipelineStage.pipeline, "run every stage in order")
    netlist_options(sub)
    campaign_options(sub)
    sub.add_argument("--embed-epochs", type=int, help="embedder training epochs")
    sub.add_argument("--epochs", type=int, help="regressor training epochs")
    sub.add_argument("--fold", choices=["train", "test"], help="fold the metrics are computed on")

    sub = command(PipelineStage.gen, "generate a synthetic sequential circuit")
    sub.add_argument("--ffs", type=int, required=True, help="number of flip-flops")
    sub.add_argument("--gates", type=int, required=True, help="number of combinational gates")
    sub.add_argument("--inputs", type=int, help="primary inputs (default ceil(sqrt(ffs)), at least 2)")
    sub.add_argument("--output", help="output .bench path (default <out-dir>/generated.bench)")
    return parser


def _flag_values(args: argparse.Namespace) -> dict:
    return {
        "netlist": getattr(args, "netlist", None),
        "stimulus": getattr(args, "stimulus", None),
        "embedder_params": getattr(args, "params", None),
        "out_dir": args.out_dir,
        "jobs": args.jobs,
        "campaign.cycles": getattr(args, "cycles", None),
        "campaign.fit": getattr(args, "fit", None),
        "embed_train.epochs": getattr(args, "embed_epochs", None),
        "train.epochs": getattr(args, "epochs", None),
        "report.fold": getattr(args, "fold", None),
    }


def run(argv: Optional[List[str]] = None) -> int:
    """Parse the arguments and run one command; errors propagate as FfrToolError."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    config_path = args.config
    if config_path is None and os.path.exists(CONFIGURATION_FILE_PATH):
        config_path = CONFIGURATION_FILE_PATH
    config = load_pipeline_config(config_path, args.overrides, _flag_values(args), args.seed)

    stage = PipelineStage(args.command)
    if stage is PipelineStage.gen:
        runner = GenerateStage(config, args.ffs, args.gates, args.inputs, args.output)
    else:
        runner = STAGES[stage](config)
    wallclock = runner.run()
    logger.info(f"{stage.value} done: " + ", ".join(f"{name} {seconds:.3f} s" for name, seconds in wallclock.items()))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of the ffr_predictor command line.
    Returns 0 on success, 1 on usage errors, 2 on data errors, 3 on numeric failures.
    """
    try:
        return run(argv)
    except FfrToolError as err:
        if not logging.getLogger().handlers:
            configure_logging()
        logger.error(str(err))
        return err.exit_code
    except SystemExit as exit_request:
        # --help
        return int(exit_request.code or 0)


if __name__ == "__main__":
    sys.exit(main())

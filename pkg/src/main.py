"""
Command-line entry point: prepare, train, generate, evaluate, ablate.
Configuration file values are overridden by flags.
"""

import argparse
import sys
from typing import List, Optional

from src.cli import commands
from src.config.logger import configure_logging, get_logger
from src.config.settings import Settings
from src.errors import ConfigurationError, DataError, DivergenceError, RangeError
from src.networks.config import MODE_PRESETS, resolve_mode
from src.training.config import TrainConfig

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DIVERGENCE = 4


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--seed", type=int, help="Split and training seed")
    common.add_argument("--corpus", help="Ground-truth corpus root (<root>/<style>/<CODEPOINT>.png)")
    common.add_argument("--dictionary", help="Component dictionary file")
    common.add_argument("--checkpoint", help="Checkpoint file")
    common.add_argument("--style", type=int, help="1-based style label")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--skip-missing", action="store_true", default=None,
                        help="Skip characters without a decomposition instead of aborting")
    common.add_argument("--styles-count", type=int, help="Number of styles S")
    common.add_argument("--mode", choices=list(MODE_PRESETS), help="Style/component configuration preset")
    common.add_argument("--source-dir", help="Directory of source glyphs <CODEPOINT>.png")
    common.add_argument("--font", help="Font used to render source glyphs")
    common.add_argument("--test-manifest", help="Split manifest written by prepare")
    common.add_argument("--test-count", type=int, help="Characters held out for testing")

    parser = argparse.ArgumentParser(prog="inkstyle", description="Multi-style calligraphy glyph generator")
    sub = parser.add_subparsers(dest="command", required=True)

    prepare = sub.add_parser("prepare", parents=[common], help="Split, cache and count the corpus")
    prepare.add_argument("--workers", type=int, help="Normalization threads")

    train = sub.add_parser("train", parents=[common], help="Train a generator")
    train.add_argument("--resume", help="Continue from this checkpoint")
    train.add_argument("--epochs", type=int)
    train.add_argument("--batch-size", type=int)
    train.add_argument("--validate", action="store_true",
                       help="Keep best.pt by SSIM on the test part")

    generate = sub.add_parser("generate", parents=[common], help="Render characters in a style")
    generate.add_argument("characters", help="Characters to generate")
    generate.add_argument("--sheet", action="store_true", help="Also write a contact sheet")

    sub.add_parser("evaluate", parents=[common], help="MSE/SSIM on the test part")

    ablate = sub.add_parser("ablate", parents=[common], help="Train and compare mode presets")
    ablate.add_argument("--matrix", required=True, help="File listing one mode preset per line")
    return parser


def _train_config(args: argparse.Namespace, settings: Settings) -> TrainConfig:
    cfg = TrainConfig.from_settings(settings)
    style_mode = components = None
    if args.mode:
        style_mode, components = resolve_mode(args.mode)
    return cfg.with_overrides(
        seed=args.seed,
        styles_count=args.styles_count,
        style_mode=style_mode,
        components_enabled=components,
        epochs=getattr(args, "epochs", None),
        batch_size=getattr(args, "batch_size", None),
    )


def _data_option(args: argparse.Namespace, settings: Settings, flag: str, key: str) -> Optional[str]:
    value = getattr(args, flag)
    return value if value is not None else (settings.get("Data", key, "") or None)


def run(args: argparse.Namespace) -> int:
    settings = Settings(args.config)
    configure_logging(**settings.get_logging_options())
    logger.info(f"Command: {args.command}")

    cfg = _train_config(args, settings)
    corpus = _data_option(args, settings, "corpus", "corpus")
    dictionary = _data_option(args, settings, "dictionary", "dictionary")
    out_dir = args.out or settings.get_out_dir()
    test_count = args.test_count if args.test_count is not None else settings.get_int("Data", "test_count", 1000)
    skip_missing = args.skip_missing if args.skip_missing is not None else settings.get_bool("Data", "skip_missing")

    if args.command == "prepare":
        workers = args.workers if args.workers is not None else settings.get_int("Data", "workers", 4)
        commands.cmd_prepare(corpus, dictionary, out_dir, test_count, cfg.seed,
                             skip_missing=skip_missing, workers=workers, vocab_size=cfg.vocab_size)
        return EXIT_OK

    provider = commands.open_provider(_data_option(args, settings, "source_dir", "source_dir"),
                                      _data_option(args, settings, "font", "font_path"))

    if args.command == "train":
        commands.cmd_train(cfg, corpus, dictionary, provider, out_dir,
                           manifest_path=args.test_manifest, test_count=test_count,
                           style=args.style, skip_missing=skip_missing, resume=args.resume,
                           validate=args.validate, settings=settings)
    elif args.command == "generate":
        if args.style is None:
            raise ConfigurationError("generate needs --style")
        commands.cmd_generate(args.checkpoint, args.characters, args.style, out_dir,
                              dictionary, provider, sheet=args.sheet)
    elif args.command == "evaluate":
        report = commands.cmd_evaluate(args.checkpoint, corpus, args.test_manifest, dictionary,
                                       provider, out_dir, style=args.style)
        print(report.to_table(), end="")
    elif args.command == "ablate":
        report = commands.cmd_ablate(cfg, args.matrix, corpus, dictionary, provider, out_dir,
                                     manifest_path=args.test_manifest, test_count=test_count,
                                     skip_missing=skip_missing)
        print(report.to_table(), end="")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run a command and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    try:
        status = run(args)
        logger.info(f"✓ {args.command} finished")
        return status
    except DivergenceError as e:
        logger.error(f"✗ {e}")
        return EXIT_DIVERGENCE
    except DataError as e:
        logger.error(f"✗ {e}")
        return EXIT_DATA
    except (ConfigurationError, RangeError) as e:
        logger.error(f"✗ {e}")
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"✗ Unexpected error in {args.command}: {e}", exc_info=True)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""
Script to write the small-instance corpus used by the acceptance checks
to data/corpus/ as JSON instance files.
"""

import argparse
import logging
import sys
from pathlib import Path

from dotenv import load_dotenv

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.core.config import Settings, configure_logging  # noqa: E402
from src.core.errors import SubmodError  # noqa: E402
from src.services.instance_service import corpus_specs, write_instance  # noqa: E402

# === Constants and Configuration ===
load_dotenv()

PROJECT_ROOT = Path(__file__).resolve().parent.parent

logger = logging.getLogger("generate_corpus")


def main() -> None:
    settings = Settings.from_env()
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--per-cell", type=int, default=9, help="instances per (kind, constraint) pair")
    parser.add_argument("--max-n", type=int, default=10)
    parser.add_argument("--seed", type=int, default=settings.seed)
    parser.add_argument("--output-dir", default=str(PROJECT_ROOT / settings.data_dir / "corpus"))
    args = parser.parse_args()
    configure_logging(settings.log_level)

    try:
        specs = corpus_specs(per_cell=args.per_cell, max_n=args.max_n, seed=args.seed)
        output_dir = Path(args.output_dir)
        for spec in specs:
            write_instance(spec, output_dir / f"{spec.name}.json")
        logger.info("Wrote %d instances to %s", len(specs), output_dir)
    except (SubmodError, OSError) as e:
        logger.error("Corpus generation failed: %s", e)
        sys.exit(1)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Write the 50-product demo catalog, topic pairs, and a ready-to-run config.

Usage:
  python scripts/make_demo_data.py --dir demo
  estc run --config demo/run.toml
  estc serve --config demo/run.toml
"""

import argparse
from pathlib import Path

from estc.synthdata import write_demo_files


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dir", default="demo", help="output directory")
    parser.add_argument("--products", type=int, default=50)
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args()

    directory = Path(args.dir)
    paths = write_demo_files(directory, n=args.products, seed=args.seed)
    config_path = directory / "run.toml"
    config_path.write_text(
        "# demo pipeline configuration\n"
        "catalog = products.jsonl\n"
        "topics = topics.jsonl\n"
        "store = store.jsonl\n"
        "models_dir = models\n"
        "seed = 42\n"
        "generator = retrieval\n"
        "agnes_threshold = 0.35\n",
        encoding="utf-8",
    )
    print(f"catalog: {paths['catalog']}")
    print(f"topics:  {paths['topics']}")
    print(f"config:  {config_path}")


if __name__ == "__main__":
    main()

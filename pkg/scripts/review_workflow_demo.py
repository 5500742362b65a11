#!/usr/bin/env python3
"""End-to-end demo: build channels, simulate a review pass, print the stats.

Runs the full pipeline on generated demo data in a temporary directory,
then accepts three of every four pending channels and prints the resulting
acceptance rate.
"""

import argparse
import json
import tempfile
from pathlib import Path

from estc.pipeline import PipelineConfig, run_pipeline
from estc.store import ChannelStore, acceptance_rate
from estc.synthdata import write_demo_files


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dir", default=None,
                        help="working directory (default: temp dir)")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    workdir = Path(args.dir) if args.dir else Path(tempfile.mkdtemp(prefix="estc-demo-"))
    paths = write_demo_files(workdir, n=50, seed=13)
    config = PipelineConfig(
        catalog_path=str(paths["catalog"]),
        topics_path=str(paths["topics"]),
        store_path=str(workdir / "store.jsonl"),
        seed=args.seed,
    )
    summary = run_pipeline(config)
    print("pipeline summary:")
    print(json.dumps(summary.to_json(), ensure_ascii=False, indent=2))

    store = ChannelStore(config.store_path, config.min_products)
    pending = store.channels()
    print(f"\nreviewing {len(pending)} pending channels...")
    for i, channel in enumerate(pending):
        decision = "reject" if i % 4 == 3 else "accept"
        store.decide(channel.channel_id, decision, [], reviewer="demo-reviewer")
        print(f"  {channel.channel_id}  {channel.title.serialized()!r}: {decision}")
    print(f"\nacceptance rate: {acceptance_rate(store):.1f}%")
    print(f"store: {config.store_path}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Write the synthetic link-prediction benchmark to train/valid/test TSVs.

The default "pairs" style is exactly learnable by translational and
bilinear models; "ring" is a deliberately frustrated variant useful as
a stress test (no embedding model should reach high MRR on it).
"""
import argparse
from pathlib import Path

from kgfuse.linkpred import cycle_dataset, write_triples_tsv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--entities", type=int, default=50, help="even count >= 10")
    parser.add_argument("--style", choices=("pairs", "ring"), default="pairs")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args()

    dataset = cycle_dataset(args.entities, seed=args.seed, style=args.style)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for stem in ("train", "valid", "test"):
        rows = [dataset.decode(row) for row in getattr(dataset, stem)]
        write_triples_tsv(rows, out / f"{stem}.tsv")
        print(f"{stem}: {len(rows)} triples")
    print(f"{dataset.n_entities} entities, {dataset.n_relations} relations -> {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

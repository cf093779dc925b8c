#!/usr/bin/env python3
"""Generate a large synthetic OBO file for parser throughput checks.

Terms form a forest: every term after the first hundred picks a
deterministic earlier parent, so term and edge counts are exact.
"""
import argparse
from pathlib import Path


def write_synthetic_obo(path: Path, n_terms: int) -> tuple[int, int]:
    edges = 0
    with path.open("w", encoding="utf-8") as fh:
        fh.write("format-version: 1.2\nontology: synthetic-forest\n\n")
        for i in range(n_terms):
            fh.write(f"[Term]\nid: SYN:{i:07d}\nname: synthetic term {i}\n")
            if i % 7 == 0:
                fh.write(f'synonym: "node {i}" EXACT []\n')
            if i >= 100:
                fh.write(f"is_a: SYN:{i % 100:07d} ! forest parent\n")
                edges += 1
            fh.write("\n")
    return n_terms, edges


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--terms", type=int, default=43000)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()
    terms, edges = write_synthetic_obo(Path(args.out), args.terms)
    print(f"wrote {args.out}: {terms} terms, {edges} is_a edges")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

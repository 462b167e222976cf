#!/usr/bin/env python3
"""Convert the LINQS Cora release (cora.content, cora.cites) to documents.tsv and edges.tsv.

cora.content rows are `<id> <1433 binary word indicators> <class>`. The release
ships no raw text, so each present word index i becomes the token `w<i>` in index order.
cora.cites rows are `<cited-id> <citing-id>`; direction is kept as written and the
loader treats edges as undirected.
"""

import argparse
import pathlib
import sys


def convert(src: pathlib.Path, dst: pathlib.Path) -> tuple[int, int]:
    dst.mkdir(parents=True, exist_ok=True)
    n_docs = 0
    with open(src / "cora.content") as fin, open(dst / "documents.tsv", "w") as fout:
        for lineno, line in enumerate(fin, 1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) < 3:
                sys.exit(f"cora.content:{lineno}: expected id, features, label")
            words = [f"w{i}" for i, bit in enumerate(fields[1:-1]) if bit == "1"]
            fout.write(f"{fields[0]}\t{' '.join(words)}\n")
            n_docs += 1
    n_edges = 0
    with open(src / "cora.cites") as fin, open(dst / "edges.tsv", "w") as fout:
        for lineno, line in enumerate(fin, 1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 2:
                sys.exit(f"cora.cites:{lineno}: expected two ids")
            fout.write(f"{fields[0]}\t{fields[1]}\n")
            n_edges += 1
    return n_docs, n_edges


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("src", type=pathlib.Path, help="directory with cora.content and cora.cites")
    ap.add_argument("dst", type=pathlib.Path, help="output directory")
    args = ap.parse_args()
    docs, edges = convert(args.src, args.dst)
    print(f"documents={docs} edge_lines={edges} -> {args.dst}")


if __name__ == "__main__":
    main()

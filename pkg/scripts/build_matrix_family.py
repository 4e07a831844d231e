#!/usr/bin/env python3
"""
Write test matrices M (one Matrix Market file per size) for FromFile campaigns
and the perturb/diagnose/specr commands.

The output directory receives:
  - <kind>_n<size>.mtx: the matrix, rescaled to --norm_target
  - index.csv: one row per file with kind, n, seed, operator norm and nnz

Notes:
- GinibreDense matrices are drawn from the (seed, 0, matrix) stream, so the
  same seed always gives the same files.
"""

from __future__ import annotations

import argparse
import os
from typing import List

import pandas as pd

from ShatterLab.errors import ShatterLabError
from ShatterLab.family_agent import Family_Agent, FamilyKind, MatrixFamily
from ShatterLab.io_agent import IO_Agent
from ShatterLab.matrix_agent import Matrix_Agent


DEFAULT_OUTPUT_DIR = os.path.join("data", "families")


def _parse_sizes(text: str) -> List[int]:
    sizes = [int(token) for token in text.replace(",", " ").split()]
    if not sizes or any(n < 1 for n in sizes):
        raise ValueError(f"--n_list needs positive integers, got {text!r}")
    return sizes


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--kind", required=True, type=str, choices=[kind.value for kind in FamilyKind])
    parser.add_argument("--n_list", type=str, default="16,32,64,128", help="comma separated sizes")
    parser.add_argument("--norm_target", type=float, default=1.0, help="operator norm of every written matrix")
    parser.add_argument("--spread", type=float, default=0.0, help="diagonal spread for the Identity family")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--layout", type=str, default="coordinate", choices=["coordinate", "array"])
    parser.add_argument("--output_dir", type=str, default=DEFAULT_OUTPUT_DIR)
    parser.add_argument(
        "--errors_file",
        type=str,
        default=None,
        help="Optional CSV listing sizes that could not be built, with error reasons",
    )
    args = parser.parse_args()

    records = []
    errors = []
    for n in _parse_sizes(args.n_list):
        try:
            family = MatrixFamily(FamilyKind(args.kind), n, args.norm_target, args.spread, None, args.seed)
            M = Family_Agent.build(family)
        except ShatterLabError as e:
            errors.append({"kind": args.kind, "n": n, "error": str(e)})
            continue

        path = os.path.join(args.output_dir, f"{args.kind}_n{n}.mtx")
        IO_Agent.write_matrix(path, M, layout=args.layout)
        records.append({
            "file": os.path.basename(path),
            "kind": args.kind,
            "n": n,
            "seed": args.seed,
            "norm": Matrix_Agent.operator_norm(M),
            "nnz": int(M.nnz),
        })

    index_file = os.path.join(args.output_dir, "index.csv")
    IO_Agent.write_csv(index_file, pd.DataFrame(records))

    print(f"[ShatterLab] Built {args.kind} family in {args.output_dir}")
    print(f"[ShatterLab] Matrices written: {len(records)} -> {index_file}")
    if errors:
        print(f"[ShatterLab] Skipped sizes with errors: {len(errors)}")

    if args.errors_file is not None:
        IO_Agent.write_csv(args.errors_file, pd.DataFrame(errors))
        print(f"[ShatterLab] Wrote errors -> {args.errors_file}")


if __name__ == "__main__":
    main()

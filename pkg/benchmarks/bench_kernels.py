#!/usr/bin/env python3
"""Standalone kernel benchmark; same as `spinalnet bench-kernels`."""

import argparse
import sys

from spinalnet.benchmarks import bench_kernels

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sys.exit(bench_kernels(args.batch, args.repeats))

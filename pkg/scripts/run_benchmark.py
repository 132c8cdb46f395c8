"""Metrics table (volume, constraints per polyhedron, polyhedra per corridor,
decomposition time) for the proposed and legacy rules over seeded maps."""
import argparse
import sys

from safecorridor.bench import BenchConfig, format_table, public_doc, run_bench
from safecorridor.io import dump_json


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--maps", type=int, default=10)
    ap.add_argument("--rng-base", type=int, default=0)
    ap.add_argument("--max-exp", type=int, default=36)
    ap.add_argument("-o", "--output", default="benchmark_metrics.json")
    args = ap.parse_args()
    doc = run_bench(BenchConfig(n_maps=args.maps, rng_base=args.rng_base, max_expansions=args.max_exp),
                    log=lambda s: print(s, file=sys.stderr))
    print(format_table(doc))
    dump_json(public_doc(doc), args.output)
    print(f"metrics written to {args.output}")


if __name__ == "__main__":
    main()

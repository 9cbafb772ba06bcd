"""Write a synthetic minute-price corpus (one CSV per instrument).

The prices follow a long-memory volatility cascade with an intraday U-shape,
which is enough to exercise every CLI subcommand.

    python3 scripts/make_demo_corpus.py out/corpus --instruments 20 --days 250
"""
import argparse
import sys
from pathlib import Path

from retscale.synthetic import price_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--instruments", type=int, default=20)
    ap.add_argument("--days", type=int, default=250)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.instruments):
        (out / f"SYN{k:03d}.csv").write_text(price_csv(args.days, seed=(args.seed, k)))
    print(f"wrote {args.instruments} instruments to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

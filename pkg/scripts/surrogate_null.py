"""Compare alpha on linear long-memory series and on their IAAFT surrogates.

Both sets should agree within sampling error, since the surrogate keeps the
spectrum and the marginal distribution that a linear Gaussian series is fully
described by.

    python3 scripts/surrogate_null.py --series 16 --length 65536
"""
import argparse
import math
import sys

import numpy as np

from retscale.pipeline import AnalysisConfig, analyze_series, default_targets
from retscale.surrogate import SurrogateConfig, make_surrogate
from retscale.synthetic import fgn


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--series", type=int, default=16)
    ap.add_argument("--length", type=int, default=2 ** 16)
    ap.add_argument("--hurst", type=float, default=0.8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    ms = (0.5, 2.0)
    cfg = AnalysisConfig(targets=default_targets(), m_values=ms, q_values=())
    a = {m: ([], []) for m in ms}
    for ss in np.random.SeedSequence(args.seed).spawn(args.series):
        s1, s2 = (int(k) for k in ss.generate_state(2))
        v = fgn(args.length, args.hurst, s1)
        sv = make_surrogate(v, SurrogateConfig(30, s2))
        for src, vals in ((0, v), (1, sv)):
            r = analyze_series("fgn", vals, cfg)
            for m in ms:
                a[m][src].append(r.alphas[m].alpha)
    for m, (o, s) in a.items():
        o, s = np.array(o), np.array(s)
        se = math.hypot(o.std(ddof=1), s.std(ddof=1)) / math.sqrt(args.series)
        print(f"m={m:g}: original {o.mean():+.4f}  surrogate {s.mean():+.4f}  "
              f"z={(o.mean() - s.mean()) / se:+.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

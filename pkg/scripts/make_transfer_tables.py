"""Regenerate the precomputed miscorrection tables in src/prodcode/data/."""

import argparse

from prodcode.bch import CodeParams
from prodcode.de import default_x_grid, mc_transfer_estimate, shipped_model_path


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=20190501)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    for v in range(8, 13):
        for t in (3, 4):
            model = mc_transfer_estimate(CodeParams(v, t), default_x_grid(v), args.trials,
                                         args.seed, args.workers)
            path = shipped_model_path(v, t)
            model.save(path)
            print(f"v={v} t={t} e_max={model.e_max} -> {path}", flush=True)


if __name__ == "__main__":
    main()

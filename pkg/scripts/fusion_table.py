"""NDCG of each fusion preset on synthetic corpora across signal levels.

    python scripts/fusion_table.py --n_hosts 400 --signals 0 0.5 1 --seed 7
"""
import argparse
import logging
import tempfile
from pathlib import Path

from hostquality.pipeline import gen_synthetic, run_task
from hostquality.pipeline.config import make_config, read_config_file

SPECS = ("L", "H", "C", "T", "HCT", "LHCT")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n_hosts", type=int, default=400)
    ap.add_argument("--signals", type=float, nargs="+", default=[0.0, 0.5, 1.0])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--n_trees", type=int, default=90)
    ap.add_argument("--specs", nargs="+", default=list(SPECS))
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING)

    print("signal\t" + "\t".join(args.specs))
    with tempfile.TemporaryDirectory() as tmp:
        for s in args.signals:
            corpus = gen_synthetic(args.n_hosts, s, args.seed).write(Path(tmp) / f"s{s}")
            row = []
            for spec in args.specs:
                values = read_config_file(corpus / "run.conf")
                values.update(out_dir=str(Path(tmp) / f"s{s}_{spec}"), fusion=spec,
                              n_trees=args.n_trees)
                row.append(run_task(make_config(values))[1]["ndcg"])
            print(f"{s:g}\t" + "\t".join(f"{v:.4f}" for v in row), flush=True)


if __name__ == "__main__":
    main()

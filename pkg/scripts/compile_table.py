"""Shuttle count and ESP per connectivity graph, averaged over sizes, cycles and seeds.

    python scripts/compile_table.py [--seeds 10] [--circuit qed|ame]

Prints one row per CG; compilation only, no simulation.
"""
import argparse

import numpy as np

from spinbench.bench import esp
from spinbench.experiment import ExperimentConfig, compile_cell


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--circuit", choices=["qed", "ame"], default="qed")
    ap.add_argument("--sabre-trials", type=int, default=10)
    args = ap.parse_args()
    cfg = ExperimentConfig.from_dict(dict(experiment=args.circuit, sabre_trials=args.sabre_trials, plots=False))
    print(f"{'cg':<5}{'shuttles':>10}{'esp':>10}{'cells':>8}")
    for cg in cfg.cgs:
        cells = [compile_cell(cfg, s, cg, c, k) for s in range(args.seeds) for c in cfg.cols for k in cfg.cycles]
        shuttles = np.mean([cc.shuttle_count for cc in cells])
        fid = np.mean([esp(cc.ops) for cc in cells])
        print(f"{cg:<5}{shuttles:>10.2f}{fid:>10.4f}{len(cells):>8}")


if __name__ == "__main__":
    main()

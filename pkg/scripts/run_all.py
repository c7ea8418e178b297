"""Run the four benchmark sweeps from configs/ into results/.

    python scripts/run_all.py [--threads N] [--trials-scale S]

``--trials-scale`` shrinks every config's trial count for a quick pass.
"""
import argparse
import json
import logging
import time
from pathlib import Path

from spinbench.experiment import ExperimentConfig, run_experiment

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ("ame", "qed", "i3", "crosstalk")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--trials-scale", type=float, default=1.0)
    ap.add_argument("--out", type=Path, default=ROOT / "results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)
    for name in CONFIGS:
        data = json.loads((ROOT / "configs" / f"{name}.json").read_text())
        data["trials"] = max(1, int(data["trials"] * args.trials_scale))
        cfg = ExperimentConfig.from_dict(data)
        start = time.perf_counter()
        rows = run_experiment(cfg, args.out / name, threads=args.threads)
        print(f"{name}: {len(rows)} rows in {time.perf_counter() - start:.0f}s -> {args.out / name}")


if __name__ == "__main__":
    main()

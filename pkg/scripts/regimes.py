"""Run the blow-up, bounded and repulsive regime configs and print one line each.

Usage: python scripts/regimes.py [config.ini ...]
"""

import sys
from pathlib import Path

from chemolab.cli import run_experiment
from chemolab.config import load
from chemolab.theory import check_hypothesis

HERE = Path(__file__).parent / "configs"
DEFAULT = ["blow_up.ini", "bounded_h1.ini", "bounded_repulsive.ini"]


def main(paths):
    for path in paths:
        cfg = load(path)
        out = run_experiment(cfg)
        report = check_hypothesis(cfg.model)
        print(
            f"{Path(path).stem:20s} predicted={report.predicted:14s} verdict={out.verdict:12s} "
            f"t_final={out.t_final:.4g} max_linf={out.max_linf:.4g} ({out.reason})"
        )


if __name__ == "__main__":
    main(sys.argv[1:] or [HERE / name for name in DEFAULT])

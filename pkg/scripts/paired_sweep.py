"""Attractive vs repulsive (alpha, beta) sweeps and the bounded-region comparison.

Usage: python scripts/paired_sweep.py [config.ini] [-o outdir]
"""

import argparse
import dataclasses
from pathlib import Path

from chemolab.config import load
from chemolab.diagnostics import InitialSpec, sweep
from chemolab.theory import Sign

HERE = Path(__file__).parent / "configs"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", nargs="?", type=Path, default=HERE / "sweep_alpha_beta.ini")
    ap.add_argument("-o", "--output", type=Path, default=Path("out/paired_sweep"))
    args = ap.parse_args(argv)
    cfg = load(args.config)
    init = cfg.initial_data
    bounded = {}
    for sign in Sign:
        model = dataclasses.replace(cfg.model, sign=sign)
        atlas = sweep(
            cfg.sweep.axes, model, cfg.solver_config(), cfg.mesh(),
            InitialSpec(init.family, init.mass, init.width), workers=cfg.sweep.workers,
        )
        out = args.output / sign.value
        out.mkdir(parents=True, exist_ok=True)
        (out / "atlas.csv").write_text(atlas.to_csv())
        keys = list(cfg.sweep.axes)
        bounded[sign] = {tuple(r[k] for k in keys) for r in atlas.records if r["verdict"] == "bounded"}
        print(f"{sign.value:10s} bounded at {len(bounded[sign])}/{len(atlas.records)} points")
    extra = bounded[Sign.ATTRACTIVE] - bounded[Sign.REPULSIVE]
    print(f"repulsive bounded region contains attractive one: {not extra}")
    for point in sorted(extra):
        print(f"  bounded only when attractive: {point}")


if __name__ == "__main__":
    main()

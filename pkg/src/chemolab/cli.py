"""Command line entry point: ``chemolab check|run|sweep``.

Exit codes: 0 success, 2 invalid input, 3 expectation mismatch.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from chemolab.config import ExperimentConfig, dumps, load
from chemolab.diagnostics import InitialSpec, classify, sweep
from chemolab.dynamics import run
from chemolab.errors import ChemolabError, ConfigError
from chemolab.geometry import save_field
from chemolab.initial import make_initial
from chemolab.reporting import code_version, dumps_json, norms_csv
from chemolab.theory import ModelParams, check_hypothesis, lambda_tildes

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_MISMATCH = 3

log = logging.getLogger("chemolab")


def _bool(s: str) -> bool:
    low = s.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {s!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chemolab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="evaluate the boundedness hypotheses for one parameter set")
    c.add_argument("--config", type=Path, help="read the [model] block from this file")
    c.add_argument("-n", type=int)
    c.add_argument("-m", type=float)
    c.add_argument("-a", type=float)
    c.add_argument("-b", type=float)
    c.add_argument("--alpha", type=float)
    c.add_argument("--beta", type=float)
    c.add_argument("--eta", type=float)
    c.add_argument("--sign", choices=("attractive", "repulsive"))
    c.add_argument("--expect-h1", type=_bool)
    c.add_argument("--expect-h2", type=_bool)
    c.add_argument("--json", type=Path, help="also write the report here")

    r = sub.add_parser("run", help="integrate one configuration")
    r.add_argument("config", type=Path)
    r.add_argument("-o", "--output", type=Path, help="override [outputs] directory")

    s = sub.add_parser("sweep", help="run a parameter grid from [sweep.axes]")
    s.add_argument("config", type=Path)
    s.add_argument("-o", "--output", type=Path, help="override [outputs] directory")
    s.add_argument("--compare-theory", action="store_true", help="add the consistency column")
    s.add_argument("--workers", type=int)
    return ap


def _params_from_args(args) -> ModelParams:
    base = load(args.config).model if args.config else ModelParams()
    kw = base.to_dict()
    for key, attr in (("n", "n"), ("m", "m"), ("a", "a"), ("b", "b"), ("alpha", "alpha"),
                      ("beta", "beta"), ("eta", "eta"), ("sign", "sign")):
        v = getattr(args, attr)
        if v is not None:
            kw[key] = v
    return ModelParams(**kw)


def cmd_check(args) -> int:
    p = _params_from_args(args)
    rep = check_hypothesis(p)
    sample_p = rep.p_bar + 1
    try:
        lam = lambda_tildes(sample_p, p).__dict__
    except ChemolabError as exc:
        lam = {"error": f"{type(exc).__name__}: {exc}"}
    out = rep.to_dict()
    out["lambda_tilde_at"] = sample_p
    out["lambda_tilde"] = lam
    out["code_version"] = code_version()
    print(f"l              = {rep.l:.17g}")
    print(f"h1_threshold   = {rep.h1_threshold:.17g}  (alpha+beta margin {rep.h1_margin:+.6g})")
    print(f"h2_threshold   = {rep.h2_threshold:.17g}  (alpha+beta margin {rep.h2_margin:+.6g})")
    print(f"h1_holds       = {str(rep.h1_holds).lower()}")
    print(f"h2_holds       = {str(rep.h2_holds).lower()}")
    print(f"p_bar          = {rep.p_bar:.17g}{'' if rep.p_bar_valid else '  (h1 fails: informational)'}")
    print(f"lambda_tilde at p = {sample_p:.6g}: {lam}")
    print(f"predicted      = {rep.predicted}  (sign {rep.sign})")
    text = dumps_json(out)
    print(text, end="")
    if args.json:
        args.json.write_text(text)
    code = EXIT_OK
    if args.expect_h1 is not None and args.expect_h1 != rep.h1_holds:
        print(f"expectation mismatch: h1_holds={rep.h1_holds}", file=sys.stderr)
        code = EXIT_MISMATCH
    if args.expect_h2 is not None and args.expect_h2 != rep.h2_holds:
        print(f"expectation mismatch: h2_holds={rep.h2_holds}", file=sys.stderr)
        code = EXIT_MISMATCH
    return code


def _outdir(cfg: ExperimentConfig, override: Path | None) -> Path:
    d = override if override is not None else Path(cfg.outputs.directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory {d} is not writable: {exc}") from exc
    return d


def run_experiment(cfg: ExperimentConfig):
    mesh = cfg.mesh()
    init = cfg.initial_data
    rho0 = make_initial(mesh, init.family, init.mass, init.width, init.center)
    return run(rho0, cfg.model, cfg.solver_config())


def cmd_run(args) -> int:
    cfg = load(args.config)
    out_dir = _outdir(cfg, args.output)
    resolved = dumps(cfg)
    outcome = run_experiment(cfg)
    report = classify(outcome, check_hypothesis(cfg.model))
    summary = {
        **outcome.summary(),
        "classification": report,
        "code_version": code_version(),
        "config": cfg.to_dict(),
    }
    (out_dir / "norms.csv").write_text(norms_csv(outcome.norm_series, resolved))
    save_field(outcome.final_field, out_dir / "final.chlb", metadata=resolved)
    (out_dir / "summary.json").write_text(dumps_json(summary))
    print(f"verdict={outcome.verdict} t_final={outcome.t_final:.17g} max_linf={outcome.max_linf:.17g}")
    print(f"wrote {out_dir / 'norms.csv'}, {out_dir / 'final.chlb'}, {out_dir / 'summary.json'}")
    return EXIT_OK


CONSISTENCY_COLUMNS = ("consistency", "refinement_required", "unresolved")


def cmd_sweep(args) -> int:
    cfg = load(args.config)
    axes = cfg.sweep.axes
    if not 1 <= len(axes) <= 2:
        raise ConfigError("a sweep needs 1 or 2 axes in [sweep.axes]")
    if cfg.geometry.kind != "radial":
        raise ConfigError("sweeps run on the radial solver; set geometry.kind = radial")
    out_dir = _outdir(cfg, args.output)
    init = cfg.initial_data
    atlas = sweep(
        axes,
        cfg.model,
        cfg.solver_config(),
        cfg.mesh(),
        InitialSpec(init.family, init.mass, init.width),
        workers=args.workers or cfg.sweep.workers,
        refine=cfg.sweep.refine,
    )
    if not args.compare_theory:
        for rec in atlas.records:
            for k in CONSISTENCY_COLUMNS:
                rec.pop(k, None)
    atlas.meta["config"] = cfg.to_dict()
    atlas.meta["code_version"] = code_version()
    resolved = dumps(cfg)
    (out_dir / "atlas.csv").write_text(atlas.to_csv(resolved))
    (out_dir / "atlas.json").write_text(atlas.to_json())
    counts = {}
    for rec in atlas.records:
        counts[rec["verdict"]] = counts.get(rec["verdict"], 0) + 1
    print(f"{len(atlas.records)} points: {counts}")
    if args.compare_theory:
        bad = sum(1 for r in atlas.records if r.get("unresolved"))
        print(f"unresolved counterexample-candidates: {bad}")
    print(f"wrote {out_dir / 'atlas.csv'}, {out_dir / 'atlas.json'}")
    return EXIT_OK


COMMANDS = {"check": cmd_check, "run": cmd_run, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ChemolabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

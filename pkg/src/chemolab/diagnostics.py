"""Norms, integral-identity residuals, verdict classification, and parameter sweeps.

The residual checks recompute every functional from stored fields or norm
series and differentiate in time with centred differences between samples.
They never reuse the stepping code's increments.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from chemolab.dynamics import RunOutcome, SolverConfig, run
from chemolab.errors import InputMismatch, InvalidExponent, NotEnoughData
from chemolab.geometry import BoxGrid, Field, RadialMesh, unit_ball_volume
from chemolab.initial import make_initial
from chemolab.reporting import comment_block, dumps_json, fmt_float
from chemolab.theory import HypothesisReport, ModelParams, check_hypothesis, dissipation_c1

SWEEP_AXES = ("m", "alpha", "beta", "eta", "a", "b", "mass")


@dataclass(frozen=True)
class IdentityResidual:
    t: float
    lhs: float
    rhs: float
    rel_residual: float


def _residual(t: float, lhs: float, rhs: float) -> IdentityResidual:
    rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-30)
    return IdentityResidual(float(t), float(lhs), float(rhs), float(rel))


def lp_norm(rho: Field, p_exp: float) -> float:
    if math.isinf(p_exp) and p_exp > 0:
        return rho.linf
    if not p_exp >= 1:
        raise InvalidExponent(f"p must be >= 1 or inf, got {p_exp}")
    top = rho.linf
    if top == 0:
        return 0.0
    # scale by the maximum so tiny or huge densities do not under/overflow
    w = rho.geometry.weights()
    return top * float(np.sum(w * (rho.values / top) ** p_exp)) ** (1 / p_exp)


def time_derivative(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second-order centred derivative on a possibly uneven grid (interior points only)."""
    h0 = t[1:-1] - t[:-2]
    h1 = t[2:] - t[1:-1]
    return (
        -h1 / (h0 * (h0 + h1)) * y[:-2]
        + (h1 - h0) / (h0 * h1) * y[1:-1]
        + h0 / (h1 * (h0 + h1)) * y[2:]
    )


def mass_balance_residual(series: dict, p: ModelParams) -> list[IdentityResidual]:
    """Compare d/dt mass with a int rho^eta - b int rho^alpha int rho^beta."""
    needed = ("t", "mass", "int_rho_eta", "int_rho_alpha", "int_rho_beta")
    missing = [k for k in needed if k not in series]
    if missing:
        raise NotEnoughData(f"series lacks {missing}")
    t = np.asarray(series["t"], dtype=float)
    if t.size < 3:
        raise NotEnoughData("need at least 3 samples")
    dmdt = time_derivative(t, np.asarray(series["mass"], dtype=float))
    src = p.a * np.asarray(series["int_rho_eta"]) - p.b * np.asarray(
        series["int_rho_alpha"]
    ) * np.asarray(series["int_rho_beta"])
    return [_residual(ti, l, r) for ti, l, r in zip(t[1:-1], dmdt, src[1:-1])]


def gradient_energy(rho: Field, power: float) -> float:
    """Discrete int |grad rho^power|^2 with face differences."""
    w = rho.values**power
    g = rho.geometry
    if isinstance(g, RadialMesh):
        dw = np.diff(w) / g.spacing
        return float(np.sum(g.face_areas[1:-1] * g.spacing * dw**2))
    total = 0.0
    for ax in range(g.n):
        dw = (np.roll(w, -1, ax) - w) / g.spacing
        total += float(np.sum(dw**2)) * g.cell_volume
    return total


def background_density(rho: Field, neutralize: bool) -> float:
    """Density of the neutralising background the interaction field was built with."""
    g = rho.geometry
    if isinstance(g, BoxGrid):
        return float(rho.values.mean())
    return rho.mass / g.volume if neutralize else 0.0


def lp_identity_terms(rho: Field, p: ModelParams, p_exp: float, neutralize: bool = False) -> dict:
    """Every functional of the L^p energy identity at one instant (except the time derivative)."""
    g = rho.geometry
    w = g.weights()
    v = rho.values
    n = g.n

    def integral(q):
        return float(np.sum(w * v**q))

    c1 = dissipation_c1(p_exp, p.m)
    bg = background_density(rho, neutralize)
    return {
        "int_p": integral(p_exp),
        "dissipation": 2 * c1 * gradient_energy(rho, (p.m + p_exp - 1) / 2),
        "damping": p_exp * p.b * integral(p_exp + p.alpha - 1) * integral(p.beta),
        "growth": p_exp * p.a * integral(p_exp + p.eta - 1),
        "aggregation": p.sign.factor
        * n
        * (p_exp - 1)
        * unit_ball_volume(n)
        * (integral(p_exp + 1) - bg * integral(p_exp)),
    }


def lp_identity_residual(
    snapshots: Sequence[Field],
    times: Sequence[float],
    p: ModelParams,
    p_exp: float,
    neutralize: bool = False,
) -> list[IdentityResidual]:
    """Residual of d/dt int rho^p + dissipation + damping = growth + aggregation.

    The aggregation term carries the interaction sign (it enters with a
    minus sign for the repulsive model).
    """
    if len(snapshots) != len(times):
        raise NotEnoughData("need one time per snapshot")
    if len(snapshots) < 3:
        raise NotEnoughData("need at least 3 snapshots")
    terms = [lp_identity_terms(s, p, p_exp, neutralize) for s in snapshots]
    t = np.asarray(times, dtype=float)
    dF = time_derivative(t, np.array([x["int_p"] for x in terms]))
    out = []
    for i, d in enumerate(dF, start=1):
        x = terms[i]
        lhs = d + x["dissipation"] + x["damping"]
        rhs = x["growth"] + x["aggregation"]
        out.append(_residual(t[i], lhs, rhs))
    return out


def outcome_identity_residual(outcome: RunOutcome, p_exp: float) -> list[IdentityResidual]:
    if not outcome.snapshots:
        raise NotEnoughData("run was made without store_snapshots")
    times = outcome.norm_series["t"][: len(outcome.snapshots)]
    return lp_identity_residual(outcome.snapshots, times, outcome.params, p_exp, outcome.neutralize)


def consistency(predicted: str, verdict: str) -> str:
    if predicted != "bounded":
        return "consistent-with-no-guarantee"
    if verdict == "bounded":
        return "consistent"
    if verdict == "blow_up":
        return "counterexample-candidate"
    return "inconclusive"


def classify(outcome: RunOutcome, report: HypothesisReport) -> dict:
    if outcome.params is None or outcome.params.to_dict() != report.params:
        raise InputMismatch("run outcome and hypothesis report describe different parameters")
    return {
        "verdict": outcome.verdict,
        "reason": outcome.reason,
        "predicted": report.predicted,
        "h1_holds": report.h1_holds,
        "h2_holds": report.h2_holds,
        "h1_margin": report.h1_margin,
        "h2_margin": report.h2_margin,
        "remark_condition": report.remark_condition,
        "consistency": consistency(report.predicted, outcome.verdict),
        "refinement_required": consistency(report.predicted, outcome.verdict)
        == "counterexample-candidate",
    }


@dataclass(frozen=True)
class InitialSpec:
    family: str = "gaussian"
    mass: float = 1.0
    width: float = 1.0


@dataclass
class SweepAtlas:
    axes: dict[str, list[float]]
    records: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def columns(self) -> list[str]:
        cols = []
        for r in self.records:
            for k in r:
                if k not in cols:
                    cols.append(k)
        return cols

    def to_csv(self, header_comment: str = "") -> str:
        buf = io.StringIO()
        if header_comment:
            buf.write(comment_block(header_comment))
        w = csv.DictWriter(buf, fieldnames=self.columns(), lineterminator="\n")
        w.writeheader()
        for r in self.records:
            w.writerow({k: fmt_float(v) if isinstance(v, float) else v for k, v in r.items()})
        return buf.getvalue()

    def to_json(self) -> str:
        return dumps_json({"axes": self.axes, "meta": self.meta, "records": self.records})


def _split_point(base: ModelParams, init: InitialSpec, point: dict) -> tuple[ModelParams, InitialSpec]:
    model_keys = {k: v for k, v in point.items() if k != "mass"}
    params = replace(base, **model_keys)
    if "mass" in point:
        init = replace(init, mass=point["mass"])
    return params, init


def run_point(
    params: ModelParams, init: InitialSpec, mesh: RadialMesh, cfg: SolverConfig, refine: bool = True
) -> dict:
    """Run, classify, and retry once on a refined mesh if the theory is contradicted."""
    report = check_hypothesis(params)
    rho0 = make_initial(mesh, init.family, init.mass, init.width)
    out = run(rho0, params, cfg)
    rec = classify(out, report)
    rec.update(t_final=out.t_final, max_linf=out.max_linf, refined=False, cells=mesh.cells)
    if refine and rec["refinement_required"]:
        fine = RadialMesh(mesh.n, mesh.r_max, 2 * mesh.cells)
        fine_cfg = replace(cfg, cfl_safety=cfg.cfl_safety / 2, dt_init=cfg.dt_init / 2)
        out = run(make_initial(fine, init.family, init.mass, init.width), params, fine_cfg)
        rec = classify(out, report)
        rec.update(t_final=out.t_final, max_linf=out.max_linf, refined=True, cells=fine.cells)
    rec["unresolved"] = rec["consistency"] == "counterexample-candidate"
    return rec


def _sweep_worker(args):
    idx, point, base, init, mesh, cfg, refine = args
    try:
        params, spec = _split_point(base, init, point)
        rec = run_point(params, spec, mesh, cfg, refine)
    except Exception as exc:  # a failed point never aborts the sweep
        rec = {"verdict": "inconclusive", "reason": f"error: {exc}", "consistency": "inconclusive",
               "unresolved": False}
    return idx, {"index": idx, **point, **rec}


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("CHEMOLAB_THREADS")
    n = requested or os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def sweep(
    axes: dict[str, Sequence[float]],
    base: ModelParams,
    cfg: SolverConfig,
    mesh: RadialMesh,
    init: InitialSpec = InitialSpec(),
    workers: int | None = None,
    refine: bool = True,
) -> SweepAtlas:
    """Run every grid point on the radial solver and classify it against the theory.

    Records come back in grid order regardless of the worker count.
    """
    bad = [k for k in axes if k not in SWEEP_AXES]
    if bad:
        raise ValueError(f"unsupported sweep axes {bad}; choose from {SWEEP_AXES}")
    names = list(axes)
    points = [dict(zip(names, vals)) for vals in itertools.product(*(axes[k] for k in names))]
    jobs = [(i, pt, base, init, mesh, cfg, refine) for i, pt in enumerate(points)]
    nw = min(worker_count(workers), len(jobs)) if jobs else 1
    if nw <= 1:
        results = [_sweep_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    results.sort(key=lambda x: x[0])
    atlas = SweepAtlas(
        axes={k: [float(v) for v in axes[k]] for k in names},
        records=[r for _, r in results],
        meta={
            "base": base.to_dict(),
            "solver": cfg.to_dict(),
            "mesh": {"n": mesh.n, "r_max": mesh.r_max, "cells": mesh.cells},
            "initial": asdict(init),
        },
    )
    return atlas

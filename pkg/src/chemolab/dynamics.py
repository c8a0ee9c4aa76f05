"""Time integration of rho_t = Lap(rho^m) +/- div(rho grad c) + a rho^eta - b rho^alpha int rho^beta.

Spatial operators are finite-volume and conservative: fluxes live on cell
faces and telescope, so the transport terms move mass but never create it.
Radial runs use explicit Euler; box runs treat a linear multiple of the
7-point Laplacian implicitly (IMEX Euler) and everything else explicitly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numba
import numpy as np

from chemolab.errors import ConfigError, NonFiniteState, UnsupportedGrid
from chemolab.geometry import BoxGrid, Field, RadialMesh, unit_ball_volume
from chemolab.potential import interaction_field_box, radial_face_gradient
from chemolab.theory import ModelParams, Sign

log = logging.getLogger(__name__)

SCHEMES = ("explicit_radial", "semi_implicit_box")
VERDICTS = ("bounded", "blow_up", "inconclusive")


@dataclass
class SolverConfig:
    t_end: float = 1.0
    dt_init: float = 1e-4
    dt_min: float = 1e-12
    cfl_safety: float = 0.3
    eps: float = 1e-8
    # None means 1e6 * ||rho0||_inf
    blowup_linf_threshold: float | None = None
    scheme: str = "explicit_radial"
    sample_dt: float | None = None
    p_list: tuple[float, ...] = (2.0,)
    neutralize: bool = False
    store_snapshots: bool = False
    tail_fraction: float = 0.1
    tail_rtol: float = 1e-3
    boundary_fraction: float = 0.9
    boundary_mass_tol: float = 1e-6
    pinned_steps: int = 100
    max_steps: int = 20_000_000

    def __post_init__(self):
        self.p_list = tuple(float(p) for p in self.p_list)
        self.validate()

    def validate(self) -> None:
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if not 0 < self.dt_min < self.dt_init:
            raise ConfigError("need 0 < dt_min < dt_init")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigError("cfl_safety must lie in (0, 1]")
        if self.eps < 0:
            raise ConfigError("eps must be nonnegative")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}")
        if self.blowup_linf_threshold is not None and not self.blowup_linf_threshold > 0:
            raise ConfigError("blowup_linf_threshold must be positive")
        if self.sample_dt is not None and not self.sample_dt > 0:
            raise ConfigError("sample_dt must be positive")
        if not 0 < self.tail_fraction <= 1:
            raise ConfigError("tail_fraction must lie in (0, 1]")
        if any(p < 1 for p in self.p_list):
            raise ConfigError("p_list entries must be >= 1")

    @property
    def sample_interval(self) -> float:
        return self.sample_dt if self.sample_dt is not None else self.t_end / 200

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p_list"] = list(self.p_list)
        return d


@dataclass
class RunOutcome:
    verdict: str
    t_final: float
    norm_series: dict[str, np.ndarray]
    final_field: Field
    step_count: int
    reason: str = ""
    max_linf: float = 0.0
    clipped_mass: float = 0.0
    threshold: float = 0.0
    boundary_flag: bool = False
    box_mean: float | None = None
    eps: float = 0.0
    snapshots: list[Field] = field(default_factory=list)
    params: ModelParams | None = None
    neutralize: bool = False
    # filled in by callers that evaluate the L^p identity on the snapshots
    identity_residual_series: list | None = None

    def summary(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "t_final": self.t_final,
            "step_count": self.step_count,
            "max_linf": self.max_linf,
            "final_mass": self.final_field.mass,
            "clipped_mass": self.clipped_mass,
            "blowup_linf_threshold": self.threshold,
            "boundary_flag": self.boundary_flag,
            "box_mean_density": self.box_mean,
            "eps": self.eps,
        }


class TimeStep(NamedTuple):
    dt: float
    pinned: bool
    limiter: str


def regularized_power(values: np.ndarray, m: float, eps: float) -> np.ndarray:
    if m == 1.0:
        return values.copy()
    return (values + eps) ** m - eps**m


def _check_scheme(rho: Field, scheme: str) -> None:
    radial = isinstance(rho.geometry, RadialMesh)
    if radial != (scheme == "explicit_radial"):
        raise UnsupportedGrid(f"scheme {scheme!r} does not match {type(rho.geometry).__name__}")


def interaction_gradient(rho: Field, neutralize: bool = False):
    """Face gradient array (radial) or cell-centred components (box)."""
    if isinstance(rho.geometry, RadialMesh):
        return radial_face_gradient(rho, neutralize=neutralize)
    return interaction_field_box(rho)[1]


def integral_power(rho: Field, power: float) -> float:
    return float(np.sum(rho.geometry.weights() * rho.values**power))


def reaction_term(rho: Field, p: ModelParams) -> np.ndarray:
    v = rho.values
    if p.a == 0 and p.b == 0:
        return np.zeros_like(v)
    s = integral_power(rho, p.beta)
    return p.a * v**p.eta - p.b * v**p.alpha * s


def _box_laplacian(values: np.ndarray, grid: BoxGrid) -> np.ndarray:
    out = -2 * grid.n * values
    for ax in range(grid.n):
        out = out + np.roll(values, 1, ax) + np.roll(values, -1, ax)
    return out / grid.spacing**2


def _radial_divergence(face_flux: np.ndarray, mesh: RadialMesh) -> np.ndarray:
    return (face_flux[1:] - face_flux[:-1]) / mesh.cell_volumes


def diffusion_term(rho: Field, m: float, eps: float) -> np.ndarray:
    """Discrete Laplacian of (rho + eps)^m - eps^m.

    Radial: zero-flux at r = 0 (zero area) and at r_max.
    """
    phi = regularized_power(rho.values, m, eps)
    g = rho.geometry
    if isinstance(g, BoxGrid):
        return _box_laplacian(phi, g)
    flux = np.zeros(g.cells + 1)
    flux[1:-1] = g.face_areas[1:-1] * np.diff(phi) / g.spacing
    return _radial_divergence(flux, g)


def _face_velocity_radial(grad_c: np.ndarray, sign: Sign) -> np.ndarray:
    return -sign.factor * grad_c


def advection_term(rho: Field, grad_c, sign: Sign | str) -> np.ndarray:
    """+div(rho grad c) for attraction, -div(rho grad c) for repulsion, upwinded."""
    sign = Sign(sign)
    v = rho.values
    g = rho.geometry
    if isinstance(g, RadialMesh):
        vel = _face_velocity_radial(grad_c, sign)
        up = np.where(vel[1:-1] > 0, v[:-1], v[1:])
        flux = np.zeros(g.cells + 1)
        # mass flux in the +div convention: -(velocity * upwind density) * area
        flux[1:-1] = -g.face_areas[1:-1] * vel[1:-1] * up
        return _radial_divergence(flux, g)
    out = np.zeros_like(v)
    for ax, gc in enumerate(grad_c):
        g_face = 0.5 * (gc + np.roll(gc, -1, ax))
        vel = -sign.factor * g_face
        up = np.where(vel > 0, v, np.roll(v, -1, ax))
        flux = -vel * up
        out += (flux - np.roll(flux, 1, ax)) / g.spacing
    return out


def _outflow_rate(rho: Field, grad_c, sign: Sign) -> float:
    g = rho.geometry
    if isinstance(g, RadialMesh):
        vel = _face_velocity_radial(grad_c, sign).copy()
        vel[[0, -1]] = 0.0
        a = g.face_areas
        out = (np.maximum(vel[1:], 0) * a[1:] + np.maximum(-vel[:-1], 0) * a[:-1]) / g.cell_volumes
        return float(out.max())
    rate = np.zeros(g.shape)
    for ax, gc in enumerate(grad_c):
        vel = -sign.factor * 0.5 * (gc + np.roll(gc, -1, ax))
        rate += (np.maximum(vel, 0) + np.maximum(-np.roll(vel, 1, ax), 0)) / g.spacing
    return float(rate.max())


def _choose_dt(
    p: ModelParams, cfg: SolverConfig, h: float, n: int, rho_max: float,
    d_max: float, rate: float, s_beta: float,
) -> TimeStep:
    bounds = {}
    if cfg.scheme == "explicit_radial":
        bounds["diffusion"] = h**2 / (2 * n * d_max) if d_max > 0 else math.inf
    else:
        bounds["diffusion"] = math.inf
    bounds["advection"] = 1.0 / rate if rate > 0 else math.inf
    if p.a > 0 or p.b > 0:
        rm = rho_max + cfg.eps
        r_rate = p.a * p.eta * rm ** (p.eta - 1) + p.b * (p.alpha + p.beta) * rm ** (p.alpha - 1) * s_beta
        bounds["reaction"] = 1.0 / (r_rate + 1e-30)
    limiter = min(bounds, key=bounds.get)
    dt = cfg.cfl_safety * bounds[limiter]
    if dt < cfg.dt_min:
        return TimeStep(cfg.dt_min, True, limiter)
    return TimeStep(dt, False, limiter)


def adapt_dt(rho: Field, p: ModelParams, cfg: SolverConfig, grad_c=None) -> TimeStep:
    """Stable explicit step: cfl_safety times the smallest diffusion/advection/reaction bound.

    The diffusion bound uses the largest nonlinear diffusivity m (rho + eps)^(m-1)
    over the field.  The advection bound is the reciprocal of the largest
    upwind outflow rate of any cell, which keeps the explicit transport
    update nonnegative.  Box runs treat diffusion implicitly and skip its bound.
    """
    g = rho.geometry
    v = rho.values
    rho_max = float(v.max()) if v.size else 0.0
    d_max = float(np.max(p.m * (v + cfg.eps) ** (p.m - 1))) if p.m != 1 else 1.0
    if grad_c is None:
        grad_c = interaction_gradient(rho, cfg.neutralize)
    rate = _outflow_rate(rho, grad_c, p.sign)
    s_beta = integral_power(rho, p.beta) if (p.a > 0 or p.b > 0) else 0.0
    return _choose_dt(p, cfg, g.spacing, g.n, rho_max, d_max, rate, s_beta)


@numba.njit(cache=True)
def _radial_rhs_kernel(v, areas, vols, edges, n, an, dr, m, eps, a, b, alpha, beta, eta,
                       sgn, neutralize):
    """Fused radial right-hand side; mirrors diffusion_term + advection_term + reaction_term.

    Returns (rhs, rho_max, d_max, outflow_rate, int rho^beta).
    """
    N = v.size
    rhs = np.zeros(N)
    total = 0.0
    s_beta = 0.0
    rho_max = 0.0
    d_max = 0.0
    for i in range(N):
        total += v[i] * vols[i]
        if a > 0.0 or b > 0.0:
            s_beta += vols[i] * v[i] ** beta
        if v[i] > rho_max:
            rho_max = v[i]
        d = 1.0 if m == 1.0 else m * (v[i] + eps) ** (m - 1.0)
        if d > d_max:
            d_max = d
    ball = an * edges[N] ** n
    out_rate = np.zeros(N)
    enclosed = 0.0
    for f in range(1, N):
        enclosed += v[f - 1] * vols[f - 1]
        M = enclosed
        if neutralize:
            M -= total / ball * an * edges[f] ** n
        g = M / edges[f] ** (n - 1)
        vel = -sgn * g
        if m == 1.0:
            dphi = v[f] - v[f - 1]
        else:
            dphi = ((v[f] + eps) ** m - eps ** m) - ((v[f - 1] + eps) ** m - eps ** m)
        flux = areas[f] * dphi / dr
        if vel > 0.0:
            flux -= areas[f] * vel * v[f - 1]
            out_rate[f - 1] += areas[f] * vel / vols[f - 1]
        else:
            flux -= areas[f] * vel * v[f]
            out_rate[f] += -areas[f] * vel / vols[f]
        rhs[f - 1] += flux / vols[f - 1]
        rhs[f] -= flux / vols[f]
    rate = 0.0
    for i in range(N):
        if out_rate[i] > rate:
            rate = out_rate[i]
        if a > 0.0 or b > 0.0:
            rhs[i] += a * v[i] ** eta - b * v[i] ** alpha * s_beta
    return rhs, rho_max, d_max, rate, s_beta


def radial_rates(rho: Field, p: ModelParams, cfg: SolverConfig):
    g = rho.geometry
    return _radial_rhs_kernel(
        rho.values, g.face_areas, g.cell_volumes, g.edges, g.n, unit_ball_volume(g.n),
        g.spacing, float(p.m), float(cfg.eps), float(p.a), float(p.b), float(p.alpha),
        float(p.beta), float(p.eta), p.sign.factor, cfg.neutralize,
    )


def _implicit_symbol(grid: BoxGrid) -> np.ndarray:
    """Eigenvalues of the 7-point Laplacian in rfftn layout (all <= 0)."""
    N, h = grid.points_per_axis, grid.spacing
    lam = 0.0
    for ax in range(grid.n):
        j = np.arange(N // 2 + 1) if ax == grid.n - 1 else np.arange(N)
        s = -(4 / h**2) * np.sin(np.pi * j / N) ** 2
        shape = [1] * grid.n
        shape[ax] = s.size
        lam = lam + s.reshape(shape)
    return lam


def _advance(rho: Field, p: ModelParams, cfg: SolverConfig, dt: float, grad_c=None):
    if grad_c is None:
        grad_c = interaction_gradient(rho, cfg.neutralize)
    g = rho.geometry
    v = rho.values
    if isinstance(g, RadialMesh):
        rhs = diffusion_term(rho, p.m, cfg.eps) + advection_term(rho, grad_c, p.sign)
        rhs += reaction_term(rho, p)
        new = v + dt * rhs
    else:
        kappa = float(np.max(p.m * (v + cfg.eps) ** (p.m - 1))) if p.m != 1 else 1.0
        phi = regularized_power(v, p.m, cfg.eps)
        rhs = _box_laplacian(phi - kappa * v, g) if p.m != 1 else np.zeros_like(v)
        rhs += advection_term(rho, grad_c, p.sign) + reaction_term(rho, p)
        star = v + dt * rhs
        axes = tuple(range(g.n))
        hat = np.fft.rfftn(star) / (1 - dt * kappa * _implicit_symbol(g))
        new = np.fft.irfftn(hat, s=g.shape, axes=axes)
    return _finish(new, g)


def _finish(new: np.ndarray, g) -> tuple[Field, float]:
    if not np.all(np.isfinite(new)):
        raise NonFiniteState("non-finite density after update")
    neg = new < 0
    clipped = 0.0
    if neg.any():
        clipped = float(-np.sum((new * g.weights())[neg]))
        new[neg] = 0.0
        log.debug("clipped %.3e mass", clipped)
    return Field(g, new), clipped


def step(rho: Field, p: ModelParams, cfg: SolverConfig, dt: float) -> Field:
    """One time step; negative undershoots are clipped to zero."""
    _check_scheme(rho, cfg.scheme)
    return _advance(rho, p, cfg, dt)[0]


def _sample(rho: Field, p: ModelParams, cfg: SolverConfig, t: float, dt: float) -> dict:
    w = rho.geometry.weights()
    v = rho.values
    rec = {"t": t, "mass": float(np.sum(w * v))}
    for q in cfg.p_list:
        rec[f"lp_{q:g}"] = float(np.sum(w * v**q)) ** (1 / q)
    rec["linf"] = float(v.max())
    rec["dt"] = dt
    rec["int_rho_eta"] = float(np.sum(w * v**p.eta))
    rec["int_rho_alpha"] = float(np.sum(w * v**p.alpha))
    rec["int_rho_beta"] = float(np.sum(w * v**p.beta))
    return rec


def _outer_mass_fraction(rho: Field, cfg: SolverConfig) -> float:
    g = rho.geometry
    if not isinstance(g, RadialMesh):
        return 0.0
    total = rho.mass
    if total <= 0:
        return 0.0
    outer = g.centers > cfg.boundary_fraction * g.r_max
    return float(np.sum((rho.values * g.cell_volumes)[outer]) / total)


def tail_non_increasing(linf: np.ndarray, fraction: float, rtol: float) -> bool:
    """True when ||rho||_inf does not rise over the last ``fraction`` of the samples.

    A rise is tolerated up to ``rtol`` times the tail maximum so that
    round-off level wiggles around a steady state do not count.
    """
    if linf.size < 2:
        return True
    start = min(int(math.floor((1 - fraction) * (linf.size - 1))), linf.size - 2)
    tail = linf[start:]
    top = float(tail.max())
    rises = np.diff(tail)
    return bool(np.sum(np.maximum(rises, 0)) <= rtol * max(top, 1e-300))


def run(rho0: Field, p: ModelParams, cfg: SolverConfig) -> RunOutcome:
    """Advance to t_end or until a blow-up trigger fires.

    Blow-up triggers: ||rho||_inf above the threshold, a non-finite state, or
    dt pinned at dt_min for ``pinned_steps`` consecutive steps while
    ||rho||_inf keeps rising.
    """
    _check_scheme(rho0, cfg.scheme)
    if np.any(rho0.values < 0) or not np.all(np.isfinite(rho0.values)):
        raise ConfigError("initial density must be finite and nonnegative")
    linf0 = rho0.linf
    threshold = cfg.blowup_linf_threshold
    if threshold is None:
        threshold = 1e6 * linf0 if linf0 > 0 else 1e6
    if not threshold > linf0:
        raise ConfigError("blowup_linf_threshold must exceed the initial sup norm")

    rho = rho0.copy()
    geom = rho.geometry
    radial = isinstance(geom, RadialMesh)
    t = 0.0
    interval = cfg.sample_interval
    next_sample = interval
    rows = [_sample(rho, p, cfg, 0.0, 0.0)]
    snaps = [rho.copy()] if cfg.store_snapshots else []
    boundary_watch = _outer_mass_fraction(rho, cfg) <= cfg.boundary_mass_tol
    boundary_flag = False
    steps = 0
    pinned_run = 0
    clipped_total = 0.0
    max_linf = linf0
    verdict, reason = None, ""
    first = True
    while t < cfg.t_end * (1 - 1e-14):
        if radial:
            rhs, rho_max, d_max, rate, s_beta = radial_rates(rho, p, cfg)
            ts = _choose_dt(p, cfg, geom.spacing, geom.n, rho_max, d_max, rate, s_beta)
        else:
            grad_c = interaction_gradient(rho, cfg.neutralize)
            ts = adapt_dt(rho, p, cfg, grad_c)
        dt = ts.dt
        if first:
            dt = min(dt, cfg.dt_init)
            first = False
        dt = min(dt, next_sample - t, cfg.t_end - t)
        prev_linf = rho.linf
        try:
            if radial:
                rho, clipped = _finish(rho.values + dt * rhs, geom)
            else:
                rho, clipped = _advance(rho, p, cfg, dt, grad_c)
        except NonFiniteState:
            verdict, reason = "blow_up", "non-finite state"
            t += dt
            steps += 1
            break
        t += dt
        steps += 1
        clipped_total += clipped
        linf = rho.linf
        max_linf = max(max_linf, linf)
        pinned_run = pinned_run + 1 if (ts.pinned and linf > prev_linf) else 0
        if linf > threshold:
            verdict, reason = "blow_up", "sup norm above threshold"
        elif pinned_run >= cfg.pinned_steps:
            verdict, reason = "blow_up", "time step collapsed to dt_min"
        if t >= next_sample * (1 - 1e-12) or verdict is not None or t >= cfg.t_end * (1 - 1e-14):
            rows.append(_sample(rho, p, cfg, t, dt))
            if cfg.store_snapshots:
                snaps.append(rho.copy())
            if boundary_watch and _outer_mass_fraction(rho, cfg) > cfg.boundary_mass_tol:
                boundary_flag = True
            while next_sample <= t * (1 + 1e-12):
                next_sample += interval
        if verdict is not None:
            break
        if steps >= cfg.max_steps:
            verdict, reason = "inconclusive", "step budget exhausted"
            break

    series = {k: np.array([r[k] for r in rows]) for k in rows[0]}
    if verdict is None:
        if boundary_flag:
            verdict, reason = "inconclusive", "support reached the outer boundary"
        elif not tail_non_increasing(series["linf"], cfg.tail_fraction, cfg.tail_rtol):
            verdict, reason = "inconclusive", "sup norm still rising at t_end"
        else:
            verdict, reason = "bounded", "reached t_end with a settled sup norm"
    box_mean = float(rho.values.mean()) if isinstance(rho.geometry, BoxGrid) else None
    return RunOutcome(
        verdict=verdict,
        t_final=t,
        norm_series=series,
        final_field=rho,
        step_count=steps,
        reason=reason,
        max_linf=max_linf,
        clipped_mass=clipped_total,
        threshold=threshold,
        boundary_flag=boundary_flag,
        box_mean=box_mean,
        eps=cfg.eps,
        snapshots=snaps,
        params=p,
        neutralize=cfg.neutralize,
    )

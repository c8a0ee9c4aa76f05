"""Closed-form quantities behind the boundedness criteria.

Every function here is a pure evaluation of an algebraic expression in the
model parameters.  Nothing is symbolically simplified: each threshold is
computed from its own branch list and reduced with a single ``max`` so the
numbers can be audited entry by entry.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

from chemolab.errors import (
    DimensionTooLow,
    H1Violated,
    InadmissibleExponents,
    IntervalViolation,
    InvalidParams,
    MuBoundViolation,
    OrderingViolation,
    RangeViolation,
)


class Sign(str, enum.Enum):
    ATTRACTIVE = "attractive"
    REPULSIVE = "repulsive"

    @property
    def factor(self) -> float:
        return 1.0 if self is Sign.ATTRACTIVE else -1.0


@dataclass(frozen=True)
class ModelParams:
    """One instance of the chemotaxis model.

    ``a`` and ``b`` must be positive for a genuine model instance.  Zero is
    accepted only with ``allow_degenerate=True`` so test harnesses can switch
    the source off (pure aggregation-diffusion).
    """

    n: int = 3
    m: float = 1.0
    a: float = 1.0
    b: float = 1.0
    alpha: float = 2.0
    beta: float = 2.0
    eta: float = 1.0
    sign: Sign = Sign.ATTRACTIVE
    allow_degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sign", Sign(self.sign))
        if int(self.n) != self.n:
            raise InvalidParams(f"n must be an integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.n < 3:
            raise DimensionTooLow(f"n must be >= 3, got {self.n}")
        for name in ("m", "alpha", "eta"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise InvalidParams(f"{name} must be positive, got {v}")
        if not (self.beta >= 1 and math.isfinite(self.beta)):
            raise InvalidParams(f"beta must be >= 1, got {self.beta}")
        for name in ("a", "b"):
            v = getattr(self, name)
            ok = v >= 0 if self.allow_degenerate else v > 0
            if not (ok and math.isfinite(v)):
                raise InvalidParams(f"{name} must be positive, got {v}")

    @property
    def degenerate(self) -> bool:
        return self.a == 0 or self.b == 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sign"] = self.sign.value
        return d


@dataclass(frozen=True)
class LambdaTriple:
    lambda0: float
    lambda1: float
    lambdaEta: float


@dataclass(frozen=True)
class GNExponents:
    q: float
    r: float
    l: float
    lam: float
    gamma: float


@dataclass(frozen=True)
class MoserRow:
    k: int
    p_k: float
    q1_k: float
    qEta_k: float
    q0_k: float
    r_k: float
    lambda1_k: float
    lambdaEta_k: float
    lambda0_k: float
    mu1_k: float
    muEta_k: float
    mu0_k: float


@dataclass(frozen=True)
class HypothesisReport:
    l: float
    h1_threshold: float
    h2_threshold: float
    h1_holds: bool
    h2_holds: bool
    p_bar: float
    p_bar_valid: bool
    h1_margin: float
    h2_margin: float
    sign: str
    predicted: str
    remark_condition: bool
    params: dict

    def to_dict(self) -> dict:
        return asdict(self)


def sobolev_exponent(n: int) -> float:
    if n < 3:
        raise DimensionTooLow(f"n must be >= 3, got {n}")
    return 2 * n / (n - 2)


def h1_branches(p: ModelParams) -> list[float]:
    l = sobolev_exponent(p.n)
    m, eta = p.m, p.eta
    return [
        (4 * l - 4 - m * l) / (l - 2),
        (2 * eta * l - m * l - 2 * eta) / (l - 2),
        m,
    ]


def h1_threshold(p: ModelParams) -> float:
    return max(h1_branches(p))


def h2_threshold(p: ModelParams) -> float:
    # the attraction branch (first entry) is dropped in the repulsive case
    return max(h1_branches(p)[1:])


def eta_branch_threshold(p: ModelParams) -> float:
    return h1_branches(p)[1]


def remark_condition(p: ModelParams) -> bool:
    """alpha < 1 + 2 beta / n: the eta-branch of (H1) rewritten for m=1, eta=alpha."""
    return p.alpha < 1 + 2 * p.beta / p.n


def h1_holds(p: ModelParams) -> bool:
    return p.alpha + p.beta > h1_threshold(p)


def h2_holds(p: ModelParams) -> bool:
    return p.alpha + p.beta > h2_threshold(p)


def p_bar_entries(p: ModelParams) -> list[float]:
    l = sobolev_exponent(p.n)
    m, alpha, beta, eta = p.m, p.alpha, p.beta, p.eta
    s = alpha + beta
    return [
        1.0,
        (l + 2 - l * m) / (l - 2),
        -s + (5 * l - 2 * l * m - 2) / (l - 2),
        (2 * eta + l - l * m - 2) / (l - 2),
        -s + (l + 2 * eta * l - 2 - 2 * m * l) / (l - 2),
        m - 1,
        s - 1,
        s + 1 - 2 * eta,
        1 - s + 2 * l * (eta - m) / (l - 2),
        1 - s + 2 * l * (2 - m) / (l - 2),
        (2 * eta + l - l * m - 2) / (l - 2),
    ]


def p_bar(p: ModelParams, strict: bool = True) -> float:
    """Critical test exponent: the max of the eleven entries.

    With ``strict=False`` the value is returned even when (H1) fails; callers
    are expected to carry that fact along (``HypothesisReport.p_bar_valid``).
    """
    if strict and not h1_holds(p):
        raise H1Violated(
            f"alpha+beta={p.alpha + p.beta} does not exceed {h1_threshold(p)}"
        )
    return max(p_bar_entries(p))


def check_hypothesis(p: ModelParams) -> HypothesisReport:
    t1, t2 = h1_threshold(p), h2_threshold(p)
    s = p.alpha + p.beta
    ok1, ok2 = s > t1, s > t2
    # the guarantee needs both source coefficients positive
    guaranteed = (ok1 if p.sign is Sign.ATTRACTIVE else ok2) and not p.degenerate
    return HypothesisReport(
        l=sobolev_exponent(p.n),
        h1_threshold=t1,
        h2_threshold=t2,
        h1_holds=ok1,
        h2_holds=ok2,
        p_bar=p_bar(p, strict=False),
        p_bar_valid=ok1,
        h1_margin=s - t1,
        h2_margin=s - t2,
        sign=p.sign.value,
        predicted="bounded" if guaranteed else "no guarantee",
        remark_condition=remark_condition(p),
        params=p.to_dict(),
    )


def p_prime(p_exp: float, alpha: float, beta: float) -> float:
    top = p_exp + alpha - 1
    pp = (top + beta) / 2
    if not beta < pp < top:
        raise IntervalViolation(f"p'={pp} is not inside ({beta}, {top})")
    return pp


def lambda_tildes(p_exp: float, p: ModelParams, check: bool = True) -> LambdaTriple:
    l = sobolev_exponent(p.n)
    m, alpha, beta, eta = p.m, p.alpha, p.beta, p.eta
    s = alpha + beta + p_exp
    lam0 = (p_exp * (l - 2) + l * (m - 1)) / ((l - 2) * s - 3 * l + alpha * l + 2 * m * l)
    lam1 = (p_exp * (l - 2) + (m - 1) * l - 2) / ((l - 2) * s - 5 * l + 2 + 2 * m * l)
    lam_eta = (2 - 2 * eta + p_exp * (l - 2) + l * (m - 1)) / (
        (l - 2) * s + 2 + 2 * m * l - l - 2 * eta * l
    )
    out = LambdaTriple(lam0, lam1, lam_eta)
    if check:
        for name, v in asdict(out).items():
            if not 0 < v < 1:
                raise RangeViolation(f"{name}={v} outside (0, 1) at p={p_exp}")
    return out


def gn_exponents(
    q: float, r: float, l: float, admissibility: str = "minus", check: bool = True
) -> GNExponents:
    """Exponents of the Gagliardo-Nirenberg-type bound ||w||_q^q <= eps||grad w||^2 + C||w||_r^gamma.

    ``admissibility="minus"`` requires q/r < 2/r + 1 - 2/l, which is exactly
    the condition 2 - lambda*q > 0; ``"plus"`` uses the looser + 2/l form and
    then still insists on 2 - lambda*q > 0.
    """
    if check:
        if not 1 <= r < q < l:
            raise InadmissibleExponents(f"need 1 <= r < q < l, got r={r}, q={q}, l={l}")
        sgn = -1.0 if admissibility == "minus" else 1.0
        if not q / r < 2 / r + 1 + sgn * 2 / l:
            raise InadmissibleExponents(f"q/r={q / r} violates the {admissibility} bound")
    lam = (1 / r - 1 / q) / (1 / r - 1 / l)
    if check and not 2 - lam * q > 0:
        raise InadmissibleExponents(f"2 - lambda q = {2 - lam * q} <= 0")
    gamma = 2 * (1 - lam) * q / (2 - lam * q)
    return GNExponents(q=q, r=r, l=l, lam=lam, gamma=gamma)


def interpolation_a1(p_prime: float, beta: float, top: float) -> float:
    if not (beta <= p_prime <= top and beta < top):
        raise OrderingViolation(f"need beta <= p' <= top, beta < top; got {beta}, {p_prime}, {top}")
    return (1 / p_prime - 1 / top) / (1 / beta - 1 / top)


def dissipation_c1(p_exp: float, m: float) -> float:
    return 2 * m * p_exp * (p_exp - 1) / (m + p_exp - 1) ** 2


def moser_table(
    p: ModelParams,
    k_max: int,
    r_convention: str = "proof",
    admissibility: str = "minus",
    check: bool = True,
    mu_tol: float = 1e-12,
    require_h1: bool | None = None,
) -> list[MoserRow]:
    """Exponent sequences of the L^p -> L^infinity bootstrap for k = 1..k_max.

    r_convention "proof" takes r_k = 2 p_{k-1} / (m + p_k - 1); "lemma" takes
    r_k = 2 (p_{k-1} + 1) / (m + p_k - 1).  ``mu_tol`` only absorbs rounding in
    the mu <= 2 check.  ``require_h1`` defaults to ``check``; switching it off
    tabulates parameter sets outside the lemma's scope while still checking mu.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if r_convention not in ("proof", "lemma"):
        raise ValueError(f"unknown r_convention {r_convention!r}")
    pb = p_bar(p, strict=check if require_h1 is None else require_h1)
    l = sobolev_exponent(p.n)
    m, eta = p.m, p.eta
    rows = []
    for k in range(1, k_max + 1):
        pk = 2.0**k + pb
        pk1 = 2.0 ** (k - 1) + pb
        denom = m + pk - 1
        q1 = 2 * (pk + 1) / denom
        q_eta = 2 * (pk + eta - 1) / denom
        q0 = 2 * pk / denom
        rk = (2 * pk1 if r_convention == "proof" else 2 * (pk1 + 1)) / denom
        g1, g_eta, g0 = (
            gn_exponents(q, rk, l, admissibility=admissibility, check=check)
            for q in (q1, q_eta, q0)
        )
        row = MoserRow(
            k=k, p_k=pk, q1_k=q1, qEta_k=q_eta, q0_k=q0, r_k=rk,
            lambda1_k=g1.lam, lambdaEta_k=g_eta.lam, lambda0_k=g0.lam,
            mu1_k=g1.gamma / rk, muEta_k=g_eta.gamma / rk, mu0_k=g0.gamma / rk,
        )
        if check:
            for name in ("mu1_k", "muEta_k", "mu0_k"):
                if getattr(row, name) > 2 + mu_tol:
                    raise MuBoundViolation(f"{name}={getattr(row, name)} > 2 at k={k}")
        rows.append(row)
    return rows


class RecursiveBound(NamedTuple):
    value: float
    overflow: bool


def recursive_bound(L: float, M0: float, k: int) -> RecursiveBound:
    """L^k * M0^(2^k), evaluated in log space; +inf with overflow=True past float range."""
    if not (L > 0 and M0 >= 1 and k >= 1):
        raise ValueError(f"need L > 0, M0 >= 1, k >= 1; got {L}, {M0}, {k}")
    log_val = k * math.log(L) + 2.0**k * math.log(M0)
    if log_val > math.log(1.7976931348623157e308):
        return RecursiveBound(math.inf, True)
    return RecursiveBound(L**k * M0 ** (2**k), False)


def tight_recursive_bound(L: float, M0: float, k: int) -> RecursiveBound:
    """L^(2^k - 1) * M0^(2^k): what induction on M_k <= L M_{k-1}^2 actually yields."""
    if not (L > 0 and M0 >= 1 and k >= 1):
        raise ValueError(f"need L > 0, M0 >= 1, k >= 1; got {L}, {M0}, {k}")
    log_val = (2.0**k - 1) * math.log(L) + 2.0**k * math.log(M0)
    if log_val > math.log(1.7976931348623157e308):
        return RecursiveBound(math.inf, True)
    return RecursiveBound(math.exp(log_val), False)


def satisfies_recursion(M: Sequence[float], L: float, thetas: Sequence[float]) -> bool:
    """True when M_k <= L * M_{k-1}^theta_k with theta_k in (0, 2] and all M_k >= 1."""
    if len(thetas) != len(M) - 1:
        raise ValueError("need one theta per step")
    if any(x < 1 for x in M):
        return False
    return all(
        0 < th <= 2 and M[k] <= L * M[k - 1] ** th for k, th in enumerate(thetas, start=1)
    )


def stays_below_bound(M: Sequence[float], L: float, tight: bool = False) -> bool:
    """Check M_k against the closed-form bound for every k >= 1."""
    fn = tight_recursive_bound if tight else recursive_bound
    return all(M[k] <= fn(L, M[0], k).value * (1 + 1e-12) for k in range(1, len(M)))

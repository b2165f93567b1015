"""Moments and Mellin transforms of the exponential functional.

Positive integer moments come from the recurrence E[I^n] = (n / Phi(n)) *
E[I^{n-1}], valid while n stays inside the domain where Phi is positive.
Negative integer moments use the same recurrence run downward, anchored at
E[I^{-1}] = Phi'(0+) which requires q = 0. The recurrence fixes ratios
only, so a fractional order needs one anchor per residue class: a known
value of E[I^{beta0 - 1}] with beta0 in (0, 1], supplied from a closed
form, a solved density, or samples. Sample and density Mellin routes are
collected into MellinProfile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DivergentMoment, OutsideDomain, UnsupportedModel
from .models import LevyModel, SubordinatorModel


def moment_chain(model: LevyModel, n: int) -> np.ndarray:
    """E[I^k] for k = 1..n via the forward recurrence."""
    if n < 1:
        raise OutsideDomain("chain needs n >= 1")
    model.require_admissible()
    out = np.empty(n)
    acc = 1.0
    for k in range(1, n + 1):
        if not model.in_moment_domain(float(k)):
            raise DivergentMoment(f"E[I^{k}] is infinite (Phi({k}) <= 0 or outside strip)")
        acc *= k / float(model.laplace_exponent(float(k)))
        out[k - 1] = acc
    return out


def moment_I(model: LevyModel, beta: float, anchor: tuple[float, float] | None = None) -> float:
    """E[I^beta] by the recurrence E[I^b] = (b / Phi(b)) E[I^{b-1}].

    Integer beta needs no anchor (the chain starts at E[I^0] = 1 going up,
    or at E[I^-1] = -E[xi_1] going down, which requires q = 0). Fractional
    beta needs ``anchor = (beta0, value)`` with beta0 in (0, 1] and value a
    known E[I^{beta0 - 1}]; the chain then climbs the residue class.
    """
    if anchor is not None:
        beta0, val = float(anchor[0]), float(anchor[1])
        if not (0.0 < beta0 <= 1.0):
            raise OutsideDomain("anchor order must lie in (0, 1]")
        steps = round(beta - beta0)
        if steps < 0 or abs(beta - beta0 - steps) > 1e-9:
            raise OutsideDomain(
                f"beta={beta:g} is not in the residue class of the anchor order {beta0:g}"
            )
        model.require_admissible()
        for j in range(steps + 1):
            b = beta0 + j
            if not model.in_moment_domain(b):
                raise OutsideDomain(f"E[I^{b:g}] leaves the positivity domain of the exponent")
            val *= b / float(model.laplace_exponent(b))
        return val
    n = round(beta)
    if abs(beta - n) > 1e-9:
        raise OutsideDomain(f"fractional order {beta:g} needs an anchor")
    if n == 0:
        return 1.0
    if n >= 1:
        return float(moment_chain(model, n)[-1])
    model.require_admissible()
    if model.q != 0.0:
        raise UnsupportedModel("negative moments via the recurrence need q = 0")
    # E[I^-1] = Phi'(0+) = -E[xi_1], then E[I^{-(k+1)}] = Phi(-k)/(-k) E[I^-k]
    acc = -model.mean
    lo, _ = model.mgf_strip
    for k in range(1, -n):
        if not (-k > lo):
            raise DivergentMoment(f"E[I^{-k - 1}] needs -{k} inside the finiteness strip")
        acc *= float(model.laplace_exponent(float(-k))) / float(-k)
    return acc


def moment_R(sub: SubordinatorModel, s: float, anchor: tuple[float, float] | None = None) -> float:
    """E[R^s] for the residual factor with E[R^n] = prod_{k<=n} phi(k).

    Integer s >= 0 uses the product directly; other real s use the
    Gamma/Beta representation of the law of R. An explicit ``anchor =
    (s0, value)`` with value = E[R^{s0 - 1}] instead climbs the recurrence
    E[R^s] = phi(s) E[R^{s-1}] from the given point.
    """
    if anchor is not None:
        s0, val = float(anchor[0]), float(anchor[1])
        steps = round(s - s0)
        if steps < 0 or abs(s - s0 - steps) > 1e-9:
            raise OutsideDomain(
                f"s={s:g} is not in the residue class of the anchor order {s0:g}"
            )
        for j in range(steps + 1):
            val *= float(sub.phi(s0 + j))
        return val
    if s == 0:
        return 1.0
    if float(s).is_integer() and s > 0:
        ks = np.arange(1, int(s) + 1, dtype=float)
        return float(np.prod(np.atleast_1d(sub.phi(ks))))
    from .montecarlo import residual_law

    law = residual_law(sub)
    kind = law[0]
    if kind == "const":
        return float(law[1] ** s)
    if kind == "gamma":
        scale, shape = law[1], law[2]
        if shape + s <= 0:
            raise DivergentMoment(f"E[R^{s}] diverges (gamma shape {shape:g})")
        return float(scale**s * math.exp(gammaln(shape + s) - gammaln(shape)))
    if kind == "beta":
        scale, a, b = law[1], law[2], law[3]
        if a + s <= 0:
            raise DivergentMoment(f"E[R^{s}] diverges (beta shape {a:g})")
        lg = gammaln(a + s) - gammaln(a) + gammaln(a + b) - gammaln(a + b + s)
        return float(scale**s * math.exp(lg))
    _, scale, shape, a, b = law
    if shape + s <= 0 or a + s <= 0:
        raise DivergentMoment(f"E[R^{s}] diverges (shapes {shape:g}, {a:g})")
    lg = (
        gammaln(shape + s)
        - gammaln(shape)
        + gammaln(a + s)
        - gammaln(a)
        + gammaln(a + b)
        - gammaln(a + b + s)
    )
    return float(scale**s * math.exp(lg))


def moment_I_neg_sub(sub: SubordinatorModel, s: float) -> float:
    """E[I^s] for I = integral e^{-sigma}: integers via the recurrence,
    real s in closed form for drift-only subordinators."""
    if s == 0:
        return 1.0
    if float(s).is_integer() and s > 0:
        ks = np.arange(1, int(s) + 1, dtype=float)
        phis = np.atleast_1d(sub.phi(ks))
        return float(math.factorial(int(s)) / np.prod(phis))
    if sub.jumps is not None:
        raise UnsupportedModel("fractional moments in closed form need a drift-only subordinator")
    if sub.drift == 0.0:
        # I ~ Exp(kill)
        if s <= -1:
            raise DivergentMoment(f"E[I^{s}] diverges for exponential I")
        return float(sub.kill**-s * math.exp(gammaln(1.0 + s)))
    b, kap = sub.drift, sub.kill
    if s <= -1:
        raise DivergentMoment(f"E[I^{s}] diverges (I is a scaled Beta(1, kill/drift))")
    # I = Beta(1, kill/drift) / drift
    lg = gammaln(1.0 + s) + gammaln(1.0 + kap / b) - gammaln(1.0 + s + kap / b)
    return float(b**-s * math.exp(lg))


def check_gamma_identity(sub: SubordinatorModel, s_list) -> float:
    """Max relative error of Gamma(1+s) = E[R^s] E[I_{-sigma}^s] over s_list.

    The two factors multiply to a unit exponential, so their Mellin
    transforms must reassemble the Gamma function. Closed forms cover
    drift-only subordinators at every s > -1 and all subordinators at
    integer s; fractional s on a jumpy subordinator falls back to the
    solved density of the negated model.
    """
    if np.ndim(s_list) == 0:
        s_list = [float(s_list)]
    est = None
    worst = 0.0
    for s in s_list:
        if not s > -1.0:
            raise OutsideDomain("Gamma(1+s) needs s > -1")
        lhs = math.exp(gammaln(1.0 + float(s)))
        try:
            down = moment_I_neg_sub(sub, float(s))
        except UnsupportedModel:
            if est is None:
                est = _neg_sub_density(sub)
            down = float(est.mellin(float(s)))
        rhs = moment_R(sub, float(s)) * down
        worst = max(worst, abs(rhs - lhs) / abs(lhs))
    return worst


def _neg_sub_density(sub: SubordinatorModel):
    from .density import solve_renewal
    from .models import LevyModel

    model = LevyModel.neg_subordinator(sub)
    return solve_renewal(model, 1e-4, 10.0)


@dataclass(frozen=True)
class MellinProfile:
    """E[I^s] over an s grid with provenance and standard errors."""

    points: tuple[tuple[float, float, float], ...]
    source: str

    def __post_init__(self) -> None:
        for s, value, stderr in self.points:
            if not value > 0:
                raise DivergentMoment(f"Mellin value at s={s:g} must be positive")
            if self.source != "MonteCarlo" and stderr != 0.0:
                raise OutsideDomain("deterministic sources carry zero standard error")


def mellin_I(source, s_list) -> MellinProfile:
    """Mellin profile from a solved density (exact quadrature, zero stderr)
    or a sample set (trimmed means with standard errors).

    For samples, a positive order at or beyond the empirical tail index
    raises DivergentMoment rather than reporting a pseudo-finite value.
    """
    if np.ndim(s_list) == 0:
        s_list = [float(s_list)]
    if hasattr(source, "mellin"):
        pts = tuple((float(s), float(source.mellin(float(s))), 0.0) for s in s_list)
        return MellinProfile(points=pts, source="ClosedForm")
    if not hasattr(source, "values"):
        raise OutsideDomain("source must be a density estimate or a sample set")
    values = np.asarray(source.values, dtype=float)
    pts = []
    idx = None
    for s in s_list:
        s = float(s)
        if s > 0:
            if idx is None:
                from .asymptotics import hill_index

                k = max(2, int(math.ceil(values.size * 0.01)))
                idx = hill_index(values, 0.01) * (1.0 - 2.0 / math.sqrt(k))
            if s >= idx:
                raise DivergentMoment(
                    f"E[I^{s:g}] looks infinite: empirical tail index around {idx:.3g}"
                )
        est = mellin_sample(values, s)
        pts.append((s, est.trimmed, est.se))
    return MellinProfile(points=tuple(pts), source="MonteCarlo")


@dataclass
class MellinEstimate:
    """Sample estimate of E[I^s] with its standard error and a trimmed variant."""

    s: float
    value: float
    se: float
    trimmed: float
    trim_fraction: float
    n: int


def mellin_sample(values: np.ndarray, s: float, trim: float = 1e-4) -> MellinEstimate:
    """E[I^s] from draws; the trimmed variant drops the top ``trim`` fraction
    of the transformed values, which tames heavy tails at the cost of bias."""
    v = np.asarray(values, dtype=float) ** s
    n = v.size
    est = float(np.mean(v))
    se = float(np.std(v, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    k = int(math.floor(trim * n))
    if k > 0:
        trimmed = float(np.mean(np.sort(v)[: n - k]))
    else:
        trimmed = est
    return MellinEstimate(s=s, value=est, se=se, trimmed=trimmed, trim_fraction=trim, n=n)


def mellin_density(estimate, s: float) -> float:
    """E[I^s] by exact integration of a piecewise density estimate."""
    return float(estimate.mellin(s))


def moment_domain_sup(model: LevyModel) -> float:
    """Supremum of the beta-domain where E[I^beta] is finite.

    Equals the first positive zero of Phi when one exists, else the upper
    edge of the finiteness strip.
    """
    from scipy.optimize import brentq

    model.require_admissible()
    _, hi = model.mgf_strip

    def f(x: float) -> float:
        return float(model.laplace_exponent(x))

    b = 1.0 if not math.isfinite(hi) else 0.5 * hi
    if not model.in_moment_domain(b):
        # Phi is positive just right of 0 for admissible models
        return float(brentq(f, 1e-12, b, xtol=1e-14, rtol=8.9e-16))
    while True:
        if math.isfinite(hi):
            nxt = b + 0.5 * (hi - b)
            if hi - nxt < 1e-13 * max(1.0, hi):
                return hi
        else:
            nxt = 2.0 * b
            if nxt > 1e8:
                return math.inf
        if not model.in_moment_domain(nxt):
            return float(brentq(f, b, nxt, xtol=1e-14, rtol=8.9e-16))
        b = nxt

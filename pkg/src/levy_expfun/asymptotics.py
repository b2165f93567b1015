"""Tail behavior of the exponential functional at infinity and at zero.

The right tail is governed by the positive root theta of the Laplace
exponent when one exists: t^theta P(I > t) converges to
E[I^{theta-1}] / E[xi_1 e^{theta xi_1}]. This module locates the root,
computes the constant (with an independent ladder-factor route used as a
cross-check), and builds predicted-versus-empirical tables at high
quantiles. An exactly exponential upward jump tail always puts such a root
strictly below the jump rate, so the convolution-equivalent displays
describe a regime the catalog cannot reach; those operations gate on the
root and point back to the Cramer route unless explicitly asked to
evaluate the display anyway.

At zero, P(I <= t) ~ q t for killed models. For q = 0 with exponential
negative jumps of rate eta the functional inherits the jump index:
P(I <= t) ~ const * t^{1+eta}. A pure Gaussian flank decays faster than
any power and is gated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DivergentMoment,
    HypothesisFailure,
    InfiniteTiltedMean,
    NoRoot,
    OutsideDomain,
    RootFindingFailure,
    UnsupportedModel,
)
from .models import LevyModel
from .moments import mellin_sample, moment_domain_sup, moment_I, moment_I_neg_sub, moment_R
from .wienerhopf import LadderFactors, factorize


@dataclass(frozen=True)
class TailReport:
    """Asymptotic regime, its exponent and constant, and optional evidence.

    ``kind`` is one of Cramer, Subexponential, ConvolutionEquivalent,
    LeftTailKilled, LeftTailUnkilled. ``comparison``, when present, holds
    parallel arrays (t, predicted, empirical, ratio) at high or low
    empirical quantiles.
    """

    kind: str
    exponent: float
    constant: float
    validity: str
    comparison: dict | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.exponent < 0:
            raise OutsideDomain("tail exponent must be nonnegative")
        if not (self.constant > 0) or not math.isfinite(self.constant):
            raise DivergentMoment("tail constant must be positive and finite")


def tilted_mean(model: LevyModel, beta: float) -> float:
    """E[xi_1 e^{beta xi_1}; 1 < lifetime], via -Phi'(beta) e^{-Phi(beta)}."""
    lo, hi = model.mgf_strip
    if not (lo < beta < hi):
        raise InfiniteTiltedMean(f"beta={beta:g} is outside the open finiteness strip")
    phi = float(model.laplace_exponent(beta))
    dphi = float(model.laplace_exponent_deriv(beta))
    return -dphi * math.exp(-phi)


def cramer_root(model: LevyModel) -> float:
    """Positive root theta of the Laplace exponent, to residual 1e-12.

    The root is the tilt that exactly compensates the killing:
    E[e^{theta xi_1}; 1 < lifetime] = 1. Raises NoRoot when the exponent
    stays positive across the finiteness strip (non-increasing catalog
    models), InfiniteTiltedMean if the root collides with the positive
    jump rate.
    """
    model.require_admissible()
    sup = moment_domain_sup(model)
    if not math.isfinite(sup):
        raise NoRoot("the exponent stays positive on the whole finiteness strip")
    if abs(float(model.laplace_exponent(sup))) > 1e-6 * max(1.0, model.q):
        raise NoRoot("the exponent is still positive at the strip edge")
    theta = float(sup)
    for _ in range(60):
        f = float(model.laplace_exponent(theta))
        df = float(model.laplace_exponent_deriv(theta))
        if df == 0.0:
            break
        step = f / df
        theta -= step
        if abs(step) < 1e-15 * max(1.0, abs(theta)):
            break
    if abs(float(model.laplace_exponent(theta))) > 1e-12 * max(1.0, model.q):
        raise RootFindingFailure("tilt root residual above tolerance")
    if not (float(model.laplace_exponent_deriv(theta)) < 0.0):
        raise RootFindingFailure("degenerate tilt root: no transversal zero crossing")
    if model.pos_jumps is not None:
        eta = model.pos_jumps.rate
        if eta - theta < 1e-9 * eta:
            raise InfiniteTiltedMean("tilt root at the jump-rate edge")
    return theta


def _resolve_moment(model: LevyModel, s: float, source) -> float:
    """E[I^s] from a number, a density estimate, a sample set, or the recurrence."""
    if source is None:
        if abs(s) < 1e-12:
            return 1.0
        r = round(s)
        if abs(s - r) < 1e-9 and r != 0:
            return moment_I(model, int(r))
        raise OutsideDomain(
            f"fractional moment order {s:g} needs an anchor: pass a value, a density estimate, or samples"
        )
    if isinstance(source, (int, float, np.floating)):
        return float(source)
    if hasattr(source, "mellin"):
        return float(source.mellin(s))
    if hasattr(source, "values"):
        return float(mellin_sample(np.asarray(source.values, dtype=float), s).trimmed)
    raise TypeError("moment_source must be a number, a density estimate, or a sample set")


def _sample_values(samples) -> np.ndarray:
    return np.asarray(getattr(samples, "values", samples), dtype=float)


def _upper_comparison(values: np.ndarray, exponent: float, constant: float, quantiles) -> dict:
    vals = np.sort(np.asarray(values, dtype=float))
    n = vals.size
    t = np.quantile(vals, np.asarray(quantiles, dtype=float))
    emp = 1.0 - np.searchsorted(vals, t, side="right") / n
    pred = constant * t**-exponent
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(pred > 0, emp / pred, np.nan)
    return {"t": t, "predicted": pred, "empirical": emp, "ratio": ratio}


def cramer_constant(
    model: LevyModel,
    theta: float | None = None,
    moment_source=None,
    samples=None,
    quantiles=(0.95, 0.99, 0.999),
) -> TailReport:
    """Limit of t^theta P(I > t): E[I^{theta-1}] divided by the tilted mean.

    The denominator is recomputed through the ladder factors
    (kappa'(-theta) * kappahat(theta)) and the relative gap is recorded in
    meta["ladder_route_gap"]; the two routes are the same rational function
    differentiated two ways, so the gap is a pure floating-point check.
    meta["rate_constant"] holds the reciprocal normalization constant
    (tilted mean over moment) used by renewal-rate statements.
    """
    if theta is None:
        theta = cramer_root(model)
    mom = _resolve_moment(model, theta - 1.0, moment_source)
    denom = tilted_mean(model, theta)
    if not (denom > 0):
        raise RootFindingFailure("tilted mean must be positive at the root")
    factors = factorize(model)
    alt = factors.ascending.deriv(-theta) * float(factors.descending(theta))
    gap = abs(alt - denom) / denom
    constant = mom / denom
    comparison = None
    if samples is not None:
        comparison = _upper_comparison(_sample_values(samples), theta, constant, quantiles)
    return TailReport(
        kind="Cramer",
        exponent=theta,
        constant=constant,
        validity=(
            f"tilt root residual {abs(float(model.laplace_exponent(theta))):.2e}; "
            f"tilted mean {denom:.6g} > 0; ladder route gap {gap:.2e}"
        ),
        comparison=comparison,
        meta={
            "moment": mom,
            "tilted_mean": denom,
            "ladder_route_gap": gap,
            "rate_constant": denom / mom,
        },
    )


def second_order_coefficient(
    model: LevyModel, factors: LadderFactors | None = None, moment_source=None
) -> dict:
    """Coefficient of the 1/t correction to the power tail, no positive jumps.

    For a model with no upward jumps the ascending ladder is pure drift
    killed at rate theta, and the error of the leading term admits the
    closed coefficient theta^2 C / phi_hat(theta+1), with phi_hat the
    descending exponent carrying the kill_up normalization:

        P(I > t) = C t^{-theta} - c2 t^{-theta-1} + o(t^{-theta-1}).
    """
    if model.pos_jumps is not None:
        raise UnsupportedModel("second-order coefficient needs a spectrally negative model")
    if factors is None:
        factors = factorize(model)
    theta = cramer_root(model)
    report = cramer_constant(model, theta, moment_source=moment_source)
    phi_hat = factors.kill_up * float(factors.descending(theta + 1.0))
    c2 = theta**2 * report.constant / phi_hat
    return {
        "theta": theta,
        "constant": report.constant,
        "correction": c2,
        "phi_hat_at_theta_plus_1": phi_hat,
    }


def convolution_equiv_tail(
    model: LevyModel,
    alpha: float,
    moment_source=None,
    samples=None,
    gate: bool = True,
    quantiles=(0.95, 0.99, 0.999),
) -> TailReport:
    """Tail transfer from an upward jump tail of exponential index alpha.

    The displays require the jump tail to be convolution equivalent at
    index alpha and the model to carry no tilt root below alpha. An
    exactly exponential tail sits on the boundary of that class (the
    two-sided exponential moment at the rate diverges), and the catalog
    always produces a root below the rate, so with gate=True this raises
    HypothesisFailure describing which hypothesis failed. gate=False
    evaluates the displayed prediction anyway, labeled accordingly, for
    trend monitoring against samples.
    """
    model.require_admissible()
    if model.pos_jumps is None:
        raise HypothesisFailure("no positive jump tail to transfer")
    root = None
    try:
        root = cramer_root(model)
    except NoRoot:
        root = None
    if gate:
        if root is not None and root < alpha:
            raise HypothesisFailure(
                f"a tilt root theta={root:.6g} sits below alpha={alpha:g}: the power "
                "tail is t^-theta and cramer_constant is the authority here"
            )
        raise HypothesisFailure(
            "an exactly exponential jump tail is on the convolution-equivalence "
            "boundary (the exponential moment at its own rate diverges); pass "
            "gate=False to evaluate the display for trend monitoring"
        )
    lam, eta = model.pos_jumps.intensity, model.pos_jumps.rate
    note = "hypotheses not satisfied for the catalog; display evaluated for trend monitoring"
    if alpha == 0.0:
        # subexponential displays: integrated tail over the mean for an
        # infinite lifetime, the bare jump tail for a finite one
        if model.q > 0:
            constant = lam / eta
            validity = f"{note}; P(I>t) ~ jump_tail(log t), q > 0 branch"
        else:
            mu = -model.mean
            if not (mu > 0):
                raise HypothesisFailure("needs a finite negative mean")
            constant = lam / (mu * eta**2)
            validity = f"{note}; P(I>t) ~ integrated jump tail / mean, q = 0 branch"
        kind = "Subexponential"
        exponent = eta
    else:
        phi_a = float(model.laplace_exponent(alpha))
        if not (phi_a > 0):
            raise OutsideDomain(
                f"the exponent is nonpositive at alpha={alpha:g}; E[I^alpha] diverges"
            )
        mom = _resolve_moment(model, alpha, moment_source)
        constant = mom * lam / (eta * phi_a)
        kind = "ConvolutionEquivalent"
        exponent = eta
        validity = f"{note}; constant = E[I^alpha] jump_tail / (-log-moment)"
    comparison = None
    if samples is not None:
        comparison = _upper_comparison(_sample_values(samples), exponent, constant, quantiles)
    return TailReport(
        kind=kind,
        exponent=exponent,
        constant=constant,
        validity=validity,
        comparison=comparison,
        meta={"root": root, "alpha": alpha},
    )


def left_tail(
    model: LevyModel,
    factors: LadderFactors | None = None,
    moment_source=None,
    samples=None,
    quantiles=(0.001, 0.005, 0.01, 0.05),
) -> TailReport:
    """Behavior of P(I <= t) as t -> 0.

    Finite lifetime: P(I <= t) ~ q t (the functional is small exactly when
    the lifetime is). q = 0 with exponential negative jumps of rate eta:
    P(I <= t) ~ (E[I^-eta]/(1+eta)) t * jump_tail(log(1/t)), a t^{1+eta}
    power law. The no-root condition on the negative side holds
    automatically for q = 0: the exponent lies below its tangent at zero,
    so it is strictly negative on the left half of the strip.
    """
    model.require_admissible()
    if (
        model.pos_jumps is not None
        and model.neg_jumps is None
        and model.gaussian == 0.0
    ):
        raise UnsupportedModel("paths with no downward motion are outside this estimate")
    if model.q > 0:
        constant = model.q
        comparison = None
        if samples is not None:
            comparison = _lower_comparison(_sample_values(samples), 1.0, constant, quantiles)
        return TailReport(
            kind="LeftTailKilled",
            exponent=1.0,
            constant=constant,
            validity="finite lifetime: P(I <= t) ~ q t",
            comparison=comparison,
            meta={},
        )
    if model.neg_jumps is None:
        raise HypothesisFailure(
            "Gaussian left flank: P(I <= t) vanishes faster than any power, "
            "no exponential-index left tail to report"
        )
    lam, eta = model.neg_jumps.intensity, model.neg_jumps.rate
    mom = _resolve_moment(model, -eta, moment_source)
    constant = mom / (1.0 + eta)
    # the full power law P(I <= t) ~ prefactor * t^{1+eta}
    prefactor = constant * lam / eta
    comparison = None
    if samples is not None:
        comparison = _lower_comparison(_sample_values(samples), 1.0 + eta, prefactor, quantiles)
    return TailReport(
        kind="LeftTailUnkilled",
        exponent=eta,
        constant=constant,
        validity=(
            "infinite lifetime with exponential negative jumps: "
            "P(I <= t) ~ constant * t * jump_tail(log(1/t))"
        ),
        comparison=comparison,
        meta={"moment": mom, "power_prefactor": prefactor, "power": 1.0 + eta},
    )


def _lower_comparison(values: np.ndarray, power: float, prefactor: float, quantiles) -> dict:
    vals = np.sort(np.asarray(values, dtype=float))
    n = vals.size
    t = np.quantile(vals, np.asarray(quantiles, dtype=float))
    emp = np.searchsorted(vals, t, side="right") / n
    pred = prefactor * t**power
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(pred > 0, emp / pred, np.nan)
    return {"t": t, "predicted": pred, "empirical": emp, "ratio": ratio}


@dataclass(frozen=True)
class TransferConstants:
    """Constants linking the law of I to its ladder building blocks.

    ``at_infinity`` multiplies the supremum tail: P(I > t) ~ at_infinity *
    P(e^sup > t) when either side is regularly varying of index -alpha.
    ``at_zero`` multiplies the descending-functional law at zero:
    P(I <= t) ~ at_zero * P(I_down <= t). Degenerate flags mark factor
    laws that are point masses, where the corresponding empirical
    comparison is vacuous and should be skipped.
    """

    alpha: float
    at_infinity: float
    at_zero: float
    degenerate_at_infinity: bool
    degenerate_at_zero: bool
    meta: dict = field(default_factory=dict)


def rv_transfer_constant(
    model: LevyModel,
    alpha: float,
    factors: LadderFactors | None = None,
    n: int = 200_000,
    seed: int = 11,
) -> TransferConstants:
    """Regular-variation transfer constants from the ladder factorization.

    at_infinity = E[I_down^alpha] E[R_up^-alpha] (the two factors are
    independent), at_zero = kill_up * E[R_up^{alpha-1}]. Moments come from
    the closed Gamma/Beta residual laws where available, falling back to
    sampling for fractional orders of jumpy ladder components.
    """
    if factors is None:
        factors = factorize(model)
    h_up = factors.ascending.as_subordinator()
    h_down = factors.descending.as_subordinator()
    routes = {"down_route": "closed", "residual_route": "closed"}
    try:
        down_mom = moment_I_neg_sub(h_down, alpha)
    except UnsupportedModel:
        from .montecarlo import sample_I_neg_subordinator

        draws = sample_I_neg_subordinator(h_down, n, seed)
        down_mom = float(mellin_sample(draws.values, alpha).trimmed)
        routes["down_route"] = "sampled"
    at_infinity = down_mom * moment_R(h_up, -alpha)
    at_zero = factors.kill_up * moment_R(h_up, alpha - 1.0)
    return TransferConstants(
        alpha=alpha,
        at_infinity=at_infinity,
        at_zero=at_zero,
        degenerate_at_infinity=h_up.drift == 0.0 and h_up.jumps is None,
        degenerate_at_zero=h_down.kill == 0.0 and h_down.jumps is None,
        meta={"down_moment": down_mom, **routes},
    )


def hill_index(values: np.ndarray, top_fraction: float = 0.01) -> float:
    """Hill estimator of the tail index from the top order statistics."""
    vals = np.sort(np.asarray(values, dtype=float))
    n = vals.size
    k = max(2, int(math.ceil(n * top_fraction)))
    if k >= n:
        raise OutsideDomain("top fraction leaves no tail sample")
    top = vals[n - k :]
    anchor = vals[n - k - 1]
    if anchor <= 0:
        raise OutsideDomain("Hill estimator needs a positive anchor quantile")
    return float(1.0 / np.mean(np.log(top / anchor)))


def excess_distribution(values: np.ndarray, theta: float, t: float, x_grid=None) -> dict:
    """Empirical excess tail P(I - t > x t)/P(I > t) against (1+x)^-theta."""
    vals = np.asarray(values, dtype=float)
    base = float(np.mean(vals > t))
    if base <= 0:
        raise OutsideDomain("no samples beyond the threshold")
    if x_grid is None:
        x_grid = np.array([0.25, 0.5, 1.0, 2.0, 4.0])
    x_grid = np.asarray(x_grid, dtype=float)
    emp = np.array([float(np.mean(vals > t * (1.0 + x))) for x in x_grid]) / base
    pred = (1.0 + x_grid) ** -theta
    return {"x": x_grid, "empirical": emp, "predicted": pred}

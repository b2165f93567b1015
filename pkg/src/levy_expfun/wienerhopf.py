"""Ladder-process factorization of catalog models.

Every catalog model has a rational Laplace exponent, so the space-factorization

    Phi(beta) = kappa(q, -beta) * kappahat(q, beta)

holds with both factors rational: kappa collects the strictly positive zeros
and poles of Phi, kappahat the nonpositive ones. The ascending factor is kept
monic (numerator and denominator monic in lam), the descending factor carries
the residual scale; with this normalization q = kappa(q,0) * kappahat(q,0)
exactly. Ladder potentials V(dy) with Laplace transform 1/kappa come out as an
atom at 0 plus a mixture of exponential densities, and the ladder processes
themselves are again catalog subordinators (at most one jump component since
each side of Phi has at most one pole).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import RootFindingFailure, UnsupportedModel
from .models import ExponentialJumps, LevyModel, SubordinatorModel

_NEWTON_TOL = 1e-12
_NEWTON_MAXIT = 200


@dataclass(frozen=True)
class PotentialMeasure:
    """Measure on [0, inf): atom at 0 plus density sum_i w_i e^{-r_i y}.

    A rate of 0 encodes a flat (Lebesgue) component, which occurs exactly for
    the unkilled descending ladder of a drifting model.
    """

    atom: float
    weights: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.atom < -1e-12 or any(w < -1e-12 for w in self.weights):
            raise RootFindingFailure("potential measure has negative components")
        if len(self.weights) != len(self.rates):
            raise ValueError("weights and rates must align")

    def laplace(self, lam):
        """integral e^{-lam y} V(dy); valid for lam > -min(rates)."""
        lam = np.asarray(lam, dtype=float)
        out = np.full_like(lam, self.atom)
        for w, r in zip(self.weights, self.rates):
            out = out + w / (lam + r)
        return out if out.ndim else float(out)

    def density(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        for w, r in zip(self.weights, self.rates):
            out = out + w * np.exp(-r * y)
        return out if out.ndim else float(out)

    @property
    def mass(self) -> float:
        if any(r == 0.0 and w > 0 for w, r in zip(self.weights, self.rates)):
            return math.inf
        return self.atom + sum(w / r for w, r in zip(self.weights, self.rates))

    def scaled(self, factor: float) -> "PotentialMeasure":
        return PotentialMeasure(
            atom=self.atom * factor,
            weights=tuple(w * factor for w in self.weights),
            rates=self.rates,
        )


@dataclass(frozen=True)
class RationalFactor:
    """kappa(lam) = scale * prod_j (lam + roots[j]) / prod_k (lam + poles[k]).

    ``roots`` holds the negated zeros (all >= 0), ``poles`` the negated poles
    (all > 0). Either list may be empty. As a Bernstein function this is the
    Laplace exponent of a killed subordinator with at most one exponential
    jump component.
    """

    scale: float
    roots: tuple[float, ...]
    poles: tuple[float, ...]

    def __call__(self, lam):
        lam = np.asarray(lam)
        out = np.full(lam.shape, self.scale, dtype=lam.dtype if lam.dtype.kind == "c" else float)
        for b in self.roots:
            out = out * (lam + b)
        for p in self.poles:
            out = out / (lam + p)
        return out if out.ndim else out[()]

    def deriv(self, lam: float) -> float:
        """kappa'(lam) via the exact rational derivative."""
        num = npoly.polyfromroots([-b for b in self.roots]) * self.scale
        den = npoly.polyfromroots([-p for p in self.poles])
        dnum = npoly.polyder(num)
        dden = npoly.polyder(den) if len(den) > 1 else np.zeros(1)
        n = npoly.polyval(lam, num)
        d = npoly.polyval(lam, den)
        dn = npoly.polyval(lam, dnum) if len(num) > 1 else 0.0
        dd = npoly.polyval(lam, dden)
        return float((dn * d - n * dd) / d**2)

    @property
    def kill(self) -> float:
        """kappa(0): killing rate of the ladder subordinator."""
        val = self.scale
        for b in self.roots:
            val *= b
        for p in self.poles:
            val /= p
        return val

    @property
    def drift(self) -> float:
        """lim kappa(lam)/lam: drift of the ladder subordinator."""
        if len(self.roots) == len(self.poles) + 1:
            return self.scale
        return 0.0

    def levy_tail_components(self) -> tuple[tuple[float, float], ...]:
        """(weight, rate) pairs of the ladder Levy measure tail.

        From the residue of kappa at each pole: the jump part of the exponent
        is sum_a m_a lam/(nu_a + lam), so the Levy tail is sum_a m_a e^{-nu_a x}.
        """
        comps = []
        for p in self.poles:
            res = self.scale
            for b in self.roots:
                res *= (b - p)
            for pk in self.poles:
                if pk != p:
                    res /= (pk - p)
            m = -res / p
            if m < -1e-10:
                raise RootFindingFailure("ladder Levy component came out negative")
            comps.append((max(m, 0.0), p))
        return tuple(comps)

    def levy_tail(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for m, nu in self.levy_tail_components():
            out = out + m * np.exp(-nu * x)
        return out if out.ndim else float(out)

    def as_subordinator(self) -> SubordinatorModel:
        """The ladder process as a catalog subordinator."""
        comps = self.levy_tail_components()
        if len(comps) > 1:
            raise UnsupportedModel("ladder exponent has more than one jump component")
        jumps = None
        if comps:
            m, nu = comps[0]
            if m > 0:
                jumps = ExponentialJumps(intensity=m, rate=nu)
        return SubordinatorModel(kill=self.kill, drift=self.drift, jumps=jumps)

    def mean_ladder_height(self) -> float:
        """E[H_1] of the unkilled ladder motion: drift + integral of the tail."""
        m = self.drift
        for w, nu in self.levy_tail_components():
            m += w / nu
        return m

    def potential(self) -> PotentialMeasure:
        """V(dy) with Laplace transform 1/kappa: atom plus exponential mixture."""
        atom = 1.0 / self.scale if len(self.roots) == len(self.poles) else 0.0
        weights, rates = [], []
        for b in self.roots:
            w = 1.0 / self.deriv(-b)
            weights.append(w)
            rates.append(b)
        return PotentialMeasure(atom=atom, weights=tuple(weights), rates=tuple(rates))


@dataclass(frozen=True)
class LadderFactors:
    """Both Wiener-Hopf factors of a model, plus convenience accessors."""

    ascending: RationalFactor
    descending: RationalFactor

    @property
    def kill_up(self) -> float:
        return self.ascending.kill

    @property
    def kill_down(self) -> float:
        return self.descending.kill

    def phi_product(self, beta):
        """kappa(-beta) * kappahat(beta): must reproduce Phi(beta)."""
        beta = np.asarray(beta)
        return self.ascending(-beta) * self.descending(beta)


@dataclass(frozen=True)
class TwoSidedPotential:
    """U(dy) = atom delta_0 + sum w+ e^{-r+ y} dy (y>0) + sum w- e^{-r- |y|} dy (y<0)."""

    atom: float
    pos_weights: tuple[float, ...]
    pos_rates: tuple[float, ...]
    neg_weights: tuple[float, ...]
    neg_rates: tuple[float, ...]

    def moment_transform(self, beta):
        """integral e^{beta y} U(dy) on the interior strip."""
        beta = np.asarray(beta, dtype=float)
        out = np.full_like(beta, self.atom)
        for w, r in zip(self.pos_weights, self.pos_rates):
            out = out + w / (r - beta)
        for w, r in zip(self.neg_weights, self.neg_rates):
            out = out + w / (r + beta)
        return out if out.ndim else float(out)

    def density(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        pos = y > 0
        for w, r in zip(self.pos_weights, self.pos_rates):
            out = out + np.where(pos, w * np.exp(-r * np.abs(y)), 0.0)
        for w, r in zip(self.neg_weights, self.neg_rates):
            out = out + np.where(~pos, w * np.exp(-r * np.abs(y)), 0.0)
        return out if out.ndim else float(out)


def _numerator_polynomial(model: LevyModel) -> tuple[np.ndarray, list[float], list[float]]:
    """Coefficients of N(beta) = Phi(beta) * prod(eta+ - beta) * prod(eta- + beta).

    Returns (coefficients low-to-high, positive poles, negative poles), the
    poles listed as positive numbers eta+ / eta-.
    """
    base = np.array([model.q, -model.drift, -0.5 * model.gaussian**2])
    base = np.trim_zeros(base, "b")
    if base.size == 0:
        base = np.array([0.0])
    n = base.copy()
    pos_poles: list[float] = []
    neg_poles: list[float] = []
    dplus = np.array([1.0])
    dminus = np.array([1.0])
    if model.pos_jumps is not None:
        eta = model.pos_jumps.rate
        pos_poles.append(eta)
        dplus = np.array([eta, -1.0])
    if model.neg_jumps is not None:
        eta = model.neg_jumps.rate
        neg_poles.append(eta)
        dminus = np.array([eta, 1.0])
    n = npoly.polymul(npoly.polymul(base, dplus), dminus)
    if model.pos_jumps is not None:
        c = model.pos_jumps.intensity
        n = npoly.polyadd(n, npoly.polymul(np.array([0.0, -c]), dminus))
    if model.neg_jumps is not None:
        c = model.neg_jumps.intensity
        n = npoly.polyadd(n, npoly.polymul(np.array([0.0, c]), dplus))
    n = np.trim_zeros(np.asarray(n, dtype=float), "b")
    return n, pos_poles, neg_poles


def _polish_root(coeffs: np.ndarray, root: float) -> float:
    """Newton refinement of a simple real root."""
    dcoeffs = npoly.polyder(coeffs)
    x = root
    scale = max(1.0, abs(root))
    for _ in range(_NEWTON_MAXIT):
        f = npoly.polyval(x, coeffs)
        df = npoly.polyval(x, dcoeffs)
        if df == 0.0:
            break
        step = f / df
        x -= step
        if abs(step) < _NEWTON_TOL * scale:
            return float(x)
    if abs(npoly.polyval(x, coeffs)) > 1e-9 * (1.0 + np.max(np.abs(coeffs))):
        raise RootFindingFailure("Newton polish did not converge")
    return float(x)


def factorize(model: LevyModel) -> LadderFactors:
    """Split Phi into ascending and descending ladder exponents.

    Raises UnsupportedModel for inadmissible input and RootFindingFailure when
    the numerator roots cannot be located to tolerance (degenerate parameter
    sets with coalescing roots are outside the supported range).
    """
    model.require_admissible()
    coeffs, pos_poles, neg_poles = _numerator_polynomial(model)
    # a constant exponent (motionless killed path) drops through unharmed:
    # no roots, no poles, kappa = 1 and kappahat = q
    raw = npoly.polyroots(coeffs)
    coeff_scale = np.max(np.abs(coeffs))
    tol_imag = 1e-7 * max(1.0, float(np.max(np.abs(raw))) if raw.size else 1.0)
    roots: list[float] = []
    for r in raw:
        if abs(r.imag) > tol_imag:
            raise RootFindingFailure(f"complex root {r} outside catalog guarantees")
        roots.append(_polish_root(coeffs, float(r.real)))
    roots.sort()
    # snap the q=0 zero root exactly
    if model.q == 0.0:
        zi = int(np.argmin(np.abs(roots)))
        if abs(roots[zi]) > 1e-8:
            raise RootFindingFailure("expected a zero root for an unkilled model")
        roots[zi] = 0.0
    if len(roots) >= 2:
        gaps = np.diff(sorted(roots))
        if np.any(gaps < 1e-9 * max(1.0, max(abs(r) for r in roots))):
            raise RootFindingFailure("coalescing roots: degenerate parameter set")
    up = [r for r in roots if r > 0.0]
    down = [0.0 if r == 0.0 else -r for r in roots if r <= 0.0]
    if len(up) not in (len(pos_poles), len(pos_poles) + 1):
        raise RootFindingFailure("unexpected ascending root count")
    if len(down) not in (len(neg_poles), len(neg_poles) + 1):
        raise RootFindingFailure("unexpected descending root count")
    lead = float(coeffs[-1])
    scale = lead * (-1.0) ** len(up)
    if scale <= 0:
        raise RootFindingFailure("descending factor scale came out nonpositive")
    ascending = RationalFactor(1.0, tuple(sorted(up)), tuple(pos_poles))
    descending = RationalFactor(scale, tuple(sorted(down)), tuple(neg_poles))
    factors = LadderFactors(ascending=ascending, descending=descending)
    # internal consistency: the product must reproduce Phi on the strip
    resid = factorization_residual(model, factors, n_points=13)
    if resid > 1e-8:
        raise RootFindingFailure(f"factorization residual {resid:.2e} above tolerance")
    return factors


def factorization_residual(model: LevyModel, factors: LadderFactors, n_points: int = 50) -> float:
    """max over a lambda grid of |q/Psi - product form| / (1 + |q/Psi|) style error.

    Evaluated as |Psi(lam) - kappa(q,-i lam) kappahat(q, i lam)| relative to
    1 + |Psi(lam)| over real lam, which exercises both factors off the real
    beta axis.
    """
    lam = np.linspace(-8.0, 8.0, n_points)
    lam = lam[np.abs(lam) > 1e-9] if model.q == 0 else lam
    psi = model.char_exponent(lam)
    prod = factors.ascending(-1j * lam) * factors.descending(1j * lam)
    return float(np.max(np.abs(psi - prod) / (1.0 + np.abs(psi))))


def supremum_law(model: LevyModel, factors: LadderFactors | None = None) -> PotentialMeasure:
    """P(sup xi in dy) = kappa(q,0) V_H(dy): a proper probability measure."""
    if factors is None:
        factors = factorize(model)
    if factors.kill_up <= 0:
        raise UnsupportedModel("ascending ladder is unkilled; supremum is not a.s. finite")
    return factors.ascending.potential().scaled(factors.kill_up)


def potential_U(model: LevyModel, factors: LadderFactors | None = None) -> TwoSidedPotential:
    """Potential measure U of the killed process, via ladder convolution.

    U = V_H convolved with the reflection of V_Hhat; with exponential-mixture
    potentials the convolution closes: the weight at ascending rate rho is
    c_rho / kappahat(rho), and symmetrically for the descending side.
    """
    if factors is None:
        factors = factorize(model)
    vh = factors.ascending.potential()
    vhat = factors.descending.potential()
    atom = vh.atom * vhat.atom
    pos_w, pos_r = [], []
    for w, r in zip(vh.weights, vh.rates):
        pos_w.append(w * float(vhat.laplace(r)))
        pos_r.append(r)
    neg_w, neg_r = [], []
    for w, r in zip(vhat.weights, vhat.rates):
        neg_w.append(w * float(vh.laplace(r)))
        neg_r.append(r)
    return TwoSidedPotential(
        atom=atom,
        pos_weights=tuple(pos_w),
        pos_rates=tuple(pos_r),
        neg_weights=tuple(neg_w),
        neg_rates=tuple(neg_r),
    )


def vigon_tail(model: LevyModel, x, factors: LadderFactors | None = None):
    """Ascending ladder Levy tail via the descending-potential smoothing.

    Pi_H_bar(x) = integral V_Hhat(dy) Pi_bar(x + y), which for an exponential
    upward jump tail collapses to Pi_bar(x) / kappahat(q, eta+). Returns 0 for
    models with no upward jumps.
    """
    if factors is None:
        factors = factorize(model)
    x = np.asarray(x, dtype=float)
    if model.pos_jumps is None:
        out = np.zeros_like(x)
        return out if out.ndim else float(out)
    eta = model.pos_jumps.rate
    vhat = factors.descending.potential()
    out = model.jump_tail_pos(x) * float(vhat.laplace(eta))
    return out if out.ndim else float(out)


def potential_transform_residual(
    model: LevyModel, factors: LadderFactors | None = None, n_points: int = 50
) -> float:
    """max relative gap between the U representation transform and 1/Phi."""
    if factors is None:
        factors = factorize(model)
    u = potential_U(model, factors)
    lo = -min(factors.descending.roots) if factors.descending.roots else -math.inf
    hi = min(factors.ascending.roots) if factors.ascending.roots else math.inf
    lo = max(lo, model.mgf_strip[0])
    hi = min(hi, model.mgf_strip[1])
    if math.isinf(lo):
        lo = min(-4.0, 4.0 * (hi if math.isfinite(hi) and hi < 0 else -1.0))
    if math.isinf(hi):
        hi = max(4.0, 4.0 * (lo if lo > 0 else 1.0))
    width = hi - lo
    beta = np.linspace(lo + 0.02 * width, hi - 0.02 * width, n_points)
    beta = beta[np.abs(model.laplace_exponent(beta)) > 1e-9]
    lhs = u.moment_transform(beta)
    rhs = 1.0 / model.laplace_exponent(beta)
    return float(np.max(np.abs(lhs - rhs) / (1.0 + np.abs(rhs))))

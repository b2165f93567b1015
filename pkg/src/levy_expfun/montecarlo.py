"""Monte Carlo samplers for exponential functionals and ladder objects.

All samplers are deterministic functions of (seed, model, scheme parameters):
draws come from Philox substreams keyed by seed XOR stream index, work is cut
into fixed-size chunks with one substream per chunk, and chunk results are
concatenated in chunk order. Thread count (LEVY_EXPFUN_THREADS) only changes
scheduling, never values.

Path scheme: Euler skeleton on a uniform grid with trapezoidal accumulation of
e^{xi}, compound-Poisson parts by per-step thinning (the thinning uniform is
recycled into the jump magnitude), and killing by an exact exponential clock
drawn per path, so the final partial step uses the true kill position. For
deterministic paths (pure killed drift) the integral is computed in closed
form instead of stepping a grid.

Unkilled models get a horizon chosen by a pilot doubling policy: double the
window until almost no pilot path puts more than 1% of its integral into the
last decile of time.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    LowEffectiveSampleSize,
    NonContraction,
    TruncationBias,
    UnsupportedModel,
)
from .models import LevyModel, SubordinatorModel
from .rng import CHUNK, STREAM_PILOT, chunk_sizes, substream
from .wienerhopf import PotentialMeasure, RationalFactor

_CHUNK_BASE = 16  # chunk i of a role uses substream role + _CHUNK_BASE + i


@dataclass
class SampleSet:
    """Simulated draws plus the provenance needed to reproduce them."""

    values: np.ndarray
    seed: int
    scheme: str
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def mean_se(self) -> tuple[float, float]:
        m = float(np.mean(self.values))
        se = float(np.std(self.values, ddof=1) / math.sqrt(self.n)) if self.n > 1 else math.nan
        return m, se


def thread_count() -> int:
    """Worker cap from LEVY_EXPFUN_THREADS (default 1)."""
    raw = os.environ.get("LEVY_EXPFUN_THREADS", "")
    try:
        k = int(raw)
    except ValueError:
        return 1
    return max(1, k)


def _run_chunks(n: int, seed: int, stream: int, worker, threads: int | None = None) -> np.ndarray:
    """Run ``worker(rng, m)`` over fixed-size chunks; order-stable concat."""
    sizes = chunk_sizes(n)
    out: list[np.ndarray | None] = [None] * len(sizes)

    def job(i: int) -> None:
        rng = substream(seed, stream + _CHUNK_BASE + i)
        out[i] = worker(rng, sizes[i])

    k = thread_count() if threads is None else max(1, threads)
    if k > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=k) as pool:
            list(pool.map(job, range(len(sizes))))
    else:
        for i in range(len(sizes)):
            job(i)
    if not out:
        return np.empty(0)
    return np.concatenate([np.atleast_1d(np.asarray(o)) for o in out])


# ---------------------------------------------------------------------------
# path scheme


def _window_paths(
    model: LevyModel,
    rng: np.random.Generator,
    m: int,
    horizon: float,
    dt: float,
    tau: np.ndarray,
    xi0: np.ndarray | None = None,
    want_sup: bool = False,
):
    """Euler window [0, horizon] for m paths with residual lifetimes ``tau``.

    Returns (integral, xi_end, sup, last_decile_integral). Paths whose tau
    falls inside the window stop there, contributing the exact partial step;
    xi_end is only meaningful for paths with tau > horizon.
    """
    steps = max(1, int(round(horizon / dt)))
    h = horizon / steps
    sq = model.gaussian * math.sqrt(h)
    mu = model.drift
    use_gauss = model.gaussian > 0
    pj = model.pos_jumps
    nj = model.neg_jumps
    p_pos = -math.expm1(-pj.intensity * h) if pj is not None else 0.0
    p_neg = -math.expm1(-nj.intensity * h) if nj is not None else 0.0

    xi = np.zeros(m) if xi0 is None else xi0.astype(float).copy()
    expxi = np.exp(xi)
    integral = np.zeros(m)
    last = np.zeros(m)
    sup = np.maximum(xi, 0.0) if want_sup else np.zeros(0)
    t_last_decile = 0.9 * horizon

    for k in range(steps):
        t0 = k * h
        t1 = t0 + h
        act = np.nonzero(tau > t0)[0]
        if act.size == 0:
            break
        dxi = np.full(act.size, mu * h)
        if use_gauss:
            dw = rng.standard_normal(act.size, dtype=np.float32)
            dxi += sq * dw.astype(np.float64)
        if pj is not None:
            u = rng.random(act.size)
            hit = u < p_pos
            if np.any(hit):
                mag = -np.log(u[hit] / p_pos) / pj.rate
                add = np.zeros(act.size)
                add[hit] = mag
                dxi += add
        if nj is not None:
            u = rng.random(act.size)
            hit = u < p_neg
            if np.any(hit):
                mag = -np.log(u[hit] / p_neg) / nj.rate
                add = np.zeros(act.size)
                add[hit] = mag
                dxi -= add
        old_exp = expxi[act]
        xi_new = xi[act] + dxi
        exp_new = np.exp(xi_new)
        tau_a = tau[act]
        dies = tau_a <= t1
        inc = np.where(dies, (tau_a - t0) * old_exp, 0.5 * h * (old_exp + exp_new))
        integral[act] += inc
        if t1 > t_last_decile:
            last[act] += inc
        xi[act] = xi_new
        expxi[act] = exp_new
        if want_sup:
            sup[act] = np.maximum(sup[act], xi_new)
    return integral, xi, sup, last


def _closed_drift_integrals(model: LevyModel, rng: np.random.Generator, m: int) -> np.ndarray:
    """Exact I for deterministic decreasing paths xi_t = drift * t (drift < 0)."""
    rate = -model.drift
    if model.q == 0.0:
        return np.full(m, 1.0 / rate)
    tau = rng.exponential(1.0 / model.q, size=m)
    return -np.expm1(-rate * tau) / rate


def _is_deterministic_drift(model: LevyModel) -> bool:
    return (
        model.gaussian == 0.0
        and model.pos_jumps is None
        and model.neg_jumps is None
        and model.drift < 0
    )


def choose_horizon(
    model: LevyModel,
    seed: int,
    dt: float,
    horizon0: float = 10.0,
    max_doublings: int = 4,
    share_tol: float = 0.01,
    frac_tol: float = 0.002,
) -> tuple[float, dict]:
    """Pilot doubling policy for unkilled models.

    A window passes when at most ``frac_tol`` of pilot paths put more than
    ``share_tol`` of their integral into the last decile of time. Raises
    TruncationBias if no window up to horizon0 * 2^max_doublings passes.
    """
    n_pilot = 1024
    for d in range(max_doublings + 1):
        horizon = horizon0 * 2.0**d
        rng = substream(seed, STREAM_PILOT + d)
        dt_p = max(dt, horizon / 4000.0)
        tau = np.full(n_pilot, math.inf)
        integral, _, _, last = _window_paths(model, rng, n_pilot, horizon, dt_p, tau)
        with np.errstate(invalid="ignore", divide="ignore"):
            share = np.where(integral > 0, last / integral, 0.0)
        frac = float(np.mean(share > share_tol))
        if frac <= frac_tol:
            return horizon, {"doublings": d, "pilot_tail_frac": frac}
    raise TruncationBias(
        f"no horizon up to {horizon0 * 2.0**max_doublings:g} passed the tail-share check"
    )


def sample_I_path(
    model: LevyModel,
    n: int,
    seed: int,
    dt: float = 2e-3,
    horizon: float | None = None,
    stream: int = 0,
    threads: int | None = None,
) -> SampleSet:
    """Draws of I = integral_0^zeta e^{xi_s} ds by Euler path simulation."""
    model.require_admissible()
    meta: dict = {"dt": dt}
    if _is_deterministic_drift(model):
        vals = _run_chunks(n, seed, stream, lambda rng, m: _closed_drift_integrals(model, rng, m), threads)
        meta["exact_drift_path"] = True
        return SampleSet(values=vals, seed=seed, scheme="path", meta=meta)

    if model.q > 0:
        horizon_eff = math.inf
    elif horizon is None:
        horizon_eff, hmeta = choose_horizon(model, seed, dt)
        meta.update(hmeta)
    else:
        horizon_eff = horizon
    meta["horizon"] = horizon_eff

    def worker(rng: np.random.Generator, m: int) -> np.ndarray:
        if model.q > 0:
            tau = rng.exponential(1.0 / model.q, size=m)
            window = float(np.max(tau)) + dt
        else:
            tau = np.full(m, math.inf)
            window = horizon_eff
        integral, _, _, _ = _window_paths(model, rng, m, window, dt, tau)
        return integral

    vals = _run_chunks(n, seed, stream, worker, threads)
    return SampleSet(values=vals, seed=seed, scheme="path", meta=meta)


# ---------------------------------------------------------------------------
# perpetuity scheme


def perpetuity_iterations(model: LevyModel, tol: float = 1e-6) -> tuple[int, float]:
    """Iteration count from the geometric contraction of E[M^eps].

    Probes eps on a grid in (0,1) intersected with the finiteness strip and
    uses the best contraction rate Phi(eps); raises NonContraction when no
    probe contracts.
    """
    lo, hi = model.mgf_strip
    eps = np.linspace(0.05, 0.95, 19)
    eps = eps[eps < hi]
    if eps.size == 0:
        raise NonContraction("no probe exponent inside the finiteness strip")
    rates = model.laplace_exponent(eps)
    best = float(np.max(rates))
    if not math.isfinite(best) or best <= 0:
        raise NonContraction("E[M^eps] >= 1 for all probe exponents")
    return max(1, math.ceil(-math.log(tol) / best)), best


def sample_I_perpetuity(
    model: LevyModel,
    n: int,
    seed: int,
    dt: float = 2e-3,
    iterations: int | None = None,
    stream: int = 0,
    threads: int | None = None,
) -> SampleSet:
    """Draws of I via the fixed-point identity I = Q + M I' iterated forward."""
    model.require_admissible()
    if iterations is None:
        iterations, rate = perpetuity_iterations(model)
    else:
        rate = math.nan

    def worker(rng: np.random.Generator, m: int) -> np.ndarray:
        if model.q > 0:
            tau = rng.exponential(1.0 / model.q, size=m)
        else:
            tau = np.full(m, math.inf)
        total = np.zeros(m)
        logP = np.zeros(m)
        alive = np.ones(m, dtype=bool)
        for k in range(iterations):
            idx = np.nonzero(alive)[0]
            if idx.size == 0:
                break
            tau_rel = tau[idx] - k
            q_k, xi_end, _, _ = _window_paths(model, rng, idx.size, 1.0, dt, tau_rel)
            total[idx] += np.exp(logP[idx]) * q_k
            died = tau_rel <= 1.0
            alive[idx[died]] = False
            live = ~died
            logP[idx[live]] += xi_end[live]
        return total

    vals = _run_chunks(n, seed, stream, worker, threads)
    return SampleSet(
        values=vals,
        seed=seed,
        scheme="perpetuity",
        meta={"dt": dt, "iterations": iterations, "contraction_rate": rate},
    )


# ---------------------------------------------------------------------------
# closed forms


def sample_I_closed(
    model: LevyModel, n: int, seed: int, stream: int = 0, threads: int | None = None
) -> SampleSet:
    """Exact draws of I where the law is classical.

    Killed/unkilled pure drift: scaled Beta (or a constant). Unkilled
    Brownian motion with negative drift: I = (2/Q^2) / Gamma(2|mu|/Q^2, 1).
    Other models have no closed form and raise UnsupportedModel.
    """
    model.require_admissible()
    if _is_deterministic_drift(model):
        vals = _run_chunks(n, seed, stream, lambda rng, m: _closed_drift_integrals(model, rng, m), threads)
        return SampleSet(values=vals, seed=seed, scheme="closed", meta={"law": "beta-drift"})
    if (
        model.family == "BrownianDrift"
        and model.q == 0.0
        and model.drift < 0
        and model.gaussian > 0
    ):
        shape = 2.0 * (-model.drift) / model.gaussian**2
        scale = 2.0 / model.gaussian**2

        def worker(rng: np.random.Generator, m: int) -> np.ndarray:
            return scale / rng.gamma(shape, 1.0, size=m)

        vals = _run_chunks(n, seed, stream, worker, threads)
        return SampleSet(
            values=vals, seed=seed, scheme="closed", meta={"law": f"inv-gamma({shape:g})"}
        )
    raise UnsupportedModel("no closed-form law for this model")


def sample_exponential_mixture(
    measure: PotentialMeasure, n: int, seed: int, stream: int = 0, threads: int | None = None
) -> SampleSet:
    """Draws from a probability measure given as atom + exponential mixture."""
    comp_mass = [measure.atom]
    comp_rate = [math.inf]
    for w, r in zip(measure.weights, measure.rates):
        if r <= 0:
            raise UnsupportedModel("mixture sampling needs strictly positive rates")
        comp_mass.append(w / r)
        comp_rate.append(r)
    total = sum(comp_mass)
    if not math.isclose(total, 1.0, rel_tol=1e-8):
        raise UnsupportedModel(f"measure has mass {total:g}, not a probability law")
    cum = np.cumsum(np.asarray(comp_mass) / total)

    def worker(rng: np.random.Generator, m: int) -> np.ndarray:
        u = rng.random(m)
        comp = np.searchsorted(cum, u, side="right")
        comp = np.minimum(comp, len(comp_mass) - 1)
        out = np.zeros(m)
        for i, rate in enumerate(comp_rate):
            idx = comp == i
            if not np.any(idx) or math.isinf(rate):
                continue
            out[idx] = rng.exponential(1.0 / rate, size=int(np.sum(idx)))
        return out

    vals = _run_chunks(n, seed, stream, worker, threads)
    return SampleSet(values=vals, seed=seed, scheme="mixture", meta={})


def sample_supremum(
    model: LevyModel,
    n: int,
    seed: int,
    scheme: str = "mixture",
    dt: float = 1e-3,
    stream: int = 0,
    threads: int | None = None,
    factors=None,
) -> SampleSet:
    """All-time supremum of xi: exact ladder mixture, or path discretization."""
    from .wienerhopf import factorize, supremum_law

    model.require_admissible()
    if scheme == "mixture":
        law = supremum_law(model, factors if factors is not None else factorize(model))
        out = sample_exponential_mixture(law, n, seed, stream=stream, threads=threads)
        out.scheme = "sup-mixture"
        return out
    if scheme != "path":
        raise UnsupportedModel(f"unknown supremum scheme {scheme!r}")

    if model.q > 0:
        horizon = None
    else:
        horizon, _ = choose_horizon(model, seed, dt)

    def worker(rng: np.random.Generator, m: int) -> np.ndarray:
        if model.q > 0:
            tau = rng.exponential(1.0 / model.q, size=m)
            window = float(np.max(tau)) + dt
        else:
            tau = np.full(m, math.inf)
            window = horizon
        _, _, sup, _ = _window_paths(model, rng, m, window, dt, tau, want_sup=True)
        return sup

    vals = _run_chunks(n, seed, stream, worker, threads)
    return SampleSet(values=vals, seed=seed, scheme="sup-path", meta={"dt": dt})


# ---------------------------------------------------------------------------
# residual factor of the ladder height (infinite product law)


def subordinator_factor(sub: SubordinatorModel) -> RationalFactor:
    """phi as a rational factor: scale * prod(lam+u_i) / prod(lam+eta)."""
    if sub.jumps is None:
        if sub.drift == 0.0:
            return RationalFactor(scale=sub.kill, roots=(), poles=())
        return RationalFactor(scale=sub.drift, roots=(sub.kill / sub.drift,), poles=())
    c, eta = sub.jumps.intensity, sub.jumps.rate
    if sub.drift == 0.0:
        # phi = (kill + c) (lam + u) / (lam + eta), u = kill*eta/(kill+c)
        u = sub.kill * eta / (sub.kill + c)
        return RationalFactor(scale=sub.kill + c, roots=(u,), poles=(eta,))
    b = sub.drift
    # numerator b lam^2 + (kill + b eta + c) lam + kill eta
    s = sub.kill + b * eta + c
    disc = math.sqrt(s * s - 4.0 * b * sub.kill * eta)
    u2 = (s + disc) / (2.0 * b)
    u1 = (sub.kill * eta / b) / u2 if u2 > 0 else (s - disc) / (2.0 * b)
    return RationalFactor(scale=b, roots=(u1, u2), poles=(eta,))


def residual_law(sub: SubordinatorModel) -> tuple:
    """Closed-form descriptor of the law of R: moments E[R^n] = prod phi(k).

    Returns one of ('const', c), ('gamma', scale, shape),
    ('beta', scale, alpha, beta), ('gamma-beta', scale, shape, alpha, beta).
    """
    f = subordinator_factor(sub)
    if not f.roots:
        return ("const", f.scale)
    if not f.poles:
        (u,) = f.roots
        return ("gamma", f.scale, u + 1.0)
    eta = f.poles[0]
    if len(f.roots) == 1:
        (u,) = f.roots
        if not u < eta:
            raise UnsupportedModel("zero/pole interlacing violated")
        return ("beta", f.scale, u + 1.0, eta - u)
    u1, u2 = sorted(f.roots)
    if not u1 < eta < u2:
        raise UnsupportedModel("zero/pole interlacing violated")
    return ("gamma-beta", f.scale, u2 + 1.0, u1 + 1.0, eta - u1)


def _draw_residual_closed(law: tuple, rng: np.random.Generator, m: int) -> np.ndarray:
    kind = law[0]
    if kind == "const":
        return np.full(m, law[1])
    if kind == "gamma":
        return law[1] * rng.gamma(law[2], 1.0, size=m)
    if kind == "beta":
        return law[1] * rng.beta(law[2], law[3], size=m)
    _, scale, shape, a, b = law
    return scale * rng.gamma(shape, 1.0, size=m) * rng.beta(a, b, size=m)


def gamma_sigma(sub: SubordinatorModel, tol: float = 1e-10) -> float:
    """Limit of sum_{j<=n} phi'(j)/phi(j) - log phi(n), Richardson-accelerated."""
    n0 = 64
    levels = 15
    checkpoints = [n0 * 2**i for i in range(levels)]
    vals = []
    s = 0.0
    j = 1
    for ncp in checkpoints:
        ks = np.arange(j, ncp + 1, dtype=float)
        s += float(np.sum(sub.phi_deriv(ks) / sub.phi(ks)))
        j = ncp + 1
        vals.append(s - math.log(sub.phi(float(ncp))))
    # Richardson table for error ~ c1/n + c2/n^2 + ...
    table = [list(vals)]
    best = vals[-1]
    for lvl in range(1, levels):
        prev = table[-1]
        cur = []
        fac = 2.0**lvl
        for i in range(len(prev) - 1):
            cur.append((fac * prev[i + 1] - prev[i]) / (fac - 1.0))
        table.append(cur)
        if len(cur) >= 2 and abs(cur[-1] - cur[-2]) < tol:
            return float(cur[-1])
        if cur:
            best = cur[-1]
    return float(best)


def residual_truncation(sub: SubordinatorModel, cumulant_tol: float = 1e-8) -> tuple[int, float]:
    """Truncation K for the product sampler plus the compensating variance.

    The k > K factors are replaced by a Gaussian with their exact mean and
    variance (tail sums of (log phi)' and (log phi)'' have closed forms up to
    an integral remainder), leaving only a third-cumulant error ~ 1/K^2 which
    is required to be below ``cumulant_tol``. Raises TruncationBias when K
    would exceed 1e6.
    """

    def logphi2(x: np.ndarray) -> np.ndarray:
        p = sub.phi(x)
        return (sub.phi_deriv(x) / p) ** 2 - sub.phi_deriv(x, 2) / p

    if sub.jumps is None and sub.drift == 0.0:
        return 1, 0.0
    k = 64
    while k <= 1_000_000:
        # third-cumulant tail ~ -(log phi)''(k), i.e. Var(G^(k)) at the edge
        if float(logphi2(np.asarray(float(k)))) < cumulant_tol:
            break
        k *= 2
    else:
        raise TruncationBias("cumulant budget unreachable at K = 1e6")
    ks = np.arange(k + 1, k + 2049, dtype=float)
    var_tail = float(np.sum(logphi2(ks)))
    edge = float(ks[-1]) + 0.5
    var_tail += float(sub.phi_deriv(edge) / sub.phi(edge))  # integral remainder
    return k, var_tail


def sample_residual(
    sub: SubordinatorModel,
    n: int,
    seed: int,
    scheme: str = "closed",
    truncation: int | None = None,
    stream: int = 0,
    threads: int | None = None,
) -> SampleSet:
    """Draws of the residual factor R with E[R^m] = prod_{k<=m} phi(k).

    scheme 'closed' uses the exact Gamma/Beta representation; scheme 'product'
    uses the centered infinite product truncated at K factors with a Gaussian
    compensator for the discarded tail.
    """
    if scheme == "closed":
        law = residual_law(sub)
        vals = _run_chunks(n, seed, stream, lambda rng, m: _draw_residual_closed(law, rng, m), threads)
        return SampleSet(values=vals, seed=seed, scheme="residual-closed", meta={"law": law[0]})
    if scheme != "product":
        raise UnsupportedModel(f"unknown residual scheme {scheme!r}")

    gam = gamma_sigma(sub)
    if truncation is None:
        kmax, var_comp = residual_truncation(sub)
    else:
        kmax = truncation
        _, var_comp = residual_truncation(sub)
    pot = subordinator_factor(sub).potential()
    sd_comp = math.sqrt(max(var_comp, 0.0))

    ks = np.arange(1, kmax + 1, dtype=float)
    phis = np.atleast_1d(np.asarray(sub.phi(ks), dtype=float))
    means = np.atleast_1d(np.asarray(sub.phi_deriv(ks) / phis, dtype=float))
    # mixture of G^(k): atom with prob phi(k)*atom_V, Exp(k + r_i) with
    # weight phi(k) * w_i / (k + r_i); weights sum to 1 by construction
    rates = np.asarray(pot.rates, dtype=float)
    weights = np.asarray(pot.weights, dtype=float)

    def worker(rng: np.random.Generator, m: int) -> np.ndarray:
        logr = np.full(m, -gam + float(np.sum(means)))
        for i, k in enumerate(ks):
            u = rng.random(m)
            if rates.size == 0:
                continue
            comp_w = phis[i] * weights / (k + rates)
            cum = np.cumsum(comp_w)
            # anything beyond the exponential components is the atom (G = 0)
            g = np.zeros(m)
            lo = 0.0
            for ci in range(rates.size):
                hi = cum[ci]
                sel = (u >= lo) & (u < hi)
                if np.any(sel):
                    g[sel] = -np.log((u[sel] - lo) / comp_w[ci]) / (k + rates[ci])
                lo = hi
            logr -= g
        if sd_comp > 0:
            logr += sd_comp * rng.standard_normal(m)
        return np.exp(logr)

    vals = _run_chunks(n, seed, stream, worker, threads)
    return SampleSet(
        values=vals,
        seed=seed,
        scheme="residual-product",
        meta={"truncation": kmax, "gamma": gam, "compensator_var": var_comp},
    )


# ---------------------------------------------------------------------------
# size-biased ladder functionals


def sample_J(
    sub: SubordinatorModel,
    n: int,
    seed: int,
    scheme: str = "closed",
    stream: int = 0,
    threads: int | None = None,
) -> SampleSet:
    """Draws of J with P(J in dy) = phi(0) * y * P(1/R in dy).

    scheme 'closed' inverts the Gamma/Beta representation (the size bias
    shifts each shape down by one); scheme 'resample' draws R and importance
    resamples with weights 1/R, guarded by an effective-sample-size check.
    """
    if sub.kill <= 0:
        raise UnsupportedModel("size-biased functional needs a killed subordinator")
    if scheme == "closed":
        law = residual_law(sub)
        kind = law[0]

        def worker(rng: np.random.Generator, m: int) -> np.ndarray:
            if kind == "const":
                return np.full(m, 1.0 / law[1])
            if kind == "gamma":
                scale, shape = law[1], law[2]
                return 1.0 / (scale * rng.gamma(shape - 1.0, 1.0, size=m))
            if kind == "beta":
                scale, a, b = law[1], law[2], law[3]
                return 1.0 / (scale * rng.beta(a - 1.0, b, size=m))
            _, scale, shape, a, b = law
            return 1.0 / (scale * rng.gamma(shape - 1.0, 1.0, size=m) * rng.beta(a - 1.0, b, size=m))

        vals = _run_chunks(n, seed, stream, worker, threads)
        return SampleSet(values=vals, seed=seed, scheme="J-closed", meta={"law": kind})
    if scheme != "resample":
        raise UnsupportedModel(f"unknown J scheme {scheme!r}")

    pool = sample_residual(sub, max(4 * n, 4096), seed, scheme="closed", stream=stream, threads=threads)
    w = 1.0 / pool.values
    ess = float(np.sum(w)) ** 2 / float(np.sum(w * w))
    if ess < n / 10.0:
        raise LowEffectiveSampleSize(f"ESS {ess:.0f} below n/10 = {n / 10:.0f}")
    p = w / np.sum(w)
    rng = substream(seed, stream + 7)
    idx = rng.choice(pool.values.size, size=n, replace=True, p=p)
    vals = 1.0 / pool.values[idx]
    return SampleSet(values=vals, seed=seed, scheme="J-resample", meta={"ess": ess})


def sample_I_neg_subordinator(
    sub: SubordinatorModel,
    n: int,
    seed: int,
    dt: float = 2e-3,
    stream: int = 0,
    threads: int | None = None,
) -> SampleSet:
    """Draws of I_{-sigma} = integral e^{-sigma_s} ds for a catalog subordinator.

    Exact scaled-Beta law for drift-only subordinators, path scheme otherwise.
    """
    if sub.jumps is None:
        if sub.drift == 0.0:
            if sub.kill <= 0:
                raise UnsupportedModel("degenerate subordinator")
            # sigma == 0 until the kill time: I = Exp(kill)

            def worker(rng: np.random.Generator, m: int) -> np.ndarray:
                return rng.exponential(1.0 / sub.kill, size=m)

            vals = _run_chunks(n, seed, stream, worker, threads)
            return SampleSet(values=vals, seed=seed, scheme="closed", meta={"law": "exp"})
        b = sub.drift
        if sub.kill == 0.0:
            return SampleSet(
                values=np.full(n, 1.0 / b), seed=seed, scheme="closed", meta={"law": "const"}
            )

        def worker(rng: np.random.Generator, m: int) -> np.ndarray:
            return rng.beta(1.0, sub.kill / b, size=m) / b

        vals = _run_chunks(n, seed, stream, worker, threads)
        return SampleSet(values=vals, seed=seed, scheme="closed", meta={"law": "beta"})
    return sample_I_path(
        LevyModel.neg_subordinator(sub), n, seed, dt=dt, stream=stream, threads=threads
    )

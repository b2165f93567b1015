"""Model catalog: killed Levy processes with rational exponents.

A process xi is described by its killing rate q, Gaussian coefficient Q,
natural drift mu, and up to two one-sided compound-Poisson exponential jump
components. The characteristic exponent follows the convention

    E[e^{i lam xi_1}; 1 < zeta] = e^{-Psi(lam)},
    Psi(lam) = q + a*i*lam + Q^2 lam^2 / 2
               + integral (1 - e^{i lam x} + i lam x 1_{|x|<1}) Pi(dx),

where a is the linear coefficient of the quadruplet (q, a, Q, Pi). The Laplace
exponent is Phi(beta) = Psi(-i beta), so E[e^{beta xi_1}; 1 < zeta] =
e^{-Phi(beta)}; Phi is finite exactly on the open strip between the jump
rates and the value float('inf') is returned as a sentinel outside it.

Subordinators (used for ladder processes and the negated family) carry the
Bernstein exponent phi(lam) = kill + drift*lam + integral (1-e^{-lam x}) Pi_H(dx)
with E[e^{-lam H_1}; 1 < zeta] = e^{-phi(lam)}.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelFileError, UnsupportedModel

FAMILIES = (
    "KilledDrift",
    "BrownianDrift",
    "SpectrallyNegativeBM",
    "DoubleExpJumps",
    "NegSubordinator",
)


def _truncated_exp_mean(rate: float) -> float:
    # E[X; X < 1] for X ~ Exp(rate)
    return (1.0 - math.exp(-rate) * (1.0 + rate)) / rate


@dataclass(frozen=True)
class ExponentialJumps:
    """One-sided compound Poisson component with Exp(rate) magnitudes."""

    intensity: float
    rate: float

    def __post_init__(self) -> None:
        if self.intensity <= 0:
            raise UnsupportedModel("jump intensity must be positive")
        if self.rate <= 0:
            raise UnsupportedModel("jump rate must be positive")

    @property
    def mean(self) -> float:
        """Expected drift contribution intensity * E[magnitude]."""
        return self.intensity / self.rate

    def tail(self, x):
        """Levy measure tail: mass of jumps with magnitude > x."""
        return self.intensity * np.exp(-self.rate * np.asarray(x, dtype=float))


@dataclass(frozen=True)
class SubordinatorModel:
    """Killed subordinator: kill rate, drift, optional exponential jumps."""

    kill: float
    drift: float
    jumps: ExponentialJumps | None = None

    def __post_init__(self) -> None:
        if self.kill < 0 or self.drift < 0:
            raise UnsupportedModel("kill and drift must be nonnegative")
        if self.kill == 0 and self.drift == 0 and self.jumps is None:
            raise UnsupportedModel("degenerate subordinator (no kill, drift, or jumps)")

    def phi(self, lam):
        """Laplace exponent phi(lam); valid for lam > -rate (all lam >= 0)."""
        lam = np.asarray(lam, dtype=float)
        out = self.kill + self.drift * lam
        if self.jumps is not None:
            c, eta = self.jumps.intensity, self.jumps.rate
            out = out + c * lam / (eta + lam)
        return out if out.ndim else float(out)

    def phi_deriv(self, lam, order: int = 1):
        lam = np.asarray(lam, dtype=float)
        if order == 1:
            out = np.full_like(lam, self.drift, dtype=float)
        else:
            out = np.zeros_like(lam, dtype=float)
        if self.jumps is not None:
            c, eta = self.jumps.intensity, self.jumps.rate
            # d^n/dlam^n [c lam/(eta+lam)] = (-1)^(n+1) n! c eta/(eta+lam)^(n+1)
            sign = 1.0 if order % 2 == 1 else -1.0
            out = out + sign * math.factorial(order) * c * eta / (eta + lam) ** (order + 1)
        return out if out.ndim else float(out)

    @property
    def mean(self) -> float:
        """E[H_1] ignoring killing, = phi'(0+) minus the kill contribution."""
        m = self.drift
        if self.jumps is not None:
            m += self.jumps.mean
        return m

    def levy_tail(self, x):
        """Tail of the subordinator's Levy measure."""
        if self.jumps is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.jumps.tail(x)


@dataclass(frozen=True)
class LevyModel:
    """A killed Levy process from the closed catalog.

    Use the family classmethods to construct; ``drift`` is the natural drift
    mu of the path decomposition xi_t = mu t + Q B_t + jumps.
    """

    family: str
    q: float
    drift: float
    gaussian: float = 0.0
    pos_jumps: ExponentialJumps | None = None
    neg_jumps: ExponentialJumps | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise UnsupportedModel(f"unknown family {self.family!r}")
        if self.q < 0:
            raise UnsupportedModel("killing rate q must be nonnegative")
        if self.gaussian < 0:
            raise UnsupportedModel("gaussian coefficient must be nonnegative")

    # -- constructors -----------------------------------------------------

    @classmethod
    def killed_drift(cls, q: float, a: float) -> "LevyModel":
        """xi_t = -a t with killing rate q."""
        return cls("KilledDrift", q=float(q), drift=-float(a))

    @classmethod
    def brownian_drift(cls, q: float, drift: float, gaussian: float) -> "LevyModel":
        """xi_t = drift*t + gaussian*B_t with killing rate q."""
        if gaussian <= 0:
            raise UnsupportedModel("BrownianDrift requires a positive gaussian part")
        return cls("BrownianDrift", q=float(q), drift=float(drift), gaussian=float(gaussian))

    @classmethod
    def spectrally_negative_bm(
        cls,
        q: float,
        drift: float,
        gaussian: float,
        neg_intensity: float,
        neg_rate: float,
    ) -> "LevyModel":
        """Brownian motion with drift plus downward exponential jumps."""
        if gaussian <= 0:
            raise UnsupportedModel("SpectrallyNegativeBM requires a positive gaussian part")
        return cls(
            "SpectrallyNegativeBM",
            q=float(q),
            drift=float(drift),
            gaussian=float(gaussian),
            neg_jumps=ExponentialJumps(float(neg_intensity), float(neg_rate)),
        )

    @classmethod
    def double_exp(
        cls,
        q: float,
        drift: float,
        gaussian: float,
        pos_intensity: float,
        pos_rate: float,
        neg_intensity: float,
        neg_rate: float,
    ) -> "LevyModel":
        """Jump diffusion with two-sided exponential jumps."""
        return cls(
            "DoubleExpJumps",
            q=float(q),
            drift=float(drift),
            gaussian=float(gaussian),
            pos_jumps=ExponentialJumps(float(pos_intensity), float(pos_rate)),
            neg_jumps=ExponentialJumps(float(neg_intensity), float(neg_rate)),
        )

    @classmethod
    def neg_subordinator(cls, sub: SubordinatorModel) -> "LevyModel":
        """xi = -sigma for a catalog subordinator sigma."""
        neg = None
        if sub.jumps is not None:
            neg = ExponentialJumps(sub.jumps.intensity, sub.jumps.rate)
        return cls(
            "NegSubordinator",
            q=sub.kill,
            drift=-sub.drift,
            gaussian=0.0,
            neg_jumps=neg,
        )

    # -- exponents --------------------------------------------------------

    @property
    def a(self) -> float:
        """Linear coefficient of the quadruplet (q, a, Q, Pi)."""
        trunc = 0.0
        if self.pos_jumps is not None:
            trunc += self.pos_jumps.intensity * _truncated_exp_mean(self.pos_jumps.rate)
        if self.neg_jumps is not None:
            trunc -= self.neg_jumps.intensity * _truncated_exp_mean(self.neg_jumps.rate)
        return -self.drift - trunc

    def char_exponent(self, lam):
        """Psi(lam) for real lam (vectorized), complex-valued."""
        lam = np.asarray(lam, dtype=complex)
        out = self.q - 1j * self.drift * lam + 0.5 * self.gaussian**2 * lam**2
        if self.pos_jumps is not None:
            c, eta = self.pos_jumps.intensity, self.pos_jumps.rate
            out = out + c * (1.0 - eta / (eta - 1j * lam))
        if self.neg_jumps is not None:
            c, eta = self.neg_jumps.intensity, self.neg_jumps.rate
            out = out + c * (1.0 - eta / (eta + 1j * lam))
        return out if out.ndim else complex(out)

    @property
    def mgf_strip(self) -> tuple[float, float]:
        """Open interval of beta where E[e^{beta xi_1}] is finite."""
        hi = self.pos_jumps.rate if self.pos_jumps is not None else math.inf
        lo = -self.neg_jumps.rate if self.neg_jumps is not None else -math.inf
        return lo, hi

    def laplace_exponent(self, beta):
        """Phi(beta) = Psi(-i beta); float('inf') where E[e^{beta xi_1}] diverges."""
        beta = np.asarray(beta, dtype=float)
        out = self.q - self.drift * beta - 0.5 * self.gaussian**2 * beta**2
        lo, hi = self.mgf_strip
        if self.pos_jumps is not None:
            c, eta = self.pos_jumps.intensity, self.pos_jumps.rate
            with np.errstate(divide="ignore", invalid="ignore"):
                out = out - c * beta / (eta - beta)
        if self.neg_jumps is not None:
            c, eta = self.neg_jumps.intensity, self.neg_jumps.rate
            with np.errstate(divide="ignore", invalid="ignore"):
                out = out + c * beta / (eta + beta)
        out = np.where((beta >= hi) | (beta <= lo), math.inf, out)
        return out if out.ndim else float(out)

    def laplace_exponent_deriv(self, beta):
        """Phi'(beta) on the open finiteness strip."""
        beta = np.asarray(beta, dtype=float)
        lo, hi = self.mgf_strip
        out = -self.drift - self.gaussian**2 * beta
        if self.pos_jumps is not None:
            c, eta = self.pos_jumps.intensity, self.pos_jumps.rate
            with np.errstate(divide="ignore", invalid="ignore"):
                out = out - c * eta / (eta - beta) ** 2
        if self.neg_jumps is not None:
            c, eta = self.neg_jumps.intensity, self.neg_jumps.rate
            with np.errstate(divide="ignore", invalid="ignore"):
                out = out + c * eta / (eta + beta) ** 2
        out = np.where((beta >= hi) | (beta <= lo), math.nan, out)
        return out if out.ndim else float(out)

    def in_moment_domain(self, beta: float) -> bool:
        """True when beta lies in C = {beta > 0, E[e^{beta xi_1}; 1<zeta] < 1}."""
        lo, hi = self.mgf_strip
        if not (0.0 < beta < hi):
            return False
        return float(self.laplace_exponent(beta)) > 0.0

    @property
    def mean(self) -> float:
        """E[xi_1] of the unkilled process."""
        m = self.drift
        if self.pos_jumps is not None:
            m += self.pos_jumps.mean
        if self.neg_jumps is not None:
            m -= self.neg_jumps.mean
        return m

    def admissible(self) -> bool:
        """Exponential functional finite a.s.: killed, or drifting to -inf."""
        if self.q > 0:
            return True
        return self.mean < 0

    def require_admissible(self) -> None:
        if not self.admissible():
            raise UnsupportedModel(
                "model is not admissible: needs q > 0, or q = 0 with negative mean"
            )

    def jump_tail_pos(self, x):
        """Tail of the positive jump part of the Levy measure."""
        if self.pos_jumps is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.pos_jumps.tail(x)

    def jump_tail_neg(self, x):
        """Tail of the negative jump part (mass below -x for x > 0)."""
        if self.neg_jumps is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.neg_jumps.tail(x)

    def as_subordinator(self) -> SubordinatorModel:
        """For decreasing families, -xi as a SubordinatorModel."""
        if self.family not in ("KilledDrift", "NegSubordinator"):
            raise UnsupportedModel(f"{self.family} is not the negative of a subordinator")
        jumps = None
        if self.neg_jumps is not None:
            jumps = ExponentialJumps(self.neg_jumps.intensity, self.neg_jumps.rate)
        return SubordinatorModel(kill=self.q, drift=-self.drift, jumps=jumps)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        jp: dict = {}
        if self.family == "NegSubordinator":
            sub = self.as_subordinator()
            jp = {"kill": sub.kill, "drift": sub.drift, "jumps": None}
            if sub.jumps is not None:
                jp["jumps"] = {"intensity": sub.jumps.intensity, "rate": sub.jumps.rate}
        else:
            if self.pos_jumps is not None:
                jp["pos_intensity"] = self.pos_jumps.intensity
                jp["pos_rate"] = self.pos_jumps.rate
            if self.neg_jumps is not None:
                jp["neg_intensity"] = self.neg_jumps.intensity
                jp["neg_rate"] = self.neg_jumps.rate
        return {
            "family": self.family,
            "q": self.q,
            "a": self.a,
            "Q": self.gaussian,
            "jump_params": jp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LevyModel":
        if not isinstance(data, dict):
            raise ModelFileError("model description must be a JSON object")
        required = {"family", "q", "a", "Q", "jump_params"}
        unknown = set(data) - required
        if unknown:
            raise ModelFileError(f"unknown model fields: {sorted(unknown)}")
        missing = required - set(data)
        if missing:
            raise ModelFileError(f"missing model fields: {sorted(missing)}")
        family = data["family"]
        if family not in FAMILIES:
            raise ModelFileError(f"unknown family {family!r}")
        try:
            q = float(data["q"])
            a = float(data["a"])
            gaussian = float(data["Q"])
        except (TypeError, ValueError) as exc:
            raise ModelFileError(f"non-numeric model field: {exc}") from None
        jp = data["jump_params"]
        if not isinstance(jp, dict):
            raise ModelFileError("jump_params must be an object")

        try:
            model = cls._from_quadruplet(family, q, a, gaussian, jp)
        except UnsupportedModel as exc:
            raise ModelFileError(str(exc)) from None
        got = model.a
        if not math.isclose(got, a, rel_tol=1e-9, abs_tol=1e-9):
            raise ModelFileError(
                f"inconsistent linear coefficient: file has a={a}, "
                f"family parameters imply a={got}"
            )
        return model

    @classmethod
    def _from_quadruplet(cls, family, q, a, gaussian, jp: dict) -> "LevyModel":
        def expect(keys: set) -> None:
            unknown = set(jp) - keys
            if unknown:
                raise ModelFileError(f"unknown jump_params fields: {sorted(unknown)}")
            missing = keys - set(jp)
            if missing:
                raise ModelFileError(f"missing jump_params fields: {sorted(missing)}")

        if family == "KilledDrift":
            expect(set())
            return cls.killed_drift(q, a)
        if family == "BrownianDrift":
            expect(set())
            return cls.brownian_drift(q, -a, gaussian)
        if family == "SpectrallyNegativeBM":
            expect({"neg_intensity", "neg_rate"})
            ji, jr = float(jp["neg_intensity"]), float(jp["neg_rate"])
            drift = -a - (-ji * _truncated_exp_mean(jr))
            return cls.spectrally_negative_bm(q, drift, gaussian, ji, jr)
        if family == "DoubleExpJumps":
            expect({"pos_intensity", "pos_rate", "neg_intensity", "neg_rate"})
            pi, pr = float(jp["pos_intensity"]), float(jp["pos_rate"])
            ni, nr = float(jp["neg_intensity"]), float(jp["neg_rate"])
            trunc = pi * _truncated_exp_mean(pr) - ni * _truncated_exp_mean(nr)
            drift = -a - trunc
            return cls.double_exp(q, drift, gaussian, pi, pr, ni, nr)
        # NegSubordinator
        if gaussian != 0.0:
            raise ModelFileError("NegSubordinator requires Q = 0")
        expect({"kill", "drift", "jumps"})
        kill, drift = float(jp["kill"]), float(jp["drift"])
        if kill != q:
            raise ModelFileError("NegSubordinator requires q == jump_params.kill")
        jumps = None
        if jp["jumps"] is not None:
            jinner = jp["jumps"]
            if not isinstance(jinner, dict):
                raise ModelFileError("jumps must be null or an object")
            unknown = set(jinner) - {"intensity", "rate"}
            if unknown:
                raise ModelFileError(f"unknown jumps fields: {sorted(unknown)}")
            jumps = ExponentialJumps(float(jinner["intensity"]), float(jinner["rate"]))
        return cls.neg_subordinator(SubordinatorModel(kill=kill, drift=drift, jumps=jumps))

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_file(cls, path) -> "LevyModel":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFileError(f"invalid JSON in model file: {exc}") from None
        return cls.from_dict(data)

    def describe(self) -> dict:
        """Flat summary used for provenance lines in outputs."""
        d = self.to_dict()
        d["mean"] = self.mean
        d["admissible"] = self.admissible()
        return d


def model_label(model: LevyModel) -> str:
    """Compact one-line label for CSV/JSON provenance comments."""
    parts = [model.family, f"q={model.q:g}", f"drift={model.drift:g}"]
    if model.gaussian:
        parts.append(f"Q={model.gaussian:g}")
    if model.pos_jumps is not None:
        parts.append(f"pos=({model.pos_jumps.intensity:g},{model.pos_jumps.rate:g})")
    if model.neg_jumps is not None:
        parts.append(f"neg=({model.neg_jumps.intensity:g},{model.neg_jumps.rate:g})")
    return " ".join(parts)

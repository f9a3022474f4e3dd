"""Closed-form Gaussian regions for the dirty GMAC.

Three instances are covered: full CSI at both encoders (common state only),
the doubly dirty channel with a private state per encoder (partial cleaning
plus two-layer dirty-paper coding), and the limit where encoder 1 faces an
arbitrarily strong state it knows completely.

Every bound is available in two forms: scalar functions taking the
``GaussianChannel`` / ``CodingParams`` dataclasses, and ``*_arrays``
evaluators that broadcast over numpy arrays of parameters for the sweeps.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Mapping

import numpy as np

from .discrete import Theorem1Bounds, theorem1_from_mi
from .geometry import RateRegion2D, SplitRatePolytope, project_to_r1_r2
from .linear_gaussian import LinearGaussianModel, sample_conditional_entropy
from .scalar import cap, capacity_fn, gaussian_entropy, ratio

POWER_TOL = 1e-9
PROP3_FINITE_FACTOR = 1e6


class ModelPreconditionError(ValueError):
    """The channel or parameters do not match the model a formula was derived for."""


class PowerConstraintError(ModelPreconditionError):
    pass


@dataclass(frozen=True)
class GaussianChannel:
    """Powers, noise and interference variances, all linear."""

    p1: float
    p2: float
    n1: float
    n2: float
    n3: float
    q0: float = 0.0
    q1: float = 0.0
    q2: float = 0.0

    def __post_init__(self):
        for f in ("p1", "p2", "n1", "n2", "n3", "q0"):
            v = getattr(self, f)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{f} must be finite and >= 0, got {v!r}")
        for f in ("q1", "q2"):
            v = getattr(self, f)
            if math.isnan(v) or v < 0:
                raise ValueError(f"{f} must be >= 0 (or inf), got {v!r}")
        if self.n3 <= 0:
            raise ValueError("n3 must be > 0")

    @classmethod
    def from_db(cls, **kw: float) -> "GaussianChannel":
        """All fields in dB; ``-inf`` and ``inf`` map to 0 and infinity."""
        return cls(**{k: 10.0 ** (v / 10.0) for k, v in kw.items()})

    def with_(self, **kw) -> "GaussianChannel":
        return replace(self, **kw)

    def swap_users(self) -> "GaussianChannel":
        return replace(self, p1=self.p2, p2=self.p1, n1=self.n2, n2=self.n1,
                       q1=self.q2, q2=self.q1)

    def total_signal_power(self) -> float:
        """Received power of fully coherent transmission, ``(sqrt P1 + sqrt P2)^2``."""
        return (math.sqrt(self.p1) + math.sqrt(self.p2)) ** 2


@dataclass(frozen=True)
class CodingParams:
    rho1: float = 0.0
    rho2: float = 0.0
    pp1: float = 0.0
    pp2: float = 0.0
    ppp1: float = 0.0
    ppp2: float = 0.0
    eta1: float = 1.0
    eta2: float = 1.0
    a1: float = 0.0
    a2: float = 0.0
    a13: float = 0.0
    a23: float = 0.0
    a0: float = 0.0

    def with_(self, **kw) -> "CodingParams":
        return replace(self, **kw)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    def swap_users(self) -> "CodingParams":
        return CodingParams(self.rho2, self.rho1, self.pp2, self.pp1, self.ppp2, self.ppp1,
                            self.eta2, self.eta1, self.a2, self.a1, self.a23, self.a13, self.a0)

    @classmethod
    def full_power(cls, ch: GaussianChannel, rho1=0.0, rho2=0.0, f1=1.0, f2=1.0,
                   **kw) -> "CodingParams":
        """Split each encoder's whole power: ``P' = f P`` and ``P'' = (1-f) P``."""
        return cls(rho1=rho1, rho2=rho2, pp1=f1 * ch.p1, pp2=f2 * ch.p2,
                   ppp1=(1 - f1) * ch.p1, ppp2=(1 - f2) * ch.p2, **kw)


CODING_FIELDS = tuple(f.name for f in fields(CodingParams))


def check_power(ch: GaussianChannel, cp: CodingParams) -> None:
    for k, p, a, b in ((1, ch.p1, cp.pp1, cp.ppp1), (2, ch.p2, cp.pp2, cp.ppp2)):
        if a < 0 or b < 0:
            raise PowerConstraintError(f"encoder {k}: layer powers must be >= 0")
        if a + b > p * (1 + POWER_TOL) + POWER_TOL:
            raise PowerConstraintError(
                f"encoder {k}: P'{k} + P''{k} = {a + b:.6g} exceeds P{k} = {p:.6g}")
    for k, r in ((1, cp.rho1), (2, cp.rho2)):
        if not 0.0 <= r <= 1.0:
            raise PowerConstraintError(f"rho{k} = {r!r} outside [0, 1]")


def eta_min(p: float, q: float) -> float:
    """Smallest admissible cleaning fraction, ``1 - min(1, Q/P)``."""
    if p <= 0:
        return 0.0
    return 1.0 - min(1.0, q / p)


def remove_common_state(ch: GaussianChannel) -> GaussianChannel:
    """Drop the common state.

    With the full-CSI coefficient pattern the common state costs nothing, so
    the private-state analysis proceeds on the same channel with ``q0 = 0``.
    """
    return replace(ch, q0=0.0)


# ---------------------------------------------------------------------------
# Full CSI at both encoders

def _coherent_power(p1, p2, rho1, rho2, pp1, pp2, ppp1, ppp2):
    """Received signal power ``(sqrt(r1 P1)+sqrt(r2 P2))^2 + sum rbar (P'+P'')``.

    Equals ``P1+P2+2 sqrt(r1 r2 P1 P2)`` when each encoder spends its full power.
    """
    s = np.sqrt(rho1 * p1) + np.sqrt(rho2 * p2)
    return s * s + (1 - rho1) * (pp1 + ppp1) + (1 - rho2) * (pp2 + ppp2)


def _require_full_csit(ch: GaussianChannel) -> None:
    if ch.q1 != 0 or ch.q2 != 0:
        raise ModelPreconditionError(
            "full-CSI model requires q1 = q2 = 0; use prop2_region for private states")


def optimal_dpc_coeffs(ch: GaussianChannel, cp: CodingParams) -> CodingParams:
    """Costa coefficients that make every auxiliary's estimation error of the
    common state orthogonal to ``X1 + X2 + Z3``.

    Computed as covariance over variance of the received signal, which is the
    textbook closed form whenever ``P'k + P''k = Pk``.
    """
    _require_full_csit(ch)
    check_power(ch, cp)
    s = math.sqrt(cp.rho1 * ch.p1) + math.sqrt(cp.rho2 * ch.p2)
    d = _coherent_power(ch.p1, ch.p2, cp.rho1, cp.rho2, cp.pp1, cp.pp2, cp.ppp1, cp.ppp2) + ch.n3
    rb1, rb2 = 1 - cp.rho1, 1 - cp.rho2
    return replace(
        cp,
        a0=s / d,
        a1=(math.sqrt(cp.rho1 * ch.p1) * s + rb1 * cp.pp1) / d,
        a2=(math.sqrt(cp.rho2 * ch.p2) * s + rb2 * cp.pp2) / d,
        a13=rb1 * cp.ppp1 / d,
        a23=rb2 * cp.ppp2 / d,
    )


def printed_dpc_coeffs(ch: GaussianChannel, cp: CodingParams) -> dict[str, float]:
    """The closed form with denominator ``P1+P2+2 sqrt(r1 r2 P1 P2)+N3`` (full power)."""
    d = ch.p1 + ch.p2 + 2 * math.sqrt(cp.rho1 * cp.rho2 * ch.p1 * ch.p2) + ch.n3
    s = math.sqrt(cp.rho1 * ch.p1) + math.sqrt(cp.rho2 * ch.p2)
    return {
        "a0": s / d,
        "a1": (math.sqrt(cp.rho1 * ch.p1) * s + (1 - cp.rho1) * cp.pp1) / d,
        "a2": (math.sqrt(cp.rho2 * ch.p2) * s + (1 - cp.rho2) * cp.pp2) / d,
        "a13": (1 - cp.rho1) * cp.ppp1 / d,
        "a23": (1 - cp.rho2) * cp.ppp2 / d,
    }


def dpc_orthogonality_residuals(ch: GaussianChannel, cp: CodingParams) -> tuple[float, ...]:
    """``E[(W - a S0 - est) (X1+X2+Z3)]`` per auxiliary, in the order U, V1, V2, V13, V23.

    Each auxiliary is written ``W = L + a S0`` with ``L`` its codeword part;
    the error of estimating ``S0``'s contribution from ``T = X1+X2+Z3`` is
    ``L - a T``, so the residual is ``E[L T] - a E[T^2]``.
    """
    r1p, r2p = math.sqrt(cp.rho1 * ch.p1), math.sqrt(cp.rho2 * ch.p2)
    s = r1p + r2p
    et2 = _coherent_power(ch.p1, ch.p2, cp.rho1, cp.rho2, cp.pp1, cp.pp2, cp.ppp1, cp.ppp2) + ch.n3
    rb1, rb2 = 1 - cp.rho1, 1 - cp.rho2
    return (
        s - cp.a0 * et2,
        r1p * s + rb1 * cp.pp1 - cp.a1 * et2,
        r2p * s + rb2 * cp.pp2 - cp.a2 * et2,
        rb1 * cp.ppp1 - cp.a13 * et2,
        rb2 * cp.ppp2 - cp.a23 * et2,
    )


def prop1_terms_arrays(p1, p2, n1, n2, n3, rho1, rho2, pp1, pp2, ppp1, ppp2):
    """The four right-hand sides ``(r1, r2, s_split, s_coherent)`` (vectorised)."""
    rb1, rb2 = 1 - np.asarray(rho1, float), 1 - np.asarray(rho2, float)
    a1 = cap(ratio(rb1 * pp1, rb1 * ppp1 + n2))
    a2 = cap(ratio(rb2 * pp2, rb2 * ppp2 + n1))
    r1 = a1 + cap(ratio(rb1 * ppp1, n3))
    r2 = a2 + cap(ratio(rb2 * ppp2, n3))
    s3 = a1 + a2 + cap(ratio(rb1 * ppp1 + rb2 * ppp2, n3))
    s4 = cap(_coherent_power(p1, p2, rho1, rho2, pp1, pp2, ppp1, ppp2) / n3)
    return r1, r2, s3, s4


def prop1_pentagon_arrays(ch: GaussianChannel, rho1, rho2, pp1, pp2, ppp1, ppp2):
    r1, r2, s3, s4 = prop1_terms_arrays(ch.p1, ch.p2, ch.n1, ch.n2, ch.n3,
                                        rho1, rho2, pp1, pp2, ppp1, ppp2)
    return r1, r2, np.minimum(s3, s4)


def prop1_region(ch: GaussianChannel, cp: CodingParams) -> SplitRatePolytope:
    """Full-CSI region for one parameter choice.

    Already in total-rate form, so it is emitted with ``R12 = R1`` and
    ``R23 = R2`` and the other two splits pinned to zero. ``ch.q0`` is not
    read: the common state is removed completely.
    """
    _require_full_csit(ch)
    check_power(ch, cp)
    r1, r2, s3, s4 = (max(0.0, float(v)) for v in prop1_terms_arrays(
        ch.p1, ch.p2, ch.n1, ch.n2, ch.n3, cp.rho1, cp.rho2, cp.pp1, cp.pp2, cp.ppp1, cp.ppp2))
    return SplitRatePolytope((
        ((1, 0, 0, 0), r1),
        ((0, 0, 0, 1), r2),
        ((1, 0, 0, 1), s3),
        ((1, 0, 0, 1), s4),
        ((0, 1, 0, 0), 0.0),
        ((0, 0, 1, 0), 0.0),
    ))


def full_cooperation_sum_rate(ch: GaussianChannel) -> float:
    """Coherent-transmission bound ``C((P1+P2+2 sqrt(P1 P2))/N3)``."""
    return capacity_fn(ch.total_signal_power() / ch.n3)


# ---------------------------------------------------------------------------
# Doubly dirty channel

@dataclass(frozen=True)
class Prop2Terms:
    q1e: float
    q2e: float
    q1e_hat: float
    q2e_hat: float
    q1e_dhat: float
    q2e_dhat: float
    c12: float
    c21: float
    c13: float
    c23: float
    delta1: float
    delta2: float
    d1_minus: float
    d2_minus: float
    cap_delta1: float
    cap_delta2: float
    cap_delta3: float
    cap_delta_minus: float
    p1e_prime: float
    p2e_prime: float
    p1e_dprime: float
    p2e_dprime: float


def _inv_term(a, p):
    """``a^2 / p`` with ``0 -> 0`` when ``a = 0`` and ``inf`` when ``p = 0 < a``."""
    return ratio(np.square(a), p)


def _residual(q, *terms):
    """MMSE residual variance ``1/(1/q + sum terms)``; zero when ``q = 0``."""
    with np.errstate(divide="ignore"):
        inv_q = np.where(q > 0, 1.0 / np.where(q > 0, q, 1.0), np.inf)
        return 1.0 / (inv_q + sum(terms))


def prop2_arrays(p1, p2, n1, n2, n3, q1, q2, rho1, rho2, pp1, pp2, ppp1, ppp2,
                 eta1, eta2, a1, a2, a13, a23, zero_corrections=False) -> dict[str, np.ndarray]:
    """All doubly-dirty quantities and the six clamped bounds (vectorised).

    Residual variances use the information form ``1/(1/Q + a^2/P' + ...)``,
    which equals the ratio-of-products form wherever that is defined and
    supplies its limits when a layer carries no power.
    ``zero_corrections`` drops the binning corrections, as the four-case
    decomposition prescribes.
    """
    A = lambda x: np.asarray(x, dtype=float)
    rho1, rho2, eta1, eta2 = A(rho1), A(rho2), A(eta1), A(eta2)
    a1, a2, a13, a23 = A(a1), A(a2), A(a13), A(a23)
    t = {}
    t["p1e_prime"] = eta1 * (1 - rho1) * pp1
    t["p2e_prime"] = eta2 * (1 - rho2) * pp2
    t["p1e_dprime"] = eta1 * (1 - rho1) * ppp1
    t["p2e_dprime"] = eta2 * (1 - rho2) * ppp2
    for k, q, p, eta in ((1, q1, p1, eta1), (2, q2, p2, eta2)):
        clean = np.maximum(1 - eta, 0.0) * p
        t[f"q{k}e"] = np.square(np.sqrt(q) - np.sqrt(clean))
    for k, a, ak3 in ((1, a1, a13), (2, a2, a23)):
        qe, pe1, pe2 = t[f"q{k}e"], t[f"p{k}e_prime"], t[f"p{k}e_dprime"]
        r_hat = _residual(qe, _inv_term(a, pe1))
        r_dhat = _residual(qe, _inv_term(a, pe1), _inv_term(ak3, pe2))
        t[f"r{k}_hat"], t[f"r{k}_dhat"] = r_hat, r_dhat   # MMSE of beta_k S_k
        t[f"q{k}e_hat"] = np.square(1 - a) * r_hat
        t[f"q{k}e_dhat"] = np.square(1 - a - ak3) * r_dhat
        t[f"c{k}{3 - k}"] = cap(ratio(np.square(a) * qe, pe1))
        # (1-a)^2 cancels against q_hat; written via r_hat to avoid 0/0 at a = 1
        t[f"c{k}3"] = cap(ratio(np.square(ak3) * r_hat, pe2))
    P1e, P2e = t["p1e_prime"], t["p2e_prime"]
    D1e, D2e = t["p1e_dprime"], t["p2e_dprime"]
    Q1, Q2 = t["q1e"], t["q2e"]
    H1, H2 = t["q1e_hat"], t["q2e_hat"]
    W1, W2 = t["q1e_dhat"], t["q2e_dhat"]
    c12, c21, c13, c23 = t["c12"], t["c21"], t["c13"], t["c23"]
    fresh1 = P1e + Q1 - H1
    fresh2 = P2e + Q2 - H2
    t["delta1"] = cap(ratio(fresh1, D1e + H1 + W2 + n3)) - c12
    t["delta2"] = cap(ratio(fresh2, D2e + H2 + W1 + n3)) - c21
    den = D1e + D2e + H1 + H2 + n3
    t["cap_delta1"] = cap(ratio(fresh1, den)) - c12
    t["cap_delta2"] = cap(ratio(fresh2, den)) - c21
    t["cap_delta3"] = cap(ratio(fresh1 + fresh2, den)) - c12 - c21
    if zero_corrections:
        zero = np.zeros(np.broadcast(t["delta1"], t["cap_delta3"]).shape)
        t["d1_minus"] = t["d2_minus"] = t["cap_delta_minus"] = zero
    else:
        t["d1_minus"] = np.minimum(0.0, t["delta1"])
        t["d2_minus"] = np.minimum(0.0, t["delta2"])
        t["cap_delta_minus"] = np.minimum(np.minimum(0.0, t["cap_delta1"]),
                                          np.minimum(t["cap_delta2"], t["cap_delta3"]))
    noise3 = W1 + W2 + n3
    coherent = np.square(np.sqrt(eta1 * rho1 * p1) + np.sqrt(eta2 * rho2 * p2))
    signal = coherent + P1e + D1e + P2e + D2e
    b = {
        "b12": cap(ratio(fresh1, D1e + H1 + n2)) - c12,
        "b21": cap(ratio(fresh2, D2e + H2 + n1)) - c21,
        "b13": cap(ratio(D1e + H1 - W1, noise3)) - c13 + t["d1_minus"],
        "b23": cap(ratio(D2e + H2 - W2, noise3)) - c23 + t["d2_minus"],
        "b13_23": cap(ratio(D1e + D2e + H1 - W1 + H2 - W2, noise3)) - c13 - c23
        + t["cap_delta_minus"],
        "b_sum": cap(ratio(signal + Q1 - W1 + Q2 - W2, noise3)) - c12 - c21 - c13 - c23,
    }
    for k, v in b.items():
        t[k] = np.maximum(0.0, np.nan_to_num(v, nan=0.0, neginf=0.0))
    return t


BOUND_NAMES = ("b12", "b21", "b13", "b23", "b13_23", "b_sum")


def _check_prop2(ch: GaussianChannel, cp: CodingParams) -> None:
    if ch.q0 != 0:
        raise ModelPreconditionError(
            "doubly dirty formulas assume q0 = 0; apply remove_common_state first")
    if math.isinf(ch.q1) or math.isinf(ch.q2):
        raise ModelPreconditionError("infinite private state: use prop3_region")
    check_power(ch, cp)
    for k, p, q, eta in ((1, ch.p1, ch.q1, cp.eta1), (2, ch.p2, ch.q2, cp.eta2)):
        lo = eta_min(p, q)
        if not lo - POWER_TOL <= eta <= 1.0 + POWER_TOL:
            raise ModelPreconditionError(f"eta{k} = {eta!r} outside [{lo:.6g}, 1]")
    for name in ("a1", "a2", "a13", "a23"):
        if getattr(cp, name) < 0:
            raise ModelPreconditionError(f"{name} must be >= 0")


def _prop2_dict(ch: GaussianChannel, cp: CodingParams, zero_corrections=False):
    _check_prop2(ch, cp)
    return prop2_arrays(ch.p1, ch.p2, ch.n1, ch.n2, ch.n3, ch.q1, ch.q2,
                        cp.rho1, cp.rho2, cp.pp1, cp.pp2, cp.ppp1, cp.ppp2,
                        cp.eta1, cp.eta2, cp.a1, cp.a2, cp.a13, cp.a23,
                        zero_corrections=zero_corrections)


def prop2_terms(ch: GaussianChannel, cp: CodingParams) -> Prop2Terms:
    t = _prop2_dict(ch, cp)
    return Prop2Terms(**{f.name: float(t[f.name]) for f in fields(Prop2Terms)})


def prop2_bounds(ch: GaussianChannel, cp: CodingParams,
                 zero_corrections: bool = False) -> Theorem1Bounds:
    t = _prop2_dict(ch, cp, zero_corrections)
    return Theorem1Bounds(*(float(t[k]) for k in BOUND_NAMES),
                          float(t["d1_minus"]), float(t["d2_minus"]),
                          float(t["cap_delta_minus"]))


def prop2_region(ch: GaussianChannel, cp: CodingParams,
                 zero_corrections: bool = False) -> SplitRatePolytope:
    return prop2_bounds(ch, cp, zero_corrections).polytope()


# ---------------------------------------------------------------------------
# Encoder 1 fully informed, state power unbounded

def prop3_arrays(p1, p2, n1, n3, rho1, rho2, a13, pp2, ppp2):
    """``(R2 bound, sum bound)``, clamped (vectorised)."""
    rb1, rb2 = 1 - np.asarray(rho1, float), 1 - np.asarray(rho2, float)
    a13 = np.asarray(a13, float)
    x = rb1 * p1
    with np.errstate(invalid="ignore"):
        # residual of the state-carrying layer; inf * 0 when that layer is off
        leak = ratio(np.square(1 - a13), np.square(a13)) * x
    leak = np.where(x == 0, 0.0, leak)
    r2 = cap(ratio(rb2 * pp2, rb2 * ppp2 + n1)) + cap(ratio(rb2 * ppp2, leak + n3))
    s = cap(ratio(x, np.square(1 - a13) * x + np.square(a13) * n3) - 1)
    s = np.where(x == 0, 0.0, s)
    clean = lambda v: np.maximum(0.0, np.nan_to_num(v, nan=0.0, neginf=0.0))
    return clean(r2), clean(s)


def prop3_region(ch: GaussianChannel, cp: CodingParams) -> SplitRatePolytope:
    """Region for ``q0 = q2 = 0`` and ``q1`` infinite (flagged by ``q1 = inf``).

    Encoder 2's layers must satisfy ``P'2 + P''2 <= P2``. Only ``rho1``,
    ``rho2``, ``a13``, ``pp2`` and ``ppp2`` are read.
    """
    if not math.isinf(ch.q1):
        raise ModelPreconditionError(
            "prop3 needs q1 = inf; for a finite q1 use prop2_region")
    if ch.q0 != 0 or ch.q2 != 0:
        raise ModelPreconditionError("prop3 needs q0 = q2 = 0")
    check_power(replace(ch, q1=0.0), replace(cp, pp1=0.0, ppp1=0.0))
    if cp.a13 < 0:
        raise ModelPreconditionError("a13 must be >= 0")
    r2, s = prop3_arrays(ch.p1, ch.p2, ch.n1, ch.n3, cp.rho1, cp.rho2, cp.a13, cp.pp2, cp.ppp2)
    return SplitRatePolytope((((0, 0, 1, 1), float(r2)), ((1, 1, 1, 1), float(s))))


def prop3_substitution(ch: GaussianChannel, cp: CodingParams,
                       factor: float = PROP3_FINITE_FACTOR) -> tuple[GaussianChannel, CodingParams]:
    """Finite-state doubly dirty instance matching the unbounded-state model."""
    fch = replace(ch, q0=0.0, q1=factor * ch.p1, q2=0.0)
    fcp = replace(cp, pp1=0.0, ppp1=ch.p1, a1=0.0, eta1=1.0, a2=0.0, a23=0.0, eta2=1.0)
    return fch, fcp


def prop3_via_prop2(ch: GaussianChannel, cp: CodingParams,
                    factor: float = PROP3_FINITE_FACTOR) -> SplitRatePolytope:
    fch, fcp = prop3_substitution(ch, cp, factor)
    return prop2_region(fch, fcp, zero_corrections=True)


def strong_state_max_sum(ch: GaussianChannel) -> float:
    return capacity_fn(ch.p1 / ch.n3)


def strong_state_alpha_star(ch: GaussianChannel) -> float:
    return 2 * ch.p1 / (ch.p1 + ch.p2 + ch.n3)


def strong_state_max_r2(ch: GaussianChannel) -> tuple[float, str]:
    """Closed-form maximum of ``R2`` and the branch that produced it."""
    if ch.n1 <= ch.n3:
        return min(capacity_fn(ch.p2 / ch.n1), capacity_fn(ch.p1 / ch.n3)), "n1<=n3"
    if ch.p1 >= ch.p2 + ch.n3:
        return capacity_fn(ch.p2 / ch.n3), "n1>=n3,p1>=p2+n3"
    a = strong_state_alpha_star(ch)
    return capacity_fn(ch.p2 / (((1 - a) / a) ** 2 * ch.p1 + ch.n3)), "n1>=n3,alpha*"


# ---------------------------------------------------------------------------
# Linear-Gaussian generative models (oracles for the closed forms)

def full_csit_model(ch: GaussianChannel, cp: CodingParams) -> LinearGaussianModel:
    rb1, rb2 = 1 - cp.rho1, 1 - cp.rho2
    src = {"Xu": 1.0, "Xp1": rb1 * cp.pp1, "Xpp1": rb1 * cp.ppp1,
           "Xp2": rb2 * cp.pp2, "Xpp2": rb2 * cp.ppp2, "S0": ch.q0,
           "Z1": ch.n1, "Z2": ch.n2, "Z3": ch.n3}
    c1, c2 = math.sqrt(cp.rho1 * ch.p1), math.sqrt(cp.rho2 * ch.p2)
    x1 = {"Xu": c1, "Xp1": 1.0, "Xpp1": 1.0}
    x2 = {"Xu": c2, "Xp2": 1.0, "Xpp2": 1.0}
    y = lambda z: _add(x1, x2, {"S0": 1.0, z: 1.0})
    var = {
        "S0": {"S0": 1.0},
        "U": {"Xu": 1.0, "S0": cp.a0},
        "V1": {"Xu": c1, "Xp1": 1.0, "S0": cp.a1},
        "V2": {"Xu": c2, "Xp2": 1.0, "S0": cp.a2},
        "V13": {"Xpp1": 1.0, "S0": cp.a13},
        "V23": {"Xpp2": 1.0, "S0": cp.a23},
        "X1": x1, "X2": x2, "Y1": y("Z1"), "Y2": y("Z2"), "Y3": y("Z3"),
    }
    return LinearGaussianModel.build(src, var)


def doubly_dirty_model(ch: GaussianChannel, cp: CodingParams) -> LinearGaussianModel:
    t = _prop2_dict(ch, cp)
    src = {"U": 1.0, "Xp1": float(t["p1e_prime"]), "Xpp1": float(t["p1e_dprime"]),
           "Xp2": float(t["p2e_prime"]), "Xpp2": float(t["p2e_dprime"]),
           "S1": ch.q1, "S2": ch.q2, "Z1": ch.n1, "Z2": ch.n2, "Z3": ch.n3}
    var = {"U": {"U": 1.0}, "S1": {"S1": 1.0}, "S2": {"S2": 1.0}}
    for k, eta, rho, p, q, a, ak3 in ((1, cp.eta1, cp.rho1, ch.p1, ch.q1, cp.a1, cp.a13),
                                      (2, cp.eta2, cp.rho2, ch.p2, ch.q2, cp.a2, cp.a23)):
        beta = 1.0 - math.sqrt((1 - eta) * p / q) if q > 0 else 1.0
        c = math.sqrt(eta * rho * p)
        var[f"V{k}"] = {"U": c, f"Xp{k}": 1.0, f"S{k}": a * beta}
        var[f"V{k}3"] = {f"Xpp{k}": 1.0, f"S{k}": ak3 * beta}
        var[f"X{k}"] = {"U": c, f"Xp{k}": 1.0, f"Xpp{k}": 1.0, f"S{k}": beta - 1.0}
    for j in (1, 2, 3):
        var[f"Y{j}"] = _add(var["X1"], var["X2"], {"S1": 1.0, "S2": 1.0, f"Z{j}": 1.0})
    return LinearGaussianModel.build(src, var)


def _add(*terms: Mapping[str, float]) -> dict[str, float]:
    out: dict[str, float] = {}
    for t in terms:
        for k, v in t.items():
            out[k] = out.get(k, 0.0) + v
    return out


def theorem1_bounds_gaussian(model: LinearGaussianModel) -> Theorem1Bounds:
    """Evaluate the general bounds on a Gaussian model from its covariance."""
    return theorem1_from_mi(model.mutual_information)


def y3_residual_entropy(ch: GaussianChannel, cp: CodingParams) -> float:
    """``h(Y3 | U, V1, V2, V23)`` for the doubly dirty model."""
    t = _prop2_dict(ch, cp)
    return gaussian_entropy(float(t["p1e_dprime"] + t["q1e_hat"] + t["q2e_dhat"]) + ch.n3)


def mc_entropy_oracle(ch: GaussianChannel, cp: CodingParams, which: str = "Y3|U,V1,V2,V23",
                      samples: int = 1_000_000, seed: int = 0) -> float:
    """Monte-Carlo estimate of a conditional differential entropy.

    Draws ``samples`` joint realisations of the doubly dirty model, forms
    their covariance and takes the Schur complement of the conditioning
    block. Deterministic for a given ``seed``.
    """
    if samples < 100_000:
        raise ValueError("mc_entropy_oracle needs at least 1e5 samples")
    target, _, given = which.partition("|")
    names = [target.strip()] + [g.strip() for g in given.split(",") if g.strip()]
    model = doubly_dirty_model(ch, cp)
    unknown = [n for n in names if n not in model.variables]
    if unknown:
        raise ValueError(f"unknown variables {unknown} in selector {which!r}")
    rng = np.random.default_rng(seed)
    data = model.sample(names, samples, rng)
    return sample_conditional_entropy(data, names)


# ---------------------------------------------------------------------------
# Baselines

BASELINE_SCENARIOS = ("gmac-csit", "mac-csit", "gmac-no-csit", "mac-no-csit")


def mac_pentagon(ch: GaussianChannel, extra_noise: float = 0.0) -> RateRegion2D:
    n3 = ch.n3 + extra_noise
    return RateRegion2D.pentagon(capacity_fn(ch.p1 / n3), capacity_fn(ch.p2 / n3),
                                 capacity_fn((ch.p1 + ch.p2) / n3))


def no_csit_channel(ch: GaussianChannel) -> GaussianChannel:
    """Interference treated as noise on every link, including the feedback links."""
    return replace(ch, n1=ch.n1 + ch.q0, n2=ch.n2 + ch.q0, n3=ch.n3 + ch.q0, q0=0.0)


def baseline_regions(ch: GaussianChannel, scenarios=BASELINE_SCENARIOS, spec=None,
                     executor=None) -> dict[str, RateRegion2D]:
    """Regions of the four comparison scenarios for the full-CSI channel.

    The cooperative CSIT sweep is seeded with the parameters that won the
    no-CSIT sweep, so the sampled regions keep their true nesting.
    """
    from . import sweep  # sweep imports this module

    unknown = [s for s in scenarios if s not in BASELINE_SCENARIOS]
    if unknown:
        raise ValueError(f"unknown baseline scenario(s) {unknown}; "
                         f"choose from {list(BASELINE_SCENARIOS)}")
    spec = spec or sweep.SweepSpec()
    base = replace(ch, q1=0.0, q2=0.0)
    out: dict[str, RateRegion2D] = {}
    if "mac-csit" in scenarios:
        out["mac-csit"] = mac_pentagon(base)
    if "mac-no-csit" in scenarios:
        out["mac-no-csit"] = mac_pentagon(base, base.q0)
    seeds = ()
    if "gmac-no-csit" in scenarios or "gmac-csit" in scenarios:
        nc = sweep.trace(no_csit_channel(base), spec, "prop1", executor=executor)
        seeds = nc.winner_vectors()
        if "gmac-no-csit" in scenarios:
            out["gmac-no-csit"] = nc.region
    if "gmac-csit" in scenarios:
        out["gmac-csit"] = sweep.trace(base, spec, "prop1", executor=executor,
                                       seed_vectors=seeds).region
    return {s: out[s] for s in scenarios}

"""Finite-alphabet evaluation of the GMAC achievable region.

Joint distributions live on the fixed variable order ``VARIABLES``. A
distribution can be given densely or as a product of named conditional
components such as ``"V13,X1|U,V1,S0,S1"``; variables that no component
mentions are singletons (an empty auxiliary is a constant).
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .geometry import RateRegion2D, SplitRatePolytope, project_to_r1_r2

VARIABLES = ("S0", "S1", "S2", "U", "V1", "V2", "V13", "V23",
             "X1", "X2", "Y1", "Y2", "Y3")
_INDEX = {v: i for i, v in enumerate(VARIABLES)}
_LETTERS = dict(zip(VARIABLES, string.ascii_letters))

# The nine factors of the admissible pmf, outputs | conditioning.
FACTORS = (
    "S0",
    "S1|S0",
    "S2|S0",
    "U|S0",
    "V1|S0,S1,U",
    "V2|S0,S2,U",
    "V13,X1|U,V1,S0,S1",
    "V23,X2|U,V2,S0,S2",
    "Y1,Y2,Y3|X1,X2,S0,S1,S2",
)

DEFAULT_MAX_ALPHABET = 4
PROB_EPS = 1e-15
SUM_TOL = 1e-12
FACTOR_TOL = 1e-10
MARKOV_TOL = 1e-9

# relabelling users 1 <-> 2
USER_SWAP = {"S0": "S0", "S1": "S2", "S2": "S1", "U": "U", "V1": "V2", "V2": "V1",
             "V13": "V23", "V23": "V13", "X1": "X2", "X2": "X1",
             "Y1": "Y2", "Y2": "Y1", "Y3": "Y3"}


class FactorizationError(ValueError):
    def __init__(self, violations: Sequence[str]):
        super().__init__("pmf is not admissible: " + "; ".join(violations))
        self.violations = list(violations)


def parse_component(key: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """``"V13,X1|U,V1"`` -> ``(("V13", "X1"), ("U", "V1"))``."""
    outs, _, conds = key.partition("|")
    split = lambda s: tuple(t.strip() for t in s.split(",") if t.strip())
    outs, conds = split(outs), split(conds)
    for name in outs + conds:
        if name not in _INDEX:
            raise ValueError(f"unknown variable {name!r} in component {key!r}")
    if set(outs) & set(conds) or len(set(outs + conds)) != len(outs + conds):
        raise ValueError(f"component {key!r} repeats a variable")
    return outs, conds


def _as_names(names: Iterable[str] | str) -> tuple[str, ...]:
    if isinstance(names, str):
        names = [n for n in names.replace(" ", ",").split(",") if n]
    names = tuple(names)
    for n in names:
        if n not in _INDEX:
            raise ValueError(f"unknown variable {n!r}")
    return names


def _entropy(p: np.ndarray) -> float:
    p = p[p > PROB_EPS]
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Probability tensor over ``VARIABLES`` (axis order fixed)."""

    tensor: np.ndarray
    factors: Mapping[str, np.ndarray] | None = None
    max_alphabet: int = DEFAULT_MAX_ALPHABET
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        t = np.array(self.tensor, dtype=float)
        if t.ndim != len(VARIABLES):
            raise ValueError(f"tensor must have {len(VARIABLES)} axes, got {t.ndim}")
        too_big = [v for v, n in zip(VARIABLES, t.shape) if n > self.max_alphabet]
        if too_big:
            raise ValueError(f"alphabet larger than {self.max_alphabet} for {too_big}; "
                             "raise max_alphabet explicitly to allow it")
        if np.any(t < -PROB_EPS) or not np.all(np.isfinite(t)):
            raise ValueError("probabilities must be finite and nonnegative")
        total = t.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        t = np.where(t < PROB_EPS, 0.0, t)
        t.setflags(write=False)
        object.__setattr__(self, "tensor", t)

    @property
    def sizes(self) -> dict[str, int]:
        return dict(zip(VARIABLES, self.tensor.shape))

    @classmethod
    def from_dense(cls, sizes: Mapping[str, int] | Sequence[int], probabilities,
                   **kw) -> "JointPmf":
        if isinstance(sizes, Mapping):
            shape = tuple(int(sizes.get(v, 1)) for v in VARIABLES)
        else:
            shape = tuple(int(s) for s in sizes)
        return cls(np.asarray(probabilities, dtype=float).reshape(shape), **kw)

    @classmethod
    def from_components(cls, components: Mapping[str, np.ndarray],
                        identities: Iterable[tuple[str, str]] = (),
                        sizes: Mapping[str, int] | None = None, **kw) -> "JointPmf":
        """Product of conditional components and deterministic copies.

        ``components`` maps keys like ``"V1|S0,S1,U"`` to arrays whose axes
        follow the key (outputs first). ``identities`` holds ``(a, b)`` pairs
        meaning variable ``a`` is a copy of ``b``.
        """
        sizes = dict(sizes or {})
        operands, subs = [], []
        for key, arr in components.items():
            outs, conds = parse_component(key)
            arr = np.asarray(arr, dtype=float)
            names = outs + conds
            if arr.ndim != len(names):
                raise ValueError(f"component {key!r} needs {len(names)} axes, got {arr.ndim}")
            for n, s in zip(names, arr.shape):
                if sizes.setdefault(n, s) != s:
                    raise ValueError(f"inconsistent alphabet size for {n}: {sizes[n]} vs {s}")
            sums = arr.sum(axis=tuple(range(len(outs))))
            if not np.allclose(sums, 1.0, atol=1e-12):
                raise ValueError(f"component {key!r} is not a conditional pmf")
            operands.append(arr)
            subs.append("".join(_LETTERS[n] for n in names))
        for a, b in identities:
            n = sizes.get(b, sizes.get(a))
            if n is None:
                raise ValueError(f"cannot infer alphabet size for identity {a}={b}")
            sizes.setdefault(a, n)
            sizes.setdefault(b, n)
            operands.append(np.eye(n))
            subs.append(_LETTERS[a] + _LETTERS[b])
        shape = tuple(sizes.get(v, 1) for v in VARIABLES)
        tensor = _contract(operands, subs).reshape(shape)
        factors = {k: np.asarray(a, dtype=float) for k, a in components.items()}
        factors.update({f"{a}|{b}": np.eye(sizes[a]) for a, b in identities})
        return cls(np.array(tensor), factors=factors, **kw)

    # -- marginals -------------------------------------------------------

    def marginal(self, names: Iterable[str]) -> np.ndarray:
        names = _as_names(names)
        key = frozenset(names)
        if key not in self._cache:
            keep = sorted(_INDEX[n] for n in key)
            drop = tuple(i for i in range(len(VARIABLES)) if i not in keep)
            self._cache[key] = self.tensor.sum(axis=drop)
        m = self._cache[key]
        # cached array is in VARIABLES order; reorder to the requested order
        order = sorted(key, key=_INDEX.get)
        return np.transpose(m, [order.index(n) for n in names]) if names else m

    def entropy(self, names: Iterable[str]) -> float:
        names = _as_names(names)
        key = ("H", frozenset(names))
        if key not in self._cache:
            self._cache[key] = _entropy(self.marginal(names)) if names else 0.0
        return self._cache[key]

    def conditional(self, outs: Sequence[str], conds: Sequence[str]) -> np.ndarray:
        """``p(outs | conds)`` with axes ``outs + conds``; zero where ``p(conds)=0``."""
        joint = self.marginal(tuple(outs) + tuple(conds))
        base = self.marginal(conds) if conds else np.array(1.0)
        base = base.reshape((1,) * len(outs) + base.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(base > 0, joint / np.where(base > 0, base, 1.0), 0.0)

    def relabel(self, variable: str, permutation: Sequence[int]) -> "JointPmf":
        t = np.take(self.tensor, list(permutation), axis=_INDEX[variable])
        return JointPmf(t, max_alphabet=self.max_alphabet)

    def swap_users(self) -> "JointPmf":
        t = np.transpose(self.tensor, [_INDEX[USER_SWAP[v]] for v in VARIABLES])
        return JointPmf(t, max_alphabet=self.max_alphabet)


def mutual_information(p: JointPmf, left, right, given=()) -> float:
    """``I(left; right | given)`` in bits from entropies of marginals."""
    left, right, given = _as_names(left), _as_names(right), _as_names(given)
    sets = [set(left), set(right), set(given)]
    if (sets[0] & sets[1]) or (sets[0] & sets[2]) or (sets[1] & sets[2]):
        raise ValueError("variable sets must be disjoint")
    if not left or not right:
        return 0.0
    val = (p.entropy(left + given) + p.entropy(right + given)
           - p.entropy(left + right + given) - p.entropy(given))
    return max(val, 0.0)


def factorize(p: JointPmf) -> dict[str, np.ndarray]:
    """The nine admissible factors, each read off as a conditional of ``p``."""
    return {key: p.conditional(*parse_component(key)) for key in FACTORS}


def _rebuild(factors: Mapping[str, np.ndarray], sizes: Mapping[str, int]) -> np.ndarray:
    operands, subs = [], []
    for key, arr in factors.items():
        outs, conds = parse_component(key)
        operands.append(arr)
        subs.append("".join(_LETTERS[n] for n in outs + conds))
    return _contract(operands, subs).reshape(tuple(sizes[v] for v in VARIABLES))


def _contract(operands: list, subs: list[str]) -> np.ndarray:
    """Product of named arrays laid out in ``VARIABLES`` order (absent axes dropped)."""
    if not operands:
        return np.ones(())
    present = set("".join(subs))
    out = "".join(_LETTERS[v] for v in VARIABLES if _LETTERS[v] in present)
    return np.einsum(",".join(subs) + "->" + out, *operands, optimize=True)


def validate_factorization(p: JointPmf) -> list[str]:
    """Violations of the admissible factorization and its two Markov chains.

    Returns an empty list for an admissible pmf; nothing is raised.
    """
    violations = []
    dev = float(np.max(np.abs(_rebuild(factorize(p), p.sizes) - p.tensor)))
    if dev > FACTOR_TOL:
        violations.append(
            "factorization: pmf is not a product of the nine admissible factors "
            f"(max deviation {dev:.3g})")
    if p.factors is not None:
        try:
            dev = float(np.max(np.abs(_rebuild(p.factors, p.sizes) - p.tensor)))
        except ValueError as exc:
            violations.append(f"factor metadata unusable: {exc}")
        else:
            if dev > FACTOR_TOL:
                violations.append(f"factor metadata does not reproduce the tensor "
                                  f"(max deviation {dev:.3g})")
    i = mutual_information(p, "S1,S2", "U", "S0")
    if i > MARKOV_TOL:
        violations.append(f"Markov chain S1S2 - S0 - U violated (I = {i:.3g} bits)")
    i = mutual_information(p, "V1,V13", "V2,V23", "S0,U")
    if i > MARKOV_TOL:
        violations.append(f"Markov chain V1V13 - S0U - V2V23 violated (I = {i:.3g} bits)")
    return violations


# ---------------------------------------------------------------------------
# Theorem-1 bounds

MIFunction = Callable[[Sequence[str], Sequence[str], Sequence[str]], float]


@dataclass(frozen=True)
class Theorem1Bounds:
    b12: float
    b21: float
    b13: float
    b23: float
    b13_23: float
    b_sum: float
    delta1_minus: float
    delta2_minus: float
    cap_delta_minus: float
    raw: Mapping[str, float] = field(default_factory=dict, compare=False)

    def as_tuple(self) -> tuple[float, ...]:
        return (self.b12, self.b21, self.b13, self.b23, self.b13_23, self.b_sum)

    def polytope(self, empty_messages: Iterable[str] = ()) -> SplitRatePolytope:
        p = SplitRatePolytope.theorem1(*self.as_tuple())
        zero = {"R12": (1, 0, 0, 0), "R13": (0, 1, 0, 0),
                "R21": (0, 0, 1, 0), "R23": (0, 0, 0, 1)}
        extra = tuple((zero[m], 0.0) for m in empty_messages)
        return SplitRatePolytope(p.constraints + extra)

    def region(self, empty_messages: Iterable[str] = ()) -> RateRegion2D:
        return project_to_r1_r2(self.polytope(empty_messages))

    def swap_users(self) -> "Theorem1Bounds":
        return Theorem1Bounds(self.b21, self.b12, self.b23, self.b13, self.b13_23, self.b_sum,
                              self.delta2_minus, self.delta1_minus, self.cap_delta_minus)


def theorem1_from_mi(mi: MIFunction) -> Theorem1Bounds:
    """Evaluate the six rate bounds from a conditional mutual-information oracle.

    Shared by the finite-alphabet engine and the Gaussian covariance check,
    so the bound structure is written once. Signed helper terms are kept
    unclamped until the final ``max(0, .)``.
    """
    S = ("S0", "S1", "S2")
    raw = {
        "b12": mi(["V1"], ["Y2"], ["S0", "S2", "U", "X2"]) - mi(["V1"], ["S1"], ["S0", "U"]),
        "b21": mi(["V2"], ["Y1"], ["S0", "S1", "U", "X1"]) - mi(["V2"], ["S2"], ["S0", "U"]),
        "delta1": mi(["V1"], ["Y3"], ["U", "V2", "V23"]) - mi(["V1"], ["S0", "S1"], ["U", "V2", "V23"]),
        "delta2": mi(["V2"], ["Y3"], ["U", "V1", "V13"]) - mi(["V2"], ["S0", "S2"], ["U", "V1", "V13"]),
        "Delta1": mi(["V1"], ["Y3"], ["U", "V2"]) - mi(["V1"], ["S0", "S1"], ["U", "V2"]),
        "Delta2": mi(["V2"], ["Y3"], ["U", "V1"]) - mi(["V2"], ["S0", "S2"], ["U", "V1"]),
        "Delta3": mi(["V1", "V2"], ["Y3"], ["U"]) - mi(["V1", "V2"], S, ["U"]),
    }
    d1 = min(0.0, raw["delta1"])
    d2 = min(0.0, raw["delta2"])
    D = min(0.0, raw["Delta1"], raw["Delta2"], raw["Delta3"])
    raw["b13"] = (mi(["V13"], ["Y3"], ["U", "V1", "V2", "V23"])
                  - mi(["V13"], ["S0", "S1"], ["U", "V1", "V2", "V23"]) + d1)
    raw["b23"] = (mi(["V23"], ["Y3"], ["U", "V1", "V2", "V13"])
                  - mi(["V23"], ["S0", "S2"], ["U", "V1", "V2", "V13"]) + d2)
    raw["b13_23"] = (mi(["V13", "V23"], ["Y3"], ["U", "V1", "V2"])
                     - mi(["V13", "V23"], S, ["U", "V1", "V2"]) + D)
    allv = ["U", "V1", "V2", "V13", "V23"]
    raw["b_sum"] = mi(allv, ["Y3"], []) - mi(allv, S, [])
    clamp = lambda k: max(0.0, raw[k])
    return Theorem1Bounds(clamp("b12"), clamp("b21"), clamp("b13"), clamp("b23"),
                          clamp("b13_23"), clamp("b_sum"), d1, d2, D, raw)


def theorem1_bounds(p: JointPmf, check: bool = True) -> Theorem1Bounds:
    """Six bounds of the achievable region for an admissible pmf."""
    if check:
        violations = validate_factorization(p)
        if violations:
            raise FactorizationError(violations)
    return theorem1_from_mi(lambda a, b, c: mutual_information(p, a, b, c))


def cut_set_ceiling(channel: np.ndarray, step: float = 0.02) -> float:
    """Brute-force ``max I(X1 X2; Y3)`` over joint input pmfs on a simplex grid.

    ``channel[y, x1, x2] = p(y | x1, x2)``.
    """
    ny, n1, n2 = channel.shape
    k = n1 * n2
    W = channel.reshape(ny, k)
    m = int(round(1 / step))
    best = 0.0
    for comp in _compositions(m, k):
        q = np.asarray(comp, dtype=float) / m
        py = W @ q
        joint = W * q
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(joint > 0, joint * np.log2(W / py[:, None]), 0.0)
        best = max(best, float(terms.sum()))
    return best


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def pmf_from_json(data: Mapping) -> tuple[JointPmf, tuple[str, ...]]:
    """Build a pmf from its JSON form; returns the pmf and its empty messages.

    Accepted shapes:
    ``{"sizes": {...}, "probabilities": [...]}`` (row-major, fixed variable order),
    ``{"factors": {"S1|S0": [...], ...}, "identities": [["V13", "X1"], ...]}``, or
    ``{"fixture": "<fixture name>", "seed": 0, "size": 2}``.
    """
    empty = tuple(data.get("empty_messages", ()))
    max_alphabet = int(data.get("max_alphabet", DEFAULT_MAX_ALPHABET))
    if "fixture" in data:
        from .fixtures import named_fixture
        fx = named_fixture(data["fixture"])
        rng = np.random.default_rng(int(data.get("seed", 0)))
        comps = fx.random_components(rng, int(data.get("size", 2)))
        pmf = JointPmf.from_components(comps, fx.identities, max_alphabet=max_alphabet)
        return pmf, empty or fx.empty_messages
    if "probabilities" in data:
        return JointPmf.from_dense(data["sizes"], data["probabilities"],
                                   max_alphabet=max_alphabet), empty
    if "factors" in data:
        comps = {k: np.asarray(v, dtype=float) for k, v in data["factors"].items()}
        ids = [tuple(pair) for pair in data.get("identities", ())]
        return JointPmf.from_components(comps, ids, sizes=data.get("sizes"),
                                        max_alphabet=max_alphabet), empty
    raise ValueError("pmf needs one of 'probabilities', 'factors' or 'fixture'")


def broken_markov_pmf(seed: int = 0) -> JointPmf:
    """A pmf whose cooperation codeword ``U`` reads the private state ``S1``.

    Used to exercise the admissibility checks.
    """
    rng = np.random.default_rng(seed)
    d = lambda *shape: rng.dirichlet(np.ones(shape[0]), size=int(np.prod(shape[1:]))).T.reshape(shape)
    comps = {"S1": d(2), "U|S1": np.array([[0.9, 0.1], [0.1, 0.9]]),
             "V1|U": d(2, 2), "X1|U,V1": d(2, 2, 2), "X2|U": d(2, 2), "Y3|X1,X2": d(2, 2, 2)}
    return JointPmf.from_components(comps)

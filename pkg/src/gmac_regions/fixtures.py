"""Special-case constructions of the GMAC region as regression fixtures.

Each row fixes which auxiliaries are empty (singleton), which variables are
copies of others, and which conditional components the caller supplies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .discrete import JointPmf, parse_component


@dataclass(frozen=True)
class NamedFixture:
    case: str
    title: str
    components: tuple[str, ...]
    identities: tuple[tuple[str, str], ...] = ()
    empty_messages: tuple[str, ...] = ()
    notes: str = ""

    @property
    def empty(self) -> tuple[str, ...]:
        used = set()
        for key in self.components:
            outs, conds = parse_component(key)
            used.update(outs + conds)
        for a, b in self.identities:
            used.update((a, b))
        from .discrete import VARIABLES
        return tuple(v for v in VARIABLES if v not in used)

    def build(self, components: Mapping[str, np.ndarray], **kw) -> JointPmf:
        missing = set(self.components) - set(components)
        extra = set(components) - set(self.components)
        if missing or extra:
            raise ValueError(f"{self.case}: missing components {sorted(missing)}, "
                             f"unexpected {sorted(extra)}")
        return JointPmf.from_components(components, self.identities, **kw)

    def random_components(self, rng: np.random.Generator, size: int | Mapping[str, int] = 2,
                          ) -> dict[str, np.ndarray]:
        """Dirichlet-random conditionals with every free alphabet of ``size``."""
        sizes = {} if isinstance(size, int) else dict(size)
        default = size if isinstance(size, int) else 2
        # copied variables share the alphabet of their source
        for a, b in self.identities:
            sizes.setdefault(b, sizes.get(a, default))
            sizes.setdefault(a, sizes[b])
        out = {}
        for key in self.components:
            outs, conds = parse_component(key)
            shape_o = [sizes.setdefault(n, default) for n in outs]
            shape_c = [sizes.setdefault(n, default) for n in conds]
            k = int(np.prod(shape_o))
            m = int(np.prod(shape_c)) if shape_c else 1
            draws = rng.dirichlet(np.ones(k), size=m).T  # (k, m)
            out[key] = draws.reshape(shape_o + shape_c)
        return out

    def random(self, rng: np.random.Generator, size: int | Mapping[str, int] = 2) -> JointPmf:
        return self.build(self.random_components(rng, size))


_ROWS = (
    NamedFixture(
        "gmac", "GMAC with generalized feedback, no states",
        ("U", "V1|U", "V2|U", "X1|U,V1", "X2|U,V2", "Y1,Y2,Y3|X1,X2"),
        (("V13", "X1"), ("V23", "X2")),
        notes="V13=X1, V23=X2, S0=S1=S2 empty; all state penalties vanish"),
    NamedFixture(
        "cribbing", "MAC with ideal strictly causal cribbing encoders",
        ("U", "X1|U", "X2|U", "Y3|X1,X2"),
        (("V1", "X1"), ("V2", "X2"), ("Y1", "X2"), ("Y2", "X1")),
        notes="Y1=X2, Y2=X1, V1=X1, V2=X2, V13=V23 empty"),
    NamedFixture(
        "relay-pdf", "Relay channel with partial decode-and-forward",
        ("U", "V1|U", "X1|U,V1", "Y2,Y3|X1,X2"),
        (("V13", "X1"), ("X2", "U")),
        empty_messages=("R21", "R23"),
        notes="M2, V2, V23, Y1 empty; U=X2, V13=X1"),
    NamedFixture(
        "partial-csit-mac", "MAC with partial CSI at the encoders",
        ("S0", "S1|S0", "S2|S0", "V13,X1|S0,S1", "V23,X2|S0,S2", "Y3|X1,X2,S0,S1,S2"),
        notes="U=V1=V2 empty, Y1=Y2 empty; only b13, b23, b13_23 and the sum bound remain"),
    NamedFixture(
        "one-cribbing-informed", "Cribbing MAC with one informed encoder",
        ("S2", "U", "X1|U", "V23,X2|U,S2", "Y3|X1,X2,S2"),
        (("V1", "X1"), ("Y2", "X1")),
        notes="S0=S1 empty, Y1 empty, Y2=X1, V1=X1, V2=V13 empty"),
    NamedFixture(
        "cribbing-partial-csit", "Cribbing MAC with partial CSI at both encoders",
        ("S0", "S1|S0", "S2|S0", "U|S0", "V1|S0,S1,U", "V2|S0,S2,U",
         "X1|U,V1,S0,S1", "X2|U,V2,S0,S2", "Y3|X1,X2,S0,S1,S2"),
        (("Y1", "X2"), ("Y2", "X1")),
        notes="Y1=X2, Y2=X1, V13=V23 empty"),
    NamedFixture(
        "csit-source", "Relay channel with state known at the source",
        ("S1", "U", "V1|S1,U", "V13,X1|U,V1,S1", "Y2,Y3|X1,X2,S1"),
        (("X2", "U"),),
        empty_messages=("R21", "R23"),
        notes="M2, Y1, S0, S2, V2, V23 empty; X2=U"),
    NamedFixture(
        "csit-relay", "Relay channel with state known at the relay",
        ("S2", "U", "X1|U", "V23,X2|U,S2", "Y2,Y3|X1,X2,S2"),
        (("V1", "X1"),),
        empty_messages=("R21", "R23"),
        notes="M2, Y1, S0, S1, V13, V2 empty; V1=X1"),
    NamedFixture(
        "degraded-csit", "Relay channel with degraded state knowledge",
        ("S0", "S1|S0", "U|S0", "V1|S0,S1,U", "X1|U,V1,S0,S1", "X2|U,S0", "Y2,Y3|X1,X2,S0,S1"),
        empty_messages=("R21", "R23"),
        notes="M2, Y1, S2, V2, V13, V23 empty; relay sees S0, source sees S0 and S1"),
    NamedFixture(
        "full-csit-relay", "Relay channel with state known at both nodes",
        ("S0", "U|S0", "V1|S0,U", "V13,X1|U,V1,S0", "X2|U,S0", "Y2,Y3|X1,X2,S0"),
        empty_messages=("R21", "R23"),
        notes="M2, Y1, S1, S2, V2, V23 empty"),
)

FIXTURES = {row.case: row for row in _ROWS}


def named_fixture(case: str) -> NamedFixture:
    try:
        return FIXTURES[case]
    except KeyError:
        raise ValueError(f"unknown fixture {case!r}; choose from {sorted(FIXTURES)}") from None

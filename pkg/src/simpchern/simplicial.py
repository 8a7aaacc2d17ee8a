"""Face pullbacks, the gamma pullback, and the double-complex differentials.

The nerve ``NG(q) = G^q`` has faces ``e_i : NG(q) -> NG(q-1)``::

    e_0(h_1..h_q) = (h_2..h_q)
    e_i(h_1..h_q) = (h_1,..,h_i h_{i+1},..,h_q)   1 <= i <= q-1
    e_q(h_1..h_q) = (h_1..h_{q-1})

while ``NbarG(q) = G^{q+1}`` drops the i-th entry.  The projection
``gamma(g_0..g_q) = (g_0 g_1^{-1}, .., g_{q-1} g_q^{-1})`` intertwines the
two families.  The double complex carries

    d' = sum_i (-1)^i e_i^*        (simplicial direction)
    d'' = (-1)^level  d            (de Rham direction)

and a total-degree cochain is a map level -> form with form degree
``total_degree - level`` at each level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .algebra import (
    NBARG,
    NG,
    Context,
    FormExpr,
    SubstitutionRule,
    var,
)

__all__ = [
    "face_rule",
    "face_pullback",
    "gamma_rule",
    "gamma_pullback",
    "d_prime",
    "d_second",
    "CochainSet",
    "total_differential",
]


def face_rule(i: int, source: Context) -> SubstitutionRule:
    """Substitution implementing ``e_i^*`` from level ``q-1`` to ``q``.

    ``source`` is the context the form lives on (level ``q-1``); the rule
    expresses each of its coordinates in the coordinates of level ``q``.
    """
    q = source.level + 1
    if not 0 <= i <= q:
        raise ValueError(f"face index {i} out of range 0..{q}")
    target = Context(source.family, q, source.simplex_dim)
    images: dict[int, tuple] = {}
    if source.family == NG:
        for x in range(1, q):
            if i == 0:
                images[x] = (var(x + 1),)
            elif i == q:
                images[x] = (var(x),)
            elif x < i:
                images[x] = (var(x),)
            elif x == i:
                images[x] = (var(i), var(i + 1))
            else:
                images[x] = (var(x + 1),)
    else:
        for x in range(0, q):
            images[x] = (var(x),) if x < i else (var(x + 1),)
    return SubstitutionRule(target, images)


def face_pullback(i: int, a: FormExpr) -> FormExpr:
    return a.substitute(face_rule(i, a.context))


def gamma_rule(source: Context) -> SubstitutionRule:
    """``gamma^*``: pulls a form on NG(q) back to NbarG(q) via
    ``h_j -> g_{j-1} g_j^{-1}``."""
    if source.family != NG:
        raise ValueError("gamma pullback applies to NG forms")
    target = Context(NBARG, source.level, source.simplex_dim)
    images = {
        x: (var(x - 1), ("i", x)) for x in range(1, source.level + 1)
    }
    return SubstitutionRule(target, images)


def gamma_pullback(a: FormExpr) -> FormExpr:
    return a.substitute(gamma_rule(a.context))


def d_prime(a: FormExpr) -> FormExpr:
    """Alternating sum of face pullbacks; raises the level by one."""
    q = a.context.level + 1
    out = FormExpr.zero(Context(a.context.family, q, a.context.simplex_dim))
    for i in range(q + 1):
        term = face_pullback(i, a)
        out = out + (term if i % 2 == 0 else -term)
    return out


def d_second(a: FormExpr) -> FormExpr:
    """``(-1)^level`` times the exterior derivative; the sign lives here,
    never in the stored form."""
    da = a.d()
    return -da if a.context.level % 2 else da


@dataclass(frozen=True)
class CochainSet:
    """One total-degree cochain: a map from simplicial level to form.

    Missing levels are zero; each present component must be homogeneous of
    form degree ``total_degree - level``.
    """

    family: str
    total_degree: int
    components: Mapping[int, FormExpr] = field(default_factory=dict)

    def __post_init__(self) -> None:
        comps = {m: f for m, f in self.components.items() if not f.is_zero()}
        object.__setattr__(self, "components", comps)
        for m, f in comps.items():
            if f.context.family != self.family:
                raise ValueError(f"component at level {m} has family {f.context.family}")
            if f.context.level != m:
                raise ValueError(f"component at level {m} lives on level {f.context.level}")
            if f.degree() != self.total_degree - m:
                raise ValueError(
                    f"component at level {m} has degree {f.degree()}, "
                    f"expected {self.total_degree - m}"
                )

    def component(self, m: int) -> FormExpr:
        try:
            return self.components[m]
        except KeyError:
            return FormExpr.zero(Context(self.family, m, 0))

    def levels(self) -> list[int]:
        return sorted(self.components)

    def is_zero(self) -> bool:
        return not self.components

    def __eq__(self, other) -> bool:
        if not isinstance(other, CochainSet):
            return NotImplemented
        return (
            self.family == other.family
            and self.total_degree == other.total_degree
            and dict(self.components) == dict(other.components)
        )

    def __add__(self, other: "CochainSet") -> "CochainSet":
        if self.family != other.family or self.total_degree != other.total_degree:
            raise ValueError("cochain sets are not compatible")
        levels = set(self.components) | set(other.components)
        comps = {m: self.component(m) + other.component(m) for m in levels}
        return CochainSet(self.family, self.total_degree, comps)

    def scale(self, c) -> "CochainSet":
        return CochainSet(
            self.family,
            self.total_degree,
            {m: f.scale(c) for m, f in self.components.items()},
        )

    def __neg__(self) -> "CochainSet":
        return self.scale(-1)

    def __sub__(self, other: "CochainSet") -> "CochainSet":
        return self + (-other)

    def to_json(self) -> str:
        import json

        from . import sexpr as _sx

        return json.dumps(
            {
                "family": self.family,
                "total_degree": self.total_degree,
                "components": {
                    str(m): _sx.to_sexpr(f) for m, f in sorted(self.components.items())
                },
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "CochainSet":
        import json

        from . import sexpr as _sx

        doc = json.loads(text)
        comps = {int(m): _sx.from_sexpr(s) for m, s in doc["components"].items()}
        return CochainSet(doc["family"], doc["total_degree"], comps)


def total_differential(c: CochainSet) -> CochainSet:
    """``d' + d''`` assembled by level; the total degree rises by one."""
    pieces: dict[int, FormExpr] = {}

    def put(m: int, f: FormExpr) -> None:
        if f.is_zero():
            return
        if m in pieces:
            pieces[m] = pieces[m] + f
        else:
            pieces[m] = f

    for m, f in c.components.items():
        put(m, d_second(f))
        put(m + 1, d_prime(f))
    return CochainSet(c.family, c.total_degree + 1, pieces)

"""Free graded algebra of trace words in noncommuting matrix letters.

The objects here model differential forms on ``Delta^r x G^k`` for
``G = GL(n, C)``, written symbolically as sums of terms

    (rational) * (1/2*pi*i)^k * t-monomial * dt-monomial * tr(w1) * tr(w2) * ...

where each ``w`` is a word in the letters ``h_i`` (a group coordinate),
``h_i^{-1}`` and ``dh_i``.  Group letters have form degree 0, differential
letters degree 1, and ``dt_i`` letters degree 1; products follow the Koszul
sign rule.  Two families of group coordinates exist: the nerve ``NG(p)``
uses letters indexed ``1..p`` and the decorated nerve ``NbarG(p)`` uses
``0..p`` (rendered ``g_i`` instead of ``h_i``).

Barycentric coordinates ``t_0..t_r`` on the simplex factor satisfy
``sum t_i = 1``.  Polynomials are stored in all ``r+1`` variables without
applying the relation; the exterior differential uses ``d t_0 = -(dt_1 +
... + dt_r)``, and :meth:`FormExpr.reduce_barycentric` eliminates ``t_0``
when two forms must be compared modulo the relation.  Only ``dt_1..dt_r``
occur as anticommuting letters.

Normal form: every trace word is freely reduced (cyclically: adjacent and
wrap-around ``h h^{-1}`` pairs cancel) and rotated to its minimal graded
cyclic rotation, with the Koszul sign of the rotation absorbed into the
coefficient; trace factors are sorted with Koszul signs; dt indices are
sorted; like terms merge and zero terms drop.  Normalization is idempotent
and all values are immutable, so expressions are safe to share across
threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

__all__ = [
    "NG",
    "NBARG",
    "Context",
    "ContextMismatchError",
    "SubstitutionError",
    "var",
    "inv",
    "dvar",
    "letter_degree",
    "word_degree",
    "canonical_trace_word",
    "Term",
    "FormExpr",
    "MatrixForm",
    "SubstitutionRule",
]

NG = "NG"
NBARG = "NbarG"

# Letter kinds: group coordinate, its inverse, its differential.
_VAR = "v"
_INV = "i"
_DIF = "d"

# Rank used by the total order on letters; chosen so that the canonical
# rotation of e.g. tr(dh1 dh2 h2^-1 h1^-1) keeps the differentials in front.
_RANK = {_DIF: 0, _VAR: 1, _INV: 2}

Letter = tuple[str, int]
Word = tuple[Letter, ...]


class ContextMismatchError(ValueError):
    """Raised when two forms on different spaces are combined."""


class SubstitutionError(KeyError):
    """Raised when a substitution rule misses a letter present in a form."""


def var(i: int) -> Letter:
    """Group coordinate letter ``h_i`` (or ``g_i`` in an NbarG context)."""
    return (_VAR, i)


def inv(i: int) -> Letter:
    """Inverse letter ``h_i^{-1}``."""
    return (_INV, i)


def dvar(i: int) -> Letter:
    """Differential letter ``dh_i``; the only letter of form degree 1."""
    return (_DIF, i)


def letter_degree(letter: Letter) -> int:
    return 1 if letter[0] == _DIF else 0


def word_degree(word: Sequence[Letter]) -> int:
    return sum(1 for k, _ in word if k == _DIF)


def _letter_key(letter: Letter) -> tuple[int, int]:
    return (_RANK[letter[0]], letter[1])


def _word_key(word: Word) -> tuple[tuple[int, int], ...]:
    return tuple(_letter_key(l) for l in word)


@dataclass(frozen=True)
class Context:
    """Ambient space of a form: family, simplicial level, simplex dimension.

    NG(level) carries letters indexed ``1..level``; NbarG(level) carries
    ``0..level``.  ``simplex_dim == r`` means the form may involve
    ``t_0..t_r`` and ``dt_1..dt_r``.
    """

    family: str
    level: int
    simplex_dim: int = 0

    def __post_init__(self) -> None:
        if self.family not in (NG, NBARG):
            raise ValueError(f"unknown family {self.family!r}")
        if self.level < 0 or self.simplex_dim < 0:
            raise ValueError("level and simplex_dim must be nonnegative")

    def letter_indices(self) -> range:
        if self.family == NG:
            return range(1, self.level + 1)
        return range(0, self.level + 1)

    def validate_letter(self, letter: Letter) -> None:
        if letter[1] not in self.letter_indices():
            raise ValueError(
                f"letter index {letter[1]} out of range for {self.family}({self.level})"
            )


# -- trace-word canonicalization ------------------------------------------


def _free_reduce_linear(word: Sequence[Letter]) -> list[Letter]:
    out: list[Letter] = []
    for let in word:
        if out:
            pk, pi = out[-1]
            k, i = let
            if i == pi and {pk, k} == {_VAR, _INV}:
                out.pop()
                continue
        out.append(let)
    return out


def _cyclic_free_reduce(word: Sequence[Letter]) -> tuple[Letter, ...]:
    out = _free_reduce_linear(word)
    # Wrap-around cancellation: trace is cyclic and the letters involved
    # have degree 0, so no signs appear.
    while len(out) >= 2:
        fk, fi = out[0]
        lk, li = out[-1]
        if fi == li and {fk, lk} == {_VAR, _INV}:
            out = _free_reduce_linear(out[1:-1])
        else:
            break
    return tuple(out)


def canonical_trace_word(word: Sequence[Letter]) -> tuple[int, Word] | None:
    """Cyclically reduce and rotate a trace word to its canonical form.

    Returns ``(sign, word)`` where ``sign`` is the Koszul sign of the
    chosen rotation, or ``None`` when the word is identically zero under
    graded cyclicity (some rotation maps it to itself with sign -1, as for
    ``tr(dh dh)``).  The empty word is allowed and stands for ``tr(1)``.
    """
    w = _cyclic_free_reduce(word)
    k = len(w)
    if k == 0:
        return (1, w)
    total = word_degree(w)
    best: Word | None = None
    best_key = None
    best_sign = 0
    prefix_deg = 0
    zero = False
    for r in range(k):
        if r == 0:
            sign = 1
        else:
            prefix_deg += letter_degree(w[r - 1])
            sign = -1 if (prefix_deg * (total - prefix_deg)) % 2 else 1
        rot = w[r:] + w[:r]
        key = _word_key(rot)
        if best_key is None or key < best_key:
            best, best_key, best_sign = rot, key, sign
        elif key == best_key and sign != best_sign:
            zero = True
    if zero:
        return None
    assert best is not None
    return (best_sign, best)


def _sort_traces(traces: Sequence[Word]) -> tuple[int, tuple[Word, ...]] | None:
    """Sort trace factors by word key, tracking the Koszul sign.

    Even-degree factors move freely; swapping two odd factors contributes
    -1.  Two identical odd factors make the product vanish.
    """
    if len(traces) <= 1:
        return (1, tuple(traces))
    keyed = [(_word_key(w), word_degree(w) % 2, w) for w in traces]
    odd_positions = [j for j, (_, odd, _) in enumerate(keyed) if odd]
    order = sorted(range(len(keyed)), key=lambda j: keyed[j][0])
    # Parity of the permutation induced on the odd factors only.
    odd_order = [j for j in order if keyed[j][1]]
    seen: set[tuple[tuple[int, int], ...]] = set()
    for j in odd_order:
        if keyed[j][0] in seen:
            return None
        seen.add(keyed[j][0])
    perm = {orig: pos for pos, orig in enumerate(odd_order)}
    inversions = 0
    ranks = [perm[j] for j in odd_positions]
    for a in range(len(ranks)):
        for b in range(a + 1, len(ranks)):
            if ranks[a] > ranks[b]:
                inversions += 1
    sign = -1 if inversions % 2 else 1
    return (sign, tuple(keyed[j][2] for j in order))


def _merge_dts(a: Sequence[int], b: Sequence[int]) -> tuple[int, tuple[int, ...]] | None:
    """Merge two sorted dt-index tuples, returning the interleaving sign."""
    if not a:
        return (1, tuple(b))
    if not b:
        return (1, tuple(a))
    if set(a) & set(b):
        return None
    merged = sorted(list(a) + list(b))
    concat = list(a) + list(b)
    inv_count = 0
    for x in range(len(concat)):
        for y in range(x + 1, len(concat)):
            if concat[x] > concat[y]:
                inv_count += 1
    return (-1 if inv_count % 2 else 1, tuple(merged))


def _sort_dts(dts: Sequence[int]) -> tuple[int, tuple[int, ...]] | None:
    if len(set(dts)) != len(dts):
        return None
    inv_count = 0
    lst = list(dts)
    for x in range(len(lst)):
        for y in range(x + 1, len(lst)):
            if lst[x] > lst[y]:
                inv_count += 1
    return (-1 if inv_count % 2 else 1, tuple(sorted(lst)))


# -- scalar polynomial part -------------------------------------------------

TPoly = tuple[tuple[tuple[int, ...], Fraction], ...]  # sorted ((exponents, coeff), ...)


def _tpoly_one(nvars: int) -> TPoly:
    return (((0,) * nvars, Fraction(1)),)


def _tpoly_from_dict(d: Mapping[tuple[int, ...], Fraction]) -> TPoly:
    items = tuple(sorted((e, c) for e, c in d.items() if c != 0))
    return items


def _tpoly_mul(a: TPoly, b: TPoly) -> TPoly:
    out: dict[tuple[int, ...], Fraction] = {}
    for ea, ca in a:
        for eb, cb in b:
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, Fraction(0)) + ca * cb
    return _tpoly_from_dict(out)


def _tpoly_scale(a: TPoly, c: Fraction) -> TPoly:
    if c == 0:
        return ()
    return tuple((e, cc * c) for e, cc in a)


def _tpoly_nvars(ctx: Context) -> int:
    return ctx.simplex_dim + 1


class Term(NamedTuple):
    """One normalized term of a :class:`FormExpr`.

    ``coeff`` is an exact rational, ``ipi`` the exponent of the symbolic
    factor ``(1/2 pi i)``, ``tpoly`` a polynomial in ``t_0..t_r``, ``dts``
    the sorted dt-monomial indices and ``traces`` the sorted trace words.
    """

    coeff: Fraction
    ipi: int
    tpoly: TPoly
    dts: tuple[int, ...]
    traces: tuple[Word, ...]

    @property
    def degree(self) -> int:
        return len(self.dts) + sum(word_degree(w) for w in self.traces)

    def key(self) -> tuple:
        return (self.ipi, self.dts, self.tpoly, self.traces)


def _accumulate(
    acc: dict[tuple, Fraction],
    coeff: Fraction,
    ipi: int,
    tpoly: TPoly,
    dts: Sequence[int],
    traces: Sequence[Word],
) -> None:
    """Normalize one raw term and fold it into the accumulator."""
    if coeff == 0 or not tpoly:
        return
    sorted_dts = _sort_dts(dts)
    if sorted_dts is None:
        return
    sign, dts_t = sorted_dts
    canon: list[Word] = []
    for w in traces:
        cw = canonical_trace_word(w)
        if cw is None:
            return
        s, wt = cw
        sign *= s
        canon.append(wt)
    st = _sort_traces(canon)
    if st is None:
        return
    s, traces_t = st
    sign *= s
    key = (ipi, dts_t, tpoly, traces_t)
    acc[key] = acc.get(key, Fraction(0)) + coeff * sign


def _accum_to_terms(acc: Mapping[tuple, Fraction]) -> tuple[Term, ...]:
    terms = []
    for (ipi, dts, tpoly, traces), coeff in acc.items():
        if coeff != 0:
            terms.append(Term(coeff, ipi, tpoly, dts, traces))
    terms.sort(key=Term.key)
    return tuple(terms)


@dataclass(frozen=True)
class SubstitutionRule:
    """Algebra homomorphism data: each source letter index maps to a word
    of group letters (``var``/``inv`` only) in the target context.

    Differentials are carried along by the Leibniz rule, so the induced map
    commutes with the exterior derivative by construction.
    """

    target: Context
    images: Mapping[int, Word]

    def image(self, index: int) -> Word:
        try:
            return tuple(self.images[index])
        except KeyError:
            raise SubstitutionError(
                f"substitution rule has no image for letter index {index}"
            ) from None


def _inverse_word(word: Word) -> Word:
    flipped = []
    for k, i in reversed(word):
        flipped.append((_INV if k == _VAR else _VAR, i))
    return tuple(flipped)


def _leibniz_images(word: Word) -> list[tuple[int, Word]]:
    """Expansion of d(word) for a word of group letters: one summand per
    letter, ``d(h) = dh`` and ``d(h^-1) = -h^-1 dh h^-1``."""
    out: list[tuple[int, Word]] = []
    for pos, (k, i) in enumerate(word):
        if k == _VAR:
            out.append((1, word[:pos] + ((_DIF, i),) + word[pos + 1 :]))
        else:
            out.append(
                (-1, word[:pos] + ((_INV, i), (_DIF, i), (_INV, i)) + word[pos + 1 :])
            )
    return out


def _substitute_word(word: Word, rule: SubstitutionRule) -> list[tuple[int, Word]]:
    """All summands of the image of a trace word under a substitution."""
    factors: list[list[tuple[int, Word]]] = []
    for k, i in word:
        img = rule.image(i)
        if k == _VAR:
            factors.append([(1, img)])
        elif k == _INV:
            factors.append([(1, _inverse_word(img))])
        else:
            factors.append(_leibniz_images(img))
    out: list[tuple[int, Word]] = []
    for combo in itertools.product(*factors):
        sign = 1
        parts: list[Letter] = []
        for s, w in combo:
            sign *= s
            parts.extend(w)
        out.append((sign, tuple(parts)))
    return out


@dataclass(frozen=True)
class FormExpr:
    """A differential form on ``Delta^r x G^k``, stored in normal form.

    Immutable; all operations return new values.  Addition and wedge
    require equal contexts.
    """

    context: Context
    terms: tuple[Term, ...]

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(context: Context) -> "FormExpr":
        return FormExpr(context, ())

    @staticmethod
    def constant(context: Context, value: Fraction | int, ipi: int = 0) -> "FormExpr":
        return FormExpr.build(context, [(Fraction(value), ipi, None, (), ())])

    @staticmethod
    def from_traces(
        context: Context,
        coeff: Fraction | int,
        words: Iterable[Sequence[Letter]],
        ipi: int = 0,
        dts: Sequence[int] = (),
        tpoly: Mapping[tuple[int, ...], Fraction] | None = None,
    ) -> "FormExpr":
        """Single-term constructor from raw (unnormalized) trace words."""
        return FormExpr.build(
            context, [(Fraction(coeff), ipi, tpoly, tuple(dts), tuple(tuple(w) for w in words))]
        )

    @staticmethod
    def build(
        context: Context,
        raw_terms: Iterable[
            tuple[Fraction, int, Mapping[tuple[int, ...], Fraction] | None, Sequence[int], Sequence[Sequence[Letter]]]
        ],
    ) -> "FormExpr":
        nvars = _tpoly_nvars(context)
        acc: dict[tuple, Fraction] = {}
        for coeff, ipi, tpoly, dts, traces in raw_terms:
            if tpoly is None:
                tp = _tpoly_one(nvars)
            else:
                tp = _tpoly_from_dict(
                    {tuple(e): Fraction(c) for e, c in tpoly.items()}
                )
            for e, _ in tp:
                if len(e) != nvars:
                    raise ValueError(
                        f"t-monomial {e} has wrong arity for simplex_dim {context.simplex_dim}"
                    )
            if context.simplex_dim == 0:
                # Delta^0 is the single point t_0 = 1, so t_0^k == 1 there.
                collapsed: dict[tuple[int, ...], Fraction] = {}
                for e, c in tp:
                    z = (0,) * nvars
                    collapsed[z] = collapsed.get(z, Fraction(0)) + c
                tp = _tpoly_from_dict(collapsed)
            words = tuple(tuple(w) for w in traces)
            for w in words:
                for let in w:
                    context.validate_letter(let)
            for j in dts:
                if not (1 <= j <= context.simplex_dim):
                    raise ValueError(f"dt index {j} out of range for simplex_dim {context.simplex_dim}")
            _accumulate(acc, Fraction(coeff), ipi, tp, tuple(dts), words)
        return FormExpr(context, _accum_to_terms(acc))

    # -- basic structure -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set[int]:
        return {t.degree for t in self.terms}

    def degree(self) -> int:
        """Degree of a homogeneous form (0 for the zero form)."""
        degs = self.degrees()
        if not degs:
            return 0
        if len(degs) > 1:
            raise ValueError(f"form is not homogeneous: degrees {sorted(degs)}")
        return degs.pop()

    def max_word_length(self) -> int:
        return max((len(w) for t in self.terms for w in t.traces), default=0)

    def __add__(self, other: "FormExpr") -> "FormExpr":
        self._check_context(other)
        acc: dict[tuple, Fraction] = {}
        for t in self.terms + other.terms:
            key = t.key()
            acc[key] = acc.get(key, Fraction(0)) + t.coeff
        return FormExpr(self.context, _accum_to_terms(acc))

    def __sub__(self, other: "FormExpr") -> "FormExpr":
        return self + (-other)

    def __neg__(self) -> "FormExpr":
        return self.scale(Fraction(-1))

    def scale(self, c: Fraction | int, ipi_shift: int = 0) -> "FormExpr":
        c = Fraction(c)
        if c == 0:
            return FormExpr.zero(self.context)
        return FormExpr(
            self.context,
            tuple(
                Term(t.coeff * c, t.ipi + ipi_shift, t.tpoly, t.dts, t.traces)
                for t in self.terms
            ),
        )

    def __mul__(self, c: Fraction | int) -> "FormExpr":
        return self.scale(c)

    __rmul__ = __mul__

    def _check_context(self, other: "FormExpr") -> None:
        if self.context != other.context:
            raise ContextMismatchError(
                f"context mismatch: {self.context} vs {other.context}"
            )

    # -- graded product ------------------------------------------------------

    def wedge(self, other: "FormExpr") -> "FormExpr":
        self._check_context(other)
        acc: dict[tuple, Fraction] = {}
        for ta in self.terms:
            deg_a_tr = sum(word_degree(w) for w in ta.traces)
            for tb in other.terms:
                merged = _merge_dts(ta.dts, tb.dts)
                if merged is None:
                    continue
                sign, dts = merged
                # b's dt block moves left past a's trace block.
                if (len(tb.dts) * deg_a_tr) % 2:
                    sign = -sign
                _accumulate(
                    acc,
                    ta.coeff * tb.coeff * sign,
                    ta.ipi + tb.ipi,
                    _tpoly_mul(ta.tpoly, tb.tpoly),
                    dts,
                    ta.traces + tb.traces,
                )
        return FormExpr(self.context, _accum_to_terms(acc))

    # -- exterior derivative ---------------------------------------------------

    def d(self) -> "FormExpr":
        """Total exterior derivative (manifold and simplex directions).

        Letter rules: d(h) = dh, d(h^-1) = -h^-1 dh h^-1, d(dh) = 0,
        d(t_i) = dt_i with d(t_0) = -(dt_1 + ... + dt_r), d(dt_i) = 0.
        """
        r = self.context.simplex_dim
        acc: dict[tuple, Fraction] = {}
        for t in self.terms:
            # Polynomial part: df wedge (dt-block wedge traces).
            for exps, c in t.tpoly:
                for v in range(len(exps)):
                    if exps[v] == 0:
                        continue
                    dexps = tuple(
                        e - 1 if j == v else e for j, e in enumerate(exps)
                    )
                    mono: TPoly = ((dexps, Fraction(1)),)
                    targets = [(j, -1) for j in range(1, r + 1)] if v == 0 else [(v, 1)]
                    for j, s in targets:
                        if j in t.dts:
                            continue
                        passed = sum(1 for e in t.dts if e < j)
                        sign = s * (-1 if passed % 2 else 1)
                        _accumulate(
                            acc,
                            t.coeff * c * exps[v] * sign,
                            t.ipi,
                            mono,
                            tuple(sorted(t.dts + (j,))),
                            t.traces,
                        )
            # Trace part: (-1)^{|dt block|} spreads d over the factors.
            base_sign = -1 if len(t.dts) % 2 else 1
            prefix = 0
            for fi, w in enumerate(t.traces):
                fsign = base_sign * (-1 if prefix % 2 else 1)
                prefix += word_degree(w)
                ldeg = 0
                for pos, (k, i) in enumerate(w):
                    ldeg_sign = -1 if ldeg % 2 else 1
                    if k == _VAR:
                        nw = w[:pos] + ((_DIF, i),) + w[pos + 1 :]
                        s = 1
                    elif k == _INV:
                        nw = w[:pos] + ((_INV, i), (_DIF, i), (_INV, i)) + w[pos + 1 :]
                        s = -1
                    else:
                        ldeg += 1
                        continue
                    traces = t.traces[:fi] + (nw,) + t.traces[fi + 1 :]
                    _accumulate(
                        acc,
                        t.coeff * fsign * ldeg_sign * s,
                        t.ipi,
                        t.tpoly,
                        t.dts,
                        traces,
                    )
        return FormExpr(self.context, _accum_to_terms(acc))

    # -- substitution -----------------------------------------------------------

    def substitute(self, rule: SubstitutionRule) -> "FormExpr":
        """Apply an algebra homomorphism sending letters to group words.

        The scalar part is carried through unchanged; the target context
        must have the same simplex dimension.
        """
        tgt = rule.target
        if tgt.simplex_dim != self.context.simplex_dim:
            raise ContextMismatchError(
                "substitution cannot change the simplex dimension"
            )
        for w in rule.images.values():
            for let in w:
                if let[0] == _DIF:
                    raise ValueError("substitution images must be group words")
                tgt.validate_letter(let)
        acc: dict[tuple, Fraction] = {}
        for t in self.terms:
            expansions = [_substitute_word(w, rule) for w in t.traces]
            for combo in itertools.product(*expansions):
                sign = 1
                words = []
                for s, w in combo:
                    sign *= s
                    words.append(w)
                _accumulate(
                    acc, t.coeff * sign, t.ipi, t.tpoly, t.dts, tuple(words)
                )
        return FormExpr(tgt, _accum_to_terms(acc))

    # -- barycentric reduction ----------------------------------------------------

    def reduce_barycentric(self) -> "FormExpr":
        """Eliminate ``t_0`` via ``t_0 = 1 - t_1 - ... - t_r``.

        Integration never needs this (exponents are read off directly),
        but comparing two forms modulo the barycentric relation does.
        """
        r = self.context.simplex_dim
        if r == 0:
            return self
        acc: dict[tuple, Fraction] = {}
        for t in self.terms:
            newpoly: dict[tuple[int, ...], Fraction] = {}
            for exps, c in t.tpoly:
                e0 = exps[0]
                rest = (0,) + exps[1:]
                # (1 - t_1 - ... - t_r)^e0 expanded by multinomials.
                for combo in itertools.product(range(e0 + 1), repeat=r):
                    if sum(combo) > e0:
                        continue
                    k0 = e0 - sum(combo)
                    coef = Fraction(_multinomial(e0, (k0,) + combo))
                    if sum(combo) % 2:
                        coef = -coef
                    e = tuple(
                        rest[j] + (combo[j - 1] if j >= 1 else 0)
                        for j in range(r + 1)
                    )
                    newpoly[e] = newpoly.get(e, Fraction(0)) + c * coef
            tp = _tpoly_from_dict(newpoly)
            if tp:
                key = (t.ipi, t.dts, tp, t.traces)
                acc[key] = acc.get(key, Fraction(0)) + t.coeff
        return FormExpr(self.context, _accum_to_terms(acc))

    # -- display -------------------------------------------------------------------

    def __repr__(self) -> str:
        from . import sexpr

        return sexpr.to_sexpr(self)


def _multinomial(n: int, parts: Sequence[int]) -> int:
    import math

    out = math.factorial(n)
    for p in parts:
        out //= math.factorial(p)
    return out


# -- matrix-valued forms ------------------------------------------------------


@dataclass(frozen=True)
class MatrixForm:
    """A matrix-valued form: sum of ``rational * t-monomial * dt-monomial *
    word`` terms, used to build connections, curvatures and the generator
    words before tracing.

    Words multiply by concatenation (matrix product); the scalar dt parts
    contribute Koszul signs when they move past matrix letters.
    """

    context: Context
    terms: tuple[tuple[tuple[int, ...], tuple[int, ...], Word], ...]
    coeffs: tuple[Fraction, ...]

    @staticmethod
    def zero(context: Context) -> "MatrixForm":
        return MatrixForm(context, (), ())

    @staticmethod
    def build(
        context: Context,
        raw: Iterable[tuple[Fraction, Mapping[tuple[int, ...], Fraction] | tuple[int, ...] | None, Sequence[int], Sequence[Letter]]],
    ) -> "MatrixForm":
        """``raw`` items are (coeff, t-monomial-exponents, dt indices, word)."""
        nvars = _tpoly_nvars(context)
        acc: dict[tuple, Fraction] = {}
        for coeff, texp, dts, word in raw:
            if texp is None:
                texp = (0,) * nvars
            texp = tuple(texp)
            if len(texp) != nvars:
                raise ValueError("t-monomial arity mismatch")
            if context.simplex_dim == 0:
                texp = (0,) * nvars
            srt = _sort_dts(tuple(dts))
            if srt is None:
                continue
            sign, dts_t = srt
            w = _free_reduce_linear(tuple(word))
            for let in w:
                context.validate_letter(let)
            key = (texp, dts_t, tuple(w))
            acc[key] = acc.get(key, Fraction(0)) + Fraction(coeff) * sign
        return MatrixForm._from_acc(context, acc)

    @staticmethod
    def _from_acc(context: Context, acc: Mapping[tuple, Fraction]) -> "MatrixForm":
        if context.simplex_dim == 0:
            # Delta^0 is the single point t_0 = 1, so t_0^k == 1 there.
            collapsed: dict[tuple, Fraction] = {}
            for (texp, dts, w), c in acc.items():
                key = ((0,) * len(texp), dts, w)
                collapsed[key] = collapsed.get(key, Fraction(0)) + c
            acc = collapsed
        items = sorted((k, c) for k, c in acc.items() if c != 0)
        return MatrixForm(
            context,
            tuple(k for k, _ in items),
            tuple(c for _, c in items),
        )

    @staticmethod
    def word(context: Context, letters: Sequence[Letter], coeff: Fraction | int = 1) -> "MatrixForm":
        return MatrixForm.build(context, [(Fraction(coeff), None, (), tuple(letters))])

    def items(self):
        return zip(self.terms, self.coeffs)

    def __add__(self, other: "MatrixForm") -> "MatrixForm":
        if self.context != other.context:
            raise ContextMismatchError("matrix form context mismatch")
        acc: dict[tuple, Fraction] = dict(zip(self.terms, self.coeffs))
        for k, c in other.items():
            acc[k] = acc.get(k, Fraction(0)) + c
        return MatrixForm._from_acc(self.context, acc)

    def __sub__(self, other: "MatrixForm") -> "MatrixForm":
        return self + other.scale(-1)

    def __neg__(self) -> "MatrixForm":
        return self.scale(-1)

    def scale(self, c: Fraction | int) -> "MatrixForm":
        c = Fraction(c)
        if c == 0:
            return MatrixForm.zero(self.context)
        return MatrixForm(self.context, self.terms, tuple(cc * c for cc in self.coeffs))

    def scale_tmono(self, texp: Sequence[int]) -> "MatrixForm":
        texp = tuple(texp)
        acc: dict[tuple, Fraction] = {}
        for (e, dts, w), c in self.items():
            key = (tuple(x + y for x, y in zip(e, texp)), dts, w)
            acc[key] = acc.get(key, Fraction(0)) + c
        return MatrixForm._from_acc(self.context, acc)

    def __matmul__(self, other: "MatrixForm") -> "MatrixForm":
        if self.context != other.context:
            raise ContextMismatchError("matrix form context mismatch")
        acc: dict[tuple, Fraction] = {}
        for (ea, dtsa, wa), ca in self.items():
            dega = word_degree(wa)
            for (eb, dtsb, wb), cb in other.items():
                merged = _merge_dts(dtsa, dtsb)
                if merged is None:
                    continue
                sign, dts = merged
                if (len(dtsb) * dega) % 2:
                    sign = -sign
                e = tuple(x + y for x, y in zip(ea, eb))
                w = tuple(_free_reduce_linear(wa + wb))
                key = (e, dts, w)
                acc[key] = acc.get(key, Fraction(0)) + ca * cb * sign
        return MatrixForm._from_acc(self.context, acc)

    def d(self) -> "MatrixForm":
        """Exterior derivative with the same letter and ``t_0`` rules as
        :meth:`FormExpr.d`, acting on a matrix-valued form."""
        r = self.context.simplex_dim
        acc: dict[tuple, Fraction] = {}
        for (exps, dts, w), c in self.items():
            for v in range(len(exps)):
                if exps[v] == 0:
                    continue
                dexps = tuple(e - 1 if j == v else e for j, e in enumerate(exps))
                targets = [(j, -1) for j in range(1, r + 1)] if v == 0 else [(v, 1)]
                for j, s in targets:
                    if j in dts:
                        continue
                    passed = sum(1 for e in dts if e < j)
                    sign = s * (-1 if passed % 2 else 1)
                    key = (dexps, tuple(sorted(dts + (j,))), w)
                    acc[key] = acc.get(key, Fraction(0)) + c * exps[v] * sign
            base_sign = -1 if len(dts) % 2 else 1
            ldeg = 0
            for pos, (k, i) in enumerate(w):
                if k == _DIF:
                    ldeg += 1
                    continue
                lsign = -1 if ldeg % 2 else 1
                if k == _VAR:
                    nw = w[:pos] + ((_DIF, i),) + w[pos + 1 :]
                    s = 1
                else:
                    nw = w[:pos] + ((_INV, i), (_DIF, i), (_INV, i)) + w[pos + 1 :]
                    s = -1
                key = (exps, dts, tuple(_free_reduce_linear(nw)))
                acc[key] = acc.get(key, Fraction(0)) + c * base_sign * lsign * s
        return MatrixForm._from_acc(self.context, acc)

    def trace(self) -> FormExpr:
        raw = []
        for (exps, dts, w), c in self.items():
            raw.append((c, {exps: Fraction(1)}, dts, (w,)))
        return FormExpr.build(
            self.context, [(c, 0, tp, dts, words) for c, tp, dts, words in raw]
        )

    def degree(self) -> int:
        degs = {len(dts) + word_degree(w) for (_, dts, w), _ in self.items()}
        if not degs:
            return 0
        if len(degs) > 1:
            raise ValueError(f"matrix form is not homogeneous: {sorted(degs)}")
        return degs.pop()

    def reduce_barycentric(self) -> "MatrixForm":
        r = self.context.simplex_dim
        if r == 0:
            return self
        acc: dict[tuple, Fraction] = {}
        for (exps, dts, w), c in self.items():
            e0 = exps[0]
            rest = (0,) + exps[1:]
            for combo in itertools.product(range(e0 + 1), repeat=r):
                if sum(combo) > e0:
                    continue
                k0 = e0 - sum(combo)
                coef = Fraction(_multinomial(e0, (k0,) + combo))
                if sum(combo) % 2:
                    coef = -coef
                e = tuple(
                    rest[j] + (combo[j - 1] if j >= 1 else 0) for j in range(r + 1)
                )
                key = (e, dts, w)
                acc[key] = acc.get(key, Fraction(0)) + c * coef
        return MatrixForm._from_acc(self.context, acc)

"""Explicit Chern character cocycles in the nerve double complex.

For ``G = GL(n, C)`` the p-th Chern character is represented by a cocycle
``w_1 + ... + w_p`` with ``w_{p-q} in Omega^{p+q}(NG(p-q))``.  Writing
``r = p - q`` and

    phi_s = h_1 .. h_{s-1} dh_s h_s^{-1} .. h_1^{-1}
    R_{ij} = (phi_i + ... + phi_{j-1})^2          1 <= i < j <= r+1

the component on ``NG(r)`` is

    1/(p-1)! (1/2 pi i)^p (-1)^{r(r-1)/2} tr sum(
        phi_1 ^ [S-word with q R-insertions]
        * int_{Delta^r} prod (t_{i-1} t_{j-1})^{a_ij} dt_1..dt_r )

summed over permutations ``s in Sym(r-1)`` with sign (the S-word is
``phi_{s(1)+1} .. phi_{s(r-1)+1}``) and over all ways of inserting, in
order, q factors ``R_{ij}`` into the r gaps following ``phi_1`` and each
S-letter; ``a_ij`` counts the insertions of ``R_{ij}``.  The analogous
component on ``NbarG(r)`` replaces ``phi_s`` by ``theta_{s-1} - theta_s``
with ``theta_i = g_i^{-1} dg_i`` and weights ``(t_i t_j)^{a_ij}``.

Both closed forms are cross-checked against the defining construction:
expand ``(sum_i dt_i ^ (theta_{i-1} - theta_i) + sum_{i<j} t_i t_j
(theta_i - theta_j)^2)^p`` (the p-th power of minus the curvature of the
simplicial connection ``sum t_i theta_i``, restricted to ``Delta^r x
NbarG(r)``), trace, scale by ``1/p! (1/2 pi i)^p`` and integrate over the
simplex.  Simplex integrals are evaluated exactly by

    int_{Delta^r} t_0^{b_0} .. t_r^{b_r} dt_1..dt_r
        = b_0! .. b_r! / (b_0 + .. + b_r + r)!

The supported range is p <= 4; the enumeration grows like (p-q-1)! times
the number of insertion sequences.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from .algebra import (
    NBARG,
    NG,
    Context,
    FormExpr,
    MatrixForm,
    Word,
    dvar,
    inv,
    var,
)
from .simplicial import CochainSet

__all__ = [
    "MAX_CHERN_DEGREE",
    "dirichlet",
    "phi_word",
    "phi_form",
    "theta_form",
    "r_form",
    "chern_character_component",
    "chern_character_cocycle",
    "bar_chern_component",
    "simplicial_connection",
    "curvature",
    "curvature_power_expansion",
    "integrate_over_simplex",
    "second_chern_class_cocycle",
    "chern_simons_second_chern",
    "chern_simons_transgression",
]

MAX_CHERN_DEGREE = 4


def _check_envelope(p: int, q: int | None = None) -> None:
    if p < 1:
        raise ValueError("Chern character degree p must be >= 1")
    if p > MAX_CHERN_DEGREE:
        raise ValueError(
            f"p = {p} exceeds the supported envelope p <= {MAX_CHERN_DEGREE} "
            "(enumeration cost grows factorially)"
        )
    if q is not None and not 0 <= q <= p - 1:
        raise ValueError(f"q = {q} out of range 0..{p - 1}")


def dirichlet(exponents) -> Fraction:
    """Exact simplex integral of a barycentric monomial.

    ``dirichlet((b_0..b_r)) = prod b_i! / (sum b_i + r)!`` equals
    ``int_{Delta^r} t_0^{b_0} .. t_r^{b_r} dt_1 .. dt_r``.
    """
    b = [int(x) for x in exponents]
    if not b or any(x < 0 for x in b):
        raise ValueError("exponent vector must be nonempty and nonnegative")
    r = len(b) - 1
    num = 1
    for x in b:
        num *= math.factorial(x)
    return Fraction(num, math.factorial(sum(b) + r))


# -- generator words -----------------------------------------------------------


def phi_word(s: int) -> Word:
    """``phi_s = h_1 .. h_{s-1} dh_s h_s^{-1} .. h_1^{-1}`` (degree 1)."""
    if s < 1:
        raise ValueError("phi index must be >= 1")
    return (
        tuple(var(i) for i in range(1, s))
        + (dvar(s),)
        + tuple(inv(i) for i in range(s, 0, -1))
    )


def phi_form(ctx: Context, s: int) -> MatrixForm:
    return MatrixForm.word(ctx, phi_word(s))


def theta_form(ctx: Context, i: int) -> MatrixForm:
    """Maurer-Cartan pullback ``theta_i = g_i^{-1} dg_i`` on NbarG."""
    return MatrixForm.word(ctx, (inv(i), dvar(i)))


def _bar_psi(ctx: Context, i: int) -> MatrixForm:
    """``theta_{i-1} - theta_i``, the NbarG image of phi_i under gamma."""
    return theta_form(ctx, i - 1) - theta_form(ctx, i)


def r_form(ctx: Context, i: int, j: int) -> MatrixForm:
    """``R_{ij} = (phi_i + .. + phi_{j-1})^2`` as an untraced 2-form."""
    if not i < j:
        raise ValueError("r_form requires i < j")
    s = phi_form(ctx, i)
    for u in range(i + 1, j):
        s = s + phi_form(ctx, u)
    return s @ s


def _bar_q(ctx: Context, a: int, b: int) -> MatrixForm:
    s = _bar_psi(ctx, a + 1)
    for u in range(a + 2, b + 1):
        s = s + _bar_psi(ctx, u)
    return s @ s  # equals (theta_a - theta_b)^2


def _compositions(total: int, parts: int):
    """All orderings of ``total`` into ``parts`` nonnegative summands."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _insertion_sequences(r: int, q: int, pairs):
    """Yield per-gap ordered sequences of insertion labels.

    There are r gaps (after the leading letter and after each S-letter);
    each gap receives an ordered tuple of labels and the total count is q.
    The order within a gap matters because the inserted factors do not
    commute; sequences differing only across distinct gaps produce
    distinct words anyway.
    """
    pairs = tuple(pairs)
    for comp in _compositions(q, r):
        per_gap = [itertools.product(pairs, repeat=c) for c in comp]
        yield from itertools.product(*per_gap)


def _component(ctx: Context, p: int, q: int, lead: MatrixForm, s_letter) -> FormExpr:
    """Shared enumeration behind both closed-form components.

    ``lead`` is the fixed leading 1-form and ``s_letter(ctx, s)`` the s-th
    alphabet letter; the insertion ``R_{ij}`` carries the barycentric
    weight ``t_{i-1} t_{j-1}``.
    """
    r = p - q
    nvars = r + 1
    out = FormExpr.zero(ctx)
    pairs = [(i, j) for i in range(1, r + 1) for j in range(i + 1, r + 2)]
    for sigma in itertools.permutations(range(1, r)):
        sgn = _perm_sign(sigma)
        letters = [lead] + [s_letter(ctx, k + 1) for k in sigma]
        for gaps in _insertion_sequences(r, q, pairs):
            exps = [0] * nvars
            for gap in gaps:
                for i, j in gap:
                    exps[i - 1] += 1
                    exps[j - 1] += 1
            weight = dirichlet(exps)
            word = letters[0]
            for gi in range(r):
                for pair in gaps[gi]:
                    word = word @ _insert_factor(ctx, pair, s_letter)
                if gi + 1 < r:
                    word = word @ letters[gi + 1]
            out = out + word.trace().scale(Fraction(sgn) * weight)
    prefactor = Fraction(1, math.factorial(p - 1)) * ((-1) ** (r * (r - 1) // 2))
    return out.scale(prefactor, ipi_shift=p)


def _insert_factor(ctx: Context, pair: tuple[int, int], s_letter) -> MatrixForm:
    i, j = pair
    if s_letter is phi_form:
        return r_form(ctx, i, j)
    return _bar_q(ctx, i - 1, j - 1)


def _perm_sign(perm) -> int:
    inv_count = 0
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b]:
                inv_count += 1
    return -1 if inv_count % 2 else 1


def chern_character_component(p: int, q: int) -> FormExpr:
    """Closed-form component ``w_{p-q}`` on ``NG(p-q)``, form degree p+q."""
    _check_envelope(p, q)
    ctx = Context(NG, p - q, 0)
    return _component(ctx, p, q, phi_form(ctx, 1), phi_form)


def bar_chern_component(p: int, q: int) -> FormExpr:
    """Closed-form component on ``NbarG(p-q)``; the gamma image of
    :func:`chern_character_component`."""
    _check_envelope(p, q)
    ctx = Context(NBARG, p - q, 0)
    return _component(ctx, p, q, _bar_psi(ctx, 1), _bar_psi)


def chern_character_cocycle(p: int) -> CochainSet:
    """The full cocycle ``w_1 + ... + w_p`` of total degree 2p on NG."""
    _check_envelope(p)
    comps = {p - q: chern_character_component(p, q) for q in range(p)}
    return CochainSet(NG, 2 * p, comps)


# -- oracle: curvature of the simplicial connection ------------------------------


def simplicial_connection(level: int) -> MatrixForm:
    """Dupont's connection ``theta = sum_i t_i theta_i`` restricted to
    ``Delta^level x NbarG(level)``."""
    ctx = Context(NBARG, level, level)
    out = MatrixForm.zero(ctx)
    for i in range(level + 1):
        e = tuple(1 if j == i else 0 for j in range(level + 1))
        out = out + theta_form(ctx, i).scale_tmono(e)
    return out


def curvature(level: int) -> MatrixForm:
    """``Omega = d theta + theta ^ theta`` (for matrix-valued odd theta,
    ``(1/2)[theta, theta] = theta ^ theta``)."""
    th = simplicial_connection(level)
    return th.d() + (th @ th)


def curvature_power_expansion(p: int, q: int) -> FormExpr:
    """``(1/p!) (1/2 pi i)^p tr((-Omega)^p)`` on ``Delta^{p-q} x NbarG(p-q)``.

    Uses the reduced expansion in which each ``dt_i`` multiplies
    ``theta_{i-1} - theta_i`` only; the discarded cross terms cancel in
    pairs inside the p-th power on the top dt-degree component, which is
    all that survives integration.
    """
    _check_envelope(p, q)
    r = p - q
    ctx = Context(NBARG, r, r)
    base = MatrixForm.zero(ctx)
    for i in range(1, r + 1):
        dt_i = MatrixForm.build(ctx, [(Fraction(1), None, (i,), ())])
        base = base + (dt_i @ _bar_psi(ctx, i))
    for i in range(r + 1):
        for j in range(i + 1, r + 1):
            e = tuple((1 if k in (i, j) else 0) for k in range(r + 1))
            base = base + _bar_q(ctx, i, j).scale_tmono(e)
    power = base
    for _ in range(p - 1):
        power = power @ base
    return power.trace().scale(Fraction(1, math.factorial(p)), ipi_shift=p)


def integrate_over_simplex(a: FormExpr) -> FormExpr:
    """Fiber integration ``I_Delta``: keep the ``dt_1 ^ .. ^ dt_r`` part
    and replace the barycentric polynomial by its exact integral."""
    r = a.context.simplex_dim
    target = tuple(range(1, r + 1))
    out_ctx = Context(a.context.family, a.context.level, 0)
    raw = []
    for t in a.terms:
        if t.dts != target:
            continue
        c = Fraction(0)
        for exps, cc in t.tpoly:
            c += cc * dirichlet(exps)
        raw.append((t.coeff * c, t.ipi, None, (), t.traces))
    return FormExpr.build(out_ctx, raw)


# -- second Chern class and Chern-Simons forms ------------------------------------


def second_chern_class_cocycle() -> CochainSet:
    """The cocycle for the second Chern class ``c_2 = (ch_1^2 - 2 ch_2)/2``:
    component ``-(1/6) tr(h^-1 dh)^3`` at level 1 and ``(1/2) tr(dh_1 dh_2
    h_2^-1 h_1^-1) - (1/2) tr(h_1^-1 dh_1) tr(h_2^-1 dh_2)`` at level 2,
    both times ``(1/2 pi i)^2``."""
    ctx1 = Context(NG, 1, 0)
    ctx2 = Context(NG, 2, 0)
    mc = (inv(1), dvar(1))
    c13 = FormExpr.from_traces(ctx1, Fraction(-1, 6), [mc * 3], ipi=2)
    c22 = FormExpr.from_traces(
        ctx2, Fraction(1, 2), [(dvar(1), dvar(2), inv(2), inv(1))], ipi=2
    ) + FormExpr.from_traces(
        ctx2, Fraction(-1, 2), [(inv(1), dvar(1)), (inv(2), dvar(2))], ipi=2
    )
    return CochainSet(NG, 4, {1: c13, 2: c22})


def chern_simons_second_chern() -> CochainSet:
    """The Chern-Simons cochain of total degree 3 on the decorated nerve:
    ``(1/6) tr(g^-1 dg)^3`` at level 0 and ``(1/2) tr(g_0^-1 dg_0 g_1^-1
    dg_1) - (1/2) tr(g_0^-1 dg_0) tr(g_1^-1 dg_1)`` at level 1."""
    ctx0 = Context(NBARG, 0, 0)
    ctx1 = Context(NBARG, 1, 0)
    mc0 = (inv(0), dvar(0))
    t03 = FormExpr.from_traces(ctx0, Fraction(1, 6), [mc0 * 3], ipi=2)
    t12 = FormExpr.from_traces(
        ctx1, Fraction(1, 2), [(inv(0), dvar(0), inv(1), dvar(1))], ipi=2
    ) + FormExpr.from_traces(
        ctx1, Fraction(-1, 2), [(inv(0), dvar(0)), (inv(1), dvar(1))], ipi=2
    )
    return CochainSet(NBARG, 3, {0: t03, 1: t12})


def _c2_pairing(alpha: MatrixForm, beta: MatrixForm) -> FormExpr:
    """Polarized second Chern class polynomial applied to two matrix-valued
    forms: ``(1/2)(tr a ^ tr b - (tr(ab) + tr(ba))/2)``, times
    ``(1/2 pi i)^2``."""
    tt = alpha.trace().wedge(beta.trace())
    cross = (alpha @ beta).trace() + (beta @ alpha).trace()
    return (tt - cross.scale(Fraction(1, 2))).scale(Fraction(1, 2), ipi_shift=2)


def chern_simons_transgression(level: int, integrated: bool = True) -> FormExpr:
    """Transgression ``TP(theta) = k int_0^1 P(theta ^ phi_t^{k-1}) dt`` for
    the second Chern class (k = 2), with ``phi_t = t Omega + (1/2) t (t-1)
    [theta, theta]``.

    The parameter ``t`` is expanded polynomially; each power integrates
    exactly via ``int_0^1 t^a dt = a! 0! / (a+1)!``.  With ``integrated``
    the simplex directions are integrated out as well, producing the
    level-``level`` component of :func:`chern_simons_second_chern`.
    """
    if level not in (0, 1):
        raise ValueError("transgression is implemented for levels 0 and 1")
    th = simplicial_connection(level)
    omega = curvature(level)
    th2 = th @ th
    # phi_t = t*Omega + (t^2 - t)*theta^2 as a polynomial in t.
    phi_t: dict[int, MatrixForm] = {1: omega - th2, 2: th2}
    ctx = th.context
    total = FormExpr.zero(ctx)
    for power, mf in phi_t.items():
        piece = _c2_pairing(th, mf)
        total = total + piece.scale(Fraction(2, power + 1))
    if integrated:
        return integrate_over_simplex(total)
    return total

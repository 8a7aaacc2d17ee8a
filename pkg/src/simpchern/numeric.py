"""Numerical ground truth: evaluation of symbolic forms at sampled points.

A point of ``NG(p)`` or ``NbarG(p)`` is a tuple of invertible complex
matrices, optionally with barycentric simplex coordinates.  A k-form is
evaluated on k tangents with the determinant convention

    (a_1 ^ ... ^ a_k)(V_1..V_k) = sum_s sgn(s) prod_j a_j(V_{s(j)})

(no 1/k!), where each degree-1 slot is either a ``dt_i`` (read from the
tangent's simplex component) or a differential letter (read from the
tangent's matrix component for that factor).

Derivatives are validated against central finite differences along
ambient-linear curves ``H + s X``; this is exact in the limit because
``GL(n, C)^p`` is open in a linear space and constant coefficient fields
commute.  Equality of forms is decided by randomized evaluation at two
matrix sizes ``n`` and ``n+1`` with ``n >= L/2 + 1`` for the longest trace
word ``L``, which rules out accidental matrix identities of small sizes.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .algebra import NBARG, NG, Context, FormExpr

__all__ = [
    "NumericConfig",
    "Tangent",
    "EvalPoint",
    "sample_point",
    "evaluate",
    "CheckReport",
    "equal_numeric",
    "zero_numeric",
    "fd_derivative_check",
    "gamma_point",
    "face_point",
    "default_matrix_size",
    "relative_residual",
]

TWO_PI_I = 2j * np.pi
IPI = 1.0 / TWO_PI_I  # the numeric value of the symbolic (1/2 pi i)


@dataclass(frozen=True)
class NumericConfig:
    """Knobs for randomized numeric checks.

    ``group`` selects the sampling mode: ``gl`` (default), ``u`` for
    unitary points, ``su`` for special-unitary points with traceless
    anti-Hermitian tangents.
    """

    n: int | None = None
    samples: int = 20
    seed: int = 20260810
    tolerance: float = 1e-9
    fd_step: float = 1e-4
    fd_tolerance: float = 1e-6
    cond_bound: float = 1e4
    group: str = "gl"

    def with_(self, **kw) -> "NumericConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class Tangent:
    """An ambient tangent vector: one matrix per group factor, plus an
    optional simplex component summing to zero."""

    matrices: tuple[np.ndarray, ...]
    simplex: np.ndarray | None = None

    def dt(self, i: int) -> complex:
        if self.simplex is None:
            return 0.0
        return complex(self.simplex[i])


@dataclass(frozen=True)
class EvalPoint:
    """A sample point with its tangent list.

    ``matrices`` are indexed by tuple position; the letter index ``i`` of a
    form maps to position ``i-1`` on NG and ``i`` on NbarG.
    """

    context: Context
    matrices: tuple[np.ndarray, ...]
    tangents: tuple[Tangent, ...] = ()
    simplex: np.ndarray | None = None

    def __post_init__(self) -> None:
        want = self.context.level if self.context.family == NG else self.context.level + 1
        if len(self.matrices) != want:
            raise ValueError(
                f"{self.context.family}({self.context.level}) needs {want} matrices, "
                f"got {len(self.matrices)}"
            )

    def _pos(self, index: int) -> int:
        return index - 1 if self.context.family == NG else index

    def matrix(self, index: int) -> np.ndarray:
        return self.matrices[self._pos(index)]

    def tangent_matrix(self, t: Tangent, index: int) -> np.ndarray:
        return t.matrices[self._pos(index)]

    def shifted(self, tangent: Tangent, s: float) -> "EvalPoint":
        mats = tuple(m + s * x for m, x in zip(self.matrices, tangent.matrices))
        simplex = self.simplex
        if simplex is not None and tangent.simplex is not None:
            simplex = simplex + s * tangent.simplex
        return EvalPoint(self.context, mats, self.tangents, simplex)


def default_matrix_size(*forms: FormExpr) -> int:
    """``max(3, ceil(L/2) + 1)`` for the longest trace word among the forms."""
    L = max((f.max_word_length() for f in forms), default=0)
    return max(3, (L + 1) // 2 + 1)


def _rng(cfg: NumericConfig, *salt: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, *salt])


def _complex_gaussian(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def sample_point(
    context: Context,
    cfg: NumericConfig,
    index: int,
    degree: int,
    n: int | None = None,
) -> EvalPoint:
    """Deterministic sample: identical (seed, index, n) give identical
    points.  Matrices are resampled until the condition bound holds."""
    n = n if n is not None else (cfg.n or 3)
    count = context.level if context.family == NG else context.level + 1
    rng = _rng(cfg, index, n, 0x5A)
    mats = []
    for _ in range(count):
        for attempt in range(64):
            if cfg.group in ("u", "su"):
                a = _complex_gaussian(rng, n)
                x = (a - a.conj().T) / 2.0
                if cfg.group == "su":
                    x = x - (np.trace(x) / n) * np.eye(n)
                from scipy.linalg import expm

                m = expm(0.5 * x)
            else:
                m = np.eye(n) + 0.5 * _complex_gaussian(rng, n) / math.sqrt(2 * n)
            if np.linalg.cond(m) < cfg.cond_bound:
                mats.append(m)
                break
        else:
            raise RuntimeError("could not sample a well-conditioned matrix")
    tangents = []
    r = context.simplex_dim
    for _ in range(degree):
        tm = []
        for j in range(count):
            x = _complex_gaussian(rng, n)
            if cfg.group in ("u", "su"):
                x = (x - x.conj().T) / 2.0
                if cfg.group == "su":
                    x = x - (np.trace(x) / n) * np.eye(n)
                x = mats[j] @ x
            tm.append(x)
        simplex = None
        if r > 0:
            v = rng.standard_normal(r + 1)
            simplex = v - v.mean()
        tangents.append(Tangent(tuple(tm), simplex))
    simplex = rng.dirichlet(np.ones(r + 1)) if r > 0 else (np.array([1.0]) if r == 0 else None)
    return EvalPoint(context, tuple(mats), tuple(tangents), simplex)


# -- evaluation -----------------------------------------------------------------


def _term_slots(term) -> list[tuple[str, int, int]]:
    """Ordered degree-1 slots of a term: ('dt', i, -) then, per trace
    factor f, ('tr', f, position-in-word) for each differential letter."""
    slots: list[tuple[str, int, int]] = [("dt", i, -1) for i in term.dts]
    for fi, w in enumerate(term.traces):
        for pos, (k, _) in enumerate(w):
            if k == "d":
                slots.append(("tr", fi, pos))
    return slots


def evaluate(a: FormExpr, pt: EvalPoint) -> complex:
    """Evaluate a form at a point on the point's tangent list.

    Terms whose degree differs from the number of tangents contribute
    nothing; a homogeneous nonzero form of the wrong degree is an error.
    """
    if pt.context != a.context:
        raise ValueError(f"point context {pt.context} does not match form {a.context}")
    k = len(pt.tangents)
    degs = a.degrees()
    if degs and k not in degs and len(degs) == 1:
        raise ValueError(f"form has degree {degs.pop()}, got {k} tangents")
    n = pt.matrices[0].shape[0] if pt.matrices else 1
    inv_cache: dict[int, np.ndarray] = {}

    def letter_matrix(kind: str, index: int, tangent: Tangent | None) -> np.ndarray:
        if kind == "v":
            return pt.matrix(index)
        if kind == "i":
            p = pt._pos(index)
            if p not in inv_cache:
                inv_cache[p] = np.linalg.inv(pt.matrices[p])
            return inv_cache[p]
        assert tangent is not None
        return pt.tangent_matrix(tangent, index)

    total = 0.0 + 0.0j
    for term in a.terms:
        if term.degree != k:
            continue
        slots = _term_slots(term)
        tval = 0.0 + 0.0j
        for exps, c in term.tpoly:
            mono = float(c)
            if pt.simplex is not None:
                for i, e in enumerate(exps):
                    if e:
                        mono *= pt.simplex[i] ** e
            elif any(exps):
                raise ValueError("form has t-variables but point has no simplex coords")
            tval += mono
        if tval == 0:
            continue
        term_sum = 0.0 + 0.0j
        for perm in itertools.permutations(range(k)):
            sgn = _perm_sign(perm)
            assigned = [pt.tangents[j] for j in perm]
            val = 1.0 + 0.0j
            si = 0
            ok = True
            # dt slots
            for kind, i, _ in slots:
                if kind != "dt":
                    break
                val *= assigned[si].dt(i)
                si += 1
                if val == 0:
                    ok = False
                    break
            if not ok:
                continue
            # trace factors
            fi_start = si
            for fi, w in enumerate(term.traces):
                mat = np.eye(n, dtype=complex)
                for pos, (kd, idx) in enumerate(w):
                    if kd == "d":
                        mat = mat @ letter_matrix(kd, idx, assigned[fi_start])
                        fi_start += 1
                    else:
                        mat = mat @ letter_matrix(kd, idx, None)
                val *= np.trace(mat) if w else n
            term_sum += sgn * val
        total += complex(term.coeff) * (IPI ** term.ipi) * tval * term_sum
    return total


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def relative_residual(x: complex, y: complex) -> float:
    return abs(x - y) / max(1.0, abs(x), abs(y))


# -- reports --------------------------------------------------------------------


@dataclass
class CheckReport:
    """Outcome of one randomized check; serializable for the CLI."""

    check: str
    context: str
    n: tuple[int, ...]
    samples: int
    max_residual: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "check": self.check,
                "context": self.context,
                "n": list(self.n),
                "samples": self.samples,
                "maxResidual": self.max_residual,
                "pass": self.passed,
                **self.details,
            },
            sort_keys=True,
        )


def equal_numeric(a: FormExpr, b: FormExpr, cfg: NumericConfig) -> CheckReport:
    """Randomized equality at two matrix sizes.

    Degrees must agree for the comparison to make sense; inhomogeneous
    inputs are compared per common tangent count.
    """
    if a.context != b.context:
        raise ValueError("cannot compare forms on different spaces")
    diff = a - b
    if diff.is_zero():
        return CheckReport(
            "equal_numeric", str(a.context), (0,), 0, 0.0, True, {"symbolic": True}
        )
    degs = sorted(a.degrees() | b.degrees())
    n0 = cfg.n or default_matrix_size(a, b)
    worst = 0.0
    for n in (n0, n0 + 1):
        for idx in range(cfg.samples):
            for k in degs:
                pt = sample_point(a.context, cfg, idx * 16 + k, k, n=n)
                va = evaluate(a, pt)
                vb = evaluate(b, pt)
                worst = max(worst, relative_residual(va, vb))
    return CheckReport(
        "equal_numeric",
        str(a.context),
        (n0, n0 + 1),
        cfg.samples,
        worst,
        worst < cfg.tolerance,
    )


def zero_numeric(parts: Sequence[FormExpr], cfg: NumericConfig, check: str = "zero_numeric") -> CheckReport:
    """Check that a sum of forms vanishes, normalizing by the size of the
    individual summands (so cancellations are measured relatively)."""
    parts = [p for p in parts if not p.is_zero()]
    if not parts:
        return CheckReport(check, "-", (0,), 0, 0.0, True, {"symbolic": True})
    ctx = parts[0].context
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    if total.is_zero():
        return CheckReport(check, str(ctx), (0,), 0, 0.0, True, {"symbolic": True})
    degs = sorted(set().union(*(p.degrees() for p in parts)))
    n0 = cfg.n or default_matrix_size(*parts)
    worst = 0.0
    for n in (n0, n0 + 1):
        for idx in range(cfg.samples):
            for k in degs:
                pt = sample_point(ctx, cfg, idx * 16 + k, k, n=n)
                vals = [evaluate(p, pt) for p in parts]
                scale = max([1.0] + [abs(v) for v in vals])
                worst = max(worst, abs(sum(vals)) / scale)
    return CheckReport(check, str(ctx), (n0, n0 + 1), cfg.samples, worst, worst < cfg.tolerance)


def fd_derivative_check(a: FormExpr, cfg: NumericConfig) -> CheckReport:
    """Compare the symbolic ``d`` against central finite differences.

    For constant ambient fields, ``(d a)(V_0..V_k) = sum_i (-1)^i
    d/ds a(V_0..^V_i..V_k)(pt + s V_i)``.
    """
    da = a.d()
    if da.is_zero():
        return CheckReport(
            "fd_derivative", str(a.context), (0,), 0, 0.0, True, {"symbolic": True}
        )
    k = a.degree()
    n0 = cfg.n or default_matrix_size(a, da)
    h = cfg.fd_step
    threshold = max(cfg.fd_tolerance, 50.0 * h * h)
    worst = 0.0
    for idx in range(cfg.samples):
        pt = sample_point(a.context, cfg, idx, k + 1, n=n0)
        lhs = evaluate(da, pt)
        rhs = 0.0 + 0.0j
        for i in range(k + 1):
            rest = pt.tangents[:i] + pt.tangents[i + 1 :]
            vi = pt.tangents[i]
            base = EvalPoint(pt.context, pt.matrices, rest, pt.simplex)
            plus = evaluate(a, base.shifted(vi, +h))
            minus = evaluate(a, base.shifted(vi, -h))
            deriv = (plus - minus) / (2 * h)
            rhs += deriv if i % 2 == 0 else -deriv
        worst = max(worst, relative_residual(lhs, rhs))
    return CheckReport(
        "fd_derivative",
        str(a.context),
        (n0,),
        cfg.samples,
        worst,
        worst < threshold,
        {"fdStep": h},
    )


# -- point-level simplicial maps ---------------------------------------------------


def gamma_point(pt: EvalPoint) -> EvalPoint:
    """Push a point of NbarG(q) to NG(q), mapping tangents by the analytic
    derivative of ``gamma``."""
    if pt.context.family != NBARG:
        raise ValueError("gamma_point expects an NbarG point")
    q = pt.context.level
    g = pt.matrices
    ginv = [np.linalg.inv(m) for m in g]
    mats = tuple(g[j - 1] @ ginv[j] for j in range(1, q + 1))

    def push(t: Tangent) -> Tangent:
        out = []
        for j in range(1, q + 1):
            x, y = t.matrices[j - 1], t.matrices[j]
            out.append(x @ ginv[j] - g[j - 1] @ ginv[j] @ y @ ginv[j])
        return Tangent(tuple(out), t.simplex)

    return EvalPoint(
        Context(NG, q, pt.context.simplex_dim),
        mats,
        tuple(push(t) for t in pt.tangents),
        pt.simplex,
    )


def face_point(i: int, pt: EvalPoint) -> EvalPoint:
    """Apply the face map ``e_i`` to a point (and its tangents)."""
    ctx = pt.context
    q = ctx.level
    if not 0 <= i <= q:
        raise ValueError(f"face index {i} out of range 0..{q}")
    tgt = Context(ctx.family, q - 1, ctx.simplex_dim)
    if ctx.family == NBARG:
        mats = pt.matrices[:i] + pt.matrices[i + 1 :]
        tans = tuple(
            Tangent(t.matrices[:i] + t.matrices[i + 1 :], t.simplex)
            for t in pt.tangents
        )
        return EvalPoint(tgt, mats, tans, pt.simplex)
    if i == 0:
        mats = pt.matrices[1:]
        tans = tuple(Tangent(t.matrices[1:], t.simplex) for t in pt.tangents)
    elif i == q:
        mats = pt.matrices[:-1]
        tans = tuple(Tangent(t.matrices[:-1], t.simplex) for t in pt.tangents)
    else:
        merged = pt.matrices[i - 1] @ pt.matrices[i]
        mats = pt.matrices[: i - 1] + (merged,) + pt.matrices[i + 1 :]

        def push(t: Tangent) -> Tangent:
            dm = t.matrices[i - 1] @ pt.matrices[i] + pt.matrices[i - 1] @ t.matrices[i]
            return Tangent(t.matrices[: i - 1] + (dm,) + t.matrices[i + 1 :], t.simplex)

        tans = tuple(push(t) for t in pt.tangents)
    return EvalPoint(tgt, mats, tans, pt.simplex)

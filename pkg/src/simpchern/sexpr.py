"""Serialization of forms: s-expressions (normative), JSON mirror, LaTeX.

Grammar::

    (form (ctx <NG|NbarG> <level> <sdim>) <term>*)
    (term (coeff <p>/<q> (ipi <k>)) [(dt <i>*)] [(tpoly (<coef> (<i> <exp>)*)*)]
          (tr <letter>*)*)
    letter := (h i) | (inv i) | (dh i) | (g i) | (ginv i) | (dg i)

The s-expression and JSON forms round-trip exactly on normal forms; the
LaTeX emitter is one-way.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .algebra import NBARG, NG, Context, FormExpr, Term

__all__ = ["to_sexpr", "from_sexpr", "to_json", "from_json", "to_latex", "serialize", "parse"]

_NG_TOKENS = {"v": "h", "i": "inv", "d": "dh"}
_NBARG_TOKENS = {"v": "g", "i": "ginv", "d": "dg"}
_KIND_OF_TOKEN = {
    "h": "v", "inv": "i", "dh": "d",
    "g": "v", "ginv": "i", "dg": "d",
}
_NG_TOKEN_SET = {"h", "inv", "dh"}


def _letter_tokens(family: str) -> dict[str, str]:
    return _NG_TOKENS if family == NG else _NBARG_TOKENS


# -- emission ----------------------------------------------------------------


def _term_sexpr(term: Term, family: str) -> str:
    toks = _letter_tokens(family)
    parts = [f"(coeff {term.coeff} (ipi {term.ipi}))"]
    if term.dts:
        parts.append("(dt " + " ".join(str(i) for i in term.dts) + ")")
    if not _tpoly_is_one(term):
        monos = []
        for exps, c in term.tpoly:
            vars_ = " ".join(
                f"({i} {e})" for i, e in enumerate(exps) if e
            )
            monos.append(f"({c}{(' ' + vars_) if vars_ else ''})")
        parts.append("(tpoly " + " ".join(monos) + ")")
    for w in term.traces:
        inner = "".join(f"({toks[k]} {i})" for k, i in w)
        parts.append(f"(tr {inner})")
    return "(term " + " ".join(parts) + ")"


def _tpoly_is_one(term: Term) -> bool:
    if len(term.tpoly) != 1:
        return False
    exps, c = term.tpoly[0]
    return c == 1 and all(e == 0 for e in exps)


def to_sexpr(form: FormExpr) -> str:
    ctx = form.context
    head = f"(ctx {ctx.family} {ctx.level} {ctx.simplex_dim})"
    body = " ".join(_term_sexpr(t, ctx.family) for t in form.terms)
    return f"(form {head}{(' ' + body) if body else ''})"


# -- parsing -----------------------------------------------------------------


def _tokenize(text: str):
    text = text.replace("(", " ( ").replace(")", " ) ")
    return text.split()


def _read(tokens: list[str], pos: int):
    if tokens[pos] != "(":
        return tokens[pos], pos + 1
    out = []
    pos += 1
    while tokens[pos] != ")":
        node, pos = _read(tokens, pos)
        out.append(node)
    return out, pos + 1


def from_sexpr(text: str) -> FormExpr:
    tokens = _tokenize(text)
    tree, pos = _read(tokens, 0)
    if pos != len(tokens):
        raise ValueError("trailing data after form expression")
    return _form_from_tree(tree)


def _form_from_tree(tree) -> FormExpr:
    if not isinstance(tree, list) or not tree or tree[0] != "form":
        raise ValueError("expected (form ...)")
    ctx_node = tree[1]
    if ctx_node[0] != "ctx":
        raise ValueError("expected (ctx ...)")
    family = ctx_node[1]
    if family not in (NG, NBARG):
        raise ValueError(f"unknown family {family!r}")
    ctx = Context(family, int(ctx_node[2]), int(ctx_node[3]))
    raw_terms = []
    for tnode in tree[2:]:
        if tnode[0] != "term":
            raise ValueError("expected (term ...)")
        coeff = Fraction(1)
        ipi = 0
        dts: tuple[int, ...] = ()
        tpoly = None
        traces = []
        for item in tnode[1:]:
            tag = item[0]
            if tag == "coeff":
                coeff = Fraction(item[1])
                for sub in item[2:]:
                    if sub[0] == "ipi":
                        ipi = int(sub[1])
            elif tag == "dt":
                dts = tuple(int(x) for x in item[1:])
            elif tag == "tpoly":
                tpoly = {}
                for mono in item[1:]:
                    c = Fraction(mono[0])
                    exps = [0] * (ctx.simplex_dim + 1)
                    for pair in mono[1:]:
                        exps[int(pair[0])] = int(pair[1])
                    key = tuple(exps)
                    tpoly[key] = tpoly.get(key, Fraction(0)) + c
            elif tag == "tr":
                word = []
                for lett in item[1:]:
                    tok, idx = lett[0], int(lett[1])
                    kind = _KIND_OF_TOKEN.get(tok)
                    if kind is None:
                        raise ValueError(f"unknown letter token {tok!r}")
                    if (tok in _NG_TOKEN_SET) != (family == NG):
                        raise ValueError(
                            f"letter {tok!r} does not belong to family {family}"
                        )
                    word.append((kind, idx))
                traces.append(tuple(word))
            else:
                raise ValueError(f"unknown term component {tag!r}")
        raw_terms.append((coeff, ipi, tpoly, dts, tuple(traces)))
    return FormExpr.build(ctx, raw_terms)


# -- JSON mirror ----------------------------------------------------------------


def to_json(form: FormExpr) -> str:
    ctx = form.context
    toks = _letter_tokens(ctx.family)
    terms = []
    for t in form.terms:
        entry = {
            "coeff": str(t.coeff),
            "ipi": t.ipi,
            "tr": [[[toks[k], i] for k, i in w] for w in t.traces],
        }
        if t.dts:
            entry["dt"] = list(t.dts)
        if not _tpoly_is_one(t):
            entry["tpoly"] = [
                [str(c), [[i, e] for i, e in enumerate(exps) if e]]
                for exps, c in t.tpoly
            ]
        terms.append(entry)
    doc = {
        "form": {
            "ctx": {"family": ctx.family, "level": ctx.level, "sdim": ctx.simplex_dim},
            "terms": terms,
        }
    }
    return json.dumps(doc, sort_keys=True)


def from_json(text: str) -> FormExpr:
    doc = json.loads(text)["form"]
    ctx = Context(doc["ctx"]["family"], doc["ctx"]["level"], doc["ctx"]["sdim"])
    raw_terms = []
    for t in doc["terms"]:
        tpoly = None
        if "tpoly" in t:
            tpoly = {}
            for c, pairs in t["tpoly"]:
                exps = [0] * (ctx.simplex_dim + 1)
                for i, e in pairs:
                    exps[int(i)] = int(e)
                key = tuple(exps)
                tpoly[key] = tpoly.get(key, Fraction(0)) + Fraction(c)
        traces = tuple(
            tuple((_KIND_OF_TOKEN[tok], int(i)) for tok, i in w) for w in t["tr"]
        )
        raw_terms.append(
            (Fraction(t["coeff"]), int(t["ipi"]), tpoly, tuple(t.get("dt", ())), traces)
        )
    return FormExpr.build(ctx, raw_terms)


# -- LaTeX -----------------------------------------------------------------------


def _latex_letter(kind: str, i: int, family: str) -> str:
    sym = "h" if family == NG else "g"
    if kind == "v":
        return f"{sym}_{{{i}}}"
    if kind == "i":
        return f"{sym}_{{{i}}}^{{-1}}"
    return f"d{sym}_{{{i}}}"


def to_latex(form: FormExpr) -> str:
    """One-way rendering in the classical notation."""
    ctx = form.context
    if not form.terms:
        return "0"
    pieces = []
    for t in form.terms:
        c = t.coeff
        sign = "-" if c < 0 else "+"
        c = abs(c)
        if c == 1:
            coeff_tex = ""
        elif c.denominator == 1:
            coeff_tex = str(c.numerator)
        else:
            coeff_tex = f"\\frac{{{c.numerator}}}{{{c.denominator}}}"
        ipi_tex = (
            f"\\left(\\frac{{1}}{{2\\pi i}}\\right)^{{{t.ipi}}}" if t.ipi else ""
        )
        tp = ""
        if not _tpoly_is_one(t):
            monos = []
            for exps, cc in t.tpoly:
                mono = "".join(
                    f"t_{{{i}}}" + (f"^{{{e}}}" if e > 1 else "")
                    for i, e in enumerate(exps)
                    if e
                )
                monos.append(f"{cc} {mono}".strip())
            tp = "\\left(" + " + ".join(monos) + "\\right)"
        dts = "".join(f"dt_{{{i}}}\\wedge " for i in t.dts)
        trs = "".join(
            "\\mathrm{tr}\\left("
            + " ".join(_latex_letter(k, i, ctx.family) for k, i in w)
            + "\\right)"
            if w
            else "\\mathrm{tr}(1)"
            for w in t.traces
        )
        body = "".join(x for x in (coeff_tex, ipi_tex, tp, dts, trs) if x) or "1"
        pieces.append((sign, body))
    out = ""
    for j, (sign, body) in enumerate(pieces):
        if j == 0:
            out = ("-" if sign == "-" else "") + body
        else:
            out += f" {sign} {body}"
    return out


# -- dispatch helpers -------------------------------------------------------------

_FORMATS = {"sexpr": to_sexpr, "json": to_json, "latex": to_latex}


def serialize(form: FormExpr, fmt: str = "sexpr") -> str:
    try:
        return _FORMATS[fmt](form)
    except KeyError:
        raise ValueError(f"unknown format {fmt!r}; expected sexpr, json or latex") from None


def parse(text: str, fmt: str = "sexpr") -> FormExpr:
    if fmt == "sexpr":
        return from_sexpr(text)
    if fmt == "json":
        return from_json(text)
    raise ValueError(f"format {fmt!r} is not parseable")

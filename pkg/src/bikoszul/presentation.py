"""Finitely presented connected graded algebras T(V)/(relations).

Generators sit in degree one and relations are homogeneous of degree at least
two.  Every slice A_q is represented by a normal-word basis: the words that are
not leading (largest in descending lexicographic order) in the reduced ideal
slice.  Products are computed by iterated right multiplication by generators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .linalg import Field, SparseMatrix, rref

__all__ = [
    "ParseError",
    "TruncationError",
    "Presentation",
    "parse_presentation",
    "format_presentation",
    "graded_dim",
    "multiply",
    "graded_dim_oracle",
]

Word = tuple  # tuple of generator indices


class ParseError(ValueError):
    """Malformed input, with 1-based line and column."""

    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.msg, self.line, self.col = msg, line, col
        where = f"line {line}, col {col}: " if line else ""
        super().__init__(where + msg)


class TruncationError(ValueError):
    """A computation needed a degree beyond the declared truncation bound."""


_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Presentation:
    field: Field
    gens: tuple
    relations: tuple  # each a tuple of (word, coefficient) sorted by word
    maxdeg: int

    @property
    def ngens(self) -> int:
        return len(self.gens)

    def relation_degrees(self) -> list[int]:
        return [len(r[0][0]) for r in self.relations]

    @cached_property
    def algebra(self) -> "NormalForms":
        return NormalForms(self)

    def __hash__(self):
        return hash((self.field, self.gens, self.relations, self.maxdeg))


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*^]))")


def _parse_poly(src: str, col0: int, lineno: int, gens: dict, field: Field) -> dict:
    """Parse one noncommutative polynomial into {word: coefficient}."""
    toks = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {src[pos:].lstrip()[:1]!r}", lineno, col0 + pos + 1)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), col0 + start + 1))
        pos = m.end()
    toks.append(("end", "", col0 + len(src) + 1))

    i = 0

    def peek():
        return toks[i]

    def take(kind=None, val=None):
        nonlocal i
        t = toks[i]
        if (kind and t[0] != kind) or (val and t[1] != val):
            want = val or kind
            got = t[1] or "end of line"
            raise ParseError(f"expected {want}, got {got!r}", lineno, t[2])
        i += 1
        return t

    def factor():
        t = take("name")
        if t[1] not in gens:
            raise ParseError(f"unknown generator {t[1]!r}", lineno, t[2])
        word = (gens[t[1]],)
        if peek()[1] == "^":
            take("op", "^")
            e = take("int")
            k = int(e[1])
            if k < 1:
                raise ParseError("exponent must be positive", lineno, e[2])
            word = word * k
        return word

    poly: dict = {}
    first = True
    while True:
        sign = 1
        t = peek()
        if t[0] == "op" and t[1] in "+-":
            take()
            sign = -1 if t[1] == "-" else 1
        elif not first:
            raise ParseError(f"expected '+' or '-', got {t[1] or 'end of line'!r}", lineno, t[2])
        first = False
        coef = 1
        if peek()[0] == "int":
            coef = int(take("int")[1])
            take("op", "*")
        word = factor()
        while peek()[1] == "*":
            take("op", "*")
            word = word + factor()
        c = field(sign * coef)
        poly[word] = field.add(poly.get(word, field.zero), c)
        if peek()[0] == "end":
            break
    return {w: c for w, c in poly.items() if c}


def parse_presentation(text: str) -> Presentation:
    """Parse the line-oriented presentation format (see README)."""
    lines = []
    for n, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].rstrip()
        if body.strip():
            lines.append((n, body))
    if not lines:
        raise ParseError("empty input: missing 'field' header", 1, 1)

    def head(entry):
        n, body = entry
        stripped = body.lstrip()
        col = len(body) - len(stripped) + 1
        word = stripped.split(None, 1)[0]
        rest_at = col - 1 + len(word)
        return n, word, body[rest_at:], rest_at

    n, kw, rest, at = head(lines[0])
    if kw != "field":
        raise ParseError("missing 'field' header", n, 1)
    parts = rest.split()
    if parts == ["QQ"]:
        field = Field()
    elif len(parts) == 2 and parts[0] == "GF" and parts[1].isdigit():
        try:
            field = Field(int(parts[1]))
        except ValueError as e:
            raise ParseError(str(e), n, at + 2) from None
    else:
        raise ParseError("expected 'field GF <p>' or 'field QQ'", n, at + 2)

    if len(lines) < 2:
        raise ParseError("missing 'gens' line", n + 1, 1)
    n, kw, rest, at = head(lines[1])
    if kw != "gens":
        raise ParseError("expected 'gens' line", n, 1)
    names = rest.split()
    if not names:
        raise ParseError("at least one generator required", n, at + 1)
    gens: dict = {}
    for name in names:
        col = rest.index(name) + at + 1
        if not _NAME.fullmatch(name):
            raise ParseError(f"bad generator name {name!r}", n, col)
        if name in gens:
            raise ParseError(f"duplicate generator {name!r}", n, col)
        gens[name] = len(gens)

    n, kw, rest, at = head(lines[-1])
    if kw != "maxdeg" or len(lines) < 3:
        raise ParseError("missing 'maxdeg' line at end", n, 1)
    if not rest.strip().isdigit():
        raise ParseError("maxdeg expects a nonnegative integer", n, at + 2)
    maxdeg = int(rest)

    rels = []
    for entry in lines[2:-1]:
        n, kw, rest, at = head(entry)
        if kw != "rel":
            raise ParseError(f"unexpected keyword {kw!r}", n, 1)
        poly = _parse_poly(rest, at, n, gens, field)
        if not poly:
            raise ParseError("relation vanishes over this field", n, at + 1)
        degs = {len(w) for w in poly}
        if len(degs) > 1:
            raise ParseError(
                f"inhomogeneous relation {rest.strip()!r}: degrees {sorted(degs)}", n, at + 2
            )
        deg = degs.pop()
        if deg < 2:
            raise ParseError(f"relation {rest.strip()!r} has degree {deg} < 2", n, at + 2)
        rels.append(tuple(sorted(poly.items())))
    top = max((len(r[0][0]) for r in rels), default=0)
    if maxdeg < max(top, 1):
        raise ParseError(f"maxdeg {maxdeg} below largest relation degree {top}", lines[-1][0], 1)
    return Presentation(field, tuple(gens), tuple(rels), maxdeg)


def format_word(p: Presentation, w: Word) -> str:
    return "*".join(p.gens[i] for i in w) if w else "1"


def format_poly(p: Presentation, poly: Iterable) -> str:
    F = p.field
    out = []
    for w, c in sorted(poly, reverse=True):
        neg = F.p is None and c < 0
        mag = -c if neg else c
        body = format_word(p, w) if mag == 1 else f"{F.fmt(mag)}*{format_word(p, w)}"
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append(("- " if neg else "+ ") + body)
    return " ".join(out)


def format_presentation(p: Presentation) -> str:
    lines = [p.field.header, "gens " + " ".join(p.gens)]
    lines += ["rel " + format_poly(p, r) for r in p.relations]
    lines.append(f"maxdeg {p.maxdeg}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# normal forms


class NormalForms:
    """Normal-word bases of A_0..A_D and right multiplication by generators."""

    def __init__(self, pres: Presentation):
        self.pres = pres
        self.field = pres.field
        self.basis: list[list[Word]] = [[()]]
        self.index: list[dict] = [{(): 0}]
        # right[q][i][x] = sparse vector in A_{q+1} for basis[q][i] * gen x
        self.right: list[list[list[dict]]] = []
        self._computed = 0

    def upto(self, q: int):
        if q > self.pres.maxdeg:
            raise TruncationError(f"degree {q} exceeds maxdeg {self.pres.maxdeg}")
        while self._computed < q:
            self._next()
        return self

    def dim(self, q: int) -> int:
        self.upto(q)
        return len(self.basis[q])

    def _next(self):
        F = self.field
        p = self.pres
        q = self._computed + 1
        prev = self.basis[q - 1]
        cands = [(i, x) for i in range(len(prev)) for x in range(p.ngens)]
        # columns in descending word order: leftmost nonzero = leading word
        cands.sort(key=lambda ix: prev[ix[0]] + (ix[1],), reverse=True)
        col = {ix: j for j, ix in enumerate(cands)}
        rows = {}
        for rel in p.relations:
            s = len(rel[0][0])
            if s > q:
                continue
            for u in self.basis[q - s]:
                row: dict = {}
                for w, c in rel:
                    vec = self.word_vector(u + w[:-1])
                    for i, a in vec.items():
                        j = col[(i, w[-1])]
                        y = F.add(row.get(j, F.zero), F.mul(a, c))
                        if y:
                            row[j] = y
                        else:
                            row.pop(j, None)
                if row:
                    rows[len(rows)] = row
        m = SparseMatrix.from_rows(F, len(rows), len(cands), rows)
        red, pivots = rref(m)
        pivset = set(pivots)
        free = [j for j in range(len(cands)) if j not in pivset]
        # normal words in ascending order for a stable basis
        words = sorted(prev[cands[j][0]] + (cands[j][1],) for j in free)
        index = {w: k for k, w in enumerate(words)}
        colvec: dict = {}
        for j in free:
            i, x = cands[j]
            colvec[j] = {index[prev[i] + (x,)]: F.one}
        for r, pc in enumerate(pivots):
            v = {}
            for j, a in red.rows[r].items():
                if j != pc:
                    v[index[prev[cands[j][0]] + (cands[j][1],)]] = F.neg(a)
            colvec[pc] = v
        table = [[colvec[col[(i, x)]] for x in range(p.ngens)] for i in range(len(prev))]
        self.basis.append(words)
        self.index.append(index)
        self.right.append(table)
        self._computed = q

    def right_mul_gen(self, vec: Mapping, q: int, x: int) -> dict:
        """vec in A_q times generator x, as a vector in A_{q+1}."""
        self.upto(q + 1)
        F = self.field
        out: dict = {}
        tab = self.right[q]
        for i, a in vec.items():
            F.axpy(out, a, tab[i][x])
        return out

    def word_vector(self, w: Word) -> dict:
        """Normal form of a word."""
        self.upto(len(w))
        vec = {0: self.field.one}
        for q, x in enumerate(w):
            vec = self.right_mul_gen(vec, q, x)
            if not vec:
                break
        return vec

    def mul(self, a: Mapping, qa: int, b: Mapping, qb: int) -> dict:
        """Product of basis vectors a in A_qa and b in A_qb."""
        self.upto(qa + qb)
        F = self.field
        out: dict = {}
        for j, c in b.items():
            if not c:
                continue
            vec = dict(a)
            for k, x in enumerate(self.basis[qb][j]):
                vec = self.right_mul_gen(vec, qa + k, x)
                if not vec:
                    break
            F.axpy(out, c, vec)
        return out

    def basis_product_table(self, qa: int, qb: int) -> list[list[dict]]:
        """table[i][j] = basis[qa][i] * basis[qb][j], cached per (qa, qb)."""
        cache = self.__dict__.setdefault("_ptab", {})
        key = (qa, qb)
        if key not in cache:
            self.upto(qa + qb)
            one = self.field.one
            cache[key] = [
                [self.mul({i: one}, qa, {j: one}, qb) for j in range(len(self.basis[qb]))]
                for i in range(len(self.basis[qa]))
            ]
        return cache[key]


def graded_dim(p: Presentation, q: int) -> int:
    if q < 0:
        return 0
    return p.algebra.dim(q)


def _to_basis(p: Presentation, elem: Mapping) -> tuple[dict, int | None]:
    """Reduce {word: coef} to a normal-form vector and its degree."""
    alg = p.algebra
    F = p.field
    degs = {len(w) for w, c in elem.items() if F(c)}
    if len(degs) > 1:
        raise ValueError("element is not homogeneous")
    if not degs:
        return {}, None
    q = degs.pop()
    out: dict = {}
    for w, c in elem.items():
        F.axpy(out, F(c), alg.word_vector(tuple(w)))
    return out, q


def multiply(p: Presentation, a: Mapping, b: Mapping) -> dict:
    """Product of homogeneous elements given as {word: coef}.

    The result is {normal word: coef}.  Words may use generator names
    (strings) or indices.
    """
    def norm(e):
        out = {}
        for w, c in e.items():
            if isinstance(w, str):
                w = tuple(p.gens.index(t) for t in w.split("*")) if w not in ("", "1") else ()
            out[tuple(w)] = c
        return out

    a, b = norm(a), norm(b)
    qa_ = {len(w) for w in a} or {0}
    qb_ = {len(w) for w in b} or {0}
    if max(qa_) + max(qb_) > p.maxdeg:
        raise TruncationError(f"product degree exceeds maxdeg {p.maxdeg}")
    va, qa = _to_basis(p, a)
    vb, qb = _to_basis(p, b)
    if qa is None or qb is None:
        return {}
    prod = p.algebra.mul(va, qa, vb, qb)
    words = p.algebra.basis[qa + qb]
    return {words[i]: c for i, c in sorted(prod.items())}


def graded_dim_oracle(p: Presentation, q: int) -> int:
    """dim A_q by dense elimination of span{u r v} over all words of degree q."""
    if q > p.maxdeg:
        raise TruncationError(f"degree {q} exceeds maxdeg {p.maxdeg}")
    import itertools

    F = p.field
    n = p.ngens
    words = list(itertools.product(range(n), repeat=q))
    pos = {w: k for k, w in enumerate(words)}
    rows = []
    for rel in p.relations:
        s = len(rel[0][0])
        for a in range(q - s + 1):
            for u in itertools.product(range(n), repeat=a):
                for v in itertools.product(range(n), repeat=q - s - a):
                    row = [F.zero] * len(words)
                    for w, c in rel:
                        row[pos[u + w + v]] = F.add(row[pos[u + w + v]], c)
                    rows.append(row)
    # dense Gaussian elimination, independent of the sparse engine
    rank = 0
    ncol = len(words)
    for c in range(ncol):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = F.inv(rows[rank][c])
        rows[rank] = [F.mul(inv, x) for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][c]:
                f = rows[r][c]
                rows[r] = [F.sub(x, F.mul(f, y)) for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return ncol - rank

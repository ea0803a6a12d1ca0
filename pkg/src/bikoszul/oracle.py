"""Independent dense computations used to cross-check the main pipeline.

Nothing here touches the sparse elimination engine: the algebra is rebuilt by
dense row reduction of the ideal slice inside the space of all words, and Tor
is read off the (non-dual) bar complex with its own dense elimination.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from fractions import Fraction
from math import gcd, lcm

__all__ = ["DenseEchelon", "dense_algebra", "dense_dims", "bar_tor"]


class DenseEchelon:
    """Row echelon basis with dense rows; specialised storage per field.

    GF(2) rows are bit masks; other prime fields use lists of ints; the
    rationals use primitive integer rows (fraction free).
    """

    def __init__(self, field, ncols: int):
        self.F = field
        self.ncols = ncols
        self.piv: dict = {}  # pivot column -> row
        self.rank = 0

    def _prep(self, row):
        F = self.F
        if F.p == 2 and isinstance(row, int):
            return row
        if F.p == 2:
            m = 0
            for c, x in enumerate(row):
                if x % 2:
                    m |= 1 << c
            return m
        if F.p:
            return [x % F.p for x in row]
        den = 1
        for x in row:
            if x:
                den = lcm(den, Fraction(x).denominator)
        ints = [int(Fraction(x) * den) for x in row]
        g = 0
        for x in ints:
            g = gcd(g, x)
        return [x // g for x in ints] if g > 1 else ints

    def add(self, row) -> bool:
        """Insert a dense row; True iff it was independent."""
        F = self.F
        r = self._prep(row)
        if F.p == 2:
            while r:
                c = (r & -r).bit_length() - 1
                prow = self.piv.get(c)
                if prow is None:
                    self.piv[c] = r
                    self.rank += 1
                    return True
                r ^= prow
            return False
        n = self.ncols
        c = 0
        while True:
            while c < n and not r[c]:
                c += 1
            if c == n:
                return False
            prow = self.piv.get(c)
            if prow is None:
                if F.p:
                    inv = pow(r[c], -1, F.p)
                    r = [x * inv % F.p for x in r]
                self.piv[c] = r
                self.rank += 1
                return True
            a = r[c]
            if F.p:
                p = F.p
                r = [(x - a * y) % p for x, y in zip(r, prow)]
            else:
                b = prow[c]
                r = [b * x - a * y for x, y in zip(r, prow)]
                g = 0
                for x in r:
                    if x:
                        g = gcd(g, x)
                        if g == 1:
                            break
                if g > 1:
                    r = [x // g for x in r]


def dense_algebra(pres, D: int):
    """Normal-word bases and a word -> coordinates map, by dense elimination.

    Returns (basis, coords) where basis[q] is a list of words and
    coords(word) gives {basis position: coefficient} in degree len(word).
    """
    F = pres.field
    n = pres.ngens
    basis = [[()]]
    reducers = [None]
    for q in range(1, D + 1):
        if not basis[-1]:
            basis.append([])
            reducers.append(None)
            continue
        words = list(itertools.product(range(n), repeat=q))
        # reverse lexicographic column order: largest word first
        words.sort(reverse=True)
        pos = {w: k for k, w in enumerate(words)}
        rows = {}  # pivot col -> dense row over F (full reduction later)
        for rel in pres.relations:
            s = len(rel[0][0])
            if s > q:
                continue
            for a in range(q - s + 1):
                for u in itertools.product(range(n), repeat=a):
                    for v in itertools.product(range(n), repeat=q - s - a):
                        row = {}
                        for w, c in rel:
                            k = pos[u + w + v]
                            row[k] = F.add(row.get(k, F.zero), c)
                        _dense_insert(F, rows, row)
        # back-substitute for a reduced echelon form
        for c in sorted(rows, reverse=True):
            r = rows[c]
            for c2 in sorted(rows):
                if c2 >= c:
                    break
                r2 = rows[c2]
                a = r2.get(c)
                if a:
                    for k, x in r.items():
                        y = F.sub(r2.get(k, F.zero), F.mul(a, x))
                        if y:
                            r2[k] = y
                        else:
                            r2.pop(k, None)
        free = [w for w in words if pos[w] not in rows]
        free.sort()
        basis.append(free)
        reducers.append((pos, rows, {w: k for k, w in enumerate(free)}, words))

    def coords(word):
        q = len(word)
        if q == 0:
            return {0: F.one}
        if not basis[q]:
            return {}
        pos, rows, fpos, words = reducers[q]
        k = pos[word]
        if k not in rows:
            return {fpos[word]: F.one}
        out = {}
        for j, x in rows[k].items():
            if j != k:
                out[fpos[words[j]]] = F.neg(x)
        return out

    return basis, coords


def _dense_insert(F, rows, row):
    # rows: pivot -> normalized row dict; insertion by lead elimination
    row = {k: x for k, x in row.items() if x}
    while row:
        c = min(row)
        if c not in rows:
            inv = F.inv(row[c])
            rows[c] = {k: F.mul(inv, x) for k, x in row.items()}
            return
        a = row[c]
        for k, x in rows[c].items():
            y = F.sub(row.get(k, F.zero), F.mul(a, x))
            if y:
                row[k] = y
            else:
                row.pop(k, None)


def dense_dims(pres, D: int | None = None) -> list[int]:
    D = pres.maxdeg if D is None else D
    basis, _ = dense_algebra(pres, D)
    return [len(b) for b in basis]


def _grading(pres):
    if all(len(r) == 1 for r in pres.relations):
        return lambda w: w
    contents = [{tuple(w.count(x) for x in range(pres.ngens)) for w, _ in r} for r in pres.relations]
    if all(len(c) == 1 for c in contents):
        return lambda w: tuple(w.count(x) for x in range(pres.ngens))
    return lambda w: ()


def bar_tor(pres, maxdeg: int | None = None, pmax: int | None = None) -> dict:
    """{p: {q: dim Tor_p(F, F)_q}} from the normalized bar complex, densely."""
    F = pres.field
    D = pres.maxdeg if maxdeg is None else maxdeg
    basis, coords = dense_algebra(pres, D)
    labels = [(q, w) for q in range(1, D + 1) for w in basis[q]]
    lid = {l: k for k, l in enumerate(labels)}
    grade = _grading(pres)
    # multiplication of labels: (a, b) -> {label: coef}
    mult = {}
    for a, (qa, wa) in enumerate(labels):
        for b, (qb, wb) in enumerate(labels):
            if qa + qb > D:
                continue
            mult[(a, b)] = {lid[(qa + qb, basis[qa + qb][k])]: c for k, c in coords(wa + wb).items()}
    by_deg = defaultdict(list)
    for k, (q, _) in enumerate(labels):
        by_deg[q].append(k)

    top = D if pmax is None else min(D, pmax)
    out = {p: {} for p in range(top + 1)}
    out[0][0] = 1
    for q in range(1, D + 1):
        cells = defaultdict(list)

        def rec(prefix, rest, word):
            if rest == 0:
                cells[(len(prefix), grade(tuple(word)))].append(tuple(prefix))
                return
            for d in range(1, rest + 1):
                for b in by_deg[d]:
                    prefix.append(b)
                    rec(prefix, rest - d, word + list(labels[b][1]))
                    prefix.pop()

        rec([], q, [])
        ranks = {}
        for (p, g), cs in cells.items():
            if p < 2 or (pmax is not None and p > pmax + 1):
                continue
            tgt = {w: k for k, w in enumerate(sorted(cells.get((p - 1, g), [])))}
            ech = DenseEchelon(F, len(tgt))
            for w in cs:
                if F.p == 2:
                    # dense GF(2) row packed straight into a bit mask
                    m = 0
                    for i in range(p - 1):
                        for c, x in mult[(w[i], w[i + 1])].items():
                            if x:
                                m ^= 1 << tgt[w[:i] + (c,) + w[i + 2 :]]
                    if m:
                        ech.add(m)
                    continue
                row = [F.zero] * len(tgt)
                for i in range(p - 1):
                    sgn = -1 if i % 2 == 0 else 1
                    for c, x in mult[(w[i], w[i + 1])].items():
                        k = tgt[w[:i] + (c,) + w[i + 2 :]]
                        row[k] = F.add(row[k], F.mul(F(sgn), x))
                if any(row):
                    ech.add(row)
            ranks[(p, g)] = ech.rank
        for (p, g), cs in cells.items():
            if p > top:
                continue
            h = len(cs) - ranks.get((p, g), 0) - ranks.get((p + 1, g), 0)
            if h:
                out[p][q] = out[p].get(q, 0) + h
    return out

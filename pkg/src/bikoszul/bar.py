"""Dual bar DG algebra, its cohomology with a retraction, and homotopy transfer.

The cochain algebra C is the graded dual of the reduced bar coalgebra of A.
A basis cell of C^p_q is a word ``(b_1, ..., b_p)`` of labels of basis
elements of J = A_{>=1} whose internal degrees add to q.  The product is
concatenation and the differential is the derivation

    d(b_1 ... b_p) = sum_i (-1)^i  b_1 ... d(b_i) ... b_p,   d[b] = sum c^b_{uv} [u|v]

where c^b_{uv} is the coefficient of b in the product u*v.  Vectors are
``dict[word, scalar]``.

Everything splits into blocks indexed by (p, q, grade).  The grade is the
finest grading the relations respect: the underlying word for monomial
relations, the generator content for multihomogeneous ones, nothing otherwise.
"""

from __future__ import annotations

import itertools
from collections import defaultdict

from .ainfty import AInftyStructure
from .linalg import BitEchelon, Echelon
from .presentation import Presentation, TruncationError

__all__ = [
    "DualBar",
    "Retraction",
    "build_dual_bar",
    "cohomology_and_retraction",
    "merkulov_transfer",
    "tor_dimensions",
    "brute_force_tor",
    "grading_mode",
]


def grading_mode(pres: Presentation) -> str:
    """'word' (monomial relations), 'content' (multihomogeneous) or 'total'."""
    if all(len(r) == 1 for r in pres.relations):
        return "word"

    def content(w):
        return tuple(w.count(x) for x in range(pres.ngens))

    if all(len({content(w) for w, _ in r}) == 1 for r in pres.relations):
        return "content"
    return "total"


class DualBar:
    """The dual bar DG algebra of a presentation through internal degree D."""

    def __init__(self, pres: Presentation, maxdeg: int | None = None, verify: bool = True):
        D = pres.maxdeg if maxdeg is None else maxdeg
        if D > pres.maxdeg:
            raise TruncationError(f"degree {D} exceeds maxdeg {pres.maxdeg}")
        self.pres = pres
        self.field = pres.field
        self.maxdeg = D
        alg = self.alg = pres.algebra.upto(D)
        self.mode = grading_mode(pres)
        self.labels = [(q, i) for q in range(1, D + 1) for i in range(alg.dim(q))]
        self.label_of = {l: k for k, l in enumerate(self.labels)}
        self.ldeg = [q for q, _ in self.labels]
        self.lgrade = [self._grade_of_word(alg.basis[q][i]) for q, i in self.labels]
        # cop[b] = [(u, v, c)]: coefficient c of b in u*v
        cop: list[list] = [[] for _ in self.labels]
        for a in range(1, D):
            for b in range(1, D - a + 1):
                tab = alg.basis_product_table(a, b)
                for i, row in enumerate(tab):
                    u = self.label_of[(a, i)]
                    for j, vec in enumerate(row):
                        v = self.label_of[(b, j)]
                        for k, c in vec.items():
                            cop[self.label_of[(a + b, k)]].append((u, v, c))
        self.cop = cop
        self._cells: dict[int, dict] = {}
        if verify:
            self.verify_square_zero()

    # -- grading -------------------------------------------------------------
    def _grade_of_word(self, w):
        if self.mode == "word":
            return tuple(w)
        if self.mode == "content":
            return tuple(w.count(x) for x in range(self.pres.ngens))
        return ()

    def combine(self, g, h):
        if self.mode == "word":
            return g + h
        if self.mode == "content":
            return tuple(a + b for a, b in zip(g, h))
        return ()

    def zero_grade(self):
        return (0,) * self.pres.ngens if self.mode == "content" else ()

    def key(self, word) -> tuple:
        """Block key (p, q, grade) of a cell."""
        g = self.zero_grade()
        q = 0
        for b in word:
            g = self.combine(g, self.lgrade[b])
            q += self.ldeg[b]
        return (len(word), q, g)

    def label_name(self, b) -> str:
        q, i = self.labels[b]
        from .presentation import format_word

        return format_word(self.pres, self.alg.basis[q][i])

    # -- cells -----------------------------------------------------------------
    def cells_of_degree(self, q: int, cache: bool = True) -> dict:
        """{(p, grade): sorted cells} for internal degree q."""
        if q in self._cells:
            return self._cells[q]
        if q > self.maxdeg:
            raise TruncationError(f"degree {q} exceeds stored degree {self.maxdeg}")
        out: dict = defaultdict(list)
        by_deg = defaultdict(list)
        for b, d in enumerate(self.ldeg):
            by_deg[d].append(b)

        def rec(prefix, rest, g):
            if rest == 0:
                out[(len(prefix), g)].append(tuple(prefix))
                return
            for d in range(1, rest + 1):
                for b in by_deg[d]:
                    prefix.append(b)
                    rec(prefix, rest - d, self.combine(g, self.lgrade[b]))
                    prefix.pop()

        rec([], q, self.zero_grade())
        res = {k: sorted(v) for k, v in out.items()}
        if cache:
            self._cells[q] = res
        return res

    def cells(self, p: int, q: int, g) -> list:
        return self.cells_of_degree(q).get((p, g), [])

    def blocks(self, q: int):
        """Sorted (p, grade) keys present at internal degree q."""
        return sorted(self.cells_of_degree(q))

    # -- algebra ---------------------------------------------------------------
    def delta_word(self, w) -> dict:
        F = self.field
        out: dict = {}
        for i, b in enumerate(w):
            neg = i % 2 == 1
            head, tail = w[:i], w[i + 1 :]
            for u, v, c in self.cop[b]:
                k = head + (u, v) + tail
                y = out.get(k, F.zero) + (F.neg(c) if neg else c)
                if F.p:
                    y %= F.p
                if y:
                    out[k] = y
                else:
                    out.pop(k, None)
        return out

    def delta(self, vec: dict) -> dict:
        F = self.field
        out: dict = {}
        for w, c in vec.items():
            F.axpy(out, c, self.delta_word(w))
        return out

    def product(self, x: dict, y: dict) -> dict:
        F = self.field
        out: dict = {}
        for w, a in x.items():
            for u, b in y.items():
                k = w + u
                z = F.add(out.get(k, F.zero), F.mul(a, b))
                if z:
                    out[k] = z
                else:
                    out.pop(k, None)
        return out

    def verify_square_zero(self):
        """d^2 = 0 on every cell.

        d^2 is again a derivation, so it vanishes on all words once it
        vanishes on every one-letter word; that is checked here exhaustively.
        """
        for b in range(len(self.labels)):
            if self.delta(self.delta_word((b,))):
                raise AssertionError(f"d^2 != 0 on label {self.label_name(b)}")
        return True

    def dim(self, p: int, q: int) -> int:
        return sum(len(v) for (pp, _), v in self.cells_of_degree(q).items() if pp == p)


def build_dual_bar(pres: Presentation, maxdeg: int | None = None) -> DualBar:
    return DualBar(pres, maxdeg)


# ---------------------------------------------------------------------------
# ranks and cohomology


def _block_rank(bar: DualBar, p: int, q: int, g) -> int:
    e = Echelon(bar.field)
    for w in bar.cells(p, q, g):
        v = bar.delta_word(w)
        if v:
            e.add(v)
    return e.rank


def _block_rank_gf2(bar: DualBar, cells, targets) -> int:
    """Rank of d on one block over GF(2), with image vectors packed as bit masks."""
    pos = {w: k for k, w in enumerate(targets)}
    e = BitEchelon()
    for w in cells:
        m = 0
        for u in bar.delta_word(w):
            m |= 1 << pos[u]
        if m:
            e.add(m)
    return e.rank


def cohomology_dims(bar: DualBar, pmax: int | None = None) -> dict:
    """{(p, q): dim H^p_q} for q <= maxdeg (rank-only elimination)."""
    dims: dict = {(0, 0): 1}
    for q in range(1, bar.maxdeg + 1):
        blocks = bar.cells_of_degree(q, cache=False)
        ranks = {}
        for (p, g), cells in blocks.items():
            if pmax is not None and p > pmax + 1:
                continue
            if bar.field.p == 2:
                ranks[(p, g)] = _block_rank_gf2(bar, cells, blocks.get((p + 1, g), []))
                continue
            e = Echelon(bar.field)
            for w in cells:
                v = bar.delta_word(w)
                if v:
                    e.add(v)
            ranks[(p, g)] = e.rank
        for (p, g), cells in blocks.items():
            if pmax is not None and p > pmax:
                continue
            h = len(cells) - ranks.get((p, g), 0) - ranks.get((p - 1, g), 0)
            if h:
                dims[(p, q)] = dims.get((p, q), 0) + h
    return dims


class Retraction:
    """Deterministic retraction data (i, p, h) of the dual bar algebra.

    Per block: L = span of cells whose images are independent (pivot cells),
    B = image of d, and a set of cocycle representatives completing B to the
    cocycles.  ``homotopy`` returns h with ip - id = dh + hd, and
    hi = 0, ph = 0, hh = 0.
    """

    def __init__(self, bar: DualBar):
        self.bar = bar
        self.field = bar.field
        self._img: dict = {}
        self._harm: dict = {}
        self._dims = cohomology_dims(bar)
        # class ids: unit first, then blocks in sorted order
        self.classes: list = [((0, 0, bar.zero_grade()), 0)]
        for q in range(1, bar.maxdeg + 1):
            for p, g in bar.blocks(q):
                n = self._block_dim(p, q, g)
                self.classes.extend(((p, q, g), k) for k in range(n))
        self.class_id = {c: i for i, c in enumerate(self.classes)}

    def _block_dim(self, p, q, g):
        cells = self.bar.cells(p, q, g)
        r = self.image_echelon((p, q, g)).rank
        r0 = self.image_echelon((p - 1, q, g)).rank if p >= 1 else 0
        return len(cells) - r - r0

    def image_echelon(self, key) -> Echelon:
        """Tracked echelon of d(cells) for the block ``key``."""
        if key not in self._img:
            p, q, g = key
            e = Echelon(self.field, track=True)
            kernel = []
            cells = self.bar.cells(p, q, g) if (p, q) != (0, 0) else [()]
            for w in cells:
                rel = e.add(self.bar.delta_word(w), w)
                if rel is not None:
                    kernel.append(rel)
            e.kernel = kernel
            self._img[key] = e
        return self._img[key]

    def harmonic(self, key):
        """(echelon of B plus representatives, list of representatives)."""
        if key not in self._harm:
            p, q, g = key
            zb = Echelon(self.field, track=True)
            if p >= 1 and (p, q) != (0, 0):
                for w in self.bar.cells(p - 1, q, g):
                    zb.add(self.bar.delta_word(w), ("b", w))
            reps = []
            for z in self.image_echelon(key).kernel:
                if zb.add(z, ("h", len(reps))) is None:
                    reps.append(z)
                else:
                    # undo: only independent representatives are kept
                    pass
            self._harm[key] = (zb, reps)
        return self._harm[key]

    def dims(self) -> dict:
        return dict(self._dims)

    def degree(self, cls: int) -> tuple:
        (p, q, _), _ = self.classes[cls]
        return (p, q)

    def include(self, cls: int) -> dict:
        key, k = self.classes[cls]
        if key[0] == 0:
            return {(): self.field.one}
        return dict(self.harmonic(key)[1][k])

    def _split(self, vec: dict) -> dict:
        parts: dict = defaultdict(dict)
        for w, c in vec.items():
            parts[self.bar.key(w)][w] = c
        return parts

    def _decompose(self, key, v: dict):
        """v = l + db + sum a_k rep_k; return (l, b-cells combination, a)."""
        F = self.field
        p = key[0]
        if p == 0:
            return {}, {}, {0: v.get((), F.zero)}
        img = self.image_echelon(key)
        dv = self.bar.delta(v)
        ell = img.express(dv) if dv else {}
        if ell is None:
            raise AssertionError("d(v) not in the image of d")
        z = dict(v)
        for w, c in ell.items():
            F.axpy(z, F.neg(c), {w: F.one})
        zb, _ = self.harmonic(key)
        combo = zb.express(z) if z else {}
        if combo is None:
            raise AssertionError("v - l is not a cocycle")
        bpart = {lab[1]: c for lab, c in combo.items() if lab[0] == "b" and c}
        hpart = {lab[1]: c for lab, c in combo.items() if lab[0] == "h" and c}
        return ell, bpart, hpart

    def project(self, vec: dict) -> dict:
        """Cohomology class coordinates {class id: coefficient}."""
        out = {}
        for key, v in self._split(vec).items():
            _, _, hpart = self._decompose(key, v)
            for k, c in hpart.items():
                out[self.class_id[(key, k)]] = c
        return out

    def homotopy(self, vec: dict) -> dict:
        """h(vec), of cohomological degree -1, with ip - id = dh + hd."""
        F = self.field
        out: dict = {}
        for key, v in self._split(vec).items():
            _, bpart, _ = self._decompose(key, v)
            for w, c in bpart.items():
                out[w] = F.add(out.get(w, F.zero), F.neg(c))
        return {w: c for w, c in out.items() if c}


def cohomology_and_retraction(bar: DualBar):
    r = Retraction(bar)
    return r.dims(), r


# ---------------------------------------------------------------------------
# transfer


class _Transfer:
    """Memoised evaluation of the recursion on tuples of class ids.

    lambda_2 = mu, lambda_n = sum_{s+t=n} (-1)^(s+1) mu(h lambda_s (x) h lambda_t),
    with h lambda_1 = -i.  Applying h lambda_s (x) h lambda_t to a tuple carries
    the Koszul sign (-1)^(|h lambda_t| * degree of the first s inputs).
    """

    def __init__(self, bar: DualBar, ret: Retraction):
        self.bar, self.ret, self.F = bar, ret, bar.field
        self.degs = [ret.degree(c) for c in range(len(ret.classes))]
        self.incl: dict = {}
        self.memo: dict = {}

    def include(self, c):
        if c not in self.incl:
            self.incl[c] = self.ret.include(c)
        return self.incl[c]

    def hlam(self, t: tuple) -> dict:
        if len(t) == 1:
            return {w: self.F.neg(c) for w, c in self.include(t[0]).items()}
        if t not in self.memo:
            self.memo[t] = self.ret.homotopy(self.lam(t))
        return self.memo[t]

    def lam(self, t: tuple) -> dict:
        F, bar = self.F, self.bar
        n = len(t)
        if n == 2:
            return bar.product(self.include(t[0]), self.include(t[1]))
        out: dict = {}
        for s in range(1, n):
            a, b = t[:s], t[s:]
            x = self.hlam(a)
            if not x:
                continue
            y = self.hlam(b)
            if not y:
                continue
            hdeg_b = 0 if len(b) == 1 else 1 - len(b)
            e = (s + 1) + hdeg_b * sum(self.degs[c][0] for c in a)
            F.axpy(out, F.sign(1 if e % 2 == 0 else -1), bar.product(x, y))
        return out

    def __call__(self, t) -> dict:
        """m_n on a tuple of class ids: p lambda_n i^(x)n."""
        return self.ret.project(self.lam(tuple(t)))


def merkulov_transfer(bar: DualBar, ret: Retraction | None = None, nmax: int | None = None) -> AInftyStructure:
    """Minimal A-infinity structure on H(C) by the Merkulov recursion.

    Components are computed for every tuple of non-unit classes whose internal
    degrees add to at most the stored bound and whose target bidegree is
    present; unit-containing components of arity >= 3 vanish by the side
    conditions (see :func:`unit_components`) and are left out.
    """
    if ret is None:
        ret = Retraction(bar)
    F = bar.field
    D = bar.maxdeg
    if nmax is None:
        nmax = D
    ev = _Transfer(bar, ret)
    degs = ev.degs
    ncls = len(ret.classes)
    present = defaultdict(int)
    for pq in degs:
        present[pq] += 1

    maps: dict = defaultdict(dict)
    # m_2 on all pairs, unit included
    for a in range(ncls):
        for b in range(ncls):
            if degs[a][1] + degs[b][1] > D:
                continue
            if not present.get((degs[a][0] + degs[b][0], degs[a][1] + degs[b][1])):
                continue
            v = ev((a, b))
            if v:
                maps[2][(a, b)] = v

    by_q = sorted(range(1, ncls), key=lambda c: (degs[c][1], c))

    def rec(prefix, psum, qsum):
        n = len(prefix)
        if n >= 3 and present.get((psum + 2 - n, qsum)):
            v = ev(prefix)
            if v:
                maps[n][tuple(prefix)] = v
        if n == nmax:
            return
        for c in by_q:
            p, q = degs[c]
            if qsum + q > D:
                break
            prefix.append(c)
            rec(prefix, psum + p, qsum + q)
            prefix.pop()

    rec([], 0, 0)
    names = [_class_name(ret, c) for c in range(ncls)]
    return AInftyStructure(F, degs, dict(maps), trunc=D, names=names, nmax=nmax)


def _class_name(ret, c):
    p, q = ret.degree(c)
    return "1" if p == 0 else f"e{p}_{q}_{c}"


def unit_components(bar: DualBar, ret: Retraction, n: int) -> dict:
    """Evaluate the transfer formula for arity n on unit-containing tuples.

    Used to certify that those components vanish without being stored.
    """
    ev = _Transfer(bar, ret)
    out = {}
    for t in itertools.product(range(len(ret.classes)), repeat=n):
        if 0 not in t or sum(ev.degs[c][1] for c in t) > bar.maxdeg:
            continue
        v = ev(t)
        if v:
            out[t] = v
    return out


# ---------------------------------------------------------------------------
# Tor dimensions


def tor_dimensions(pres: Presentation, maxdeg: int | None = None, pmax: int | None = None) -> dict:
    """{p: {q: dim E^p_q}} read off the dual bar cohomology."""
    bar = DualBar(pres, maxdeg)
    dims = cohomology_dims(bar, pmax)
    D = bar.maxdeg
    top = D if pmax is None else min(pmax, D)
    out = {p: {} for p in range(top + 1)}
    for (p, q), n in dims.items():
        if p <= top:
            out[p][q] = n
    return out


def brute_force_tor(pres: Presentation, maxdeg: int | None = None, pmax: int | None = None) -> dict:
    from .oracle import bar_tor

    return bar_tor(pres, maxdeg, pmax)

"""Finite bigraded minimal A-infinity structures, morphisms and their checkers.

A structure is a list of basis bidegrees ``(p, q)`` (p cohomological, q
internal) plus tables ``maps[n][(i_1, ..., i_n)] = {j: coefficient}``.  Index 0
is the unit when it sits in bidegree (0, 0).  Indices are 0-based in memory
and 1-based in files.

Sign conventions (fixed once, certified against the transfer output):

* SI(n):  sum over n = i + t + j of (-1)^(i + j t) m_(i+1+j)(1^i (x) m_t (x) 1^j)
  where applying 1^i (x) m_t (x) 1^j to x_1 ... x_n carries the extra sign
  (-1)^(t (|x_1| + ... + |x_i|)).
* MI(n):  the same left side with f_(i+1+j) in place of the outer m, equal to
  sum (-1)^w m'_r(f_(i_1) (x) ... (x) f_(i_r)), w = sum_b (r - b)(i_b - 1), with the
  Koszul sign (-1)^(|f_(i_b)| * degrees of the earlier inputs) and |f_k| = 1 - k.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field as dc_field

from .linalg import Field, SparseMatrix, rref
from .presentation import ParseError

__all__ = [
    "AInftyStructure",
    "AInftyMorphism",
    "Report",
    "check_SI",
    "check_SI_suite",
    "check_MI",
    "check_MI_suite",
    "check_unitality",
    "check_two_higher_equivalence",
    "strictify",
    "pushforward",
    "identity_morphism",
    "eval_SI",
    "parse_structure",
    "format_structure",
    "parse_morphism",
    "format_morphism",
]


class AInftyStructure:
    """Minimal A-infinity structure on a finite bigraded space.

    ``trunc`` is the largest internal degree for which the tables are
    complete; ``nmax`` the largest arity computed (default: no bound).
    """

    def __init__(self, field: Field, degrees, maps, trunc: int | None = None, names=None, nmax: int | None = None):
        self.field = field
        self.degrees = [tuple(d) for d in degrees]
        self.trunc = max((q for _, q in self.degrees), default=0) if trunc is None else trunc
        self.nmax = nmax
        self.names = list(names) if names else [str(i + 1) for i in range(len(self.degrees))]
        clean: dict = {}
        N = len(self.degrees)
        for n, table in maps.items():
            n = int(n)
            if n < 1:
                raise ValueError("arity must be at least 1")
            out = {}
            for t, vec in table.items():
                t = tuple(t)
                if len(t) != n or any(not 0 <= i < N for i in t):
                    raise ValueError(f"bad input tuple {t} for m_{n}")
                vec = {j: field(c) for j, c in vec.items()}
                vec = {j: c for j, c in vec.items() if c}
                if not vec:
                    continue
                if n == 1:
                    raise ValueError("m_1 must vanish (minimal structure)")
                self._check_entry(t, vec, 2 - n, f"m_{n}")
                out[t] = vec
            if out:
                clean[n] = out
        self.maps = clean

    def _check_entry(self, t, vec, shift, what):
        p = sum(self.degrees[i][0] for i in t) + shift
        q = sum(self.degrees[i][1] for i in t)
        if q > self.trunc:
            raise ValueError(f"{what} entry on {t} has internal degree {q} > trunc {self.trunc}")
        for j in vec:
            if not 0 <= j < len(self.degrees):
                raise ValueError(f"{what} output index {j} out of range")
            if self.degrees[j] != (p, q):
                raise ValueError(
                    f"{what} entry {t} -> {j}: bidegree {self.degrees[j]} != expected {(p, q)}"
                )

    # -- convenience -----------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.degrees)

    def arities(self) -> list[int]:
        return sorted(self.maps)

    def m(self, n: int) -> dict:
        return self.maps.get(n, {})

    def apply(self, n: int, t) -> dict:
        return self.maps.get(n, {}).get(tuple(t), {})

    def by_bidegree(self) -> dict:
        out = defaultdict(list)
        for i, d in enumerate(self.degrees):
            out[d].append(i)
        return dict(out)

    def complete_arity(self) -> int:
        """Largest arity whose components are all known within trunc."""
        return self.trunc if self.nmax is None else min(self.nmax, self.trunc)

    def with_maps(self, maps) -> "AInftyStructure":
        return AInftyStructure(self.field, self.degrees, maps, self.trunc, self.names, self.nmax)

    def __eq__(self, other):
        return (
            isinstance(other, AInftyStructure)
            and self.field == other.field
            and self.degrees == other.degrees
            and self.trunc == other.trunc
            and self.maps == other.maps
        )

    def __repr__(self):
        return f"AInftyStructure({self.field!r}, dim={self.dim}, arities={self.arities()}, trunc={self.trunc})"


class AInftyMorphism:
    """Family f_k of bidegree (1 - k, 0) between structures on finite spaces."""

    def __init__(self, source: AInftyStructure, target: AInftyStructure, maps):
        if source.field != target.field:
            raise ValueError("source and target fields differ")
        self.source, self.target = source, target
        F = source.field
        clean = {}
        for k, table in maps.items():
            k = int(k)
            if k < 1:
                raise ValueError("arity must be at least 1")
            out = {}
            for t, vec in table.items():
                t = tuple(t)
                if len(t) != k or any(not 0 <= i < source.dim for i in t):
                    raise ValueError(f"bad input tuple {t} for f_{k}")
                vec = {j: F(c) for j, c in vec.items()}
                vec = {j: c for j, c in vec.items() if c}
                if not vec:
                    continue
                p = sum(source.degrees[i][0] for i in t) + 1 - k
                q = sum(source.degrees[i][1] for i in t)
                for j in vec:
                    if target.degrees[j] != (p, q):
                        raise ValueError(f"f_{k} entry {t} -> {j}: bidegree mismatch")
                out[t] = vec
            if out:
                clean[k] = out
        self.maps = clean

    @property
    def field(self):
        return self.source.field

    def f(self, k):
        return self.maps.get(k, {})


def identity_morphism(s: AInftyStructure) -> AInftyMorphism:
    return AInftyMorphism(s, s, {1: {(i,): {i: s.field.one} for i in range(s.dim)}})


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    name: str
    ok: bool
    checked: int = 0
    unknown: int = 0
    violations: list = dc_field(default_factory=list)  # (tuple, residual dict)
    note: str = ""

    @property
    def status(self) -> str:
        """'pass', 'FAIL' or 'unknown' (nothing checkable within truncation)."""
        if not self.ok:
            return "FAIL"
        if self.checked == 0 and self.unknown > 0:
            return "unknown"
        return "pass"

    def lines(self, names=None) -> list[str]:
        def nm(i):
            return names[i] if names else str(i + 1)

        head = f"{self.name}: {self.status} checked={self.checked} unknown={self.unknown}"
        if self.note:
            head += f" ({self.note})"
        out = [head]
        for t, res in self.violations:
            terms = " + ".join(f"{c}*{nm(j)}" for j, c in sorted(res.items()))
            out.append(f"  violation {self.name} at ({' '.join(nm(i) for i in t)}) residual {terms}")
        return out


def _count_tuples(degrees, n, qmax):
    """Number of n-tuples of basis elements with total internal degree <= qmax."""
    qs = defaultdict(int)
    for _, q in degrees:
        qs[q] += 1
    ways = {0: 1}
    for _ in range(n):
        nxt = defaultdict(int)
        for tot, w in ways.items():
            for q, c in qs.items():
                if tot + q <= qmax:
                    nxt[tot + q] += w * c
        ways = nxt
    return sum(ways.values())


def _by_output(table):
    inv = defaultdict(list)
    for t, vec in table.items():
        for j, c in vec.items():
            inv[j].append((t, c))
    return inv


def _sgn(F, e):
    return F.one if e % 2 == 0 else F.neg(F.one)


# ---------------------------------------------------------------------------
# Stasheff identities


def _si_residuals(s: AInftyStructure, n: int) -> dict:
    """Sparse evaluation of SI(n) on every tuple where some term is nonzero."""
    F = s.field
    degp = [d[0] for d in s.degrees]
    res: dict = defaultdict(dict)
    inv_cache = {}
    for l in range(2, n):
        t = n - l + 1
        outer = s.m(l)
        inner = s.m(t)
        if not outer or not inner:
            continue
        if t not in inv_cache:
            inv_cache[t] = _by_output(inner)
        inv = inv_cache[t]
        for y, vec in outer.items():
            for i in range(l):
                hits = inv.get(y[i])
                if not hits:
                    continue
                j = l - 1 - i
                pre = sum(degp[a] for a in y[:i])
                e = i + j * t + t * pre
                for x, c in hits:
                    inp = y[:i] + x + y[i + 1 :]
                    coef = c if e % 2 == 0 else F.neg(c)
                    F.axpy(res[inp], coef, vec)
    return {k: v for k, v in res.items() if v}


def _qsum(s, t):
    return sum(s.degrees[i][1] for i in t)


def check_SI(s: AInftyStructure, n: int) -> Report:
    """Evaluate SI(n) on all checkable basis n-tuples."""
    name = f"SI({n})"
    if n < 1:
        raise ValueError("n must be at least 1")
    if n - 1 > s.complete_arity() and n >= 3:
        return Report(name, True, 0, _count_tuples(s.degrees, n, 10**9), note="arity beyond computed range")
    checked = _count_tuples(s.degrees, n, s.trunc)
    total = len(s.degrees) ** n
    if n < 3:
        return Report(name, True, checked, total - checked, note="vacuous for minimal structures")
    viol = []
    for t, r in sorted(_si_residuals(s, n).items()):
        if _qsum(s, t) <= s.trunc:
            viol.append((t, r))
    return Report(name, not viol, checked, total - checked, viol)


def check_SI_suite(s: AInftyStructure, nmax: int | None = None) -> list[Report]:
    top = s.complete_arity() + 1 if nmax is None else nmax
    return [check_SI(s, n) for n in range(3, top + 1)]


def eval_SI(s: AInftyStructure, x) -> dict:
    """Direct evaluation of SI(len(x)) on one tuple (independent of the sparse path)."""
    F = s.field
    n = len(x)
    out: dict = {}
    for t in range(2, n):
        for i in range(0, n - t + 1):
            j = n - t - i
            inner = s.apply(t, x[i : i + t])
            if not inner:
                continue
            e = i + j * t + t * sum(s.degrees[a][0] for a in x[:i])
            for z, c in inner.items():
                v = s.apply(i + 1 + j, x[:i] + (z,) + x[i + t :])
                F.axpy(out, c if e % 2 == 0 else F.neg(c), v)
    return out


# ---------------------------------------------------------------------------
# morphism identities


def _compositions(n, r):
    if r == 1:
        yield (n,)
        return
    for a in range(1, n - r + 2):
        for rest in _compositions(n - a, r - 1):
            yield (a,) + rest


def _mi_lhs(f: AInftyMorphism, n: int) -> dict:
    F = f.field
    s = f.source
    degp = [d[0] for d in s.degrees]
    res: dict = defaultdict(dict)
    for l in range(1, n):
        t = n - l + 1
        outer = f.f(l)
        inner = s.m(t)
        if not outer or not inner:
            continue
        inv = _by_output(inner)
        for y, vec in outer.items():
            for i in range(l):
                hits = inv.get(y[i])
                if not hits:
                    continue
                j = l - 1 - i
                e = i + j * t + t * sum(degp[a] for a in y[:i])
                for x, c in hits:
                    F.axpy(res[y[:i] + x + y[i + 1 :]], c if e % 2 == 0 else F.neg(c), vec)
    return res


def _mi_rhs(f: AInftyMorphism, n: int, maps_t=None, rmax=None) -> dict:
    """sum over r >= 2 of (-1)^w m'_r(f_(i_1) (x) ... (x) f_(i_r)), sparse."""
    F = f.field
    s = f.source
    tgt = f.target if maps_t is None else maps_t
    degp = [d[0] for d in s.degrees]
    invs = {k: _by_output(f.f(k)) for k in f.maps}
    res: dict = defaultdict(dict)
    top = n if rmax is None else rmax
    for r in range(2, top + 1):
        mr = tgt.m(r) if hasattr(tgt, "m") else tgt.get(r, {})
        if not mr:
            continue
        for comp in _compositions(n, r):
            if any(k not in invs for k in comp):
                continue
            w = sum((r - b) * (comp[b - 1] - 1) for b in range(1, r))
            for y, vec in mr.items():
                choices = []
                for b in range(r):
                    h = invs[comp[b]].get(y[b])
                    if not h:
                        break
                    choices.append(h)
                else:
                    for pick in itertools.product(*choices):
                        inp = ()
                        coef = F.one
                        e = w
                        pre = 0
                        for b, (x, c) in enumerate(pick):
                            e += (1 - comp[b]) * pre
                            pre += sum(degp[a] for a in x)
                            inp += x
                            coef = F.mul(coef, c)
                        F.axpy(res[inp], coef if e % 2 == 0 else F.neg(coef), vec)
    return res


def check_MI(f: AInftyMorphism, n: int) -> Report:
    name = f"MI({n})"
    s, t = f.source, f.target
    F = f.field
    qmax = min(s.trunc, t.trunc)
    checked = _count_tuples(s.degrees, n, qmax)
    total = s.dim**n
    lhs = _mi_lhs(f, n)
    rhs = _mi_rhs(f, n)
    viol = []
    for key in sorted(set(lhs) | set(rhs)):
        if _qsum(s, key) > qmax:
            continue
        d = dict(lhs.get(key, {}))
        F.axpy(d, F.neg(F.one), rhs.get(key, {}))
        if d:
            viol.append((key, d))
    return Report(name, not viol, checked, total - checked, viol)


def check_MI_suite(f: AInftyMorphism, nmax: int | None = None) -> list[Report]:
    top = min(f.source.complete_arity(), f.target.complete_arity()) if nmax is None else nmax
    return [check_MI(f, n) for n in range(1, top + 1)]


# ---------------------------------------------------------------------------
# unitality


def check_unitality(s: AInftyStructure) -> Report:
    F = s.field
    if not s.degrees or s.degrees[0] != (0, 0):
        return Report("unitality", False, note="no unit: basis element 1 is not in bidegree (0, 0)")
    u = 0
    viol = []
    for i in range(s.dim):
        want = {i: F.one}
        if _qsum(s, (i,)) > s.trunc:
            continue
        for t in ((u, i), (i, u)):
            got = s.apply(2, t)
            if got != want:
                d = dict(got)
                F.axpy(d, F.neg(F.one), want)
                viol.append((t, d))
    for n, table in sorted(s.maps.items()):
        if n == 2:
            continue
        for t, vec in sorted(table.items()):
            if u in t:
                viol.append((t, vec))
    return Report("unitality", not viol, checked=s.dim, violations=viol)


# ---------------------------------------------------------------------------
# two higher multiplications


def check_two_higher_equivalence(s: AInftyStructure, d: int, t: int, spot: int | None = None):
    """Verify SI for a structure supported on m_2, m_d, m_t.

    Returns (reports for the six identities, list of lines on the vacuous ones).
    """
    if not (2 < d < t):
        raise ValueError("need 2 < d < t")
    if 2 + t == 2 * d:
        raise ValueError("need 2 + t != 2d")
    extra = set(s.arities()) - {2, d, t}
    if extra:
        raise ValueError(f"structure has components in arities {sorted(extra)} outside {{2, {d}, {t}}}")
    arities = [2, d, t]
    live = sorted({a + b - 1 for a in arities for b in arities})
    six = [3, d + 1, t + 1, 2 * d - 1, d + t - 1, 2 * t - 1]
    assert live == sorted(six), "arity accounting mismatch"
    reports = [check_SI(s, n) for n in six]
    notes = []
    top = spot if spot is not None else min(2 * t + 1, s.complete_arity() + 1)
    for n in range(3, top + 1):
        if n in six:
            continue
        # no outer arity l and inner arity n - l + 1 are both live
        assert not [l for l in arities if (n - l + 1) in arities]
        r = check_SI(s, n)
        notes.append(f"SI({n}): vacuous (no live arity pair composes) spot-check={r.status}")
    return reports, notes


# ---------------------------------------------------------------------------
# strictification and pushforward


def _f1_matrix(f: AInftyMorphism):
    """Per bidegree: (source indices, target indices, matrix rows)."""
    s, t = f.source, f.target
    F = f.field
    sb, tb = s.by_bidegree(), t.by_bidegree()
    if set(sb) != set(tb) or any(len(sb[k]) != len(tb[k]) for k in sb):
        raise ValueError("f_1 is not invertible: source and target dimensions differ")
    f1 = f.f(1)
    inv: dict = {}  # target index -> {source index: coef}
    for deg, src in sb.items():
        tgt = tb[deg]
        n = len(src)
        tpos = {j: k for k, j in enumerate(tgt)}
        # columns = source indices, rows = target coordinates; augment with identity
        rows = {}
        for r in range(n):
            rows[r] = {}
        for c, i in enumerate(src):
            for j, a in f1.get((i,), {}).items():
                rows[tpos[j]][c] = a
        for r in range(n):
            rows[r][n + r] = F.one
        m = SparseMatrix.from_rows(F, n, 2 * n, rows)
        red, piv = rref(m)
        if piv[:n] != list(range(n)) or len(piv) < n:
            raise ValueError(f"f_1 is not invertible in bidegree {deg}")
        for r in range(n):
            # row r of reduced: x_{src[r]} = sum_k red[r][n+k] * e_{tgt[k]}
            for k in range(n):
                a = red.rows[r].get(n + k)
                if a:
                    inv.setdefault(tgt[k], {})[src[r]] = a
    return inv


def _f1_apply(f1, vec, F):
    out = {}
    for i, c in vec.items():
        F.axpy(out, c, f1.get((i,), {}))
    return out


def strictify(f: AInftyMorphism):
    """Strict isomorphism from a quasi-isomorphism of minimal structures.

    Returns (E'', g) where m''_i = f_1 m_i (f_1^-1)^(x)i on the target space and
    g_1 = f_1, g_(>=2) = 0.
    """
    s, t = f.source, f.target
    F = f.field
    finv = _f1_matrix(f)  # target j -> {source i: coef}
    # columns of f_1^{-1} by source index: source i -> [(target y, coef)]
    col = defaultdict(list)
    for y, vec in finv.items():
        for i, c in vec.items():
            col[i].append((y, c))
    f1 = f.f(1)
    maps = {}
    for n, table in s.maps.items():
        out: dict = defaultdict(dict)
        for x, vec in table.items():
            img = _f1_apply(f1, vec, F)
            if not img:
                continue
            for pick in itertools.product(*(col[i] for i in x)):
                coef = F.one
                for _, c in pick:
                    coef = F.mul(coef, c)
                F.axpy(out[tuple(y for y, _ in pick)], coef, img)
        maps[n] = {k: v for k, v in out.items() if v}
    new = AInftyStructure(F, t.degrees, maps, min(s.trunc, t.trunc), t.names, _min_none(s.nmax, t.nmax))
    g = AInftyMorphism(s, new, {1: f.f(1)})
    return new, g


def _min_none(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _tuples(degrees, n, qmax):
    qs = sorted(range(len(degrees)), key=lambda i: degrees[i][1])

    def rec(prefix, tot):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for i in qs:
            if tot + degrees[i][1] > qmax:
                break
            prefix.append(i)
            yield from rec(prefix, tot + degrees[i][1])
            prefix.pop()

    yield from rec([], 0)


def pushforward(s: AInftyStructure, target_degrees, fmaps, nmax: int | None = None):
    """Transport s along f (f_1 invertible) by solving MI(n) for m'_n.

    Returns (target structure, morphism).  f_k for k >= 2 are arbitrary
    bidegree (1-k, 0) tables; the identities then determine m' uniquely.
    """
    F = s.field
    top = s.complete_arity() if nmax is None else nmax
    stub = AInftyStructure(F, target_degrees, {}, s.trunc, None, top)
    f = AInftyMorphism(s, stub, fmaps)
    finv = _f1_matrix(f)
    maps: dict = {}
    for n in range(2, top + 1):
        src_t = AInftyStructure(F, target_degrees, maps, s.trunc, None, top)
        fm = AInftyMorphism(s, src_t, fmaps)
        lhs = _mi_lhs(fm, n)
        rhs = _mi_rhs(fm, n, rmax=n - 1)
        diff: dict = {}
        for key in set(lhs) | set(rhs):
            d = dict(lhs.get(key, {}))
            F.axpy(d, F.neg(F.one), rhs.get(key, {}))
            if d:
                diff[key] = d
        # m'_n(f_1 x) = diff(x) on every input; transport with f_1^{-1}
        col = defaultdict(list)
        for y, vec in finv.items():
            for i, c in vec.items():
                col[i].append((y, c))
        out: dict = defaultdict(dict)
        for x, vec in diff.items():
            if _qsum(s, x) > s.trunc:
                continue
            for pick in itertools.product(*(col[i] for i in x)):
                coef = F.one
                for _, c in pick:
                    coef = F.mul(coef, c)
                F.axpy(out[tuple(y for y, _ in pick)], coef, vec)
        maps[n] = {k: v for k, v in out.items() if v}
    tgt = AInftyStructure(F, target_degrees, maps, s.trunc, None, top)
    return tgt, AInftyMorphism(s, tgt, fmaps)


# ---------------------------------------------------------------------------
# file format


def _fmt_vec(vec, F):
    return " + ".join(f"{F.fmt(c)}*{j + 1}" for j, c in sorted(vec.items()))


def format_structure(s: AInftyStructure) -> str:
    lines = ["ainfty v1", s.field.header, f"trunc {s.trunc}"]
    if s.nmax is not None and s.nmax < s.trunc:
        lines.append(f"arity {s.nmax}")
    for i, (p, q) in enumerate(s.degrees):
        lines.append(f"basis {i + 1} {p} {q}")
    for n in sorted(s.maps):
        for t, vec in sorted(s.maps[n].items()):
            lines.append(f"m {n} : {' '.join(str(i + 1) for i in t)} -> {_fmt_vec(vec, s.field)}")
    return "\n".join(lines) + "\n"


def format_morphism(f: AInftyMorphism) -> str:
    s = f.source
    lines = ["ainfty v1", s.field.header, f"trunc {min(s.trunc, f.target.trunc)}"]
    for i, (p, q) in enumerate(s.degrees):
        lines.append(f"basis {i + 1} {p} {q}")
    for k in sorted(f.maps):
        for t, vec in sorted(f.maps[k].items()):
            lines.append(f"f {k} : {' '.join(str(i + 1) for i in t)} -> {_fmt_vec(vec, s.field)}")
    return "\n".join(lines) + "\n"


def _parse_common(text: str, kind: str):
    F = None
    degrees = []
    trunc = None
    nmax = None
    entries = []
    seen_header = False
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not seen_header:
            if line != "ainfty v1":
                raise ParseError("expected header 'ainfty v1'", n, 1)
            seen_header = True
            continue
        parts = line.split()
        kw = parts[0]
        if kw == "field":
            if parts[1:] == ["QQ"]:
                F = Field()
            elif len(parts) == 3 and parts[1] == "GF" and parts[2].isdigit():
                try:
                    F = Field(int(parts[2]))
                except ValueError as e:
                    raise ParseError(str(e), n, 7) from None
            else:
                raise ParseError("expected 'field GF <p>' or 'field QQ'", n, 1)
        elif kw == "trunc":
            if len(parts) != 2 or not parts[1].isdigit():
                raise ParseError("expected 'trunc <Q>'", n, 1)
            trunc = int(parts[1])
        elif kw == "arity":
            if len(parts) != 2 or not parts[1].isdigit():
                raise ParseError("expected 'arity <N>'", n, 1)
            nmax = int(parts[1])
        elif kw == "basis":
            if F is None:
                raise ParseError("'field' line must precede basis", n, 1)
            if len(parts) != 4 or not all(re_int(x) for x in parts[1:]):
                raise ParseError("expected 'basis <index> <p> <q>'", n, 1)
            idx, p, q = (int(x) for x in parts[1:])
            if idx != len(degrees) + 1:
                raise ParseError(f"basis index {idx} out of order (expected {len(degrees) + 1})", n, 7)
            degrees.append((p, q))
        elif kw == kind:
            if F is None:
                raise ParseError("'field' line must precede entries", n, 1)
            if ":" not in line or "->" not in line:
                raise ParseError(f"expected '{kind} <n> : <i_1> ... <i_n> -> <terms>'", n, 1)
            head, rest = line.split(":", 1)
            lhs, rhs = rest.split("->", 1)
            try:
                ar = int(head.split()[1])
                ins = tuple(int(x) - 1 for x in lhs.split())
            except (ValueError, IndexError):
                raise ParseError("malformed arity or index list", n, 1) from None
            if len(ins) != ar:
                raise ParseError(f"arity {ar} but {len(ins)} inputs", n, 1)
            vec = {}
            for term in rhs.split("+"):
                term = term.strip()
                if not term:
                    raise ParseError("empty term", n, line.index("->") + 3)
                if "*" in term:
                    c, j = term.rsplit("*", 1)
                else:
                    c, j = "1", term
                try:
                    jj = int(j) - 1
                    cc = F.parse(c)
                except (ValueError, ZeroDivisionError):
                    raise ParseError(f"malformed term {term!r}", n, line.index(term) + 1) from None
                vec[jj] = F.add(vec.get(jj, F.zero), cc)
            entries.append((n, ar, ins, vec))
        else:
            raise ParseError(f"unknown keyword {kw!r}", n, 1)
    if not seen_header:
        raise ParseError("empty input: missing 'ainfty v1' header", 1, 1)
    if F is None:
        raise ParseError("missing 'field' line", 1, 1)
    if trunc is None:
        trunc = max((q for _, q in degrees), default=0)
    N = len(degrees)
    for n, ar, ins, vec in entries:
        for i in list(ins) + list(vec):
            if not 0 <= i < N:
                raise ParseError(f"index {i + 1} not declared by a basis line", n, 1)
    return F, degrees, trunc, nmax, entries


def re_int(s):
    try:
        int(s)
        return True
    except ValueError:
        return False


def _tables(entries, F):
    maps: dict = defaultdict(dict)
    for n, ar, ins, vec in entries:
        if ins in maps[ar]:
            raise ParseError(f"duplicate entry for {ar} on {tuple(i + 1 for i in ins)}", n, 1)
        maps[ar][ins] = vec
    return maps


def parse_structure(text: str) -> AInftyStructure:
    F, degrees, trunc, nmax, entries = _parse_common(text, "m")
    maps = _tables(entries, F)
    try:
        return AInftyStructure(F, degrees, maps, trunc, None, nmax)
    except ValueError as e:
        line = _locate(entries, e)
        raise ParseError(str(e), line, 1) from None


def parse_morphism(text: str, source: AInftyStructure, target: AInftyStructure) -> AInftyMorphism:
    F, degrees, trunc, nmax, entries = _parse_common(text, "f")
    if degrees != source.degrees:
        raise ParseError("morphism basis does not match the source structure", 1, 1)
    maps = _tables(entries, F)
    try:
        return AInftyMorphism(source, target, maps)
    except ValueError as e:
        raise ParseError(str(e), _locate(entries, e), 1) from None


def _locate(entries, err):
    msg = str(err)
    for n, ar, ins, vec in entries:
        if str(ins) in msg:
            return n
    return entries[0][0] if entries else 1

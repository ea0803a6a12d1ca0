"""Degree distributions, Koszul-type classification and admissibility tables.

Degree distributions are dicts ``{p: {q: dim}}`` (or ``{p: set of q}``) as
returned by :func:`bikoszul.bar.tor_dimensions`.

Component classes of a bi-Koszul Ext-algebra with parameter d:

* ``E0``   p = 3k,     q = 2dk
* ``E1``   p = 3k + 1, q = 2dk + 1
* ``E2d``  p = 3k + 2, q = 2dk + d
* ``E2d1`` p = 3k + 2, q = 2dk + d + 1
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field as dc_field

__all__ = [
    "delta_d",
    "delta_pair",
    "pkoszul_degree",
    "classify",
    "Classification",
    "enumerate_arities",
    "symbolic_solutions",
    "ArityCase",
    "component_class",
    "ClassUndefined",
    "admissible_components",
    "truncated_table",
    "row_consistent",
    "format_rows",
    "format_table_aligned",
    "is_reduced",
    "is_truncated",
    "CLASSES",
]

CLASSES = ("E0", "E1", "E2d", "E2d1")
_RESIDUE = {"E0": 0, "E1": 1, "E2d": 2, "E2d1": 2}


def _offset(cls, d):
    return {"E0": 0, "E1": 1, "E2d": d, "E2d1": d + 1}[cls]


def delta_pair(d: int, n: int) -> tuple[int, int]:
    """The pair of internal degrees allowed in homological degree n."""
    if d < 2 or n < 0:
        raise ValueError("need d >= 2 and n >= 0")
    k, r = divmod(n, 3)
    base = 2 * d * k
    if r == 0:
        return (base, base)
    if r == 1:
        return (base + 1, base + 1)
    return (base + d, base + d + 1)


def delta_d(d: int, n: int) -> frozenset:
    """The same as a set (collapsing equal entries)."""
    return frozenset(delta_pair(d, n))


def pkoszul_degree(p: int, n: int) -> int:
    """Internal degree of the unique generator in homological degree n for p-Koszul."""
    k, r = divmod(n, 2)
    return k * p + r


def _support(obs) -> dict:
    out = {}
    for n, v in obs.items():
        if isinstance(v, dict):
            s = {q for q, m in v.items() if m}
        else:
            s = set(v)
        out[int(n)] = s
    return out


@dataclass
class Classification:
    verdict: str  # koszul | p-koszul | bi-koszul | other
    param: int | None
    bound: int | None
    consistent: list = dc_field(default_factory=list)
    note: str = ""
    witness: tuple | None = None

    def describe(self) -> str:
        upto = f" up to degree {self.bound}" if self.bound is not None else ""
        if self.verdict == "koszul":
            base = "Koszul" + (f" ({self.note})" if self.note else "")
        elif self.verdict == "p-koszul":
            base = f"{self.param}-Koszul"
        elif self.verdict == "bi-koszul":
            base = f"bi-Koszul (d={self.param})"
        else:
            base = "other"
            if self.witness:
                n, q = self.witness
                base += f" (e.g. internal degree {q} in homological degree {n})"
        return base + upto

    def lines(self) -> list[str]:
        out = [f"verdict: {self.describe()}"]
        others = [c for c in self.consistent if c != self._tag()]
        if others:
            out.append("also consistent: " + ", ".join(others))
        return out

    def _tag(self):
        if self.verdict == "koszul":
            return "Koszul"
        if self.verdict == "p-koszul":
            return f"{self.param}-Koszul"
        if self.verdict == "bi-koszul":
            return f"bi-Koszul(d={self.param})"
        return "other"


def classify(obs, bound: int | None = None) -> Classification:
    """Classify a finite piece of a Tor degree distribution.

    Tests in priority order: Koszul, p-Koszul (p >= 3), bi-Koszul(d), other.
    Verdicts only hold through the stored internal degree.
    """
    sup = _support(obs)
    nonzero = {n: s for n, s in sup.items() if s}
    consistent = []

    def fits(rule):
        return all(s <= rule(n) for n, s in nonzero.items())

    kos = fits(lambda n: {n})
    if kos:
        consistent.append("Koszul")
    obs2 = sorted(nonzero.get(2, ()))
    pk = None
    if len(obs2) == 1 and obs2[0] >= 3:
        p = obs2[0]
        if fits(lambda n: {pkoszul_degree(p, n)}):
            pk = p
            consistent.append(f"{p}-Koszul")
    bis = []
    if obs2:
        for d in sorted({obs2[0] - 1, obs2[0]}):
            if d >= 2 and fits(lambda n, d=d: set(delta_d(d, n))):
                bis.append(d)
                consistent.append(f"bi-Koszul(d={d})")
    if kos:
        note = "resolution terminates at p=1" if max(nonzero) <= 1 else ""
        return Classification("koszul", None, bound, consistent, note)
    if pk is not None:
        return Classification("p-koszul", pk, bound, consistent)
    if bis:
        return Classification("bi-koszul", bis[0], bound, consistent)
    # witness: first bidegree outside every candidate rule
    witness = None
    cands = [lambda n: {n}]
    if obs2:
        cands += [lambda n, d=d: set(delta_d(d, n)) for d in {obs2[0] - 1, obs2[0]} if d >= 2]
    for n in sorted(nonzero):
        bad = [q for q in sorted(nonzero[n]) if all(q not in c(n) for c in cands)]
        if bad:
            witness = (n, bad[0])
            break
    return Classification("other", None, bound, consistent, witness=witness)


# ---------------------------------------------------------------------------
# admissible arities


@dataclass(frozen=True)
class ArityCase:
    """One solution (k, beta, l) of an inequality system.

    case: 1, 2 or 3; variant: target offset inside the case (0 for cases 1
    and 2; d or d+1 for case 3); tsums: the admissible values of t_1+...+t_alpha.
    """

    case: int
    variant: int
    k: int
    beta: int
    l: int
    tsums: tuple

    @property
    def triple(self):
        return (self.k, self.beta, self.l)


def _target(case, variant, k, d):
    if case == 1:
        return 2 * k * d
    if case == 2:
        return 2 * k * d + 1
    return 2 * k * d + variant


def _search_bounds(d):
    # From 3k = T + 2*beta + 2 - l <= beta + 2 and T + d*beta <= 2kd + d + 1:
    # d*beta <= 2d(beta + 2)/3 + d + 1, so beta <= 7 + 3/d <= 8, hence k <= 3 and
    # l = T + 2*beta + 2 - 3k - c <= (2kd + d + 1) + 2*beta + 2.
    bmax = 8
    kmax = (bmax + 2) // 3
    lmax = 2 * kmax * d + d + 1 + 2 * bmax + 2
    return bmax, kmax, lmax


def enumerate_arities(d: int):
    """All (case, k, beta, l) solutions and the resulting arity set."""
    if d < 2:
        raise ValueError("d must be at least 2")
    bmax, kmax, lmax = _search_bounds(d)
    sols = []
    for l in range(2, lmax + 1):
        for beta in range(0, min(l, bmax) + 1):
            found = defaultdict(list)
            for T in range(0, l - beta + 1):
                v = T + 2 * beta + 2 - l
                if v < 0:
                    continue
                k, c = divmod(v, 3)
                variants = [0] if c < 2 else [d, d + 1]
                for var in variants:
                    tgt = _target(c + 1, var, k, d)
                    if T + d * beta <= tgt <= T + d * beta + beta:
                        found[(c + 1, var, k)].append(T)
            for (case, var, k), ts in found.items():
                sols.append(ArityCase(case, var, k, beta, l, tuple(ts)))
    # the bounds are not binding: no solution touches them
    assert all(s.beta < bmax and s.l < lmax for s in sols)
    sols.sort(key=lambda s: (s.case, s.variant != d and s.variant != 0, s.k, s.beta, s.l))
    arities = sorted({s.l for s in sols})
    return arities, sols


def _lsym(off):
    return "d" if off == 0 else f"d{off:+d}"


def symbolic_solutions(dmin: int = 5, dmax: int = 12) -> dict:
    """Solution lists with d left symbolic, stable across dmin..dmax.

    An arity is written as a constant when it is the same for every d in the
    range and as d+c when its offset from d is.  Every concrete solution must
    be explained by one of the two forms.  Returns
    {'S1': [...], 'S2': [...], 'S3': {'d': [...], 'd+1': [...]}} with entries
    like ('1', '1', 'd+1').
    """
    raw = {}
    for d in range(dmin, dmax + 1):
        _, sols = enumerate_arities(d)
        by = defaultdict(set)
        for s in sols:
            key = f"S{s.case}" if s.case < 3 else ("S3", "d" if s.variant == d else "d+1")
            by[key].add((s.k, s.beta, s.l))
        raw[d] = by
    keys = set().union(*(set(v) for v in raw.values()))
    out = {}
    for key in keys:
        const = set.intersection(*(set(raw[d][key]) for d in raw))
        shifted = set.intersection(*({(k, b, l - d) for k, b, l in raw[d][key]} for d in raw))
        for d in raw:
            for k, b, l in raw[d][key]:
                if (k, b, l) not in const and (k, b, l - d) not in shifted:
                    raise AssertionError(f"solution {(k, b, l)} at d={d} has no symbolic form")
        items = [((k, b, l), (str(k), str(b), str(l))) for k, b, l in const]
        items += [((k, b, 100 + c), (str(k), str(b), _lsym(c))) for k, b, c in shifted]
        out[key] = [t for _, t in sorted(items)]
    return {
        "S1": out.get("S1", []),
        "S2": out.get("S2", []),
        "S3": {"d": out.get(("S3", "d"), []), "d+1": out.get(("S3", "d+1"), [])},
    }


# ---------------------------------------------------------------------------
# component classes and tables


class ClassUndefined(ValueError):
    """A bidegree lies outside all four component classes."""


def component_class(p: int, q: int, d: int) -> str:
    k, r = divmod(p, 3)
    base = 2 * d * k
    if r == 0 and q == base:
        return "E0"
    if r == 1 and q == base + 1:
        return "E1"
    if r == 2 and q == base + d:
        return "E2d"
    if r == 2 and q == base + d + 1:
        return "E2d1"
    raise ClassUndefined(f"bidegree ({p}, {q}) is in no component class for d={d}")


def _row_target(inputs, d):
    """Target class forced by class arithmetic, or None."""
    l = len(inputs)
    n1 = inputs.count("E1")
    beta = inputs.count("E2d") + inputs.count("E2d1")
    S = sum(_offset(c, d) for c in inputs)
    v = n1 + 2 * beta + 2 - l
    k, c = divmod(v, 3)
    hits = [cls for cls in CLASSES if _RESIDUE[cls] == c and S == 2 * d * k + _offset(cls, d)]
    return hits


def distinct_permutations(items):
    """Distinct orderings of a sequence, each produced once (multiset order)."""
    pool = sorted(items, key=CLASSES.index)
    counts = {c: pool.count(c) for c in dict.fromkeys(pool)}
    n = len(pool)
    out = []

    def rec(prefix):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for c in counts:
            if counts[c]:
                counts[c] -= 1
                prefix.append(c)
                rec(prefix)
                prefix.pop()
                counts[c] += 1

    rec([])
    return out


def admissible_components(d: int, arities=None) -> dict:
    """{arity: sorted list of (input classes tuple, target class)}.

    Rows are all ordered class tuples whose bidegree arithmetic is consistent;
    arities default to those found by :func:`enumerate_arities`.
    """
    if arities is None:
        arities, _ = enumerate_arities(d)
    table = {}
    for l in arities:
        rows = set()
        for combo in itertools.combinations_with_replacement(CLASSES, l):
            for tgt in _row_target(list(combo), d):
                for perm in distinct_permutations(combo):
                    rows.add((perm, tgt))
        table[l] = sorted(rows)
    return table


def truncated_table(d: int) -> dict:
    """The smaller table for structures supported on m_2, m_d, m_(d+1)."""
    if d < 3:
        raise ValueError("truncated tables need d >= 3")

    def perms(ins, tgt):
        return {(p, tgt) for p in distinct_permutations(ins)}

    m2 = set()
    for ins, tgt in [
        (("E0", "E0"), "E0"),
        (("E0", "E1"), "E1"),
        (("E2d", "E2d1"), "E1"),
        (("E0", "E2d"), "E2d"),
        (("E0", "E2d1"), "E2d1"),
    ]:
        m2 |= perms(ins, tgt)
    md = perms(("E1",) * (d - 1) + ("E2d1",), "E0") | perms(("E1",) * d, "E2d")
    md1 = perms(("E1",) * d + ("E2d",), "E0") | perms(("E1",) * (d + 1), "E2d1")
    return {2: sorted(m2), d: sorted(md), d + 1: sorted(md1)}


def row_consistent(row, d: int, ks=None) -> bool:
    """Concrete check: plug k_j values into the class bidegrees via delta_d."""
    ins, tgt = row
    l = len(ins)
    if ks is None:
        ks = [(j * 7 + 3) % 4 for j in range(l)]
    p_tot, q_tot = 0, 0
    for c, k in zip(ins, ks):
        p = 3 * k + _RESIDUE[c]
        pair = delta_pair(d, p)
        q = pair[1] if c == "E2d1" else pair[0]
        p_tot += p
        q_tot += q
    p_out = p_tot + 2 - l
    if p_out < 0:
        return False
    if q_tot not in delta_d(d, p_out):
        return False
    try:
        return component_class(p_out, q_tot, d) == tgt
    except ClassUndefined:
        return False


def format_rows(table: dict) -> list[str]:
    lines = []
    for l in sorted(table):
        for ins, tgt in table[l]:
            lines.append(f"row {l} : {' '.join(ins)} -> {tgt}")
    return lines


def format_table_aligned(table: dict, d: int) -> list[str]:
    """Human-readable grouping: one line per arity and target class (orbits)."""
    out = []
    for l in sorted(table):
        byt = defaultdict(set)
        for ins, tgt in table[l]:
            byt[tgt].add(tuple(sorted(ins, key=CLASSES.index)))
        for tgt in CLASSES:
            if tgt in byt:
                orbits = ", ".join("(" + " ".join(o) + ")" for o in sorted(byt[tgt]))
                out.append(f"m{l:<3} -> {tgt:<5}: {orbits}")
    return out


# ---------------------------------------------------------------------------
# structure checks


def _classes_of(s, d):
    out = []
    for i, (p, q) in enumerate(s.degrees):
        out.append(component_class(p, q, d))
    return out


def _check_against(s, d, table, name):
    from .ainfty import Report

    cls = _classes_of(s, d)
    allowed = {l: set(rows) for l, rows in table.items()}
    viol = []
    count = 0
    for n in sorted(s.maps):
        for t, vec in sorted(s.maps[n].items()):
            count += 1
            ins = tuple(cls[i] for i in t)
            for j in vec:
                if n not in allowed or (ins, cls[j]) not in allowed[n]:
                    viol.append((t, {j: vec[j]}))
                    break
    return Report(name, not viol, checked=count, violations=viol)


def is_reduced(s, d: int):
    """Every nonzero component lies in the admissibility table for d."""
    return _check_against(s, d, admissible_components(d), f"reduced(d={d})")


def is_truncated(s, d: int):
    """Support in {2, d, d+1} and every component in the truncated table."""
    return _check_against(s, d, truncated_table(d), f"truncated(d={d})")

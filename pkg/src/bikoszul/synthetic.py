"""Hand-built structures used as certified test instances.

The basic shape is a tower over GF(2): basis elements ``c^n``, ``x c^n``,
``a c^n`` and ``b c^n`` in bidegrees (3n, 2dn), (3n+1, 2dn+1), (3n+2, 2dn+d)
and (3n+2, 2dn+d+1), with ``c`` central and all products among x, a, b zero.
Higher multiplications are extended c-multilinearly, which is harmless in
characteristic 2 (no Koszul signs).

With ``shadow=True`` a second copy ``z c^n`` (n >= 1) of the b-tower is added;
it is a c-module like the others but is not a product of lower elements.
"""

from __future__ import annotations

import itertools

from .ainfty import AInftyStructure
from .linalg import GF

__all__ = [
    "Tower",
    "tower",
    "truncated_instance",
    "perturbed_md1",
    "bridge_instance",
    "bikoszul_instance",
    "uncovered_variant",
    "strong_failure_variant",
]

_LETTERS = ("c", "x", "a", "b")


class Tower:
    """Index bookkeeping for the tower basis; ``idx[(letter, n)]`` -> basis index."""

    def __init__(self, d: int, trunc: int, shadow: bool = False):
        self.d, self.trunc = d, trunc
        self.degrees, self.names, self.idx = [], [], {}
        off = {"c": (0, 0), "x": (1, 1), "a": (2, d), "b": (2, d + 1), "z": (2, d + 1)}
        letters = _LETTERS + (("z",) if shadow else ())
        for n in itertools.count():
            if 2 * d * n > trunc:
                break
            for y in letters:
                if y == "z" and n == 0:
                    continue
                p, q = 3 * n + off[y][0], 2 * d * n + off[y][1]
                if q <= trunc:
                    self.idx[(y, n)] = len(self.degrees)
                    self.degrees.append((p, q))
                    self.names.append(_name(y, n))

    def get(self, y, n):
        return self.idx.get((y, n))

    def letter(self, i):
        for (y, n), j in self.idx.items():
            if j == i:
                return y, n
        raise KeyError(i)

    def product_table(self, extra=None) -> dict:
        """m_2 with c central; ``extra`` maps (y, y') -> letter for y*y' = letter*c."""
        table = {}
        items = list(self.idx.items())
        for (y1, n1), i in items:
            for (y2, n2), j in items:
                if y1 == "c" or y2 == "c":
                    y = y2 if y1 == "c" else y1
                    k = self.get(y, n1 + n2)
                elif extra and (y1, y2) in extra:
                    k = self.get(extra[(y1, y2)], n1 + n2 + 1)
                else:
                    continue
                if k is not None:
                    table[(i, j)] = {k: 1}
        return table

    def extend(self, base: dict) -> dict:
        """c-multilinear extension of {(letters...): (letter, c power)} to a table.

        An input given as a pair (letter, power) is held at that power instead
        of being extended.
        """
        table = {}
        top = self.trunc // (2 * self.d) + 1
        for ins, (y, e) in base.items():
            n = len(ins)
            ranges = [[x[1]] if isinstance(x, tuple) else range(top) for x in ins]
            letters = [x[0] if isinstance(x, tuple) else x for x in ins]
            for powers in itertools.product(*ranges):
                t = tuple(self.get(letters[k], powers[k]) for k in range(n))
                if None in t:
                    continue
                k = self.get(y, sum(powers) + e)
                if k is not None:
                    table[t] = {k: 1}
        return table


def _name(y, n):
    if y == "c":
        return "1" if n == 0 else ("c" if n == 1 else f"c^{n}")
    return y if n == 0 else (f"{y}c" if n == 1 else f"{y}c^{n}")


def tower(d: int, trunc: int, higher: dict, extra_products=None, shadow: bool = False) -> tuple:
    """Tower structure with higher maps {n: {(letters): (letter, c power)}}."""
    T = Tower(d, trunc, shadow)
    maps = {2: T.product_table(extra_products)}
    for n, base in higher.items():
        maps[n] = T.extend(base)
    return AInftyStructure(GF(2), T.degrees, maps, trunc, T.names), T


def _pkoszul_pair(d):
    return {d: {("x",) * d: ("a", 0)}, d + 1: {("x",) * (d + 1): ("b", 0)}}


def truncated_instance(d: int = 4, trunc: int = 21):
    """Truncated tower: m_d(x^d) = a and m_(d+1)(x^(d+1)) = b, extended over c."""
    return tower(d, trunc, _pkoszul_pair(d))


def perturbed_md1(d: int = 4, trunc: int = 21):
    """m_(d+1) of the truncated tower plus the entry m_(d+1)(x, ..., x, a) = c.

    The extra entry breaks SI(2d) on x^(2d) with residual c.
    """
    s, T = truncated_instance(d, trunc)
    md1 = {t: dict(v) for t, v in s.m(d + 1).items()}
    md1[(T.get("x", 0),) * d + (T.get("a", 0),)] = {T.get("c", 1): 1}
    return md1


def bridge_instance(d: int = 4, drop_partner: bool = False):
    """Finite truncated structure on 1, x, a, b, c (E^4 = 0).

    m_d(x^d) = a, m_(d+1)(x^(d+1)) = b, m_d(b, x, ..., x) = c and
    m_(d+1)(a, x, ..., x) = c.  The last two cancel in SI(2d) on x^(2d);
    ``drop_partner`` removes the m_(d+1) one so that SI(2d) fails while each
    single reduct stays valid.
    """
    degrees = [(0, 0), (1, 1), (2, d), (2, d + 1), (3, 2 * d)]
    one, x, a, b, c = range(5)
    m2 = {}
    for i in range(5):
        m2[(one, i)] = {i: 1}
        m2[(i, one)] = {i: 1}
    md = {(x,) * d: {a: 1}, (b,) + (x,) * (d - 1): {c: 1}}
    md1 = {(x,) * (d + 1): {b: 1}}
    if not drop_partner:
        md1[(a,) + (x,) * d] = {c: 1}
    maps = {2: m2, d: md, d + 1: md1}
    return AInftyStructure(GF(2), degrees, maps, 2 * d, ["1", "x", "a", "b", "c"])


def _bikoszul_higher(d, target="b"):
    hi = _pkoszul_pair(d)
    hi[3] = {(("c", 1), "x", "a"): (target, 0), (("c", 1), "a", "x"): (target, 0)}
    return hi


def bikoszul_instance(d: int = 5, trunc: int = 26):
    """Reduced tower with m_2, m_3, m_d, m_(d+1); m_3(c, x, a) = m_3(c, a, x) = bc."""
    return tower(d, trunc, _bikoszul_higher(d))


def strong_failure_variant(d: int = 5, trunc: int = 26):
    """As bikoszul_instance but m_3 lands in the shadow tower z, outside m_2(b, c)."""
    return tower(d, trunc, _bikoszul_higher(d, "z"), shadow=True)


def uncovered_variant(d: int = 5, trunc: int = 26):
    """bikoszul_instance plus the shadow tower z c^n, which nothing produces."""
    return tower(d, trunc, _bikoszul_higher(d), shadow=True)

"""Exact sparse linear algebra over GF(p) and the rationals.

Scalars are plain Python objects: ``int`` reduced into ``[0, p)`` for a prime
field, ``fractions.Fraction`` for QQ.  A :class:`Field` knows how to build,
combine and print them.  Sparse vectors are ``dict[int, scalar]`` with no
stored zeros.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Field",
    "GF",
    "QQ",
    "SparseMatrix",
    "Echelon",
    "BitEchelon",
    "rref",
    "kernel_basis",
    "solve",
    "rank",
]

_MAX_PRIME = 2**31


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class Field:
    """Ground field: ``Field(p)`` is GF(p), ``Field()`` is QQ."""

    __slots__ = ("p", "zero", "one", "axpy")

    def __init__(self, p: int | None = None):
        if p is not None:
            p = int(p)
            if not (_is_prime(p) and p < _MAX_PRIME):
                raise ValueError(f"GF({p}): modulus must be a prime below 2^31")
            self.zero, self.one = 0, 1
        else:
            self.zero, self.one = Fraction(0), Fraction(1)
        self.p = p
        self.axpy = self._axpy_mod if p is not None else self._axpy_q

    # -- construction ---------------------------------------------------
    def __call__(self, x) -> int | Fraction:
        if isinstance(x, str):
            return self.parse(x)
        if self.p is None:
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"{x} has no image in GF({self.p})")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def parse(self, s: str):
        s = s.strip()
        if "/" in s:
            num, den = s.split("/", 1)
            return self(Fraction(int(num), int(den)))
        return self(int(s))

    def fmt(self, x) -> str:
        return str(x)

    # -- arithmetic -----------------------------------------------------
    def add(self, a, b):
        return (a + b) % self.p if self.p else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.p else a - b

    def mul(self, a, b):
        return a * b % self.p if self.p else a * b

    def neg(self, a):
        return -a % self.p if self.p else -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.p) if self.p else 1 / a

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def sign(self, s: int):
        """Image of +1 or -1."""
        return self.one if s > 0 else self.neg(self.one)

    def _axpy_mod(self, v: dict, c, w: Mapping) -> None:
        # v += c*w in place
        p = self.p
        for k, x in w.items():
            y = (v.get(k, 0) + c * x) % p
            if y:
                v[k] = y
            else:
                v.pop(k, None)

    @staticmethod
    def _axpy_q(v: dict, c, w: Mapping) -> None:
        for k, x in w.items():
            y = v.get(k, 0) + c * x
            if y:
                v[k] = y
            else:
                v.pop(k, None)

    def scale(self, c, w: Mapping) -> dict:
        if c == 0:
            return {}
        if self.p:
            p = self.p
            return {k: x * c % p for k, x in w.items()}
        return {k: x * c for k, x in w.items()}

    # -- identity -------------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __repr__(self):
        return f"GF({self.p})" if self.p else "QQ"

    @property
    def header(self) -> str:
        """The ``field ...`` line used by the file formats."""
        return f"field GF {self.p}" if self.p else "field QQ"


def GF(p: int) -> Field:
    return Field(p)


QQ = Field()


@dataclass(frozen=True)
class SparseMatrix:
    """Immutable sparse matrix stored by rows."""

    field: Field
    nrows: int
    ncols: int
    rows: tuple = dc_field(repr=False)

    @classmethod
    def from_rows(cls, field: Field, nrows: int, ncols: int, rows: Mapping[int, Mapping[int, object]]):
        out = [dict() for _ in range(nrows)]
        for i, row in rows.items():
            if not 0 <= i < nrows:
                raise IndexError(f"row {i} out of range")
            for j, x in row.items():
                if not 0 <= j < ncols:
                    raise IndexError(f"column {j} out of range")
                x = field(x)
                if x:
                    out[i][j] = x
        return cls(field, nrows, ncols, tuple(out))

    @classmethod
    def from_entries(cls, field: Field, nrows: int, ncols: int, entries: Iterable[tuple[int, int, object]]):
        rows: dict[int, dict] = {}
        for i, j, x in entries:
            r = rows.setdefault(i, {})
            if j in r:
                raise ValueError(f"duplicate entry ({i}, {j})")
            r[j] = x
        return cls.from_rows(field, nrows, ncols, rows)

    @classmethod
    def from_dense(cls, field: Field, data: Sequence[Sequence], ncols: int | None = None):
        nrows = len(data)
        if ncols is None:
            ncols = len(data[0]) if data else 0
        return cls.from_rows(field, nrows, ncols, {i: dict(enumerate(r)) for i, r in enumerate(data)})

    @classmethod
    def zero(cls, field: Field, nrows: int, ncols: int):
        return cls(field, nrows, ncols, tuple({} for _ in range(nrows)))

    @classmethod
    def identity(cls, field: Field, n: int):
        return cls(field, n, n, tuple({i: field.one} for i in range(n)))

    def entries(self):
        for i, row in enumerate(self.rows):
            for j in sorted(row):
                yield i, j, row[j]

    def to_dense(self) -> list[list]:
        z = self.field.zero
        return [[row.get(j, z) for j in range(self.ncols)] for row in self.rows]

    def columns(self) -> list[dict]:
        cols = [dict() for _ in range(self.ncols)]
        for i, row in enumerate(self.rows):
            for j, x in row.items():
                cols[j][i] = x
        return cols

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.field, self.ncols, self.nrows, tuple(self.columns()))

    def matvec(self, v: Sequence | Mapping) -> list:
        F = self.field
        if not isinstance(v, Mapping):
            v = {j: x for j, x in enumerate(v) if x}
        out = []
        for row in self.rows:
            acc = F.zero
            for j, x in row.items():
                y = v.get(j)
                if y:
                    acc = acc + x * y
            out.append(F(acc) if F.p else acc)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, SparseMatrix)
            and self.field == other.field
            and self.nrows == other.nrows
            and self.ncols == other.ncols
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.nrows, self.ncols, tuple(self.entries())))


class Echelon:
    """Incrementally maintained echelon basis of a subspace.

    Each stored vector has a distinct lead (smallest index with a nonzero
    entry), normalized to one.  With ``track=True`` every stored vector also
    remembers how it was combined from the labelled vectors fed to :meth:`add`,
    which is what makes kernels and preimages available.
    """

    def __init__(self, field: Field, track: bool = False):
        self.field = field
        self.track = track
        self.pivots: dict[int, tuple[dict, dict | None]] = {}
        self.order: list[int] = []

    def __len__(self):
        return len(self.pivots)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, v: Mapping, combo: dict | None = None, full: bool = False):
        """Eliminate pivot entries from a copy of ``v``.

        Only leads are eliminated unless ``full``; either way the remainder is
        zero exactly when ``v`` lies in the span.  Returns (remainder, combo);
        combo accumulates the negated coefficients of the stored combinations.
        """
        F = self.field
        v = dict(v)
        piv = self.pivots
        heap = list(v)
        heapq.heapify(heap)
        seen = set()
        while heap:
            k = heapq.heappop(heap)
            if k in seen:
                continue
            c = v.get(k)
            if not c:
                continue
            hit = piv.get(k)
            if hit is None:
                if not full:
                    break
                seen.add(k)
                continue
            pv, pc = hit
            neg = F.neg(c)
            F.axpy(v, neg, pv)
            for j in pv:
                if j > k and j in v:
                    heapq.heappush(heap, j)
            if combo is not None and pc is not None:
                F.axpy(combo, neg, pc)
        return v, combo

    def add(self, v: Mapping, label=None):
        """Insert ``v``; return None if it was independent, else a relation.

        The relation is ``{label: 1, ...}`` expressing a vanishing combination
        of the labelled inputs (only meaningful with ``track=True``).
        """
        F = self.field
        combo = {label: F.one} if self.track else None
        rem, combo = self.reduce(v, combo)
        if not rem:
            return combo if self.track else {}
        lead = min(rem)
        inv = F.inv(rem[lead])
        rem = F.scale(inv, rem)
        if combo is not None:
            combo = F.scale(inv, combo)
        self.pivots[lead] = (rem, combo)
        self.order.append(lead)
        return None

    def contains(self, v: Mapping) -> bool:
        rem, _ = self.reduce(v)
        return not rem

    def express(self, v: Mapping):
        """Combination of labels whose inputs sum to ``v``, or None."""
        F = self.field
        rem, combo = self.reduce(v, {})
        if rem:
            return None
        return {k: F.neg(x) for k, x in combo.items()}

    def basis(self) -> list[dict]:
        return [self.pivots[k][0] for k in self.order]


class BitEchelon:
    """Rank-only echelon basis over GF(2); vectors are int bit masks.

    Rows are keyed by their highest set bit, so reduction is a chain of XORs
    on machine-word chunks instead of per-entry dictionary updates.
    """

    def __init__(self):
        self.pivots: dict[int, int] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def add(self, m: int) -> bool:
        """Insert ``m``; True when it was independent of the stored rows."""
        piv = self.pivots
        while m:
            h = m.bit_length() - 1
            r = piv.get(h)
            if r is None:
                piv[h] = m
                return True
            m ^= r
        return False


def rref(m: SparseMatrix) -> tuple[SparseMatrix, list[int]]:
    """Reduced row echelon form and pivot columns (leftmost nonzero, first row)."""
    F = m.field
    rows = [dict(r) for r in m.rows if r]
    pivots: list[int] = []
    r = 0
    for col in range(m.ncols):
        sel = None
        for i in range(r, len(rows)):
            if rows[i].get(col):
                sel = i
                break
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        prow = F.scale(F.inv(rows[r][col]), rows[r])
        rows[r] = prow
        for i in range(len(rows)):
            if i != r:
                c = rows[i].get(col)
                if c:
                    F.axpy(rows[i], F.neg(c), prow)
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    out = rows[:r] + [dict() for _ in range(m.nrows - r)]
    return SparseMatrix(F, m.nrows, m.ncols, tuple(out)), pivots


def rank(m: SparseMatrix) -> int:
    e = Echelon(m.field)
    for row in m.rows:
        if row:
            e.add(row)
    return e.rank


def kernel_basis(m: SparseMatrix) -> list[list]:
    """Basis of the right null space, one dense vector per free column."""
    F = m.field
    red, pivots = rref(m)
    pivset = set(pivots)
    basis = []
    for free in range(m.ncols):
        if free in pivset:
            continue
        v = [F.zero] * m.ncols
        v[free] = F.one
        for i, pc in enumerate(pivots):
            c = red.rows[i].get(free)
            if c:
                v[pc] = F.neg(c)
        basis.append(v)
    for v in basis:
        assert not any(m.matvec(v)), "kernel vector does not map to zero"
    return basis


def solve(m: SparseMatrix, b: Sequence) -> list | None:
    """Some x with m x = b, or None when the system is inconsistent."""
    F = m.field
    if len(b) != m.nrows:
        raise ValueError("right-hand side length must equal the row count")
    aug = SparseMatrix.from_rows(
        F,
        m.nrows,
        m.ncols + 1,
        {i: {**row, **({m.ncols: b[i]} if F(b[i]) else {})} for i, row in enumerate(m.rows)},
    )
    red, pivots = rref(aug)
    if pivots and pivots[-1] == m.ncols:
        return None
    x = [F.zero] * m.ncols
    for i, pc in enumerate(pivots):
        x[pc] = red.rows[i].get(m.ncols, F.zero)
    return x

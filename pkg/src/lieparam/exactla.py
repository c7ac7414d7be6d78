"""Exact rational linear algebra.

Everything here works over :class:`fractions.Fraction`.  Rank computations
use integer (fraction-free) row reduction: every row is scaled to a primitive
integer vector and the pivot for a column is the candidate row whose entry
has the smallest absolute value, which keeps coefficient growth in check.

Vectors are plain ``dict`` objects mapping a hashable key to a nonzero
``Fraction``; matrices are :class:`SparseMatrix` values.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Hashable, Iterable, Mapping, Sequence

Vector = dict


# ---------------------------------------------------------------------------
# Sparse matrices


@dataclass(frozen=True)
class SparseMatrix:
    rows: int
    cols: int
    entries: tuple  # sorted ((row, col, Fraction), ...), no zeros, no duplicates

    def __init__(self, rows: int, cols: int, entries: Iterable = ()):
        seen = {}
        for r, c, v in entries:
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError(f"entry ({r},{c}) outside {rows}x{cols}")
            if (r, c) in seen:
                raise ValueError(f"duplicate entry ({r},{c})")
            seen[(r, c)] = Fraction(v)
        clean = tuple(sorted((r, c, v) for (r, c), v in seen.items() if v != 0))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence]) -> "SparseMatrix":
        rows = len(dense)
        cols = len(dense[0]) if rows else 0
        return cls(rows, cols, ((i, j, v) for i, row in enumerate(dense) for j, v in enumerate(row)))

    @classmethod
    def from_columns(cls, columns: Sequence[Mapping], row_keys: Sequence[Hashable]) -> "SparseMatrix":
        """Matrix whose j-th column is ``columns[j]`` expressed in ``row_keys``."""
        index = {k: i for i, k in enumerate(row_keys)}
        entries = []
        for j, col in enumerate(columns):
            for k, v in col.items():
                entries.append((index[k], j, v))
        return cls(len(row_keys), len(columns), entries)

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for r, c, v in self.entries:
            out[r][c] = v
        return out

    def row_dicts(self) -> list[dict]:
        out = [dict() for _ in range(self.rows)]
        for r, c, v in self.entries:
            out[r][c] = v
        return out

    def column_dicts(self) -> list[dict]:
        out = [dict() for _ in range(self.cols)]
        for r, c, v in self.entries:
            out[c][r] = v
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows, ((c, r, v) for r, c, v in self.entries))

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        right_rows = other.row_dicts()
        acc: dict = {}
        for r, k, v in self.entries:
            for c, w in right_rows[k].items():
                acc[(r, c)] = acc.get((r, c), 0) + v * w
        return SparseMatrix(self.rows, other.cols, ((r, c, v) for (r, c), v in acc.items()))

    def is_zero(self) -> bool:
        return not self.entries


# ---------------------------------------------------------------------------
# Fraction-free elimination


def _primitive(row: Mapping) -> dict:
    """Scale a rational row to a primitive integer row (content 1)."""
    den = 1
    for v in row.values():
        v = Fraction(v)
        den = den * v.denominator // gcd(den, v.denominator)
    ints = {k: int(Fraction(v) * den) for k, v in row.items() if v}
    g = 0
    for v in ints.values():
        g = gcd(g, v)
    if g > 1:
        ints = {k: v // g for k, v in ints.items()}
    return ints


def _integer_echelon(rows: Iterable[Mapping], order: Mapping | None = None) -> list[tuple[int, dict]]:
    """Row-echelon form of integer rows; returns ``[(pivot_col, row), ...]``.

    Columns are processed in increasing order (``order`` maps a key to its
    sort position; by default keys are compared directly).  Among rows
    sharing the leading column the one with the smallest absolute pivot
    entry is used.
    """
    pos = (lambda k: order[k]) if order is not None else (lambda k: k)
    heap = []
    counter = 0
    for row in rows:
        r = _primitive(row)
        if r:
            lead = min(r, key=pos)
            heap.append((pos(lead), counter, lead, r))
            counter += 1
    heapq.heapify(heap)
    out = []
    while heap:
        p, _, lead, _ = heap[0]
        group = []
        while heap and heap[0][0] == p:
            group.append(heapq.heappop(heap))
        group.sort(key=lambda t: (abs(t[3][lead]), t[1]))
        _, _, _, pivot = group[0]
        a = pivot[lead]
        out.append((lead, pivot))
        for _, idx, _, r in group[1:]:
            b = r[lead]
            g = gcd(a, b)
            fa, fb = a // g, b // g
            new = {k: fa * v for k, v in r.items()}
            for k, v in pivot.items():
                nv = new.get(k, 0) - fb * v
                if nv:
                    new[k] = nv
                else:
                    new.pop(k, None)
            new = _primitive(new)
            if new:
                nlead = min(new, key=pos)
                heapq.heappush(heap, (pos(nlead), idx, nlead, new))
    return out


def rank(m: SparseMatrix) -> int:
    return len(_integer_echelon(m.row_dicts()))


def rank_of_vectors(vectors: Iterable[Mapping], order: Mapping | None = None) -> int:
    """Dimension of the span of dict vectors (keys must be mutually comparable
    unless ``order`` is supplied)."""
    vectors = [v for v in vectors if v]
    if not vectors:
        return 0
    if order is None:
        order = _key_order(vectors)
    return len(_integer_echelon(vectors, order))


def _key_order(vectors: Iterable[Mapping]) -> dict:
    keys = set()
    for v in vectors:
        keys.update(v)
    try:
        ordered = sorted(keys)
    except TypeError:
        ordered = sorted(keys, key=repr)
    return {k: i for i, k in enumerate(ordered)}


def rref(rows: Sequence[Mapping], ncols: int) -> tuple[list[int], list[dict]]:
    """Reduced row-echelon form over ``Fraction``; returns pivots and rows."""
    ech = _integer_echelon(rows)
    ech.sort()
    pivots = [p for p, _ in ech]
    reduced = [{k: Fraction(v, r[p]) for k, v in r.items()} for p, r in ech]
    for i in range(len(reduced) - 1, -1, -1):
        p = pivots[i]
        for j in range(i):
            c = reduced[j].get(p)
            if c:
                rj = reduced[j]
                for k, v in reduced[i].items():
                    nv = rj.get(k, 0) - c * v
                    if nv:
                        rj[k] = nv
                    else:
                        rj.pop(k, None)
    return pivots, reduced


def kernel_basis(m: SparseMatrix) -> list[tuple[Fraction, ...]]:
    pivots, reduced = rref(m.row_dicts(), m.cols)
    pivot_set = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        vec = [Fraction(0)] * m.cols
        vec[free] = Fraction(1)
        for p, row in zip(pivots, reduced):
            c = row.get(free)
            if c:
                vec[p] = -c
        basis.append(tuple(vec))
    return basis


def kernel_of_columns(columns: Sequence[Mapping]) -> list[dict]:
    """Null space of the map e_j -> columns[j]; vectors indexed by column."""
    if not columns:
        return []
    order = _key_order(columns)
    rows: dict = {}
    for j, col in enumerate(columns):
        for k, v in col.items():
            rows.setdefault(order[k], {})[j] = v
    pivots, reduced = rref(list(rows.values()), len(columns))
    pivot_set = set(pivots)
    basis = []
    for free in range(len(columns)):
        if free in pivot_set:
            continue
        vec = {free: Fraction(1)}
        for p, row in zip(pivots, reduced):
            c = row.get(free)
            if c:
                vec[p] = -c
        basis.append(vec)
    return basis


# ---------------------------------------------------------------------------
# Incremental echelon basis with solution tracking


class Echelon:
    """An echelon basis of a growing subspace.

    Rows are primitive integer vectors.  With ``track=True`` each row also
    stores the integer combination of the (integer-scaled) inserted vectors
    it equals, so ``solve`` can write a target in terms of the inserted
    vectors; dependent insertions never get a coefficient, which makes the
    answer deterministic.  ``insert`` returns ``True`` when the span grew.
    """

    def __init__(self, order: Mapping | None = None, track: bool = True):
        self._order = order
        self._track = track
        self._rows: dict = {}  # pivot key -> (int row, int combo)
        self._scales: list = []  # integer vector j = scales[j] * inserted vector j

    def _pos(self, k):
        return self._order[k] if self._order is not None else k

    @staticmethod
    def _axpy(a: int, x: dict, b: int, y: dict) -> dict:
        out = {k: a * v for k, v in x.items()} if a != 1 else dict(x)
        for k, v in y.items():
            nv = out.get(k, 0) - b * v
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
        return out

    def _reduce(self, vec: dict, combo: dict, tcoef: int, track: bool):
        """Invariant: vec = tcoef * (scaled target) + sum combo_j * (scaled j)."""
        pos = self._pos
        rows = self._rows
        while vec:
            lead = min(vec, key=pos)
            hit = rows.get(lead)
            if hit is None:
                break
            row, rcombo = hit
            a, b = row[lead], vec[lead]
            g = gcd(a, b)
            a, b = a // g, b // g
            vec = self._axpy(a, vec, b, row)
            if track:
                combo = self._axpy(a, combo, b, rcombo)
                tcoef *= a
            g = abs(tcoef)
            for v in vec.values():
                g = gcd(g, v)
                if g == 1:
                    break
            if track and g != 1:
                for v in combo.values():
                    g = gcd(g, v)
                    if g == 1:
                        break
            if g > 1:
                vec = {k: v // g for k, v in vec.items()}
                if track:
                    combo = {k: v // g for k, v in combo.items()}
                    tcoef //= g
        return vec, combo, tcoef

    @staticmethod
    def _scaled(vec: Mapping) -> tuple[dict, Fraction]:
        ivec = _primitive(vec)
        if not ivec:
            return ivec, Fraction(0)
        k = next(iter(ivec))
        return ivec, Fraction(ivec[k]) / Fraction(vec[k])

    def insert(self, vec: Mapping) -> bool:
        ivec, scale = self._scaled(vec)
        idx = len(self._scales)
        self._scales.append(scale)
        if not ivec:
            return False
        combo = {idx: 1} if self._track else {}
        red, combo, _ = self._reduce(ivec, combo, 0, self._track)
        if not red:
            return False
        lead = min(red, key=self._pos)
        self._rows[lead] = (red, combo)
        return True

    def contains(self, vec: Mapping) -> bool:
        ivec, _ = self._scaled(vec)
        red, _, _ = self._reduce(ivec, {}, 0, False)
        return not red

    def solve(self, target: Mapping) -> dict | None:
        if not self._track:
            raise ValueError("solve needs a tracking echelon")
        ivec, scale = self._scaled(target)
        if not ivec:
            return {}
        red, combo, tcoef = self._reduce(ivec, {}, 1, True)
        if red:
            return None
        return {j: -Fraction(c) * self._scales[j] / (tcoef * scale) for j, c in combo.items() if c}

    @property
    def rank(self) -> int:
        return len(self._rows)


def solve_columns(columns: Sequence[Mapping], target: Mapping) -> dict | None:
    """Find ``x`` with ``sum x_j columns[j] = target`` or ``None``.

    Columns are inserted in order; dependent columns get coefficient zero.
    """
    keys = _key_order(list(columns) + [target])
    ech = Echelon(keys)
    for col in columns:
        ech.insert(col)
    return ech.solve(target)


def independent_subset(vectors: Sequence[Mapping]) -> list[int]:
    """Indices of the greedy (first-come) maximal independent subfamily."""
    order = _key_order(vectors)
    ech = Echelon(order, track=False)
    return [i for i, v in enumerate(vectors) if ech.insert(v)]


# ---------------------------------------------------------------------------
# Chain complex slices


@dataclass(frozen=True)
class ComplexSlice:
    """Chain spaces for a contiguous degree range with boundaries of degree -1.

    ``boundaries[k]`` is the matrix of the boundary from degree ``k`` to
    degree ``k - 1``; missing entries (for instance below the lowest degree)
    are zero maps.
    """

    degrees: range
    bases: Mapping
    boundaries: Mapping = field(default_factory=dict)

    def __post_init__(self):
        for k in self.degrees:
            if k not in self.bases:
                raise ValueError(f"missing basis in degree {k}")
        for k, m in self.boundaries.items():
            if m.cols != len(self.bases.get(k, ())):
                raise ValueError(f"boundary {k} has wrong source size")
            if m.rows != len(self.bases.get(k - 1, ())):
                raise ValueError(f"boundary {k} has wrong target size")

    def boundary(self, k: int) -> SparseMatrix:
        m = self.boundaries.get(k)
        if m is None:
            return SparseMatrix(len(self.bases.get(k - 1, ())), len(self.bases.get(k, ())))
        return m

    def check_square_zero(self) -> bool:
        for k in self.degrees:
            if k - 1 in self.degrees and not (self.boundary(k - 1) @ self.boundary(k)).is_zero():
                return False
        return True


@dataclass(frozen=True)
class HomologyResult:
    degree: int
    dimension: int
    basis: tuple  # representative cycles as ((label, Fraction), ...) tuples
    lower_bound_only: bool = False


def homology_slice(c: ComplexSlice, degree: int) -> HomologyResult:
    """Homology in one degree; at the top of the slice the incoming boundary
    is unknown, so the dimension is then only an upper bound on the cycles
    and the result is flagged."""
    if degree not in c.degrees:
        raise ValueError(f"degree {degree} outside slice {c.degrees}")
    edge = degree + 1 not in c.degrees
    out = c.boundary(degree)
    labels = list(c.bases[degree])
    cycles = kernel_basis(out)
    incoming = c.boundary(degree + 1) if not edge else None
    if incoming is None or incoming.cols == 0:
        reps = cycles
    else:
        ech = Echelon(track=False)
        for col in incoming.column_dicts():
            ech.insert(col)
        reps = []
        for z in cycles:
            zd = {i: v for i, v in enumerate(z) if v}
            if ech.insert(zd):
                reps.append(z)
    basis = tuple(tuple((labels[i], v) for i, v in enumerate(z) if v) for z in reps)
    return HomologyResult(degree, len(basis), basis, lower_bound_only=edge)


def homology_dimension(source_dim: int, out_images: Sequence[Mapping], in_images: Sequence[Mapping]) -> int:
    """``dim C - rank(out) - rank(in)`` given boundary images as dict vectors.

    This is the workhorse for large complexes where only dimensions matter:
    images are taken in any ambient coordinates (for example tensor words),
    so no basis of the target needs to be chosen.
    """
    return source_dim - rank_of_vectors(out_images) - rank_of_vectors(in_images)

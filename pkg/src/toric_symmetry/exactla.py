"""Exact rational tables over cells and exact integer linear algebra.

All arithmetic is over the rationals with arbitrary precision: table entries
are Python ints or ``fractions.Fraction`` values, matrices are integer, and
elimination is fraction-free (integer-preserving with gcd normalization), so
every membership and stabilizer question has a yes/no answer with no
tolerance anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import gcd
from typing import TYPE_CHECKING, Sequence

from .model import HierarchicalModel, ModelError

if TYPE_CHECKING:
    from .wreath import CellPermutation

# Scalar field: exact rationals in reduced form with positive denominator.
Rational = Fraction


@dataclass(frozen=True)
class CellTable:
    """A rational vector indexed by the cells of a model, in cell-index order."""

    model: HierarchicalModel
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != self.model.p:
            raise ValueError(
                f"table has {len(self.values)} entries, model has {self.model.p} cells"
            )

    @classmethod
    def zeros(cls, model: HierarchicalModel) -> CellTable:
        return cls(model, (0,) * model.p)

    def __getitem__(self, k: int):
        return self.values[k]

    def at(self, cell):
        return self.values[self.model.cell_index(cell)]

    def __add__(self, other: CellTable) -> CellTable:
        self._check_same(other)
        return CellTable(self.model, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: CellTable) -> CellTable:
        self._check_same(other)
        return CellTable(self.model, tuple(a - b for a, b in zip(self.values, other.values)))

    def scale(self, c) -> CellTable:
        return CellTable(self.model, tuple(c * a for a in self.values))

    def is_zero(self) -> bool:
        return not any(self.values)

    def _check_same(self, other: CellTable):
        if other.model.p != self.model.p:
            raise ValueError("tables live over different cell sets")


@dataclass(frozen=True)
class MarginalTable:
    """A rational vector indexed by the marginal cells of a factor subset."""

    model: HierarchicalModel
    support: tuple[int, ...]
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != self.model.marginal_size(self.support):
            raise ValueError("marginal table length does not match its support")


@dataclass(frozen=True)
class IntMatrix:
    """A dense integer matrix stored as a tuple of row tuples."""

    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(tuple(r) for r in self.entries))
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError("entry shape does not match the declared dimensions")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        rows = tuple(tuple(r) for r in rows)
        if cols is None:
            if not rows:
                raise ValueError("cannot infer width of an empty matrix")
            cols = len(rows[0])
        return cls(len(rows), cols, rows)

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.entries)

    @cached_property
    def row_supports(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Nonzero (column, value) pairs per row; used by exact mat-vec products."""
        return tuple(
            tuple((j, a) for j, a in enumerate(row) if a) for row in self.entries
        )


def mat_vec(A: IntMatrix, v: Sequence) -> list:
    if len(v) != A.cols:
        raise ValueError("vector length does not match matrix width")
    return [sum(a * v[j] for j, a in support) for support in A.row_supports]


# -- configuration matrix ----------------------------------------------


def configuration_matrix(model: HierarchicalModel) -> IntMatrix:
    """The 0/1 matrix whose column for a cell stacks one marginal-cell indicator
    per facet; row blocks follow the model's facet order, rows within a block
    the marginal-cell index order."""
    p = model.p
    rows: list[list[int]] = []
    for D in model.facet_list:
        block = [[0] * p for _ in range(model.marginal_size(D))]
        mm = model.marginal_map(D)
        for k in range(p):
            block[mm[k]][k] = 1
        rows.extend(block)
    return IntMatrix(model.nu, p, tuple(tuple(r) for r in rows))


# -- marginalization and lifting ---------------------------------------


def marginal(x: CellTable, D) -> MarginalTable:
    """Exact sums of x over the fibers of the D-projection."""
    model = x.model
    D = model._check_subset(D)
    mm = model.marginal_map(D)
    out = [0] * model.marginal_size(D)
    for k, v in enumerate(x.values):
        out[mm[k]] += v
    return MarginalTable(model, D, tuple(out))


def lift(model: HierarchicalModel, theta: MarginalTable) -> CellTable:
    """Extend a marginal table to all cells: the value at a cell is the value
    at its projection."""
    mm = model.marginal_map(theta.support)
    return CellTable(model, tuple(theta.values[mi] for mi in mm))


# -- fraction-free elimination -----------------------------------------


def _normalize_row(row: list[int]):
    g = 0
    for a in row:
        g = gcd(g, a)
        if g == 1:
            return
    if g > 1:
        row[:] = [a // g for a in row]


def _eliminate_tail(row: list[int], c: int, ptail: list[int], pv: int, f: int):
    if pv == 1:
        row[c:] = [a - f * b for a, b in zip(row[c:], ptail)]
    elif pv == -1:
        row[c:] = [a + f * b for a, b in zip(row[c:], ptail)]
    else:
        row[c:] = [pv * a - f * b for a, b in zip(row[c:], ptail)]
        _normalize_row(row)


def _echelon(rows: list[list[int]], ncols: int, tags: list | None = None) -> list[tuple[int, int]]:
    """In-place fraction-free forward elimination; returns (row, col) pivots.

    Prefers a +-1 pivot in each column so the common 0/1 inputs eliminate
    without any entry growth; otherwise cross-multiplies and gcd-normalizes.
    """
    nrows = len(rows)
    r = 0
    pivots = []
    for c in range(ncols):
        piv = -1
        for i in range(r, nrows):
            v = rows[i][c]
            if v:
                if v == 1 or v == -1:
                    piv = i
                    break
                if piv < 0:
                    piv = i
        if piv < 0:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
            if tags is not None:
                tags[r], tags[piv] = tags[piv], tags[r]
        prow = rows[r]
        pv = prow[c]
        ptail = prow[c:]
        for i in range(r + 1, nrows):
            f = rows[i][c]
            if f:
                _eliminate_tail(rows[i], c, ptail, pv, f)
        pivots.append((r, c))
        r += 1
        if r == nrows:
            break
    return pivots


def _reduce_upward(rows: list[list[int]], pivots: list[tuple[int, int]]):
    for r, c in reversed(pivots):
        prow = rows[r]
        pv = prow[c]
        ptail = prow[c:]
        for i in range(r):
            f = rows[i][c]
            if f:
                _eliminate_tail(rows[i], c, ptail, pv, f)
    for r, c in pivots:
        _normalize_row(rows[r])
        if rows[r][c] < 0:
            rows[r][:] = [-a for a in rows[r]]


def rank(A: IntMatrix) -> int:
    """Rank over the rationals by fraction-free elimination."""
    work = [list(r) for r in A.entries]
    return len(_echelon(work, A.cols))


# -- bases and membership ----------------------------------------------


def _primitive_int_vector(vec) -> tuple[int, ...] | None:
    """Scale a rational vector to integers and divide out the content."""
    den = 1
    for a in vec:
        if isinstance(a, Fraction):
            den = den * (a.denominator // gcd(den, a.denominator))
    ints = [int(a * den) if isinstance(a, Fraction) else a * den for a in vec]
    g = 0
    for a in ints:
        g = gcd(g, a)
        if g == 1:
            break
    if g == 0:
        return None
    if g > 1:
        ints = [a // g for a in ints]
    return tuple(ints)


@dataclass(frozen=True)
class Basis:
    """An integer basis of a rational subspace plus an echelonized copy for
    exact membership queries."""

    ambient: int
    vectors: tuple[tuple[int, ...], ...]
    echelon: tuple[tuple[int, ...], ...]
    pivots: tuple[int, ...]

    @classmethod
    def from_vectors(cls, ambient: int, vectors) -> Basis:
        prims = []
        for v in vectors:
            vals = getattr(v, "values", v)
            if len(vals) != ambient:
                raise ValueError("vector length does not match the ambient dimension")
            prim = _primitive_int_vector(vals)
            if prim is not None:
                prims.append(prim)
        work = [list(v) for v in prims]
        tags = list(range(len(work)))
        piv = _echelon(work, ambient, tags)
        kept = tuple(prims[tags[r]] for r, _ in piv)
        echelon = tuple(tuple(work[r]) for r, _ in piv)
        return cls(ambient, kept, echelon, tuple(c for _, c in piv))

    @property
    def dim(self) -> int:
        return len(self.vectors)

    @cached_property
    def _echelon_supports(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        return tuple(
            tuple((j, a) for j, a in enumerate(row) if a) for row in self.echelon
        )


def row_space_basis(A: IntMatrix) -> Basis:
    """Basis of the space spanned by the rows of A."""
    return Basis.from_vectors(A.cols, A.entries)


def kernel_basis(A: IntMatrix) -> Basis:
    """Integer basis of {y : Ay = 0}: reduced echelon form, one vector per
    free column, denominators cleared."""
    work = [list(r) for r in A.entries]
    pivots = _echelon(work, A.cols)
    _reduce_upward(work, pivots)
    pivot_cols = {c for _, c in pivots}
    vectors = []
    for f in range(A.cols):
        if f in pivot_cols:
            continue
        scale = 1
        for r, c in pivots:
            a = work[r][f]
            if a:
                d = work[r][c]
                scale = scale * (d // gcd(scale, d))
        v = [0] * A.cols
        v[f] = scale
        for r, c in pivots:
            a = work[r][f]
            if a:
                v[c] = -(a * scale) // work[r][c]
        vectors.append(v)
    return Basis.from_vectors(A.cols, vectors)


def member(basis: Basis, x) -> bool:
    """Exact membership of x in the span: reduce against the echelon form and
    test for a zero residual."""
    vals = list(getattr(x, "values", x))
    if len(vals) != basis.ambient:
        raise ValueError("vector length does not match the basis' ambient dimension")
    for row, support, c in zip(basis.echelon, basis._echelon_supports, basis.pivots):
        lead = vals[c]
        if lead:
            coef = lead / row[c] if isinstance(lead, Fraction) else Fraction(lead, row[c])
            for j, a in support:
                vals[j] -= coef * a
    return not any(vals)


# -- difference operators and projections --------------------------------


def partial_difference(x: CellTable, E) -> CellTable:
    """Composite difference against level 1, one factor of E at a time."""
    model = x.model
    E = model._check_subset(E)
    counts = model.levels.levels
    strides = model._strides
    vals = list(x.values)
    for j in E:
        s = strides[j]
        cj = counts[j]
        vals = [v - vals[k - ((k // s) % cj) * s] for k, v in enumerate(vals)]
    return CellTable(model, tuple(vals))


def project_increment(x: CellTable, E) -> CellTable:
    """Orthogonal projection onto the pure-interaction component of E: the
    alternating sum over subsets F of E of the F-marginal means."""
    model = x.model
    E = model._check_subset(E)
    p = model.p
    total = [Fraction(0)] * p
    for r in range(len(E) + 1):
        for F in combinations(E, r):
            theta = marginal(x, F)
            coef = Fraction((-1) ** (len(E) - r), p // model.marginal_size(F))
            mm = model.marginal_map(F)
            for k in range(p):
                total[k] += coef * theta.values[mm[k]]
    return CellTable(model, tuple(total))


# -- permutation action ---------------------------------------------------


def apply_permutation(g: "CellPermutation", x: CellTable) -> CellTable:
    """Relabel cells: the value of the result at g(cell) is the value of x at
    the cell."""
    if g.p != x.model.p:
        raise ValueError("permutation size does not match the table")
    out = [0] * g.p
    vals = x.values
    for k, img in enumerate(g.image):
        out[img] = vals[k]
    return CellTable(x.model, tuple(out))


def stabilizes_kernel(A: IntMatrix, kb: Basis, g: "CellPermutation") -> bool:
    """True iff A (g v) = 0 exactly for every basis vector v of kb.

    Sufficient for set-wise stabilization of the kernel since g is invertible
    and the kernel is finite-dimensional.  Runs in pure integer arithmetic:
    (A g v)_r = sum_j A[r][g[j]] v[j], so the row supports are permuted once
    and each vector costs one sparse product.
    """
    if g.p != A.cols:
        raise ValueError("permutation size does not match the matrix width")
    if kb.ambient != A.cols:
        raise ValueError("kernel basis does not match the matrix width")
    inv = [0] * g.p
    for k, img in enumerate(g.image):
        inv[img] = k
    moved = [tuple((inv[j], a) for j, a in support) for support in A.row_supports]
    for v in kb.vectors:
        for support in moved:
            if sum(a * v[k] for k, a in support):
                return False
    return True


# -- table files ---------------------------------------------------------
#
# JSON object {"model": optional name, "values": [...]} in cell-index order;
# each value an integer, a decimal string, or a string "p/q" in lowest terms.


def _encode_value(v):
    if isinstance(v, Fraction):
        if v.denominator == 1:
            v = v.numerator
        else:
            return f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return v if abs(v) < 2**53 else str(v)
    raise TypeError(f"cannot serialize table value {v!r}")


def _decode_value(v):
    if isinstance(v, int) and not isinstance(v, bool):
        return v
    if isinstance(v, str):
        try:
            if "/" in v:
                return Fraction(v)
            return int(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError(f"bad table value {v!r}") from exc
    raise ModelError(f"bad table value {v!r}")


def serialize_table(x: CellTable) -> str:
    obj: dict = {}
    if x.model.name is not None:
        obj["model"] = x.model.name
    obj["values"] = [_encode_value(v) for v in x.values]
    return json.dumps(obj, indent=2) + "\n"


def parse_table(text: str, model: HierarchicalModel) -> CellTable:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or not isinstance(obj.get("values"), list):
        raise ModelError('table file must be an object with a "values" array')
    values = [_decode_value(v) for v in obj["values"]]
    if len(values) != model.p:
        raise ModelError(f"table has {len(values)} values, model has {model.p} cells")
    return CellTable(model, tuple(values))


def serialize_matrix(A: IntMatrix) -> str:
    flat = [a for row in A.entries for a in row]
    obj = {"rows": A.rows, "cols": A.cols, "entries": [_encode_value(a) for a in flat]}
    return json.dumps(obj) + "\n"


def parse_matrix(text: str) -> IntMatrix:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from exc
    rows, cols = obj.get("rows"), obj.get("cols")
    flat = obj.get("entries")
    if not isinstance(rows, int) or not isinstance(cols, int) or not isinstance(flat, list):
        raise ModelError('matrix file needs integer "rows"/"cols" and an "entries" array')
    if len(flat) != rows * cols:
        raise ModelError("entry count does not match rows*cols")
    ints = [_decode_value(v) for v in flat]
    if any(isinstance(v, Fraction) for v in ints):
        raise ModelError("matrix entries must be integers")
    return IntMatrix(rows, cols, tuple(tuple(ints[r * cols : (r + 1) * cols]) for r in range(rows)))

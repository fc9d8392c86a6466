"""Generic tables built from power sequences.

Powers of a large base give integer sequences whose small-coefficient
combinations never collide, so a table assembled from them is moved out of
the model space by any permutation that breaks the model's structure.  All
values are exact big integers (they grow to hundreds of digits at larger
model sizes; that cost is accepted).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .exactla import CellTable, MarginalTable, lift, project_increment
from .model import HierarchicalModel


class DistinctnessError(RuntimeError):
    """A projection that must have pairwise distinct values does not; this
    signals a defect, not a usage error."""


@dataclass(frozen=True)
class PerturbationSeq:
    """The powers (2b+j)^0 .. (2b+j)^(n-1): combinations with coefficients in
    {-b..b} determine their coefficient vectors uniquely."""

    n: int
    b: int
    j: int
    values: tuple[int, ...]


def perturbation_sequence(n: int, b: int, j: int) -> PerturbationSeq:
    if n < 1 or b < 1:
        raise ValueError("n and b must be positive")
    if not 1 <= j <= n:
        raise ValueError(f"sequence selector j={j} not in 1..{n}")
    base = 2 * b + j
    return PerturbationSeq(n, b, j, tuple(base**l for l in range(n)))


def injective_on_box(values, b: int, limit: int = 10**6) -> bool:
    """Exhaustively check that coefficient vectors in {-b..b}^n give pairwise
    distinct combinations of the given values."""
    n = len(values)
    span = 2 * b + 1
    if span**n > limit:
        raise ValueError(f"({span})^{n} coefficient vectors exceed the limit {limit}")
    sums = set()
    for coeffs in product(range(-b, b + 1), repeat=n):
        s = sum(c * y for c, y in zip(coeffs, values))
        if s in sums:
            return False
        sums.add(s)
    return True


def injectivity_exhaustive(n: int, b: int, j: int, limit: int = 10**6) -> bool:
    return injective_on_box(perturbation_sequence(n, b, j).values, b, limit)


@dataclass(frozen=True)
class GenericTable:
    """Per-facet marginal slices of a perturbation sequence and their sum."""

    model: HierarchicalModel
    j: int
    base: int
    thetas: tuple[MarginalTable, ...]
    table: CellTable


def generic_element(model: HierarchicalModel, j: int = 1) -> GenericTable:
    """Slice the length-nu sequence (coefficients bounded by the cell count)
    into one marginal table per facet, in the model's facet order, and sum
    the lifted slices."""
    seq = perturbation_sequence(model.nu, model.p, j)
    thetas = []
    offset = 0
    total = [0] * model.p
    for D in model.facet_list:
        size = model.marginal_size(D)
        theta = MarginalTable(model, D, seq.values[offset : offset + size])
        offset += size
        mm = model.marginal_map(D)
        for k in range(model.p):
            total[k] += theta.values[mm[k]]
        thetas.append(theta)
    return GenericTable(model, j, 2 * model.p + j, tuple(thetas), CellTable(model, tuple(total)))


def level_condition(model: HierarchicalModel) -> bool:
    """At most one factor with exactly two levels."""
    return sum(1 for count in model.levels.levels if count == 2) <= 1


def interaction_coefficient(model: HierarchicalModel, D, a_coords, b_coords) -> int:
    """Scaled pairing weight between two marginal cells of D: the sign tracks
    the factors where they disagree, the magnitude the levels where they agree."""
    D = model._check_subset(D)
    eq = [j for j, (a, b) in zip(D, zip(a_coords, b_coords)) if a == b]
    fibre = model.p // model.marginal_size(D)
    sign = (-1) ** (len(D) - len(eq))
    mag = 1
    for j in eq:
        mag *= model.levels.levels[j] - 1
    return fibre * sign * mag


def distinct_projection(model: HierarchicalModel, D, j: int = 1) -> MarginalTable:
    """Project the generic slice of facet D onto its pure-interaction
    component; the resulting marginal values are pairwise distinct.

    Cross-checked against the equivalent weighted-sum form
    p * phi(a) = sum_b C(a, b) * theta(b) before returning.
    """
    D = model._check_subset(D)
    if D not in model.facet_list:
        raise ValueError(f"{set(x + 1 for x in D)} is not a facet of the model")
    if not level_condition(model):
        raise ValueError("needs at most one two-level factor")
    gt = generic_element(model, j)
    theta = gt.thetas[model.facet_list.index(D)]
    phi_table = project_increment(lift(model, theta), D)
    size = model.marginal_size(D)
    values = [None] * size
    mm = model.marginal_map(D)
    for k in range(model.p):
        mi = mm[k]
        if values[mi] is None:
            values[mi] = phi_table.values[k]
        elif values[mi] != phi_table.values[k]:
            raise DistinctnessError("projection is not constant on fibers")
    for a in range(size):
        acoords = model.marginal_coords(D, a)
        weighted = sum(
            interaction_coefficient(model, D, acoords, model.marginal_coords(D, b))
            * theta.values[b]
            for b in range(size)
        )
        if model.p * values[a] != weighted:
            raise DistinctnessError("projection disagrees with its weighted-sum form")
    if len(set(values)) != size:
        raise DistinctnessError("projected marginal values are not pairwise distinct")
    return MarginalTable(model, D, tuple(values))


def faithful_witness(model: HierarchicalModel, j: int = 1) -> CellTable:
    """A table with pairwise distinct entries in the top pure-interaction
    component, so every non-identity cell permutation moves it.

    Built by projecting a full generic table (one sequence value per cell,
    coefficients bounded by the cell count) onto the all-factors component.
    """
    if not level_condition(model):
        raise ValueError("needs at most one two-level factor")
    seq = perturbation_sequence(model.p, model.p, j)
    phi = project_increment(CellTable(model, seq.values), tuple(range(model.m)))
    if len(set(phi.values)) != model.p:
        raise DistinctnessError("witness entries are not pairwise distinct")
    return phi

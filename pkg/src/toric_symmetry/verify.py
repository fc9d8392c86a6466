"""Structural checks: invariance of the kernel under the wreath group,
rejection of outside permutations, a brute-force stabilizer oracle, and two
self-contained demonstration fixtures."""

from __future__ import annotations

import os
import random
import warnings
from dataclasses import dataclass, field
from itertools import islice, permutations, product
from math import factorial, prod

from .exactla import (
    Basis,
    CellTable,
    IntMatrix,
    apply_permutation,
    configuration_matrix,
    kernel_basis,
    mat_vec,
    stabilizes_kernel,
)
from .model import HierarchicalModel, make_model
from .wreath import CellPermutation, WreathGroup, element_to_dict


@dataclass(frozen=True)
class TheoremConditionReport:
    """Whether the facet marginal sizes are pairwise distinct and at most one
    factor has exactly two levels."""

    facet_sizes: tuple[int, ...]
    sizes_distinct: bool
    two_level_count: int
    conditions_met: bool

    def to_dict(self) -> dict:
        return {
            "suite": "theorem-conditions",
            "sizes": list(self.facet_sizes),
            "sizes_distinct": self.sizes_distinct,
            "two_level_count": self.two_level_count,
            "passed": self.conditions_met,
        }

    def lines(self) -> list[str]:
        return [
            f"facet marginal sizes: {', '.join(map(str, self.facet_sizes))}",
            f"sizes pairwise distinct: {'yes' if self.sizes_distinct else 'no'}",
            f"factors with exactly two levels: {self.two_level_count}",
            f"conditions met: {'yes' if self.conditions_met else 'no'}",
        ]


def theorem_conditions(model: HierarchicalModel) -> TheoremConditionReport:
    sizes = tuple(model.marginal_size(D) for D in model.facet_list)
    distinct = len(set(sizes)) == len(sizes)
    twos = sum(1 for count in model.levels.levels if count == 2)
    return TheoremConditionReport(sizes, distinct, twos, distinct and twos <= 1)


@dataclass(frozen=True)
class InvarianceReport:
    suite: str
    trials: int
    checked: int
    passed: bool
    skipped: bool = False
    skip_reason: str | None = None
    members_discarded: int = 0
    counterexample: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "suite": self.suite,
            "trials": self.trials,
            "checked": self.checked,
            "passed": self.passed,
        }
        if self.skipped:
            out["skipped"] = True
            out["skip_reason"] = self.skip_reason
        if self.members_discarded:
            out["members_discarded"] = self.members_discarded
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out

    def lines(self) -> list[str]:
        if self.skipped:
            return [f"{self.suite}: SKIPPED ({self.skip_reason})"]
        status = "PASS" if self.passed else "FAIL"
        note = f" ({self.members_discarded} members discarded)" if self.members_discarded else ""
        return [f"{self.suite}: {status} ({self.checked} of {self.trials} checked{note})"]


def check_member_invariance(model: HierarchicalModel, trials: int, seed=0) -> InvarianceReport:
    """Sample wreath elements and assert each one stabilizes the kernel."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    group = WreathGroup(model)
    A = configuration_matrix(model)
    kb = kernel_basis(A)
    for t in range(trials):
        w = group.sample_uniform(f"{seed}/member/{t}")
        g = group.to_cell_permutation(w)
        if not stabilizes_kernel(A, kb, g):
            return InvarianceReport(
                "member-invariance",
                trials,
                t + 1,
                False,
                counterexample={"element": element_to_dict(w), "image": list(g.image)},
            )
    return InvarianceReport("member-invariance", trials, trials, True)


def check_nonmember_rejection(model: HierarchicalModel, trials: int, seed=0) -> InvarianceReport:
    """Draw uniform random cell permutations, discard wreath members, and
    assert every remaining one fails to stabilize the kernel.  Skipped when
    the distinct-sizes/level conditions do not hold, since only then is the
    stabilizer known to equal the wreath product."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    conditions = theorem_conditions(model)
    if not conditions.conditions_met:
        return InvarianceReport(
            "nonmember-rejection",
            trials,
            0,
            True,
            skipped=True,
            skip_reason="facet sizes not distinct or more than one two-level factor",
        )
    group = WreathGroup(model)
    A = configuration_matrix(model)
    kb = kernel_basis(A)
    rng = random.Random(f"{seed}/nonmember")
    discarded = 0
    checked = 0
    for _ in range(trials):
        image = list(range(model.p))
        rng.shuffle(image)
        g = CellPermutation(model.p, tuple(image))
        if group.contains(g):
            discarded += 1
            continue
        checked += 1
        if stabilizes_kernel(A, kb, g):
            return InvarianceReport(
                "nonmember-rejection",
                trials,
                checked,
                False,
                members_discarded=discarded,
                counterexample={"image": list(g.image)},
            )
    return InvarianceReport(
        "nonmember-rejection", trials, checked, True, members_discarded=discarded
    )


@dataclass(frozen=True)
class StabilizerReport:
    """Outcome of enumerating every cell permutation."""

    p: int
    examined: int
    stabilizer_size: int
    wreath_order: int
    equal: bool
    witness: tuple[int, ...] | None
    defects: int

    def to_dict(self) -> dict:
        out = {
            "suite": "stabilizer-oracle",
            "p": self.p,
            "examined": self.examined,
            "sizes": {"stabilizer": self.stabilizer_size, "wreath": self.wreath_order},
            "passed": self.defects == 0,
            "equal": self.equal,
        }
        if self.witness is not None:
            out["counterexample"] = {"image": list(self.witness)}
        return out

    def lines(self) -> list[str]:
        verdict = "EQUAL" if self.equal else "STRICT"
        out = [
            f"stabilizer {self.stabilizer_size} vs wreath {self.wreath_order}: {verdict}"
            f" ({self.examined} permutations examined)"
        ]
        if self.witness is not None:
            out.append(f"witness outside the wreath product: {list(self.witness)}")
        if self.defects:
            out.append(f"DEFECT: {self.defects} wreath elements failed to stabilize")
        return out


def _oracle_scan(model: HierarchicalModel, start: int, step: int):
    group = WreathGroup(model)
    A = configuration_matrix(model)
    kb = kernel_basis(A)
    examined = stab = in_w = defects = 0
    witness = None
    for idx, image in enumerate(islice(permutations(range(model.p)), start, None, step)):
        g = CellPermutation(model.p, image)
        examined += 1
        stabilizes = stabilizes_kernel(A, kb, g)
        inside = group.contains(g)
        if stabilizes:
            stab += 1
        if inside:
            in_w += 1
            if not stabilizes:
                defects += 1
        elif stabilizes and witness is None:
            witness = (start + idx * step, image)
    return examined, stab, in_w, defects, witness


def brute_force_stabilizer(
    model: HierarchicalModel, max_cells: int = 8, threads: int | None = None
) -> StabilizerReport:
    """Enumerate all p! cell permutations, count the set-wise stabilizer of
    the kernel, and compare it elementwise with the wreath product.

    The default cap p <= 8 means at most 40,320 permutations; p = 9 costs
    362,880 and gets a runtime warning, p = 10 costs 3,628,800 exact checks
    and is practical only with patience and parallel workers.
    """
    p = model.p
    if p > max_cells:
        raise ValueError(f"p={p} exceeds max_cells={max_cells}")
    if p >= 9:
        warnings.warn(f"enumerating {factorial(p)} permutations; this will take a while")
    if threads is None:
        threads = int(os.environ.get("TORIC_SYMMETRY_THREADS", "1"))
    threads = max(1, min(threads, factorial(p)))
    if threads == 1:
        parts = [_oracle_scan(model, 0, 1)]
    else:
        import multiprocessing

        with multiprocessing.get_context("fork").Pool(threads) as pool:
            parts = pool.starmap(
                _scan_task, [(model, w, threads) for w in range(threads)]
            )
    examined = sum(part[0] for part in parts)
    stab = sum(part[1] for part in parts)
    in_w = sum(part[2] for part in parts)
    defects = sum(part[3] for part in parts)
    witnesses = [part[4] for part in parts if part[4] is not None]
    witness = min(witnesses)[1] if witnesses else None
    order = WreathGroup(model).order()
    equal = stab == order and witness is None and defects == 0
    if in_w != order:
        raise RuntimeError(f"enumerated {in_w} wreath members, expected {order}")
    return StabilizerReport(p, examined, stab, order, equal, witness, defects)


def _scan_task(model, worker, step):
    return _oracle_scan(model, worker, step)


@dataclass(frozen=True)
class FixtureCheck:
    label: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class FixtureReport:
    name: str
    checks: tuple[FixtureCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "suite": f"demo-{self.name}",
            "passed": self.passed,
            "checks": [
                {"label": c.label, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            detail = f" ({c.detail})" if c.detail else ""
            out.append(f"{status}: {c.label}{detail}")
        return out


def _move_table(model: HierarchicalModel, plus, minus) -> CellTable:
    values = [0] * model.p
    for cell in plus:
        values[model.cell_index(cell)] += 1
    for cell in minus:
        values[model.cell_index(cell)] -= 1
    return CellTable(model, tuple(values))


def markov_fixture() -> FixtureReport:
    """Two moves with equal facet marginals that only a level permutation
    conditioned on another factor can exchange.

    The conditional swap of the last factor's levels maps the first move to
    the second, while no coordinatewise (per-factor) permutation does: the
    first move touches one level of the last factor, the second touches two.
    """
    model = make_model((2, 2, 2, 2, 2), ((0, 2), (1, 3), (2, 3, 4)), name="conditional-swap")
    m1 = _move_table(model, [(1, 1, 1, 1, 1), (1, 2, 2, 1, 1)], [(1, 2, 1, 1, 1), (1, 1, 2, 1, 1)])
    m2 = _move_table(model, [(1, 1, 1, 1, 2), (1, 2, 2, 1, 1)], [(1, 2, 1, 1, 2), (1, 1, 2, 1, 1)])
    A = configuration_matrix(model)
    checks = [
        FixtureCheck("first move has zero facet marginals", not any(mat_vec(A, m1.values))),
        FixtureCheck("second move has zero facet marginals", not any(mat_vec(A, m2.values))),
    ]
    group = WreathGroup(model)
    tables = []
    for ci, cls in enumerate(group.classes):
        if cls.members == (4,):
            perms = []
            for aj in range(group.ancestor_sizes[ci]):
                coords = model.marginal_coords(group.ancestors[ci], aj)
                swap_here = coords[group.ancestors[ci].index(2)] == 1
                perms.append((1, 0) if swap_here else (0, 1))
            tables.append(tuple(perms))
        else:
            perms = [tuple(range(group.class_sizes[ci]))] * group.ancestor_sizes[ci]
            tables.append(tuple(perms))
    w = group.element(tables)
    g = group.to_cell_permutation(w)
    checks.append(
        FixtureCheck(
            "conditional last-factor swap maps the first move to the second",
            apply_permutation(g, m1) == m2,
        )
    )
    checks.append(FixtureCheck("that swap belongs to the wreath product", group.contains(g)))
    mappers = 0
    examined = 0
    for combo in product(*[list(permutations(range(count))) for count in model.levels.levels]):
        image = []
        for k in range(model.p):
            cell = model.index_cell(k)
            moved = tuple(combo[j][c - 1] + 1 for j, c in enumerate(cell))
            image.append(model.cell_index(moved))
        examined += 1
        if apply_permutation(CellPermutation(model.p, tuple(image)), m1) == m2:
            mappers += 1
    checks.append(
        FixtureCheck(
            "no per-factor level permutation maps the first move to the second",
            mappers == 0,
            f"{examined} direct-product elements examined",
        )
    )
    return FixtureReport("markov", tuple(checks))


SUDOKU_ORDER = 609_499_054_080


def sudoku_fixture() -> FixtureReport:
    """The 3x3x3x3x9 grid model: the block-role swap stabilizes the kernel
    but does not factor through the wreath product, so the stabilizer is
    strictly larger when facet marginal sizes coincide."""
    model = make_model(
        (3, 3, 3, 3, 9),
        ((0, 1, 4), (2, 3, 4), (0, 2, 4), (0, 1, 2, 3)),
        name="sudoku",
    )
    A = configuration_matrix(model)
    kb = kernel_basis(A)
    image = []
    for k in range(model.p):
        i, j, kk, ll, c = model.index_cell(k)
        image.append(model.cell_index((kk, ll, i, j, c)))
    f = CellPermutation(model.p, tuple(image))
    group = WreathGroup(model)
    order = group.order()
    conditions = theorem_conditions(model)
    checks = (
        FixtureCheck(
            "the block-role swap stabilizes the kernel",
            stabilizes_kernel(A, kb, f),
            f"kernel dimension {kb.dim}",
        ),
        FixtureCheck(
            "the block-role swap is outside the wreath product", not group.contains(f)
        ),
        FixtureCheck(
            f"wreath product order is {SUDOKU_ORDER:,}",
            order == SUDOKU_ORDER,
            f"got {order:,}",
        ),
        FixtureCheck(
            "distinct-sizes condition fails with all facet sizes 81",
            not conditions.conditions_met and set(conditions.facet_sizes) == {81},
        ),
    )
    return FixtureReport("sudoku", checks)


def corollary_direct_product(model: HierarchicalModel) -> bool:
    """True iff the pseudofactor order is trivial; verified against the group
    order, which must then equal the product of the per-class factorials."""
    group = WreathGroup(model)
    trivial = group.poset.is_trivial
    direct_order = prod(factorial(size) for size in group.class_sizes)
    if trivial != (group.order() == direct_order):
        raise RuntimeError("trivial order and direct-product order disagree")
    return trivial

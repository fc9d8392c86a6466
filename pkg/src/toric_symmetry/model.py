"""Hierarchical log-linear models: factors, levels, facets, cells.

Factor indices are 0-based everywhere in this package.  Model files use the
1-based convention and are converted at the parse/serialize boundary only.
Cell coordinates are level values and are always 1-based, so the first cell
of any model is (1, ..., 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import prod


class ModelError(ValueError):
    """Malformed or inconsistent model specification."""


@dataclass(frozen=True)
class LevelSpec:
    """Level counts I_1..I_m, one entry per factor; every count is >= 2."""

    levels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.levels:
            raise ModelError("at least one factor is required")
        for j, count in enumerate(self.levels):
            if not isinstance(count, int) or isinstance(count, bool) or count < 2:
                raise ModelError(
                    f"factor {j + 1} needs an integer level count >= 2, got {count!r}"
                )

    @property
    def m(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class FacetSet:
    """Maximal interaction effects: distinct factor subsets, none inside another.

    Facets are normalized on construction: members sorted ascending (repeats
    collapsed), facet list sorted lexicographically.  This canonical order is
    what configuration-matrix row blocks and generic-table slicing follow.
    """

    facets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        norm = [tuple(sorted(set(D))) for D in self.facets]
        if not norm:
            raise ModelError("at least one facet is required")
        for D in norm:
            if not D:
                raise ModelError("empty facet")
        if len(set(norm)) != len(norm):
            raise ModelError("duplicate facet")
        for D, E in combinations(norm, 2):
            if set(D) <= set(E) or set(E) <= set(D):
                raise ModelError(
                    f"facets must form an antichain: {set(D)} and {set(E)} are nested"
                )
        object.__setattr__(self, "facets", tuple(sorted(norm)))

    def __len__(self) -> int:
        return len(self.facets)


@dataclass(frozen=True)
class MarginalCell:
    """Coordinates of a cell restricted to the factor subset ``support``."""

    support: tuple[int, ...]
    coordinates: tuple[int, ...]


@dataclass(frozen=True)
class HierarchicalModel:
    """A set of level counts together with the facets of a simplicial complex."""

    levels: LevelSpec
    facets: FacetSet
    name: str | None = None

    def __post_init__(self):
        m = self.levels.m
        for D in self.facets.facets:
            for j in D:
                if not isinstance(j, int) or isinstance(j, bool):
                    raise ModelError(f"factor index {j!r} is not an integer")
                if not 0 <= j < m:
                    raise ModelError(f"factor index {j + 1} out of range for m={m}")

    # -- basic sizes ---------------------------------------------------

    @property
    def m(self) -> int:
        return self.levels.m

    @property
    def facet_list(self) -> tuple[tuple[int, ...], ...]:
        return self.facets.facets

    @cached_property
    def p(self) -> int:
        """Total number of cells."""
        return prod(self.levels.levels)

    @cached_property
    def nu(self) -> int:
        """Total number of facet marginal cells (rows of the configuration)."""
        return sum(self.marginal_size(D) for D in self.facet_list)

    def marginal_size(self, D) -> int:
        return prod(self.levels.levels[j] for j in D)

    # -- cell indexing -------------------------------------------------
    #
    # Mixed-radix order with the last factor varying fastest:
    # index(i) = sum_j (i_j - 1) * prod_{l > j} I_l.

    @cached_property
    def _strides(self) -> tuple[int, ...]:
        s = [1] * self.m
        for j in range(self.m - 2, -1, -1):
            s[j] = s[j + 1] * self.levels.levels[j + 1]
        return tuple(s)

    def check_cell(self, cell) -> tuple[int, ...]:
        cell = tuple(cell)
        if len(cell) != self.m:
            raise ModelError(f"cell {cell} has {len(cell)} coordinates, expected {self.m}")
        for j, (i, count) in enumerate(zip(cell, self.levels.levels)):
            if not 1 <= i <= count:
                raise ModelError(f"coordinate {i} of factor {j + 1} not in 1..{count}")
        return cell

    def cell_index(self, cell) -> int:
        cell = self.check_cell(cell)
        return sum((i - 1) * s for i, s in zip(cell, self._strides))

    def index_cell(self, k: int) -> tuple[int, ...]:
        if not 0 <= k < self.p:
            raise ModelError(f"cell index {k} not in 0..{self.p - 1}")
        counts = self.levels.levels
        return tuple((k // self._strides[j]) % counts[j] + 1 for j in range(self.m))

    def project_cell(self, cell, D) -> MarginalCell:
        cell = self.check_cell(cell)
        D = self._check_subset(D)
        return MarginalCell(D, tuple(cell[j] for j in D))

    def _check_subset(self, D) -> tuple[int, ...]:
        D = tuple(sorted(set(D)))
        for j in D:
            if not 0 <= j < self.m:
                raise ModelError(f"factor index {j + 1} out of range for m={self.m}")
        return D

    # -- marginal-cell indexing ----------------------------------------

    def marginal_strides(self, D) -> tuple[int, ...]:
        counts = self.levels.levels
        s = [1] * len(D)
        for t in range(len(D) - 2, -1, -1):
            s[t] = s[t + 1] * counts[D[t + 1]]
        return tuple(s)

    def marginal_index(self, coords, D) -> int:
        return sum((i - 1) * s for i, s in zip(coords, self.marginal_strides(D)))

    def marginal_coords(self, D, t: int) -> tuple[int, ...]:
        counts = self.levels.levels
        return tuple(
            (t // s) % counts[j] + 1 for j, s in zip(D, self.marginal_strides(D))
        )

    @cached_property
    def _marginal_maps(self) -> dict:
        return {}

    def marginal_map(self, D) -> tuple[int, ...]:
        """For each cell index k, the marginal index of the cell's D-projection."""
        D = self._check_subset(D)
        cached = self._marginal_maps.get(D)
        if cached is not None:
            return cached
        counts = self.levels.levels
        strides = self._strides
        msts = self.marginal_strides(D)
        out = []
        for k in range(self.p):
            mi = 0
            for j, ms in zip(D, msts):
                mi += ((k // strides[j]) % counts[j]) * ms
            out.append(mi)
        result = tuple(out)
        self._marginal_maps[D] = result
        return result

    # -- simplicial structure ------------------------------------------

    def all_simplices(self) -> tuple[tuple[int, ...], ...]:
        """Every subset of some facet, including the empty set."""
        seen = {()}
        for D in self.facet_list:
            for r in range(1, len(D) + 1):
                seen.update(combinations(D, r))
        return tuple(sorted(seen, key=lambda E: (len(E), E)))

    def delete_facet(self, D) -> HierarchicalModel:
        D = tuple(sorted(set(D)))
        if D not in self.facet_list:
            raise ModelError(f"{set(j + 1 for j in D)} is not a facet of the model")
        if len(self.facet_list) < 2:
            raise ModelError("cannot delete the only facet")
        remaining = tuple(E for E in self.facet_list if E != D)
        return HierarchicalModel(self.levels, FacetSet(remaining))


def make_model(levels, facets, name: str | None = None) -> HierarchicalModel:
    """Build a model from level counts and 0-based facet subsets."""
    return HierarchicalModel(
        LevelSpec(tuple(levels)), FacetSet(tuple(tuple(D) for D in facets)), name
    )


# -- model files -------------------------------------------------------
#
# JSON object with "levels" (array of integers >= 2) and "facets" (array of
# arrays of 1-based factor indices); optional "name" string.


def parse_model(text: str) -> HierarchicalModel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ModelError("model file must be a JSON object")
    levels = obj.get("levels")
    facets = obj.get("facets")
    if not isinstance(levels, list) or not isinstance(facets, list):
        raise ModelError('model file needs "levels" and "facets" arrays')
    name = obj.get("name")
    if name is not None and not isinstance(name, str):
        raise ModelError('"name" must be a string')
    m = len(levels)
    converted = []
    for D in facets:
        if not isinstance(D, list):
            raise ModelError("each facet must be an array of factor indices")
        members = []
        for j in D:
            if not isinstance(j, int) or isinstance(j, bool):
                raise ModelError(f"factor index {j!r} is not an integer")
            if not 1 <= j <= m:
                raise ModelError(f"factor index {j} out of range for m={m}")
            members.append(j - 1)
        converted.append(tuple(members))
    return HierarchicalModel(LevelSpec(tuple(levels)), FacetSet(tuple(converted)), name)


def serialize_model(model: HierarchicalModel) -> str:
    """Canonical form: facets sorted lexicographically, members ascending, 1-based."""
    obj: dict = {}
    if model.name is not None:
        obj["name"] = model.name
    obj["levels"] = list(model.levels.levels)
    obj["facets"] = [[j + 1 for j in D] for D in model.facet_list]
    return json.dumps(obj, indent=2) + "\n"


def load_model(path) -> HierarchicalModel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())

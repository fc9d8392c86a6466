"""The group of level permutations indexed by the pseudofactor poset.

An element carries, for every pseudofactor class, one permutation of the
class's marginal cells per marginal cell of the class's ancestor factors.
Acting on a cell, each class block is permuted by the permutation selected
by the ancestor coordinates of the input cell, so the blocks are evaluated
independently.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from math import factorial, prod

from .model import HierarchicalModel, ModelError
from .poset import Pseudofactor, PseudofactorPoset, pseudofactor_poset


class NonMemberError(ValueError):
    """A cell permutation does not factor through the wreath structure."""


@dataclass(frozen=True)
class CellPermutation:
    """A bijection on cell indices in one-line notation: image[k] = g(k)."""

    p: int
    image: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "image", tuple(self.image))
        if len(self.image) != self.p or sorted(self.image) != list(range(self.p)):
            raise ValueError("image is not a permutation of 0..p-1")

    @classmethod
    def identity(cls, p: int) -> CellPermutation:
        return cls(p, tuple(range(p)))

    def is_identity(self) -> bool:
        return all(k == img for k, img in enumerate(self.image))

    def compose(self, other: CellPermutation) -> CellPermutation:
        """self after other: (self . other)(k) = self(other(k))."""
        if self.p != other.p:
            raise ValueError("permutation sizes differ")
        return CellPermutation(self.p, tuple(self.image[j] for j in other.image))

    def inverse(self) -> CellPermutation:
        inv = [0] * self.p
        for k, img in enumerate(self.image):
            inv[img] = k
        return CellPermutation(self.p, tuple(inv))

    def __mul__(self, other: CellPermutation) -> CellPermutation:
        return self.compose(other)


@dataclass(frozen=True, eq=False)
class WreathElement:
    """One permutation table per class: tables[ci][aj] is the one-line
    permutation of class ci's marginal cells used when the ancestor marginal
    cell has index aj."""

    group: "WreathGroup" = field(repr=False)
    tables: tuple[tuple[tuple[int, ...], ...], ...]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, WreathElement)
            and self.group.model == other.group.model
            and self.tables == other.tables
        )

    def __hash__(self) -> int:
        return hash(self.tables)

    def is_identity(self) -> bool:
        return all(
            perm == tuple(range(len(perm))) for cls in self.tables for perm in cls
        )

    def act(self, cell) -> tuple[int, ...]:
        """Image of a cell: each class block is permuted by the table entry
        selected by the input cell's ancestor coordinates."""
        group = self.group
        model = group.model
        k = model.cell_index(cell)
        out = list(model.check_cell(cell))
        for ci, cls in enumerate(group.classes):
            aj = group.anc_maps[ci][k]
            t = self.tables[ci][aj][group.cls_maps[ci][k]]
            for j, coord in zip(cls.members, model.marginal_coords(cls.members, t)):
                out[j] = coord
        return tuple(out)

    def cell_permutation(self) -> CellPermutation:
        return self.group.to_cell_permutation(self)

    def __mul__(self, other: WreathElement) -> WreathElement:
        return self.group.compose(self, other)

    def inverse(self) -> WreathElement:
        return self.group.inverse(self)


class WreathGroup:
    """The product over pseudofactor classes of all maps from ancestor
    marginal cells to level permutations, acting on cells.

    Classes are held in topological order (lower classes first), which fixes
    the layout of element tables and the random stream used by sampling.
    """

    def __init__(self, model: HierarchicalModel, poset: PseudofactorPoset | None = None):
        self.model = model
        self.poset = poset if poset is not None else pseudofactor_poset(model)
        self.classes: tuple[Pseudofactor, ...] = self.poset.topological_order()
        self.class_sizes = tuple(model.marginal_size(c.members) for c in self.classes)
        self.ancestors = tuple(self.poset.ancestors(c) for c in self.classes)
        self.ancestor_sizes = tuple(model.marginal_size(a) for a in self.ancestors)
        self.vsets = tuple(self.poset.vset(c) for c in self.classes)
        # per-cell index tables, one per class
        self.cls_maps = tuple(model.marginal_map(c.members) for c in self.classes)
        self.anc_maps = tuple(model.marginal_map(a) for a in self.ancestors)
        self.v_maps = tuple(model.marginal_map(v) for v in self.vsets)

    # -- construction of elements --------------------------------------

    def identity(self) -> WreathElement:
        tables = tuple(
            tuple(tuple(range(size)) for _ in range(asize))
            for size, asize in zip(self.class_sizes, self.ancestor_sizes)
        )
        return WreathElement(self, tables)

    def element(self, tables) -> WreathElement:
        tables = tuple(tuple(tuple(perm) for perm in cls) for cls in tables)
        for ci, (size, asize) in enumerate(zip(self.class_sizes, self.ancestor_sizes)):
            if len(tables[ci]) != asize:
                raise ValueError(f"class {ci} needs {asize} permutation tables")
            for perm in tables[ci]:
                if sorted(perm) != list(range(size)):
                    raise ValueError(f"class {ci} table is not a permutation")
        return WreathElement(self, tables)

    def sample_uniform(self, seed) -> WreathElement:
        """Uniformly random element, deterministic per seed.

        One independent random stream is derived per (class position,
        ancestor marginal cell) pair as Random(f"{seed}/{position}/{cell}"),
        and classes are drawn from the top of the poset downwards; each
        stream performs one Fisher-Yates shuffle.
        """
        tables: list = [None] * len(self.classes)
        for ci in range(len(self.classes) - 1, -1, -1):
            perms = []
            for aj in range(self.ancestor_sizes[ci]):
                rng = random.Random(f"{seed}/{ci}/{aj}")
                perm = list(range(self.class_sizes[ci]))
                rng.shuffle(perm)
                perms.append(tuple(perm))
            tables[ci] = tuple(perms)
        return WreathElement(self, tuple(tables))

    # -- group structure -------------------------------------------------

    def order(self) -> int:
        """Exact order: the product over classes of (size!)^(ancestor cells)."""
        return prod(
            factorial(size) ** asize
            for size, asize in zip(self.class_sizes, self.ancestor_sizes)
        )

    @cached_property
    def _class_contrib(self) -> tuple[tuple[int, ...], ...]:
        # contribution of a class marginal index to the full cell index
        model = self.model
        out = []
        for cls, size in zip(self.classes, self.class_sizes):
            contrib = []
            for t in range(size):
                coords = model.marginal_coords(cls.members, t)
                contrib.append(
                    sum((c - 1) * model._strides[j] for j, c in zip(cls.members, coords))
                )
            out.append(tuple(contrib))
        return tuple(out)

    def to_cell_permutation(self, w: WreathElement) -> CellPermutation:
        """Tabulate the action over all cells."""
        self._check_element(w)
        p = self.model.p
        contrib = self._class_contrib
        image = [0] * p
        for k in range(p):
            total = 0
            for ci in range(len(self.classes)):
                t = w.tables[ci][self.anc_maps[ci][k]][self.cls_maps[ci][k]]
                total += contrib[ci][t]
            image[k] = total
        return CellPermutation(p, tuple(image))

    def compose(self, w1: WreathElement, w2: WreathElement) -> WreathElement:
        """w1 after w2, computed through the defining action."""
        self._check_element(w1)
        self._check_element(w2)
        return self.factorize(
            self.to_cell_permutation(w1).compose(self.to_cell_permutation(w2))
        )

    def inverse(self, w: WreathElement) -> WreathElement:
        self._check_element(w)
        return self.factorize(self.to_cell_permutation(w).inverse())

    def _check_element(self, w: WreathElement):
        if w.group is not self and w.group.model != self.model:
            raise ValueError("element belongs to a different group")

    # -- membership and factorization ------------------------------------

    def contains(self, g: CellPermutation) -> bool:
        """True iff for every class, the image coordinates on the class's
        upper set are determined by the input coordinates there."""
        if g.p != self.model.p:
            raise ValueError("permutation size does not match the model")
        img = g.image
        for ci in range(len(self.classes)):
            vmap = self.v_maps[ci]
            seen = [-1] * self.model.marginal_size(self.vsets[ci])
            for k in range(self.model.p):
                b = vmap[k]
                t = vmap[img[k]]
                s = seen[b]
                if s < 0:
                    seen[b] = t
                elif s != t:
                    return False
        return True

    def factorize(self, g: CellPermutation) -> WreathElement:
        """Read off the per-class tables of g, or raise NonMemberError.

        For each class and ancestor marginal cell, the table entry is the
        induced map on class marginal cells, read at representative cells
        with all other coordinates at level 1.
        """
        if not self.contains(g):
            raise NonMemberError("permutation does not belong to the wreath product")
        model = self.model
        tables = []
        for ci, cls in enumerate(self.classes):
            size = self.class_sizes[ci]
            anc = self.ancestors[ci]
            perms = []
            for aj in range(self.ancestor_sizes[ci]):
                base = [1] * model.m
                for j, coord in zip(anc, model.marginal_coords(anc, aj)):
                    base[j] = coord
                perm = [0] * size
                for t in range(size):
                    for j, coord in zip(cls.members, model.marginal_coords(cls.members, t)):
                        base[j] = coord
                    perm[t] = self.cls_maps[ci][g.image[model.cell_index(base)]]
                if sorted(perm) != list(range(size)):
                    raise NonMemberError("class block does not act by a permutation")
                perms.append(tuple(perm))
            tables.append(tuple(perms))
        w = WreathElement(self, tuple(tables))
        assert self.to_cell_permutation(w).image == g.image
        return w

    # -- generators --------------------------------------------------------

    def generators(self) -> list[CellPermutation]:
        """Adjacent transpositions of each class's marginal cells, applied at
        one ancestor marginal cell at a time."""
        gens = []
        identity = self.identity()
        for ci, size in enumerate(self.class_sizes):
            for aj in range(self.ancestor_sizes[ci]):
                for t in range(size - 1):
                    swapped = list(range(size))
                    swapped[t], swapped[t + 1] = swapped[t + 1], swapped[t]
                    tables = list(identity.tables)
                    block = list(tables[ci])
                    block[aj] = tuple(swapped)
                    tables[ci] = tuple(block)
                    gens.append(self.to_cell_permutation(WreathElement(self, tuple(tables))))
        return gens


def facet_criterion_member(model: HierarchicalModel, g: CellPermutation) -> bool:
    """True iff for every facet, the image coordinates on the facet are
    determined by the input coordinates there."""
    if g.p != model.p:
        raise ValueError("permutation size does not match the model")
    img = g.image
    for D in model.facet_list:
        dmap = model.marginal_map(D)
        seen = [-1] * model.marginal_size(D)
        for k in range(model.p):
            b = dmap[k]
            t = dmap[img[k]]
            s = seen[b]
            if s < 0:
                seen[b] = t
            elif s != t:
                return False
    return True


# -- permutation and element files ----------------------------------------


def serialize_permutation(g: CellPermutation) -> str:
    return json.dumps({"p": g.p, "image": list(g.image)}) + "\n"


def parse_permutation(text: str) -> CellPermutation:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or not isinstance(obj.get("image"), list):
        raise ModelError('permutation file needs "p" and an "image" array')
    try:
        return CellPermutation(obj.get("p"), tuple(obj["image"]))
    except (TypeError, ValueError) as exc:
        raise ModelError(f"bad permutation: {exc}") from exc


def element_to_dict(w: WreathElement) -> dict:
    group = w.group
    model = group.model
    classes = []
    for ci, cls in enumerate(group.classes):
        entries = []
        for aj in range(group.ancestor_sizes[ci]):
            anc = group.ancestors[ci]
            entries.append(
                {
                    "ancestor_cell": list(model.marginal_coords(anc, aj)),
                    "perm": list(w.tables[ci][aj]),
                }
            )
        classes.append(
            {
                "members": [j + 1 for j in cls.members],
                "ancestors": [j + 1 for j in group.ancestors[ci]],
                "entries": entries,
            }
        )
    return {"classes": classes}


def serialize_element(w: WreathElement) -> str:
    return json.dumps(element_to_dict(w), indent=2) + "\n"


def parse_element(group: WreathGroup, text: str) -> WreathElement:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from exc
    listed = obj.get("classes") if isinstance(obj, dict) else None
    if not isinstance(listed, list):
        raise ModelError('element file needs a "classes" array')
    by_members = {tuple(c.get("members", [])): c for c in listed}
    tables = []
    for ci, cls in enumerate(group.classes):
        key = tuple(j + 1 for j in cls.members)
        entry = by_members.get(key)
        if entry is None:
            raise ModelError(f"element file is missing class {set(key)}")
        perms = [None] * group.ancestor_sizes[ci]
        anc = group.ancestors[ci]
        for item in entry.get("entries", []):
            coords = tuple(item.get("ancestor_cell", []))
            aj = group.model.marginal_index(coords, anc)
            perms[aj] = tuple(item.get("perm", []))
        if any(perm is None for perm in perms):
            raise ModelError(f"element file is missing tables for class {set(key)}")
        tables.append(tuple(perms))
    return group.element(tuple(tables))

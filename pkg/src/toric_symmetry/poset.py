"""Pseudofactor partition and poset, plus the intersection poset of facets.

Two factors are equivalent when the same facets contain them; the classes
("pseudofactors") are ordered by inclusion of those facet stars.  The map V
sending a class to the union of the classes at or above it lands in the
intersection poset of the facets, ordered by reverse inclusion.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

from .model import HierarchicalModel, ModelError


@dataclass(frozen=True)
class Pseudofactor:
    """A maximal set of factors sharing one facet star."""

    members: tuple[int, ...]
    star: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class PseudofactorPoset:
    """The pseudofactor classes of a model, ordered by star inclusion.

    ``classes`` is sorted by smallest member; identity of a class within the
    poset is its ``members`` tuple.
    """

    model: HierarchicalModel
    classes: tuple[Pseudofactor, ...]

    def class_of(self, factor: int) -> Pseudofactor:
        for cls in self.classes:
            if factor in cls.members:
                return cls
        raise ModelError(f"factor index {factor + 1} out of range")

    def leq(self, a: Pseudofactor, b: Pseudofactor) -> bool:
        return set(a.star) <= set(b.star)

    def less(self, a: Pseudofactor, b: Pseudofactor) -> bool:
        return a.members != b.members and self.leq(a, b)

    def ancestors(self, cls: Pseudofactor) -> tuple[int, ...]:
        """Union of the members of all classes strictly above cls."""
        out: set[int] = set()
        for other in self.classes:
            if self.less(cls, other):
                out.update(other.members)
        return tuple(sorted(out))

    def vset(self, cls: Pseudofactor) -> tuple[int, ...]:
        """Union of the members of all classes at or above cls."""
        return tuple(sorted(set(cls.members) | set(self.ancestors(cls))))

    @cached_property
    def is_trivial(self) -> bool:
        """No two distinct classes are comparable."""
        return not any(
            self.less(a, b) or self.less(b, a) for a, b in combinations(self.classes, 2)
        )

    def hasse_covers(self) -> tuple[tuple[Pseudofactor, Pseudofactor], ...]:
        """Pairs (lower, upper) with nothing strictly between them."""
        covers = []
        for a in self.classes:
            for b in self.classes:
                if self.less(a, b) and not any(
                    self.less(a, c) and self.less(c, b) for c in self.classes
                ):
                    covers.append((a, b))
        return tuple(covers)

    def _depth(self, cls: Pseudofactor) -> int:
        below = [c for c in self.classes if self.less(c, cls)]
        if not below:
            return 0
        return 1 + max(self._depth(c) for c in below)

    def topological_order(self) -> tuple[Pseudofactor, ...]:
        """Linear extension: lower classes first, ties broken by the smallest
        member factor."""
        return tuple(
            sorted(self.classes, key=lambda c: (self._depth(c), c.members[0]))
        )


def pseudofactor_poset(model: HierarchicalModel) -> PseudofactorPoset:
    stars: dict[tuple[tuple[int, ...], ...], list[int]] = {}
    for j in range(model.m):
        star = tuple(D for D in model.facet_list if j in D)
        stars.setdefault(star, []).append(j)
    classes = tuple(
        sorted(
            (Pseudofactor(tuple(members), star) for star, members in stars.items()),
            key=lambda c: c.members[0],
        )
    )
    return PseudofactorPoset(model, classes)


def v_set(poset: PseudofactorPoset, cls: Pseudofactor) -> tuple[int, ...]:
    return poset.vset(cls)


def topological_order(poset: PseudofactorPoset) -> tuple[Pseudofactor, ...]:
    return poset.topological_order()


@dataclass(frozen=True)
class IntersectionPoset:
    """All intersections of facet subsets (the full factor set included),
    ordered by reverse inclusion: x <= y iff x contains y."""

    ground: tuple[int, ...]
    elements: tuple[tuple[int, ...], ...]

    def leq(self, x, y) -> bool:
        return set(x) >= set(y)

    def __contains__(self, x) -> bool:
        return tuple(sorted(x)) in self.elements

    def __len__(self) -> int:
        return len(self.elements)


def intersection_poset(model: HierarchicalModel, max_facets: int = 20) -> IntersectionPoset:
    facets = model.facet_list
    if len(facets) > max_facets:
        raise ModelError(
            f"{len(facets)} facets would need 2^{len(facets)} subsets; limit is {max_facets}"
        )
    ground = tuple(range(model.m))
    seen = {ground}
    for r in range(1, len(facets) + 1):
        for S in combinations(facets, r):
            inter = set(S[0])
            for D in S[1:]:
                inter &= set(D)
            seen.add(tuple(sorted(inter)))
    return IntersectionPoset(ground, tuple(sorted(seen, key=lambda E: (len(E), E))))


def check_v_homomorphism(model: HierarchicalModel) -> bool:
    """True iff V is the star intersection on every class, injective on
    classes, and order-preserving into the intersection poset."""
    return not v_embedding_report(model)["violations"]


def v_embedding_report(model: HierarchicalModel) -> dict:
    """Details of the V map for reports: images, intersection-poset size,
    injectivity/order-preservation violations, surjectivity."""
    poset = pseudofactor_poset(model)
    qposet = intersection_poset(model)
    ground = set(range(model.m))
    violations = []
    images = {}
    for cls in poset.classes:
        v = poset.vset(cls)
        star_inter = ground.copy()
        for D in cls.star:
            star_inter &= set(D)
        if set(v) != star_inter:
            violations.append(f"V{set(cls.members)} differs from its star intersection")
        if v not in qposet:
            violations.append(f"V{set(cls.members)} outside the intersection poset")
        images[cls.members] = v
    values = list(images.values())
    if len(set(values)) != len(values):
        violations.append("V is not injective")
    for a, b in combinations(poset.classes, 2):
        for lo, hi in ((a, b), (b, a)):
            if poset.leq(lo, hi) and not qposet.leq(images[lo.members], images[hi.members]):
                violations.append(
                    f"order not preserved between {set(lo.members)} and {set(hi.members)}"
                )
    image = sorted(set(values), key=lambda E: (len(E), E))
    return {
        "classes": len(poset.classes),
        "image_size": len(image),
        "intersection_poset_size": len(qposet),
        "proper_part_size": len(qposet) - 1,
        "surjective": len(image) == len(qposet),
        "violations": violations,
    }

"""Smooth projective split toric varieties from their fans.

Degree classes are kept as full vectors in Z^I (one entry per boundary divisor) satisfying
Σ d_i ρ_i = 0. Picard coordinates are the residual entries at the rays outside the basis cone
σ0 after subtracting the character that matches the vector on σ0.
"""

import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import sympy

from toricount.lattice import Cone, ConeZeta, LatticeError, Vector, cone_zeta, dot, index_of, nullspace, rank
from toricount.logger import get_logger
from toricount.lpoly import LPoly

DegreeClass = Vector

CATALOG_NAMES = ["P1", "P2", "P3", "P1xP1", "BlP2", "Fa(a)", "dP6"]


class FanValidationError(Exception):
    """Raised when a fan fails one of the structural checks; ``check`` names the failing check."""

    def __init__(self, check: str, detail: str):
        self.check = check
        self.detail = detail
        super().__init__(f"{check}: {detail}")


class ToricError(Exception):
    """Raised for queries outside the domain of a toric variety (non-big classes, bad lengths)."""

    pass


@dataclass(frozen=True)
class Fan:
    rays: Tuple[Vector, ...]
    max_cones: Tuple[Tuple[int, ...], ...]
    name: str = ""
    labels: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rays", tuple(tuple(int(c) for c in r) for r in self.rays))
        object.__setattr__(self, "max_cones", tuple(tuple(int(i) for i in c) for c in self.max_cones))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(len(self.rays))))

    @property
    def dim(self) -> int:
        if not self.rays:
            raise FanValidationError("rays", "a fan needs at least one ray")
        return len(self.rays[0])

    @cached_property
    def faces(self) -> FrozenSet[FrozenSet[int]]:
        """Every ray-index set spanning a cone of the fan (faces of simplicial maximal cones)."""
        found: Set[FrozenSet[int]] = set()
        for cone in self.max_cones:
            for k in range(len(cone) + 1):
                for subset in combinations(cone, k):
                    found.add(frozenset(subset))
        return frozenset(found)

    def is_face(self, subset) -> bool:
        return frozenset(subset) in self.faces

    def cone(self, index: int) -> Cone:
        return Cone([self.rays[i] for i in self.max_cones[index]], self.dim)

    def validate(self, smooth_complete: bool = True) -> None:
        """Run the structural checks in order and raise on the first failure.

        Raises:
            FanValidationError: naming the failing check and the offending cone or ray.
        """
        n = self.dim
        for i, ray in enumerate(self.rays):
            if len(ray) != n:
                raise FanValidationError("rays", f"ray {i} has length {len(ray)}, expected {n}")
            if not any(ray) or index_of(ray) != 1:
                raise FanValidationError("primitive", f"ray {i} = {list(ray)} is not primitive")
        if len(set(self.rays)) != len(self.rays):
            raise FanValidationError("distinct", "rays are not pairwise distinct")
        for c, cone in enumerate(self.max_cones):
            if not cone or any(i < 0 or i >= len(self.rays) for i in cone):
                raise FanValidationError("indices", f"cone {c} = {list(cone)} refers to unknown rays")
            if len(set(cone)) != len(cone):
                raise FanValidationError("indices", f"cone {c} = {list(cone)} repeats a ray")
            try:
                self.cone(c)
            except LatticeError as e:
                raise FanValidationError("strictly-convex", f"cone {c} = {list(cone)}: {e}")
            if rank([self.rays[i] for i in cone]) != len(cone):
                raise FanValidationError("simplicial", f"cone {c} = {list(cone)} has linearly dependent rays")
        self._check_intersections()
        if not smooth_complete:
            return
        for c, cone in enumerate(self.max_cones):
            if len(cone) != n:
                raise FanValidationError("smooth", f"cone {c} = {list(cone)} has {len(cone)} rays, expected {n}")
            det = sympy.Matrix([list(self.rays[i]) for i in cone]).det()
            if abs(int(det)) != 1:
                raise FanValidationError("smooth", f"cone {c} = {list(cone)} has determinant {det}")
        if rank(list(self.rays)) != n:
            raise FanValidationError("span", f"rays do not span a lattice of rank {n}")
        self._check_walls()
        self._check_coverage()

    def _check_intersections(self) -> None:
        # σ ∩ τ is a face of both exactly when, modulo the span of the shared rays, the rays of σ only
        # and the negated rays of τ only generate a strictly convex cone.
        for a, b in combinations(range(len(self.max_cones)), 2):
            sa, sb = set(self.max_cones[a]), set(self.max_cones[b])
            if sa == sb:
                raise FanValidationError("indices", f"cones {a} and {b} list the same rays")
            quotient = nullspace([self.rays[i] for i in sorted(sa & sb)], self.dim)
            if not quotient:
                continue
            images = [tuple(dot(m, self.rays[i]) for m in quotient) for i in sorted(sa - sb)]
            images += [tuple(-dot(m, self.rays[i]) for m in quotient) for i in sorted(sb - sa)]
            try:
                Cone(images, len(quotient))
            except LatticeError:
                pair = f"{list(self.max_cones[a])} and {list(self.max_cones[b])}"
                raise FanValidationError("intersection", f"cones {pair} do not meet in a common face")

    def _check_walls(self) -> None:
        walls: Dict[FrozenSet[int], List[int]] = {}
        for c, cone in enumerate(self.max_cones):
            for wall in combinations(cone, len(cone) - 1):
                walls.setdefault(frozenset(wall), []).append(c)
        for wall, owners in walls.items():
            if len(owners) != 2:
                raise FanValidationError(
                    "completeness", f"wall {sorted(wall)} lies in {len(owners)} maximal cones {owners}, expected 2"
                )
            a, b = (set(self.max_cones[o]) - wall for o in owners)
            (ia,), (ib,) = a, b
            normal = self._wall_normal(sorted(wall))
            if dot(normal, self.rays[ia]) * dot(normal, self.rays[ib]) >= 0:
                raise FanValidationError("walls", f"cones {owners} lie on the same side of wall {sorted(wall)}")

    def _wall_normal(self, wall: Sequence[int]) -> Vector:
        rows = [list(self.rays[i]) for i in wall]
        if not rows:
            return (1,)
        (kernel,) = sympy.Matrix(rows).nullspace()
        return tuple(int(c) for c in kernel * sympy.lcm([sympy.Rational(c).q for c in kernel]))

    def _check_coverage(self) -> None:
        # Wall-connected chambers cover space a constant number of times; one generic point settles it.
        cones = [self.cone(c) for c in range(len(self.max_cones))]
        normals = [f for cone in cones for f in cone.facets]
        base = 7919
        while True:
            w = tuple(base**k + k for k in range(self.dim))
            if all(dot(f, w) != 0 for f in normals):
                break
            base += 2
        hits = [c for c, cone in enumerate(cones) if cone.contains(w)]
        if len(hits) != 1:
            raise FanValidationError("coverage", f"a generic vector lies in {len(hits)} maximal cones {hits}")


class ToricVariety:
    """The combinatorial model of X: Picard coordinates, pairings, faces and primitive collections."""

    def __init__(self, fan: Fan):
        fan.validate()
        self.fan = fan
        self.n = fan.dim
        self.rays = fan.rays
        self.num_rays = len(fan.rays)
        self.pic_rank = self.num_rays - self.n
        self.basis_cone = min(range(len(fan.max_cones)), key=lambda c: sorted(fan.max_cones[c]))
        self.sigma0: Tuple[int, ...] = tuple(sorted(fan.max_cones[self.basis_cone]))
        self.others: Tuple[int, ...] = tuple(i for i in range(self.num_rays) if i not in self.sigma0)
        inverse = sympy.Matrix([list(self.rays[i]) for i in self.sigma0]).inv()
        self._inverse = [[int(c) for c in inverse.row(r)] for r in range(self.n)]
        get_logger().debug(
            f"toric variety {fan.name or '<unnamed>'}: n={self.n}, rays={self.num_rays}, basis cone {list(self.sigma0)}",
            module="toricount.toric",
        )

    def character_map(self, m: Sequence[int]) -> Vector:
        """m ↦ (⟨m, ρ_i⟩)_i, the divisor of the character χ^m."""
        return tuple(dot(m, r) for r in self.rays)

    def pic_coords(self, a: Sequence[int]) -> Vector:
        if len(a) != self.num_rays:
            raise ToricError(f"divisor vector has length {len(a)}, expected {self.num_rays}")
        local = [a[i] for i in self.sigma0]
        m = [sum(self._inverse[r][j] * local[j] for j in range(self.n)) for r in range(self.n)]
        return tuple(a[j] - dot(m, self.rays[j]) for j in self.others)

    def lift(self, x: Sequence[int]) -> Vector:
        """A divisor vector in Z^I with Picard coordinates ``x`` (zero on σ0)."""
        if len(x) != self.pic_rank:
            raise ToricError(f"Picard class has length {len(x)}, expected {self.pic_rank}")
        a = [0] * self.num_rays
        for j, value in zip(self.others, x):
            a[j] = value
        return tuple(a)

    @cached_property
    def divisor_classes(self) -> Tuple[Vector, ...]:
        return tuple(self.pic_coords(tuple(1 if i == j else 0 for i in range(self.num_rays))) for j in range(self.num_rays))

    @property
    def omega(self) -> Vector:
        return self.anticanonical()

    def anticanonical(self) -> Vector:
        return self.pic_coords((1,) * self.num_rays)

    def is_degree_class(self, y: Sequence[int]) -> bool:
        """Membership in Pic^∨ ⊂ Z^I: Σ y_i ρ_i = 0."""
        return len(y) == self.num_rays and all(sum(yi * r[k] for yi, r in zip(y, self.rays)) == 0 for k in range(self.n))

    def is_effective_dual(self, y: Sequence[int]) -> bool:
        return self.is_degree_class(y) and all(c >= 0 for c in y)

    def degree_from_pic_dual(self, z: Sequence[int]) -> DegreeClass:
        """y_i = ⟨z, [D_i]⟩ for z in coordinates dual to the Picard basis."""
        return tuple(dot(z, cls) for cls in self.divisor_classes)

    def to_pic_dual(self, y: Sequence[int]) -> Vector:
        return tuple(y[j] for j in self.others)

    def pairing(self, y: Sequence[int], x: Sequence[int]) -> int:
        """⟨y, x⟩ for a degree class y ∈ Z^I and a Picard class x in Picard coordinates."""
        return dot(y, self.lift(x))

    def morphism_dimension(self, y: Sequence[int]) -> int:
        """⟨y, ω⟩ + dim X, the dimension of the space of morphisms of degree y."""
        return sum(y) + self.n

    @cached_property
    def effective_cone(self) -> Cone:
        return Cone(list(self.divisor_classes), self.pic_rank)

    @cached_property
    def dual_effective_cone(self) -> Cone:
        """Eff^∨ in coordinates dual to the Picard basis."""
        return self.effective_cone.dual()

    def dual_effective_rays(self) -> List[DegreeClass]:
        """Extremal rays of Eff^∨ ∩ Pic^∨, written in Z^I."""
        return sorted(self.degree_from_pic_dual(z) for z in self.dual_effective_cone.generators)

    @cached_property
    def dual_effective_zeta(self) -> ConeZeta:
        return cone_zeta(self.dual_effective_cone)

    def is_big(self, x: Sequence[int]) -> bool:
        return len(x) == self.pic_rank and all(dot(f, x) > 0 for f in self.effective_cone.facets)

    def degree_classes_of_height(self, x: Sequence[int], d: int) -> List[DegreeClass]:
        """All y ∈ Pic^∨ ∩ N^I with ⟨y, x⟩ = d, sorted.

        Raises:
            ToricError: if ``x`` is not big (the level sets would be infinite).
        """
        if d < 0:
            return []
        if not self.is_big(x):
            raise ToricError(f"class {list(x)} is not big, level sets are infinite")
        points = self.dual_effective_zeta.points_up_to(x, d)
        return sorted(self.degree_from_pic_dual(z) for z in points if dot(z, x) == d)

    def faces(self) -> FrozenSet[FrozenSet[int]]:
        return self.fan.faces

    def is_face(self, subset) -> bool:
        return self.fan.is_face(subset)

    def primitive_collections(self) -> List[Tuple[int, ...]]:
        """Minimal non-faces, by ascending-cardinality subset scan."""
        found: List[FrozenSet[int]] = []
        for k in range(1, self.num_rays + 1):
            for subset in combinations(range(self.num_rays), k):
                s = frozenset(subset)
                if self.is_face(s) or any(p <= s for p in found):
                    continue
                found.append(s)
        return [tuple(sorted(p)) for p in found]

    def class_of_X(self) -> LPoly:
        """Σ over cones σ (including {0}) of (L - 1)^(n - dim σ)."""
        by_dim: Dict[int, int] = {}
        for face in self.fan.faces:
            by_dim[len(face)] = by_dim.get(len(face), 0) + 1
        total = LPoly.ZERO
        for k, count in by_dim.items():
            total = total + (LPoly.L - 1) ** (self.n - k) * count
        return total

    def point_count(self, q: int) -> int:
        return int(self.class_of_X().evaluate(q))

    def __repr__(self) -> str:
        return f"ToricVariety({self.fan.name or list(self.rays)})"


def from_fan(fan: Fan) -> ToricVariety:
    """Validate ``fan`` as smooth and complete and build its toric variety."""
    return ToricVariety(fan)


def _consecutive_cones(count: int) -> Tuple[Tuple[int, int], ...]:
    return tuple((i, (i + 1) % count) for i in range(count))


def _projective_space(n: int) -> Fan:
    rays = [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)] + [tuple([-1] * n)]
    cones = tuple(combinations(range(n + 1), n))
    return Fan(tuple(rays), cones, f"P{n}")


def catalog(name: str) -> Fan:
    """Standard fans by name: P1, P2, P3, P1xP1, BlP2, Fa(a) (Hirzebruch surface, alias F(a)), dP6.

    Raises:
        ToricError: for an unknown name, listing the available ones.
    """
    key = name.strip()
    if key in ("P1", "P2", "P3"):
        return _projective_space(int(key[1]))
    if key == "P1xP1":
        return Fan(((1, 0), (-1, 0), (0, 1), (0, -1)), ((0, 2), (0, 3), (1, 2), (1, 3)), "P1xP1")
    if key == "BlP2":
        return Fan(
            ((1, 0), (0, 1), (-1, -1), (1, 1)),
            ((0, 3), (3, 1), (1, 2), (2, 0)),
            "BlP2",
            labels=("0", "1", "2", "E"),
        )
    if key == "dP6":
        rays = ((1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1))
        return Fan(rays, _consecutive_cones(6), "dP6")
    match = re.fullmatch(r"Fa?\((-?\d+)\)", key)
    if match:
        a = int(match.group(1))
        return Fan(((1, 0), (0, 1), (-1, a), (0, -1)), _consecutive_cones(4), f"Fa({a})")
    raise ToricError(f"unknown variety '{name}', available: {', '.join(CATALOG_NAMES)}")


def catalog_variety(name: str) -> ToricVariety:
    return ToricVariety(catalog(name))


def orbit_point_count(X: ToricVariety, q: int) -> int:
    """#X(F_q) assembled orbit by orbit: each cone σ contributes (q - 1)^(n - dim σ)."""
    return sum((q - 1) ** (X.n - len(face)) for face in X.faces())


def check_exactness(X: ToricVariety) -> Optional[str]:
    """None when pic_coords kills every character basis vector and the rank identity holds."""
    if X.num_rays != X.n + X.pic_rank:
        return f"rank identity fails: {X.num_rays} != {X.n} + {X.pic_rank}"
    for k in range(X.n):
        m = tuple(1 if i == k else 0 for i in range(X.n))
        image = X.pic_coords(X.character_map(m))
        if any(image):
            return f"character e_{k} maps to {list(image)}"
    return None

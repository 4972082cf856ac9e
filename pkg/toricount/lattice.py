"""Rational polyhedral cones and their lattice-point generating functions.

A cone is given by primitive integer generators. Its generating function
Σ_{y ∈ C ∩ N} t^y is written as a finite sum of terms (Σ_{p ∈ Π} t^p) / ∏ (1 - t^{g_i}),
one per half-open simplicial piece of a placing triangulation, where Π is the set of lattice
points of the piece's half-open fundamental parallelepiped.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import combinations, product
from math import factorial, gcd
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from toricount.logger import get_logger

Vector = Tuple[int, ...]

_T = sympy.Symbol("t")


class LatticeError(Exception):
    """Raised for invalid cones, vectors outside a required region, or undefined invariants."""

    pass


def dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def index_of(x: Sequence[int]) -> int:
    """Largest d with x ∈ d·N^∨, i.e. the gcd of the coordinates.

    Raises:
        LatticeError: for the zero vector.
    """
    value = reduce(gcd, (abs(c) for c in x), 0)
    if value == 0:
        raise LatticeError("index of the zero vector is undefined")
    return value


def primitive(v: Sequence[int]) -> Vector:
    ind = index_of(v)
    return tuple(c // ind for c in v)


def _integral(values: Sequence) -> Vector:
    """Scale a rational vector to a primitive integer vector with the same direction."""
    fractions = [Fraction(int(sympy.Rational(c).p), int(sympy.Rational(c).q)) for c in values]
    denominator = reduce(lambda a, b: a * b // gcd(a, b), (f.denominator for f in fractions), 1)
    ints = [int(f * denominator) for f in fractions]
    return primitive(ints)


def rank(vectors: Sequence[Sequence[int]]) -> int:
    if not vectors:
        return 0
    return sympy.Matrix([list(v) for v in vectors]).rank()


def nullspace(rows: Sequence[Sequence[int]], n: int) -> List[Vector]:
    """Integer basis of {y ∈ Q^n : ⟨r, y⟩ = 0 for every row r}."""
    if not rows:
        return [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)]
    return [_integral(list(col)) for col in sympy.Matrix([list(r) for r in rows]).nullspace()]


def _independent_subset(vectors: Sequence[Vector]) -> List[Vector]:
    basis: List[Vector] = []
    for v in vectors:
        if rank(basis + [v]) > len(basis):
            basis.append(v)
    return basis


class Cone:
    """A strictly convex rational polyhedral cone with primitive generators.

    Facet normals are computed at construction: one integer functional per facet, taken inside
    the linear span of the cone and oriented inward. ``equations`` cut out that span.
    """

    def __init__(self, generators: Sequence[Sequence[int]], ambient_dim: Optional[int] = None):
        gens: List[Vector] = []
        for g in generators:
            if not any(g):
                continue
            p = primitive(g)
            if p not in gens:
                gens.append(p)
        if ambient_dim is None:
            if not generators:
                raise LatticeError("ambient dimension is required for the zero cone")
            ambient_dim = len(generators[0])
        if any(len(g) != ambient_dim for g in gens):
            raise LatticeError("generators have inconsistent lengths")
        self.ambient_dim = ambient_dim
        self.generators: Tuple[Vector, ...] = tuple(gens)
        self.dim = rank(gens)
        self.equations: Tuple[Vector, ...] = tuple(nullspace(gens, ambient_dim))
        self.facets: Tuple[Vector, ...] = tuple(self._compute_facets())
        if self.dim and rank(list(self.facets)) != self.dim:
            raise LatticeError(f"cone generated by {list(self.generators)} is not strictly convex")

    def _compute_facets(self) -> List[Vector]:
        if self.dim == 0:
            return []
        basis = _independent_subset(list(self.generators))
        facets: List[Vector] = []
        for subset in combinations(self.generators, self.dim - 1):
            if rank(list(subset)) != self.dim - 1:
                continue
            # f = Σ a_j b_j inside the span, orthogonal to the subset
            rows = [[dot(b, s) for b in basis] for s in subset]
            if rows:
                kernel = sympy.Matrix(rows).nullspace()
                if len(kernel) != 1:
                    continue
                coeffs = list(kernel[0])
            else:
                coeffs = [1] + [0] * (len(basis) - 1)
            f = [sum(sympy.Rational(a) * b[i] for a, b in zip(coeffs, basis)) for i in range(self.ambient_dim)]
            normal = _integral(f)
            values = [dot(normal, g) for g in self.generators]
            if all(v >= 0 for v in values):
                pass
            elif all(v <= 0 for v in values):
                normal = tuple(-c for c in normal)
            else:
                continue
            if normal not in facets:
                facets.append(normal)
        return facets

    def in_span(self, y: Sequence[int]) -> bool:
        return all(dot(e, y) == 0 for e in self.equations)

    def contains(self, y: Sequence[int]) -> bool:
        return self.in_span(y) and all(dot(f, y) >= 0 for f in self.facets)

    def in_relative_interior(self, y: Sequence[int]) -> bool:
        return self.in_span(y) and all(dot(f, y) > 0 for f in self.facets)

    def is_simplicial(self) -> bool:
        return len(self.generators) == self.dim

    def is_regular(self) -> bool:
        """Simplicial with generators forming part of a lattice basis (gcd of maximal minors is 1)."""
        if not self.is_simplicial():
            return False
        if self.dim == 0:
            return True
        matrix = sympy.Matrix([list(g) for g in self.generators])
        rows = list(range(self.dim))
        minors = [matrix.extract(rows, list(cols)).det() for cols in combinations(range(self.ambient_dim), self.dim)]
        return reduce(gcd, (abs(int(m)) for m in minors), 0) == 1

    def positive_on(self, x: Sequence[int]) -> bool:
        """⟨g, x⟩ > 0 for every generator, i.e. x lies in the interior of the dual cone."""
        return all(dot(g, x) > 0 for g in self.generators)

    def dual(self) -> "Cone":
        """Dual of a full-dimensional cone: generated by the facet normals."""
        if self.dim != self.ambient_dim:
            raise LatticeError("dual() needs a full-dimensional cone")
        return Cone(list(self.facets), self.ambient_dim)

    def __repr__(self) -> str:
        return f"Cone({list(self.generators)})"


@dataclass(frozen=True)
class HalfOpenPiece:
    """A simplicial piece with the facets opposite to ``open_facets`` indices excluded."""

    generators: Tuple[Vector, ...]
    open_facets: Tuple[bool, ...]
    points: Tuple[Vector, ...]


@dataclass(frozen=True)
class ZetaTerm:
    numerators: Tuple[Vector, ...]
    denominators: Tuple[Vector, ...]


@dataclass(frozen=True)
class ConeZeta:
    """Σ over terms of (Σ_{p ∈ numerators} t^p) / ∏_{g ∈ denominators} (1 - t^g)."""

    ambient_dim: int
    terms: Tuple[ZetaTerm, ...]

    @property
    def dim(self) -> int:
        return max((len(term.denominators) for term in self.terms), default=0)

    def points_up_to(self, x: Sequence[int], level: int) -> List[Vector]:
        """Lattice points y encoded by the terms with ⟨y, x⟩ ≤ level, each listed once per occurrence."""
        found: List[Vector] = []
        for term in self.terms:
            steps = [dot(g, x) for g in term.denominators]
            if any(s <= 0 for s in steps):
                raise LatticeError(f"{list(x)} is not positive on every generator")
            for p in term.numerators:
                base = dot(p, x)
                if base > level:
                    continue
                self._walk(p, list(term.denominators), steps, level - base, found)
        return found

    @staticmethod
    def _walk(point, gens, steps, budget, found):
        if not gens:
            found.append(tuple(point))
            return
        g, rest, step, rest_steps = gens[0], gens[1:], steps[0], steps[1:]
        k = 0
        current = list(point)
        while k * step <= budget:
            ConeZeta._walk(current, rest, rest_steps, budget - k * step, found)
            current = [c + gi for c, gi in zip(current, g)]
            k += 1

    def is_product_form(self) -> bool:
        """True when the zeta is a single term 1/∏(1 - t^{g_i}) (regular cones)."""
        return len(self.terms) == 1 and self.terms[0].numerators == (tuple([0] * self.ambient_dim),)


def _facet_normals_of_simplex(gens: Sequence[Vector], ambient_dim: int) -> List[Vector]:
    """Normal i vanishes on all generators except gens[i] and is positive there."""
    normals = []
    cone = Cone(list(gens), ambient_dim)
    for i in range(len(gens)):
        others = [g for j, g in enumerate(gens) if j != i]
        for f in cone.facets:
            if all(dot(f, g) == 0 for g in others) and dot(f, gens[i]) > 0:
                normals.append(f)
                break
        else:
            raise LatticeError(f"generators {list(gens)} are not linearly independent")
    return normals


def triangulate(cone: Cone) -> List[Cone]:
    """Placing triangulation using the generators in their given order.

    Returns simplicial cones whose union is ``cone`` and whose interiors are disjoint; the zero
    cone gives the empty list. Generators that fall inside the cone built so far are skipped.
    """
    if cone.dim == 0:
        return []
    n = cone.ambient_dim
    gens = list(cone.generators)
    simplices: List[List[Vector]] = [[gens[0]]]
    used = [gens[0]]
    current = Cone(used, n)
    for p in gens[1:]:
        if not current.in_span(p):
            simplices = [s + [p] for s in simplices]
        elif current.contains(p):
            continue
        else:
            visible = [f for f in current.facets if dot(f, p) < 0]
            added: List[List[Vector]] = []
            seen = set()
            for s in simplices:
                for f in visible:
                    face = [g for g in s if dot(f, g) == 0]
                    if len(face) == current.dim - 1:
                        key = frozenset(face)
                        if key not in seen:
                            seen.add(key)
                            added.append(face + [p])
            simplices = simplices + added
        used.append(p)
        current = Cone(used, n)
    return [Cone(s, n) for s in simplices]


def _generic_interior_point(cone: Cone, normals: Sequence[Vector]) -> Vector:
    """The first w = Σ c_j g_j with integers c_j ≥ 1 lying on none of the given facet hyperplanes.

    Coefficient vectors are tried by increasing max entry, lexicographically within one max.
    w is a point of the relative interior, not a functional; a piece leaves a facet open when
    the facet's inward normal is negative at w.
    """
    gens = cone.generators
    bound = 1
    while True:
        for c in product(range(1, bound + 1), repeat=len(gens)):
            if max(c) != bound:
                continue
            w = tuple(sum(cj * g[i] for cj, g in zip(c, gens)) for i in range(cone.ambient_dim))
            if all(dot(f, w) != 0 for f in normals):
                return w
        bound += 1


def _parallelepiped_points(gens: Sequence[Vector], open_facets: Sequence[bool], ambient_dim: int) -> List[Vector]:
    k = len(gens)
    matrix = sympy.Matrix([list(g) for g in gens]).T
    rows = _independent_subset([tuple(matrix.row(i)) for i in range(ambient_dim)])
    row_index = [next(i for i in range(ambient_dim) if tuple(matrix.row(i)) == r) for r in rows]
    square = matrix.extract(row_index, list(range(k)))
    inverse = [[Fraction(int(c.p), int(c.q)) for c in square.inv().row(i)] for i in range(k)]
    lows = [sum(min(0, g[i]) for g in gens) for i in range(ambient_dim)]
    highs = [sum(max(0, g[i]) for g in gens) for i in range(ambient_dim)]
    points = []
    for y in product(*(range(lo, hi + 1) for lo, hi in zip(lows, highs))):
        lam = [sum(row[j] * y[row_index[j]] for j in range(k)) for row in inverse]
        if any(lam[i] < 0 or lam[i] > 1 for i in range(k)):
            continue
        if any((lam[i] == 0) if open_facets[i] else (lam[i] == 1) for i in range(k)):
            continue
        if all(sum(lam[j] * gens[j][i] for j in range(k)) == y[i] for i in range(ambient_dim)):
            points.append(tuple(y))
    return points


def half_open_decomposition(cone: Cone) -> List[HalfOpenPiece]:
    pieces = triangulate(cone)
    normals = {piece.generators: _facet_normals_of_simplex(piece.generators, cone.ambient_dim) for piece in pieces}
    w = _generic_interior_point(cone, [f for fs in normals.values() for f in fs])
    result = []
    for piece in pieces:
        open_facets = tuple(dot(f, w) < 0 for f in normals[piece.generators])
        points = _parallelepiped_points(piece.generators, open_facets, cone.ambient_dim)
        result.append(HalfOpenPiece(piece.generators, open_facets, tuple(sorted(points))))
    return result


def cone_zeta(cone: Cone) -> ConeZeta:
    """Rational form of Σ_{y ∈ C ∩ N} t^y as a sum over half-open simplicial pieces."""
    if cone.dim == 0:
        return ConeZeta(cone.ambient_dim, (ZetaTerm((tuple([0] * cone.ambient_dim),), ()),))
    with get_logger().timed(f"cone_zeta of {len(cone.generators)} generators", module="toricount.lattice"):
        pieces = half_open_decomposition(cone)
    get_logger().debug(f"cone_zeta: {len(pieces)} pieces", module="toricount.lattice")
    return ConeZeta(cone.ambient_dim, tuple(ZetaTerm(p.points, p.generators) for p in pieces))


@dataclass(frozen=True)
class SpecializedZeta:
    """Univariate Σ_d #{y : ⟨y, x⟩ = d} t^d kept as terms (numerator exponents, denominator exponents)."""

    terms: Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...]
    dim: int

    def coefficients(self, dmax: int) -> List[int]:
        total = [0] * (dmax + 1)
        for numerators, denominators in self.terms:
            series = [0] * (dmax + 1)
            for a in numerators:
                if a <= dmax:
                    series[a] += 1
            for b in denominators:
                for d in range(b, dmax + 1):
                    series[d] += series[d - b]
            total = [u + v for u, v in zip(total, series)]
        return total

    def expr(self):
        return sum(
            (sum((_T**a for a in nums), sympy.Integer(0)) / sympy.prod([1 - _T**b for b in dens]) for nums, dens in self.terms),
            sympy.Integer(0),
        )

    def rational_form(self) -> Tuple[sympy.Poly, sympy.Poly]:
        """Reduced numerator and denominator polynomials in t."""
        num, den = sympy.fraction(sympy.cancel(sympy.together(self.expr())))
        return sympy.Poly(num, _T), sympy.Poly(den, _T)

    def pole_orders(self) -> Dict[int, int]:
        """Order of the pole at the primitive m-th roots of unity, keyed by m (m=1 is t=1)."""
        _, den = self.rational_form()
        _, factors = sympy.factor_list(den.as_expr(), _T)
        bound = max((b for _, dens in self.terms for b in dens), default=1)
        orders: Dict[int, int] = {}
        for factor, multiplicity in factors:
            poly = sympy.Poly(factor, _T).monic()
            if poly.degree() < 1:
                continue
            for m in range(1, bound + 1):
                if poly == sympy.Poly(sympy.cyclotomic_poly(m, _T), _T):
                    orders[m] = orders.get(m, 0) + multiplicity
                    break
            else:
                raise LatticeError(f"non-cyclotomic denominator factor {factor}")
        return orders

    @property
    def alpha(self) -> Fraction:
        """lim_{t→1} (1-t)^dim · sp_x Z, read off the terms of full dimension."""
        total = Fraction(0)
        for numerators, denominators in self.terms:
            if len(denominators) == self.dim:
                denominator = 1
                for b in denominators:
                    denominator *= b
                total += Fraction(len(numerators), denominator)
        return total


def specialize_zeta(z: ConeZeta, x: Sequence[int]) -> SpecializedZeta:
    """Substitute t^y -> t^{⟨y, x⟩}.

    Raises:
        LatticeError: if some generator pairs to a non-positive value with ``x``.
    """
    terms = []
    for term in z.terms:
        steps = tuple(dot(g, x) for g in term.denominators)
        if any(s <= 0 for s in steps):
            raise LatticeError(f"{list(x)} is not in the interior of the dual cone")
        terms.append((tuple(dot(p, x) for p in term.numerators), steps))
    return SpecializedZeta(tuple(terms), z.dim)


def leading_alpha(z: ConeZeta, x: Sequence[int]) -> Fraction:
    return specialize_zeta(z, x).alpha


def asymptotic_count(z: ConeZeta, x: Sequence[int], d: int) -> Fraction:
    """Leading-order prediction for #{y : ⟨y, x⟩ = ind·d}: α·ind·(ind·d)^(k-1)/(k-1)!."""
    ind = index_of(x)
    k = z.dim
    if k == 0:
        return Fraction(1 if d == 0 else 0)
    return leading_alpha(z, x) * ind * Fraction((ind * d) ** (k - 1), factorial(k - 1))


@dataclass(frozen=True)
class WeightedConeZeta:
    """Σ_{y ∈ C ∩ N} ρ^{⟨y, x0⟩} t^y, sharing the terms of the unweighted zeta."""

    zeta: ConeZeta
    x0: Vector

    def at_rho_one(self) -> ConeZeta:
        return self.zeta

    def weight(self, y: Sequence[int]) -> int:
        return dot(y, self.x0)

    def expand(self, x: Sequence[int], level: int) -> Dict[Vector, int]:
        """Map y -> exponent of ρ for every y with ⟨y, x⟩ ≤ level."""
        return {y: self.weight(y) for y in self.zeta.points_up_to(x, level)}

    def expr(self, rho: sympy.Symbol, ts: Sequence[sympy.Symbol]):
        def monomial(v):
            return sympy.prod([t**c for t, c in zip(ts, v)])

        total = sympy.Integer(0)
        for term in self.zeta.terms:
            num = sum((rho ** self.weight(p) * monomial(p) for p in term.numerators), sympy.Integer(0))
            den = sympy.prod([1 - rho ** self.weight(g) * monomial(g) for g in term.denominators])
            total += num / den
        return total


def weighted_cone_zeta(cone: Cone, x0: Sequence[int]) -> WeightedConeZeta:
    return WeightedConeZeta(cone_zeta(cone), tuple(x0))


def enumerate_levels(cone: Cone, x: Sequence[int], dmax: int) -> List[int]:
    """Direct count of lattice points of the cone at each level ⟨y, x⟩ = d, d ≤ dmax, by box scan."""
    if not cone.positive_on(x):
        raise LatticeError(f"{list(x)} is not in the interior of the dual cone")
    counts = [0] * (dmax + 1)
    if cone.dim == 0:
        counts[0] = 1
        return counts
    bounds = [
        sum(Fraction(dmax * abs(g[i]), dot(g, x)) for g in cone.generators) for i in range(cone.ambient_dim)
    ]
    ranges = [range(-int(b), int(b) + 1) for b in bounds]
    for y in product(*ranges):
        level = dot(y, x)
        if 0 <= level <= dmax and cone.contains(y):
            counts[level] += 1
    return counts


def a_b_invariants(eff: Cone, l_class: Sequence[int], omega_class: Sequence[int]) -> Tuple[Fraction, int]:
    """a = max over facets F of ⟨ω, F⟩/⟨L, F⟩ and b = codimension of the minimal face containing a·L - ω.

    Raises:
        LatticeError: if ``l_class`` is not in the interior of ``eff``.
    """
    if not all(dot(f, l_class) > 0 for f in eff.facets) or not eff.in_span(l_class):
        raise LatticeError(f"{list(l_class)} is not big (not in the interior of the effective cone)")
    a = max(Fraction(dot(f, omega_class), dot(f, l_class)) for f in eff.facets)
    v = [a * lc - oc for lc, oc in zip(l_class, omega_class)]
    values = [sum(Fraction(fi) * vi for fi, vi in zip(f, v)) for f in eff.facets]
    if any(val < 0 for val in values):
        raise LatticeError("a·L - ω left the effective cone")
    tight = [f for f, val in zip(eff.facets, values) if val == 0]
    return a, rank(tight)

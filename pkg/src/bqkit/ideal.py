"""Admissible ideals and the exact linear algebra of relation spaces.

Every hom-pair subspace is stored through its unique reduced echelon
basis with respect to the canonical path order: each basis element has
leading coefficient 1 on its largest path, leading paths strictly
increase, and no leading path occurs in any other basis element.  The
basis elements are minimal relations, so they double as the generating
set for the homotopy machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import IdealError
from .fields import Field
from .quiver import (Path, Quiver, compose_paths, enumerate_paths, path_key,
                     paths_between)

SPLIT_ENUMERATION_BITS = 12


@dataclass(frozen=True)
class Relation:
    """An exact linear combination of parallel paths."""

    source: str
    target: str
    terms: tuple  # ((Path, scalar), ...) sorted by canonical path order

    @property
    def is_zero(self):
        return not self.terms

    def support(self):
        return tuple(p for p, _ in self.terms)

    def coefficient(self, path, fld: Field):
        for p, c in self.terms:
            if p == path:
                return c
        return fld.zero

    def to_text(self, fld: Field) -> str:
        """Render with the leading (largest) path first."""
        if not self.terms:
            return "0"
        parts = []
        for i, (p, c) in enumerate(reversed(self.terms)):
            coeff = fld.format(c)
            sign = ""
            if coeff.startswith("-"):
                sign, coeff = "-", coeff[1:]
            body = p.to_text() if coeff == "1" else "%s*%s" % (coeff, p.to_text())
            if i == 0:
                parts.append(("-" if sign else "") + body)
            else:
                parts.append(("- " if sign else "+ ") + body)
        return " ".join(parts)


def make_relation(quiver: Quiver, fld: Field, source, target, terms) -> Relation:
    """Normalize (path, scalar) terms: merge duplicates, drop zeros, sort.

    Scalars are coerced into the field exactly, so a fraction fed to a
    prime field either lands on the right residue or raises.
    """
    acc = {}
    items = terms.items() if isinstance(terms, dict) else terms
    for path, c in items:
        if (path.source, path.target) != (source, target):
            raise IdealError("path %s is not parallel to %s -> %s"
                             % (path, source, target))
        acc[path] = fld.add(acc.get(path, fld.zero), fld.scalar(c))
    kept = [(p, c) for p, c in acc.items() if not fld.is_zero(c)]
    kept.sort(key=lambda pc: path_key(quiver, pc[0]))
    return Relation(source, target, tuple(kept))


def relation_of_path(quiver: Quiver, fld: Field, path: Path) -> Relation:
    return Relation(path.source, path.target, ((path, fld.one),))


def add_relations(quiver: Quiver, fld: Field, a: Relation, b: Relation) -> Relation:
    if (a.source, a.target) != (b.source, b.target):
        raise IdealError("cannot add relations in different hom-pairs")
    return make_relation(quiver, fld, a.source, a.target,
                         list(a.terms) + list(b.terms))


def scale_relation(quiver: Quiver, fld: Field, c, r: Relation) -> Relation:
    if fld.is_zero(c):
        return Relation(r.source, r.target, ())
    return Relation(r.source, r.target,
                    tuple((p, fld.mul(c, x)) for p, x in r.terms))


def mul_relations(quiver: Quiver, fld: Field, later: Relation, earlier: Relation) -> Relation:
    """The product "later * earlier" (earlier acts first)."""
    if earlier.target != later.source:
        raise IdealError("relations do not compose")
    terms = []
    for p, c in later.terms:
        for q, d in earlier.terms:
            terms.append((compose_paths(quiver, p, q), fld.mul(c, d)))
    return make_relation(quiver, fld, earlier.source, later.target, terms)


class _HomSpace:
    """Echelon basis of one hom-pair subspace, in coordinates."""

    def __init__(self, quiver, fld, x, y):
        self.quiver = quiver
        self.fld = fld
        self.x = x
        self.y = y
        self.paths = paths_between(quiver, x, y)
        self.index = {p: i for i, p in enumerate(self.paths)}
        self.rows = {}  # pivot index -> coefficient list

    def vector(self, r: Relation):
        vec = [self.fld.zero] * len(self.paths)
        for p, c in r.terms:
            vec[self.index[p]] = c
        return vec

    def relation(self, vec) -> Relation:
        terms = [(self.paths[i], c) for i, c in enumerate(vec)
                 if not self.fld.is_zero(c)]
        return Relation(self.x, self.y, tuple(terms))

    def _lead(self, vec):
        for i in range(len(vec) - 1, -1, -1):
            if not self.fld.is_zero(vec[i]):
                return i
        return None

    def reduce(self, vec):
        """Fully reduce against the basis; one downward sweep suffices
        because a row with pivot i only touches coordinates <= i."""
        fld = self.fld
        vec = list(vec)
        for i in range(len(vec) - 1, -1, -1):
            if i in self.rows and not fld.is_zero(vec[i]):
                c = vec[i]
                row = self.rows[i]
                for k in range(i + 1):
                    vec[k] = fld.sub(vec[k], fld.mul(c, row[k]))
        return vec

    def insert(self, vec) -> bool:
        """Reduce and add to the basis; True if the span grew."""
        fld = self.fld
        vec = self.reduce(vec)
        lead = self._lead(vec)
        if lead is None:
            return False
        inv = fld.inv(vec[lead])
        vec = [fld.mul(inv, c) for c in vec]
        # keep the basis reduced: clear this pivot from existing rows
        for row in self.rows.values():
            if len(row) > lead and not fld.is_zero(row[lead]):
                c = row[lead]
                for k in range(lead + 1):
                    row[k] = fld.sub(row[k], fld.mul(c, vec[k]))
        self.rows[lead] = vec
        return True

    def basis_relations(self):
        return tuple(self.relation(self.rows[p]) for p in sorted(self.rows))

    def contains(self, r: Relation) -> bool:
        return self._lead(self.reduce(self.vector(r))) is None

    @property
    def dim(self):
        return len(self.rows)


class Ideal:
    """An admissible ideal with per-hom-pair echelon bases."""

    def __init__(self, quiver, fld, generators, spaces):
        self.quiver = quiver
        self.field = fld
        self.generators = tuple(generators)
        self._spaces = spaces
        self._radical = None

    @property
    def radical_length(self) -> int:
        if self._radical is None:
            self._radical = self._radical_length()
        return self._radical

    def _space(self, x, y):
        key = (x, y)
        if key not in self._spaces:
            self._spaces[key] = _HomSpace(self.quiver, self.field, x, y)
        return self._spaces[key]

    def groebner_basis(self, x, y):
        return self._space(x, y).basis_relations()

    def hom_pairs(self):
        """Hom-pairs with a nonzero subspace, in vertex declaration order."""
        order = {v: i for i, v in enumerate(self.quiver.vertices)}
        keys = [k for k, s in self._spaces.items() if s.dim > 0]
        keys.sort(key=lambda k: (order[k[0]], order[k[1]]))
        return keys

    def minimal_relations(self):
        out = []
        for x, y in self.hom_pairs():
            out.extend(self.groebner_basis(x, y))
        return tuple(out)

    def contains(self, r: Relation) -> bool:
        if r.is_zero:
            return True
        return self._space(r.source, r.target).contains(r)

    def dim_ideal(self, x, y) -> int:
        return self._space(x, y).dim

    def dim_quotient(self, x, y) -> int:
        return len(paths_between(self.quiver, x, y)) - self.dim_ideal(x, y)

    def total_dim(self) -> int:
        return sum(s.dim for s in self._spaces.values())

    def _radical_length(self) -> int:
        worst = 0
        for p in enumerate_paths(self.quiver):
            if not self.contains(relation_of_path(self.quiver, self.field, p)):
                worst = max(worst, len(p) + 1)
        return worst

    def __eq__(self, other):
        if not isinstance(other, Ideal):
            return NotImplemented
        if self.quiver != other.quiver or self.field != other.field:
            return False
        return self._basis_snapshot() == other._basis_snapshot()

    def __hash__(self):
        return hash((self.quiver, self.field, self._basis_snapshot()))

    def _basis_snapshot(self):
        if getattr(self, "_snapshot", None) is None:
            self._snapshot = tuple(
                sorted((k, self._spaces[k].basis_relations())
                       for k, s in self._spaces.items() if s.dim > 0))
        return self._snapshot

    def describe(self) -> str:
        gens = ", ".join(r.to_text(self.field) for r in self.minimal_relations())
        return "<%s>" % (gens or "0")


def close_ideal(quiver: Quiver, fld: Field, generators) -> Ideal:
    """Two-sided closure plus echelonization of the given relations.

    Worklist saturation: every relation whose insertion grows a span is
    extended by single arrows on both sides.  Extension is linear, so
    saturating these witnesses closes the whole span; the work is bounded
    by the dimension of the result rather than by the path count squared.
    """
    gens = []
    for g in generators:
        if g.is_zero:
            continue
        for p in g.support():
            if len(p) < 2:
                raise IdealError(
                    "generator %s is not admissible: path %s has length %d"
                    % (g.to_text(fld), p, len(p)))
        gens.append(g)

    spaces = {}

    def insert(rel):
        key = (rel.source, rel.target)
        if key not in spaces:
            spaces[key] = _HomSpace(quiver, fld, *key)
        return spaces[key].insert(spaces[key].vector(rel))

    todo = [g for g in gens if insert(g)]
    while todo:
        rel = todo.pop()
        for a in quiver.arrows_from(rel.target):
            grown = mul_relations(
                quiver, fld,
                relation_of_path(quiver, fld, Path(a.source, a.target, (a.name,))),
                rel)
            if insert(grown):
                todo.append(grown)
        for a in quiver.arrows_into(rel.source):
            grown = mul_relations(
                quiver, fld, rel,
                relation_of_path(quiver, fld, Path(a.source, a.target, (a.name,))))
            if insert(grown):
                todo.append(grown)
    return Ideal(quiver, fld, gens, spaces)


def groebner_basis(ideal: Ideal, x, y):
    return ideal.groebner_basis(x, y)


def minimal_relations(ideal: Ideal):
    return ideal.minimal_relations()


def decompose_minimal(ideal: Ideal, r: Relation):
    """Split r in I into minimal relations with pairwise disjoint supports."""
    fld = ideal.field
    quiver = ideal.quiver
    if r.is_zero:
        return []
    if not ideal.contains(r):
        raise IdealError("relation %s does not lie in the ideal" % r.to_text(fld))
    space = ideal._space(r.source, r.target)

    # coordinates of r over the echelon basis (downward sweep)
    vec = space.vector(r)
    used = {}
    for i in range(len(vec) - 1, -1, -1):
        if i in space.rows and not fld.is_zero(vec[i]):
            c = vec[i]
            used[i] = c
            row = space.rows[i]
            for k in range(i + 1):
                vec[k] = fld.sub(vec[k], fld.mul(c, row[k]))

    # components of the support-overlap graph of the basis elements used
    pivots = sorted(used)
    supports = {p: set(space.relation(space.rows[p]).support()) for p in pivots}
    parent = {p: p for p in pivots}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for i, p in enumerate(pivots):
        for q in pivots[i + 1:]:
            if supports[p] & supports[q]:
                parent[find(p)] = find(q)

    groups = {}
    for p in pivots:
        groups.setdefault(find(p), []).append(p)

    pieces = []
    for root in sorted(groups):
        piece = Relation(r.source, r.target, ())
        for p in groups[root]:
            piece = add_relations(quiver, fld, piece,
                                  scale_relation(quiver, fld, used[p],
                                                 space.relation(space.rows[p])))
        pieces.extend(_split_off_minimal(ideal, piece))
    pieces.sort(key=lambda rel: path_key(quiver, rel.support()[0]))
    return pieces


def _split_off_minimal(ideal: Ideal, r: Relation):
    """Brute-force refinement of one overlap component.

    Supports larger than SPLIT_ENUMERATION_BITS are returned unsplit; at
    that size we fall back on the structural fact that echelon basis
    elements are minimal, which covers every component the closure
    machinery produces at desk scale.
    """
    supp = r.support()
    n = len(supp)
    if n <= 1 or n > SPLIT_ENUMERATION_BITS:
        return [r]
    fld = ideal.field
    quiver = ideal.quiver
    for mask in range(1, 1 << (n - 1)):
        sub = [supp[0]] + [supp[i] for i in range(1, n) if mask & (1 << (i - 1))]
        if len(sub) == n:
            continue
        part = make_relation(quiver, fld, r.source, r.target,
                             [(p, r.coefficient(p, fld)) for p in sub])
        if ideal.contains(part):
            rest = add_relations(quiver, fld, r,
                                 scale_relation(quiver, fld, fld.neg(fld.one), part))
            return _split_off_minimal(ideal, part) + _split_off_minimal(ideal, rest)
    return [r]


def support_equivalence(ideal: Ideal, x, y):
    """The classes of parallel paths x -> y linked through basis supports."""
    quiver = ideal.quiver
    paths = paths_between(quiver, x, y)
    parent = {p: p for p in paths}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for rel in ideal.groebner_basis(x, y):
        supp = rel.support()
        for p in supp[1:]:
            parent[find(p)] = find(supp[0])

    classes = {}
    for p in paths:
        classes.setdefault(find(p), []).append(p)
    out = [tuple(sorted(v, key=lambda p: path_key(quiver, p))) for v in classes.values()]
    out.sort(key=lambda cls: path_key(quiver, cls[0]))
    return tuple(out)


def is_constricted(ideal: Ideal) -> bool:
    return all(ideal.dim_quotient(a.source, a.target) == 1
               for a in ideal.quiver.arrows)


def ideals_equal(a: Ideal, b: Ideal) -> bool:
    if a.quiver != b.quiver:
        raise IdealError("ideals live on different quivers")
    if a.field != b.field:
        raise IdealError("ideals live over different fields (char %s vs %s)"
                         % (a.field.char, b.field.char))
    return a._basis_snapshot() == b._basis_snapshot()

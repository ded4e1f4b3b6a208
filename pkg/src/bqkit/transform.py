"""Automorphisms of the path algebra fixing the vertices.

Transvections send one arrow to itself plus a multiple of a parallel
path; dilatations rescale arrows.  Every vertex-fixing automorphism
factors as a dilatation composed with transvections, and the
decomposition here follows the constructive induction on the number of
arrows whose image is not a scalar multiple of themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import TransformError
from .fields import Field
from .ideal import (Ideal, Relation, add_relations, close_ideal,
                    mul_relations, relation_of_path, scale_relation)
from .quiver import Bypass, Path, Quiver, trivial_path


@dataclass(frozen=True)
class Transvection:
    """arrow -> arrow + tau * path, all other arrows fixed."""

    bypass: Bypass
    tau: object

    @property
    def arrow(self):
        return self.bypass.arrow

    @property
    def path(self):
        return self.bypass.path

    def inverse(self, fld: Field) -> "Transvection":
        return Transvection(self.bypass, fld.neg(self.tau))

    def to_text(self, fld: Field) -> str:
        return "phi(%s, %s, %s)" % (self.arrow, self.path.to_text(),
                                    fld.format(self.tau))


@dataclass(frozen=True)
class Dilatation:
    """arrow-wise rescaling by nonzero scalars (missing arrows scale by 1)."""

    scales: tuple  # ((arrow name, scalar), ...)

    def scale(self, arrow, fld: Field):
        for name, c in self.scales:
            if name == arrow:
                return c
        return fld.one

    def is_identity(self, fld: Field) -> bool:
        return all(c == fld.one for _, c in self.scales)

    def inverse(self, fld: Field) -> "Dilatation":
        return Dilatation(tuple((n, fld.inv(c)) for n, c in self.scales))

    def path_scale(self, path: Path, fld: Field):
        c = fld.one
        for name in path.arrows:
            c = fld.mul(c, self.scale(name, fld))
        return c

    def to_text(self, fld: Field) -> str:
        if not self.scales:
            return "D(id)"
        return "D(%s)" % ", ".join("%s=%s" % (n, fld.format(c))
                                   for n, c in self.scales)


def make_dilatation(quiver: Quiver, fld: Field, scales) -> Dilatation:
    items = scales.items() if isinstance(scales, dict) else scales
    out = []
    for name, c in items:
        quiver.arrow(name)
        if fld.is_zero(c):
            raise TransformError("dilatation scale for %r is zero" % name)
        out.append((name, c))
    out.sort(key=lambda nc: quiver.arrow_index(nc[0]))
    return Dilatation(tuple(out))


class PathAutomorphism:
    """A vertex-fixing automorphism, stored by its arrow images."""

    def __init__(self, quiver: Quiver, fld: Field, images):
        self.quiver = quiver
        self.field = fld
        full = {}
        for a in quiver.arrows:
            img = images.get(a.name)
            if img is None:
                img = relation_of_path(quiver, fld, Path(a.source, a.target, (a.name,)))
            if (img.source, img.target) != (a.source, a.target):
                raise TransformError(
                    "image of %s must lie in hom(%s, %s)" % (a.name, a.source, a.target))
            full[a.name] = img
        self.images = full
        self._check_linear_part()

    def _check_linear_part(self):
        """The induced arrow-to-arrow map must be invertible per parallel class."""
        fld = self.field
        classes = {}
        for a in self.quiver.arrows:
            classes.setdefault((a.source, a.target), []).append(a.name)
        for names in classes.values():
            n = len(names)
            mat = [[fld.zero] * n for _ in range(n)]
            for j, src in enumerate(names):
                img = self.images[src]
                for p, c in img.terms:
                    if len(p) == 1:
                        mat[names.index(p.arrows[0])][j] = c
            if not _invertible(fld, mat):
                raise TransformError(
                    "linear part is singular on the parallel class {%s}"
                    % ", ".join(names))

    def linear_part(self, names):
        fld = self.field
        n = len(names)
        mat = [[fld.zero] * n for _ in range(n)]
        for j, src in enumerate(names):
            for p, c in self.images[src].terms:
                if len(p) == 1 and p.arrows[0] in names:
                    mat[names.index(p.arrows[0])][j] = c
        return mat

    def apply_to_path(self, path: Path) -> Relation:
        fld = self.field
        acc = relation_of_path(self.quiver, fld, trivial_path(self.quiver, path.source))
        for name in path.arrows:
            acc = mul_relations(self.quiver, fld, self.images[name], acc)
        return acc

    def apply_to_relation(self, rel: Relation) -> Relation:
        fld = self.field
        out = Relation(rel.source, rel.target, ())
        for p, c in rel.terms:
            out = add_relations(self.quiver, fld, out,
                                scale_relation(self.quiver, fld, c, self.apply_to_path(p)))
        return out

    def __eq__(self, other):
        if not isinstance(other, PathAutomorphism):
            return NotImplemented
        return (self.quiver, self.field) == (other.quiver, other.field) \
            and self.images == other.images

    def __hash__(self):
        return hash((self.quiver, self.field, tuple(sorted(self.images.items(),
                     key=lambda kv: self.quiver.arrow_index(kv[0])))))


def _invertible(fld: Field, mat) -> bool:
    n = len(mat)
    m = [row[:] for row in mat]
    for col in range(n):
        pivot = next((r for r in range(col, n) if not fld.is_zero(m[r][col])), None)
        if pivot is None:
            return False
        m[col], m[pivot] = m[pivot], m[col]
        inv = fld.inv(m[col][col])
        m[col] = [fld.mul(inv, x) for x in m[col]]
        for r in range(n):
            if r != col and not fld.is_zero(m[r][col]):
                c = m[r][col]
                m[r] = [fld.sub(x, fld.mul(c, y)) for x, y in zip(m[r], m[col])]
    return True


def identity_automorphism(quiver: Quiver, fld: Field) -> PathAutomorphism:
    return PathAutomorphism(quiver, fld, {})


def as_path_automorphism(phi, quiver: Quiver, fld: Field) -> PathAutomorphism:
    """Coerce a Transvection or Dilatation (or pass one through)."""
    if isinstance(phi, PathAutomorphism):
        if phi.quiver != quiver or phi.field != fld:
            raise TransformError("automorphism is over a different quiver or field")
        return phi
    if isinstance(phi, Transvection):
        a = quiver.arrow(phi.arrow)
        base = relation_of_path(quiver, fld, Path(a.source, a.target, (a.name,)))
        img = add_relations(quiver, fld, base,
                            scale_relation(quiver, fld, phi.tau,
                                           relation_of_path(quiver, fld, phi.path)))
        return PathAutomorphism(quiver, fld, {a.name: img})
    if isinstance(phi, Dilatation):
        images = {}
        for name, c in phi.scales:
            a = quiver.arrow(name)
            images[name] = scale_relation(
                quiver, fld, c,
                relation_of_path(quiver, fld, Path(a.source, a.target, (a.name,))))
        return PathAutomorphism(quiver, fld, images)
    raise TransformError("not an automorphism: %r" % (phi,))


def compose(f, g, quiver: Quiver = None, fld: Field = None) -> PathAutomorphism:
    """The automorphism f o g (g applied first)."""
    if quiver is None:
        probe = f if isinstance(f, PathAutomorphism) else g
        if not isinstance(probe, PathAutomorphism):
            raise TransformError("compose needs quiver and field for plain "
                                 "transvections/dilatations")
        quiver, fld = probe.quiver, probe.field
    fa = as_path_automorphism(f, quiver, fld)
    ga = as_path_automorphism(g, quiver, fld)
    images = {name: fa.apply_to_relation(img) for name, img in ga.images.items()}
    return PathAutomorphism(quiver, fld, images)


def apply_automorphism(phi, ideal: Ideal) -> Ideal:
    """The image ideal phi(I), re-closed and re-echelonized."""
    auto = as_path_automorphism(phi, ideal.quiver, ideal.field)
    gens = [auto.apply_to_relation(r) for r in ideal.minimal_relations()]
    image = close_ideal(ideal.quiver, ideal.field, gens)
    if image.total_dim() != ideal.total_dim():
        raise TransformError("automorphism did not preserve the ideal dimension")
    return image


def decompose_DT(phi: PathAutomorphism):
    """Factor phi = D o t_n o ... o t_1 (t_1 applied first).

    Follows the inductive proof: per parallel class, first make the
    linear part diagonal with arrow-to-arrow transvections, then strip
    the longer tails; what remains is the dilatation.
    """
    quiver = phi.quiver
    fld = phi.field
    applied = []  # transvections s_1, s_2, ... composed on the left, in order
    current = phi

    def is_scalar(name):
        img = current.images[name]
        return len(img.terms) == 1 and img.terms[0][0].arrows == (name,)

    while True:
        bad = next((a.name for a in quiver.arrows if not is_scalar(a.name)), None)
        if bad is None:
            break
        a0 = quiver.arrow(bad)
        names = [a.name for a in quiver.arrows
                 if (a.source, a.target) == (a0.source, a0.target)]
        # 1) diagonalize the linear part on this class by row operations,
        #    each realized by a transvection between parallel arrows
        mat = current.linear_part(names)
        n = len(names)
        for col in range(n):
            if fld.is_zero(mat[col][col]):
                # rows above col are already single-entry, so a usable
                # pivot row must sit strictly below
                src = next(r for r in range(col + 1, n)
                           if not fld.is_zero(mat[r][col]))
                _row_op(fld, mat, col, src, fld.one)
                t = _arrow_transvection(quiver, names[src], names[col], fld.one)
                applied.append(t)
                current = compose(as_path_automorphism(t, quiver, fld), current)
            for r in range(n):
                if r != col and not fld.is_zero(mat[r][col]):
                    c = fld.neg(fld.div(mat[r][col], mat[col][col]))
                    _row_op(fld, mat, r, col, c)
                    t = _arrow_transvection(quiver, names[col], names[r], c)
                    applied.append(t)
                    current = compose(as_path_automorphism(t, quiver, fld), current)
        # 2) strip tails of length >= 2
        for name in names:
            img = current.images[name]
            lam = img.coefficient(Path(a0.source, a0.target, (name,)), fld)
            for p, c in img.terms:
                if len(p) >= 2:
                    t = Transvection(Bypass(name, p), fld.neg(fld.div(c, lam)))
                    applied.append(t)
                    current = compose(as_path_automorphism(t, quiver, fld), current)
        for name in names:
            if not is_scalar(name):
                raise TransformError("tail stripping failed on arrow %r" % name)

    scales = []
    for a in quiver.arrows:
        c = current.images[a.name].terms[0][1]
        if c != fld.one:
            scales.append((a.name, c))
    dil = Dilatation(tuple(scales))

    # applied, in order s_1 ... s_K, satisfies s_K o ... o s_1 o phi = D,
    # so phi = s_1^-1 o ... o s_K^-1 o D; conjugating D to the front turns
    # each s^-1 into a transvection with tau scaled by mu/lambda
    transvections = []
    for s in applied:  # phi = D o (D^-1 s_1^-1 D) o ... o (D^-1 s_K^-1 D)
        inv = s.inverse(fld)
        mu = dil.scale(inv.arrow, fld)
        lam = dil.path_scale(inv.path, fld)
        transvections.append(Transvection(inv.bypass,
                                          fld.mul(inv.tau, fld.div(mu, lam))))
    transvections.reverse()  # application order: innermost first

    recomposed = recompose_DT(quiver, fld, dil, transvections)
    if recomposed != phi:
        raise TransformError("decomposition failed to recompose to the input")
    return dil, transvections


def recompose_DT(quiver: Quiver, fld: Field, dil: Dilatation,
                 transvections) -> PathAutomorphism:
    """D o t_n o ... o t_1 as a PathAutomorphism (t_1 applied first)."""
    acc = identity_automorphism(quiver, fld)
    for t in transvections:
        acc = compose(as_path_automorphism(t, quiver, fld), acc)
    return compose(as_path_automorphism(dil, quiver, fld), acc)


def _row_op(fld, mat, dst, src, c):
    n = len(mat[0])
    for k in range(n):
        mat[dst][k] = fld.add(mat[dst][k], fld.mul(c, mat[src][k]))


def _arrow_transvection(quiver, src_arrow, dst_arrow, c) -> Transvection:
    """row_dst += c * row_src corresponds to src_arrow -> src_arrow + c*dst_arrow."""
    a = quiver.arrow(dst_arrow)
    return Transvection(Bypass(src_arrow, Path(a.source, a.target, (dst_arrow,))), c)


class Derivation:
    """A derivation of the path algebra, given on arrows, zero on vertices.

    Every image term must be strictly longer than its arrow, which makes
    the derivation nilpotent on the (finite-length) path algebra.
    """

    def __init__(self, quiver: Quiver, fld: Field, arrow_images):
        self.quiver = quiver
        self.field = fld
        images = {}
        for a in quiver.arrows:
            img = arrow_images.get(a.name)
            if img is None:
                img = Relation(a.source, a.target, ())
            if (img.source, img.target) != (a.source, a.target):
                raise TransformError("derivation image of %s has wrong endpoints" % a.name)
            for p, _ in img.terms:
                if len(p) < 2:
                    raise TransformError(
                        "derivation image of %s contains %s, not strictly longer"
                        % (a.name, p))
            images[a.name] = img
        self.images = images

    def apply_to_path(self, path: Path) -> Relation:
        """Leibniz rule: sum over positions of the arrow images."""
        fld = self.field
        out = Relation(path.source, path.target, ())
        for i, name in enumerate(path.arrows):
            piece = relation_of_path(self.quiver, fld,
                                     trivial_path(self.quiver, path.source))
            for j, other in enumerate(path.arrows):
                img = self.images[other] if j == i else relation_of_path(
                    self.quiver, fld,
                    Path(self.quiver.arrow(other).source,
                         self.quiver.arrow(other).target, (other,)))
                piece = mul_relations(self.quiver, fld, img, piece)
            out = add_relations(self.quiver, fld, out, piece)
        return out

    def apply_to_relation(self, rel: Relation) -> Relation:
        fld = self.field
        out = Relation(rel.source, rel.target, ())
        for p, c in rel.terms:
            out = add_relations(self.quiver, fld, out,
                                scale_relation(self.quiver, fld, c,
                                               self.apply_to_path(p)))
        return out

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        return (self.quiver, self.field) == (other.quiver, other.field) \
            and self.images == other.images


def exp_derivation(nu: Derivation) -> PathAutomorphism:
    """exp of a nilpotent derivation, by the (finite) power series."""
    quiver, fld = nu.quiver, nu.field
    images = {}
    for a in quiver.arrows:
        base = relation_of_path(quiver, fld, Path(a.source, a.target, (a.name,)))
        acc = base
        term = base
        factorial = 1
        l = 0
        while True:
            term = nu.apply_to_relation(term)
            if term.is_zero:
                break
            l += 1
            factorial *= l
            if fld.char and l >= fld.char:
                raise TransformError(
                    "exponential needs 1/%d! which does not exist in char %d"
                    % (l, fld.char))
            acc = add_relations(quiver, fld, acc,
                                scale_relation(quiver, fld,
                                               fld.inv(fld.scalar(factorial)), term))
        images[a.name] = acc
    return PathAutomorphism(quiver, fld, images)


def log_unipotent(phi: PathAutomorphism) -> Derivation:
    """log of a unipotent automorphism (arrow images = arrow + longer terms)."""
    quiver, fld = phi.quiver, phi.field
    for a in quiver.arrows:
        img = phi.images[a.name]
        arrow_path = Path(a.source, a.target, (a.name,))
        if img.coefficient(arrow_path, fld) != fld.one:
            raise TransformError("not unipotent: coefficient of %s in its image "
                                 "is not 1" % a.name)
        for p, _ in img.terms:
            if p != arrow_path and len(p) <= 1:
                raise TransformError("not unipotent: image of %s has the "
                                     "length-1 term %s" % (a.name, p))

    def delta(rel):
        return add_relations(quiver, fld, phi.apply_to_relation(rel),
                             scale_relation(quiver, fld, fld.neg(fld.one), rel))

    images = {}
    for a in quiver.arrows:
        base = relation_of_path(quiver, fld, Path(a.source, a.target, (a.name,)))
        power = delta(base)
        acc = Relation(a.source, a.target, ())
        l = 1
        while not power.is_zero:
            if fld.char and l >= fld.char:
                raise TransformError(
                    "logarithm needs 1/%d which does not exist in char %d"
                    % (l, fld.char))
            sign = fld.one if l % 2 == 1 else fld.neg(fld.one)
            acc = add_relations(quiver, fld, acc,
                                scale_relation(quiver, fld,
                                               fld.div(sign, fld.scalar(l)), power))
            power = delta(power)
            l += 1
        images[a.name] = acc
    return Derivation(quiver, fld, images)


def match_by_dilatation(a: Ideal, b: Ideal):
    """A dilatation D with D(a) = b, or None.

    A dilatation keeps leading paths and supports of echelon bases, so
    matching reduces to a system of monomial equations in the arrow
    scales, solved through the Smith normal form of the exponent matrix.
    """
    if a.quiver != b.quiver or a.field != b.field:
        raise TransformError("ideals live on different quivers or fields")
    quiver, fld = a.quiver, a.field
    narrows = len(quiver.arrows)

    def exponents(path):
        row = [0] * narrows
        for name in path.arrows:
            row[quiver.arrow_index(name)] += 1
        return row

    rows = []
    rhs = []
    keys = set(a.hom_pairs()) | set(b.hom_pairs())
    for x, y in sorted(keys, key=lambda k: (quiver.vertices.index(k[0]),
                                            quiver.vertices.index(k[1]))):
        ga = a.groebner_basis(x, y)
        gb = b.groebner_basis(x, y)
        if len(ga) != len(gb):
            return None
        for ra, rb in zip(ga, gb):
            if ra.support() != rb.support():
                return None
            lead = ra.support()[-1]
            lead_exp = exponents(lead)
            for p, ca in ra.terms:
                cb = rb.coefficient(p, fld)
                rows.append([e - f for e, f in zip(exponents(p), lead_exp)])
                rhs.append(fld.div(cb, ca))

    solution = _solve_monomial_system(fld, rows, rhs, narrows)
    if solution is None:
        return None
    scales = [(quiver.arrows[i].name, solution[i]) for i in range(narrows)
              if solution[i] != fld.one]
    dil = Dilatation(tuple(scales))
    from .ideal import ideals_equal
    if not ideals_equal(apply_automorphism(dil, a), b):
        return None
    return dil


def _solve_monomial_system(fld: Field, rows, rhs, nvars):
    """Solve prod_j x_j^{A[i][j]} = rhs[i] for nonzero field elements x."""
    if not rows:
        return [fld.one] * nvars
    # Run the Smith elimination on the exponent matrix while mirroring
    # the row operations multiplicatively on the right-hand side: with
    # x = V z the system becomes z_i^{d_i} = s_i.
    m = len(rows)
    a = [list(r) for r in rows]
    s = list(rhs)

    # mirror the Smith reduction with the multiplicative right-hand side
    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        s[i], s[j] = s[j], s[i]

    def add_row(dst, src, c):
        for k in range(nvars):
            a[dst][k] += c * a[src][k]
        base = s[src]
        if c >= 0:
            factor = base ** c if fld.char == 0 else pow(base, c, fld.char)
        else:
            factor = fld.inv(base) ** (-c) if fld.char == 0 \
                else pow(fld.inv(base), -c, fld.char)
        s[dst] = fld.mul(s[dst], factor)

    cols = [[1 if i == j else 0 for j in range(nvars)] for i in range(nvars)]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in cols:
            r[i], r[j] = r[j], r[i]

    def add_col(dst, src, c):
        for r in a:
            r[dst] += c * r[src]
        for r in cols:
            r[dst] += c * r[src]

    def negate_col(i):
        for r in a:
            r[i] = -r[i]
        for r in cols:
            r[i] = -r[i]

    t = 0
    while True:
        pivot = None
        best = None
        for i in range(t, m):
            for j in range(t, nvars):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < best):
                    pivot, best = (i, j), abs(a[i][j])
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        while True:
            for i in range(t + 1, m):
                while a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    add_row(i, t, -q)
                    if a[i][t] != 0:
                        swap_rows(t, i)
            for j in range(t + 1, nvars):
                while a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    add_col(j, t, -q)
                    if a[t][j] != 0:
                        swap_cols(t, j)
            if all(a[i][t] == 0 for i in range(t + 1, m)):
                break
        if a[t][t] < 0:
            negate_col(t)
        t += 1

    # now (reduced a) = D with column transform `cols`; solve z_i^{d_i} = s_i
    z = [fld.one] * nvars
    for i in range(m):
        if i < t:
            root = fld.nth_root(s[i], a[i][i])
            if root is None:
                return None
            z[i] = root
        elif s[i] != fld.one:
            return None
    x = [fld.one] * nvars
    for j in range(nvars):
        val = fld.one
        for i in range(nvars):
            e = cols[j][i]
            if e == 0 or z[i] == fld.one:
                continue
            if e > 0:
                val = fld.mul(val, z[i] ** e if fld.char == 0
                              else pow(z[i], e, fld.char))
            else:
                inv = fld.inv(z[i])
                val = fld.mul(val, inv ** (-e) if fld.char == 0
                              else pow(inv, -e, fld.char))
        x[j] = val
    return x

"""Symmetric bilinear forms over a tower field and hermitian forms over
a quadratic extension with conjugation.

Forms are Gram matrices of exact field elements.  Diagonalization is
symmetric congruence elimination with the classical x -> x + y move for
zero pivots; signatures are Sylvester sign counts evaluated exactly at an
ordering.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    BaseTower,
    MismatchedTower,
    SingularForm,
    ZeroScale,
    ZeroSlot,
)
from .numfield import FieldElement, FieldTower, sign_at, trace_step


@dataclass(frozen=True)
class QuadForm:
    """Symmetric bilinear form: a tower field and a symmetric Gram matrix."""

    field: FieldTower
    gram: tuple

    def __post_init__(self):
        n = len(self.gram)
        for row in self.gram:
            if len(row) != n:
                raise ValueError("Gram matrix must be square")
        for i in range(n):
            for j in range(i):
                if self.gram[i][j] != self.gram[j][i]:
                    raise ValueError("Gram matrix must be symmetric")

    @property
    def dim(self):
        return len(self.gram)


def quad_form(field, rows):
    """Build a QuadForm, coercing ints/rationals to field elements."""
    gram = tuple(
        tuple(e if isinstance(e, FieldElement) else field.rational(e) for e in row)
        for row in rows
    )
    return QuadForm(field, gram)


def diagonal_quad(field, entries):
    entries = [
        e if isinstance(e, FieldElement) else field.rational(e) for e in entries
    ]
    n = len(entries)
    zero = field.zero()
    gram = tuple(
        tuple(entries[i] if i == j else zero for j in range(n)) for i in range(n)
    )
    return QuadForm(field, gram)


def diagonalize_sym(q):
    """Congruence-diagonalize: returns (entries, C) with C^t G C diagonal.

    Zero pivots are repaired by the first nonzero diagonal entry below
    (swap) or, failing that, by adding the row/column of the first nonzero
    off-diagonal entry.  Singular forms pass through with zero entries.
    """
    n = q.dim
    field = q.field
    g = [list(row) for row in q.gram]
    c = [[field.one() if i == j else field.zero() for j in range(n)] for i in range(n)]

    def col_op(dst, src, factor):
        # column dst += column src * factor, and symmetrically for rows
        for i in range(n):
            g[i][dst] = g[i][dst] + g[i][src] * factor
        for j in range(n):
            g[dst][j] = g[dst][j] + g[src][j] * factor
        for i in range(n):
            c[i][dst] = c[i][dst] + c[i][src] * factor

    def col_swap(a, b):
        for i in range(n):
            g[i][a], g[i][b] = g[i][b], g[i][a]
        for j in range(n):
            g[a][j], g[b][j] = g[b][j], g[a][j]
        for i in range(n):
            c[i][a], c[i][b] = c[i][b], c[i][a]

    for p in range(n):
        if g[p][p].is_zero():
            pivot = next((r for r in range(p + 1, n) if not g[r][r].is_zero()), None)
            if pivot is not None:
                col_swap(p, pivot)
            else:
                found = None
                for r in range(p, n):
                    for s in range(r + 1, n):
                        if not g[r][s].is_zero():
                            found = (r, s)
                            break
                    if found:
                        break
                if found is None:
                    break  # remaining block is zero
                r, s = found
                if r != p:
                    col_swap(p, r)
                    s = p if s == p else s
                col_op(p, s, field.one())
        piv = g[p][p]
        inv = piv.inv()
        for r in range(p + 1, n):
            if not g[p][r].is_zero():
                col_op(r, p, -(inv * g[p][r]))
    entries = [g[i][i] for i in range(n)]
    transform = tuple(tuple(row) for row in c)
    return entries, transform


def sylvester_signature(q, ordering):
    """(#positive - #negative) diagonal entries at the ordering."""
    entries, _ = diagonalize_sym(q)
    total = 0
    for e in entries:
        s = sign_at(e, ordering)
        if s == 0:
            raise SingularForm("form is singular")
        total += s
    return total


def perp(q1, q2):
    if q1.field != q2.field:
        raise MismatchedTower("forms live over different towers")
    n1, n2 = q1.dim, q2.dim
    zero = q1.field.zero()
    gram = []
    for i in range(n1):
        gram.append(tuple(q1.gram[i]) + (zero,) * n2)
    for i in range(n2):
        gram.append((zero,) * n1 + tuple(q2.gram[i]))
    return QuadForm(q1.field, tuple(gram))


def tensor(q1, q2):
    if q1.field != q2.field:
        raise MismatchedTower("forms live over different towers")
    n1, n2 = q1.dim, q2.dim
    gram = tuple(
        tuple(
            q1.gram[i1][j1] * q2.gram[i2][j2]
            for j1 in range(n1)
            for j2 in range(n2)
        )
        for i1 in range(n1)
        for i2 in range(n2)
    )
    return QuadForm(q1.field, gram)


def scale(factor, q):
    if not isinstance(factor, FieldElement):
        factor = q.field.rational(factor)
    if factor.is_zero():
        raise ZeroScale("scale factor must be nonzero")
    gram = tuple(tuple(e * factor for e in row) for row in q.gram)
    return QuadForm(q.field, gram)


def compose(op, *args):
    if op == "perp":
        return perp(*args)
    if op == "tensor":
        return tensor(*args)
    if op == "scale":
        return scale(*args)
    raise ValueError(f"unknown op {op!r}")


def pfister(field, slots):
    """<1,a_2> x ... x <1,a_r>: diagonal entries are subset products."""
    entries = [field.one()]
    for a in slots:
        if not isinstance(a, FieldElement):
            a = field.rational(a)
        if a.is_zero():
            raise ZeroSlot("Pfister slot must be nonzero")
        entries = entries + [e * a for e in entries]
    return diagonal_quad(field, entries)


def transfer_quad(q):
    """Scharlau transfer along the top step: Gram of Tr(b(x, y)).

    Basis {1, sqrt(a)} per slot, in that order; rank doubles.
    """
    field = q.field
    if field.depth == 0:
        raise BaseTower("form is already over the base tower")
    parent = field.parent
    a = field.radicands()[-1]
    top = field.gen(field.depth - 1)
    n = q.dim
    a_top = a.embed(field)
    gram = [[None] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            b = q.gram[i][j]
            t = trace_step(b * top)
            gram[2 * i][2 * j] = trace_step(b)
            gram[2 * i][2 * j + 1] = t
            gram[2 * i + 1][2 * j] = t
            gram[2 * i + 1][2 * j + 1] = trace_step(b * a_top)
    return QuadForm(parent, tuple(tuple(row) for row in gram))


# -- hermitian forms over (F(sqrt(d)), conjugation) --------------------------
#
# Entries are pairs (u, v) of base-field elements standing for u + v*s with
# s*s = d; conjugation negates v.  The extension never needs its own tower,
# so d may be totally negative.


def k_make(u, v):
    return (u, v)


def k_from_field(x):
    return (x, x.tower.zero())


def k_add(x, y):
    return (x[0] + y[0], x[1] + y[1])


def k_neg(x):
    return (-x[0], -x[1])


def k_mul(x, y, d):
    return (x[0] * y[0] + x[1] * y[1] * d, x[0] * y[1] + x[1] * y[0])


def k_conj(x):
    return (x[0], -x[1])


def k_is_zero(x):
    return x[0].is_zero() and x[1].is_zero()


def k_inv(x, d):
    norm = x[0] * x[0] - x[1] * x[1] * d
    if norm.is_zero():
        raise ZeroScale("element is not invertible")
    ninv = norm.inv()
    return (x[0] * ninv, -(x[1] * ninv))


@dataclass(frozen=True)
class HermKForm:
    """Hermitian form over (F(sqrt(d)), conjugation), Gram of K-pairs."""

    base: FieldTower
    d: FieldElement
    gram: tuple

    def __post_init__(self):
        n = len(self.gram)
        for row in self.gram:
            if len(row) != n:
                raise ValueError("Gram matrix must be square")
        for i in range(n):
            if not self.gram[i][i][1].is_zero():
                raise ValueError("diagonal entries must lie in the base field")
            for j in range(n):
                if self.gram[j][i] != k_conj(self.gram[i][j]):
                    raise ValueError("Gram matrix must be conjugate-symmetric")

    @property
    def dim(self):
        return len(self.gram)


def herm_k_form(base, d, rows):
    gram = tuple(tuple(entry for entry in row) for row in rows)
    return HermKForm(base, d, gram)


def herm_k_diagonal(base, d, entries):
    zero = k_from_field(base.zero())
    n = len(entries)
    gram = tuple(
        tuple(k_from_field(entries[i]) if i == j else zero for j in range(n))
        for i in range(n)
    )
    return HermKForm(base, d, gram)


def herm_k_perp(h1, h2):
    if h1.base != h2.base or h1.d != h2.d:
        raise MismatchedTower("forms live over different extensions")
    zero = k_from_field(h1.base.zero())
    n1, n2 = h1.dim, h2.dim
    gram = []
    for i in range(n1):
        gram.append(tuple(h1.gram[i]) + (zero,) * n2)
    for i in range(n2):
        gram.append((zero,) * n1 + tuple(h2.gram[i]))
    return HermKForm(h1.base, h1.d, tuple(gram))


def _herm_k_diagonalize(h):
    """Hermitian congruence over K: returns diagonal base-field entries.

    Same elimination as the symmetric case with conjugate column/row
    moves; a stuck zero pivot is repaired with weight 1 or sqrt(d).
    """
    n = h.dim
    base, d = h.base, h.d
    one = k_from_field(base.one())
    s_elt = k_make(base.zero(), base.one())
    g = [list(row) for row in h.gram]

    def col_op(dst, src, w):
        # column dst += column src * w; rows get the conjugate weight
        wc = k_conj(w)
        for i in range(n):
            g[i][dst] = k_add(g[i][dst], k_mul(g[i][src], w, d))
        for j in range(n):
            g[dst][j] = k_add(g[dst][j], k_mul(wc, g[src][j], d))

    def col_swap(a, b):
        for i in range(n):
            g[i][a], g[i][b] = g[i][b], g[i][a]
        for j in range(n):
            g[a][j], g[b][j] = g[b][j], g[a][j]

    for p in range(n):
        if k_is_zero(g[p][p]):
            pivot = next((r for r in range(p + 1, n) if not k_is_zero(g[r][r])), None)
            if pivot is not None:
                col_swap(p, pivot)
            else:
                found = None
                for r in range(p, n):
                    for s in range(r + 1, n):
                        if not k_is_zero(g[r][s]):
                            found = (r, s)
                            break
                    if found:
                        break
                if found is None:
                    break
                r, s = found
                if r != p:
                    col_swap(p, r)
                for w in (one, s_elt):
                    x = g[p][s]
                    probe = k_add(k_mul(x, w, d), k_conj(k_mul(x, w, d)))
                    if not k_is_zero(probe):
                        col_op(p, s, w)
                        break
        piv = g[p][p]
        if k_is_zero(piv):
            continue
        inv = k_inv(piv, d)
        for r in range(p + 1, n):
            if not k_is_zero(g[p][r]):
                col_op(r, p, k_neg(k_mul(inv, g[p][r], d)))
    return [g[i][i][0] for i in range(n)]


def herm_k_signature(h, ordering):
    """0 when d > 0 at the ordering, else the Jacobson sign count."""
    if sign_at(h.d, ordering) > 0:
        return 0
    entries = _herm_k_diagonalize(h)
    total = 0
    for e in entries:
        s = sign_at(e, ordering)
        if s == 0:
            raise SingularForm("form is singular")
        total += s
    return total

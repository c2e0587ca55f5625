"""Hermitian forms over (A, sigma): construction, sums and scalings,
adjoint involutions, Morita scaling/collapsing, diagonalization over the
division algebra, hyperbolic forms, and the Scharlau transfer.

A form on the free module A^k is stored at D-matrix granularity: its Gram
B is km x km over D and satisfies (I_k x Phi0) theta^t(B) (I_k x Phi0)^-1
= B.  Forms on non-free modules enter only through the collapsed-level
representation (collapsed_only), an epsilon0-hermitian Gram of arbitrary
size over (D, theta).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DivisionByZero,
    MismatchedAlgebra,
    MismatchedTower,
    NotAnExtension,
    NotHermitian,
    NotSemiSymmetric,
    NotSymmetricUnit,
    NotUnit,
    Singular,
    SingularMatrix,
    SingularUnit,
    SkewSymmetricOverField,
    ZeroScale,
)
from .algebra import (
    BASE_FIELD,
    QUADRATIC,
    AlgebraWithInvolution,
    DElement,
    DivisionData,
    MatrixInvolution,
    build_algebra,
    extend_scalars,
    involution_apply,
    _phi_blocks,
)
from .linalg import (
    m_add,
    m_block_diag,
    m_eye,
    m_inv,
    m_mul,
    m_scale_left,
    m_shape,
    theta_t,
)
from .numfield import FieldElement, trace_step


@dataclass(frozen=True)
class HermForm:
    """Hermitian form over (A, sigma) with Gram stored over D.

    collapsed_only marks forms given directly at the collapsed level
    (arbitrary size, theta^t(B) = epsilon0 B); these stand in for forms on
    non-free modules.
    """

    algebra: AlgebraWithInvolution
    gram: tuple
    collapsed_only: bool = False

    @property
    def size(self):
        return len(self.gram)

    @property
    def rank(self):
        """Module rank over A; None for collapsed-level forms."""
        if self.collapsed_only:
            return None
        return self.size // self.algebra.m


@dataclass(frozen=True)
class CollapsedForm:
    """epsilon-hermitian form over (D, theta): theta^t(gram) = epsilon gram."""

    division: DivisionData
    epsilon: int
    gram: tuple

    @property
    def size(self):
        return len(self.gram)


def _sigma_t(algebra, mat):
    rows, _ = m_shape(mat)
    k = rows // algebra.m
    phi, phi_inv = _phi_blocks(algebra, k)
    return m_mul(m_mul(phi, theta_t(mat)), phi_inv)


def build_form(algebra, gram, collapsed_only=False):
    """Validate the hermitian condition and nonsingularity."""
    gram = tuple(tuple(row) for row in gram)
    rows, cols = m_shape(gram)
    if rows != cols:
        raise NotHermitian("Gram matrix must be square")
    if collapsed_only:
        eps = algebra.division.from_field(algebra.epsilon0)
        if theta_t(gram) != m_scale_left(eps, gram):
            raise NotHermitian("theta^t(B) != epsilon0 B at the collapsed level")
    else:
        if rows % algebra.m:
            raise NotHermitian("Gram size must be a multiple of m")
        if _sigma_t(algebra, gram) != gram:
            raise NotHermitian("sigma^t(B) != B")
    try:
        m_inv(gram)
    except SingularMatrix as exc:
        raise Singular("form is singular") from exc
    return HermForm(algebra, gram, collapsed_only)


def diagonal_form(algebra, units):
    """<u_1, ..., u_n>_sigma for sigma-symmetric invertible units.

    Units are elements of A: m x m matrices over D, or bare DElements /
    field scalars when m = 1 blocks are intended.
    """
    blocks = []
    for u in units:
        u = _as_block(algebra, u)
        if involution_apply(algebra, u) != u:
            raise NotSymmetricUnit(f"unit is not sigma-symmetric")
        try:
            m_inv(u)
        except SingularMatrix as exc:
            raise SingularUnit("unit is not invertible") from exc
        blocks.append(u)
    zero = algebra.division.zero()
    n = len(blocks)
    m = algebra.m
    gram = []
    for bi, blk in enumerate(blocks):
        for r in range(m):
            row = []
            for bj in range(n):
                row.extend(blk[r] if bj == bi else (zero,) * m)
            gram.append(tuple(row))
    return build_form(algebra, gram)


def _as_block(algebra, u):
    if isinstance(u, DElement):
        if algebra.m != 1:
            raise MismatchedAlgebra("scalar unit needs m = 1")
        return ((u,),)
    if isinstance(u, (tuple, list)):
        return tuple(tuple(e) for e in u)
    # a field scalar acts as c * I_m
    c = algebra.division.from_field(u)
    return m_scale_left(c, m_eye(algebra.division.one(), algebra.m))


def hyperbolic(algebra, k=1):
    """Rank-2k form with Gram [[0, I],[I, 0]]; signature 0 everywhere."""
    n = algebra.m * k
    zero = algebra.division.zero()
    one = algebra.division.one()
    gram = []
    for i in range(2 * n):
        row = [zero] * (2 * n)
        row[(i + n) % (2 * n)] = one
        gram.append(tuple(row))
    return build_form(algebra, gram)


def perp(h1, h2):
    if h1.algebra != h2.algebra or h1.collapsed_only != h2.collapsed_only:
        raise MismatchedAlgebra("orthogonal sum needs a common algebra")
    zero = h1.algebra.division.zero()
    return HermForm(
        h1.algebra, m_block_diag(h1.gram, h2.gram, zero), h1.collapsed_only
    )


def scale_field(lam, h):
    """lambda * h for lambda in the base field."""
    if not isinstance(lam, FieldElement):
        lam = h.algebra.field.rational(lam)
    if lam.is_zero():
        raise ZeroScale("scale factor must be nonzero")
    factor = h.algebra.division.from_field(lam)
    return HermForm(
        h.algebra, m_scale_left(factor, h.gram), h.collapsed_only
    )


def tensor_quad(q, h):
    """q tensor h for a quadratic form q over the base field."""
    if q.field != h.algebra.field:
        raise MismatchedTower("q lives over a different tower")
    div = h.algebra.division
    n, size = q.dim, h.size
    gram = []
    for i in range(n):
        for r in range(size):
            row = []
            for j in range(n):
                c = div.from_field(q.gram[i][j])
                row.extend(c * e for e in h.gram[r])
            gram.append(tuple(row))
    return HermForm(h.algebra, tuple(gram), h.collapsed_only)


def compose_herm(op, *args):
    if op == "perp":
        return perp(*args)
    if op == "scale_field":
        return scale_field(*args)
    if op == "tensor_quad":
        return tensor_quad(*args)
    raise ValueError(f"unknown op {op!r}")


def scale_by_unit(form, u):
    """Morita scaling h -> u h.

    On a HermForm with sigma(u) = u this lands in Herm(A, Int(u) o sigma),
    returned over the rebuilt algebra with Phi0' = u Phi0.  On a
    CollapsedForm over a commutative D with theta(u) = +-u the sign of
    epsilon flips accordingly (the sqrt(d) scaling of the unitary case).
    """
    if isinstance(form, CollapsedForm):
        div = form.division
        if div.kind == QUADRATIC or div.kind == BASE_FIELD:
            if not isinstance(u, DElement):
                u = div.from_field(u)
            uc = u.conj()
            if uc == u:
                delta = 1
            elif uc == -u:
                delta = -1
            else:
                raise NotSemiSymmetric("theta(u) != +-u")
            try:
                u.inv()
            except DivisionByZero as exc:
                raise NotUnit("u is not invertible") from exc
            gram = m_scale_left(u, form.gram)
            return CollapsedForm(div, form.epsilon * delta, gram)
        raise NotSemiSymmetric(
            "collapsed-level scaling supports commutative D only; scale the "
            "rank-one HermForm instead"
        )
    if form.collapsed_only:
        return scale_by_unit(morita_collapse(form), u)
    algebra = form.algebra
    u = _as_block(algebra, u)
    su = involution_apply(algebra, u)
    if su == u:
        eps = 1
    elif su == m_scale_left(algebra.division.from_field(-1), u):
        eps = -1
    else:
        raise NotSemiSymmetric("sigma(u) != +-u")
    try:
        m_inv(u)
    except SingularMatrix as exc:
        raise NotUnit("u is not invertible") from exc
    if eps == -1:
        raise NotSemiSymmetric(
            "scaling a hermitian form by a sigma-skew unit leaves the "
            "hermitian category; only collapsed-level skew scalings are "
            "supported"
        )
    new_phi0 = m_mul(u, algebra.phi0)
    new_alg = build_algebra(
        algebra.field,
        algebra.division,
        algebra.m,
        new_phi0,
        eps * algebra.epsilon0,
        _allow_split=True,
    )
    k = form.size // algebra.m
    u_block = _block_repeat(u, k, algebra.division)
    return build_form(new_alg, m_mul(u_block, form.gram))


def _block_repeat(u, k, division):
    zero = division.zero()
    m = len(u)
    n = m * k
    out = [[zero] * n for _ in range(n)]
    for blk in range(k):
        off = blk * m
        for i in range(m):
            for j in range(m):
                out[off + i][off + j] = u[i][j]
    return tuple(map(tuple, out))


def morita_collapse(h):
    """Scale by (I x Phi0^{-1}) and reread the Gram over (D, theta)."""
    algebra = h.algebra
    if h.collapsed_only:
        return CollapsedForm(algebra.division, algebra.epsilon0, h.gram)
    k = h.size // algebra.m
    _, phi_inv = _phi_blocks(algebra, k)
    return CollapsedForm(
        algebra.division, algebra.epsilon0, m_mul(phi_inv, h.gram)
    )


def collapsed_gram(h):
    return morita_collapse(h).gram


def adjoint_involution(h):
    """ad_h : X -> C^{-1} theta^t(X) C with C the collapsed Gram.

    This equals B^{-1} sigma^t(X) B on M_k(A) and is consumable by
    trace_form.
    """
    c = collapsed_gram(h)
    try:
        c_inv = m_inv(c)
    except SingularMatrix as exc:
        raise Singular("form is singular") from exc
    algebra = h.algebra

    def apply(x):
        return m_mul(m_mul(c_inv, theta_t(x)), c)

    return MatrixInvolution(algebra.field, algebra.division, len(c), apply)


def diagonalize_collapsed(c):
    """Hermitian Gram-Schmidt over the division algebra.

    Returns (entries, transform) with theta^t(C) gram C equal to the
    diagonal of the entries; entries lie in Sym_epsilon(D, theta).  The
    excluded case (F, id, -1) raises SkewSymmetricOverField: such forms
    are hyperbolic and their signature is 0 by convention.
    """
    div = c.division
    if div.kind == BASE_FIELD and c.epsilon == -1:
        raise SkewSymmetricOverField(
            "skew-symmetric over a field; signature is 0"
        )
    n = c.size
    g = [list(row) for row in c.gram]
    one = div.one()
    trans = [[one if i == j else div.zero() for j in range(n)] for i in range(n)]

    def col_op(dst, src, w):
        wc = w.conj()
        for i in range(n):
            g[i][dst] = g[i][dst] + g[i][src] * w
        for jj in range(n):
            g[dst][jj] = g[dst][jj] + wc * g[src][jj]
        for i in range(n):
            trans[i][dst] = trans[i][dst] + trans[i][src] * w

    def col_swap(aa, bb):
        for i in range(n):
            g[i][aa], g[i][bb] = g[i][bb], g[i][aa]
        for jj in range(n):
            g[aa][jj], g[bb][jj] = g[bb][jj], g[aa][jj]
        for i in range(n):
            trans[i][aa], trans[i][bb] = trans[i][bb], trans[i][aa]

    skew_probe = _skew_unit(div)
    for p in range(n):
        if g[p][p].is_zero():
            pivot = next(
                (r for r in range(p + 1, n) if not g[r][r].is_zero()), None
            )
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
                    break
                r, s = found
                if r != p:
                    col_swap(p, r)
                x = g[p][s]
                done = False
                for w in (one, skew_probe):
                    if w is None:
                        continue
                    y = x * w
                    probe = y + (y.conj() if c.epsilon == 1 else -y.conj())
                    if not probe.is_zero():
                        col_op(p, s, w)
                        done = True
                        break
                if not done:
                    raise SkewSymmetricOverField(
                        "no symmetric pivot available"
                    )
        piv = g[p][p]
        if piv.is_zero():
            continue
        inv = piv.inv()
        for r in range(p + 1, n):
            if not g[p][r].is_zero():
                col_op(r, p, -(inv * g[p][r]))
    entries = [g[i][i] for i in range(n)]
    return entries, tuple(tuple(row) for row in trans)


def _skew_unit(div):
    if div.kind == BASE_FIELD:
        return None
    if div.kind == QUADRATIC:
        return div.element([0, 1])
    return div.element([0, 1, 0, 0])


def transfer_hermitian(h, target_algebra=None):
    """Transfer along the top tower step: post-compose with the trace.

    The Gram doubles per step; the new basis is {1, sqrt(a)} per A-slot so
    the m x m block structure is preserved.
    """
    algebra = h.algebra
    tower = algebra.field
    if tower.depth == 0:
        raise NotAnExtension("form already lives over the base tower")
    if h.collapsed_only:
        raise NotAnExtension("transfer needs a module-level form")
    if target_algebra is None:
        target_algebra = _project_algebra(algebra)
    elif extend_scalars(target_algebra, tower) != algebra:
        raise NotAnExtension("target algebra does not extend to the form's")
    div = target_algebra.division
    m = algebra.m
    k = h.size // m
    top = tower.gen(tower.depth - 1)
    a_top = tower.radicands()[-1].embed(tower)
    n = h.size

    def tr(e):
        return DElement(div, tuple(trace_step(cc) for cc in e.coords))

    gram = [[None] * (2 * n) for _ in range(2 * n)]
    for bi in range(k):
        for bj in range(k):
            for r in range(m):
                for s in range(m):
                    e = h.gram[bi * m + r][bj * m + s]
                    e_top = DElement(
                        e.division, tuple(cc * top for cc in e.coords)
                    )
                    e_a = DElement(
                        e.division, tuple(cc * a_top for cc in e.coords)
                    )
                    i0 = 2 * bi * m + r
                    i1 = (2 * bi + 1) * m + r
                    j0 = 2 * bj * m + s
                    j1 = (2 * bj + 1) * m + s
                    gram[i0][j0] = tr(e)
                    gram[i0][j1] = tr(e_top)
                    gram[i1][j0] = tr(e_top)
                    gram[i1][j1] = tr(e_a)
    return build_form(target_algebra, tuple(tuple(row) for row in gram))


def _project_algebra(algebra):
    """The same algebra data one tower level down."""
    tower = algebra.field
    parent = tower.parent
    div = algebra.division
    if div.kind == BASE_FIELD:
        new_div = DivisionData(parent, BASE_FIELD)
    elif div.kind == QUADRATIC:
        new_div = DivisionData(parent, QUADRATIC, d=div.d.project_down())
    else:
        from .algebra import _quaternion_status

        a = div.a.project_down()
        b = div.b.project_down()
        new_div = DivisionData(
            parent, div.kind, a=a, b=b, status=_quaternion_status(parent, a, b)
        )
    phi0 = tuple(
        tuple(
            DElement(new_div, tuple(c.project_down() for c in e.coords))
            for e in row
        )
        for row in algebra.phi0
    )
    return build_algebra(
        parent, new_div, algebra.m, phi0, algebra.epsilon0, _allow_split=True
    )


def extend_form(h, extended_algebra):
    """Reread an F-form over A tensor L by embedding its coordinates."""
    if h.collapsed_only:
        raise NotAnExtension("collapsed-level forms do not extend")
    div = extended_algebra.division
    gram = tuple(
        tuple(e.embed(div) for e in row) for row in h.gram
    )
    return build_form(extended_algebra, gram)

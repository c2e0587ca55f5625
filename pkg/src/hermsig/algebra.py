"""Algebras with involution (M_m(D), ad_phi0) for D a base field, a
quaternion algebra (a,b)_F, or a quadratic extension F(sqrt(d)).

The algebra is stored by its Wedderburn data: the division algebra kind
and parameters, the size m, the Gram matrix Phi0 of the epsilon0-hermitian
form defining the adjoint involution, and epsilon0 itself.  The standard
involution theta on D is the identity, quaternion conjugation, or
conjugation of the quadratic extension respectively, and

    sigma(X) = Phi0 theta^t(X) Phi0^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from ._rat import Rat
from .errors import (
    DimensionMismatch,
    DivisionByZero,
    InvalidRadicand,
    MismatchedTower,
    NotAnExtension,
    NotEpsilonHermitian,
    NotInvolution,
    SingularMatrix,
    SingularPhi0,
    SplitQuaternion,
    SquareD,
)
from .linalg import (
    m_add,
    m_inv,
    m_mul,
    m_scale_left,
    m_shape,
    rref,
    theta_t,
)
from .numfield import (
    FieldElement,
    FieldTower,
    orderings,
    sign_at,
    sqrt_in_field,
)
from .quadform import HermKForm, QuadForm

ORTHOGONAL = "orthogonal"
SYMPLECTIC = "symplectic"
UNITARY = "unitary"

BASE_FIELD = "field"
QUATERNION = "quaternion"
QUADRATIC = "quadratic"

DIVISION = "division"
DIVISION_UNVERIFIED = "division_unverified"
SPLIT = "split"


class DivisionData:
    """Division algebra parameters over a tower field.

    kind 'field' carries no parameters, 'quaternion' carries (a, b),
    'quadratic' carries d.  status records what the division check could
    certify for quaternions.
    """

    __slots__ = ("field", "kind", "a", "b", "d", "status", "_ab", "_hash")

    def __init__(self, field, kind, a=None, b=None, d=None, status=DIVISION):
        self.field = field
        self.kind = kind
        self.a = a
        self.b = b
        self.d = d
        self.status = status
        self._ab = a * b if kind == QUATERNION else None
        self._hash = None

    @property
    def ncoords(self):
        return {BASE_FIELD: 1, QUADRATIC: 2, QUATERNION: 4}[self.kind]

    @property
    def degree(self):
        """Degree of D over its centre (2 for quaternions, else 1)."""
        return 2 if self.kind == QUATERNION else 1

    def __eq__(self, other):
        if not isinstance(other, DivisionData):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.field == other.field
            and self.a == other.a
            and self.b == other.b
            and self.d == other.d
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.kind, self.field, self.a, self.b, self.d))
        return self._hash

    def __repr__(self):
        if self.kind == BASE_FIELD:
            return "DivisionData(field)"
        if self.kind == QUADRATIC:
            return f"DivisionData(quadratic d={self.d})"
        return f"DivisionData(quaternion a={self.a} b={self.b} [{self.status}])"

    # -- element constructors ------------------------------------------------

    def zero(self):
        z = self.field.zero()
        return DElement(self, (z,) * self.ncoords)

    def one(self):
        coords = [self.field.one()] + [self.field.zero()] * (self.ncoords - 1)
        return DElement(self, tuple(coords))

    def from_field(self, x):
        if not isinstance(x, FieldElement):
            x = self.field.rational(x)
        if x.tower != self.field:
            raise MismatchedTower("scalar lives in a different tower")
        coords = [x] + [self.field.zero()] * (self.ncoords - 1)
        return DElement(self, tuple(coords))

    def element(self, coords):
        coords = tuple(
            c if isinstance(c, FieldElement) else self.field.rational(c)
            for c in coords
        )
        if len(coords) != self.ncoords:
            raise ValueError("coordinate count mismatch")
        return DElement(self, coords)

    def basis(self):
        """Standard F-basis: [1], [1, s], or [1, i, j, k]."""
        out = []
        for t in range(self.ncoords):
            coords = [self.field.zero()] * self.ncoords
            coords[t] = self.field.one()
            out.append(DElement(self, tuple(coords)))
        return out


def base_division(field):
    return DivisionData(field, BASE_FIELD)


def quaternion_division(field, a, b, check=True):
    if not isinstance(a, FieldElement):
        a = field.rational(a)
    if not isinstance(b, FieldElement):
        b = field.rational(b)
    if a.is_zero() or b.is_zero():
        raise InvalidRadicand("quaternion parameters must be nonzero")
    status = _quaternion_status(field, a, b) if check else DIVISION_UNVERIFIED
    return DivisionData(field, QUATERNION, a=a, b=b, status=status)


def quadratic_division(field, d):
    if not isinstance(d, FieldElement):
        d = field.rational(d)
    if d.is_zero():
        raise SquareD("d must be nonzero")
    if sqrt_in_field(d) is not None:
        raise SquareD(f"{d} is a square, so F(sqrt(d)) is not a field")
    return DivisionData(field, QUADRATIC, d=d)


def _norm_search_candidates(field):
    small = (0, 1, -1, 2, -2, 3, -3, Rat(1, 2), Rat(-1, 2))
    cands = [field.rational(c) for c in small]
    depth = field.depth
    for mask in range(1, 1 << depth):
        mono = field.one()
        for i in range(depth):
            if mask >> i & 1:
                mono = mono * field.gen(i)
        for c in (1, -1, 2, -2):
            cands.append(mono * field.rational(c))
    return cands


def _quaternion_is_split(field, a, b):
    """Certified split test: square parameters or a bounded norm search."""
    ab = a * b
    for x in (a, b, -ab):
        if sqrt_in_field(x) is not None:
            return True
    cands = _norm_search_candidates(field)
    for x in cands:
        xx = x * x
        for y in cands:
            if (xx - a * (y * y) - b).is_zero():
                return True
            if (xx - b * (y * y) - a).is_zero():
                return True
    return False


def _quaternion_status(field, a, b):
    # Definite norm form at one ordering certifies division; otherwise a
    # bounded isotropy search either certifies split or leaves the algebra
    # accepted-but-unverified (full Hasse-Minkowski is out of scope).
    if field.formally_real:
        for p in orderings(field):
            if sign_at(a, p) < 0 and sign_at(b, p) < 0:
                return DIVISION
    if _quaternion_is_split(field, a, b):
        return SPLIT
    return DIVISION_UNVERIFIED


class DElement:
    """Element of a DivisionData, as coordinates over the standard basis."""

    __slots__ = ("division", "coords", "_hash")

    def __init__(self, division, coords):
        self.division = division
        self.coords = coords
        self._hash = None

    def is_zero(self):
        return all(c.is_zero() for c in self.coords)

    def zero_like(self):
        return self.division.zero()

    def one_like(self):
        return self.division.one()

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if not isinstance(other, DElement):
            return NotImplemented
        return self.coords == other.coords and self.division == other.division

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.coords, self.division))
        return self._hash

    def _coerce(self, other):
        if isinstance(other, DElement):
            if other.division != self.division:
                raise MismatchedTower("operands over different division data")
            return other
        if isinstance(other, (int, Rat, FieldElement)):
            return self.division.from_field(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return DElement(
            self.division,
            tuple(x + y for x, y in zip(self.coords, other.coords)),
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return DElement(
            self.division,
            tuple(x - y for x, y in zip(self.coords, other.coords)),
        )

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return DElement(self.division, tuple(-x for x in self.coords))

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        div = self.division
        if div.kind == BASE_FIELD:
            return DElement(div, (self.coords[0] * other.coords[0],))
        if div.kind == QUADRATIC:
            c0, c1 = self.coords
            e0, e1 = other.coords
            d = div.d
            return DElement(div, (c0 * e0 + c1 * e1 * d, c0 * e1 + c1 * e0))
        c0, c1, c2, c3 = self.coords
        e0, e1, e2, e3 = other.coords
        a, b, ab = div.a, div.b, div._ab
        return DElement(
            div,
            (
                c0 * e0 + a * (c1 * e1) + b * (c2 * e2) - ab * (c3 * e3),
                c0 * e1 + c1 * e0 - b * (c2 * e3) + b * (c3 * e2),
                c0 * e2 + c2 * e0 + a * (c1 * e3) - a * (c3 * e1),
                c0 * e3 + c3 * e0 + c1 * e2 - c2 * e1,
            ),
        )

    def __rmul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self

    def conj(self):
        """theta: identity, sqrt(d) negation, or quaternion conjugation."""
        div = self.division
        if div.kind == BASE_FIELD:
            return self
        return DElement(
            div, (self.coords[0],) + tuple(-c for c in self.coords[1:])
        )

    def norm(self):
        """x * conj(x), as a base-field element."""
        div = self.division
        if div.kind == BASE_FIELD:
            return self.coords[0] * self.coords[0]
        if div.kind == QUADRATIC:
            c0, c1 = self.coords
            return c0 * c0 - c1 * c1 * div.d
        c0, c1, c2, c3 = self.coords
        return (
            c0 * c0
            - div.a * (c1 * c1)
            - div.b * (c2 * c2)
            + div._ab * (c3 * c3)
        )

    def inv(self):
        div = self.division
        if div.kind == BASE_FIELD:
            if self.coords[0].is_zero():
                raise DivisionByZero("inverse of zero")
            return DElement(div, (self.coords[0].inv(),))
        n = self.norm()
        if n.is_zero():
            raise DivisionByZero("element has zero norm")
        ninv = n.inv()
        return DElement(
            div, tuple(c * ninv for c in self.conj().coords)
        )

    def trd(self):
        """Reduced trace contribution, valued in the base field.

        For the quadratic kind the reduced trace is K-valued; use the
        element itself instead.
        """
        div = self.division
        if div.kind == BASE_FIELD:
            return self.coords[0]
        if div.kind == QUATERNION:
            return 2 * self.coords[0]
        raise ValueError("reduced trace of a quadratic element is K-valued")

    def scalar_part(self):
        return self.coords[0]

    def is_scalar(self):
        return all(c.is_zero() for c in self.coords[1:])

    def embed(self, division):
        """Coordinatewise embedding into the same division data over an
        extension tower."""
        return DElement(division, tuple(c.embed(division.field) for c in self.coords))

    def __repr__(self):
        return f"DElement({self})"

    def __str__(self):
        units = {
            BASE_FIELD: ("",),
            QUADRATIC: ("", "s"),
            QUATERNION: ("", "i", "j", "k"),
        }[self.division.kind]
        parts = []
        for c, u in zip(self.coords, units):
            if c.is_zero():
                continue
            body = str(c)
            if u:
                if ("+" in body) or ("- " in body):
                    body = f"({body})*{u}"
                elif body.startswith("-"):
                    body = f"-{body[1:]}*{u}" if False else f"{body}*{u}"
                else:
                    body = f"{body}*{u}"
            parts.append(body)
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            if p.startswith("-"):
                out += f" - {p[1:]}"
            else:
                out += f" + {p}"
        return out


@dataclass(frozen=True)
class AlgebraWithInvolution:
    """(M_m(D), ad_phi0) with theta^t(Phi0) = epsilon0 Phi0."""

    field: FieldTower
    division: DivisionData
    m: int
    phi0: tuple
    epsilon0: int
    phi0_inv: tuple = dc_field(compare=False, repr=False, default=None)

    @property
    def kind(self):
        return UNITARY if self.division.kind == QUADRATIC else "first"

    def involution_type(self):
        return involution_type(self)

    def matrix_involution(self, k=1):
        """The involution on M_k(A) = M_{km}(D), as a black-box map."""
        return MatrixInvolution(
            self.field,
            self.division,
            self.m * k,
            lambda x: involution_apply(self, x),
        )

    def __repr__(self):
        return (
            f"AlgebraWithInvolution(m={self.m}, {self.division!r}, "
            f"epsilon0={self.epsilon0})"
        )


def build_algebra(field, division, m, phi0, epsilon0, _allow_split=False):
    """Validate and build (M_m(D), ad_phi0)."""
    if epsilon0 not in (1, -1):
        raise ValueError("epsilon0 must be +1 or -1")
    if division.field != field:
        raise MismatchedTower("division data over a different tower")
    if division.kind == QUATERNION and division.status == SPLIT and not _allow_split:
        raise SplitQuaternion(
            f"({division.a},{division.b}) is split; not a division algebra"
        )
    phi0 = tuple(tuple(row) for row in phi0)
    rows, cols = m_shape(phi0)
    if rows != m or cols != m:
        raise DimensionMismatch("phi0 must be m x m")
    expected = m_scale_left(division.from_field(epsilon0), phi0)
    if theta_t(phi0) != expected:
        raise NotEpsilonHermitian("theta^t(phi0) != epsilon0 * phi0")
    try:
        inv = m_inv(phi0)
    except SingularMatrix as exc:
        raise SingularPhi0("phi0 is singular") from exc
    return AlgebraWithInvolution(field, division, m, phi0, epsilon0, inv)


def involution_type(algebra):
    if algebra.division.kind == QUADRATIC:
        return UNITARY
    base_type = 1 if algebra.division.kind == BASE_FIELD else -1
    return ORTHOGONAL if algebra.epsilon0 * base_type == 1 else SYMPLECTIC


def _phi_blocks(algebra, k):
    """I_k tensor phi0 and its inverse, at D-matrix granularity."""
    zero = algebra.division.zero()
    n = algebra.m * k
    phi = [[zero] * n for _ in range(n)]
    phi_inv = [[zero] * n for _ in range(n)]
    for blk in range(k):
        off = blk * algebra.m
        for i in range(algebra.m):
            for j in range(algebra.m):
                phi[off + i][off + j] = algebra.phi0[i][j]
                phi_inv[off + i][off + j] = algebra.phi0_inv[i][j]
    return tuple(map(tuple, phi)), tuple(map(tuple, phi_inv))


def involution_apply(algebra, x):
    """sigma(X) = (I_k x Phi0) theta^t(X) (I_k x Phi0)^{-1}."""
    rows, cols = m_shape(x)
    if rows != cols or rows % algebra.m:
        raise DimensionMismatch("matrix size must be a multiple of m")
    k = rows // algebra.m
    phi, phi_inv = _phi_blocks(algebra, k)
    return m_mul(m_mul(phi, theta_t(x)), phi_inv)


def reduced_trace(algebra, x):
    """Trd of a square matrix over D; F-valued for the first kind,
    K-valued (a DElement of the quadratic division) for unitary."""
    rows, cols = m_shape(x)
    if rows != cols:
        raise DimensionMismatch("matrix must be square")
    div = algebra.division if isinstance(algebra, AlgebraWithInvolution) else algebra
    if div.kind == QUADRATIC:
        acc = div.zero()
        for i in range(rows):
            acc = acc + x[i][i]
        return acc
    acc = div.field.zero()
    for i in range(rows):
        acc = acc + x[i][i].trd()
    return acc


@dataclass(frozen=True)
class MatrixInvolution:
    """An involution on M_size(D) given as a black-box map."""

    field: FieldTower
    division: DivisionData
    size: int
    apply: object

    def __call__(self, x):
        return self.apply(x)


def _matrix_units_basis(division, size, with_d_basis):
    """Basis of M_size(D): matrix units, optionally times the D-basis."""
    zero = division.zero()
    dbasis = division.basis() if with_d_basis else [division.one()]
    out = []
    for r in range(size):
        for s in range(size):
            for d in dbasis:
                mat = [[zero] * size for _ in range(size)]
                mat[r][s] = d
                out.append(((r, s, d), tuple(map(tuple, mat))))
    return out


def trace_form(invol):
    """Gram of T(x, y) = Trd(invol(x) y) over the standard basis.

    First kind: a QuadForm over F on the basis (matrix units) x (D-basis).
    Second kind: a HermKForm over (F(sqrt(d)), conjugation) on the matrix
    units.  The supplied map is checked to be an involution on the basis.
    """
    if isinstance(invol, AlgebraWithInvolution):
        invol = invol.matrix_involution()
    div = invol.division
    size = invol.size
    unitary = div.kind == QUADRATIC
    basis = _matrix_units_basis(div, size, with_d_basis=not unitary)
    images = []
    for (_, mat) in basis:
        img = invol.apply(mat)
        images.append(img)
    for (_, mat), img in zip(basis, images):
        if invol.apply(img) != mat:
            raise NotInvolution("map does not square to the identity")
    n = len(basis)
    if unitary:
        gram = []
        for img in images:
            row = []
            for ((u, v, _), _mat) in basis:
                row.append(tuple(img[v][u].coords))
            gram.append(tuple(row))
        return HermKForm(div.field, div.d, tuple(gram))
    gram = []
    for img in images:
        row = []
        for ((u, v, d), _mat) in basis:
            row.append((img[v][u] * d).trd())
        gram.append(tuple(row))
    return QuadForm(div.field, tuple(gram))


def sym_basis(algebra, k=1):
    """An F-basis of the sigma-symmetric elements of M_k(A).

    Computed as the span of the symmetrizations (x + sigma(x))/2 of the
    standard basis, reduced over F; the dimension is asserted against the
    classical counts.
    """
    div = algebra.division
    size = algebra.m * k
    basis = _matrix_units_basis(div, size, with_d_basis=True)
    half = algebra.field.rational(Rat(1, 2))
    vectors = []
    for (_, mat) in basis:
        sym = m_scale_left(div.from_field(half), m_add(mat, involution_apply(algebra, mat)))
        vectors.append(_flatten(sym))
    reduced, _ = rref(
        vectors, zero_test=lambda e: e.is_zero(), inv=lambda e: e.inv()
    )
    mats = [_unflatten(vec, div, size) for vec in reduced]
    dim = len(mats)
    deg = size * div.degree
    itype = involution_type(algebra)
    if itype == ORTHOGONAL:
        expected = deg * (deg + 1) // 2
    elif itype == SYMPLECTIC:
        expected = deg * (deg - 1) // 2
    else:
        expected = size * size
    if dim != expected:
        raise NotInvolution(
            f"symmetric space has dimension {dim}, expected {expected}"
        )
    return mats


def _flatten(mat):
    out = []
    for row in mat:
        for e in row:
            out.extend(e.coords)
    return tuple(out)


def _unflatten(vec, division, size):
    nc = division.ncoords
    mat = []
    idx = 0
    for _ in range(size):
        row = []
        for _ in range(size):
            row.append(DElement(division, tuple(vec[idx: idx + nc])))
            idx += nc
        mat.append(tuple(row))
    return tuple(mat)


def extend_scalars(algebra, tower):
    """(A tensor L, sigma tensor id): same data reread over the extension.

    The quaternion may become split over L; the extended algebra is still
    accepted, with the division status re-certified and recorded.
    """
    if not tower.is_extension_of(algebra.field):
        raise NotAnExtension("target tower does not extend the base field")
    if tower == algebra.field:
        return algebra
    div = algebra.division
    if div.kind == BASE_FIELD:
        new_div = base_division(tower)
    elif div.kind == QUATERNION:
        a, b = div.a.embed(tower), div.b.embed(tower)
        new_div = DivisionData(
            tower, QUATERNION, a=a, b=b, status=_quaternion_status(tower, a, b)
        )
    else:
        d = div.d.embed(tower)
        if sqrt_in_field(d) is not None:
            raise SquareD(
                f"{div.d} becomes a square over the extension; the extended "
                "algebra is degenerate"
            )
        new_div = DivisionData(tower, QUADRATIC, d=d)
    phi0 = tuple(
        tuple(e.embed(new_div) for e in row) for row in algebra.phi0
    )
    return build_algebra(
        tower, new_div, algebra.m, phi0, algebra.epsilon0, _allow_split=True
    )


@dataclass(frozen=True)
class SplitQuaternionMap:
    """Explicit isomorphism of a quaternion algebra with M_2 over F(sqrt(r)).

    algebra is (M_2(F(sqrt(r))), X -> J X^t J^{-1}), the transported image
    of (D, conjugation); map_element realizes D inside M_2.
    """

    source: DivisionData
    tower: FieldTower
    algebra: AlgebraWithInvolution
    images: tuple  # images of 1, i, j, k

    def map_element(self, x):
        out = None
        for c, img in zip(x.coords, self.images):
            cl = c.embed(self.tower)
            term = m_scale_left(self.algebra.division.from_field(cl), img)
            out = term if out is None else m_add(out, term)
        return out

    def map_matrix(self, mat):
        """Entrywise 2x2 expansion of a matrix over D."""
        blocks = [[self.map_element(e) for e in row] for row in mat]
        n = len(mat)
        out = []
        for i in range(n):
            for bi in range(2):
                row = []
                for j in range(n):
                    row.extend(blocks[i][j][bi])
                out.append(tuple(row))
        return tuple(out)


def split_quaternion(source, r):
    """Split (a,b)_F along r in {'a','b'}: returns the explicit entry map.

    For r='a' the images are i -> diag(s,-s), j -> [[0,1],[b,0]] with
    s = sqrt(a); r='b' swaps the roles of i and j (and sends k to minus
    the mirrored image).  When r is already a square in F no extension is
    made and s is its square root in F.  Quaternion conjugation transports
    to X -> J X^t J^{-1} with J = [[0,1],[-1,0]].
    """
    if isinstance(source, AlgebraWithInvolution):
        source = source.division
    if source.kind != QUATERNION:
        raise InvalidRadicand("only quaternion algebras can be split")
    if r == "a":
        rad, other = source.a, source.b
    elif r == "b":
        rad, other = source.b, source.a
    else:
        raise InvalidRadicand("r must be 'a' or 'b'")
    field = source.field
    s_in_f = sqrt_in_field(rad)
    if s_in_f is not None:
        tower, s = field, s_in_f
    else:
        from .numfield import tower_extend

        tower = tower_extend(field, rad)
        s = tower.gen(tower.depth - 1)
    div = base_division(tower)
    zero, one = div.zero(), div.one()
    s_e = div.from_field(s)
    o_e = div.from_field(other.embed(tower))
    ident = ((one, zero), (zero, one))
    first = ((s_e, zero), (zero, -s_e))
    second = ((zero, one), (o_e, zero))
    if r == "a":
        img_i, img_j = first, second
    else:
        img_i, img_j = second, first
    img_k = m_mul(img_i, img_j)
    j_mat = ((zero, one), (-one, zero))
    target = build_algebra(tower, div, 2, j_mat, -1)
    split = SplitQuaternionMap(source, tower, target, (ident, img_i, img_j, img_k))
    _check_split_map(source, split)
    return split


def _check_split_map(source, split):
    gens = source.basis()
    for x in gens:
        for y in gens:
            if split.map_element(x * y) != m_mul(
                split.map_element(x), split.map_element(y)
            ):
                raise NotInvolution("split map is not multiplicative")
    j_mat = split.algebra.phi0
    j_inv = split.algebra.phi0_inv
    for x in gens:
        lhs = split.map_element(x.conj())
        rhs = m_mul(m_mul(j_mat, theta_t(split.map_element(x))), j_inv)
        if lhs != rhs:
            raise NotInvolution("split map does not transport conjugation")

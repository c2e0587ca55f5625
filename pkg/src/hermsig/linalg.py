"""Small exact linear algebra over division-algebra elements.

Matrices are tuples of tuples.  Elements only need +, -, *, conj, inv and
zero tests, so everything here works uniformly over the base field, a
quadratic extension, or a quaternion algebra.  Inversion is noncommutative
Gaussian elimination: rows are reduced by left multiplication, which is
exact over a division ring.
"""

from __future__ import annotations

from .errors import DivisionByZero, SingularMatrix


def m_shape(m):
    return len(m), len(m[0]) if m else 0


def m_mul(a, b):
    rows, inner = m_shape(a)
    inner2, cols = m_shape(b)
    if inner != inner2:
        raise ValueError("matrix shape mismatch")
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = None
            for k in range(inner):
                x = a[i][k]
                if x.is_zero():
                    continue
                y = b[k][j]
                if y.is_zero():
                    continue
                term = x * y
                acc = term if acc is None else acc + term
            row.append(acc if acc is not None else a[i][0].zero_like())
        out.append(tuple(row))
    return tuple(out)


def m_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def m_sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def m_neg(a):
    return tuple(tuple(-x for x in row) for row in a)


def m_scale_left(x, a):
    return tuple(tuple(x * e for e in row) for row in a)


def m_scale_right(a, x):
    return tuple(tuple(e * x for e in row) for row in a)


def m_map(f, a):
    return tuple(tuple(f(e) for e in row) for row in a)


def m_eq(a, b):
    return a == b


def m_is_zero(a):
    return all(e.is_zero() for row in a for e in row)


def theta_t(a):
    """Entrywise conjugation followed by transpose."""
    rows, cols = m_shape(a)
    return tuple(
        tuple(a[i][j].conj() for i in range(rows)) for j in range(cols)
    )


def m_eye(one, n):
    zero = one.zero_like()
    return tuple(
        tuple(one if i == j else zero for j in range(n)) for i in range(n)
    )


def m_zeros(zero, rows, cols):
    return tuple(tuple(zero for _ in range(cols)) for _ in range(rows))


def m_block_diag(a, b, zero):
    ra, ca = m_shape(a)
    rb, cb = m_shape(b)
    out = []
    for i in range(ra):
        out.append(tuple(a[i]) + (zero,) * cb)
    for i in range(rb):
        out.append((zero,) * ca + tuple(b[i]))
    return tuple(out)


def m_inv(a):
    """Inverse by left-division elimination; raises SingularMatrix."""
    n, cols = m_shape(a)
    if n != cols:
        raise ValueError("matrix must be square")
    one = None
    for row in a:
        for e in row:
            one = e.one_like()
            break
        if one is not None:
            break
    aug = [list(row) + list(erow) for row, erow in zip(a, m_eye(one, n))]
    for col in range(n):
        pivot = None
        for r in range(col, n):
            e = aug[r][col]
            if e.is_zero():
                continue
            try:
                e.inv()
            except DivisionByZero:
                continue
            pivot = r
            break
        if pivot is None:
            raise SingularMatrix("matrix is not invertible")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        factor = aug[col][col].inv()
        aug[col] = [factor * e for e in aug[col]]
        for r in range(n):
            if r == col:
                continue
            lead = aug[r][col]
            if lead.is_zero():
                continue
            aug[r] = [e - lead * p for e, p in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def rref(rows, zero_test, inv):
    """Reduced row echelon over a field; returns (reduced rows, pivot cols).

    Generic in the scalar type: zero_test(x) and inv(x) supply the field
    operations beyond + - *.
    """
    mat = [list(r) for r in rows]
    nrows = len(mat)
    ncols = len(mat[0]) if mat else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if not zero_test(mat[i][c])), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        factor = inv(mat[r][c])
        mat[r] = [factor * e for e in mat[r]]
        for i in range(nrows):
            if i != r and not zero_test(mat[i][c]):
                lead = mat[i][c]
                mat[i] = [e - lead * p for e, p in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return [tuple(row) for row in mat[:r]], pivots

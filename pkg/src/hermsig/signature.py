"""Signatures of hermitian forms over algebras with involution.

The pipeline computes the signed integer attached to a form at an ordering
by collapsing to the division level and reading the classical signature
there, with a fixed set of conventions resolving the sign ambiguity of the
Morita equivalence:

  * scaling always uses the stored Phi0;
  * a split quaternion splits along radicand a when a is positive at the
    ordering (b otherwise), lifting the ordering with the new root
    positive, and the transported form is scaled by I x J^{-1} with
    J = [[0,1],[-1,0]];
  * the unitary skew case is scaled by +sqrt(d).

Reference tuples then normalize the remaining global sign: the reported
value at an ordering is positive for the first reference form with
nonzero signature there.  An independent second route (trace forms of
adjoint involutions, which need no Morita data) cross-checks every
reported value unless explicitly disabled for bulk runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from math import isqrt

from .errors import (
    ExhaustedReferences,
    NonIntegerQuotient,
    NotAnExtension,
    NotPerfectSquare,
    NotSymmetricUnit,
    PoolExhausted,
    RouteDisagreement,
    SingularMatrix,
    SingularUnit,
)
from .algebra import (
    BASE_FIELD,
    ORTHOGONAL,
    QUADRATIC,
    QUATERNION,
    SYMPLECTIC,
    UNITARY,
    MatrixInvolution,
    extend_scalars,
    involution_type,
    split_quaternion,
    sym_basis,
    trace_form,
)
from .hermitian import (
    CollapsedForm,
    HermForm,
    adjoint_involution,
    build_form,
    collapsed_gram,
    diagonal_form,
    diagonalize_collapsed,
    extend_form,
    morita_collapse,
    perp,
    scale_by_unit,
    transfer_hermitian,
)
from .linalg import m_add, m_block_diag, m_eye, m_inv, m_mul, m_scale_left, theta_t
from .numfield import extensions_of, orderings, sign_at
from .quadform import HermKForm, QuadForm, sylvester_signature, herm_k_signature


@dataclass(frozen=True)
class SignatureReport:
    """Per-ordering outcome of a signature computation."""

    ordering_index: int
    signs: tuple
    nil: bool
    value: int
    lam: int
    ref_index: object = None

    def line(self):
        signs = ",".join("+" if s > 0 else "-" for s in self.signs)
        ref = "-" if self.ref_index is None else str(self.ref_index)
        nil = "true" if self.nil else "false"
        return (
            f"P#{self.ordering_index} signs=[{signs}] nil={nil} "
            f"lambda={self.lam} ref={ref} value={self.value}"
        )


def _ramified_at(division, ordering):
    return (
        sign_at(division.a, ordering) < 0 and sign_at(division.b, ordering) < 0
    )


def is_nil(algebra, ordering):
    """Orderings where every hermitian form over (A, sigma) has signature 0."""
    itype = involution_type(algebra)
    div = algebra.division
    if itype == ORTHOGONAL:
        return div.kind == QUATERNION and _ramified_at(div, ordering)
    if itype == SYMPLECTIC:
        if div.kind == BASE_FIELD:
            return True
        return not _ramified_at(div, ordering)
    return sign_at(div.d, ordering) > 0


def nil_orderings(algebra):
    return {p for p in orderings(algebra.field) if is_nil(algebra, p)}


def lambda_at(algebra, ordering):
    """2 in the ramified-quaternion symplectic case, else 1."""
    if (
        involution_type(algebra) == SYMPLECTIC
        and algebra.division.kind == QUATERNION
        and _ramified_at(algebra.division, ordering)
    ):
        return 2
    return 1


def involution_signature(invol, ordering):
    """sqrt of the trace-form signature; asserts perfect squareness."""
    form = trace_form(invol)
    if isinstance(form, HermKForm):
        value = herm_k_signature(form, ordering)
    else:
        value = sylvester_signature(form, ordering)
    if value < 0:
        raise NotPerfectSquare(f"trace form signature {value} is negative")
    root = isqrt(value)
    if root * root != value:
        raise NotPerfectSquare(
            f"trace form signature {value} is not a perfect square"
        )
    return root


def m_signature(h, ordering):
    """The canonical-pipeline signature of h at the ordering.

    Case dispatch over the division kind, the involution type, and the
    local behaviour of D at the ordering; total on valid input.
    """
    algebra = h.algebra
    if ordering.tower != algebra.field:
        raise NotAnExtension("ordering belongs to a different tower")
    div = algebra.division
    itype = involution_type(algebra)

    if div.kind == BASE_FIELD:
        if itype == SYMPLECTIC:
            return 0
        c = morita_collapse(h)
        q = QuadForm(
            algebra.field,
            tuple(tuple(e.scalar_part() for e in row) for row in c.gram),
        )
        return sylvester_signature(q, ordering)

    if div.kind == QUATERNION:
        ramified = _ramified_at(div, ordering)
        if itype == SYMPLECTIC:
            if not ramified:
                return 0
            c = morita_collapse(h)
            entries, _ = diagonalize_collapsed(c)
            return sum(
                sign_at(e.scalar_part(), ordering) for e in entries
            )
        if ramified:
            return 0  # torsion: skew-hermitian over ramified quaternions
        return _split_case_signature(h, ordering)

    # unitary
    c = morita_collapse(h)
    if c.epsilon == -1:
        c = scale_by_unit(c, div.element([0, 1]))
    gram = tuple(
        tuple((e.coords[0], e.coords[1]) for e in row) for row in c.gram
    )
    kform = HermKForm(algebra.field, div.d, gram)
    return herm_k_signature(kform, ordering)


def _split_case_signature(h, ordering):
    """Orthogonal form, quaternion split at the ordering.

    Split along the first radicand positive at the ordering (a preferred),
    lift the ordering with the new square root positive, transport the
    collapsed Gram, scale by I x J^{-1}, and take Sylvester.
    """
    algebra = h.algebra
    div = algebra.division
    choice = "a" if sign_at(div.a, ordering) > 0 else "b"
    split = split_quaternion(div, choice)
    if split.tower == algebra.field:
        lifted = ordering
    else:
        lifted = next(
            q
            for q in extensions_of(ordering, split.tower)
            if q.root_signs[-1] > 0
        )
    c = morita_collapse(h)
    mapped = split.map_matrix(c.gram)
    n = c.size
    j_inv = split.algebra.phi0_inv
    zero = split.algebra.division.zero()
    scaled = [[zero] * (2 * n) for _ in range(2 * n)]
    for bi in range(n):
        for r in range(2):
            for bj in range(n):
                for s in range(2):
                    acc = zero
                    for t in range(2):
                        x = j_inv[r][t]
                        y = mapped[2 * bi + t][2 * bj + s]
                        if not (x.is_zero() or y.is_zero()):
                            acc = acc + x * y
                    scaled[2 * bi + r][2 * bj + s] = acc
    q = QuadForm(
        split.tower,
        tuple(tuple(e.scalar_part() for e in row) for row in scaled),
    )
    return sylvester_signature(q, lifted)


def _abs_from_collapsed(algebra, cgram, ordering):
    """|signature| recovered from the adjoint trace form alone."""
    try:
        c_inv = m_inv(cgram)
    except SingularMatrix as exc:
        raise NonIntegerQuotient("collapsed Gram is singular") from exc

    invol = MatrixInvolution(
        algebra.field,
        algebra.division,
        len(cgram),
        lambda x: m_mul(m_mul(c_inv, theta_t(x)), cgram),
    )
    sig = involution_signature(invol, ordering)
    lam = lambda_at(algebra, ordering)
    if sig % lam:
        raise NonIntegerQuotient(
            f"adjoint signature {sig} is not divisible by lambda={lam}"
        )
    return sig // lam


def abs_signature(h, ordering):
    """involution_signature(ad_h) / lambda_P: the unsigned signature."""
    return _abs_from_collapsed(h.algebra, collapsed_gram(h), ordering)


class ReferenceTuple:
    """Ordered tuple of hermitian forms fixing the sign convention.

    At construction (unless validate=False for internal scalar-extended
    tuples) every non-nil ordering must see at least one member with
    nonzero signature, checked through the trace-form route.
    """

    def __init__(self, algebra, forms, validate=True):
        self.algebra = algebra
        self.forms = tuple(forms)
        self._cache = {}
        for f in self.forms:
            if f.algebra != algebra:
                raise NotAnExtension("reference form over a different algebra")
        if validate:
            for p in orderings(algebra.field):
                if is_nil(algebra, p):
                    continue
                if all(abs_signature(f, p) == 0 for f in self.forms):
                    raise ExhaustedReferences(
                        f"no reference form has nonzero signature at {p}"
                    )

    def __len__(self):
        return len(self.forms)

    def delta_at(self, ordering):
        """(least usable index, its sign, its |signature|) at the ordering."""
        hit = self._cache.get(ordering)
        if hit is not None:
            return hit
        for idx, f in enumerate(self.forms):
            v = m_signature(f, ordering)
            if v != 0:
                out = (idx, 1 if v > 0 else -1, abs(v))
                self._cache[ordering] = out
                return out
        raise ExhaustedReferences(
            "every reference form has signature 0 at a non-nil ordering"
        )

    def extend(self, extended_algebra):
        return ReferenceTuple(
            extended_algebra,
            [extend_form(f, extended_algebra) for f in self.forms],
            validate=False,
        )


def h_signature(h, reference, ordering, verify=True):
    """Signature normalized by the reference tuple, as a SignatureReport.

    With verify on, a second route (magnitudes from adjoint trace forms,
    relative sign from the orthogonal sum with the reference form) must
    agree or RouteDisagreement is raised.
    """
    algebra = h.algebra
    all_p = orderings(algebra.field)
    idx = all_p.index(ordering)
    lam = lambda_at(algebra, ordering)
    if is_nil(algebra, ordering):
        return SignatureReport(idx, ordering.root_signs, True, 0, lam, None)
    ref_idx, delta, ref_abs = reference.delta_at(ordering)
    value = delta * m_signature(h, ordering)
    if verify:
        _verify_routes(h, reference.forms[ref_idx], ref_abs, value, ordering)
    return SignatureReport(
        idx, ordering.root_signs, False, value, lam, ref_idx
    )


def _verify_routes(h, ref_form, ref_abs, value, ordering):
    a = abs_signature(h, ordering)
    if a != abs(value):
        raise RouteDisagreement(
            f"pipeline |{value}| != trace-form magnitude {a}"
        )
    if value == 0:
        return
    # Relative sign from |x|, |y|, |x + y|: the sums are distinguishable
    # because both magnitudes are nonzero.
    combined = _perp_collapsed(h, ref_form)
    s = _abs_from_collapsed(h.algebra, combined, ordering)
    if s == a + ref_abs:
        expected = a
    elif s == abs(a - ref_abs):
        expected = -a
    else:
        raise RouteDisagreement(
            f"perp magnitude {s} matches neither {a + ref_abs} nor "
            f"{abs(a - ref_abs)}"
        )
    if value != expected:
        raise RouteDisagreement(
            f"pipeline value {value} != relative-sign route {expected}"
        )


def _perp_collapsed(h, ref_form):
    """Collapsed Gram of h perp ref, tolerating collapsed-only operands."""
    if h.collapsed_only == ref_form.collapsed_only and not h.collapsed_only:
        return collapsed_gram(perp(h, ref_form))
    g1 = collapsed_gram(h)
    g2 = collapsed_gram(ref_form)
    zero = h.algebra.division.zero()
    return m_block_diag(g1, g2, zero)


def total_h_signature(h, reference, verify=True):
    """One report per ordering of the base field; never partial."""
    return {
        p: h_signature(h, reference, p, verify=verify)
        for p in orderings(h.algebra.field)
    }


def total_m_signature(h):
    return {p: m_signature(h, p) for p in orderings(h.algebra.field)}


DEFAULT_POOL_BUDGET = 20000


def find_reference_tuple(algebra, pool_budget=DEFAULT_POOL_BUDGET):
    """Greedy cover by rank-one diagonal forms.

    Candidates are <1>_sigma first, then integer combinations of the
    symmetric basis with coefficients of growing height, enumerated by
    support size then lexicographically.  A candidate is kept when it has
    nonzero signature at uncovered orderings; it is negated first if its
    new values are all negative, so the first usable member at every
    ordering reports positively.  Mixed-sign candidates are skipped.
    """
    non_nil = [
        p for p in orderings(algebra.field) if not is_nil(algebra, p)
    ]
    if not non_nil:
        return ReferenceTuple(algebra, [], validate=False)
    basis = sym_basis(algebra, 1)
    members = []
    covered = set()
    drawn = 0
    for unit in _candidate_units(algebra, basis):
        if drawn >= pool_budget:
            raise PoolExhausted(
                f"budget {pool_budget} exhausted with "
                f"{len(non_nil) - len(covered)} orderings uncovered",
                uncovered=[p for p in non_nil if p not in covered],
            )
        drawn += 1
        try:
            form = diagonal_form(algebra, [unit])
        except (SingularUnit, NotSymmetricUnit):
            continue
        new = {}
        for p in non_nil:
            if p in covered:
                continue
            v = m_signature(form, p)
            if v != 0:
                new[p] = v
        first = drawn == 1
        if not new:
            if first:
                members.append(form)  # <1> stays the leading member
            continue
        if all(v < 0 for v in new.values()):
            form = diagonal_form(
                algebra,
                [m_scale_left(algebra.division.from_field(-1), unit)],
            )
        elif any(v < 0 for v in new.values()):
            continue  # mixed signs would break first-member positivity
        members.append(form)
        covered.update(new)
        if len(covered) == len(non_nil):
            return ReferenceTuple(algebra, members)
    raise PoolExhausted(
        f"candidate pool exhausted with {len(non_nil) - len(covered)} "
        "orderings uncovered",
        uncovered=[p for p in non_nil if p not in covered],
    )


def _candidate_units(algebra, basis):
    """<1> first, then coefficient patterns over the symmetric basis."""
    yield m_eye(algebra.division.one(), algebra.m)
    dim = len(basis)
    height = 1
    seen_heights = set()
    while True:
        coeff_range = [c for c in range(-height, height + 1) if c != 0]
        for support in range(1, dim + 1):
            for positions in combinations(range(dim), support):
                for coeffs in product(coeff_range, repeat=support):
                    if max(abs(c) for c in coeffs) != height:
                        continue  # emitted at a smaller height already
                    acc = None
                    for pos, c in zip(positions, coeffs):
                        term = m_scale_left(
                            algebra.division.from_field(c), basis[pos]
                        )
                        acc = term if acc is None else m_add(acc, term)
                    yield acc
        height += 1
        if height > 8:  # far beyond any budget in practice
            return


@dataclass(frozen=True)
class TraceFormulaCheck:
    """Both sides of the trace formula at one base ordering."""

    lhs: int
    rhs: int
    extensions: tuple
    contributions: tuple

    @property
    def ok(self):
        return self.lhs == self.rhs


def verify_trace_formula(h, reference, ordering, verify=False):
    """Transfer h down to the reference algebra and compare signatures.

    lhs is the signature of the (possibly iterated) transfer at the base
    ordering; rhs sums the signatures of h at the orderings of L extending
    it, computed against the scalar-extended reference tuple.  Equality is
    reported, not asserted.
    """
    base = reference.algebra
    tower = h.algebra.field
    if not tower.is_extension_of(base.field) or tower == base.field:
        raise NotAnExtension("form must live over a proper extension")
    transferred = h
    while transferred.algebra.field != base.field:
        target = (
            base
            if transferred.algebra.field.parent == base.field
            else None
        )
        transferred = transfer_hermitian(transferred, target)
    lhs = h_signature(transferred, reference, ordering, verify=verify).value
    ext_reference = reference.extend(h.algebra)
    exts = tuple(extensions_of(ordering, tower))
    contributions = tuple(
        h_signature(h, ext_reference, q, verify=verify).value for q in exts
    )
    return TraceFormulaCheck(lhs, sum(contributions), exts, contributions)

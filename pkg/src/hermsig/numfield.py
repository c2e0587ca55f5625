"""Towers of real square-root extensions of Q with exact arithmetic.

A tower is Q = F_0 < F_1 < ... < F_n where F_i = F_{i-1}(sqrt(a_i)) and
each radicand a_i is an element of F_{i-1} that is not a square there.
Elements are coefficient vectors of length 2**n over the basis of
square-free products of the adjoined roots, indexed by bitmask (bit i set
means generator r_{i+1} divides the basis monomial).

An Ordering is a real embedding of the tower, encoded as one sign choice
per adjoined root together with rational isolating intervals.  Signs of
elements at an ordering are decided exactly: interval evaluation with
dyadic refinement, with the symbolic zero test as the base case.  No
tolerances appear anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ._rat import RAT_ONE, RAT_ZERO, Rat, rat_sign, rat_sqrt, sqrt_bounds
from .errors import (
    BaseTower,
    DivisionByZero,
    MismatchedTower,
    NoOrderings,
    NotPositiveAnywhere,
    SquareRadicand,
    ZeroRadicand,
)

_START_BITS = 16


class FieldTower:
    """A (chain of) square-root extension(s) of Q.

    Immutable; compared structurally so that towers built independently
    from the same radicands are interchangeable.
    """

    __slots__ = (
        "parent",
        "radicand",
        "depth",
        "formally_real",
        "_hash",
        "_chain",
        "_flat_weights",
        "_interval_cache",
        "_orderings",
    )

    def __init__(self, parent=None, radicand=None, formally_real=True):
        self.parent = parent
        self.radicand = radicand
        self.depth = 0 if parent is None else parent.depth + 1
        self.formally_real = formally_real if parent is None or parent.formally_real else False
        self._hash = None
        self._chain = None
        self._flat_weights = None
        self._interval_cache = {}
        self._orderings = None

    # -- identity ----------------------------------------------------------

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FieldTower):
            return NotImplemented
        if self.depth != other.depth or self.formally_real != other.formally_real:
            return False
        a, b = self, other
        while a.depth > 0:
            if a.radicand.coeffs != b.radicand.coeffs:
                return False
            a, b = a.parent, b.parent
        return True

    def __hash__(self):
        if self._hash is None:
            parts = []
            t = self
            while t.depth > 0:
                parts.append(t.radicand.coeffs)
                t = t.parent
            self._hash = hash((self.depth, self.formally_real, tuple(parts)))
        return self._hash

    def __repr__(self):
        if self.depth == 0:
            return "FieldTower(Q)"
        rads = ", ".join(str(r) for r in self.radicands())
        return f"FieldTower(Q; {rads})"

    # -- structure ---------------------------------------------------------

    def chain(self):
        """Subtowers from Q up to self, inclusive."""
        if self._chain is None:
            towers = []
            t = self
            while t is not None:
                towers.append(t)
                t = t.parent
            self._chain = tuple(reversed(towers))
        return self._chain

    def subtower(self, depth):
        return self.chain()[depth]

    def radicands(self):
        """radicands()[i] is an element of subtower(i)."""
        return tuple(t.radicand for t in self.chain()[1:])

    def generator_names(self):
        return tuple(f"r{i + 1}" for i in range(self.depth))

    def is_extension_of(self, other):
        if self.depth < other.depth:
            return False
        return self.subtower(other.depth) == other

    # -- element constructors ----------------------------------------------

    def rational(self, p, q=1):
        coeffs = [RAT_ZERO] * (1 << self.depth)
        coeffs[0] = Rat(p, q)
        return FieldElement(self, tuple(coeffs))

    def zero(self):
        return self.rational(0)

    def one(self):
        return self.rational(1)

    def gen(self, i):
        """Generator r_{i+1}, the square root adjoined at level i."""
        if not 0 <= i < self.depth:
            raise IndexError(f"tower has no generator index {i}")
        coeffs = [RAT_ZERO] * (1 << self.depth)
        coeffs[1 << i] = RAT_ONE
        return FieldElement(self, tuple(coeffs))

    def element(self, coeffs):
        coeffs = tuple(Rat(c) for c in coeffs)
        if len(coeffs) != 1 << self.depth:
            raise ValueError("coefficient vector length mismatch")
        return FieldElement(self, coeffs)

    # -- fast multiplication table -----------------------------------------

    def flat_weights(self):
        """Basis-product weights when every radicand is rational, else None.

        weights[m] = prod of radicands over the bits of m; multiplication
        is then the XOR convolution c[i^j] += x[i]*y[j]*weights[i&j].
        """
        if self._flat_weights is None:
            rats = []
            for r in self.radicands():
                if any(r.coeffs[1:]):
                    self._flat_weights = False
                    return None
                rats.append(r.coeffs[0])
            w = [RAT_ONE] * (1 << self.depth)
            for m in range(1, 1 << self.depth):
                low = m & (-m)
                w[m] = w[m ^ low] * rats[low.bit_length() - 1]
            self._flat_weights = tuple(w)
        return self._flat_weights or None


QQ = FieldTower()


class FieldElement:
    """Element of a FieldTower, stored as its coefficient vector."""

    __slots__ = ("tower", "coeffs", "_hash")

    def __init__(self, tower, coeffs):
        self.tower = tower
        self.coeffs = coeffs
        self._hash = None

    def is_zero(self):
        return not any(self.coeffs)

    def is_rational(self):
        return not any(self.coeffs[1:])

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.coeffs == other.coeffs and self.tower == other.tower

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.coeffs, self.tower))
        return self._hash

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.tower != self.tower:
                raise MismatchedTower("operands live in different towers")
            return other
        if isinstance(other, (int, Rat)):
            return self.tower.rational(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return FieldElement(
            self.tower, tuple(a + b for a, b in zip(self.coeffs, other.coeffs))
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return FieldElement(
            self.tower, tuple(a - b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return FieldElement(self.tower, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return FieldElement(
            self.tower, _mul(self.tower, self.coeffs, other.coeffs)
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self.inv()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inv() ** (-n)
        out = self.tower.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inv(self):
        if self.is_zero():
            raise DivisionByZero("inverse of zero")
        return FieldElement(self.tower, _inv(self.tower, self.coeffs))

    def rational_value(self):
        if any(self.coeffs[1:]):
            raise ValueError("element is not rational")
        return self.coeffs[0]

    def embed(self, target):
        """Image under the inclusion of this element's tower into target."""
        if not target.is_extension_of(self.tower):
            raise MismatchedTower("target is not an extension of the owner tower")
        coeffs = [RAT_ZERO] * (1 << target.depth)
        coeffs[: len(self.coeffs)] = self.coeffs
        return FieldElement(target, tuple(coeffs))

    def project_down(self):
        """Reinterpret in the parent tower; requires top coefficients zero."""
        tower = self.tower
        if tower.depth == 0:
            raise BaseTower("already at the base tower")
        half = len(self.coeffs) // 2
        if any(self.coeffs[half:]):
            raise ValueError("element involves the top generator")
        return FieldElement(tower.parent, self.coeffs[:half])

    def __repr__(self):
        return f"FieldElement({self})"

    def __str__(self):
        names = self.tower.generator_names()
        parts = []
        for mask, c in enumerate(self.coeffs):
            if not c:
                continue
            gens = [names[i] for i in range(self.tower.depth) if mask >> i & 1]
            if gens:
                parts.append((c, "*".join(gens)))
            else:
                parts.append((c, ""))
        if not parts:
            return "0"
        out = []
        for idx, (c, gens) in enumerate(parts):
            body = f"{abs(c)}*{gens}" if gens else f"{abs(c)}"
            if idx == 0:
                out.append(body if c > 0 else f"-{body}")
            else:
                out.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(out)


# -- coefficient-vector arithmetic ------------------------------------------


def _mul(tower, x, y):
    w = tower.flat_weights()
    if w is not None:
        out = [RAT_ZERO] * len(x)
        for i, xi in enumerate(x):
            if not xi:
                continue
            for j, yj in enumerate(y):
                if not yj:
                    continue
                out[i ^ j] += xi * yj * w[i & j]
        return tuple(out)
    return _mul_rec(tower, x, y)


def _mul_rec(tower, x, y):
    if tower.depth == 0:
        return (x[0] * y[0],)
    half = len(x) // 2
    parent = tower.parent
    u1, v1 = x[:half], x[half:]
    u2, v2 = y[:half], y[half:]
    a = tower.radicand.coeffs
    uu = _mul(parent, u1, u2)
    vv = _mul(parent, v1, v2)
    vva = _mul(parent, vv, a)
    uv = tuple(
        p + q
        for p, q in zip(_mul(parent, u1, v2), _mul(parent, v1, u2))
    )
    return tuple(p + q for p, q in zip(uu, vva)) + uv


def _inv(tower, x):
    # (u + v*r)^-1 = (u - v*r) / (u^2 - a v^2); the denominator is the
    # relative norm, nonzero for x != 0 because the radicand is not a square.
    if tower.depth == 0:
        return (1 / x[0],)
    half = len(x) // 2
    parent = tower.parent
    u, v = x[:half], x[half:]
    a = tower.radicand.coeffs
    norm = tuple(
        p - q
        for p, q in zip(_mul(parent, u, u), _mul(parent, _mul(parent, v, v), a))
    )
    ninv = _inv(parent, norm)
    return _mul(parent, u, ninv) + tuple(-c for c in _mul(parent, v, ninv))


# -- square detection ---------------------------------------------------------


def sqrt_in_field(x):
    """A square root of x in its own tower, or None if x is not a square."""
    coeffs = _sqrt_vec(x.tower, x.coeffs)
    if coeffs is None:
        return None
    return FieldElement(x.tower, coeffs)


def _sqrt_vec(tower, c):
    if tower.depth == 0:
        r = rat_sqrt(c[0])
        return None if r is None else (r,)
    half = len(c) // 2
    parent = tower.parent
    c0, c1 = c[:half], c[half:]
    a = tower.radicand.coeffs
    if not any(c1):
        # x = u^2 needs u in the parent, or x = a*v^2 with v in the parent.
        u = _sqrt_vec(parent, c0)
        if u is not None:
            return u + (RAT_ZERO,) * half
        v = _sqrt_vec(parent, _mul(parent, c0, _inv(parent, a)))
        if v is not None:
            return (RAT_ZERO,) * half + v
        return None
    # (u + v*r)^2 = c forces u^2 = (c0 +- w)/2 with w^2 = c0^2 - a*c1^2.
    disc = tuple(
        p - q
        for p, q in zip(
            _mul(parent, c0, c0), _mul(parent, a, _mul(parent, c1, c1))
        )
    )
    w = _sqrt_vec(parent, disc)
    if w is None:
        return None
    for s in (w, tuple(-t for t in w)):
        t = tuple((p + q) / 2 for p, q in zip(c0, s))
        if not any(t):
            continue
        u = _sqrt_vec(parent, t)
        if u is None or not any(u):
            continue
        v = _mul(parent, c1, _inv(parent, tuple(2 * q for q in u)))
        cand = u + v
        if _mul(tower, cand, cand) == tuple(c):
            return cand
    return None


# -- orderings ---------------------------------------------------------------


@dataclass(frozen=True)
class Ordering:
    """A real embedding of a tower: one sign per adjoined square root.

    The isolating intervals certify consistency at construction precision;
    sign tests refine working copies as needed and never mutate them.
    """

    tower: FieldTower
    root_signs: tuple
    isolating_intervals: tuple = field(compare=False, hash=False, default=())

    def __repr__(self):
        signs = ",".join("+" if s > 0 else "-" for s in self.root_signs)
        return f"Ordering({signs})"

    def extends(self, other):
        """True when this ordering restricts to `other` on the subtower."""
        return (
            self.tower.is_extension_of(other.tower)
            and self.root_signs[: len(other.root_signs)] == other.root_signs
        )

    def restrict(self, subtower):
        if not self.tower.is_extension_of(subtower):
            raise MismatchedTower("not a subtower")
        return Ordering(
            subtower,
            self.root_signs[: subtower.depth],
            _generator_intervals(subtower, self.root_signs[: subtower.depth], _START_BITS),
        )


def _interval_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _interval_mul(a, b):
    p = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return (min(p), max(p))


def _interval_scale(a, c):
    if c >= 0:
        return (a[0] * c, a[1] * c)
    return (a[1] * c, a[0] * c)


def _generator_intervals(tower, signs, bits):
    """Per-level isolating intervals at the given dyadic precision."""
    cache = tower._interval_cache
    key = (signs, bits)
    hit = cache.get(key)
    if hit is not None:
        return hit
    intervals = []
    for level, rad in enumerate(tower.radicands()):
        sub = tower.subtower(level)
        inner = bits
        lower = tuple(intervals)
        while True:
            lo, hi = _interval_eval_coeffs(sub, rad.coeffs, lower)
            if lo > 0:
                break
            if hi < 0:
                raise NoOrderings(
                    f"inconsistent sign assignment {signs} at level {level}"
                )
            inner *= 2
            lower = _generator_intervals(sub, signs[:level], inner)
        slo, _ = sqrt_bounds(lo, bits)
        _, shi = sqrt_bounds(hi, bits)
        if signs[level] > 0:
            intervals.append((slo, shi))
        else:
            intervals.append((-shi, -slo))
    result = tuple(intervals)
    if len(cache) > 64:
        cache.clear()
    cache[key] = result
    return result


def _interval_eval_coeffs(tower, coeffs, gen_intervals):
    if tower.depth == 0:
        return (coeffs[0], coeffs[0])
    prods = [None] * len(coeffs)
    prods[0] = (RAT_ONE, RAT_ONE)
    total = (RAT_ZERO, RAT_ZERO)
    for mask, c in enumerate(coeffs):
        if mask and prods[mask] is None:
            low = mask & (-mask)
            bit = low.bit_length() - 1
            prods[mask] = _interval_mul(prods[mask ^ low], gen_intervals[bit])
        if c:
            total = _interval_add(total, _interval_scale(prods[mask], c))
    return total


def sign_at(x, ordering):
    """Exact sign of x under the embedding given by the ordering."""
    if not isinstance(x, FieldElement):
        raise TypeError("sign_at expects a FieldElement")
    if x.tower != ordering.tower:
        raise MismatchedTower("element does not belong to the ordering's tower")
    if x.is_zero():
        return 0
    if x.is_rational():
        return rat_sign(x.coeffs[0])
    bits = _START_BITS
    while True:
        gens = _generator_intervals(x.tower, ordering.root_signs, bits)
        lo, hi = _interval_eval_coeffs(x.tower, x.coeffs, gens)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        bits *= 2


def orderings(tower):
    """All real embeddings, as consistent sign vectors with certificates.

    Enumerated depth first with the positive branch first, so the result
    order is stable and index 0 takes every root positive when possible.
    """
    if not tower.formally_real:
        raise NoOrderings("tower was built as arithmetic-only")
    if tower._orderings is not None:
        return list(tower._orderings)
    partial = [()]
    for level in range(tower.depth):
        sub = tower.subtower(level)
        rad = tower.radicands()[level]
        nxt = []
        for signs in partial:
            p = Ordering(sub, signs, _generator_intervals(sub, signs, _START_BITS))
            if sign_at(rad, p) > 0:
                nxt.append(signs + (1,))
                nxt.append(signs + (-1,))
        partial = nxt
    result = [
        Ordering(tower, signs, _generator_intervals(tower, signs, _START_BITS))
        for signs in partial
    ]
    tower._orderings = tuple(result)
    return result


def extensions_of(ordering, tower):
    """Orderings of an extension tower restricting to the given one."""
    if not tower.is_extension_of(ordering.tower):
        raise MismatchedTower("tower does not extend the ordering's field")
    return [q for q in orderings(tower) if q.extends(ordering)]


# -- tower construction --------------------------------------------------------


def tower_extend(tower, a, allow_nonreal=False):
    """Adjoin sqrt(a) to the tower.

    The radicand must be a nonzero non-square; unless allow_nonreal is set
    it must also be positive at some ordering so the tower stays formally
    real.  Arithmetic-only towers (allow_nonreal) have no orderings.
    """
    if not isinstance(a, FieldElement) or a.tower != tower:
        raise MismatchedTower("radicand must be an element of the tower")
    if a.is_zero():
        raise ZeroRadicand("radicand is zero")
    if sqrt_in_field(a) is not None:
        raise SquareRadicand(f"{a} is already a square")
    if not tower.formally_real:
        raise NoOrderings("cannot extend an arithmetic-only tower")
    positive_somewhere = any(sign_at(a, p) > 0 for p in orderings(tower))
    if not positive_somewhere:
        if allow_nonreal:
            return FieldTower(tower, a, formally_real=False)
        raise NotPositiveAnywhere(f"{a} is negative at every ordering")
    return FieldTower(tower, a)


def field_arith(op, x, y=None):
    """Named arithmetic dispatcher kept for the operation contract."""
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "neg":
        return -x
    if op == "inv":
        return x.inv()
    raise ValueError(f"unknown op {op!r}")


def trace_step(x):
    """Trace of the topmost quadratic step: Tr(u + v*sqrt(a)) = 2u."""
    tower = x.tower
    if tower.depth == 0:
        raise BaseTower("element lives in the base tower")
    half = len(x.coeffs) // 2
    return FieldElement(tower.parent, tuple(2 * c for c in x.coeffs[:half]))

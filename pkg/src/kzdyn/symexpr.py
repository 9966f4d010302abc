"""Exact multivariate rational-function arithmetic over the rationals.

Representation
--------------
A polynomial (`Poly`) is a sparse map from exponent vectors to nonzero
`fractions.Fraction` coefficients.  Exponent vectors are dense tuples over a
*local* variable set: ``vars`` is the sorted tuple of symbol ids that actually
occur, and every exponent tuple has ``len(vars)`` entries.  The zero
polynomial has no terms and an empty variable set.

A rational function (`RationalFunctionExpr`) is a pair ``num/den`` of
polynomials kept in canonical form:

* ``gcd(num, den) = 1`` (the multivariate gcd is removed at construction);
* ``den`` has coprime integer coefficients and a positive leading
  coefficient in graded-lexicographic order (the scalar is folded into
  ``num``);
* zero is represented as ``0/1``.

Two expressions are equal as functions if and only if their canonical forms
are identical, so ``==`` is exact semantic equality.

Arithmetic uses reduced-fraction shortcuts (Henrici/Knuth): sums and products
of already-reduced fractions are combined through small cross-gcds instead of
one large gcd, so intermediate blow-up stays bounded.  Multivariate gcds and
exact divisions are delegated to sparse polynomial rings over Q (sympy) behind
the two seams `poly_gcd_cofactors` / `poly_divexact`.

Symbols are process-global: a name maps to a stable integer id on first use.
Names follow ``[A-Za-z][A-Za-z0-9:]*``; by convention the package uses
``l1, l2, ...`` for weight coordinates, ``kap`` for the difference step,
``z:j`` for evaluation points, ``t:k:d`` for integration variables (color
``k``, copy ``d``) and ``L:j:k`` for pairings of the j-th factor weight with
the k-th simple root.

Text form round-trips exactly: ``parse(str(e)) == e`` and
``str(parse(str(e))) == str(e)``.
"""

from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence, Union

__all__ = [
    "DivisionByZero",
    "ParseError",
    "Poly",
    "RationalFunctionExpr",
    "RFE",
    "RF_ZERO",
    "RF_ONE",
    "symbol",
    "symbol_id",
    "symbol_name",
    "rational",
    "parse",
    "poly_gcd",
    "poly_divexact",
    "rf_substitute",
    "rf_symmetrize",
    "rf_partial",
]


class DivisionByZero(ZeroDivisionError):
    """Division by an expression that is identically zero."""


class ParseError(ValueError):
    """Malformed expression text."""


# ---------------------------------------------------------------------------
# Symbol registry
# ---------------------------------------------------------------------------

_NAME_TO_ID: dict[str, int] = {}
_ID_TO_NAME: list[str] = []
_SYMBOL_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9:]*\Z")


def symbol_id(name: str) -> int:
    """Return the stable id for ``name``, registering it on first use."""
    sid = _NAME_TO_ID.get(name)
    if sid is None:
        if not _SYMBOL_NAME_RE.match(name):
            raise ValueError(f"invalid symbol name: {name!r}")
        sid = len(_ID_TO_NAME)
        _NAME_TO_ID[name] = sid
        _ID_TO_NAME.append(name)
    return sid


def symbol_name(sid: int) -> str:
    """Inverse of `symbol_id`."""
    return _ID_TO_NAME[sid]


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _grlex_key(exponents: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    return (sum(exponents), exponents)


class Poly:
    """Immutable sparse multivariate polynomial over Q.

    Instances must be built through the class methods or arithmetic; the
    constructor trusts its arguments (vars sorted and minimal, no zero
    coefficients).
    """

    __slots__ = ("vars", "terms", "_hash")

    vars: tuple[int, ...]
    terms: dict[tuple[int, ...], Fraction]

    def __init__(self, vars: tuple[int, ...], terms: dict[tuple[int, ...], Fraction]):
        self.vars = vars
        self.terms = terms
        self._hash: int | None = None

    # -- construction -------------------------------------------------------

    @staticmethod
    def zero() -> "Poly":
        return _POLY_ZERO

    @staticmethod
    def one() -> "Poly":
        return _POLY_ONE

    @staticmethod
    def const(value: Union[int, Fraction]) -> "Poly":
        c = Fraction(value)
        if not c:
            return _POLY_ZERO
        return Poly((), {(): c})

    @staticmethod
    def from_symbol(name_or_id: Union[str, int]) -> "Poly":
        sid = name_or_id if isinstance(name_or_id, int) else symbol_id(name_or_id)
        return Poly((sid,), {(1,): _ONE})

    @staticmethod
    def build(vars: Sequence[int], terms: Mapping[tuple[int, ...], Fraction]) -> "Poly":
        """Build from an untrusted (vars, terms) pair, normalizing."""
        return Poly(*_shrink(tuple(vars), dict(terms)))

    # -- predicates ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.vars

    def is_one(self) -> bool:
        return not self.vars and self.terms.get((), _ZERO) == 1

    def const_value(self) -> Fraction:
        if self.vars:
            raise ValueError("not a constant polynomial")
        return self.terms.get((), _ZERO)

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def degree_in(self, name_or_id: Union[str, int]) -> int:
        sid = name_or_id if isinstance(name_or_id, int) else symbol_id(name_or_id)
        if sid not in self.vars:
            return 0
        i = self.vars.index(sid)
        return max(e[i] for e in self.terms)

    # -- hashing / equality --------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Poly):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash((self.vars, frozenset(self.terms.items())))
            self._hash = h
        return h

    # -- arithmetic -----------------------------------------------------------

    def __neg__(self) -> "Poly":
        if not self.terms:
            return self
        return Poly(self.vars, {e: -c for e, c in self.terms.items()})

    def __add__(self, other: "Poly") -> "Poly":
        if not self.terms:
            return other
        if not other.terms:
            return self
        vars, a, b = _align(self, other)
        out = dict(a)
        for e, c in b.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Poly(*_shrink(vars, out))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.terms or not other.terms:
            return _POLY_ZERO
        if self.is_const():
            return other.scale(self.terms[()])
        if other.is_const():
            return self.scale(other.terms[()])
        vars, a, b = _align(self, other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                s = out.get(e)
                if s is None:
                    out[e] = c1 * c2
                else:
                    s = s + c1 * c2
                    if s:
                        out[e] = s
                    else:
                        del out[e]
        return Poly(*_shrink(vars, out))

    def scale(self, c: Fraction) -> "Poly":
        if not c:
            return _POLY_ZERO
        if c == 1:
            return self
        return Poly(self.vars, {e: coef * c for e, coef in self.terms.items()})

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = _POLY_ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base_needed = n >> 1
            if base_needed:
                base = base * base
            n = base_needed
        return result

    # -- calculus / evaluation -------------------------------------------------

    def diff(self, name_or_id: Union[str, int]) -> "Poly":
        sid = name_or_id if isinstance(name_or_id, int) else symbol_id(name_or_id)
        if sid not in self.vars:
            return _POLY_ZERO
        i = self.vars.index(sid)
        out: dict[tuple[int, ...], Fraction] = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                out[ne] = out.get(ne, _ZERO) + c * e[i]
        return Poly(*_shrink(self.vars, out))

    def eval(self, assignment: Mapping[int, Fraction]) -> Fraction:
        total = _ZERO
        values = [assignment[v] for v in self.vars]
        for e, c in self.terms.items():
            term = c
            for val, ei in zip(values, e):
                if ei:
                    term *= val ** ei
            total += term
        return total

    def rename(self, mapping: Mapping[int, int]) -> "Poly":
        """Replace variables by variables (``{old_id: new_id}``); merges collisions."""
        if not self.terms or not any(v in mapping for v in self.vars):
            return self
        new_ids = sorted({mapping.get(v, v) for v in self.vars})
        pos = {v: i for i, v in enumerate(new_ids)}
        n = len(new_ids)
        out: dict[tuple[int, ...], Fraction] = {}
        for e, c in self.terms.items():
            ne = [0] * n
            for v, ei in zip(self.vars, e):
                if ei:
                    ne[pos[mapping.get(v, v)]] += ei
            key = tuple(ne)
            s = out.get(key)
            if s is None:
                out[key] = c
            else:
                s = s + c
                if s:
                    out[key] = s
                else:
                    del out[key]
        return Poly(*_shrink(tuple(new_ids), out))

    # -- normal form helpers ----------------------------------------------------

    def leading(self) -> tuple[tuple[int, ...], Fraction]:
        """Leading (exponents, coefficient) in graded-lex order."""
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def content_signed(self) -> Fraction:
        """Rational c with self/c primitive-integer and positive leading coeff."""
        nums = [c.numerator for c in self.terms.values()]
        dens = [c.denominator for c in self.terms.values()]
        g = 0
        for v in nums:
            g = math.gcd(g, v)
        l = 1
        for v in dens:
            l = l * v // math.gcd(l, v)
        c = Fraction(g, l)
        if self.leading()[1] < 0:
            c = -c
        return c

    def __repr__(self) -> str:
        return f"Poly({_poly_str(self)})"


def _shrink(vars: tuple[int, ...], terms: dict[tuple[int, ...], Fraction]):
    """Drop zero coefficients and unused variable columns."""
    terms = {e: c for e, c in terms.items() if c}
    if not terms:
        return (), {}
    nvars = len(vars)
    used = [i for i in range(nvars) if any(e[i] for e in terms)]
    if len(used) == nvars:
        return vars, terms
    new_vars = tuple(vars[i] for i in used)
    new_terms = {tuple(e[i] for i in used): c for e, c in terms.items()}
    return new_vars, new_terms


def _remap(p: Poly, vars: tuple[int, ...]) -> dict[tuple[int, ...], Fraction]:
    if p.vars == vars:
        return p.terms
    pos = {v: i for i, v in enumerate(vars)}
    idx = [pos[v] for v in p.vars]
    n = len(vars)
    out: dict[tuple[int, ...], Fraction] = {}
    for e, c in p.terms.items():
        ne = [0] * n
        for i, ei in zip(idx, e):
            ne[i] = ei
        out[tuple(ne)] = c
    return out


def _align(p: Poly, q: Poly):
    if p.vars == q.vars:
        return p.vars, p.terms, q.terms
    vars = tuple(sorted(set(p.vars) | set(q.vars)))
    return vars, _remap(p, vars), _remap(q, vars)


_POLY_ZERO = Poly((), {})
_POLY_ONE = Poly((), {(): _ONE})


# ---------------------------------------------------------------------------
# GCD / exact division seam (sparse rings over Q)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _ring(nvars: int):
    from sympy.polys.domains import QQ
    from sympy.polys.rings import ring

    names = [f"x{i}" for i in range(nvars)]
    return ring(names, QQ)[0]


def _to_ring(R, terms: dict[tuple[int, ...], Fraction]):
    dom = R.domain
    return R.from_dict({e: dom(c.numerator, c.denominator) for e, c in terms.items()})


def _from_ring(elem, vars: tuple[int, ...]) -> Poly:
    terms = {
        tuple(monom): Fraction(int(coeff.numerator), int(coeff.denominator))
        for monom, coeff in elem.terms()
    }
    return Poly(*_shrink(vars, terms))


def _normalize_poly(p: Poly) -> Poly:
    """Primitive integer coefficients, positive leading coefficient."""
    if p.is_zero():
        return p
    c = p.content_signed()
    return p.scale(1 / c)


def poly_gcd_cofactors(p: Poly, q: Poly) -> tuple[Poly, Poly, Poly]:
    """Return ``(g, p/g, q/g)`` with g the normalized gcd.

    The gcd is primitive with integer coefficients and positive leading
    coefficient (``1`` for coprime inputs, including any nonzero constant
    input).
    """
    if p.is_zero() and q.is_zero():
        return _POLY_ZERO, _POLY_ONE, _POLY_ONE
    if p.is_zero():
        c = q.content_signed()
        return q.scale(1 / c), _POLY_ZERO, Poly.const(c)
    if q.is_zero():
        c = p.content_signed()
        return p.scale(1 / c), Poly.const(c), _POLY_ZERO
    if p.is_const() or q.is_const():
        return _POLY_ONE, p, q
    if p == q:
        g = _normalize_poly(p)
        c = Poly.const(p.content_signed())
        return g, c, c
    vars = tuple(sorted(set(p.vars) | set(q.vars)))
    R = _ring(len(vars))
    fp = _to_ring(R, _remap(p, vars))
    fq = _to_ring(R, _remap(q, vars))
    h, cp, cq = fp.cofactors(fq)
    if not h.is_ground:
        g = _from_ring(h, vars)
        scale = g.content_signed()
        if scale != 1:
            g = g.scale(1 / scale)
        pg = _from_ring(cp, vars).scale(scale)
        qg = _from_ring(cq, vars).scale(scale)
        return g, pg, qg
    return _POLY_ONE, p, q


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """Normalized multivariate gcd over Q (see `poly_gcd_cofactors`)."""
    return poly_gcd_cofactors(p, q)[0]


def poly_divexact(p: Poly, q: Poly) -> Poly:
    """Exact quotient p/q; raises ValueError if q does not divide p."""
    if q.is_zero():
        raise DivisionByZero("polynomial division by zero")
    if p.is_zero():
        return _POLY_ZERO
    if q.is_const():
        return p.scale(1 / q.const_value())
    vars = tuple(sorted(set(p.vars) | set(q.vars)))
    R = _ring(len(vars))
    fp = _to_ring(R, _remap(p, vars))
    fq = _to_ring(R, _remap(q, vars))
    quotient, remainder = fp.div(fq)
    if remainder:
        raise ValueError("inexact polynomial division")
    return _from_ring(quotient, vars)


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------

Scalar = Union[int, Fraction]
ExprLike = Union["RationalFunctionExpr", Poly, int, Fraction]


class RationalFunctionExpr:
    """Canonical quotient of two `Poly` (see module docstring)."""

    __slots__ = ("num", "den", "_hash")

    num: Poly
    den: Poly

    def __init__(self, num: Poly, den: Poly):
        # Trusted constructor: (num, den) must already be canonical.
        self.num = num
        self.den = den
        self._hash: int | None = None

    # -- construction ---------------------------------------------------------

    @staticmethod
    def make(num: Poly, den: Poly) -> "RationalFunctionExpr":
        """Canonicalize an arbitrary num/den pair (full gcd reduction)."""
        if den.is_zero():
            raise DivisionByZero("denominator is identically zero")
        if num.is_zero():
            return RF_ZERO
        g, num, den = poly_gcd_cofactors(num, den)
        return _make_reduced(num, den)

    @staticmethod
    def from_const(value: Scalar) -> "RationalFunctionExpr":
        c = Fraction(value)
        if not c:
            return RF_ZERO
        if c == 1:
            return RF_ONE
        return RationalFunctionExpr(Poly.const(c), _POLY_ONE)

    @staticmethod
    def from_symbol(name: Union[str, int]) -> "RationalFunctionExpr":
        return RationalFunctionExpr(Poly.from_symbol(name), _POLY_ONE)

    # -- predicates -------------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_one()

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ValueError("not a constant expression")
        return self.num.const_value()

    def free_symbols(self) -> set[int]:
        return set(self.num.vars) | set(self.den.vars)

    # -- equality ----------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if isinstance(other, (int, Fraction)):
            other = RationalFunctionExpr.from_const(other)
        if not isinstance(other, RationalFunctionExpr):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash((self.num, self.den))
            self._hash = h
        return h

    # -- arithmetic ----------------------------------------------------------------

    def __neg__(self) -> "RationalFunctionExpr":
        if self.num.is_zero():
            return self
        return RationalFunctionExpr(-self.num, self.den)

    def __add__(self, other: ExprLike) -> "RationalFunctionExpr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.num.is_zero():
            return other
        if other.num.is_zero():
            return self
        a, b = self.num, self.den
        c, d = other.num, other.den
        if b.is_one() and d.is_one():
            num = a + c
            if num.is_zero():
                return RF_ZERO
            return RationalFunctionExpr(num, _POLY_ONE)
        g1, db, dd = poly_gcd_cofactors(b, d)
        if g1.is_one():
            num = a * d + c * b
            if num.is_zero():
                return RF_ZERO
            return _make_reduced(num, b * d)
        t = a * dd + c * db
        if t.is_zero():
            return RF_ZERO
        g2, t, _ = poly_gcd_cofactors(t, g1)
        if g2.is_one():
            return _make_reduced(t, db * d)
        return _make_reduced(t, db * poly_divexact(d, g2))

    def __radd__(self, other: ExprLike) -> "RationalFunctionExpr":
        return self.__add__(other)

    def __sub__(self, other: ExprLike) -> "RationalFunctionExpr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.__add__(-other)

    def __rsub__(self, other: ExprLike) -> "RationalFunctionExpr":
        return (-self).__add__(other)

    def __mul__(self, other: ExprLike) -> "RationalFunctionExpr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return RF_ZERO
        a, b = self.num, self.den
        c, d = other.num, other.den
        if b.is_one() and d.is_one():
            return RationalFunctionExpr(a * c, _POLY_ONE)
        _, a, d = poly_gcd_cofactors(a, d)
        _, c, b = poly_gcd_cofactors(c, b)
        return _make_reduced(a * c, b * d)

    def __rmul__(self, other: ExprLike) -> "RationalFunctionExpr":
        return self.__mul__(other)

    def reciprocal(self) -> "RationalFunctionExpr":
        if self.num.is_zero():
            raise DivisionByZero("reciprocal of zero")
        return _make_reduced(self.den, self.num)

    def __truediv__(self, other: ExprLike) -> "RationalFunctionExpr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            raise DivisionByZero("division by zero expression")
        return self.__mul__(other.reciprocal())

    def __rtruediv__(self, other: ExprLike) -> "RationalFunctionExpr":
        return self.reciprocal().__mul__(other)

    def __pow__(self, n: int) -> "RationalFunctionExpr":
        if n == 0:
            return RF_ONE
        if n < 0:
            return self.reciprocal() ** (-n)
        result = RF_ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- evaluation / substitution ----------------------------------------------

    def eval(self, point: Mapping[Union[str, int], Scalar]) -> Fraction:
        """Exact evaluation at a rational point; DivisionByZero on poles."""
        assignment = {
            (k if isinstance(k, int) else symbol_id(k)): Fraction(v)
            for k, v in point.items()
        }
        d = self.den.eval(assignment)
        if not d:
            raise DivisionByZero("evaluation hit a pole")
        return self.num.eval(assignment) / d

    def rename(self, mapping: Mapping[int, int]) -> "RationalFunctionExpr":
        """Bijective variable renaming (stays reduced, re-normalizes sign)."""
        if self.num.is_zero():
            return self
        return _make_reduced(self.num.rename(mapping), self.den.rename(mapping))

    def subs(self, subs: Mapping[Union[str, int], ExprLike]) -> "RationalFunctionExpr":
        return rf_substitute(self, subs)

    def diff(self, name: Union[str, int]) -> "RationalFunctionExpr":
        return rf_partial(self, name)

    def __str__(self) -> str:
        if self.den.is_one():
            return _poly_str(self.num)
        return f"({_poly_str(self.num)})/({_poly_str(self.den)})"

    def __repr__(self) -> str:
        return f"RFE({self})"


RFE = RationalFunctionExpr

RF_ZERO = RationalFunctionExpr(_POLY_ZERO, _POLY_ONE)
RF_ONE = RationalFunctionExpr(_POLY_ONE, _POLY_ONE)


def _coerce(value: ExprLike) -> "RationalFunctionExpr":
    if isinstance(value, RationalFunctionExpr):
        return value
    if isinstance(value, (int, Fraction)):
        return RationalFunctionExpr.from_const(value)
    if isinstance(value, Poly):
        if value.is_zero():
            return RF_ZERO
        return RationalFunctionExpr(value, _POLY_ONE)
    return NotImplemented


def _make_reduced(num: Poly, den: Poly) -> RationalFunctionExpr:
    """Canonicalize a pair already known coprime (content/sign step only)."""
    if den.is_zero():
        raise DivisionByZero("denominator is identically zero")
    if num.is_zero():
        return RF_ZERO
    if den.is_const():
        c = den.const_value()
        if c == 1:
            return RationalFunctionExpr(num, _POLY_ONE)
        return RationalFunctionExpr(num.scale(1 / c), _POLY_ONE)
    c = den.content_signed()
    if c != 1:
        den = den.scale(1 / c)
        num = num.scale(1 / c)
    return RationalFunctionExpr(num, den)


def symbol(name: str) -> RationalFunctionExpr:
    """The expression consisting of a single symbol."""
    return RationalFunctionExpr.from_symbol(name)


def rational(value: Scalar, den: int = 1) -> RationalFunctionExpr:
    """A constant expression (``rational(3, 4)`` is 3/4)."""
    return RationalFunctionExpr.from_const(Fraction(value) / den if den != 1 else Fraction(value))


# ---------------------------------------------------------------------------
# Substitution / symmetrization / differentiation
# ---------------------------------------------------------------------------

def _poly_substitute(p: Poly, smap: Mapping[int, RationalFunctionExpr]) -> RationalFunctionExpr:
    """Evaluate a polynomial at expression values (unmapped vars stay)."""
    if p.is_zero():
        return RF_ZERO
    bases: list[RationalFunctionExpr] = []
    max_pow: list[int] = []
    for i, v in enumerate(p.vars):
        repl = smap.get(v)
        bases.append(repl if repl is not None else RationalFunctionExpr.from_symbol(v))
        max_pow.append(max(e[i] for e in p.terms))
    powers: list[list[RationalFunctionExpr]] = []
    for base, top in zip(bases, max_pow):
        row = [RF_ONE]
        for _ in range(top):
            row.append(row[-1] * base)
        powers.append(row)
    total = RF_ZERO
    for e, c in p.terms.items():
        term = RationalFunctionExpr.from_const(c)
        for i, ei in enumerate(e):
            if ei:
                term = term * powers[i][ei]
        total = total + term
    return total


def rf_substitute(
    expr: RationalFunctionExpr,
    subs: Mapping[Union[str, int], ExprLike],
) -> RationalFunctionExpr:
    """Simultaneous substitution of symbols by expressions.

    Raises DivisionByZero if the substituted denominator vanishes identically.
    """
    smap: dict[int, RationalFunctionExpr] = {}
    for k, v in subs.items():
        sid = k if isinstance(k, int) else symbol_id(k)
        coerced = _coerce(v)
        if coerced is NotImplemented:
            raise TypeError(f"cannot substitute value of type {type(v).__name__}")
        smap[sid] = coerced
    if not smap or not (set(smap) & expr.free_symbols()):
        return expr
    pmap: dict[int, Poly] = {}
    for k, v in smap.items():
        sp = _as_simple_poly(v)
        if sp is None:
            pmap.clear()
            break
        pmap[k] = sp
    if pmap:
        # Every value is a constant or a bare symbol: stay at the Poly level.
        num = _poly_subs_poly(expr.num, pmap)
        den = _poly_subs_poly(expr.den, pmap)
        if den.is_zero():
            raise DivisionByZero("substitution makes the denominator vanish")
        return RationalFunctionExpr.make(num, den)
    num = _poly_substitute(expr.num, smap)
    den = _poly_substitute(expr.den, smap)
    if den.is_zero():
        raise DivisionByZero("substitution makes the denominator vanish")
    return num / den


def _as_simple_poly(v: RationalFunctionExpr) -> Poly | None:
    """Return the Poly form of a constant or bare-symbol expression, else None."""
    if v.is_const():
        return Poly.const(v.const_value())
    if v.den.is_one() and len(v.num.terms) == 1:
        ((e, c),) = v.num.terms.items()
        if c == 1 and sum(e) == 1:
            return v.num
    return None


def _poly_subs_poly(p: Poly, pmap: Mapping[int, Poly]) -> Poly:
    if p.is_zero() or not (set(pmap) & set(p.vars)):
        return p
    total = _POLY_ZERO
    bases = [pmap.get(v, Poly.from_symbol(v)) for v in p.vars]
    for e, c in p.terms.items():
        term = Poly.const(c)
        for base, ei in zip(bases, e):
            if ei:
                term = term * base ** ei
        total = total + term
    return total


def rf_symmetrize(
    expr: RationalFunctionExpr,
    groups: Sequence[Sequence[str]],
) -> RationalFunctionExpr:
    """Average over all permutations of each symbol group (idempotent).

    ``groups`` is a list of disjoint symbol-name lists; the result is
    ``(prod |g|!)^{-1} * sum`` over products of per-group permutations of the
    correspondingly renamed expression.
    """
    group_ids = [[symbol_id(name) for name in g] for g in groups]
    seen: set[int] = set()
    for g in group_ids:
        for sid in g:
            if sid in seen:
                raise ValueError("symmetrization groups must be disjoint")
            seen.add(sid)
    count = 1
    for g in group_ids:
        count *= math.factorial(len(g))
    total = RF_ZERO
    for combo in itertools.product(*[itertools.permutations(g) for g in group_ids]):
        mapping: dict[int, int] = {}
        for orig, perm in zip(group_ids, combo):
            for a, b in zip(orig, perm):
                if a != b:
                    mapping[a] = b
        total = total + (expr.rename(mapping) if mapping else expr)
    return total * Fraction(1, count)


def rf_partial(expr: RationalFunctionExpr, name: Union[str, int]) -> RationalFunctionExpr:
    """Exact partial derivative with respect to one symbol."""
    sid = name if isinstance(name, int) else symbol_id(name)
    n, d = expr.num, expr.den
    dn = n.diff(sid)
    dd = d.diff(sid)
    if dd.is_zero():
        if dn.is_zero():
            return RF_ZERO
        return RationalFunctionExpr.make(dn, d)
    return RationalFunctionExpr.make(dn * d - n * dd, d * d)


# ---------------------------------------------------------------------------
# Text form
# ---------------------------------------------------------------------------

def _poly_str(p: Poly) -> str:
    if not p.terms:
        return "0"
    ordered = sorted(p.terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)
    parts: list[tuple[bool, str]] = []
    for e, c in ordered:
        factors = []
        for v, ei in zip(p.vars, e):
            if ei == 1:
                factors.append(symbol_name(v))
            elif ei:
                factors.append(f"{symbol_name(v)}^{ei}")
        mag = -c if c < 0 else c
        if factors and mag == 1:
            body = " * ".join(factors)
        elif factors:
            body = str(mag) + " * " + " * ".join(factors)
        else:
            body = str(mag)
        parts.append((c < 0, body))
    neg, body = parts[0]
    out = ("-" if neg else "") + body
    for neg, body in parts[1:]:
        out += (" - " if neg else " + ") + body
    return out


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<rat>\d+/\d+)|(?P<int>\d+)|(?P<sym>[A-Za-z][A-Za-z0-9:]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ParseError(f"unexpected character at {pos}: {text[pos:pos+10]!r}")
            break
        pos = m.end()
        kind = m.lastgroup
        assert kind is not None
        tokens.append((kind, m.group(kind)))
    tokens.append(("end", ""))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str]]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> tuple[str, str]:
        return self.tokens[self.i]

    def next(self) -> tuple[str, str]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, val = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, found {val!r}")

    def parse_expr(self) -> RationalFunctionExpr:
        value = self.parse_term()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.parse_term()
                value = value + rhs if val == "+" else value - rhs
            else:
                return value

    def parse_term(self) -> RationalFunctionExpr:
        value = self.parse_unary()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                rhs = self.parse_unary()
                value = value * rhs if val == "*" else value / rhs
            else:
                return value

    def parse_unary(self) -> RationalFunctionExpr:
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.next()
            inner = self.parse_unary()
            return inner if val == "+" else -inner
        return self.parse_power()

    def parse_power(self) -> RationalFunctionExpr:
        base = self.parse_atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.next()
            sign = 1
            kind, val = self.next()
            if kind == "op" and val == "-":
                sign = -1
                kind, val = self.next()
            if kind != "int":
                raise ParseError(f"expected integer exponent, found {val!r}")
            return base ** (sign * int(val))
        return base

    def parse_atom(self) -> RationalFunctionExpr:
        kind, val = self.next()
        if kind == "rat":
            n, d = val.split("/")
            return RationalFunctionExpr.from_const(Fraction(int(n), int(d)))
        if kind == "int":
            return RationalFunctionExpr.from_const(int(val))
        if kind == "sym":
            return RationalFunctionExpr.from_symbol(val)
        if kind == "op" and val == "(":
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        raise ParseError(f"unexpected token {val!r}")


def parse(text: str) -> RationalFunctionExpr:
    """Parse the text form produced by ``str()`` (and ordinary arithmetic text)."""
    parser = _Parser(_tokenize(text))
    value = parser.parse_expr()
    kind, val = parser.next()
    if kind != "end":
        raise ParseError(f"trailing input starting at {val!r}")
    return value

"""Enveloping-algebra machinery for sl_N / gl_N.

Letters and words
-----------------
A *letter* is either a matrix-unit generator ``("e", a, b)`` with ``a != b``
or a Cartan difference ``("c", a, b)`` standing for ``e_{a,a} - e_{b,b}``.
Brackets follow ``[e_{a,b}, e_{c,d}] = delta_{bc} e_{a,d} - delta_{d,a}
e_{c,b}``.  A `GenWord` is a scalar times a sequence of letters, read left to
right as an operator product (the rightmost letter acts first).

PBW data
--------
A `PBWBasis` fixes a normal order on the positive roots (largest first) and a
sign per root; the lowering vector attached to the root ``(k, l)`` at sign
``s`` is ``s * e_{l,k}``.  The basis monomial for a multi-index ``I`` (stored
as an exponent tuple aligned with the order) is::

    F_I = (-1)^{sum I} * prod_pos (sign_pos * e_{l,k})^{I_pos} / I_pos!

with factors arranged largest root leftmost.  Internally the straightener
works with the *plain* divided monomials ``M(I) = prod e_{l,k}^{I_pos} /
I_pos!``; `UEAElement` stores coefficients with the sign convention folded in
(``F_I = signed_factor(I) * M(I)``).

Straightening
-------------
`Straightener.apply_letter` rewrites ``letter * M(I) * v`` as an exact
combination of ``M(J) * v`` for a highest-weight vector ``v`` of a given
weight: raising letters annihilate ``v``, Cartan letters act by exact scalar,
and divided powers commute through the identity
``X f^m/m! = sum_r f^{m-r}/(m-r)! (ad^r X)/r!``.  Everything is memoized per
(letter, exponent) pair, so repeated operator assembly is cheap.

Basis changes between normal orders walk a chain of adjacent reversals.  A
two-neighbour swap whose root sum is not a root leaves root-keyed exponents
untouched; a three-term reversal with window ``x, x+y, y`` rewrites exponents
``(a, c, b)`` on (top, middle, bottom) as::

    sum_{r=0}^{min(a,b)} binom(c+r, r) (-1)^c  *  (a-r, c+r, b-r)

in the reversed window, with the middle root's sign flipped.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .roots import (
    ElemTransform,
    WeightVec,
    apply_transform,
    root_sum,
    sigma_sequence,
    sign_table_a,
    special_order,
    standard_order,
    weight_from_pairings,
)
from .symexpr import (
    RF_ONE,
    RF_ZERO,
    RationalFunctionExpr,
    rational,
    symbol,
)

__all__ = [
    "Letter",
    "GenWord",
    "word",
    "PBWBasis",
    "standard_basis",
    "special_basis",
    "bases_along_sigma",
    "UEAElement",
    "Straightener",
    "bracket_letters",
    "f_letter",
    "e_letter",
    "cartan_letter",
    "straighten",
    "change_pbw_basis",
    "chevalley_tau",
    "antipode_A",
    "monomial_word",
    "format_element",
]

Letter = tuple  # ("e", a, b) with a != b, or ("c", a, b) for e_aa - e_bb


def f_letter(root: tuple[int, int]) -> Letter:
    """Plain lowering letter for a positive root (k,l): the unit e_{l,k}."""
    k, l = root
    return ("e", l, k)


def e_letter(root: tuple[int, int]) -> Letter:
    """Plain raising letter for a positive root (k,l): the unit e_{k,l}."""
    k, l = root
    return ("e", k, l)


def cartan_letter(k: int) -> Letter:
    """The simple coroot letter e_{k,k} - e_{k+1,k+1}."""
    return ("c", k, k + 1)


def bracket_letters(x: Letter, y: Letter) -> dict[Letter, Fraction]:
    """The bracket [x, y] as an exact combination of letters."""
    out: dict[Letter, Fraction] = {}

    def add(letter: Letter, c: Fraction) -> None:
        s = out.get(letter, _F0) + c
        if s:
            out[letter] = s
        elif letter in out:
            del out[letter]

    kx, ky = x[0], y[0]
    if kx == "e" and ky == "e":
        a, b = x[1], x[2]
        c, d = y[1], y[2]
        if b == c and a == d:
            # Canonical Cartan letter: indices increasing.
            if a < b:
                add(("c", a, b), _F1)
            else:
                add(("c", b, a), -_F1)
        else:
            if b == c:
                add(("e", a, d), _F1)
            if d == a:
                add(("e", c, b), -_F1)
    elif kx == "c" and ky == "e":
        a, b = x[1], x[2]
        c, d = y[1], y[2]
        coeff = (
            (1 if a == c else 0) - (1 if a == d else 0)
            - (1 if b == c else 0) + (1 if b == d else 0)
        )
        if coeff:
            add(y, Fraction(coeff))
    elif kx == "e" and ky == "c":
        for letter, c in bracket_letters(y, x).items():
            add(letter, -c)
    # Cartan with Cartan commutes.
    return out


_F0 = Fraction(0)
_F1 = Fraction(1)


@dataclass(frozen=True)
class GenWord:
    """A scalar multiple of a product of letters (rightmost acts first)."""

    coeff: RationalFunctionExpr
    letters: tuple[Letter, ...]

    def __mul__(self, other: "GenWord") -> "GenWord":
        return GenWord(self.coeff * other.coeff, self.letters + other.letters)

    def scale(self, c) -> "GenWord":
        return GenWord(self.coeff * c, self.letters)


def word(*letters: Letter, coeff=None) -> GenWord:
    return GenWord(RF_ONE if coeff is None else coeff, tuple(letters))


# ---------------------------------------------------------------------------
# PBW bases
# ---------------------------------------------------------------------------

class PBWBasis:
    """A normal order on positive roots plus a sign per root (see module doc)."""

    __slots__ = ("n_rank", "order", "signs", "position", "tag", "_hash")

    def __init__(
        self,
        n_rank: int,
        order: tuple[tuple[int, int], ...],
        signs: tuple[int, ...],
        tag: str = "",
    ):
        self.n_rank = n_rank
        self.order = order
        self.signs = signs
        self.position = {root: i for i, root in enumerate(order)}
        self.tag = tag or "custom"
        self._hash = hash((n_rank, order, signs))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PBWBasis):
            return NotImplemented
        return (
            self.n_rank == other.n_rank
            and self.order == other.order
            and self.signs == other.signs
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"PBWBasis({self.tag}, n_rank={self.n_rank})"

    # -- monomial helpers ----------------------------------------------------

    def zero_exps(self) -> tuple[int, ...]:
        return (0,) * len(self.order)

    def exps_from_roots(self, assignment: Mapping[tuple[int, int], int]) -> tuple[int, ...]:
        exps = [0] * len(self.order)
        for root, value in assignment.items():
            exps[self.position[root]] = value
        return tuple(exps)

    def roots_from_exps(self, exps: Sequence[int]) -> dict[tuple[int, int], int]:
        return {root: e for root, e in zip(self.order, exps) if e}

    def signed_factor(self, exps: Sequence[int]) -> int:
        """Scalar relating the basis monomial to the plain divided monomial."""
        total = sum(exps)
        sign = -1 if total % 2 else 1
        for s, e in zip(self.signs, exps):
            if s < 0 and e % 2:
                sign = -sign
        return sign

    def monomial_weight(self, exps: Sequence[int]) -> dict[int, int]:
        """Epsilon-coordinate weight of F_I (as integer coordinates)."""
        eps = [0] * self.n_rank
        for (k, l), e in zip(self.order, exps):
            if e:
                eps[k - 1] -= e
                eps[l - 1] += e
        return {i + 1: v for i, v in enumerate(eps) if v}


def standard_basis(n_rank: int) -> PBWBasis:
    return special_basis(n_rank, n_rank - 1)


def special_basis(n_rank: int, h: int) -> PBWBasis:
    """Basis attached to the level-h order with signs (-1)^{a_{k,l}(h)}."""
    order = special_order(n_rank, h)
    table = sign_table_a(n_rank, h)
    signs = tuple(-1 if table[root] % 2 else 1 for root in order)
    return PBWBasis(n_rank, order, signs, tag=f"h={h}")


def _apply_transform_to_basis(basis: PBWBasis, transform: ElemTransform) -> PBWBasis:
    order = apply_transform(basis.order, transform)
    signs = list(basis.signs)
    i = transform.position
    if transform.kind == "A1A1":
        signs[i], signs[i + 1] = signs[i + 1], signs[i]
    else:
        signs[i], signs[i + 2] = signs[i + 2], signs[i]
        signs[i + 1] = -signs[i + 1]
    return PBWBasis(basis.n_rank, order, tuple(signs), tag=basis.tag + "'")


def bases_along_sigma(n_rank: int, h: int) -> tuple[list[PBWBasis], list[ElemTransform]]:
    """All bases visited converting level h to level h-1 (first is level h,
    last equals the level h-1 basis), together with the transform list."""
    transforms = sigma_sequence(n_rank, h)
    basis = special_basis(n_rank, h)
    chain = [basis]
    for transform in transforms:
        basis = _apply_transform_to_basis(basis, transform)
        chain.append(basis)
    assert chain[-1] == special_basis(n_rank, h - 1)
    chain[-1] = special_basis(n_rank, h - 1)  # canonical tag
    return chain, transforms


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------

class UEAElement:
    """A finite combination of PBW basis monomials over one basis."""

    __slots__ = ("basis", "terms")

    def __init__(self, basis: PBWBasis, terms: Mapping[tuple[int, ...], RationalFunctionExpr]):
        self.basis = basis
        self.terms = {e: c for e, c in terms.items() if not c.is_zero()}

    @staticmethod
    def zero(basis: PBWBasis) -> "UEAElement":
        return UEAElement(basis, {})

    @staticmethod
    def monomial(basis: PBWBasis, exps: tuple[int, ...], coeff=None) -> "UEAElement":
        return UEAElement(basis, {tuple(exps): RF_ONE if coeff is None else coeff})

    def __add__(self, other: "UEAElement") -> "UEAElement":
        assert self.basis == other.basis
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            out[e] = c if s is None else s + c
        return UEAElement(self.basis, out)

    def __sub__(self, other: "UEAElement") -> "UEAElement":
        return self + other.scale(rational(-1))

    def scale(self, c) -> "UEAElement":
        if isinstance(c, (int, Fraction)):
            c = rational(c)
        return UEAElement(self.basis, {e: coeff * c for e, coeff in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UEAElement):
            return NotImplemented
        return self.basis == other.basis and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self) -> str:
        return f"UEAElement({format_element(self)})"


def monomial_word(basis: PBWBasis, exps: Sequence[int]) -> GenWord:
    """The basis monomial F_I as an explicit word of plain letters.

    Includes the sign convention and the divided-power scalars, so that
    evaluating the word reproduces F_I exactly.
    """
    coeff = Fraction(basis.signed_factor(exps))
    letters: list[Letter] = []
    for root, e in zip(basis.order, exps):
        if e:
            letters.extend([f_letter(root)] * e)
            coeff /= math.factorial(e)
    return GenWord(rational(coeff), tuple(letters))


# ---------------------------------------------------------------------------
# Straightening engine
# ---------------------------------------------------------------------------

State = "dict[tuple[int, ...], RationalFunctionExpr]"


def _state_add(state, exps, coeff) -> None:
    s = state.get(exps)
    if s is None:
        state[exps] = coeff
    else:
        s = s + coeff
        if s.is_zero():
            del state[exps]
        else:
            state[exps] = s


class Straightener:
    """Memoized letter-by-letter rewriting against one PBW arrangement.

    ``hw`` is the highest weight as epsilon-coordinates (a `WeightVec`); it
    may be None for computations in which no Cartan letter can reach the
    vector (e.g. pure lowering words).
    """

    def __init__(self, basis: PBWBasis, hw: Optional[WeightVec] = None):
        self.basis = basis
        self.hw = hw
        self._cache: dict = {}
        self._lower_pos = {
            f_letter(root): i for i, root in enumerate(basis.order)
        }

    # -- scalars ---------------------------------------------------------------

    def _cartan_scalar(self, a: int, b: int) -> RationalFunctionExpr:
        if self.hw is None:
            raise ValueError("Cartan letter reached the vector but no weight given")
        return self.hw.eps[a - 1] - self.hw.eps[b - 1]

    # -- core recursion ----------------------------------------------------------

    def apply_letter(self, letter: Letter, exps: tuple[int, ...]):
        """letter * M(exps) * v as {exps': coefficient} over plain divided
        monomials."""
        key = (letter, exps)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        result = self._apply_letter_uncached(letter, exps)
        self._cache[key] = result
        return result

    def _apply_letter_uncached(self, letter: Letter, exps: tuple[int, ...]):
        pos_letter = self._lower_pos.get(letter)
        top = next((i for i, e in enumerate(exps) if e), None)

        if top is None:
            # Acting directly on the highest-weight vector.
            if letter[0] == "c":
                return {exps: self._cartan_scalar(letter[1], letter[2])}
            if pos_letter is None:
                return {}  # raising letter annihilates v
            unit = list(exps)
            unit[pos_letter] = 1
            return {tuple(unit): RF_ONE}

        if pos_letter is not None and pos_letter <= top:
            # Lowering letter that can be absorbed on the left.
            out = list(exps)
            out[pos_letter] += 1
            coeff = RF_ONE if pos_letter < top else rational(exps[top] + 1)
            return {tuple(out): coeff}

        # Commute through the leading divided power f_top^m/m!.
        m = exps[top]
        rest = list(exps)
        rest[top] = 0
        rest = tuple(rest)
        f_top = f_letter(self.basis.order[top])

        state: dict[tuple[int, ...], RationalFunctionExpr] = {}
        # r = 0 term: f_top^m/m! * (letter * M(rest) v)
        for k_exps, c in self.apply_letter(letter, rest).items():
            for k2, c2 in self._insert_power(top, m, k_exps).items():
                _state_add(state, k2, c * c2)
        # r >= 1 terms with iterated brackets ad^r(letter)/r!
        current: dict[Letter, Fraction] = {letter: _F1}
        for r in range(1, m + 1):
            nxt: dict[Letter, Fraction] = {}
            for y, cy in current.items():
                for z, cz in bracket_letters(y, f_top).items():
                    s = nxt.get(z, _F0) + cy * cz
                    if s:
                        nxt[z] = s
                    elif z in nxt:
                        del nxt[z]
            current = nxt
            if not current:
                break
            inv_rfact = Fraction(1, math.factorial(r))
            for y, cy in current.items():
                scale = rational(cy * inv_rfact)
                for k_exps, c in self.apply_letter(y, rest).items():
                    for k2, c2 in self._insert_power(top, m - r, k_exps).items():
                        _state_add(state, k2, scale * c * c2)
        return state

    def _insert_power(self, pos: int, power: int, exps: tuple[int, ...]):
        """f_pos^power/power! * M(exps) as a state dict."""
        if power == 0:
            return {exps: RF_ONE}
        f = f_letter(self.basis.order[pos])
        state = {exps: RF_ONE}
        for _ in range(power):
            nxt: dict[tuple[int, ...], RationalFunctionExpr] = {}
            for k_exps, c in state.items():
                for k2, c2 in self.apply_letter(f, k_exps).items():
                    _state_add(nxt, k2, c * c2)
            state = nxt
        inv = rational(Fraction(1, math.factorial(power)))
        return {k: c * inv for k, c in state.items()}

    # -- word application -----------------------------------------------------------

    def apply_word(self, letters: Sequence[Letter], state):
        """Apply an operator word (rightmost letter first) to a state dict."""
        for letter in reversed(letters):
            nxt: dict[tuple[int, ...], RationalFunctionExpr] = {}
            for exps, c in state.items():
                for k2, c2 in self.apply_letter(letter, exps).items():
                    _state_add(nxt, k2, c * c2)
            state = nxt
        return state


def _coerce_weight(n_rank: int, hw) -> Optional[WeightVec]:
    if hw is None or isinstance(hw, WeightVec):
        return hw
    pairings = [hw[k] if k in hw else hw[str(k)] for k in range(1, n_rank)]
    coerced = [
        p if isinstance(p, RationalFunctionExpr) else rational(p) for p in pairings
    ]
    return weight_from_pairings(n_rank, coerced)


def straighten(
    words: Union[GenWord, Sequence[GenWord]],
    hw,
    basis: PBWBasis,
) -> UEAElement:
    """Rewrite (sum of words) * v as an exact combination of F_I * v.

    ``hw`` gives the highest weight: a `WeightVec` in epsilon-coordinates, a
    map simple-index -> pairing value, or None for pure lowering input.
    """
    if isinstance(words, GenWord):
        words = [words]
    engine = Straightener(basis, _coerce_weight(basis.n_rank, hw))
    total: dict[tuple[int, ...], RationalFunctionExpr] = {}
    for w in words:
        state = engine.apply_word(w.letters, {basis.zero_exps(): w.coeff})
        for exps, c in state.items():
            _state_add(total, exps, c)
    # Convert plain divided monomials to signed basis monomials.
    out: dict[tuple[int, ...], RationalFunctionExpr] = {}
    for exps, c in total.items():
        out[exps] = c * basis.signed_factor(exps)
    return UEAElement(basis, out)


# ---------------------------------------------------------------------------
# Basis changes
# ---------------------------------------------------------------------------

def _change_one(element: UEAElement, transform: ElemTransform) -> UEAElement:
    source = element.basis
    target = _apply_transform_to_basis(source, transform)
    i = transform.position
    if transform.kind == "A1A1":
        # Root-keyed exponents unchanged; positions i, i+1 swap.
        out = {}
        for exps, c in element.terms.items():
            e = list(exps)
            e[i], e[i + 1] = e[i + 1], e[i]
            out[tuple(e)] = c
        return UEAElement(target, out)

    # Three-term window: top root x, middle x+y, bottom y (largest first).
    x_root, mid_root, y_root = source.order[i], source.order[i + 1], source.order[i + 2]
    # Sanity: the middle basis vector is the bracket of the outer ones.
    sx = source.signs[i]
    sy = source.signs[i + 2]
    smid = source.signs[i + 1]
    br = bracket_letters(f_letter(x_root), f_letter(y_root))
    assert br.get(f_letter(mid_root)) is not None
    assert sx * sy * br[f_letter(mid_root)] == smid

    out: dict[tuple[int, ...], RationalFunctionExpr] = {}
    for exps, coeff in element.terms.items():
        a, c, b = exps[i], exps[i + 1], exps[i + 2]
        base = list(exps)
        sign_c = -1 if c % 2 else 1
        for r in range(0, min(a, b) + 1):
            e = list(base)
            # target window order is (y_root, mid_root, x_root) at i, i+1, i+2
            e[i], e[i + 1], e[i + 2] = b - r, c + r, a - r
            factor = Fraction(math.comb(c + r, r) * sign_c)
            _state_add(out, tuple(e), coeff * factor)
    return UEAElement(target, out)


def _special_level(basis: PBWBasis) -> Optional[int]:
    for h in range(1, basis.n_rank):
        if basis == special_basis(basis.n_rank, h):
            return h
    return None


def _path_between(source: PBWBasis, target: PBWBasis) -> list[ElemTransform]:
    if source == target:
        return []
    hs = _special_level(source)
    ht = _special_level(target)
    if hs is None or ht is None:
        raise ValueError(
            "only level-flavored orders are connected automatically; "
            "pass an explicit transform chain otherwise"
        )
    path: list[ElemTransform] = []
    if ht < hs:
        for h in range(hs, ht, -1):
            path.extend(sigma_sequence(source.n_rank, h))
    else:
        for h in range(hs + 1, ht + 1):
            path.extend(reversed(sigma_sequence(source.n_rank, h)))
    return path


def change_pbw_basis(
    element: UEAElement,
    target: Union[PBWBasis, Sequence],
) -> UEAElement:
    """Re-express an element in another normal order.

    ``target`` is a `PBWBasis`, a root order tuple matching some level
    flavor, or an explicit chain of adjacent reversals to walk.
    """
    if isinstance(target, PBWBasis):
        transforms: Sequence[ElemTransform] = _path_between(element.basis, target)
    elif target and isinstance(target[0], ElemTransform):
        transforms = list(target)
    else:
        order = tuple(tuple(r) for r in target)
        n_rank = element.basis.n_rank
        match = next(
            (
                special_basis(n_rank, h)
                for h in range(1, n_rank)
                if special_order(n_rank, h) == order
            ),
            None,
        )
        if match is None:
            raise ValueError("target order is not a level flavor; pass transforms")
        transforms = _path_between(element.basis, match)
    for transform in transforms:
        element = _change_one(element, transform)
    return element


def invert_transforms(transforms: Sequence[ElemTransform]) -> list[ElemTransform]:
    """The reversal chain undoing the given one (each step is an involution)."""
    return list(reversed(transforms))


def element_in_reference(element: UEAElement, engine: Straightener):
    """Coefficients of the element on the engine's plain divided monomials.

    The element acts on a formal highest-weight vector; pure lowering, so no
    weight is needed.  Used as the order-independent fingerprint.
    """
    total: dict[tuple[int, ...], RationalFunctionExpr] = {}
    for exps, c in element.terms.items():
        w = monomial_word(element.basis, exps)
        state = engine.apply_word(w.letters, {engine.basis.zero_exps(): w.coeff * c})
        for k, v in state.items():
            _state_add(total, k, v)
    return total


# ---------------------------------------------------------------------------
# (Anti)automorphisms
# ---------------------------------------------------------------------------

def _tau_letter(letter: Letter) -> tuple[Fraction, Letter]:
    kind, a, b = letter
    if kind == "e":
        return -_F1, ("e", b, a)
    return -_F1, letter  # Cartan: h -> -h


def chevalley_tau(x: GenWord) -> GenWord:
    """The involution transposing matrix units with a sign: e_{k,l} -> -e_{l,k}."""
    coeff = x.coeff
    letters = []
    for letter in x.letters:
        c, image = _tau_letter(letter)
        coeff = coeff * c
        letters.append(image)
    return GenWord(coeff, tuple(letters))


def antipode_A(x: GenWord) -> GenWord:
    """The anti-automorphism acting by -1 on every Lie-algebra letter."""
    coeff = x.coeff if len(x.letters) % 2 == 0 else -x.coeff
    return GenWord(coeff, tuple(reversed(x.letters)))


def tau_monomial_word(basis: PBWBasis, exps: Sequence[int]) -> GenWord:
    """tau(F_I) as a word of raising letters (largest root leftmost)."""
    return chevalley_tau(monomial_word(basis, exps))


def antipode_monomial_word(basis: PBWBasis, exps: Sequence[int]) -> GenWord:
    """A(F_I) as a word of lowering letters (smallest root leftmost)."""
    return antipode_A(monomial_word(basis, exps))


# ---------------------------------------------------------------------------
# Text form
# ---------------------------------------------------------------------------

def format_monomial(basis: PBWBasis, exps: Sequence[int]) -> str:
    total = sum(exps)
    factors = []
    # Display order is flavor-independent: matrix-unit index (l, k) descending.
    for (k, l), e in sorted(
        zip(basis.order, exps), key=lambda item: (item[0][1], item[0][0]), reverse=True
    ):
        if e == 1:
            factors.append(f"e[{l},{k}]")
        elif e:
            factors.append(f"e[{l},{k}]^{e}/{e}!")
    body = " ".join(factors) if factors else "1"
    return f"(-1)^{total} * {body} @ order({basis.tag})"


def format_element(element: UEAElement) -> str:
    if not element.terms:
        return f"0 @ order({element.basis.tag})"
    parts = []
    for exps in sorted(element.terms):
        coeff = element.terms[exps]
        parts.append(f"({coeff}) * {format_monomial(element.basis, exps)}")
    return "  +  ".join(parts)

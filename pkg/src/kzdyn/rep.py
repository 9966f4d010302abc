"""Highest-weight modules, tensor weight spaces, and bilinear-form data.

A `ModuleSpec` describes one tensor factor: a Verma module with a symbolic or
explicit highest weight, or the (p+1)-dimensional irreducible for rank one.
A `TensorWeightSpace` enumerates the monomial vectors ``F_I v = F_{I_1} v_1
⊗ … ⊗ F_{I_n} v_n`` spanning the subspace of a prescribed lowering depth
``nu0`` (one non-negative integer per simple root), with every monomial taken
in one PBW arrangement (`PBWBasis` from `uea`).

Generator actions are computed per factor with the straightening engine and
combined by the tensor Leibniz rule.  On top of the actions the module builds
the contravariant bilinear form (adjoint ``A ∘ tau``), its inverse elements,
joint kernels of the simple raising operators, and the closed-form dual-basis
actions together with their signed-transpose consistency data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence, Union

from .roots import WeightVec, positive_roots, weight_from_pairings
from .symexpr import RF_ONE, RF_ZERO, RationalFunctionExpr, rational, symbol
from .uea import (
    GenWord,
    Letter,
    PBWBasis,
    Straightener,
    UEAElement,
    antipode_A,
    chevalley_tau,
    monomial_word,
    standard_basis,
)

__all__ = [
    "SingularGram",
    "ModuleSpec",
    "verma_symbolic",
    "verma_weight",
    "lp_module",
    "TensorWeightSpace",
    "enumerate_basis",
    "PBWVector",
    "WeightSpaceOperator",
    "act_letter_at",
    "act_generator",
    "operator_for_letter",
    "apply_genword",
    "apply_genword_at",
    "nullspace",
    "shapovalov_gram",
    "p_elements",
    "dual_action_E",
    "dual_action_F",
    "singular_vectors",
    "space_to_json",
    "operator_to_json",
]


class SingularGram(Exception):
    """The contravariant Gram matrix is identically singular."""


# ---------------------------------------------------------------------------
# Module factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModuleSpec:
    """One tensor factor: a Verma module or the rank-one irreducible L_p."""

    kind: str  # "verma" | "lp"
    n_rank: int
    hw: WeightVec
    p: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("verma", "lp"):
            raise ValueError(f"unknown module kind {self.kind!r}")
        if self.kind == "lp" and (self.n_rank != 2 or self.p is None or self.p < 0):
            raise ValueError("the irreducible factor is rank-one with p >= 0")


def verma_symbolic(n_rank: int, j: int) -> ModuleSpec:
    """Verma factor number j with symbolic simple-root pairings L:j:k."""
    pairings = [symbol(f"L:{j}:{k}") for k in range(1, n_rank)]
    return ModuleSpec("verma", n_rank, weight_from_pairings(n_rank, pairings))


def verma_weight(n_rank: int, hw: WeightVec) -> ModuleSpec:
    return ModuleSpec("verma", n_rank, hw)


def lp_module(p: int) -> ModuleSpec:
    hw = weight_from_pairings(2, [rational(p)])
    return ModuleSpec("lp", 2, hw, p=p)


# ---------------------------------------------------------------------------
# Weight spaces
# ---------------------------------------------------------------------------

MultiIndex = tuple  # tuple over factors of per-factor exponent tuples


def _root_levels(root: tuple[int, int]) -> range:
    k, l = root
    return range(k, l)


def _factor_indices(basis: PBWBasis, nu0: tuple[int, ...], cap: Optional[int]):
    """All exponent tuples over basis.order with level sums <= nu0."""
    order = basis.order
    results: list[tuple[tuple[int, ...], tuple[int, ...]]] = []

    def rec(pos: int, remaining: tuple[int, ...], acc: tuple[int, ...]) -> None:
        if pos == len(order):
            results.append((acc, remaining))
            return
        k, l = order[pos]
        max_e = min(remaining[h - 1] for h in _root_levels((k, l)))
        if cap is not None:
            max_e = min(max_e, cap)
        for e in range(max_e + 1):
            rem = list(remaining)
            for h in _root_levels((k, l)):
                rem[h - 1] -= e
            rec(pos + 1, tuple(rem), acc + (e,))

    rec(0, nu0, ())
    return results


class TensorWeightSpace:
    """Monomial basis of the nu0-lowered subspace of a tensor product."""

    __slots__ = (
        "factors",
        "nu0",
        "pbw_basis",
        "basis",
        "index_position",
        "_engines",
        "_hash",
    )

    def __init__(
        self,
        factors: tuple[ModuleSpec, ...],
        nu0: tuple[int, ...],
        pbw_basis: PBWBasis,
        basis: tuple[MultiIndex, ...],
    ):
        self.factors = factors
        self.nu0 = nu0
        self.pbw_basis = pbw_basis
        self.basis = basis
        self.index_position = {index: i for i, index in enumerate(basis)}
        self._engines: dict[int, Straightener] = {}
        self._hash = hash((factors, nu0, pbw_basis))

    def __eq__(self, other):
        if not isinstance(other, TensorWeightSpace):
            return NotImplemented
        return (
            self.factors == other.factors
            and self.nu0 == other.nu0
            and self.pbw_basis == other.pbw_basis
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return (
            f"TensorWeightSpace(n={len(self.factors)}, nu0={self.nu0}, "
            f"dim={len(self.basis)}, order={self.pbw_basis.tag})"
        )

    @property
    def dim(self) -> int:
        return len(self.basis)

    def engine(self, j: int) -> Straightener:
        eng = self._engines.get(j)
        if eng is None:
            eng = Straightener(self.pbw_basis, self.factors[j].hw)
            self._engines[j] = eng
        return eng

    def total_highest_weight(self) -> WeightVec:
        total = self.factors[0].hw
        for f in self.factors[1:]:
            total = total + f.hw
        return total

    def shifted(self, level_shifts: Mapping[int, int]) -> "TensorWeightSpace":
        nu0 = list(self.nu0)
        for h, d in level_shifts.items():
            nu0[h - 1] += d
        if any(m < 0 for m in nu0):
            nu0 = [max(m, 0) for m in nu0]
            return TensorWeightSpace(self.factors, tuple(nu0), self.pbw_basis, ())
        return enumerate_basis(self.factors, tuple(nu0), self.pbw_basis)


@lru_cache(maxsize=None)
def _enumerate_cached(
    factors: tuple[ModuleSpec, ...], nu0: tuple[int, ...], pbw_basis: PBWBasis
) -> TensorWeightSpace:
    n_rank = pbw_basis.n_rank
    if len(nu0) != n_rank - 1 or any(m < 0 for m in nu0):
        raise ValueError("nu0 must list a non-negative depth per simple root")
    per_factor = [
        _factor_indices(pbw_basis, nu0, f.p if f.kind == "lp" else None)
        for f in factors
    ]

    indices: list[MultiIndex] = []

    def rec(j: int, remaining: tuple[int, ...], acc: tuple) -> None:
        if j == len(factors):
            if all(r == 0 for r in remaining):
                indices.append(acc)
            return
        for exps, rem in _choices(per_factor[j], remaining):
            rec(j + 1, rem, acc + (exps,))

    def _choices(options, remaining):
        for exps, used_rem in options:
            # options were computed against nu0; recompute feasibility.
            usage = [a - b for a, b in zip(nu0, used_rem)]
            if all(u <= r for u, r in zip(usage, remaining)):
                yield exps, tuple(r - u for r, u in zip(remaining, usage))

    rec(0, nu0, ())
    # Deterministic: lexicographic on the flattened exponent vector, factors
    # in order, roots by matrix-unit index (l, k) ascending within a factor.
    root_rank = sorted(
        range(len(pbw_basis.order)),
        key=lambda i: (pbw_basis.order[i][1], pbw_basis.order[i][0]),
    )

    def flat(index: MultiIndex):
        return tuple(exps[i] for exps in index for i in root_rank)

    indices.sort(key=flat)
    return TensorWeightSpace(factors, nu0, pbw_basis, tuple(indices))


def enumerate_basis(
    factors: Sequence[ModuleSpec],
    nu0: Sequence[int],
    pbw_basis: Optional[PBWBasis] = None,
) -> TensorWeightSpace:
    if pbw_basis is None:
        pbw_basis = standard_basis(factors[0].n_rank)
    return _enumerate_cached(tuple(factors), tuple(nu0), pbw_basis)


# ---------------------------------------------------------------------------
# Vectors and operators
# ---------------------------------------------------------------------------

class PBWVector:
    """A vector in one TensorWeightSpace, coefficients on monomial indices."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space: TensorWeightSpace, coeffs: Mapping[int, RationalFunctionExpr]):
        self.space = space
        self.coeffs = {i: c for i, c in coeffs.items() if not c.is_zero()}

    @staticmethod
    def basis_vector(space: TensorWeightSpace, position: int) -> "PBWVector":
        return PBWVector(space, {position: RF_ONE})

    @staticmethod
    def zero(space: TensorWeightSpace) -> "PBWVector":
        return PBWVector(space, {})

    def __add__(self, other: "PBWVector") -> "PBWVector":
        assert self.space == other.space
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out.get(i, RF_ZERO) + c
        return PBWVector(self.space, out)

    def __sub__(self, other: "PBWVector") -> "PBWVector":
        return self + other.scale(rational(-1))

    def scale(self, c) -> "PBWVector":
        if isinstance(c, (int, Fraction)):
            c = rational(c)
        return PBWVector(self.space, {i: v * c for i, v in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, PBWVector):
            return NotImplemented
        return self.space == other.space and self.coeffs == other.coeffs

    def __repr__(self):
        items = ", ".join(f"{i}: {c}" for i, c in sorted(self.coeffs.items()))
        return f"PBWVector({{{items}}} in {self.space!r})"


class WeightSpaceOperator:
    """Sparse exact matrix between two weight-space bases."""

    __slots__ = ("domain", "codomain", "entries")

    def __init__(self, domain, codomain, entries: Mapping[tuple[int, int], RationalFunctionExpr]):
        self.domain = domain
        self.codomain = codomain
        self.entries = {k: v for k, v in entries.items() if not v.is_zero()}

    @staticmethod
    def identity(space) -> "WeightSpaceOperator":
        return WeightSpaceOperator(
            space, space, {(i, i): RF_ONE for i in range(space.dim)}
        )

    @staticmethod
    def zero(domain, codomain) -> "WeightSpaceOperator":
        return WeightSpaceOperator(domain, codomain, {})

    def entry(self, i: int, j: int) -> RationalFunctionExpr:
        return self.entries.get((i, j), RF_ZERO)

    def apply(self, vec: PBWVector) -> PBWVector:
        assert vec.space == self.domain
        out: dict[int, RationalFunctionExpr] = {}
        for (i, j), m in self.entries.items():
            c = vec.coeffs.get(j)
            if c is not None:
                out[i] = out.get(i, RF_ZERO) + m * c
        return PBWVector(self.codomain, out)

    def compose(self, other: "WeightSpaceOperator") -> "WeightSpaceOperator":
        """self ∘ other (apply other first)."""
        assert other.codomain == self.domain
        by_col: dict[int, list[tuple[int, RationalFunctionExpr]]] = {}
        for (i, j), m in other.entries.items():
            by_col.setdefault(j, []).append((i, m))
        out: dict[tuple[int, int], RationalFunctionExpr] = {}
        # organize self by its domain index k: entries (i, k)
        self_by_k: dict[int, list[tuple[int, RationalFunctionExpr]]] = {}
        for (i, k), a in self.entries.items():
            self_by_k.setdefault(k, []).append((i, a))
        for j, col in by_col.items():
            for k, m in col:
                for i, a in self_by_k.get(k, ()):  # i <- k <- j
                    key = (i, j)
                    out[key] = out.get(key, RF_ZERO) + a * m
        return WeightSpaceOperator(other.domain, self.codomain, out)

    def __add__(self, other: "WeightSpaceOperator") -> "WeightSpaceOperator":
        assert self.domain == other.domain and self.codomain == other.codomain
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, RF_ZERO) + v
        return WeightSpaceOperator(self.domain, self.codomain, out)

    def __sub__(self, other: "WeightSpaceOperator") -> "WeightSpaceOperator":
        return self + other.scale(rational(-1))

    def scale(self, c) -> "WeightSpaceOperator":
        if isinstance(c, (int, Fraction)):
            c = rational(c)
        return WeightSpaceOperator(
            self.domain, self.codomain, {k: v * c for k, v in self.entries.items()}
        )

    def transpose(self) -> "WeightSpaceOperator":
        return WeightSpaceOperator(
            self.codomain, self.domain, {(j, i): v for (i, j), v in self.entries.items()}
        )

    def is_zero(self) -> bool:
        return not self.entries

    def dense(self) -> list[list[RationalFunctionExpr]]:
        rows = self.codomain.dim
        cols = self.domain.dim
        m = [[RF_ZERO] * cols for _ in range(rows)]
        for (i, j), v in self.entries.items():
            m[i][j] = v
        return m

    def __eq__(self, other):
        if not isinstance(other, WeightSpaceOperator):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.codomain == other.codomain
            and self.entries == other.entries
        )

    def invert(self) -> "WeightSpaceOperator":
        """Exact inverse via Gauss-Jordan over the expression field."""
        assert self.domain == self.codomain
        n = self.domain.dim
        a = self.dense()
        inv = [[RF_ONE if i == j else RF_ZERO for j in range(n)] for i in range(n)]
        for col in range(n):
            pivot = next(
                (r for r in range(col, n) if not a[r][col].is_zero()), None
            )
            if pivot is None:
                raise SingularGram("matrix is singular over the expression field")
            a[col], a[pivot] = a[pivot], a[col]
            inv[col], inv[pivot] = inv[pivot], inv[col]
            scale = a[col][col].reciprocal()
            a[col] = [x * scale for x in a[col]]
            inv[col] = [x * scale for x in inv[col]]
            for r in range(n):
                if r != col and not a[r][col].is_zero():
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                    inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
        entries = {
            (i, j): inv[i][j]
            for i in range(n)
            for j in range(n)
            if not inv[i][j].is_zero()
        }
        return WeightSpaceOperator(self.domain, self.codomain, entries)


# ---------------------------------------------------------------------------
# Generator actions
# ---------------------------------------------------------------------------

def _letter_level_shift(n_rank: int, letter: Letter) -> dict[int, int]:
    kind, a, b = letter
    if kind == "c":
        return {}
    if a > b:  # lowering e_{a,b}: adds alpha_b + ... + alpha_{a-1}
        return {h: 1 for h in range(b, a)}
    return {h: -1 for h in range(a, b)}


def _act_letter_on_index(
    space: TensorWeightSpace, letter: Letter, index: MultiIndex, only_factor=None
):
    """letter acting on F_index v, as {new multi-index: coefficient}."""
    out: dict[MultiIndex, RationalFunctionExpr] = {}
    sf = space.pbw_basis.signed_factor
    factors = range(len(space.factors)) if only_factor is None else [only_factor]
    for j in factors:
        factor = space.factors[j]
        exps_j = index[j]
        plain = space.engine(j).apply_letter(letter, exps_j)
        s_in = sf(exps_j)
        for new_exps, c in plain.items():
            if factor.kind == "lp" and new_exps[0] > factor.p:
                continue
            coeff = c * (s_in * sf(new_exps))
            new_index = index[:j] + (new_exps,) + index[j + 1 :]
            acc = out.get(new_index, RF_ZERO) + coeff
            out[new_index] = acc
    return {k: v for k, v in out.items() if not v.is_zero()}


def _target_space(space: TensorWeightSpace, letter: Letter) -> TensorWeightSpace:
    shift = _letter_level_shift(space.pbw_basis.n_rank, letter)
    if not shift:
        return space
    return space.shifted(shift)


def act_letter_at(
    space: TensorWeightSpace, letter: Letter, j: int, vec: PBWVector
) -> PBWVector:
    """Action of a letter on tensor factor j only (no Leibniz sum)."""
    assert vec.space == space
    target = _target_space(space, letter)
    out: dict[int, RationalFunctionExpr] = {}
    for pos, c in vec.coeffs.items():
        for new_index, m in _act_letter_on_index(
            space, letter, space.basis[pos], only_factor=j
        ).items():
            tpos = target.index_position.get(new_index)
            if tpos is None:
                if target.basis:
                    raise AssertionError(f"index {new_index} escaped target space")
                continue
            out[tpos] = out.get(tpos, RF_ZERO) + c * m
    return PBWVector(target, out)


def act_generator(space: TensorWeightSpace, letter: Letter, vec: PBWVector) -> PBWVector:
    """Tensor Leibniz action of one letter on a vector."""
    assert vec.space == space
    target = _target_space(space, letter)
    out: dict[int, RationalFunctionExpr] = {}
    for pos, c in vec.coeffs.items():
        for new_index, m in _act_letter_on_index(space, letter, space.basis[pos]).items():
            tpos = target.index_position.get(new_index)
            if tpos is None:
                if target.basis:
                    raise AssertionError(f"index {new_index} escaped target space")
                continue
            out[tpos] = out.get(tpos, RF_ZERO) + c * m
    return PBWVector(target, out)


def operator_for_letter(
    space: TensorWeightSpace, letter: Letter, only_factor=None
) -> WeightSpaceOperator:
    target = _target_space(space, letter)
    entries: dict[tuple[int, int], RationalFunctionExpr] = {}
    for col, index in enumerate(space.basis):
        for new_index, m in _act_letter_on_index(
            space, letter, index, only_factor=only_factor
        ).items():
            row = target.index_position.get(new_index)
            if row is None:
                if target.basis:
                    raise AssertionError(f"index {new_index} escaped target space")
                continue
            entries[(row, col)] = entries.get((row, col), RF_ZERO) + m
    return WeightSpaceOperator(space, target, entries)


def apply_genword(space: TensorWeightSpace, w: GenWord, vec: PBWVector) -> PBWVector:
    """Apply a word of letters (rightmost first, Leibniz per letter)."""
    out = vec.scale(w.coeff)
    for letter in reversed(w.letters):
        out = act_generator(out.space, letter, out)
    return out


def apply_genword_at(
    space: TensorWeightSpace, w: GenWord, j: int, vec: PBWVector
) -> PBWVector:
    """Apply a word of letters to tensor factor j only."""
    out = vec.scale(w.coeff)
    for letter in reversed(w.letters):
        out = act_letter_at(out.space, letter, j, out)
    return out


# ---------------------------------------------------------------------------
# Contravariant form and inverse elements
# ---------------------------------------------------------------------------

def shapovalov_gram(space: TensorWeightSpace) -> WeightSpaceOperator:
    """Gram matrix S(F_I v, F_J v) for a single Verma factor."""
    if len(space.factors) != 1 or space.factors[0].kind != "verma":
        raise ValueError("the contravariant Gram matrix needs one Verma factor")
    basis = space.pbw_basis
    engine = space.engine(0)
    entries: dict[tuple[int, int], RationalFunctionExpr] = {}
    zero = basis.zero_exps()
    for i, index_i in enumerate(space.basis):
        # S(F_I v, F_J v) = coefficient of v in (A∘tau)(F_I) F_J v.
        adj = antipode_A(chevalley_tau(monomial_word(basis, index_i[0])))
        for j, index_j in enumerate(space.basis):
            if j < i and (j, i) in entries:
                entries[(i, j)] = entries[(j, i)]
                continue
            exps_j = index_j[0]
            state = engine.apply_word(
                adj.letters,
                {exps_j: adj.coeff * basis.signed_factor(exps_j)},
            )
            val = state.get(zero)
            if val is not None and not val.is_zero():
                entries[(i, j)] = val
    return WeightSpaceOperator(space, space, entries)


def p_elements(space: TensorWeightSpace) -> dict[MultiIndex, UEAElement]:
    """Inverse-form elements: P_I with S(P_I v, F_J v) = delta_{IJ}."""
    gram = shapovalov_gram(space)
    inv = gram.invert()
    out: dict[MultiIndex, UEAElement] = {}
    for col, index in enumerate(space.basis):
        terms = {
            space.basis[row][0]: inv.entry(row, col) for row in range(space.dim)
        }
        out[index] = UEAElement(space.pbw_basis, terms)
    return out


# ---------------------------------------------------------------------------
# Dual-basis actions
# ---------------------------------------------------------------------------

def _simple_pairing(hw: WeightVec, h: int) -> RationalFunctionExpr:
    return hw.eps[h - 1] - hw.eps[h]


def dual_action_E(
    space: TensorWeightSpace, index: MultiIndex, h: int
) -> dict[MultiIndex, RationalFunctionExpr]:
    """Closed form for E_{alpha_h} on the dual vector (F_index v)^*.

    Valid in the standard arrangement.  Output indices live in the space with
    one extra lowering at level h; the convention pairs with the minus-
    transpose of the vector action (see tests).
    """
    basis = space.pbw_basis
    n_rank = basis.n_rank
    pos = basis.position
    out: dict[MultiIndex, RationalFunctionExpr] = {}

    def bump(idx: MultiIndex, j: int, add, sub=None) -> MultiIndex:
        exps = list(idx[j])
        exps[pos[add]] += 1
        if sub is not None:
            exps[pos[sub]] -= 1
        return idx[:j] + (tuple(exps),) + idx[j + 1 :]

    for j, factor in enumerate(space.factors):
        exps = index[j]

        def count(root) -> int:
            return exps[pos[root]]

        # moves (h+1, p) -> (h, p) for p > h+1
        for p in range(h + 2, n_rank + 1):
            c = count((h + 1, p))
            if c:
                key = bump(index, j, (h, p), (h + 1, p))
                out[key] = out.get(key, RF_ZERO) + rational(c)
        # moves (p, h) -> (p, h+1) for p < h, with minus sign
        for p in range(1, h):
            c = count((p, h))
            if c:
                key = bump(index, j, (p, h + 1), (p, h))
                out[key] = out.get(key, RF_ZERO) + rational(-c)
        # diagonal-ish term adding a factor at the simple root (h, h+1)
        scalar = _simple_pairing(factor.hw, h)
        scalar = scalar + sum(count((p, h)) for p in range(1, h))
        scalar = scalar - sum(count((p, h + 1)) for p in range(1, h + 1))
        if not scalar.is_zero():
            key = bump(index, j, (h, h + 1))
            out[key] = out.get(key, RF_ZERO) + scalar
    return {k: v for k, v in out.items() if not v.is_zero()}


def dual_action_F(
    space: TensorWeightSpace, index: MultiIndex, h: int, root: tuple[int, int]
) -> dict[MultiIndex, RationalFunctionExpr]:
    """Closed form for the flavored lowering vector on (F_index v)^*.

    Only the straddling roots k <= h < l admit this one-term form (they are
    the top block of the level-h arrangement, so the lowering vector absorbs
    without corrections); the space must carry the level-h arrangement.
    """
    basis = space.pbw_basis
    if not root[0] <= h < root[1]:
        raise ValueError("the one-term dual lowering rule needs k <= h < l")
    pos = basis.position[root]
    out: dict[MultiIndex, RationalFunctionExpr] = {}
    for j in range(len(space.factors)):
        c = index[j][pos]
        if c:
            exps = list(index[j])
            exps[pos] -= 1
            key = index[:j] + (tuple(exps),) + index[j + 1 :]
            out[key] = out.get(key, RF_ZERO) + rational(c)
    return out


# ---------------------------------------------------------------------------
# Singular vectors
# ---------------------------------------------------------------------------

def nullspace(rows: list[dict[int, RationalFunctionExpr]], dim: int) -> list[dict[int, RationalFunctionExpr]]:
    """Exact nullspace of a stacked sparse system over the expression field."""
    # Dense Gaussian elimination: rows are functionals on R^dim.
    mat = [[row.get(j, RF_ZERO) for j in range(dim)] for row in rows]
    pivots: list[int] = []
    r = 0
    for col in range(dim):
        pivot = next((i for i in range(r, len(mat)) if not mat[i][col].is_zero()), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        scale = mat[r][col].reciprocal()
        mat[r] = [x * scale for x in mat[r]]
        for i in range(len(mat)):
            if i != r and not mat[i][col].is_zero():
                f = mat[i][col]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(dim) if c not in pivots]
    out = []
    for fc in free:
        vec = {fc: RF_ONE}
        for prow, pcol in enumerate(pivots):
            v = mat[prow][fc]
            if not v.is_zero():
                vec[pcol] = RF_ZERO - v
        out.append(vec)
    return out


def singular_vectors(space: TensorWeightSpace) -> list[PBWVector]:
    """Basis of the joint kernel of the simple raising operators."""
    n_rank = space.pbw_basis.n_rank
    rows: list[dict[int, RationalFunctionExpr]] = []
    for h in range(1, n_rank):
        op = operator_for_letter(space, ("e", h, h + 1))
        by_row: dict[int, dict[int, RationalFunctionExpr]] = {}
        for (i, j), v in op.entries.items():
            by_row.setdefault(i, {})[j] = v
        rows.extend(by_row.values())
    return [PBWVector(space, coeffs) for coeffs in nullspace(rows, space.dim)]


# ---------------------------------------------------------------------------
# JSON dumps
# ---------------------------------------------------------------------------

def space_to_json(space: TensorWeightSpace) -> dict:
    return {
        "n_rank": space.pbw_basis.n_rank,
        "order": [list(r) for r in space.pbw_basis.order],
        "order_tag": space.pbw_basis.tag,
        "nu0": list(space.nu0),
        "factors": [
            {"kind": f.kind, "p": f.p, "hw_eps": [str(e) for e in f.hw.eps]}
            for f in space.factors
        ],
        "basis": [
            [list(exps) for exps in index] for index in space.basis
        ],
    }


def operator_to_json(op: WeightSpaceOperator) -> dict:
    return {
        "domain_dim": op.domain.dim,
        "codomain_dim": op.codomain.dim,
        "entries": {
            f"{i},{j}": str(v) for (i, j), v in sorted(op.entries.items())
        },
    }

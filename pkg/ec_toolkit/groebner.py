# groebner.py
"""Buchberger's algorithm with the normal selection strategy.

Provides reduced Gröbner bases, normal forms and ideal membership,
elimination ideals via block orders, and Krull dimension from the leading
monomials. Every reduction step is counted against a budget so that a
blow-up is reported as ResourceLimit instead of hanging.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .constants import DEFAULT_STEP_BUDGET, MAX_DIMENSION_VARIABLES
from .errors import RegistryMismatch, ResourceLimit
from .polynomials import GREVLEX, Exps, MonomialOrder, MPoly, VariableRegistry

logger = logging.getLogger(__name__)


class _Budget:
    """Counts reduction steps and raises ResourceLimit past the cap."""

    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def step(self):
        self.used += 1
        if self.used > self.limit:
            raise ResourceLimit(f"Groebner step budget of {self.limit} reduction steps exhausted")


@dataclass(frozen=True)
class GroebnerBasis:
    """A Gröbner basis of an ideal for one monomial order.

    Attributes:
        registry (VariableRegistry): Variables of the ambient ring.
        order (MonomialOrder): The order the basis is Gröbner for.
        generators (Tuple[MPoly, ...]): Monic basis elements, sorted by leading monomial.
        reduced (bool): True when this is the unique reduced basis.
    """
    registry: VariableRegistry
    order: MonomialOrder
    generators: Tuple[MPoly, ...]
    reduced: bool = True

    def is_unit(self) -> bool:
        return any(g.is_constant() and not g.is_zero() for g in self.generators)

    def is_zero_ideal(self) -> bool:
        return not self.generators

    def leading_monomials(self) -> List[Exps]:
        return [g.lm() for g in self.generators]

    def normal_form(self, f: MPoly, step_budget: int = DEFAULT_STEP_BUDGET) -> MPoly:
        return normal_form(f, self, step_budget)

    def contains(self, f: MPoly) -> bool:
        return normal_form(f, self).is_zero()

    def __len__(self) -> int:
        return len(self.generators)


# --- Reduction ---

def _divides(a: Exps, b: Exps) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: Exps, b: Exps) -> Exps:
    return tuple(max(x, y) for x, y in zip(a, b))


def _reduce_terms(terms: Dict[Exps, Fraction], basis: Sequence[Tuple[Exps, Fraction, Dict[Exps, Fraction]]],
                  key, budget: _Budget) -> Dict[Exps, Fraction]:
    """Full reduction of a term dict by (lm, lc, terms) triples; returns the remainder."""
    p = dict(terms)
    remainder: Dict[Exps, Fraction] = {}
    while p:
        lead = max(p, key=key)
        c = p[lead]
        for glm, glc, gterms in basis:
            if _divides(glm, lead):
                budget.step()
                factor = c / glc
                shift = tuple(x - y for x, y in zip(lead, glm))
                for e, gc in gterms.items():
                    m = tuple(x + y for x, y in zip(e, shift))
                    s = p.get(m, 0) - factor * gc
                    if s:
                        p[m] = s
                    else:
                        p.pop(m, None)
                break
        else:
            remainder[lead] = c
            del p[lead]
    return remainder


def _triples(polys: Iterable[MPoly]) -> List[Tuple[Exps, Fraction, Dict[Exps, Fraction]]]:
    out = []
    for g in polys:
        lm, lc = g.leading_term()
        out.append((lm, lc, g.term_dict()))
    return out


def _monic(poly: MPoly) -> MPoly:
    return poly.scale(Fraction(1) / poly.lc())


def normal_form(f: MPoly, basis: "GroebnerBasis", step_budget: int = DEFAULT_STEP_BUDGET) -> MPoly:
    """The unique remainder of f modulo a Gröbner basis."""
    if f.registry != basis.registry:
        raise RegistryMismatch(f"normal form across registries: {f.registry.names} vs {basis.registry.names}")
    f = f.with_order(basis.order)
    if f.is_zero() or not basis.generators:
        return f
    rem = _reduce_terms(f.term_dict(), _triples(basis.generators), basis.order.key, _Budget(step_budget))
    return MPoly._raw(basis.registry, rem, basis.order)


# --- Buchberger ---

def _s_polynomial(f: MPoly, g: MPoly) -> Dict[Exps, Fraction]:
    lf, cf = f.leading_term()
    lg, cg = g.leading_term()
    l = _lcm(lf, lg)
    a = f.mul_term(tuple(x - y for x, y in zip(l, lf)), Fraction(1) / cf)
    b = g.mul_term(tuple(x - y for x, y in zip(l, lg)), Fraction(1) / cg)
    return (a - b).term_dict()


def _interreduce(basis: List[MPoly], order: MonomialOrder, budget: _Budget) -> List[MPoly]:
    """Minimal then reduced basis: drop redundant leading monomials, reduce tails, make monic."""
    key = order.key
    basis = sorted(basis, key=lambda g: key(g.lm()))
    minimal: List[MPoly] = []
    # ascending order: any divisor of a leading monomial is met before it
    for g in basis:
        if not any(_divides(h.lm(), g.lm()) for h in minimal):
            minimal.append(g)
    reduced = []
    for g in minimal:
        others = _triples(h for h in minimal if h is not g)
        lm, lc = g.leading_term()
        tail = g.term_dict()
        del tail[lm]
        rem = _reduce_terms(tail, others, key, budget)
        rem[lm] = lc
        reduced.append(_monic(MPoly._raw(g.registry, rem, order)))
    return sorted(reduced, key=lambda g: key(g.lm()))


@lru_cache(maxsize=256)
def _buchberger_cached(gens: Tuple[MPoly, ...], order: MonomialOrder, step_budget: int) -> GroebnerBasis:
    registry = gens[0].registry
    key = order.key
    budget = _Budget(step_budget)
    basis: List[MPoly] = []
    for g in gens:
        g = g.with_order(order)
        if not g.is_zero():
            basis.append(_monic(g))
    if any(g.is_constant() for g in basis):
        return GroebnerBasis(registry, order, (MPoly.one(registry, order),), True)
    if not basis:
        return GroebnerBasis(registry, order, (), True)

    pairs: Set[Tuple[int, int]] = {(i, k) for i in range(len(basis)) for k in range(i + 1, len(basis))}
    considered = 0
    while pairs:
        i, k = min(pairs, key=lambda p: (key(_lcm(basis[p[0]].lm(), basis[p[1]].lm())), p))
        pairs.discard((i, k))
        li, lk = basis[i].lm(), basis[k].lm()
        l = _lcm(li, lk)
        if all(x == 0 or y == 0 for x, y in zip(li, lk)):
            continue  # coprime leading monomials
        if any(
            m not in (i, k) and _divides(basis[m].lm(), l)
            and (min(i, m), max(i, m)) not in pairs and (min(k, m), max(k, m)) not in pairs
            for m in range(len(basis))
        ):
            continue  # chain criterion
        considered += 1
        rem = _reduce_terms(_s_polynomial(basis[i], basis[k]), _triples(basis), key, budget)
        if not rem:
            continue
        new = _monic(MPoly._raw(registry, rem, order))
        if new.is_constant():
            logger.debug("Buchberger reached the unit ideal")
            return GroebnerBasis(registry, order, (MPoly.one(registry, order),), True)
        basis.append(new)
        idx = len(basis) - 1
        pairs.update((m, idx) for m in range(idx))
    result = _interreduce(basis, order, budget)
    logger.debug(f"Buchberger: {considered} S-polynomials reduced, {len(result)} basis elements, "
                 f"{budget.used} reduction steps")
    return GroebnerBasis(registry, order, tuple(result), True)


def buchberger(gens: Sequence[MPoly], order: MonomialOrder = GREVLEX,
               step_budget: int = DEFAULT_STEP_BUDGET) -> GroebnerBasis:
    """Computes the reduced Gröbner basis of the ideal generated by `gens`.

    Args:
        gens: Generators over one registry. An empty list means the zero ideal
            and needs `registry`-carrying callers to use `zero_ideal` instead.
        order: Monomial order of the result.
        step_budget: Maximum number of single reduction steps.

    Returns:
        GroebnerBasis: Reduced, with monic elements sorted by leading monomial.

    Raises:
        ResourceLimit: If the step budget is exhausted.
        RegistryMismatch: If the generators disagree on the registry.
    """
    if not gens:
        raise ValueError("buchberger needs at least one generator; use zero_ideal for the zero ideal")
    registry = gens[0].registry
    for g in gens[1:]:
        if g.registry != registry:
            raise RegistryMismatch("generators over different registries")
    return _buchberger_cached(tuple(gens), order, step_budget)


def zero_ideal(registry: VariableRegistry, order: MonomialOrder = GREVLEX) -> GroebnerBasis:
    return GroebnerBasis(registry, order, (), True)


def groebner_of(registry: VariableRegistry, gens: Sequence[MPoly], order: MonomialOrder = GREVLEX,
                step_budget: int = DEFAULT_STEP_BUDGET) -> GroebnerBasis:
    """Like `buchberger` but accepts an empty generator list."""
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        return zero_ideal(registry, order)
    return buchberger(gens, order, step_budget)


def is_groebner_basis(basis: GroebnerBasis, step_budget: int = DEFAULT_STEP_BUDGET) -> bool:
    """Checks Buchberger's criterion: every S-polynomial reduces to zero."""
    triples = _triples(basis.generators)
    budget = _Budget(step_budget)
    for f, g in combinations(basis.generators, 2):
        if _reduce_terms(_s_polynomial(f, g), triples, basis.order.key, budget):
            return False
    return True


# --- Membership, elimination, dimension ---

def ideal_membership(f: MPoly, basis: GroebnerBasis) -> Tuple[bool, MPoly]:
    """Returns (f in I, normal form of f)."""
    nf = normal_form(f, basis)
    return nf.is_zero(), nf


def elimination_ideal(basis: GroebnerBasis, keep: Iterable[str],
                      step_budget: int = DEFAULT_STEP_BUDGET) -> GroebnerBasis:
    """Basis of I ∩ Q[keep], computed with a block order eliminating the complement.

    The result lives over the same registry; its elements only involve the
    kept variables and form a reduced grevlex basis in them.
    """
    registry = basis.registry
    keep_idx = frozenset(registry.index(n) for n in keep)
    drop = frozenset(range(len(registry))) - keep_idx
    if basis.is_zero_ideal():
        return zero_ideal(registry)
    if not drop:
        gens = basis.generators if basis.order == GREVLEX else buchberger(basis.generators, GREVLEX, step_budget).generators
        return GroebnerBasis(registry, GREVLEX, tuple(gens), True)
    block = MonomialOrder.block(drop)
    full = basis if basis.order == block else buchberger(basis.generators, block, step_budget)
    kept = [g.with_order(GREVLEX) for g in full.generators if not (g.used_indices() & drop)]
    kept.sort(key=lambda g: GREVLEX.key(g.lm()))
    logger.debug(f"elimination onto {sorted(keep_idx)}: {len(kept)} of {len(full)} basis elements survive")
    return GroebnerBasis(registry, GREVLEX, tuple(kept), True)


def _independent(subset: FrozenSet[int], leading: Sequence[Exps]) -> bool:
    # a set S is independent when no leading monomial is supported inside S
    for lm in leading:
        if all(e == 0 or i in subset for i, e in enumerate(lm)):
            return False
    return True


def ideal_dimension(basis: GroebnerBasis, nvars: Optional[int] = None,
                    variables: Optional[Iterable[str]] = None) -> int:
    """Krull dimension of Q[variables]/I from a maximal independent variable set.

    Args:
        basis: Gröbner basis (any order).
        nvars: Optional consistency check against the registry size.
        variables: Restrict to these variables (for elimination ideals whose
            elements only involve them); defaults to the whole registry.

    Returns:
        int: The dimension, or -1 for the unit ideal.
    """
    registry = basis.registry
    if nvars is not None and nvars != len(registry):
        raise ValueError(f"nvars={nvars} does not match the registry of {len(registry)} variables")
    if basis.is_unit():
        return -1
    idx = sorted(registry.index(n) for n in variables) if variables is not None else list(range(len(registry)))
    if len(idx) > MAX_DIMENSION_VARIABLES:
        logger.warning(f"dimension search over {len(idx)} variables; this is exponential")
    leading = basis.leading_monomials()
    for size in range(len(idx), -1, -1):
        for subset in combinations(idx, size):
            if _independent(frozenset(subset), leading):
                return size
    return 0


# Comments:
# - Bases are cached per (generators, order, budget); MPoly values are immutable so sharing is safe.
# - The chain criterion only skips a pair when both companion pairs were already treated.

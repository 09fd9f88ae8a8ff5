"""Exact probability bounds for MAST of exchangeable random trees.

Everything that is compared is computed with :class:`fractions.Fraction`;
floats appear only when a value is reported.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations

from .mast import mast_size
from .random_trees import SameShape, TreeModel, Uniform, Yule
from .tree_core import ENUMERATION_LIMIT, Tree, enumerate_trees, parse_newick, relabel, restrict, shape_code

#: e * sqrt(2) = 3.8442310..., truncated; lambda must exceed it strictly
LAMBDA_THRESHOLD = 3.844231
ONE_MINUS_INV_E = 1.0 - math.exp(-1.0)


class BoundsError(ValueError):
    pass


def double_factorial(m: int) -> int:
    """``m * (m - 2) * ...`` with ``(-1)!! = 0!! = 1``."""
    if m < -1:
        raise BoundsError(f"double factorial undefined for {m}")
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def tree_count(n: int) -> int:
    """|RB(n)| = (2n - 3)!!"""
    return double_factorial(2 * n - 3)


def phi(n: int, s: int) -> Fraction:
    """``C(n, s) * 2**(s - 1) / s!``"""
    if not 1 <= s <= n:
        raise BoundsError(f"need 1 <= s <= n, got n={n}, s={s}")
    return Fraction(math.comb(n, s) * 2 ** (s - 1), math.factorial(s))


# -- exact model distributions -------------------------------------------------

def _check_enumerable(n: int):
    if n > ENUMERATION_LIMIT:
        raise BoundsError(f"n={n} exceeds the enumeration limit {ENUMERATION_LIMIT}")


def yule_probability(t: Tree) -> Fraction:
    """Probability of the labeled tree ``t`` under the Yule-Harding model.

    ``2**(n-1) / n!`` times ``1 / (size(v) - 1)`` over internal vertices v.
    """
    n = t.leaf_count
    p = Fraction(2 ** (n - 1), math.factorial(n))
    sizes = t.sizes
    for v in range(t.node_count):
        if t.left[v] != -1:
            p /= sizes[v] - 1
    return p


@lru_cache(maxsize=128)
def model_distribution(model: TreeModel) -> dict[Tree, Fraction]:
    """Exact probability of every tree in the support of ``model``."""
    _check_enumerable(model.n)
    if isinstance(model, Uniform):
        p = Fraction(1, tree_count(model.n))
        return {t: p for t in enumerate_trees(model.n)}
    if isinstance(model, Yule):
        return {t: yule_probability(t) for t in enumerate_trees(model.n)}
    if isinstance(model, SameShape):
        base = model.base
        values = sorted(base.labels)
        weight = Fraction(1, math.factorial(len(values)))
        out: dict[Tree, Fraction] = defaultdict(Fraction)
        for perm in permutations(values):
            out[relabel(base, dict(zip(values, perm)))] += weight
        return dict(out)
    raise TypeError(f"unknown tree model {model!r}")


@dataclass(frozen=True)
class InducedMarginal:
    """Distribution of ``T|{1..s}``, keyed by canonical Newick string."""

    s: int
    probabilities: dict[str, Fraction]

    def total(self) -> Fraction:
        return sum(self.probabilities.values(), Fraction(0))

    def sum_of_squares(self) -> Fraction:
        return sum((p * p for p in self.probabilities.values()), Fraction(0))


def induced_marginal(model: TreeModel, s: int) -> InducedMarginal:
    n = model.n
    if not 1 <= s < n:
        raise BoundsError(f"need 1 <= s < n, got n={n}, s={s}")
    keep = range(1, s + 1)
    out: dict[str, Fraction] = defaultdict(Fraction)
    for t, p in model_distribution(model).items():
        out[restrict(t, keep).newick] += p
    return InducedMarginal(s, dict(out))


def check_exchangeable(m: InducedMarginal) -> bool:
    """True iff every tree of RB(s) sharing a shape carries the same mass."""
    per_shape: dict[bytes, set[Fraction]] = defaultdict(set)
    universe = {t.newick: t for t in enumerate_trees(m.s)}
    if not set(m.probabilities) <= set(universe):
        return False
    for key, t in universe.items():
        per_shape[shape_code(t)].add(m.probabilities.get(key, Fraction(0)))
    return all(len(values) == 1 for values in per_shape.values())


def psi(n: int, m: InducedMarginal) -> Fraction:
    """``C(n, s) * sum_t P_s[t]**2``"""
    if m.s > n:
        raise BoundsError(f"marginal size {m.s} exceeds n={n}")
    return math.comb(n, m.s) * m.sum_of_squares()


def prop42_bound(s: int) -> Fraction:
    return Fraction(2 ** (s - 1), math.factorial(s))


def check_prop42(m: InducedMarginal) -> bool:
    """``sum_t P_s[t]**2 <= 2**(s-1) / s!`` for an exchangeable marginal."""
    if not check_exchangeable(m):
        raise BoundsError("marginal is not exchangeable")
    return m.sum_of_squares() <= prop42_bound(m.s)


# -- the birthday bound and headline bounds ----------------------------------

def birthday_bound(n: int, s1: int, s2: int) -> tuple[Fraction, float]:
    """Probability that random subsets of sizes s1, s2 of [n] are disjoint,
    alongside the ``1 - 1/e`` floor on their intersection probability."""
    if not (0 <= s1 <= n and 0 <= s2 <= n):
        raise BoundsError(f"subset sizes must lie in [0, {n}]")
    disjoint = Fraction(math.comb(n - s1, s2), math.comb(n, s2))
    return disjoint, ONE_MINUS_INV_E


def mast_lower_bound(n: int) -> float:
    return math.sqrt(n) * ONE_MINUS_INV_E / 4


def mast_upper_bound(n: int, lam: float) -> float:
    if not lam > LAMBDA_THRESHOLD:
        raise BoundsError(f"lambda={lam} must exceed e*sqrt(2) ~ {LAMBDA_THRESHOLD}")
    return lam * math.sqrt(n)


def min_s_for_tail(n: int, eps: float) -> int | None:
    """Smallest s in [1, n] with phi(n, s) < eps, or None."""
    if eps <= 0:
        raise BoundsError("eps must be positive")
    eps = Fraction(eps)
    for s in range(1, n + 1):
        if phi(n, s) < eps:
            return s
    return None


# -- exact MAST tail by enumeration -----------------------------------------

def _orbit_representatives(dist: dict[Tree, Fraction]) -> list[tuple[Tree, Fraction]]:
    reps: dict[bytes, list] = {}
    for t, p in dist.items():
        code = shape_code(t)
        if code in reps:
            reps[code][1] += p
        else:
            reps[code] = [t, p]
    return [(t, p) for t, p in reps.values()]


@lru_cache(maxsize=64)
def exact_mast_distribution(model: TreeModel) -> dict[int, Fraction]:
    """Exact law of MAST(T1, T2) for independent T1, T2 drawn from ``model``.

    Relies on exchangeability: simultaneous relabeling preserves both the
    pair law and MAST, so T1 can be fixed to one tree per shape weighted by
    the shape's total mass.
    """
    dist = model_distribution(model)
    law: dict[int, Fraction] = defaultdict(Fraction)
    for rep, weight in _orbit_representatives(dist):
        for t2, p2 in dist.items():
            law[mast_size(rep, t2)] += weight * p2
    return dict(sorted(law.items()))


def exhaustive_mast_tail(model: TreeModel, s: int) -> Fraction:
    """Exact ``P[MAST(T1, T2) >= s]``."""
    if s > model.n:
        raise BoundsError(f"s={s} exceeds n={model.n}")
    law = exact_mast_distribution(model)
    return sum((p for size, p in law.items() if size >= s), Fraction(0))


def exact_mast_mean(model: TreeModel) -> Fraction:
    return sum((size * p for size, p in exact_mast_distribution(model).items()), Fraction(0))


@dataclass(frozen=True)
class BoundReport:
    n: int
    s: int
    phi: Fraction
    psi: Fraction | None
    lower: float
    upper_lambda: float

    FIELDS = ("n", "s", "phi", "psi", "lower", "upper_lambda")

    def row(self) -> list[str]:
        psi = "" if self.psi is None else repr(float(self.psi))
        return [str(self.n), str(self.s), repr(float(self.phi)), psi,
                repr(self.lower), repr(self.upper_lambda)]


def bound_report(n: int, s: int, lam: float = 4.0, psi_model: str | None = None) -> BoundReport:
    """Bounds at (n, s); ``psi_model="uniform"`` adds psi for the uniform
    model, whose induced marginal is uniform on RB(s)."""
    value = None
    if psi_model == "uniform":
        value = Fraction(math.comb(n, s), tree_count(s))
    elif psi_model is not None:
        raise BoundsError(f"unknown psi model {psi_model!r}")
    return BoundReport(n, s, phi(n, s), value, mast_lower_bound(n), mast_upper_bound(n, lam))


def marginal_from_trees(s: int, weights: dict[str, Fraction]) -> InducedMarginal:
    """Build a marginal from Newick keys, canonicalizing each key."""
    out: dict[str, Fraction] = defaultdict(Fraction)
    for key, p in weights.items():
        out[parse_newick(key).newick] += Fraction(p)
    return InducedMarginal(s, dict(out))


def sweep_models(n: int) -> list[TreeModel]:
    """Uniform(n), Yule(n) and one same-shape model per shape of RB(n)."""
    shapes: dict[bytes, Tree] = {}
    for t in enumerate_trees(n):
        shapes.setdefault(shape_code(t), t)
    return [Uniform(n), Yule(n)] + [SameShape(t) for t in shapes.values()]


def exact_sweep(max_n: int = 6) -> tuple[int, list[str]]:
    """Check every exact claim for each model with n <= max_n and s < n.

    Returns the number of checks run and a description of each violation:
    marginal mass 1, exchangeability, the sum-of-squares bound, the MAST
    tail against psi, and psi against phi.
    """
    checks = 0
    violations = []
    for n in range(2, max_n + 1):
        for model in sweep_models(n):
            for s in range(1, n):
                m = induced_marginal(model, s)
                tail = exhaustive_mast_tail(model, s)
                value = psi(n, m)
                exchangeable = check_exchangeable(m)
                results = {
                    "marginal sums to 1": m.total() == 1,
                    "exchangeable": exchangeable,
                    "sum of squares <= 2^(s-1)/s!": exchangeable and m.sum_of_squares() <= prop42_bound(s),
                    "tail <= psi": tail <= value,
                    "psi <= phi": value <= phi(n, s),
                }
                checks += len(results)
                for name, ok in results.items():
                    if not ok:
                        violations.append(f"{model!r} n={n} s={s}: {name}")
    return checks, violations

"""Named instances: the manipulation example, the matching lower bound, and
degenerate cases.  Each fixture is an (instance, true edge set) pair."""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .core import EdgeSet, Instance, Variant, as_rational


class Fixture(NamedTuple):
    name: str
    instance: Instance
    edges: EdgeSet


def intro_instance(eps="1/4") -> Fixture:
    """Jobs a1, a2 and machines b1, b2.

    a1 has edges worth 1+eps to b1 and 1 to b2; a2 has one edge, worth 1,
    to b1.  The public value of the absent pair (a2, b2) is set to 1.
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    inst = Instance.create([[1 + eps, 1], [1, 1]], [[1, 1], [1, 1]], [1, 1], Variant.MWBM)
    return Fixture(f"intro({eps})", inst, EdgeSet.of(inst, [(0, 0), (0, 1), (1, 0)]))


def _fig2_instance(gamma: Fraction) -> Instance:
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    # Machine 0 is "a", machine 1 is "b"; both jobs prefer a.
    return Instance.create([[gamma, 1], [gamma, 1]], [[1, 1], [1, 1]], [1, 1], Variant.MWBM)


def fig2_a(gamma=2) -> Fixture:
    gamma = as_rational(gamma)
    inst = _fig2_instance(gamma)
    return Fixture(f"fig2_a({gamma})", inst, EdgeSet.full(2, 2))


def fig2_b(gamma=2) -> Fixture:
    """``fig2_a`` with job 2's edge to machine b withdrawn."""
    gamma = as_rational(gamma)
    inst = _fig2_instance(gamma)
    return Fixture(f"fig2_b({gamma})", inst, EdgeSet.of(inst, [(0, 0), (0, 1), (1, 0)]))


def tight_greedy(eps="1/8") -> Fixture:
    """Greedy matching takes the 1+eps edge and blocks the two unit edges;
    the welfare ratio tends to 2 as eps -> 0."""
    fx = intro_instance(eps)
    return Fixture(f"tight_greedy({as_rational(eps)})", fx.instance, fx.edges)


def single() -> Fixture:
    inst = Instance.create([[1]], [[1]], [1], Variant.MBM)
    return Fixture("single", inst, EdgeSet.full(1, 1))


def empty(n: int = 2, m: int = 2) -> Fixture:
    inst = Instance.create([[1] * m for _ in range(n)], [[1] * m for _ in range(n)], [1] * m, Variant.MBM)
    return Fixture(f"empty({n}x{m})", inst, EdgeSet.empty(n, m))


def fixtures() -> dict[str, Fixture]:
    """The default parameterization of every fixture, by name."""
    return {
        "intro": intro_instance(),
        "fig2_a": fig2_a(),
        "fig2_b": fig2_b(),
        "tight_greedy": tight_greedy(),
        "single": single(),
        "empty": empty(),
    }

"""Standard example groupoids, bundles and actions.

Used by the test suite, the fuzz commands and the benchmarks.  Everything
here is deterministic.
"""

from __future__ import annotations

import numpy as np

from . import actions as act
from .bundle import FellBundle, MatrixModelBundle, UnitFiberAlgebra
from .groupoid import (FiniteGroupoid, PartialActionOnSet, cyclic_group,
                       global_action_on_set, group_from_table, klein_four,
                       pair_groupoid, transformation_groupoid, trivial_group)

Array = np.ndarray


def trivial_line_bundle(G: FiniteGroupoid, name: str = "trivial line") -> FellBundle:
    fibers = {g: [np.ones((1, 1), dtype=np.complex128)] for g in G.arrows}
    return MatrixModelBundle(G, fibers).to_fell_bundle(name=name)


def matrix_bundle_over_point(n: int) -> FellBundle:
    G = trivial_group()
    basis = UnitFiberAlgebra.full_matrix_algebra(n).basis
    return MatrixModelBundle(G, {"e": list(basis)}).to_fell_bundle(name=f"M_{n} over point")


def z2_line_bundle() -> FellBundle:
    return trivial_line_bundle(cyclic_group(2), name="Z/2 line")


def klein_cocycle(g: str, h: str) -> complex:
    """(-1)^{bc} on bit pairs (a,b),(c,d); elements named e/g01/g10/g11."""
    bits = {"e": (0, 0), "g01": (0, 1), "g10": (1, 0), "g11": (1, 1)}
    return complex((-1) ** (bits[g][1] * bits[h][0]))


def klein_twisted_bundle() -> FellBundle:
    G = klein_four()
    return act.line_bundle_from_cocycle(
        G, {(g, h): klein_cocycle(g, h) for g in G.arrows for h in G.arrows},
        name="Klein-four twisted line")


def klein_trivial_bundle() -> FellBundle:
    return trivial_line_bundle(klein_four(), name="Klein-four trivial line")


def pair_line_bundle(k: int = 2) -> FellBundle:
    objs = [f"x{i}" for i in range(k)]
    return trivial_line_bundle(pair_groupoid(objs), name=f"pair({k}) line")


def symmetric_group_3() -> FiniteGroupoid:
    """S_3 as permutations of (0,1,2), elements named by their one-line form."""
    import itertools
    perms = list(itertools.permutations(range(3)))
    name = {p: "".join(map(str, p)) for p in perms}
    table = {}
    for p in perms:
        for q in perms:
            comp = tuple(p[q[i]] for i in range(3))
            table[(name[p], name[q])] = name[comp]
    return group_from_table([name[p] for p in perms], table, "012")


def z3_phase_bundle() -> FellBundle:
    """Line bundle over Z/3 twisted by a coboundary cocycle with genuinely
    complex values; the envelope is still C^3."""
    G = cyclic_group(3)
    idx = {"e": 0, "g1": 1, "g2": 2}
    lam = {g: np.exp(2j * np.pi * (idx[g] ** 2) / 9.0) for g in G.arrows}
    w = {}
    for g in G.arrows:
        for h in G.arrows:
            gh = G.comp[(g, h)]
            w[(g, h)] = lam[g] * lam[h] / lam[gh]
    return act.line_bundle_from_cocycle(G, w, name="Z/3 phase line")


def z2_antidiagonal_bundle() -> FellBundle:
    """Matrix model over Z/2: diagonal 2x2 matrices at the unit, antidiagonal
    at the flip; the saturated form of the swap crossed product."""
    G = cyclic_group(2)
    e = np.zeros((2, 2), dtype=np.complex128)
    fibers = {
        "e": [np.diag([1.0, 0.0]).astype(np.complex128),
              np.diag([0.0, 1.0]).astype(np.complex128)],
        "g1": [np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128),
               np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.complex128)],
    }
    return MatrixModelBundle(G, fibers).to_fell_bundle(name="Z/2 antidiagonal")


def swap_action_on_two_points() -> PartialActionOnSet:
    G = cyclic_group(2)
    anchor = {"p": "pt", "q": "pt"}
    table = {("g1", "p"): "q", ("g1", "q"): "p"}
    return global_action_on_set(G, ("p", "q"), anchor, table)


def swap_fix_action() -> PartialActionOnSet:
    """Z/2 on {p,q,r}: swap p,q; fix r (global)."""
    G = cyclic_group(2)
    anchor = {y: "pt" for y in ("p", "q", "r")}
    table = {("g1", "p"): "q", ("g1", "q"): "p", ("g1", "r"): "r"}
    return global_action_on_set(G, ("p", "q", "r"), anchor, table)


def partial_swap_action() -> PartialActionOnSet:
    """Z/2 on {p,q,r}: swap p,q; r outside the domain of the flip."""
    G = cyclic_group(2)
    anchor = {y: "pt" for y in ("p", "q", "r")}
    table = {("g1", "p"): "q", ("g1", "q"): "p"}
    return global_action_on_set(G, ("p", "q", "r"), anchor, table)


def a4_groupoid() -> tuple[FiniteGroupoid, dict]:
    """Transformation groupoid of the global swap/fix action (6 arrows)."""
    return transformation_groupoid(swap_fix_action())


def a4_bundle() -> FellBundle:
    H, _ = a4_groupoid()
    return trivial_line_bundle(H, name="A4: line over Z/2 x {p,q,r}")


def a4_partial_bundle() -> FellBundle:
    """Line bundle over the 5-arrow transformation groupoid of the partial swap."""
    H, _ = transformation_groupoid(partial_swap_action())
    return trivial_line_bundle(H, name="A4 partial: line over 5-arrow groupoid")


def z2_swap_action_on_c2() -> act.TwistedPartialAction:
    """Global untwisted Z/2 action on the diagonal algebra C^2 by coordinate swap."""
    G = cyclic_group(2)
    e11 = np.diag([1.0, 0.0]).astype(np.complex128)
    e22 = np.diag([0.0, 1.0]).astype(np.complex128)
    fibers = {"pt": UnitFiberAlgebra.from_matrices(2, [e11, e22])}
    ideals = {"e": [e11, e22], "g1": [e11, e22]}
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])  # on coordinates in basis (e11, e22)
    alpha = {"e": np.eye(2), "g1": swap}
    return act.TwistedPartialAction.build(G, fibers, ideals, alpha, w={})


def restricted_swap_action() -> act.TwistedPartialAction:
    """The swap action restricted to the first coordinate ideal of C^2."""
    e11 = np.diag([1.0, 0.0]).astype(np.complex128)
    return act.restrict_action(z2_swap_action_on_c2(), {"pt": [e11]})


def a4_action() -> act.TwistedPartialAction:
    """Z/2 partial action on C({p,q,r}): swap the p,q coordinates, r outside
    the flip's domain.  Compiles to the A4 bundle viewed over Z/2."""
    G = cyclic_group(2)
    e = [np.diag([1.0 if i == j else 0.0 for j in range(3)]).astype(np.complex128)
         for i in range(3)]
    fibers = {"pt": UnitFiberAlgebra.from_matrices(3, e)}
    ideals = {"e": e, "g1": [e[0], e[1]]}
    alpha = {"e": np.eye(3), "g1": np.array([[0.0, 1.0], [1.0, 0.0]])}
    return act.TwistedPartialAction.build(G, fibers, ideals, alpha)


def a4_over_z2_bundle() -> FellBundle:
    return act.compile_to_fell_bundle(a4_action(), name="A4 over Z/2 (compiled)")


def matrix_twisted_action() -> act.TwistedPartialAction:
    """Z/2 twisted action on M_2 with a non-scalar unitary multiplier.

    The flip acts by Ad(u) with u = diag(1, i); the square of the flip is
    then implemented by w(g,g) = u^2 = diag(1, -1)."""
    G = cyclic_group(2)
    u = np.diag([1.0, 1j]).astype(np.complex128)
    basis = UnitFiberAlgebra.full_matrix_algebra(2).basis
    fibers = {"pt": UnitFiberAlgebra(2, basis)}
    ideals = {"e": list(basis), "g1": list(basis)}
    ad = np.zeros((4, 4), dtype=np.complex128)
    for j in range(4):
        img = u @ basis[j] @ u.conj().T
        for i in range(4):
            ad[i, j] = np.vdot(basis[i], img)
    alpha = {"e": np.eye(4), "g1": ad}
    w = {("g1", "g1"): u @ u}
    return act.TwistedPartialAction.build(G, fibers, ideals, alpha, w)


def klein_twisted_action() -> act.TwistedPartialAction:
    """Klein-four acting trivially on C with the (-1)^{bc} cocycle."""
    G = klein_four()
    one = np.ones((1, 1), dtype=np.complex128)
    fibers = {"pt": UnitFiberAlgebra.from_matrices(1, [one])}
    ideals = {g: [one] for g in G.arrows}
    alpha = {g: np.eye(1) for g in G.arrows}
    w = {(g, h): klein_cocycle(g, h) * one for g in G.arrows for h in G.arrows}
    return act.TwistedPartialAction.build(G, fibers, ideals, alpha, w)


def shipped_bundles() -> dict[str, FellBundle]:
    """The bundles every property/fuzz suite runs over."""
    return {
        "trivial-M2": matrix_bundle_over_point(2),
        "z2-line": z2_line_bundle(),
        "klein-twisted": klein_twisted_bundle(),
        "klein-trivial": klein_trivial_bundle(),
        "pair2-line": pair_line_bundle(2),
        "a4": a4_bundle(),
        "a4-partial": a4_partial_bundle(),
        "a4-over-z2": a4_over_z2_bundle(),
        "z2-swap-compiled": act.compile_to_fell_bundle(z2_swap_action_on_c2()),
        "z3-phase": z3_phase_bundle(),
        "z2-antidiagonal": z2_antidiagonal_bundle(),
        "m2-twisted": act.compile_to_fell_bundle(matrix_twisted_action()),
    }

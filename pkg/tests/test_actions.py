import numpy as np
import pytest

import fellbund._linalg as la
from fellbund import gallery
from fellbund.actions import (TwistedPartialAction, compile_to_fell_bundle,
                              line_bundle_from_cocycle, reconstruct_action,
                              restrict_action, validate_action)
from fellbund.bundle import UnitFiberAlgebra, validate_fell_bundle
from fellbund.envelope import envelope_algebra
from fellbund.groupoid import cyclic_group, klein_four


def action_diff(T1: TwistedPartialAction, T2: TwistedPartialAction) -> float:
    """Entrywise distance after the canonical fibre identifications (the
    compiled bundle keeps the ideal bases, so coordinates match)."""
    G = T1.groupoid
    worst = 0.0
    for g in G.arrows:
        worst = max(worst, float(np.linalg.norm(T1.ideal_basis[g] - T2.ideal_basis[g])))
        worst = max(worst, float(np.linalg.norm(np.asarray(T1.alpha[g]) - T2.alpha[g])))
    for key in T1.w:
        worst = max(worst, float(np.linalg.norm(T1.w[key] - T2.w[key])))
    return worst


def test_global_swap_action_valid():
    rep = validate_action(gallery.z2_swap_action_on_c2())
    assert rep.ok
    assert not rep.notes  # the derived identities hold cleanly


def test_klein_cocycle_valid_all_triples():
    # oracle: check the scalar identity over all 64 triples directly
    G = klein_four()
    for g in G.arrows:
        for h in G.arrows:
            for k in G.arrows:
                lhs = gallery.klein_cocycle(h, k) * gallery.klein_cocycle(g, G.comp[(h, k)])
                rhs = gallery.klein_cocycle(g, h) * gallery.klein_cocycle(G.comp[(g, h)], k)
                assert lhs == rhs
    assert validate_action(gallery.klein_twisted_action()).ok


def test_broken_normalisation_rejected():
    G = cyclic_group(2)
    one = np.ones((1, 1), dtype=complex)
    fibers = {"pt": UnitFiberAlgebra.from_matrices(1, [one])}
    ideals = {g: [one] for g in G.arrows}
    alpha = {g: np.eye(1) for g in G.arrows}
    w = {("g1", "e"): 2.0 * one}  # violates w(g, unit) = 1
    T = TwistedPartialAction.build(G, fibers, ideals, alpha, w)
    rep = validate_action(T)
    assert not rep.ok
    assert any("normalisation" in v.check for v in rep.violations)
    with pytest.raises(ValueError, match="invalid twisted partial action"):
        compile_to_fell_bundle(T)


def test_compiled_bundles_always_validate():
    actions = [gallery.z2_swap_action_on_c2(), gallery.restricted_swap_action(),
               gallery.klein_twisted_action(), gallery.a4_action()]
    for T in actions:
        b = compile_to_fell_bundle(T)
        assert validate_fell_bundle(b).ok


def test_units_only_action_gives_direct_sum():
    # D_g = 0 off the units: sections supported on units, C* = (+) F_x
    G = cyclic_group(2)
    e11 = np.diag([1.0, 0.0]).astype(complex)
    e22 = np.diag([0.0, 1.0]).astype(complex)
    fibers = {"pt": UnitFiberAlgebra.from_matrices(2, [e11, e22])}
    T = TwistedPartialAction.build(G, fibers, {"g1": []}, {"g1": np.zeros((0, 0))})
    assert validate_action(T).ok
    b = compile_to_fell_bundle(T)
    assert b.dims == {"e": 2, "g1": 0}
    env = envelope_algebra(b)
    assert env.block_summary() == [{"size": 1, "multiplicity": 1}] * 2


def test_swap_crossed_product_is_m2():
    b = compile_to_fell_bundle(gallery.z2_swap_action_on_c2())
    assert envelope_algebra(b).block_summary() == [{"size": 2, "multiplicity": 2}]


def test_klein_twisted_envelope_single_block():
    b = compile_to_fell_bundle(gallery.klein_twisted_action())
    env = envelope_algebra(b)
    assert env.dim == 4
    assert env.block_summary() == [{"size": 2, "multiplicity": 2}]


def test_roundtrip_global_swap():
    T = gallery.z2_swap_action_on_c2()
    assert action_diff(T, reconstruct_action(compile_to_fell_bundle(T))) < 1e-8


def test_roundtrip_restriction():
    T = gallery.restricted_swap_action()
    assert validate_action(T).ok
    assert action_diff(T, reconstruct_action(compile_to_fell_bundle(T))) < 1e-8


def test_roundtrip_klein_cocycle():
    T = gallery.klein_twisted_action()
    assert action_diff(T, reconstruct_action(compile_to_fell_bundle(T))) < 1e-8


def test_roundtrip_partial_a4():
    T = gallery.a4_action()
    assert action_diff(T, reconstruct_action(compile_to_fell_bundle(T))) < 1e-8


def test_roundtrip_matrix_twist():
    # w(g,g) is a non-scalar unitary here, so the reconstruction has to solve
    # a genuine linear system for the multiplier
    T = gallery.matrix_twisted_action()
    assert validate_action(T).ok
    b = compile_to_fell_bundle(T)
    assert validate_fell_bundle(b).ok
    assert action_diff(T, reconstruct_action(b)) < 1e-8
    u2 = np.diag([1.0, -1.0]).astype(complex)
    assert np.linalg.norm(T.w[("g1", "g1")] - u2) < 1e-12  # really non-scalar


def test_cocycle_recovered_from_line_bundle():
    b = gallery.z3_phase_bundle()
    T = reconstruct_action(b)
    G = b.groupoid
    idx = {"e": 0, "g1": 1, "g2": 2}
    lam = {g: np.exp(2j * np.pi * (idx[g] ** 2) / 9.0) for g in G.arrows}
    for g in G.arrows:
        for h in G.arrows:
            want = lam[g] * lam[h] / lam[G.comp[(g, h)]]
            got = complex(T.w[(g, h)][0, 0])
            assert abs(got - want) < 1e-10


def test_reconstruct_requires_left_ideal_presentation():
    b = gallery.z2_antidiagonal_bundle()
    with pytest.raises(ValueError, match="left-ideal"):
        reconstruct_action(b)


def test_reconstruct_rejects_non_ideal_fibers():
    b = compile_to_fell_bundle(gallery.z2_swap_action_on_c2())
    # corrupt the presentation: a fibre subspace that is not a left ideal
    bad = np.zeros_like(b.left_ideal_model["g1"])
    bad[0] = np.array([[0, 1], [0, 0]], dtype=complex)
    bad[1] = np.array([[0, 0], [1, 0]], dtype=complex)
    b.left_ideal_model["g1"] = bad
    with pytest.raises(ValueError):
        reconstruct_action(b)


def test_line_bundle_from_trivial_cocycle():
    G = cyclic_group(2)
    w = {(g, h): 1.0 for g in G.arrows for h in G.arrows}
    b = line_bundle_from_cocycle(G, w)
    assert validate_fell_bundle(b).ok
    assert envelope_algebra(b).block_summary() == [{"size": 1, "multiplicity": 1}] * 2


def test_line_bundle_from_klein_cocycle_is_m2():
    G = klein_four()
    w = {(g, h): gallery.klein_cocycle(g, h) for g in G.arrows for h in G.arrows}
    b = line_bundle_from_cocycle(G, w)
    assert envelope_algebra(b).block_summary() == [{"size": 2, "multiplicity": 2}]


def test_line_bundle_rejects_non_cocycle():
    G = klein_four()
    w = {(g, h): 1.0 for g in G.arrows for h in G.arrows}
    w[("g01", "g10")] = -1.0  # breaks the cocycle identity
    with pytest.raises(ValueError, match="cocycle"):
        line_bundle_from_cocycle(G, w)


def test_restriction_of_global_action_is_valid_partial_action():
    T = gallery.a4_action()  # already a restriction-style instance
    assert validate_action(T).ok
    # restrict the swap action on C^3 to the {p,q} ideal: reproduces a4
    G = cyclic_group(3)
    # and a second case: restrict the C^2 swap to each coordinate ideal
    base = gallery.z2_swap_action_on_c2()
    for coord in range(2):
        e = np.zeros((2, 2), dtype=complex)
        e[coord, coord] = 1.0
        R = restrict_action(base, {"pt": [e]})
        assert validate_action(R).ok
        assert R.ideal_dim("g1") == 0


def test_restriction_to_invariant_family_is_global():
    # the diagonal-sum ideal C(e11+e22)? not an ideal; use the full family
    base = gallery.z2_swap_action_on_c2()
    e11 = np.diag([1.0, 0.0]).astype(complex)
    e22 = np.diag([0.0, 1.0]).astype(complex)
    R = restrict_action(base, {"pt": [e11, e22]})
    assert validate_action(R).ok
    assert R.ideal_dim("g1") == 2  # invariant family: restriction stays global


def test_alpha_inverse_diagnostic_identity():
    # a_{g^-1} = w(g^-1,g) a_g^{-1}(.) w(g^-1,g)* holds on validated actions
    for T in (gallery.z2_swap_action_on_c2(), gallery.klein_twisted_action(),
              gallery.a4_action()):
        G = T.groupoid
        for g in G.arrows:
            gi = G.inv[g]
            for i in range(T.ideal_dim(g)):
                a = T.ideal_basis[g][i]
                lhs = T.apply_alpha(gi, a)
                rhs = T.w[(gi, g)] @ T.apply_alpha_inv(g, a) @ T.w[(gi, g)].conj().T
                assert np.linalg.norm(lhs - rhs) < 1e-9


def test_saturation_reflects_full_domains():
    from fellbund.bundle import saturation_check
    full = compile_to_fell_bundle(gallery.z2_swap_action_on_c2())
    assert all(saturation_check(full).values())
    partial = compile_to_fell_bundle(gallery.a4_action())
    sat = saturation_check(partial)
    assert sat["e"] and not sat["g1"]

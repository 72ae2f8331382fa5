import numpy as np
import pytest

import fellbund._linalg as la
from fellbund import gallery
from fellbund.envelope import cstar_norm
from fellbund.reps import (FellRep, disintegrate, integrate, intertwiner_check,
                           partial_isometry_residuals, random_fellrep,
                           regular_fellrep, validate_rep)
from fellbund.sections import Section, i_norm, random_section, unit_section


def rep_distance(R1: FellRep, R2: FellRep) -> float:
    worst = 0.0
    for x in R1.bundle.groupoid.objects:
        if R1.dims[x] != R2.dims[x]:
            return np.inf
    for g in R1.bundle.groupoid.arrows:
        worst = max(worst, float(np.linalg.norm(np.asarray(R1.maps[g]) -
                                                np.asarray(R2.maps[g]))))
    return worst


def test_character_rep_of_z2():
    b = gallery.z2_line_bundle()
    R = FellRep(b, {"pt": 1}, {"e": np.ones((1, 1, 1), dtype=complex),
                               "g1": -np.ones((1, 1, 1), dtype=complex)})
    assert validate_rep(R).ok
    L = integrate(R)
    f = Section(b, {"e": [2.0], "g1": [3.0]})
    np.testing.assert_allclose(L.matrix(f), [[-1.0]], atol=1e-12)
    np.testing.assert_allclose(L.matrix(unit_section(b)), [[1.0]], atol=1e-12)


def test_zero_rep_is_valid_but_flagged():
    b = gallery.z2_line_bundle()
    R = FellRep(b, {"pt": 0}, {"e": np.zeros((0, 0, 1), dtype=complex),
                               "g1": np.zeros((0, 0, 1), dtype=complex)})
    rep = validate_rep(R)
    assert rep.ok
    assert any("degenerate" in n for n in rep.notes)


def test_broken_involution_cited():
    b = gallery.z2_line_bundle()
    R = FellRep(b, {"pt": 1}, {"e": np.ones((1, 1, 1), dtype=complex),
                               "g1": 2j * np.ones((1, 1, 1), dtype=complex)})
    rep = validate_rep(R)
    assert not rep.ok
    assert any("involution" in v.check for v in rep.violations)


def test_regular_fellrep_validates_everywhere():
    for name, b in gallery.shipped_bundles().items():
        for x in b.groupoid.objects:
            R = regular_fellrep(b, x)
            assert validate_rep(R).ok, f"{name} at {x}"


def test_regular_fellrep_matches_regular_matrix_norms():
    from fellbund.envelope import regular_rep_matrix
    rng = np.random.default_rng(0)
    for name in ("z2-line", "a4-over-z2", "pair2-line", "klein-twisted"):
        b = gallery.shipped_bundles()[name]
        for x in b.groupoid.objects:
            R = regular_fellrep(b, x)
            L = integrate(R)
            for _ in range(3):
                f = random_section(b, rng)
                direct = regular_rep_matrix(b, x, f)
                assert la.operator_norm(L.matrix(f)) == pytest.approx(
                    la.operator_norm(direct), abs=1e-9), name


def test_z2_regular_fellrep_permutes_basis():
    b = gallery.z2_line_bundle()
    R = regular_fellrep(b, "pt")
    assert R.dims["pt"] == 2
    flip = R.apply("g1", np.array([1.0 + 0j]))
    np.testing.assert_allclose(np.abs(flip), [[0, 1], [1, 0]], atol=1e-9)


def test_pair_groupoid_regular_fellrep_matrix_units():
    b = gallery.pair_line_bundle(2)
    R = regular_fellrep(b, "x0")
    assert sum(R.dims.values()) == 2
    L = integrate(R)
    f = Section(b, {"x0<x1": [1.0]})
    m = L.matrix(f)
    assert np.count_nonzero(np.abs(m) > 1e-12) == 1  # a single matrix unit


def test_disintegrate_integrate_roundtrip_exact():
    rng = np.random.default_rng(1)
    for name in ("z2-line", "trivial-M2", "a4-over-z2", "klein-twisted"):
        b = gallery.shipped_bundles()[name]
        for _ in range(5):
            R = random_fellrep(b, rng)
            L = integrate(R)
            R2 = disintegrate(b, L.matrix, L.dim)
            assert rep_distance(R, R2) < 1e-10, name
            L2 = integrate(R2)
            f = random_section(b, rng)
            assert np.linalg.norm(L.matrix(f) - L2.matrix(f)) < 1e-10, name


def test_disintegrate_regular_representation():
    # feeding the full regular representation back through disintegration
    # recovers a valid representation whose integrated form is Lambda exactly
    from fellbund.envelope import envelope_algebra
    for name in ("z2-line", "a4-over-z2", "m2-twisted"):
        b = gallery.shipped_bundles()[name]
        env = envelope_algebra(b)
        dim = sum(env.per_object_dims.values())
        R = disintegrate(b, env.lambda_of, dim)
        assert validate_rep(R).ok, name
        L = integrate(R)
        rng = np.random.default_rng(6)
        for _ in range(3):
            f = random_section(b, rng)
            assert np.linalg.norm(L.matrix(f) - env.lambda_of(f)) < 1e-9, name


def test_disintegrate_compresses_degenerate_part():
    b = gallery.z2_line_bundle()
    R = FellRep(b, {"pt": 1}, {"e": np.ones((1, 1, 1), dtype=complex),
                               "g1": -np.ones((1, 1, 1), dtype=complex)})
    L = integrate(R)

    def padded(f):
        m = L.matrix(f)
        out = np.zeros((3, 3), dtype=complex)
        out[1, 1] = m[0, 0]
        return out
    R2 = disintegrate(b, padded, 3)
    assert R2.dims["pt"] == 1
    assert rep_distance(R, R2) < 1e-12


def test_disintegrate_rejects_zero_and_non_hom():
    b = gallery.z2_line_bundle()
    with pytest.raises(ValueError, match="degenerate"):
        disintegrate(b, lambda f: np.zeros((2, 2), dtype=complex), 2)
    # linearly fine but not multiplicative: scale the flip only
    R = FellRep(b, {"pt": 1}, {"e": np.ones((1, 1, 1), dtype=complex),
                               "g1": -np.ones((1, 1, 1), dtype=complex)})
    L = integrate(R)

    def broken(f):
        m = L.matrix(f).copy()
        return m + 0.5 * f.at("g1").sum()
    with pytest.raises(ValueError):
        disintegrate(b, broken, 1)


def test_integration_norm_bounds():
    rng = np.random.default_rng(2)
    for name, b in gallery.shipped_bundles().items():
        R = random_fellrep(b, rng)
        L = integrate(R)
        for _ in range(5):
            f = random_section(b, rng)
            n = la.operator_norm(L.matrix(f))
            assert n <= i_norm(f) + 1e-8, name
            assert n <= cstar_norm(b, f) + 1e-8, name


def test_intertwiner_identity_and_unitary_conjugate():
    b = gallery.shipped_bundles()["z2-swap-compiled"]
    rng = np.random.default_rng(3)
    R = random_fellrep(b, rng)
    ident = {x: np.eye(R.dims[x], dtype=complex) for x in b.groupoid.objects}
    assert intertwiner_check(R, R, ident).ok
    # conjugate by per-object unitaries
    U = {x: la.random_unitary(R.dims[x], rng) if R.dims[x] else
         np.zeros((0, 0), dtype=complex) for x in b.groupoid.objects}
    maps = {}
    G = b.groupoid
    for g in G.arrows:
        maps[g] = np.einsum("ab,bck,cd->adk", U[G.rng[g]], np.asarray(R.maps[g]),
                            U[G.src[g]].conj().T)
    R2 = FellRep(b, dict(R.dims), maps)
    assert validate_rep(R2).ok
    assert intertwiner_check(R, R2, U).ok


def test_intertwiner_mismatch_cited():
    b = gallery.z2_line_bundle()
    R1 = FellRep(b, {"pt": 1}, {"e": np.ones((1, 1, 1), dtype=complex),
                                "g1": np.ones((1, 1, 1), dtype=complex)})
    R2 = FellRep(b, {"pt": 1}, {"e": np.ones((1, 1, 1), dtype=complex),
                                "g1": -np.ones((1, 1, 1), dtype=complex)})
    rep = intertwiner_check(R1, R2, {"pt": np.eye(1, dtype=complex)})
    assert not rep.ok
    assert any("g1" in v.where for v in rep.violations)


def test_partial_isometry_property():
    rng = np.random.default_rng(4)
    for name in ("z2-line", "a4-over-z2", "z2-swap-compiled"):
        b = gallery.shipped_bundles()[name]
        R = random_fellrep(b, rng)
        for g in b.groupoid.arrows:
            iso, supp = partial_isometry_residuals(R, g)
            assert iso < 1e-8, name
            assert supp < 1e-7, name

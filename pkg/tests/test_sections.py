import numpy as np
import pytest

import fellbund._linalg as la
from fellbund import gallery
from fellbund.bundle import BundleHom, ei
from fellbund.sections import (Section, basis_sections, convolve, delta_section,
                               factor, i_norm, induced_hom, involute,
                               module_action, random_section, unit_section)


def test_delta_convolution_rule():
    for name, b in gallery.shipped_bundles().items():
        G = b.groupoid
        rng = np.random.default_rng(1)
        for g in G.arrows:
            for h in G.arrows:
                dg, dh = b.dims[g], b.dims[h]
                if dg == 0 or dh == 0:
                    continue
                a = rng.standard_normal(dg) + 1j * rng.standard_normal(dg)
                c = rng.standard_normal(dh) + 1j * rng.standard_normal(dh)
                prod = convolve(delta_section(b, g, a), delta_section(b, h, c))
                if G.src[g] == G.rng[h]:
                    want = Section(b, {G.comp[(g, h)]: b.mult_coords(g, h, a, c)})
                else:
                    want = Section(b, {})
                assert np.linalg.norm((prod - want).pack()) < 1e-10, name


def test_zz2_f_star_f():
    b = gallery.z2_line_bundle()
    f = Section(b, {"e": [1.0], "g1": [1.0]})
    ff = convolve(f, f)
    np.testing.assert_allclose(ff.at("e"), [2.0], atol=1e-12)
    np.testing.assert_allclose(ff.at("g1"), [2.0], atol=1e-12)


def test_unit_section_properties():
    for name, b in gallery.shipped_bundles().items():
        e = unit_section(b)
        rng = np.random.default_rng(2)
        xi = random_section(b, rng)
        assert np.linalg.norm((convolve(e, xi) - xi).pack()) < 1e-9, name
        assert np.linalg.norm((convolve(xi, e) - xi).pack()) < 1e-9, name
        assert np.linalg.norm((involute(e) - e).pack()) < 1e-9, name
        assert np.linalg.norm((convolve(e, e) - e).pack()) < 1e-9, name
        assert i_norm(e) == pytest.approx(1.0, abs=1e-9), name


def test_involution_is_involutive_and_antimultiplicative():
    rng = np.random.default_rng(3)
    for name, b in gallery.shipped_bundles().items():
        xi = random_section(b, rng)
        eta = random_section(b, rng)
        assert np.linalg.norm((involute(involute(xi)) - xi).pack()) < 1e-9, name
        lhs = involute(convolve(xi, eta))
        rhs = convolve(involute(eta), involute(xi))
        assert np.linalg.norm((lhs - rhs).pack()) < 1e-8, name


def test_delta_involution():
    b = gallery.shipped_bundles()["z2-swap-compiled"]
    G = b.groupoid
    rng = np.random.default_rng(4)
    for g in G.arrows:
        a = rng.standard_normal(b.dims[g]) + 1j * rng.standard_normal(b.dims[g])
        star = involute(delta_section(b, g, a))
        want = Section(b, {G.inv[g]: b.star_coords(g, a)})
        assert np.linalg.norm((star - want).pack()) < 1e-12


def test_real_scalar_section_over_units_fixed():
    b = gallery.z2_line_bundle()
    s = Section(b, {"e": [2.5]})
    assert np.linalg.norm((involute(s) - s).pack()) < 1e-12


def test_convolution_associative():
    rng = np.random.default_rng(5)
    for name, b in gallery.shipped_bundles().items():
        x, y, z = (random_section(b, rng) for _ in range(3))
        lhs = convolve(convolve(x, y), z)
        rhs = convolve(x, convolve(y, z))
        scale = max(1.0, np.linalg.norm(lhs.pack()))
        assert np.linalg.norm((lhs - rhs).pack()) < 1e-9 * scale, name


def test_i_norm_examples():
    b = gallery.z2_line_bundle()
    assert i_norm(Section(b, {})) == 0.0
    assert i_norm(Section(b, {"g1": [3.0]})) == pytest.approx(3.0)
    assert i_norm(Section(b, {"e": [1.0], "g1": [1.0]})) == pytest.approx(2.0)


def test_i_norm_submultiplicative_and_star_invariant():
    rng = np.random.default_rng(6)
    for name, b in gallery.shipped_bundles().items():
        for _ in range(5):
            x, y = random_section(b, rng), random_section(b, rng)
            assert i_norm(convolve(x, y)) <= i_norm(x) * i_norm(y) + 1e-9, name
            assert i_norm(involute(x)) == pytest.approx(i_norm(x), abs=1e-9), name


def test_section_space_dimension():
    for name, b in gallery.shipped_bundles().items():
        assert len(basis_sections(b)) == b.total_dim == sum(b.dims.values()), name


def test_factorisation():
    from fellbund.bundle import range_source_ideals
    rng = np.random.default_rng(7)
    for name, b in gallery.shipped_bundles().items():
        f = random_section(b, rng)
        f1, f2 = factor(f)
        G = b.groupoid
        for g, v in f.entries.items():
            x = G.rng[g]
            # f1(g) lies in the range ideal span(A_g A_g*)
            rframe, _, _ = range_source_ideals(b, g)
            assert la.residual_in_span(rframe, f1[g]) < 1e-8 * max(
                1.0, np.linalg.norm(f1[g])), name
            # f(g) = f1(g)* . f2(g) under the module action
            star = b.star_coords(G.unit[x], f1[g])
            back = np.einsum("kij,i,j->k", b.mult[(G.unit[x], g)], star, f2.at(g))
            assert np.linalg.norm(back - v) < 1e-8 * max(1.0, np.linalg.norm(v)), name
            nf = b.fiber_norm(g, v)
            n1 = np.sqrt(max(la.top_eigenvalue(
                b.unit_matrix(x, np.einsum("kij,i,j->k", b.mult[(G.unit[x], G.unit[x])],
                                           b.star_coords(G.unit[x], f1[g]), f1[g]))), 0))
            n2 = b.fiber_norm(g, f2.at(g))
            assert n1 ** 2 == pytest.approx(nf, abs=1e-7), name
            assert n2 ** 2 == pytest.approx(nf, abs=1e-7), name


def test_module_action_is_unit_supported_multiplication():
    b = gallery.a4_over_z2_bundle()
    rng = np.random.default_rng(8)
    f = random_section(b, rng)
    coeffs = {"pt": rng.standard_normal(b.dims["e"]) + 0j}
    acted = module_action(b, coeffs, f)
    by_conv = convolve(Section(b, {"e": coeffs["pt"]}), f)
    assert np.linalg.norm((acted - by_conv).pack()) < 1e-10


def test_induced_hom_identity_quotient_composite():
    b = gallery.a4_bundle()
    ident = induced_hom(BundleHom.identity(b))
    rng = np.random.default_rng(9)
    f = random_section(b, rng)
    assert np.linalg.norm((ident(f) - f).pack()) < 1e-12

    from fellbund.ideals import (InvariantFamily, ideal_from_invariant_family,
                                 quotient_bundle)
    frames = {x: (np.eye(1, dtype=complex) if x in ("p", "q")
                  else np.zeros((0, 1), dtype=complex)) for x in b.groupoid.objects}
    I = ideal_from_invariant_family(InvariantFamily(b, frames))
    q, hom = quotient_bundle(b, I)
    push = induced_hom(hom)
    # the kernel of the induced map is exactly the ideal total dimension
    kernel = 0
    for (g, i, s) in basis_sections(b):
        if push(s).is_zero(1e-12):
            kernel += 1
    assert kernel == I.total_dim() == 4
    # *-homomorphism for (conv, involution)
    g = random_section(b, rng)
    assert np.linalg.norm((push(convolve(f, g)) - convolve(push(f), push(g))).pack()) < 1e-9
    assert np.linalg.norm((push(involute(f)) - involute(push(f))).pack()) < 1e-9
    # composite homs induce composites
    both = induced_hom(hom.compose(BundleHom.identity(b)))
    assert np.linalg.norm((both(f) - push(f)).pack()) < 1e-12


def test_bundle_mismatch_rejected():
    b1 = gallery.z2_line_bundle()
    b2 = gallery.z2_line_bundle()
    x = Section(b1, {"e": [1.0]})
    y = Section(b2, {"e": [1.0]})
    with pytest.raises(ValueError, match="different bundles"):
        convolve(x, y)

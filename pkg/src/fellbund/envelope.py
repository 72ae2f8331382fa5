"""C*-norms and the section C*-algebra as a concrete matrix *-algebra.

Per object x, the regular representation acts by left convolution on the
completion of sections over the source fibre G_x, tensored over the unit
fibre with its concrete matrix representation:

    H_x = direct sum over g in G_x of  A_g (x) C^{n_x},

with semi-inner product <a(x)v, b(x)w> = <v, rho_x(a* b) w>.  The operator
of convolution by f, compressed to the quotient by the Gram kernel, is
Lambda_x(f); the C*-norm of f is the largest operator norm over the objects.
Faithfulness of the direct sum makes this the unique C*-norm on the section
*-algebra, so full and reduced coincide here (finite-dimensional *-algebra
with a faithful C*-representation); the full norm is defined as this one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _linalg as la
from .bundle import FellBundle, ei
from .config import DEFAULT, Tolerances
from .report import ValidationReport
from .sections import Section, basis_sections, module_action, unit_section

Array = np.ndarray


class RegularRepAt:
    """Quotient coordinates of the induced space at one object."""

    def __init__(self, bundle: FellBundle, x: str, tols: Tolerances = DEFAULT):
        self.bundle = bundle
        self.x = x
        G = bundle.groupoid
        n = bundle.unit_dim(x)
        self.summands = list(G.source_fiber(x))
        self.phi: dict[str, Array] = {}
        self.psi: dict[str, Array] = {}
        self.quot_dim: dict[str, int] = {}
        self.borderline: list[str] = []
        for g in self.summands:
            d = bundle.dims[g]
            raw = d * n
            if raw == 0:
                self.phi[g] = np.zeros((0, 0), dtype=np.complex128)
                self.psi[g] = np.zeros((0, 0), dtype=np.complex128)
                self.quot_dim[g] = 0
                continue
            T = bundle.star_mult_tensor(g)
            gram = np.einsum("kij,kvw->ivjw", T, bundle.unit_rep[x]).reshape(raw, raw)
            gram = la.hermitian_part(gram)
            vals, vecs = np.linalg.eigh(gram)
            top = max(float(vals[-1]), 0.0)
            if float(vals[0]) < -max(tols.tolerance, tols.rank_threshold * max(top, 1.0)):
                raise ValueError(f"Gram matrix at ({x},{g}) is not positive "
                                 f"(min eigenvalue {vals[0]:.3e}); bundle invalid")
            cut = tols.rank_threshold * max(top, 1.0)
            keep = vals > cut
            # the quotient dimension should not flip under small threshold
            # perturbations; eigenvalues within a decade of the cut are noted
            shaky = int(np.sum((vals > cut / 10) & (vals <= cut * 10)))
            if shaky:
                self.borderline.append(
                    f"({x},{g}): {int(shaky)} Gram eigenvalue(s) within a decade "
                    f"of the rank threshold; quotient dimension may be unstable")
            lam = vals[keep]
            v = vecs[:, keep]
            self.phi[g] = (np.sqrt(lam)[:, None] * v.conj().T)
            self.psi[g] = v / np.sqrt(lam)[None, :]
            self.quot_dim[g] = int(lam.size)
        self.offsets: dict[str, int] = {}
        pos = 0
        for g in self.summands:
            self.offsets[g] = pos
            pos += self.quot_dim[g]
        self.dim = pos
        self._blocks: dict[tuple[str, str], Array] = {}
        self._build_blocks(n)

    def _build_blocks(self, n: int) -> None:
        """K[(h, g)][q_out, m, q_in]: action of the m-th basis element of A_h
        mapping the summand at g into the summand at h.g."""
        bundle, G = self.bundle, self.bundle.groupoid
        for g in self.summands:
            if self.quot_dim[g] == 0:
                continue
            psi3 = self.psi[g].reshape(bundle.dims[g], n, self.quot_dim[g])
            for h in G.arrows:
                if G.src[h] != G.rng[g] or bundle.dims[h] == 0:
                    continue
                out = G.comp[(h, g)]
                if self.quot_dim[out] == 0:
                    continue
                phi3 = self.phi[out].reshape(self.quot_dim[out], bundle.dims[out], n)
                tensor = np.einsum("qov,omi,ivp->qmp", phi3, bundle.mult[(h, g)], psi3)
                self._blocks[(h, g)] = tensor

    def matrix(self, f: Section) -> Array:
        """Matrix of left convolution by f on the quotient coordinates."""
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for (h, g), tensor in self._blocks.items():
            coeff = f.entries.get(h)
            if coeff is None:
                continue
            target = self.bundle.groupoid.comp[(h, g)]
            block = np.einsum("qmp,m->qp", tensor, coeff)
            o, i = self.offsets[target], self.offsets[g]
            out[o:o + block.shape[0], i:i + block.shape[1]] += block
        return out


class RegularRepresentation:
    """Per-object regular representations, built lazily and cached.

    The per-object constructions are independent of each other, so distinct
    objects may be evaluated concurrently; direct sums always merge in the
    declared object order.
    """

    def __init__(self, bundle: FellBundle, tols: Tolerances = DEFAULT):
        self.bundle = bundle
        self.tols = tols
        self._at: dict[str, RegularRepAt] = {}

    def at(self, x: str) -> RegularRepAt:
        if x not in self._at:
            self._at[x] = RegularRepAt(self.bundle, x, self.tols)
        return self._at[x]

    def matrix(self, x: str, f: Section) -> Array:
        return self.at(x).matrix(f)

    def direct_sum_matrix(self, f: Section) -> Array:
        blocks = [self.matrix(x, f) for x in self.bundle.groupoid.objects]
        dim = sum(b.shape[0] for b in blocks)
        out = np.zeros((dim, dim), dtype=np.complex128)
        pos = 0
        for b in blocks:
            out[pos:pos + b.shape[0], pos:pos + b.shape[0]] = b
            pos += b.shape[0]
        return out

    def per_object_dims(self) -> dict[str, int]:
        return {x: self.at(x).dim for x in self.bundle.groupoid.objects}


def _cached_regular(bundle: FellBundle, tols: Tolerances) -> RegularRepresentation:
    cache = getattr(bundle, "_regular_cache", None)
    key = (tols.tolerance, tols.rank_threshold)
    if cache is None:
        cache = {}
        bundle._regular_cache = cache
    if key not in cache:
        cache[key] = RegularRepresentation(bundle, tols)
    return cache[key]


def regular_rep_matrix(bundle: FellBundle, x: str, f: Section,
                       tols: Tolerances = DEFAULT) -> Array:
    return _cached_regular(bundle, tols).matrix(x, f)


def cstar_norm(bundle: FellBundle, f: Section, tols: Tolerances = DEFAULT) -> float:
    reg = _cached_regular(bundle, tols)
    return max((la.operator_norm(reg.matrix(x, f)) for x in bundle.groupoid.objects),
               default=0.0)


def per_object_norms(bundle: FellBundle, f: Section,
                     tols: Tolerances = DEFAULT) -> dict[str, float]:
    reg = _cached_regular(bundle, tols)
    return {x: la.operator_norm(reg.matrix(x, f)) for x in bundle.groupoid.objects}


def sharper_norm_bound(bundle: FellBundle, f: Section,
                       tols: Tolerances = DEFAULT) -> float:
    """Reported upper bound from the pointwise square-root sums; not tight."""
    G = bundle.groupoid
    n_r = {x: np.zeros((bundle.unit_dim(x), bundle.unit_dim(x)), dtype=np.complex128)
           for x in G.objects}
    n_s = {x: np.zeros((bundle.unit_dim(x), bundle.unit_dim(x)), dtype=np.complex128)
           for x in G.objects}
    for g, v in f.entries.items():
        gi = G.inv[g]
        ff = bundle.unit_matrix(G.rng[g], bundle.mult_coords(g, gi, v, bundle.star_coords(g, v)))
        sf = bundle.unit_matrix(G.src[g], np.einsum("kij,i,j->k", bundle.star_mult_tensor(g),
                                                    np.conj(v), v))
        n_r[G.rng[g]] += la.psd_power(ff, 0.5, tols.rank_threshold)
        n_s[G.src[g]] += la.psd_power(sf, 0.5, tols.rank_threshold)
    top_r = max((la.operator_norm(m) for m in n_r.values()), default=0.0)
    top_s = max((la.operator_norm(m) for m in n_s.values()), default=0.0)
    return float(np.sqrt(top_r * top_s))


# -- block decomposition ---------------------------------------------------------

@dataclass
class SimpleBlock:
    size: int
    multiplicity: int
    projection: Array       # minimal central projection in the ambient Mat(N)
    irrep_frame: Array | None = None  # (size, N): rows span an irreducible subspace

    def irrep(self, mat: Array) -> Array:
        if self.irrep_frame is None:
            raise ValueError("block was decomposed without irrep frames")
        return self.irrep_frame.conj() @ mat @ self.irrep_frame.T


def block_decomposition(basis: Array, tols: Tolerances = DEFAULT,
                        want_irreps: bool = False) -> list[SimpleBlock]:
    """Simple summands of a matrix *-algebra given by a spanning stack.

    The centre is solved from the linear commutation system; the spectral
    projections of a seeded random self-adjoint central element are the
    minimal central projections (eigenvalues clustered at ``cluster_gap``).
    Each corner is then identified with a full matrix algebra; with
    ``want_irreps`` a rank-one-projection search provides an irreducible
    frame per block.  Deterministic for a fixed seed.
    """
    basis = la.stack_orth(list(basis), basis.shape[1], basis.shape[2], tols.rank_threshold)
    d, N, _ = basis.shape
    if d == 0:
        return []
    rows = []
    for i in range(d):
        comm = np.einsum("kab,bc->kac", basis, basis[i]) - \
            np.einsum("ab,kbc->kac", basis[i], basis)
        rows.append(comm.reshape(d, -1).T)
    system = np.vstack(rows)
    null = la.null_space_rows(system, tols.rank_threshold)
    center_dim = null.shape[0]
    if center_dim == 0:
        raise ValueError("algebra has empty centre; spanning stack degenerate")
    center = np.stack([la.stack_combine(basis, c) for c in null])

    # the algebra may act degenerately on the ambient space (an ideal inside
    # a larger matrix algebra); its unit is then a proper support projection
    # and every central element carries a spurious kernel eigenvalue cluster
    unit_coeff = la.algebra_unit(basis)
    if unit_coeff is None:
        raise ValueError("spanning stack is not a unital *-algebra")
    support = la.stack_combine(basis, unit_coeff)
    support_rank = int(round(float(np.real(np.trace(support)))))
    degenerate = support_rank < N

    for attempt in range(24):
        rng = np.random.default_rng(tols.seed + 7919 * attempt)
        coeff = rng.standard_normal(center_dim) + 1j * rng.standard_normal(center_dim)
        z = la.hermitian_part(np.tensordot(coeff, center, axes=1))
        vals, vecs = np.linalg.eigh(z)
        clusters = la.cluster_eigenvalues(vals, tols.cluster_gap * max(1.0, float(np.abs(vals).max())))
        if len(clusters) != center_dim + (1 if degenerate else 0):
            continue
        blocks = []
        good = True
        for cl in clusters:
            v = vecs[:, cl]
            proj = v @ v.conj().T
            if degenerate and float(np.linalg.norm(support @ proj)) < 1e-6:
                continue  # the ambient kernel cluster
            corner = np.einsum("ab,kbc,cd->kad", proj, basis, proj)
            corner_rank = la.matrix_rank(corner.reshape(d, -1), tols.rank_threshold)
            size = int(round(np.sqrt(corner_rank)))
            if size * size != corner_rank:
                good = False
                break
            mult_total = int(round(float(np.real(np.trace(proj)))))
            if size == 0 or mult_total % size:
                good = False
                break
            block = SimpleBlock(size, mult_total // size, proj)
            if want_irreps:
                frame = _irrep_frame(basis, proj, size, block.multiplicity, tols, attempt)
                if frame is None:
                    good = False
                    break
                block.irrep_frame = frame
            blocks.append(block)
        if good and sum(b.size ** 2 for b in blocks) == d:
            blocks.sort(key=_block_sort_key(basis))
            return blocks
    raise ValueError("block decomposition did not stabilise; "
                     "input is likely not a *-closed algebra")


def _block_sort_key(basis: Array):
    def key(b: SimpleBlock):
        traces = np.einsum("ab,kba->k", b.projection, basis)
        rounded = tuple(np.round(traces.view(np.float64), 6).tolist())
        return (b.size, b.multiplicity, rounded)
    return key


def _irrep_frame(basis: Array, proj: Array, size: int, mult: int,
                 tols: Tolerances, salt: int) -> Array | None:
    d = basis.shape[0]
    corner = np.einsum("ab,kbc,cd->kad", proj, basis, proj)
    for attempt in range(12):
        rng = np.random.default_rng(tols.seed + 104729 * salt + 31 * attempt + 5)
        coeff = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        y = la.hermitian_part(np.tensordot(coeff, corner, axes=1))
        vals, vecs = np.linalg.eigh(y)
        clusters = la.cluster_eigenvalues(vals, tols.cluster_gap * max(1.0, float(np.abs(vals).max())))
        nonzero = [c for c in clusters if np.abs(vals[c]).max() > tols.cluster_gap]
        if len(nonzero) != size or any(len(c) != mult for c in nonzero):
            continue
        top = nonzero[-1]
        xi = vecs[:, top[0]]
        pivot = int(np.argmax(np.abs(xi)))
        xi = xi * (np.abs(xi[pivot]) / xi[pivot])
        orbit = np.einsum("kab,b->ka", basis, xi)
        frame = la.orth_rows(orbit, tols.rank_threshold)
        if frame.shape[0] != size:
            continue
        ok = True
        for i in range(d):
            pa = frame.conj() @ basis[i] @ frame.T
            for j in range(d):
                pb = frame.conj() @ basis[j] @ frame.T
                pab = frame.conj() @ (basis[i] @ basis[j]) @ frame.T
                if np.linalg.norm(pa @ pb - pab) > 1e-7 * max(1.0, float(np.linalg.norm(pab))):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return frame
    return None


# -- the envelope algebra ---------------------------------------------------------

@dataclass
class EnvelopeAlgebra:
    bundle: FellBundle
    regular: RegularRepresentation
    per_object_dims: dict[str, int]
    basis_index: list[tuple[str, int]]
    images: Array          # stack of Lambda(delta) matrices
    image_frame: Array     # orthonormal frame of the image, flattened
    dim: int
    blocks: list[SimpleBlock]
    injective: bool

    def lambda_of(self, f: Section) -> Array:
        return self.regular.direct_sum_matrix(f)

    def block_summary(self) -> list[dict]:
        return [{"size": b.size, "multiplicity": b.multiplicity} for b in self.blocks]


def envelope_algebra(bundle: FellBundle, tols: Tolerances = DEFAULT) -> EnvelopeAlgebra:
    cache = getattr(bundle, "_envelope_cache", None)
    key = (tols.tolerance, tols.rank_threshold, tols.cluster_gap, tols.seed)
    if cache is None:
        cache = {}
        bundle._envelope_cache = cache
    if key in cache:
        return cache[key]
    env = _envelope_algebra(bundle, tols)
    cache[key] = env
    return env


def _envelope_algebra(bundle: FellBundle, tols: Tolerances) -> EnvelopeAlgebra:
    reg = _cached_regular(bundle, tols)
    basis = basis_sections(bundle)
    total = sum(reg.per_object_dims().values())
    if not basis:
        empty = np.zeros((0, total, total), dtype=np.complex128)
        return EnvelopeAlgebra(bundle, reg, reg.per_object_dims(), [], empty,
                               np.zeros((0, total * total), dtype=np.complex128), 0, [], True)
    images = np.stack([reg.direct_sum_matrix(s) for (_, _, s) in basis])
    frame = la.orth_rows(la.flatten_stack(images), tols.rank_threshold)
    dim = frame.shape[0]
    injective = dim == bundle.total_dim
    blocks = block_decomposition(images, tols)
    return EnvelopeAlgebra(bundle, reg, reg.per_object_dims(),
                           [(g, i) for (g, i, _) in basis], images, frame, dim,
                           blocks, injective)


def irreducible_envelope_blocks(bundle: FellBundle,
                                tols: Tolerances = DEFAULT) -> list[SimpleBlock]:
    """Envelope blocks with irreducible frames, cached per bundle."""
    cache = getattr(bundle, "_irrep_cache", None)
    key = (tols.tolerance, tols.rank_threshold, tols.cluster_gap, tols.seed)
    if cache is None:
        cache = {}
        bundle._irrep_cache = cache
    if key not in cache:
        env = envelope_algebra(bundle, tols)
        cache[key] = block_decomposition(env.images, tols, want_irreps=True) \
            if env.images.shape[0] else []
    return cache[key]


def coefficient_embedding_check(bundle: FellBundle, tols: Tolerances = DEFAULT) -> ValidationReport:
    """The unit-fibre direct sum embeds in the envelope.

    Checks that b -> Lambda(b at units) is an injective *-homomorphism and
    that it implements the module action: phi(b) Lambda(f) = Lambda(b † f).
    """
    G = bundle.groupoid
    reg = _cached_regular(bundle, tols)
    rep = ValidationReport("coefficient embedding")
    tol = tols.tolerance

    unit_basis: list[tuple[str, int, Section]] = []
    for x in G.objects:
        u = G.unit[x]
        for i in range(bundle.dims[u]):
            unit_basis.append((x, i, Section(bundle, {u: ei(bundle.dims[u], i)})))

    def phi_sec(x: str, coords: Array) -> Section:
        return Section(bundle, {G.unit[x]: coords})

    mats = [reg.direct_sum_matrix(s) for (_, _, s) in unit_basis]
    if mats:
        rank = la.matrix_rank(np.stack([m.reshape(-1) for m in mats]), tols.rank_threshold)
        rep.require(rank == len(mats), "embedding injective", "unit fibre sum",
                    detail=f"rank {rank} of {len(mats)}")

    for (x, i, s) in unit_basis:
        m = reg.direct_sum_matrix(s)
        star = reg.direct_sum_matrix(phi_sec(x, bundle.star_coords(G.unit[x], ei(bundle.dims[G.unit[x]], i))))
        rep.check_residual(float(np.linalg.norm(m.conj().T - star)), tol,
                           "embedding involutive", f"({x},{i})")
        for (y, j, t) in unit_basis:
            if x != y:
                continue
            u = G.unit[x]
            prod = bundle.mult[(u, u)][:, i, j]
            lhs = m @ reg.direct_sum_matrix(t)
            rhs = reg.direct_sum_matrix(phi_sec(x, prod))
            rep.check_residual(float(np.linalg.norm(lhs - rhs)),
                               tol * max(1.0, float(np.linalg.norm(rhs))),
                               "embedding multiplicative", f"({x},{i},{j})")

    for (x, i, s) in unit_basis:
        m = reg.direct_sum_matrix(s)
        coeffs = {x: ei(bundle.dims[G.unit[x]], i)}
        for (g, k, f) in basis_sections(bundle):
            lhs = m @ reg.direct_sum_matrix(f)
            rhs = reg.direct_sum_matrix(module_action(bundle, coeffs, f))
            rep.check_residual(float(np.linalg.norm(lhs - rhs)),
                               tol * max(1.0, float(np.linalg.norm(lhs))),
                               "module action compatibility", f"phi({x},{i}) on ({g},{k})")

    e = unit_section(bundle)
    ident = reg.direct_sum_matrix(e)
    rep.check_residual(float(np.linalg.norm(ident - np.eye(ident.shape[0]))), tol,
                       "unit section acts as identity", "envelope")
    return rep

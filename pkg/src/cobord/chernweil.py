"""Chern-Weil calculus on product meshes.

Bundle geometry is a global connection matrix plus central integral twists
(closed real 2-forms on line summands, realizing nonzero first Chern classes
on tori where no global connection form exists).  Curvature is dA + A^A plus
i times the twists; Chern forms come from det(1 + R/(2 pi i)) by principal
minors, characteristic forms evaluate the multiplicative sequence of a
characteristic series on them, and the cycle operations (transgression,
orientation data, composition, push-forward, products, cup) follow the
form-level formulas, restricted to submersion cycles over product meshes so
every push-forward stays smooth.  Equality modulo exact forms is decided by
periods on tori.
"""

from __future__ import annotations

import itertools

import numpy as np

from cobord.formcalc import (
    CoefficientSpace,
    FormError,
    Mesh,
    SampledForm,
    constant_form,
    diagonal_pullback,
    exterior_d,
    fiber_integrate,
    fiber_integrate_interval,
    merge_sign,
    periods,
    periods_difference,
    promote,
    pullback_insert,
    restrict_interval,
    scale_field,
    tensor_with_vector,
    wedge,
    zero_form,
)
from cobord.genera import CharacteristicSeries, k_phi

TWO_PI = 2.0 * np.pi


class BundleError(ValueError):
    pass


def _trivial():
    return CoefficientSpace.trivial()


class MatrixForm:
    """A rank x rank matrix of trivial-coefficient sampled forms."""

    def __init__(self, mesh: Mesh, rank: int, entries=None):
        self.mesh = mesh
        self.rank = rank
        triv = _trivial()
        if entries is None:
            entries = [
                [zero_form(mesh, triv) for _ in range(rank)] for _ in range(rank)
            ]
        self.entries = entries

    def __add__(self, other):
        return MatrixForm(
            self.mesh,
            self.rank,
            [
                [self.entries[i][j] + other.entries[i][j] for j in range(self.rank)]
                for i in range(self.rank)
            ],
        )

    def scale(self, factor):
        return MatrixForm(
            self.mesh,
            self.rank,
            [[e.scale(factor) for e in row] for row in self.entries],
        )

    def d(self) -> "MatrixForm":
        return MatrixForm(
            self.mesh, self.rank, [[exterior_d(e) for e in row] for row in self.entries]
        )

    def mat_wedge(self, other) -> "MatrixForm":
        out = []
        for i in range(self.rank):
            row = []
            for j in range(self.rank):
                acc = zero_form(self.mesh, _trivial())
                for k in range(self.rank):
                    acc = acc + wedge(self.entries[i][k], other.entries[k][j])
                row.append(acc)
            out.append(row)
        return MatrixForm(self.mesh, self.rank, out)

    def map_entries(self, fn, mesh=None) -> "MatrixForm":
        return MatrixForm(
            mesh or self.mesh, self.rank, [[fn(e) for e in row] for row in self.entries]
        )

    def sup_norm(self) -> float:
        return max(e.sup_norm() for row in self.entries for e in row)


class GeometricBundle:
    """Connection matrix plus central twists; Chern-Weil consumes curvature.

    ``conn`` is a rank x rank MatrixForm of (complex) 1-forms, or None for
    the flat bundle.  ``twists`` lists one closed real 2-form (or None) per
    line summand; a twist omega contributes i*omega to the diagonal
    curvature, so c_1 of that summand is omega/(2 pi) with integer periods.
    """

    def __init__(self, mesh: Mesh, rank: int, conn: MatrixForm | None = None, twists=None):
        if rank < 1:
            raise BundleError("rank must be >= 1")
        self.mesh = mesh
        self.rank = rank
        if conn is not None and (conn.mesh != mesh or conn.rank != rank):
            raise BundleError("connection matrix shape mismatch")
        self.conn = conn
        twists = list(twists) if twists is not None else []
        if len(twists) > rank:
            raise BundleError("more twists than line summands")
        twists += [None] * (rank - len(twists))
        for tw in twists:
            if tw is not None and tw.mesh != mesh:
                raise BundleError("twist mesh mismatch")
        self.twists = twists

    def curvature(self) -> MatrixForm:
        if self.conn is not None:
            R = self.conn.d() + self.conn.mat_wedge(self.conn)
        else:
            R = MatrixForm(self.mesh, self.rank)
        for i, tw in enumerate(self.twists):
            if tw is not None:
                R.entries[i][i] = R.entries[i][i] + tw.scale(1j)
        return R

    def direct_sum(self, other: "GeometricBundle") -> "GeometricBundle":
        if self.mesh != other.mesh:
            raise BundleError("direct sum needs a common mesh")
        rank = self.rank + other.rank
        conn = None
        if self.conn is not None or other.conn is not None:
            conn = MatrixForm(self.mesh, rank)
            for i in range(self.rank):
                for j in range(self.rank):
                    if self.conn is not None:
                        conn.entries[i][j] = self.conn.entries[i][j]
            for i in range(other.rank):
                for j in range(other.rank):
                    if other.conn is not None:
                        conn.entries[self.rank + i][self.rank + j] = other.conn.entries[i][j]
        twists = list(self.twists) + list(other.twists)
        return GeometricBundle(self.mesh, rank, conn, twists)

    def _map_forms(self, fn, mesh) -> "GeometricBundle":
        conn = self.conn.map_entries(fn, mesh) if self.conn is not None else None
        twists = [fn(tw) if tw is not None else None for tw in self.twists]
        return GeometricBundle(mesh, self.rank, conn, twists)

    def pullback(self, new_mesh: Mesh, dirmap) -> "GeometricBundle":
        return self._map_forms(lambda f: pullback_insert(f, new_mesh, dirmap), new_mesh)

    def restrict_interval(self, end: int) -> "GeometricBundle":
        mesh = Mesh(self.mesh.factors[1:])
        return self._map_forms(lambda f: restrict_interval(f, end), mesh)

    def diagonal(self, b: int) -> "GeometricBundle":
        mesh = Mesh(self.mesh.factors[:b] + self.mesh.factors[2 * b :])
        return self._map_forms(lambda f: diagonal_pullback(f, b), mesh)

    def integrality_report(self, tol: float = 1e-8) -> dict:
        """Twists must be closed and have integer periods after 1/(2 pi)."""
        worst_closed = 0.0
        worst_integral = 0.0
        for tw in self.twists:
            if tw is None:
                continue
            worst_closed = max(worst_closed, exterior_d(tw).sup_norm())
            for value in periods(tw.scale(1.0 / TWO_PI), check_closed=False).values():
                worst_integral = max(
                    worst_integral, float(np.max(np.abs(value - np.round(value))))
                )
        return {
            "twist_closed": worst_closed,
            "twist_integrality": worst_integral,
            "ok": worst_closed <= tol and worst_integral <= tol,
        }


def flat_bundle(mesh: Mesh, rank: int = 1) -> GeometricBundle:
    return GeometricBundle(mesh, rank)


# -- Chern forms ---------------------------------------------------------------------


def chern_forms(b: GeometricBundle, i_max: int, imag_tol: float = 1e-8):
    """c_1..c_imax from det(1 + R/(2 pi i)) by principal minors.

    Entries of R/(2 pi i) are even forms, so minors expand with plain
    commutative wedge products.  A residual imaginary part beyond imag_tol
    signals invalid bundle data.
    """
    if i_max < 0:
        raise BundleError("i_max must be >= 0")
    i_max = min(i_max, b.rank)
    M = b.curvature().scale(1.0 / (TWO_PI * 1j))
    triv = _trivial()
    out = []
    for i in range(1, i_max + 1):
        acc = zero_form(b.mesh, triv)
        for subset in itertools.combinations(range(b.rank), i):
            for perm in itertools.permutations(range(i)):
                sign = _perm_sign(perm)
                term = None
                for r, c in enumerate(perm):
                    entry = M.entries[subset[r]][subset[c]]
                    term = entry if term is None else wedge(term, entry)
                acc = acc + term.scale(sign)
        imag = _imag_part(acc)
        if imag.sup_norm() > imag_tol:
            raise BundleError(
                f"c_{i} has imaginary residue {imag.sup_norm():.3e}: invalid bundle data"
            )
        out.append(_real_part(acc))
    return out


def _perm_sign(perm) -> int:
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[j] < perm[i]:
                sign = -sign
    return sign


def _real_part(form: SampledForm) -> SampledForm:
    return SampledForm(
        form.mesh, form.coeff, {I: np.real(a).copy() for I, a in form.comps.items()}
    )


def _imag_part(form: SampledForm) -> SampledForm:
    return SampledForm(
        form.mesh, form.coeff, {I: np.imag(a).copy() for I, a in form.comps.items()}
    )


# -- characteristic forms --------------------------------------------------------------


def _check_space(phi: CharacteristicSeries, space: CoefficientSpace):
    if space.ring.names != phi.ring.names or space.ring.degrees != phi.ring.degrees:
        raise BundleError(
            "coefficient space must be built from the characteristic series' ring"
        )


def phi_form(
    b: GeometricBundle,
    phi: CharacteristicSeries,
    space: CoefficientSpace,
    i_max: int | None = None,
) -> SampledForm:
    """phi(nabla) = K_phi(c_1(nabla), c_2(nabla), ...) as a graded sampled form."""
    _check_space(phi, space)
    nmax = b.mesh.dim // 2
    if i_max is not None:
        nmax = min(nmax, i_max)
    result = constant_form(b.mesh, space)
    if nmax == 0:
        return result
    if phi.order < nmax:
        raise BundleError(f"series order {phi.order} < needed weight {nmax}")
    cs = chern_forms(b, min(nmax, b.rank))
    K = k_phi(phi.truncate(nmax), nmax)
    for n in sorted(K.polys):
        for mono, coeff in sorted(K.polys[n].items()):
            if any(m > 0 and idx >= len(cs) for idx, m in enumerate(mono)):
                continue  # c_i = 0 above the rank
            vec = space.embed(coeff)
            if not np.any(vec):
                continue
            wform = None
            for idx, m in enumerate(mono):
                for _ in range(m):
                    wform = cs[idx] if wform is None else wedge(wform, cs[idx])
            if wform is None or not wform.comps:
                continue
            result = result + tensor_with_vector(wform, space, vec)
    return result


def transgression(
    b: GeometricBundle, phi: CharacteristicSeries, space: CoefficientSpace
) -> SampledForm:
    """Integral over [0,1] x V / V of phi(nabla); d of it is the slice difference."""
    if b.mesh.dim == 0 or b.mesh.kind(0) != "interval":
        raise BundleError("transgression needs the homotopy interval first")
    return fiber_integrate_interval(phi_form(b, phi, space))


def connection_path(
    b0: GeometricBundle, b1: GeometricBundle, n_interval: int
) -> GeometricBundle:
    """Linear homotopy bundle on [0,1] x V between two bundles on V.

    Twists must agree (they carry the topological class); the connection
    interpolates linearly in t.
    """
    if b0.mesh != b1.mesh or b0.rank != b1.rank:
        raise BundleError("homotopy endpoints must share mesh and rank")
    for t0, t1 in zip(b0.twists, b1.twists):
        n0 = 0.0 if t0 is None else t0.sup_norm()
        if (t0 is None) != (t1 is None) or (
            t0 is not None and (t0 - t1).sup_norm() > 1e-12 * max(1.0, n0)
        ):
            raise BundleError("twists must agree along a connection homotopy")
    cyl = Mesh((("interval", n_interval),) + b0.mesh.factors)
    dirmap = {i: i + 1 for i in range(b0.mesh.dim)}
    t_field = cyl.coordinate(0)

    def lift(form):
        return pullback_insert(form, cyl, dirmap)

    conn = None
    if b0.conn is not None or b1.conn is not None:
        c0 = b0.conn or MatrixForm(b0.mesh, b0.rank)
        c1 = b1.conn or MatrixForm(b1.mesh, b1.rank)
        entries = []
        for i in range(b0.rank):
            row = []
            for j in range(b0.rank):
                e0 = lift(c0.entries[i][j])
                e1 = lift(c1.entries[i][j])
                row.append(e0 + scale_field(e1 - e0, t_field))
            entries.append(row)
        conn = MatrixForm(cyl, b0.rank, entries)
    twists = [lift(tw) if tw is not None else None for tw in b0.twists]
    return GeometricBundle(cyl, b0.rank, conn, twists)


def reverse_interval_bundle(b: GeometricBundle) -> GeometricBundle:
    """Pull back along t -> 1-t on a leading interval factor."""

    def rev(form):
        out = {}
        for I, arr in form.comps.items():
            flipped = np.flip(arr, axis=0)
            out[I] = -flipped if 0 in I else flipped
        return SampledForm(form.mesh, form.coeff, out)

    return b._map_forms(rev, b.mesh)


# -- orientations ------------------------------------------------------------------------


class SmoothOrientationDatum:
    """Geometric data for a smoothly oriented projection p: V -> A.

    V is the mesh, whose leading n_base factors form A and whose trailing
    factors (all circles) form the fiber; the bundle is the geometric normal
    datum on V and sigma is a graded form of total degree -1.  The induced
    local index form is A(o) = phi(nabla) - d sigma, closed by construction.
    """

    def __init__(
        self,
        mesh: Mesh,
        n_base: int,
        bundle: GeometricBundle,
        sigma: SampledForm,
        phi: CharacteristicSeries,
        space: CoefficientSpace,
    ):
        if bundle.mesh != mesh:
            raise BundleError("bundle must live on the orientation's mesh")
        for i in range(n_base, mesh.dim):
            if mesh.kind(i) != "circle":
                raise BundleError("orientation fibers must be closed (circle factors)")
        if sigma.mesh != mesh:
            raise BundleError("sigma must live on the orientation's mesh")
        if not space.is_trivial():
            # degree bookkeeping only binds against graded coefficients
            deg = sigma.total_degree()
            if deg is not None and deg != -1:
                raise BundleError(f"sigma must have total degree -1, got {deg}")
        self.mesh = mesh
        self.n_base = n_base
        self.bundle = bundle
        self.sigma = promote(sigma, space) if sigma.coeff.is_trivial() else sigma
        self.phi = phi
        self.space = space
        self._phi_form = None

    @property
    def fiber_dim(self) -> int:
        return self.mesh.dim - self.n_base

    def phi_nabla(self) -> SampledForm:
        if self._phi_form is None:
            self._phi_form = phi_form(self.bundle, self.phi, self.space)
        return self._phi_form

    def a_form(self) -> SampledForm:
        return self.phi_nabla() - exterior_d(self.sigma)


def compose_orientations(
    o_p: SmoothOrientationDatum, o_q: SmoothOrientationDatum
) -> SmoothOrientationDatum:
    """Composite orientation for p o q where q: U -> V and p: V -> A.

    The bundle is nu_q + q^* nu_p and the sigma-component is
    A(o_q) ^ q^* sigma_p + sigma_q ^ q^* phi(nabla_p); the contract
    A(o_p o o_q) = A(o_q) ^ q^* A(o_p) is checked by the suites.
    """
    U = o_q.mesh
    V = o_p.mesh
    if U.factors[: o_q.n_base] != V.factors:
        raise BundleError("orientations are not nested (q's base must be p's total)")
    dirmap = {i: i for i in range(V.dim)}
    q_bundle = o_p.bundle.pullback(U, dirmap)
    bundle = o_q.bundle.direct_sum(q_bundle)
    q_sigma_p = pullback_insert(o_p.sigma, U, dirmap)
    q_phi_p = pullback_insert(o_p.phi_nabla(), U, dirmap)
    sigma = wedge(o_q.a_form(), q_sigma_p) + wedge(o_q.sigma, q_phi_p)
    return SmoothOrientationDatum(U, o_p.n_base, bundle, sigma, o_p.phi, o_p.space)


def pullback_orientation(
    o: SmoothOrientationDatum, new_base: Mesh
) -> SmoothOrientationDatum:
    """Pull back along a projection new_base -> A given by dropping trailing
    factors of new_base beyond A (the Cartesian-square case for product
    meshes): W = new_base x F -> new_base."""
    A_factors = o.mesh.factors[: o.n_base]
    if new_base.factors[: o.n_base] != A_factors:
        raise BundleError("new base must extend the old base as a prefix")
    W = Mesh(new_base.factors + o.mesh.factors[o.n_base :])
    dirmap = {}
    for i in range(o.n_base):
        dirmap[i] = i
    for k in range(o.fiber_dim):
        dirmap[o.n_base + k] = new_base.dim + k
    bundle = o.bundle.pullback(W, dirmap)
    sigma = pullback_insert(o.sigma, W, dirmap)
    return SmoothOrientationDatum(W, new_base.dim, bundle, sigma, o.phi, o.space)


# -- smooth cycles -------------------------------------------------------------------------


class SmoothCycleDatum:
    """A submersion cycle V = A x F -> A with bundle data, plus alpha on A.

    T = fiber integral of phi(nabla); the curvature is R = T - d alpha.
    The empty cycle (bundle None, no fiber) has T = 0 and R = -d alpha.
    """

    def __init__(
        self,
        base_mesh: Mesh,
        fiber_factors,
        bundle: GeometricBundle | None,
        alpha: SampledForm,
        phi: CharacteristicSeries,
        space: CoefficientSpace,
        degree: int | None = None,
    ):
        self.base_mesh = base_mesh
        self.fiber_factors = tuple(fiber_factors)
        for kind, _ in self.fiber_factors:
            if kind != "circle":
                raise BundleError("cycle fibers must be closed (circle factors)")
        self.empty = bundle is None
        if not self.empty:
            total = Mesh(base_mesh.factors + self.fiber_factors)
            if bundle.mesh != total:
                raise BundleError("bundle must live on base x fiber")
        elif self.fiber_factors:
            raise BundleError("empty cycle cannot carry fiber factors")
        self.bundle = bundle
        if alpha.mesh != base_mesh:
            raise BundleError("alpha must live on the base mesh")
        self.alpha = promote(alpha, space) if alpha.coeff.is_trivial() else alpha
        self.phi = phi
        self.space = space
        graded = not space.is_trivial()
        if degree is None:
            if not self.empty:
                degree = -len(self.fiber_factors)
            else:
                adeg = _maybe_total_degree(self.alpha)
                degree = (adeg + 1) if adeg is not None else 0
        self.degree = degree
        if graded:
            adeg = self.alpha.total_degree()
            if adeg is not None and adeg != self.degree - 1:
                raise BundleError(
                    f"alpha has total degree {adeg}, "
                    f"cycle degree {self.degree} needs {self.degree - 1}"
                )
        self._T = None

    @property
    def total_mesh(self) -> Mesh:
        if self.empty:
            return self.base_mesh
        return Mesh(self.base_mesh.factors + self.fiber_factors)

    def T(self) -> SampledForm:
        """The characteristic form p_!(phi(nabla)); zero for the empty cycle."""
        if self._T is None:
            if self.empty:
                self._T = zero_form(self.base_mesh, self.space)
            else:
                w = phi_form(self.bundle, self.phi, self.space)
                self._T = fiber_integrate(w, self.base_mesh.dim)
        return self._T

    def curvature(self) -> SampledForm:
        return self.T() - exterior_d(self.alpha)


def _maybe_total_degree(form: SampledForm):
    try:
        return form.total_degree()
    except FormError:
        return None  # mixed degrees: only possible over trivially graded spaces


def act_form(
    omega: SampledForm, phi: CharacteristicSeries, space: CoefficientSpace
) -> SmoothCycleDatum:
    """a(omega): the empty cycle with alpha = -omega."""
    return SmoothCycleDatum(omega.mesh, (), None, -omega, phi, space)


def geometric_cycle(
    base_mesh: Mesh,
    fiber_factors,
    bundle: GeometricBundle,
    phi: CharacteristicSeries,
    space: CoefficientSpace,
    alpha: SampledForm | None = None,
) -> SmoothCycleDatum:
    if alpha is None:
        alpha = zero_form(base_mesh, space)
    return SmoothCycleDatum(base_mesh, fiber_factors, bundle, alpha, phi, space)


def pushforward_cycle(
    o_p: SmoothOrientationDatum, x: SmoothCycleDatum
) -> SmoothCycleDatum:
    """Push a cycle on V down the oriented projection p: V -> A.

    alpha goes to the fiber integral of phi(nabla_p) ^ alpha + sigma ^ R(x);
    the cycle part composes with the orientation's geometric cycle.
    """
    V = o_p.mesh
    if x.base_mesh != V:
        raise BundleError("cycle must live over the orientation's total space")
    A = Mesh(V.factors[: o_p.n_base])
    integrand = wedge(o_p.phi_nabla(), x.alpha) + wedge(o_p.sigma, x.curvature())
    alpha_new = fiber_integrate(integrand, o_p.n_base)
    if x.empty:
        return SmoothCycleDatum(A, (), None, alpha_new, x.phi, x.space)
    fiber = V.factors[o_p.n_base :] + x.fiber_factors
    U = x.total_mesh
    dirmap = {i: i for i in range(V.dim)}
    bundle = x.bundle.direct_sum(o_p.bundle.pullback(U, dirmap))
    return SmoothCycleDatum(A, fiber, bundle, alpha_new, x.phi, x.space)


def _cross(u: SampledForm, v: SampledForm, mesh_ab: Mesh, a_dim: int) -> SampledForm:
    """Outer product of forms on A and B over the product mesh A x B."""
    up = pullback_insert(u, mesh_ab, {i: i for i in range(u.mesh.dim)})
    vp = pullback_insert(v, mesh_ab, {i: a_dim + i for i in range(v.mesh.dim)})
    return wedge(up, vp)


def product_cycles(x: SmoothCycleDatum, y: SmoothCycleDatum) -> SmoothCycleDatum:
    """The outer product cycle on A x B with
    alpha = (-1)^|x| R(x) x beta + alpha x T(y)."""
    A, B = x.base_mesh, y.base_mesh
    base = Mesh(A.factors + B.factors)
    a_dim = A.dim
    sign = -1.0 if x.degree % 2 else 1.0
    alpha = _cross(x.curvature(), y.alpha, base, a_dim).scale(sign) + _cross(
        x.alpha, y.T(), base, a_dim
    )
    degree = x.degree + y.degree
    if x.empty or y.empty:
        return SmoothCycleDatum(base, (), None, alpha, x.phi, x.space, degree=degree)
    fiber = x.fiber_factors + y.fiber_factors
    total = Mesh(base.factors + fiber)
    fx = len(x.fiber_factors)
    x_map = {i: i for i in range(a_dim)}
    for k in range(fx):
        x_map[a_dim + k] = base.dim + k
    y_map = {i: a_dim + i for i in range(B.dim)}
    for k in range(len(y.fiber_factors)):
        y_map[B.dim + k] = base.dim + fx + k
    bundle = x.bundle.pullback(total, x_map).direct_sum(y.bundle.pullback(total, y_map))
    return SmoothCycleDatum(base, fiber, bundle, alpha, x.phi, x.space, degree=degree)


def cup(x: SmoothCycleDatum, y: SmoothCycleDatum) -> SmoothCycleDatum:
    """Interior product of cycles over the same base (diagonal of the outer
    product, formed directly to stay inside the mesh dimension bound)."""
    if x.base_mesh != y.base_mesh:
        raise BundleError("cup needs a common base mesh")
    A = x.base_mesh
    sign = -1.0 if x.degree % 2 else 1.0
    alpha = wedge(x.curvature(), y.alpha).scale(sign) + wedge(x.alpha, y.T())
    degree = x.degree + y.degree
    if x.empty or y.empty:
        return SmoothCycleDatum(A, (), None, alpha, x.phi, x.space, degree=degree)
    fiber = x.fiber_factors + y.fiber_factors
    total = Mesh(A.factors + fiber)
    fx = len(x.fiber_factors)
    x_map = {i: i for i in range(A.dim)}
    for k in range(fx):
        x_map[A.dim + k] = A.dim + k
    y_map = {i: i for i in range(A.dim)}
    for k in range(len(y.fiber_factors)):
        y_map[A.dim + k] = A.dim + fx + k
    bundle = x.bundle.pullback(total, x_map).direct_sum(y.bundle.pullback(total, y_map))
    return SmoothCycleDatum(A, fiber, bundle, alpha, x.phi, x.space, degree=degree)


def pullback_cycle(
    x: SmoothCycleDatum, new_base: Mesh, base_dirmap=None
) -> SmoothCycleDatum:
    """Pull back along a product projection new_base -> base.

    base_dirmap sends old base axes to new base axes (monotone); by default
    the old base must be a prefix of the new one.  Fiber factors follow the
    new base in their stored order.
    """
    A = x.base_mesh
    if base_dirmap is None:
        if new_base.factors[: A.dim] != A.factors:
            raise BundleError("new base must extend the old base as a prefix")
        base_dirmap = {i: i for i in range(A.dim)}
    dirmap = {int(k): int(v) for k, v in dict(base_dirmap).items()}
    alpha = pullback_insert(x.alpha, new_base, dirmap)
    if x.empty:
        return SmoothCycleDatum(
            new_base, (), None, alpha, x.phi, x.space, degree=x.degree
        )
    total = Mesh(new_base.factors + x.fiber_factors)
    bmap = dict(dirmap)
    for k in range(len(x.fiber_factors)):
        bmap[A.dim + k] = new_base.dim + k
    bundle = x.bundle.pullback(total, bmap)
    return SmoothCycleDatum(
        new_base, x.fiber_factors, bundle, alpha, x.phi, x.space, degree=x.degree
    )

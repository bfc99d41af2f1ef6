"""Seeded demo data and identity suites for the numerical laboratory.

Each suite returns an ordered dict name -> {"value": residual, "tol": ...,
"pass": bool} so the CLI can render JSON/CSV reports and the acceptance
tests can assert.  Demo data is bandlimited (circle modes <= kmax) so the
spectral identities hold to machine accuracy at modest mesh sizes; the
COBORD_THREADS environment variable caps the parallelism used to run the
independent checks of one suite.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from cobord.algebra import GradedRingSpec, TruncatedSeries
from cobord.chernweil import (
    GeometricBundle,
    MatrixForm,
    SmoothCycleDatum,
    SmoothOrientationDatum,
    _cross,
    act_form,
    chern_forms,
    compose_orientations,
    connection_path,
    cup,
    flat_bundle,
    geometric_cycle,
    phi_form,
    product_cycles,
    pullback_cycle,
    pullback_orientation,
    pushforward_cycle,
    reverse_interval_bundle,
    transgression,
)
from cobord.formcalc import (
    CoefficientSpace,
    Mesh,
    SampledForm,
    constant_form,
    cylinder,
    exterior_d,
    fiber_integrate,
    fiber_integrate_interval,
    periods,
    periods_difference,
    pullback_insert,
    random_form,
    random_graded_form,
    restrict_interval,
    torus,
    wedge,
    zero_form,
)
from cobord.genera import CharacteristicSeries, builtin_genus

TOL_CIRCLE = 1e-8
TOL_INTERVAL = 1e-6
TOL_CHARGE = 1e-10


def thread_count() -> int:
    raw = os.environ.get("COBORD_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_checks(checks) -> dict:
    """Run (name, tol, fn) checks, possibly in parallel; keep given order."""
    workers = thread_count()
    results = {}
    if workers == 1:
        values = [fn() for _, _, fn in checks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fn) for _, _, fn in checks]
            values = [f.result() for f in futures]
    for (name, tol, _), value in zip(checks, values):
        value = float(value)
        results[name] = {"value": value, "tol": tol, "pass": value <= tol}
    return results


# -- characteristic data -----------------------------------------------------------------


def formal_phi_ring(n: int, window=(-60, 0)) -> GradedRingSpec:
    gens = [(f"p{i}", -2 * i) for i in range(1, n + 1)]
    return GradedRingSpec(gens, window=window)


def make_phi(name: str, order: int = 3) -> CharacteristicSeries:
    """Named series: builtin catalog names plus "formal" (generic p_i)."""
    if name == "formal":
        ring = formal_phi_ring(order)
        one = TruncatedSeries.one(ring, (("z", 2),), order)
        z = TruncatedSeries.variable(ring, (("z", 2),), order, "z")
        s = one
        for i in range(1, order + 1):
            s = s + (z ** i) * ring.gen(f"p{i}")
        return CharacteristicSeries(s, "formal")
    return builtin_genus(name, order)


def make_space(phi: CharacteristicSeries, window_lo: int = -8) -> CoefficientSpace:
    """Coefficient space over phi's ring truncated to [window_lo, 0]."""
    ring = phi.ring
    if ring.ngens == 0:
        return CoefficientSpace.trivial()
    spec = GradedRingSpec(
        list(zip(ring.names, ring.degrees)), base="Q", window=(window_lo, 0)
    )
    return CoefficientSpace(spec)


# -- bundle generators --------------------------------------------------------------------


def _random_real_one_form(mesh, rng, kmax=1):
    return random_form(mesh, CoefficientSpace.trivial(), 1, rng, kmax=kmax)


def make_line_bundle(
    mesh: Mesh,
    charge: int,
    rng: np.random.Generator,
    twist_axes=(0, 1),
    kmax: int = 1,
    with_connection: bool = True,
) -> GeometricBundle:
    """Line bundle: twist 2 pi q dx^dy on the given circle axes plus an
    anti-Hermitian random connection part."""
    triv = CoefficientSpace.trivial()
    twist = zero_form(mesh, triv)
    arr = np.full(mesh.shape + (1,), 2.0 * np.pi * charge)
    twist.set_component(tuple(twist_axes), arr)
    conn = None
    if with_connection:
        a = _random_real_one_form(mesh, rng, kmax)
        entry = a.scale(1j)
        conn = MatrixForm(mesh, 1, [[entry]])
    return GeometricBundle(mesh, 1, conn, [twist])


def make_u2_bundle(
    mesh: Mesh, rng: np.random.Generator, charges=(1, -1), kmax: int = 1
) -> GeometricBundle:
    """Rank-2 bundle with a non-abelian anti-Hermitian connection and twists."""
    triv = CoefficientSpace.trivial()
    a = _random_real_one_form(mesh, rng, kmax)
    b = _random_real_one_form(mesh, rng, kmax)
    zero = zero_form(mesh, triv)
    # A = i(a sigma_x + b sigma_z): anti-Hermitian pointwise
    entries = [
        [b.scale(1j), a.scale(1j)],
        [a.scale(1j), b.scale(-1j)],
    ]
    conn = MatrixForm(mesh, 2, entries)
    twists = []
    for q in charges:
        tw = zero_form(mesh, triv)
        tw.set_component((0, 1), np.full(mesh.shape + (1,), 2.0 * np.pi * q))
        twists.append(tw)
    return GeometricBundle(mesh, 2, conn, twists)


# -- exterior-calculus suite ------------------------------------------------------------


def suite_formcalc(n: int = 32, seed: int = 0) -> dict:
    """d造d, Leibniz, Stokes, interval homotopy formula, Fubini."""
    rng = np.random.default_rng(seed)
    triv = CoefficientSpace.trivial()
    t3 = torus(3, n)
    cyl = cylinder(torus(2, n), n)

    w1 = random_form(t3, triv, 1, rng, kmax=2)
    e1 = random_form(t3, triv, 1, rng, kmax=2)
    w0c = random_form(cyl, triv, 0, rng)
    e1c = random_form(cyl, triv, 1, rng)
    f2 = random_form(t3, triv, 2, rng, kmax=2)
    hw = [random_form(cyl, triv, k, rng, kmax=2) for k in (0, 1, 2)]

    def dd():
        return exterior_d(exterior_d(w1)).sup_norm()

    def dd_interval():
        return exterior_d(exterior_d(w0c)).sup_norm()

    def leibniz():
        lhs = exterior_d(wedge(w1, e1))
        rhs = wedge(exterior_d(w1), e1) - wedge(w1, exterior_d(e1))
        return (lhs - rhs).sup_norm()

    def leibniz_interval():
        lhs = exterior_d(wedge(w0c, e1c))
        rhs = wedge(exterior_d(w0c), e1c) + wedge(w0c, exterior_d(e1c))
        return (lhs - rhs).sup_norm()

    def stokes():
        lhs = fiber_integrate(exterior_d(f2), 1)
        rhs = exterior_d(fiber_integrate(f2, 1))
        return (lhs - rhs).sup_norm()

    def homotopy():
        worst = 0.0
        for w in hw:
            lhs = exterior_d(fiber_integrate_interval(w)) + fiber_integrate_interval(
                exterior_d(w)
            )
            rhs = restrict_interval(w, 1) - restrict_interval(w, 0)
            worst = max(worst, (lhs - rhs).sup_norm())
        return worst

    def fubini():
        direct = fiber_integrate(f2, 1)
        staged = fiber_integrate(fiber_integrate(f2, 2), 1)
        return (direct - staged).sup_norm()

    return _run_checks(
        [
            ("d_after_d", TOL_CIRCLE, dd),
            ("d_after_d_interval", TOL_CIRCLE, dd_interval),
            ("leibniz", TOL_CIRCLE, leibniz),
            ("leibniz_interval", TOL_INTERVAL, leibniz_interval),
            ("stokes_fiber", TOL_CIRCLE, stokes),
            ("homotopy_formula", TOL_INTERVAL, homotopy),
            ("fubini", TOL_CIRCLE, fubini),
        ]
    )


# -- Chern form suite ----------------------------------------------------------------------


def suite_chern(
    n: int = 32, seed: int = 0, charges=(-3, -2, -1, 0, 1, 2, 3), phi_name: str = "formal"
) -> dict:
    def sub_rng(tag):
        # one generator per check: results do not depend on execution order
        return np.random.default_rng([seed, tag])

    t2 = torus(2, n)
    phi = make_phi(phi_name, 3)
    space = make_space(phi)

    def charge_error():
        rng = sub_rng(1)
        worst = 0.0
        for q in charges:
            b = make_line_bundle(t2, q, rng)
            (c1,) = chern_forms(b, 1)
            table = periods(c1, closed_tol=1e-7)
            worst = max(worst, float(np.max(np.abs(table[(0, 1)] - q))))
        return worst

    def closedness():
        b = make_line_bundle(t2, 2, sub_rng(2))
        (c1,) = chern_forms(b, 1)
        return exterior_d(c1).sup_norm()

    def trivial_bundle():
        b = flat_bundle(t2, 2)
        phi_b = phi_form(b, phi, space)
        return (phi_b - constant_form(t2, space)).sup_norm()

    nw = min(n, 12)
    t4 = torus(4, nw)

    def whitney():
        rng = sub_rng(3)
        b1 = make_line_bundle(t4, 1, rng, twist_axes=(0, 1))
        b2 = make_line_bundle(t4, -2, rng, twist_axes=(2, 3))
        lhs = phi_form(b1.direct_sum(b2), phi, space)
        rhs = wedge(phi_form(b1, phi, space), phi_form(b2, phi, space))
        return (lhs - rhs).sup_norm()

    def block_c1_additive():
        rng = sub_rng(4)
        b1 = make_line_bundle(t4, 1, rng, twist_axes=(0, 1))
        b2 = make_line_bundle(t4, -2, rng, twist_axes=(2, 3))
        (c1_sum,) = chern_forms(b1.direct_sum(b2), 1)
        (c1a,) = chern_forms(b1, 1)
        (c1b,) = chern_forms(b2, 1)
        return (c1_sum - (c1a + c1b)).sup_norm()

    def u2_integrality():
        b = make_u2_bundle(t4, sub_rng(5))
        report = b.integrality_report()
        return max(report["twist_closed"], report["twist_integrality"])

    return _run_checks(
        [
            ("c1_charge_periods", TOL_CHARGE, charge_error),
            ("c1_closed", TOL_CIRCLE, closedness),
            ("phi_of_flat_is_one", TOL_CIRCLE, trivial_bundle),
            ("whitney_form", TOL_CIRCLE, whitney),
            ("c1_block_additive", TOL_CIRCLE, block_c1_additive),
            ("twist_integrality", TOL_CIRCLE, u2_integrality),
        ]
    )


# -- transgression suite ---------------------------------------------------------------------


def suite_transgression(n: int = 32, seed: int = 0, phi_name: str = "todd") -> dict:
    def sub_rng(tag):
        return np.random.default_rng([seed, tag])

    rng = np.random.default_rng(seed)
    phi = make_phi(phi_name, 3)
    space = make_space(phi)
    V = torus(2, n)
    b0 = make_line_bundle(V, 1, rng)
    b1 = make_line_bundle(V, 1, rng)
    h = connection_path(b0, b1, n)

    def transg_identity():
        phit = transgression(h, phi, space)
        lhs = exterior_d(phit)
        rhs = phi_form(b1, phi, space) - phi_form(b0, phi, space)
        return (lhs - rhs).sup_norm()

    def constant_homotopy():
        hc = connection_path(b0, b0, n)
        return transgression(hc, phi, space).sup_norm()

    def reversal():
        phit = transgression(h, phi, space)
        rev = transgression(reverse_interval_bundle(h), phi, space)
        return (rev + phit).sup_norm()

    def slice_consistency():
        # restriction of the homotopy bundle reproduces the endpoints
        worst = 0.0
        for end, b in ((0, b0), (1, b1)):
            pe = phi_form(h.restrict_interval(end), phi, space)
            pb = phi_form(b, phi, space)
            worst = max(worst, (pe - pb).sup_norm())
        return worst

    V3 = torus(3, n)

    def orientation_invariance():
        rng = sub_rng(11)
        bund0 = make_line_bundle(V3, 1, rng)
        bund1 = make_line_bundle(V3, 1, rng)
        sigma = random_graded_form(V3, space, -1, rng) if not space.is_trivial() else (
            random_form(V3, space, 1, rng).scale(0.0)
        )
        o0 = SmoothOrientationDatum(V3, 2, bund0, sigma, phi, space)
        hV = connection_path(bund0, bund1, n)
        phit = transgression(hV, phi, space)
        o1 = SmoothOrientationDatum(V3, 2, bund1, sigma + phit, phi, space)
        return (o1.a_form() - o0.a_form()).sup_norm()

    def sigma_exact_shift():
        rng = sub_rng(12)
        bund = make_line_bundle(V3, 1, rng)
        sigma = random_graded_form(V3, space, -1, rng) if not space.is_trivial() else (
            random_form(V3, space, 1, rng).scale(0.0)
        )
        rho = (
            random_graded_form(V3, space, -2, rng)
            if not space.is_trivial()
            else random_form(V3, space, 0, rng).scale(0.0)
        )
        o0 = SmoothOrientationDatum(V3, 2, bund, sigma, phi, space)
        o1 = SmoothOrientationDatum(V3, 2, bund, sigma + exterior_d(rho), phi, space)
        return (o1.a_form() - o0.a_form()).sup_norm()

    def bordism_curvature():
        # cylinder cycle: d T(b~) = T(boundary b~) with T(b~) the dt-integral
        w = phi_form(h, phi, space)
        lhs = exterior_d(fiber_integrate_interval(w))
        rhs = restrict_interval(w, 1) - restrict_interval(w, 0)
        return (lhs - rhs).sup_norm()

    return _run_checks(
        [
            ("transgression_identity", TOL_INTERVAL, transg_identity),
            ("constant_homotopy_vanishes", 1e-12, constant_homotopy),
            ("reversal_negates", TOL_CIRCLE, reversal),
            ("slice_consistency", TOL_CIRCLE, slice_consistency),
            ("a_form_homotopy_invariance", TOL_INTERVAL, orientation_invariance),
            ("a_form_exact_shift", TOL_CIRCLE, sigma_exact_shift),
            ("bordism_curvature_cylinder", TOL_INTERVAL, bordism_curvature),
        ]
    )


# -- push-forward / product suite ---------------------------------------------------------------


def _graded_or_zero(mesh, space, total_degree, rng, kmax=1):
    if space.is_trivial():
        return zero_form(mesh, space)
    return random_graded_form(mesh, space, total_degree, rng, kmax=kmax)


def suite_pushforward(n: int = 12, seed: int = 0, phi_name: str = "formal") -> dict:
    # the 4-dimensional meshes make N the memory driver; the demo data is
    # bandlimited to modes <= 1, so accuracy does not improve past N = 12
    n = min(n, 12)

    def sub_rng(tag):
        return np.random.default_rng([seed, tag])

    rng = np.random.default_rng(seed)
    phi = make_phi(phi_name, 3)
    space = make_space(phi)

    A = torus(2, n)
    V = torus(3, n)  # A x S^1
    U = torus(4, n)  # V x S^1

    # orientation p: V -> A
    sigma_p = _graded_or_zero(V, space, -1, rng)
    o_p = SmoothOrientationDatum(V, 2, make_line_bundle(V, 1, rng), sigma_p, phi, space)
    # orientation q: U -> V
    sigma_q = _graded_or_zero(U, space, -1, rng)
    o_q = SmoothOrientationDatum(U, 3, make_line_bundle(U, 1, rng), sigma_q, phi, space)

    # degree-0 cycle on V
    alpha_x = _graded_or_zero(V, space, -1, rng)
    x = geometric_cycle(V, (), make_line_bundle(V, -1, rng), phi, space, alpha_x)

    def r_circ_a():
        rng = sub_rng(21)
        omega = _graded_or_zero(A, space, -1, rng)
        if space.is_trivial():
            omega = random_form(A, space, 1, rng, kmax=1)
        cyc = act_form(omega, phi, space)
        return (cyc.curvature() - exterior_d(omega)).sup_norm()

    def left_square():
        rng = sub_rng(22)
        omega = _graded_or_zero(V, space, -1, rng)
        if space.is_trivial():
            omega = random_form(V, space, 1, rng, kmax=1)
        pushed = pushforward_cycle(o_p, act_form(omega, phi, space))
        target = act_form(fiber_integrate(wedge(o_p.a_form(), omega), 2), phi, space)
        diff = pushed.alpha - target.alpha
        return periods_difference(periods(diff, check_closed=False), {})

    def right_square():
        pushed = pushforward_cycle(o_p, x)
        lhs = pushed.curvature()
        rhs = fiber_integrate(wedge(o_p.a_form(), x.curvature()), 2)
        return (lhs - rhs).sup_norm()

    def middle_square_T():
        pushed = pushforward_cycle(o_p, x)
        lhs = pushed.T()
        rhs = fiber_integrate(wedge(o_p.phi_nabla(), x.T()), 2)
        return (lhs - rhs).sup_norm()

    def pushed_curvature_closed():
        pushed = pushforward_cycle(o_p, x)
        return exterior_d(pushed.curvature()).sup_norm()

    def compose_contract():
        comp = compose_orientations(o_p, o_q)
        lhs = comp.a_form()
        q_a_p = pullback_insert(o_p.a_form(), U, {i: i for i in range(3)})
        rhs = wedge(o_q.a_form(), q_a_p)
        return (lhs - rhs).sup_norm()

    def functoriality():
        rng = sub_rng(23)
        alpha_y = _graded_or_zero(U, space, -1, rng)
        y = geometric_cycle(U, (), make_line_bundle(U, -1, rng), phi, space, alpha_y)
        two_stage = pushforward_cycle(o_p, pushforward_cycle(o_q, y))
        composed = pushforward_cycle(compose_orientations(o_p, o_q), y)
        r_resid = (two_stage.curvature() - composed.curvature()).sup_norm()
        a_resid = periods_difference(
            periods(two_stage.alpha - composed.alpha, check_closed=False), {}
        )
        t_resid = (two_stage.T() - composed.T()).sup_norm()
        return max(r_resid, a_resid, t_resid)

    def cartesian_pullback():
        # B = A x S^1, W = B x_A V: push-pull compatibility
        B = torus(3, n)
        o_P = pullback_orientation(o_p, B)
        xW = pullback_cycle(x, o_P.mesh, {0: 0, 1: 1, 2: 3})
        lhs = pushforward_cycle(o_P, xW)
        rhs = pullback_cycle(pushforward_cycle(o_p, x), B)
        r_resid = (lhs.curvature() - rhs.curvature()).sup_norm()
        a_resid = periods_difference(
            periods(lhs.alpha - rhs.alpha, check_closed=False), {}
        )
        return max(r_resid, a_resid)

    def projection_formula():
        rng = sub_rng(24)
        alpha_a = _graded_or_zero(A, space, -1, rng)
        xa = geometric_cycle(A, (), make_line_bundle(A, 1, rng), phi, space, alpha_a)
        alpha_y = _graded_or_zero(V, space, -1, rng)
        y = geometric_cycle(V, (), make_line_bundle(V, 2, rng), phi, space, alpha_y)
        lhs = pushforward_cycle(o_p, cup(pullback_cycle(xa, V), y))
        rhs = cup(xa, pushforward_cycle(o_p, y))
        r_resid = (lhs.curvature() - rhs.curvature()).sup_norm()
        a_resid = periods_difference(
            periods(lhs.alpha - rhs.alpha, check_closed=False), {}
        )
        return max(r_resid, a_resid)

    def product_eweu():
        rng = sub_rng(25)
        A1 = torus(1, n)
        B1 = torus(1, n)
        xa = geometric_cycle(
            Mesh(A1.factors),
            (("circle", n),),
            make_line_bundle(torus(2, n), 1, rng),
            phi,
            space,
            _graded_or_zero(A1, space, -2, rng),
        )
        yb = geometric_cycle(
            Mesh(B1.factors),
            (("circle", n),),
            make_line_bundle(torus(2, n), -1, rng),
            phi,
            space,
            _graded_or_zero(B1, space, -2, rng),
        )
        prod = product_cycles(xa, yb)
        base = prod.base_mesh
        sign = -1.0 if xa.degree % 2 else 1.0
        other = _cross(xa.T(), yb.alpha, base, 1).scale(sign) + _cross(
            xa.alpha, yb.curvature(), base, 1
        )
        diff = prod.alpha - other
        return periods_difference(periods(diff, check_closed=False), {})

    def action_cup():
        rng = sub_rng(26)
        omega = _graded_or_zero(A, space, -1, rng)
        if space.is_trivial():
            omega = random_form(A, space, 1, rng, kmax=1)
        xa = geometric_cycle(
            A, (), make_line_bundle(A, 1, rng), phi, space,
            _graded_or_zero(A, space, -1, rng),
        )
        lhs = cup(act_form(omega, phi, space), xa)
        rhs = act_form(wedge(omega, xa.curvature()), phi, space)
        diff = lhs.alpha - rhs.alpha
        return periods_difference(periods(diff, check_closed=False), {})

    return _run_checks(
        [
            ("curvature_of_action_is_d", TOL_CIRCLE, r_circ_a),
            ("hjhj_left_square", TOL_INTERVAL, left_square),
            ("hjhj_right_square", TOL_INTERVAL, right_square),
            ("hjhj_middle_T", TOL_INTERVAL, middle_square_T),
            ("pushed_curvature_closed", TOL_CIRCLE, pushed_curvature_closed),
            ("composition_contract", TOL_INTERVAL, compose_contract),
            ("functoriality_two_stage", TOL_INTERVAL, functoriality),
            ("cartesian_pullback", TOL_INTERVAL, cartesian_pullback),
            ("projection_formula", TOL_INTERVAL, projection_formula),
            ("product_eweu_periods", TOL_INTERVAL, product_eweu),
            ("action_cup_identity", TOL_INTERVAL, action_cup),
        ]
    )


DEMO_SUITES = {
    "formcalc": suite_formcalc,
    "chern": suite_chern,
    "transgression": suite_transgression,
    "pushforward": suite_pushforward,
}


def suite_axioms(n: int = 12, seed: int = 0, phi_name: str = "formal") -> dict:
    """The named smooth-extension identities in one report."""
    out = {}
    push = suite_pushforward(n=n, seed=seed, phi_name=phi_name)
    for key in (
        "curvature_of_action_is_d",
        "action_cup_identity",
        "hjhj_left_square",
        "hjhj_right_square",
        "projection_formula",
        "product_eweu_periods",
    ):
        out[key] = push[key]
    tr = suite_transgression(n=max(16, n), seed=seed, phi_name="todd")
    out["bordism_curvature_cylinder"] = tr["bordism_curvature_cylinder"]
    return out

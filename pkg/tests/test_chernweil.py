import numpy as np
import pytest

from cobord.chernweil import (
    BundleError,
    GeometricBundle,
    MatrixForm,
    SmoothOrientationDatum,
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
    pushforward_cycle,
    transgression,
)
from cobord.demos import (
    make_line_bundle,
    make_phi,
    make_space,
    make_u2_bundle,
    suite_chern,
    suite_formcalc,
    suite_pushforward,
    suite_transgression,
)
from cobord.formcalc import (
    CoefficientSpace,
    Mesh,
    constant_form,
    cylinder,
    exterior_d,
    fiber_integrate,
    periods,
    periods_difference,
    random_form,
    random_graded_form,
    torus,
    wedge,
    zero_form,
)

TRIV = CoefficientSpace.trivial()


class TestChernForms:
    def test_flat_total_chern_is_one(self):
        b = flat_bundle(torus(2, 8), 2)
        c1, c2 = chern_forms(b, 2)
        assert c1.sup_norm() == 0.0
        assert c2.sup_norm() == 0.0

    def test_line_bundle_charge(self):
        rng = np.random.default_rng(0)
        for q in (-3, -1, 0, 2):
            b = make_line_bundle(torus(2, 16), q, rng)
            (c1,) = chern_forms(b, 1)
            table = periods(c1, closed_tol=1e-8)
            assert abs(float(table[(0, 1)][0]) - q) <= 1e-10

    def test_block_diagonal_c1_adds(self):
        rng = np.random.default_rng(1)
        t4 = torus(4, 8)
        b1 = make_line_bundle(t4, 1, rng, twist_axes=(0, 1))
        b2 = make_line_bundle(t4, 2, rng, twist_axes=(2, 3))
        (c1s,) = chern_forms(b1.direct_sum(b2), 1)
        (c1a,) = chern_forms(b1, 1)
        (c1b,) = chern_forms(b2, 1)
        assert (c1s - (c1a + c1b)).sup_norm() <= 1e-10

    def test_c2_of_block_is_product(self):
        rng = np.random.default_rng(2)
        t4 = torus(4, 8)
        b1 = make_line_bundle(t4, 1, rng, twist_axes=(0, 1))
        b2 = make_line_bundle(t4, 2, rng, twist_axes=(2, 3))
        c1a = chern_forms(b1, 1)[0]
        c1b = chern_forms(b2, 1)[0]
        c2 = chern_forms(b1.direct_sum(b2), 2)[1]
        assert (c2 - wedge(c1a, c1b)).sup_norm() <= 1e-8

    def test_chern_forms_closed(self):
        rng = np.random.default_rng(3)
        b = make_u2_bundle(torus(4, 8), rng)
        for c in chern_forms(b, 2):
            assert exterior_d(c).sup_norm() <= 1e-8

    def test_imaginary_part_rejected(self):
        # a non-anti-Hermitian connection leaks an imaginary c_1
        mesh = torus(2, 8)
        rng = np.random.default_rng(4)
        a = random_form(mesh, TRIV, 1, rng, kmax=1)
        conn = MatrixForm(mesh, 1, [[a]])  # real 1-form: R = da is not i*real
        b = GeometricBundle(mesh, 1, conn)
        with pytest.raises(BundleError):
            chern_forms(b, 1)

    def test_integrality_report(self):
        rng = np.random.default_rng(5)
        b = make_line_bundle(torus(2, 16), 3, rng)
        report = b.integrality_report()
        assert report["ok"]


class TestPhiForm:
    def test_phi_one_gives_constant(self):
        rng = np.random.default_rng(7)
        b = make_line_bundle(torus(2, 8), 2, rng)
        phi = make_phi("one", 3)
        space = make_space(phi)
        result = phi_form(b, phi, space)
        assert (result - constant_form(b.mesh, space)).sup_norm() <= 1e-12

    def test_linear_phi_line_bundle(self):
        # phi = 1 + p1 z on a line bundle: 1 + p1 c1
        rng = np.random.default_rng(8)
        b = make_line_bundle(torus(2, 8), 2, rng)
        phi = make_phi("formal", 1)
        space = make_space(phi)
        result = phi_form(b, phi, space)
        (c1,) = chern_forms(b, 1)
        p1_slot = space.index[(1,)]
        expected = constant_form(b.mesh, space)
        arr = np.zeros(b.mesh.shape + (space.dim,))
        arr[..., p1_slot] = c1.component((0, 1))[..., 0]
        expected.comps[(0, 1)] = arr
        assert (result - expected).sup_norm() <= 1e-12

    def test_whitney(self):
        rng = np.random.default_rng(9)
        t4 = torus(4, 8)
        b1 = make_line_bundle(t4, 1, rng, twist_axes=(0, 1))
        b2 = make_line_bundle(t4, -1, rng, twist_axes=(2, 3))
        phi = make_phi("formal", 3)
        space = make_space(phi)
        lhs = phi_form(b1.direct_sum(b2), phi, space)
        rhs = wedge(phi_form(b1, phi, space), phi_form(b2, phi, space))
        assert (lhs - rhs).sup_norm() <= 1e-8

    def test_todd_phi_is_real_scalar(self):
        rng = np.random.default_rng(10)
        b = make_line_bundle(torus(2, 8), 1, rng)
        phi = make_phi("todd", 3)
        space = make_space(phi)
        assert space.is_trivial()
        result = phi_form(b, phi, space)
        assert exterior_d(result).sup_norm() <= 1e-8


class TestTransgression:
    def test_identity_and_reversal(self):
        report = suite_transgression(n=16, seed=0, phi_name="todd")
        for name, row in report.items():
            assert row["pass"], (name, row)

    def test_formal_coefficients(self):
        report = suite_transgression(n=16, seed=1, phi_name="formal")
        for name, row in report.items():
            assert row["pass"], (name, row)

    def test_constant_homotopy_zero(self):
        rng = np.random.default_rng(11)
        V = torus(2, 8)
        b = make_line_bundle(V, 1, rng)
        h = connection_path(b, b, 8)
        phi = make_phi("todd", 3)
        assert transgression(h, phi, make_space(phi)).sup_norm() <= 1e-12

    def test_twist_mismatch_rejected(self):
        rng = np.random.default_rng(12)
        V = torus(2, 8)
        b0 = make_line_bundle(V, 1, rng)
        b1 = make_line_bundle(V, 2, rng)
        with pytest.raises(BundleError):
            connection_path(b0, b1, 8)


class TestOrientation:
    def test_sigma_zero_gives_phi(self):
        rng = np.random.default_rng(13)
        V = torus(3, 8)
        phi = make_phi("formal", 2)
        space = make_space(phi)
        bundle = make_line_bundle(V, 1, rng)
        o = SmoothOrientationDatum(V, 2, bundle, zero_form(V, space), phi, space)
        assert (o.a_form() - phi_form(bundle, phi, space)).sup_norm() <= 1e-12

    def test_a_form_closed(self):
        rng = np.random.default_rng(14)
        V = torus(3, 8)
        phi = make_phi("formal", 2)
        space = make_space(phi)
        sigma = random_graded_form(V, space, -1, rng)
        o = SmoothOrientationDatum(V, 2, make_line_bundle(V, 1, rng), sigma, phi, space)
        assert exterior_d(o.a_form()).sup_norm() <= 1e-7

    def test_wrong_sigma_degree_rejected(self):
        rng = np.random.default_rng(15)
        V = torus(3, 8)
        phi = make_phi("formal", 2)
        space = make_space(phi)
        sigma = random_graded_form(V, space, -2, rng)
        with pytest.raises(BundleError):
            SmoothOrientationDatum(V, 2, make_line_bundle(V, 1, rng), sigma, phi, space)

    def test_compose_trivial(self):
        # flat bundles, zero sigmas, phi = 1: composite A-form is 1
        V = torus(3, 8)
        U = torus(4, 8)
        phi = make_phi("one", 2)
        space = make_space(phi)
        o_p = SmoothOrientationDatum(V, 2, flat_bundle(V), zero_form(V, space), phi, space)
        o_q = SmoothOrientationDatum(U, 3, flat_bundle(U), zero_form(U, space), phi, space)
        comp = compose_orientations(o_p, o_q)
        assert (comp.a_form() - constant_form(U, space)).sup_norm() <= 1e-12
        assert comp.sigma.sup_norm() <= 1e-12

    def test_compose_trivial_q_side(self):
        # o_q flat with sigma = 0: composite A-form collapses to q^* A(o_p)
        from cobord.formcalc import pullback_insert

        rng = np.random.default_rng(33)
        phi = make_phi("formal", 2)
        space = make_space(phi)
        V = torus(3, 8)
        U = torus(4, 8)
        sigma_p = random_graded_form(V, space, -1, rng)
        o_p = SmoothOrientationDatum(
            V, 2, make_line_bundle(V, 1, rng), sigma_p, phi, space
        )
        o_q = SmoothOrientationDatum(U, 3, flat_bundle(U), zero_form(U, space), phi, space)
        comp = compose_orientations(o_p, o_q)
        expected = pullback_insert(o_p.a_form(), U, {i: i for i in range(3)})
        assert (comp.a_form() - expected).sup_norm() <= 1e-7


class TestCycles:
    def setup_method(self):
        self.rng = np.random.default_rng(21)
        self.phi = make_phi("formal", 3)
        self.space = make_space(self.phi)
        self.A = torus(2, 8)
        self.V = torus(3, 8)

    def orientation(self):
        sigma = random_graded_form(self.V, self.space, -1, self.rng)
        return SmoothOrientationDatum(
            self.V, 2, make_line_bundle(self.V, 1, self.rng), sigma, self.phi, self.space
        )

    def test_act_form_curvature(self):
        omega = random_graded_form(self.A, self.space, -1, self.rng)
        cyc = act_form(omega, self.phi, self.space)
        assert (cyc.curvature() - exterior_d(omega)).sup_norm() <= 1e-12
        assert cyc.T().sup_norm() == 0.0

    def test_degree_zero_cycle_T(self):
        bundle = make_line_bundle(self.V, 1, self.rng)
        x = geometric_cycle(self.V, (), bundle, self.phi, self.space)
        assert (x.T() - phi_form(bundle, self.phi, self.space)).sup_norm() <= 1e-12

    def test_push_alpha_zero_sigma_zero(self):
        o = SmoothOrientationDatum(
            self.V, 2, make_line_bundle(self.V, 1, self.rng),
            zero_form(self.V, self.space), self.phi, self.space,
        )
        x = geometric_cycle(self.V, (), make_line_bundle(self.V, -1, self.rng),
                            self.phi, self.space)
        pushed = pushforward_cycle(o, x)
        assert pushed.alpha.sup_norm() <= 1e-12
        expected_T = fiber_integrate(wedge(o.phi_nabla(), x.T()), 2)
        assert (pushed.T() - expected_T).sup_norm() <= 1e-7

    def test_push_curvature_square(self):
        o = self.orientation()
        alpha = random_graded_form(self.V, self.space, -1, self.rng)
        x = geometric_cycle(self.V, (), make_line_bundle(self.V, -1, self.rng),
                            self.phi, self.space, alpha)
        pushed = pushforward_cycle(o, x)
        rhs = fiber_integrate(wedge(o.a_form(), x.curvature()), 2)
        assert (pushed.curvature() - rhs).sup_norm() <= 1e-6

    def test_product_empty_beta_zero(self):
        # y empty with beta = 0 and x with alpha = 0: product alpha vanishes
        x = geometric_cycle(self.A, (), make_line_bundle(self.A, 1, self.rng),
                            self.phi, self.space)
        y = act_form(zero_form(torus(1, 8), self.space), self.phi, self.space)
        prod = product_cycles(x, y)
        assert prod.empty
        assert prod.alpha.sup_norm() == 0.0

    def test_product_unit_curvature(self):
        # x a closed degree-0 cycle with R(x) = 1 (flat, alpha = 0):
        # product alpha = beta pulled back from the second factor
        from cobord.formcalc import pullback_insert

        x = geometric_cycle(self.A, (), flat_bundle(self.A), self.phi, self.space)
        B = torus(1, 8)
        beta = random_graded_form(B, self.space, -1, self.rng)
        y = act_form(-beta, self.phi, self.space)  # alpha_y = beta
        prod = product_cycles(x, y)
        base = Mesh(self.A.factors + B.factors)
        pulled = pullback_insert(beta, base, {0: self.A.dim})
        assert prod.alpha.total_degree() in (-1, None)
        assert (prod.alpha - pulled).sup_norm() <= 1e-12

    def test_cup_same_base(self):
        x = geometric_cycle(self.A, (), make_line_bundle(self.A, 1, self.rng),
                            self.phi, self.space,
                            random_graded_form(self.A, self.space, -1, self.rng))
        y = geometric_cycle(self.A, (), make_line_bundle(self.A, 2, self.rng),
                            self.phi, self.space,
                            random_graded_form(self.A, self.space, -1, self.rng))
        prod = cup(x, y)
        assert prod.base_mesh == self.A
        # curvature of the cup is the wedge of curvatures up to exact terms
        lhs = prod.curvature()
        rhs = wedge(x.curvature(), y.curvature())
        assert periods_difference(
            periods(lhs - rhs, check_closed=False), {}
        ) <= 1e-6


class TestAnalyticPredictions:
    def test_pushforward_T_of_mixed_twist(self):
        # line bundle on V = T^2 x S^1 with twist 2 pi q dx1 ^ dx2 (one base,
        # one fiber direction): integrating phi = 1 + p1 z over the fiber
        # gives T = p1 q dx1 exactly, period q
        rng = np.random.default_rng(41)
        phi = make_phi("formal", 1)
        space = make_space(phi)
        V = torus(3, 16)
        q = 3
        b = make_line_bundle(V, q, rng, twist_axes=(1, 2), with_connection=False)
        x = geometric_cycle(V, (), b, phi, space)
        o = SmoothOrientationDatum(
            V, 2, flat_bundle(V), zero_form(V, space), make_phi("one", 1), space
        )
        # direct fiber integral of phi(nabla): only the dx1^dx2 component survives
        T = fiber_integrate(phi_form(b, phi, space), 2)
        p1_slot = space.index[(1,)]
        arr = T.component((1,))
        assert np.max(np.abs(arr[..., p1_slot] - q)) <= 1e-12
        other = sum(
            np.max(np.abs(a)) for I, a in T.comps.items() if I != (1,)
        )
        assert other <= 1e-12
        table = periods(T, check_closed=True, closed_tol=1e-8)
        assert abs(float(table[(1,)][p1_slot]) - q) <= 1e-12

    def test_rank3_top_chern_is_product(self):
        # three twisted line summands on T^6: c_3 = c1 ^ c1' ^ c1''
        rng = np.random.default_rng(43)
        t6 = torus(6, 4)
        bundles = [
            make_line_bundle(t6, q, rng, twist_axes=axes, with_connection=False)
            for q, axes in ((1, (0, 1)), (2, (2, 3)), (-1, (4, 5)))
        ]
        total = bundles[0].direct_sum(bundles[1]).direct_sum(bundles[2])
        c1s = [chern_forms(b, 1)[0] for b in bundles]
        c3 = chern_forms(total, 3)[2]
        expected = wedge(wedge(c1s[0], c1s[1]), c1s[2])
        assert (c3 - expected).sup_norm() <= 1e-10
        table = periods(c3, closed_tol=1e-8)
        assert abs(float(table[(0, 1, 2, 3, 4, 5)][0]) - (1 * 2 * -1)) <= 1e-10

    def test_cup_matches_diagonal_of_product(self):
        # the direct cup formula agrees with pulling the outer product back
        # along the diagonal (small base so the double mesh stays in bounds)
        from cobord.formcalc import diagonal_pullback

        rng = np.random.default_rng(47)
        phi = make_phi("formal", 2)
        space = make_space(phi)
        A = torus(1, 8)
        x = geometric_cycle(A, (), flat_bundle(A), phi, space,
                            random_graded_form(A, space, -1, rng))
        y = geometric_cycle(A, (), flat_bundle(A), phi, space,
                            random_graded_form(A, space, -1, rng))
        direct = cup(x, y)
        outer = product_cycles(x, y)
        diag_alpha = diagonal_pullback(outer.alpha, 1)
        assert (direct.alpha - diag_alpha).sup_norm() <= 1e-12

    def test_cup_associativity(self):
        rng = np.random.default_rng(53)
        phi = make_phi("formal", 2)
        space = make_space(phi)
        A = torus(2, 8)
        cycles = [
            geometric_cycle(A, (), make_line_bundle(A, q, rng), phi, space,
                            random_graded_form(A, space, -1, rng))
            for q in (1, -1, 2)
        ]
        left = cup(cup(cycles[0], cycles[1]), cycles[2])
        right = cup(cycles[0], cup(cycles[1], cycles[2]))
        assert (left.curvature() - right.curvature()).sup_norm() <= 1e-6
        from cobord.formcalc import periods_difference

        assert periods_difference(
            periods(left.alpha - right.alpha, check_closed=False), {}
        ) <= 1e-6


class TestSuites:
    def test_formcalc_suite(self):
        report = suite_formcalc(n=16, seed=0)
        for name, row in report.items():
            assert row["pass"], (name, row)

    def test_chern_suite(self):
        report = suite_chern(n=16, seed=0)
        for name, row in report.items():
            assert row["pass"], (name, row)

    def test_pushforward_suite(self):
        report = suite_pushforward(n=8, seed=0, phi_name="formal")
        for name, row in report.items():
            assert row["pass"], (name, row)

    def test_pushforward_suite_todd(self):
        report = suite_pushforward(n=8, seed=1, phi_name="todd")
        for name, row in report.items():
            assert row["pass"], (name, row)

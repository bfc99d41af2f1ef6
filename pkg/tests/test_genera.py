import random
from fractions import Fraction
from math import factorial

import pytest

from cobord.algebra import GradedRingSpec, TruncatedSeries, rational_ring
from cobord.genera import (
    CharacteristicSeries,
    GenusError,
    GenusTable,
    builtin_genus,
    eval_sequence,
    eval_sequence_generic,
    genus_cpn,
    genus_cpn_via_chern,
    genus_extend,
    genus_table,
    k_phi,
)

# ---------------------------------------------------------------------------
# Independent oracle: dense rational series on plain lists.  Written before
# and kept independent of the symmetric-function engine it checks.
# ---------------------------------------------------------------------------


def mul_dense(a, b, order):
    out = [Fraction(0)] * (order + 1)
    for i, ai in enumerate(a[: order + 1]):
        if ai == 0:
            continue
        for j, bj in enumerate(b[: order + 1 - i]):
            out[i + j] += ai * bj
    return out


def inv_dense(a, order):
    assert a[0] == 1
    out = [Fraction(0)] * (order + 1)
    out[0] = Fraction(1)
    for n in range(1, order + 1):
        acc = Fraction(0)
        for k in range(1, n + 1):
            if k < len(a):
                acc += a[k] * out[n - k]
        out[n] = -acc
    return out


def pow_dense(a, n, order):
    out = [Fraction(1)] + [Fraction(0)] * order
    for _ in range(n):
        out = mul_dense(out, a, order)
    return out


def todd_phi_dense(order):
    # (1 - e^{-z})/z
    return [Fraction((-1) ** k, factorial(k + 1)) for k in range(order + 1)]


def l_phi_dense(order):
    # tanh(z)/z = (sinh z / z) * (cosh z)^(-1)
    sinh_over_z = [
        Fraction(1, factorial(k + 1)) if k % 2 == 0 else Fraction(0)
        for k in range(order + 1)
    ]
    cosh = [
        Fraction(1, factorial(k)) if k % 2 == 0 else Fraction(0)
        for k in range(order + 1)
    ]
    return mul_dense(sinh_over_z, inv_dense(cosh, order), order)


def a_hat_phi_dense(order):
    # sinh(z/2)/(z/2)
    out = [Fraction(0)] * (order + 1)
    for k in range(0, order + 1, 2):
        out[k] = Fraction(1, 4 ** (k // 2) * factorial(k + 1))
    return out


def genus_cpn_dense(phi_dense, n):
    """[z^n] phi^-(n+1), the oracle for the genus of CP^n."""
    inv = inv_dense(phi_dense, n)
    return pow_dense(inv, n + 1, n)[n]


def test_oracle_self_checks():
    phi = todd_phi_dense(6)
    assert phi[0] == 1 and phi[1] == Fraction(-1, 2) and phi[2] == Fraction(1, 6)
    prod = mul_dense(phi, inv_dense(phi, 6), 6)
    assert prod[0] == 1 and all(c == 0 for c in prod[1:])


# ---------------------------------------------------------------------------
# fixtures
# ---------------------------------------------------------------------------


def formal_phi_ring(n):
    gens = [(f"p{i}", -2 * i) for i in range(1, n + 1)]
    return GradedRingSpec(gens, window=(-4 * n * n - 8, 0))


def formal_phi(n, order=None):
    order = order if order is not None else n
    ring = formal_phi_ring(n)
    one = TruncatedSeries.one(ring, (("z", 2),), order)
    z = TruncatedSeries.variable(ring, (("z", 2),), order, "z")
    s = one
    for i in range(1, min(n, order) + 1):
        s = s + (z ** i) * ring.gen(f"p{i}")
    return CharacteristicSeries(s, "formal")


def rational_phi(rng, order):
    ring = rational_ring(window=(-64, 0))
    one = TruncatedSeries.one(ring, (("z", 2),), order)
    z = TruncatedSeries.variable(ring, (("z", 2),), order, "z")
    s = one
    for i in range(1, order + 1):
        s = s + (z ** i) * Fraction(rng.randint(-6, 6), rng.randint(1, 4))
    return CharacteristicSeries(s)


# ---------------------------------------------------------------------------
# K_phi
# ---------------------------------------------------------------------------


class TestKPhi:
    def test_phi_one_gives_zero(self):
        phi = builtin_genus("one", 4)
        K = k_phi(phi, 4)
        for n in range(1, 5):
            assert K.polys[n] == {}

    def test_linear_phi(self):
        # phi = 1 + p1 z  =>  K_n = p1^n c_n
        phi = formal_phi(1, order=3)
        K = k_phi(phi, 3)
        ring = phi.ring
        p1 = ring.gen("p1")
        for n in range(1, 4):
            mono = tuple(0 for _ in range(n - 1)) + (1,)
            assert K.polys[n] == {mono: p1 ** n}

    def test_weight_two(self):
        # K_2 = p2 c_1^2 + (p1^2 - 2 p2) c_2
        phi = formal_phi(2)
        K = k_phi(phi, 2)
        ring = phi.ring
        p1, p2 = ring.gen("p1"), ring.gen("p2")
        assert K.polys[2] == {(2, 0): p2, (0, 1): p1 * p1 - p2 * 2}

    def test_weighted_homogeneity(self):
        rng = random.Random(23)
        for _ in range(5):
            n = rng.randint(2, 5)
            K = k_phi(formal_phi(n), n)
            assert K.weight_check()
            assert K.total_degree_check()

    def test_product_expansion_oracle(self):
        # Evaluating K_phi on sigma(q_i * a) in Q[a]/(a^{N+1}) must reproduce
        # prod phi(q_i a) exactly.
        rng = random.Random(41)
        N = 4
        phi = rational_phi(rng, N)
        K = k_phi(phi, N)
        ring = phi.ring
        avar = (("a", 2),)
        one = TruncatedSeries.one(ring, avar, N)
        a = TruncatedSeries.variable(ring, avar, N, "a")
        qs = [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(3)]
        roots = [a * q for q in qs]
        sigma = self._elementary(roots, one)
        lhs = eval_sequence_generic(K, sigma, one)
        rhs = one
        for q in qs:
            rhs = rhs * phi.series.compose(a * q)
        assert lhs == rhs

    @staticmethod
    def _elementary(roots, one):
        # e_k of the given algebra elements, all k
        zero = one - one
        e = [one] + [zero] * len(roots)
        for r in roots:
            for k in range(len(roots), 0, -1):
                e[k] = e[k] + e[k - 1] * r
        return e[1:]


class TestEvalSequence:
    def test_zero_cherns(self):
        phi = formal_phi(2)
        K = k_phi(phi, 2)
        ring = phi.ring
        assert eval_sequence(K, [ring.zero(), ring.zero()]) == ring.one()

    def test_linear_substitution(self):
        # K for phi = 1 + p1 z with c_1 = t  ->  1 + p1 t
        ring = GradedRingSpec([("p1", -2), ("t", 2)], window=(-16, 16))
        one = TruncatedSeries.one(ring, (("z", 2),), 2)
        z = TruncatedSeries.variable(ring, (("z", 2),), 2, "z")
        phi = CharacteristicSeries(one + z * ring.gen("p1"))
        K = k_phi(phi, 2)
        value = eval_sequence(K, [ring.gen("t"), ring.zero()])
        assert value == ring.one() + ring.gen("p1") * ring.gen("t")

    def test_stability_trailing_zeros(self):
        phi = formal_phi(3)
        K = k_phi(phi, 3)
        ring = phi.ring
        c1 = ring.scalar(Fraction(2, 3))
        short = eval_sequence(K, [c1])
        padded = eval_sequence(K, [c1, ring.zero(), ring.zero()])
        assert short == padded

    def test_whitney_split(self):
        # splitting the root multiset multiplies the evaluations
        rng = random.Random(57)
        N = 4
        phi = rational_phi(rng, N)
        K = k_phi(phi, N)
        ring = phi.ring
        avar = (("a", 2),)
        one = TruncatedSeries.one(ring, avar, N)
        a = TruncatedSeries.variable(ring, avar, N, "a")
        group1 = [a * Fraction(rng.randint(-3, 3)) for _ in range(2)]
        group2 = [a * Fraction(rng.randint(-3, 3)) for _ in range(2)]
        sig_all = TestKPhi._elementary(group1 + group2, one)
        sig1 = TestKPhi._elementary(group1, one)
        sig2 = TestKPhi._elementary(group2, one)
        lhs = eval_sequence_generic(K, sig_all, one)
        rhs = eval_sequence_generic(K, sig1, one) * eval_sequence_generic(K, sig2, one)
        assert lhs == rhs


# ---------------------------------------------------------------------------
# genus of CP^n
# ---------------------------------------------------------------------------


class TestGenusCPn:
    def test_phi_one(self):
        phi = builtin_genus("one", 6)
        for n in range(1, 7):
            assert genus_cpn(phi, n).is_zero()

    def test_todd_is_one(self):
        phi = builtin_genus("todd", 8)
        for n in range(1, 9):
            value = genus_cpn(phi, n)
            assert value == phi.ring.one()
            assert genus_cpn_dense(todd_phi_dense(n), n) == 1

    def test_l_genus_signature(self):
        phi = builtin_genus("l_genus", 8)
        for n in range(1, 9):
            expected = 1 if n % 2 == 0 else 0
            assert genus_cpn(phi, n) == phi.ring.scalar(expected)
            assert genus_cpn_dense(l_phi_dense(n), n) == expected

    def test_a_hat_cp2(self):
        phi = builtin_genus("a_hat", 4)
        assert genus_cpn(phi, 2) == phi.ring.scalar(Fraction(-1, 8))
        assert genus_cpn_dense(a_hat_phi_dense(2), 2) == Fraction(-1, 8)

    def test_order_too_small(self):
        phi = builtin_genus("todd", 3)
        with pytest.raises(GenusError):
            genus_cpn(phi, 5)


class TestViaChern:
    def test_todd_cp2(self):
        phi = builtin_genus("todd", 4)
        assert genus_cpn_via_chern(phi, 2) == phi.ring.one()
        assert genus_cpn_via_chern(phi, 2) == genus_cpn(phi, 2)

    def test_linear_phi_cp1(self):
        # c_1(N) = -2a for CP^1, so the value is -2 p1
        phi = formal_phi(1, order=2)
        ring = phi.ring
        assert genus_cpn_via_chern(phi, 1) == ring.gen("p1") * (-2)

    def test_phi_one(self):
        phi = builtin_genus("one", 4)
        for n in range(1, 5):
            assert genus_cpn_via_chern(phi, n).is_zero()

    def test_cross_route_builtins(self):
        for name in ("todd", "l_genus", "a_hat"):
            phi = builtin_genus(name, 6)
            for n in range(1, 7):
                assert genus_cpn(phi, n) == genus_cpn_via_chern(phi, n)

    def test_cross_route_random(self):
        rng = random.Random(101)
        for _ in range(6):
            phi = rational_phi(rng, 5)
            for n in range(1, 6):
                assert genus_cpn(phi, n) == genus_cpn_via_chern(phi, n)

    def test_cross_route_formal(self):
        phi = formal_phi(3)
        for n in range(1, 4):
            assert genus_cpn(phi, n) == genus_cpn_via_chern(phi, n)


# ---------------------------------------------------------------------------
# builtin catalog
# ---------------------------------------------------------------------------


class TestBuiltins:
    def test_todd_expansion(self):
        # (1 - e^{-z})/z = 1 - z/2 + z^2/6 - z^3/24 + ...
        phi = builtin_genus("todd", 3)
        ring = phi.ring
        assert phi.coefficient(0) == ring.one()
        assert phi.coefficient(1) == ring.scalar(Fraction(-1, 2))
        assert phi.coefficient(2) == ring.scalar(Fraction(1, 6))
        assert phi.coefficient(3) == ring.scalar(Fraction(-1, 24))
        dense = todd_phi_dense(3)
        for k in range(4):
            assert phi.coefficient(k) == ring.scalar(dense[k])

    def test_todd_inverse_is_bernoulli(self):
        # 1/phi = z/(1 - e^{-z}) = 1 + z/2 + z^2/12 + 0 z^3 - z^4/720
        phi = builtin_genus("todd", 4).inverse()
        ring = phi.ring
        expected = [
            Fraction(1),
            Fraction(1, 2),
            Fraction(1, 12),
            Fraction(0),
            Fraction(-1, 720),
        ]
        for k, c in enumerate(expected):
            assert phi.coefficient(k) == ring.scalar(c)

    def test_l_genus_expansion(self):
        phi = builtin_genus("l_genus", 4)
        ring = phi.ring
        assert phi.coefficient(1) == ring.zero()
        assert phi.coefficient(2) == ring.scalar(Fraction(-1, 3))
        assert phi.coefficient(4) == ring.scalar(Fraction(2, 15))

    def test_elliptic_formal_coefficients(self):
        phi = builtin_genus("elliptic", 4)
        ring = phi.ring
        delta, eps = ring.gen("delta"), ring.gen("eps")
        assert phi.coefficient(1).is_zero()
        assert phi.coefficient(2) == delta * Fraction(-1, 3)
        assert phi.coefficient(4) == delta * delta * Fraction(1, 30) + eps * Fraction(1, 10)

    def test_elliptic_l_degeneration(self):
        # eps = delta^2 = 1 degenerates to the L-series; CP^1 value is 0
        phi = builtin_genus("elliptic", 4, delta=1, eps=1)
        lphi = builtin_genus("l_genus", 4)
        for k in range(5):
            assert phi.coefficient(k).scalar_value() == lphi.coefficient(k).scalar_value()
        assert genus_cpn(phi, 1).is_zero()

    def test_a_hat_elliptic_degeneration(self):
        # delta = -1/8, eps = 0 gives the a_hat series
        phi = builtin_genus("elliptic", 4, delta=Fraction(-1, 8), eps=0)
        ahat = builtin_genus("a_hat", 4)
        for k in range(5):
            assert phi.coefficient(k).scalar_value() == ahat.coefficient(k).scalar_value()

    def test_unknown_name(self):
        with pytest.raises(GenusError):
            builtin_genus("mystery", 3)


# ---------------------------------------------------------------------------
# genus tables and extension
# ---------------------------------------------------------------------------


class TestGenusExtend:
    def universal(self, N):
        gens = [(f"cp{i}", -2 * i) for i in range(1, N + 1)]
        return GradedRingSpec(gens, window=(-8 * N, 0))

    def test_square_of_cp1(self):
        table = genus_table(builtin_genus("todd", 4), 4)
        ring = self.universal(4)
        expr = ring.gen("cp1") ** 2
        assert genus_extend(table, expr) == table.phi.ring.one()

    def test_unit(self):
        table = genus_table(builtin_genus("todd", 2), 2)
        ring = self.universal(2)
        assert genus_extend(table, ring.one()) == table.phi.ring.one()

    def test_trivial_genus_kills_positive(self):
        table = genus_table(builtin_genus("one", 2), 2)
        ring = self.universal(2)
        expr = ring.gen("cp2") - ring.gen("cp1") ** 2
        assert genus_extend(table, expr).is_zero()

    def test_out_of_range(self):
        table = genus_table(builtin_genus("todd", 2), 2)
        ring = self.universal(3)
        with pytest.raises(GenusError):
            genus_extend(table, ring.gen("cp3"))

    def test_identity_table_is_identity(self):
        # the universal transformation's only computable face: extending the
        # table r(CP^n) = [CP^n] acts as the identity on polynomials
        from cobord.genera import identity_genus_table

        table = identity_genus_table(4)
        ring = table.ring
        expr = ring.gen("cp1") ** 2 - ring.gen("cp2") * 3 + ring.one()
        assert genus_extend(table, expr) == expr


def test_eval_sequence_degree_mismatch():
    ring = GradedRingSpec([("p1", -2), ("t", 2)], window=(-16, 16))
    one = TruncatedSeries.one(ring, (("z", 2),), 2)
    z = TruncatedSeries.variable(ring, (("z", 2),), 2, "z")
    phi = CharacteristicSeries(one + z * ring.gen("p1"))
    K = k_phi(phi, 2)
    with pytest.raises(GenusError):
        eval_sequence(K, [ring.gen("t") ** 2])  # degree 4 offered as c_1


def test_characteristic_series_grading_enforced():
    ring = GradedRingSpec([("p1", -2)], window=(-8, 0))
    one = TruncatedSeries.one(ring, (("z", 2),), 2)
    z = TruncatedSeries.variable(ring, (("z", 2),), 2, "z")
    with pytest.raises(GenusError):
        CharacteristicSeries(one + (z ** 2) * ring.gen("p1"))  # p1 at z^2: wrong degree

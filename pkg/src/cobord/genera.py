"""Multiplicative sequences and genera attached to a characteristic power series.

A series phi = 1 + phi_1 z + phi_2 z^2 + ... (z of degree 2, phi_i of degree
-2i when the coefficient ring is graded) determines polynomials K_1, ..., K_N
in Chern variables and a genus on the rational cobordism generators [CP^n].
The stored series use the normal-bundle convention: the value on CP^n is the
z^n coefficient of phi(z)^-(n+1).  Tangential series are obtained through the
explicit ``inverse`` helper, never implicitly.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial

from cobord.algebra import (
    GradedElement,
    GradedRingSpec,
    RingError,
    SeriesError,
    TruncatedSeries,
    rational_ring,
)

Z_VAR = (("z", 2),)


class GenusError(ValueError):
    """Bad characteristic-series data or unsupported evaluation."""


class CharacteristicSeries:
    """A power series 1 + phi_1 z + ... over a graded ring, z of degree 2."""

    def __init__(self, series: TruncatedSeries, label: str | None = None):
        if len(series.variables) != 1:
            raise GenusError("characteristic series must be univariate")
        if series.variables[0][1] != 2:
            raise GenusError("characteristic series variable must have degree 2")
        if not series.constant_term() == series.ring.one():
            raise GenusError("characteristic series must have constant term 1")
        graded = any(d != 0 for d in series.ring.degrees)
        for (k,), coeff in series.coeffs.items():
            if not coeff.is_homogeneous():
                raise GenusError(f"coefficient of z^{k} is not homogeneous")
            if graded and not coeff.is_scalar() and coeff.degree() != -2 * k:
                raise GenusError(
                    f"coefficient of z^{k} has degree {coeff.degree()}, expected {-2 * k}"
                )
        self.series = series
        self.label = label

    @property
    def ring(self) -> GradedRingSpec:
        return self.series.ring

    @property
    def order(self) -> int:
        return self.series.order

    def coefficient(self, k: int) -> GradedElement:
        return self.series.coefficient((k,))

    def inverse(self) -> "CharacteristicSeries":
        """The multiplicative inverse series (normal <-> tangential)."""
        label = f"1/({self.label})" if self.label else None
        return CharacteristicSeries(self.series.invert(), label)

    def truncate(self, order: int) -> "CharacteristicSeries":
        return CharacteristicSeries(self.series.truncate(order), self.label)

    def __eq__(self, other):
        return isinstance(other, CharacteristicSeries) and self.series == other.series

    def __repr__(self):
        tag = f" [{self.label}]" if self.label else ""
        return f"CharacteristicSeries({self.series}){tag}"


class MultiplicativeSequence:
    """The polynomials K_1..K_N in Chern variables c_1..c_n.

    ``polys[n]`` maps a Chern exponent vector (m_1, ..., m_n) with
    sum(i * m_i) = n to its coefficient; c_i carries weight 2i, so every
    monomial of K_n has weight exactly 2n.
    """

    def __init__(self, ring: GradedRingSpec, max_weight: int, polys: dict):
        self.ring = ring
        self.max_weight = max_weight
        self.polys = polys

    def weight_check(self) -> bool:
        for n, poly in self.polys.items():
            for mono in poly:
                if sum((i + 1) * m for i, m in enumerate(mono)) != n:
                    return False
        return True

    def total_degree_check(self) -> bool:
        """Weight 2n plus coefficient degree must vanish on graded rings."""
        graded = any(d != 0 for d in self.ring.degrees)
        if not graded:
            return True
        for n, poly in self.polys.items():
            for mono, coeff in poly.items():
                if coeff.is_scalar():
                    continue
                if coeff.degree() != -2 * n:
                    return False
        return True


# -- expansion over formal roots ---------------------------------------------


def _mul_root_polys(a: dict, b: dict, bound: int, ring) -> dict:
    out = {}
    for e1, c1 in a.items():
        w1 = sum(e1)
        for e2, c2 in b.items():
            if w1 + sum(e2) > bound:
                continue
            e = tuple(x + y for x, y in zip(e1, e2))
            p = c1 * c2
            if p.is_zero():
                continue
            s = out.get(e)
            s = p if s is None else s + p
            if s.is_zero():
                out.pop(e, None)
            else:
                out[e] = s
    return out


def _elementary_symmetric(k: int, n: int, ring) -> dict:
    """e_k(z_1..z_n) as a root-exponent dict."""
    out = {}
    one = ring.one()

    def rec(start, left, acc):
        if left == 0:
            exps = [0] * n
            for i in acc:
                exps[i] = 1
            out[tuple(exps)] = one
            return
        for i in range(start, n - left + 1):
            acc.append(i)
            rec(i + 1, left - 1, acc)
            acc.pop()

    rec(0, k, [])
    return out


def _expand_e_product(mults, n, ring) -> dict:
    poly = {(0,) * n: ring.one()}
    for k, m in enumerate(mults, start=1):
        ek = None
        for _ in range(m):
            if ek is None:
                ek = _elementary_symmetric(k, n, ring)
            poly = _mul_root_polys(poly, ek, 10**9, ring)
    return poly


def k_phi(phi: CharacteristicSeries, max_weight: int) -> MultiplicativeSequence:
    """Expand prod phi(z_i) over formal roots and rewrite in sigma_i -> c_i.

    Weight n uses exactly n roots, which is sufficient and exact.
    """
    if max_weight < 1:
        raise GenusError("max_weight must be >= 1")
    ring = phi.ring
    polys = {}
    for n in range(1, max_weight + 1):
        factor_coeffs = [phi.coefficient(k) for k in range(n + 1)]
        poly = {(0,) * n: ring.one()}
        for i in range(n):
            factor = {}
            for k, coeff in enumerate(factor_coeffs):
                if coeff.is_zero():
                    continue
                exps = [0] * n
                exps[i] = k
                factor[tuple(exps)] = coeff
            poly = _mul_root_polys(poly, factor, n, ring)
        part = {e: c for e, c in poly.items() if sum(e) == n}
        kn = {}
        guard = 0
        while part:
            guard += 1
            if guard > 100000:
                raise GenusError("symmetric reduction failed to terminate")
            lead = max(part)
            coeff = part[lead]
            lam = list(lead)
            if any(lam[i] < lam[i + 1] for i in range(n - 1)):
                raise GenusError("non-symmetric input to symmetric reduction")
            mults = [lam[i] - (lam[i + 1] if i + 1 < n else 0) for i in range(n)]
            expansion = _expand_e_product(mults, n, ring)
            for e, c in expansion.items():
                s = part.get(e, ring.zero()) - coeff * c
                if s.is_zero():
                    part.pop(e, None)
                else:
                    part[e] = s
            key = tuple(mults)
            prev = kn.get(key, ring.zero()) + coeff
            if prev.is_zero():
                kn.pop(key, None)
            else:
                kn[key] = prev
        polys[n] = kn
    return MultiplicativeSequence(ring, max_weight, polys)


# -- evaluation ----------------------------------------------------------------


def eval_sequence_generic(K: MultiplicativeSequence, values, unit):
    """Evaluate 1 + sum K_n in any commutative algebra.

    ``values`` lists the Chern values for c_1, c_2, ...; missing trailing
    entries count as zero.  ``unit`` is the algebra unit; it must support
    multiplication by the K coefficients and by the values.
    """
    total = unit
    for n in sorted(K.polys):
        for mono, coeff in sorted(K.polys[n].items()):
            term = unit * coeff
            dead = False
            for i, m in enumerate(mono):
                if m == 0:
                    continue
                if i >= len(values) or values[i] is None:
                    dead = True
                    break
                term = term * values[i] ** m
            if not dead:
                total = total + term
    return total


def eval_sequence(K: MultiplicativeSequence, chern: list) -> GradedElement:
    """Evaluate on GradedElement Chern values living in K's ring."""
    for i, value in enumerate(chern, start=1):
        if value is None or value.is_zero() or value.is_scalar():
            continue
        graded = any(d != 0 for d in value.ring.degrees)
        if graded and value.is_homogeneous() and value.degree() != 2 * i:
            raise GenusError(
                f"Chern value c_{i} has degree {value.degree()}, expected {2 * i}"
            )
    return eval_sequence_generic(K, chern, K.ring.one())


# -- genus of CP^n --------------------------------------------------------------


def genus_cpn(phi: CharacteristicSeries, n: int) -> GradedElement:
    """[z^n] phi(z)^-(n+1): the genus of CP^n in the normal-bundle convention."""
    if n < 0:
        raise GenusError("n must be >= 0")
    if n == 0:
        return phi.ring.one()
    if phi.order < n:
        raise GenusError(f"series order {phi.order} too small for CP^{n}")
    psi = phi.series.truncate(n).invert()
    return (psi ** (n + 1)).coefficient((n,))


def genus_cpn_via_chern(phi: CharacteristicSeries, n: int) -> GradedElement:
    """Whitney route: work in Q[a]/(a^(n+1)) with total Chern class (1+a)^-(n+1)."""
    if n < 0:
        raise GenusError("n must be >= 0")
    if n == 0:
        return phi.ring.one()
    if phi.order < n:
        raise GenusError(f"series order {phi.order} too small for CP^{n}")
    ring = phi.ring
    avar = (("a", 2),)
    one = TruncatedSeries.one(ring, avar, n)
    a = TruncatedSeries.variable(ring, avar, n, "a")
    total_chern = ((one + a) ** (n + 1)).invert()
    values = []
    for i in range(1, n + 1):
        ci = total_chern.coefficient((i,))
        exps = (i,)
        values.append(TruncatedSeries(ring, avar, n, {exps: ci}))
    K = k_phi(phi.truncate(n), n)
    total = eval_sequence_generic(K, values, one)
    return total.coefficient((n,))


# -- genus tables and their multiplicative extension ----------------------------


class GenusTable:
    """Values n -> r_phi(CP^n) for n <= N.

    The series is optional: a table of values is an honest genus datum on
    its own (the universal transformation is exactly the identity table,
    whose series the theory leaves implicit).
    """

    def __init__(self, phi: CharacteristicSeries | None, values: dict, ring=None):
        if ring is None:
            if phi is None:
                raise GenusError("a genus table needs a series or an explicit ring")
            ring = phi.ring
        graded = any(d != 0 for d in ring.degrees)
        for n, value in values.items():
            if graded and not value.is_scalar() and not value.is_zero():
                if value.degree() != -2 * n:
                    raise GenusError(
                        f"genus of CP^{n} has degree {value.degree()}, expected {-2 * n}"
                    )
        self.phi = phi
        self.ring = ring
        self.values = dict(values)

    @property
    def max_index(self) -> int:
        return max(self.values) if self.values else 0

    def __getitem__(self, n: int) -> GradedElement:
        if n == 0:
            return self.ring.one()
        try:
            return self.values[n]
        except KeyError:
            raise GenusError(f"genus table has no entry for CP^{n}") from None


def genus_table(phi: CharacteristicSeries, N: int) -> GenusTable:
    return GenusTable(phi, {n: genus_cpn(phi, n) for n in range(1, N + 1)})


def identity_genus_table(N: int) -> GenusTable:
    """The table r(CP^n) = [CP^n] itself, over the rational cobordism ring.

    This is the only computable face of the universal transformation: its
    characteristic series is not stored, and genus_extend on this table is
    the identity on polynomials in the generators.
    """
    from cobord.fgl import universal_ring

    ring = universal_ring(N)
    return GenusTable(None, {n: ring.gen(f"cp{n}") for n in range(1, N + 1)}, ring=ring)


_CP_PREFIX = "cp"


def genus_extend(table: GenusTable, expr: GradedElement) -> GradedElement:
    """Extend n -> r_phi(CP^n) multiplicatively and linearly to polynomials.

    ``expr`` lives in a rational polynomial ring whose generators are named
    cp1, cp2, ... (the classes [CP^n]).
    """
    source = expr.ring
    indices = []
    for name in source.names:
        if not name.startswith(_CP_PREFIX):
            raise GenusError(f"generator {name!r} is not a [CP^n] class")
        indices.append(int(name[len(_CP_PREFIX):]))
    ring = table.ring
    out = ring.zero()
    for exps, coeff in expr.terms.items():
        term = ring.scalar(coeff)
        for idx, e in zip(indices, exps):
            if e == 0:
                continue
            if idx > table.max_index:
                raise GenusError(f"genus table stops before CP^{idx}")
            term = term * table[idx] ** e
        out = out + term
    return out


# -- builtin catalog -------------------------------------------------------------


def _series_over_q(order: int) -> tuple[GradedRingSpec, TruncatedSeries, TruncatedSeries]:
    ring = rational_ring(window=(-4 * (order + 2), 0))
    one = TruncatedSeries.one(ring, Z_VAR, order)
    z = TruncatedSeries.variable(ring, Z_VAR, order, "z")
    return ring, one, z

def _todd(order: int) -> CharacteristicSeries:
    ring, one, z = _series_over_q(order + 1)
    em = (-z).exp()  # e^{-z}
    series = (one - em).shift_down("z").truncate(order)
    return CharacteristicSeries(series, "todd")


def _l_genus(order: int) -> CharacteristicSeries:
    # tanh(z)/z = (sinh z / z) / cosh z
    ring, one, z = _series_over_q(order)
    sinh_over_z = TruncatedSeries.zero(ring, Z_VAR, order)
    cosh = TruncatedSeries.zero(ring, Z_VAR, order)
    for k in range(0, order + 1, 2):
        sinh_over_z = sinh_over_z + (z ** k) * Fraction(1, factorial(k + 1))
        cosh = cosh + (z ** k) * Fraction(1, factorial(k))
    return CharacteristicSeries(sinh_over_z * cosh.invert(), "l_genus")


def _a_hat(order: int) -> CharacteristicSeries:
    # sinh(z/2)/(z/2) = sum z^{2k} / (4^k (2k+1)!)
    ring, one, z = _series_over_q(order)
    series = TruncatedSeries.zero(ring, Z_VAR, order)
    for k in range(0, order // 2 + 1):
        series = series + (z ** (2 * k)) * Fraction(1, 4**k * factorial(2 * k + 1))
    return CharacteristicSeries(series, "a_hat")


def _sqrt_inv_coeff(k: int) -> Fraction:
    # [w^k] (1+w)^(-1/2) = (-1)^k C(2k, k) / 4^k
    return Fraction((-1) ** k * comb(2 * k, k), 4**k)


def _elliptic(order: int, delta=None, eps=None) -> CharacteristicSeries:
    """Series of the compositional inverse of int dt / sqrt(1 - 2 d t^2 + e t^4).

    With formal parameters the coefficients live in Q[delta, eps] with
    deg(delta) = -4 and deg(eps) = -8; numeric parameters give a series
    over Q.
    """
    formal = delta is None and eps is None
    work = order + 1
    if formal:
        ring = GradedRingSpec(
            [("delta", -4), ("eps", -8)], window=(-8 * (work + 2), 0)
        )
        dval = ring.gen("delta")
        eval_ = ring.gen("eps")
    else:
        ring = rational_ring(window=(-4 * (work + 2), 0))
        dval = ring.scalar(Fraction(delta if delta is not None else 0))
        eval_ = ring.scalar(Fraction(eps if eps is not None else 0))
    tvar = (("t", 2),)
    t = TruncatedSeries.variable(ring, tvar, work, "t")
    w = -(t ** 2) * dval * 2 + (t ** 4) * eval_
    integrand = TruncatedSeries.zero(ring, tvar, work)
    wk = TruncatedSeries.one(ring, tvar, work)
    for k in range(work + 1):
        if k > 0:
            wk = wk * w
            if wk.is_zero():
                break
        integrand = integrand + wk * _sqrt_inv_coeff(k)
    log = integrand.integrate("t")
    exp = log.reversion()
    series = exp.shift_down("t").truncate(order)
    # rename t -> z for the catalog convention
    series = TruncatedSeries(ring, Z_VAR, order, dict(series.coeffs))
    label = "elliptic" if formal else f"elliptic({delta},{eps})"
    return CharacteristicSeries(series, label)


def builtin_genus(name: str, order: int, *, delta=None, eps=None) -> CharacteristicSeries:
    """Catalog of normal-convention series: todd, l_genus, a_hat, elliptic, one."""
    key = name.lower().replace("-", "_")
    if key in ("one", "trivial"):
        ring, one, _ = _series_over_q(order)
        return CharacteristicSeries(one, "one")
    if key == "todd":
        return _todd(order)
    if key in ("l", "l_genus", "signature"):
        return _l_genus(order)
    if key in ("a_hat", "ahat"):
        return _a_hat(order)
    if key == "elliptic":
        return _elliptic(order, delta=delta, eps=eps)
    raise GenusError(f"unknown builtin genus {name!r}")


BUILTIN_NAMES = ("todd", "l_genus", "a_hat", "elliptic", "one")

"""Formal group laws: axioms, logarithms, the rational universal law,
Quillen classification, Landweber's regular-sequence criterion, and a
degree-wise Tor_1 for finitely presented graded modules.

The universal law is realized rationally through the logarithm
x + sum [CP^n] x^(n+1)/(n+1) over Q[cp1, cp2, ...]; classification of a
law g recovers theta([CP^n]) = (n+1) [x^(n+1)] log(g) and is verified by
pushing the universal coefficients through theta.  Landweber regularity is
decided only on Laurent/polynomial rings over Z with monomial relations;
anything else reports "inconclusive" rather than guessing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from cobord.algebra import (
    GradedElement,
    GradedRingSpec,
    RingError,
    SeriesError,
    TruncatedSeries,
    parse_element,
)

XY_VARS = (("x", 2), ("y", 2))
XYZ_VARS = (("x", 2), ("y", 2), ("zz", 2))
X_VAR = (("x", 2),)


class FGLError(ValueError):
    """Bad formal-group-law data or unsupported base ring."""


class FormalGroupLaw:
    """A truncated bivariate series f(x, y), x and y of degree 2."""

    def __init__(self, ring: GradedRingSpec, f: TruncatedSeries):
        if f.variables != XY_VARS:
            raise FGLError("formal group law must live in variables x, y of degree 2")
        self.ring = ring
        self.f = f
        self.order = f.order

    def coefficient(self, i: int, j: int) -> GradedElement:
        return self.f.coefficient((i, j))

    def __repr__(self):
        return f"FormalGroupLaw({self.f})"

    def to_json(self) -> dict:
        return {
            "ring": self.ring.to_json(),
            "order": self.order,
            "f": {
                f"{i},{j}": str(c) for (i, j), c in sorted(self.f.coeffs.items())
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "FormalGroupLaw":
        ring = GradedRingSpec.from_json(data["ring"])
        order = int(data["order"])
        coeffs = {}
        for key, text in data.get("f", {}).items():
            i, j = (int(p) for p in key.split(","))
            coeffs[(i, j)] = parse_element(ring, text)
        return cls(ring, TruncatedSeries(ring, XY_VARS, order, coeffs))


def _lift(series: TruncatedSeries, variables, positions) -> TruncatedSeries:
    """Re-key a series into a larger variable tuple; positions maps old->new."""
    coeffs = {}
    nv = len(variables)
    for exps, coeff in series.coeffs.items():
        new = [0] * nv
        for old_idx, e in enumerate(exps):
            new[positions[old_idx]] = e
        coeffs[tuple(new)] = coeff
    return TruncatedSeries(series.ring, variables, series.order, coeffs, _normalized=True)


@dataclass
class ValidationReport:
    valid: bool
    failures: list = field(default_factory=list)  # (axiom, exponents, delta)

    def first_failure(self):
        return self.failures[0] if self.failures else None


def fgl_validate(F: FormalGroupLaw) -> ValidationReport:
    """Check unit, commutativity and associativity up to the truncation order."""
    ring, f = F.ring, F.f
    failures = []

    def record(axiom, delta: TruncatedSeries):
        for exps, coeff in sorted(delta.coeffs.items(), key=lambda it: (sum(it[0]), it[0])):
            failures.append((axiom, exps, coeff))
            break

    x = TruncatedSeries.variable(ring, XY_VARS, F.order, "x")
    y = TruncatedSeries.variable(ring, XY_VARS, F.order, "y")
    zero = TruncatedSeries.zero(ring, XY_VARS, F.order)

    unit_x = f.substitute({"y": zero}) - x
    if not unit_x.is_zero():
        record("unit-x", unit_x)
    unit_y = f.substitute({"x": zero}) - y
    if not unit_y.is_zero():
        record("unit-y", unit_y)

    swapped = f.substitute({"x": y, "y": x})
    comm = f - swapped
    if not comm.is_zero():
        record("commutativity", comm)

    x3 = TruncatedSeries.variable(ring, XYZ_VARS, F.order, "x")
    y3 = TruncatedSeries.variable(ring, XYZ_VARS, F.order, "y")
    z3 = TruncatedSeries.variable(ring, XYZ_VARS, F.order, "zz")
    f3 = _lift(f, XYZ_VARS, {0: 0, 1: 1})
    fxy = f3
    fyz = f3.substitute({"x": y3, "y": z3})
    left = f3.substitute({"x": fxy, "y": z3})
    right = f3.substitute({"x": x3, "y": fyz})
    assoc = left - right
    if not assoc.is_zero():
        record("associativity", assoc)

    return ValidationReport(valid=not failures, failures=failures)


# -- logarithms ------------------------------------------------------------------


def fgl_log(F: FormalGroupLaw) -> TruncatedSeries:
    """The logarithm l with l(f(x,y)) = l(x) + l(y), over a rational base."""
    if F.ring.base != "Q":
        raise FGLError("logarithm needs a rational base ring")
    # l'(x) = 1 / (df/dy)(x, 0)
    dy = F.f.derivative("y")
    zero = TruncatedSeries.zero(F.ring, XY_VARS, F.order)
    w_xy = dy.substitute({"y": zero})
    w = TruncatedSeries(
        F.ring, X_VAR, F.order, {(e[0],): c for e, c in w_xy.coeffs.items()}
    )
    lprime = w.invert()
    log = lprime.integrate("x")
    return log


def fgl_from_log(log: TruncatedSeries) -> FormalGroupLaw:
    """Rebuild f = l^{-1}(l(x) + l(y)) from a logarithm x + O(x^2)."""
    if len(log.variables) != 1:
        raise FGLError("logarithm must be univariate")
    ring = log.ring
    if ring.base != "Q":
        raise FGLError("from_log needs a rational base ring")
    exp = log.reversion()
    lx = _lift(log, XY_VARS, {0: 0})
    ly = _lift(log, XY_VARS, {0: 1})
    f = exp.substitute({exp.variables[0][0]: lx + ly})
    return FormalGroupLaw(ring, f)


# -- the rational universal law ----------------------------------------------------


def universal_ring(N: int, window=None) -> GradedRingSpec:
    """Q[cp1, ..., cpN] with deg cp_n = -2n: the rational cobordism generators."""
    if window is None:
        window = (-4 * (N + 1) * (N + 1), 0)
    gens = [(f"cp{n}", -2 * n) for n in range(1, N + 1)]
    return GradedRingSpec(gens, base="Q", window=window)


def mishchenko_log(ring: GradedRingSpec, order: int) -> TruncatedSeries:
    """x + sum cp_n x^(n+1)/(n+1) over the universal ring."""
    x = TruncatedSeries.variable(ring, X_VAR, order, "x")
    log = x
    for n in range(1, order):
        name = f"cp{n}"
        if name not in ring.names:
            break
        log = log + (x ** (n + 1)) * (ring.gen(name) * Fraction(1, n + 1))
    return log


def universal_fgl_rational(N: int) -> FormalGroupLaw:
    """The universal formal group law over Q[cp1, ..., cp(N-1)], order N."""
    if N < 2:
        raise FGLError("universal law needs order >= 2")
    ring = universal_ring(N - 1)
    return fgl_from_log(mishchenko_log(ring, N))


# -- ring maps ---------------------------------------------------------------------


class RingMap:
    """A degree-preserving map of graded ring specs given on generators."""

    def __init__(self, source: GradedRingSpec, target: GradedRingSpec, images: dict):
        self.source = source
        self.target = target
        self.images = {}
        target_graded = any(d != 0 for d in target.degrees)
        for name, degree in zip(source.names, source.degrees):
            if name not in images:
                raise FGLError(f"no image for generator {name}")
            image = images[name]
            if not isinstance(image, GradedElement):
                image = target.scalar(image)
            if target_graded and not image.is_zero():
                if not image.is_homogeneous() or image.degree() != degree:
                    raise FGLError(
                        f"image of {name} must be homogeneous of degree {degree}"
                    )
            self.images[name] = image

    def apply(self, el: GradedElement) -> GradedElement:
        if not self.source.same_as(el.ring):
            raise FGLError("element not over the source ring")
        out = self.target.zero()
        for exps, coeff in el.terms.items():
            term = self.target.scalar(coeff)
            for name, e in zip(self.source.names, exps):
                if e == 0:
                    continue
                if e < 0:
                    raise FGLError("cannot map negative powers through a ring map")
                term = term * self.images[name] ** e
            out = out + term
        return out

    def apply_series(self, s: TruncatedSeries) -> TruncatedSeries:
        return s.map_coefficients(self.apply, ring=self.target)


@dataclass
class ClassificationResult:
    theta: RingMap
    pushed: FormalGroupLaw
    matches: bool | None
    mismatches: list = field(default_factory=list)


def quillen_classify(target, f_univ: FormalGroupLaw) -> ClassificationResult:
    """Classify a law (or a genus table) by a map theta from the universal ring.

    theta([CP^n]) = (n+1) [x^(n+1)] log(g) for a target law g; for a genus
    table the values are read off directly.  theta is verified by pushing
    the universal law coefficient-wise and comparing (when g is given).
    """
    from cobord.genera import GenusTable

    univ_ring = f_univ.ring
    indices = [int(name[2:]) for name in univ_ring.names]

    if isinstance(target, GenusTable):
        ring = target.ring
        images = {f"cp{n}": target[n] for n in indices}
        theta = RingMap(univ_ring, ring, images)
        pushed = FormalGroupLaw(ring, theta.apply_series(f_univ.f))
        return ClassificationResult(theta, pushed, None)

    g = target
    if g.ring.base != "Q":
        raise FGLError("cannot classify over this base: logarithm needs rationals")
    log = fgl_log(g)
    images = {}
    for n in indices:
        if n + 1 > log.order:
            raise FGLError(f"target order too small to read theta(cp{n})")
        images[f"cp{n}"] = log.coefficient((n + 1,)) * (n + 1)
    theta = RingMap(univ_ring, g.ring, images)
    pushed_series = theta.apply_series(f_univ.f)
    order = min(pushed_series.order, g.f.order)
    delta = pushed_series.truncate(order) - g.f.truncate(order)
    mismatches = sorted(delta.coeffs.items(), key=lambda it: (sum(it[0]), it[0]))
    pushed = FormalGroupLaw(g.ring, pushed_series)
    return ClassificationResult(theta, pushed, not mismatches, mismatches)


# -- p-series and the Landweber criterion -------------------------------------------


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def n_series(F: FormalGroupLaw, m: int) -> TruncatedSeries:
    """[m](x): the m-fold formal sum, [1](x) = x, [m+1](x) = f([m](x), x)."""
    if m < 0:
        raise FGLError("n_series needs m >= 0")
    ring = F.ring
    x = TruncatedSeries.variable(ring, X_VAR, F.order, "x")
    if m == 0:
        return TruncatedSeries.zero(ring, X_VAR, F.order)
    acc = x
    for _ in range(m - 1):
        acc = F.f.substitute({"x": acc, "y": x})
    return acc


def p_series(F: FormalGroupLaw, p: int) -> TruncatedSeries:
    if not _is_prime(p):
        raise FGLError(f"{p} is not prime")
    return n_series(F, p)


@dataclass
class LandweberStage:
    stage: int
    v_repr: str
    action: str  # "regular" | "unit" | "zero-divisor" | "vacuous" | "out-of-fragment"


@dataclass
class LandweberVerdict:
    prime: int
    status: str  # exact-through-stage-N | fails-at-stage-N | inconclusive
    stages: list = field(default_factory=list)


class _MonomialQuotient:
    """F_p[gens] (with Laurent units) modulo a monomial ideal.

    Exponents of invertible generators are projected away: those monomial
    factors are units and irrelevant to divisibility.
    """

    def __init__(self, ring: GradedRingSpec, p: int):
        self.ring = ring
        self.p = p
        self.poly_axes = [i for i, inv in enumerate(ring.invertible) if not inv]
        self.ideal: list[tuple] = []
        self.is_zero = False

    def _project(self, exps) -> tuple:
        return tuple(exps[i] for i in self.poly_axes)

    def _divides(self, a, b) -> bool:
        return all(x <= y for x, y in zip(a, b))

    def _in_ideal(self, mono) -> bool:
        return any(self._divides(g, mono) for g in self.ideal)

    def reduce(self, el: GradedElement) -> dict:
        """Coefficients mod p, monomials killed by the ideal."""
        out = {}
        for exps, coeff in el.terms.items():
            if coeff.denominator != 1:
                raise FGLError("non-integral coefficient in Landweber reduction")
            c = coeff.numerator % self.p
            if c == 0:
                continue
            mono = self._project(exps)
            if self._in_ideal(mono):
                continue
            out[mono] = (out.get(mono, 0) + c) % self.p
        return {m: c for m, c in out.items() if c}

    def classify_and_extend(self, reduced: dict) -> str:
        """Classify a reduced element as a multiplier on the quotient ring.

        Returns one of: "zero", "unit", "regular", "zero-divisor",
        "out-of-fragment".  Units and regular monomials are pushed into the
        ideal so the next stage sees the successive quotient.
        """
        if self.is_zero:
            return "vacuous"
        if not reduced:
            return "zero"
        if len(reduced) > 1:
            if not self.ideal:
                return "regular-polynomial"  # domain: nonzero => regular
            return "out-of-fragment"
        (mono,) = reduced
        if all(e == 0 for e in mono):
            self.is_zero = True
            return "unit"
        # regular iff (I : mono) = I, i.e. g/gcd(g, mono) stays in I for all g
        for g in self.ideal:
            q = tuple(max(gx - mx, 0) for gx, mx in zip(g, mono))
            if not self._in_ideal(q):
                return "zero-divisor"
        self.ideal.append(mono)
        return "regular"


def landweber_check(F: FormalGroupLaw, primes, stages: int) -> dict:
    """Regular-sequence check of (p, v_1, v_2, ...) on the base ring.

    Stage n checks v_n = [x^(p^n)] of the p-series, reduced modulo
    (p, v_1, ..., v_(n-1)), for injectivity on the successive quotient.
    """
    if stages < 1:
        raise FGLError("stages must be >= 1")
    verdicts = {}
    for p in primes:
        if not _is_prime(p):
            raise FGLError(f"{p} is not prime")
        if F.ring.base != "Z":
            verdicts[p] = LandweberVerdict(
                p, "inconclusive", [LandweberStage(0, "", "non-integral base ring")]
            )
            continue
        if F.order < p**stages:
            raise FGLError(
                f"truncation order {F.order} < p^stages = {p**stages}; "
                "rebuild the law with a larger order"
            )
        series = n_series(F, p)
        quotient = _MonomialQuotient(F.ring, p)
        stage_log = []
        status = f"exact-through-stage-{stages}"
        out_of_fragment = False
        for n in range(1, stages + 1):
            vn = series.coefficient((p**n,))
            reduced = quotient.reduce(vn)
            action = quotient.classify_and_extend(reduced)
            v_repr = _monomial_dict_repr(reduced, quotient, F.ring)
            stage_log.append(LandweberStage(n, v_repr, action))
            if action == "zero":
                status = f"fails-at-stage-{n}"
                break
            if action == "zero-divisor":
                status = f"fails-at-stage-{n}"
                break
            if action == "regular-polynomial" and n < stages:
                # the next quotient is no longer monomial: outside the fragment
                status = "inconclusive"
                out_of_fragment = True
                break
            if action == "out-of-fragment":
                status = "inconclusive"
                out_of_fragment = True
                break
        verdicts[p] = LandweberVerdict(p, status, stage_log)
        del out_of_fragment
    return verdicts


def _monomial_dict_repr(reduced: dict, quotient: _MonomialQuotient, ring) -> str:
    if not reduced:
        return "0"
    names = [ring.names[i] for i in quotient.poly_axes]
    parts = []
    for mono, c in sorted(reduced.items()):
        factors = [f"{n}^{e}" if e > 1 else n for n, e in zip(names, mono) if e]
        body = "*".join(factors) if factors else "1"
        parts.append(f"{c}*{body}" if c != 1 or not factors else body)
    return " + ".join(parts)


# -- named catalog -------------------------------------------------------------------


def named_fgl(name: str, order: int) -> FormalGroupLaw:
    """Catalog: additive, multiplicative, multiplicative-u, multiplicative-u-poly,
    universal."""
    key = name.lower().replace("_", "-")
    if key == "additive":
        ring = GradedRingSpec((), base="Z", window=(0, 0))
        x = TruncatedSeries.variable(ring, XY_VARS, order, "x")
        y = TruncatedSeries.variable(ring, XY_VARS, order, "y")
        return FormalGroupLaw(ring, x + y)
    if key == "multiplicative":
        ring = GradedRingSpec((), base="Z", window=(0, 0))
        x = TruncatedSeries.variable(ring, XY_VARS, order, "x")
        y = TruncatedSeries.variable(ring, XY_VARS, order, "y")
        return FormalGroupLaw(ring, x + y - x * y)
    if key == "multiplicative-q":
        ring = GradedRingSpec((), base="Q", window=(0, 0))
        x = TruncatedSeries.variable(ring, XY_VARS, order, "x")
        y = TruncatedSeries.variable(ring, XY_VARS, order, "y")
        return FormalGroupLaw(ring, x + y - x * y)
    if key == "multiplicative-u-q":
        ring = GradedRingSpec(
            [("u", -2, True)], base="Q", window=(-4 * order - 4, 4 * order + 4)
        )
        x = TruncatedSeries.variable(ring, XY_VARS, order, "x")
        y = TruncatedSeries.variable(ring, XY_VARS, order, "y")
        return FormalGroupLaw(ring, x + y - (x * y) * ring.gen("u"))
    if key in ("multiplicative-u", "multiplicative-u-laurent"):
        ring = GradedRingSpec([("u", -2, True)], base="Z", window=(-4 * order - 4, 4 * order + 4))
        x = TruncatedSeries.variable(ring, XY_VARS, order, "x")
        y = TruncatedSeries.variable(ring, XY_VARS, order, "y")
        return FormalGroupLaw(ring, x + y - (x * y) * ring.gen("u"))
    if key == "multiplicative-u-poly":
        ring = GradedRingSpec([("u", -2)], base="Z", window=(-4 * order - 4, 0))
        x = TruncatedSeries.variable(ring, XY_VARS, order, "x")
        y = TruncatedSeries.variable(ring, XY_VARS, order, "y")
        return FormalGroupLaw(ring, x + y - (x * y) * ring.gen("u"))
    if key == "universal":
        return universal_fgl_rational(order)
    raise FGLError(f"unknown formal group law {name!r}")


FGL_NAMES = (
    "additive",
    "multiplicative",
    "multiplicative-q",
    "multiplicative-u",
    "multiplicative-u-q",
    "multiplicative-u-poly",
    "universal",
)


# -- graded module presentations and Tor_1 -------------------------------------------


class ModulePresentation:
    """Finitely presented graded module: generator degrees and relation columns."""

    def __init__(self, ring: GradedRingSpec, gen_degrees, relations):
        if ring.base != "Q":
            raise FGLError("module presentations need a rational base ring")
        if any(ring.invertible):
            raise FGLError("module presentations over Laurent rings are unsupported")
        if any(d >= 0 for d in ring.degrees):
            raise FGLError("source ring must be connected: generator degrees < 0")
        self.ring = ring
        self.gen_degrees = [int(d) for d in gen_degrees]
        self.relations = []
        self.relation_degrees = []
        for col in relations:
            if len(col) != len(self.gen_degrees):
                raise FGLError("relation column length must match generators")
            col = [
                e if isinstance(e, GradedElement) else ring.scalar(e) for e in col
            ]
            degree = None
            for entry, d in zip(col, self.gen_degrees):
                if entry.is_zero():
                    continue
                if not entry.is_homogeneous():
                    raise FGLError("relation entries must be homogeneous")
                total = entry.degree() + d
                if degree is None:
                    degree = total
                elif degree != total:
                    raise FGLError("relation column is not homogeneous")
            if degree is None:
                raise FGLError("zero relation column")
            self.relations.append(col)
            self.relation_degrees.append(degree)

    @classmethod
    def free(cls, ring, gen_degrees):
        mod = cls.__new__(cls)
        mod.ring = ring
        mod.gen_degrees = [int(d) for d in gen_degrees]
        mod.relations = []
        mod.relation_degrees = []
        return mod

    def to_json(self):
        return {
            "ring": self.ring.to_json(),
            "generators": self.gen_degrees,
            "relations": [[str(e) for e in col] for col in self.relations],
        }

    @classmethod
    def from_json(cls, data):
        ring = GradedRingSpec.from_json(data["ring"])
        relations = [
            [parse_element(ring, text) for text in col]
            for col in data.get("relations", [])
        ]
        return cls(ring, data["generators"], relations)


def _nullspace(rows, ncols):
    """Kernel basis of a rational matrix given as list of rows."""
    mat = [list(map(Fraction, row)) for row in rows]
    nrows = len(mat)
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, nrows):
            if mat[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        pv = mat[r][c]
        mat[r] = [v / pv for v in mat[r]]
        for i in range(nrows):
            if i != r and mat[i][c] != 0:
                factor = mat[i][c]
                mat[i] = [v - factor * w for v, w in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -mat[i][fc]
        basis.append(vec)
    return basis


def _rank(rows, ncols) -> int:
    if not rows or ncols == 0:
        return 0
    return ncols - len(_nullspace(rows, ncols))


@dataclass
class TorEntry:
    degree: int
    dimension: int
    partial: bool


def tor1(M: ModulePresentation, rmap: RingMap, window) -> dict:
    """dim Tor_1(M, T) per degree in the window, by degree-wise linear algebra.

    Builds the two-step resolution F2 -> F1 -> F0 degree by degree (each
    graded piece is a finite-dimensional rational vector space), tensors
    along the ring map, and reports kernel dimension minus syzygy rank.
    Degrees whose syzygy computation hits the ring's truncation window are
    flagged partial.
    """
    S = M.ring
    if not rmap.source.same_as(S):
        raise FGLError("ring map source must match the module's ring")
    T = rmap.target

    lo, hi = int(window[0]), int(window[1])
    if lo > hi:
        raise FGLError("empty window")

    t_degrees = _ring_degrees(T)

    def s_monomials(degree, clip_flag):
        if degree > 0:
            return []
        if degree < S.window[0]:
            clip_flag.append(True)
            return []
        return S.monomials_of_degree(degree)

    def t_monomials(degree):
        if degree > 0 or degree < T.window[0]:
            return []
        if T.ngens == 0:
            return [()] if degree == 0 else []
        return T.monomials_of_degree(degree)

    def f1_basis_T(delta):
        basis = []
        for k, dk in enumerate(M.relation_degrees):
            for tau in t_monomials(delta - dk):
                basis.append((k, tau))
        return basis

    def f0_basis_T(delta):
        basis = []
        for j, dj in enumerate(M.gen_degrees):
            for tau in t_monomials(delta - dj):
                basis.append((j, tau))
        return basis

    def theta_monomial(exps):
        return rmap.apply(GradedElement(S, {tuple(exps): Fraction(1)}))

    syzygy_cache = {}

    def syzygies(delta2, clip_flag):
        if delta2 in syzygy_cache:
            return syzygy_cache[delta2]
        col_basis = []
        for k, dk in enumerate(M.relation_degrees):
            for m in s_monomials(delta2 - dk, clip_flag):
                col_basis.append((k, m))
        row_basis = []
        row_index = {}
        for j, dj in enumerate(M.gen_degrees):
            for m in s_monomials(delta2 - dj, clip_flag):
                row_index[(j, m)] = len(row_basis)
                row_basis.append((j, m))
        rows = [[Fraction(0)] * len(col_basis) for _ in row_basis]
        for ci, (k, m) in enumerate(col_basis):
            m_el = GradedElement(S, {tuple(m): Fraction(1)})
            for j in range(len(M.gen_degrees)):
                prod = M.relations[k][j] * m_el
                for exps, coeff in prod.terms.items():
                    ri = row_index.get((j, exps))
                    if ri is None:
                        clip_flag.append(True)
                        continue
                    rows[ri][ci] += coeff
        kernel = _nullspace(rows, len(col_basis))
        result = (col_basis, kernel)
        syzygy_cache[delta2] = result
        return result

    out = {}
    for delta in range(lo, hi + 1):
        clip_flag = []
        fb1 = f1_basis_T(delta)
        if not fb1:
            out[delta] = TorEntry(delta, 0, False)
            continue
        fb0 = f0_basis_T(delta)
        row_index = {key: i for i, key in enumerate(fb0)}
        rows = [[Fraction(0)] * len(fb1) for _ in fb0]
        for ci, (k, tau) in enumerate(fb1):
            tau_el = GradedElement(T, {tuple(tau): Fraction(1)})
            for j in range(len(M.gen_degrees)):
                img = rmap.apply(M.relations[k][j]) * tau_el
                for exps, coeff in img.terms.items():
                    ri = row_index.get((j, exps))
                    if ri is None:
                        continue
                    rows[ri][ci] += coeff
        kernel = _nullspace(rows, len(fb1))
        kernel_dim = len(kernel)
        if kernel_dim == 0:
            out[delta] = TorEntry(delta, 0, bool(clip_flag))
            continue
        # image of Psi tensor T inside (F1 tensor T)_delta
        f1_index = {key: i for i, key in enumerate(fb1)}
        psi_rows_cols = []
        for tdeg in t_degrees:
            delta2 = delta - tdeg
            col_basis, syz = syzygies(delta2, clip_flag)
            if not syz:
                continue
            for tau in t_monomials(tdeg):
                tau_el = GradedElement(T, {tuple(tau): Fraction(1)})
                for vec in syz:
                    column = [Fraction(0)] * len(fb1)
                    for coord, (k, m) in zip(vec, col_basis):
                        if coord == 0:
                            continue
                        img = theta_monomial(m) * tau_el
                        for exps, coeff in img.terms.items():
                            fi = f1_index.get((k, exps))
                            if fi is None:
                                continue
                            column[fi] += coord * coeff
                    if any(v != 0 for v in column):
                        psi_rows_cols.append(column)
        if psi_rows_cols:
            psi_rows = [list(row) for row in zip(*psi_rows_cols)]
            rank = _rank(psi_rows, len(psi_rows_cols))
        else:
            rank = 0
        out[delta] = TorEntry(delta, kernel_dim - rank, bool(clip_flag))
    return out


def _ring_degrees(T: GradedRingSpec):
    """All degrees in [window_lo, 0] realized by monomials of T."""
    if T.ngens == 0:
        return [0]
    degs = set()
    for d in range(T.window[0], 1):
        if T.monomials_of_degree(d):
            degs.add(d)
    return sorted(degs)

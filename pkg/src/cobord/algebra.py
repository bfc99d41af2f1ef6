"""Exact arithmetic for graded commutative rings and truncated power series.

Coefficients are exact rationals throughout.  A ring spec fixes a list of
named generators with integer degrees, a coefficient base (Z or Q), a set
of Laurent-invertible generators, and a degree window; every element keeps
only monomials whose degree lies inside the window.  Series are truncated
by total exponent weight in the series variables, with the order given
explicitly at construction.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from math import factorial

EXPONENT_BOUND = 10**6


class RingError(ValueError):
    """Mismatched rings or operations outside a ring's declared base."""


class SeriesError(ValueError):
    """Violated series precondition (constant term, variables, order)."""


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact coefficient: {value!r}")


class GradedRingSpec:
    """Generators with integer degrees, a base (Z or Q) and a degree window.

    ``generators`` is a list of ``(name, degree)`` or ``(name, degree,
    invertible)`` tuples.  Invertible generators may carry negative
    exponents (Laurent).  ``window = (lo, hi)`` bounds the degree of every
    stored monomial; products are re-truncated to the window.
    """

    def __init__(self, generators=(), base="Q", window=(-256, 256)):
        names = []
        degrees = []
        invertible = []
        for gen in generators:
            if len(gen) == 2:
                name, deg = gen
                inv = False
            else:
                name, deg, inv = gen
            names.append(str(name))
            degrees.append(int(deg))
            invertible.append(bool(inv))
        if len(set(names)) != len(names):
            raise RingError("generator names must be unique")
        if base not in ("Q", "Z"):
            raise RingError(f"unknown base {base!r}")
        lo, hi = window
        if lo > hi:
            raise RingError("empty degree window")
        self.names = tuple(names)
        self.degrees = tuple(degrees)
        self.invertible = tuple(invertible)
        self.base = base
        self.window = (int(lo), int(hi))
        self._index = {n: i for i, n in enumerate(names)}

    @property
    def ngens(self) -> int:
        return len(self.names)

    def gen_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise RingError(f"no generator named {name!r}") from None

    def monomial_degree(self, exps) -> int:
        return sum(e * d for e, d in zip(exps, self.degrees))

    def in_window(self, degree: int) -> bool:
        lo, hi = self.window
        return lo <= degree <= hi

    def check_exponents(self, exps) -> None:
        for e, inv, name in zip(exps, self.invertible, self.names):
            if e < 0 and not inv:
                raise RingError(f"negative exponent on non-invertible {name}")
            if abs(e) > EXPONENT_BOUND:
                raise RingError(f"exponent overflow on {name}")

    def zero(self) -> "GradedElement":
        return GradedElement(self, {})

    def one(self) -> "GradedElement":
        return GradedElement(self, {(0,) * self.ngens: Fraction(1)})

    def scalar(self, value) -> "GradedElement":
        return GradedElement(self, {(0,) * self.ngens: _frac(value)})

    def gen(self, name: str, power: int = 1) -> "GradedElement":
        exps = [0] * self.ngens
        exps[self.gen_index(name)] = power
        return GradedElement(self, {tuple(exps): Fraction(1)})

    def monomials_of_degree(self, degree: int):
        """All exponent vectors of the given degree (no Laurent generators).

        Enumeration requires every generator degree to be nonzero and of one
        sign pattern that terminates; we support the connected case where all
        generator degrees are negative (cohomological MU* convention).
        """
        if any(self.invertible):
            raise RingError("cannot enumerate monomials of a Laurent ring")
        if any(d >= 0 for d in self.degrees):
            raise RingError("monomial enumeration needs negative generator degrees")
        out = []

        def rec(i, remaining, acc):
            if i == self.ngens:
                if remaining == 0:
                    out.append(tuple(acc))
                return
            d = self.degrees[i]
            e = 0
            while e * d >= remaining:
                acc.append(e)
                rec(i + 1, remaining - e * d, acc)
                acc.pop()
                e += 1

        rec(0, degree, [])
        return out

    def same_as(self, other: "GradedRingSpec") -> bool:
        return (
            self.names == other.names
            and self.degrees == other.degrees
            and self.invertible == other.invertible
            and self.base == other.base
            and self.window == other.window
        )

    def to_json(self) -> dict:
        return {
            "generators": [
                {"name": n, "deg": d, "invertible": inv}
                for n, d, inv in zip(self.names, self.degrees, self.invertible)
            ],
            "base": self.base,
            "window": list(self.window),
        }

    @classmethod
    def from_json(cls, data: dict) -> "GradedRingSpec":
        gens = [
            (g["name"], g["deg"], bool(g.get("invertible", False)))
            for g in data.get("generators", [])
        ]
        return cls(gens, base=data.get("base", "Q"), window=tuple(data.get("window", (-256, 256))))

    def __repr__(self):
        gens = ", ".join(
            f"{n}:{d}{'*' if inv else ''}"
            for n, d, inv in zip(self.names, self.degrees, self.invertible)
        )
        return f"GradedRingSpec([{gens}], base={self.base}, window={self.window})"


def rational_ring(window=(-256, 256)) -> GradedRingSpec:
    """The trivially graded rationals."""
    return GradedRingSpec((), base="Q", window=window)


class GradedElement:
    """Sparse element of a graded ring: exponent vector -> exact coefficient."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: GradedRingSpec, terms: dict, *, _normalized=False):
        self.ring = ring
        if _normalized:
            self.terms = terms
            return
        clean = {}
        for exps, coeff in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != ring.ngens:
                raise RingError("exponent vector length mismatch")
            ring.check_exponents(exps)
            if not ring.in_window(ring.monomial_degree(exps)):
                continue
            coeff = _frac(coeff)
            if coeff == 0:
                continue
            if ring.base == "Z" and coeff.denominator != 1:
                raise RingError("non-integer coefficient over base Z")
            clean[exps] = clean.get(exps, Fraction(0)) + coeff
        self.terms = {e: c for e, c in clean.items() if c != 0}

    # -- queries ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_scalar(self) -> bool:
        zero = (0,) * self.ring.ngens
        return not self.terms or set(self.terms) == {zero}

    def scalar_value(self) -> Fraction:
        if not self.is_scalar():
            raise RingError("element is not a scalar")
        zero = (0,) * self.ring.ngens
        return self.terms.get(zero, Fraction(0))

    def degrees_present(self):
        return sorted({self.ring.monomial_degree(e) for e in self.terms})

    def is_homogeneous(self) -> bool:
        return len(self.degrees_present()) <= 1

    def degree(self):
        """Degree of a homogeneous element; None for 0, error if mixed."""
        degs = self.degrees_present()
        if not degs:
            return None
        if len(degs) > 1:
            raise RingError(f"element is not homogeneous: degrees {degs}")
        return degs[0]

    def homogeneous_part(self, degree: int) -> "GradedElement":
        picked = {
            e: c for e, c in self.terms.items() if self.ring.monomial_degree(e) == degree
        }
        return GradedElement(self.ring, picked, _normalized=True)

    # -- arithmetic ------------------------------------------------------

    def _check_ring(self, other: "GradedElement") -> None:
        if self.ring is not other.ring and not self.ring.same_as(other.ring):
            raise RingError("ring spec mismatch")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.scalar(other)
        self._check_ring(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e, Fraction(0)) + c
            if s == 0:
                terms.pop(e, None)
            else:
                terms[e] = s
        return GradedElement(self.ring, terms, _normalized=True)

    __radd__ = __add__

    def __neg__(self):
        return GradedElement(
            self.ring, {e: -c for e, c in self.terms.items()}, _normalized=True
        )

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _frac(other)
            if c == 0:
                return self.ring.zero()
            return GradedElement(
                self.ring, {e: c * v for e, v in self.terms.items()}, _normalized=True
            )
        self._check_ring(other)
        ring = self.ring
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if not ring.in_window(ring.monomial_degree(e)):
                    continue
                ring.check_exponents(e)
                s = out.get(e, Fraction(0)) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return GradedElement(ring, out, _normalized=True)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise RingError("negative element powers are not defined")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.scalar(other)
        if not isinstance(other, GradedElement):
            return NotImplemented
        return self.ring.same_as(other.ring) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- canonical text form ----------------------------------------------

    def _sorted_terms(self):
        # graded-lex: by monomial degree, then by exponent vector
        return sorted(
            self.terms.items(), key=lambda it: (self.ring.monomial_degree(it[0]), it[0])
        )

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps, coeff in self._sorted_terms():
            factors = []
            for name, e in zip(self.ring.names, exps):
                if e == 0:
                    continue
                factors.append(name if e == 1 else f"{name}^{e}")
            if not factors:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append("*".join(factors))
            elif coeff == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(str(coeff) + "*" + "*".join(factors))
        return " + ".join(parts)

    __repr__ = __str__


_TERM_RE = re.compile(r"^\s*(?P<body>[^\s]+)\s*$")


def parse_element(ring: GradedRingSpec, text: str) -> GradedElement:
    """Parse the canonical text form, e.g. ``3/2*x1^2*u^-1 + -1*x1``."""
    text = text.strip()
    if text in ("0", ""):
        return ring.zero()
    terms = {}
    for chunk in text.split("+"):
        chunk = chunk.strip()
        if not chunk:
            raise RingError("empty term in element string")
        coeff = Fraction(1)
        if chunk.startswith("-"):
            coeff = Fraction(-1)
            chunk = chunk[1:].strip()
        exps = [0] * ring.ngens
        for factor in chunk.split("*"):
            factor = factor.strip()
            if not factor:
                raise RingError("empty factor in element string")
            if re.fullmatch(r"-?\d+(/\d+)?", factor):
                coeff *= Fraction(factor)
                continue
            if "^" in factor:
                name, _, power = factor.partition("^")
                exps[ring.gen_index(name)] += int(power)
            else:
                exps[ring.gen_index(factor)] += 1
        key = tuple(exps)
        terms[key] = terms.get(key, Fraction(0)) + coeff
    return GradedElement(ring, terms)


class TruncatedSeries:
    """Truncated power series with graded-ring coefficients.

    ``variables`` is a tuple of ``(name, degree)``; coefficients map a
    variable-exponent vector to a GradedElement.  Truncation keeps
    monomials of total exponent weight <= order; every operation
    re-truncates.  Two series are equal iff the retained coefficients agree.
    """

    __slots__ = ("ring", "variables", "order", "coeffs")

    def __init__(self, ring, variables, order, coeffs=None, *, _normalized=False):
        self.ring = ring
        self.variables = tuple((str(n), int(d)) for n, d in variables)
        if len({n for n, _ in self.variables}) != len(self.variables):
            raise SeriesError("duplicate series variable")
        self.order = int(order)
        if self.order < 0:
            raise SeriesError("order must be nonnegative")
        coeffs = coeffs or {}
        if _normalized:
            self.coeffs = coeffs
            return
        clean = {}
        for exps, el in coeffs.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != len(self.variables):
                raise SeriesError("series exponent length mismatch")
            if any(e < 0 for e in exps):
                raise SeriesError("negative series exponent")
            if sum(exps) > self.order:
                continue
            if not isinstance(el, GradedElement):
                el = ring.scalar(el)
            if el.is_zero():
                continue
            clean[exps] = clean.get(exps, ring.zero()) + el
        self.coeffs = {e: c for e, c in clean.items() if not c.is_zero()}

    # -- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, ring, variables, order):
        return cls(ring, variables, order, {})

    @classmethod
    def one(cls, ring, variables, order):
        nv = len(tuple(variables))
        return cls(ring, variables, order, {(0,) * nv: ring.one()})

    @classmethod
    def variable(cls, ring, variables, order, name):
        variables = tuple(variables)
        nv = len(variables)
        idx = [n for n, _ in variables].index(name)
        exps = [0] * nv
        exps[idx] = 1
        return cls(ring, variables, order, {tuple(exps): ring.one()})

    def var_index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.variables):
            if n == name:
                return i
        raise SeriesError(f"no series variable {name!r}")

    # -- queries ---------------------------------------------------------

    def coefficient(self, exps) -> GradedElement:
        return self.coeffs.get(tuple(exps), self.ring.zero())

    def constant_term(self) -> GradedElement:
        return self.coefficient((0,) * len(self.variables))

    def is_zero(self) -> bool:
        return not self.coeffs

    def _compatible(self, other):
        if self.ring is not other.ring and not self.ring.same_as(other.ring):
            raise SeriesError("series over different rings")
        if self.variables != other.variables:
            raise SeriesError("series variable mismatch")

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction, GradedElement)):
            other = self._embed(other)
        self._compatible(other)
        order = min(self.order, other.order)
        coeffs = {e: c for e, c in self.coeffs.items() if sum(e) <= order}
        for e, c in other.coeffs.items():
            if sum(e) > order:
                continue
            s = coeffs.get(e, self.ring.zero()) + c
            if s.is_zero():
                coeffs.pop(e, None)
            else:
                coeffs[e] = s
        return TruncatedSeries(self.ring, self.variables, order, coeffs, _normalized=True)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(
            self.ring,
            self.variables,
            self.order,
            {e: -c for e, c in self.coeffs.items()},
            _normalized=True,
        )

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, GradedElement)):
            other = self._embed(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _embed(self, value) -> "TruncatedSeries":
        if not isinstance(value, GradedElement):
            value = self.ring.scalar(value)
        nv = len(self.variables)
        return TruncatedSeries(
            self.ring, self.variables, self.order, {(0,) * nv: value}
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GradedElement)):
            scale = other if isinstance(other, GradedElement) else self.ring.scalar(other)
            out = {}
            for e, c in self.coeffs.items():
                p = c * scale
                if not p.is_zero():
                    out[e] = p
            return TruncatedSeries(self.ring, self.variables, self.order, out, _normalized=True)
        self._compatible(other)
        order = min(self.order, other.order)
        out = {}
        for e1, c1 in self.coeffs.items():
            w1 = sum(e1)
            if w1 > order:
                continue
            for e2, c2 in other.coeffs.items():
                if w1 + sum(e2) > order:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                p = c1 * c2
                if p.is_zero():
                    continue
                s = out.get(e)
                s = p if s is None else s + p
                if s.is_zero():
                    out.pop(e, None)
                else:
                    out[e] = s
        return TruncatedSeries(self.ring, self.variables, order, out, _normalized=True)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise SeriesError("use invert() for negative powers")
        result = TruncatedSeries.one(self.ring, self.variables, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.ring.same_as(other.ring)
            and self.variables == other.variables
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    # -- composition ------------------------------------------------------

    def substitute(self, assignments: dict) -> "TruncatedSeries":
        """Substitute series for variables (unmentioned variables persist).

        Every substituted series must share one target variable set and have
        zero constant term in the sense required for truncation stability.
        """
        targets = [s for s in assignments.values() if isinstance(s, TruncatedSeries)]
        if targets:
            tvars = targets[0].variables
            order = min([self.order] + [t.order for t in targets])
        else:
            tvars = self.variables
            order = self.order
        for t in targets:
            if t.variables != tvars:
                raise SeriesError("substituted series must share variables")
            if not t.constant_term().is_zero():
                raise SeriesError("substituted series must have zero constant term")
        images = {}
        for name, _deg in self.variables:
            if name in assignments:
                images[name] = assignments[name]
            else:
                images[name] = TruncatedSeries.variable(self.ring, tvars, order, name)
        result = TruncatedSeries.zero(self.ring, tvars, order)
        for exps, coeff in sorted(self.coeffs.items(), key=lambda it: sum(it[0])):
            term = TruncatedSeries(self.ring, tvars, order, {(0,) * len(tvars): coeff})
            for (name, _), e in zip(self.variables, exps):
                if e:
                    term = term * (images[name] ** e)
            result = result + term
        return result

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """Univariate composition self(inner)."""
        if len(self.variables) != 1:
            raise SeriesError("compose() is for univariate series")
        return self.substitute({self.variables[0][0]: inner})

    # -- inverses ---------------------------------------------------------

    def invert(self) -> "TruncatedSeries":
        """Multiplicative inverse of a series with constant term 1."""
        c0 = self.constant_term()
        if not c0 == self.ring.one():
            raise SeriesError("invert needs constant term 1")
        n = self - self.ring.one()
        one = TruncatedSeries.one(self.ring, self.variables, self.order)
        result = one
        power = one
        for _ in range(self.order):
            power = power * (-n)
            if power.is_zero():
                break
            result = result + power
        return result

    def exp(self) -> "TruncatedSeries":
        if self.ring.base != "Q":
            raise SeriesError("exp needs a rational base ring")
        if not self.constant_term().is_zero():
            raise SeriesError("exp needs zero constant term")
        result = TruncatedSeries.one(self.ring, self.variables, self.order)
        power = result
        for k in range(1, self.order + 1):
            power = power * self
            if power.is_zero():
                break
            result = result + power * Fraction(1, factorial(k))
        return result

    def log(self) -> "TruncatedSeries":
        if self.ring.base != "Q":
            raise SeriesError("log needs a rational base ring")
        if not self.constant_term() == self.ring.one():
            raise SeriesError("log needs constant term 1")
        n = self - self.ring.one()
        result = TruncatedSeries.zero(self.ring, self.variables, self.order)
        power = TruncatedSeries.one(self.ring, self.variables, self.order)
        for k in range(1, self.order + 1):
            power = power * n
            if power.is_zero():
                break
            result = result + power * Fraction((-1) ** (k + 1), k)
        return result

    def reversion(self) -> "TruncatedSeries":
        """Compositional inverse of a univariate series z + O(z^2)."""
        if len(self.variables) != 1:
            raise SeriesError("reversion is for univariate series")
        if not self.constant_term().is_zero():
            raise SeriesError("reversion needs zero constant term")
        if not self.coefficient((1,)) == self.ring.one():
            raise SeriesError("reversion needs linear coefficient 1")
        name = self.variables[0][0]
        z = TruncatedSeries.variable(self.ring, self.variables, self.order, name)
        h = self - z  # weight >= 2
        g = z
        for _ in range(self.order):
            g_new = z - h.substitute({name: g})
            if g_new == g:
                break
            g = g_new
        return g

    def derivative(self, name: str) -> "TruncatedSeries":
        idx = self.var_index(name)
        out = {}
        for exps, coeff in self.coeffs.items():
            e = exps[idx]
            if e == 0:
                continue
            new = list(exps)
            new[idx] = e - 1
            out[tuple(new)] = coeff * e
        return TruncatedSeries(self.ring, self.variables, self.order, out, _normalized=True)

    def integrate(self, name: str) -> "TruncatedSeries":
        if self.ring.base != "Q":
            raise SeriesError("integration needs a rational base ring")
        idx = self.var_index(name)
        out = {}
        for exps, coeff in self.coeffs.items():
            new = list(exps)
            new[idx] = exps[idx] + 1
            if sum(new) > self.order:
                continue
            out[tuple(new)] = coeff * Fraction(1, exps[idx] + 1)
        return TruncatedSeries(self.ring, self.variables, self.order, out, _normalized=True)

    def shift_down(self, name: str) -> "TruncatedSeries":
        """Divide by a variable (valuation in that variable must be >= 1)."""
        idx = self.var_index(name)
        out = {}
        for exps, coeff in self.coeffs.items():
            if exps[idx] == 0:
                raise SeriesError(f"series not divisible by {name}")
            new = list(exps)
            new[idx] = exps[idx] - 1
            out[tuple(new)] = coeff
        return TruncatedSeries(self.ring, self.variables, self.order, out, _normalized=True)

    def truncate(self, order: int) -> "TruncatedSeries":
        return TruncatedSeries(
            self.ring,
            self.variables,
            order,
            {e: c for e, c in self.coeffs.items() if sum(e) <= order},
            _normalized=True,
        )

    def map_coefficients(self, fn, ring=None) -> "TruncatedSeries":
        ring = ring or self.ring
        out = {}
        for e, c in self.coeffs.items():
            v = fn(c)
            if not v.is_zero():
                out[e] = v
        return TruncatedSeries(ring, self.variables, self.order, out, _normalized=True)

    # -- printing ----------------------------------------------------------

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for exps, coeff in sorted(self.coeffs.items(), key=lambda it: (sum(it[0]), it[0])):
            mono = "*".join(
                (name if e == 1 else f"{name}^{e}")
                for (name, _), e in zip(self.variables, exps)
                if e
            )
            cs = str(coeff)
            if mono:
                cs = f"({cs})*{mono}" if ("+" in cs or cs.startswith("-")) else (
                    mono if cs == "1" else f"{cs}*{mono}"
                )
            parts.append(cs)
        return " + ".join(parts)

    __repr__ = __str__

    def to_json(self) -> dict:
        return {
            "ring": self.ring.to_json(),
            "variables": [[n, d] for n, d in self.variables],
            "order": self.order,
            "coefficients": {
                ",".join(map(str, e)): str(c) for e, c in sorted(self.coeffs.items())
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "TruncatedSeries":
        ring = GradedRingSpec.from_json(data["ring"])
        variables = [(n, d) for n, d in data["variables"]]
        coeffs = {}
        for key, text in data.get("coefficients", {}).items():
            exps = tuple(int(p) for p in key.split(","))
            coeffs[exps] = parse_element(ring, text)
        return cls(ring, variables, data["order"], coeffs)


def geometric_series_check(ring=None):
    """Small self-check used by the CLI doctor path."""
    ring = ring or rational_ring()
    z = TruncatedSeries.variable(ring, (("z", 2),), 6, "z")
    s = TruncatedSeries.one(ring, (("z", 2),), 6) + z
    return s.invert() * s == TruncatedSeries.one(ring, (("z", 2),), 6)

"""Numerical exterior calculus with graded coefficients on product meshes.

Meshes are products of unit-period circles (N samples) and at most one unit
interval (N+1 samples, N even); forms are sampled on the grid with values in
a finite-dimensional graded coefficient algebra.  Circle derivatives are
spectral (exact for bandlimited data), interval derivatives are fourth-order
finite differences, and fiber integration uses the exact periodic Riemann
sum on circles and composite Simpson on the interval.  Sign conventions:
components are stored on sorted index sets, fibers occupy the trailing mesh
factors, and the interval (when present) is the leading factor; with these
choices the Stokes identity and the interval homotopy formula hold with no
extra signs, which the test suite pins.
"""

from __future__ import annotations

import itertools

import numpy as np

from cobord.algebra import GradedElement, GradedRingSpec, rational_ring


class MeshError(ValueError):
    pass


class FormError(ValueError):
    pass


class Mesh:
    """Ordered product of circle and interval factors."""

    MAX_DIM = 6

    def __init__(self, factors):
        factors = tuple((str(kind), int(n)) for kind, n in factors)
        for kind, n in factors:
            if kind not in ("circle", "interval"):
                raise MeshError(f"unknown factor kind {kind!r}")
            if n < 4:
                raise MeshError("need at least 4 samples per factor")
            if kind == "interval" and n % 2 != 0:
                raise MeshError("interval sample count must be even (Simpson)")
        if len(factors) > self.MAX_DIM:
            raise MeshError(f"mesh dimension {len(factors)} exceeds {self.MAX_DIM}")
        if sum(1 for kind, _ in factors if kind == "interval") > 1:
            raise MeshError("at most one interval factor is supported")
        self.factors = factors

    @property
    def dim(self) -> int:
        return len(self.factors)

    @property
    def shape(self) -> tuple:
        return tuple(n if kind == "circle" else n + 1 for kind, n in self.factors)

    def kind(self, axis: int) -> str:
        return self.factors[axis][0]

    def samples(self, axis: int) -> int:
        return self.factors[axis][1]

    def points(self, axis: int) -> np.ndarray:
        kind, n = self.factors[axis]
        if kind == "circle":
            return np.arange(n) / n
        return np.arange(n + 1) / n

    def coordinate(self, axis: int) -> np.ndarray:
        """Grid-shaped coordinate array for one axis."""
        pts = self.points(axis)
        shape = [1] * self.dim
        shape[axis] = len(pts)
        return np.broadcast_to(pts.reshape(shape), self.shape).copy()

    def interval_axis(self):
        for i, (kind, _) in enumerate(self.factors):
            if kind == "interval":
                return i
        return None

    def __eq__(self, other):
        return isinstance(other, Mesh) and self.factors == other.factors

    def __repr__(self):
        body = " x ".join(f"{kind}({n})" for kind, n in self.factors)
        return f"Mesh[{body}]"


def torus(dims: int, n: int) -> Mesh:
    return Mesh([("circle", n)] * dims)


def cylinder(base: Mesh, n: int) -> Mesh:
    """[0,1] x base with the interval leading."""
    return Mesh((("interval", n),) + base.factors)


# -- coefficient algebras -------------------------------------------------------


class CoefficientSpace:
    """Floating image of a graded ring spec truncated to its window.

    The basis is the window's monomials in canonical order; multiplication
    of basis monomials is again a basis monomial or falls out of the window.
    """

    def __init__(self, ring: GradedRingSpec):
        if any(self.invertible_flag(ring)):
            raise FormError("coefficient spaces need polynomial (non-Laurent) rings")
        self.ring = ring
        if ring.ngens == 0:
            basis = [()]
        else:
            basis = []
            for d in range(ring.window[0], ring.window[1] + 1):
                if d > 0:
                    continue
                if any(dg >= 0 for dg in ring.degrees):
                    raise FormError("coefficient spaces need negative generator degrees")
                basis.extend(ring.monomials_of_degree(d))
        self.basis = sorted(basis)
        self.index = {m: i for i, m in enumerate(self.basis)}
        self.degrees = np.array(
            [ring.monomial_degree(m) for m in self.basis], dtype=int
        )
        dim = len(self.basis)
        table = np.zeros((dim, dim, dim))
        for i, mi in enumerate(self.basis):
            for j, mj in enumerate(self.basis):
                prod = tuple(a + b for a, b in zip(mi, mj))
                k = self.index.get(prod)
                if k is not None:
                    table[i, j, k] = 1.0
        self.table = table

    @staticmethod
    def invertible_flag(ring):
        return ring.invertible

    @classmethod
    def trivial(cls) -> "CoefficientSpace":
        return cls(rational_ring(window=(0, 0)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def unit_index(self) -> int:
        return self.index[(0,) * self.ring.ngens]

    def unit(self) -> np.ndarray:
        v = np.zeros(self.dim)
        v[self.unit_index] = 1.0
        return v

    def embed(self, el: GradedElement) -> np.ndarray:
        v = np.zeros(self.dim)
        for exps, coeff in el.terms.items():
            idx = self.index.get(exps)
            if idx is None:
                continue
            v[idx] = float(coeff)
        return v

    def is_trivial(self) -> bool:
        return self.dim == 1 and self.ring.ngens == 0

    def __eq__(self, other):
        return isinstance(other, CoefficientSpace) and self.ring.same_as(other.ring)


# -- sampled forms ----------------------------------------------------------------


def merge_sign(I, J):
    """Sign and sorted key for dx_I wedge dx_J on disjoint sorted tuples."""
    inversions = 0
    for a in I:
        inversions += sum(1 for b in J if b < a)
    return (-1 if inversions % 2 else 1), tuple(sorted(I + J))


def sort_sign(indices):
    """Sign of sorting a repetition-free index sequence, with the sorted tuple."""
    arr = list(indices)
    sign = 1
    for i in range(len(arr)):
        for j in range(i + 1, len(arr)):
            if arr[j] < arr[i]:
                sign = -sign
    return sign, tuple(sorted(arr))


class SampledForm:
    """Differential form sampled on a mesh, valued in a coefficient space.

    comps maps a sorted tuple of coordinate directions to an array of shape
    grid + (coeff.dim,).  A single SampledForm may hold components of
    several form degrees (objects of homogeneous total degree need this).
    """

    def __init__(self, mesh: Mesh, coeff: CoefficientSpace, comps=None):
        self.mesh = mesh
        self.coeff = coeff
        self.comps = {}
        if comps:
            for I, arr in comps.items():
                self.set_component(I, arr)

    def expected_shape(self):
        return self.mesh.shape + (self.coeff.dim,)

    def set_component(self, I, arr):
        I = tuple(sorted(int(i) for i in I))
        if len(set(I)) != len(I):
            raise FormError("repeated direction in component index")
        if any(i < 0 or i >= self.mesh.dim for i in I):
            raise FormError("component direction out of range")
        arr = np.asarray(arr)
        if arr.shape != self.expected_shape():
            raise FormError(
                f"component shape {arr.shape} != {self.expected_shape()}"
            )
        self.comps[I] = arr

    def component(self, I) -> np.ndarray:
        I = tuple(sorted(I))
        arr = self.comps.get(I)
        if arr is None:
            return np.zeros(self.expected_shape())
        return arr

    def degrees_present(self):
        return sorted({len(I) for I in self.comps})

    def copy(self) -> "SampledForm":
        return SampledForm(self.mesh, self.coeff, {I: a.copy() for I, a in self.comps.items()})

    def drop_small(self, tol=0.0) -> "SampledForm":
        out = {}
        for I, arr in self.comps.items():
            if np.max(np.abs(arr)) > tol:
                out[I] = arr
        return SampledForm(self.mesh, self.coeff, out)

    # -- linear structure ------------------------------------------------

    def _check(self, other):
        if self.mesh != other.mesh:
            raise FormError("mesh mismatch")
        if not self.coeff == other.coeff:
            raise FormError("coefficient space mismatch")

    def __add__(self, other):
        self._check(other)
        out = {I: a.copy() for I, a in self.comps.items()}
        for I, arr in other.comps.items():
            out[I] = out[I] + arr if I in out else arr.copy()
        return SampledForm(self.mesh, self.coeff, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return SampledForm(self.mesh, self.coeff, {I: -a for I, a in self.comps.items()})

    def scale(self, factor) -> "SampledForm":
        return SampledForm(
            self.mesh, self.coeff, {I: a * factor for I, a in self.comps.items()}
        )

    def sup_norm(self) -> float:
        if not self.comps:
            return 0.0
        return max(float(np.max(np.abs(a))) for a in self.comps.values())

    def total_degree(self):
        """Total (form + coefficient) degree, if homogeneous; None for 0."""
        found = None
        for I, arr in self.comps.items():
            mask = np.max(np.abs(arr), axis=tuple(range(self.mesh.dim))) > 1e-14
            for idx in np.nonzero(mask)[0]:
                total = len(I) + int(self.coeff.degrees[idx])
                if found is None:
                    found = total
                elif found != total:
                    raise FormError(f"mixed total degrees {found} and {total}")
        return found

    def to_json(self) -> dict:
        return {
            "mesh": [[kind, n] for kind, n in self.mesh.factors],
            "coeff_ring": self.coeff.ring.to_json(),
            "comps": {
                ",".join(map(str, I)): np.asarray(arr, dtype=float).tolist()
                for I, arr in sorted(self.comps.items())
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "SampledForm":
        mesh = Mesh([tuple(f) for f in data["mesh"]])
        coeff = CoefficientSpace(GradedRingSpec.from_json(data["coeff_ring"]))
        comps = {}
        for key, nested in data.get("comps", {}).items():
            I = tuple(int(p) for p in key.split(",")) if key else ()
            comps[I] = np.array(nested)
        return cls(mesh, coeff, comps)

    def __repr__(self):
        degs = self.degrees_present()
        return f"SampledForm({self.mesh}, degrees={degs}, comps={len(self.comps)})"


def zero_form(mesh: Mesh, coeff: CoefficientSpace) -> SampledForm:
    return SampledForm(mesh, coeff)


def constant_form(mesh: Mesh, coeff: CoefficientSpace, value=None) -> SampledForm:
    """Constant 0-form; value may be a scalar, a basis vector, or None (unit)."""
    if value is None:
        vec = coeff.unit()
    elif np.isscalar(value):
        vec = coeff.unit() * float(value)
    else:
        vec = np.asarray(value, dtype=float)
    arr = np.broadcast_to(vec, mesh.shape + (coeff.dim,)).copy()
    return SampledForm(mesh, coeff, {(): arr})


def promote(form: SampledForm, coeff: CoefficientSpace) -> SampledForm:
    """Push a trivial-coefficient form into a bigger coefficient space."""
    if form.coeff == coeff:
        return form
    if not form.coeff.is_trivial():
        raise FormError("can only promote trivial-coefficient forms")
    out = {}
    for I, arr in form.comps.items():
        new = np.zeros(form.mesh.shape + (coeff.dim,), dtype=arr.dtype)
        new[..., coeff.unit_index] = arr[..., 0]
        out[I] = new
    return SampledForm(form.mesh, coeff, out)


def scale_field(form: SampledForm, field: np.ndarray) -> SampledForm:
    """Multiply every component by a scalar grid field."""
    return SampledForm(
        form.mesh,
        form.coeff,
        {I: arr * field[..., None] for I, arr in form.comps.items()},
    )


def tensor_with_vector(
    form: SampledForm, coeff: CoefficientSpace, vec: np.ndarray
) -> SampledForm:
    """Tensor a trivial-coefficient form with a coefficient vector."""
    if not form.coeff.is_trivial():
        raise FormError("tensor_with_vector needs a trivial-coefficient form")
    vec = np.asarray(vec, dtype=float)
    out = {}
    for I, arr in form.comps.items():
        out[I] = arr[..., :1] * vec
    return SampledForm(form.mesh, coeff, out)


# -- derivatives -------------------------------------------------------------------


def _diff_circle(arr: np.ndarray, axis: int, n: int) -> np.ndarray:
    freqs = np.fft.fftfreq(n, d=1.0 / n)
    mult = 2j * np.pi * freqs
    if n % 2 == 0:
        mult[n // 2] = 0.0
    shape = [1] * arr.ndim
    shape[axis] = n
    spec = np.fft.fft(arr, axis=axis) * mult.reshape(shape)
    out = np.fft.ifft(spec, axis=axis)
    return out.real if np.isrealobj(arr) else out


_D4_CACHE = {}


def _d4_matrix(n: int) -> np.ndarray:
    """Fourth-order differentiation matrix on n+1 points over [0,1]."""
    if n in _D4_CACHE:
        return _D4_CACHE[n]
    if n < 4:
        raise MeshError("interval needs at least 5 points")
    h = 1.0 / n
    D = np.zeros((n + 1, n + 1))
    D[0, :5] = np.array([-25, 48, -36, 16, -3]) / (12 * h)
    D[1, :5] = np.array([-3, -10, 18, -6, 1]) / (12 * h)
    for i in range(2, n - 1):
        D[i, i - 2 : i + 3] = np.array([1, -8, 0, 8, -1]) / (12 * h)
    D[n - 1, n - 4 :] = -np.array([1, -6, 18, -10, -3]) / (12 * h)
    D[n, n - 4 :] = np.array([3, -16, 36, -48, 25]) / (12 * h)
    _D4_CACHE[n] = D
    return D


def _diff_interval(arr: np.ndarray, axis: int, n: int) -> np.ndarray:
    D = _d4_matrix(n)
    moved = np.moveaxis(arr, axis, 0)
    out = np.tensordot(D, moved, axes=(1, 0))
    return np.moveaxis(out, 0, axis)


def _diff_axis(mesh: Mesh, arr: np.ndarray, axis: int) -> np.ndarray:
    kind, n = mesh.factors[axis]
    if kind == "circle":
        return _diff_circle(arr, axis, n)
    return _diff_interval(arr, axis, n)


def exterior_d(a: SampledForm) -> SampledForm:
    """Spectral/finite-difference exterior derivative; degree k -> k+1."""
    out = {}
    for I, arr in a.comps.items():
        for j in range(a.mesh.dim):
            if j in I:
                continue
            sign = -1 if sum(1 for i in I if i < j) % 2 else 1
            d_arr = _diff_axis(a.mesh, arr, j) * sign
            _, K = merge_sign((j,), I)
            out[K] = out[K] + d_arr if K in out else d_arr
    return SampledForm(a.mesh, a.coeff, out)


# -- wedge -------------------------------------------------------------------------


def wedge(a: SampledForm, b: SampledForm) -> SampledForm:
    """Pointwise graded wedge with the total-degree Koszul sign convention.

    The coefficient-level sign (-1)^(deg r * form deg) is folded in per basis
    degree; for even coefficient spaces it is identically +1.
    """
    if a.mesh != b.mesh:
        raise FormError("mesh mismatch")
    if not a.coeff == b.coeff:
        if a.coeff.is_trivial():
            a = promote(a, b.coeff)
        elif b.coeff.is_trivial():
            b = promote(b, a.coeff)
        else:
            raise FormError("coefficient space mismatch")
    space = a.coeff
    table = space.table
    out = {}
    for J, barr in b.comps.items():
        koszul = np.where(space.degrees % 2 == 1, -1.0, 1.0) ** len(J) if len(J) % 2 else None
        for I, aarr in a.comps.items():
            if set(I) & set(J):
                continue
            sign, K = merge_sign(I, J)
            left = aarr if koszul is None else aarr * koszul
            prod = np.einsum("...i,...j,ijk->...k", left, barr, table) * sign
            out[K] = out[K] + prod if K in out else prod
    return SampledForm(a.mesh, a.coeff, out)


# -- integration -------------------------------------------------------------------


def _simpson_weights(n: int) -> np.ndarray:
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * n)


def fiber_integrate(a: SampledForm, n_base: int) -> SampledForm:
    """Push forward along the projection to the leading n_base factors.

    All fiber factors must be circles; only components containing the full
    fiber frame survive, with no extra sign (fiber-last ordering).
    """
    mesh = a.mesh
    if n_base < 0 or n_base > mesh.dim:
        raise FormError("bad base dimension")
    fiber = tuple(range(n_base, mesh.dim))
    for i in fiber:
        if mesh.kind(i) != "circle":
            raise FormError("fiber factors must be circles (use the interval variant)")
    base_mesh = Mesh(mesh.factors[:n_base])
    out = {}
    for I, arr in a.comps.items():
        if not set(fiber) <= set(I):
            continue
        J = tuple(i for i in I if i < n_base)
        reduced = arr.mean(axis=fiber) if fiber else arr
        out[J] = out[J] + reduced if J in out else reduced
    return SampledForm(base_mesh, a.coeff, out)


def fiber_integrate_interval(a: SampledForm) -> SampledForm:
    """Integrate the dt-components over a leading [0,1] factor (Simpson).

    Satisfies d(I w) + I(dw) = r_1^* w - r_0^* w with the stored conventions.
    """
    mesh = a.mesh
    if mesh.dim == 0 or mesh.kind(0) != "interval":
        raise FormError("mesh must have the interval as its first factor")
    n = mesh.samples(0)
    weights = _simpson_weights(n)
    base_mesh = Mesh(mesh.factors[1:])
    out = {}
    for I, arr in a.comps.items():
        if 0 not in I:
            continue
        J = tuple(i - 1 for i in I if i != 0)
        wshape = [1] * arr.ndim
        wshape[0] = n + 1
        reduced = (arr * weights.reshape(wshape)).sum(axis=0)
        out[J] = out[J] + reduced if J in out else reduced
    return SampledForm(base_mesh, a.coeff, out)


def restrict_interval(a: SampledForm, end: int) -> SampledForm:
    """Restrict to the slice t = 0 or t = 1 of a leading interval factor."""
    mesh = a.mesh
    if mesh.dim == 0 or mesh.kind(0) != "interval":
        raise FormError("mesh must have the interval as its first factor")
    if end not in (0, 1):
        raise FormError("end must be 0 or 1")
    idx = 0 if end == 0 else mesh.samples(0)
    base_mesh = Mesh(mesh.factors[1:])
    out = {}
    for I, arr in a.comps.items():
        if 0 in I:
            continue
        J = tuple(i - 1 for i in I)
        out[J] = arr[idx]
    return SampledForm(base_mesh, a.coeff, out)


def periods(a: SampledForm, closed_tol: float = 1e-6, check_closed: bool = True):
    """Integrals over all coordinate subtori matching each component.

    On tori these determine the de Rham class, so equality modulo exact
    forms is decided by comparing the returned tables.  Components whose
    index set touches an interval direction are skipped (no closed cycle).
    """
    if check_closed:
        residual = exterior_d(a).sup_norm()
        if residual > closed_tol:
            raise FormError(f"form is not closed: ||da|| = {residual:.3e}")
    mesh = a.mesh
    circles = [i for i in range(mesh.dim) if mesh.kind(i) == "circle"]
    out = {}
    for degree in a.degrees_present():
        for I in itertools.combinations(circles, degree):
            arr = a.comps.get(I)
            if arr is None:
                out[I] = np.zeros(a.coeff.dim)
                continue
            sliced = arr
            for axis in reversed(range(mesh.dim)):
                if axis in I:
                    continue
                sliced = np.take(sliced, 0, axis=axis)
            axes = tuple(range(len(I)))
            out[I] = sliced.mean(axis=axes) if I else sliced
    return out


def periods_difference(pa: dict, pb: dict) -> float:
    keys = set(pa) | set(pb)
    worst = 0.0
    for key in keys:
        va = pa.get(key)
        vb = pb.get(key)
        if va is None:
            worst = max(worst, float(np.max(np.abs(vb))))
        elif vb is None:
            worst = max(worst, float(np.max(np.abs(va))))
        else:
            worst = max(worst, float(np.max(np.abs(va - vb))))
    return worst


# -- mesh maps ----------------------------------------------------------------------


def pullback_insert(a: SampledForm, new_mesh: Mesh, dirmap) -> SampledForm:
    """Pull back along the projection new_mesh -> a.mesh given by dirmap.

    dirmap[old_axis] = new_axis must be strictly increasing (product
    insertions preserve order), so no signs appear.
    """
    dirmap = {int(k): int(v) for k, v in dict(dirmap).items()}
    if sorted(dirmap) != list(range(a.mesh.dim)):
        raise FormError("dirmap must cover the source axes")
    values = [dirmap[i] for i in range(a.mesh.dim)]
    if values != sorted(values):
        raise FormError("dirmap must be monotone")
    for old, new in dirmap.items():
        if a.mesh.factors[old] != new_mesh.factors[new]:
            raise FormError("dirmap must match factor types")
    out = {}
    for I, arr in a.comps.items():
        newI = tuple(dirmap[i] for i in I)
        expand = arr
        # insert broadcast axes for the new directions
        for axis in range(new_mesh.dim):
            if axis not in values:
                expand = np.expand_dims(expand, axis=axis)
        expand = np.broadcast_to(expand, new_mesh.shape + (a.coeff.dim,))
        out[newI] = expand.copy()
    return SampledForm(new_mesh, a.coeff, out)


def diagonal_pullback(a: SampledForm, b: int) -> SampledForm:
    """Pull back along the diagonal of a mesh whose first 2b factors are two
    copies of the same b factors: (x, x, rest) -> (x, rest)."""
    mesh = a.mesh
    if mesh.factors[:b] != mesh.factors[b : 2 * b]:
        raise FormError("leading factors are not two copies of the same mesh")
    new_mesh = Mesh(mesh.factors[:b] + mesh.factors[2 * b :])
    letters = "abcdefghijklmnop"
    sub_in = []
    for axis in range(mesh.dim):
        if axis < b:
            sub_in.append(letters[axis])
        elif axis < 2 * b:
            sub_in.append(letters[axis - b])
        else:
            sub_in.append(letters[axis - b])
    sub_out = [letters[i] for i in range(new_mesh.dim)]
    spec = "".join(sub_in) + "z->" + "".join(sub_out) + "z"
    out = {}
    for I, arr in a.comps.items():
        mapped = [i if i < b else i - b for i in I]
        if len(set(mapped)) != len(mapped):
            continue  # dx wedge dx
        sign, K = sort_sign(mapped)
        diag = np.einsum(spec, arr) * sign
        out[K] = out[K] + diag if K in out else diag
    return SampledForm(new_mesh, a.coeff, out)


# -- random bandlimited data ----------------------------------------------------------


def random_scalar_field(mesh: Mesh, rng: np.random.Generator, kmax: int = 2) -> np.ndarray:
    """Random field: bandlimited on circles, quadratic polynomial on the interval."""
    field = np.zeros(mesh.shape)
    for _ in range(3):
        term = np.ones(mesh.shape)
        for axis in range(mesh.dim):
            x = mesh.coordinate(axis)
            if mesh.kind(axis) == "circle":
                k = rng.integers(0, kmax + 1)
                phase = rng.uniform(0, 2 * np.pi)
                amp = rng.uniform(-1, 1)
                term = term * (amp * np.cos(2 * np.pi * k * x + phase))
            else:
                c0, c1, c2 = rng.uniform(-1, 1, size=3)
                term = term * (c0 + c1 * x + c2 * x * x)
        field += term
    return field


def random_form(
    mesh: Mesh,
    coeff: CoefficientSpace,
    degree: int,
    rng: np.random.Generator,
    kmax: int = 2,
    basis_indices=None,
) -> SampledForm:
    """Seeded random form of one form degree with bandlimited components."""
    if basis_indices is None:
        basis_indices = [coeff.unit_index]
    out = zero_form(mesh, coeff)
    for I in itertools.combinations(range(mesh.dim), degree):
        arr = np.zeros(mesh.shape + (coeff.dim,))
        for bi in basis_indices:
            arr[..., bi] = random_scalar_field(mesh, rng, kmax)
        out.comps[I] = arr
    return out


def random_graded_form(
    mesh: Mesh,
    coeff: CoefficientSpace,
    total_degree: int,
    rng: np.random.Generator,
    kmax: int = 2,
) -> SampledForm:
    """Random form of homogeneous total degree (form + coefficient)."""
    out = zero_form(mesh, coeff)
    hit = False
    for k in range(mesh.dim + 1):
        want = total_degree - k
        slots = [i for i, d in enumerate(coeff.degrees) if d == want]
        if not slots:
            continue
        part = random_form(mesh, coeff, k, rng, kmax, basis_indices=slots)
        out = out + part
        hit = True
    if not hit:
        raise FormError(f"coefficient space cannot realize total degree {total_degree}")
    return out

"""Continuous Galerkin discretization of the convection-diffusion form.

Degree-k Lagrange elements on equidistant element-internal nodes, assembly of

    a(u, v) = epsilon*(u', v') - (b u', v) + (c u, v),     rhs (f, v),

by Gauss-Legendre quadrature, and a banded LU solver with partial pivoting.
Global unknowns are node-ordered left to right, giving bandwidth k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .mesh import Mesh1D

if TYPE_CHECKING:
    from .problem import TwoPointBVP

__all__ = [
    "ReferenceBasis",
    "QuadratureRule",
    "gauss_legendre",
    "BandedSystem",
    "PiecewisePolynomial",
    "SingularMatrixError",
    "global_nodes",
    "assemble",
    "solve",
    "galerkin_solve",
]


class SingularMatrixError(RuntimeError):
    """The elimination hit a zero pivot; the system is singular to working precision."""

    def __init__(self, pivot_index: int):
        super().__init__(f"zero pivot at elimination step {pivot_index}")
        self.pivot_index = pivot_index


class ReferenceBasis:
    """Lagrange shape functions of degree k on the k+1 equidistant nodes of [0, 1]."""

    def __init__(self, degree: int):
        if degree < 1:
            raise ValueError(f"polynomial degree must be >= 1, got {degree}")
        self.degree = degree
        self.nodes = np.linspace(0.0, 1.0, degree + 1)

    def shape_value(self, j: int, t) -> np.ndarray:
        """Value of shape function j at reference coordinates t."""
        t = np.asarray(t, dtype=float)
        out = np.ones_like(t)
        tj = self.nodes[j]
        for m, tm in enumerate(self.nodes):
            if m != j:
                out = out * ((t - tm) / (tj - tm))
        return out

    def shape_derivative(self, j: int, t) -> np.ndarray:
        """First derivative of shape function j at reference coordinates t."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        tj = self.nodes[j]
        for m, tm in enumerate(self.nodes):
            if m == j:
                continue
            term = np.ones_like(t) / (tj - tm)
            for l, tl in enumerate(self.nodes):
                if l != j and l != m:
                    term = term * ((t - tl) / (tj - tl))
            out = out + term
        return out

    def eval_all(self, t) -> np.ndarray:
        """Shape function values, stacked as a (k+1, len(t)) array."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.stack([self.shape_value(j, t) for j in range(self.degree + 1)])

    def deriv_all(self, t) -> np.ndarray:
        """Shape function derivatives, stacked as a (k+1, len(t)) array."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.stack([self.shape_derivative(j, t) for j in range(self.degree + 1)])


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Quadrature points and weights on [0, 1]."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        if self.points.shape != self.weights.shape or self.points.ndim != 1:
            raise ValueError("points and weights must be 1D arrays of equal length")

    @property
    def count(self) -> int:
        return self.points.size


def gauss_legendre(q: int) -> QuadratureRule:
    """Gauss-Legendre rule with q points on [0, 1]; exact for degree <= 2q - 1."""
    if q < 1:
        raise ValueError(f"need at least one quadrature point, got {q}")
    pts, wts = np.polynomial.legendre.leggauss(q)
    return QuadratureRule(points=0.5 * (pts + 1.0), weights=0.5 * wts)


def global_nodes(mesh: Mesh1D, degree: int) -> np.ndarray:
    """Coordinates of the k*N + 1 global nodes x_i + (j/k)*h_i, left to right."""
    k = degree
    h = mesh.steps
    local = np.arange(k) / k
    inner = mesh.nodes[:-1, None] + h[:, None] * local[None, :]
    return np.append(inner.ravel(), mesh.nodes[-1])


@dataclass(frozen=True, eq=False)
class PiecewisePolynomial:
    """A C0 piecewise polynomial of degree k: mesh + nodal coefficient vector.

    Coefficient m is the value at global node m; boundary entries are present
    (possibly zero).  Continuity across elements is automatic because
    neighbouring elements share their endpoint coefficient.
    """

    mesh: Mesh1D
    degree: int
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        coeff = np.asarray(self.coefficients, dtype=float)
        expected = self.degree * self.mesh.N + 1
        if coeff.shape != (expected,):
            raise ValueError(f"expected {expected} coefficients, got {coeff.shape}")
        coeff = coeff.copy()
        coeff.setflags(write=False)
        object.__setattr__(self, "coefficients", coeff)

    def node_coordinates(self) -> np.ndarray:
        return global_nodes(self.mesh, self.degree)

    def element_coefficients(self) -> np.ndarray:
        """Coefficients per element as an (N, k+1) array (shared nodes duplicated)."""
        k = self.degree
        idx = k * np.arange(self.mesh.N)[:, None] + np.arange(k + 1)[None, :]
        return self.coefficients[idx]

    def _locate(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
        x_arr = np.asarray(x, dtype=float)
        scalar = x_arr.ndim == 0
        xf = np.atleast_1d(x_arr).ravel()
        elems = np.clip(
            np.searchsorted(self.mesh.nodes, xf, side="right") - 1, 0, self.mesh.N - 1
        )
        xi = (xf - self.mesh.nodes[elems]) / self.mesh.steps[elems]
        return xf, elems, xi, scalar

    def evaluate(self, x):
        """Evaluate at x (scalar or array)."""
        xf, elems, xi, scalar = self._locate(x)
        basis = ReferenceBasis(self.degree)
        out = np.zeros_like(xf)
        for a in range(self.degree + 1):
            out += self.coefficients[self.degree * elems + a] * basis.shape_value(a, xi)
        if scalar:
            return float(out[0])
        return out.reshape(np.shape(x))

    def derivative(self, x):
        """Evaluate the first derivative at x (scalar or array)."""
        xf, elems, xi, scalar = self._locate(x)
        basis = ReferenceBasis(self.degree)
        out = np.zeros_like(xf)
        for a in range(self.degree + 1):
            out += self.coefficients[self.degree * elems + a] * basis.shape_derivative(a, xi)
        out /= self.mesh.steps[elems]
        if scalar:
            return float(out[0])
        return out.reshape(np.shape(x))

    __call__ = evaluate


@dataclass(eq=False)
class BandedSystem:
    """Nonsymmetric banded linear system in row-aligned storage.

    ``rows[i, t]`` holds entry (i, i + t - bandwidth); column offsets run from
    -bandwidth to 2*bandwidth, the upper half being headroom for pivoting
    fill.  Only offsets |o| <= bandwidth are populated before factorization.
    """

    dimension: int
    bandwidth: int
    rows: np.ndarray
    rhs: np.ndarray

    def __post_init__(self) -> None:
        n, k = self.dimension, self.bandwidth
        if n < 1 or k < 1:
            raise ValueError("dimension and bandwidth must be positive")
        if self.rows.shape != (n, 3 * k + 1):
            raise ValueError(f"banded storage must have shape {(n, 3 * k + 1)}")
        if self.rhs.shape != (n,):
            raise ValueError(f"rhs must have shape ({n},)")

    @classmethod
    def empty(cls, dimension: int, bandwidth: int) -> "BandedSystem":
        return cls(
            dimension=dimension,
            bandwidth=bandwidth,
            rows=np.zeros((dimension, 3 * bandwidth + 1)),
            rhs=np.zeros(dimension),
        )

    @classmethod
    def from_dense(cls, matrix: np.ndarray, bandwidth: int, rhs: np.ndarray) -> "BandedSystem":
        """Pack a dense matrix whose nonzeros lie within the given bandwidth."""
        matrix = np.asarray(matrix, dtype=float)
        n = matrix.shape[0]
        if matrix.shape != (n, n):
            raise ValueError("matrix must be square")
        out = cls.empty(n, bandwidth)
        for i in range(n):
            lo, hi = max(0, i - bandwidth), min(n, i + bandwidth + 1)
            if np.any(matrix[i, :lo] != 0.0) or np.any(matrix[i, hi:] != 0.0):
                raise ValueError(f"row {i} has entries outside bandwidth {bandwidth}")
            out.rows[i, bandwidth - (i - lo) : bandwidth + (hi - i)] = matrix[i, lo:hi]
        out.rhs[:] = np.asarray(rhs, dtype=float)
        return out

    def entry(self, i: int, j: int) -> float:
        o = j - i
        if not -self.bandwidth <= o <= 2 * self.bandwidth:
            return 0.0
        return float(self.rows[i, self.bandwidth + o])

    def to_dense(self) -> np.ndarray:
        n, k = self.dimension, self.bandwidth
        dense = np.zeros((n, n))
        for i in range(n):
            lo, hi = max(0, i - k), min(n, i + 2 * k + 1)
            dense[i, lo:hi] = self.rows[i, k + (lo - i) : k + (hi - i)]
        return dense


def assemble(bvp: "TwoPointBVP", mesh: Mesh1D, degree: int, quad_points: int | None = None) -> BandedSystem:
    """Assemble the discrete convection-diffusion system with Dirichlet rows eliminated.

    Entry (i, j) is epsilon*(theta_j', theta_i') - (b theta_j', theta_i)
    + (c theta_j, theta_i); the right-hand side is (f, theta_i).  Element
    integrals use ``quad_points`` Gauss-Legendre points (default k + 2, exact
    for polynomial data of degree <= k + 3).
    """
    if degree < 1:
        raise ValueError(f"polynomial degree must be >= 1, got {degree}")
    if not np.all(np.diff(mesh.nodes) > 0.0):
        raise ValueError("mesh nodes must be strictly increasing")
    k = degree
    q = k + 2 if quad_points is None else quad_points
    rule = gauss_legendre(q)
    basis = ReferenceBasis(k)

    xi, w = rule.points, rule.weights
    shp = basis.eval_all(xi)          # (k+1, q)
    dshp = basis.deriv_all(xi)        # (k+1, q)
    h = mesh.steps                    # (N,)
    x_q = mesh.nodes[:-1, None] + h[:, None] * xi[None, :]   # (N, q)

    b_q = np.broadcast_to(np.asarray(bvp.b(x_q), dtype=float), x_q.shape)
    c_q = np.broadcast_to(np.asarray(bvp.c(x_q), dtype=float), x_q.shape)
    f_q = np.broadcast_to(np.asarray(bvp.f(x_q), dtype=float), x_q.shape)

    # Physical-space factors: d theta/dx = dshp/h and dx = h dxi, so the
    # diffusion block scales by 1/h, convection by 1 and mass by h.
    stiff = np.einsum("aq,bq,q->ab", dshp, dshp, w)
    conv = np.einsum("nq,aq,bq,q->nab", b_q, shp, dshp, w)
    mass = np.einsum("nq,aq,bq,q->nab", c_q, shp, shp, w)
    elem_mat = (
        (bvp.epsilon / h)[:, None, None] * stiff[None, :, :]
        - conv
        + h[:, None, None] * mass
    )
    elem_rhs = h[:, None] * np.einsum("nq,aq,q->na", f_q, shp, w)

    n_last = k * mesh.N
    gnode = k * np.arange(mesh.N)[:, None] + np.arange(k + 1)[None, :]   # (N, k+1)
    rows_g = np.broadcast_to(gnode[:, :, None], elem_mat.shape)
    cols_g = np.broadcast_to(gnode[:, None, :], elem_mat.shape)
    interior = (rows_g > 0) & (rows_g < n_last) & (cols_g > 0) & (cols_g < n_last)

    system = BandedSystem.empty(n_last - 1, k)
    r = rows_g[interior] - 1
    c = cols_g[interior] - 1
    np.add.at(system.rows, (r, k + c - r), elem_mat[interior])

    rhs_mask = (gnode > 0) & (gnode < n_last)
    np.add.at(system.rhs, gnode[rhs_mask] - 1, elem_rhs[rhs_mask])
    return system


def solve(system: BandedSystem) -> np.ndarray:
    """Solve by banded LU with partial pivoting; the input system is not modified.

    Raises :class:`SingularMatrixError` with the offending elimination step
    when a pivot column is exactly zero (or non-finite) to working precision.
    """
    n, k = system.dimension, system.bandwidth
    m = system.rows.copy()
    rhs = system.rhs.copy()
    width = 2 * k + 1
    deltas = np.arange(k + 1)

    for j in range(n):
        reach = min(k, n - 1 - j)
        col = m[j + deltas[: reach + 1], k - deltas[: reach + 1]]
        p = int(np.argmax(np.abs(col)))
        piv = col[p]
        if piv == 0.0 or not np.isfinite(piv):
            raise SingularMatrixError(j)
        if p:
            ip = j + p
            tmp = m[j, k : k + width].copy()
            m[j, k : k + width] = m[ip, k - p : k - p + width]
            m[ip, k - p : k - p + width] = tmp
            rhs[j], rhs[ip] = rhs[ip], rhs[j]
            piv = m[j, k]
        for delta in range(1, reach + 1):
            i = j + delta
            mult = m[i, k - delta] / piv
            if mult != 0.0:
                m[i, k - delta : k - delta + width] -= mult * m[j, k : k + width]
                rhs[i] -= mult * rhs[j]

    x = np.zeros(n + 2 * k)
    for i in range(n - 1, -1, -1):
        s = rhs[i] - np.dot(m[i, k + 1 : k + width], x[i + 1 : i + width])
        x[i] = s / m[i, k]
    return x[:n]


def galerkin_solve(
    bvp: "TwoPointBVP", mesh: Mesh1D, degree: int, quad_points: int | None = None
) -> PiecewisePolynomial:
    """Assemble and solve the discrete problem; returns the solution with the
    homogeneous boundary values reinserted."""
    system = assemble(bvp, mesh, degree, quad_points)
    interior = solve(system)
    coeff = np.zeros(degree * mesh.N + 1)
    coeff[1:-1] = interior
    return PiecewisePolynomial(mesh=mesh, degree=degree, coefficients=coeff)

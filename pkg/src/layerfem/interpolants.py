"""Nodal interpolation onto the finite element space, with layer correction.

The plain Lagrange interpolant samples a function at every global node.  For
solutions u = S + E with a boundary layer E, the interpolant loses L2
stability on the last fine element of a graded mesh, so a corrected variant
is built by zeroing the layer interpolant's coefficients at the nodes of that
element except its right endpoint.  The correction is a piecewise polynomial
with at most k nonzero coefficients, supported on two elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .femcore import PiecewisePolynomial, global_nodes
from .mesh import Mesh1D
from .problem import ExactSolution

__all__ = ["InterpolantBundle", "lagrange_interp", "build_bundle"]


def lagrange_interp(fn: Callable, mesh: Mesh1D, degree: int) -> PiecewisePolynomial:
    """Interpolant of ``fn`` with coefficient m equal to fn at global node m."""
    coords = global_nodes(mesh, degree)
    values = np.broadcast_to(np.asarray(fn(coords), dtype=float), coords.shape)
    return PiecewisePolynomial(mesh=mesh, degree=degree, coefficients=values)


@dataclass(frozen=True)
class InterpolantBundle:
    """Interpolants of u, S, E plus the layer-corrected pair, all on one mesh.

    ``correction`` holds the layer values at the k correction nodes (the left
    endpoint and interior nodes of element N/2 - 1) and zeros elsewhere;
    ``corrected_layer_interp = layer_interp - correction`` and
    ``corrected_interp = u_interp - correction`` coefficientwise, so the
    corrected interpolant stays in the finite element space and matches the
    plain interpolant away from the transition element.
    """

    u_interp: PiecewisePolynomial
    smooth_interp: PiecewisePolynomial
    layer_interp: PiecewisePolynomial
    corrected_layer_interp: PiecewisePolynomial
    correction: PiecewisePolynomial
    corrected_interp: PiecewisePolynomial


def build_bundle(exact: ExactSolution, mesh: Mesh1D, degree: int) -> InterpolantBundle:
    """Build the interpolant bundle for an exact solution with an S/E split."""
    if exact is None:
        raise ValueError("interpolant bundle needs an exact solution with an S/E split")
    if mesh.N < 4 or mesh.N % 2 != 0:
        raise ValueError(f"mesh must have an even number >= 4 of intervals, got {mesh.N}")

    u_i = lagrange_interp(exact.u, mesh, degree)
    s_i = lagrange_interp(exact.S, mesh, degree)
    e_i = lagrange_interp(exact.E, mesh, degree)

    coords = global_nodes(mesh, degree)
    corr = np.zeros_like(coords)
    first = (mesh.N // 2 - 1) * degree
    corr[first : first + degree] = np.asarray(
        exact.E(coords[first : first + degree]), dtype=float
    )

    return InterpolantBundle(
        u_interp=u_i,
        smooth_interp=s_i,
        layer_interp=e_i,
        corrected_layer_interp=PiecewisePolynomial(
            mesh=mesh, degree=degree, coefficients=e_i.coefficients - corr
        ),
        correction=PiecewisePolynomial(mesh=mesh, degree=degree, coefficients=corr),
        corrected_interp=PiecewisePolynomial(
            mesh=mesh, degree=degree, coefficients=u_i.coefficients - corr
        ),
    )

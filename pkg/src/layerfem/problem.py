"""Two-point convection-diffusion boundary value problems.

The problem class is

    -epsilon*u'' - b(x)*u' + c(x)*u = f(x)  on (0, 1),   u(0) = u(1) = 0,

with b >= beta > 1 and c + b'/2 >= gamma > 0, so the solution develops a
boundary layer of width O(epsilon*log(1/epsilon)) at x = 0 and splits into a
smooth part plus a layer part, u = S + E.  Coefficient callables must accept
numpy arrays and be pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import Mesh1D

__all__ = [
    "ExactSolution",
    "TwoPointBVP",
    "layer_test_problem",
    "get_problem",
    "check_layer_bounds",
    "LayerBoundsReport",
]

ScalarFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ExactSolution:
    """Exact solution with its smooth/layer split u = S + E and derivatives."""

    u: ScalarFn
    u_prime: ScalarFn
    S: ScalarFn
    S_prime: ScalarFn
    E: ScalarFn
    E_prime: ScalarFn

    def validate(self, n_samples: int = 1000, tol: float = 1e-12) -> None:
        """Check u(0) = u(1) = 0 and u = S + E on a uniform sample grid."""
        if abs(float(self.u(np.array(0.0)))) > tol or abs(float(self.u(np.array(1.0)))) > tol:
            raise ValueError("exact solution must vanish at both endpoints")
        x = np.linspace(0.0, 1.0, n_samples)
        gap = np.max(np.abs(self.u(x) - (self.S(x) + self.E(x))))
        if gap > tol:
            raise ValueError(f"u and S + E disagree by {gap:.3e} (> {tol:.0e})")


@dataclass(frozen=True)
class TwoPointBVP:
    """Problem data: coefficients b, c, forcing f and the parameter epsilon.

    ``b_prime`` may be supplied analytically; otherwise the sampled
    coefficient checks fall back to central differences.  ``exact`` is
    optional and carries the manufactured solution when one is known.
    """

    epsilon: float
    b: ScalarFn
    c: ScalarFn
    f: ScalarFn
    b_prime: ScalarFn | None = None
    exact: ExactSolution | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        beta, gamma = self.sampled_bounds()
        if beta <= 1.0:
            raise ValueError(f"b(x) must exceed 1 on [0, 1]; sampled minimum {beta:.6g}")
        if gamma <= 0.0:
            raise ValueError(
                f"c(x) + b'(x)/2 must be positive on [0, 1]; sampled minimum {gamma:.6g}"
            )
        if self.exact is not None:
            self.exact.validate()

    def sampled_bounds(self, n_samples: int = 1000) -> tuple[float, float]:
        """Sampled minima (beta, gamma) of b and c + b'/2 on a uniform grid."""
        x = np.linspace(0.0, 1.0, n_samples)
        if self.b_prime is not None:
            db = self.b_prime(x)
        else:
            step = 1e-6
            xc = np.clip(x, step, 1.0 - step)
            db = (self.b(xc + step) - self.b(xc - step)) / (2.0 * step)
        beta = float(np.min(np.broadcast_to(self.b(x), x.shape)))
        gamma = float(np.min(np.broadcast_to(self.c(x) + 0.5 * db, x.shape)))
        return beta, gamma


def layer_test_problem(epsilon: float) -> TwoPointBVP:
    """Manufactured benchmark problem with a boundary layer at x = 0.

    Coefficients b(x) = 3 - x, c(x) = 1 and exact solution

        u(x) = (1 - x) * (1 - exp(-2x/epsilon)),

    split as S(x) = 1 - x and E(x) = -(1 - x)*exp(-2x/epsilon).  The forcing
    f is evaluated from the closed-form derivatives: with E0 = exp(-2x/eps),

        u'  = -1 + E0*(1 + 2(1-x)/eps)
        u'' = -(2/eps)*E0*(2 + 2(1-x)/eps)

    and f = -eps*u'' - (3-x)*u' + u.  exp underflows to zero far from the
    layer, which only drops terms already below round-off of the smooth part.
    """
    eps = float(epsilon)

    def u(x):
        return (1.0 - x) * (1.0 - np.exp(-2.0 * x / eps))

    def u_prime(x):
        e0 = np.exp(-2.0 * x / eps)
        return -1.0 + e0 * (1.0 + 2.0 * (1.0 - x) / eps)

    def u_double_prime(x):
        e0 = np.exp(-2.0 * x / eps)
        return -(2.0 / eps) * e0 * (2.0 + 2.0 * (1.0 - x) / eps)

    def smooth(x):
        return 1.0 - x

    def smooth_prime(x):
        return -np.ones_like(np.asarray(x, dtype=float))

    def layer(x):
        return -(1.0 - x) * np.exp(-2.0 * x / eps)

    def layer_prime(x):
        return np.exp(-2.0 * x / eps) * (1.0 + 2.0 * (1.0 - x) / eps)

    def b(x):
        return 3.0 - x

    def b_prime(x):
        return -np.ones_like(np.asarray(x, dtype=float))

    def c(x):
        return np.ones_like(np.asarray(x, dtype=float))

    def f(x):
        return -eps * u_double_prime(x) - b(x) * u_prime(x) + u(x)

    exact = ExactSolution(
        u=u, u_prime=u_prime,
        S=smooth, S_prime=smooth_prime,
        E=layer, E_prime=layer_prime,
    )
    return TwoPointBVP(epsilon=eps, b=b, c=c, f=f, b_prime=b_prime, exact=exact)


_PROBLEMS: dict[str, Callable[[float], TwoPointBVP]] = {
    "layer-test": layer_test_problem,
}


def get_problem(name: str, epsilon: float) -> TwoPointBVP:
    """Look up a named benchmark problem."""
    try:
        factory = _PROBLEMS[name]
    except KeyError:
        known = ", ".join(sorted(_PROBLEMS))
        raise ValueError(f"unknown problem {name!r}; available: {known}") from None
    return factory(epsilon)


@dataclass(frozen=True)
class LayerBoundsReport:
    """Layer magnitude at the last fine node and the first coarse node.

    On a graded mesh the layer part satisfies |E(x_{N/2-1})| <= C*N^-sigma
    and |E(x_{N/2})| <= C*eps^sigma; the two ratios below are those values
    scaled by the corresponding bound and stay O(1) when the bounds hold.
    """

    last_fine_value: float
    last_fine_ratio: float
    first_coarse_value: float
    first_coarse_ratio: float


def check_layer_bounds(bvp: TwoPointBVP, mesh: Mesh1D, sigma: float) -> LayerBoundsReport:
    """Evaluate the layer-decay ratios at the fine/coarse transition nodes."""
    if bvp.exact is None:
        raise ValueError("layer bounds need a problem with an exact solution")
    m = mesh.N // 2
    e_fine = abs(float(bvp.exact.E(mesh.nodes[m - 1])))
    e_coarse = abs(float(bvp.exact.E(mesh.nodes[m])))
    return LayerBoundsReport(
        last_fine_value=e_fine,
        last_fine_ratio=e_fine * mesh.N**sigma,
        first_coarse_value=e_coarse,
        first_coarse_ratio=e_coarse * bvp.epsilon ** (-sigma),
    )

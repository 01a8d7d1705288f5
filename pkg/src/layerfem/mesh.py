"""Layer-adapted 1D meshes for problems with a boundary layer at x = 0.

Two Bakhvalov-type generating functions are provided, both logarithmically
graded inside the layer and uniform outside, plus the classical variant with
a user-supplied breakpoint constant and a plain uniform mesh.  Nodes are
x_i = map(i/N) for i = 0..N.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

__all__ = [
    "MeshFamily",
    "MeshSpec",
    "Mesh1D",
    "MeshAssumptionWarning",
    "generate",
    "check_step_sizes",
    "StepSizeChecks",
    "mesh_to_csv",
]


class MeshFamily(str, Enum):
    """Supported mesh generating functions."""

    ROOS = "roos"
    KOPTEVA = "kopteva"
    ORIGINAL = "original"
    UNIFORM = "uniform"


class MeshAssumptionWarning(UserWarning):
    """A mesh was generated outside the parameter regime its step-size bounds assume."""


@dataclass(frozen=True)
class MeshSpec:
    """Parameters of a graded mesh.

    Parameters
    ----------
    family : MeshFamily
        Which generating function to use.
    N : int
        Number of mesh intervals; must be even and at least 4.
    sigma : float
        Grading exponent (>= 1); controls how strongly the layer is resolved.
    epsilon : float
        Perturbation parameter in (0, 1).
    c1 : float, optional
        Breakpoint constant of the KOPTEVA map; the breakpoint sits at
        t = 1/2 - c1*epsilon.  Required for KOPTEVA.
    c_eps : float
        Breakpoint constant of the ORIGINAL map (same role as c1).
    """

    family: MeshFamily
    N: int
    sigma: float
    epsilon: float
    c1: float | None = None
    c_eps: float = 1.0

    def __post_init__(self) -> None:
        if self.N < 4 or self.N % 2 != 0:
            raise ValueError(f"N must be an even integer >= 4, got {self.N}")
        if self.sigma < 1.0:
            raise ValueError(f"sigma must be >= 1, got {self.sigma}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.c1 is not None and self.c1 <= 0.0:
            raise ValueError(f"c1 must be positive, got {self.c1}")
        if self.c_eps <= 0.0:
            raise ValueError(f"c_eps must be positive, got {self.c_eps}")
        if self.family is MeshFamily.KOPTEVA:
            if self.c1 is None:
                raise ValueError("family 'kopteva' requires the breakpoint constant c1")
            self._check_breakpoint(self.c1)
        elif self.family is MeshFamily.ORIGINAL:
            self._check_breakpoint(self.c_eps)

    def _check_breakpoint(self, const: float) -> None:
        theta = 0.5 - const * self.epsilon
        if not 0.0 < theta < 0.5:
            raise ValueError(
                f"breakpoint t = 1/2 - {const}*{self.epsilon} = {theta} "
                "must lie in (0, 1/2)"
            )


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """An ordered node sequence x_0 = 0 < x_1 < ... < x_N = 1 with its spec."""

    nodes: np.ndarray
    spec: MeshSpec

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size != self.spec.N + 1:
            raise ValueError(f"expected {self.spec.N + 1} nodes, got {nodes.size}")
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise ValueError("mesh must span [0, 1] exactly")
        if not np.all(np.diff(nodes) > 0.0):
            raise ValueError("mesh nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def N(self) -> int:
        """Number of mesh intervals."""
        return self.nodes.size - 1

    @property
    def steps(self) -> np.ndarray:
        """Interval lengths h_i = x_{i+1} - x_i."""
        return np.diff(self.nodes)


def _roos_map(t: np.ndarray, sigma: float, epsilon: float) -> np.ndarray:
    # Log-graded up to t = 1/2, then uniform; d makes the two branches meet
    # at the breakpoint: 1 - d/2 = -sigma*eps*log(eps).
    d = 2.0 * (1.0 + sigma * epsilon * math.log(epsilon))
    x = np.empty_like(t)
    fine = t <= 0.5
    x[fine] = -sigma * epsilon * np.log(1.0 - 2.0 * (1.0 - epsilon) * t[fine])
    x[~fine] = 1.0 - d * (1.0 - t[~fine])
    return x


def _kopteva_map(t: np.ndarray, sigma: float, epsilon: float, const: float) -> np.ndarray:
    # Log-graded up to theta = 1/2 - const*eps; the slope of the uniform part
    # follows from continuity at theta.
    theta = 0.5 - const * epsilon
    x_theta = -sigma * epsilon * math.log(2.0 * const * epsilon)
    d1 = (1.0 - x_theta) / (1.0 - theta)
    x = np.empty_like(t)
    fine = t <= theta
    x[fine] = -sigma * epsilon * np.log(1.0 - 2.0 * t[fine])
    x[~fine] = 1.0 - d1 * (1.0 - t[~fine])
    return x


def generate(spec: MeshSpec) -> Mesh1D:
    """Generate the mesh described by ``spec``.

    When epsilon > 1/N the layer needs no special resolution and a uniform
    mesh is returned instead; the returned mesh's spec records the fallback.
    A :class:`MeshAssumptionWarning` is emitted when the breakpoint constant
    exceeds 1/(epsilon*N), in which case the step-size bounds of
    :func:`check_step_sizes` are no longer guaranteed.
    """
    N = spec.N
    t = np.arange(N + 1, dtype=float) / N

    family = spec.family
    if family is not MeshFamily.UNIFORM and spec.epsilon > 1.0 / N:
        family = MeshFamily.UNIFORM
        spec = replace(spec, family=MeshFamily.UNIFORM)

    if family is MeshFamily.UNIFORM:
        nodes = t
    elif family is MeshFamily.ROOS:
        nodes = _roos_map(t, spec.sigma, spec.epsilon)
    else:
        const = spec.c1 if family is MeshFamily.KOPTEVA else spec.c_eps
        if const > 1.0 / (spec.epsilon * N):
            warnings.warn(
                f"breakpoint constant {const} exceeds 1/(epsilon*N) = "
                f"{1.0 / (spec.epsilon * N):.6g}; step-size bounds may fail",
                MeshAssumptionWarning,
                stacklevel=2,
            )
        nodes = _kopteva_map(t, spec.sigma, spec.epsilon, const)

    # Both endpoints are exact by construction; pin them against round-off.
    nodes[0] = 0.0
    nodes[-1] = 1.0
    return Mesh1D(nodes=nodes, spec=spec)


@dataclass(frozen=True)
class StepSizeChecks:
    """Pass/fail record of the graded-mesh step-size bounds.

    The four bounds hold for both Bakhvalov-type families whenever
    epsilon <= 1/N and the breakpoint constant satisfies its admissibility
    condition.  ``midpoint_left_of_half`` is a diagnostic, not a guarantee.
    """

    fine_steps_nondecreasing: bool
    pre_transition_step_bounded: bool
    transition_step_bounded: bool
    coarse_steps_bounded: bool
    midpoint_left_of_half: bool

    @property
    def all_bounds_hold(self) -> bool:
        return (
            self.fine_steps_nondecreasing
            and self.pre_transition_step_bounded
            and self.transition_step_bounded
            and self.coarse_steps_bounded
        )


def check_step_sizes(mesh: Mesh1D) -> StepSizeChecks:
    """Evaluate the step-size bounds of the graded mesh, exactly as stated.

    Checks, with h_i = x_{i+1} - x_i, m = N/2:
      * h_0 <= h_1 <= ... <= h_{m-2}
      * sigma*eps/4 <= h_{m-2} <= sigma*eps
      * sigma*eps/2 <= h_{m-1} <= 2*sigma/N
      * 1/N <= h_i <= 2/N for m <= i <= N-1
    and reports whether x_m <= 1/2.  Pure predicate evaluation; meshes
    outside the graded regime simply fail the bounds.
    """
    h = mesh.steps
    N = mesh.N
    m = N // 2
    sig_eps = mesh.spec.sigma * mesh.spec.epsilon

    return StepSizeChecks(
        fine_steps_nondecreasing=bool(np.all(np.diff(h[: m - 1]) >= 0.0)),
        pre_transition_step_bounded=bool(0.25 * sig_eps <= h[m - 2] <= sig_eps),
        transition_step_bounded=bool(
            0.5 * sig_eps <= h[m - 1] <= 2.0 * mesh.spec.sigma / N
        ),
        coarse_steps_bounded=bool(
            np.all((h[m:] >= 1.0 / N) & (h[m:] <= 2.0 / N))
        ),
        midpoint_left_of_half=bool(mesh.nodes[m] <= 0.5),
    )


def mesh_to_csv(mesh: Mesh1D) -> str:
    """Serialize a mesh as CSV with columns ``i,x_i,h_i`` (h empty on the last row)."""
    h = mesh.steps
    lines = ["i,x_i,h_i"]
    for i, x in enumerate(mesh.nodes):
        step = repr(float(h[i])) if i < h.size else ""
        lines.append(f"{i},{float(x)!r},{step}")
    return "\n".join(lines) + "\n"

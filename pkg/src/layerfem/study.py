"""Convergence experiment driver.

Sweeps (mesh family, degree, N, epsilon) over a benchmark problem, records
the three error norms per run, aggregates the uniform error
e^N = max_epsilon ||u - u^N||_eps and the rates r^N = log2(e^N / e^{2N}),
and renders the results as CSV or an aligned text table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .femcore import galerkin_solve
from .interpolants import build_bundle, lagrange_interp
from .mesh import MeshFamily, MeshSpec, generate
from .norms import error_norms
from .problem import get_problem

__all__ = [
    "StudyConfig",
    "ConvergenceRecord",
    "AggregateRow",
    "StudyResult",
    "run_study",
    "aggregate",
    "emit",
    "format_error",
    "fitted_rate",
    "interpolation_study",
    "DEFAULT_EPSILONS",
]

DEFAULT_EPSILONS = (1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9)

# Rates computed from errors this close to round-off are meaningless.
_RATE_FLOOR = 1e-13


@dataclass(frozen=True)
class StudyConfig:
    """Sweep definition; None for sigma, c1 or N_list selects per-degree defaults.

    Defaults: sigma = k + 1, c1 = 5(k+1)/4, and N doubling from 8 up to 2048
    for k <= 2 or 1024 for k >= 3.
    """

    families: tuple[str, ...] = ("roos", "kopteva")
    k_list: tuple[int, ...] = (1, 2, 3, 4)
    sigma: float | None = None
    c1: float | None = None
    N_list: tuple[int, ...] | None = None
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    problem: str = "layer-test"

    def __post_init__(self) -> None:
        for name in self.families:
            MeshFamily(name)
        for k in self.k_list:
            if not 1 <= k <= 10:
                raise ValueError(f"degree must lie in 1..10, got {k}")
        if self.N_list is not None:
            for n in self.N_list:
                if n < 4 or n % 2 != 0:
                    raise ValueError(f"N values must be even and >= 4, got {n}")
        for eps in self.epsilons:
            if not 0.0 < eps < 1.0:
                raise ValueError(f"epsilon values must lie in (0, 1), got {eps}")
        if not (self.families and self.k_list and self.epsilons):
            raise ValueError("families, k_list and epsilons must be nonempty")

    def sigma_for(self, k: int) -> float:
        return float(k + 1) if self.sigma is None else self.sigma

    def c1_for(self, k: int) -> float:
        return 5.0 * (k + 1) / 4.0 if self.c1 is None else self.c1

    def n_list_for(self, k: int) -> tuple[int, ...]:
        if self.N_list is not None:
            return self.N_list
        top = 2048 if k <= 2 else 1024
        out = []
        n = 8
        while n <= top:
            out.append(n)
            n *= 2
        return tuple(out)


@dataclass(frozen=True)
class ConvergenceRecord:
    """Errors of one (family, k, sigma, N, epsilon) run; NaN errors mark a failure."""

    family: str
    k: int
    sigma: float
    N: int
    epsilon: float
    e_inf: float
    e_l2: float
    e_energy: float
    error: str | None = None


@dataclass(frozen=True)
class AggregateRow:
    """Uniform error e^N = max_epsilon e_energy and its rate against 2N."""

    family: str
    k: int
    sigma: float
    N: int
    e_uniform: float
    rate: float | None


@dataclass(frozen=True)
class StudyResult:
    records: list[ConvergenceRecord] = field(default_factory=list)
    aggregates: list[AggregateRow] = field(default_factory=list)


def run_study(config: StudyConfig) -> StudyResult:
    """Run the full sweep; individual failures are recorded, not raised."""
    records: list[ConvergenceRecord] = []
    for family in config.families:
        for k in config.k_list:
            sigma = config.sigma_for(k)
            c1 = config.c1_for(k)
            for n_intervals in config.n_list_for(k):
                for eps in config.epsilons:
                    records.append(
                        _single_run(config.problem, family, k, sigma, c1, n_intervals, eps)
                    )
    return StudyResult(records=records, aggregates=aggregate(records))


def _single_run(
    problem: str, family: str, k: int, sigma: float, c1: float, n_intervals: int, eps: float
) -> ConvergenceRecord:
    try:
        bvp = get_problem(problem, eps)
        if bvp.exact is None:
            raise ValueError(f"problem {problem!r} has no exact solution to measure against")
        spec = MeshSpec(
            family=MeshFamily(family), N=n_intervals, sigma=sigma, epsilon=eps, c1=c1
        )
        mesh = generate(spec)
        fem = galerkin_solve(bvp, mesh, k)
        tri = error_norms(fem, bvp.exact.u, bvp.exact.u_prime, eps)
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        nan = float("nan")
        return ConvergenceRecord(family, k, sigma, n_intervals, eps, nan, nan, nan, str(exc))
    return ConvergenceRecord(
        family, k, sigma, n_intervals, eps, tri.e_inf, tri.e_l2, tri.e_energy
    )


def aggregate(records: list[ConvergenceRecord]) -> list[AggregateRow]:
    """Reduce per-epsilon records to uniform errors and rates, ordered by (family, k, N)."""
    groups: dict[tuple[str, int, float, int], list[ConvergenceRecord]] = {}
    for rec in records:
        groups.setdefault((rec.family, rec.k, rec.sigma, rec.N), []).append(rec)

    uniform: dict[tuple[str, int, float, int], float] = {}
    for key, recs in groups.items():
        if any(r.error is not None for r in recs):
            uniform[key] = float("nan")
        else:
            uniform[key] = max(r.e_energy for r in recs)

    rows = []
    for (family, k, sigma, n_intervals) in sorted(uniform):
        e_n = uniform[(family, k, sigma, n_intervals)]
        e_2n = uniform.get((family, k, sigma, 2 * n_intervals))
        rate = None
        if (
            e_2n is not None
            and math.isfinite(e_n)
            and math.isfinite(e_2n)
            and min(e_n, e_2n) > _RATE_FLOOR
        ):
            rate = math.log2(e_n / e_2n)
        rows.append(AggregateRow(family, k, sigma, n_intervals, e_n, rate))
    return rows


def format_error(value: float) -> str:
    """Three-significant-digit scientific notation with a leading 0, e.g. 0.642E-02."""
    if not math.isfinite(value):
        return "ERR"
    if value == 0.0:
        return "0.000E+00"
    exp = math.floor(math.log10(abs(value))) + 1
    mant = round(value / 10.0**exp, 3)
    if abs(mant) >= 1.0:
        mant /= 10.0
        exp += 1
    return f"{mant:.3f}E{exp:+03d}"


def _format_rate(rate: float | None) -> str:
    return "—" if rate is None else f"{rate:.2f}"


def emit(records: list[ConvergenceRecord], fmt: str) -> str:
    """Render records as ``csv`` (one row per run) or ``table`` (aggregated)."""
    if fmt == "csv":
        return _emit_csv(records)
    if fmt == "table":
        return _emit_table(records)
    raise ValueError(f"unknown output format {fmt!r}; expected 'csv' or 'table'")


def _emit_csv(records: list[ConvergenceRecord]) -> str:
    ordered = sorted(records, key=lambda r: (r.family, r.k, r.N, r.epsilon))
    lines = ["family,k,sigma,N,epsilon,e_inf,e_l2,e_energy"]
    for r in ordered:
        lines.append(
            f"{r.family},{r.k},{r.sigma!r},{r.N},{r.epsilon!r},"
            f"{r.e_inf!r},{r.e_l2!r},{r.e_energy!r}"
        )
    return "\n".join(lines) + "\n"


def _emit_table(records: list[ConvergenceRecord]) -> str:
    rows = aggregate(records)
    if not rows:
        raise ValueError("no records to tabulate")
    by_k: dict[int, list[AggregateRow]] = {}
    for row in rows:
        by_k.setdefault(row.k, []).append(row)

    blocks = []
    for k in sorted(by_k):
        krows = by_k[k]
        families = sorted({r.family for r in krows})
        n_values = sorted({r.N for r in krows})
        cell = {(r.family, r.N): r for r in krows}
        sigma = krows[0].sigma

        header = f"k = {k}  (sigma = {sigma:g})"
        col_head = f"{'N':>6}"
        for fam in families:
            col_head += f"  {fam + ': e^N':>16} {'r^N':>6}"
        lines = [header, col_head]
        for n_intervals in n_values:
            line = f"{n_intervals:>6}"
            for fam in families:
                row = cell.get((fam, n_intervals))
                if row is None:
                    line += f"  {'':>16} {'':>6}"
                else:
                    line += f"  {format_error(row.e_uniform):>16} {_format_rate(row.rate):>6}"
            lines.append(line)
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def fitted_rate(errors: list[float], pairs: int = 3) -> float:
    """Mean of the last ``pairs`` consecutive log2 error ratios.

    ``errors`` must be ordered by increasing N (each N doubling the last);
    averaging the largest-N pairs damps preasymptotic noise.
    """
    if len(errors) < 2:
        raise ValueError("need at least two errors to fit a rate")
    ratios = [math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]
    tail = ratios[-pairs:]
    return sum(tail) / len(tail)


@dataclass(frozen=True)
class InterpolationRow:
    """Interpolation errors for one (k, N), maximized over the epsilon sweep."""

    k: int
    N: int
    u_inf: float
    u_l2: float
    u_energy: float
    correction_energy: float


def interpolation_study(
    family: str,
    k: int,
    n_values: tuple[int, ...],
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS,
    problem: str = "layer-test",
    sigma: float | None = None,
    c1: float | None = None,
) -> list[InterpolationRow]:
    """Measure interpolation errors of u - u^I and the layer correction.

    Used by the ``verify`` CLI command and the interpolation-rate checks;
    sigma defaults to k + 1 and c1 to 5(k+1)/4.
    """
    sigma = float(k + 1) if sigma is None else sigma
    c1 = 5.0 * (k + 1) / 4.0 if c1 is None else c1
    zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))

    rows = []
    for n_intervals in n_values:
        u_inf = u_l2 = u_energy = corr_energy = 0.0
        for eps in epsilons:
            bvp = get_problem(problem, eps)
            spec = MeshSpec(
                family=MeshFamily(family), N=n_intervals, sigma=sigma, epsilon=eps, c1=c1
            )
            mesh = generate(spec)
            interp = lagrange_interp(bvp.exact.u, mesh, k)
            tri = error_norms(interp, bvp.exact.u, bvp.exact.u_prime, eps)
            bundle = build_bundle(bvp.exact, mesh, k)
            corr = error_norms(bundle.correction, zero, zero, eps)
            u_inf = max(u_inf, tri.e_inf)
            u_l2 = max(u_l2, tri.e_l2)
            u_energy = max(u_energy, tri.e_energy)
            corr_energy = max(corr_energy, corr.e_energy)
        rows.append(
            InterpolationRow(
                k=k,
                N=n_intervals,
                u_inf=u_inf,
                u_l2=u_l2,
                u_energy=u_energy,
                correction_energy=corr_energy,
            )
        )
    return rows

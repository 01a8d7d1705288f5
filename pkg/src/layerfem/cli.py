"""Command-line interface.

Subcommands: ``mesh`` (emit mesh CSV), ``solve`` (single run, sampled
solution CSV), ``study`` (full convergence sweep), ``verify`` (mesh and
interpolation checks).  Exit codes: 0 success, 1 invalid arguments,
2 numerical failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .femcore import SingularMatrixError, galerkin_solve
from .mesh import MeshFamily, MeshSpec, check_step_sizes, generate, mesh_to_csv
from .norms import error_norms
from .problem import get_problem
from .study import (
    DEFAULT_EPSILONS,
    StudyConfig,
    emit,
    format_error,
    interpolation_study,
    run_study,
)

_FAMILY_CHOICES = [f.value for f in MeshFamily]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layerfem",
        description="Galerkin FEM on layer-adapted meshes for singularly "
        "perturbed convection-diffusion problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, *, many_meshes: bool) -> None:
        p.add_argument(
            "--mesh-type",
            action="append" if many_meshes else "store",
            choices=_FAMILY_CHOICES,
            help="mesh family" + (" (repeatable)" if many_meshes else ""),
        )
        p.add_argument("--sigma", type=float, help="mesh grading exponent (default k+1)")
        p.add_argument("--c1", type=float, help="breakpoint constant (default 5(k+1)/4)")
        p.add_argument("--c-eps", type=float, help="breakpoint constant of the 'original' family (default 1.0)")
        p.add_argument("--N", action="append", type=int, help="mesh intervals (repeatable)")
        p.add_argument("--epsilon", action="append", type=float, help="perturbation parameter (repeatable)")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--config", help="key=value config file; flags override it")

    p_mesh = sub.add_parser("mesh", help="generate a mesh and emit it as CSV")
    add_common(p_mesh, many_meshes=False)

    p_solve = sub.add_parser("solve", help="solve one configuration and emit sampled values")
    add_common(p_solve, many_meshes=False)
    p_solve.add_argument("--k", action="append", type=int, help="polynomial degree")
    p_solve.add_argument("--problem", help="benchmark problem name (default layer-test)")
    p_solve.add_argument("--samples", type=int, help="sample points per element (default 8)")

    p_study = sub.add_parser("study", help="run the convergence sweep")
    add_common(p_study, many_meshes=True)
    p_study.add_argument("--k", action="append", type=int, help="polynomial degree (repeatable)")
    p_study.add_argument("--problem", help="benchmark problem name (default layer-test)")
    p_study.add_argument("--format", choices=["csv", "table"], help="output format (default table)")

    p_verify = sub.add_parser("verify", help="run mesh and interpolation checks")
    add_common(p_verify, many_meshes=False)
    p_verify.add_argument("--k", action="append", type=int, help="polynomial degree (repeatable)")
    p_verify.add_argument("--problem", help="benchmark problem name (default layer-test)")
    return parser


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


_LIST_KEYS = {"N": int, "epsilon": float, "k": int, "mesh-type": str}
_SCALAR_KEYS = {
    "sigma": float,
    "c1": float,
    "c-eps": float,
    "samples": int,
    "out": str,
    "config": str,
    "problem": str,
    "format": str,
}


def _apply_config_file(args: argparse.Namespace) -> None:
    """Fill argument slots that were not given on the command line, then defaults."""
    if getattr(args, "config", None):
        file_values = _load_config_file(args.config)
        for key, raw in file_values.items():
            attr = key.replace("-", "_")
            if not hasattr(args, attr) or key == "config":
                raise ValueError(f"unknown config key {key!r}")
            if getattr(args, attr) is not None:
                continue  # CLI flag wins
            if key in _LIST_KEYS:
                conv = _LIST_KEYS[key]
                setattr(args, attr, [conv(tok) for tok in raw.split(",") if tok])
            elif key in _SCALAR_KEYS:
                setattr(args, attr, _SCALAR_KEYS[key](raw))
            else:
                raise ValueError(f"unknown config key {key!r}")
    for attr, default in (("c_eps", 1.0), ("samples", 8), ("problem", "layer-test"), ("format", "table")):
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, default)


def _single(values, name: str, default=None):
    if values is None:
        if default is None:
            raise ValueError(f"--{name} is required")
        return default
    if isinstance(values, list):
        if len(values) != 1:
            raise ValueError(f"--{name} must be given exactly once for this command")
        return values[0]
    return values


def _mesh_from_args(args: argparse.Namespace, k: int | None = None) -> tuple[MeshSpec, float]:
    n_intervals = _single(args.N, "N")
    eps = _single(args.epsilon, "epsilon")
    family = _single(args.mesh_type, "mesh-type")
    if family not in _FAMILY_CHOICES:
        raise ValueError(f"unknown mesh family {family!r}")
    sigma = args.sigma if args.sigma is not None else float((k or 1) + 1)
    c1 = args.c1 if args.c1 is not None else 5.0 * ((k or 1) + 1) / 4.0
    spec = MeshSpec(
        family=MeshFamily(family),
        N=n_intervals,
        sigma=sigma,
        epsilon=eps,
        c1=c1,
        c_eps=args.c_eps,
    )
    return spec, eps


def _write_output(args: argparse.Namespace, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _cmd_mesh(args: argparse.Namespace) -> None:
    spec, _ = _mesh_from_args(args)
    _write_output(args, mesh_to_csv(generate(spec)))


def _cmd_solve(args: argparse.Namespace) -> None:
    k = _single(args.k, "k", default=None)
    spec, eps = _mesh_from_args(args, k)
    if args.samples < 1:
        raise ValueError("--samples must be positive")
    bvp = get_problem(args.problem, eps)
    mesh = generate(spec)
    fem = galerkin_solve(bvp, mesh, k)

    local = np.linspace(0.0, 1.0, args.samples, endpoint=False)
    x = np.append(
        (mesh.nodes[:-1, None] + mesh.steps[:, None] * local[None, :]).ravel(), 1.0
    )
    u_num = fem.evaluate(x)
    lines = ["x,u_N,u_exact,error"]
    if bvp.exact is not None:
        u_ref = np.asarray(bvp.exact.u(x), dtype=float)
        for xv, un, ue in zip(x, u_num, u_ref):
            lines.append(f"{float(xv)!r},{float(un)!r},{float(ue)!r},{float(un - ue)!r}")
        tri = error_norms(fem, bvp.exact.u, bvp.exact.u_prime, eps)
        print(
            f"e_inf={tri.e_inf:.6e} e_l2={tri.e_l2:.6e} e_energy={tri.e_energy:.6e}",
            file=sys.stderr,
        )
    else:
        for xv, un in zip(x, u_num):
            lines.append(f"{float(xv)!r},{float(un)!r},,")
    _write_output(args, "\n".join(lines) + "\n")


def _cmd_study(args: argparse.Namespace) -> None:
    families = tuple(args.mesh_type) if args.mesh_type else ("roos", "kopteva")
    config = StudyConfig(
        families=families,
        k_list=tuple(args.k) if args.k else (1, 2, 3, 4),
        sigma=args.sigma,
        c1=args.c1,
        N_list=tuple(args.N) if args.N else None,
        epsilons=tuple(args.epsilon) if args.epsilon else DEFAULT_EPSILONS,
        problem=args.problem,
    )
    result = run_study(config)
    failed = [r for r in result.records if r.error is not None]
    for rec in failed:
        print(
            f"run failed: family={rec.family} k={rec.k} N={rec.N} "
            f"epsilon={rec.epsilon}: {rec.error}",
            file=sys.stderr,
        )
    _write_output(args, emit(result.records, args.format))


def _cmd_verify(args: argparse.Namespace) -> None:
    family = _single(args.mesh_type, "mesh-type", default="roos")
    if family not in _FAMILY_CHOICES:
        raise ValueError(f"unknown mesh family {family!r}")
    k_values = tuple(args.k) if args.k else (1, 2)
    n_values = tuple(args.N) if args.N else (64, 128, 256, 512)
    epsilons = tuple(args.epsilon) if args.epsilon else DEFAULT_EPSILONS

    lines = [f"mesh step-size checks ({family})"]
    worst = True
    for eps in epsilons:
        for n_intervals in n_values:
            spec = MeshSpec(
                family=MeshFamily(family),
                N=n_intervals,
                sigma=args.sigma if args.sigma is not None else 2.0,
                epsilon=eps,
                c1=args.c1 if args.c1 is not None else 2.5,
                c_eps=args.c_eps,
            )
            checks = check_step_sizes(generate(spec))
            worst = worst and checks.all_bounds_hold
            if not checks.all_bounds_hold:
                lines.append(f"  FAIL N={n_intervals} epsilon={eps}: {checks}")
    lines.append(f"  all step-size bounds hold: {'yes' if worst else 'NO'}")
    lines.append("")

    for k in k_values:
        rows = interpolation_study(family, k, n_values, epsilons, problem=args.problem,
                                   sigma=args.sigma, c1=args.c1)
        lines.append(f"interpolation errors, k = {k} (max over epsilon)")
        lines.append(
            f"{'N':>6} {'max|u-uI|':>12} {'rate':>6} {'L2':>12} {'rate':>6} "
            f"{'energy':>12} {'rate':>6} {'corr energy':>12} {'rate':>6}"
        )
        prev = None
        for row in rows:
            cells = [row.u_inf, row.u_l2, row.u_energy, row.correction_energy]
            line = f"{row.N:>6}"
            for idx, val in enumerate(cells):
                if prev is None or prev[idx] <= 0.0 or val <= 0.0:
                    rate = "  --"
                else:
                    rate = f"{np.log2(prev[idx] / val):.2f}"
                line += f" {format_error(val):>12} {rate:>6}"
            lines.append(line)
            prev = cells
        lines.append("")
    _write_output(args, "\n".join(lines) + "\n")


_COMMANDS = {
    "mesh": _cmd_mesh,
    "solve": _cmd_solve,
    "study": _cmd_study,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags and 0 on --help; map bad flags to 1.
        return 0 if exc.code in (0, None) else 1
    try:
        _apply_config_file(args)
        _COMMANDS[args.command](args)
    except (ValueError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SingularMatrixError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command line harness: convergence tables, verification suites, probes.

Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 verification
failure.
"""

import argparse
import io
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import (
    KORN_BOUND,
    coercivity_check,
    convergence_study,
    energy_error,
    jump_check,
    korn_ratio,
    korn_ratio_min,
    local_coefficients,
)
from .assembly import MaterialParams, assemble, build_dofmap
from .elements import (
    ElementKind,
    build_basis,
    duality_residual,
    specht_constraint_residual,
    verify_affine_identity,
)
from .manufactured import example_layer, example_smooth, source
from .mesh import element_geometry, load_mesh, make_structured, refine, triangle_geometry
from .solver import SolverError, solve

__all__ = ["main", "RunConfig", "CliError"]

CSV_HEADER = "element,example,iota,level,h,dofs,energy_err,rel_energy_err,rate"


class CliError(Exception):
    """Invalid configuration or arguments; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


@dataclass
class RunConfig:
    element: str
    example: str
    iotas: list
    lam: float
    mu: float
    mesh_desc: str
    levels: int
    out: str | None
    fmt: str

    def __post_init__(self):
        if self.levels < 1:
            raise CliError("levels must be at least 1")
        for iota in self.iotas:
            if not 0.0 < iota <= 1.0:
                raise CliError(f"iota values must lie in (0, 1], got {iota}")
        try:
            MaterialParams(lam=self.lam, mu=self.mu, iota=self.iotas[0])
        except ValueError as exc:
            raise CliError(str(exc)) from exc


def _parse_iotas(text: str):
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise CliError(f"cannot parse iota list {text!r}") from exc
    if not values:
        raise CliError("no iota values given")
    return values


def _parse_mesh(text: str):
    if text.startswith("structured:"):
        try:
            n = int(text.split(":", 1)[1])
        except ValueError as exc:
            raise CliError(f"bad mesh argument {text!r}") from exc
        if n < 1:
            raise CliError("structured mesh needs n >= 1")
        return make_structured(n), text
    if text.startswith("file:"):
        path = text.split(":", 1)[1]
        try:
            return load_mesh(path), text
        except (OSError, ValueError) as exc:
            raise CliError(str(exc)) from exc
    raise CliError(f"mesh must be structured:N or file:PATH, got {text!r}")


def _write_output(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def format_csv(reports) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for rep in reports:
        for row in rep.rows:
            rate = "" if row.rate is None else repr(row.rate)
            buf.write(
                f"{rep.kind},{rep.example},{rep.iota!r},{row.level},{row.h!r},"
                f"{row.dofs},{row.energy_err!r},{row.rel_energy_err!r},{rate}\n"
            )
    return buf.getvalue()


def format_markdown(reports) -> str:
    first = reports[0]
    lines = [
        f"### element {first.kind}, example {first.example}, "
        f"lambda {first.lam:g}, mu {first.mu:g}",
        "",
    ]
    hs = [row.h for row in first.rows]
    lines.append("| iota | quantity |" + "".join(f" h={h:.4g} |" for h in hs))
    lines.append("|---|---|" + "---|" * len(hs))
    for rep in reports:
        tag = f"{rep.iota:.0e}"
        lines.append(
            f"| {tag} | rel_err |"
            + "".join(f" {row.rel_energy_err:.3e} |" for row in rep.rows)
        )
        lines.append(
            f"| {tag} | rate |"
            + "".join(" |" if row.rate is None else f" {row.rate:.2f} |" for row in rep.rows)
        )
    return "\n".join(lines) + "\n"


def cmd_convergence(args) -> int:
    config = RunConfig(
        element=args.element,
        example=args.example,
        iotas=_parse_iotas(args.iota),
        lam=args.lam,
        mu=args.mu,
        mesh_desc=args.mesh,
        levels=args.levels,
        out=args.out,
        fmt=args.format,
    )
    base_mesh, desc = _parse_mesh(config.mesh_desc)
    reports = convergence_study(
        config.element,
        config.example,
        config.iotas,
        config.levels,
        base_mesh,
        lam=config.lam,
        mu=config.mu,
        mesh_desc=desc,
    )
    text = format_csv(reports) if config.fmt == "csv" else format_markdown(reports)
    _write_output(text, config.out)
    return 0


def _field_for(example: str, mat: MaterialParams):
    if example == "smooth":
        return example_smooth(mat)
    return example_layer(mat.iota, mat.lam, mat.mu)


def cmd_solve(args) -> int:
    iotas = _parse_iotas(args.iota)
    if len(iotas) != 1:
        raise CliError("solve takes a single iota")
    config = RunConfig(
        element=args.element,
        example=args.example,
        iotas=iotas,
        lam=args.lam,
        mu=args.mu,
        mesh_desc=args.mesh,
        levels=args.refine + 1,
        out=None,
        fmt="csv",
    )
    mesh, _ = _parse_mesh(config.mesh_desc)
    for _ in range(args.refine):
        mesh = refine(mesh)
    probes = _parse_probes(args.probe)
    mat = MaterialParams(lam=config.lam, mu=config.mu, iota=iotas[0])
    field = _field_for(config.example, mat)
    system = assemble(mesh, config.element, mat, source(field))
    report = solve(system)
    full = system.expand(report.solution)
    values = _evaluate_at(mesh, config.element, full, probes)
    exact = field.displacement(probes)
    for p, v, e in zip(probes, values, exact):
        print(
            f"u_h({p[0]:g}, {p[1]:g}) = ({v[0]:.8e}, {v[1]:.8e})"
            f"   exact ({e[0]:.8e}, {e[1]:.8e})"
        )
    absolute, relative = energy_error(mesh, config.element, full, field)
    print(f"energy_err={absolute!r} rel_energy_err={relative!r} method={report.method}")
    return 0


def _parse_probes(text: str) -> np.ndarray:
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise CliError(f"bad probe point {chunk!r}")
        try:
            pts.append([float(parts[0]), float(parts[1])])
        except ValueError as exc:
            raise CliError(f"bad probe point {chunk!r}") from exc
    if not pts:
        raise CliError("no probe points given")
    pts = np.array(pts)
    if np.any(pts < -1e-12) or np.any(pts > 1.0 + 1e-12):
        raise CliError("probe points must lie in the unit square")
    return pts


def _evaluate_at(mesh, kind, full_dofs, pts: np.ndarray) -> np.ndarray:
    kind = ElementKind(kind)
    dofmap = build_dofmap(mesh, kind)
    locals_ = local_coefficients(mesh, dofmap, full_dofs)
    vertex_stride = 3 if kind is ElementKind.SPECHT else 1
    out = np.empty_like(pts)
    for row, p in enumerate(pts):
        found = False
        for t in range(mesh.num_triangles):
            geom = element_geometry(mesh, t)
            bary = geom.to_bary(p[None, :])
            if bary.min() >= -1e-9:
                corner = int(bary.argmax())
                if bary[0, corner] >= 1.0 - 1e-12:
                    # At a vertex the nodal value dof is the exact value.
                    out[row] = locals_[t][vertex_stride * corner]
                else:
                    basis = build_basis(kind, geom, dofmap.signs[t])
                    vals = basis.values(bary)[:, 0]
                    out[row] = locals_[t].T @ vals
                found = True
                break
        if not found:
            raise CliError(f"probe point ({p[0]:g}, {p[1]:g}) not inside the mesh")
    return out


def _random_geometry(rng):
    while True:
        coords = rng.uniform(-1.0, 1.0, size=(3, 2))
        va, vb = coords[1] - coords[0], coords[2] - coords[0]
        area = 0.5 * (va[0] * vb[1] - va[1] * vb[0])
        if area < 0:
            coords = coords[[0, 2, 1]]
            area = -area
        if area < 0.05:
            continue
        geom = triangle_geometry(coords)
        if geom.chunkiness < 12.0:
            return geom


def _random_quartic(rng):
    exps = [(a, b) for a in range(5) for b in range(5 - a)]
    coeffs = rng.normal(size=len(exps))

    def value(xy):
        x, y = xy[:, 0], xy[:, 1]
        return sum(c * x**a * y**b for c, (a, b) in zip(coeffs, exps))

    def grad(xy):
        x, y = xy[:, 0], xy[:, 1]
        gx = sum(c * a * x ** max(a - 1, 0) * y**b for c, (a, b) in zip(coeffs, exps))
        gy = sum(c * b * x**a * y ** max(b - 1, 0) for c, (a, b) in zip(coeffs, exps))
        return np.stack([gx, gy], axis=-1)

    return value, grad


def _verify_korn(seed):
    search = korn_ratio_min(10000, seed=seed)
    window = (KORN_BOUND - 1e-12, KORN_BOUND + 0.05)
    checks = [
        (
            "korn sampled minimum",
            window[0] <= search.min_sampled <= window[1],
            f"min {search.min_sampled:.6f} in [{window[0]:.6f}, {window[1]:.6f}]",
        ),
        (
            "korn directed minimum",
            window[0] <= search.min_directed <= window[1],
            f"directed {search.min_directed:.9f}, bound {KORN_BOUND:.6f}",
        ),
    ]
    D = np.zeros((2, 2, 2))
    D[0, 0, 1] = D[0, 1, 0] = 1.0
    D[1, 0, 0] = -(1.0 + np.sqrt(2.0))
    gap = abs(korn_ratio(D) - KORN_BOUND)
    checks.append(("korn extremal direction", gap <= 1e-10, f"gap {gap:.2e}"))
    return checks


def _verify_elements(seed):
    rng = np.random.default_rng(seed)
    worst = {kind: 0.0 for kind in ElementKind}
    constraint = 0.0
    for _ in range(200):
        geom = _random_geometry(rng)
        for kind in ElementKind:
            basis = build_basis(kind, geom)
            worst[kind] = max(worst[kind], duality_residual(basis))
        constraint = max(
            constraint, specht_constraint_residual(build_basis(ElementKind.SPECHT, geom))
        )
    checks = [
        (
            f"{kind.value} duality",
            worst[kind] <= 1e-11,
            f"max residual {worst[kind]:.2e}",
        )
        for kind in ElementKind
    ]
    checks.append(
        ("specht edge constraints", constraint <= 1e-12, f"max residual {constraint:.2e}")
    )
    affine = 0.0
    for _ in range(100):
        geom = _random_geometry(rng)
        value, grad = _random_quartic(rng)
        scale = max(1.0, np.abs(value(geom.vertices)).max())
        affine = max(affine, verify_affine_identity(geom, value, grad) / scale)
    checks.append(("ntw affine identity", affine <= 1e-12, f"max deviation {affine:.2e}"))
    return checks


def _verify_coercivity(seed):
    mesh = make_structured(4)
    checks = []
    for kind in ElementKind:
        for iota in (1.0, 1e-2, 1e-6):
            mat = MaterialParams(lam=10.0, mu=1.0, iota=iota)
            worst = coercivity_check(mesh, kind, mat, n_trials=100, seed=seed)
            checks.append(
                (
                    f"coercivity {kind.value} iota={iota:g}",
                    worst >= 1.0 - 1e-9,
                    f"min ratio {worst:.6f}",
                )
            )
    return checks


def _verify_jumps(seed):
    mesh = make_structured(3)
    checks = []
    for kind in ElementKind:
        top = jump_check(mesh, kind, n_trials=10, seed=seed)
        checks.append((f"jumps {kind.value}", top <= 1e-10, f"max mean jump {top:.2e}"))
        broken = jump_check(mesh, kind, n_trials=3, seed=seed, corrupt=True)
        checks.append(
            (
                f"jump detector {kind.value}",
                broken > 1e-6,
                f"corrupted field jump {broken:.2e}",
            )
        )
    return checks


def _fd_source(field, pts, h_inner=1e-3, h_outer=1e-2):
    """Nested Richardson central differences for iota^2 Delta g - g."""

    def lap(F, xy, h):
        def one(hh):
            tot = -4.0 * np.asarray(F(xy), dtype=float)
            for ax in (0, 1):
                for s in (-1.0, 1.0):
                    q = xy.copy()
                    q[:, ax] += s * hh
                    tot = tot + np.asarray(F(q), dtype=float)
            return tot / hh**2

        return (4.0 * one(0.5 * h) - one(h)) / 3.0

    def graddiv(F, xy, h):
        def div(where, hh):
            d = np.zeros(len(where))
            for ax in (0, 1):
                p = where.copy()
                p[:, ax] += hh
                m = where.copy()
                m[:, ax] -= hh
                d += (np.asarray(F(p))[:, ax] - np.asarray(F(m))[:, ax]) / (2.0 * hh)
            return d

        def one(hh):
            out = np.empty((len(xy), 2))
            for ax in (0, 1):
                p = xy.copy()
                p[:, ax] += hh
                m = xy.copy()
                m[:, ax] -= hh
                out[:, ax] = (div(p, hh) - div(m, hh)) / (2.0 * hh)
            return out

        return (4.0 * one(0.5 * h) - one(h)) / 3.0

    mat = field.mat

    def g(xy):
        return mat.mu * lap(field.displacement, xy, h_inner) + (
            mat.lam + mat.mu
        ) * graddiv(field.displacement, xy, h_inner)

    return mat.iota**2 * lap(g, pts, h_outer) - g(pts)


def _verify_manufactured(seed):
    rng = np.random.default_rng(seed)
    checks = []
    t = np.linspace(0.0, 1.0, 25)
    sides = np.vstack(
        [
            np.column_stack([t, np.zeros_like(t)]),
            np.column_stack([t, np.ones_like(t)]),
            np.column_stack([np.zeros_like(t), t]),
            np.column_stack([np.ones_like(t), t]),
        ]
    )
    fields = {
        "smooth": example_smooth(),
        "layer iota=1": example_layer(1.0),
        "layer iota=1e-2": example_layer(1e-2),
        "layer iota=1e-6": example_layer(1e-6),
    }
    for name, field in fields.items():
        top = max(
            np.abs(field.displacement(sides)).max(), np.abs(field.gradient(sides)).max()
        )
        checks.append((f"clamping {name}", top <= 1e-10, f"boundary residual {top:.2e}"))

    pts = rng.uniform(0.1, 0.9, size=(20, 2))
    for example in ("smooth", "layer"):
        for iota in (1.0, 1e-2):
            mat = MaterialParams(iota=iota)
            field = _field_for(example, mat)
            fa = source(field)(pts)
            fd = _fd_source(field, pts)
            rel = np.abs(fa - fd).max() / max(np.abs(fa).max(), 1.0)
            checks.append(
                (
                    f"source {example} iota={iota:g}",
                    rel <= 1e-4,
                    f"fd relative deviation {rel:.2e}",
                )
            )
    return checks


_SUITES = {
    "korn": _verify_korn,
    "elements": _verify_elements,
    "coercivity": _verify_coercivity,
    "jumps": _verify_jumps,
    "manufactured": _verify_manufactured,
}


def cmd_verify(args) -> int:
    names = list(_SUITES) if args.suite == "all" else [args.suite]
    failures = 0
    for name in names:
        for label, ok, detail in _SUITES[name](args.seed):
            status = "PASS" if ok else "FAIL"
            print(f"{status} {label}: {detail}")
            failures += 0 if ok else 1
    if failures:
        print(f"{failures} verification check(s) failed")
        return 3
    return 0


def _add_common(p):
    p.add_argument("--element", choices=["ntw", "specht", "morley"], default="ntw")
    p.add_argument("--example", choices=["smooth", "layer"], default="smooth")
    p.add_argument("--lambda", dest="lam", type=float, default=10.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--mesh", default="structured:8", help="structured:N or file:PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sgfem", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    conv = sub.add_parser("convergence", help="run a refinement study and emit a table")
    _add_common(conv)
    conv.add_argument("--iota", default="1e0,1e-2,1e-4,1e-6", help="comma separated list")
    conv.add_argument("--levels", type=int, default=4)
    conv.add_argument("--out", default=None, help="output path (default stdout)")
    conv.add_argument("--format", choices=["csv", "markdown"], default="csv")
    conv.set_defaults(func=cmd_convergence)

    ver = sub.add_parser("verify", help="run invariant suites")
    ver.add_argument(
        "suite",
        nargs="?",
        default="all",
        choices=sorted(_SUITES) + ["all"],
    )
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=cmd_verify)

    sol = sub.add_parser("solve", help="solve once and probe the solution")
    _add_common(sol)
    sol.add_argument("--iota", default="1.0")
    sol.add_argument("--refine", type=int, default=0, help="quadrisection steps")
    sol.add_argument("--probe", default="0.5,0.5", help="semicolon separated x,y pairs")
    sol.set_defaults(func=cmd_solve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            parser.print_usage(sys.stderr)
            return 1
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``fractalstiff <subcommand> ...``.

Every report ends with one line starting ``OK`` or ``FAIL``.  Exit status is
0 on success, 1 on numerical failure and 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import assembler, beamlab, framelab, gasket
from .errors import (
    ArgumentError,
    EigenFailure,
    FixedPointFailure,
    GeometryError,
    SingularJacobian,
    SingularMatrix,
)
from .matrixcore import format_matrix
from .structfile import StructureFileError, read_structure

NUMERICAL_ERRORS = (SingularMatrix, FixedPointFailure, SingularJacobian, EigenFailure)
INPUT_ERRORS = (ArgumentError, GeometryError, StructureFileError, OSError, ValueError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def g12(x) -> float:
    """Round to 12 significant digits for machine output."""
    return float(f"{float(x):.12g}") + 0.0


def g6(x) -> str:
    s = f"{float(x):.6g}"
    return "0" if s == "-0" else s


def mat12(a) -> list[list[float]]:
    return [[g12(v) for v in row] for row in np.asarray(a)]


def positive(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {s}")
    return v


def nonnegative(s: str) -> float:
    v = float(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {s}")
    return v


def posint(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {s}")
    return v


def _table(header, rows) -> list[str]:
    cols = [header] + rows
    widths = [max(len(str(r[i])) for r in cols) for i in range(len(header))]
    return ["  ".join(str(c).rjust(w) for c, w in zip(r, widths)) for r in cols]


def _newton_opts(args) -> gasket.NewtonOptions:
    opts = gasket.NewtonOptions()
    if getattr(args, "tol", None) is not None:
        opts = replace(opts, tol=args.tol)
    if getattr(args, "max_iter", None) is not None:
        opts = replace(opts, max_iter=args.max_iter)
    return opts


# --- subcommands ------------------------------------------------------------


def cmd_derive_beam(args):
    rep = beamlab.solve_beam_self_similarity(args.length)
    K = beamlab.recovered_classical_stiffness(args.ei, args.length)
    data = {
        "length": g12(args.length),
        "ei": g12(args.ei),
        "gamma": g12(rep.gamma),
        "c_over_a": g12(rep.c_over_a),
        "scaling": g12(rep.scaling),
        "iterations": rep.iterations,
        "residual": g12(rep.residual),
        "a": g12(12 * args.ei / args.length**3),
        "stiffness": mat12(K),
    }
    lines = [
        f"beam self-similarity, L = {g6(args.length)}, EI = {g6(args.ei)}",
        f"gamma = c/(a L^2) = {g12(rep.gamma)!r}",
        f"c/a = {g12(rep.c_over_a)!r}",
        f"scaling a_bar/a = {g12(rep.scaling)!r}",
        f"newton iterations = {rep.iterations}, residual = {g6(rep.residual)}",
        "classical stiffness (a = 12 EI / L^3):",
        format_matrix(K).rstrip(),
    ]
    return data, lines, f"OK derive-beam c/a={g12(rep.c_over_a)!r} scaling={g12(rep.scaling)!r}"


def cmd_derive_frame(args):
    spec = framelab.FrameSpec(args.e, args.area, args.inertia, args.side)
    k_ax, k_bd = framelab.frame_split(spec)
    K = k_ax + k_bd
    rep = framelab.mode_rank_report(spec)
    eq = framelab.check_equilibrium(K, spec.d)
    data = {
        "spec": {"E": g12(spec.E), "A_s": g12(spec.A_s), "I": g12(spec.I), "d": g12(spec.d)},
        "rank_axial": rep.rank_axial,
        "rank_bend": rep.rank_bend,
        "rank_total": int(np.linalg.matrix_rank(K)),
        "homogeneous_extension_energy": g12(rep.homogeneous_extension_energy),
        "equilibrium_residual": g12(eq),
    }
    lines = [f"triangular frame E={g6(spec.E)} A_s={g6(spec.A_s)} I={g6(spec.I)} d={g6(spec.d)}"]
    if args.split:
        data["K_axial"], data["K_bend"] = mat12(k_ax), mat12(k_bd)
        lines += ["K_axial:", format_matrix(k_ax).rstrip(), "K_bend:", format_matrix(k_bd).rstrip()]
    else:
        data["K"] = mat12(K)
        lines += ["K:", format_matrix(K).rstrip()]
    lines += [
        f"rank K_axial = {rep.rank_axial}",
        f"rank K_bend = {rep.rank_bend}",
        f"homogeneous extension energy (bend) = {g6(rep.homogeneous_extension_energy)}",
        f"equilibrium residual |S K|/|K| = {g6(eq)}",
    ]
    return data, lines, f"OK derive-frame rank_axial={rep.rank_axial} rank_bend={rep.rank_bend}"


def _solution_json(sol: gasket.ModeSolution) -> dict:
    return {
        "mode": sol.mode.value,
        "physical": bool(sol.physical),
        "scaling": g12(sol.scaling),
        "rank": sol.rank,
        "min_eigenvalue": g12(sol.min_eigenvalue),
        "residual": g12(sol.residual),
        "iterations": sol.iterations,
        "alpha": mat12(sol.blocks.alpha_matrix()),
        "beta": mat12(sol.blocks.beta_matrix()),
    }


def _solution_lines(title: str, sol: gasket.ModeSolution) -> list[str]:
    return [
        f"{title}: mode={sol.mode.value} physical={'yes' if sol.physical else 'no'}",
        f"scaling a1_hat/a1 = {g12(sol.scaling)!r}",
        f"rank = {sol.rank}, min eigenvalue = {g6(sol.min_eigenvalue)}, residual = {g6(sol.residual)}",
        "alpha:",
        format_matrix(sol.blocks.alpha_matrix()).rstrip(),
        "beta:",
        format_matrix(sol.blocks.beta_matrix()).rstrip(),
    ]


def cmd_solve_modes(args):
    opts = _newton_opts(args)
    rep = gasket.random_restart_search(args.seed, args.restarts, opts)
    data = {
        "seed": args.seed,
        "restarts": args.restarts,
        "failed": rep.n_failed,
        "solutions": [_solution_json(s) for s in rep.solutions],
    }
    lines = [f"self-similarity fixed points, seed={args.seed}, restarts={args.restarts}, tol={opts.tol!r}"]
    for k, sol in enumerate(rep.solutions, start=1):
        lines += _solution_lines(f"solution {k}", sol)
    rows = [
        [k, s.mode.value, "yes" if s.physical else "no", g6(s.scaling), s.rank,
         g6(s.blocks.alpha2), g6(s.blocks.alpha3), g6(s.blocks.alpha4), g6(s.blocks.beta1)]
        for k, s in enumerate(rep.solutions, start=1)
    ]
    lines += ["summary:"] + _table(
        ["#", "mode", "physical", "scaling", "rank", "alpha2", "alpha3", "alpha4", "beta1"], rows
    )
    lines.append(f"failed starts = {rep.n_failed}")
    if args.constrained_bending:
        con = gasket.constrained_bending_solve(gasket.BENDING_START, opts)
        free = gasket.newton_solve(gasket.BENDING_START, opts)
        data["constrained_bending"] = _solution_json(con)
        data["unconstrained_iterations"] = free.iterations
        lines += _solution_lines("constrained bending", con)
        lines.append(
            f"iterations from the same start: constrained {con.iterations}, unconstrained {free.iterations}"
        )
    phys = rep.physical
    status = "OK" if phys else "FAIL"
    tail = " ".join(f"{s.mode.value}={g12(s.scaling)!r}" for s in phys)
    return data, lines, f"{status} solve-modes physical={len(phys)} {tail}".rstrip()


def cmd_condense(args):
    if args.params is not None:
        a1, a2, a3, a4, b1 = args.params
        p = gasket.StiffnessParams(a1, a2, a3, a4, b1, args.side)
    else:
        sol = gasket.axial_mode() if args.mode == "axial" else gasket.bending_mode()
        p = sol.blocks.to_params(args.a1, args.side)
    K = gasket.build_gasket_stiffness(p)
    res = gasket.assemble_and_condense(p)
    nd = gasket.NondimBlocks.from_stiffness(res.K_hat, res.d_hat)
    ratio = res.K_hat[0, 0] / p.a1
    data = {
        "params": {k: g12(getattr(p, k)) for k in ("a1", "a2", "a3", "a4", "b1", "d")},
        "K": mat12(K),
        "K_hat": mat12(res.K_hat),
        "side_hat": g12(res.d_hat),
        "scaling": g12(ratio),
        "nondim_hat": [g12(v) for v in nd.vector()],
        "recovery": mat12(res.recovery),
    }
    lines = [
        f"condensation of three copies, d = {g6(p.d)} -> {g6(res.d_hat)}",
        "K_hat (local corner frames):",
        format_matrix(res.K_hat).rstrip(),
        f"a1_hat/a1 = {g12(ratio)!r}",
        "alpha2 alpha3 alpha4 beta1 after doubling: " + " ".join(g6(v) for v in nd.vector()),
    ]
    return data, lines, f"OK condense scaling={g12(ratio)!r}"


def cmd_scale(args):
    k = gasket.scaling_law(args.kappa, args.rho)
    return {"kappa2": g12(args.kappa), "rho": g12(args.rho), "kappa": g12(k)}, [
        f"kappa({g6(args.rho)}) = {g12(k)!r}"
    ], f"OK scale kappa={g12(k)!r}"


def cmd_assemble(args):
    model, node_ids, _ = read_structure(args.input)
    system = assembler.assemble_global(model)
    text = format_matrix(system.K)
    if args.out:
        Path(args.out).write_text(text)
    data = {"nodes": node_ids, "size": system.K.shape[0], "K": mat12(system.K)}
    lines = [f"global stiffness {system.K.shape[0]}x{system.K.shape[1]}"]
    if not args.out:
        lines.append(text.rstrip())
    else:
        lines.append(f"written to {args.out}")
    return data, lines, f"OK assemble dofs={system.K.shape[0]}"


def cmd_solve(args):
    model, node_ids, elem_ids = read_structure(args.input)
    field = assembler.solve_displacements(model)
    data = {
        "nodes": [
            {"id": nid, "u": [g12(v) for v in field.nodal[k]], "reaction": [g12(v) for v in field.reactions[k]]}
            for k, nid in enumerate(node_ids)
        ],
        "elements": [{"id": eid, "energy": g12(e)} for eid, e in zip(elem_ids, field.per_element_energy)],
        "energy": g12(field.energy),
    }
    lines = ["nodal results:"]
    lines += _table(
        ["node", "ux", "uy", "rz", "Rx", "Ry", "Mz"],
        [[nid, *(g6(v) for v in field.nodal[k]), *(g6(v) for v in field.reactions[k])]
         for k, nid in enumerate(node_ids)],
    )
    lines += ["element energy:"]
    lines += _table(["element", "energy"], [[eid, g6(e)] for eid, e in zip(elem_ids, field.per_element_energy)])
    lines.append(f"total energy = {g12(field.energy)!r}")
    if args.refine:
        data["refinement"] = []
        for k, eid in enumerate(elem_ids):
            ref = assembler.refine_interior(model, field, k, args.refine)
            levels = []
            for lv, verts in enumerate(ref.levels, start=1):
                levels.append([{"x": g12(v.position[0]), "y": g12(v.position[1]),
                                "u": [g12(t) for t in v.displacement]} for v in verts])
                lines.append(f"element {eid} interior level {lv}:")
                lines += _table(
                    ["x", "y", "ux", "uy", "rz"],
                    [[g6(v.position[0]), g6(v.position[1]), *(g6(t) for t in v.displacement)] for v in verts],
                )
            data["refinement"].append({"element": eid, "levels": levels})
    summary = f"OK solve energy={g12(field.energy)!r}"
    return data, lines, summary


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fractalstiff", description="Self-similar stiffness of fractal structures.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="emit a JSON document")
        return sp

    sp = common(sub.add_parser("derive-beam", help="beam fixed point and classical matrix"))
    sp.add_argument("--length", type=positive, required=True)
    sp.add_argument("--ei", type=positive, default=1.0)
    sp.set_defaults(func=cmd_derive_beam)

    sp = common(sub.add_parser("derive-frame", help="triangular frame stiffness and ranks"))
    sp.add_argument("--e", type=positive, required=True)
    sp.add_argument("--area", type=nonnegative, required=True)
    sp.add_argument("--inertia", type=nonnegative, required=True)
    sp.add_argument("--side", type=positive, required=True)
    sp.add_argument("--split", action="store_true")
    sp.set_defaults(func=cmd_derive_frame)

    env_seed = os.environ.get("FRACTALSTIFF_SEED")
    sp = common(sub.add_parser("solve-modes", help="gasket fixed points from random starts"))
    sp.add_argument("--seed", type=int, default=int(env_seed) if env_seed else 1)
    sp.add_argument("--restarts", type=posint, default=200)
    sp.add_argument("--constrained-bending", action="store_true")
    sp.add_argument("--tol", type=positive, default=None, help="Newton residual tolerance override")
    sp.add_argument("--max-iter", type=posint, default=None)
    sp.set_defaults(func=cmd_solve_modes)

    sp = common(sub.add_parser("condense", help="assemble three copies and condense"))
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--mode", choices=("axial", "bending"))
    grp.add_argument("--params", type=float, nargs=5, metavar=("A1", "A2", "A3", "A4", "B1"))
    sp.add_argument("--a1", type=positive, default=1.0, help="leading coefficient with --mode")
    sp.add_argument("--side", type=positive, default=1.0)
    sp.set_defaults(func=cmd_condense)

    sp = common(sub.add_parser("scale", help="stiffness ratio for a geometric ratio"))
    sp.add_argument("--kappa", type=positive, required=True)
    sp.add_argument("--rho", type=positive, required=True)
    sp.set_defaults(func=cmd_scale)

    sp = common(sub.add_parser("assemble", help="global stiffness of a structure file"))
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_assemble)

    sp = common(sub.add_parser("solve", help="displacements, reactions and energy"))
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--refine", type=posint, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_solve)
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        print("FAIL usage", file=stdout)
        return 2
    try:
        data, lines, summary = args.func(args)
    except NUMERICAL_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        print(f"FAIL {args.command} {type(exc).__name__}", file=stdout)
        return 1
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=stderr)
        print(f"FAIL {args.command} input", file=stdout)
        return 2
    if args.json:
        data = {"command": args.command, **data, "summary": summary}
        text = json.dumps(data, indent=2, sort_keys=True) + "\n"
        # keep stdout parseable as one JSON document
        print(summary, file=stderr)
    else:
        text = "\n".join(lines + [summary]) + "\n"
    out_path = getattr(args, "out", None) if args.command == "solve" else None
    if out_path:
        Path(out_path).write_text(text)
        print(summary, file=stdout)
    else:
        stdout.write(text)
    return 0 if summary.startswith("OK") else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

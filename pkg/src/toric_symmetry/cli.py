"""Command-line surface: analyze, sample, verify, oracle, generic, project,
act, demo.

Exit codes: 0 when the command (and every assertion it runs) succeeds, 1 when
a verification assertion fails, 2 for usage, file, or validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .exactla import (
    apply_permutation,
    configuration_matrix,
    kernel_basis,
    parse_table,
    project_increment,
    rank,
    serialize_table,
    stabilizes_kernel,
)
from .generic import generic_element
from .model import HierarchicalModel, ModelError, load_model
from .poset import intersection_poset, v_embedding_report
from .verify import (
    brute_force_stabilizer,
    check_member_invariance,
    check_nonmember_rejection,
    corollary_direct_product,
    markov_fixture,
    sudoku_fixture,
    theorem_conditions,
)
from .wreath import (
    WreathGroup,
    element_to_dict,
    parse_permutation,
    serialize_element,
    serialize_permutation,
)


def _fmt_set(members) -> str:
    return "{" + ",".join(str(j + 1) for j in members) + "}"


def _component_notation(group: WreathGroup) -> list[str]:
    out = []
    for cls in group.poset.classes:
        anc = group.poset.ancestors(cls)
        if anc:
            out.append(
                "S_{" + ",".join(str(j + 1) for j in cls.members)
                + "|" + ",".join(str(j + 1) for j in anc) + "}"
            )
        else:
            out.append("S_{" + ",".join(str(j + 1) for j in cls.members) + "}")
    return out


def _anova_dimension(model: HierarchicalModel) -> int:
    total = 0
    for E in model.all_simplices():
        d = 1
        for j in E:
            d *= model.levels.levels[j] - 1
        total += d
    return total


def _analyze_payload(model: HierarchicalModel) -> dict:
    group = WreathGroup(model)
    poset = group.poset
    A = configuration_matrix(model)
    dim_rows = rank(A)
    conditions = theorem_conditions(model)
    payload = {
        "model": model.name,
        "m": model.m,
        "levels": list(model.levels.levels),
        "facets": [[j + 1 for j in D] for D in model.facet_list],
        "p": model.p,
        "nu": model.nu,
        "classes": [
            {
                "members": [j + 1 for j in cls.members],
                "star": [[j + 1 for j in D] for D in cls.star],
                "ancestors": [j + 1 for j in poset.ancestors(cls)],
                "vset": [j + 1 for j in poset.vset(cls)],
            }
            for cls in poset.classes
        ],
        "hasse": [
            [[j + 1 for j in lo.members], [j + 1 for j in hi.members]]
            for lo, hi in poset.hasse_covers()
        ],
        "wreath_components": _component_notation(group),
        "group_order": group.order(),
        "dim_row_space": dim_rows,
        "dim_kernel": model.p - dim_rows,
        "anova_dimension": _anova_dimension(model),
        "theorem_conditions": conditions.to_dict(),
        "direct_product": corollary_direct_product(model),
    }
    if len(model.facet_list) <= 20:
        payload["v_embedding"] = v_embedding_report(model)
    return payload


def _analyze_text(payload: dict) -> list[str]:
    lines = [
        f"model: {payload['model'] or '(unnamed)'}",
        f"factors: m={payload['m']}, levels ({', '.join(map(str, payload['levels']))})",
        "facets: " + " ".join(_fmt_set([j - 1 for j in D]) for D in payload["facets"]),
        f"cells: p={payload['p']}, configuration rows: nu={payload['nu']}",
        "pseudofactor classes:",
    ]
    for cls in payload["classes"]:
        star = " ".join(_fmt_set([j - 1 for j in D]) for D in cls["star"]) or "(empty)"
        lines.append(
            f"  {_fmt_set([j - 1 for j in cls['members']])}: star {star}"
            f"  A={_fmt_set([j - 1 for j in cls['ancestors']])}"
            f"  V={_fmt_set([j - 1 for j in cls['vset']])}"
        )
    if payload["hasse"]:
        lines.append(
            "hasse: "
            + ", ".join(
                f"{_fmt_set([j - 1 for j in lo])} < {_fmt_set([j - 1 for j in hi])}"
                for lo, hi in payload["hasse"]
            )
        )
    else:
        lines.append("hasse: (trivial order)")
    lines.append("wreath: " + " * ".join(payload["wreath_components"]))
    lines.append(f"group order: {payload['group_order']}")
    lines.append(
        f"dim r(A) = {payload['dim_row_space']}, dim ker A = {payload['dim_kernel']}"
        f" (interaction-dimension formula: {payload['anova_dimension']})"
    )
    lines.extend(theorem_conditions_from_dict(payload["theorem_conditions"]))
    lines.append(f"direct product: {'yes' if payload['direct_product'] else 'no'}")
    if "v_embedding" in payload:
        ve = payload["v_embedding"]
        ok = "yes" if not ve["violations"] else "; ".join(ve["violations"])
        lines.append(
            f"V embedding ok: {ok}; image {ve['image_size']}"
            f" of {ve['proper_part_size']} proper intersections"
            f" (surjective: {'yes' if ve['surjective'] else 'no'})"
        )
    return lines


def theorem_conditions_from_dict(d: dict) -> list[str]:
    return [
        "theorem conditions: sizes ("
        + ", ".join(map(str, d["sizes"]))
        + f"), distinct: {'yes' if d['sizes_distinct'] else 'no'},"
        + f" two-level factors: {d['two_level_count']},"
        + f" met: {'yes' if d['passed'] else 'no'}"
    ]


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_output(payloads, lines, as_json: bool, out_path: str | None):
    if as_json:
        _emit(json.dumps(payloads, indent=2, default=str) + "\n", out_path)
    else:
        _emit("\n".join(lines) + "\n", out_path)


def cmd_analyze(args) -> int:
    model = load_model(args.model)
    payload = _analyze_payload(model)
    _report_output(payload, _analyze_text(payload), args.json, args.out)
    return 0


def cmd_sample(args) -> int:
    model = load_model(args.model)
    group = WreathGroup(model)
    if args.check:
        A = configuration_matrix(model)
        kb = kernel_basis(A)
    samples = []
    lines = []
    for i in range(args.n):
        w = group.sample_uniform(f"{args.seed}/{i}")
        g = group.to_cell_permutation(w)
        if args.check and not stabilizes_kernel(A, kb, g):
            sys.stderr.write(f"sample {i} does not stabilize the kernel\n")
            return 1
        samples.append({"element": element_to_dict(w), "image": list(g.image)})
        lines.append(f"sample {i}: image {list(g.image)}")
        lines.append(serialize_element(w).rstrip("\n"))
    _report_output(samples, lines, args.json, args.out)
    return 0


def cmd_verify(args) -> int:
    model = load_model(args.model)
    conditions = theorem_conditions(model)
    member = check_member_invariance(model, args.trials, args.seed)
    nonmember = check_nonmember_rejection(model, args.trials, args.seed)
    direct = corollary_direct_product(model)
    reports = [conditions.to_dict(), member.to_dict(), nonmember.to_dict()]
    lines = conditions.lines() + member.lines() + nonmember.lines()
    lines.append(f"direct product: {'yes' if direct else 'no'}")
    _report_output(reports, lines, args.json, args.out)
    return 0 if member.passed and nonmember.passed else 1


def cmd_oracle(args) -> int:
    model = load_model(args.model)
    report = brute_force_stabilizer(model, max_cells=args.max_cells, threads=args.threads)
    _report_output(report.to_dict(), report.lines(), args.json, args.out)
    return 0 if report.defects == 0 else 1


def cmd_generic(args) -> int:
    model = load_model(args.model)
    table = generic_element(model, args.j).table
    _emit(serialize_table(table), args.out)
    return 0


def _parse_factor_list(text: str, model: HierarchicalModel) -> tuple[int, ...]:
    if not text.strip():
        return ()
    try:
        factors = [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise ModelError(f"bad factor list {text!r}") from exc
    for j in factors:
        if not 1 <= j <= model.m:
            raise ModelError(f"factor index {j} out of range for m={model.m}")
    return tuple(sorted(j - 1 for j in factors))


def cmd_project(args) -> int:
    model = load_model(args.model)
    E = _parse_factor_list(args.factors, model)
    with open(args.table, "r", encoding="utf-8") as fh:
        table = parse_table(fh.read(), model)
    _emit(serialize_table(project_increment(table, E)), args.out)
    return 0


def cmd_act(args) -> int:
    model = load_model(args.model)
    with open(args.perm, "r", encoding="utf-8") as fh:
        g = parse_permutation(fh.read())
    with open(args.table, "r", encoding="utf-8") as fh:
        table = parse_table(fh.read(), model)
    _emit(serialize_table(apply_permutation(g, table)), args.out)
    return 0


def cmd_demo(args) -> int:
    report = markov_fixture() if args.name == "markov" else sudoku_fixture()
    _report_output(report.to_dict(), report.lines(), args.json, args.out)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toric-symmetry",
        description="Exact symmetry analysis of hierarchical log-linear models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        if model:
            p.add_argument("model", help="path to a model JSON file")
        p.add_argument("--json", action="store_true", help="emit JSON instead of text")
        p.add_argument("--out", default=None, help="write output to a file")

    p = sub.add_parser("analyze", help="poset, wreath structure, and dimensions")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sample", help="uniform random group elements")
    common(p)
    p.add_argument("-n", type=int, default=1, help="number of samples")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--check", action="store_true", help="verify each sample stabilizes the kernel")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="member-invariance and non-member rejection")
    common(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="brute-force stabilizer enumeration")
    common(p)
    p.add_argument("--max-cells", type=int, default=8)
    p.add_argument("--threads", type=int, default=None,
                   help="parallel workers (default: TORIC_SYMMETRY_THREADS or 1)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("generic", help="emit a generic table for the model")
    common(p)
    p.add_argument("--j", type=int, default=1, help="sequence selector")
    p.set_defaults(func=cmd_generic)

    p = sub.add_parser("project", help="project a table onto a pure-interaction component")
    common(p)
    p.add_argument("-E", "--factors", required=True, help="comma-separated 1-based factors")
    p.add_argument("--table", required=True, help="path to a table JSON file")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("act", help="apply a cell permutation to a table")
    common(p)
    p.add_argument("--perm", required=True, help="path to a permutation JSON file")
    p.add_argument("--table", required=True, help="path to a table JSON file")
    p.set_defaults(func=cmd_act)

    p = sub.add_parser("demo", help="run a built-in fixture")
    p.add_argument("name", choices=["markov", "sudoku"])
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ModelError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

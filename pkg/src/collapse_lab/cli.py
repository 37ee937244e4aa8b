"""Batch command-line front end: ``collapse-lab <subcommand> …``.

Exit status: 0 on success, 1 on a domain error or a failed check, 2 on a
usage error.  With ``--json`` every result (and every domain error) is a
single JSON object on stdout.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from typing import Any, List, Optional, Sequence

from . import bisim, collapse, constructible, games, hf, logic, prs, recursion, truth, veblen
from .trees import FiniteTree, label_from_json, label_to_json, label_sort_key


class CommandError(Exception):
    """A domain failure reported with exit status 1."""


class CheckFailed(Exception):
    """The command ran, but the property it checks does not hold."""

    def __init__(self, payload: dict, text: str):
        super().__init__(text)
        self.payload = payload
        self.text = text


# -- input helpers ----------------------------------------------------------------------


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CommandError(f"{path} is not valid JSON: {exc}") from None


def _sets(text: str) -> List[hf.HFSet]:
    """A whitespace-separated list of set expressions."""
    out = []
    pos = 0
    while True:
        while pos < len(text) and (text[pos].isspace() or text[pos] == ","):
            pos += 1
        if pos >= len(text):
            return out
        value, pos = hf.parse_set_prefix(text, pos)
        out.append(value)


def _tree(path: str) -> FiniteTree:
    return FiniteTree.from_json(_load_json(path))


def _order(text: str) -> veblen.QuasiOrder:
    """``k`` (a finite ordinal), ``revnat``, or a JSON file {"elements": […], "leq": [[x, y], …]}."""
    if text.isdigit():
        return veblen.finite_ordinal(int(text))
    if text == "revnat":
        return veblen.reversed_naturals()
    data = _load_json(text)
    try:
        elems = [e if isinstance(e, (int, str)) else str(e) for e in data["elements"]]
        pairs = {(x, y) for x, y in data["leq"]}
    except (KeyError, TypeError, ValueError):
        raise CommandError(f'{text}: an order file needs "elements" and "leq" pairs') from None
    order = veblen.QuasiOrder(lambda x, y: x == y or (x, y) in pairs, elems, text)
    if not order.check_laws():
        raise CommandError(f"{text}: the relation is not a quasi linear order")
    return order


def _node_json(node: tuple) -> list:
    return [label_to_json(x) for x in node]


def _node_text(node: tuple) -> str:
    return json.dumps(_node_json(node))


def _relation_sorted(rel) -> list:
    return sorted(([_node_json(x), _node_json(y)] for x, y in rel), key=json.dumps)


# -- subcommands --------------------------------------------------------------------------------


def cmd_hf(args) -> tuple:
    a = hf.parse_set(args.expr)
    if args.op == "eval":
        out = a
    elif args.op == "tc":
        out = hf.transitive_closure(a)
    elif args.op == "powerset":
        out = hf.finite_powerset(a)
    else:
        r = hf.rank(a)
        return {"rank": r}, str(r)
    return {"set": hf.to_json(out)}, hf.format_set(out)


def cmd_collapse(args) -> tuple:
    data = _load_json(args.file)
    if isinstance(data, list):
        values = collapse.tree_collapse(FiniteTree.from_json(data))
        labels = sorted(values, key=lambda s: (len(s), [label_sort_key(x) for x in s]))
        entries = [(_node_json(k), values[k]) for k in labels]
    else:
        rel = collapse.CarrierRelation.from_json(data)
        values = collapse.collapse(rel)
        entries = [(label_to_json(k), values[k]) for k in rel.carrier]
    image = hf.canon(v for _, v in entries)
    payload = {
        "values": [[k, hf.to_json(v)] for k, v in entries],
        "image": hf.to_json(image),
    }
    lines = [f"{json.dumps(k)} -> {hf.format_set(v)}" for k, v in entries]
    lines.append(f"image: {hf.format_set(image)}")
    return payload, "\n".join(lines)


def cmd_demo(args) -> tuple:
    if args.which == "addition":
        got = collapse.addition_graph_via_collapse(args.k)
        ok = got is collapse.addition_graph_oracle(args.k)
        payload = {"k": args.k, "pairs": len(got), "graph": hf.to_json(got), "matches_oracle": ok}
        text = f"{hf.format_set(got)}\npairs: {len(got)}\nmatches oracle: {ok}"
    else:
        got = collapse.ackermann_image(args.bits)
        # 2^bits codes fill V_n exactly when 2^bits = |V_n|
        level = {0: 1, 1: 2, 2: 3, 4: 4, 16: 5}.get(args.bits)
        ok = None if level is None else got is hf.v_level(level)
        payload = {"bits": args.bits, "size": len(got), "image": hf.to_json(got), "v_level": level, "equals_v_level": ok}
        text = f"{hf.format_set(got)}\nsize: {len(got)}"
        if level is not None:
            text += f"\nequals V_{level}: {ok}"
    if ok is False:
        raise CheckFailed(payload, text)
    return payload, text


def cmd_bisim(args) -> tuple:
    t = _tree(args.treefile)
    maximal = bisim.maximal_bisimulation(t)
    if args.check is None:
        rel = _relation_sorted(maximal)
        return {"relation": rel}, "\n".join(f"{json.dumps(x)} ~ {json.dumps(y)}" for x, y in rel)
    b = bisim.relation_from_json(_load_json(args.check))
    is_b = bisim.is_bisimulation(t, b)
    inside = set(b) <= set(maximal)
    payload = {"is_bisimulation": is_b, "within_maximal": inside}
    text = f"is a bisimulation: {is_b}\ncontained in the maximal bisimulation: {inside}"
    if not is_b:
        raise CheckFailed(payload, text)
    return payload, text


def _formula_args(args):
    a = hf.parse_set(args.model)
    f = logic.parse_formula(args.formula)
    s = _sets(args.assign or "")
    return a, f, s


def cmd_eval(args) -> tuple:
    a, f, s = _formula_args(args)
    v = logic.evaluate(a, f, s)
    return {"value": v}, str(v).lower()


def cmd_truth(args) -> tuple:
    a, f, s = _formula_args(args)
    g = logic.to_nnf(f)
    tt = truth.truth_trees(a, g, s)
    v = tt.holds()
    payload = {
        "value": v,
        "pi_top": hf.to_json(tt.pi_top(g)),
        "pi_bot": hf.to_json(tt.pi_bot(g)),
        "pi_sat": hf.to_json(tt.pi_sat(g, tt.assignment)),
    }
    text = (
        f"{str(v).lower()}\n"
        f"top: {hf.format_set(tt.pi_top(g))}\n"
        f"bot: {hf.format_set(tt.pi_bot(g))}\n"
        f"sat: {hf.format_set(tt.pi_sat(g, tt.assignment))}"
    )
    if args.dump_trees:
        files = truth.dump_trees(a, f, s, args.dump_trees)
        payload["dumped"] = len(files)
        text += f"\ndumped {len(files)} files to {args.dump_trees}"
    return payload, text


def cmd_tr(args) -> tuple:
    try:
        inst = recursion.load_instance(args.file)
    except ValueError as exc:
        raise CommandError(str(exc)) from None
    results = {}
    if args.engine in ("direct", "both"):
        results["direct"] = recursion.tr_direct(inst)
    if args.engine in ("trees", "both"):
        results["trees"] = recursion.tr_trees(inst)
    if args.engine != "both":
        r = next(iter(results.values()))
        body = r.to_json()
        return body, "\n".join(f"H_{s} = {h}" for s, h in body["slices"].items())
    d, t = results["direct"], results["trees"]
    stray = recursion.check_recursion(inst, d)
    only_d = sorted([hf.format_set(c), hf.format_set(s)] for c, s in d.pairs - t.pairs)
    only_t = sorted([hf.format_set(c), hf.format_set(s)] for c, s in t.pairs - d.pairs)
    agree = not only_d and not only_t
    payload = {
        "agree": agree,
        "H": d.to_json()["H"],
        "only_direct": only_d,
        "only_trees": only_t,
        "recursion_check_failures": [hf.format_set(s) for s in stray],
    }
    if agree and not stray:
        return payload, f"ENGINES AGREE ({len(d.pairs)} pairs)"
    lines = ["ENGINES DISAGREE" if not agree else "RECURSION CHECK FAILED"]
    lines += [f"direct only: {c} at {s}" for c, s in only_d]
    lines += [f"trees only: {c} at {s}" for c, s in only_t]
    raise CheckFailed(payload, "\n".join(lines))


def cmd_game(args) -> tuple:
    t = _tree(args.treefile)
    if args.which == "solve":
        g = games.GameTree(t)
    else:
        nodes = t.to_json()
        try:
            x, y = (tuple(label_from_json(v) for v in nodes[i]) for i in args.pair)
        except IndexError:
            raise CommandError(f"the tree has {len(nodes)} nodes, indices start at 0") from None
        g = games.bisimulation_game(t, (x, y))
    sol = games.solve(g)
    first = sol.strategy.choose((), g.root) if g.root.children and sol.winner == games.PLAYER_I else None
    payload = {"winner": sol.winner, "opening_move": None if first is None else label_to_json(first)}
    text = f"winner: Player {sol.winner}"
    if first is not None:
        text += f"\nopening move: {json.dumps(label_to_json(first))}"
    return payload, text


def cmd_veblen(args) -> tuple:
    order = _order(args.lambda_)
    sys_ = veblen.VeblenSystem(args.alpha, order)
    if args.which == "cmp":
        t, s = veblen.parse_term(args.t), veblen.parse_term(args.s)
        for u in (t, s):
            if not veblen.in_system(u, sys_):
                raise CommandError(f"{veblen.format_term(u)} is not a term of O({args.alpha}, {order.name})")
        le, ge = veblen.leq(t, s, sys_), veblen.leq(s, t, sys_)
        rel = "≡" if le and ge else "<" if le else ">"
        return {"leq": le, "geq": ge, "relation": rel}, f"{veblen.format_term(t)} {rel} {veblen.format_term(s)}"
    if args.which == "nf0":
        nf = veblen.normal_form0(veblen.parse_term(args.t), order)
        return {"normal_form": nf}, veblen.format_term(veblen.from_normal_form0(nf))
    if args.which == "value":
        v = veblen.value(veblen.parse_term(args.t), sys_)
        return {"value": veblen.vnf_format(v)}, veblen.vnf_format(v)
    with open(args.input) as fh:
        stream = [veblen.parse_term(line) for line in fh if line.strip() and not line.startswith("#")]
    out = veblen.descending_transfer(stream, args.lookahead, order)
    if not out:
        raise CommandError(f"insufficient input: {out.reason}")
    return {"case": out.case, "descent": list(out)}, f"{out.case}: " + " > ".join(map(str, out))


def cmd_prs(args) -> tuple:
    with open(args.program) as fh:
        program = prs.parse_program(fh.read())
    bindings = {}
    for b in args.bind:
        name, sep, expr = b.partition("=")
        if not sep:
            raise CommandError(f"--bind expects name=setexpr, got {b!r}")
        bindings[name] = hf.parse_set(expr)
    out = prs.eval_prim(program, _sets(args.args or ""), bindings)
    return {"set": hf.to_json(out)}, hf.format_set(out)


def cmd_lconstr(args) -> tuple:
    b = hf.parse_set(args.base)
    seq = constructible.l_level(b, args.levels)
    payload: dict = {"sizes": [len(x) for x in seq.levels], "top": hf.to_json(seq.levels[-1])}
    lines = [f"L_{k}: {len(x)} elements" for k, x in enumerate(seq.levels)]
    lines.append(hf.format_set(seq.levels[-1]))
    if args.audit_def:
        rep = constructible.audit_def(seq.levels[-1])
        payload["audit"] = {"ok": rep.ok, "saturated_at": rep.saturated_at, "formulas": rep.formulas_checked}
        lines.append(f"Def audit: {'saturated' if rep.ok else 'NOT saturated'} at size {rep.saturated_at}")
        if not rep.ok:
            raise CheckFailed(payload, "\n".join(lines))
    return payload, "\n".join(lines)


# -- parser ---------------------------------------------------------------------------------------


def _globals(p: argparse.ArgumentParser, top: bool) -> None:
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--json", action="store_true", default=d(False), help="emit one JSON object")
    p.add_argument("--max-nodes", type=int, default=d(None), help="size guard on distinct sets")
    p.add_argument("--seed", type=int, default=d(0), help="seed for randomized steps")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="collapse-lab", description=__doc__.splitlines()[0])
    _globals(p, True)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, **kw)
        _globals(sp, False)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("hf", cmd_hf, help="parse and transform set expressions")
    sp.add_argument("op", choices=["eval", "tc", "rank", "powerset"])
    sp.add_argument("expr")

    sp = add("collapse", cmd_collapse, help="collapse a relation or tree JSON file")
    sp.add_argument("file")

    sp = add("demo", cmd_demo, help="collapse demonstrations")
    sp.add_argument("which", choices=["addition", "ackermann"])
    sp.add_argument("--k", type=int, default=6)
    sp.add_argument("--bits", type=int, default=4)

    sp = add("bisim", cmd_bisim, help="maximal bisimulation of a tree")
    sp.add_argument("treefile")
    sp.add_argument("--check", metavar="RELATIONFILE")

    for name, fn in (("eval", cmd_eval), ("truth", cmd_truth)):
        sp = add(name, fn, help="evaluate a formula" if name == "eval" else "truth trees and their collapse")
        sp.add_argument("--model", required=True)
        sp.add_argument("--formula", required=True)
        sp.add_argument("--assign", default="")
        if name == "truth":
            sp.add_argument("--dump-trees", metavar="DIR")

    sp = add("tr", cmd_tr, help="run a Δ0 transfinite recursion instance")
    sp.add_argument("file")
    sp.add_argument("--engine", choices=["direct", "trees", "both"], default="direct")

    sp = add("game", cmd_game, help="solve clopen games")
    sp.add_argument("which", choices=["solve", "bisim"])
    sp.add_argument("treefile")
    sp.add_argument("--pair", type=int, nargs=2, metavar=("I", "J"), help="node indices in file order")

    sp = add("veblen", cmd_veblen, help="Veblen notation terms")
    sp.add_argument("which", choices=["cmp", "nf0", "value", "descend"])
    sp.add_argument("t", nargs="?")
    sp.add_argument("s", nargs="?")
    sp.add_argument("--alpha", type=int, default=0)
    sp.add_argument("--lambda", dest="lambda_", default=None, help="k, revnat, or an order JSON file")
    sp.add_argument("--input")
    sp.add_argument("--lookahead", type=int, default=50)

    sp = add("prs", cmd_prs, help="primitive recursive set functions")
    sp.add_argument("which", choices=["eval"])
    sp.add_argument("program")
    sp.add_argument("--args", default="")
    sp.add_argument("--bind", action="append", default=[])

    sp = add("lconstr", cmd_lconstr, help="finite constructible levels")
    sp.add_argument("--base", default="{}")
    sp.add_argument("--levels", type=int, required=True)
    sp.add_argument("--audit-def", action="store_true")
    return p


def _check_usage(p: argparse.ArgumentParser, args) -> None:
    if args.command == "game" and args.which == "bisim" and args.pair is None:
        p.error("game bisim needs --pair I J")
    if args.command == "veblen":
        need = {"cmp": ("t", "s"), "nf0": ("t",), "value": ("t",), "descend": ("input",)}[args.which]
        for field in need:
            if getattr(args, field) is None:
                p.error(f"veblen {args.which} needs {field if field != 'input' else '--input'}")
        if args.lambda_ is None:
            args.lambda_ = "revnat" if args.which == "descend" else "1"


def _emit(args, payload: Any, text: str, stream=None) -> None:
    stream = stream or sys.stdout
    if args.json:
        stream.write(json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        stream.write(text + "\n")


DOMAIN_ERRORS = (
    CommandError,
    hf.SizeLimitError,
    ValueError,
    KeyError,
    OSError,
    games.NotWinningError,
)


def main(argv: Optional[Sequence[str]] = None) -> int:
    p = build_parser()
    try:
        args = p.parse_args(argv)
        _check_usage(p, args)
    except SystemExit as exc:
        return int(exc.code or 0)
    random.seed(args.seed)
    overrides = {} if args.max_nodes is None else {"max_nodes": args.max_nodes}
    try:
        with hf.limits(**overrides):
            payload, text = args.fn(args)
    except CheckFailed as exc:
        _emit(args, dict(exc.payload, ok=False), exc.text)
        return 1
    except DOMAIN_ERRORS as exc:
        name = type(exc).__name__
        msg = str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)
        if args.json:
            _emit(args, {"error": name, "message": msg}, "")
        else:
            sys.stderr.write(f"collapse-lab: {name}: {msg}\n")
        return 1
    _emit(args, payload, text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

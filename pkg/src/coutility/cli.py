"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 input parse/validation error,
4 enumeration size guard.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import anon_query as aq
from . import coordination_examples as ce
from .files import FormatError, dump_json, load_game, load_protocol, load_scenario
from .game_core import (
    BayesianGame,
    GameError,
    GameSizeError,
    NormalFormGame,
    dominant_strategies,
    is_pure_nash,
    make_bos,
    make_tcp_game,
    pure_nash_equilibria,
)
from .protocol_analysis import (
    POSITIVITY_MODES,
    PreconditionError,
    ProtocolError,
    ProtocolTable,
    check_self_enforcing,
    classify,
)
from .sim_harness import (
    POLICIES,
    ScenarioError,
    compare_policies,
    metrics_csv,
    run_simulation,
    with_policy,
    write_events,
)

EXIT_USAGE, EXIT_INPUT, EXIT_GUARD = 2, 3, 4

BOS_PARAMS = (3.0, 2.0, 3.0, 2.0, 1.0)


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_only(args) -> None:
    if args.format != "json":
        raise UsageError(f"{args.command} only supports --format json")


def analyze_normal_form(game: NormalFormGame) -> dict:
    return {
        "agents": list(game.agents),
        "actions": [list(a) for a in game.actions],
        "equilibria": [list(p) for p in pure_nash_equilibria(game)],
        "dominant": [
            {
                "agent": name,
                "weak": list(dominant_strategies(game, i, "weak")),
                "strict": list(dominant_strategies(game, i, "strict")),
            }
            for i, name in enumerate(game.agents)
        ],
    }


def analyze_game(game: NormalFormGame | BayesianGame) -> dict:
    if isinstance(game, NormalFormGame):
        return analyze_normal_form(game)
    return {
        "agents": list(game.agents),
        "types": [list(t) for t in game.types],
        "realizations": [
            {"types": list(t), **analyze_normal_form(game.realization(t))}
            for t in game.type_profiles()
        ],
    }


def check_protocol(game, protocol: ProtocolTable, positivity: str = "ex_post") -> dict:
    if isinstance(game, NormalFormGame):
        game = BayesianGame.from_normal_form(game)
    return classify(protocol, game, positivity).to_dict()


# --- demos ----------------------------------------------------------------------


def demo_tcp() -> dict:
    game = make_tcp_game()
    report = analyze_normal_form(game)
    bgame = BayesianGame.from_normal_form(game)
    report["protocols"] = [
        {"output": list(out), "self_enforcing": check_self_enforcing(ProtocolTable.constant(out), bgame).to_dict()}
        for out in (("Honest", "Honest"), ("Dishonest", "Dishonest"))
    ]
    return report


def _bos_run(game: NormalFormGame, report: ce.BosReport) -> dict:
    out = ce.bos_protocol(report)
    return {
        "husband_br_to_opera": report.husband_br_to_opera,
        "reported_equilibria": [list(p) for p in ce.reported_equilibria(report)],
        "output": None if out is None else list(out),
        "is_nash": out is not None and is_pure_nash(game, out),
        "utilities": None if out is None else list(game.payoff(out)),
    }


def demo_bos(params: Sequence[float] = BOS_PARAMS) -> dict:
    game = make_bos(*params)
    bgame = ce.make_bos_bayesian(*params)
    table = ce.bos_protocol_table(bgame)
    return {
        "params": dict(zip(("a_W", "b_W", "a_H", "b_H", "c"), params)),
        "equilibria": [list(p) for p in pure_nash_equilibria(game)],
        "truthful": _bos_run(game, ce.truthful_report(game)),
        "husband_lies": _bos_run(game, ce.lying_husband_report(game)),
        "wife_truthful_dominant": ce.wife_truthfulness_check(game) is None,
        "classification": classify(table, bgame).to_dict(),
    }


def demo_vickrey() -> dict:
    bids = [5.0, 3.0, 2.0]
    out = ce.vickrey_allocate(bids)
    checks = {}
    for name, grid, n, rule in (
        ("second_price_0_5_n2", range(6), 2, ce.vickrey_utilities),
        ("second_price_0_1_n3", range(2), 3, ce.vickrey_utilities),
        ("first_price_0_5_n2", range(6), 2, ce.first_price_utilities),
    ):
        res = ce.vickrey_truthfulness_check(list(grid), list(grid), n, rule)
        checks[name] = {"ok": res.ok, "checked": res.checked, "counterexample": res.counterexample}
    values = [0.0, 1.0]
    return {
        "bids": bids,
        "winner": out.winner,
        "price": out.price,
        "utilities": list(ce.vickrey_utilities(bids, bids)),
        "truthfulness": checks,
        "classification": classify(
            ce.vickrey_protocol_table(values), ce.make_vickrey_game(values), "expected"
        ).to_dict(),
    }


def protocol1_instances() -> list[dict]:
    """Hand-picked instances: one strict, one merely relaxed."""
    return [
        {
            "name": "forward_and_accept",
            "initiator": aq.AgentState(0.1, aq.QueryProfile.of({"a": 4}),
                                       (aq.PendingQuery("a", 10.0, 1),)),
            "responder": aq.AgentState(0.1, aq.QueryProfile.of({"b": 2, "c": 1})),
            "query": "a",
            "timeout": 1.0,
        },
        {
            "name": "direct_past_deadline",
            "initiator": aq.AgentState(1.0, aq.QueryProfile.of({"a": 2, "b": 1}),
                                       (aq.PendingQuery("a", 0.0, 1),)),
            "responder": aq.AgentState(1.0, aq.QueryProfile.of({"b": 1, "c": 1})),
            "query": "a",
            "timeout": 1.0,
        },
    ]


def demo_protocol1() -> dict:
    runs = []
    for inst in protocol1_instances():
        i, j, q, to = inst["initiator"], inst["responder"], inst["query"], inst["timeout"]
        runs.append({
            "name": inst["name"],
            "initiator": i.to_dict(),
            "responder": j.to_dict(),
            "query": q,
            "timeout": to,
            "verify": aq.verify_protocol1(i, j, q, to).to_dict(),
            "classification": classify(aq.protocol1_table(i, j, q, to),
                                       aq.make_query_game(i, j, q, to)).to_dict(),
        })
    return {"instances": runs}


# --- command handlers -------------------------------------------------------------


def _cmd_analyze(args) -> None:
    _json_only(args)
    _emit(dump_json(analyze_game(load_game(args.game))), args.out)


def _cmd_check(args) -> None:
    _json_only(args)
    report = check_protocol(load_game(args.game), load_protocol(args.protocol), args.positivity)
    _emit(dump_json(report), args.out)


def _scenario(args):
    sc = load_scenario(args.scenario)
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    if args.horizon is not None:
        sc = replace(sc, horizon=args.horizon)
    if getattr(args, "policy", None) is not None:
        sc = with_policy(sc, args.policy)
    return sc


def _cmd_simulate(args) -> None:
    sc = _scenario(args)
    res = run_simulation(sc)
    summary = res.summary()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.csv").write_text(metrics_csv(res.metrics))
        dump_json(summary, out / "summary.json")
    if args.events:
        with open(args.events, "w") as fh:
            write_events(res.events, fh)
    if args.format == "csv":
        sys.stdout.write(metrics_csv(res.metrics))
    else:
        sys.stdout.write(dump_json(summary))


def _cmd_compare(args) -> None:
    sc = _scenario(args)
    rows = compare_policies(sc, args.policies)
    if args.format == "csv":
        cols = ("policy", "mean_final_entropy", "answered_fraction", "mean_delay", "seed")
        lines = [",".join(cols)] + [",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in cols) for r in rows]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(dump_json(rows), args.out)


def _demo(fn):
    def handler(args):
        _json_only(args)
        _emit(dump_json(fn()), args.out)
    return handler


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coutility",
        description="Analyze self-enforcing and co-utile protocols; simulate P2P anonymous queries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json",
                       help="output format (csv only for simulate/compare)")
        p.add_argument("--out", help="output path (simulate: a directory)")
        return p

    p = common(sub.add_parser("analyze-game", help="equilibria and dominant strategies of a game file"))
    p.add_argument("game")
    p.set_defaults(func=_cmd_analyze)

    p = common(sub.add_parser("check-protocol", help="classify a protocol table over a game"))
    p.add_argument("game")
    p.add_argument("protocol")
    p.add_argument("--positivity", choices=POSITIVITY_MODES, default="ex_post")
    p.set_defaults(func=_cmd_check)

    for name, helptext in (("simulate", "run a scenario"), ("compare", "compare policies on a scenario")):
        p = common(sub.add_parser(name, help=helptext))
        p.add_argument("scenario")
        p.add_argument("--seed", type=int)
        p.add_argument("--horizon", type=int)
        if name == "simulate":
            p.add_argument("--policy", choices=POLICIES, help="assign this policy to every agent")
            p.add_argument("--events", help="write the JSON-lines event log here")
            p.set_defaults(func=_cmd_simulate)
        else:
            p.add_argument("--policies", nargs="+", choices=POLICIES,
                           default=["Protocol1", "AlwaysDirect"])
            p.set_defaults(func=_cmd_compare)

    for name, fn in (("demo-tcp", demo_tcp), ("demo-bos", demo_bos),
                     ("demo-vickrey", demo_vickrey), ("demo-protocol1", demo_protocol1)):
        p = common(sub.add_parser(name, help=f"print the {name[5:]} example"))
        p.set_defaults(func=_demo(fn))
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GameSizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (FormatError, GameError, ProtocolError, ScenarioError, PreconditionError,
            OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())

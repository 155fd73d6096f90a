"""JSON readers and writers for games, protocols and scenarios."""

from __future__ import annotations

import itertools
import json
from pathlib import Path
from typing import Any

from .game_core import BayesianGame, GameError, GameSizeError, NormalFormGame
from .protocol_analysis import ProtocolError, ProtocolTable
from .sim_harness import Scenario, ScenarioError


class FormatError(ValueError):
    """A file could not be parsed; the message names the offending field."""


def _read_json(path: str | Path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _field(obj: Any, key: str, where: str, kind: type | tuple = list) -> Any:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    if key not in obj:
        raise FormatError(f"{where}: missing field '{key}'")
    value = obj[key]
    if not isinstance(value, kind):
        raise FormatError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}")
    return value


def _labels(value: Any, where: str) -> list[list[str]]:
    if not isinstance(value, list) or not all(isinstance(s, list) for s in value):
        raise FormatError(f"{where}: expected a list of label lists")
    for k, s in enumerate(value):
        if not s:
            raise FormatError(f"{where}[{k}]: empty label list")
    return [[str(x) for x in s] for s in value]


def game_from_dict(data: dict) -> BayesianGame | NormalFormGame:
    """Parse a game; files with a `types` field give a BayesianGame."""
    agents = [str(a) for a in _field(data, "agents", "game")]
    actions = _labels(_field(data, "actions", "game"), "game.actions")
    records = _field(data, "payoffs", "game")
    bayesian = "types" in data
    types = _labels(data["types"], "game.types") if bayesian else None
    table: dict = {}
    for k, rec in enumerate(records):
        where = f"game.payoffs[{k}]"
        profile = tuple(str(x) for x in _field(rec, "profile", where))
        utils = _field(rec, "utilities", where)
        if not all(isinstance(u, (int, float)) and not isinstance(u, bool) for u in utils):
            raise FormatError(f"{where}.utilities: expected numbers")
        key = (profile, tuple(str(x) for x in _field(rec, "types", where))) if bayesian else profile
        if key in table:
            raise FormatError(f"{where}: profile {list(profile)} appears more than once")
        table[key] = tuple(float(u) for u in utils)
    try:
        if not bayesian:
            return NormalFormGame(tuple(agents), actions, table)
        prior_records = data.get("prior")
        if prior_records is None:
            profiles = list(itertools.product(*types))
            prior = {t: 1.0 / len(profiles) for t in profiles}
        else:
            prior = {}
            for k, rec in enumerate(prior_records):
                where = f"game.prior[{k}]"
                t = tuple(str(x) for x in _field(rec, "types", where))
                prior[t] = float(_field(rec, "p", where, (int, float)))
        return BayesianGame(tuple(agents), actions, types, prior, table)
    except GameSizeError:
        raise
    except GameError as exc:
        raise FormatError(f"game: {exc}") from exc


def game_to_dict(game: BayesianGame | NormalFormGame) -> dict:
    if isinstance(game, NormalFormGame):
        return {
            "agents": list(game.agents),
            "actions": [list(a) for a in game.actions],
            "payoffs": [
                {"profile": list(p), "utilities": list(game.payoffs[p])} for p in game.profiles()
            ],
        }
    return {
        "agents": list(game.agents),
        "actions": [list(a) for a in game.strategies],
        "types": [list(t) for t in game.types],
        "prior": [{"types": list(t), "p": game.prior[t]} for t in game.type_profiles()],
        "payoffs": [
            {"profile": list(s), "types": list(t), "utilities": list(game.utilities[s, t])}
            for s in game.strategy_profiles()
            for t in game.type_profiles()
        ],
    }


def protocol_from_dict(data: dict) -> ProtocolTable:
    inputs = _labels(_field(data, "inputs", "protocol"), "protocol.inputs")
    aux = [str(x) for x in data.get("aux", ["none"])]
    mapping: dict = {}
    for k, rec in enumerate(_field(data, "table", "protocol")):
        where = f"protocol.table[{k}]"
        c = tuple(str(x) for x in _field(rec, "inputs", where))
        x = str(rec.get("aux", "none"))
        if (c, x) in mapping:
            raise FormatError(f"{where}: inputs {list(c)} with aux {x!r} appear more than once")
        mapping[c, x] = tuple(str(s) for s in _field(rec, "output", where))
    try:
        return ProtocolTable(inputs, mapping, tuple(aux), bool(data.get("reports_types", False)))
    except ProtocolError as exc:
        raise FormatError(f"protocol: {exc}") from exc


def protocol_to_dict(protocol: ProtocolTable) -> dict:
    return {
        "inputs": [list(s) for s in protocol.inputs],
        "aux": list(protocol.aux),
        "reports_types": protocol.reports_types,
        "table": [
            {"inputs": list(c), "aux": x, "output": list(protocol.output(c, x))}
            for c in protocol.input_profiles()
            for x in protocol.aux
        ],
    }


def load_game(path: str | Path) -> BayesianGame | NormalFormGame:
    return game_from_dict(_read_json(path))


def load_protocol(path: str | Path) -> ProtocolTable:
    return protocol_from_dict(_read_json(path))


def load_scenario(path: str | Path) -> Scenario:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise FormatError(f"{path}: a scenario must be a JSON object")
    try:
        return Scenario.from_dict(data)
    except TypeError as exc:
        raise ScenarioError(str(exc)) from exc


def dump_json(obj: Any, path: str | Path | None = None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text

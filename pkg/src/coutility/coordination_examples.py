"""Two coordination protocols: a best-response protocol for Battle of the
Sexes, and the sealed-bid second-price (Vickrey) auction."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

from .game_core import (
    BayesianGame,
    GameError,
    NormalFormGame,
    Profile,
    best_responses,
    make_bos,
)
from .protocol_analysis import ProtocolTable

OPERA, FOOTBALL = "Opera", "Football"
BOS_ACTIONS = (OPERA, FOOTBALL)
BOS_PROFILES: tuple[Profile, ...] = tuple(itertools.product(BOS_ACTIONS, repeat=2))


@dataclass(frozen=True)
class BosReport:
    """What both spouses tell the protocol.

    Each reports a best response to each of the other's actions; the wife
    also ranks the profiles the protocol may end up choosing between.
    """

    wife_br_to_opera: str
    wife_br_to_football: str
    husband_br_to_opera: str
    husband_br_to_football: str
    wife_ranking: tuple[Profile, ...]

    def __post_init__(self):
        for name in ("wife_br_to_opera", "wife_br_to_football",
                     "husband_br_to_opera", "husband_br_to_football"):
            if getattr(self, name) not in BOS_ACTIONS:
                raise ValueError(f"{name} must be one of {BOS_ACTIONS}, got {getattr(self, name)!r}")
        ranking = tuple(tuple(p) for p in self.wife_ranking)
        for p in ranking:
            if p not in BOS_PROFILES:
                raise ValueError(f"ranking entry {list(p)} is not a BoS profile")
        if len(set(ranking)) != len(ranking):
            raise ValueError("ranking lists a profile more than once")
        object.__setattr__(self, "wife_ranking", ranking)

    def wife_br(self, husband_action: str) -> str:
        return self.wife_br_to_opera if husband_action == OPERA else self.wife_br_to_football

    def husband_br(self, wife_action: str) -> str:
        return self.husband_br_to_opera if wife_action == OPERA else self.husband_br_to_football


def reported_equilibria(report: BosReport) -> list[Profile]:
    """Fixed points of the reported best-response maps."""
    return [
        (w, h) for w, h in BOS_PROFILES
        if report.husband_br(w) == h and report.wife_br(h) == w
    ]


def bos_protocol(report: BosReport) -> Profile | None:
    """The reported equilibrium the wife ranks highest.

    Returns None when the reports have no fixed point. Raises ValueError if
    a reported equilibrium is missing from the wife's ranking.
    """
    eqs = reported_equilibria(report)
    if not eqs:
        return None
    unranked = [p for p in eqs if p not in report.wife_ranking]
    if unranked:
        raise ValueError(f"malformed ranking: reported equilibria {unranked} are not ranked")
    return min(eqs, key=report.wife_ranking.index)


def _unique_br(game: NormalFormGame, agent: int, other: str) -> str:
    brs = best_responses(game, agent, {1 - agent: other})
    return brs[0]


def wife_preference_ranking(game: NormalFormGame) -> tuple[Profile, ...]:
    """All four profiles ordered by the wife's utility, best first (stable)."""
    return tuple(sorted(BOS_PROFILES, key=lambda p: -game.utility(p, 0)))


def truthful_report(game: NormalFormGame) -> BosReport:
    """Reports read off the true payoffs of a 2x2 Opera/Football game."""
    return BosReport(
        wife_br_to_opera=_unique_br(game, 0, OPERA),
        wife_br_to_football=_unique_br(game, 0, FOOTBALL),
        husband_br_to_opera=_unique_br(game, 1, OPERA),
        husband_br_to_football=_unique_br(game, 1, FOOTBALL),
        wife_ranking=wife_preference_ranking(game),
    )


def lying_husband_report(game: NormalFormGame) -> BosReport:
    """Truthful except that the husband claims Football answers Opera."""
    r = truthful_report(game)
    return BosReport(r.wife_br_to_opera, r.wife_br_to_football, FOOTBALL,
                     r.husband_br_to_football, r.wife_ranking)


def wife_report_space() -> list[tuple[str, str, tuple[Profile, ...]]]:
    """Every (br_to_opera, br_to_football, ranking) the wife could submit."""
    rankings = list(itertools.permutations(BOS_PROFILES))
    return [(o, f, r) for o in BOS_ACTIONS for f in BOS_ACTIONS for r in rankings]


def husband_report_space() -> list[tuple[str, str]]:
    """Husband reports considered: honest or lying about his answer to Opera."""
    return [(o, FOOTBALL) for o in BOS_ACTIONS]


def wife_truthfulness_check(game: NormalFormGame, no_outcome_utility: float = 0.0) -> dict | None:
    """Look for a wife misreport that beats truthful reporting.

    Every wife report is tried against every husband report in
    `husband_report_space`; an outcome with no reported equilibrium is worth
    `no_outcome_utility` (not taking part). Returns the first counterexample
    or None.
    """
    truth = truthful_report(game)

    def wife_value(report: BosReport) -> float:
        out = bos_protocol(report)
        return no_outcome_utility if out is None else game.utility(out, 0)

    for h_o, h_f in husband_report_space():
        honest = BosReport(truth.wife_br_to_opera, truth.wife_br_to_football,
                           h_o, h_f, truth.wife_ranking)
        base = wife_value(honest)
        for w_o, w_f, ranking in wife_report_space():
            alt = BosReport(w_o, w_f, h_o, h_f, ranking)
            v = wife_value(alt)
            if v > base + 1e-9:
                return {"husband_report": [h_o, h_f], "truthful_utility": base,
                        "misreport": [w_o, w_f, [list(p) for p in ranking]],
                        "misreport_utility": v}
    return None


HUSBAND_TYPES = ("bos", "football")


def make_bos_bayesian(a_w: float, b_w: float, a_h: float, b_h: float, c: float) -> BayesianGame:
    """BoS with a private husband type.

    Type "bos" carries the usual payoffs. Type "football" is the husband
    his lie pretends to be: Football is his best response to anything. The
    wife's payoffs never depend on his type. Uniform prior.
    """
    base = make_bos(a_w, b_w, a_h, b_h, c)
    football = {
        (OPERA, OPERA): c, (OPERA, FOOTBALL): b_h,
        (FOOTBALL, OPERA): c, (FOOTBALL, FOOTBALL): a_h,
    }

    def utility(s: Profile, t: Profile) -> tuple[float, float]:
        wife = base.utility(s, 0)
        husband = base.utility(s, 1) if t[1] == "bos" else football[s]
        return wife, husband

    return BayesianGame.from_function(base.agents, (BOS_ACTIONS,) * 2, (("W",), HUSBAND_TYPES), utility)


def bos_protocol_table(game: BayesianGame) -> ProtocolTable:
    """The best-response protocol with inputs = reported types."""
    wife_type = game.types[0][0]

    def rule(c: Profile, _x: str) -> Profile:
        realized = game.realization((wife_type, c[1]))
        out = bos_protocol(truthful_report(realized))
        if out is None:
            raise GameError(f"reported types {list(c)} have no equilibrium")
        return out

    return ProtocolTable.from_function(game.types, rule, reports_types=True)


# --- Vickrey -----------------------------------------------------------------


@dataclass(frozen=True)
class AuctionOutcome:
    winner: int
    price: float
    utilities: tuple[float, ...] | None = None


def vickrey_allocate(bids: Sequence[float]) -> AuctionOutcome:
    """Highest bid wins (lowest index on ties) and pays the second-highest bid."""
    bids = [float(b) for b in bids]
    if len(bids) < 2:
        raise ValueError(f"an auction needs at least two bids, got {len(bids)}")
    if any(b < 0 for b in bids):
        raise ValueError(f"bids must be non-negative: {bids}")
    winner = max(range(len(bids)), key=lambda i: (bids[i], -i))
    price = sorted(bids, reverse=True)[1]
    return AuctionOutcome(winner, price)


def vickrey_utilities(valuations: Sequence[float], bids: Sequence[float]) -> tuple[float, ...]:
    if len(valuations) != len(bids):
        raise ValueError(f"{len(valuations)} valuations but {len(bids)} bids")
    out = vickrey_allocate(bids)
    return tuple(
        float(v) - out.price if i == out.winner else 0.0 for i, v in enumerate(valuations)
    )


def first_price_utilities(valuations: Sequence[float], bids: Sequence[float]) -> tuple[float, ...]:
    """Same allocation, but the winner pays her own bid."""
    if len(valuations) != len(bids):
        raise ValueError(f"{len(valuations)} valuations but {len(bids)} bids")
    out = vickrey_allocate(bids)
    return tuple(
        float(v) - float(bids[i]) if i == out.winner else 0.0 for i, v in enumerate(valuations)
    )


@dataclass(frozen=True)
class TruthfulnessResult:
    ok: bool
    checked: int
    counterexample: dict | None = None


def vickrey_truthfulness_check(
    value_grid: Sequence[float],
    bid_grid: Sequence[float],
    n: int,
    utilities: Callable[[Sequence[float], Sequence[float]], Sequence[float]] = vickrey_utilities,
) -> TruthfulnessResult:
    """Exhaustively test that bidding one's valuation is weakly dominant.

    For every agent, valuation, opponent bid profile and alternative bid,
    truthful bidding must do at least as well. Valuations are bid
    truthfully, so each must also appear in `bid_grid`.
    """
    values = [float(v) for v in value_grid]
    grid = [float(b) for b in bid_grid]
    if not values or not grid:
        raise ValueError("value and bid grids must be non-empty")
    if n < 2:
        raise ValueError(f"need at least two bidders, got {n}")
    checked = 0
    for i in range(n):
        for v in values:
            for others in itertools.product(grid, repeat=n - 1):
                truthful = list(others[:i]) + [v] + list(others[i:])
                vals = [0.0] * n
                vals[i] = v
                u_truth = utilities(vals, truthful)[i]
                for b in grid:
                    alt = list(truthful)
                    alt[i] = b
                    u_alt = utilities(vals, alt)[i]
                    checked += 1
                    if u_alt > u_truth + 1e-9:
                        return TruthfulnessResult(False, checked, {
                            "agent": i, "valuation": v, "opponent_bids": list(others),
                            "bid": b, "truthful_utility": u_truth, "bid_utility": u_alt,
                        })
    return TruthfulnessResult(True, checked)


def _bid_rule_label(bids: Sequence[float]) -> str:
    return "bid[" + ",".join(f"{b:g}" for b in bids) + "]"


def vickrey_bid_rules(values: Sequence[float]) -> dict[str, tuple[float, ...]]:
    """Every map from valuation (by grid position) to a bid on the same grid."""
    values = [float(v) for v in values]
    return {
        _bid_rule_label(r): r for r in itertools.product(values, repeat=len(values))
    }


def make_vickrey_game(values: Sequence[float], n: int = 2) -> BayesianGame:
    """Second-price auction as a Bayesian game.

    Types are valuations on `values`; strategies are bidding rules (one bid
    per possible valuation), so an agent's realized utility depends on the
    others' types through their bids. Uniform prior.
    """
    values = [float(v) for v in values]
    rules = vickrey_bid_rules(values)
    type_labels = tuple(f"{v:g}" for v in values)
    index = {label: k for k, label in enumerate(type_labels)}

    def utility(s: Profile, t: Profile) -> tuple[float, ...]:
        vals = [values[index[ti]] for ti in t]
        bids = [rules[si][index[ti]] for si, ti in zip(s, t)]
        return vickrey_utilities(vals, bids)

    return BayesianGame.from_function(
        tuple(f"Bidder{i}" for i in range(n)), (tuple(rules),) * n, (type_labels,) * n, utility
    )


def vickrey_protocol_table(values: Sequence[float], n: int = 2) -> ProtocolTable:
    """Collect reported valuations; propose that each agent bid what she reported."""
    values = [float(v) for v in values]
    type_labels = tuple(f"{v:g}" for v in values)
    index = {label: k for k, label in enumerate(type_labels)}

    def rule(c: Profile, _x: str) -> Profile:
        return tuple(_bid_rule_label([values[index[ci]]] * len(values)) for ci in c)

    return ProtocolTable.from_function((type_labels,) * n, rule, reports_types=True)

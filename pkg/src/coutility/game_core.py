"""Finite games and brute-force solution concepts.

Profiles are tuples of action (or strategy / type) labels ordered by agent
index. Every enumeration runs in lexicographic order of action indices, so
results come back sorted and reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Sequence

TOL = 1e-9
MAX_PROFILES = 10**7

Profile = tuple[str, ...]


class GameError(ValueError):
    """Malformed game description."""


class GameSizeError(GameError):
    """The game is too large to enumerate."""


def _label_sets(sets: Sequence[Iterable[str]], what: str) -> tuple[tuple[str, ...], ...]:
    out = tuple(tuple(str(x) for x in s) for s in sets)
    for i, s in enumerate(out):
        if not s:
            raise GameError(f"agent {i} has an empty {what} set")
        if len(set(s)) != len(s):
            raise GameError(f"agent {i} has duplicate {what} labels: {list(s)}")
    return out


def check_size(*set_groups: Sequence[Sequence[str]]) -> int:
    """Return the number of joint profiles, refusing anything above MAX_PROFILES."""
    count = 1
    for sets in set_groups:
        for s in sets:
            count *= len(s)
    if count > MAX_PROFILES:
        raise GameSizeError(
            f"{count} profiles exceeds the enumeration limit of {MAX_PROFILES}"
        )
    return count


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= TOL


@dataclass(frozen=True, eq=False)
class NormalFormGame:
    """Finite game with publicly known utilities."""

    agents: tuple[str, ...]
    actions: tuple[tuple[str, ...], ...]
    payoffs: Mapping[Profile, tuple[float, ...]]

    def __post_init__(self):
        agents = tuple(str(a) for a in self.agents)
        if len(agents) < 2:
            raise GameError(f"a game needs at least 2 agents, got {len(agents)}")
        actions = _label_sets(self.actions, "action")
        if len(actions) != len(agents):
            raise GameError(
                f"{len(agents)} agents but {len(actions)} action sets"
            )
        check_size(actions)
        payoffs = {}
        for profile, vector in self.payoffs.items():
            profile = tuple(profile)
            _check_profile(profile, actions, "payoff profile")
            vector = tuple(float(u) for u in vector)
            if len(vector) != len(agents):
                raise GameError(
                    f"payoff vector for {list(profile)} has length {len(vector)}, "
                    f"expected {len(agents)}"
                )
            payoffs[profile] = vector
        for profile in itertools.product(*actions):
            if profile not in payoffs:
                raise GameError(f"missing payoff for profile {list(profile)}")
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "payoffs", payoffs)

    @classmethod
    def from_function(
        cls,
        agents: Sequence[str],
        actions: Sequence[Sequence[str]],
        payoff: Callable[[Profile], Sequence[float]],
    ) -> "NormalFormGame":
        actions = _label_sets(actions, "action")
        check_size(actions)
        return cls(tuple(agents), actions, {p: tuple(payoff(p)) for p in itertools.product(*actions)})

    @property
    def n(self) -> int:
        return len(self.agents)

    def profiles(self) -> Iterator[Profile]:
        return itertools.product(*self.actions)

    def payoff(self, profile: Sequence[str]) -> tuple[float, ...]:
        try:
            return self.payoffs[tuple(profile)]
        except KeyError:
            raise GameError(f"not a profile of this game: {list(profile)}") from None

    def utility(self, profile: Sequence[str], agent: int) -> float:
        return self.payoff(profile)[agent]

    def __eq__(self, other):
        if not isinstance(other, NormalFormGame):
            return NotImplemented
        return (
            self.agents == other.agents
            and self.actions == other.actions
            and self.payoffs == other.payoffs
        )

    __hash__ = None


def _check_profile(profile: Sequence[str], sets: Sequence[Sequence[str]], what: str) -> None:
    if len(profile) != len(sets):
        raise GameError(f"{what} {list(profile)} has {len(profile)} entries, expected {len(sets)}")
    for i, (label, allowed) in enumerate(zip(profile, sets)):
        if label not in allowed:
            raise GameError(f"{what} {list(profile)}: {label!r} is not valid for agent {i}")


def _check_agent(game: NormalFormGame, agent: int) -> None:
    if not isinstance(agent, int) or not 0 <= agent < game.n:
        raise GameError(f"unknown agent index {agent!r} (game has {game.n} agents)")


def _with(profile: Sequence[str], agent: int, action: str) -> Profile:
    p = list(profile)
    p[agent] = action
    return tuple(p)


def _opponent_profiles(game: NormalFormGame, agent: int) -> Iterator[Profile]:
    """Full profiles with `agent`'s slot set to the placeholder of her first action."""
    sets = list(game.actions)
    sets[agent] = (game.actions[agent][0],)
    return itertools.product(*sets)


def best_responses(
    game: NormalFormGame, agent: int, opponents: Mapping[int, str]
) -> tuple[str, ...]:
    """Actions of `agent` maximizing her utility against fixed opponent actions.

    `opponents` maps every other agent index to an action label. Ties within
    TOL of the maximum are all returned, in action order.
    """
    _check_agent(game, agent)
    if agent in opponents:
        raise GameError(f"opponent profile must not fix the responding agent {agent}")
    missing = [i for i in range(game.n) if i != agent and i not in opponents]
    if missing:
        raise GameError(f"opponent profile is missing agents {missing}")
    extra = [i for i in opponents if not (isinstance(i, int) and 0 <= i < game.n)]
    if extra:
        raise GameError(f"opponent profile names unknown agents {extra}")
    base = [opponents.get(i, game.actions[agent][0]) for i in range(game.n)]
    _check_profile(base, game.actions, "opponent profile")
    values = [game.utility(_with(base, agent, a), agent) for a in game.actions[agent]]
    best = max(values)
    return tuple(a for a, v in zip(game.actions[agent], values) if v >= best - TOL)


def profitable_deviation(
    game: NormalFormGame, profile: Sequence[str]
) -> tuple[int, str, float] | None:
    """First strictly profitable unilateral deviation from `profile`, or None.

    Returns (agent, action, gain) scanning agents and actions in index order.
    """
    profile = tuple(profile)
    _check_profile(profile, game.actions, "profile")
    current = game.payoff(profile)
    for i in range(game.n):
        for a in game.actions[i]:
            if a == profile[i]:
                continue
            gain = game.utility(_with(profile, i, a), i) - current[i]
            if gain > TOL:
                return i, a, gain
    return None


def is_pure_nash(game: NormalFormGame, profile: Sequence[str]) -> bool:
    return profitable_deviation(game, profile) is None


def pure_nash_equilibria(game: NormalFormGame) -> list[Profile]:
    """All pure-strategy Nash equilibria, by exhaustive enumeration."""
    return [p for p in game.profiles() if profitable_deviation(game, p) is None]


def dominant_strategies(game: NormalFormGame, agent: int, mode: str = "weak") -> tuple[str, ...]:
    """Actions of `agent` that dominate every alternative.

    strict: strictly better against every opponent profile.
    weak: never worse, and strictly better somewhere, against each alternative.
    """
    _check_agent(game, agent)
    if mode not in ("weak", "strict"):
        raise ValueError(f"mode must be 'weak' or 'strict', got {mode!r}")
    own = game.actions[agent]
    contexts = list(_opponent_profiles(game, agent))
    table = {
        a: [game.utility(_with(ctx, agent, a), agent) for ctx in contexts] for a in own
    }
    result = []
    for a in own:
        ok = True
        for b in own:
            if b == a:
                continue
            diffs = [x - y for x, y in zip(table[a], table[b])]
            if mode == "strict":
                ok = all(d > TOL for d in diffs)
            else:
                ok = all(d >= -TOL for d in diffs) and any(d > TOL for d in diffs)
            if not ok:
                break
        if ok:
            result.append(a)
    return tuple(result)


def make_tcp_game() -> NormalFormGame:
    """Bandwidth game between two TCP senders, honest or dishonest."""
    table = {
        ("Honest", "Honest"): (2, 2),
        ("Honest", "Dishonest"): (1, 3),
        ("Dishonest", "Honest"): (3, 1),
        ("Dishonest", "Dishonest"): (1, 1),
    }
    return NormalFormGame(("Alice", "Bob"), (("Honest", "Dishonest"),) * 2, table)


def make_bos(a_w: float, b_w: float, a_h: float, b_h: float, c: float) -> NormalFormGame:
    """Battle of the Sexes: wife (row) prefers opera, husband (column) football."""
    if not a_w > b_w:
        raise GameError(f"BoS requires a_W > b_W, got a_W={a_w}, b_W={b_w}")
    if not b_w > c:
        raise GameError(f"BoS requires b_W > c, got b_W={b_w}, c={c}")
    if not a_h > b_h:
        raise GameError(f"BoS requires a_H > b_H, got a_H={a_h}, b_H={b_h}")
    if not b_h > c:
        raise GameError(f"BoS requires b_H > c, got b_H={b_h}, c={c}")
    table = {
        ("Opera", "Opera"): (a_w, b_h),
        ("Opera", "Football"): (c, c),
        ("Football", "Opera"): (c, c),
        ("Football", "Football"): (b_w, a_h),
    }
    return NormalFormGame(("Wife", "Husband"), (("Opera", "Football"),) * 2, table)


def affine_transform(
    game: NormalFormGame,
    scale: float | Sequence[float],
    offset: float | Sequence[float] = 0.0,
) -> NormalFormGame:
    """Apply u_i -> scale_i * u_i + offset_i to every profile."""
    scales = _per_agent(scale, game.n, "scale")
    offsets = _per_agent(offset, game.n, "offset")
    for i, s in enumerate(scales):
        if not s > 0 or not math.isfinite(s):
            raise GameError(f"scale for agent {i} must be a positive finite number, got {s}")
    payoffs = {
        p: tuple(s * u + o for u, s, o in zip(v, scales, offsets))
        for p, v in game.payoffs.items()
    }
    return NormalFormGame(game.agents, game.actions, payoffs)


def _per_agent(value, n: int, name: str) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),) * n
    values = tuple(float(v) for v in value)
    if len(values) != n:
        raise GameError(f"{name} needs {n} entries, got {len(values)}")
    return values


@dataclass(frozen=True, eq=False)
class BayesianGame:
    """Finite game with private types and a common prior over type profiles.

    `utilities` maps (strategy profile, type profile) to a per-agent vector.
    A game whose type sets are all singletons is a game with publicly known
    utilities; see `from_normal_form`.
    """

    agents: tuple[str, ...]
    strategies: tuple[tuple[str, ...], ...]
    types: tuple[tuple[str, ...], ...]
    prior: Mapping[Profile, float]
    utilities: Mapping[tuple[Profile, Profile], tuple[float, ...]]

    def __post_init__(self):
        agents = tuple(str(a) for a in self.agents)
        n = len(agents)
        if n < 2:
            raise GameError(f"a game needs at least 2 agents, got {n}")
        strategies = _label_sets(self.strategies, "strategy")
        types = _label_sets(self.types, "type")
        if len(strategies) != n or len(types) != n:
            raise GameError(
                f"{n} agents but {len(strategies)} strategy sets and {len(types)} type sets"
            )
        check_size(strategies, types)
        prior = {}
        for t, p in self.prior.items():
            t = tuple(t)
            _check_profile(t, types, "prior type profile")
            p = float(p)
            if p < 0:
                raise GameError(f"negative prior probability {p} for {list(t)}")
            prior[t] = p
        total = math.fsum(prior.values())
        if abs(total - 1.0) > TOL:
            raise GameError(f"prior sums to {total}, expected 1")
        for t in itertools.product(*types):
            prior.setdefault(t, 0.0)
        utilities = {}
        for (s, t), vector in self.utilities.items():
            s, t = tuple(s), tuple(t)
            _check_profile(s, strategies, "strategy profile")
            _check_profile(t, types, "type profile")
            vector = tuple(float(u) for u in vector)
            if len(vector) != n:
                raise GameError(
                    f"utility vector for {list(s)} / {list(t)} has length {len(vector)}, expected {n}"
                )
            utilities[s, t] = vector
        for s in itertools.product(*strategies):
            for t in itertools.product(*types):
                if (s, t) not in utilities:
                    raise GameError(f"missing utilities for strategies {list(s)} and types {list(t)}")
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "strategies", strategies)
        object.__setattr__(self, "types", types)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "utilities", utilities)

    @classmethod
    def from_function(
        cls,
        agents: Sequence[str],
        strategies: Sequence[Sequence[str]],
        types: Sequence[Sequence[str]],
        utility: Callable[[Profile, Profile], Sequence[float]],
        prior: Mapping[Profile, float] | None = None,
    ) -> "BayesianGame":
        strategies = _label_sets(strategies, "strategy")
        types = _label_sets(types, "type")
        check_size(strategies, types)
        type_profiles = list(itertools.product(*types))
        if prior is None:
            prior = {t: 1.0 / len(type_profiles) for t in type_profiles}
        table = {
            (s, t): tuple(utility(s, t))
            for s in itertools.product(*strategies)
            for t in type_profiles
        }
        return cls(tuple(agents), strategies, types, prior, table)

    @classmethod
    def from_normal_form(cls, game: NormalFormGame, type_label: str = "-") -> "BayesianGame":
        t = (type_label,) * game.n
        return cls(
            game.agents,
            game.actions,
            ((type_label,),) * game.n,
            {t: 1.0},
            {(s, t): v for s, v in game.payoffs.items()},
        )

    @property
    def n(self) -> int:
        return len(self.agents)

    def strategy_profiles(self) -> Iterator[Profile]:
        return itertools.product(*self.strategies)

    def type_profiles(self) -> Iterator[Profile]:
        return itertools.product(*self.types)

    def payoff(self, strategies: Sequence[str], types: Sequence[str]) -> tuple[float, ...]:
        try:
            return self.utilities[tuple(strategies), tuple(types)]
        except KeyError:
            raise GameError(
                f"not a (strategy, type) profile of this game: {list(strategies)}, {list(types)}"
            ) from None

    def utility(self, strategies: Sequence[str], types: Sequence[str], agent: int) -> float:
        return self.payoff(strategies, types)[agent]

    def realization(self, types: Sequence[str]) -> NormalFormGame:
        """The complete-information game once `types` is known."""
        t = tuple(types)
        _check_profile(t, self.types, "type profile")
        return NormalFormGame(
            self.agents,
            self.strategies,
            {s: self.utilities[s, t] for s in self.strategy_profiles()},
        )

    def __eq__(self, other):
        if not isinstance(other, BayesianGame):
            return NotImplemented
        return (
            self.agents == other.agents
            and self.strategies == other.strategies
            and self.types == other.types
            and self.prior == other.prior
            and self.utilities == other.utilities
        )

    __hash__ = None

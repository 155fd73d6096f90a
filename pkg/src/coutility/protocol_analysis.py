"""Exhaustive classification of protocols over finite Bayesian games.

A protocol is a finite table from (input profile, auxiliary input) to a
strategy profile. The checks below walk that table against every type
profile of the game:

* self-enforcing: every output is a pure equilibrium of the realized game
  and gives every agent positive utility (ex post, or in expectation over
  the prior);
* coordination: self-enforcing, and some agent's utility moves when other
  agents change what they report;
* co-utility-amenable (a property of the game alone): no agent's utility
  depends on another agent's type;
* strictly / relaxedly co-utile: a self-enforcing, non-coordination
  protocol on an amenable two-agent game whose output gives both / at least
  one agent her maximum utility over all strategy profiles.

Witnesses are plain dicts that can be replayed through the game's utility
table to reproduce the violation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Sequence

from .game_core import TOL, BayesianGame, Profile, check_size, profitable_deviation

POSITIVITY_MODES = ("ex_post", "expected")

MAXIMALITY_NOTE = (
    "co-utility maximality compares the protocol output against every "
    "alternative strategy profile (joint deviations), per agent"
)


class ProtocolError(ValueError):
    """Malformed protocol table."""


class DomainMismatchError(ProtocolError):
    """Protocol and game do not fit together."""


class PreconditionError(ValueError):
    """A classification was requested on an instance it does not apply to."""


class AgentCountError(PreconditionError):
    pass


class NotAmenableError(PreconditionError):
    pass


class NotSelfEnforcingError(PreconditionError):
    pass


class CoordinationProtocolError(PreconditionError):
    pass


@dataclass(frozen=True, eq=False)
class ProtocolTable:
    """Finite protocol: (input profile, aux) -> strategy profile.

    With `reports_types` set, inputs are the agents' reported types and
    must coincide with the game's type sets; truthful play then means each
    agent reports her own type.
    """

    inputs: tuple[tuple[str, ...], ...]
    mapping: Mapping[tuple[Profile, str], Profile]
    aux: tuple[str, ...] = ("none",)
    reports_types: bool = False

    def __post_init__(self):
        inputs = tuple(tuple(str(c) for c in s) for s in self.inputs)
        for i, s in enumerate(inputs):
            if not s:
                raise ProtocolError(f"agent {i} has an empty input domain")
            if len(set(s)) != len(s):
                raise ProtocolError(f"agent {i} has duplicate input labels")
        aux = tuple(str(x) for x in self.aux)
        if not aux or len(set(aux)) != len(aux):
            raise ProtocolError("aux domain must be a non-empty list of distinct labels")
        check_size(inputs, [aux])
        mapping = {}
        for (c, x), out in self.mapping.items():
            c, out = tuple(c), tuple(out)
            if len(c) != len(inputs) or any(ci not in s for ci, s in zip(c, inputs)):
                raise ProtocolError(f"input profile {list(c)} is outside the input domains")
            if x not in aux:
                raise ProtocolError(f"aux input {x!r} is outside the aux domain")
            if len(out) != len(inputs):
                raise ProtocolError(f"output {list(out)} has the wrong number of entries")
            mapping[c, x] = out
        for c in itertools.product(*inputs):
            for x in aux:
                if (c, x) not in mapping:
                    raise ProtocolError(f"no output for inputs {list(c)} with aux {x!r}")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "aux", aux)
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def from_function(
        cls,
        inputs: Sequence[Sequence[str]],
        rule: Callable[[Profile, str], Sequence[str]],
        aux: Sequence[str] = ("none",),
        reports_types: bool = False,
    ) -> "ProtocolTable":
        inputs = tuple(tuple(s) for s in inputs)
        aux = tuple(aux)
        check_size(inputs, [aux])
        mapping = {
            (c, x): tuple(rule(c, x)) for c in itertools.product(*inputs) for x in aux
        }
        return cls(inputs, mapping, aux, reports_types)

    @classmethod
    def constant(cls, output: Sequence[str]) -> "ProtocolTable":
        """Protocol that ignores its inputs and always proposes `output`."""
        n = len(output)
        return cls((("none",),) * n, {(("none",) * n, "none"): tuple(output)})

    @property
    def n(self) -> int:
        return len(self.inputs)

    def input_profiles(self) -> Iterator[Profile]:
        return itertools.product(*self.inputs)

    def output(self, inputs: Sequence[str], aux: str = "none") -> Profile:
        try:
            return self.mapping[tuple(inputs), aux]
        except KeyError:
            raise ProtocolError(f"no output for inputs {list(inputs)} with aux {aux!r}") from None

    def __eq__(self, other):
        if not isinstance(other, ProtocolTable):
            return NotImplemented
        return (
            self.inputs == other.inputs
            and self.aux == other.aux
            and self.mapping == other.mapping
            and self.reports_types == other.reports_types
        )

    __hash__ = None


@dataclass(frozen=True)
class Verdict:
    """Outcome of one check. `holds` is None when the check does not apply."""

    holds: bool | None
    witness: dict | None = None

    def to_dict(self) -> dict:
        return {"holds": self.holds, "witness": self.witness}


@dataclass(frozen=True)
class CoutilityResult:
    level: str
    maximal: tuple[bool, ...]
    witnesses: tuple[dict | None, ...]
    note: str = MAXIMALITY_NOTE


@dataclass(frozen=True)
class ClassificationReport:
    self_enforcing: Verdict
    coordination: Verdict
    amenable: Verdict
    coutility: str
    maximal: tuple[bool, ...] | None = None
    positivity: str = "ex_post"
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "self_enforcing": self.self_enforcing.to_dict(),
            "coordination": self.coordination.to_dict(),
            "amenable": self.amenable.to_dict(),
            "coutility": self.coutility,
            "maximal": None if self.maximal is None else list(self.maximal),
            "positivity": self.positivity,
            "notes": list(self.notes),
        }


def _check_domains(protocol: ProtocolTable, game: BayesianGame) -> None:
    if protocol.n != game.n:
        raise DomainMismatchError(
            f"protocol has {protocol.n} agents, game has {game.n}"
        )
    if protocol.reports_types and protocol.inputs != game.types:
        raise DomainMismatchError(
            "protocol inputs are declared to be reported types but differ from the game's type sets"
        )
    for (c, x), out in protocol.mapping.items():
        for i, (s, allowed) in enumerate(zip(out, game.strategies)):
            if s not in allowed:
                raise DomainMismatchError(
                    f"output {list(out)} for inputs {list(c)} / aux {x!r}: "
                    f"{s!r} is not a strategy of agent {i}"
                )


def _runs(protocol: ProtocolTable, game: BayesianGame) -> Iterator[tuple[Profile, str, Profile]]:
    """(inputs, aux, types) triples the protocol must handle, in enumeration order."""
    if protocol.reports_types:
        for x in protocol.aux:
            for t in game.type_profiles():
                yield t, x, t
    else:
        for c in protocol.input_profiles():
            for x in protocol.aux:
                for t in game.type_profiles():
                    yield c, x, t


def _run_dict(c: Profile, x: str, t: Profile, out: Profile) -> dict:
    return {"inputs": list(c), "aux": x, "types": list(t), "output": list(out)}


def check_self_enforcing(
    protocol: ProtocolTable, game: BayesianGame, positivity: str = "ex_post"
) -> Verdict:
    """Every output is an equilibrium with positive utility for everyone.

    Equilibrium is checked ex post, per type realization. Positivity is
    checked per realization (`ex_post`) or as expected utility over the
    prior for each input profile (`expected`); with reported types the
    expectation runs over truthful reports.
    """
    if positivity not in POSITIVITY_MODES:
        raise ValueError(f"positivity must be one of {POSITIVITY_MODES}, got {positivity!r}")
    _check_domains(protocol, game)
    realizations: dict[Profile, object] = {}
    for c, x, t in _runs(protocol, game):
        out = protocol.output(c, x)
        if t not in realizations:
            realizations[t] = game.realization(t)
        dev = profitable_deviation(realizations[t], out)
        if dev is not None:
            agent, action, _gain = dev
            alt = list(out)
            alt[agent] = action
            return Verdict(False, {
                "kind": "deviation",
                **_run_dict(c, x, t, out),
                "agent": agent,
                "deviation": action,
                "utility": game.utility(out, t, agent),
                "deviation_utility": game.utility(alt, t, agent),
            })
        if positivity == "ex_post":
            for i, u in enumerate(game.payoff(out, t)):
                if not u > TOL:
                    return Verdict(False, {
                        "kind": "non_positive", **_run_dict(c, x, t, out),
                        "agent": i, "utility": u,
                    })
    if positivity == "expected":
        witness = _expected_positivity(protocol, game)
        if witness is not None:
            return Verdict(False, witness)
    return Verdict(True)


def _expected_positivity(protocol: ProtocolTable, game: BayesianGame) -> dict | None:
    if protocol.reports_types:
        groups = [(None, x) for x in protocol.aux]
    else:
        groups = [(c, x) for c in protocol.input_profiles() for x in protocol.aux]
    for c, x in groups:
        for i in range(game.n):
            terms = []
            for t in game.type_profiles():
                inputs = t if c is None else c
                terms.append(game.prior[t] * game.utility(protocol.output(inputs, x), t, i))
            expected = math.fsum(terms)
            if not expected > TOL:
                return {
                    "kind": "non_positive_expected",
                    "inputs": "truthful" if c is None else list(c),
                    "aux": x, "agent": i, "expected_utility": expected,
                }
    return None


def is_coordination(
    protocol: ProtocolTable, game: BayesianGame, positivity: str = "ex_post"
) -> Verdict:
    """Self-enforcing protocol where reports by others move some agent's utility.

    Returns holds=None (not applicable) when the protocol is not
    self-enforcing. The witness names the true types, the affected agent j,
    the reference inputs and the misreported inputs; the two input profiles
    agree on agent j's own entry.
    """
    se = check_self_enforcing(protocol, game, positivity)
    if not se.holds:
        return Verdict(None, {"kind": "not_self_enforcing", "cause": se.witness})
    for t in game.type_profiles():
        bases = [t] if protocol.reports_types else list(protocol.input_profiles())
        for c in bases:
            for x in protocol.aux:
                out = protocol.output(c, x)
                for j in range(game.n):
                    u = game.utility(out, t, j)
                    for alt in protocol.input_profiles():
                        if alt == c or alt[j] != c[j]:
                            continue
                        alt_out = protocol.output(alt, x)
                        u_alt = game.utility(alt_out, t, j)
                        if abs(u_alt - u) > TOL:
                            return Verdict(True, {
                                "kind": "misreport",
                                "types": list(t), "aux": x, "agent": j,
                                "inputs": list(c), "output": list(out), "utility": u,
                                "misreport": list(alt), "misreport_output": list(alt_out),
                                "misreport_utility": u_alt,
                                "misreporting_agents": [i for i in range(game.n) if alt[i] != c[i]],
                            })
    return Verdict(False)


def is_coutility_amenable(game: BayesianGame) -> Verdict:
    """No agent's utility depends on any other agent's type."""
    for s in game.strategy_profiles():
        for t in game.type_profiles():
            base = game.payoff(s, t)
            for i in range(game.n):
                for ti in game.types[i]:
                    if ti == t[i]:
                        continue
                    t2 = t[:i] + (ti,) + t[i + 1:]
                    other = game.payoff(s, t2)
                    for j in range(game.n):
                        if j != i and abs(other[j] - base[j]) > TOL:
                            return Verdict(False, {
                                "kind": "type_dependence",
                                "strategies": list(s), "types": list(t),
                                "changed_agent": i, "changed_type": ti,
                                "affected_agent": j,
                                "utility": base[j], "changed_utility": other[j],
                            })
    return Verdict(True)


def _maximality(protocol: ProtocolTable, game: BayesianGame, agent: int) -> dict | None:
    best: dict[Profile, float] = {}
    for c, x, t in _runs(protocol, game):
        if t not in best:
            best[t] = max(game.utility(s, t, agent) for s in game.strategy_profiles())
        out = protocol.output(c, x)
        u = game.utility(out, t, agent)
        if u < best[t] - TOL:
            better = next(
                s for s in game.strategy_profiles()
                if game.utility(s, t, agent) >= best[t] - TOL
            )
            return {
                "kind": "not_maximal", **_run_dict(c, x, t, out), "agent": agent,
                "utility": u, "better_profile": list(better), "better_utility": best[t],
            }
    return None


def classify_coutility(
    protocol: ProtocolTable, game: BayesianGame, positivity: str = "ex_post"
) -> CoutilityResult:
    """strict / relaxed / none for a two-agent protocol.

    Raises a PreconditionError subclass when the game has other than two
    agents, is not amenable, or the protocol is not self-enforcing or is a
    coordination protocol.
    """
    if game.n != 2:
        raise AgentCountError(f"co-utility is defined for two agents, game has {game.n}")
    _check_domains(protocol, game)
    amen = is_coutility_amenable(game)
    if not amen.holds:
        raise NotAmenableError(f"game is not co-utility-amenable: {amen.witness}")
    se = check_self_enforcing(protocol, game, positivity)
    if not se.holds:
        raise NotSelfEnforcingError(f"protocol is not self-enforcing: {se.witness}")
    coord = is_coordination(protocol, game, positivity)
    if coord.holds:
        raise CoordinationProtocolError(f"protocol is a coordination protocol: {coord.witness}")
    witnesses = tuple(_maximality(protocol, game, i) for i in range(game.n))
    maximal = tuple(w is None for w in witnesses)
    if all(maximal):
        level = "strict"
    elif any(maximal):
        level = "relaxed"
    else:
        level = "none"
    return CoutilityResult(level, maximal, witnesses)


def classify(
    protocol: ProtocolTable, game: BayesianGame, positivity: str = "ex_post"
) -> ClassificationReport:
    """Run every check and collect the results without raising on verdicts."""
    _check_domains(protocol, game)
    se = check_self_enforcing(protocol, game, positivity)
    coord = is_coordination(protocol, game, positivity)
    amen = is_coutility_amenable(game)
    notes = []
    level, maximal = "none", None
    try:
        res = classify_coutility(protocol, game, positivity)
    except PreconditionError as exc:
        notes.append(f"co-utility not applicable: {type(exc).__name__}")
    else:
        level, maximal = res.level, res.maximal
        notes.append(res.note)
    return ClassificationReport(se, coord, amen, level, maximal, positivity, tuple(notes))

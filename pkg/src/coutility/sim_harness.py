"""Seeded n-agent simulation of repeated two-party anonymous-query games.

Each step draws an initiator and a query category. The initiator either
submits directly or forwards to a peer drawn uniformly from the other
agents, who accepts or rejects. A rejected query stays pending (with less
time left) and is retried when the same agent draws the same category
again.

Random draws come from one `random.Random` (MT19937) stream in a fixed
order: per-agent alphas (if drawn), per-agent category permutations (if the
workload is skewed), then for every step the initiator, the category, and,
only when the query is forwarded, the responder.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import random
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Mapping, Sequence, TextIO

from .anon_query import (
    AgentState,
    InitiatorAction,
    PendingQuery,
    ResponderAction,
    apply_transition,
    entropy,
    initiator_decision,
    responder_decision,
)

RNG_ALGORITHM = "MT19937 (Python random.Random, seeded with an integer)"
WORKLOAD_NOTE = (
    "arrival process and query distribution are simulator conventions: "
    "uniform initiator per step, category uniform or power-law over a "
    "per-agent permutation"
)

POLICIES = (
    "Protocol1",
    "AlwaysDirect",
    "AlwaysForward",
    "AlwaysAcceptResponder",
    "AlwaysRejectResponder",
)


class ScenarioError(ValueError):
    """Invalid scenario field."""


@dataclass(frozen=True)
class Scenario:
    """Simulation input.

    alpha: a constant, or {"low": a, "high": b} to draw each agent's alpha
    uniformly. workload: {"kind": "uniform"} or {"kind": "powerlaw",
    "exponent": s}. strategy: one policy name for every agent, or a list
    with one per agent. initial_time defaults to 10 * timeout.
    """

    agent_count: int = 10
    query_universe_size: int = 16
    horizon: int = 2000
    timeout: float = 1.0
    alpha: float | Mapping[str, float] = 0.1
    workload: Mapping = field(default_factory=lambda: {"kind": "powerlaw", "exponent": 1.5})
    strategy: str | tuple[str, ...] = "Protocol1"
    seed: int = 0
    initial_time: float | None = None

    def __post_init__(self):
        if not isinstance(self.strategy, str):
            object.__setattr__(self, "strategy", tuple(self.strategy))
        if isinstance(self.alpha, Mapping):
            object.__setattr__(self, "alpha", dict(self.alpha))
        object.__setattr__(self, "workload", dict(self.workload))
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.agent_count, int) or self.agent_count < 2:
            raise ScenarioError(f"agent_count must be an integer >= 2, got {self.agent_count!r}")
        if not isinstance(self.query_universe_size, int) or self.query_universe_size < 1:
            raise ScenarioError(
                f"query_universe_size must be an integer >= 1, got {self.query_universe_size!r}"
            )
        if not isinstance(self.horizon, int) or self.horizon < 0:
            raise ScenarioError(f"horizon must be an integer >= 0, got {self.horizon!r}")
        if not (isinstance(self.timeout, (int, float)) and self.timeout > 0):
            raise ScenarioError(f"timeout must be > 0, got {self.timeout!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ScenarioError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.initial_time is not None and not isinstance(self.initial_time, (int, float)):
            raise ScenarioError(f"initial_time must be a number, got {self.initial_time!r}")
        if isinstance(self.alpha, dict):
            lo, hi = self.alpha.get("low"), self.alpha.get("high")
            if set(self.alpha) != {"low", "high"} or not (0 <= lo <= hi):
                raise ScenarioError(f"alpha range must be {{low, high}} with 0 <= low <= high, got {self.alpha}")
        elif not (isinstance(self.alpha, (int, float)) and self.alpha >= 0):
            raise ScenarioError(f"alpha must be >= 0, got {self.alpha!r}")
        kind = self.workload.get("kind")
        if kind == "powerlaw":
            s = self.workload.get("exponent")
            if not (isinstance(s, (int, float)) and s > 0):
                raise ScenarioError(f"workload exponent must be > 0, got {s!r}")
        elif kind != "uniform":
            raise ScenarioError(f"workload kind must be 'uniform' or 'powerlaw', got {kind!r}")
        policies = (self.strategy,) if isinstance(self.strategy, str) else self.strategy
        if not isinstance(self.strategy, str) and len(policies) != self.agent_count:
            raise ScenarioError(
                f"strategy lists {len(policies)} policies for {self.agent_count} agents"
            )
        for p in policies:
            if p not in POLICIES:
                raise ScenarioError(f"unknown strategy {p!r}; expected one of {POLICIES}")

    @property
    def start_time(self) -> float:
        return 10 * self.timeout if self.initial_time is None else float(self.initial_time)

    def policy(self, agent: int) -> str:
        return self.strategy if isinstance(self.strategy, str) else self.strategy[agent]

    @property
    def policy_name(self) -> str:
        if isinstance(self.strategy, str):
            return self.strategy
        names = set(self.strategy)
        return names.pop() if len(names) == 1 else "mixed"

    def categories(self) -> list[str]:
        width = len(str(self.query_universe_size - 1))
        return [f"c{k:0{width}d}" for k in range(self.query_universe_size)]

    def to_dict(self) -> dict:
        d = asdict(self)
        if isinstance(self.strategy, tuple):
            d["strategy"] = list(self.strategy)
        return d

    @classmethod
    def from_dict(cls, data: Mapping) -> "Scenario":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ScenarioError(f"unknown scenario fields: {sorted(unknown)}")
        return cls(**dict(data))


@dataclass(frozen=True)
class EventRecord:
    step: int
    initiator: int
    responder: int | None
    category: str
    time_left: float
    initiator_action: str
    responder_action: str
    initiator_utility: float
    responder_utility: float | None
    initiator_entropy: float
    responder_entropy: float | None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "EventRecord":
        return cls(**dict(data))


@dataclass
class Metrics:
    trajectories: dict[int, list[tuple[int, float]]]
    final_entropies: list[float]
    issued: int
    answered: int
    answered_fraction: float | None
    mean_delay: float | None
    per_policy: dict[str, dict]
    csv_rows: list[tuple[int, int, float, int]]

    @property
    def mean_final_entropy(self) -> float:
        return math.fsum(self.final_entropies) / len(self.final_entropies)


@dataclass
class SimulationResult:
    scenario: Scenario
    alphas: list[float]
    states: list[AgentState]
    events: list[EventRecord]
    metrics: Metrics

    def summary(self) -> dict:
        return {
            "policy": self.scenario.policy_name,
            "mean_final_entropy": self.metrics.mean_final_entropy,
            "answered_fraction": self.metrics.answered_fraction,
            "mean_delay": self.metrics.mean_delay,
            "issued": self.metrics.issued,
            "answered": self.metrics.answered,
            "per_policy": self.metrics.per_policy,
            "seed": self.scenario.seed,
            "rng_algorithm": RNG_ALGORITHM,
            "workload_note": WORKLOAD_NOTE,
        }


# --- policies -----------------------------------------------------------------


def decide_initiator(policy: str, state: AgentState, q: str, timeout: float) -> InitiatorAction:
    if policy == "AlwaysDirect":
        return InitiatorAction.SUBMIT_DIRECT
    if policy == "AlwaysForward":
        return InitiatorAction.FORWARD
    return initiator_decision(state, q, timeout)


def decide_responder(policy: str, state: AgentState, q: str) -> ResponderAction:
    if policy == "AlwaysAcceptResponder":
        return ResponderAction.ACCEPT
    if policy == "AlwaysRejectResponder":
        return ResponderAction.REJECT
    return responder_decision(state, q)


# --- simulation -----------------------------------------------------------------


class _Workload:
    def __init__(self, scenario: Scenario, rng: random.Random):
        self.categories = scenario.categories()
        self.n = scenario.agent_count
        kind = scenario.workload["kind"]
        if kind == "powerlaw":
            s = float(scenario.workload["exponent"])
            weights = [(k + 1) ** -s for k in range(len(self.categories))]
            self.cum = list(itertools.accumulate(weights))
            self.orders = []
            for _ in range(self.n):
                order = list(self.categories)
                rng.shuffle(order)
                self.orders.append(order)
        else:
            self.cum = None
            self.orders = [self.categories] * self.n

    def draw(self, rng: random.Random) -> tuple[int, str]:
        agent = rng.randrange(self.n)
        if self.cum is None:
            rank = rng.randrange(len(self.categories))
        else:
            rank = rng.choices(range(len(self.categories)), cum_weights=self.cum)[0]
        return agent, self.orders[agent][rank]


def _setup(scenario: Scenario, rng: random.Random) -> tuple[list[float], _Workload]:
    if isinstance(scenario.alpha, dict):
        alphas = [rng.uniform(scenario.alpha["low"], scenario.alpha["high"])
                  for _ in range(scenario.agent_count)]
    else:
        alphas = [float(scenario.alpha)] * scenario.agent_count
    return alphas, _Workload(scenario, rng)


def _draw_responder(rng: random.Random, n: int, initiator: int) -> int:
    k = rng.randrange(n - 1)
    return k + 1 if k >= initiator else k


def run_simulation(scenario: Scenario) -> SimulationResult:
    rng = random.Random(scenario.seed)
    alphas, workload = _setup(scenario, rng)
    n = scenario.agent_count
    states = [AgentState(a) for a in alphas]
    events: list[EventRecord] = []
    issued_at: dict[tuple[int, str], int] = {}
    delays: list[int] = []
    answered_by = [0] * n
    issued = 0
    trajectories: dict[int, list[tuple[int, float]]] = {i: [] for i in range(n)}
    rows: list[tuple[int, int, float, int]] = []

    for step in range(scenario.horizon):
        i, q = workload.draw(rng)
        if states[i].find(q) is None:
            states[i] = states[i].with_pending(PendingQuery(q, scenario.start_time, 1))
            issued_at[i, q] = step
            issued += 1
        time_left = states[i].find(q).time_left
        a_i = decide_initiator(scenario.policy(i), states[i], q, scenario.timeout)
        j = None
        a_j = ResponderAction.NOT_ASKED
        if a_i is InitiatorAction.FORWARD:
            j = _draw_responder(rng, n, i)
            a_j = decide_responder(scenario.policy(j), states[j], q)
        out = apply_transition(states[i], None if j is None else states[j], q, a_i, a_j, scenario.timeout)
        states[i] = out.initiator
        if j is not None:
            states[j] = out.responder
        if out.answered:
            answered_by[i] += 1
            delays.append(step - issued_at.pop((i, q)) + 1)

        h_i = entropy(states[i].profile)
        h_j = None if j is None else entropy(states[j].profile)
        events.append(EventRecord(
            step, i, j, q, time_left, a_i.value, a_j.value,
            out.initiator_utility, out.responder_utility, h_i, h_j,
        ))
        for agent, h in ((i, h_i), (j, h_j)):
            if agent is None:
                continue
            trajectories[agent].append((step, h))
            rows.append((step, agent, h, answered_by[agent]))

    finals = [entropy(s.profile) for s in states]
    per_policy: dict[str, dict] = {}
    for a in range(n):
        per_policy.setdefault(scenario.policy(a), {"agents": []})["agents"].append(a)
    for p, d in per_policy.items():
        d["mean_final_entropy"] = math.fsum(finals[a] for a in d["agents"]) / len(d["agents"])
    answered = len(delays)
    metrics = Metrics(
        trajectories=trajectories,
        final_entropies=finals,
        issued=issued,
        answered=answered,
        answered_fraction=answered / issued if issued else None,
        mean_delay=math.fsum(delays) / answered if answered else None,
        per_policy=per_policy,
        csv_rows=rows,
    )
    return SimulationResult(scenario, alphas, states, events, metrics)


@dataclass(frozen=True)
class AuditResult:
    ok: bool
    checked: int
    step: int | None = None
    reason: str | None = None


def independence_audit(events: Sequence[EventRecord], scenario: Scenario) -> AuditResult:
    """Replay every logged decision from the deciding agent's own state.

    Agent states are rebuilt from the scenario and the logged outcomes; each
    decision is recomputed with only the decider's state and the query, so
    a match shows it depends on nothing else (not history, not the
    counterpart's identity or state).
    """
    rng = random.Random(scenario.seed)
    alphas, _ = _setup(scenario, rng)
    n = scenario.agent_count
    cats = set(scenario.categories())
    states = [AgentState(a) for a in alphas]
    checked = 0
    for k, ev in enumerate(events):
        if ev.step != k:
            raise ValueError(f"log/scenario mismatch: event {k} has step {ev.step}")
        if not 0 <= ev.initiator < n or (ev.responder is not None and not 0 <= ev.responder < n):
            raise ValueError(f"log/scenario mismatch at step {k}: agent index out of range")
        if ev.category not in cats:
            raise ValueError(f"log/scenario mismatch at step {k}: unknown category {ev.category!r}")
        i, q = ev.initiator, ev.category
        if states[i].find(q) is None:
            states[i] = states[i].with_pending(PendingQuery(q, scenario.start_time, 1))
        a_i = decide_initiator(scenario.policy(i), states[i], q, scenario.timeout)
        checked += 1
        if a_i.value != ev.initiator_action:
            return AuditResult(False, checked, k, f"initiator {i} would choose {a_i.value}")
        if a_i is InitiatorAction.FORWARD:
            j = ev.responder
            if j is None or j == i:
                return AuditResult(False, checked, k, "forwarded query without a valid responder")
            a_j = decide_responder(scenario.policy(j), states[j], q)
            checked += 1
            if a_j.value != ev.responder_action:
                return AuditResult(False, checked, k, f"responder {j} would choose {a_j.value}")
        else:
            j, a_j = None, ResponderAction.NOT_ASKED
            if ev.responder is not None or ev.responder_action != a_j.value:
                return AuditResult(False, checked, k, "direct submission logged with a responder")
        out = apply_transition(states[i], None if j is None else states[j], q, a_i, a_j, scenario.timeout)
        states[i] = out.initiator
        if j is not None:
            states[j] = out.responder
    return AuditResult(True, checked)


def with_policy(scenario: Scenario, policy: str | Sequence[str]) -> Scenario:
    return replace(scenario, strategy=policy if isinstance(policy, str) else tuple(policy))


def compare_policies(base: Scenario, policies: Sequence[str | Sequence[str]]) -> list[dict]:
    """One summary row per policy, all on the base scenario's seed and workload."""
    rows = []
    for p in policies:
        res = run_simulation(with_policy(base, p))
        rows.append({
            "policy": res.scenario.policy_name if isinstance(p, str) else "/".join(p),
            "mean_final_entropy": res.metrics.mean_final_entropy,
            "answered_fraction": res.metrics.answered_fraction,
            "mean_delay": res.metrics.mean_delay,
            "seed": base.seed,
        })
    return rows


# --- output -----------------------------------------------------------------------

CSV_COLUMNS = ("step", "agent", "entropy", "answered_cumulative")


def write_metrics_csv(metrics: Metrics, out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for step, agent, h, answered in metrics.csv_rows:
        w.writerow((step, agent, repr(h), answered))


def metrics_csv(metrics: Metrics) -> str:
    buf = io.StringIO()
    write_metrics_csv(metrics, buf)
    return buf.getvalue()


def write_events(events: Iterable[EventRecord], out: TextIO) -> None:
    for ev in events:
        out.write(json.dumps(ev.to_dict(), sort_keys=True) + "\n")


def read_events(lines: Iterable[str]) -> list[EventRecord]:
    return [EventRecord.from_dict(json.loads(line)) for line in lines if line.strip()]

"""Two-party anonymous query submission.

An initiator holding a query either submits it to the database herself,
which adds it to her own query profile, or forwards it to a peer. The peer
(responder) either submits it on her behalf, adding it to the responder's
profile, or declines. Privacy is the Shannon entropy (in bits) of the
frequency histogram of a profile; the initiator also values a fast answer:

    utility = alpha * time_left * interested + H(profile)

Entropy is measured in bits, so alpha is calibrated against bits too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .game_core import TOL, BayesianGame
from .protocol_analysis import ProtocolTable

ACCEPT_BELIEF = 0.5

Query = str


class InitiatorAction(str, Enum):
    SUBMIT_DIRECT = "SubmitDirect"
    FORWARD = "Forward"


class ResponderAction(str, Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"
    NOT_ASKED = "NotAsked"


@dataclass(frozen=True)
class QueryProfile:
    """Multiset of submitted query categories, stored as sorted (category, count) pairs."""

    counts: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        merged: dict[str, int] = {}
        for cat, k in self.counts:
            k = int(k)
            if k < 0:
                raise ValueError(f"negative count {k} for category {cat!r}")
            merged[str(cat)] = merged.get(str(cat), 0) + k
        object.__setattr__(
            self, "counts", tuple(sorted((c, k) for c, k in merged.items() if k > 0))
        )

    @classmethod
    def of(cls, counts: Mapping[str, int] | Iterable[str] = ()) -> "QueryProfile":
        if isinstance(counts, Mapping):
            return cls(tuple(counts.items()))
        tally: dict[str, int] = {}
        for q in counts:
            tally[q] = tally.get(q, 0) + 1
        return cls(tuple(tally.items()))

    @property
    def total(self) -> int:
        return sum(k for _, k in self.counts)

    def count(self, category: str) -> int:
        return dict(self.counts).get(category, 0)

    def add(self, q: Query) -> "QueryProfile":
        return QueryProfile(self.counts + ((q, 1),))

    def to_dict(self) -> dict[str, int]:
        return dict(self.counts)


def entropy(profile: QueryProfile | Mapping[str, int]) -> float:
    """Shannon entropy in bits of the category histogram; 0 for an empty profile."""
    counts = profile.counts if isinstance(profile, QueryProfile) else tuple(profile.items())
    counts = [k for _, k in counts if k > 0]
    total = sum(counts)
    if total == 0:
        return 0.0
    # H = log2(N) - (1/N) * sum k log2 k
    h = math.log2(total) - math.fsum(k * math.log2(k) for k in counts) / total
    return max(h, 0.0)


def utility(time_left: float, interested: int, profile: QueryProfile, alpha: float) -> float:
    if interested not in (0, 1):
        raise ValueError(f"interested must be 0 or 1, got {interested!r}")
    return alpha * time_left * interested + entropy(profile)


@dataclass(frozen=True)
class PendingQuery:
    category: Query
    time_left: float
    interested: int = 1

    def __post_init__(self):
        if self.interested not in (0, 1):
            raise ValueError(f"interested must be 0 or 1, got {self.interested!r}")


@dataclass(frozen=True)
class AgentState:
    alpha: float
    profile: QueryProfile = field(default_factory=QueryProfile)
    pending: tuple[PendingQuery, ...] = ()

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        object.__setattr__(self, "pending", tuple(self.pending))

    def find(self, q: Query) -> PendingQuery | None:
        for p in self.pending:
            if p.category == q:
                return p
        return None

    def with_pending(self, item: PendingQuery) -> "AgentState":
        rest = tuple(p for p in self.pending if p.category != item.category)
        return replace(self, pending=rest + (item,))

    def without_pending(self, q: Query) -> "AgentState":
        return replace(self, pending=tuple(p for p in self.pending if p.category != q))

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "profile": self.profile.to_dict(),
            "pending": [
                {"category": p.category, "time_left": p.time_left, "interested": p.interested}
                for p in self.pending
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "AgentState":
        return cls(
            alpha=float(data["alpha"]),
            profile=QueryProfile.of({str(k): int(v) for k, v in data.get("profile", {}).items()}),
            pending=tuple(
                PendingQuery(str(p["category"]), float(p["time_left"]), int(p.get("interested", 1)))
                for p in data.get("pending", [])
            ),
        )


def _interested_pending(state: AgentState, q: Query) -> PendingQuery:
    item = state.find(q)
    if item is None:
        raise ValueError(f"query {q!r} is not pending for this agent")
    if item.interested != 1:
        raise ValueError(f"agent is not waiting for an answer to {q!r}")
    return item


def direct_utility(state: AgentState, q: Query) -> float:
    item = _interested_pending(state, q)
    return utility(item.time_left, 0, state.profile.add(q), state.alpha)


def expected_forward_utility(state: AgentState, q: Query, timeout: float) -> float:
    """Initiator's utility from forwarding, with the answer arriving with probability 1/2."""
    item = _interested_pending(state, q)
    t = item.time_left - timeout
    answered = utility(t, 0, state.profile, state.alpha)
    rejected = utility(t, 1, state.profile, state.alpha)
    return ACCEPT_BELIEF * answered + (1 - ACCEPT_BELIEF) * rejected


def initiator_decision(state: AgentState, q: Query, timeout: float) -> InitiatorAction:
    """Submit directly only if that strictly beats the expected value of forwarding."""
    if direct_utility(state, q) > expected_forward_utility(state, q, timeout) + TOL:
        return InitiatorAction.SUBMIT_DIRECT
    return InitiatorAction.FORWARD


def responder_decision(state: AgentState, q: Query) -> ResponderAction:
    """Accept only if submitting q strictly raises the responder's own entropy."""
    if entropy(state.profile.add(q)) > entropy(state.profile) + TOL:
        return ResponderAction.ACCEPT
    return ResponderAction.REJECT


@dataclass(frozen=True)
class InteractionOutcome:
    initiator_action: InitiatorAction
    responder_action: ResponderAction
    initiator: AgentState
    responder: AgentState | None
    query: PendingQuery
    initiator_utility: float
    responder_utility: float | None

    @property
    def answered(self) -> bool:
        return self.query.interested == 0


def apply_transition(
    initiator: AgentState,
    responder: AgentState | None,
    q: Query,
    initiator_action: InitiatorAction | str,
    responder_action: ResponderAction | str | None,
    timeout: float,
) -> InteractionOutcome:
    """Update both states after one interaction and report realized utilities.

    `query` on the outcome is the initiator's query after the update; once
    answered (interested == 0) it is dropped from her pending set.
    """
    a_i = InitiatorAction(initiator_action)
    a_j = ResponderAction(responder_action) if responder_action is not None else ResponderAction.NOT_ASKED
    item = _interested_pending(initiator, q)
    u_j = None if responder is None else entropy(responder.profile)

    if a_i is InitiatorAction.SUBMIT_DIRECT:
        if a_j is not ResponderAction.NOT_ASKED:
            raise ValueError(f"responder action {a_j.value} after a direct submission")
        done = replace(item, interested=0)
        new_i = replace(initiator.without_pending(q), profile=initiator.profile.add(q))
        u_i = utility(done.time_left, 0, new_i.profile, new_i.alpha)
        return InteractionOutcome(a_i, a_j, new_i, responder, done, u_i, u_j)

    if responder is None:
        raise ValueError("a forwarded query needs a responder")
    if a_j is ResponderAction.NOT_ASKED:
        raise ValueError("a forwarded query must be accepted or rejected")
    t = item.time_left - timeout
    if a_j is ResponderAction.REJECT:
        waiting = replace(item, time_left=t)
        new_i = initiator.with_pending(waiting)
        u_i = utility(t, 1, new_i.profile, new_i.alpha)
        return InteractionOutcome(a_i, a_j, new_i, responder, waiting, u_i, u_j)

    done = replace(item, time_left=t, interested=0)
    new_i = initiator.without_pending(q)
    new_j = replace(responder, profile=responder.profile.add(q))
    u_i = utility(t, 0, new_i.profile, new_i.alpha)
    return InteractionOutcome(a_i, a_j, new_i, new_j, done, u_i, entropy(new_j.profile))


# --- the one-shot game and Protocol 1 as a table -----------------------------

INITIATOR_ACTIONS = (InitiatorAction.SUBMIT_DIRECT.value, InitiatorAction.FORWARD.value)
RESPONDER_ACTIONS = (ResponderAction.ACCEPT.value, ResponderAction.REJECT.value)


def _alpha_label(alpha: float) -> str:
    return f"alpha={alpha!r}"


def query_game_payoffs(
    initiator: AgentState, responder: AgentState, q: Query, timeout: float
) -> dict[tuple[str, str], tuple[float, float]]:
    """Payoffs of the one-shot game over (initiator action, responder action).

    The initiator's Forward payoff is her expectation under the 1/2
    acceptance belief, since she commits before seeing the reply. The
    responder's payoff is her entropy after the interaction.
    """
    direct = direct_utility(initiator, q)
    forward = expected_forward_utility(initiator, q, timeout)
    h_j = entropy(responder.profile)
    h_j_q = entropy(responder.profile.add(q))
    return {
        ("SubmitDirect", "Accept"): (direct, h_j),
        ("SubmitDirect", "Reject"): (direct, h_j),
        ("Forward", "Accept"): (forward, h_j_q),
        ("Forward", "Reject"): (forward, h_j),
    }


def make_query_game(
    initiator: AgentState,
    responder: AgentState,
    q: Query,
    timeout: float,
    responder_alphas: Sequence[float] | None = None,
) -> BayesianGame:
    """The two-party query game as a Bayesian game with alpha as private type.

    The initiator's type is her own alpha. The responder's type set defaults
    to her own alpha, and may be widened to show that nothing depends on it.
    """
    alphas = [responder.alpha] if responder_alphas is None else [float(a) for a in responder_alphas]
    types = ((_alpha_label(initiator.alpha),), tuple(_alpha_label(a) for a in alphas))
    by_label = dict(zip(types[1], alphas))

    def util(s, t):
        j = replace(responder, alpha=by_label[t[1]])
        return query_game_payoffs(initiator, j, q, timeout)[s]

    return BayesianGame.from_function(
        ("initiator", "responder"), (INITIATOR_ACTIONS, RESPONDER_ACTIONS), types, util
    )


def protocol1_profile(
    initiator: AgentState, responder: AgentState, q: Query, timeout: float
) -> tuple[str, str]:
    """(initiator action, responder's rule) as a strategy profile."""
    return (
        initiator_decision(initiator, q, timeout).value,
        responder_decision(responder, q).value,
    )


def protocol1_table(
    initiator: AgentState, responder: AgentState, q: Query, timeout: float
) -> ProtocolTable:
    """Protocol 1 takes no reports: a constant table over opaque inputs."""
    return ProtocolTable.constant(protocol1_profile(initiator, responder, q, timeout))


@dataclass(frozen=True)
class Protocol1Verdict:
    verdict: str
    equilibrium: bool
    initiator_action: InitiatorAction
    responder_action: ResponderAction
    initiator_maximal: bool
    responder_maximal: bool
    hypotheses: dict[str, bool]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "equilibrium": self.equilibrium,
            "initiator_action": self.initiator_action.value,
            "responder_action": self.responder_action.value,
            "initiator_maximal": self.initiator_maximal,
            "responder_maximal": self.responder_maximal,
            "hypotheses": dict(self.hypotheses),
        }


def verify_protocol1(
    initiator: AgentState, responder: AgentState, q: Query, timeout: float
) -> Protocol1Verdict:
    """Enumerate all four action pairs and grade the Protocol 1 outcome.

    The initiator is measured by her expected utility under the 1/2 belief,
    the responder by her entropy. `responder_action` is what her rule would
    answer, whether or not the query reaches her. `hypotheses` records which
    positivity conditions held for the instance.
    """
    payoffs = query_game_payoffs(initiator, responder, q, timeout)
    a_i = initiator_decision(initiator, q, timeout)
    a_j = responder_decision(responder, q)
    chosen = (a_i.value, a_j.value)
    u_i, u_j = payoffs[chosen]

    equilibrium = (
        all(payoffs[(b, a_j.value)][0] <= u_i + TOL for b in INITIATOR_ACTIONS)
        and all(payoffs[(a_i.value, b)][1] <= u_j + TOL for b in RESPONDER_ACTIONS)
    )
    init_max = u_i >= max(v[0] for v in payoffs.values()) - TOL
    resp_max = u_j >= max(v[1] for v in payoffs.values()) - TOL
    if not equilibrium:
        verdict = "none"
    elif init_max and resp_max:
        verdict = "strict"
    elif init_max or resp_max:
        verdict = "relaxed"
    else:
        verdict = "none"

    h_j = entropy(responder.profile)
    h_j_q = entropy(responder.profile.add(q))
    hypotheses = {
        "responder_entropy_positive": h_j > 0,
        "responder_entropy_with_query_positive": h_j_q > 0,
        "forward_expectation_positive": expected_forward_utility(initiator, q, timeout) > 0,
    }
    return Protocol1Verdict(verdict, equilibrium, a_i, a_j, init_max, resp_max, hypotheses)

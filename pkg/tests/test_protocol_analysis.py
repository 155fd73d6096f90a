import pytest
from hypothesis import given, settings, strategies as st

from coutility import anon_query as aq
from coutility import coordination_examples as ce
from coutility.game_core import BayesianGame, make_bos, make_tcp_game
from coutility.protocol_analysis import (
    AgentCountError,
    CoordinationProtocolError,
    DomainMismatchError,
    NotAmenableError,
    NotSelfEnforcingError,
    ProtocolError,
    ProtocolTable,
    check_self_enforcing,
    classify,
    classify_coutility,
    is_coordination,
    is_coutility_amenable,
)

H, D = "Honest", "Dishonest"
O, F = "Opera", "Football"


@pytest.fixture
def tcp():
    return BayesianGame.from_normal_form(make_tcp_game())


def test_honest_tcp_is_not_self_enforcing(tcp):
    v = check_self_enforcing(ProtocolTable.constant((H, H)), tcp)
    assert v.holds is False
    w = v.witness
    assert (w["kind"], w["agent"], w["deviation"]) == ("deviation", 0, D)
    assert (w["utility"], w["deviation_utility"]) == (2.0, 3.0)


def test_dishonest_tcp_is_self_enforcing(tcp):
    assert check_self_enforcing(ProtocolTable.constant((D, D)), tcp).holds is True


def test_bos_opera_is_self_enforcing():
    g = BayesianGame.from_normal_form(make_bos(3, 2, 3, 2, 1))
    assert check_self_enforcing(ProtocolTable.constant((O, O)), g).holds is True


def test_zero_utility_fails_ex_post():
    g = BayesianGame.from_normal_form(make_tcp_game())
    shifted = BayesianGame(g.agents, g.strategies, g.types, g.prior,
                           {k: (u[0] - 1, u[1] - 1) for k, u in g.utilities.items()})
    v = check_self_enforcing(ProtocolTable.constant((D, D)), shifted)
    assert v.holds is False and v.witness["kind"] == "non_positive"


def test_expected_positivity_accepts_vickrey_but_ex_post_does_not():
    values = [0, 1]
    game, table = ce.make_vickrey_game(values), ce.vickrey_protocol_table(values)
    assert check_self_enforcing(table, game, "ex_post").holds is False
    assert check_self_enforcing(table, game, "expected").holds is True


def test_unknown_positivity_mode(tcp):
    with pytest.raises(ValueError):
        check_self_enforcing(ProtocolTable.constant((D, D)), tcp, "sometimes")


def test_domain_mismatch(tcp):
    with pytest.raises(DomainMismatchError):
        check_self_enforcing(ProtocolTable.constant((O, O)), tcp)
    with pytest.raises(DomainMismatchError):
        check_self_enforcing(ProtocolTable.constant((D, D, D)), tcp)


def test_incomplete_table_rejected():
    with pytest.raises(ProtocolError, match="no output"):
        ProtocolTable((("a", "b"), ("c",)), {(("a", "c"), "none"): ("x", "y")})


# --- coordination ----------------------------------------------------------------


def test_bos_protocol_is_coordination():
    game = ce.make_bos_bayesian(3, 2, 3, 2, 1)
    v = is_coordination(ce.bos_protocol_table(game), game)
    assert v.holds is True
    w = v.witness
    assert w["agent"] == 0
    assert w["misreporting_agents"] == [1]
    assert (w["output"], w["misreport_output"]) == ([O, O], [F, F])


def test_constant_protocol_is_not_coordination(tcp):
    assert is_coordination(ProtocolTable.constant((D, D)), tcp).holds is False


def test_coordination_not_applicable_without_self_enforcement(tcp):
    v = is_coordination(ProtocolTable.constant((H, H)), tcp)
    assert v.holds is None


def test_vickrey_is_coordination():
    values = [0, 1]
    v = is_coordination(ce.vickrey_protocol_table(values), ce.make_vickrey_game(values), "expected")
    assert v.holds is True


def test_input_dependent_constant_utility_is_not_coordination(tcp):
    # Outputs vary with reports, but every output gives the same utilities.
    g = BayesianGame.from_function(("a", "b"), (("x", "y"), ("z",)), (("-",), ("-",)),
                                   lambda s, t: (1.0, 1.0))
    table = ProtocolTable.from_function((("p", "q"), ("r", "s")),
                                        lambda c, x: ("x" if c[1] == "r" else "y", "z"))
    assert check_self_enforcing(table, g).holds is True
    assert is_coordination(table, g).holds is False


# --- amenability -------------------------------------------------------------------


def test_query_game_is_amenable():
    i = aq.AgentState(0.1, aq.QueryProfile.of({"a": 4}), (aq.PendingQuery("a", 10.0),))
    j = aq.AgentState(0.1, aq.QueryProfile.of({"b": 2, "c": 1}))
    g = aq.make_query_game(i, j, "a", 1.0, responder_alphas=[0.0, 0.5, 3.0])
    assert is_coutility_amenable(g).holds is True


def test_vickrey_is_not_amenable():
    v = is_coutility_amenable(ce.make_vickrey_game([0, 1]))
    assert v.holds is False
    w = v.witness
    game = ce.make_vickrey_game([0, 1])
    t2 = list(w["types"])
    t2[w["changed_agent"]] = w["changed_type"]
    assert game.utility(w["strategies"], w["types"], w["affected_agent"]) == w["utility"]
    assert game.utility(w["strategies"], t2, w["affected_agent"]) == w["changed_utility"]


def test_singleton_types_are_amenable(tcp):
    assert is_coutility_amenable(tcp).holds is True


def test_bos_bayesian_is_amenable():
    assert is_coutility_amenable(ce.make_bos_bayesian(3, 2, 3, 2, 1)).holds is True


# --- co-utility --------------------------------------------------------------------


def _query_case(init_counts, t, alpha, resp_counts, q):
    i = aq.AgentState(alpha, aq.QueryProfile.of(init_counts), (aq.PendingQuery(q, t),))
    j = aq.AgentState(alpha, aq.QueryProfile.of(resp_counts))
    return aq.protocol1_table(i, j, q, 1.0), aq.make_query_game(i, j, q, 1.0)


def test_forward_accept_is_strict():
    table, game = _query_case({"a": 4}, 10.0, 0.1, {"b": 2, "c": 1}, "a")
    res = classify_coutility(table, game)
    assert res.level == "strict" and res.maximal == (True, True)


def test_direct_with_willing_responder_is_relaxed():
    table, game = _query_case({"a": 2, "b": 1}, 0.0, 1.0, {"b": 1, "c": 1}, "a")
    res = classify_coutility(table, game)
    assert res.level == "relaxed" and res.maximal == (True, False)
    w = res.witnesses[1]
    assert game.utility(w["better_profile"], w["types"], 1) == w["better_utility"]
    assert game.utility(w["output"], w["types"], 1) == w["utility"]


def test_joint_maximality_none():
    # Stag hunt style game: (low, low) is an equilibrium but nobody's best outcome.
    def u(s, t):
        table = {("hi", "hi"): (4, 4), ("hi", "lo"): (1, 3), ("lo", "hi"): (3, 1), ("lo", "lo"): (2, 2)}
        return table[s]

    g = BayesianGame.from_function(("a", "b"), (("hi", "lo"),) * 2, (("-",), ("-",)), u)
    assert classify_coutility(ProtocolTable.constant(("lo", "lo")), g).level == "none"
    assert classify_coutility(ProtocolTable.constant(("hi", "hi")), g).level == "strict"


def test_precondition_errors(tcp):
    with pytest.raises(NotSelfEnforcingError):
        classify_coutility(ProtocolTable.constant((H, H)), tcp)
    game = ce.make_bos_bayesian(3, 2, 3, 2, 1)
    with pytest.raises(CoordinationProtocolError):
        classify_coutility(ce.bos_protocol_table(game), game)
    with pytest.raises(NotAmenableError):
        classify_coutility(ce.vickrey_protocol_table([0, 1]), ce.make_vickrey_game([0, 1]), "expected")
    three = BayesianGame.from_function(("a", "b", "c"), (("x",),) * 3, (("-",),) * 3, lambda s, t: (1, 1, 1))
    with pytest.raises(AgentCountError):
        classify_coutility(ProtocolTable.constant(("x", "x", "x")), three)


@settings(max_examples=60)
@given(
    st.dictionaries(st.sampled_from("abc"), st.integers(1, 3), max_size=3),
    st.dictionaries(st.sampled_from("abc"), st.integers(1, 3), min_size=1, max_size=3),
    st.sampled_from("abc"),
    st.sampled_from([0.0, 0.1, 1.0, 5.0]),
    st.sampled_from([0.0, 1.0, 2.0, 10.0]),
)
def test_report_invariants(yi, yj, q, alpha, t):
    table, game = _query_case(yi, t, alpha, yj, q)
    report = classify(table, game)
    if report.coutility in ("strict", "relaxed"):
        assert report.self_enforcing.holds is True
        assert report.coordination.holds is False
    if report.coordination.holds:
        assert report.coutility == "none"
    assert classify(table, game) == report


def test_classify_report_serializes(tcp):
    d = classify(ProtocolTable.constant((D, D)), tcp).to_dict()
    assert d["self_enforcing"]["holds"] is True
    assert d["coutility"] == "none"

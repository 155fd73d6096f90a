"""Regenerate the bundled example files in src/coutility/data/."""

from pathlib import Path

from coutility import anon_query as aq
from coutility import coordination_examples as ce
from coutility.cli import protocol1_instances
from coutility.files import dump_json, game_to_dict, protocol_to_dict
from coutility.game_core import make_bos, make_tcp_game
from coutility.protocol_analysis import ProtocolTable
from coutility.sim_harness import Scenario

DATA = Path(__file__).resolve().parents[1] / "src" / "coutility" / "data"


def main():
    DATA.mkdir(exist_ok=True)
    files = {
        "tcp_game.json": game_to_dict(make_tcp_game()),
        "tcp_honest_protocol.json": protocol_to_dict(ProtocolTable.constant(("Honest", "Honest"))),
        "tcp_dishonest_protocol.json": protocol_to_dict(ProtocolTable.constant(("Dishonest", "Dishonest"))),
        "bos_game.json": game_to_dict(make_bos(3, 2, 3, 2, 1)),
        "bos_bayesian_game.json": game_to_dict(ce.make_bos_bayesian(3, 2, 3, 2, 1)),
        "bos_protocol.json": protocol_to_dict(ce.bos_protocol_table(ce.make_bos_bayesian(3, 2, 3, 2, 1))),
        "vickrey_game.json": game_to_dict(ce.make_vickrey_game([0, 1])),
        "vickrey_protocol.json": protocol_to_dict(ce.vickrey_protocol_table([0, 1])),
        "scenario.json": Scenario(seed=7).to_dict(),
    }
    for inst in protocol1_instances():
        args = inst["initiator"], inst["responder"], inst["query"], inst["timeout"]
        files[f"query_game_{inst['name']}.json"] = game_to_dict(aq.make_query_game(*args, responder_alphas=[0.0, 0.5, 2.0]))
        files[f"protocol1_{inst['name']}.json"] = protocol_to_dict(aq.protocol1_table(*args))
    for name, obj in files.items():
        dump_json(obj, DATA / name)
        print(DATA / name)


if __name__ == "__main__":
    main()

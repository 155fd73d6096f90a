"""Grade Protocol 1 on every small instance and tally the verdicts.

Profiles range over count vectors with a bounded total; the tally is broken
down by alpha so the switch from direct submission to forwarding is visible.
"""

import argparse
import itertools
from collections import Counter

from coutility import anon_query as aq


def profiles(total_max, cats):
    for counts in itertools.product(range(total_max + 1), repeat=len(cats)):
        if sum(counts) <= total_max:
            yield aq.QueryProfile.of(dict(zip(cats, counts)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-total", type=int, default=5)
    ap.add_argument("--categories", type=int, default=3)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.0, 0.1, 0.5, 1.0, 2.0, 5.0])
    ap.add_argument("--times", type=float, nargs="+", default=[1.0, 2.0, 5.0, 10.0])
    ap.add_argument("--timeout", type=float, default=1.0)
    args = ap.parse_args(argv)

    cats = [chr(ord("a") + k) for k in range(args.categories)]
    ps = list(profiles(args.max_total, cats))
    tally = Counter()
    for yi, yj, q, alpha, t in itertools.product(ps, ps, cats, args.alphas, args.times):
        i = aq.AgentState(alpha, yi, (aq.PendingQuery(q, t),))
        v = aq.verify_protocol1(i, aq.AgentState(alpha, yj), q, args.timeout)
        tally[alpha, v.initiator_action.value, v.verdict] += 1

    print("alpha,initiator_action,verdict,count")
    for (alpha, action, verdict), n in sorted(tally.items()):
        print(f"{alpha!r},{action},{verdict},{n}")


if __name__ == "__main__":
    main()

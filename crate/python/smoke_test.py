"""Smoke test for the rotlab_py extension module.

Build and install first:  pip install --no-build-isolation -e crates/python
"""

import json
from fractions import Fraction

import rotlab_py as rl


def main() -> None:
    labels = [label for label, _ in rl.list_protocols()]
    assert "passthrough_rot" in labels, labels

    p = [("a", "1/2"), ("b", "1/2")]
    q = [("a", "1/4"), ("b", "3/4")]
    assert rl.statistical_distance(p, q) == "1/4"

    pt = rl.Protocol("passthrough_rot")
    outputs = dict(pt.honest_outputs())
    assert len(outputs) == 8 and set(outputs.values()) == {"1/8"}, outputs

    report = json.loads(pt.verify())
    assert report["worst"] == "0/1", report["worst"]

    ex = json.loads(pt.extract())
    assert ex["sender"]["success"] == "1/1" and ex["choice"]["agreement"] == "1/1"

    for case in ["none", "alice_only", "bob_only", "both"]:
        for game in json.loads(pt.uc_game(case)):
            assert game["advantage"] == "0/1", game

    leaky = rl.Protocol("leaky_rot")
    assert not leaky.secure
    game = json.loads(leaky.uc_game("bob_only", adversary="read-bits"))[0]
    assert Fraction(game["advantage"]) >= Fraction(1, 4), game

    sampled = json.loads(leaky.uc_game("bob_only", adversary="read-bits", mode="sampling", seed=5, samples=2000))[0]
    assert sampled["mode"] == "sampling" and sampled["radius"] is not None

    for m0 in (0, 1):
        for m1 in (0, 1):
            for choice in (0, 1):
                _, _, out = rl.derandomize((0, 1), (1, 1), (m0, m1), choice)
                assert out == (m0, m1)[choice]

    try:
        rl.Protocol("no_such_protocol")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown protocol accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()

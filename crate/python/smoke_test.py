"""Smoke test for the toposlab Python extension.

Build and run from the repository root:

    cargo build --release -p toposlab-py
    cp target/release/libtoposlab_py.so python/toposlab_py.so
    python3 python/smoke_test.py
"""

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import toposlab_py as tl  # noqa: E402

EDGE = {
    "site": "reflexive_graph",
    "carrier": {"E": ["e", "lu", "lv"], "V": ["u", "v"]},
    "action": {
        "d0": {"e": "u", "lu": "u", "lv": "v"},
        "d1": {"e": "v", "lu": "u", "lv": "v"},
        "s": {"u": "lu", "v": "lv"},
    },
}


def main():
    listing = {s["name"]: s for s in tl.sites()}
    assert listing["reflexive_graph"]["omega"] == {"V": 2, "E": 5}, listing
    assert len(tl.statements()) > 0

    g = tl.Site("reflexive_graph")
    assert g.omega_sizes() == {"V": 2, "E": 5}
    assert not g.is_boolean()
    assert tl.Site("terminal").is_boolean()

    edge = tl.Presheaf.from_json(json.dumps(EDGE))
    assert edge.sizes() == {"V": 2, "E": 3}
    assert not edge.is_decidable()
    status = edge.sheaf_status()
    assert status["separated"] and not status["sheaf"], status
    assert edge.sheafify().sizes() == {"V": 2, "E": 4}
    assert tl.Presheaf.from_json(edge.to_json()) == edge

    one = g.terminal()
    assert edge.product(one).is_isomorphic(edge)
    assert edge.coproduct(g.initial()).is_isomorphic(edge)
    assert one.exponential(edge).is_isomorphic(edge)
    assert one.count_hom(g.omega()) == 2

    try:
        tl.Site("nosuch")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown site accepted")

    report = tl.check("zmod2", suite="mclarty-corollary")
    assert report["verdicts"][0]["status"] == "pass", report

    info = tl.inspect("0", site="delta1")
    assert info["decidable"] and info["sheaf"]["sheaf"], info

    code, out, _ = tl.main(["check", "reflexive_graph", "--suite", "uiao", "--bound", "3"])
    assert code == 0, out

    print("smoke test passed")


if __name__ == "__main__":
    main()

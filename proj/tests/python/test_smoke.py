import json
import os

import hvx


def test_run_value_and_output():
    r = hvx.run('(println "hi") (* 6 7)')
    assert r["ok"]
    assert r["value"] == "42"
    assert r["output"] == "hi\n"


def test_run_reports_phase_and_kind():
    r = hvx.run("(+ 1 q)")
    assert not r["ok"]
    assert r["phase"] == "compile"
    assert r["error"]["kind"] == "unbound"
    fuel = hvx.run("(reduce + (range 100000))", fuel=1000)
    assert fuel["error"]["kind"] == "fuel"


def test_expand_prints_forms():
    assert hvx.expand("(def   x [1   2])") == "(def x [1 2])\n"


def test_wire_encoding_round_trips():
    assert hvx.datum_to_json('{:count 43 :name ":x"}') == {":count": 43, ":name": "\\:x"}
    assert hvx.json_to_datum({":count": 43}) == "{:count 43}"


def counter_text():
    with open(os.path.join(hvx.corpus_dir(), "counter.hvx")) as f:
        return f.read()


def find_handler(node, attr):
    h = node.get("attrs", {}).get(attr)
    if isinstance(h, dict) and "handler" in h:
        return h["handler"]
    for c in node.get("children", []):
        got = find_handler(c, attr)
        if got:
            return got
    return None


def test_session_click_writes_back():
    s = hvx.Session(counter_text())
    assert [i["id"] for i in s.instances] == ["Counter#0"]
    h = find_handler(s.render()[0]["tree"], "on-click")
    deltas = s.dispatch(h)
    assert deltas[0]["replacement"] == "{:count 43}"
    assert "{:count 43}" in s.text
    assert s.state("Counter#0") == "{:count 43}"
    assert s.run()["value"] == "43"
    try:
        s.dispatch(h)
        assert False
    except hvx.HvxError as e:
        assert "stale handler" in str(e)


def test_server_speaks_json_rpc():
    srv = hvx.Server()
    req = {"jsonrpc": "2.0", "id": 1, "method": "session/open", "params": {"text": counter_text()}}
    out = [json.loads(line) for line in srv.handle(json.dumps(req))]
    assert out[-1]["result"]["session"] == "s1"
    bad = json.loads(srv.handle("{nope")[-1])
    assert bad["error"]["code"] == -32700

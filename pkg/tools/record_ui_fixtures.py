"""Record real service responses as fixtures for the frontend tests.

The UI test suite runs against a mocked fetch, but every byte it
serves was produced by the actual service via this script. Re-run it
after changing anything that alters a response body:

    python3 tools/record_ui_fixtures.py

Besides writing frontend/tests/fixtures/*.json, the script asserts
the relations the UI acceptance tests rely on (month-2 storage
doubling, persisted-edit totals matching a fresh session on the
written source), so a recording that would let those tests pass
vacuously fails here first.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from penny.service import create_app

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "frontend" / "tests" / "fixtures"

ASSUMPTIONS = {
    "upload.requestsPerMonth": 100000,
    "search.requestsPerMonth": 300000,
    "upload.fn.memoryGb": 0.5,
    "upload.fn.durationS": 0.2,
    "callback.fn.memoryGb": 0.5,
    "callback.fn.durationS": 0.2,
    "search.fn.memoryGb": 0.5,
    "search.fn.durationS": 0.2,
}

LINKABLE_SOURCE = """bring cloud;

let api = new cloud.Api();
let queue = new cloud.Queue();
let schedule = new cloud.Schedule(rate: 5m);

api.post("/ingest", inflight (req) => {
  queue.push(req.body);
  return ApiResponse { status: 200 };
});

schedule.onTick(inflight () => {
  if let msg = queue.pop() {
    [httpPost("https://partner.example.com/submit", msg), { unitPriceMicroUsd: 10 }][0];
  }
});

api.post("/hook", inflight (req) => {
  return ApiResponse { status: 200 };
});
"""


def save(name: str, response) -> dict | None:
    OUT.joinpath(name).write_bytes(response.content)
    print(f"  {name:<28} {response.status_code}  {len(response.content):>6} bytes")
    try:
        return response.json()
    except json.JSONDecodeError:
        return None


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    client = TestClient(create_app(ROOT / "catalogs"))
    fixture_text = (ROOT / "examples" / "transcription.w").read_text(encoding="utf-8")

    print("recording:")
    save("catalogs.json", client.get("/catalogs"))

    # The resolved session every happy-path test starts from.
    r = client.post("/sessions", json={"source": fixture_text, "assumptions": ASSUMPTIONS})
    assert r.status_code == 201, r.text
    session = save("session.json", r)
    sid = session["session"]

    month1 = save("cost-month1.json", client.get(f"/sessions/{sid}/cost", params={"month": 1}))
    month2 = save("cost-month2.json", client.get(f"/sessions/{sid}/cost", params={"month": 2}))
    zephyr = save(
        "cost-zephyr.json",
        client.get(f"/sessions/{sid}/cost", params={"month": 1, "vendor": "zephyr-v1"}),
    )
    assert zephyr["vendor"] == "zephyr-v1"
    save("compare.json", client.get(f"/sessions/{sid}/compare"))
    save("source-before.json", client.get(f"/sessions/{sid}/source"))

    # Slider oracle: accumulating components double from month 1 to 2,
    # everything else is untouched.
    f1 = {f["id"]: f for n in month1["nodes"] for f in n["factors"]}
    f2 = {f["id"]: f for n in month2["nodes"] for f in n["factors"]}
    assert f1.keys() == f2.keys()
    doubled = 0
    for fid, fac in f1.items():
        if fac["kind"] == "accumulating":
            assert f2[fid]["micro_usd"] == 2 * fac["micro_usd"], fid
            doubled += 1
        else:
            assert f2[fid] == fac, fid
    assert doubled == 2, f"expected 2 accumulating components, saw {doubled}"

    # Persisted edit: splice payloadBytes into the source, then check a
    # brand-new session on the written text prices identically.
    r = client.patch(
        f"/sessions/{sid}/assumptions",
        json={"videoStorage.put.payloadBytes": 60000000, "persist": True},
    )
    assert r.status_code == 200, r.text
    save("patch-persist.json", r)
    source_after = save("source-after.json", client.get(f"/sessions/{sid}/source"))
    assert "payloadBytes: 60000000" in source_after["text"]
    graph_after = save(
        "graph-after.json", client.get(f"/sessions/{sid}/graph", params={"format": "json"})
    )
    assert max(n["span"]["end"] for n in graph_after["nodes"]) <= len(
        source_after["text"].encode("utf-8")
    )
    after = save("cost-after-persist.json", client.get(f"/sessions/{sid}/cost", params={"month": 1}))

    r = client.post(
        "/sessions", json={"source": source_after["text"], "assumptions": ASSUMPTIONS}
    )
    assert r.status_code == 201, r.text
    fresh_session = save("session-fresh.json", r)
    fresh = save(
        "cost-fresh.json",
        client.get(f"/sessions/{fresh_session['session']}/cost", params={"month": 1}),
    )
    assert fresh["total_micro_usd"] == after["total_micro_usd"]
    strip = lambda doc: {k: v for k, v in doc.items() if k != "source_version"}
    assert strip(fresh) == strip(after), "persisted session diverges from fresh session"

    # A program the parser rejects, for the load-failure banner.
    r = client.post("/sessions", json={"source": "bring cloud;\nlet x = ;\n"})
    assert r.status_code == 422
    save("parse-error.json", r)

    # A session with nothing resolved, for the blocked-total state.
    r = client.post("/sessions", json={"source": fixture_text})
    assert r.status_code == 201, r.text
    unresolved = save("session-unresolved.json", r)
    r = client.get(f"/sessions/{unresolved['session']}/cost")
    assert r.status_code == 409
    save("cost-unresolved.json", r)

    # Black-box linking, both outcomes.
    r = client.post("/sessions", json={"source": LINKABLE_SOURCE})
    assert r.status_code == 201, r.text
    linkable = save("session-linkable.json", r)
    lid = linkable["session"]
    r = client.post(f"/sessions/{lid}/black-box-link", json={"call": "httpPost", "route": "/hook"})
    assert r.status_code == 200, r.text
    link = save("link-ok.json", r)
    assert ["httpPost", "hook", "deferred"] in [
        [e["src"], e["dst"], e["kind"]] for e in link["graph"]["edges"]
    ]
    save("source-linkable.json", client.get(f"/sessions/{lid}/source"))
    r = client.post(f"/sessions/{lid}/black-box-link", json={"call": "httpPost", "route": "/hook"})
    assert r.status_code == 409
    save("link-already.json", r)

    print("all recording-time checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())

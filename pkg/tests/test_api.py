from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from datapact.api import create_app
from datapact.broker import Broker
from datapact.clock import ManualClock

from test_broker import ASSET_FIELDS, POLICY_FIELDS, T0

ADMIN_KEY = "admin-secret"


@pytest.fixture
def rig(tmp_path):
    broker = Broker(tmp_path / "data", clock=ManualClock(T0))
    app = create_app(broker, admin_api_keys=(ADMIN_KEY,))
    client = TestClient(app)

    def as_admin():
        return {"X-API-Key": ADMIN_KEY}

    def register(name, role, industry):
        response = client.post(
            "/parties",
            json={"display_name": name, "role": role, "industry": industry},
            headers=as_admin(),
        )
        assert response.status_code == 201, response.text
        body = response.json()
        return body["party"]["party_id"], {"X-API-Key": body["api_key"]}

    provider_id, provider = register("Gate Metrics Ltd", "provider", "airport")
    consumer_id, consumer = register("Blue Swift Air", "consumer", "airline")
    outsider_id, outsider = register("Bystander Board", "both", "regulator")
    return broker, client, {
        "admin": as_admin(),
        "provider": provider,
        "consumer": consumer,
        "outsider": outsider,
        "provider_id": provider_id,
        "consumer_id": consumer_id,
        "outsider_id": outsider_id,
    }


def _register_asset(client, ids):
    response = client.post(
        "/assets",
        json={"asset": dict(ASSET_FIELDS), "policy": dict(POLICY_FIELDS)},
        headers=ids["provider"],
    )
    assert response.status_code == 201, response.text
    return response.json()["asset"]["asset_id"]


def _draft(client, ids, asset_id, price=800):
    response = client.post(
        "/contracts",
        json={"asset_id": asset_id, "consumer": ids["consumer_id"], "price": price},
        headers=ids["provider"],
    )
    assert response.status_code == 201, response.text
    return response.json()["contract_id"]


def test_missing_api_key_unauthenticated(rig):
    _, client, _ = rig
    response = client.get("/parties")
    assert response.status_code == 401
    assert response.json()["error"]["code"] == "unauthenticated"


def test_unknown_api_key_unauthenticated(rig):
    _, client, _ = rig
    response = client.get("/parties", headers={"X-API-Key": "bogus"})
    assert response.status_code == 401


def test_party_registration_needs_admin(rig):
    _, client, ids = rig
    response = client.post(
        "/parties",
        json={"display_name": "X", "role": "consumer", "industry": "airline"},
        headers=ids["provider"],
    )
    assert response.status_code == 403
    assert response.json()["error"]["code"] == "forbidden"


def test_whoami(rig):
    _, client, ids = rig
    body = client.get("/whoami", headers=ids["consumer"]).json()
    assert body["party"]["party_id"] == ids["consumer_id"]
    assert client.get("/whoami", headers=ids["admin"]).json()["admin"] is True


def test_full_lifecycle_over_http(rig):
    broker, client, ids = rig
    asset_id = _register_asset(client, ids)

    hits = client.post(
        "/catalog/search", json={"text": "turnaround"}, headers=ids["consumer"]
    ).json()["results"]
    assert [e["asset"]["asset_id"] for e in hits] == [asset_id]

    contract_id = _draft(client, ids, asset_id)

    view = client.post(
        f"/contracts/{contract_id}/proposals",
        json={"price": 700},
        headers=ids["consumer"],
    ).json()
    assert view["version"] == 2 and view["status"] == "Negotiating"

    view = client.post(
        f"/contracts/{contract_id}/response",
        json={"decision": "accept"},
        headers=ids["provider"],
    ).json()
    assert view["status"] == "Accepted"

    for who in ("provider", "consumer"):
        response = client.post(
            f"/contracts/{contract_id}/signature", json={}, headers=ids[who]
        )
        assert response.status_code == 200, response.text

    client.post(
        "/escrow/deposits", json={"amount": 1000}, headers=ids["consumer"]
    ).raise_for_status()
    hold = client.post(
        "/escrow/holds", json={"contract_id": contract_id}, headers=ids["consumer"]
    ).json()

    response = client.post(f"/contracts/{contract_id}/activation", headers=ids["consumer"])
    assert response.status_code == 409
    assert response.json()["error"]["code"] == "payment_incomplete"

    client.post(
        f"/escrow/holds/{hold['hold_id']}/confirmation", headers=ids["provider"]
    ).raise_for_status()

    view = client.post(f"/contracts/{contract_id}/activation", headers=ids["consumer"]).json()
    assert view["status"] == "Active"

    report = client.get(f"/contracts/{contract_id}/validity", headers=ids["consumer"]).json()
    assert report["ledger_consistent"] == "match"
    assert report["status_valid"] and report["signatures_valid"]

    records = client.get(f"/ledger/contracts/{contract_id}", headers=ids["consumer"]).json()
    assert [r["status_at_anchor"] for r in records["records"]] == ["Accepted", "Active"]
    assert client.get("/ledger/verify", headers=ids["outsider"]).json()["ok"]

    token = broker.token_for_contract(contract_id)
    status = client.get(f"/tokens/{token.token_id}", headers=ids["consumer"]).json()
    assert status["valid"] and status["reason"] == "ok"

    events = client.get(f"/contracts/{contract_id}/events", headers=ids["provider"]).json()
    actions = [e["action"] for e in events["events"]]
    assert actions == ["create_draft", "propose", "accept", "sign", "sign", "activate"]


def test_error_codes_are_stable(rig):
    _, client, ids = rig
    response = client.post(
        "/contracts",
        json={"asset_id": "ghost", "consumer": ids["consumer_id"], "price": 5},
        headers=ids["provider"],
    )
    assert response.status_code == 404
    assert response.json()["error"]["code"] == "unknown_asset"

    asset_id = _register_asset(client, ids)
    contract_id = _draft(client, ids, asset_id)
    response = client.post(
        f"/contracts/{contract_id}/proposals", json={"price": 1}, headers=ids["provider"]
    )
    assert response.status_code == 409
    assert response.json()["error"]["code"] == "out_of_turn"

    bad_term = {
        "category": "Quality",
        "kind": "Obligation",
        "key": "accuracy",
        "action": None,
        "value": "0.9",
    }
    response = client.post(
        f"/contracts/{contract_id}/proposals",
        json={"set_terms": [bad_term]},
        headers=ids["consumer"],
    )
    assert response.status_code == 422
    assert response.json()["error"]["code"] == "non_negotiable_key"


def test_idempotency_header_suppresses_duplicates(rig):
    broker, client, ids = rig
    headers = {**ids["consumer"], "Idempotency-Key": "dep-1"}
    first = client.post("/escrow/deposits", json={"amount": 400}, headers=headers).json()
    second = client.post("/escrow/deposits", json={"amount": 400}, headers=headers).json()
    assert first["balance"] == second["balance"] == 400
    assert broker.balance(ids["consumer_id"]) == 400


def test_deposit_to_other_party_forbidden(rig):
    _, client, ids = rig
    response = client.post(
        "/escrow/deposits",
        json={"party_id": ids["provider_id"], "amount": 100},
        headers=ids["consumer"],
    )
    assert response.status_code == 403
    ok = client.post(
        "/escrow/deposits",
        json={"party_id": ids["provider_id"], "amount": 100},
        headers=ids["admin"],
    )
    assert ok.status_code == 201


def test_contract_detail_hidden_from_non_parties(rig):
    _, client, ids = rig
    asset_id = _register_asset(client, ids)
    contract_id = _draft(client, ids, asset_id)
    response = client.get(f"/contracts/{contract_id}", headers=ids["outsider"])
    assert response.status_code == 403
    assert client.get(f"/contracts/{contract_id}", headers=ids["admin"]).status_code == 200


def test_expiry_tick_is_admin_only(rig):
    _, client, ids = rig
    assert (
        client.post("/maintenance/expiry-ticks", json={}, headers=ids["provider"]).status_code
        == 403
    )
    response = client.post("/maintenance/expiry-ticks", json={}, headers=ids["admin"])
    assert response.status_code == 200 and response.json()["expired"] == []


def test_authorization_fuzz_wrong_actor_never_mutates(rig):
    """Every mutating endpoint, called by every identity that is not the
    operation's designated party, must refuse and leave state untouched."""
    broker, client, ids = rig
    asset_id = _register_asset(client, ids)
    contract_id = _draft(client, ids, asset_id)
    client.post(
        f"/contracts/{contract_id}/response",
        json={"decision": "accept"},
        headers=ids["consumer"],
    ).raise_for_status()
    for who in ("provider", "consumer"):
        client.post(f"/contracts/{contract_id}/signature", json={}, headers=ids[who])
    client.post("/escrow/deposits", json={"amount": 2000}, headers=ids["consumer"])
    hold_id = client.post(
        "/escrow/holds", json={"contract_id": contract_id}, headers=ids["consumer"]
    ).json()["hold_id"]

    # (method, path, body, wrong identities)
    attempts = [
        ("POST", "/parties",
         {"display_name": "Sneak", "role": "both", "industry": "airline"},
         ["provider", "consumer", "outsider"]),
        ("POST", "/assets",
         {"asset": dict(ASSET_FIELDS), "policy": dict(POLICY_FIELDS)},
         ["admin"]),  # admin keys have no party identity to own assets
        ("DELETE", f"/assets/{asset_id}", None, ["consumer", "outsider"]),
        ("POST", "/contracts",
         {"asset_id": asset_id, "consumer": ids["consumer_id"], "price": 5},
         ["consumer", "outsider"]),
        ("POST", f"/contracts/{contract_id}/proposals", {"price": 1},
         ["provider", "consumer", "outsider"]),  # Accepted: nobody can propose
        ("POST", f"/contracts/{contract_id}/response", {"decision": "accept"},
         ["provider", "consumer", "outsider"]),
        ("POST", f"/contracts/{contract_id}/signature", {"signature": "00" * 64},
         ["outsider"]),
        ("POST", f"/contracts/{contract_id}/termination", {"reason": "x"},
         ["outsider"]),
        ("POST", f"/contracts/{contract_id}/cancellation", None, ["outsider"]),
        ("POST", "/escrow/deposits",
         {"party_id": ids["provider_id"], "amount": 9}, ["consumer", "outsider"]),
        ("POST", "/escrow/holds", {"contract_id": contract_id},
         ["provider", "outsider", "consumer"]),  # consumer: hold already exists
        ("POST", f"/escrow/holds/{hold_id}/confirmation", None,
         ["consumer", "outsider"]),
        ("POST", f"/escrow/holds/{hold_id}/bypass", {}, ["provider", "outsider"]),
        ("POST", f"/escrow/holds/{hold_id}/refund", None, ["outsider"]),
        ("POST", "/maintenance/expiry-ticks", {}, ["provider", "consumer", "outsider"]),
    ]

    for method, path, body, wrong_ones in attempts:
        for who in wrong_ones:
            before = broker.state_digest()
            kwargs = {"headers": ids[who]}
            if body is not None:
                kwargs["json"] = body
            response = client.request(method, path, **kwargs)
            assert response.status_code >= 400, (method, path, who, response.text)
            assert broker.state_digest() == before, (method, path, who)

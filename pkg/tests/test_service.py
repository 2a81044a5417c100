import httpx
import pytest

from conftest import REFERENCE_TEXT

from bykovlab.service import app


@pytest.fixture(scope="module")
def client():
    import asyncio

    class SyncClient:
        def post(self, url, **kw):
            async def go():
                async with httpx.AsyncClient(
                    transport=httpx.ASGITransport(app=app),
                    base_url="http://testserver",
                    timeout=None,
                ) as ac:
                    return await ac.post(url, **kw)

            return asyncio.run(go())

        def get(self, url, **kw):
            async def go():
                async with httpx.AsyncClient(
                    transport=httpx.ASGITransport(app=app),
                    base_url="http://testserver",
                    timeout=None,
                ) as ac:
                    return await ac.get(url, **kw)

            return asyncio.run(go())

    return SyncClient()


def test_health(client):
    resp = client.get("/v1/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_validate_endpoint(client):
    resp = client.post("/v1/validate", json={"config_text": REFERENCE_TEXT})
    assert resp.status_code == 200
    data = resp.json()
    assert data["passed"] and data["stability_criterion"]
    assert data["artifacts"][0]["name"] == "validation.txt"
    assert data["artifacts"][0]["text"].startswith("# bykovlab artifact")


def test_validate_reports_domain_failure(client):
    bad = REFERENCE_TEXT.replace("C_v = 2.0", "C_v = 0.5")
    resp = client.post("/v1/validate", json={"config_text": bad})
    assert resp.status_code == 200
    assert not resp.json()["passed"]


def test_malformed_config_is_400(client):
    resp = client.post("/v1/validate", json={"config_text": "nonsense = 3\n"})
    assert resp.status_code == 400


def test_curves_endpoint_artifacts(client):
    resp = client.post(
        "/v1/curves", json={"config_text": REFERENCE_TEXT, "samples": 64}
    )
    assert resp.status_code == 200
    names = [a["name"] for a in resp.json()["artifacts"]]
    assert names == ["g_curve.csv", "h_curve.csv", "h_return.csv", "fold_point.csv"]


def test_curves_lambda_zero_degenerate(client):
    resp = client.post(
        "/v1/curves",
        json={"config_text": REFERENCE_TEXT, "lambda_override": 0.0, "samples": 64},
    )
    assert resp.status_code == 200
    arts = {a["name"]: a["text"] for a in resp.json()["artifacts"]}
    g_rows = [
        line for line in arts["g_curve.csv"].splitlines() if not line.startswith("#")
    ][1:]
    assert all(line.endswith(",0") or line.endswith(",-0") for line in g_rows)
    assert "degenerate unfolding" in arts["fold_point.csv"]


def test_orbit_endpoint(client):
    resp = client.post(
        "/v1/orbit",
        json={"config_text": REFERENCE_TEXT, "x": 0.3, "y": 0.2, "k": 5},
    )
    assert resp.status_code == 200
    data = resp.json()
    assert len(data["statuses"]) >= 1
    assert data["artifacts"][0]["name"] == "orbit.csv"


def test_horseshoe_endpoint(client):
    resp = client.post(
        "/v1/horseshoe",
        json={"config_text": REFERENCE_TEXT, "n_range": [0, 1], "tau": 0.05, "grid": 30},
    )
    assert resp.status_code == 200
    data = resp.json()
    assert data["matrix"] == [[1, 1], [1, 1]]
    assert data["cone_passed"] and data["cone_mu"] > 1.0


def test_tangency_endpoint(client):
    resp = client.post(
        "/v1/tangency",
        json={"config_text": REFERENCE_TEXT, "lambda_hi": 1e-1, "lambda_lo": 1e-3},
    )
    assert resp.status_code == 200
    recs = resp.json()["records"]
    assert len(recs) >= 2
    assert recs[0]["lam_star"] > recs[1]["lam_star"]


def test_itinerary_endpoint(client):
    resp = client.post(
        "/v1/itinerary", json={"config_text": REFERENCE_TEXT, "word": "1+,1+,2+,1+"}
    )
    assert resp.status_code == 200
    data = resp.json()
    assert data["exact"] and data["matched"] == 4
    assert "MATCH 4/4" in data["artifacts"][0]["text"]


def test_itinerary_bad_word_is_400(client):
    resp = client.post(
        "/v1/itinerary", json={"config_text": REFERENCE_TEXT, "word": "9?"}
    )
    assert resp.status_code == 400


def test_escape_endpoint(client):
    resp = client.post(
        "/v1/escape",
        json={
            "config_text": REFERENCE_TEXT,
            "samples": 1000,
            "horizon": 6,
            "n_range": [0, 1],
            "tau": 0.05,
        },
    )
    assert resp.status_code == 200
    data = resp.json()
    assert data["fractions"][0] == 1.0
    assert data["decay_rate"] < 1.0


def test_degenerate_unfolding_maps_to_422(client):
    resp = client.post(
        "/v1/horseshoe",
        json={"config_text": REFERENCE_TEXT, "lambda_override": 0.0},
    )
    assert resp.status_code == 422
    assert "DegenerateUnfolding" in resp.json()["detail"]


def test_endpoint_determinism(client):
    payload = {"config_text": REFERENCE_TEXT, "samples": 800, "horizon": 5}
    a = client.post("/v1/escape", json=payload).json()
    b = client.post("/v1/escape", json=payload).json()
    assert a == b

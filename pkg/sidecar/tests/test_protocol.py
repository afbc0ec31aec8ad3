import jsonschema
import pytest

# The protocol contract is owned by the primary package; the sidecar must
# validate against it bit-for-bit.
from apirag.providers import PROTOCOL_SCHEMAS


def test_embed_schema_conformance(client):
    request = {"v": 1, "texts": ["def f(a):\n    return a", ""]}
    jsonschema.validate(request, PROTOCOL_SCHEMAS["embed_request"])
    response = client.post("/embed", json=request)
    assert response.status_code == 200
    payload = response.json()
    jsonschema.validate(payload, PROTOCOL_SCHEMAS["embed_response"])
    assert len(payload["vectors"]) == 2
    assert all(len(vec) == payload["dim"] for vec in payload["vectors"])


def test_summarize_schema_conformance(client):
    request = {"v": 1, "code": "def add(a, b):\n    return a + b", "language": "python"}
    jsonschema.validate(request, PROTOCOL_SCHEMAS["summarize_request"])
    response = client.post("/summarize", json=request)
    assert response.status_code == 200
    payload = response.json()
    jsonschema.validate(payload, PROTOCOL_SCHEMAS["summarize_response"])
    assert payload["docstring"]  # nonempty for nonempty input


def test_summarize_ten_line_function(client):
    lines = ["def transform_rows(rows, factor):"] + [
        f"    step_{i} = rows[{i}] * factor" for i in range(8)
    ] + ["    return rows"]
    response = client.post("/summarize", json={"v": 1, "code": "\n".join(lines)})
    assert response.status_code == 200
    docstring = response.json()["docstring"]
    assert isinstance(docstring, str) and docstring.strip()
    assert "\n" not in docstring.strip()


def test_healthz_reports_dim_and_models(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    payload = response.json()
    assert payload["dim"] >= 1
    assert payload["models"]["embedding"].startswith("local/")


def test_malformed_json_yields_400_payload(client):
    response = client.post(
        "/embed", content=b"{not json", headers={"content-type": "application/json"}
    )
    assert response.status_code == 400
    assert response.json()["error"] == "bad_request"


def test_wrong_protocol_version_rejected(client):
    response = client.post("/embed", json={"v": 2, "texts": ["x"]})
    assert response.status_code == 400


def test_missing_fields_rejected(client):
    assert client.post("/embed", json={"v": 1}).status_code == 400
    assert client.post("/summarize", json={"v": 1}).status_code == 400
    assert client.post("/complete", json={"v": 1, "prompt": "p"}).status_code == 400


def test_overlong_input_yields_413_payload(client):
    huge = "x" * 200_001
    response = client.post("/embed", json={"v": 1, "texts": [huge]})
    assert response.status_code == 413
    assert response.json() == {"error": "too_long"}
    response = client.post("/summarize", json={"v": 1, "code": huge})
    assert response.status_code == 413


def test_unconfigured_completion_is_explicit(client):
    response = client.post(
        "/complete", json={"v": 1, "prompt": "def f(", "max_new_tokens": 8}
    )
    assert response.status_code == 501
    assert response.json()["error"] == "no_completion_model"

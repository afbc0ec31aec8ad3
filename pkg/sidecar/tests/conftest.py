import pytest
from fastapi.testclient import TestClient

from apirag_sidecar import SidecarConfig, create_app


@pytest.fixture(scope="session")
def app():
    return create_app(SidecarConfig())


@pytest.fixture(scope="session")
def client(app):
    with TestClient(app, base_url="http://sidecar") as c:
        yield c

"""Tests for the MC-DCSK Simulator API."""

import pytest
from fastapi.testclient import TestClient
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

from mcdcsk.config import settings
from mcdcsk.main import app
from mcdcsk.db.database import Base, engine_options, get_db, init_run_store


# Create test database
SQLALCHEMY_DATABASE_URL = "sqlite:///:memory:"
engine = create_engine(
    SQLALCHEMY_DATABASE_URL,
    connect_args={"check_same_thread": False},
    poolclass=StaticPool,
)
TestingSessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)


def override_get_db():
    """Override database dependency for testing."""
    db = TestingSessionLocal()
    try:
        yield db
    finally:
        db.close()


app.dependency_overrides[get_db] = override_get_db

NOISELESS_RUN = {
    "config": {"m": 4, "beta": 8},
    "ebn0_db": [10.0],
    "noiseless": True,
    "min_bit_errors": 1,
    "max_bits": 3000,
    "frames_per_batch": 100,
    "master_seed": 2,
}

RAYLEIGH_PROFILE = {
    "fading": "rayleigh",
    "paths": [{"gain": 0.5, "delay": 0}, {"gain": 0.5, "delay": 2}],
}


@pytest.fixture(scope="function")
def client():
    """Create a test client with a fresh database for each test."""
    Base.metadata.create_all(bind=engine)
    with TestClient(app) as test_client:
        yield test_client
    Base.metadata.drop_all(bind=engine)


class TestHealthEndpoint:
    """Tests for the health check endpoint."""

    def test_health_check(self, client):
        """Test health check returns healthy status."""
        response = client.get("/health")
        assert response.status_code == 200
        data = response.json()
        assert data["status"] == "healthy"
        assert data["database"] == "healthy"
        assert data["stored_runs"] == 0
        assert data["numerics"].startswith(f"mcdcsk-{data['version']} numpy-")

    def test_health_counts_stored_runs(self, client):
        client.post("/simulations", json=NOISELESS_RUN)
        assert client.get("/health").json()["stored_runs"] == 1

    def test_health_without_tables(self, client):
        Base.metadata.drop_all(bind=engine)
        data = client.get("/health").json()
        assert data["database"] == "unhealthy"
        assert data["stored_runs"] is None
        assert init_run_store(engine)

    def test_root(self, client):
        response = client.get("/")
        assert response.status_code == 200
        assert response.json()["docs"] == "/docs"


class TestAnalysisEndpoint:
    """Tests for the closed-form analysis endpoints."""

    def test_dbr(self, client):
        response = client.get("/analysis/dbr", params={"m": 4})
        assert response.status_code == 200
        data = response.json()
        assert data["dbr"] == pytest.approx(0.75)
        assert data["reference_share"] == pytest.approx(0.25)

    def test_dbr_invalid_m(self, client):
        response = client.get("/analysis/dbr", params={"m": 1})
        assert response.status_code == 400

    def test_spreading_factor(self, client):
        response = client.get("/analysis/spreading-factor", params={"t_b": 400, "bandwidth": 1, "m": 64})
        assert response.status_code == 200
        assert response.json()["beta"] == 5

    def test_spreading_factor_band_too_narrow(self, client):
        response = client.get("/analysis/spreading-factor", params={"t_b": 10, "bandwidth": 1, "m": 64})
        assert response.status_code == 400

    def test_plan(self, client):
        response = client.get("/analysis/plan", params={"m": 4, "alpha": 0.5})
        assert response.status_code == 200
        data = response.json()
        assert data["frequencies"] == [1.0, 2.0, 3.0, 4.0]
        assert data["b_c"] == pytest.approx(1.5)
        assert data["total_bandwidth"] == pytest.approx(6.0)

    def test_plan_invalid_alpha(self, client):
        response = client.get("/analysis/plan", params={"m": 4, "alpha": 2.0})
        assert response.status_code == 400

    def test_bpsk(self, client):
        response = client.get("/analysis/bpsk", params={"ebn0_db": 0})
        assert response.status_code == 200
        assert response.json()["ber"] == pytest.approx(0.0786496, rel=1e-5)

    def test_awgn_curve(self, client):
        response = client.post("/analysis/curve", json={"m": 16, "beta": 20, "ebn0_db": [4, 8, 12]})
        assert response.status_code == 200
        points = response.json()
        assert [p["method"] for p in points] == ["awgn_high_sf"] * 3
        assert points[0]["ber"] > points[1]["ber"] > points[2]["ber"]
        assert points[0]["profile_id"] == "awgn"

    def test_rayleigh_curve(self, client):
        response = client.post(
            "/analysis/curve",
            json={"m": 2, "beta": 80, "ebn0_db": [10, 20], "profile": RAYLEIGH_PROFILE},
        )
        assert response.status_code == 200
        points = response.json()
        assert points[0]["method"] == "rayleigh_integral"
        assert points[0]["ber"] > points[1]["ber"]

    def test_rayleigh_method_without_fading(self, client):
        response = client.post(
            "/analysis/curve",
            json={"m": 2, "beta": 80, "ebn0_db": [10], "method": "rayleigh_integral"},
        )
        assert response.status_code == 400

    def test_invalid_profile(self, client):
        profile = {"fading": "rayleigh", "paths": [{"gain": 0.5, "delay": 3}]}
        response = client.post("/analysis/curve", json={"m": 2, "beta": 80, "ebn0_db": [10], "profile": profile})
        assert response.status_code == 422


class TestSimulationsEndpoint:
    """Tests for the simulation run store endpoints."""

    def test_get_simulations_empty(self, client):
        response = client.get("/simulations")
        assert response.status_code == 200
        assert response.json() == []

    def test_create_simulation(self, client):
        response = client.post("/simulations", json=NOISELESS_RUN)
        assert response.status_code == 201
        data = response.json()
        assert data["m"] == 4
        assert data["beta"] == 8
        assert data["profile_id"] == "awgn"
        assert len(data["spec_hash"]) == 12
        (point,) = data["points"]
        assert point["errors"] == 0
        assert point["bits"] == 3000
        assert point["ber_analytic"] is not None

    def test_create_simulation_without_analytic(self, client):
        response = client.post("/simulations", params={"analytic": False}, json=NOISELESS_RUN)
        assert response.status_code == 201
        assert response.json()["points"][0]["ber_analytic"] is None

    def test_same_spec_same_hash(self, client):
        first = client.post("/simulations", json=NOISELESS_RUN).json()
        second = client.post("/simulations", json={**NOISELESS_RUN, "workers": 1}).json()
        assert first["spec_hash"] == second["spec_hash"]
        assert first["id"] != second["id"]

    def test_get_simulation(self, client):
        run_id = client.post("/simulations", json=NOISELESS_RUN).json()["id"]
        response = client.get(f"/simulations/{run_id}")
        assert response.status_code == 200
        assert response.json()["id"] == run_id

        listing = client.get("/simulations").json()
        assert [r["id"] for r in listing] == [run_id]

    def test_get_simulation_not_found(self, client):
        response = client.get("/simulations/99999")
        assert response.status_code == 404

    def test_delete_simulation(self, client):
        run_id = client.post("/simulations", json=NOISELESS_RUN).json()["id"]
        response = client.delete(f"/simulations/{run_id}")
        assert response.status_code == 204

        response = client.get(f"/simulations/{run_id}")
        assert response.status_code == 404

    def test_delete_simulation_not_found(self, client):
        response = client.delete("/simulations/99999")
        assert response.status_code == 404

    def test_budget_over_api_limit(self, client):
        response = client.post("/simulations", json={**NOISELESS_RUN, "max_bits": 50_000_000})
        assert response.status_code == 400

    def test_budget_defaults_to_api_limit(self, client, monkeypatch):
        monkeypatch.setattr(settings, "api_max_bits", 600)
        body = {k: v for k, v in NOISELESS_RUN.items() if k != "max_bits"}
        response = client.post("/simulations", json=body)
        assert response.status_code == 201
        assert response.json()["points"][0]["bits"] == 600

    def test_invalid_run_spec(self, client):
        response = client.post("/simulations", json={**NOISELESS_RUN, "ebn0_db": [5.0, 2.0]})
        assert response.status_code == 422


class TestRunStoreEngine:
    """Tests for the run store connection options."""

    def test_file_sqlite_shares_connections_across_threads(self):
        assert engine_options("sqlite:///./runs.db") == {"connect_args": {"check_same_thread": False}}

    def test_memory_sqlite_keeps_one_connection(self):
        assert engine_options("sqlite:///:memory:")["poolclass"] is StaticPool

    def test_server_databases_are_pinged(self):
        assert engine_options("postgresql://user@host/runs") == {"pool_pre_ping": True}

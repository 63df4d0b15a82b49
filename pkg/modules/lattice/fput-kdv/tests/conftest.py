import pytest


@pytest.fixture(scope="function")
def env_defaults(monkeypatch, tmp_path):
    monkeypatch.setenv("FPUT_KDV_THREADS", "1")
    monkeypatch.setenv("FPUT_KDV_LOG_LEVEL", "WARNING")

    monkeypatch.setenv("FPUT_KDV_PARAMETER_kind", "gamma_bound")
    monkeypatch.setenv("FPUT_KDV_PARAMETER_output_path", str(tmp_path / "gamma.csv"))
    monkeypatch.setenv("FPUT_KDV_PARAMETER_epsilon_list", "[0.5, 0.25]")
    monkeypatch.setenv("FPUT_KDV_PARAMETER_M_override", "40")
    monkeypatch.setenv("FPUT_KDV_PARAMETER_realizations", "2")
    monkeypatch.setenv("FPUT_KDV_PARAMETER_seed", "7")
    return tmp_path


@pytest.fixture(scope="function")
def single_thread(monkeypatch):
    monkeypatch.setenv("FPUT_KDV_THREADS", "1")

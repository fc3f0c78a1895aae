import pytest

from gmcluster.core_processes.ground_state.compute_moments import compute_moments
from gmcluster.core_processes.ground_state.solve_ground_state import solve_ground_state

TEST_GROUND_STATE_R_MAX = 25.0
TEST_GROUND_STATE_GRID_N = 8000
TEST_GROUND_STATE_TOL = 1e-12


def pytest_sessionstart():
    pytest.ground_state = solve_ground_state(
        r_max=TEST_GROUND_STATE_R_MAX,
        grid_n=TEST_GROUND_STATE_GRID_N,
        tol=TEST_GROUND_STATE_TOL,
    )
    pytest.ground_state_moments = compute_moments(pytest.ground_state)


@pytest.fixture
def ground_state():
    return pytest.ground_state


@pytest.fixture
def ground_state_moments():
    return pytest.ground_state_moments


@pytest.fixture
def data_folder_path(tmp_path, monkeypatch):
    from gmcluster.system.paths_and_filenames import path_getters

    monkeypatch.setenv("GMCLUSTER_DATA_FOLDER", str(tmp_path))
    monkeypatch.setattr(path_getters, "gmcluster_data_folder_path", None)
    return tmp_path


if __name__ == "__main__":
    pytest_sessionstart()

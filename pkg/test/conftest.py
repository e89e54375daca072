from mpi4py import MPI
import numpy as np
import pytest
from emfhole.input_parser import QuadratureConfig, Scenario, default_model


@pytest.fixture
def worst_case():
    """Full power preset, lambda_b = 1e-5, lambda_r = 1e-6, R = 50 m"""
    return default_model(Scenario.WORST)


@pytest.fixture
def typical_case():
    return default_model(Scenario.TYPICAL)


@pytest.fixture
def coarse_quad():
    """Looser tolerances for the expensive exposure index inversions"""
    return QuadratureConfig(tol_cdf=1.0e-3, tol_tail=1.0e-5, nodes=8)


@pytest.fixture
def closed_form_laplace():
    """Laplace transforms of nonnegative laws with known CDFs

    Returns a dict of name to :code:`(transform, cdf, central_range)`, the
    range holding the central 99 % of the mass.
    """
    return {
        "exponential": (
            lambda s: 1.0 / (1.0 + s),
            lambda w: 1.0 - np.exp(-w),
            (0.005, 5.3),
        ),
        "gamma_2_1": (
            lambda s: 1.0 / (1.0 + s) ** 2,
            lambda w: 1.0 - (1.0 + w) * np.exp(-w),
            (0.1, 7.4),
        ),
    }


@pytest.fixture()
def config_toml(mpi_file_name):
    out_str = """
    [meta]
    name = "exclusion zone example"
    tags = ["example", "config"]
    scenario = "worst"
    location = "in"

    [point_process]
    lambda_b = "100/km2"
    lambda_r = 1e-6
    hole_radius = 200.0

    [downlink]
    antenna_gain_db = 15.0
    snr_threshold_dl_db = 40.0
    nakagami_m = 1

    [uplink]
    epsilon = 0.6

    [compliance]
    w_max = 10.0
    rho = 0.95

    [numerics]
    tol_cdf = 1e-4
    tol_tail = 1e-6

    [montecarlo]
    n_realizations = 2000
    seed = 7
    """
    if MPI.COMM_WORLD.Get_rank() == 0:
        with open(mpi_file_name, 'w') as out_file:
            out_file.write(out_str)
    MPI.COMM_WORLD.Barrier()
    return mpi_file_name, out_str

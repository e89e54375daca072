import pytest
import warnings
import io
import logging
import numpy as np
import tomli
from mpi4py import MPI
from emfhole.input_parser import (
    Config,
    MonteCarloConfig,
    Scenario,
    UserLocation,
    check_config,
    check_montecarlo,
    check_seed,
    db_to_linear,
    default_model,
    effective_bs_density,
    linear_to_db,
    parse_config_toml,
    parse_density,
    read_config_toml,
)


def _remove_from_config(config_str, remove_str):
    sio = io.StringIO(config_str)
    sio_new = []
    for line in sio:
        if remove_str not in line.strip():
            sio_new.append(line.rstrip())
    return "\n".join(s for s in sio_new)


def _change_in_config(config_str, old_line, new_line):
    sio = io.StringIO(config_str)
    sio_new = []
    for line in sio:
        if line.strip().startswith(old_line.strip()):
            sio_new.append(new_line.rstrip())
        else:
            sio_new.append(line.rstrip())
    return "\n".join(s for s in sio_new)


def test_input_parser_read_config_toml(config_toml):
    config_toml_file, config_toml_str = config_toml
    file_content = read_config_toml(config_toml_file)
    assert config_toml_str == file_content


def test_input_parser_file(config_toml):
    _, config_toml_str = config_toml
    config = parse_config_toml(config_toml_str)
    assert isinstance(config, Config)
    assert isinstance(str(config), str)
    assert "lambda_B" in str(config)

    model = config.model
    assert config.name == "exclusion zone example"
    assert config.tags == ["example", "config"]
    assert config.scenario is Scenario.WORST
    assert config.location is UserLocation.INSIDE
    assert model.point_process.lambda_b == pytest.approx(1.0e-4)
    assert model.point_process.hole_radius == 200.0
    assert model.downlink.antenna_gain == pytest.approx(10.0 ** 1.5)
    assert model.downlink.snr_threshold_dl == pytest.approx(1.0e4)
    assert model.uplink.epsilon == 0.6
    assert config.montecarlo.seed == 7
    assert config.montecarlo.n_realizations == 2000
    assert config.quadrature.tol_tail == 1.0e-6


def test_input_parser_defaults_without_sections():
    config = parse_config_toml("")
    assert config.model == default_model(Scenario.WORST)
    assert config.location is UserLocation.OUTSIDE

    config = parse_config_toml('scenario = "typical"')
    dl = config.model.downlink
    assert dl.bs_transmit_power == pytest.approx(31.0)
    assert dl.alpha == 4.0 and dl.beta == 4.0


def test_input_parser_unknown_key(config_toml, caplog):
    caplog.set_level(logging.INFO)
    _, config_toml_str = config_toml
    changed = _change_in_config(config_toml_str, "epsilon =", "epsilom = 0.6")
    with pytest.raises(ValueError) as recorded_error:
        parse_config_toml(changed)
    message = str(recorded_error.value)
    assert all([(s in message) for s in ("Unknown", "epsilom")])
    assert "epsilom" in caplog.text


def test_input_parser_malformed_toml(config_toml):
    _, config_toml_str = config_toml
    changed = _change_in_config(config_toml_str, "w_max =", "w_max = = 3")
    with pytest.raises(tomli.TOMLDecodeError):
        parse_config_toml(changed)


@pytest.mark.parametrize(
    "key,line",
    [
        ("location", 'location = "nowhere"'),
        ("scenario", 'scenario = "best"'),
        ("epsilon", "epsilon = 1.5"),
        ("hole_radius", "hole_radius = -1.0"),
        ("lambda_b", 'lambda_b = "12/ha"'),
    ],
    ids=["location", "scenario", "epsilon", "hole_radius", "lambda_b"],
)
def test_input_parser_invalid_values(config_toml, key, line):
    _, config_toml_str = config_toml
    changed = _change_in_config(config_toml_str, f"{key} =", line)
    with pytest.raises(ValueError):
        parse_config_toml(changed)


def test_input_parser_both_db_and_linear(config_toml):
    _, config_toml_str = config_toml
    changed = _change_in_config(
        config_toml_str, "antenna_gain_db =",
        "antenna_gain_db = 15.0\nantenna_gain = 31.6",
    )
    with pytest.raises(ValueError) as recorded_error:
        parse_config_toml(changed)
    assert "antenna_gain" in str(recorded_error.value)


def test_input_parser_rho_percent(config_toml, caplog):
    caplog.set_level(logging.INFO)
    _, config_toml_str = config_toml
    changed = _change_in_config(config_toml_str, "rho =", "rho = 95")
    if MPI.COMM_WORLD.Get_rank() == 0:
        with pytest.warns(UserWarning) as recorded_warning:
            config = parse_config_toml(changed)
        message = recorded_warning[0].message.args[0]
        assert all([(s in message) for s in ("95", "percentage", "0.95")])
        assert "percentage" in caplog.text
    else:
        config = parse_config_toml(changed)
    assert config.model.compliance.rho == pytest.approx(0.95)


def test_input_parser_nakagami_m(config_toml):
    _, config_toml_str = config_toml
    changed = _change_in_config(config_toml_str, "nakagami_m =",
                                "nakagami_m = 2.0")
    with pytest.warns(UserWarning, match="nakagami_m"):
        config = parse_config_toml(changed)
    assert config.model.downlink.nakagami_m == 2
    assert isinstance(config.model.downlink.nakagami_m, int)

    changed = _change_in_config(config_toml_str, "nakagami_m =",
                                "nakagami_m = 2.5")
    with pytest.raises(ValueError, match="integer"):
        parse_config_toml(changed)


def test_input_parser_recompute_ref_path_gain():
    config = parse_config_toml("recompute_ref_path_gain = true")
    assert config.model.downlink.ref_path_gain == pytest.approx(
        8.4193e-5, rel=1e-3
    )
    model = default_model(Scenario.WORST, recompute_ref_path_gain=True)
    assert model == config.model


@pytest.mark.parametrize(
    "value,expected",
    [
        ("20/km2", 2.0e-5),
        ("1e-4", 1.0e-4),
        ("5 / m2", 5.0),
        ("100/km^2", 1.0e-4),
        (3, 3.0),
        (2.5e-5, 2.5e-5),
    ],
)
def test_parse_density(value, expected):
    assert parse_density(value) == pytest.approx(expected)


def test_parse_density_invalid():
    with pytest.raises(ValueError):
        parse_density("many/km2")
    with pytest.raises(TypeError):
        parse_density(True)


def test_db_conversion():
    assert db_to_linear(40.0) == pytest.approx(1.0e4)
    assert db_to_linear(-40.0) == pytest.approx(1.0e-4)
    assert linear_to_db(db_to_linear(15.0)) == pytest.approx(15.0)


def test_effective_bs_density(worst_case):
    pp = worst_case.point_process
    assert effective_bs_density(pp) == pytest.approx(
        1.0e-5 * np.exp(-1.0e-6 * 50.0 ** 2)
    )
    corrected = worst_case.replace(php_pi_correction=True)
    assert corrected.effective_bs_density == pytest.approx(
        1.0e-5 * np.exp(-np.pi * 1.0e-6 * 50.0 ** 2)
    )
    assert worst_case.replace(hole_radius=0.0).effective_bs_density == 1.0e-5


def test_network_model_replace(worst_case):
    changed = worst_case.replace(lambda_b=1.0e-4, epsilon=0.6, w_max=2.0)
    assert changed.point_process.lambda_b == 1.0e-4
    assert changed.uplink.epsilon == 0.6
    assert changed.compliance.w_max == 2.0
    assert changed.downlink == worst_case.downlink
    assert worst_case.point_process.lambda_b == 1.0e-5

    with pytest.raises(TypeError):
        worst_case.replace(lambda_c=1.0)
    with pytest.raises(ValueError):
        worst_case.replace(epsilon=0.0)
    with pytest.raises(ValueError):
        worst_case.replace(beta=2.0)

    flat = worst_case.flat()
    assert flat["lambda_b"] == 1.0e-5
    assert flat["sar_dl"] == 0.0042
    assert len(flat) == 24


def test_network_model_derived(worst_case):
    assert worst_case.eirp == pytest.approx(200.0 * 10.0 ** 1.5)
    assert worst_case.field_scale == pytest.approx(
        worst_case.eirp / (4.0 * np.pi)
    )
    ul = worst_case.uplink
    x_max = worst_case.x_max
    assert ul.pu_coeff * x_max ** (4.0 * ul.epsilon) == pytest.approx(
        ul.p_max
    )
    assert UserLocation.INSIDE.v(50.0) == 50.0
    assert UserLocation.OUTSIDE.v(50.0) == 0.0


def test_check_seed(worst_case):
    config = Config(model=worst_case)
    seeded = check_seed(config)
    assert isinstance(seeded.montecarlo.seed, int)
    assert seeded.montecarlo.seed >= 0
    assert config.montecarlo.seed is None

    config = Config(model=worst_case, montecarlo=MonteCarloConfig(seed=-3))
    with pytest.raises(ValueError, match="seed"):
        check_seed(config)


def test_check_montecarlo(worst_case, caplog):
    caplog.set_level(logging.INFO)
    config = Config(
        model=worst_case, montecarlo=MonteCarloConfig(n_realizations=1.0e4)
    )
    config = check_montecarlo(config)
    assert config.montecarlo.n_realizations == 10000

    config = Config(
        model=worst_case, montecarlo=MonteCarloConfig(n_realizations=0)
    )
    with pytest.raises(ValueError):
        check_montecarlo(config)

    config = Config(
        model=worst_case, montecarlo=MonteCarloConfig(window_radius=40.0)
    )
    with pytest.raises(ValueError, match="hole radius"):
        check_montecarlo(config)

    config = Config(
        model=worst_case, montecarlo=MonteCarloConfig(window_factor=0.5)
    )
    with pytest.warns(UserWarning, match="window_factor"):
        config = check_montecarlo(config)
    assert config.montecarlo.window_factor == 1.0
    assert "window_factor" in caplog.text


def test_check_config_and_metadata(config_toml):
    _, config_toml_str = config_toml
    config = check_config(parse_config_toml(config_toml_str))
    assert config.name == "exclusion zone example"
    meta = config.metadata()
    assert meta["lambda_b"] == pytest.approx(1.0e-4)
    assert meta["location"] == "in"
    assert meta["seed"] == 7
    assert "threads" not in meta
    assert "name" not in meta

    config = check_config(Config(model=default_model()))
    assert config.name.startswith("emfhole")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        check_config(Config(model=default_model(),
                            montecarlo=MonteCarloConfig(seed=1)))

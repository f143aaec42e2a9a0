import os

import pytest

from evareal.configfile import parse_config

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def config_path(name):
    return os.path.join(CONFIG_DIR, name)


@pytest.fixture(scope="session")
def smalldata_k0_run(tmp_path_factory):
    """Full smalldata-K0 reference run, shared by the acceptance criteria."""
    from evareal.harness import evolve_run
    cfg = parse_config(config_path("smalldata-K0.cfg"))
    out = tmp_path_factory.mktemp("run_k0")
    return evolve_run(cfg, str(out))


@pytest.fixture(scope="session")
def smalldata_km1_run(tmp_path_factory):
    from evareal.harness import evolve_run
    cfg = parse_config(config_path("smalldata-Kminus1.cfg"))
    out = tmp_path_factory.mktemp("run_km1")
    return evolve_run(cfg, str(out))


@pytest.fixture(scope="session")
def smalldata_k1_run(tmp_path_factory):
    from evareal.harness import evolve_run
    cfg = parse_config(config_path("smalldata-K1.cfg"))
    out = tmp_path_factory.mktemp("run_k1")
    return evolve_run(cfg, str(out))

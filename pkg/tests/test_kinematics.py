import math

import numpy as np
import pytest

from evareal.kinematics import (MassShellPoint, SimConfig, Symmetry, sin_k,
                                v_factor, validate_config)


def test_sin_k_cases():
    assert sin_k(0, 0.7) == 1.0
    assert sin_k(1, math.pi / 2) == pytest.approx(1.0, abs=1e-15)
    assert sin_k(-1, 0.0) == 0.0
    assert sin_k(1, 0.3) == pytest.approx(math.sin(0.3))
    assert sin_k(-1, 0.3) == pytest.approx(math.sinh(0.3))


def test_sin_k_plane_is_identically_one():
    theta = np.linspace(-5.0, 5.0, 41)
    assert np.all(sin_k(Symmetry.PLANE, theta) == 1.0)


def test_sin_k_rejects_bad_class():
    with pytest.raises(ValueError):
        sin_k(2, 0.1)


def test_v_factor_values():
    assert v_factor(1.0, 0.0, 0.0) == 1.0
    assert v_factor(2.0, 1.0, 4.0) == pytest.approx(math.sqrt(3.0), rel=1e-15)
    # frozen from a 30-digit evaluation of sqrt(1 + 0.3^2 + 2/10^2)
    assert v_factor(10.0, 0.3, 2.0) == pytest.approx(1.0535653752852739, rel=1e-15)


def test_v_factor_domain_errors():
    with pytest.raises(ValueError):
        v_factor(0.0, 0.1, 0.1)
    with pytest.raises(ValueError):
        v_factor(-1.0, 0.1, 0.1)
    with pytest.raises(ValueError):
        v_factor(1.0, 0.1, -0.1)


def test_v_factor_monotonicity_on_sampled_triples():
    rng = np.random.default_rng(7)
    t = rng.uniform(0.2, 30.0, 300)
    w = rng.uniform(-3.0, 3.0, 300)
    F = rng.uniform(0.0, 8.0, 300)
    V = v_factor(t, w, F)
    assert np.all(V >= 1.0)
    assert np.all(v_factor(t, 1.5 * w, F) >= V)
    assert np.all(v_factor(t, w, F + 0.5) > V)
    pos = F > 0
    assert np.all(v_factor(1.5 * t[pos], w[pos], F[pos]) < V[pos])


def test_mass_shell_point():
    p = MassShellPoint(t=2.0, w=1.0, F=4.0)
    assert p.v == pytest.approx(math.sqrt(3.0))
    with pytest.raises(ValueError):
        MassShellPoint(t=0.0, w=0.0, F=0.0)
    with pytest.raises(ValueError):
        MassShellPoint(t=1.0, w=0.0, F=-1.0)


def test_validate_config_accepts_defaults():
    assert validate_config(SimConfig()) == []


def test_validate_config_spherical_t0():
    cfg = SimConfig(K=1, Lambda=3.0, t0=0.5)
    errs = validate_config(cfg)
    assert any("spherical requires t0 > Lambda^(-1/2)" in e for e in errs)
    assert any("0.577" in e for e in errs)
    # the same t0 is fine for plane symmetry
    assert validate_config(SimConfig(K=0, Lambda=3.0, t0=0.5)) == []
    # and a larger t0 is fine for the spherical case
    assert validate_config(SimConfig(K=1, Lambda=3.0, t0=2.0 * 3.0**-0.5)) == []


def test_validate_config_grid_too_small():
    errs = validate_config(SimConfig(Nr=2))
    assert any("grid too small" in e and "Nr" in e for e in errs)


def test_validate_config_collects_all_violations():
    cfg = SimConfig(K=5, Lambda=-1.0, Nr=2, Nw=3, cfl=1.5, z=2.0, A=-2.0)
    errs = validate_config(cfg)
    assert len(errs) >= 7

import numpy as np
import pytest

from ewbem.material import Material, wave_speeds, wavenumbers


def test_steel_rod_wave_speeds():
    m = Material.from_young_poisson(2.11e11, 0.0, 7850.0)
    c_s, c_p = wave_speeds(m)
    assert m.mu == pytest.approx(2.11e11 / 2.0)
    assert c_s == pytest.approx(np.sqrt(m.mu / 7850.0))
    assert c_p == pytest.approx(np.sqrt(2.11e11 / 7850.0))
    assert c_p == pytest.approx(5184.5, rel=1e-4)


def test_unit_material_speeds():
    m = Material.from_lame(0.0, 1.0, 1.0)
    c_s, c_p = wave_speeds(m)
    assert c_s == pytest.approx(1.0)
    assert c_p == pytest.approx(np.sqrt(2.0))


def test_aluminum_speed_ratio():
    m = Material.from_young_poisson(69e9, 0.3, 2700.0)
    c_s, c_p = wave_speeds(m)
    assert c_p / c_s == pytest.approx(np.sqrt(2 * (1 - 0.3) / (1 - 2 * 0.3)))
    assert c_p / c_s == pytest.approx(1.8708, rel=1e-4)
    assert c_p > c_s > 0


def test_wavenumber_ratio_property():
    m = Material.from_young_poisson(69e9, 0.3, 2700.0)
    rng = np.random.default_rng(5)
    for _ in range(20):
        omega = complex(rng.uniform(1, 1e5), -rng.uniform(0, 1e3))
        k_s, k_p = wavenumbers(m, omega)
        assert k_p / k_s == pytest.approx(m.c_s / m.c_p, rel=1e-14)


def test_wavenumbers_values_and_signs():
    m = Material.from_lame(0.0, 2.5e3, 1.0)  # c_s = 50 m/s
    assert m.c_s == pytest.approx(50.0)
    k_s, _ = wavenumbers(m, 100.0 - 5.0j)
    assert k_s == pytest.approx(2.0 - 0.1j)

    # purely damped frequency: k is negative imaginary and the kernel
    # radial factor exp(-i k r) has magnitude exp(-eta r / c) < 1
    eta = 400.0
    k_s, k_p = wavenumbers(m, -1j * eta)
    assert k_s.real == pytest.approx(0.0)
    assert k_s.imag < 0
    r = 0.37
    assert abs(np.exp(-1j * k_s * r)) == pytest.approx(np.exp(-eta * r / m.c_s))
    assert abs(np.exp(-1j * k_s * r)) < 1

    # real frequency: real wavenumbers
    k_s, k_p = wavenumbers(m, 123.0)
    assert k_s.imag == 0 and k_p.imag == 0

    with pytest.raises(ValueError):
        wavenumbers(m, 1.0 + 1.0j)


def test_young_poisson_roundtrip():
    rng = np.random.default_rng(9)
    for _ in range(25):
        E = 10 ** rng.uniform(6, 12)
        nu = rng.uniform(-0.9, 0.49)
        m = Material.from_young_poisson(E, nu, 1000.0)
        assert m.E == pytest.approx(E, rel=1e-14)
        assert m.nu == pytest.approx(nu, rel=1e-14, abs=1e-15)


def test_zero_poisson_is_exact():
    m = Material.from_young_poisson(2.11e11, 0.0, 7850.0)
    assert m.lam == 0.0
    assert m.nu == 0.0


def test_invalid_materials_rejected():
    with pytest.raises(ValueError):
        Material.from_lame(0.0, -1.0, 1000.0)
    with pytest.raises(ValueError):
        Material.from_lame(0.0, 1.0, -5.0)
    with pytest.raises(ValueError):
        Material.from_young_poisson(1e9, 0.5, 1000.0)
    with pytest.raises(ValueError):
        Material.from_young_poisson(-1e9, 0.2, 1000.0)

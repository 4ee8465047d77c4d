import math

import numpy as np
import pytest

import conical_radon as crt


def square_grid(m, n, half=2.0):
    h = 2 * half / (n - 1)
    return crt.Grid.isotropic(m, n, h, -half, n, h, -half)


def test_constants():
    assert crt.alpha(1) == pytest.approx(-2.0)
    assert crt.alpha(2) * crt.beta(2) == pytest.approx(2 * math.sqrt(2) * math.pi**2)
    assert crt.even_constant(2) == pytest.approx(8 * math.pi)


def test_symbol_matches_oracle():
    for w, tau in [(0.5, 1.0), (2.0, 4.0)]:
        d = crt.symbol_D([w, 0.0], complex(0, -tau))
        assert abs(d - crt.oracle_symbol(w, tau, 2)) < 1e-8 * abs(d)


def test_numpy_round_trip():
    grid = crt.Grid(1, [5, 4], [0.5, 0.25], [-1.0, 0.0])
    values = np.arange(20, dtype=float).reshape(5, 4)
    f = crt.Field(grid, values)
    assert f.grid == grid
    np.testing.assert_array_equal(f.numpy(), values)
    with pytest.raises(ValueError):
        crt.Field(grid, np.zeros((4, 5)))


def test_even_roundtrip():
    grid = square_grid(1, 129)
    f = crt.bump(grid, [0.0, -0.5])
    g = crt.forward(f)
    assert crt.relative_l2_error(crt.invert(g), f) < 0.02
    report = crt.check_range(g)
    assert report["all_pass"]
    assert report["parity"] == "even"


def test_identity_and_rejection():
    grid = square_grid(1, 129)
    f = crt.bump(grid, [0.0, -0.5])
    lhs = crt.box(crt.forward(f))
    assert crt.relative_l2_error(lhs, 2.0 * crt.bump_dt(grid, [0.0, -0.5]), margin=4) < 0.02
    assert not crt.check_range(crt.bump(grid, [0.3, 0.5], radius=0.4))["all_pass"]


def test_errors(tmp_path):
    grid = crt.Grid(1, [5, 4], [0.5, 0.25], [-1.0, 0.0])
    with pytest.raises(crt.DomainError):
        crt.forward(crt.Field(grid), phi=0.0)
    path = tmp_path / "bad.crtf"
    path.write_bytes(b"XXXX" + bytes(100))
    with pytest.raises(crt.FormatError, match="offset 0"):
        crt.read_crtf(str(path))


def test_crtf_file(tmp_path):
    grid = square_grid(2, 12)
    f = crt.bump(grid, [0.0, 0.0, 0.0], radius=1.5)
    path = str(tmp_path / "f.crtf")
    crt.write_crtf(path, f)
    back = crt.read_crtf(path)
    np.testing.assert_array_equal(back.numpy(), f.numpy())

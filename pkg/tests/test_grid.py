import math
import re

import numpy as np
import pytest

import morreylab as m


def small_spec(n_s=81, n_phi=17):
    return m.GridSpec(r_min=2.0**-4, r_max=2.0**6, n_s=n_s, n_phi=n_phi)


def random_interior_field(grid, seed=0, pin_value=1.0):
    rng = np.random.default_rng(seed)
    field = m.ScalarField(grid, rng.standard_normal((grid.n_s, grid.n_phi)))
    return field.apply_dirichlet(pin_value=pin_value), rng


# ----------------------------------------------------------------- geometry

def test_three_node_grids():
    g = m.build_grid(m.GridSpec(r_min=math.exp(-1), r_max=math.exp(1),
                                n_s=3, n_phi=3))
    assert np.array_equal(g.s, [-1.0, 0.0, 1.0])
    assert np.array_equal(g.phi, [0.0, np.pi / 2, np.pi])
    assert g.pin_index == (1, 1)
    assert g.r[1] == 1.0


def test_pin_node_exact_on_production_grid():
    g = m.build_grid(m.GridSpec(r_min=2.0**-6, r_max=2.0**12, n_s=577, n_phi=65))
    i0, j0 = g.pin_index
    assert g.s[i0] == 0.0
    assert g.r[i0] == 1.0
    assert g.phi[j0] == 0.5 * np.pi


@pytest.mark.parametrize("kwargs", [
    dict(r_min=1.5, r_max=4.0, n_s=9, n_phi=9),      # r_min >= 1
    dict(r_min=0.5, r_max=0.9, n_s=9, n_phi=9),      # r_max <= 1
    dict(r_min=0.25, r_max=4.0, n_s=9, n_phi=8),     # even n_phi
    dict(r_min=0.25, r_max=4.0, n_s=2, n_phi=9),     # too few s nodes
    dict(r_min=0.5, r_max=math.e, n_s=3, n_phi=9),   # s = 0 not on grid
])
def test_spec_rejections(kwargs):
    with pytest.raises(ValueError):
        m.GridSpec(**kwargs)


def test_area_is_exact():
    g = m.build_grid(small_spec())
    assert abs(g.cell_weight.sum() - g.area()) < 1e-12 * g.area()


# ------------------------------------------------------------------- energy

def test_energy_zero_field():
    g = m.build_grid(small_spec())
    f = m.ScalarField(g)
    assert m.energy(f, m.EnergyParams(p=4.0, eps=0.0)) == 0.0


def test_energy_constant_integrand_exact():
    g = m.build_grid(small_spec())
    f = m.ScalarField(g)
    eps = 0.37
    expected = eps**4 / 4.0 * g.area()
    got = m.energy(f, m.EnergyParams(p=4.0, eps=eps))
    assert abs(got - expected) < 1e-14 * expected


def test_energy_unit_gradient_second_order():
    # u = y has |grad u| = 1, so the p-energy is area/p
    errs = []
    for n_s, n_phi in ((81, 17), (161, 33)):
        g = m.build_grid(small_spec(n_s, n_phi))
        f = m.ScalarField(g, np.exp(g.s)[:, None] * np.sin(g.phi)[None, :])
        e = m.energy(f, m.EnergyParams(p=4.0, eps=0.0))
        exact = g.area() / 4.0
        errs.append(abs(e - exact) / exact)
    assert errs[0] < 0.01
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_energy_rejects_non_finite():
    g = m.build_grid(small_spec())
    f = m.ScalarField(g)
    f.values[5, 5] = np.nan
    with pytest.raises(ValueError):
        m.energy(f, m.EnergyParams(p=4.0, eps=0.1))


def test_energy_convexity_surrogate():
    g = m.build_grid(small_spec(41, 9))
    rng = np.random.default_rng(7)
    params = m.EnergyParams(p=4.0, eps=0.0)
    for _ in range(10):
        u = m.ScalarField(g, rng.standard_normal((41, 9)))
        v = m.ScalarField(g, rng.standard_normal((41, 9)))
        lam = rng.uniform(0.05, 0.95)
        mix = m.ScalarField(g, lam * u.values + (1 - lam) * v.values)
        lhs = m.energy(mix, params)
        rhs = lam * m.energy(u, params) + (1 - lam) * m.energy(v, params)
        assert lhs <= rhs * (1 + 1e-12) + 1e-12


def test_energy_reflection_symmetry():
    g = m.build_grid(small_spec())
    f, _ = random_interior_field(g)
    params = m.EnergyParams(p=4.0, eps=0.05)
    mirrored = m.ScalarField(g, f.values[:, ::-1])
    e1, e2 = m.energy(f, params), m.energy(mirrored, params)
    assert abs(e1 - e2) < 1e-13 * max(1.0, abs(e1))


# ----------------------------------------------------------------- gradient

def test_gradient_matches_directional_derivative():
    g = m.build_grid(small_spec())
    field, rng = random_interior_field(g)
    params = m.EnergyParams(p=4.0, eps=0.1)
    grad = m.energy_gradient(field, params).values
    free = ~g.constrained_mask()
    for h, tol in ((1e-4, 3e-7), (1e-5, 1e-8)):
        for _ in range(20):
            delta = np.zeros_like(grad)
            delta[free] = rng.standard_normal(int(free.sum()))
            up = m.ScalarField(g, field.values + h * delta)
            dn = m.ScalarField(g, field.values - h * delta)
            fd = (m.energy(up, params) - m.energy(dn, params)) / (2 * h)
            assert abs(fd - (grad * delta).sum()) < tol * max(1.0, abs(fd))


def test_gradient_zero_at_origin_field():
    g = m.build_grid(small_spec())
    f = m.ScalarField(g)
    grad = m.energy_gradient(f, m.EnergyParams(p=4.0, eps=0.1)).values
    assert np.all(grad == 0.0)


def test_gradient_constrained_entries_zero():
    g = m.build_grid(small_spec())
    field, _ = random_interior_field(g)
    grad = m.energy_gradient(field, m.EnergyParams(p=4.0, eps=0.1)).values
    assert np.all(grad[g.constrained_mask()] == 0.0)


def test_gradient_locality_bit_identical():
    g = m.build_grid(small_spec())
    field, _ = random_interior_field(g)
    params = m.EnergyParams(p=4.0, eps=0.1)
    before = m.energy_gradient(field, params).values
    poke = field.copy()
    pi, pj = 20, 8
    poke.values[pi, pj] += 0.5
    after = m.energy_gradient(poke, params).values
    # only the 3x3 neighborhood of the poked node may change
    changed = before != after
    ii, jj = np.nonzero(changed)
    assert np.all(np.abs(ii - pi) <= 1)
    assert np.all(np.abs(jj - pj) <= 1)
    far = np.ones_like(changed)
    far[pi - 1:pi + 2, pj - 1:pj + 2] = False
    assert np.array_equal(before[far], after[far])


def test_hessian_matches_gradient_differences():
    g = m.build_grid(small_spec(41, 9))
    field, rng = random_interior_field(g, seed=3)
    params = m.EnergyParams(p=4.0, eps=0.1)
    hess = m.energy_hessian(field, params)
    free = ~g.constrained_mask()
    h = 1e-5
    for _ in range(5):
        delta = np.zeros_like(field.values)
        delta[free] = rng.standard_normal(int(free.sum()))
        gp = m.energy_gradient(m.ScalarField(g, field.values + h * delta),
                               params).values
        gm = m.energy_gradient(m.ScalarField(g, field.values - h * delta),
                               params).values
        fd = (gp - gm) / (2 * h)
        hd = np.asarray(hess @ delta.ravel()).reshape(delta.shape)
        hd[g.constrained_mask()] = 0.0
        assert np.abs(fd - hd).max() < 1e-7 * max(1.0, np.abs(hd).max())


def test_hessian_requires_regularization():
    g = m.build_grid(small_spec(41, 9))
    field, _ = random_interior_field(g)
    with pytest.raises(ValueError):
        m.energy_hessian(field, m.EnergyParams(p=4.0, eps=0.0))


# -------------------------------------------------------------- interpolate

def test_interpolate_nodes_exact():
    g = m.build_grid(small_spec())
    field, _ = random_interior_field(g)
    for i in (0, 3, 40, 80):
        for j in (0, 8, 16):
            assert m.interpolate(field, g.r[i], g.phi[j]) == field.values[i, j]


def test_interpolate_linear_and_bilinear_exact():
    g = m.build_grid(small_spec())
    f_lin = m.ScalarField(g, np.broadcast_to(g.s[:, None],
                                             (g.n_s, g.n_phi)).copy())
    r_half = math.exp(g.s[10] + 0.5 * g.ds)
    assert abs(m.interpolate(f_lin, r_half, g.phi[4])
               - (g.s[10] + 0.5 * g.ds)) < 1e-13
    f_bil = m.ScalarField(g, g.s[:, None] * g.phi[None, :])
    rng = np.random.default_rng(4)
    for _ in range(25):
        s = rng.uniform(g.s[0], g.s[-1])
        phi = rng.uniform(0.0, np.pi)
        got = m.interpolate(f_bil, math.exp(s), phi)
        assert abs(got - s * phi) < 1e-12


def test_interpolate_rejects_outside():
    g = m.build_grid(small_spec())
    field, _ = random_interior_field(g)
    with pytest.raises(ValueError):
        m.interpolate(field, g.spec.r_max * 1.5, 1.0)
    with pytest.raises(ValueError):
        m.interpolate(field, 1.0, -0.5)


# ------------------------------------------------------------ serialization

def test_field_dump_round_trip(tmp_path):
    g = m.build_grid(small_spec(41, 9))
    field, _ = random_interior_field(g)
    path = tmp_path / "field.txt"
    m.save_field(field, path, p=4.0)
    loaded, header = m.load_field(path)
    assert header["p"] == 4.0
    assert loaded.grid.spec == g.spec
    assert np.array_equal(loaded.values, field.values)


def test_field_dump_rejects_garbage(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("not a field\n{}\n")
    with pytest.raises(ValueError):
        m.load_field(path)


def test_csv_export_format(tmp_path):
    g = m.build_grid(m.GridSpec(r_min=math.exp(-1), r_max=math.exp(1),
                                n_s=3, n_phi=3))
    field = m.ScalarField(g, np.arange(9.0).reshape(3, 3))
    path = tmp_path / "field.csv"
    m.field_to_csv(field, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "r,phi,value"
    assert len(lines) == 1 + 9
    num = r"-?\d\.\d{16}e[+-]\d+"
    assert re.fullmatch(f"{num},{num},{num}", lines[1])

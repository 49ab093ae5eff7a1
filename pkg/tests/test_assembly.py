"""Mesh construction and discrete-form consistency with the quadrature layer."""

import numpy as np
import pytest

from conftest import make_mode, random_field
from rtspectra import assembly, modereduce as mr
from rtspectra.equilibrium import Geometry
from rtspectra.errors import InvalidGradingError
from rtspectra.params import PhysicalParams


def test_uniform_mesh_nodes(geometry):
    mesh = assembly.build_mesh(geometry, n_per_layer=4, grading=1.0)
    assert np.allclose(mesh.nodes, np.linspace(-1.0, 1.0, 9))
    assert mesh.nodes[0] == geometry.h_minus and mesh.nodes[-1] == geometry.h_plus
    assert 0.0 in mesh.nodes


def test_graded_mesh_ratio(geometry):
    mesh = assembly.build_mesh(geometry, n_per_layer=8, grading=2.0)
    sizes = np.diff(mesh.nodes)
    i0 = mesh.interface_index
    # element nearest the interface is half its outward neighbor, both layers
    assert sizes[i0] / sizes[i0 + 1] == pytest.approx(0.5, rel=1e-12)
    assert sizes[i0 - 1] / sizes[i0 - 2] == pytest.approx(0.5, rel=1e-12)
    assert not np.any((mesh.nodes[:-1] < 0) & (mesh.nodes[1:] > 0))


def test_interior_unknown_count(geometry, canonical_profile, baseline_params):
    n = 12
    mesh = assembly.build_mesh(geometry, n_per_layer=n)
    mm = assembly.assemble(canonical_profile, baseline_params, make_mode(1, 0, geometry), mesh)
    assert mm.n_dof == 3 * (2 * n - 1)


def test_invalid_grading(geometry):
    with pytest.raises(InvalidGradingError):
        assembly.build_mesh(geometry, n_per_layer=8, grading=0.8)
    with pytest.raises(ValueError):
        assembly.build_mesh(geometry, n_per_layer=3)


@pytest.fixture(scope="module")
def assembled(canonical_profile, mixed_params, mesh60, geometry):
    mode = make_mode(2, -1, geometry)
    return assembly.assemble(canonical_profile, mixed_params, mode, mesh60)


def all_matrices(mm):
    return {
        "mass": mm.mass, "gravity": mm.gravity, "compress": mm.compress,
        "magnetic": mm.magnetic, "elastic": mm.elastic,
        "dissipation": mm.dissipation, "metric": mm.coercivity_metric,
    }


def test_hermitian(assembled):
    for name, X in all_matrices(assembled).items():
        defect = np.linalg.norm(X - X.conj().T) / max(np.linalg.norm(X), 1e-300)
        assert defect <= 1e-12, name


def test_definiteness(assembled):
    evs = np.linalg.eigvalsh(assembled.mass)
    assert evs.min() > 0
    evs = np.linalg.eigvalsh(assembled.dissipation)
    assert evs.min() > 0
    for name, X in (("compress", assembled.compress), ("magnetic", assembled.magnetic)):
        evs = np.linalg.eigvalsh(X)
        assert evs.min() >= -1e-12 * np.linalg.norm(X), name


def test_elastic_dominates_discrete_gradient(assembled, mixed_params, mesh60, geometry, rng):
    kmin = mixed_params.kappa_min
    co = assembled.coeffs
    mode = assembled.mode
    for _ in range(30):
        f = random_field(mesh60.nodes, rng)
        el = assembled.quadratic(assembled.elastic, f)
        grad = mr.gradient_form(f, co, mode)
        assert el >= kmin * grad - 1e-12 * max(1.0, el)


def test_galerkin_consistency(assembled, mesh60, rng):
    co = assembled.coeffs
    mode = assembled.mode
    for _ in range(100):
        f = random_field(mesh60.nodes, rng)
        pairs = (
            (assembled.mass, mr.mass_form(f, co)),
            (assembled.gravity, mr.gravity_form(f, co, mode)),
            (assembled.compress, mr.compressibility_form(f, co, mode)),
            (assembled.magnetic, mr.magnetic_form(f, co, mode)),
            (assembled.elastic, mr.elastic_form(f, co, mode)),
            (assembled.dissipation, mr.dissipation_form(f, co, mode)),
        )
        for X, form_value in pairs:
            assert assembled.quadratic(X, f) == pytest.approx(form_value, rel=1e-10, abs=1e-12)


def test_magnetic_zero_matrix_without_field(canonical_profile, baseline_params, mesh60, geometry):
    mm = assembly.assemble(canonical_profile, baseline_params, make_mode(1, 1, geometry), mesh60)
    assert np.all(mm.magnetic == 0.0)


def test_mixed_field_matrices_complex(assembled):
    # M3 != 0 with in-plane projection nonzero: skew part present
    assert np.iscomplexobj(assembled.magnetic)
    assert np.linalg.norm(assembled.magnetic.imag) > 0


def test_vertical_field_matrices_real(canonical_profile, mesh60, geometry):
    params = PhysicalParams(M=(0.0, 0.0, 1.5))
    mm = assembly.assemble(canonical_profile, params, make_mode(1, 1, geometry), mesh60)
    assert not np.iscomplexobj(mm.magnetic)


def test_field_roundtrip(assembled, mesh60, rng):
    f = random_field(mesh60.nodes, rng)
    vec = assembled.tilde_vector(f.values)
    back = assembled.field_from_tilde(vec)
    assert np.allclose(back.values, f.values)


def test_export(tmp_path, assembled):
    npz = tmp_path / "mode.npz"
    assembly.export_matrices(assembled, str(npz), fmt="npz")
    data = np.load(npz)
    assert data["k1"] == assembled.mode.k1
    assert data["mass"].shape == (assembled.n_dof, assembled.n_dof)
    txt = tmp_path / "mode.txt"
    assembly.export_matrices(assembled, str(txt), fmt="txt")
    head = txt.read_text().splitlines()[:2]
    assert head[0].startswith("#") and "mode" in head[1]


def test_mesh_convergence_trend(canonical_profile, baseline_params, geometry):
    """Generalized top eigenvalue settles at second order under refinement."""
    import scipy.linalg as sla

    mode = make_mode(1, 0, geometry)
    params = PhysicalParams(mu_plus=0.1, mu_minus=0.1, lam=1.0, M=(0.0, 0.0, 2.5))
    values = []
    for n in (20, 40, 80):
        mesh = assembly.build_mesh(geometry, n_per_layer=n)
        mm = assembly.assemble(canonical_profile, params, mode, mesh)
        B = mm.compress + mm.magnetic
        L = np.linalg.cholesky(B)
        Y = sla.solve_triangular(L, mm.gravity, lower=True)
        At = sla.solve_triangular(L, Y.conj().T, lower=True)
        values.append(sla.eigh(0.5 * (At + At.conj().T), eigvals_only=True,
                               subset_by_index=[B.shape[0] - 1] * 2)[0])
    e1 = abs(values[1] - values[0])
    e2 = abs(values[2] - values[1])
    assert e2 < 0.5 * e1  # at least first-order decay of increments

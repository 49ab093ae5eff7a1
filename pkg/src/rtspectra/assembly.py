"""P1 finite-element assembly of the per-mode Hermitian forms.

The complex per-mode problem is assembled in a real coordinate basis: with
the substitution (phi, theta, psi) = (-i*pt, -i*tt, st) every form becomes
a real quadratic form in (pt, tt, st), and a general complex field splits
into two independent real problems (real and imaginary parts in the tilde
variables).  The assembled matrices are therefore real symmetric; they are
Hermitian representations of the original sesquilinear forms under the
nodal map z = (i*phi, i*theta, psi).

Degrees of freedom are interior nodes only (Dirichlet ends removed),
ordered node-major: dof(node j, comp c) = 3*(j-1) + c.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .equilibrium import EquilibriumProfile, Geometry
from .errors import AssemblyError, DefinitenessError, InvalidGradingError
from .modereduce import (
    DEFAULT_QUADRATURE_ORDER,
    FormCoefficients,
    FourierMode,
    ModeField,
)
from .params import MHD, VISCOELASTIC, PhysicalParams

DEFAULT_N_PER_LAYER = 200
DEFAULT_GRADING = 1.05


@dataclass(frozen=True)
class Mesh1D:
    """Conforming mesh on [h_minus, h_plus] with a node exactly at 0."""

    nodes: np.ndarray
    n_per_layer: int
    grading: float

    @property
    def n_interior(self) -> int:
        return self.nodes.size - 2

    @property
    def interface_index(self) -> int:
        return int(np.nonzero(self.nodes == 0.0)[0][0])


def _layer_nodes(height: float, n: int, grading: float) -> np.ndarray:
    """Node offsets 0..height with element sizes growing away from 0 by `grading`."""
    sizes = grading ** np.arange(n)
    sizes *= height / sizes.sum()
    nodes = np.concatenate(([0.0], np.cumsum(sizes)))
    nodes[-1] = height
    return nodes


def build_mesh(geometry: Geometry, n_per_layer: int = DEFAULT_N_PER_LAYER,
               grading: float = DEFAULT_GRADING) -> Mesh1D:
    """Mesh with n elements per layer, geometrically refined toward 0."""
    if n_per_layer < 4:
        raise ValueError(f"need at least 4 elements per layer, got {n_per_layer}")
    if not grading >= 1.0:
        raise InvalidGradingError(f"grading must be >= 1, got {grading}")
    upper = _layer_nodes(geometry.h_plus, n_per_layer, grading)
    lower = -_layer_nodes(-geometry.h_minus, n_per_layer, grading)[::-1]
    nodes = np.concatenate([lower[:-1], upper])
    return Mesh1D(nodes=nodes, n_per_layer=int(n_per_layer), grading=float(grading))


def refine_mesh(mesh: Mesh1D) -> Mesh1D:
    """Halve every element (nested refinement of the same graded geometry).

    This is the mesh-doubling used for convergence studies: rebuilding with
    a doubled n_per_layer at the same per-element grading would compound
    the geometric ratio and change the mesh family instead.
    """
    mids = 0.5 * (mesh.nodes[:-1] + mesh.nodes[1:])
    nodes = np.sort(np.concatenate([mesh.nodes, mids]))
    return Mesh1D(nodes=nodes, n_per_layer=2 * mesh.n_per_layer, grading=mesh.grading)


@dataclass
class ModeMatrices:
    """Discrete Hermitian forms of one Fourier mode.

    mass/gravity/compress/magnetic/elastic/dissipation carry the per-mode
    quadratic forms; coercivity_metric carries |w|^2 + |M.grad w|^2 + |div w|^2
    for the stability-certificate pencil.  Matrices are real symmetric except
    when the base field mixes vertical and in-plane components, which adds an
    imaginary skew part.  Treat instances as immutable: solvers cache
    reductions and evaluate Rayleigh quotients through the generating
    coefficients, so mutating a matrix in place desynchronizes the two.
    """

    mode: FourierMode
    mesh: Mesh1D
    coeffs: FormCoefficients
    mass: np.ndarray
    gravity: np.ndarray
    compress: np.ndarray
    magnetic: np.ndarray
    elastic: np.ndarray
    dissipation: np.ndarray
    coercivity_metric: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_dof(self) -> int:
        return self.mass.shape[0]

    def operator(self, medium: str) -> np.ndarray:
        """Energy operator A: gravity minus the medium's stabilizing forms."""
        if medium == MHD:
            return self.gravity - self.compress - self.magnetic
        if medium == VISCOELASTIC:
            return self.gravity - self.compress - self.elastic
        raise ValueError(f"unknown medium {medium!r}")

    def tilde_vector(self, field_values: np.ndarray) -> np.ndarray:
        """Map complex nodal (phi, theta, psi) values to the assembled basis."""
        z = np.array(field_values[1:-1], dtype=complex)
        z[:, 0] *= 1j
        z[:, 1] *= 1j
        return z.reshape(-1)

    def field_from_tilde(self, vec: np.ndarray) -> ModeField:
        """Inverse of :meth:`tilde_vector`, padded with Dirichlet zeros."""
        z = np.asarray(vec, dtype=complex).reshape(-1, 3).copy()
        z[:, 0] *= -1j
        z[:, 1] *= -1j
        values = np.zeros((self.mesh.nodes.size, 3), dtype=complex)
        values[1:-1] = z
        return ModeField(self.mesh.nodes, values)

    def quadratic(self, matrix: np.ndarray, field: ModeField) -> float:
        """Evaluate v* X v for a ModeField through the basis map."""
        z = self.tilde_vector(field.values)
        return float(np.real(np.vdot(z, matrix @ z)))


def _functional_rows(coeffs: FormCoefficients, mode: FourierMode):
    """Per-element row builders for value/derivative functionals.

    Returns (V, D) with V[c] of shape (ne, q, 6) selecting the value of
    component c at quadrature points, and D[c] the derivative.
    Local dof order: [pt1, tt1, st1, pt2, tt2, st2].
    """
    ne, q = coeffs.qp_y.shape
    N = coeffs.shape                      # (2, q)
    inv_h = 1.0 / coeffs.element_h        # (ne,)
    V = []
    D = []
    for c in range(3):
        v = np.zeros((ne, q, 6))
        v[:, :, c] = N[0][None, :]
        v[:, :, 3 + c] = N[1][None, :]
        V.append(v)
        d = np.zeros((ne, q, 6))
        d[:, :, c] = -inv_h[:, None]
        d[:, :, 3 + c] = inv_h[:, None]
        D.append(d)
    return V, D


def _accumulate(elem: np.ndarray, weight: np.ndarray, R: np.ndarray,
                S: Optional[np.ndarray] = None) -> None:
    """elem += sum_q weight * R^T S (symmetrized when S differs from R)."""
    if S is None:
        elem += np.einsum("eq,eqi,eqj->eij", weight, R, R, optimize=True)
    else:
        cross = np.einsum("eq,eqi,eqj->eij", weight, R, S, optimize=True)
        elem += cross + cross.transpose(0, 2, 1)


def _accumulate_complex(elem_real: np.ndarray, elem_skew: np.ndarray, weight: np.ndarray,
                        A: np.ndarray, B: np.ndarray) -> None:
    """Hermitian contribution of the functional A + i*B (A, B real rows).

    |(A + iB) z|^2 = z^H [ (A^T A + B^T B) + i (A^T B - B^T A) ] z; the skew
    part vanishes unless both A and B are nonzero.
    """
    if np.any(A):
        elem_real += np.einsum("eq,eqi,eqj->eij", weight, A, A, optimize=True)
    if np.any(B):
        elem_real += np.einsum("eq,eqi,eqj->eij", weight, B, B, optimize=True)
    if np.any(A) and np.any(B):
        cross = np.einsum("eq,eqi,eqj->eij", weight, A, B, optimize=True)
        elem_skew += cross - cross.transpose(0, 2, 1)


def assemble(profile: EquilibriumProfile, params: PhysicalParams, mode: FourierMode,
             mesh: Mesh1D, quadrature_order: int = DEFAULT_QUADRATURE_ORDER,
             coeffs: Optional[FormCoefficients] = None) -> ModeMatrices:
    """Assemble all per-mode matrices on the given mesh.

    Piecewise-linear conforming elements per component, Gauss-Legendre
    quadrature of the given order per element; the interface jump enters
    the gravity matrix as a rank-one nodal term.
    """
    if coeffs is None:
        coeffs = FormCoefficients(profile, params, mesh.nodes, quadrature_order)
    elif not np.array_equal(coeffs.grid, mesh.nodes):
        raise AssemblyError("coefficient table grid does not match the mesh")

    xi1, xi2 = mode.xi1, mode.xi2
    M1, M2, M3 = coeffs.M
    mdotxi = M1 * xi1 + M2 * xi2
    w = coeffs.qp_w
    ne = w.shape[0]

    V, D = _functional_rows(coeffs, mode)
    d_row = xi1 * V[0] + xi2 * V[1] + D[2]          # per-mode divergence (tilde)

    mats = {name: np.zeros((ne, 6, 6)) for name in
            ("mass", "gravity", "compress", "magnetic", "elastic", "dissipation", "metric")}
    skew = {name: np.zeros((ne, 6, 6)) for name in ("magnetic", "metric")}

    # mass and plain L2 part of the coercivity metric
    for c in range(3):
        _accumulate(mats["mass"], w * coeffs.rho, V[c])
        _accumulate(mats["metric"], w, V[c])

    # compressibility and the metric's divergence part
    _accumulate(mats["compress"], w * coeffs.p_prime_rho, d_row)
    _accumulate(mats["metric"], w, d_row)

    # gravity: stratification + divergence coupling (jump term added nodally)
    _accumulate(mats["gravity"], w * coeffs.g * coeffs.rho_prime, V[2])
    _accumulate(mats["gravity"], w * coeffs.g * coeffs.rho, d_row, V[2])

    # magnetic: lam * |d*M - m|^2, componentwise A + i*B with A, B real rows
    for A, B in (
        (M1 * d_row - mdotxi * V[0], M3 * D[0]),
        (M2 * d_row - mdotxi * V[1], M3 * D[1]),
        (M3 * (d_row - D[2]), -mdotxi * V[2]),
    ):
        _accumulate_complex(mats["magnetic"], skew["magnetic"], w * coeffs.lam, A, B)
    # metric's |M.grad w|^2 part: m_c = (M.xi) w_c - i M3 w_c' (horizontal comps)
    for A, B in (
        (mdotxi * V[0], -M3 * D[0]),
        (mdotxi * V[1], -M3 * D[1]),
        (M3 * D[2], mdotxi * V[2]),
    ):
        _accumulate_complex(mats["metric"], skew["metric"], w, A, B)

    # symmetric-gradient squares shared by dissipation and elasticity
    sym_rows = (
        (4.0, V[0] * xi1),
        (4.0, V[1] * xi2),
        (4.0, D[2]),
        (2.0, xi1 * V[1] + xi2 * V[0]),
        (2.0, xi1 * V[2] - D[0]),
        (2.0, xi2 * V[2] - D[1]),
    )
    for fac, row in sym_rows:
        if np.any(row):
            _accumulate(mats["dissipation"], w * (0.5 * coeffs.mu * fac), row)
            _accumulate(mats["elastic"], w * (0.5 * coeffs.kappa * fac), row)
    _accumulate(mats["dissipation"], w * (coeffs.bulk - 2.0 * coeffs.mu / 3.0), d_row)
    mats["elastic"] -= np.einsum("eq,eqi,eqj->eij", w * coeffs.kappa, d_row, d_row, optimize=True)

    # scatter element blocks into global interior matrices
    n_nodes = mesh.nodes.size
    ndof_full = 3 * n_nodes
    out = {}
    rows_idx = (3 * np.arange(ne))[:, None] + np.arange(6)[None, :]

    def scatter(blocks):
        full = np.zeros((ndof_full, ndof_full))
        np.add.at(full, (rows_idx[:, :, None], rows_idx[:, None, :]), blocks)
        return full[3:-3, 3:-3]

    for name, blocks in mats.items():
        out[name] = scatter(blocks)
        if name in skew and np.any(skew[name]):
            out[name] = out[name] + 1j * scatter(skew[name])

    # interface rank-one jump contribution to gravity
    iface_dof = 3 * (mesh.interface_index - 1) + 2
    out["gravity"][iface_dof, iface_dof] += coeffs.g * coeffs.rho_jump

    for name in out:
        out[name] = 0.5 * (out[name] + out[name].conj().T)

    mm = ModeMatrices(
        mode=mode, mesh=mesh, coeffs=coeffs,
        mass=out["mass"], gravity=out["gravity"], compress=out["compress"],
        magnetic=out["magnetic"], elastic=out["elastic"],
        dissipation=out["dissipation"], coercivity_metric=out["metric"],
    )
    for name, matrix in (("mass", mm.mass), ("dissipation", mm.dissipation)):
        try:
            np.linalg.cholesky(matrix)
        except np.linalg.LinAlgError as exc:
            raise DefinitenessError(f"{name} matrix is not positive definite") from exc
    return mm


def assemble_scalar_gravity_kernel(profile: EquilibriumProfile, mesh: Mesh1D,
                                   quadrature_order: int = DEFAULT_QUADRATURE_ORDER):
    """Scalar-psi forms restricted to divergence-free directions.

    Returns (Q, Mpsi) over interior psi dofs: Q carries
    g*[[rho]]*psi(0)^2 + int(g*rho'*psi^2), Mpsi the rho-weighted mass.
    These are the numerator and normalization seen by fields whose per-mode
    divergence vanishes identically.
    """
    coeffs = FormCoefficients(profile, PhysicalParams(), mesh.nodes, quadrature_order)
    N = coeffs.shape
    w = coeffs.qp_w
    ne = w.shape[0]
    rowV = np.zeros((ne, N.shape[1], 2))
    rowV[:, :, 0] = N[0][None, :]
    rowV[:, :, 1] = N[1][None, :]
    blocks_q = np.einsum("eq,eqi,eqj->eij", w * coeffs.g * coeffs.rho_prime, rowV, rowV)
    blocks_m = np.einsum("eq,eqi,eqj->eij", w * coeffs.rho, rowV, rowV)
    n = mesh.nodes.size
    Q = np.zeros((n, n))
    Mp = np.zeros((n, n))
    idx = np.stack([np.arange(ne), np.arange(1, ne + 1)], axis=1)
    np.add.at(Q, (idx[:, :, None], idx[:, None, :]), blocks_q)
    np.add.at(Mp, (idx[:, :, None], idx[:, None, :]), blocks_m)
    i0 = mesh.interface_index
    Q[i0, i0] += coeffs.g * coeffs.rho_jump
    return Q[1:-1, 1:-1], Mp[1:-1, 1:-1]


def export_matrices(mm: ModeMatrices, path: str, fmt: str = "npz") -> None:
    """Write the six matrices for debugging.

    ``npz``: dense binary with keys mass/gravity/compress/magnetic/elastic/
    dissipation plus mode indices and mesh nodes.  ``txt``: one coordinate
    block per matrix ("name i j value", 0-based, upper triangle).
    """
    arrays = {
        "mass": mm.mass, "gravity": mm.gravity, "compress": mm.compress,
        "magnetic": mm.magnetic, "elastic": mm.elastic, "dissipation": mm.dissipation,
    }
    if fmt == "npz":
        np.savez(path, k1=mm.mode.k1, k2=mm.mode.k2, nodes=mm.mesh.nodes, **arrays)
    elif fmt == "txt":
        with open(path, "w") as fh:
            fh.write("# per-mode matrices, coordinate format: name i j value\n")
            fh.write(f"# mode k=({mm.mode.k1},{mm.mode.k2}), n_dof={mm.n_dof}\n")
            for name, X in arrays.items():
                ii, jj = np.nonzero(np.triu(X))
                for i, j in zip(ii, jj):
                    fh.write(f"{name} {i} {j} {format(X[i, j], '.17g')}\n")
    else:
        raise ValueError(f"unknown export format {fmt!r}")

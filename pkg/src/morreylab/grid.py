"""Log-polar discretization of the upper half plane and the p-energy.

The half plane {y > 0} is truncated to the annulus r_min <= r <= r_max and
mapped to the rectangle [ln r_min, ln r_max] x [0, pi] through s = ln r.
In these coordinates

    |grad u|**2 = (u_s**2 + u_phi**2) * exp(-2s),      dx = exp(2s) ds dphi,

so the regularized p-Dirichlet energy is

    E(u) = (1/p) * integral ((u_s**2 + u_phi**2) e^{-2s} + eps**2)^{p/2} e^{2s} ds dphi.

Discretely, each cell evaluates the integrand at its four corners from
the one-sided differences along the two edges meeting there (a 2x2
quadrature); each cell carries the exact mass of e^{2s} over the cell so
that constant integrands are integrated exactly, and the corner mean is
second-order accurate for smooth fields.  Averaging the differences to a
single cell-center gradient instead would make the energy blind to the
checkerboard lattice mode, which then concentrates at the pinned node;
the corner form has no such kernel and the energy is strictly convex on
the unconstrained nodes.  The gradient of the discrete energy follows by
summation by parts and has a 3x3 stencil.  Dirichlet data u = 0 is
imposed on all four edges of the rectangle (the two axis rays and the two
truncation circles); the node at (r=1, phi=pi/2) is the pinning point
used by the solver.  The four cells touching that node carry a refined
sub-quadrature of the same bilinear data (EnergyParams.pin_subquad),
because the pinned minimizer has a cusp there and a two-point rule
misjudges the nearly singular integrand by tens of percent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "GridSpec",
    "LogPolarGrid",
    "ScalarField",
    "EnergyParams",
    "build_grid",
    "energy",
    "energy_gradient",
    "energy_hessian",
    "interpolate",
    "save_field",
    "load_field",
    "field_to_csv",
]

_FIELD_MAGIC = "# morreylab field v1"


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the log-polar grid.

    n_s nodes span [ln r_min, ln r_max] uniformly and must contain s = 0;
    n_phi is odd so that phi = pi/2 is a node.  The spec therefore always
    resolves the point (r=1, phi=pi/2) exactly.
    """

    r_min: float
    r_max: float
    n_s: int
    n_phi: int

    def __post_init__(self):
        if not (0.0 < self.r_min < 1.0 < self.r_max):
            raise ValueError(
                f"need 0 < r_min < 1 < r_max, got ({self.r_min}, {self.r_max})")
        if self.n_s < 3:
            raise ValueError(f"n_s must be at least 3, got {self.n_s}")
        if self.n_phi < 3 or self.n_phi % 2 == 0:
            raise ValueError(f"n_phi must be odd and >= 3, got {self.n_phi}")
        s = np.linspace(math.log(self.r_min), math.log(self.r_max), self.n_s)
        if np.abs(s).min() > 1e-9:
            raise ValueError(
                "s = 0 (the circle r = 1) must be a grid node; choose n_s so "
                "that ln(r_min) is an integer multiple of the spacing")

    def to_dict(self) -> dict:
        return {"r_min": self.r_min, "r_max": self.r_max,
                "n_s": self.n_s, "n_phi": self.n_phi}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(r_min=float(d["r_min"]), r_max=float(d["r_max"]),
                   n_s=int(d["n_s"]), n_phi=int(d["n_phi"]))


class LogPolarGrid:
    """Node coordinates, cell geometry and quadrature weights."""

    def __init__(self, spec: GridSpec):
        self.spec = spec
        s = np.linspace(math.log(spec.r_min), math.log(spec.r_max), spec.n_s)
        self.i_pin = int(np.argmin(np.abs(s)))
        s[self.i_pin] = 0.0
        phi = np.linspace(0.0, np.pi, spec.n_phi)
        self.j_pin = (spec.n_phi - 1) // 2
        phi[self.j_pin] = 0.5 * np.pi
        self.s = s
        self.phi = phi
        self.ds = (s[-1] - s[0]) / (spec.n_s - 1)
        self.dphi = np.pi / (spec.n_phi - 1)
        self.r = np.exp(s)
        # cell centers and the exact integral of e^{2s} over each s-cell
        self.s_c = 0.5 * (s[:-1] + s[1:])
        self.phi_c = 0.5 * (phi[:-1] + phi[1:])
        self.em2s_c = np.exp(-2.0 * self.s_c)
        radial_mass = 0.5 * (self.r[1:] ** 2 - self.r[:-1] ** 2)
        self.cell_weight = radial_mass[:, None] * np.full(spec.n_phi - 1, self.dphi)

    @property
    def n_s(self) -> int:
        return self.spec.n_s

    @property
    def n_phi(self) -> int:
        return self.spec.n_phi

    @property
    def pin_index(self) -> tuple[int, int]:
        """Grid index of the point (r=1, phi=pi/2)."""
        return (self.i_pin, self.j_pin)

    def constrained_mask(self) -> np.ndarray:
        """Boolean mask of Dirichlet edge nodes plus the pinned node."""
        m = np.zeros((self.n_s, self.n_phi), dtype=bool)
        m[0, :] = m[-1, :] = True
        m[:, 0] = m[:, -1] = True
        m[self.i_pin, self.j_pin] = True
        return m

    def area(self) -> float:
        """Exact area of the truncated half plane, pi/2 (r_max^2 - r_min^2)."""
        return 0.5 * np.pi * (self.spec.r_max ** 2 - self.spec.r_min ** 2)


def build_grid(spec: GridSpec) -> LogPolarGrid:
    """Construct the grid for a validated spec."""
    return LogPolarGrid(spec)


class ScalarField:
    """Nodal values on a log-polar grid, indexed (s-index, phi-index)."""

    def __init__(self, grid: LogPolarGrid, values: np.ndarray | None = None):
        self.grid = grid
        if values is None:
            values = np.zeros((grid.n_s, grid.n_phi))
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n_s, grid.n_phi):
            raise ValueError(
                f"values shape {values.shape} does not match grid "
                f"({grid.n_s}, {grid.n_phi})")
        self.values = values

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def apply_dirichlet(self, pin_value: float | None = None) -> "ScalarField":
        """Zero the edges in place; optionally set the pinned node."""
        v = self.values
        v[0, :] = v[-1, :] = 0.0
        v[:, 0] = v[:, -1] = 0.0
        if pin_value is not None:
            v[self.grid.i_pin, self.grid.j_pin] = float(pin_value)
        return self


@dataclass(frozen=True)
class EnergyParams:
    """Exponent p > 2 and regularization length eps >= 0.

    pin_subquad refines the quadrature (midpoint sub-samples per
    direction) in the four cells touching the pinned node, where the
    minimizer has a cusp and the plain two-point rule overestimates the
    integrand by tens of percent; 1 disables the refinement.
    """

    p: float
    eps: float = 0.0
    pin_subquad: int = 8

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p > 2.0):
            raise ValueError(f"p must be finite and > 2, got {self.p}")
        if not (math.isfinite(self.eps) and self.eps >= 0.0):
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if self.pin_subquad < 1:
            raise ValueError("pin_subquad must be at least 1")


def _cell_gradients(field: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    """Difference quotients averaged to cell centers, shapes (n_s-1, n_phi-1).

    Used for output quantities (gradient profiles, norms); the energy
    itself uses the per-corner differences below.
    """
    g = field.grid
    v = field.values
    vs = (v[1:, :] - v[:-1, :]) / g.ds
    us = 0.5 * (vs[:, 1:] + vs[:, :-1])
    vp = (v[:, 1:] - v[:, :-1]) / g.dphi
    up = 0.5 * (vp[1:, :] + vp[:-1, :])
    return us, up


def _edge_differences(field: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    """One-sided differences: us over s-edges (n_s-1, n_phi), up over
    phi-edges (n_s, n_phi-1)."""
    g = field.grid
    v = field.values
    return (v[1:, :] - v[:-1, :]) / g.ds, (v[:, 1:] - v[:, :-1]) / g.dphi


def _corner_q(field: ScalarField, params: EnergyParams):
    """The four corner integrands q_kl per cell, plus the edge differences.

    Corner (k, l) of a cell pairs the s-difference on phi-row j+l with the
    phi-difference on s-column i+k; all four use the radial factor at the
    cell center.
    """
    g = field.grid
    us, up = _edge_differences(field)
    em = g.em2s_c[:, None]
    us_a, us_b = us[:, :-1], us[:, 1:]      # rows j and j+1 of each cell
    up_a, up_b = up[:-1, :], up[1:, :]      # columns i and i+1
    e2 = params.eps**2
    q = ((us_a * us_a + up_a * up_a) * em + e2,
         (us_a * us_a + up_b * up_b) * em + e2,
         (us_b * us_b + up_a * up_a) * em + e2,
         (us_b * us_b + up_b * up_b) * em + e2)
    return q, us, up


def _pin_cells(grid: LogPolarGrid) -> list[tuple[int, int]]:
    """The four cells having the pinned node as a corner."""
    i0, j0 = grid.pin_index
    return [(i0 - 1, j0 - 1), (i0 - 1, j0), (i0, j0 - 1), (i0, j0)]


def _cell_rules(grid: LogPolarGrid, k: int):
    """Quadrature rules for single-cell evaluation, cached on the grid.

    Each rule is (w, em, Jus, Jup): sample masses summing exactly to the
    cell mass, radial factors, and the jacobians of the bilinear field's
    gradient components with respect to the four nodal values, ordered
    (i,j), (i+1,j), (i,j+1), (i+1,j+1).  Rules depend on the radial index
    only (the angular direction is uniform).
    """
    cache = getattr(grid, "_cell_rule_cache", None)
    if cache is None:
        cache = {}
        grid._cell_rule_cache = cache
    if k in cache:
        return cache[k]
    corner, sub = {}, {}
    for ci in {c[0] for c in _pin_cells(grid)}:
        w_cell = grid.cell_weight[ci, 0]
        corner[ci] = (
            np.full(4, w_cell / 4.0),
            np.full(4, grid.em2s_c[ci]),
            np.array([[-1, 1, 0, 0], [-1, 1, 0, 0],
                      [0, 0, -1, 1], [0, 0, -1, 1]], float) / grid.ds,
            np.array([[-1, 0, 1, 0], [0, -1, 0, 1],
                      [-1, 0, 1, 0], [0, -1, 0, 1]], float) / grid.dphi,
        )
        t = (np.arange(k) + 0.5) / k
        a, b = [x.ravel() for x in np.meshgrid(t, t, indexing="ij")]
        bounds = grid.s[ci] + np.arange(k + 1) * grid.ds / k
        strip_mass = 0.5 * np.diff(np.exp(2.0 * bounds))  # exact per strip
        w = np.repeat(strip_mass, k) * grid.dphi / k
        em = np.exp(-2.0 * (grid.s[ci] + a * grid.ds))
        Jus = np.column_stack([-(1 - b), 1 - b, -b, b]) / grid.ds
        Jup = np.column_stack([-(1 - a), -a, 1 - a, a]) / grid.dphi
        sub[ci] = (w, em, Jus, Jup)
    cache[k] = (corner, sub)
    return cache[k]


def _cell_eval(v4: np.ndarray, params: EnergyParams, rule, want: int):
    """Energy (and optionally gradient, Hessian) of one cell under a rule."""
    p = params.p
    w, em, Jus, Jup = rule
    us = Jus @ v4
    up = Jup @ v4
    q = (us * us + up * up) * em + params.eps**2
    e_val = float((w * q ** (p / 2.0)).sum() / p)
    if want == 0:
        return e_val, None, None
    coef = w * q ** (p / 2.0 - 1.0) * em
    g4 = (coef * us) @ Jus + (coef * up) @ Jup
    if want == 1:
        return e_val, g4, None
    c = us[:, None] * Jus + up[:, None] * Jup
    beta = (p - 2.0) * w * q ** (p / 2.0 - 2.0) * em * em
    h4 = (Jus.T * coef) @ Jus + (Jup.T * coef) @ Jup + (c.T * beta) @ c
    return e_val, g4, h4


def _pin_corrections(field: ScalarField, params: EnergyParams, want: int):
    """Per pin cell, the (sub-rule minus corner-rule) contribution."""
    grid = field.grid
    corner, sub = _cell_rules(grid, params.pin_subquad)
    v = field.values
    out = []
    for (ci, cj) in _pin_cells(grid):
        v4 = np.array([v[ci, cj], v[ci + 1, cj], v[ci, cj + 1],
                       v[ci + 1, cj + 1]])
        es, gs, hs = _cell_eval(v4, params, sub[ci], want)
        ec, gc, hc = _cell_eval(v4, params, corner[ci], want)
        out.append(((ci, cj), es - ec,
                    None if want < 1 else gs - gc,
                    None if want < 2 else hs - hc))
    return out


def energy(field: ScalarField, params: EnergyParams) -> float:
    """Discrete regularized p-Dirichlet energy of the field."""
    if not np.all(np.isfinite(field.values)):
        raise ValueError("field contains non-finite values")
    q, _, _ = _corner_q(field, params)
    ph = params.p / 2.0
    total = sum((field.grid.cell_weight * qk**ph).sum() for qk in q)
    total = float(total / (4.0 * params.p))
    if params.pin_subquad > 1:
        total += sum(de for _, de, _, _ in _pin_corrections(field, params, 0))
    return total


def energy_gradient(field: ScalarField, params: EnergyParams,
                    mask_constrained: bool = True) -> ScalarField:
    """Exact gradient of the discrete energy with respect to nodal values.

    Entries at Dirichlet and pinned nodes are zeroed unless
    mask_constrained is False (the unmasked value at the pinned node is
    the strength of the discrete point source enforcing the constraint).
    """
    if not np.all(np.isfinite(field.values)):
        raise ValueError("field contains non-finite values")
    g = field.grid
    (q_aa, q_ab, q_ba, q_bb), us, up = _corner_q(field, params)
    e = params.p / 2.0 - 1.0
    w4 = 0.25 * g.cell_weight * g.em2s_c[:, None]

    # per-edge coefficients: each q touches one s-edge and one phi-edge
    cs = np.zeros_like(us)
    cs[:, :-1] += w4 * (q_aa**e + q_ab**e) * us[:, :-1]
    cs[:, 1:] += w4 * (q_ba**e + q_bb**e) * us[:, 1:]
    cp = np.zeros_like(up)
    cp[:-1, :] += w4 * (q_aa**e + q_ba**e) * up[:-1, :]
    cp[1:, :] += w4 * (q_ab**e + q_bb**e) * up[1:, :]

    out = np.zeros_like(field.values)
    out[:-1, :] -= cs / g.ds
    out[1:, :] += cs / g.ds
    out[:, :-1] -= cp / g.dphi
    out[:, 1:] += cp / g.dphi
    if params.pin_subquad > 1:
        for (ci, cj), _, dg, _ in _pin_corrections(field, params, 1):
            out[ci, cj] += dg[0]
            out[ci + 1, cj] += dg[1]
            out[ci, cj + 1] += dg[2]
            out[ci + 1, cj + 1] += dg[3]
    if mask_constrained:
        out[g.constrained_mask()] = 0.0
    return ScalarField(g, out)


def energy_hessian(field: ScalarField, params: EnergyParams) -> sp.csr_matrix:
    """Sparse Hessian of the discrete energy over all nodes (no masking).

    Requires eps > 0 so the integrand is twice differentiable everywhere.
    Each corner integrand contributes a 4x4 block on the cell's nodes; the
    assembled matrix is symmetric positive semidefinite, and positive
    definite after removing the constrained nodes.
    """
    if params.eps <= 0.0:
        raise ValueError("energy_hessian requires eps > 0")
    g = field.grid
    p = params.p
    (q_aa, q_ab, q_ba, q_bb), us, up = _corner_q(field, params)
    us_a, us_b = us[:, :-1].ravel(), us[:, 1:].ravel()
    up_a, up_b = up[:-1, :].ravel(), up[1:, :].ravel()

    n_phi = g.n_phi
    ii, jj = np.meshgrid(np.arange(g.n_s - 1), np.arange(n_phi - 1), indexing="ij")
    k00 = (ii * n_phi + jj).ravel()
    # node order per cell: (i,j), (i+1,j), (i,j+1), (i+1,j+1)
    corners = np.stack([k00, k00 + n_phi, k00 + 1, k00 + n_phi + 1], axis=1)
    a_row_j = np.array([-1.0, 1.0, 0.0, 0.0]) / g.ds
    a_row_j1 = np.array([0.0, 0.0, -1.0, 1.0]) / g.ds
    b_col_i = np.array([-1.0, 0.0, 1.0, 0.0]) / g.dphi
    b_col_i1 = np.array([0.0, -1.0, 0.0, 1.0]) / g.dphi

    w4 = (0.25 * g.cell_weight).ravel()
    em = np.broadcast_to(g.em2s_c[:, None],
                         (g.n_s - 1, n_phi - 1)).ravel()
    blocks = np.zeros((len(k00), 4, 4))
    for q, a_vec, b_vec, us_k, up_k in (
            (q_aa, a_row_j, b_col_i, us_a, up_a),
            (q_ab, a_row_j, b_col_i1, us_a, up_b),
            (q_ba, a_row_j1, b_col_i, us_b, up_a),
            (q_bb, a_row_j1, b_col_i1, us_b, up_b)):
        qf = q.ravel()
        alpha = w4 * qf ** (p / 2.0 - 1.0) * em
        beta = (p - 2.0) * w4 * qf ** (p / 2.0 - 2.0) * em * em
        base = np.outer(a_vec, a_vec) + np.outer(b_vec, b_vec)
        c = us_k[:, None] * a_vec[None, :] + up_k[:, None] * b_vec[None, :]
        blocks += alpha[:, None, None] * base[None, :, :]
        blocks += beta[:, None, None] * (c[:, :, None] * c[:, None, :])
    if params.pin_subquad > 1:
        for (ci, cj), _, _, dh in _pin_corrections(field, params, 2):
            blocks[ci * (n_phi - 1) + cj] += dh
    rows = np.repeat(corners, 4, axis=1).ravel()
    cols = np.tile(corners, (1, 4)).ravel()
    n = g.n_s * g.n_phi
    return sp.coo_matrix((blocks.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def interpolate(field: ScalarField, r, phi):
    """Bilinear interpolation in (s, phi); exact on bilinear fields.

    Accepts scalars or arrays; queries outside the grid rectangle are
    rejected (a relative slack of a few ulp absorbs rounding at the rim).
    """
    g = field.grid
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    scalar = r.ndim == 0 and phi.ndim == 0
    r, phi = np.broadcast_arrays(np.atleast_1d(r), np.atleast_1d(phi))
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    s = np.log(r)
    s_lo, s_hi = g.s[0], g.s[-1]
    tol_s = 1e-12 * max(1.0, abs(s_lo), abs(s_hi))
    if np.any(s < s_lo - tol_s) or np.any(s > s_hi + tol_s):
        raise ValueError("query radius outside the grid annulus")
    if np.any(phi < -1e-12) or np.any(phi > np.pi + 1e-12):
        raise ValueError("query angle outside [0, pi]")
    s = np.clip(s, s_lo, s_hi)
    phi = np.clip(phi, 0.0, np.pi)
    i = np.clip(((s - s_lo) / g.ds).astype(int), 0, g.n_s - 2)
    j = np.clip((phi / g.dphi).astype(int), 0, g.n_phi - 2)
    ts = (s - g.s[i]) / g.ds
    tp = (phi - g.phi[j]) / g.dphi
    # snap to the node so queries at grid points return nodal values exactly
    # (log(exp(s)) can be an ulp off the stored node)
    ts = np.where(np.abs(ts) < 1e-12, 0.0, np.where(np.abs(1 - ts) < 1e-12, 1.0, ts))
    tp = np.where(np.abs(tp) < 1e-12, 0.0, np.where(np.abs(1 - tp) < 1e-12, 1.0, tp))
    v = field.values
    out = (v[i, j] * (1 - ts) * (1 - tp) + v[i + 1, j] * ts * (1 - tp)
           + v[i, j + 1] * (1 - ts) * tp + v[i + 1, j + 1] * ts * tp)
    return float(out[0]) if scalar else out


def save_field(field: ScalarField, path, p: float | None = None) -> None:
    """Write a self-describing textual dump: JSON header, then nodal rows."""
    header = {"format": "morreylab-field", "version": 1,
              "p": p, **field.grid.spec.to_dict()}
    with open(path, "w") as fh:
        fh.write(_FIELD_MAGIC + "\n")
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for row in field.values:
            fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def load_field(path) -> tuple[ScalarField, dict]:
    """Read a field dump; returns the field and its header dict."""
    with open(path) as fh:
        magic = fh.readline().rstrip("\n")
        if magic != _FIELD_MAGIC:
            raise ValueError(f"not a field dump: {path}")
        header = json.loads(fh.readline())
        spec = GridSpec.from_dict(header)
        values = np.loadtxt(fh, ndmin=2)
    grid = build_grid(spec)
    if values.shape != (spec.n_s, spec.n_phi):
        raise ValueError(f"corrupt field dump: body shape {values.shape}")
    return ScalarField(grid, values), header


def field_to_csv(field: ScalarField, path) -> None:
    """CSV export with columns r, phi, value at every node."""
    g = field.grid
    with open(path, "w") as fh:
        fh.write("r,phi,value\n")
        for i in range(g.n_s):
            for j in range(g.n_phi):
                fh.write(f"{g.r[i]:.16e},{g.phi[j]:.16e},"
                         f"{field.values[i, j]:.16e}\n")

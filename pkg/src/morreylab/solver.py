"""Minimization of the regularized p-energy with a pinned unit value.

The discrete extremal is the minimizer of the energy over fields with
zero Dirichlet data and value 1 at the node (r=1, phi=pi/2).  The pinned
node replaces an explicit point source: the multiplier of the constraint
is the strength of the discrete measure concentrated there.

The degenerate limit eps -> 0 is reached by continuation: each stage
minimizes the energy at one eps, warm-starting from the previous stage.
A stage runs damped Newton steps (exact sparse Hessian, Armijo
backtracking with halving) until the gradient sup-norm or the relative
energy change drops below tolerance.  The energy is convex for every
eps >= 0, so the minimizer does not depend on the descent path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.sparse.linalg import splu

from .aronsson import beta_p
from .grid import (EnergyParams, GridSpec, LogPolarGrid, ScalarField,
                   build_grid, energy, energy_gradient, energy_hessian,
                   interpolate, load_field, save_field)

__all__ = [
    "SolverConfig",
    "StageInfo",
    "SolveResult",
    "solve_extremal",
    "FullPlaneField",
    "mirror_to_fullplane",
    "save_checkpoint",
    "load_checkpoint",
]


@dataclass(frozen=True)
class SolverConfig:
    """Continuation schedule and stopping tolerances.

    The schedule must be strictly decreasing and positive.  A stage stops
    when the gradient sup-norm falls below grad_tol or the relative energy
    decrease per iteration falls below energy_rel_tol.
    """

    eps_schedule: tuple = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
    grad_tol: float = 1e-9
    energy_rel_tol: float = 1e-12
    max_iters_per_stage: int = 100
    armijo_c: float = 1e-4
    max_halvings: int = 60

    def __post_init__(self):
        sched = tuple(float(e) for e in self.eps_schedule)
        if not sched or any(e <= 0 for e in sched):
            raise ValueError("eps_schedule must be positive")
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise ValueError("eps_schedule must be strictly decreasing")
        object.__setattr__(self, "eps_schedule", sched)
        if self.grad_tol <= 0 or self.energy_rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters_per_stage < 1:
            raise ValueError("max_iters_per_stage must be at least 1")

    def to_dict(self) -> dict:
        return {"eps_schedule": list(self.eps_schedule),
                "grad_tol": self.grad_tol,
                "energy_rel_tol": self.energy_rel_tol,
                "max_iters_per_stage": self.max_iters_per_stage,
                "armijo_c": self.armijo_c,
                "max_halvings": self.max_halvings}

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        return cls(eps_schedule=tuple(d["eps_schedule"]),
                   grad_tol=float(d["grad_tol"]),
                   energy_rel_tol=float(d["energy_rel_tol"]),
                   max_iters_per_stage=int(d["max_iters_per_stage"]),
                   armijo_c=float(d.get("armijo_c", 1e-4)),
                   max_halvings=int(d.get("max_halvings", 60)))


@dataclass
class StageInfo:
    """Diagnostics of one continuation stage."""

    eps: float
    iterations: int = 0
    energy: float = math.nan
    grad_sup: float = math.inf
    converged: bool = False
    line_search_failures: int = 0
    energy_history: list = dataclass_field(default_factory=list)
    energy_drift_from_prev: float = math.nan
    predicted_drift_bound: float = math.nan

    def to_dict(self) -> dict:
        return {"eps": self.eps, "iterations": self.iterations,
                "energy": self.energy, "grad_sup": self.grad_sup,
                "converged": self.converged,
                "line_search_failures": self.line_search_failures,
                "energy_drift_from_prev": self.energy_drift_from_prev,
                "predicted_drift_bound": self.predicted_drift_bound}


@dataclass
class SolveResult:
    """Converged field with energy, per-stage diagnostics and metadata.

    converged means the final stage reached the gradient tolerance; the
    field then satisfies all constraints exactly (edges zero, pinned node
    at its prescribed value) by construction.
    """

    field: ScalarField
    energy: float
    stages: list
    converged: bool
    p: float
    pin_value: float = 1.0
    dipole_strength: float = math.nan

    @property
    def grid(self) -> LogPolarGrid:
        return self.field.grid


def _initial_field(grid: LogPolarGrid, p: float, pin_value: float) -> ScalarField:
    """Start in the expected decay regime: min(1, r^-beta_p) * sin(phi)."""
    radial = np.minimum(1.0, grid.r ** (-beta_p(p)))
    values = pin_value * radial[:, None] * np.sin(grid.phi)[None, :]
    return ScalarField(grid, values).apply_dirichlet(pin_value=pin_value)


def _predicted_drift_bound(field: ScalarField, p: float, eps_prev: float) -> float:
    """Bound on the energy change when eps_prev is dropped from the integrand."""
    from .grid import _corner_q
    q, _, _ = _corner_q(field, EnergyParams(p=p, eps=eps_prev))
    w4 = 0.25 * field.grid.cell_weight
    return float(0.5 * eps_prev**2
                 * sum((w4 * qk ** (p / 2.0 - 1.0)).sum() for qk in q))


def solve_extremal(spec: GridSpec, p: float, config: SolverConfig | None = None,
                   pin_value: float = 1.0,
                   initial: ScalarField | None = None) -> SolveResult:
    """Minimize the regularized p-energy with continuation in eps.

    The field is pinned to pin_value at (r=1, phi=pi/2) and zero on the
    rectangle edges.  A non-converged stage (iteration cap or failed line
    search) flags the result but keeps the partial data.  An explicit
    initial field serves as a warm start, e.g. a coarse solution
    interpolated onto a refined grid.
    """
    if config is None:
        config = SolverConfig()
    grid = build_grid(spec)
    if initial is not None:
        if initial.grid.spec != spec:
            raise ValueError("initial field lives on a different grid")
        field = initial.copy()
    else:
        field = _initial_field(grid, p, pin_value)
    field.apply_dirichlet(pin_value=pin_value)

    n_phi = grid.n_phi
    free = ~grid.constrained_mask()
    free_idx = np.flatnonzero(free.ravel())

    stages: list[StageInfo] = []
    prev_energy = None
    for eps in config.eps_schedule:
        params = EnergyParams(p=p, eps=eps)
        stage = StageInfo(eps=eps)
        e_now = energy(field, params)
        stage.energy_history.append(e_now)
        for _ in range(config.max_iters_per_stage):
            g = energy_gradient(field, params).values
            stage.grad_sup = float(np.abs(g).max())
            if stage.grad_sup <= config.grad_tol:
                stage.converged = True
                break
            hess = energy_hessian(field, params)
            h_ff = hess[free_idx][:, free_idx].tocsc()
            g_f = g.ravel()[free_idx]
            try:
                direction = splu(h_ff).solve(-g_f)
            except RuntimeError:
                direction = -g_f
            slope = float(g_f @ direction)
            if slope >= 0.0:
                direction, slope = -g_f, float(-g_f @ g_f)

            step = 1.0
            accepted = False
            for _ in range(config.max_halvings):
                trial = field.values.copy()
                trial.ravel()[free_idx] += step * direction
                trial_field = ScalarField(grid, trial)
                e_trial = energy(trial_field, params)
                if e_trial <= e_now + config.armijo_c * step * slope:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                stage.line_search_failures += 1
                break
            field = trial_field
            stage.iterations += 1
            e_prev_it, e_now = e_now, e_trial
            stage.energy_history.append(e_now)
            if abs(e_prev_it - e_now) <= config.energy_rel_tol * max(1.0, abs(e_now)):
                g = energy_gradient(field, params).values
                stage.grad_sup = float(np.abs(g).max())
                stage.converged = stage.grad_sup <= config.grad_tol
                break
        else:
            g = energy_gradient(field, params).values
            stage.grad_sup = float(np.abs(g).max())
            stage.converged = stage.grad_sup <= config.grad_tol
        stage.energy = e_now
        if prev_energy is not None:
            stage.energy_drift_from_prev = abs(prev_energy - e_now)
            stage.predicted_drift_bound = _predicted_drift_bound(
                field, p, eps_prev=stages[-1].eps)
        prev_energy = e_now
        stages.append(stage)

    dipole = float(energy_gradient(
        field, EnergyParams(p=p, eps=config.eps_schedule[-1]),
        mask_constrained=False).values[grid.i_pin, grid.j_pin])
    return SolveResult(field=field, energy=stages[-1].energy, stages=stages,
                       converged=stages[-1].converged, p=p,
                       pin_value=pin_value, dipole_strength=dipole)


class FullPlaneField:
    """Odd extension of a half-plane field across the horizontal axis.

    Evaluation takes plane points (x, y); the value for y < 0 is minus the
    value at the mirrored point, computed through the same interpolation
    path so antisymmetry is exact.  Points on the axis give exactly 0.
    """

    def __init__(self, field: ScalarField):
        self.field = field
        self.grid = field.grid

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Mask of points inside the (mirrored) grid annulus."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.hypot(points[:, 0], points[:, 1])
        spec = self.grid.spec
        return (r >= spec.r_min * (1 + 1e-12)) & (r <= spec.r_max * (1 - 1e-12))

    def evaluate(self, points) -> np.ndarray:
        """Values at an (m, 2) array of plane points (scalar pair accepted)."""
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        out = np.zeros(len(pts))
        off_axis = y != 0.0
        if np.any(off_axis):
            xo, yo = x[off_axis], y[off_axis]
            r = np.hypot(xo, yo)
            phi = np.arctan2(np.abs(yo), xo)
            vals = interpolate(self.field, r, phi)
            out[off_axis] = np.where(yo > 0, vals, -vals)
        return float(out[0]) if scalar else out

    def sample_points(self) -> np.ndarray:
        """Grid nodes mirrored to the full plane (axis nodes once)."""
        g = self.grid
        rr, pp = np.meshgrid(g.r, g.phi, indexing="ij")
        x = (rr * np.cos(pp)).ravel()
        y = (rr * np.sin(pp)).ravel()
        upper = np.column_stack([x, y])
        interior = y > 0
        lower = np.column_stack([x[interior], -y[interior]])
        return np.vstack([upper, lower])


def mirror_to_fullplane(result: SolveResult) -> FullPlaneField:
    """Antisymmetric full-plane evaluator for a converged solve."""
    if not result.converged:
        raise ValueError("cannot mirror a non-converged result")
    return FullPlaneField(result.field)


def save_checkpoint(result: SolveResult, config: SolverConfig, path_base) -> tuple[str, str]:
    """Write <base>.field and <base>.json; returns the two paths."""
    path_base = str(path_base)
    field_path, meta_path = path_base + ".field", path_base + ".json"
    save_field(result.field, field_path, p=result.p)
    meta = {
        "format": "morreylab-checkpoint",
        "version": 1,
        "p": result.p,
        "spec": result.grid.spec.to_dict(),
        "config": config.to_dict(),
        "energy": result.energy,
        "converged": result.converged,
        "pin_value": result.pin_value,
        "dipole_strength": result.dipole_strength,
        "stages": [st.to_dict() for st in result.stages],
    }
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return field_path, meta_path


def load_checkpoint(path_base) -> tuple[SolveResult, SolverConfig]:
    """Read a checkpoint written by save_checkpoint."""
    path_base = str(path_base)
    with open(path_base + ".json") as fh:
        meta = json.load(fh)
    if meta.get("format") != "morreylab-checkpoint":
        raise ValueError(f"not a checkpoint: {path_base}.json")
    field, header = load_field(path_base + ".field")
    if GridSpec.from_dict(meta["spec"]) != field.grid.spec:
        raise ValueError("checkpoint sidecar does not match field dump")
    stages = []
    for d in meta["stages"]:
        stages.append(StageInfo(
            eps=d["eps"], iterations=d["iterations"], energy=d["energy"],
            grad_sup=d["grad_sup"], converged=d["converged"],
            line_search_failures=d["line_search_failures"],
            energy_drift_from_prev=d.get("energy_drift_from_prev", math.nan),
            predicted_drift_bound=d.get("predicted_drift_bound", math.nan)))
    result = SolveResult(field=field, energy=meta["energy"], stages=stages,
                         converged=meta["converged"], p=float(meta["p"]),
                         pin_value=float(meta.get("pin_value", 1.0)),
                         dipole_strength=float(meta.get("dipole_strength", math.nan)))
    return result, SolverConfig.from_dict(meta["config"])

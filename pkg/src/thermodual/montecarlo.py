"""Stochastic and lattice cross-checks of the OU transition density."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .duality import DiscretePath, ThermoParams
from .errors import BadParameters, GridTooCoarse, ValidationError
from .kernels import ou_cdf, ou_moments
from .quadrature import trapezoid_weights

SCHEMES = ("exact_ou", "euler_maruyama")

# Paths are drawn in fixed blocks, each with its own Philox stream keyed by
# (seed, block index). The block size is part of the reproducibility
# contract and must not depend on the number of workers.
PATH_BLOCK = 4096

# grid spacing of the lattice propagator, in units of the one-slice kernel width
LATTICE_CELLS_PER_WIDTH = 3.0
LATTICE_MIN_CELLS_PER_WIDTH = 1.2
LATTICE_HALF_WIDTH_SD = 8.0


@dataclass
class PathEnsemble:
    """Sampled trajectories; ``values`` has one row per path.

    When generated with ``keep_paths=False`` only the endpoints are stored
    and ``values`` holds the start and end columns.
    """

    values: np.ndarray
    step: float
    n_steps: int
    scheme: str
    seed: int
    tp: ThermoParams
    y0: float

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def endpoints(self) -> np.ndarray:
        return self.values[:, -1]

    @property
    def duration(self) -> float:
        return self.step * self.n_steps

    @property
    def full(self) -> bool:
        return self.values.shape[1] == self.n_steps + 1

    def path(self, i: int) -> DiscretePath:
        if not self.full:
            raise ValidationError("this ensemble stores endpoints only")
        return DiscretePath(self.values[i], self.step)

    def to_csv(self, filename) -> None:
        with open(filename, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["path", "y_end"])
            for i, y in enumerate(self.endpoints):
                writer.writerow([i, repr(float(y))])


@dataclass
class TransitionTestReport:
    ks_statistic: float
    p_value: float
    mean_err: float
    var_err: float
    n_paths: int


def _block_normals(seed: int, block: int, n_steps: int, size: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss)).standard_normal((n_steps, size))


def simulate(
    y0: float,
    dtau: float,
    n_steps: int,
    n_paths: int,
    scheme: str,
    seed: int,
    tp: ThermoParams,
    keep_paths: bool = True,
) -> PathEnsemble:
    """Sample OU paths from ``y0`` with time step ``dtau``.

    ``exact_ou`` draws each step from the exact transition law; the Euler
    scheme uses the linear drift and constant diffusion over the step.
    """
    if scheme not in SCHEMES:
        raise BadParameters(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if not (math.isfinite(dtau) and dtau > 0) or n_steps < 1 or n_paths < 1:
        raise BadParameters("need dtau > 0, n_steps >= 1 and n_paths >= 1")
    if not math.isfinite(y0):
        raise BadParameters("y0 must be finite")
    if not 0 <= int(seed) < 2**64:
        raise BadParameters("seed must be a 64-bit unsigned integer")
    if scheme == "exact_ou":
        a = math.exp(-tp.gamma * dtau)
        b = math.sqrt(-tp.variance * math.expm1(-2.0 * tp.gamma * dtau))
    else:
        a = 1.0 - tp.gamma * dtau
        b = math.sqrt(2.0 * tp.gamma * tp.variance * dtau)

    cols = n_steps + 1 if keep_paths else 2
    out = np.empty((n_paths, cols))
    out[:, 0] = y0
    for block, start in enumerate(range(0, n_paths, PATH_BLOCK)):
        size = min(PATH_BLOCK, n_paths - start)
        xi = _block_normals(int(seed), block, n_steps, size)
        y = np.full(size, float(y0))
        for k in range(n_steps):
            y = a * y + b * xi[k]
            if keep_paths:
                out[start : start + size, k + 1] = y
        out[start : start + size, -1] = y
    return PathEnsemble(out, float(dtau), int(n_steps), scheme, int(seed), tp, float(y0))


def transition_test(ens: PathEnsemble) -> TransitionTestReport:
    """KS test of the endpoints against the exact transition law.

    ``mean_err`` is the sample-mean error in units of the exact standard
    deviation; ``var_err`` is the relative error of the sample variance.
    """
    if ens.n_paths < 1:
        raise ValidationError("empty ensemble")
    y = ens.endpoints
    T = ens.duration
    ks = stats.kstest(y, lambda v: ou_cdf(v, ens.y0, T, ens.tp))
    mean, var = ou_moments(ens.y0, T, ens.tp)
    return TransitionTestReport(
        ks_statistic=float(ks.statistic),
        p_value=float(ks.pvalue),
        mean_err=float(abs(y.mean() - mean) / math.sqrt(var)),
        var_err=float(abs(y.var(ddof=1) - var) / var),
        n_paths=ens.n_paths,
    )


def _log_slice_weight(ya, yb, dtau: float, tp: ThermoParams, boundary_term: bool = False):
    # -(dtau / 2 k_B) * (R/2) [((yb - ya)/dtau)^2 + gamma^2 (ya^2 + yb^2) / 2]
    lag = 0.5 * tp.R * (((yb - ya) / dtau) ** 2 + 0.5 * tp.gamma**2 * (ya * ya + yb * yb))
    out = -dtau * lag / (2.0 * tp.k_B)
    if boundary_term:
        # slice share of the total derivative R gamma y ydot in (R/2)(ydot + gamma y)^2
        out = out - tp.s * (yb * yb - ya * ya) / (4.0 * tp.k_B)
    return out


def lattice_grid(y1: float, tau: float, n_slices: int, tp: ThermoParams, cells_per_width: float = LATTICE_CELLS_PER_WIDTH):
    """Uniform grid covering the bridge from ``y1`` with the default resolution."""
    mean, var = ou_moments(y1, tau, tp)
    sd = math.sqrt(float(var))
    lo = min(y1, float(mean)) - LATTICE_HALF_WIDTH_SD * sd
    hi = max(y1, float(mean)) + LATTICE_HALF_WIDTH_SD * sd
    dy = _slice_width(tau / n_slices, tp) / cells_per_width
    return np.linspace(lo, hi, int(math.ceil((hi - lo) / dy)) + 1)


def _slice_width(dtau: float, tp: ThermoParams) -> float:
    return math.sqrt(2.0 * tp.k_B * dtau / tp.R)


def _penultimate(y1: float, tau: float, n_slices: int, tp: ThermoParams, grid, boundary_term: bool):
    """Grid, trapezoid weights and path weight after ``n_slices - 1`` steps."""
    if n_slices < 2:
        raise ValidationError("need at least two time slices")
    if not (math.isfinite(tau) and tau > 0):
        raise ValidationError("tau must be positive")
    dtau = tau / n_slices
    y = lattice_grid(y1, tau, n_slices, tp) if grid is None else np.asarray(grid, dtype=float)
    dy = (y[-1] - y[0]) / (y.size - 1)
    if _slice_width(dtau, tp) < LATTICE_MIN_CELLS_PER_WIDTH * dy:
        raise GridTooCoarse(
            f"grid spacing {dy:.3g} does not resolve the one-slice kernel width {_slice_width(dtau, tp):.3g}"
        )
    w = trapezoid_weights(y.size, dy)
    # rescale after every step so long products stay in range; constant
    # factors drop out in the final normalization
    transfer = np.exp(_log_slice_weight(y[:, None], y[None, :], dtau, tp, boundary_term)) * w[:, None]
    v = np.exp(_log_slice_weight(y1, y, dtau, tp, boundary_term))
    v /= v.max()
    for _ in range(n_slices - 2):
        v = v @ transfer
        v /= v.max()
    return y, w, v


def lattice_kernel(y1: float, tau: float, n_slices: int, tp: ThermoParams, grid=None, boundary_term: bool = False):
    """Grid and normalized lattice density of the endpoint (default grid auto-sized)."""
    y, w, v = _penultimate(y1, tau, n_slices, tp, grid, boundary_term)
    end = (v * w) @ np.exp(_log_slice_weight(y[:, None], y[None, :], tau / n_slices, tp, boundary_term))
    return y, end / np.dot(w, end)


def lattice_propagator(
    y1: float, y2: float, tau: float, n_slices: int, tp: ThermoParams, grid=None, boundary_term: bool = False
) -> float:
    """Transfer-matrix path integral from ``y1`` to ``y2`` with both ends pinned.

    Each slice carries exp(-dtau L / 2 k_B) with the Lagrangian
    (R/2)(ydot^2 + gamma^2 y^2), the potential averaged over the slice
    endpoints. Intermediate points run over the grid and the last slice lands
    on ``y2`` exactly. The value is scaled so the endpoint density integrates
    to one over the grid, which absorbs the path-measure constant.

    That Lagrangian omits the cross term R gamma y ydot of the full
    Onsager-Machlup function. Being a total derivative it contributes only
    exp(-s (y2^2 - y1^2) / 4 k_B), but this factor depends on ``y2`` and so
    survives the normalization: by default the lattice converges to the
    normalized Euclidean oscillator kernel rather than to the OU density.
    ``boundary_term=True`` restores the cross term slice by slice.
    """
    y, w, v = _penultimate(y1, tau, n_slices, tp, grid, boundary_term)
    dtau = tau / n_slices
    end = (v * w) @ np.exp(_log_slice_weight(y[:, None], y[None, :], dtau, tp, boundary_term))
    at_y2 = (v * w) @ np.exp(_log_slice_weight(y, float(y2), dtau, tp, boundary_term))
    return float(at_y2 / np.dot(w, end))

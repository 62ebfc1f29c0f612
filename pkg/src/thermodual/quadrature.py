"""Quadrature rules on the real line."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

KINDS = ("gauss_legendre_panel", "gauss_hermite", "trapezoid")


@lru_cache(maxsize=32)
def _legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=32)
def _hermite(n: int):
    x, w = np.polynomial.hermite.hermgauss(n)
    return x, w


@dataclass(frozen=True)
class QuadratureRule:
    """How to integrate a Gaussian-like integrand over the real line.

    ``gauss_legendre_panel`` splits ``[a, b]`` into panels of ``panel_points``
    Gauss-Legendre nodes; the interval is ``domain`` if given, otherwise
    ``center +- half_width * scale``. ``gauss_hermite`` is exact for a
    Gaussian weight of width ``scale`` around ``center``. ``trapezoid`` marks
    operators that integrate directly on the caller's uniform grid.
    """

    kind: str = "gauss_legendre_panel"
    points: int = 128
    half_width: float = 8.0
    panel_points: int = 16
    domain: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown quadrature kind {self.kind!r}; expected one of {KINDS}")
        if self.points < 2:
            raise ValueError("a quadrature rule needs at least 2 points")
        if self.kind == "gauss_legendre_panel" and self.points % self.panel_points:
            raise ValueError("points must be a multiple of panel_points")

    def nodes(self, center: float = 0.0, scale: float = 1.0):
        """Nodes and weights for  integral f(y) dy."""
        if self.kind == "gauss_hermite":
            t, w = _hermite(self.points)
            x = center + math.sqrt(2.0) * scale * t
            return x, math.sqrt(2.0) * scale * w * np.exp(t * t)
        if self.kind == "trapezoid":
            raise ValueError("trapezoid rules integrate on a caller-supplied grid")
        a, b = self.domain if self.domain is not None else (center - self.half_width * scale, center + self.half_width * scale)
        return panel_gauss_legendre(a, b, self.points // self.panel_points, self.panel_points)


def panel_gauss_legendre(a: float, b: float, panels: int, per_panel: int):
    t, w = _legendre(per_panel)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return x, wt


def trapezoid_weights(n: int, dy: float) -> np.ndarray:
    w = np.full(n, dy)
    w[0] = w[-1] = 0.5 * dy
    return w

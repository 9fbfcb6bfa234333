"""Built-in test profiles.

All built-ins are exact Hardy-class grid fields.  Profiles with a nonzero
transform at 0+ decay only like 1/x on the line, so their naive samples
carry an O(1/L) seam jump; the grid avatar is therefore the 2L-periodization,
which for the Cauchy kernel has the closed cotangent form and reproduces the
line transform exactly at the positive lattice frequencies (with the
principal-value amplitude at k = 0).
"""

from __future__ import annotations

import numpy as np

from .grid import ComplexField, HardyField, SpectralGrid, szego_project


def zero(grid: SpectralGrid) -> HardyField:
    return HardyField(ComplexField(grid, np.zeros(grid.N, dtype=complex)))


def cauchy(grid: SpectralGrid, pole_height: float = 1.0) -> HardyField:
    """Periodized 1/(x + i*b): (pi/2L) cot(pi (x + i b) / 2L).

    Exact positive-lattice coefficients -2*pi*i*exp(-b*xi_k), half of that
    at k = 0.
    """
    w = np.pi * (grid.x + 1j * pole_height) / (2 * grid.L)
    vals = (np.pi / (2 * grid.L)) / np.tan(w)
    return HardyField(ComplexField(grid, vals))


def ground_state(grid: SpectralGrid, amplitude: float = 1.0) -> HardyField:
    """Grid avatar of the focusing ground state sqrt(2)/(x+i) (mass 2*pi
    at unit amplitude, up to the truncated tail)."""
    base = cauchy(grid, 1.0)
    return HardyField(ComplexField(grid, amplitude * np.sqrt(2) * base.values))


def hardy_gaussian(grid: SpectralGrid, amplitude: float = 1.0) -> HardyField:
    """amplitude * Pi(exp(-x^2)); the Gaussian itself is fully resolved, the
    projection keeps the k >= 0 half of its spectrum."""
    g = szego_project(ComplexField(grid, np.exp(-grid.x ** 2)))
    return HardyField(ComplexField(grid, amplitude * g.values))


_BUILTINS = {
    "zero": zero,
    "ground_state": ground_state,
    "hardy_gaussian": hardy_gaussian,
}


def builtin(name: str, grid: SpectralGrid, amplitude: float = 1.0) -> HardyField:
    if name not in _BUILTINS:
        raise KeyError(f"unknown builtin potential {name!r}; choose from {sorted(_BUILTINS)}")
    if name == "zero":
        return zero(grid)
    return _BUILTINS[name](grid, amplitude)

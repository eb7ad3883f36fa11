"""Closed-form single-photon dynamics of the homogeneous hopping network.

With one photon shared by n resonators that all hop into each other at a
common rate chi, the amplitudes depend on time only through the phase
chi*t.  Starting from the photon in resonator 1, the amplitude stays
symmetric across resonators 2..n, so the whole trajectory is two complex
numbers: the source amplitude and the common target amplitude.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq, minimize_scalar

#: population gap below which a local minimum is probed as a tangent crossing
_TANGENT_GATE = 1.0e-3


def amplitudes_homogeneous(n: int, chi_t: float) -> np.ndarray:
    """Amplitudes (C_1, ..., C_n) at phase chi_t, photon initially in mode 1.

    C_1 = ((n-1) e^{i chi t} + e^{-i(n-1) chi t}) / n
    C_m = (e^{-i(n-1) chi t} - e^{i chi t}) / n        for m >= 2
    """
    return amplitude_grid(n, np.asarray(float(chi_t)))


def amplitude_grid(n: int, chi_t) -> np.ndarray:
    """Vectorized amplitudes: chi_t of shape (...) -> array of shape (..., n)."""
    if n < 2:
        raise ValueError(f"need at least 2 resonators, got n={n}")
    x = np.asarray(chi_t, dtype=float)
    fast = np.exp(1j * x)
    slow = np.exp(-1j * (n - 1) * x)
    c = np.empty(x.shape + (n,), dtype=complex)
    c[..., 0] = ((n - 1) * fast + slow) / n
    c[..., 1:] = ((slow - fast) / n)[..., None]
    return c


def populations(amplitudes: np.ndarray) -> np.ndarray:
    """Occupation probabilities |C_j|^2 along the last axis."""
    return np.abs(np.asarray(amplitudes)) ** 2


def w_state(n: int, phases=None) -> np.ndarray:
    """Normalized W-type amplitude vector (phi_1, ..., phi_n)/sqrt(n).

    phases defaults to all ones; each entry must be unimodular.
    """
    if n < 2:
        raise ValueError(f"need at least 2 resonators, got n={n}")
    if phases is None:
        phi = np.ones(n, dtype=complex)
    else:
        phi = np.asarray(phases, dtype=complex)
        if phi.shape != (n,):
            raise ValueError(f"expected {n} phases, got shape {phi.shape}")
        if not np.allclose(np.abs(phi), 1.0, atol=1.0e-12):
            raise ValueError("phases must be unimodular")
    return phi / np.sqrt(n)


def population_gap(n: int, chi_t) -> np.ndarray:
    """|C_1|^2 - |C_2|^2 as a function of the phase chi_t.

    Zeros of this gap are the equal-population instants where the state
    reaches W form up to local phases.
    """
    c = amplitude_grid(n, chi_t)
    p = populations(c)
    return p[..., 0] - p[..., 1]


def find_w_crossings(
    n: int,
    chi_t_max: float,
    tol: float = 1.0e-6,
    grid_points: int = 2000,
) -> np.ndarray:
    """All phases in (0, chi_t_max] where every resonator is equally populated.

    Scans the population gap on a uniform grid, bisects each sign change,
    and separately refines near-zero local minima to capture roots where the
    gap touches zero without crossing (which happens for n = 4).  Every
    returned root is certified by |gap| <= 10 * tol; for n >= 5 the gap is
    bounded away from zero and the result is empty.
    """
    if n < 2:
        raise ValueError(f"need at least 2 resonators, got n={n}")
    if chi_t_max <= 0:
        raise ValueError(f"chi_t_max must be positive, got {chi_t_max}")
    if grid_points < 16:
        raise ValueError(f"grid_points must be >= 16, got {grid_points}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")

    xs = np.linspace(0.0, chi_t_max, grid_points)
    gap = population_gap(n, xs)
    f = lambda x: float(population_gap(n, x))

    roots: list[float] = []
    sign = np.sign(gap)
    for k in range(len(xs) - 1):
        if sign[k] == 0.0 and xs[k] > 0.0:
            roots.append(float(xs[k]))
        elif sign[k] * sign[k + 1] < 0.0:
            roots.append(float(brentq(f, xs[k], xs[k + 1], xtol=tol)))
    if sign[-1] == 0.0:
        roots.append(float(xs[-1]))

    # interior grid minima with small gap: candidate tangent roots
    for k in range(1, len(xs) - 1):
        if gap[k] <= gap[k - 1] and gap[k] <= gap[k + 1] and abs(gap[k]) < _TANGENT_GATE:
            res = minimize_scalar(
                f, bounds=(xs[k - 1], xs[k + 1]), method="bounded",
                options={"xatol": tol},
            )
            if abs(res.fun) <= 10.0 * tol and res.x > 0.0:
                roots.append(float(res.x))

    if not roots:
        return np.array([])
    merged: list[float] = []
    for x in sorted(roots):
        if not merged or x - merged[-1] > max(10.0 * tol, 1.0e-12):
            merged.append(x)
    certified = [x for x in merged if abs(f(x)) <= 10.0 * tol and 0.0 < x <= chi_t_max]
    return np.array(certified)

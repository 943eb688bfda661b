"""Benchmark problem constructors: linear-friction accuracy tests (1D/2D),
the manufactured nonlinear-friction test, the 1D relaxation problems
(smooth and dam-break data), the 2D vortex, the perturbed hump, and the
still-water well-balance cases."""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (LINEAR, MANNING, Bathymetry, Grid, PhysParams, State,
                   grid_1d, grid_2d)

CASE_IDS = (
    "ex51-linear-1d",
    "ex52-manufactured-1d",
    "ex53-smooth",
    "ex53-discontinuous",
    "ex54-linear-2d",
    "ex55-vortex-2d",
    "ex56-perturbation-2d",
    "still-water-wb",
    "still-water-wb-1d",
)


@dataclass
class BenchmarkCase:
    id: str
    dim: int
    lo: tuple
    hi: tuple
    bc: tuple
    params: PhysParams
    final_time: float
    ic: Callable  # grid -> State
    bathymetry: Optional[Callable] = None  # (x[, y]) -> B
    exact: Optional[Callable] = None  # (x, t) -> (h, m)
    source: Optional[Callable] = None  # grid -> (t -> (dim,) + interior)
    notes: str = ""

    def make_grid(self, n):
        ns = (n,) * self.dim if np.isscalar(n) else tuple(n)
        return Grid(ns, self.lo, self.hi, self.bc)

    def make_state(self, grid):
        return self.ic(grid)

    def make_bathymetry(self, grid):
        if self.bathymetry is None:
            return Bathymetry.flat(grid)
        return Bathymetry.from_function(grid, self.bathymetry, self.params.g)

    def make_source(self, grid):
        return None if self.source is None else self.source(grid)


def _state(grid, h_fn, m_fns, t=0.0):
    h = grid.sample(h_fn)
    m = np.stack([grid.sample(fn) for fn in m_fns])
    return State(grid, h, m, t)


def _zero(*xs):
    return np.zeros_like(xs[0])


def build(case_id, epsilon=None, T=None, theta=None):
    """Construct a fully specified benchmark case.  Overrides: epsilon, the
    final time T, and (relaxation cases only) the friction scaling theta,
    which sets (T, g k^2) = (0.01 theta, theta^2)."""
    if case_id not in CASE_IDS:
        raise ValueError(f"unknown case id {case_id!r} (known: {', '.join(CASE_IDS)})")
    if theta is not None and not case_id.startswith("ex53"):
        raise ValueError("theta applies to the ex53 relaxation cases only")
    builder = _BUILDERS[case_id]
    case = builder(theta=theta)
    if epsilon is not None:
        if case_id == "ex52-manufactured-1d" and epsilon != 1.0:
            raise ValueError(
                "the manufactured case is defined at epsilon = 1 only (its "
                "source term is inconsistent with the small-eps limit)")
        case.params = case.params.with_epsilon(epsilon)
    if T is not None:
        case.final_time = float(T)
    return case


def _build_ex51(theta=None):
    # Well-prepared for gamma = 1: m0 = -g h0 (h0)_x with g = 2.
    def ic(grid):
        return _state(grid,
                      lambda x: np.sin(np.pi * x) + 2.0,
                      [lambda x: -2.0 * np.pi * np.cos(np.pi * x)
                       * (np.sin(np.pi * x) + 2.0)])

    return BenchmarkCase(
        id="ex51-linear-1d", dim=1, lo=(0.0,), hi=(2.0,), bc=("periodic",),
        params=PhysParams(g=2.0, friction=LINEAR), final_time=0.01, ic=ic)


def _ex52_exact(x, t, eps):
    v = 2.0 + eps**2 * np.sin(np.pi * (x - t))
    return v, v


def _build_ex52(theta=None):
    g, k = 1.0, 1.0

    def ic(grid):
        x = grid.cell_centers(0)
        h, m = _ex52_exact(x, 0.0, 1.0)
        return State(grid, grid.from_interior(h),
                     np.stack([grid.from_interior(m)]), 0.0)

    def exact(x, t):
        return _ex52_exact(np.asarray(x), t, 1.0)

    def source(grid):
        x = grid.cell_centers(0)
        eps2 = 1.0

        def S(t):
            s = np.sin(np.pi * (x - t))
            c = np.cos(np.pi * (x - t))
            hexact = 2.0 + eps2 * s
            # derived so that h = m = 2 + eps^2 sin(pi(x-t)) solves the system:
            # S = (g/2) (h^2)_x / eps^2 + g k^2 h^(-1/3) / eps^2
            val = g * np.pi * c * hexact + (g * k**2 / eps2) * hexact ** (-1.0 / 3.0)
            return val[np.newaxis, :]

        return S

    return BenchmarkCase(
        id="ex52-manufactured-1d", dim=1, lo=(0.0,), hi=(2.0,), bc=("periodic",),
        params=PhysParams(g=g, k=k, friction=MANNING), final_time=0.04,
        ic=ic, exact=exact, source=source,
        notes="run at epsilon = 1 only")


def _ex53_params(theta):
    g = 9.812
    th = 1.0 if theta is None else float(theta)
    #   g k^2 = theta^2  and  T = 0.01 theta
    k = math.sqrt(th**2 / g)
    return PhysParams(g=g, k=k, friction=MANNING), 0.01 * th


def _build_ex53_smooth(theta=None):
    params, T = _ex53_params(theta)

    def h0(x):
        mid = 0.5 * (3.0 + np.sin(1.5 * np.pi * x))
        return np.where(x < -1.0, 2.0, np.where(x < 1.0, mid, 1.0))

    def ic(grid):
        return _state(grid, h0, [_zero])

    return BenchmarkCase(
        id="ex53-smooth", dim=1, lo=(-5.0,), hi=(5.0,), bc=("outflow",),
        params=params, final_time=T, ic=ic)


def _build_ex53_discontinuous(theta=None):
    params, T = _ex53_params(theta)

    def ic(grid):
        return _state(grid, lambda x: np.where(x < 0.0, 2.0, 1.0), [_zero])

    return BenchmarkCase(
        id="ex53-discontinuous", dim=1, lo=(-5.0,), hi=(5.0,), bc=("outflow",),
        params=params, final_time=T, ic=ic)


def well_prepared_2d_linear(grid):
    """Initial state of the 2D linear-friction accuracy test: h = sin(pi(x+y))
    + 2 with both momentum components at the gamma = 1 equilibrium value
    -2 pi cos(pi(x+y)) (sin(pi(x+y)) + 2).  Requires the [0,2]^2 domain."""
    if grid.dim != 2 or grid.lo != (0.0, 0.0) or grid.hi != (2.0, 2.0):
        raise ValueError("well-prepared 2D linear data is defined on [0,2]^2")

    def h_fn(x, y):
        return np.sin(np.pi * (x + y)) + 2.0

    def m_fn(x, y):
        s = np.sin(np.pi * (x + y))
        return -2.0 * np.pi * np.cos(np.pi * (x + y)) * (s + 2.0)

    return _state(grid, h_fn, [m_fn, m_fn])


def _build_ex54(theta=None):
    return BenchmarkCase(
        id="ex54-linear-2d", dim=2, lo=(0.0, 0.0), hi=(2.0, 2.0),
        bc=("periodic", "periodic"),
        params=PhysParams(g=2.0, friction=LINEAR), final_time=0.01,
        ic=well_prepared_2d_linear)


def _build_ex55(theta=None):
    # epsilon enters the depth profile, so the ic reads it off the case at
    # sample time (build() may override epsilon after construction).
    case = BenchmarkCase(
        id="ex55-vortex-2d", dim=2, lo=(-5.0, -5.0), hi=(5.0, 5.0),
        bc=("periodic", "periodic"),
        params=PhysParams(g=1.0, k=0.001, friction=MANNING), final_time=0.1,
        ic=None)

    def ic(grid):
        eps = case.params.epsilon

        def h_fn(x, y):
            r2 = x * x + y * y
            return 1.0 - 0.5 * eps**2 * np.exp(-(r2 - 1.0))

        def m1_fn(x, y):
            return -y * np.exp(-0.5 * (x * x + y * y - 1.0))

        def m2_fn(x, y):
            return x * np.exp(-0.5 * (x * x + y * y - 1.0))

        return _state(grid, h_fn, [m1_fn, m2_fn])

    case.ic = ic
    return case


def hump_bathymetry(x, y):
    """Isolated elliptical hump used by the perturbation and well-balance
    cases."""
    return 0.8 * np.exp(-5.0 * (x - 0.9) ** 2 - 50.0 * (y - 0.5) ** 2)


def hump_bathymetry_1d(x):
    return 0.8 * np.exp(-5.0 * (x - 0.9) ** 2)


def _build_ex56(theta=None):
    def ic(grid):
        def h_fn(x, y):
            surface = np.where((x >= 0.05) & (x <= 0.15), 1.01, 1.0)
            return surface - hump_bathymetry(x, y)

        return _state(grid, h_fn, [_zero, _zero])

    return BenchmarkCase(
        id="ex56-perturbation-2d", dim=2, lo=(0.0, 0.0), hi=(2.0, 1.0),
        bc=("outflow", "periodic"),
        params=PhysParams(g=9.812, k=0.09, friction=MANNING), final_time=0.6,
        ic=ic, bathymetry=hump_bathymetry)


def _build_still_water(theta=None):
    def ic(grid):
        return _state(grid, lambda x, y: 1.0 - hump_bathymetry(x, y),
                      [_zero, _zero])

    return BenchmarkCase(
        id="still-water-wb", dim=2, lo=(0.0, 0.0), hi=(2.0, 1.0),
        bc=("outflow", "periodic"),
        params=PhysParams(g=9.812, k=0.09, friction=MANNING), final_time=1.0,
        ic=ic, bathymetry=hump_bathymetry)


def _build_still_water_1d(theta=None):
    def ic(grid):
        return _state(grid, lambda x: 1.0 - hump_bathymetry_1d(x), [_zero])

    return BenchmarkCase(
        id="still-water-wb-1d", dim=1, lo=(0.0,), hi=(2.0,), bc=("outflow",),
        params=PhysParams(g=9.812, k=0.09, friction=MANNING), final_time=1.0,
        ic=ic, bathymetry=hump_bathymetry_1d)


_BUILDERS = {
    "ex51-linear-1d": _build_ex51,
    "ex52-manufactured-1d": _build_ex52,
    "ex53-smooth": _build_ex53_smooth,
    "ex53-discontinuous": _build_ex53_discontinuous,
    "ex54-linear-2d": _build_ex54,
    "ex55-vortex-2d": _build_ex55,
    "ex56-perturbation-2d": _build_ex56,
    "still-water-wb": _build_still_water,
    "still-water-wb-1d": _build_still_water_1d,
}


def exact_solution(case, x, t):
    """Pointwise exact (h, m) for cases that define one."""
    if case.exact is None:
        raise ValueError(f"case {case.id} has no exact solution")
    return case.exact(x, t)

import math

import numpy as np
import pytest

from covmech import (AbelianBackground, BracketContext, HamiltonianSpec,
                     PhasePoint, build_kerr, build_quantum_dot,
                     build_su2_plane, euclidean_chart)


@pytest.fixture(scope="session")
def kerr():
    return build_kerr()


@pytest.fixture(scope="session")
def qdot():
    return build_quantum_dot()


@pytest.fixture(scope="session")
def su2():
    return build_su2_plane()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def uniform_b_background(B: float, q: float = 1.0) -> AbelianBackground:
    """Uniform magnetic field in the plane, symmetric gauge."""
    return AbelianBackground(
        charge=q,
        potential=lambda x: np.array([-0.5 * B * x[1], 0.5 * B * x[0]]),
        potential_partials=lambda x: np.array([[0.0, 0.5 * B],
                                               [-0.5 * B, 0.0]]))


@pytest.fixture(scope="session")
def plane_b():
    """Charged particle in a uniform B field on the flat plane."""
    chart = euclidean_chart(2)
    bg = uniform_b_background(B=0.9, q=1.3)
    ctx = BracketContext(chart=chart, background=bg)
    return HamiltonianSpec(mass=1.0, ctx=ctx)


def schwarzschild_hamiltonian(M: float, x: np.ndarray, pi: np.ndarray) -> float:
    """Independent closed form: H = 1/2 [ -pt^2/f + f pr^2 + pth^2/r^2
    + pph^2/(r^2 sin^2(theta)) ],  f = 1 - 2M/r."""
    _, r, th, _ = x
    f = 1.0 - 2.0 * M / r
    return 0.5 * (-pi[0] ** 2 / f + f * pi[1] ** 2 + pi[2] ** 2 / r ** 2
                  + pi[3] ** 2 / (r ** 2 * math.sin(th) ** 2))


def schwarzschild_christoffel(M: float, x: np.ndarray) -> np.ndarray:
    """Independent textbook closed forms, arranged Gamma[lam, nu, mu]."""
    _, r, th, _ = x
    f = 1.0 - 2.0 * M / r
    s, c = math.sin(th), math.cos(th)
    g = np.zeros((4, 4, 4))
    g[0, 1, 0] = g[1, 0, 0] = M / (r * r * f)            # Gamma_{tr}^t
    g[0, 0, 1] = M * f / (r * r)                          # Gamma_{tt}^r
    g[1, 1, 1] = -M / (r * r * f)                         # Gamma_{rr}^r
    g[2, 2, 1] = -r * f                                   # Gamma_{thth}^r
    g[3, 3, 1] = -r * f * s * s                           # Gamma_{phph}^r
    g[1, 2, 2] = g[2, 1, 2] = 1.0 / r                     # Gamma_{r th}^th
    g[3, 3, 2] = -s * c                                   # Gamma_{phph}^th
    g[1, 3, 3] = g[3, 1, 3] = 1.0 / r                     # Gamma_{r ph}^ph
    g[2, 3, 3] = g[3, 2, 3] = c / s                       # Gamma_{th ph}^ph
    return g


def random_kerr_point(rng, M: float = 1.0) -> PhasePoint:
    x = np.array([rng.uniform(0.0, 1.0),
                  rng.uniform(3.0 * M, 20.0 * M),
                  rng.uniform(0.2, math.pi - 0.2),
                  rng.uniform(0.0, 2.0 * math.pi)])
    return PhasePoint.make(x, rng.uniform(-1.0, 1.0, size=4))

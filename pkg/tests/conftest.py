import math

import numpy as np
import pytest

from wavebif import FluxModel, check_admissible
from wavebif.spectral import CriticalConfiguration


# reference configurations used throughout: both have k0 = 1 and a simple
# zero eigenvalue at +-1 with every other mode strictly hyperbolic.
FLUX_A = FluxModel(sigma1=0.0, sigma2=0.0, sigma3=2.0)
FLUX_A_SUB = FluxModel(sigma1=0.0, sigma2=0.0, sigma3=-2.0)
FLUX_B = FluxModel(sigma1=-1.0, sigma2=1.0, sigma3=1.0)


@pytest.fixture(scope="session")
def config_a() -> CriticalConfiguration:
    cfg = check_admissible(1, 1.0, 1.0, FLUX_A, k_max=128)
    assert isinstance(cfg, CriticalConfiguration)
    return cfg


@pytest.fixture(scope="session")
def config_b() -> CriticalConfiguration:
    cfg = check_admissible(1, 1.0, 0.0, FLUX_B, k_max=128)
    assert isinstance(cfg, CriticalConfiguration)
    return cfg


@pytest.fixture(scope="session")
def flux_a() -> FluxModel:
    return FLUX_A


@pytest.fixture(scope="session")
def flux_b() -> FluxModel:
    return FLUX_B


def expm_series(m: np.ndarray, terms: int = 60) -> np.ndarray:
    """Independent matrix exponential oracle: plain Taylor series with scaling
    and squaring (never calls the package's eigenvalue route)."""
    m = np.asarray(m, dtype=complex)
    norm = np.max(np.abs(m))
    squarings = max(0, int(math.ceil(math.log2(max(norm, 1e-300)))) + 1) if norm > 0.5 else 0
    ms = m / (2**squarings)
    out = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for j in range(1, terms):
        term = term @ ms / j
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def random_admissible_configs(count: int, seed: int, k0_choices=(1, 2, 3), k_max: int = 16):
    """Deterministic stream of admissible configurations with matched fluxes.

    sigma'(0) is solved from the zero-eigenvalue condition; near-degenerate
    draws (conditions c/d close to zero) are resampled.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        k0 = int(rng.choice(k0_choices))
        a_c = float(rng.uniform(0.3, 2.0) * rng.choice([-1.0, 1.0]))
        delta_c = float(rng.uniform(-2.0, 2.0))
        if abs((a_c + 1.0) * k0**2 - delta_c) < 0.05:
            continue
        if abs(21.0 * k0**2 - 5.0 * delta_c) < 0.05:
            continue
        sigma1 = -a_c * k0**4 * (k0**2 - delta_c)
        flux = FluxModel(
            sigma1=sigma1,
            sigma2=float(rng.uniform(-2.0, 2.0)),
            sigma3=float(rng.uniform(-2.0, 2.0)),
        )
        cfg = check_admissible(k0, a_c, delta_c, flux, k_max=k_max)
        if isinstance(cfg, CriticalConfiguration):
            out.append((cfg, flux))
    return out

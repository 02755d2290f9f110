"""Fourier pseudospectral direct simulation of the full nonlinear system.

Fields live on the periodic interval [-pi, pi) as mean-zero real pairs
(tau, u), stored by their complex Fourier coefficients.  The linear part is
block-diagonal over wavenumbers, so it is advanced by exact per-mode 2x2
matrix exponentials; stiffness from the fourth-order terms therefore never
constrains the time step.  The nonlinearity acts only on the u-slot as
d/dx of a pointwise function of tau and is evaluated pseudospectrally with
selectable dealiasing (zero padding by 2 is exact through cubic terms).

Two steppers are provided: Strang splitting (the pure-nonlinear substep is
exactly integrable because tau is frozen there) and ETDRK4 with matrix
phi-function coefficients built from the same eigenvalue decomposition.
"""

from __future__ import annotations

import cmath
import math
import struct
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import BlowupError
from .model import FluxModel, nonlinear_flux
from .tolerances import DEFAULT

__all__ = [
    "FieldState",
    "StepperConfig",
    "Simulator",
    "ResolutionWarning",
    "linear_propagator",
    "nonlinear_term",
    "step",
    "evolve",
    "zero_state",
    "from_physical",
    "from_modes",
    "bifurcation_initial_state",
    "save_state",
    "load_state",
]

SCHEMES = ("etdrk4", "strangSplit")
DEALIAS = ("zeroPadDouble", "twoThirds")

_BLOWUP_MAGNITUDE = 1e12


class ResolutionWarning(UserWarning):
    """Spectral tail energy exceeded the configured fraction of the total."""


def _check_grid(n: int) -> int:
    n = int(n)
    if n < 16 or (n & (n - 1)) != 0:
        raise ValueError(f"grid size must be a power of two >= 16, got {n}")
    return n


def _signs(m: int) -> np.ndarray:
    # (-1)^k phase relating FFT output on [0, 2pi) samples to true
    # coefficients of e^{ikx} on the grid x_j = -pi + 2*pi*j/m
    s = np.ones(m // 2 + 1)
    s[1::2] = -1.0
    return s


@dataclass
class FieldState:
    """Mean-zero real field pair stored as one-sided Fourier coefficients.

    tau_hat[k] and u_hat[k] (0 <= k <= n/2) are the coefficients of e^{ikx};
    negative wavenumbers follow from Hermitian symmetry, so the represented
    fields are real by construction.  The k = 0 entries are identically zero
    (mean-zero space); the Nyquist entry is kept real.
    """

    tau_hat: np.ndarray
    u_hat: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.tau_hat = np.asarray(self.tau_hat, dtype=complex)
        self.u_hat = np.asarray(self.u_hat, dtype=complex)
        if self.tau_hat.shape != self.u_hat.shape or self.tau_hat.ndim != 1:
            raise ValueError("tau_hat and u_hat must be 1-d arrays of equal length")
        _check_grid(self.n)
        if self.tau_hat[0] != 0 or self.u_hat[0] != 0:
            raise ValueError("k = 0 coefficients must be exactly zero (mean-zero space)")

    @property
    def n(self) -> int:
        return 2 * (len(self.tau_hat) - 1)

    def copy(self) -> "FieldState":
        return FieldState(self.tau_hat.copy(), self.u_hat.copy(), self.time)

    def mode(self, k: int) -> tuple[complex, complex]:
        """Coefficient pair (tau_hat(k), u_hat(k)) for any signed |k| <= n/2."""
        if abs(k) > self.n // 2:
            raise ValueError(f"|k| must be <= n/2 = {self.n // 2}")
        if k >= 0:
            return complex(self.tau_hat[k]), complex(self.u_hat[k])
        return complex(np.conj(self.tau_hat[-k])), complex(np.conj(self.u_hat[-k]))

    def grid(self) -> np.ndarray:
        return -math.pi + 2.0 * math.pi * np.arange(self.n) / self.n

    def to_physical(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        s = _signs(n)
        tau = np.fft.irfft(s * self.tau_hat * n, n=n)
        u = np.fft.irfft(s * self.u_hat * n, n=n)
        return tau, u

    def shift(self, phi: float) -> "FieldState":
        """Spatial translation x -> x + phi (phase rotation of every mode)."""
        k = np.arange(self.n // 2 + 1)
        phase = np.exp(1j * k * phi)
        return FieldState(self.tau_hat * phase, self.u_hat * phase, self.time)

    def reflect(self) -> "FieldState":
        """The reflection (tau(x), u(x)) -> (tau(-x), -u(-x))."""
        return FieldState(np.conj(self.tau_hat), -np.conj(self.u_hat), self.time)

    def energy(self) -> float:
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return float(np.sum(w * (np.abs(self.tau_hat) ** 2 + np.abs(self.u_hat) ** 2)))

    def high_mode_energy_fraction(self) -> float:
        """Energy fraction carried above k = n/3 (resolution diagnostic)."""
        total = self.energy()
        if total == 0.0:
            return 0.0
        cut = self.n // 3
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        mask = np.arange(self.n // 2 + 1) > cut
        tail = float(np.sum(w[mask] * (np.abs(self.tau_hat[mask]) ** 2 + np.abs(self.u_hat[mask]) ** 2)))
        return tail / total


def zero_state(n: int, time: float = 0.0) -> FieldState:
    m = _check_grid(n) // 2 + 1
    return FieldState(np.zeros(m, complex), np.zeros(m, complex), time)


def from_modes(n: int, modes: dict, time: float = 0.0) -> FieldState:
    """Build a state from {k: (tau_k, u_k)} for positive wavenumbers k."""
    st = zero_state(n, time)
    for k, (ck_tau, ck_u) in modes.items():
        if not 0 < k <= n // 2:
            raise ValueError(f"mode index must satisfy 0 < k <= n/2, got {k}")
        st.tau_hat[k] = ck_tau
        st.u_hat[k] = ck_u
    return st


def from_physical(tau: np.ndarray, u: np.ndarray, time: float = 0.0) -> FieldState:
    """Transform sampled real fields on the uniform [-pi, pi) grid.

    Both fields must be mean-zero to rounding accuracy; the k = 0 coefficient
    is then pinned to exactly zero.
    """
    tau = np.asarray(tau, dtype=float)
    u = np.asarray(u, dtype=float)
    n = _check_grid(len(tau))
    if len(u) != n:
        raise ValueError("tau and u must have the same length")
    for name, f in (("tau", tau), ("u", u)):
        mean = abs(float(np.mean(f)))
        if mean > 1e-12 * (1.0 + float(np.max(np.abs(f)))):
            raise ValueError(f"{name} is not mean-zero (mean = {mean:.3g})")
    s = _signs(n)
    tau_hat = s * np.fft.rfft(tau) / n
    u_hat = s * np.fft.rfft(u) / n
    tau_hat[0] = 0.0
    u_hat[0] = 0.0
    return FieldState(tau_hat, u_hat, time)


def bifurcation_initial_state(
    n: int,
    k0: int,
    rho: float = 1e-3,
    theta: float = 0.0,
    noise: float = 0.0,
    seed: Optional[int] = None,
    a_c: Optional[float] = None,
) -> FieldState:
    """Seed state for bifurcation runs: tau_hat(k0) = rho*e^{i theta}, rest zero,
    plus optional Gaussian noise on all modes up to n/3 (Hermitian by construction).

    Passing a_c seeds along the kernel direction of the critical linearization,
    u_hat(k0) = -i a_c k0^3 tau_hat(k0); without it the u-slot starts at zero,
    which is orthogonal to the growing direction when sigma'(0) = 0 (the
    nonlinearity must then bootstrap the critical mode).
    """
    st = zero_state(n)
    st.tau_hat[k0] = rho * cmath.exp(1j * theta)
    if a_c is not None:
        st.u_hat[k0] = -1j * a_c * k0**3 * st.tau_hat[k0]
    if noise > 0.0:
        rng = np.random.default_rng(seed)
        top = n // 3
        shape = (2, top)
        z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        st.tau_hat[1 : top + 1] += noise * z[0]
        st.u_hat[1 : top + 1] += noise * z[1]
    return st


# ---------------------------------------------------------------------------
# checkpoint format: little-endian header (n: uint32, time: float64) followed,
# for k = 0 .. n/2 in order, by the interleaved pair
# (Re tau_hat[k], Im tau_hat[k], Re u_hat[k], Im u_hat[k]) as float64.
# ---------------------------------------------------------------------------

def save_state(state: FieldState, path: str) -> None:
    m = state.n // 2 + 1
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Id", state.n, state.time))
        data = np.empty((m, 4), dtype="<f8")
        data[:, 0] = state.tau_hat.real
        data[:, 1] = state.tau_hat.imag
        data[:, 2] = state.u_hat.real
        data[:, 3] = state.u_hat.imag
        fh.write(data.tobytes())


def load_state(path: str) -> FieldState:
    with open(path, "rb") as fh:
        header = fh.read(struct.calcsize("<Id"))
        n, time = struct.unpack("<Id", header)
        m = n // 2 + 1
        data = np.frombuffer(fh.read(m * 4 * 8), dtype="<f8").reshape(m, 4)
    tau_hat = data[:, 0] + 1j * data[:, 1]
    u_hat = data[:, 2] + 1j * data[:, 3]
    return FieldState(tau_hat, u_hat, time)


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    scheme: str = "etdrk4"
    dealias: str = "zeroPadDouble"

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.dealias not in DEALIAS:
            raise ValueError(f"dealias must be one of {DEALIAS}")


# ---------------------------------------------------------------------------
# per-mode matrix functions
# ---------------------------------------------------------------------------

_N_CONTOUR = 32
_CONTOUR = np.exp(2j * np.pi * (np.arange(_N_CONTOUR) + 0.5) / _N_CONTOUR)


def _mode_symbol(k: int, a: float, delta: float, sigma1: float) -> np.ndarray:
    return np.array(
        [[-a * k**4, 1j * k], [1j * sigma1 * k, delta * k**2 - k**4]], dtype=complex
    )


def _mode_eigs(k: int, a: float, delta: float, sigma1: float) -> tuple[complex, complex]:
    from .spectral import _quadratic_coefficients, _stable_roots

    b, c = _quadratic_coefficients(k, a, delta, sigma1)
    return _stable_roots(b, c)


def _etd_integrands(w: np.ndarray, dt: float) -> tuple[np.ndarray, ...]:
    ew = np.exp(w)
    q = dt * (np.exp(w / 2.0) - 1.0) / w
    f1 = dt * (-4.0 - w + ew * (4.0 - 3.0 * w + w * w)) / w**3
    f2 = dt * (2.0 + w + ew * (w - 2.0)) / w**3
    f3 = dt * (-4.0 - 3.0 * w - w * w + ew * (4.0 - w)) / w**3
    return q, f1, f2, f3


def _etd_scalars(z: complex, dt: float, with_deriv: bool = False):
    """ETDRK4 coefficient functions of z = dt*lambda, via a contour average.

    The integrands are entire (removable singularity at 0); the contour
    radius keeps every evaluation point away from the cancellation zone.
    """
    r = 0.25 if 0.7 < abs(z) < 1.3 else 1.0
    c = r * _CONTOUR
    w = z + c
    vals = tuple(np.mean(g) for g in _etd_integrands(w, dt))
    if not with_deriv:
        return vals, None
    derivs = tuple(np.mean(g / c) for g in _etd_integrands(w, dt))
    return vals, derivs


def _matrix_functions(
    k: int,
    a: float,
    delta: float,
    sigma1: float,
    dt: float,
    funcs: str,
    collision_tol: float,
) -> list[np.ndarray]:
    """Evaluate analytic functions of dt*M_k via its eigenvalues.

    funcs: "exp" for the propagator only, "etdrk4" for
    (exp, exp_half, q, f1, f2, f3).  Distinct eigenvalues use the spectral
    projector form; a collision within collision_tol (relative to the
    eigenvalue magnitude) switches to the first-order Jordan limit.
    """
    mdt = dt * _mode_symbol(k, a, delta, sigma1)
    lam1, lam2 = _mode_eigs(k, a, delta, sigma1)
    z1, z2 = dt * lam1, dt * lam2
    eye = np.eye(2, dtype=complex)
    scale = max(1.0, abs(lam1), abs(lam2))
    collided = abs(lam1 - lam2) < collision_tol * scale

    if funcs == "exp":
        if collided:
            zb = 0.5 * (z1 + z2)
            return [cmath.exp(zb) * eye + cmath.exp(zb) * (mdt - zb * eye)]
        p1 = (mdt - z2 * eye) / (z1 - z2)
        p2 = eye - p1
        return [cmath.exp(z1) * p1 + cmath.exp(z2) * p2]

    if collided:
        zb = 0.5 * (z1 + z2)
        dm = mdt - zb * eye
        out = [
            cmath.exp(zb) * eye + cmath.exp(zb) * dm,
            cmath.exp(zb / 2) * eye + 0.5 * cmath.exp(zb / 2) * dm,
        ]
        vals, ders = _etd_scalars(zb, dt, with_deriv=True)
        for v, d in zip(vals, ders):
            out.append(v * eye + d * dm)
        return out

    p1 = (mdt - z2 * eye) / (z1 - z2)
    p2 = eye - p1
    vals1, _ = _etd_scalars(z1, dt)
    vals2, _ = _etd_scalars(z2, dt)
    out = [
        cmath.exp(z1) * p1 + cmath.exp(z2) * p2,
        cmath.exp(z1 / 2) * p1 + cmath.exp(z2 / 2) * p2,
    ]
    for v1, v2 in zip(vals1, vals2):
        out.append(v1 * p1 + v2 * p2)
    return out


def linear_propagator(
    k: int,
    a: float,
    delta: float,
    flux: FluxModel,
    dt: float,
    collision_tol: float = DEFAULT.root_collision,
) -> np.ndarray:
    """Exact matrix exponential exp(dt * M_k) as a 2x2 complex array."""
    if k == 0:
        raise ValueError("k = 0 is excluded on the mean-zero space")
    if dt == 0.0:
        return np.eye(2, dtype=complex)
    return _matrix_functions(int(k), a, delta, flux.sigma1, dt, "exp", collision_tol)[0]


# ---------------------------------------------------------------------------
# nonlinear term with dealiasing
# ---------------------------------------------------------------------------

def _dealias_eval(
    c_hat: np.ndarray,
    n: int,
    dealias: str,
    pointwise: Callable[[np.ndarray], np.ndarray],
    forcing: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate pointwise(tau) on a dealiased grid; returns (g_hat, forcing_hat)
    truncated back to the n-grid coefficient layout."""
    m_small = n // 2 + 1
    if dealias == "zeroPadDouble":
        ng = 2 * n
        padded = np.zeros(ng // 2 + 1, dtype=complex)
        padded[:m_small] = c_hat
        work = padded
    else:  # twoThirds: same grid, truncate the input band
        ng = n
        work = c_hat.copy()
        cut = n // 3
        work[cut + 1 :] = 0.0
    s = _signs(ng)
    tau_phys = np.fft.irfft(s * work * ng, n=ng)
    g = pointwise(tau_phys)
    g_hat = (s * np.fft.rfft(g) / ng)[:m_small]
    if forcing is None:
        f_hat = None
    else:
        kk = np.arange(len(work))
        dtau_phys = np.fft.irfft(s * (1j * kk * work) * ng, n=ng)
        f = forcing(tau_phys, dtau_phys)
        f_hat = (s * np.fft.rfft(f) / ng)[:m_small]
    if dealias == "twoThirds":
        cut = n // 3
        g_hat[cut + 1 :] = 0.0
        if f_hat is not None:
            f_hat[cut + 1 :] = 0.0
    return g_hat, f_hat


def _nonlinear_increment(
    tau_hat: np.ndarray,
    n: int,
    flux: FluxModel,
    dealias: str,
    u_forcing: Optional[Callable] = None,
) -> np.ndarray:
    """u-slot coefficient increment ik * hat{g(tau)} (+ optional raw forcing)."""
    m = n // 2 + 1
    if flux.sigma2 == 0.0 and flux.sigma3 == 0.0 and flux.tail is None and u_forcing is None:
        return np.zeros(m, dtype=complex)
    g_hat, f_hat = _dealias_eval(
        tau_hat, n, dealias, lambda t: nonlinear_flux(flux, t), u_forcing
    )
    k = np.arange(m)
    du = 1j * k * g_hat
    if f_hat is not None:
        du = du + f_hat
    du[0] = 0.0   # d/dx annihilates the mean; forcing mean is projected out
    du[-1] = 0.0  # odd derivative of the Nyquist cosine vanishes on the grid
    return du


def nonlinear_term(
    state: FieldState,
    flux: FluxModel,
    cfg: StepperConfig,
    u_forcing: Optional[Callable] = None,
) -> FieldState:
    """Nonlinear tendency as a FieldState-shaped increment (tau-slot is zero).

    u_forcing(tau_phys, dtau_phys) -> array is an audit hook that adds a term
    to the u-slot *without* the outer d/dx; its mean is projected out.
    """
    du = _nonlinear_increment(state.tau_hat, state.n, flux, cfg.dealias, u_forcing)
    return FieldState(np.zeros_like(du), du, state.time)


# ---------------------------------------------------------------------------
# steppers
# ---------------------------------------------------------------------------

class Simulator:
    """Precomputed stepping engine for fixed (n, a, delta, flux, dt, scheme)."""

    def __init__(
        self,
        n: int,
        a: float,
        delta: float,
        flux: FluxModel,
        cfg: StepperConfig,
        collision_tol: float = DEFAULT.root_collision,
        u_forcing: Optional[Callable] = None,
    ):
        self.n = _check_grid(n)
        self.a = float(a)
        self.delta = float(delta)
        self.flux = flux
        self.cfg = cfg
        self.collision_tol = collision_tol
        self.u_forcing = u_forcing
        m = self.n // 2 + 1
        names = ("E", "E2", "Q", "F1", "F2", "F3") if cfg.scheme == "etdrk4" else ("E",)
        tables = {name: np.zeros((m, 2, 2), dtype=complex) for name in names}
        tables["E"][0] = np.eye(2)
        if cfg.scheme == "etdrk4":
            tables["E2"][0] = np.eye(2)
        kind = "etdrk4" if cfg.scheme == "etdrk4" else "exp"
        for k in range(1, m):
            mats = _matrix_functions(k, self.a, self.delta, flux.sigma1, cfg.dt, kind, collision_tol)
            for name, mat in zip(names, mats):
                tables[name][k] = mat
        self._tables = tables

    def _apply(self, name: str, s: np.ndarray) -> np.ndarray:
        return np.einsum("kab,bk->ak", self._tables[name], s)

    def _nl(self, s: np.ndarray) -> np.ndarray:
        out = np.zeros_like(s)
        out[1] = _nonlinear_increment(s[0], self.n, self.flux, self.cfg.dealias, self.u_forcing)
        return out

    def _sanitize(self, s: np.ndarray) -> np.ndarray:
        s[:, 0] = 0.0
        s[:, -1] = s[:, -1].real
        return s

    def _step_array(self, s: np.ndarray) -> np.ndarray:
        if self.cfg.scheme == "strangSplit":
            half = 0.5 * self.cfg.dt
            # tau is frozen during the pure-nonlinear flow, so the substep is exact
            s = s.copy()
            s[1] = s[1] + half * self._nl(s)[1]
            s = self._apply("E", s)
            s[1] = s[1] + half * self._nl(s)[1]
            return self._sanitize(s)
        n1 = self._nl(s)
        sa = self._apply("E2", s) + self._apply("Q", n1)
        n2 = self._nl(sa)
        sb = self._apply("E2", s) + self._apply("Q", n2)
        n3 = self._nl(sb)
        sc = self._apply("E2", sa) + self._apply("Q", 2.0 * n3 - n1)
        n4 = self._nl(sc)
        out = (
            self._apply("E", s)
            + self._apply("F1", n1)
            + 2.0 * self._apply("F2", n2 + n3)
            + self._apply("F3", n4)
        )
        return self._sanitize(out)

    def step(self, state: FieldState) -> FieldState:
        s = np.vstack([state.tau_hat, state.u_hat])
        # overflow en route to divergence is reported as BlowupError, not a warning
        with np.errstate(over="ignore", invalid="ignore"):
            s = self._step_array(s)
        new_time = state.time + self.cfg.dt
        peak = float(np.max(np.abs(s)))
        if not math.isfinite(peak) or peak > _BLOWUP_MAGNITUDE:
            raise BlowupError(new_time)
        return FieldState(s[0], s[1], new_time)

    def evolve(
        self,
        state: FieldState,
        t_end: float,
        k0: Optional[int] = None,
        stride: int = 1,
        resolution_tol: float = DEFAULT.resolution_energy,
    ):
        """Advance to t_end; if k0 is given, record observer samples every
        `stride` steps: |tau_hat(k0)|, arg tau_hat(k0), |tau_hat(2k0)|, means."""
        if t_end < state.time:
            raise ValueError("t_end must be >= state.time")
        records = {key: [] for key in ("t", "abs_k0", "arg_k0", "abs_2k0", "mean_tau", "mean_u")}

        def sample(st: FieldState):
            if k0 is None:
                return
            records["t"].append(st.time)
            ck = st.tau_hat[k0]
            records["abs_k0"].append(abs(ck))
            records["arg_k0"].append(cmath.phase(complex(ck)))
            k2 = 2 * k0
            records["abs_2k0"].append(abs(st.tau_hat[k2]) if k2 <= st.n // 2 else 0.0)
            records["mean_tau"].append(st.tau_hat[0].real)
            records["mean_u"].append(st.u_hat[0].real)
            if st.high_mode_energy_fraction() > resolution_tol:
                warnings.warn(
                    f"tail energy above k = n/3 exceeds {resolution_tol:.1e} of total "
                    f"at t = {st.time:.6g}; increase the grid",
                    ResolutionWarning,
                    stacklevel=3,
                )

        sample(state)
        dt = self.cfg.dt
        span = t_end - state.time
        n_full = int(math.floor(span / dt + 1e-9))
        t0 = state.time
        for i in range(n_full):
            state = self.step(state)
            state.time = t0 + (i + 1) * dt  # avoid accumulation drift
            if (i + 1) % stride == 0:
                sample(state)
        remainder = t_end - state.time
        if remainder > 1e-9 * max(1.0, dt):
            short = Simulator(
                self.n, self.a, self.delta, self.flux,
                replace(self.cfg, dt=remainder), self.collision_tol, self.u_forcing,
            )
            state = short.step(state)
            state.time = t_end
            sample(state)
        elif k0 is not None and (not records["t"] or records["t"][-1] != state.time):
            sample(state)
        out = {key: np.array(val) for key, val in records.items()} if k0 is not None else None
        return state, out


def _params_pair(params) -> tuple[float, float]:
    if hasattr(params, "a") and hasattr(params, "delta"):
        return float(params.a), float(params.delta)
    a, delta = params
    return float(a), float(delta)


def step(state: FieldState, params, flux: FluxModel, cfg: StepperConfig) -> FieldState:
    """Advance one time step.  params is NormalizedParameters or an (a, delta) pair."""
    a, delta = _params_pair(params)
    return Simulator(state.n, a, delta, flux, cfg).step(state)


def evolve(
    state: FieldState,
    params,
    flux: FluxModel,
    cfg: StepperConfig,
    t_end: float,
    k0: Optional[int] = None,
    stride: int = 1,
    resolution_tol: float = DEFAULT.resolution_energy,
):
    """Repeatedly step to t_end, optionally recording mode observers.

    Returns (final_state, records) where records is None without observers,
    else a dict of arrays keyed t, abs_k0, arg_k0, abs_2k0, mean_tau, mean_u.
    """
    a, delta = _params_pair(params)
    sim = Simulator(state.n, a, delta, flux, cfg)
    return sim.evolve(state, t_end, k0=k0, stride=stride, resolution_tol=resolution_tol)

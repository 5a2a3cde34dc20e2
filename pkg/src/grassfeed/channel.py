"""Temporally correlated multipath channels and their OFDM spectra.

Each of the L taps is an independent complex Gaussian process whose
autocorrelation follows the classical isotropic-scattering model
``J0(2*pi*fd*Ts*m)``.  Sample paths are produced by an autoregressive
recursion fitted to that autocorrelation with diagonal loading, which is
the standard way to synthesize band-limited fading without a
sum-of-sinusoids generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

from ._rng import crandn, rng_stream

DEFAULT_LOADING = 1e-7


class SingularSystem(Exception):
    """The autoregressive fit failed (singular or unstable system)."""


class BadLength(ValueError):
    """Requested DFT size is shorter than the impulse response."""


@dataclass
class ChannelSpec:
    """Static description of one fading link.

    ``pdp`` is the per-tap power delay profile; its sum is the average
    attenuation of the link.  ``fd_ts`` is the Doppler frequency normalized
    by the symbol period, and ``ar_order`` the order of the autoregressive
    generator.
    """

    n_taps: int
    pdp: np.ndarray
    fd_ts: float
    ar_order: int = 200
    seed: int = 0

    def __post_init__(self):
        self.pdp = np.asarray(self.pdp, dtype=float)
        if self.pdp.shape != (self.n_taps,):
            raise ValueError("pdp must have one entry per tap")
        if np.any(self.pdp < 0) or self.pdp.sum() <= 0:
            raise ValueError("pdp entries must be >= 0 with positive sum")
        if not 0.0 <= self.fd_ts < 0.5:
            raise ValueError("fd_ts must lie in [0, 0.5)")
        if self.ar_order < 1:
            raise ValueError("ar_order must be >= 1")

    @classmethod
    def uniform(cls, n_taps: int, fd_ts: float, ar_order: int = 200, seed: int = 0):
        """Uniform unit-energy profile: every tap carries power 1/L."""
        return cls(n_taps, np.full(n_taps, 1.0 / n_taps), fd_ts, ar_order, seed)


@dataclass
class ArProcessState:
    """Mutable generator state: AR coefficients plus per-tap history.

    ``history`` holds the most recent ``M`` samples of the normalized
    (unit-variance) tap processes, newest first.  ``noise_var`` is the
    driving-noise variance, already rescaled so the stationary per-tap
    variance is exactly one.
    """

    coeffs: np.ndarray
    noise_var: float
    history: np.ndarray
    rng: np.random.Generator = field(repr=False, default=None)


def clarke_autocorrelation(fd_ts: float, m: int) -> float:
    """Tap autocorrelation at lag ``m``: ``J0(2*pi*fd_ts*m)``."""
    if m < 0:
        raise ValueError("lag must be nonnegative")
    return float(j0(2.0 * np.pi * fd_ts * m))


def _model_autocovariance(coeffs: np.ndarray, noise_var: float) -> np.ndarray:
    """Stationary autocovariance r[0..M] implied by AR coefficients.

    Solves the linear system formed by the recursions
    ``r[0] = sum_m a_m r[m] + noise_var`` and
    ``r[k] = sum_m a_m r[|k - m|]`` for ``k = 1..M``.
    """
    m_order = coeffs.size
    A = np.eye(m_order + 1)
    for k in range(m_order + 1):
        for m in range(1, m_order + 1):
            if k == 0:
                A[0, m] -= coeffs[m - 1]
            else:
                A[k, abs(k - m)] -= coeffs[m - 1]
    b = np.zeros(m_order + 1)
    b[0] = noise_var
    try:
        r = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("autocovariance system is singular") from exc
    return r


def fit_ar(fd_ts: float, order: int, loading: float = DEFAULT_LOADING):
    """Fit AR coefficients to the Clarke autocorrelation.

    Solves the Yule-Walker equations on ``J0(2*pi*fd_ts*m)`` with diagonal
    loading ``loading`` for numerical stability, then rescales the driving
    noise so the stationary per-tap variance is exactly one.  ``order == 1``
    bypasses the solve and returns ``a_1 = J0(2*pi*fd_ts)`` exactly; a static
    channel (``fd_ts == 0``) degenerates to ``a_1 = 1`` with zero noise.

    Returns ``(coeffs, noise_var)``.

    Raises
    ------
    SingularSystem
        If the loaded Toeplitz solve fails or the fitted filter is unstable.
    """
    if fd_ts == 0.0:
        return np.array([1.0]), 0.0
    if order == 1:
        a1 = clarke_autocorrelation(fd_ts, 1)
        return np.array([a1]), max(0.0, 1.0 - a1 * a1)

    lags = np.arange(order + 1)
    r = j0(2.0 * np.pi * fd_ts * lags)
    R = np.empty((order, order))
    idx = np.abs(np.subtract.outer(np.arange(order), np.arange(order)))
    R[:] = r[idx]
    R[np.diag_indices(order)] += loading
    try:
        coeffs = np.linalg.solve(R, r[1 : order + 1])
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("loaded Yule-Walker solve failed") from exc

    poles = np.roots(np.concatenate(([1.0], -coeffs)))
    if np.max(np.abs(poles)) >= 1.0:
        raise SingularSystem("fitted AR filter is unstable; increase loading")

    raw_var = max(float(1.0 - coeffs @ r[1 : order + 1]), 1e-15)
    model_var = _model_autocovariance(coeffs, raw_var)[0]
    if not np.isfinite(model_var) or model_var <= 0:
        raise SingularSystem("fitted AR model has nonpositive variance")
    return coeffs, raw_var / model_var


def init_state(spec: ChannelSpec, rng: np.random.Generator | None = None,
               loading: float = DEFAULT_LOADING) -> ArProcessState:
    """Fit the AR model and warm it up.

    The history is seeded with independent unit-variance complex Gaussian
    draws and the recursion is run for ``10 * ar_order`` steps so the
    initialization transient has died out before the state is used.
    """
    if rng is None:
        rng = rng_stream(spec.seed, "channel")
    order = 1 if spec.fd_ts == 0.0 else spec.ar_order
    coeffs, noise_var = fit_ar(spec.fd_ts, order, loading)
    history = crandn(rng, coeffs.size, spec.n_taps)
    state = ArProcessState(coeffs, noise_var, history, rng)
    for _ in range(10 * coeffs.size):
        _advance(state, spec.n_taps)
    return state


def _advance(state: ArProcessState, n_taps: int) -> np.ndarray:
    u = state.coeffs @ state.history
    if state.noise_var > 0.0:
        u = u + np.sqrt(state.noise_var) * crandn(state.rng, n_taps)
    if state.history.shape[0] > 1:
        state.history[1:] = state.history[:-1]
    state.history[0] = u
    return u


def step(state: ArProcessState, spec: ChannelSpec) -> np.ndarray:
    """Draw the next impulse response ``h[t]``.

    The marginal distribution of each tap is complex Gaussian with variance
    given by the power delay profile, and the temporal correlation follows
    the fitted model.  A static channel returns the same vector forever.
    """
    u = _advance(state, spec.n_taps)
    return np.sqrt(spec.pdp) * u


def frequency_response(h, n_points: int) -> np.ndarray:
    """Diagonal of the OFDM channel matrix: DFT of the zero-padded response.

    Uses the plain forward DFT without 1/sqrt(N) scaling, so a single unit
    tap yields a flat unit-magnitude response.
    """
    h = np.asarray(h, dtype=complex)
    if n_points < h.size:
        raise BadLength(f"need n_points >= {h.size}, got {n_points}")
    return np.fft.fft(h, n=n_points)

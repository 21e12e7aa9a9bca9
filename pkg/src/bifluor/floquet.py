"""Periodic Liouvillian engine for bichromatic driving.

In the frame rotating at the strong field the master equation has a
generator that is periodic at the beat detuning delta = Delta3 - Delta1:

    L(t) = l0 + lp * exp(+i delta t) + lm * exp(-i delta t)

with l0 holding the strong-field Hamiltonian and the dissipators, and
lp / lm the weak-field sideband couplings.  Density matrices are
column-stacked into vectors (rho_gg, rho_eg, rho_ge, rho_ee).

The periodic steady state is found by harmonic balance,

    (l0 - i k delta) rho_k + lp rho_{k-1} + lm rho_{k+1} = 0,

solved with a block-tridiagonal (Thomas) recursion and normalized by
trace(rho_0) = 1.  The emission spectrum is the half-range Fourier
transform of the beat-phase averaged two-time correlation
<sigma+(t0+tau) sigma-(t0)>, propagated with an adaptive fourth/fifth
order integrator; the non-decaying part of the correlation (a
trigonometric polynomial at harmonics of delta) is removed first and
reported as discrete elastic lines.

Weak-field convention: the weak record stores the half splitting G, so
the bare coupling in the Hamiltonian is kappa_w = 2G.  The dipole
matrix element of the inner dressed transition is 1/2, which makes the
effective secular coupling G and splits each dressed line by 2G.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .bloch import Spectrum
from .emitter import TWO_PI, BichromaticDrive, EmitterParams
from .errors import (
    CoverageError,
    DegenerateDriveError,
    SingularSystemError,
    TruncationError,
    TruncationWarning,
    ValidationError,
)

__all__ = [
    "IDENTITY",
    "SIGMA_M",
    "SIGMA_P",
    "SIGMA_Z",
    "spre",
    "spost",
    "dissipator",
    "drive_hamiltonians",
    "PeriodicLiouvillian",
    "PeriodicState",
    "build_periodic_liouvillian",
    "periodic_steady_state",
    "emission_spectrum",
    "half_fourier",
]

# basis order (g, e)
IDENTITY = np.eye(2, dtype=complex)
SIGMA_M = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |g><e|
SIGMA_P = SIGMA_M.conj().T
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)
NUMBER = SIGMA_P @ SIGMA_M
TRACE_ROW = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex)


def spre(a: np.ndarray) -> np.ndarray:
    """Superoperator for left multiplication, rho -> a rho."""
    return np.kron(IDENTITY, a)


def spost(b: np.ndarray) -> np.ndarray:
    """Superoperator for right multiplication, rho -> rho b."""
    return np.kron(b.T, IDENTITY)


def dissipator(l_op: np.ndarray) -> np.ndarray:
    """Lindblad dissipator L . L+ - (L+L . + . L+L)/2 as a superoperator."""
    ldl = l_op.conj().T @ l_op
    return spre(l_op) @ spost(l_op.conj().T) - 0.5 * (spre(ldl) + spost(ldl))


def drive_hamiltonians(drive: BichromaticDrive) -> tuple[np.ndarray, np.ndarray]:
    """Static part h0 and e^{+i delta t} coefficient hp, rad/ns.

    h0 = Omega sigma_x - Delta1 |e><e| in the strong-drive frame; the
    weak field enters as hp e^{+i delta t} + hp^dag e^{-i delta t} with
    hp = 2 G exp(-i phase) sigma-.
    """
    om = TWO_PI * drive.strong.rabi
    d1 = TWO_PI * drive.strong.detuning
    kap = 2.0 * TWO_PI * drive.weak.rabi
    h0 = om * (SIGMA_P + SIGMA_M) - d1 * NUMBER
    hp = kap * np.exp(-1j * drive.relative_phase) * SIGMA_M
    return h0, hp


@dataclass(frozen=True)
class PeriodicLiouvillian:
    """Harmonic components of the periodic generator (4x4 blocks)."""

    l0: np.ndarray
    lp: np.ndarray
    lm: np.ndarray
    delta: float  # beat detuning, rad/ns
    emitter: EmitterParams
    drive: BichromaticDrive

    def __post_init__(self):
        for m in (self.l0, self.lp, self.lm):
            m.setflags(write=False)


@dataclass(frozen=True)
class PeriodicState:
    """Fourier components rho_k of the periodic steady state.

    ``harmonics`` has shape (2*cutoff + 1, 4); row cutoff + k holds the
    vectorized rho_k.  rho_0 has unit trace, every other harmonic is
    traceless, and rho_{-k} is the adjoint of rho_k.
    """

    harmonics: np.ndarray
    cutoff: int
    delta: float  # rad/ns

    def __post_init__(self):
        self.harmonics.setflags(write=False)

    def harmonic(self, k: int) -> np.ndarray:
        if abs(k) > self.cutoff:
            return np.zeros(4, dtype=complex)
        return self.harmonics[self.cutoff + k]

    def harmonic_matrix(self, k: int) -> np.ndarray:
        return self.harmonic(k).reshape(2, 2, order="F")

    def rho_at(self, times) -> np.ndarray:
        """Vectorized rho(t) = sum_k rho_k e^{i k delta t}; shape (4, n)."""
        t = np.atleast_1d(np.asarray(times, dtype=float))
        k = np.arange(-self.cutoff, self.cutoff + 1)
        phases = np.exp(1j * self.delta * np.outer(k, t))
        return self.harmonics.T @ phases

    def content_cutoff(self, tol: float = 1e-7) -> int:
        """Largest |k| whose harmonic exceeds tol * ||rho_0||, plus one."""
        norms = np.linalg.norm(self.harmonics, axis=1)
        ref = norms[self.cutoff]
        above = np.nonzero(norms >= tol * ref)[0]
        return int(np.max(np.abs(above - self.cutoff))) + 1


def build_periodic_liouvillian(
    emitter: EmitterParams, drive: BichromaticDrive
) -> PeriodicLiouvillian:
    """Assemble l0, lp, lm for a bichromatic drive.

    Requires a non-zero beat detuning; equal-frequency (degenerate)
    drives are handled by scans.degenerate_spectrum instead.
    """
    if drive.delta == 0.0:
        raise DegenerateDriveError(
            "beat detuning is zero; use scans.degenerate_spectrum for "
            "equal-frequency drives"
        )
    h0, hp = drive_hamiltonians(drive)
    l0 = (
        -1j * (spre(h0) - spost(h0))
        + emitter.gamma_sp * dissipator(SIGMA_M)
        + 0.5 * emitter.gamma_pd * dissipator(SIGMA_Z)
    )
    lp = -1j * (spre(hp) - spost(hp))
    lm = -1j * (spre(hp.conj().T) - spost(hp.conj().T))
    return PeriodicLiouvillian(
        l0=l0, lp=lp, lm=lm, delta=TWO_PI * drive.delta, emitter=emitter, drive=drive
    )


def _solve_balance(pl: PeriodicLiouvillian, cutoff: int) -> np.ndarray:
    """Harmonic balance at a fixed cutoff via block-tridiagonal recursion."""
    eye = np.eye(4, dtype=complex)

    def diag_block(k: int) -> np.ndarray:
        return pl.l0 - 1j * k * pl.delta * eye

    try:
        up = [None] * (cutoff + 1)  # up[k] maps rho_{k-1} -> rho_k
        carry = None
        for k in range(cutoff, 0, -1):
            m = diag_block(k) if carry is None else diag_block(k) + pl.lm @ carry
            carry = -np.linalg.solve(m, pl.lp)
            up[k] = carry
        down = [None] * (cutoff + 1)  # down[k] maps rho_{-k+1} -> rho_{-k}
        carry = None
        for k in range(cutoff, 0, -1):
            m = diag_block(-k) if carry is None else diag_block(-k) + pl.lp @ carry
            carry = -np.linalg.solve(m, pl.lm)
            down[k] = carry
        center = pl.l0.copy()
        if cutoff >= 1:
            center = center + pl.lm @ up[1] + pl.lp @ down[1]
        center[0, :] = TRACE_ROW
        rhs = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
        rho0 = np.linalg.solve(center, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"harmonic balance solve failed: {exc}") from exc
    harm = np.zeros((2 * cutoff + 1, 4), dtype=complex)
    harm[cutoff] = rho0
    for k in range(1, cutoff + 1):
        harm[cutoff + k] = up[k] @ harm[cutoff + k - 1]
        harm[cutoff - k] = down[k] @ harm[cutoff - k + 1]
    return harm


def periodic_steady_state(
    pl: PeriodicLiouvillian,
    cutoff: int = 8,
    ceiling: int = 4096,
    tol: float = 1e-8,
) -> PeriodicState:
    """Periodic steady state with automatic cutoff doubling.

    The cutoff doubles until the edge harmonic falls below
    ``tol * ||rho_0||``; hitting the ceiling without convergence raises
    TruncationError carrying the residual edge norm.
    """
    if cutoff < 1 or ceiling < cutoff:
        raise ValidationError("need 1 <= cutoff <= ceiling")
    k = cutoff
    while True:
        harm = _solve_balance(pl, k)
        ref = np.linalg.norm(harm[k])
        edge = max(np.linalg.norm(harm[0]), np.linalg.norm(harm[-1]))
        if edge <= tol * ref:
            return PeriodicState(harmonics=harm, cutoff=k, delta=pl.delta)
        if k >= ceiling:
            raise TruncationError(
                f"harmonic balance not converged at cutoff {k}: "
                f"edge harmonic {edge:.3e} vs rho_0 {ref:.3e}",
                residual=float(edge / ref),
            )
        k = min(2 * k, ceiling)


def _filon_weights(theta: np.ndarray):
    """Panel weights for quadratic interpolatory oscillatory quadrature.

    For one panel [0, 2h] with nodes at 0, h, 2h the integral of
    f(tau) e^{-i nu tau} is h * (w0 f0 + w1 f1 + w2 f2) with the f
    values taken at the nodes and theta = nu h.  Exact for quadratic f,
    any theta; the error does not grow with nu, unlike plain Simpson.
    """
    th = np.asarray(theta, dtype=float)
    small = np.abs(th) < 0.25
    # series moments m_k = int_0^2 x^k e^{-i th x} dx for small theta
    mu = -1j * th
    m_series = []
    for k in range(3):
        acc = np.zeros_like(mu)
        term = np.ones_like(mu)  # mu^n / n!
        for n in range(0, 18):
            acc = acc + term * (2.0 ** (k + n + 1)) / (k + n + 1)
            term = term * mu / (n + 1)
        m_series.append(acc)
    # closed-form moments for large theta
    mu_safe = np.where(small, -1j, mu)
    e2 = np.exp(2.0 * mu_safe)
    m0c = (e2 - 1.0) / mu_safe
    m1c = 2.0 * e2 / mu_safe - m0c / mu_safe
    m2c = 4.0 * e2 / mu_safe - 2.0 * m1c / mu_safe
    m0 = np.where(small, m_series[0], m0c)
    m1 = np.where(small, m_series[1], m1c)
    m2 = np.where(small, m_series[2], m2c)
    w0 = 0.5 * (m2 - 3.0 * m1 + 2.0 * m0)
    w1 = 2.0 * m1 - m2
    w2 = 0.5 * (m2 - m1)
    return w0, w1, w2


def half_fourier(tau: np.ndarray, values: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """integral_0^T values(tau) e^{-i nu tau} d tau on a uniform grid.

    ``tau`` must be uniform with an odd number of points (an even
    number of panels).  Evaluated per frequency with oscillation-exact
    panel weights; complex result.
    """
    tau = np.asarray(tau, dtype=float)
    values = np.asarray(values, dtype=complex)
    nu = np.asarray(nu, dtype=float)
    n = tau.size
    if n < 3 or n % 2 == 0:
        raise ValidationError("need an odd number of tau samples")
    h = tau[1] - tau[0]
    out = np.empty(nu.shape, dtype=complex)
    block = max(1, int(4e6 // n))
    for start in range(0, nu.size, block):
        nub = nu[start : start + block]
        w0, w1, w2 = _filon_weights(nub * h)
        phase = np.exp(-1j * np.outer(nub, tau))
        p = phase * values[None, :]
        s_even_head = p[:, 0:-2:2].sum(axis=1)
        s_odd = p[:, 1::2].sum(axis=1)
        s_even_tail = p[:, 2::2].sum(axis=1)
        rot = np.exp(1j * nub * h)
        out[start : start + block] = h * (
            w0 * s_even_head + w1 * rot * s_odd + w2 * rot**2 * s_even_tail
        )
    return out


def _slowest_rate(l0: np.ndarray) -> float:
    lams = np.linalg.eigvals(l0)
    rates = -lams.real
    rates = rates[rates > 1e-9]
    if rates.size == 0:
        raise ValidationError("generator has no decaying modes")
    return float(rates.min())


def emission_spectrum(
    pl: PeriodicLiouvillian,
    state: PeriodicState,
    grid: np.ndarray,
    tau_max: float | None = None,
    n_phases: int = 16,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    strict: bool = False,
    detector_fwhm: float | None = None,
) -> Spectrum:
    """Beat-averaged emission spectrum on ``grid`` (GHz, relative to omega0).

    The two-time correlation is seeded with sigma- rho_ss(t0) at
    ``n_phases`` beat phases t0 (raised automatically if the steady
    state holds more harmonics), propagated to ``tau_max`` ns (default:
    thirty decay times of the slowest static mode) and averaged.  The
    non-decaying tail, a trigonometric polynomial at harmonics of the
    beat, is fitted over the last 20% of the window, subtracted, and
    returned as elastic lines; the rest is tapered with a cosine
    roll-off over the last 10% and transformed.

    A correlation that has not decayed below 1e-6 of its initial value
    at tau_max raises a TruncationWarning (an error under strict).
    ``detector_fwhm``, if set, convolves the result with a Gaussian of
    that width (GHz); the grid must then be uniform.
    """
    grid = np.asarray(grid, dtype=float)
    emitter, drive = pl.emitter, pl.drive
    d1 = drive.strong.detuning
    lw = 1.0 / (TWO_PI * emitter.t2_ns)
    g_half = 2.0 * drive.weak.rabi
    span = 2.0 * drive.strong.rabi
    if drive.weak.rabi > 0.0:
        span = max(span, abs(drive.delta))
    need = span + g_half + 3.0 * lw
    tol = 1e-9 * max(1.0, abs(d1) + need)
    if grid.min() > d1 - need + tol or grid.max() < d1 + need - tol:
        raise CoverageError(
            f"grid [{grid.min():g}, {grid.max():g}] GHz must cover "
            f"[{d1 - need:g}, {d1 + need:g}] GHz (all nine line positions)"
        )
    if tau_max is None:
        tau_max = max(10.0 * emitter.t2_ns, 30.0 / _slowest_rate(pl.l0))
    elif tau_max < 10.0 * emitter.t2_ns:
        raise ValidationError(
            f"tau_max {tau_max:g} ns is below ten coherence times "
            f"({10.0 * emitter.t2_ns:g} ns)"
        )

    f_max = max(
        abs(drive.delta) if drive.weak.rabi > 0.0 else 0.0,
        2.0 * drive.strong.rabi,
        g_half,
        emitter.gamma_sp / TWO_PI,
        1.0 / (TWO_PI * emitter.t2_ns),
        float(np.max(np.abs(grid - d1))),
    )
    h = 1.0 / (20.0 * f_max)
    n_tau = int(np.ceil(tau_max / h)) + 1
    if n_tau % 2 == 0:
        n_tau += 1
    tau = np.linspace(0.0, tau_max, n_tau)

    coupled = np.any(pl.lp != 0.0)
    if coupled:
        m_phases = max(int(n_phases), state.content_cutoff())
    else:
        m_phases = 1
    beat = 2.0 * np.pi / abs(pl.delta)
    t0 = np.arange(m_phases) * beat / m_phases
    seeds = spre(SIGMA_M) @ state.rho_at(t0)  # (4, M)

    ph0 = np.exp(1j * pl.delta * t0)
    l0, lp, lm = pl.l0, pl.lp, pl.lm

    def rhs(t, y):
        ymat = y.reshape(4, m_phases)
        out = l0 @ ymat
        if coupled:
            ph = ph0 * np.exp(1j * pl.delta * t)
            out = out + (lp @ ymat) * ph + (lm @ ymat) * ph.conj()
        return out.reshape(-1)

    sol = solve_ivp(
        rhs,
        (0.0, tau_max),
        seeds.reshape(-1),
        method="RK45",
        t_eval=tau,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise TruncationError(f"correlation propagation failed: {sol.message}")
    # index 2 of the vectorized operator is the ge component, whose trace
    # against sigma+ gives the correlation
    corr = sol.y.reshape(4, m_phases, n_tau)[2].mean(axis=0)

    # non-decaying tail: trigonometric polynomial at harmonics of delta
    tail = tau >= 0.8 * tau_max
    delta_ghz = pl.delta / TWO_PI
    km = min(4, int(np.floor(0.2 * tau_max * abs(delta_ghz)))) if coupled else 0
    orders = np.arange(-km, km + 1)
    basis = np.exp(1j * pl.delta * np.outer(tau[tail], orders))
    coef, *_ = np.linalg.lstsq(basis, corr[tail], rcond=None)
    full_basis = np.exp(1j * pl.delta * np.outer(tau, orders))
    corr_inc = corr - full_basis @ coef

    c0 = abs(corr_inc[0])
    resid = float(np.max(np.abs(corr_inc[tau >= 0.9 * tau_max])))
    if resid > 1e-6 * max(c0, 1e-300):
        msg = (
            f"correlation not decayed at tau_max={tau_max:g} ns: "
            f"residual {resid:.3e} vs initial {c0:.3e}"
        )
        if strict:
            raise TruncationError(msg, residual=resid / max(c0, 1e-300))
        warnings.warn(msg, TruncationWarning, stacklevel=2)

    window = np.ones(n_tau)
    edge = tau >= 0.9 * tau_max
    window[edge] = 0.5 * (
        1.0 + np.cos(np.pi * (tau[edge] - 0.9 * tau_max) / (0.1 * tau_max))
    )

    nu = TWO_PI * (grid - d1)
    intensity = 2.0 * np.real(half_fourier(tau, corr_inc * window, nu))

    if detector_fwhm is not None:
        steps = np.diff(grid)
        if not np.allclose(steps, steps[0], rtol=1e-9):
            raise ValidationError("detector convolution needs a uniform grid")
        sigma = detector_fwhm / (2.0 * np.sqrt(2.0 * np.log(2.0)))
        half_w = int(np.ceil(4.0 * sigma / steps[0]))
        x = np.arange(-half_w, half_w + 1) * steps[0]
        kernel = np.exp(-0.5 * (x / sigma) ** 2)
        kernel /= kernel.sum()
        intensity = np.convolve(intensity, kernel, mode="same")

    weights = np.clip(coef.real, 0.0, None)
    lines = tuple(
        (d1 + m * delta_ghz, float(wt)) for m, wt in zip(orders, weights)
    )
    lines = tuple(sorted(lines, key=lambda fw: fw[0]))
    return Spectrum(
        freq=grid,
        intensity=intensity,
        elastic_weight=float(weights.sum()),
        elastic_lines=lines,
    )

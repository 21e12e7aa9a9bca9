"""Optical Bloch equations and the monochromatic fluorescence spectrum.

The two-level emitter driven by one monochromatic field is described in
the frame rotating at the drive by the Bloch vector (u, v, w) with
u = rho_ge + rho_eg, v = i(rho_ge - rho_eg), w = rho_ee - rho_gg
(basis order g, e; sigma- = |g><e|).  The drift matrix and pump vector
are in angular units (rad/ns and 1/ns, see the emitter module).

The emission spectrum comes from the quantum regression theorem: the
two-time correlation C(tau) = <sigma+(t+tau) sigma-(t)> obeys the same
drift as the Bloch vector, and the incoherent spectrum is the real part
of a sum of resolvent terms over the drift eigenmodes.  Frequencies are
quoted in GHz relative to the bare transition; the drive sits at the
detuning Delta1, the Mollow sidebands at Delta1 +- sqrt((2*Omega)^2 +
Delta1^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .emitter import TWO_PI, DriveField, EmitterParams
from .errors import CoverageError, SingularSystemError, ValidationError
from .fitting import gauss_newton

__all__ = [
    "BlochSystem",
    "Spectrum",
    "build_bloch",
    "steady_state",
    "mollow_spectrum",
    "mollow_shape",
    "MollowFit",
    "fit_mollow",
]


@dataclass(frozen=True)
class BlochSystem:
    """Drift matrix (3x3, angular units) and pump vector for (u, v, w)."""

    drift: np.ndarray
    pump: np.ndarray
    emitter: EmitterParams
    drive: DriveField

    def __post_init__(self):
        self.drift.setflags(write=False)
        self.pump.setflags(write=False)


@dataclass(frozen=True)
class Spectrum:
    """Sampled emission spectrum.

    ``freq`` is a strictly increasing grid in GHz relative to the bare
    transition frequency; ``intensity`` is the incoherent spectral
    density on that grid (1/GHz units, normalized so that the elastic
    weight plus the integral of the incoherent part equals the excited
    state population).  Elastic (delta-function) components are kept
    out of ``intensity`` and reported as ``elastic_lines``, a tuple of
    (frequency, weight) pairs; ``elastic_weight`` is their sum.
    """

    freq: np.ndarray
    intensity: np.ndarray
    elastic_weight: float
    elastic_lines: tuple = ()

    def __post_init__(self):
        freq = np.asarray(self.freq, dtype=float)
        intensity = np.asarray(self.intensity, dtype=float)
        if freq.ndim != 1 or freq.size < 2:
            raise ValidationError("freq must be a 1d grid with at least 2 points")
        if intensity.shape != freq.shape:
            raise ValidationError("freq and intensity must have the same shape")
        if not np.all(np.diff(freq) > 0.0):
            raise ValidationError("freq must be strictly increasing")
        floor = -1e-9 * max(float(intensity.max(initial=0.0)), 1e-300)
        if float(intensity.min()) < floor:
            raise ValidationError(
                f"negative intensity below the numerical floor: "
                f"min {float(intensity.min()):.3e} < {floor:.3e}"
            )
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "intensity", intensity)
        freq.setflags(write=False)
        intensity.setflags(write=False)


def build_bloch(emitter: EmitterParams, drive: DriveField) -> BlochSystem:
    """Bloch drift matrix and pump for a single monochromatic drive."""
    t1 = emitter.t1_ns
    t2 = emitter.t2_ns
    om = TWO_PI * drive.rabi
    d1 = TWO_PI * drive.detuning
    drift = np.array(
        [
            [-1.0 / t2, -d1, 0.0],
            [d1, -1.0 / t2, 2.0 * om],
            [0.0, -2.0 * om, -1.0 / t1],
        ]
    )
    pump = np.array([0.0, 0.0, -1.0 / t1])
    return BlochSystem(drift, pump, emitter, drive)


def steady_state(system: BlochSystem) -> np.ndarray:
    """Steady Bloch vector (u, v, w); the excited population is (1+w)/2."""
    a = system.drift
    if np.linalg.cond(a) > 1e12:
        raise SingularSystemError("Bloch drift matrix is numerically singular")
    return np.linalg.solve(a, -system.pump)


def _coherence_modes(system: BlochSystem):
    """Eigen-decomposition of the regression problem for C(tau).

    Returns (lams, amps, elastic, rho_ee): C_inc(tau) =
    sum_k amps[k] * exp(lams[k] * tau), the elastic weight, and the
    excited population.
    """
    x_ss = steady_state(system)
    u, v, w = x_ss
    rho_ee = 0.5 * (1.0 + w)
    sig = 0.5 * (u + 1j * v)  # <sigma->_ss = rho_eg
    h0 = np.array([rho_ee, 1j * rho_ee, -sig])
    h_ss = x_ss.astype(complex) * sig
    lams, vecs = np.linalg.eig(system.drift)
    coeff = np.linalg.solve(vecs, h0 - h_ss)
    amps = 0.5 * (vecs[0, :] - 1j * vecs[1, :]) * coeff
    return lams, amps, abs(sig) ** 2, rho_ee


def mollow_spectrum(
    emitter: EmitterParams, drive: DriveField, grid: np.ndarray
) -> Spectrum:
    """Incoherent resonance-fluorescence spectrum on ``grid`` (GHz).

    The grid must cover the drive detuning +- (full Rabi splitting plus
    five transverse linewidths); otherwise a CoverageError is raised.
    The elastic (Rayleigh) line at the drive frequency is returned as a
    discrete weight, not folded into the sampled intensity.
    """
    grid = np.asarray(grid, dtype=float)
    span = 2.0 * drive.rabi + 5.0 / (TWO_PI * emitter.t2_ns)
    lo = drive.detuning - span
    hi = drive.detuning + span
    tol = 1e-9 * max(1.0, abs(lo), abs(hi))
    if grid.min() > lo + tol or grid.max() < hi - tol:
        raise CoverageError(
            f"grid [{grid.min():g}, {grid.max():g}] GHz must cover "
            f"[{lo:g}, {hi:g}] GHz around the drive"
        )
    system = build_bloch(emitter, drive)
    lams, amps, elastic, _ = _coherence_modes(system)
    nu = TWO_PI * (grid - drive.detuning)
    resolvent = amps[None, :] / (1j * nu[:, None] - lams[None, :])
    intensity = 2.0 * np.real(resolvent.sum(axis=1))
    return Spectrum(
        freq=grid,
        intensity=intensity,
        elastic_weight=elastic,
        elastic_lines=((drive.detuning, elastic),),
    )


def mollow_shape(emitter: EmitterParams, drive: DriveField, grid) -> np.ndarray:
    """Incoherent spectral shape on an arbitrary grid.

    Same resolvent sum as mollow_spectrum but without the coverage
    pre-check or elastic bookkeeping; meant for overlaying fitted
    models on measured grids.
    """
    grid = np.asarray(grid, dtype=float)
    system = build_bloch(emitter, drive)
    lams, amps, _, _ = _coherence_modes(system)
    nu = TWO_PI * (grid - drive.detuning)
    resolvent = amps[None, :] / (1j * nu[:, None] - lams[None, :])
    return 2.0 * np.real(resolvent.sum(axis=1))


@dataclass(frozen=True)
class MollowFit:
    """Result of fit_mollow.

    Parameters are the fitted half Rabi (GHz), coherence time (ps),
    amplitude scale and constant offset; ``std_errors`` and
    ``covariance`` follow the same order.
    """

    omega: float
    t2_ps: float
    amplitude: float
    offset: float
    std_errors: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    n_iter: int
    converged: bool

    @property
    def rabi2(self) -> float:
        return 2.0 * self.omega


def fit_mollow(
    freq,
    intensity,
    guess: tuple[float, float, float, float],
    t1_ps: float,
    detuning: float = 0.0,
    max_iter: int = 200,
) -> MollowFit:
    """Fit a Mollow-triplet model to sampled data.

    ``guess`` is (omega, t2_ps, amplitude, offset).  t1 and the drive
    detuning are held fixed.  The starting half Rabi should be within
    about 50% of the true value; outside that basin the damped
    Gauss-Newton search may settle elsewhere.  Raises FitFailure (with
    the last iterate attached) if the iteration limit is hit.
    """
    freq = np.asarray(freq, dtype=float)
    data = np.asarray(intensity, dtype=float)
    if freq.shape != data.shape or freq.ndim != 1:
        raise ValidationError("freq and intensity must be matching 1d arrays")
    if freq.size < 16:
        raise ValidationError("need at least 16 samples (4 per parameter)")
    t2_max = 2.0 * t1_ps

    def model(p):
        omega = max(p[0], 0.0)
        t2 = min(max(p[1], 1e-3), t2_max)
        emitter = EmitterParams(t1=t1_ps, t2=t2)
        drive = DriveField(detuning=detuning, rabi=omega)
        system = build_bloch(emitter, drive)
        lams, amps, _, _ = _coherence_modes(system)
        nu = TWO_PI * (freq - detuning)
        resolvent = amps[None, :] / (1j * nu[:, None] - lams[None, :])
        shape = 2.0 * np.real(resolvent.sum(axis=1))
        return p[2] * shape + p[3]

    def residual(p):
        return model(p) - data

    result = gauss_newton(residual, np.asarray(guess, dtype=float), max_iter=max_iter)
    p = result.params
    n, k = freq.size, p.size
    jtj = result.jacobian.T @ result.jacobian
    try:
        cov = np.linalg.inv(jtj) * result.cost / max(n - k, 1)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(jtj) * result.cost / max(n - k, 1)
    std = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return MollowFit(
        omega=max(p[0], 0.0),
        t2_ps=min(max(p[1], 1e-3), t2_max),
        amplitude=p[2],
        offset=p[3],
        std_errors=std,
        covariance=cov,
        residual_norm=float(np.sqrt(result.cost)),
        n_iter=result.n_iter,
        converged=result.converged,
    )

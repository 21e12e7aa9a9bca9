"""Parameter scans built on the spectrum engines.

Covers the weak-field detuning map (spectra stacked over Delta2), the
central-line intensity curve and its laser-detuning fit, the
subharmonic dip scan behind an etalon, and the equal-frequency
(degenerate) drive limit where the beat note disappears and only the
relative phase survives.

Scans parallelize over axis points with processes; rows are assembled
by index, so results are identical for any worker count.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from . import bloch
from .dressed import subharmonic_shift
from .emitter import TWO_PI, BichromaticDrive, DriveField, EmitterParams
from .errors import ConfigError, CoverageError, ValidationError
from .fitting import gauss_newton
from .floquet import build_periodic_liouvillian, emission_spectrum, periodic_steady_state

__all__ = [
    "EtalonFilter",
    "ScanResult2D",
    "detuning_map",
    "CentralCurve",
    "central_intensity_curve",
    "Delta1Fit",
    "fit_delta1",
    "DipRecord",
    "SubharmonicScan",
    "subharmonic_axis",
    "subharmonic_scan",
    "degenerate_spectrum",
    "plateau_edges",
]


@dataclass(frozen=True)
class EtalonFilter:
    """Airy transmission of a planar etalon, all quantities in GHz."""

    center_ghz: float
    fsr_ghz: float
    fwhm_ghz: float

    def __post_init__(self):
        if not (np.isfinite(self.fsr_ghz) and np.isfinite(self.fwhm_ghz)):
            raise ValidationError("etalon parameters must be finite")
        if not 0.0 < self.fwhm_ghz < self.fsr_ghz:
            raise ValidationError("need 0 < fwhm < free spectral range")

    @property
    def finesse(self) -> float:
        return self.fsr_ghz / self.fwhm_ghz

    def transmission(self, freq):
        """Airy function, 1 at the transmission peaks."""
        freq = np.asarray(freq, dtype=float)
        coef = (2.0 * self.finesse / np.pi) ** 2
        s = np.sin(np.pi * (freq - self.center_ghz) / self.fsr_ghz)
        return 1.0 / (1.0 + coef * s * s)

    __call__ = transmission


def _row_task(args):
    """Worker for scan rows; returns (index, intensity, elastic, error)."""
    idx, emitter, drive, grid, tau_max, n_phases, strict = args
    try:
        pl = build_periodic_liouvillian(emitter, drive)
        state = periodic_steady_state(pl)
        spec = emission_spectrum(
            pl, state, grid, tau_max=tau_max, n_phases=n_phases, strict=strict
        )
        return idx, spec.intensity, float(spec.elastic_weight), None
    except Exception as exc:  # noqa: BLE001 - reported per row
        return idx, None, float("nan"), f"{type(exc).__name__}: {exc}"


def _run_rows(tasks, workers: int):
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_row_task, tasks))
    return [_row_task(t) for t in tasks]


@dataclass(frozen=True)
class ScanResult2D:
    """Stack of incoherent spectra over the weak-field axis.

    ``intensity[i]`` is the spectrum at ``delta2[i]``; rows that failed
    hold NaN and are listed in ``failures`` as (delta2, message).
    """

    delta2: np.ndarray
    freq: np.ndarray
    intensity: np.ndarray
    elastic_weight: np.ndarray
    failures: tuple[tuple[float, str], ...]

    def __post_init__(self):
        for arr in (self.delta2, self.freq, self.intensity, self.elastic_weight):
            arr.setflags(write=False)


def detuning_map(
    emitter: EmitterParams,
    strong: DriveField,
    weak_rabi: float,
    delta2_values,
    grid,
    relative_phase: float = 0.0,
    workers: int = 1,
    tau_max: float | None = None,
    n_phases: int = 16,
    strict: bool = False,
) -> ScanResult2D:
    """Emission spectra versus the dressed detuning Delta2.

    Delta2 = Delta3 + 2 Omega locates the weak field relative to the
    inner dressed transition; each axis point gets a weak field at the
    corresponding bare detuning.  Workers > 1 distributes rows over
    processes; the result does not depend on the worker count.
    """
    delta2_values = np.asarray(delta2_values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if delta2_values.ndim != 1 or delta2_values.size == 0:
        raise ValidationError("delta2_values must be a non-empty 1d array")
    if workers < 1:
        raise ValidationError("workers must be at least 1")
    tasks = []
    for i, d2 in enumerate(delta2_values):
        weak = DriveField(detuning=d2 - 2.0 * strong.rabi, rabi=weak_rabi)
        drive = BichromaticDrive(strong=strong, weak=weak, relative_phase=relative_phase)
        tasks.append((i, emitter, drive, grid, tau_max, n_phases, strict))
    rows = _run_rows(tasks, workers)
    intensity = np.full((delta2_values.size, grid.size), np.nan)
    elastic = np.full(delta2_values.size, np.nan)
    failures = []
    for idx, row, ew, err in rows:
        if err is None:
            intensity[idx] = row
            elastic[idx] = ew
        else:
            failures.append((float(delta2_values[idx]), err))
    return ScanResult2D(
        delta2=delta2_values,
        freq=grid,
        intensity=intensity,
        elastic_weight=elastic,
        failures=tuple(failures),
    )


@dataclass(frozen=True)
class CentralCurve:
    """Integrated incoherent intensity near the central line vs Delta2."""

    delta2: np.ndarray
    intensity: np.ndarray
    window_ghz: float
    center_ghz: float

    def __post_init__(self):
        self.delta2.setflags(write=False)
        self.intensity.setflags(write=False)


def central_intensity_curve(
    result: ScanResult2D, window: float = 0.5, center: float = 0.0
) -> CentralCurve:
    """Integrate each map row over |f - center| <= window (GHz)."""
    if window <= 0.0:
        raise ValidationError("window must be positive")
    mask = np.abs(result.freq - center) <= window
    if mask.sum() < 3:
        raise CoverageError("map grid has too few points inside the window")
    vals = np.trapezoid(result.intensity[:, mask], result.freq[mask], axis=1)
    return CentralCurve(
        delta2=result.delta2.copy(),
        intensity=vals,
        window_ghz=float(window),
        center_ghz=float(center),
    )


def _central_weight(delta1, rabi, g, delta2):
    """Unnormalized secular central-line weight for the curve model."""
    theta = 0.5 * np.arctan2(2.0 * rabi, 0.0 - delta1)
    s = np.hypot(2.0 * rabi, delta1)
    g_eff = 2.0 * g * np.sin(theta) ** 2
    delta3 = delta2 - 2.0 * rabi
    d_pair = s + (delta3 - delta1)
    lam2 = d_pair * d_pair + 4.0 * g_eff * g_eff
    cos2p_sq = d_pair * d_pair / lam2 if lam2 > 0.0 else 1.0
    return (np.sin(theta) * np.cos(theta)) ** 2 * cos2p_sq


@dataclass(frozen=True)
class Delta1Fit:
    delta1: float
    scale: float
    residual_norm: float
    n_iter: int
    converged: bool


def fit_delta1(curve: CentralCurve, strong_rabi: float, weak_rabi: float) -> Delta1Fit:
    """Recover the strong-laser detuning from a central-intensity curve.

    The curve minimum sits where the weak field crosses the dressed
    resonance, which tracks Delta1; a two-parameter (detuning, scale)
    fit of the secular central weight against the measured curve pins
    it down.  Initialized from a parabola through the curve minimum.
    """
    good = np.isfinite(curve.intensity)
    d2 = curve.delta2[good]
    y = curve.intensity[good]
    if d2.size < 5:
        raise ValidationError("need at least five finite curve points")
    i0 = int(np.argmin(y))
    if 0 < i0 < d2.size - 1:
        x1, x2, x3 = d2[i0 - 1 : i0 + 2]
        y1, y2, y3 = y[i0 - 1 : i0 + 2]
        denom = (x1 - x2) * (x1 - x3) * (x2 - x3)
        a = (x3 * (y2 - y1) + x2 * (y1 - y3) + x1 * (y3 - y2)) / denom
        b = (x3**2 * (y1 - y2) + x2**2 * (y3 - y1) + x1**2 * (y2 - y3)) / denom
        d1_init = -b / (2.0 * a) if a > 0.0 else d2[i0]
    else:
        d1_init = d2[i0]

    def model(p):
        d1, scale = p
        w = np.array([_central_weight(d1, strong_rabi, weak_rabi, x) for x in d2])
        return scale * w

    w0 = model((d1_init, 1.0))
    top = float(np.max(w0))
    scale_init = float(np.max(y) / top) if top > 0.0 else 1.0

    def residual(p):
        return model(p) - y

    result = gauss_newton(residual, np.array([d1_init, scale_init]))
    return Delta1Fit(
        delta1=float(result.params[0]),
        scale=float(result.params[1]),
        residual_norm=float(np.sqrt(result.cost)),
        n_iter=result.n_iter,
        converged=result.converged,
    )


@dataclass(frozen=True)
class DipRecord:
    order: int
    dip_position_ghz: float  # measured -Delta3 of the dip
    unshifted_ghz: float  # 2 Omega / n
    formula_shift_ghz: float


@dataclass(frozen=True)
class SubharmonicScan:
    delta3: np.ndarray
    intensity: np.ndarray
    dips: tuple[DipRecord, ...]
    alpha_squared: float
    orders: tuple[int, ...]

    def __post_init__(self):
        self.delta3.setflags(write=False)
        self.intensity.setflags(write=False)


def subharmonic_axis(
    rabi: float,
    orders=(1, 2, 3, 4, 5),
    points_per_order: int = 16,
    alpha_squared: float = 0.359,
) -> np.ndarray:
    """Weak-detuning axis clustered around the expected dips.

    Each order gets a window reaching from slightly below the bare
    subharmonic 2 Omega / n to beyond the shifted resonance; windows
    shrink for high orders so neighbours never overlap.
    """
    if rabi <= 0.0:
        raise ValidationError("rabi must be positive")
    points = []
    for n in sorted(set(int(n) for n in orders)):
        base = 2.0 * rabi / n
        shift = subharmonic_shift(n, rabi, alpha_squared)
        gap_next = base - 2.0 * rabi / (n + 1)
        lo_pad = min(0.12 * rabi / 2.9 + 0.02, 0.35 * gap_next)
        hi_pad = min(shift + 0.15 * rabi / 2.9, 0.55 * gap_next)
        window = np.linspace(base - lo_pad, base + hi_pad, points_per_order)
        points.extend(-window)
    return np.array(sorted(points))


def subharmonic_scan(
    emitter: EmitterParams,
    strong: DriveField,
    delta3_values,
    etalon: EtalonFilter,
    alpha_squared: float = 0.359,
    orders=(1, 2, 3, 4, 5),
    workers: int = 1,
    n_phases: int = 16,
    prominence_frac: float = 0.1,
    tau_factor: float = 35.0,
) -> SubharmonicScan:
    """Etalon-filtered intensity versus weak-field detuning.

    The weak field (amplitude ratio alpha relative to the strong one,
    so G = alpha Omega / 2) is stepped to each Delta3; the incoherent
    spectrum is transmitted through the etalon and integrated.  Dips
    appear where 2 Omega / n photon processes go resonant, displaced
    from the bare subharmonics by the ac Stark shift; each requested
    order is located with a local minimum search plus parabolic
    refinement.  Slow near-resonant dynamics need a long correlation
    window, set by ``tau_factor`` coherence times.
    """
    delta3_values = np.asarray(delta3_values, dtype=float)
    if delta3_values.ndim != 1 or delta3_values.size < 5:
        raise ValidationError("delta3_values must hold at least five points")
    orders = tuple(sorted(set(int(n) for n in orders)))
    if any(n < 1 for n in orders):
        raise ValidationError("subharmonic orders must be positive")
    alpha = float(np.sqrt(alpha_squared))
    g = 0.5 * alpha * strong.rabi
    lw = 1.0 / (TWO_PI * emitter.t2_ns)
    span = 2.0 * strong.rabi + float(np.max(np.abs(delta3_values))) + 2.0 * g + 3.0 * lw
    step = max(etalon.fwhm_ghz / 4.0, 1e-3)
    grid = np.arange(-span - 2.0 * step, span + 2.0 * step + step / 2, step)
    grid = grid + strong.detuning
    tau_max = tau_factor * max(emitter.t1_ns, emitter.t2_ns)

    tasks = []
    for i, d3 in enumerate(delta3_values):
        weak = DriveField(detuning=d3, rabi=g)
        drive = BichromaticDrive(strong=strong, weak=weak)
        tasks.append((i, emitter, drive, grid, tau_max, n_phases, False))
    rows = _run_rows(tasks, workers)
    trans = etalon.transmission(grid)
    intensity = np.full(delta3_values.size, np.nan)
    for idx, row, _ew, err in rows:
        if err is None:
            intensity[idx] = np.trapezoid(row * trans, grid)

    dips = []
    for n in orders:
        base = 2.0 * strong.rabi / n
        gap_next = base - 2.0 * strong.rabi / (n + 1)
        lo, hi = base - 0.5 * gap_next, base + 0.7 * gap_next
        mask = (-delta3_values >= lo) & (-delta3_values <= hi)
        if not np.any((-delta3_values >= base - 1e-9) & (-delta3_values <= base + gap_next)):
            raise CoverageError(
                f"axis does not reach the order-{n} subharmonic at {base:g} GHz"
            )
        x = -delta3_values[mask]
        y = intensity[mask]
        srt = np.argsort(x)
        x, y = x[srt], y[srt]
        good = np.isfinite(y)
        x, y = x[good], y[good]
        if x.size < 3:
            continue
        prom = prominence_frac * float(np.median(y))
        idxs, _props = find_peaks(-y, prominence=max(prom, 0.0))
        if idxs.size == 0:
            interior = np.argmin(y)
            if interior in (0, x.size - 1):
                continue
            idxs = np.array([interior])
        # most prominent dip; ties resolved toward the bare subharmonic
        depths = [np.max(y) - y[i] for i in idxs]
        best = idxs[int(np.argmax(depths))]
        for i in idxs:
            if abs(np.max(y) - y[i] - np.max(depths)) < 1e-15 and abs(
                x[i] - base
            ) < abs(x[best] - base):
                best = i
        pos = x[best]
        if 0 < best < x.size - 1:
            x1, x2, x3 = x[best - 1 : best + 2]
            y1, y2, y3 = y[best - 1 : best + 2]
            denom = (x1 - x2) * (x1 - x3) * (x2 - x3)
            a = (x3 * (y2 - y1) + x2 * (y1 - y3) + x1 * (y3 - y2)) / denom
            b = (x3**2 * (y1 - y2) + x2**2 * (y3 - y1) + x1**2 * (y2 - y3)) / denom
            if a > 0.0:
                vertex = -b / (2.0 * a)
                if x1 <= vertex <= x3:
                    pos = vertex
        dips.append(
            DipRecord(
                order=n,
                dip_position_ghz=float(pos),
                unshifted_ghz=float(base),
                formula_shift_ghz=float(subharmonic_shift(n, strong.rabi, alpha_squared)),
            )
        )
    return SubharmonicScan(
        delta3=delta3_values,
        intensity=intensity,
        dips=tuple(dips),
        alpha_squared=float(alpha_squared),
        orders=orders,
    )


def degenerate_spectrum(
    emitter: EmitterParams,
    strong: DriveField,
    alpha: float,
    grid,
    method: str = "phase_average",
    n_phases: int = 256,
    epsilon: float | None = None,
) -> bloch.Spectrum:
    """Spectrum for two drives at the same frequency (power ratio alpha).

    With no beat note the fields add coherently; an unresolved relative
    phase leaves an effective Rabi frequency distributed over
    Omega sqrt(1 + alpha + 2 sqrt(alpha) cos phi), which flattens the
    sidebands into plateaus spanning 2 Omega (1 +- sqrt(alpha)).

    ``phase_average`` averages monochromatic spectra over the phase;
    ``small_delta`` instead runs the bichromatic engine at a tiny beat
    detuning epsilon (default one twentieth of the radiative linewidth)
    so the phase is swept physically.  Both see the same distribution.
    """
    grid = np.asarray(grid, dtype=float)
    if not np.isfinite(alpha) or alpha < 0.0:
        raise ValidationError("alpha (power ratio) must be non-negative")
    if method == "phase_average":
        if n_phases < 8:
            raise ValidationError("need at least eight phases to average")
        amp = np.sqrt(alpha)
        phases = TWO_PI * np.arange(n_phases) / n_phases
        total = np.zeros(grid.size)
        elastic = 0.0
        for phi in phases:
            rabi_eff = strong.rabi * np.sqrt(
                1.0 + alpha + 2.0 * amp * np.cos(phi)
            )
            spec = bloch.mollow_spectrum(
                emitter, DriveField(detuning=strong.detuning, rabi=rabi_eff), grid
            )
            total += spec.intensity
            elastic += spec.elastic_weight
        total /= n_phases
        elastic /= n_phases
        return bloch.Spectrum(
            freq=grid,
            intensity=total,
            elastic_weight=float(elastic),
            elastic_lines=((strong.detuning, float(elastic)),),
        )
    if method == "small_delta":
        lw = emitter.gamma_sp / TWO_PI
        if epsilon is None:
            epsilon = lw / 20.0
        if not 0.0 < epsilon <= lw / 5.0:
            raise ConfigError(
                f"epsilon must be within (0, {lw / 5.0:g}] GHz to stay "
                "quasi-degenerate"
            )
        weak = DriveField(
            detuning=strong.detuning + epsilon, rabi=0.5 * np.sqrt(alpha) * strong.rabi
        )
        drive = BichromaticDrive(strong=strong, weak=weak)
        pl = build_periodic_liouvillian(emitter, drive)
        state = periodic_steady_state(pl)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return emission_spectrum(
                pl, state, grid, n_phases=n_phases, strict=False
            )
    raise ValidationError(f"unknown method {method!r}")


def plateau_edges(freq, intensity, rabi: float, alpha: float, detuning: float = 0.0):
    """Measured edges of the upper sideband plateau, GHz.

    The threshold is half the median intensity over the central 60% of
    the predicted plateau 2 Omega (1 +- sqrt(alpha)); the outermost
    threshold crossings inside a padded search window are returned as
    (low, high).
    """
    freq = np.asarray(freq, dtype=float)
    intensity = np.asarray(intensity, dtype=float)
    amp = np.sqrt(alpha)
    lo = detuning + 2.0 * rabi * (1.0 - amp)
    hi = detuning + 2.0 * rabi * (1.0 + amp)
    span = hi - lo
    if span <= 0.0:
        raise ValidationError("alpha too small for a resolvable plateau")
    core = (freq >= lo + 0.2 * span) & (freq <= hi - 0.2 * span)
    if core.sum() < 3:
        raise CoverageError("grid too coarse across the predicted plateau")
    threshold = 0.5 * float(np.median(intensity[core]))
    pad = max(0.5, 0.5 * span)
    window = (freq >= lo - pad) & (freq <= hi + pad)
    f_w = freq[window]
    i_w = intensity[window]
    above = i_w >= threshold
    if not np.any(above):
        raise CoverageError("no samples above the plateau threshold")
    first = int(np.argmax(above))
    last = int(len(above) - 1 - np.argmax(above[::-1]))

    def refine(j_out, j_in):
        x0, x1 = f_w[j_out], f_w[j_in]
        y0, y1 = i_w[j_out], i_w[j_in]
        if y1 == y0:
            return x1
        t = (threshold - y0) / (y1 - y0)
        return x0 + t * (x1 - x0)

    lo_edge = refine(first - 1, first) if first > 0 else f_w[first]
    hi_edge = refine(last + 1, last) if last < len(f_w) - 1 else f_w[last]
    return float(lo_edge), float(hi_edge)

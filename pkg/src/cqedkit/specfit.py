"""Double-Lorentzian spectral fitting and anticrossing extraction.

Lorentzians are parameterized by area (not height) for stable covariance
near merged peaks; each spectrum gets one constant baseline.  Fits use
damped least squares with an analytic Jacobian.  A fitted temperature
series is assembled into a branch-continued anticrossing from which
(gamma_c, gamma_x, splitting, g) are inverted.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import find_peaks

from .errors import NoSignalError
from .units import local_energy_per_nm

MAX_ITERATIONS = 200


@dataclass(frozen=True)
class Spectrum:
    """Sampled intensity vs wavelength, optionally temperature-tagged."""

    wavelength_nm: np.ndarray
    intensity: np.ndarray
    temperature: float | None = None

    def __post_init__(self):
        lam = np.asarray(self.wavelength_nm, dtype=float)
        inten = np.asarray(self.intensity, dtype=float)
        if lam.ndim != 1 or lam.shape != inten.shape:
            raise ValueError("wavelength and intensity must be matching 1-D arrays")
        if np.any(np.diff(lam) <= 0):
            raise ValueError("wavelengths must be strictly increasing")
        if np.any(inten < 0):
            raise ValueError("intensities must be >= 0")
        object.__setattr__(self, "wavelength_nm", lam)
        object.__setattr__(self, "intensity", inten)


@dataclass(frozen=True)
class LorentzianParams:
    center: float   # nm
    fwhm: float     # nm
    area: float     # arbitrary units

    def __post_init__(self):
        if self.fwhm <= 0 or self.area <= 0:
            raise ValueError("fwhm and area must be positive")


@dataclass(frozen=True)
class FitResult:
    """Two Lorentzians plus baseline; peaks ordered by center."""

    peaks: tuple[LorentzianParams, LorentzianParams]
    baseline: float
    covariance: np.ndarray     # 7x7, parameter order (A1,c1,w1,A2,c2,w2,b)
    reduced_chi2: float
    converged: bool

    @property
    def center_errors(self) -> tuple[float, float]:
        d = np.sqrt(np.maximum(np.diag(self.covariance), 0.0))
        return float(d[1]), float(d[4])

    @property
    def fwhm_errors(self) -> tuple[float, float]:
        d = np.sqrt(np.maximum(np.diag(self.covariance), 0.0))
        return float(d[2]), float(d[5])


@dataclass(frozen=True)
class MeasuredAnticrossing:
    """Branch-continued fitted lines vs temperature (wavelengths in nm)."""

    temperature: np.ndarray
    center_a: np.ndarray
    fwhm_a: np.ndarray
    center_b: np.ndarray
    fwhm_b: np.ndarray
    center_err_a: np.ndarray
    center_err_b: np.ndarray
    fwhm_err_a: np.ndarray
    fwhm_err_b: np.ndarray


@dataclass(frozen=True)
class CouplingExtraction:
    gamma_c: float            # ueV
    gamma_x: float            # ueV
    splitting: float          # ueV
    g: float                  # ueV; see resolvable
    resonance_temperature: float
    gamma_c_err: float
    splitting_err: float
    g_err: float
    resolvable: bool          # False => g is an upper bound


@dataclass(frozen=True)
class TuningCalibration:
    """Phenomenological temperature tuning of the exciton and cavity lines.

    The exciton red-shifts quadratically in T, the cavity linearly; the
    exciton-cavity relative shift spans `relative_span_nm` over
    [t_min, t_max] and crosses zero at `resonance_temp`.
    """

    resonance_temp: float = 10.5
    resonance_wavelength_nm: float = 936.35
    cavity_slope_nm_per_k: float = 0.006
    relative_span_nm: float = 1.5
    t_min: float = 6.0
    t_max: float = 40.0


def lorentzian(lam, area, center, fwhm):
    """Area-normalized Lorentzian line."""
    return (2.0 * area / (np.pi * fwhm)) / (1.0 + 4.0 * (lam - center) ** 2 / fwhm**2)


def double_lorentzian(lam, params):
    a1, c1, w1, a2, c2, w2, b = params
    return lorentzian(lam, a1, c1, w1) + lorentzian(lam, a2, c2, w2) + b


def double_lorentzian_jacobian(lam, params):
    """Analytic Jacobian of the model, shape (n_points, 7)."""
    jac = np.empty((len(lam), 7))
    for k, (a, c, w) in enumerate(((params[0], params[1], params[2]),
                                   (params[3], params[4], params[5]))):
        d = lam - c
        denom = w**2 + 4.0 * d**2
        jac[:, 3 * k] = (2.0 * w / np.pi) / denom
        jac[:, 3 * k + 1] = (16.0 * a * w / np.pi) * d / denom**2
        jac[:, 3 * k + 2] = (2.0 * a / np.pi) * (4.0 * d**2 - w**2) / denom**2
    jac[:, 6] = 1.0
    return jac


def initial_guess(s: Spectrum) -> np.ndarray:
    """Seed parameters (A1,c1,w1,A2,c2,w2,b) from peak finding.

    Falls back to a symmetric one-FWHM split when only one peak stands
    out (merged weak-coupling case).
    """
    lam, y = s.wavelength_nm, s.intensity
    span = y.max() - y.min()
    if span <= 0 or not np.isfinite(span):
        raise NoSignalError("flat spectrum")
    smooth = np.convolve(y, np.ones(5) / 5.0, mode="same")
    baseline = float(np.percentile(y, 5))
    idx, props = find_peaks(smooth, prominence=0.05 * span)
    if len(idx) == 0:
        idx = np.array([int(np.argmax(smooth))])
        props = {"prominences": np.array([span])}
    order = np.argsort(props["prominences"])[::-1]
    idx = idx[order[:2]]

    def width_at(i):
        half = baseline + 0.5 * (smooth[i] - baseline)
        left = i
        while left > 0 and smooth[left] > half:
            left -= 1
        right = i
        while right < len(lam) - 1 and smooth[right] > half:
            right += 1
        return max(lam[right] - lam[left], 2.0 * (lam[1] - lam[0]))

    if len(idx) == 2:
        seeds = sorted(((lam[i], width_at(i), smooth[i] - baseline) for i in idx))
    else:
        i = idx[0]
        w = width_at(i)
        h = smooth[i] - baseline
        seeds = [(lam[i] - 0.5 * w, w, 0.5 * h), (lam[i] + 0.5 * w, w, 0.5 * h)]
    params = []
    for center, fwhm, height in seeds:
        params.extend([max(height, 1e-12 * span) * np.pi * fwhm / 2.0, center, fwhm])
    params.append(baseline)
    return np.array(params)


def fit_double_lorentzian(s: Spectrum, seed=None, sigma=None) -> FitResult:
    """Damped least-squares double-Lorentzian fit with analytic Jacobian.

    sigma: optional per-point standard deviations for heteroscedastic
    weighting (e.g. multiplicative detection noise); default unweighted.
    """
    lam, y = s.wavelength_nm, s.intensity
    if seed is None:
        seed = initial_guess(s)
    seed = np.asarray(seed, dtype=float)
    if sigma is None:
        w = np.ones_like(y)
    else:
        sigma = np.asarray(sigma, dtype=float)
        w = 1.0 / np.maximum(sigma, 1e-3 * np.max(sigma))

    span = lam[-1] - lam[0]
    lo = [1e-300, lam[0] - span, 1e-6 * span, 1e-300, lam[0] - span, 1e-6 * span, -np.inf]
    hi = [np.inf, lam[-1] + span, 10 * span, np.inf, lam[-1] + span, 10 * span, np.inf]
    seed = np.clip(seed, lo, hi)

    res = least_squares(
        lambda p: (double_lorentzian(lam, p) - y) * w,
        seed,
        jac=lambda p: double_lorentzian_jacobian(lam, p) * w[:, None],
        bounds=(lo, hi),
        method="trf",
        ftol=1e-10, xtol=1e-12, gtol=1e-8,
        max_nfev=MAX_ITERATIONS * 3,
    )
    converged = bool(res.status > 0 and res.status != 0)

    dof = max(len(lam) - 7, 1)
    variance = 2.0 * res.cost / dof
    jtj = res.jac.T @ res.jac
    cov = variance * np.linalg.pinv(jtj)

    p = res.x
    first, second = (0, 3) if p[1] <= p[4] else (3, 0)
    if first == 3:  # keep covariance aligned with the reported peak order
        perm = [3, 4, 5, 0, 1, 2, 6]
        cov = cov[np.ix_(perm, perm)]
    peaks = (
        LorentzianParams(p[first + 1], p[first + 2], p[first]),
        LorentzianParams(p[second + 1], p[second + 2], p[second]),
    )
    return FitResult(peaks, float(p[6]), cov, float(variance), converged)


def _params_of(fit: FitResult) -> np.ndarray:
    p1, p2 = fit.peaks
    return np.array([p1.area, p1.center, p1.fwhm,
                     p2.area, p2.center, p2.fwhm, fit.baseline])


def fit_series(spectra: list[Spectrum], noise_fraction: float = 0.0
               ) -> list[tuple[float, FitResult]]:
    """Fit a temperature-ordered list of spectra with warm starts.

    Each spectrum is fit both from a fresh initial guess and from the
    previous temperature's solution; the lower-cost result wins.  This
    suppresses spurious local optima near the anticrossing where the two
    lines merge.  noise_fraction > 0 enables multiplicative-noise
    weighting (sigma = fraction * intensity).
    """
    out = []
    prev = None
    for s in spectra:
        if s.temperature is None:
            raise ValueError("every spectrum needs a temperature tag")
        sigma = noise_fraction * s.intensity if noise_fraction > 0 else None
        candidates = []
        if prev is not None:
            warm = fit_double_lorentzian(s, seed=_params_of(prev), sigma=sigma)
            candidates.append(warm)
        # retry from a fresh guess unless the warm start already explains
        # the data at the noise level (calibrated chi^2 only with sigma)
        if not (candidates and sigma is not None
                and candidates[0].converged and candidates[0].reduced_chi2 <= 2.0):
            try:
                candidates.append(fit_double_lorentzian(s, sigma=sigma))
            except NoSignalError:
                if not candidates:
                    raise
        best = min(candidates, key=lambda f: f.reduced_chi2)
        if best.converged:
            prev = best
        out.append((float(s.temperature), best))
    return out


def assemble_anticrossing(series: list[tuple[float, FitResult]]) -> MeasuredAnticrossing:
    """Branch-continue a fitted temperature series.

    Unconverged fits and gross misfits (reduced chi^2 more than 10x the
    series median) are dropped -- they carry no reportable parameters;
    branch identity follows continuity in (center, width), the measured
    counterpart of adiabatic eigenvector continuation.
    """
    series = [(t, f) for t, f in series if f.converged]
    if series:
        med_chi2 = float(np.median([f.reduced_chi2 for _, f in series]))
        series = [(t, f) for t, f in series
                  if f.reduced_chi2 <= 10.0 * med_chi2 + 1e-300]
    if len(series) < 5:
        raise ValueError("need >= 5 converged fits spanning resonance")
    temps = np.array([t for t, _ in series], dtype=float)
    if np.any(np.diff(temps) <= 0):
        raise ValueError("temperature series must be strictly increasing")

    n = len(series)
    c_a = np.empty(n); w_a = np.empty(n); c_b = np.empty(n); w_b = np.empty(n)
    ce_a = np.empty(n); ce_b = np.empty(n); we_a = np.empty(n); we_b = np.empty(n)

    # scales for the continuity metric
    all_w = np.concatenate([[f.peaks[0].fwhm, f.peaks[1].fwhm] for _, f in series])
    scale_c = max(np.median(all_w), 1e-9)
    scale_w = max(all_w.max() - all_w.min(), 1e-9)

    def cost(pk, c_prev, w_prev):
        return ((pk.center - c_prev) / scale_c) ** 2 + ((pk.fwhm - w_prev) / scale_w) ** 2

    for i, (_, fit) in enumerate(series):
        p0, p1 = fit.peaks
        e0, e1 = fit.center_errors
        f0, f1 = fit.fwhm_errors
        if i == 0:
            assign = (p0, p1, e0, e1, f0, f1)
        else:
            keep = cost(p0, c_a[i-1], w_a[i-1]) + cost(p1, c_b[i-1], w_b[i-1])
            swap = cost(p1, c_a[i-1], w_a[i-1]) + cost(p0, c_b[i-1], w_b[i-1])
            if keep <= swap:
                assign = (p0, p1, e0, e1, f0, f1)
            else:
                assign = (p1, p0, e1, e0, f1, f0)
        pa, pb, ea, eb, fa, fb = assign
        c_a[i], w_a[i], c_b[i], w_b[i] = pa.center, pa.fwhm, pb.center, pb.fwhm
        ce_a[i], ce_b[i], we_a[i], we_b[i] = ea, eb, fa, fb
    return MeasuredAnticrossing(temps, c_a, w_a, c_b, w_b, ce_a, ce_b, we_a, we_b)


def extract_coupling(curve: MeasuredAnticrossing) -> CouplingExtraction:
    """Invert an anticrossing for (gamma_c, gamma_x, splitting, g).

    Only robustly measured quantities enter: the center separations, the
    broad-branch widths (the narrow detuned branch can fall below the
    sampling resolution and its fitted width is unreliable), and the
    loss-sum invariant -- the two branch widths sum to gamma_c + gamma_x
    at every detuning, evaluated near resonance where both branches are
    broad.  Writing sep and S (minimum separation) for the real parts
    and dw for the branch-width difference, the coupled-mode eigenvalues
    give the exact relations

        detuning^2 = sep^2 - dw^2/4 - S^2
        gamma_c - gamma_x = sep * dw / detuning

    so each detuned point yields an estimate of gamma_c - gamma_x with
    dw = 2*w_broad - (width sum); the median over points is used.  This
    reduces to reading the bare widths off the far-detuned branches, but
    stays exact at moderate detuning.  nm -> ueV conversions use the
    local dE/d(lambda) at resonance.
    """
    sep = np.abs(curve.center_a - curve.center_b)
    i_min = int(np.argmin(sep))
    n = len(sep)
    if i_min == 0 or i_min == n - 1:
        raise ValueError("series does not span the resonance")
    lam_res = 0.5 * (curve.center_a[i_min] + curve.center_b[i_min])
    per_nm = local_energy_per_nm(lam_res)
    sep = sep * per_nm
    w_a, w_b = curve.fwhm_a * per_nm, curve.fwhm_b * per_nm
    splitting = float(sep[i_min])

    # loss sum gamma_c + gamma_x from the points nearest resonance
    order = np.argsort(np.abs(sep - splitting))
    near = order[:min(5, n)]
    w_sum = float(np.median(w_a[near] + w_b[near]))
    w_sum_err = float(1.4826 * np.median(np.abs(w_a[near] + w_b[near] - w_sum))
                      / np.sqrt(len(near)) + 1e-12)

    # per-point estimates of D = gamma_c - gamma_x from detuned points
    w_broad = np.maximum(w_a, w_b)
    dw = 2.0 * w_broad - w_sum
    disc = sep**2 - dw**2 / 4.0 - splitting**2
    usable = (sep > 1.2 * splitting) & (disc > 0) & (dw > 0)
    usable[i_min] = False
    if not np.any(usable):
        raise ValueError("series has no usable detuned points")
    d_est = sep[usable] * dw[usable] / np.sqrt(disc[usable])
    d = float(np.median(d_est))
    d_err = float(1.4826 * np.median(np.abs(d_est - d)) / np.sqrt(len(d_est))
                  + w_sum_err)

    gamma_c = float((w_sum + d) / 2.0)
    gamma_x = float(max((w_sum - d) / 2.0, 1e-6))
    gamma_c_err = float(0.5 * np.hypot(w_sum_err, d_err))

    sep_err_nm = np.hypot(curve.center_err_a[i_min], curve.center_err_b[i_min])
    splitting_err = float(sep_err_nm * per_nm)
    resolvable = splitting > 2.0 * splitting_err

    g = float(np.sqrt((splitting / 2.0) ** 2 + d**2 / 16.0))
    g_err = float(np.hypot(splitting / (4.0 * g) * splitting_err,
                           d / (8.0 * g) * d_err))
    return CouplingExtraction(
        gamma_c, gamma_x, splitting, g,
        float(curve.temperature[i_min]),
        gamma_c_err, splitting_err, g_err, resolvable)


def temperature_tuning(temperature: float, calib: TuningCalibration | None = None
                       ) -> tuple[float, float]:
    """(lambda_exciton, lambda_cavity) in nm at a temperature in K."""
    if calib is None:
        calib = TuningCalibration()
    t = float(temperature)
    if not calib.t_min <= t <= calib.t_max:
        raise ValueError(
            f"temperature {t} K outside calibrated range "
            f"[{calib.t_min}, {calib.t_max}] K")
    span_t2 = calib.t_max**2 - calib.t_min**2
    delta = calib.relative_span_nm * (t**2 - calib.resonance_temp**2) / span_t2
    lam_c = (calib.resonance_wavelength_nm
             + calib.cavity_slope_nm_per_k * (t - calib.resonance_temp))
    return lam_c + delta, lam_c

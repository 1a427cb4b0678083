"""Hanbury-Brown-Twiss correlation analysis.

Full multi-start correlation (all pairs within the window), not start-stop:
normalization is then exact and unbiased at high rates.  Pulsed g2(0) is
the tau=0 peak area over the mean side-peak area with integration
half-width rep_period/2, so the peaks partition the delay axis without
gaps.  Errors are Poisson counting statistics.
"""
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import (InsufficientStatisticsError, MiscalibrationError,
                     NoSignalError)

DEFAULT_BIN_WIDTH = 128.0
DEFAULT_WINDOW_PERIODS = 13


@dataclass(frozen=True)
class CorrelationHistogram:
    """Binned coincidences vs delay with normalization metadata."""

    tau: np.ndarray          # bin centers, ps
    counts: np.ndarray       # int64 coincidences per bin
    bin_width: float
    duration: float          # acquisition time, ps
    n_a: int                 # singles on start channel
    n_b: int                 # singles on stop channel
    is_auto: bool

    @property
    def window(self) -> float:
        return float(self.tau[-1])

    def merged_with(self, other: "CorrelationHistogram") -> "CorrelationHistogram":
        """Accumulate a histogram from another segment of the same setup."""
        if (len(other.tau) != len(self.tau)
                or other.bin_width != self.bin_width
                or other.is_auto != self.is_auto):
            raise ValueError("histograms have incompatible binning")
        return replace(self, counts=self.counts + other.counts,
                       duration=self.duration + other.duration,
                       n_a=self.n_a + other.n_a, n_b=self.n_b + other.n_b)


@dataclass(frozen=True)
class G2Estimate:
    value: float
    stderr: float
    method: str


@dataclass(frozen=True)
class LifetimeFit:
    tau: float
    stderr: float
    n_used: int
    reduced_chi2: float
    exponential: bool        # False when residuals look non-exponential


def correlate(times_a, times_b=None, *, window: float,
              bin_width: float = DEFAULT_BIN_WIDTH,
              duration: float) -> CorrelationHistogram:
    """All-pairs delay histogram t_b - t_a within +/- window.

    Pass times_b=None (or the same array) for autocorrelation; self-pairs
    are excluded.  Inputs must be sorted, e.g. from ClickStream.filter.
    """
    times_a = np.asarray(times_a, dtype=np.float64)
    auto = times_b is None or times_b is times_a
    times_b = times_a if auto else np.asarray(times_b, dtype=np.float64)
    if len(times_a) == 0 or len(times_b) == 0:
        raise NoSignalError("empty click stream")
    counts = kernels.pair_histogram(times_a, times_b, window, bin_width,
                                    exclude_self=auto)
    tau = kernels.bin_centers(window, bin_width)
    return CorrelationHistogram(tau, counts, float(bin_width), float(duration),
                                len(times_a), len(times_b), auto)


def normalized_g2(h: CorrelationHistogram) -> tuple[np.ndarray, np.ndarray]:
    """CW-normalized g2(tau) curve and its Poisson standard error."""
    pairs = h.n_a * h.n_b - (h.n_a if h.is_auto else 0)
    level = pairs / h.duration * h.bin_width
    if level <= 0:
        raise InsufficientStatisticsError("no pairs to normalize against")
    g2 = h.counts / level
    err = np.sqrt(np.maximum(h.counts, 1)) / level
    return g2, err


def _peak_areas(h: CorrelationHistogram, rep_period: float, n_side: int):
    if h.window < (n_side + 0.5) * rep_period:
        raise ValueError(
            f"window {h.window} ps too small for {n_side} side peaks "
            f"at rep period {rep_period} ps")
    peak_idx = np.rint(h.tau / rep_period).astype(int)
    center = int(h.counts[peak_idx == 0].sum())
    side = [int(h.counts[peak_idx == k].sum())
            for k in range(-n_side, n_side + 1) if k != 0]
    return center, np.array(side)


def pulsed_g2_zero(h: CorrelationHistogram, rep_period: float,
                   n_side: int = 6, method: str = "pulsed_peak_area") -> G2Estimate:
    """Pulsed g2(0): tau=0 peak area over the mean side-peak area."""
    center, side = _peak_areas(h, rep_period, n_side)
    total_side = side.sum()
    if total_side == 0:
        raise InsufficientStatisticsError("no counts in any side peak")
    mean_side = total_side / len(side)
    value = center / mean_side
    err = np.sqrt(max(center, 1) / mean_side**2 + value**2 / total_side)
    return G2Estimate(value, err, method)


def cross_g2_zero(h: CorrelationHistogram, rep_period: float,
                  n_side: int = 6) -> G2Estimate:
    """Pulsed cross-correlation g2(0) of an X-vs-C histogram."""
    return pulsed_g2_zero(h, rep_period, n_side, method="pulsed_cross_peak_area")


def subtract_dark_counts(h: CorrelationHistogram,
                         dark_rates: tuple[float, float],
                         singles_rates: tuple[float, float]) -> CorrelationHistogram:
    """Remove expected accidental coincidences involving dark counts.

    Rates in 1/ps; singles_rates are the total measured rates including
    darks.  Expected pairs per bin with at least one dark partner:
    (d_a s_b + s_a d_b - d_a d_b) * T * bin_width.  Clamped at zero.
    """
    d_a, d_b = dark_rates
    s_a, s_b = singles_rates
    if d_a < 0 or d_b < 0 or s_a < d_a or s_b < d_b:
        raise ValueError("dark rates must be >= 0 and <= singles rates")
    expected = (d_a * s_b + s_a * d_b - d_a * d_b) * h.duration * h.bin_width
    excess = expected - h.counts
    bad = excess > 5.0 * np.sqrt(max(expected, 1.0))
    if np.any(bad):
        raise MiscalibrationError(
            f"dark subtraction exceeds counts by >5 sigma in "
            f"{int(bad.sum())} bins; check rate calibration")
    cleaned = np.maximum(h.counts - expected, 0.0)
    return replace(h, counts=cleaned)


def first_click_delays(times, rep_period: float) -> np.ndarray:
    """Delay after the pulse of the first click in each pulse window."""
    times = np.asarray(times, dtype=float)
    pulse = (times // rep_period).astype(np.int64)
    _, first = np.unique(pulse, return_index=True)
    return times[first] - pulse[first] * rep_period


def fit_lifetime(delays, jitter_sigma: float = 0.0) -> LifetimeFit:
    """Single-exponential maximum-likelihood decay fit.

    Jitter is handled by fitting only the tail t > 3*jitter_sigma, where
    the convolved exponential is again exponential.  For left-truncated
    exponential samples the MLE is mean(t - t0).
    """
    delays = np.asarray(delays, dtype=float)
    if len(delays) < 100:
        raise InsufficientStatisticsError(
            f"need >= 100 counts for a lifetime fit, got {len(delays)}")
    t0 = 3.0 * jitter_sigma
    tail = delays[delays > t0]
    if len(tail) < 100:
        raise InsufficientStatisticsError("tail beyond 3 sigma of jitter too sparse")
    tau = float(np.mean(tail - t0))
    stderr = tau / np.sqrt(len(tail))

    # goodness of fit: Poisson chi^2 against the fitted exponential
    n_bins = max(int(np.sqrt(len(tail)) / 2), 8)
    edges = np.linspace(t0, t0 + 6.0 * tau, n_bins + 1)
    obs, _ = np.histogram(tail, bins=edges)
    cdf = 1.0 - np.exp(-(edges - t0) / tau)
    exp_counts = len(tail) * np.diff(cdf) / cdf[-1]
    ok = exp_counts >= 5
    chi2 = float(np.sum((obs[ok] - exp_counts[ok]) ** 2 / exp_counts[ok]))
    dof = max(int(ok.sum()) - 2, 1)
    red = chi2 / dof
    return LifetimeFit(tau, stderr, len(tail), red, red <= 3.0)


def per_pulse_counts(times, rep_period: float, duration: float) -> np.ndarray:
    """Photon counts per pulse window; the brute-force g2 oracle input."""
    n_pulses = int(duration // rep_period)
    idx = (np.asarray(times) // rep_period).astype(np.int64)
    idx = idx[idx < n_pulses]
    return np.bincount(idx, minlength=n_pulses)


def per_pulse_g2(counts_a, counts_b=None) -> G2Estimate:
    """Exact per-pulse photon-number statistic <n_a n_b'>/(<n_a><n_b>).

    For autocorrelation (counts_b None) this is <n(n-1)>/<n>^2, the
    quantity the pulsed peak-area estimator converges to.  Standard error
    by the delta method on sample moments.
    """
    n_a = np.asarray(counts_a, dtype=float)
    auto = counts_b is None
    n_b = n_a if auto else np.asarray(counts_b, dtype=float)
    x = n_a * (n_a - 1.0) if auto else n_a * n_b
    ma, mb, mx = n_a.mean(), n_b.mean(), x.mean()
    if ma == 0 or mb == 0:
        raise InsufficientStatisticsError("no counts")
    value = mx / (ma * mb)
    n = len(n_a)
    grad_x = 1.0 / (ma * mb)
    grad_a = -mx / (ma**2 * mb)
    grad_b = -mx / (ma * mb**2)
    if auto:
        cov = np.cov(np.vstack([x, n_a]))
        var = (grad_x**2 * cov[0, 0]
               + (grad_a + grad_b) ** 2 * cov[1, 1]
               + 2 * grad_x * (grad_a + grad_b) * cov[0, 1]) / n
    else:
        cov = np.cov(np.vstack([x, n_a, n_b]))
        grads = np.array([grad_x, grad_a, grad_b])
        var = grads @ cov @ grads / n
    return G2Estimate(value, float(np.sqrt(max(var, 0.0))), "per_pulse_oracle")

"""Monte Carlo quantum-jump generator of timestamped photon clicks.

Physics: after each excitation the system lives in the single-excitation
manifold span{|e,0>, |g,1>} and evolves under the non-Hermitian 2x2
effective Hamiltonian until a jump.  Jump channels: exciton leaky decay
(click on X), cavity decay (click on C) and the phenomenological
exciton-to-cavity-photon transfer (no click; the excitation continues as
a cavity photon and leaves through C).  Jump times are sampled exactly by
inverting the closed-form survival probability; everything is vectorized
over pulses.

Background emitters are a statistical Poisson feed into channel C, not
Hilbert-space objects.  Detector effects (thinning, jitter, dead time,
dark counts) are applied after the physics.

Seeding: a master numpy SeedSequence is split into fixed-order children
(pulse physics, background, darks, detector), so streams are bit-exact
reproducible from (config, seed) regardless of how analysis code threads.
"""
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InsufficientStatisticsError
from .lindblad import LindbladModel
from .units import HBAR_UEV_PS

PUMP_MODES = ("resonant_pulsed", "resonant_cw", "above_band_pulsed")

_BISECT_ITERS = 80
_MIN_U = 1e-12


@dataclass(frozen=True)
class PumpSchedule:
    """Excitation scheme parameters; rates in 1/ps, periods in ps."""

    mode: str = "resonant_pulsed"
    rep_period: float = 13000.0
    excitation_prob: float = 1.0
    reservoir_mean: float = 0.0
    capture_rate: float = 0.01
    background_feed_rate: float = 0.0
    cw_pump_rate: float = 1e-3

    def __post_init__(self):
        if self.mode not in PUMP_MODES:
            raise ConfigError(f"unknown pump mode {self.mode!r}")
        if not 0.0 <= self.excitation_prob <= 1.0:
            raise ConfigError("excitation_prob must be in [0, 1]")
        for name in ("rep_period", "capture_rate", "cw_pump_rate"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        for name in ("reservoir_mean", "background_feed_rate"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 1.0
    jitter_sigma: float = 0.0
    dead_time: float = 0.0
    dark_count_rate: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ConfigError("efficiency must be in (0, 1]")
        for name in ("jitter_sigma", "dead_time", "dark_count_rate"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")


@dataclass
class ClickStream:
    """Time-ordered detection records; channels 'C', 'X' or 'D' (dark)."""

    times: np.ndarray
    channels: np.ndarray
    duration: float
    seed: int
    config_hash: str = ""

    def __post_init__(self):
        if np.any(np.diff(self.times) < 0):
            raise ValueError("click times must be nondecreasing")

    def __len__(self):
        return len(self.times)

    def filter(self, channels) -> np.ndarray:
        """Sorted times of clicks on any of the given channels."""
        if isinstance(channels, str):
            channels = (channels,)
        mask = np.isin(self.channels, list(channels))
        return self.times[mask]


class SingleExcitationPropagator:
    """Closed-form non-Hermitian evolution in span{|e,0>, |g,1>}."""

    def __init__(self, model: LindbladModel):
        self.rate_x = model.gamma_x / HBAR_UEV_PS
        self.rate_c = model.gamma_c / HBAR_UEV_PS
        self.rate_t = model.transfer
        delta = model.e_x - model.e_c
        heff = np.array(
            [[delta - 0.5j * (model.gamma_x + HBAR_UEV_PS * self.rate_t), model.g],
             [model.g, -0.5j * model.gamma_c]],
            dtype=complex,
        )
        self.evals, self.evecs = np.linalg.eig(heff)
        self.coeff0 = np.linalg.solve(self.evecs, np.array([1.0, 0.0]))
        slowest = 2.0 * np.abs(self.evals.imag).min() / HBAR_UEV_PS
        self.t_max = 80.0 / slowest

    def amplitudes(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(alpha, beta) exciton/photon amplitudes at times t from |e,0>."""
        phase = np.exp(-1j * np.outer(t, self.evals) / HBAR_UEV_PS)
        amp = phase * self.coeff0[None, :] @ self.evecs.T
        return amp[:, 0], amp[:, 1]

    def survival(self, t: np.ndarray) -> np.ndarray:
        alpha, beta = self.amplitudes(t)
        return np.abs(alpha) ** 2 + np.abs(beta) ** 2

    def sample_emissions(self, rng: np.random.Generator, n: int
                         ) -> tuple[np.ndarray, np.ndarray]:
        """Exact emission (delay_ps, channel) for n fresh excitations.

        channel is 0 for C, 1 for X.  Transfer jumps are internal: the
        photon continues in the cavity and exits through C after an
        additional exponential delay.
        """
        u = np.clip(rng.random(n), _MIN_U, None)
        lo = np.zeros(n)
        hi = np.full(n, self.t_max)
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            above = self.survival(mid) > u
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        t_jump = 0.5 * (lo + hi)
        alpha, beta = self.amplitudes(t_jump)
        w_x = self.rate_x * np.abs(alpha) ** 2
        w_c = self.rate_c * np.abs(beta) ** 2
        w_t = self.rate_t * np.abs(alpha) ** 2
        total = w_x + w_c + w_t
        r = rng.random(n) * total
        channel = np.where(r < w_c, 0, 1)  # C else X for now
        transferred = r >= w_c + w_x
        if np.any(transferred):
            extra = rng.exponential(1.0 / self.rate_c, transferred.sum())
            t_jump = t_jump.copy()
            t_jump[transferred] += extra
            channel[transferred] = 0
        return t_jump, channel


def _config_fingerprint(model, pump, det, duration, seed) -> str:
    text = repr((model, pump, det, duration, seed))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _pulsed_emissions(model, pump, duration, rng):
    """Emission (times, channels) for all pulses, vectorized in rounds."""
    prop = SingleExcitationPropagator(model)
    lifetime_scale = 2.0 * HBAR_UEV_PS / (model.gamma_c + model.gamma_x)
    if pump.rep_period <= 10.0 * lifetime_scale:
        raise ConfigError(
            f"rep_period {pump.rep_period} ps must exceed 10x the coupled "
            f"lifetime ({lifetime_scale:.1f} ps) for well-separated pulses")
    n_pulses = int(duration // pump.rep_period)
    if n_pulses < 1:
        raise ConfigError("duration shorter than one pulse period")
    pulse_t = np.arange(n_pulses) * pump.rep_period

    excited = rng.random(n_pulses) < pump.excitation_prob
    if pump.reservoir_mean > 0:
        reservoir = rng.poisson(pump.reservoir_mean, n_pulses)
    else:
        reservoir = np.zeros(n_pulses, dtype=int)

    times, channels = [], []
    # offset of the current excitation cycle within each pulse window
    offset = np.zeros(n_pulses)
    active = excited.copy()
    pending = reservoir.copy()
    # pulses that start unexcited go straight to capture from the reservoir
    first_capture = ~excited & (pending > 0)
    while True:
        if np.any(active):
            idx = np.flatnonzero(active)
            delay, chan = prop.sample_emissions(rng, len(idx))
            emit_t = pulse_t[idx] + offset[idx] + delay
            times.append(emit_t)
            channels.append(chan)
            offset[idx] += delay
            active[:] = False
            first_capture[idx] = pending[idx] > 0
        if not np.any(first_capture):
            break
        idx = np.flatnonzero(first_capture)
        wait = rng.exponential(1.0 / (pending[idx] * pump.capture_rate))
        offset[idx] += wait
        pending[idx] -= 1
        active[idx] = True
        first_capture[:] = False
    if not times:
        return np.empty(0), np.empty(0, dtype=int)
    return np.concatenate(times), np.concatenate(channels)


def _cw_emissions(model, pump, duration, rng):
    """Emission times under CW pumping: exponential re-excitation gaps."""
    prop = SingleExcitationPropagator(model)
    mean_cycle = 1.0 / pump.cw_pump_rate
    times, channels = [], []
    t_now = 0.0
    while t_now < duration:
        n = max(int((duration - t_now) / mean_cycle * 1.2) + 16, 16)
        gaps = rng.exponential(mean_cycle, n)
        delays, chan = prop.sample_emissions(rng, n)
        emit = t_now + np.cumsum(gaps + delays)
        times.append(emit)
        channels.append(chan)
        t_now = emit[-1]
    times = np.concatenate(times)
    channels = np.concatenate(channels)
    keep = times < duration
    return times[keep], channels[keep]


def _poisson_times(rate, duration, rng):
    n = rng.poisson(rate * duration)
    return np.sort(rng.uniform(0.0, duration, n))


def _apply_detector(times, det, rng, duration):
    """Thinning, jitter and dead time for one channel's click list."""
    if det.efficiency < 1.0:
        times = times[rng.random(len(times)) < det.efficiency]
    if det.jitter_sigma > 0:
        times = times + rng.normal(0.0, det.jitter_sigma, len(times))
    times = np.sort(times[(times >= 0.0) & (times < duration)])
    if det.dead_time > 0 and len(times) > 1:
        keep = np.zeros(len(times), dtype=bool)
        last = -np.inf
        for i, t in enumerate(times):
            if t - last >= det.dead_time:
                keep[i] = True
                last = t
        times = times[keep]
    return times


def simulate_stream(model: LindbladModel, pump: PumpSchedule,
                    det: DetectorModel, duration: float, seed: int,
                    config_hash: str = "") -> ClickStream:
    """Generate a detector-level click stream; bit-exact for fixed seed."""
    if duration <= 0:
        raise ConfigError("duration must be positive")
    ss = np.random.SeedSequence(seed)
    rng_phys, rng_bg, rng_dark, rng_det = (
        np.random.default_rng(child) for child in ss.spawn(4))

    if pump.mode in ("resonant_pulsed", "above_band_pulsed"):
        emit_t, emit_ch = _pulsed_emissions(model, pump, duration, rng_phys)
    else:
        emit_t, emit_ch = _cw_emissions(model, pump, duration, rng_phys)
    order = np.argsort(emit_t, kind="stable")
    emit_t, emit_ch = emit_t[order], emit_ch[order]
    keep = emit_t < duration
    emit_t, emit_ch = emit_t[keep], emit_ch[keep]

    c_times = emit_t[emit_ch == 0]
    x_times = emit_t[emit_ch == 1]
    if pump.background_feed_rate > 0:
        bg = _poisson_times(pump.background_feed_rate, duration, rng_bg)
        c_times = np.sort(np.concatenate([c_times, bg]))

    c_times = _apply_detector(c_times, det, rng_det, duration)
    x_times = _apply_detector(x_times, det, rng_det, duration)
    if det.dark_count_rate > 0:
        d_times = _poisson_times(det.dark_count_rate, duration, rng_dark)
    else:
        d_times = np.empty(0)

    all_times = np.concatenate([c_times, x_times, d_times])
    all_chan = np.concatenate([
        np.full(len(c_times), "C"),
        np.full(len(x_times), "X"),
        np.full(len(d_times), "D"),
    ])
    order = np.lexsort((all_chan, all_times))
    if not config_hash:
        config_hash = _config_fingerprint(model, pump, det, duration, seed)
    return ClickStream(all_times[order], all_chan[order], duration, seed,
                       config_hash)


def channel_rates(stream: ClickStream) -> dict[str, tuple[float, float]]:
    """Mean count rate and Poisson standard error per channel, 1/ps."""
    if len(stream) == 0:
        raise InsufficientStatisticsError("empty stream")
    out = {}
    for ch in ("C", "X", "D"):
        n = int(np.sum(stream.channels == ch))
        if n:
            out[ch] = (n / stream.duration, np.sqrt(n) / stream.duration)
    return out


def branching_fractions(model: LindbladModel) -> dict[str, float]:
    """Exact P(photon exits via C) / P(via X) for one excitation.

    Integrates the closed-form manifold amplitudes; transfer jumps count
    toward C since the resulting cavity photon always leaves through C.
    """
    prop = SingleExcitationPropagator(model)
    t = np.linspace(0.0, prop.t_max, 200001)
    alpha, beta = prop.amplitudes(t)
    int_a = np.trapezoid(np.abs(alpha) ** 2, t)
    int_b = np.trapezoid(np.abs(beta) ** 2, t)
    p_x = prop.rate_x * int_a
    p_c = prop.rate_c * int_b + prop.rate_t * int_a
    total = p_x + p_c
    return {"C": p_c / total, "X": p_x / total}


def average_excited_population(model: LindbladModel, t_grid, n_traj: int,
                               seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Trajectory-averaged exciton population from |e,0> and its SE.

    Each trajectory carries the conditional no-jump state; after the first
    jump of any channel the exciton is empty.  Per-trajectory substreams
    come from SeedSequence(seed).spawn(n_traj).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    prop = SingleExcitationPropagator(model)
    pop = np.zeros((n_traj, len(t_grid)))
    children = np.random.SeedSequence(seed).spawn(n_traj)
    alpha, _ = prop.amplitudes(t_grid)
    surv = prop.survival(t_grid)
    cond = np.abs(alpha) ** 2 / surv
    for k in range(n_traj):
        rng = np.random.default_rng(children[k])
        u = max(rng.random(), _MIN_U)
        lo, hi = 0.0, prop.t_max
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if prop.survival(np.array([mid]))[0] > u:
                lo = mid
            else:
                hi = mid
        pop[k] = np.where(t_grid < 0.5 * (lo + hi), cond, 0.0)
    mean = pop.mean(axis=0)
    se = pop.std(axis=0, ddof=1) / np.sqrt(n_traj)
    return mean, se

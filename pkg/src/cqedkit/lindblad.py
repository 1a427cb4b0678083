"""Dense Lindblad master equation for the driven Jaynes-Cummings system.

Hilbert space: two-level exciton (g, e) tensor truncated Fock space of the
cavity mode.  Energies in ueV, times in ps, rates in 1/ps.  The Liouvillian
is diagonalized once per model; propagation, steady states, two-time
correlations (quantum regression) and emission spectra all reuse the same
eigendecomposition.  Dimensions are tiny (a handful of excitations), so
dense linear algebra is the accuracy-first choice.
"""
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .coupled import SystemParams
from .errors import ConvergenceError, CutoffError
from .units import HBAR_UEV_PS

_CUTOFF_TOL = 1e-6


@dataclass(frozen=True)
class HilbertConfig:
    """Cavity Fock cutoff; total dimension is 2*(n_max+1)."""

    n_max: int = 2

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)


@dataclass(frozen=True)
class LindbladModel:
    """Jaynes-Cummings system with decay, pump and feeding channels.

    e_x, e_c, g, gamma_x, gamma_c in ueV.  pump_x (incoherent exciton
    pump), feed_c (Poissonian photon injection into the cavity) and
    transfer (phenomenological exciton -> cavity-photon feeding) are
    rates in 1/ps.  dephasing is an optional pure-dephasing hook, off by
    default.
    """

    e_x: float
    e_c: float
    g: float
    gamma_x: float
    gamma_c: float
    pump_x: float = 0.0
    feed_c: float = 0.0
    transfer: float = 0.0
    dephasing: float = 0.0

    def __post_init__(self):
        if self.gamma_x <= 0 or self.gamma_c <= 0:
            raise ValueError("gamma_x, gamma_c must be > 0")
        for name in ("pump_x", "feed_c", "transfer", "dephasing"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.g < 0:
            raise ValueError("g must be >= 0")

    @classmethod
    def from_system(cls, p: SystemParams, **rates) -> "LindbladModel":
        return cls(p.e_x, p.e_c, p.g, p.gamma_x, p.gamma_c, **rates)

    def with_rates(self, **rates) -> "LindbladModel":
        return replace(self, **rates)

    @property
    def system(self) -> SystemParams:
        return SystemParams(self.e_x, self.e_c, self.gamma_x, self.gamma_c, self.g)


class Operators:
    """Atom and cavity operators on the truncated product space."""

    def __init__(self, n_max: int):
        nc = n_max + 1
        ident_c = np.eye(nc)
        ident_a = np.eye(2)
        lower_c = np.diag(np.sqrt(np.arange(1, nc)), k=1)
        sm_atom = np.array([[0.0, 1.0], [0.0, 0.0]])  # |g><e|
        self.n_max = n_max
        self.dim = 2 * nc
        self.a = np.kron(ident_a, lower_c)
        self.sm = np.kron(sm_atom, ident_c)
        self.ad = self.a.conj().T
        self.sp = self.sm.conj().T
        self.num_c = self.ad @ self.a
        self.num_x = self.sp @ self.sm

    def exciton_excited(self) -> np.ndarray:
        """Density matrix |e,0><e,0|."""
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        idx = self.n_max + 1  # |e> block starts after the |g> Fock block
        rho[idx, idx] = 1.0
        return rho

    def vacuum(self) -> np.ndarray:
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.flatten(order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape((dim, dim), order="F")


def hamiltonian(model: LindbladModel, ops: Operators) -> np.ndarray:
    return (model.e_x * ops.num_x + model.e_c * ops.num_c
            + model.g * (ops.ad @ ops.sm + ops.sp @ ops.a))


def jump_channels(model: LindbladModel, ops: Operators) -> list[tuple[str, float, np.ndarray]]:
    """(tag, rate 1/ps, operator) triples; zero-rate channels omitted."""
    channels = [
        ("C", model.gamma_c / HBAR_UEV_PS, ops.a),
        ("X", model.gamma_x / HBAR_UEV_PS, ops.sm),
    ]
    if model.pump_x > 0:
        channels.append(("pump", model.pump_x, ops.sp))
    if model.feed_c > 0:
        channels.append(("feed", model.feed_c, ops.ad))
    if model.transfer > 0:
        channels.append(("transfer", model.transfer, ops.ad @ ops.sm))
    if model.dephasing > 0:
        channels.append(("dephase", model.dephasing, ops.num_x))
    return channels


def liouvillian(model: LindbladModel, ops: Operators) -> np.ndarray:
    """Dense Liouvillian on column-stacked density matrices, units 1/ps."""
    dim = ops.dim
    ident = np.eye(dim)
    h = hamiltonian(model, ops)
    lv = -1j / HBAR_UEV_PS * (np.kron(ident, h) - np.kron(h.T, ident))
    for _, rate, c in jump_channels(model, ops):
        cdc = c.conj().T @ c
        lv += rate * (np.kron(c.conj(), c)
                      - 0.5 * np.kron(ident, cdc)
                      - 0.5 * np.kron(cdc.T, ident))
    return lv


class _Propagator:
    """Eigendecomposition of the Liouvillian, cached per (model, cutoff)."""

    def __init__(self, model: LindbladModel, n_max: int):
        self.ops = Operators(n_max)
        self.lv = liouvillian(model, self.ops)
        self.evals, self.evecs = scipy.linalg.eig(self.lv)
        # Liouvillian of a small system: eigenvectors are well conditioned,
        # but solve rather than invert for the coefficients.
        self._lu = scipy.linalg.lu_factor(self.evecs)

    def coeffs(self, vec: np.ndarray) -> np.ndarray:
        return scipy.linalg.lu_solve(self._lu, vec)

    def apply_exp(self, vec: np.ndarray, t: float) -> np.ndarray:
        c = self.coeffs(vec)
        return self.evecs @ (c * np.exp(self.evals * t))


def _check_cutoff(rho: np.ndarray, ops: Operators):
    """Error out if the top Fock level carries non-negligible weight."""
    nc = ops.n_max + 1
    top = rho[nc - 1, nc - 1].real + rho[2 * nc - 1, 2 * nc - 1].real
    if top > _CUTOFF_TOL:
        raise CutoffError(
            f"population {top:.2e} at Fock cutoff n_max={ops.n_max}; increase n_max")


def evolve(model: LindbladModel, rho0: np.ndarray, t_grid,
           n_max: int = 2) -> np.ndarray:
    """Propagate rho0 over t_grid; returns an array of density matrices.

    Trace is preserved to 1e-8 by construction (checked), and the top
    Fock level is monitored against cutoff overflow.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    prop = _Propagator(model, n_max)
    dim = prop.ops.dim
    v0 = _vec(np.asarray(rho0, dtype=complex))
    out = np.empty((len(t_grid), dim, dim), dtype=complex)
    for i, t in enumerate(t_grid):
        rho = _unvec(prop.apply_exp(v0, t), dim)
        rho = 0.5 * (rho + rho.conj().T)
        drift = abs(np.trace(rho).real - 1.0)
        if drift > 1e-8:
            raise ConvergenceError(f"trace drift {drift:.2e} exceeds 1e-8")
        _check_cutoff(rho, prop.ops)
        out[i] = rho
    return out


def steady_state(model: LindbladModel, n_max: int = 2) -> np.ndarray:
    """Steady density matrix (needs a pump so the state is not trivial)."""
    prop = _Propagator(model, n_max)
    idx = np.argmin(np.abs(prop.evals))
    if abs(prop.evals[idx]) > 1e-8:
        raise ConvergenceError("no stationary Liouvillian mode found")
    rho = _unvec(prop.evecs[:, idx], prop.ops.dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    _check_cutoff(rho, prop.ops)
    return rho


def excited_population(rhos: np.ndarray, n_max: int) -> np.ndarray:
    """Exciton occupation for each density matrix in a trajectory."""
    ops = Operators(n_max)
    return np.einsum("tij,ji->t", rhos, ops.num_x).real


def liouvillian_decay_rates(model: LindbladModel, n_max: int = 1) -> np.ndarray:
    """Sorted decay rates (-Re eigenvalues) of the Liouvillian, 1/ps."""
    prop = _Propagator(model, n_max)
    return np.sort(-prop.evals.real)


def _channel_operator(ops: Operators, channel: str) -> np.ndarray:
    if channel == "C":
        return ops.a
    if channel == "X":
        return ops.sm
    raise ValueError(f"unknown channel {channel!r}")


def cw_g2(model: LindbladModel, tau_grid, channel: str = "C",
          n_max: int = 2) -> np.ndarray:
    """Normalized g2(tau) of a channel's steady-state emission.

    Quantum regression on the steady state: g2(tau) =
    Tr[c^dag c e^{L tau}(c rho_ss c^dag)] / Tr[c^dag c rho_ss]^2.
    Requires a pump (pump_x > 0) so a nontrivial steady state exists.
    """
    if model.pump_x <= 0:
        raise ValueError("cw_g2 needs pump_x > 0 for a nontrivial steady state")
    tau_grid = np.asarray(tau_grid, dtype=float)
    prop = _Propagator(model, n_max)
    ops = prop.ops
    c = _channel_operator(ops, channel)
    rho_ss = steady_state(model, n_max)
    flux = np.trace(c.conj().T @ c @ rho_ss).real
    if flux <= 0:
        raise ConvergenceError("steady-state channel flux vanished")
    seed = _vec(c @ rho_ss @ c.conj().T)
    coef = prop.coeffs(seed)
    num_weights = _vec(c.conj().T @ c).conj() @ prop.evecs  # Tr[n_op w_k] per mode
    g2 = np.empty(len(tau_grid))
    for i, tau in enumerate(tau_grid):
        g2[i] = (num_weights * coef * np.exp(prop.evals * tau)).sum().real / flux**2
    return g2


def emission_spectrum(model: LindbladModel, energy_grid, channel: str = "C",
                      n_max: int = 2, coverage_tol: float = 0.999):
    """Emission spectrum of a channel after exciton excitation.

    S(E) is the Fourier transform of the time-integrated first-order
    correlation of the channel's lowering operator, evaluated in closed
    form from the Liouvillian eigendecomposition and normalized to unit
    area on the grid.  Raises if the grid captures < coverage_tol of the
    total analytic area.
    """
    if model.pump_x > 0 or model.feed_c > 0:
        raise ValueError("emission_spectrum assumes a decay-only model")
    energy_grid = np.asarray(energy_grid, dtype=float)
    prop = _Propagator(model, n_max)
    ops = prop.ops
    c = _channel_operator(ops, channel)

    b = prop.coeffs(_vec(ops.exciton_excited()))
    nonzero = np.abs(prop.evals) > 1e-10
    # time-integrated state: R = -sum_k b_k w_k / lambda_k over decaying modes
    r_vec = prop.evecs[:, nonzero] @ (-b[nonzero] / prop.evals[nonzero])
    seed = _vec(c @ _unvec(r_vec, ops.dim))
    d = prop.coeffs(seed)
    f = (_vec(c).conj() @ prop.evecs) * d  # Tr[c^dag w_k] d_k per mode

    # keep decaying modes with nonzero weight; zero modes carry no emission
    keep = (np.abs(f) > 1e-14 * np.abs(f).max()) & (prop.evals.real < -1e-14)
    lam, f = prop.evals[keep], f[keep]
    denom = lam[None, :] - 1j * energy_grid[:, None] / HBAR_UEV_PS
    s = (-(f[None, :] / denom)).sum(axis=1).real / np.pi
    s = np.clip(s, 0.0, None)

    total = HBAR_UEV_PS * f.sum().real  # analytic area over all energies
    grid_area = np.trapezoid(s, energy_grid)
    if total <= 0 or grid_area < coverage_tol * total:
        raise ValueError(
            f"energy grid captures {grid_area / total if total > 0 else 0:.4f} "
            f"of the spectrum; widen the grid")
    return energy_grid, s / grid_area

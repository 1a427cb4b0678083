"""Two-mode coupled-oscillator model of the exciton-cavity system.

The non-Hermitian mode matrix is

    M = [[E_x - i*gamma_x/2,  g],
        [g,                  E_c - i*gamma_c/2]]

whose eigenvalues are the complex mode energies

    E_{1,2} = (E_c+E_x)/2 - i(gamma_c+gamma_x)/4
              +/- sqrt(g^2 - (gamma_c - gamma_x - 2i*Delta)^2 / 16)

with Delta = E_x - E_c.  Decaying modes carry negative imaginary part and
the FWHM of branch k is 2*|Im E_k|.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateBranchesError, WeakCouplingError
from .units import HBAR_UEV_PS

# Branch labels by exciton weight of the (right) eigenvector.
_EXCITON_LIKE_MIN = 0.6
_CAVITY_LIKE_MAX = 0.4


@dataclass(frozen=True)
class SystemParams:
    """Exciton/cavity centers, FWHM linewidths and coupling, all in ueV."""

    e_x: float
    e_c: float
    gamma_x: float
    gamma_c: float
    g: float

    def __post_init__(self):
        if not (self.gamma_x > 0 and self.gamma_c > 0):
            raise ValueError("linewidths gamma_x, gamma_c must be > 0")
        if self.g < 0:
            raise ValueError("coupling g must be >= 0")

    @property
    def detuning(self) -> float:
        """Delta = E_x - E_c in ueV."""
        return self.e_x - self.e_c

    def at_detuning(self, delta: float) -> "SystemParams":
        """Same system with the exciton moved to E_c + delta."""
        return SystemParams(self.e_c + delta, self.e_c,
                            self.gamma_x, self.gamma_c, self.g)


@dataclass(frozen=True)
class EigenPair:
    """Complex mode energies, ordered by real part (upper first)."""

    upper: complex
    lower: complex
    upper_label: str
    lower_label: str


@dataclass(frozen=True)
class FiguresOfMerit:
    purcell: float
    efficiency: float
    rabi_splitting: float | None
    strongly_coupled: bool


@dataclass(frozen=True)
class AnticrossingCurve:
    """Branch-continued complex energies over a detuning grid.

    Branch "a" connects adiabatically across the sweep; in strong coupling
    it switches character (exciton-like <-> cavity-like) at resonance.
    """

    detuning: np.ndarray
    branch_a: np.ndarray
    branch_b: np.ndarray

    @property
    def splitting(self) -> np.ndarray:
        return np.abs(self.branch_a.real - self.branch_b.real)


def mode_matrix(p: SystemParams) -> np.ndarray:
    """The 2x2 non-Hermitian mode matrix, exciton first."""
    return np.array(
        [[p.e_x - 0.5j * p.gamma_x, p.g],
         [p.g, p.e_c - 0.5j * p.gamma_c]],
        dtype=complex,
    )


def _eigenvalues(p: SystemParams) -> tuple[complex, complex]:
    avg = 0.5 * (p.e_c + p.e_x) - 0.25j * (p.gamma_c + p.gamma_x)
    rad = np.sqrt(complex(p.g**2) - (p.gamma_c - p.gamma_x - 2j * p.detuning) ** 2 / 16.0)
    return avg + rad, avg - rad


def _label(exciton_weight: float) -> str:
    if exciton_weight >= _EXCITON_LIKE_MIN:
        return "exciton-like"
    if exciton_weight <= _CAVITY_LIKE_MAX:
        return "cavity-like"
    return "mixed"


def _exciton_weights(p: SystemParams, values: np.ndarray) -> np.ndarray:
    """|exciton component|^2 of the normalized eigenvector of each value."""
    weights = np.empty(len(values))
    for i, lam in enumerate(values):
        # (M - lam) v = 0  =>  v ~ (g, lam - M00) up to normalization
        v = np.array([p.g, lam - (p.e_x - 0.5j * p.gamma_x)], dtype=complex)
        if np.allclose(v, 0):  # g = 0 and lam hits the exciton entry
            weights[i] = 1.0
        else:
            v /= np.linalg.norm(v)
            weights[i] = abs(v[0]) ** 2
    return weights


def eigen_energies(p: SystemParams) -> EigenPair:
    """Complex mode energies with branch labels, upper = larger Re."""
    e1, e2 = _eigenvalues(p)
    if e1.real < e2.real:
        e1, e2 = e2, e1
    w = _exciton_weights(p, np.array([e1, e2]))
    return EigenPair(e1, e2, _label(w[0]), _label(w[1]))


def is_strongly_coupled(p: SystemParams) -> bool:
    """Strict strong-coupling inequality g^2 > (gamma_c - gamma_x)^2 / 16."""
    return p.g**2 > (p.gamma_c - p.gamma_x) ** 2 / 16.0


def vacuum_rabi_splitting(p: SystemParams) -> float:
    """Mode splitting at resonance, 2*sqrt(g^2 - (gamma_c-gamma_x)^2/16).

    Evaluated at Delta = 0 regardless of the stored centers.  Raises
    WeakCouplingError when the radicand is not positive.
    """
    rad = p.g**2 - (p.gamma_c - p.gamma_x) ** 2 / 16.0
    if rad <= 0:
        raise WeakCouplingError("no real splitting: system is not strongly coupled")
    return 2.0 * np.sqrt(rad)


def extract_coupling_strength(splitting: float, gamma_c: float, gamma_x: float) -> float:
    """Invert the resonance splitting for g: sqrt((S/2)^2 + (gc-gx)^2/16)."""
    if splitting <= 0:
        raise ValueError("splitting must be positive")
    return float(np.sqrt((splitting / 2.0) ** 2 + (gamma_c - gamma_x) ** 2 / 16.0))


def branch_linewidths(p: SystemParams) -> tuple[float, float]:
    """FWHM of (upper, lower) branch: 2*|Im E_k|.  Sums to gamma_c + gamma_x."""
    pair = eigen_energies(p)
    return 2.0 * abs(pair.upper.imag), 2.0 * abs(pair.lower.imag)


def _exciton_branch(p: SystemParams) -> complex:
    """The mode energy whose eigenvector has the larger exciton weight."""
    e1, e2 = _eigenvalues(p)
    w = _exciton_weights(p, np.array([e1, e2]))
    if abs(w[0] - w[1]) < 1e-12:
        raise DegenerateBranchesError(
            "branches degenerate in character; exciton branch undefined at resonance")
    return e1 if w[0] > w[1] else e2


def exciton_branch_lifetime(p: SystemParams) -> float:
    """Lifetime in ps of the exciton-like branch, hbar / (2*|Im E_exc|)."""
    if p.detuning == 0 and is_strongly_coupled(p):
        raise DegenerateBranchesError("branches degenerate in width at zero detuning")
    e_exc = _exciton_branch(p)
    return HBAR_UEV_PS / (2.0 * abs(e_exc.imag))


def infer_bare_lifetime(measured_ps: float, detuning: float,
                        g: float, gamma_c: float) -> float:
    """Bare exciton lifetime tau_x such that the coupled exciton branch
    lives exactly `measured_ps` at the given detuning.

    Root-find over gamma_x in (0, gamma_c); the branch lifetime is
    strictly monotone in gamma_x on that interval.
    """
    if measured_ps <= 0:
        raise ValueError("measured lifetime must be positive")
    if g == 0:
        return measured_ps

    def mismatch(gamma_x):
        p = SystemParams(detuning, 0.0, gamma_x, gamma_c, g)
        return exciton_branch_lifetime(p) - measured_ps

    lo, hi = 1e-12 * gamma_c, gamma_c * (1 - 1e-12)
    if mismatch(lo) < 0 or mismatch(hi) > 0:
        raise ValueError("no bare lifetime in (0, gamma_c) reproduces the measurement")
    gamma_x = brentq(mismatch, lo, hi, xtol=1e-300, rtol=1e-14)
    return HBAR_UEV_PS / gamma_x


def figures_of_merit(g: float, gamma_c: float, gamma_x: float) -> FiguresOfMerit:
    """Purcell factor F_P = 4g^2/(gamma_c*gamma_x) and cavity quantum
    efficiency eta = F_P/(1+F_P) * gamma_c/(gamma_c+gamma_x)."""
    if gamma_c <= 0 or gamma_x <= 0 or g < 0:
        raise ValueError("rates must be positive, g nonnegative")
    purcell = 4.0 * g**2 / (gamma_c * gamma_x)
    eta = purcell / (1.0 + purcell) * gamma_c / (gamma_c + gamma_x)
    p = SystemParams(0.0, 0.0, gamma_x, gamma_c, g)
    sc = is_strongly_coupled(p)
    splitting = vacuum_rabi_splitting(p) if sc else None
    return FiguresOfMerit(purcell, eta, splitting, sc)


def track_branches(matrices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of a stack of 2x2 matrices with adiabatic continuation.

    Branch identity follows maximum eigenvector overlap with the previous
    point; ties broken by real-part ordering.  Returns (branch_a, branch_b)
    where branch_a starts as the upper (larger Re) branch.
    """
    vals, vecs = np.linalg.eig(matrices)
    n = len(matrices)
    a = np.empty(n, dtype=complex)
    b = np.empty(n, dtype=complex)
    order = np.argsort(-vals[0].real, kind="stable")
    prev_vecs = vecs[0][:, order]
    a[0], b[0] = vals[0][order]
    for i in range(1, n):
        v = vecs[i]
        # overlap of previous branch-a vector with both current eigenvectors
        ov_a = np.abs(prev_vecs[:, 0].conj() @ v) ** 2
        ov_b = np.abs(prev_vecs[:, 1].conj() @ v) ** 2
        keep = ov_a[0] + ov_b[1]
        swap = ov_a[1] + ov_b[0]
        if np.isclose(keep, swap):
            order = np.argsort(-vals[i].real, kind="stable")
        elif keep >= swap:
            order = np.array([0, 1])
        else:
            order = np.array([1, 0])
        a[i], b[i] = vals[i][order]
        prev_vecs = v[:, order]
    return a, b


def detuning_sweep(p: SystemParams, delta_grid) -> AnticrossingCurve:
    """Eigen-energies across a detuning grid with branch continuation."""
    delta_grid = np.asarray(delta_grid, dtype=float)
    mats = np.array([mode_matrix(p.at_detuning(d)) for d in delta_grid])
    a, b = track_branches(mats)
    return AnticrossingCurve(delta_grid, a, b)


def model_spectrum(p: SystemParams, wavelength_grid_nm, initial: str = "exciton"):
    """Two-Lorentzian emission spectrum on a wavelength grid.

    Lines sit at Re(E_k) with FWHM 2|Im E_k|; amplitudes are the squared
    coefficients of the initial excitation vector in the eigenbasis of the
    mode matrix.  Normalized to unit area over the grid.
    """
    from .specfit import Spectrum
    from .units import HC_UEV_NM

    if initial not in ("exciton", "cavity"):
        raise ValueError("initial must be 'exciton' or 'cavity'")
    lam = np.asarray(wavelength_grid_nm, dtype=float)
    if lam.ndim != 1 or len(lam) < 3:
        raise ValueError("wavelength grid must be 1-D with >= 3 points")

    m = mode_matrix(p)
    vals, vecs = np.linalg.eig(m)
    psi0 = np.array([1.0, 0.0]) if initial == "exciton" else np.array([0.0, 1.0])
    coeffs = np.linalg.solve(vecs, psi0)
    weights = np.abs(coeffs) ** 2
    weights = weights / weights.sum()

    energy = HC_UEV_NM / lam
    intensity = np.zeros_like(lam)
    for lam_k, w_k in zip(vals, weights):
        center = lam_k.real
        fwhm = 2.0 * abs(lam_k.imag)
        if fwhm == 0:
            raise ValueError("zero-width branch; lossless systems have no lineshape")
        intensity += w_k * (2.0 / (np.pi * fwhm)) / (1.0 + 4.0 * (energy - center) ** 2 / fwhm**2)

    area = np.trapezoid(intensity, lam)
    if area <= 0:
        raise ValueError("grid does not cover the branch centers")
    return Spectrum(wavelength_nm=lam, intensity=intensity / area)

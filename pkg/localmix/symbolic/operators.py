"""Transfer operators on state-dependent functions and their leading eigendata."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Sequence, Tuple

import numpy as np
from scipy import linalg

from ..errors import LocalMixError, NotMixing, PeriodicCocycle
from .shift import ShiftSystem

_LOGGER = logging.getLogger(__name__)

APERIODICITY_GRID = 12
APERIODICITY_TOL = 1e-9


def transfer_apply(system: ShiftSystem, values: np.ndarray) -> np.ndarray:
    """(L F)(x) = sum over one-step preimages y of exp(-r(y)) F(y)."""
    return system.weights.T @ np.asarray(values)


def _positive(vector: np.ndarray, label: str) -> np.ndarray:
    vector = np.real_if_close(vector, tol=1e6).real
    vector = vector * np.sign(vector.sum())
    if vector.min() < -1e-12 * np.abs(vector).max():
        raise LocalMixError(f"{label} has mixed signs; is the shift irreducible?")
    return np.abs(vector)


@dataclass(frozen=True, eq=False)
class GibbsData:
    """Leading eigenvalue, eigenfunction and eigenmeasure of L for potential -r.

    ``psi`` and ``rho`` are indexed by the first symbol; ``normalized`` is the
    system with roof r + log(lam), whose transfer operator fixes ``psi``.
    """

    lam: float
    psi: np.ndarray
    rho: np.ndarray
    nu: np.ndarray
    system: ShiftSystem
    normalized: ShiftSystem

    @property
    def pressure(self) -> float:
        return math.log(self.lam)

    @property
    def edge_measure(self) -> np.ndarray:
        """nu([i j]) for every pair of states (zero off the transition graph)."""
        return self.psi[:, None] * self.normalized.weights * self.rho[None, :]

    @property
    def mean_roof(self) -> float:
        """Integral of the normalized roof against nu."""
        return float(np.sum(self.edge_measure * self.normalized.roof))

    @property
    def mean_displacement(self) -> np.ndarray:
        return self.nu @ self.system.displacement

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lam,
            "pressure": self.pressure,
            "psi": self.psi.tolist(),
            "rho": self.rho.tolist(),
            "nu": self.nu.tolist(),
            "mean_roof": self.mean_roof,
            "mean_displacement": self.mean_displacement.tolist(),
        }


def leading_triple(system: ShiftSystem) -> GibbsData:
    """Perron data of L: L psi = lam psi, rho(L F) = lam rho(F), psi . rho = 1.

    Raises:
        NotMixing: If the transition matrix is not primitive.
    """
    if not system.shift.is_mixing:
        raise NotMixing("transition matrix is not primitive")
    weights = system.weights
    values, left, right = linalg.eig(weights, left=True, right=True)
    index = int(np.argmax(values.real))
    lam = float(values[index].real)
    if lam <= 0:
        raise LocalMixError(f"leading eigenvalue {lam} is not positive")
    # L = M^T, so psi is a left Perron vector of M and rho a right one.
    psi = _positive(left[:, index], "eigenfunction")
    rho = _positive(right[:, index], "eigenmeasure")
    rho = rho / rho.sum()
    psi = psi / float(psi @ rho)
    nu = psi * rho
    _LOGGER.debug("Leading eigenvalue %.12g (pressure %.12g)", lam, math.log(lam))
    return GibbsData(
        lam=lam,
        psi=psi,
        rho=rho,
        nu=nu,
        system=system,
        normalized=system.shifted(math.log(lam)),
    )


def shift_pairing(gibbs: GibbsData, f: np.ndarray, g: np.ndarray) -> float:
    """Integral of (F o sigma) G against rho, for state functions F and G."""
    rho_pairs = gibbs.normalized.weights * gibbs.rho[None, :]
    return float(np.asarray(g) @ rho_pairs @ np.asarray(f))


def transfer_pairing(gibbs: GibbsData, f: np.ndarray, g: np.ndarray) -> float:
    """Integral of F (L G) against rho, with L normalized."""
    return float(gibbs.rho @ (np.asarray(f) * transfer_apply(gibbs.normalized, g)))


def twisted_matrix(
    system: ShiftSystem, theta: Sequence[float], eta: float = 0.0
) -> np.ndarray:
    """Kernel exp((-1 + i eta) r(i, j)) exp(i <theta, f(i)>) on admissible edges."""
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    if theta.size != system.d:
        raise LocalMixError(
            f"theta has {theta.size} entries, displacement has {system.d}"
        )
    phase = np.exp(1j * (system.displacement @ theta)) if system.d else 1.0
    kernel = system.shift.transition * np.exp((-1.0 + 1j * eta) * system.roof)
    return kernel * np.reshape(phase, (-1, 1))


def twisted_eigenvalue(
    system: ShiftSystem, theta: Sequence[float], eta: float = 0.0
) -> complex:
    values = linalg.eigvals(twisted_matrix(system, theta, eta))
    return complex(values[int(np.argmax(np.abs(values)))])


def twisted_spectral_radius(
    system: ShiftSystem, theta: Sequence[float], eta: float = 0.0
) -> float:
    """Spectral radius of the twisted operator; below one off zero when aperiodic."""
    return float(np.max(np.abs(linalg.eigvals(twisted_matrix(system, theta, eta)))))


def check_aperiodic(
    system: ShiftSystem,
    grid: int = APERIODICITY_GRID,
    tol: float = APERIODICITY_TOL,
) -> None:
    """Look for a unimodular twist on the rational grid 2 pi k / grid.

    Raises:
        PeriodicCocycle: If some nonzero theta has spectral radius >= 1 - tol.
    """
    if system.d == 0:
        return
    steps = [2.0 * math.pi * k / grid for k in range(grid)]
    for theta in itertools.product(steps, repeat=system.d):
        if not any(theta):
            continue
        radius = twisted_spectral_radius(system, theta)
        if radius >= 1.0 - tol:
            raise PeriodicCocycle(
                f"displacement is lattice-periodic: radius {radius:.12g} at "
                f"theta={[round(v, 6) for v in theta]}"
            )


def covariance(
    system: ShiftSystem, step: float = 1e-4
) -> Tuple[np.ndarray, np.ndarray]:
    """Mean and asymptotic covariance of f per step, from log lambda(theta, 0).

    ``system`` must be normalized. log lambda(theta) = i <theta, mean>
    - theta^T cov theta / 2 + O(|theta|^3).
    """
    d = system.d
    if d == 0:
        return np.zeros(0), np.zeros((0, 0))

    def log_lam(theta: np.ndarray) -> complex:
        return np.log(twisted_eigenvalue(system, theta))

    basis = np.eye(d) * step
    origin = log_lam(np.zeros(d))
    mean = np.array(
        [((log_lam(e) - log_lam(-e)) / (2 * step)).imag for e in basis]
    )
    hessian = np.zeros((d, d))
    for i, j in itertools.product(range(d), repeat=2):
        if i == j:
            e = basis[i]
            value = log_lam(e) - 2 * origin + log_lam(-e)
            hessian[i, i] = value.real / step**2
        elif i < j:
            ei, ej = basis[i], basis[j]
            value = (
                log_lam(ei + ej)
                - log_lam(ei - ej)
                - log_lam(ej - ei)
                + log_lam(-ei - ej)
            )
            hessian[i, j] = hessian[j, i] = value.real / (4 * step**2)
    return mean, -hessian

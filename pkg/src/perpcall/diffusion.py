"""Diffusion primitives for geometric Brownian motion killed at rate r.

Fundamental solutions of sigma^2 x^2/2 v'' + (r-d) x v' - r v = 0 (the increasing
x^eta and decreasing x^nu), their variants killed at a level, and the scale/speed
densities that turn smooth-pasting conditions into algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DerivedConstants, MarketParams, derive_constants


def power(x, y):
    """x**y computed as exp(y*log(x)), the single power routine used package-wide.

    Keeping every exponentiation on one code path guarantees cross-operation
    consistency of values like psi(x)*phi(x) vs scale factors.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("power() requires a strictly positive base")
    out = np.exp(y * np.log(x))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DiffusionKernel:
    """Evaluator bundle for one market.

    Parameters
    ----------
    market : MarketParams
    constants : DerivedConstants
    scale_anchor : float
        Reference point c of the scale function; S'(x) = (x/c)^(-2(r-d)/sigma^2).
        Arbitrary positive number; every boundary equation is invariant to it.
    """

    market: MarketParams
    constants: DerivedConstants
    scale_anchor: float = 1.0

    def __post_init__(self) -> None:
        if not self.scale_anchor > 0.0:
            raise ValueError(f"scale anchor must be positive, got {self.scale_anchor}")

    @classmethod
    def build(cls, market: MarketParams, scale_anchor: float = 1.0) -> "DiffusionKernel":
        return cls(market=market, constants=derive_constants(market), scale_anchor=scale_anchor)

    # -- fundamental solutions ------------------------------------------------

    def psi(self, x):
        """Increasing solution x^eta."""
        return power(x, self.constants.eta)

    def phi(self, x):
        """Decreasing solution x^nu."""
        return power(x, self.constants.nu)

    def dpsi(self, x):
        return self.constants.eta * power(x, self.constants.eta - 1.0)

    def dphi(self, x):
        return self.constants.nu * power(x, self.constants.nu - 1.0)

    def d2psi(self, x):
        eta = self.constants.eta
        return eta * (eta - 1.0) * power(x, eta - 2.0)

    def d2phi(self, x):
        nu = self.constants.nu
        return nu * (nu - 1.0) * power(x, nu - 2.0)

    # -- scale and speed ------------------------------------------------------

    def scale_density(self, x):
        """S'(x) = (x/c)^(-2(r-d)/sigma^2).

        The exponent equals eta + nu - 1.
        """
        e = self.constants.eta + self.constants.nu - 1.0
        return power(np.asarray(x, dtype=float) / self.scale_anchor, e)

    def speed_density(self, x):
        """m'(x) = 2/(sigma^2 x^2 S'(x))."""
        sig2 = self.market.sigma**2
        x = np.asarray(x, dtype=float)
        out = 2.0 / (sig2 * x * x * self.scale_density(x))
        return float(out) if np.ndim(out) == 0 else out

    def wronskian(self) -> float:
        """B = (psi' phi - phi' psi)/S', constant in x; equals (eta-nu)*c^(eta+nu-1)."""
        cons = self.constants
        return (cons.eta - cons.nu) * power(self.scale_anchor, cons.eta + cons.nu - 1.0)

    # -- killed variants ------------------------------------------------------

    def psi_hat(self, h, x):
        """psi(x) - (psi(h)/phi(h))*phi(x): vanishes at h, positive above h."""
        cons = self.constants
        return self.psi(x) - power(h, cons.eta - cons.nu) * self.phi(x)

    def phi_hat(self, k, x):
        """phi(x) - (phi(k)/psi(k))*psi(x): vanishes at k, positive below k."""
        cons = self.constants
        return self.phi(x) - power(k, cons.nu - cons.eta) * self.psi(x)

    def dpsi_hat(self, h, x):
        cons = self.constants
        return self.dpsi(x) - power(h, cons.eta - cons.nu) * self.dphi(x)

    def dphi_hat(self, k, x):
        cons = self.constants
        return self.dphi(x) - power(k, cons.nu - cons.eta) * self.dpsi(x)

    def d2psi_hat(self, h, x):
        cons = self.constants
        return self.d2psi(x) - power(h, cons.eta - cons.nu) * self.d2phi(x)

    def d2phi_hat(self, k, x):
        cons = self.constants
        return self.d2phi(x) - power(k, cons.nu - cons.eta) * self.d2psi(x)

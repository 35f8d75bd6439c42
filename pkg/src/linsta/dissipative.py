"""
Dissipative transport models reduced to linear mean dynamics.

* Lossy coherent-state transport: the coherent amplitude of a damped mode in a
  moving trap obeys ``alpha' = -(i w + Gamma/2) alpha + (i w / (sqrt2 l)) x0(t)``,
  so ``<x> = sqrt2 l Re(alpha)`` follows a damped oscillator.
* Overdamped Brownian bead: Gaussian density whose centre relaxes toward the trap.
* Underdamped bead (Kramers): Gaussian in phase space with a damped-oscillator centre.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .ltidyn import LtiSystem, format_float, min_energy_drive, sensitivity_system
from .signal import PolyExpSignal, cumulative_integral

K_B = 1.380649e-23


@dataclass(frozen=True)
class LindbladOscillator:
    omega: float
    Gamma: float = 0.0
    a0_length: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.Gamma < 0:
            raise DomainError(f"Gamma must be nonnegative, got {self.Gamma}")
        if not self.a0_length > 0:
            raise DomainError(f"a0_length must be positive, got {self.a0_length}")

    @property
    def decay_rate(self) -> complex:
        return 1j * self.omega + 0.5 * self.Gamma

    @property
    def drive_gain(self) -> complex:
        return 1j * self.omega / (np.sqrt(2.0) * self.a0_length)


@dataclass(frozen=True)
class BrownianBead:
    """Trapped bead with mass ``m``, trap frequency ``omega0``, friction ``gamma`` and diffusion ``D = kT / gamma``."""

    m: float
    omega0: float
    gamma: float
    D: float = 1.0

    def __post_init__(self):
        for name in ("m", "omega0", "gamma", "D"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def kT(self) -> float:
        return self.D * self.gamma

    @property
    def relaxation_rate(self) -> float:
        return self.m * self.omega0**2 / self.gamma

    @property
    def alpha(self) -> float:
        """Equilibrium position precision ``m omega0^2 / (2 kT)``."""
        return self.m * self.omega0**2 / (2 * self.kT)

    @property
    def alpha_printed(self) -> float:
        # the overdamped width as printed, 2 gamma D / (m omega0^2); kept for comparison only
        return 2 * self.gamma * self.D / (self.m * self.omega0**2)

    @property
    def beta(self) -> float:
        """Velocity precision ``m / (2 kT)``."""
        return self.m / (2 * self.kT)

    @property
    def beta_printed(self) -> float:
        return self.m / (2 * self.kT * self.gamma)

    @property
    def norm(self) -> float:
        """Normalization of the phase-space Gaussian."""
        return np.sqrt(self.alpha * self.beta) / np.pi

    def density(self, x, xc: float) -> np.ndarray:
        a = self.alpha
        return np.sqrt(a / np.pi) * np.exp(-a * (np.asarray(x) - xc) ** 2)

    def phase_density(self, x, v, xc: float, vc: float) -> np.ndarray:
        return self.norm * np.exp(
            -self.alpha * (np.asarray(x) - xc) ** 2 - self.beta * (np.asarray(v) - vc) ** 2
        )


def lindblad_to_lti(osc: LindbladOscillator) -> LtiSystem:
    """Mean position/velocity dynamics; the control is the trap position ``x0(t)``."""
    w, G = osc.omega, osc.Gamma
    return LtiSystem([[0.0, 1.0], [-(w**2 + G**2 / 4), -G]], [[0.0], [w**2]])


def overdamped_to_lti(bead: BrownianBead) -> LtiSystem:
    k = bead.relaxation_rate
    return LtiSystem([[-k]], [[k]])


def underdamped_to_lti(bead: BrownianBead) -> LtiSystem:
    w = bead.omega0
    return LtiSystem([[0.0, 1.0], [-(w**2), -bead.gamma / bead.m]], [[0.0], [w**2]])


def robust_underdamped_drive(bead: BrownianBead, x_target: float, t_f: float) -> PolyExpSignal:
    """Least-norm trap trajectory moving the bead centre to rest at ``x_target``,
    with the final state first-order insensitive to ``omega0``.

    Designed against the damped propagator through the sensitivity-augmented system.
    """
    w = bead.omega0
    aug = sensitivity_system(underdamped_to_lti(bead), [[0.0, 0.0], [-2 * w, 0.0]], [[0.0], [2 * w]])
    (x0,) = min_energy_drive(aug, np.zeros(4), [x_target, 0.0, 0.0, 0.0], t_f)
    return x0


def coherent_alpha(osc: LindbladOscillator, x0_signal: PolyExpSignal, times) -> np.ndarray:
    """Coherent amplitude ``alpha(t)`` from rest, in closed form.

    ``alpha(t) = g exp(-k t) int_0^t exp(k s) x0(s) ds`` with ``k = i w + Gamma/2``
    and ``g = i w / (sqrt2 a0_length)``.
    """
    tt = np.atleast_1d(np.asarray(times, dtype=float))
    k = osc.decay_rate
    integral = cumulative_integral(x0_signal, tt, rate=k)
    return osc.drive_gain * np.exp(-k * tt) * integral


def alpha_to_mean(osc: LindbladOscillator, alpha) -> np.ndarray:
    """Mean position and velocity implied by coherent amplitudes, shape ``(len, 2)``."""
    alpha = np.asarray(alpha, dtype=complex)
    s = np.sqrt(2.0) * osc.a0_length
    x = s * alpha.real
    v = s * (osc.omega * alpha.imag - 0.5 * osc.Gamma * alpha.real)
    return np.column_stack([x, v])


def mechanical_energy(osc: LindbladOscillator, states) -> np.ndarray:
    """``v^2/2 + (w^2 + Gamma^2/4) x^2 / 2`` for each state row; nonincreasing when undriven."""
    s = np.atleast_2d(states)
    return 0.5 * s[:, 1] ** 2 + 0.5 * (osc.omega**2 + osc.Gamma**2 / 4) * s[:, 0] ** 2


def alpha_csv(times, alpha) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "re_alpha", "im_alpha"])
    for t, a in zip(times, alpha):
        w.writerow([format_float(t), format_float(a.real), format_float(a.imag)])
    return buf.getvalue()

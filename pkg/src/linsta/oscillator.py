"""
Closed forms for the driven harmonic oscillator ``x'' + omega0^2 x = u(t)``.

Here ``u = omega0^2 x0(t)`` where ``x0`` is the position of a moving trap.  A
trap position designed for ``omega0`` but applied to an oscillator of
frequency ``omega`` produces the force ``omega^2 x0(t)``; the mismatch leaves
the excitation amplitude

    G(omega) = omega^2 X0(omega) exp(i omega t_f) - (v_tgt + i omega x_tgt),

with ``X0`` the window Fourier transform of ``x0``.  ``|G|^2 / 2`` is the
residual energy per unit mass.  Robust designs null the first ``p``
frequency derivatives of ``G`` at ``omega0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import DomainError
from .signal import PolyExpSignal, Term, fourier_derivative


@dataclass(frozen=True)
class Target:
    """Phase-space goal ``(r cos phi, r omega0 sin phi)``."""

    r: float
    phi: float
    omega0: float

    def __post_init__(self):
        if self.r < 0:
            raise DomainError(f"target amplitude r must be nonnegative, got {self.r}")
        if not self.omega0 > 0:
            raise DomainError(f"omega0 must be positive, got {self.omega0}")

    @property
    def x_f(self) -> float:
        return self.r * np.cos(self.phi)

    @property
    def v_f(self) -> float:
        return self.r * self.omega0 * np.sin(self.phi)

    @property
    def state(self) -> np.ndarray:
        return np.array([self.x_f, self.v_f])

    def complex_state(self) -> "ComplexState":
        return ComplexState.from_phase(self.x_f, self.v_f, self.omega0)


@dataclass(frozen=True)
class ComplexState:
    """``z = x'/omega0 + i x``."""

    z: complex

    @classmethod
    def from_phase(cls, x: float, v: float, omega0: float) -> "ComplexState":
        return cls(complex(v / omega0, x))

    def to_phase(self, omega0: float) -> tuple:
        return self.z.imag, self.z.real * omega0


@dataclass(frozen=True)
class RobustnessSpec:
    order: int
    omega0: float
    target: Target
    t_f: float
    include_boundary_conditions: bool = False

    def __post_init__(self):
        if self.order < 0:
            raise DomainError(f"robustness order must be >= 0, got {self.order}")
        if not self.t_f > 0:
            raise DomainError(f"t_f must be positive, got {self.t_f}")
        if not np.isclose(self.omega0, self.target.omega0):
            raise DomainError("target and spec disagree on omega0")


def oscillator_state(target: Target) -> np.ndarray:
    return target.state


# ---------------------------------------------------------------------------
# unconstrained optimum
# ---------------------------------------------------------------------------


def u1_closed_form(target: Target, t_f: float) -> PolyExpSignal:
    """Minimum-energy drive from rest at the origin to ``target`` in ``t_f``.

    u1(t) = 2 r w^2 [pf sin(phi + pf - w t) - sin(w t + phi) sin(pf)] / (pf^2 - sin^2 pf)
    with ``pf = w t_f``, expanded into the two exponentials ``exp(+-i w t)``.
    """
    if not t_f > 0:
        raise DomainError(f"t_f must be positive, got {t_f}")
    w, r, phi = target.omega0, target.r, target.phi
    if r == 0:
        return PolyExpSignal.zero(t_f)
    pf = w * t_f
    K = 2 * r * w**2 / (pf**2 - np.sin(pf) ** 2)
    c_plus = K / 2j * (-pf * np.exp(-1j * (phi + pf)) - np.sin(pf) * np.exp(1j * phi))
    c_minus = K / 2j * (pf * np.exp(1j * (phi + pf)) + np.sin(pf) * np.exp(-1j * phi))
    return PolyExpSignal((Term((c_plus,), 1j * w), Term((c_minus,), -1j * w)), t_f, real=True)


def e1_min(target: Target, t_f: float) -> float:
    """Lowest ``int u^2 dt`` that reaches ``target`` in ``t_f``."""
    if not t_f > 0:
        raise DomainError(f"t_f must be positive, got {t_f}")
    w, r, phi = target.omega0, target.r, target.phi
    pf = w * t_f
    return float(
        2 * r**2 * w**3 * (pf + np.cos(2 * phi + pf) * np.sin(pf)) / (pf**2 - np.sin(pf) ** 2)
    )


def cost_curve(r: float, phi: float, omega0: float, tf_values) -> np.ndarray:
    target = Target(r, phi, omega0)
    return np.array([e1_min(target, tf) for tf in tf_values])


# ---------------------------------------------------------------------------
# excitation spectrum
# ---------------------------------------------------------------------------


def _target_derivative(target: Target, omega: float, q: int) -> complex:
    # v_tgt + i omega x_tgt; velocity held at its omega0-referenced value
    if q == 0:
        return target.v_f + 1j * omega * target.x_f
    if q == 1:
        return 1j * target.x_f
    return 0j


def _phased_transform_derivs(sig: PolyExpSignal, omega: float, qmax: int) -> list:
    # d^k/domega^k [S(omega) exp(i omega t_f)] for k = 0..qmax
    T = sig.t_f
    S = [fourier_derivative(sig, omega, j) for j in range(qmax + 1)]
    ph = np.exp(1j * omega * T)
    return [
        ph * sum(comb(k, j) * S[j] * (1j * T) ** (k - j) for j in range(k + 1))
        for k in range(qmax + 1)
    ]


def excitation_amplitude(x0_signal: PolyExpSignal, target: Target, omega: float, q: int = 0) -> complex:
    """``q``-th frequency derivative of ``G(omega)`` (see module docstring)."""
    F = _phased_transform_derivs(x0_signal, omega, q)
    val = omega**2 * F[q]
    if q >= 1:
        val += 2 * q * omega * F[q - 1]
    if q >= 2:
        val += q * (q - 1) * F[q - 2]
    return complex(val - _target_derivative(target, omega, q))


def excitation_spectrum(x0_signal: PolyExpSignal, target: Target, omegas) -> np.ndarray:
    """Residual energy per unit mass ``|G(omega)|^2 / 2`` for each frequency."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    return np.array([0.5 * abs(excitation_amplitude(x0_signal, target, w)) ** 2 for w in omegas])


# ---------------------------------------------------------------------------
# constraint values for robust designs
# ---------------------------------------------------------------------------


def general_constraint_values(spec: RobustnessSpec, normalization: str = "derived") -> list:
    """Values ``a_m`` of ``d^m U/domega^m`` at ``omega0`` (``U`` the transform of ``u = omega0^2 x0``).

    Obtained by imposing ``G^{(q)}(omega0) = 0`` for ``q = 0..p``.  With
    ``normalization="paper"`` the orders ``m >= 1`` are divided by ``omega0``;
    the two conventions agree at ``omega0 = 1``.
    """
    if normalization not in ("derived", "paper"):
        raise DomainError(f"unknown normalization {normalization!r}")
    w, T, p = spec.omega0, spec.t_f, spec.order
    tgt = spec.target
    # F = U exp(i omega t_f); conditions read (omega^2 F)^{(q)} = w^2 T^{(q)} at omega = w
    F = []
    for q in range(p + 1):
        rhs = w**2 * _target_derivative(tgt, w, q)
        if q >= 1:
            rhs -= 2 * q * w * F[q - 1]
        if q >= 2:
            rhs -= q * (q - 1) * F[q - 2]
        F.append(rhs / w**2)
    ph = np.exp(-1j * w * T)
    a = [
        complex(ph * sum(comb(m, k) * F[k] * (-1j * T) ** (m - k) for k in range(m + 1)))
        for m in range(p + 1)
    ]
    if normalization == "paper":
        a = [a[0]] + [v / w for v in a[1:]]
    return a


def transport_constraint_values(spec: RobustnessSpec, normalization: str = "derived") -> list:
    """Constraint values for transport (target on the position axis, ``phi = 0``)."""
    if not np.isclose(np.sin(spec.target.phi), 0.0) or np.cos(spec.target.phi) < 0:
        raise DomainError("transport requires phi = 0")
    return general_constraint_values(spec, normalization)

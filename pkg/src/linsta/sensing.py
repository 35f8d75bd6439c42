"""
Fingerprint sensing: one drive, several trap frequencies, distinct targets.

Oscillators ``x_j'' = -omega_j^2 x_j + u(t)`` all start at rest.  Since
``x' + i omega x`` at ``t_f`` equals ``exp(i omega t_f) U(omega)``, the targets
pin the window transform ``U(omega_j) = omega_j r_j (sin phi_j + i cos phi_j) exp(-i omega_j t_f)``.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DesignError, DomainError
from .ltidyn import LtiSystem, format_float, simulate
from .oscillator import Target
from .signal import PolyExpSignal, energy, fourier_transform, sample_grid
from .superosc import DesignProblem, FourierConstraint, solve_design


class SensingRegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SensingEntry:
    omega: float
    target: Target


@dataclass(frozen=True)
class SensingSpec:
    entries: tuple
    t_f: float

    def __post_init__(self):
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        if not self.t_f > 0:
            raise DomainError(f"t_f must be positive, got {self.t_f}")
        omegas = [e.omega for e in entries]
        if any(not w > 0 for w in omegas):
            raise DomainError("sensing frequencies must be positive")
        if len(set(omegas)) != len(omegas):
            raise DesignError("sensing frequencies must be distinct")

    @classmethod
    def two_frequency(cls, omega1, omega2, t_f, r1=1.0, phi1=np.pi / 2, r2=1.0, phi2=0.0):
        return cls(
            (
                SensingEntry(omega1, Target(r1, phi1, omega1)),
                SensingEntry(omega2, Target(r2, phi2, omega2)),
            ),
            t_f,
        )

    @property
    def omegas(self) -> np.ndarray:
        return np.array([e.omega for e in self.entries])

    def required_transforms(self) -> np.ndarray:
        out = []
        for e in self.entries:
            tg = e.target
            out.append(e.omega * tg.r * (np.sin(tg.phi) + 1j * np.cos(tg.phi)) * np.exp(-1j * e.omega * self.t_f))
        return np.array(out)


@dataclass(frozen=True)
class SensingDrive:
    a: np.ndarray
    b: np.ndarray
    omegas: np.ndarray
    signal: PolyExpSignal
    method: str = "ansatz"

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "omegas": [float(w) for w in self.omegas],
            "a": [float(v) for v in self.a],
            "b": [float(v) for v in self.b],
            "drive": self.signal.to_dict(),
        }


def epsilon(spec: SensingSpec) -> float:
    """Relative spread ``omega_max / omega_min - 1`` of the sensing frequencies."""
    w = spec.omegas
    return float(w.max() / w.min() - 1.0)


def regime_warning(spec: SensingSpec):
    """Message if ``omega1 t_f >= pi / (2 eps)``, else None."""
    w1 = float(spec.omegas.min())
    eps = epsilon(spec)
    if eps <= 0:
        return None
    limit = np.pi / (2 * eps)
    if w1 * spec.t_f >= limit:
        return (
            f"omega1*t_f = {w1 * spec.t_f:.6g} >= pi/(2 eps) = {limit:.6g}: "
            "outside the short-protocol sensing regime"
        )
    return None


def _ansatz_signal(omegas, a, b, t_f):
    sig = PolyExpSignal.zero(t_f)
    for w, aj, bj in zip(omegas, a, b):
        sig = sig + PolyExpSignal.cosine(w, t_f, aj) - PolyExpSignal.sine(w, t_f, bj)
    return PolyExpSignal(sig.terms, t_f, real=True)


def design_sensing_drive(spec: SensingSpec, method: str = "ansatz", warn: bool = True) -> SensingDrive:
    """Drive ``u(t) = sum_j a_j cos(omega_j t) - b_j sin(omega_j t)`` meeting every target.

    ``method="least_norm"`` instead returns the minimum-energy drive meeting the
    same transform conditions (coefficients ``a``, ``b`` are then empty).
    """
    msg = regime_warning(spec)
    if warn and msg:
        warnings.warn(msg, SensingRegimeWarning, stacklevel=2)
    T = spec.t_f
    omegas = spec.omegas
    target = spec.required_transforms()

    if method == "least_norm":
        problem = DesignProblem(
            T, tuple(FourierConstraint(w, 0, v) for w, v in zip(omegas, target)), realify=True
        )
        drive = solve_design(problem)
        return SensingDrive(np.array([]), np.array([]), omegas, drive.signal, method)
    if method != "ansatz":
        raise DomainError(f"unknown sensing method {method!r}")

    N = len(omegas)
    # columns: transforms of cos(w_j t) and -sin(w_j t) at each w_k, split into Re/Im rows
    M = np.zeros((2 * N, 2 * N))
    for j, wj in enumerate(omegas):
        cj = PolyExpSignal.cosine(wj, T)
        sj = PolyExpSignal.sine(wj, T, -1.0)
        for k, wk in enumerate(omegas):
            fc, fs = fourier_transform(cj, wk), fourier_transform(sj, wk)
            M[2 * k, j], M[2 * k + 1, j] = fc.real, fc.imag
            M[2 * k, N + j], M[2 * k + 1, N + j] = fs.real, fs.imag
    rhs = np.column_stack([target.real, target.imag]).ravel()
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise DesignError(f"sensing system is singular (condition {s[0] / max(s[-1], 1e-300):.3e})")
    coef = np.linalg.solve(M, rhs)
    a, b = coef[:N], coef[N:]
    return SensingDrive(a, b, omegas, _ansatz_signal(omegas, a, b, T), method)


def transform_residuals(drive: SensingDrive, spec: SensingSpec) -> np.ndarray:
    got = np.array([fourier_transform(drive.signal, w) for w in spec.omegas])
    return got - spec.required_transforms()


def final_state(drive: SensingDrive, omega: float, steps: int = 1024) -> np.ndarray:
    sys = LtiSystem.oscillator(omega)
    return simulate(sys, drive.signal, steps=steps).final


def frequency_sweep(drive: SensingDrive, omegas, steps: int = 512) -> np.ndarray:
    """Final ``(x, x')`` after driving an oscillator of each frequency from rest."""
    return np.array([final_state(drive, w, steps) for w in np.atleast_1d(omegas)])


def separation_angle(state_a, state_b, omega_ref: float) -> float:
    """Angle between ``(x, x'/omega_ref)`` vectors, in ``[0, pi]``."""
    va = np.array([state_a[0], state_a[1] / omega_ref], dtype=float)
    vb = np.array([state_b[0], state_b[1] / omega_ref], dtype=float)
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0 or nb == 0:
        raise DomainError("separation angle undefined for a zero state")
    # atan2 form stays accurate near 0 and pi
    cross = va[0] * vb[1] - va[1] * vb[0]
    return float(np.arctan2(abs(cross), float(va @ vb)))


def max_excursion(drive: SensingDrive, omega: float, steps: int = 1024) -> float:
    tr = simulate(LtiSystem.oscillator(omega), drive.signal, steps=steps)
    return float(np.max(np.abs(tr.states[:, 0])))


def drive_summary(drive: SensingDrive, spec: SensingSpec) -> dict:
    """Energy and trajectory extent, for comparing ansatz and least-norm drives."""
    return {
        "energy": energy(drive.signal),
        "max_excursion": [max_excursion(drive, w) for w in spec.omegas],
        "sup_norm": float(np.max(np.abs(drive.signal.evaluate(sample_grid(drive.signal))))),
    }


def sweep_csv(omegas, states) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["omega", "x_f", "v_f"])
    for om, s in zip(omegas, states):
        w.writerow([format_float(om), format_float(s[0]), format_float(s[1])])
    return buf.getvalue()


def drive_json(drive: SensingDrive) -> str:
    return json.dumps(drive.to_dict(), indent=2)

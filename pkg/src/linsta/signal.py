"""
Polynomial-exponential signals on a finite window.

A signal is a finite sum ``sum_k p_k(t) exp(s_k t)`` on ``[0, t_f]`` where each
``p_k`` is a complex polynomial and ``s_k`` a complex rate.  The class is closed
under addition, scaling, conjugation and differentiation, and every quantity
needed by the designers (Fourier moments of any order, window energies,
running integrals) has an exact closed form built from the elementary moments

    M_n(delta; T) = int_0^T t^n exp(delta t) dt.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError

MAX_DEGREE = 12
SERIES_SWITCH = 1e-3
SMALL_SERIES_TERMS = 20


# ---------------------------------------------------------------------------
# elementary moments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentValue:
    order: int
    delta: complex
    value: complex


def moments(nmax: int, delta: complex, t_f: float) -> np.ndarray:
    """All moments ``M_0 .. M_nmax`` of ``t^n exp(delta t)`` on ``[0, t_f]``.

    Works with the normalized moments ``m_n = M_n / t_f^{n+1}`` of
    ``s^n exp(z s)`` on ``[0, 1]``, ``z = delta t_f``.  The upward recursion
    ``m_n = (e^z - n m_{n-1}) / z`` amplifies rounding by ``n / |z|`` per step,
    so it serves only orders below ``|z|``; higher orders use the downward
    recursion ``m_{n-1} = (e^z - z m_n) / n``, started far enough above
    ``nmax`` for the starting guess to be damped away.  Tiny ``|z|`` uses a
    truncated power series.
    """
    if nmax < 0:
        raise DomainError("moment order must be nonnegative")
    if not t_f > 0:
        raise DomainError(f"window length must be positive, got {t_f}")
    T = float(t_f)
    z = complex(delta) * T
    az = abs(z)
    m = np.empty(nmax + 1, dtype=complex)

    if az < SERIES_SWITCH:
        k = np.arange(SMALL_SERIES_TERMS)
        coef = np.cumprod(np.concatenate(([1.0 + 0j], z / k[1:])))
        orders = np.arange(nmax + 1)
        m[:] = (coef[None, :] / (orders[:, None] + k[None, :] + 1)).sum(axis=1)
    else:
        ez = np.exp(z)
        n_up = min(nmax + 1, int(math.ceil(az)))
        if n_up > 0:
            m[0] = np.expm1(z) / z
            for n in range(1, n_up):
                m[n] = (ez - n * m[n - 1]) / z
        if n_up <= nmax:
            top = nmax + int(2 * az) + 40
            # for large n the integrand piles up at s = 1: m_n ~ e^z / (n + 1 + ...)
            cur = ez / (top + 1 - z)
            for n in range(top, nmax, -1):
                cur = (ez - z * cur) / n
            m[nmax] = cur
            for n in range(nmax, n_up, -1):
                m[n - 1] = (ez - z * m[n]) / n
    return m * T ** np.arange(1, nmax + 2)


def moment(n: int, delta: complex, t_f: float) -> MomentValue:
    """Closed-form ``int_0^{t_f} t^n exp(delta t) dt``."""
    if n < 0:
        raise DomainError("moment order must be nonnegative")
    value = moments(n, delta, t_f)[n]
    return MomentValue(order=n, delta=complex(delta), value=complex(value))


# ---------------------------------------------------------------------------
# signal class
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """One summand ``(sum_m coeffs[m] t^m) * exp(freq * t)``."""

    coeffs: tuple
    freq: complex

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coeffs) or (0j,)
        if len(coeffs) - 1 > MAX_DEGREE:
            raise DomainError(f"polynomial degree {len(coeffs) - 1} exceeds cap {MAX_DEGREE}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "freq", complex(self.freq))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=complex)


@dataclass(frozen=True)
class PolyExpSignal:
    """Finite sum of complex polynomials times complex exponentials on ``[0, t_f]``.

    ``real`` marks signals known to be real-valued (conjugation symmetric); it
    is metadata only and does not alter evaluation.
    """

    terms: tuple
    t_f: float
    real: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.t_f) and self.t_f > 0):
            raise DomainError(f"window length must be positive and finite, got {self.t_f}")
        terms = tuple(t if isinstance(t, Term) else Term(*t) for t in self.terms)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "t_f", float(self.t_f))

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, t_f: float) -> "PolyExpSignal":
        return cls((), t_f, real=True)

    @classmethod
    def constant(cls, value: complex, t_f: float) -> "PolyExpSignal":
        return cls((Term((value,), 0.0),), t_f, real=bool(np.isreal(value)))

    @classmethod
    def polynomial(cls, coeffs: Sequence[complex], t_f: float) -> "PolyExpSignal":
        """Polynomial with ascending coefficients ``coeffs[0] + coeffs[1] t + ...``."""
        return cls((Term(tuple(coeffs), 0.0),), t_f, real=bool(np.all(np.isreal(coeffs))))

    @classmethod
    def exponential(cls, freq: complex, t_f: float, amplitude: complex = 1.0) -> "PolyExpSignal":
        return cls((Term((amplitude,), freq),), t_f)

    @classmethod
    def cosine(cls, omega: float, t_f: float, amplitude: float = 1.0, phase: float = 0.0):
        """``amplitude * cos(omega t + phase)``."""
        half = 0.5 * amplitude
        return cls(
            (
                Term((half * np.exp(1j * phase),), 1j * omega),
                Term((half * np.exp(-1j * phase),), -1j * omega),
            ),
            t_f,
            real=True,
        )

    @classmethod
    def sine(cls, omega: float, t_f: float, amplitude: float = 1.0, phase: float = 0.0):
        """``amplitude * sin(omega t + phase)``."""
        c = amplitude / 2j
        return cls(
            (
                Term((c * np.exp(1j * phase),), 1j * omega),
                Term((-c * np.exp(-1j * phase),), -1j * omega),
            ),
            t_f,
            real=True,
        )

    # -- basic properties -------------------------------------------------

    @property
    def degree(self) -> int:
        return max((t.degree for t in self.terms), default=0)

    def is_zero(self) -> bool:
        return all(c == 0 for t in self.terms for c in t.coeffs)

    def _check_window(self, t: np.ndarray) -> None:
        slack = 1e-12 * max(1.0, self.t_f)
        if np.any(t < -slack) or np.any(t > self.t_f + slack) or np.any(np.isnan(t)):
            raise DomainError(f"time outside window [0, {self.t_f}]")

    def evaluate(self, t):
        """Value of the signal at ``t`` (scalar or array); always complex."""
        tt = np.asarray(t, dtype=float)
        self._check_window(tt)
        out = np.zeros(tt.shape, dtype=complex)
        for term in self.terms:
            out = out + P.polyval(tt, term.array()) * np.exp(term.freq * tt)
        if np.ndim(t) == 0:
            return complex(out)
        return out

    __call__ = evaluate

    # -- algebra ----------------------------------------------------------

    def _same_window(self, other: "PolyExpSignal") -> None:
        if not math.isclose(self.t_f, other.t_f, rel_tol=1e-14, abs_tol=0.0):
            raise DomainError(f"window mismatch: {self.t_f} vs {other.t_f}")

    def __add__(self, other):
        if isinstance(other, PolyExpSignal):
            self._same_window(other)
            return PolyExpSignal(
                self.terms + other.terms, self.t_f, real=self.real and other.real
            ).simplify()
        if np.isscalar(other):
            return self + PolyExpSignal.constant(other, self.t_f)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        if isinstance(other, PolyExpSignal):
            return self + (-other)
        if np.isscalar(other):
            return self + (-other)
        return NotImplemented

    def __mul__(self, other):
        if np.isscalar(other):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return self.scale(1.0 / other)
        return NotImplemented

    def scale(self, a: complex) -> "PolyExpSignal":
        real = self.real and np.isreal(a)
        terms = tuple(Term(tuple(a * c for c in t.coeffs), t.freq) for t in self.terms)
        return PolyExpSignal(terms, self.t_f, real=bool(real))

    def conj(self) -> "PolyExpSignal":
        terms = tuple(
            Term(tuple(np.conj(c) for c in t.coeffs), np.conj(t.freq)) for t in self.terms
        )
        return PolyExpSignal(terms, self.t_f, real=self.real)

    def real_part(self) -> "PolyExpSignal":
        """``(f + f*) / 2``, flagged real."""
        s = (self + self.conj()).scale(0.5)
        return PolyExpSignal(s.terms, s.t_f, real=True)

    def shift_frequency(self, ds: complex) -> "PolyExpSignal":
        """Multiply by ``exp(ds t)``."""
        terms = tuple(Term(t.coeffs, t.freq + ds) for t in self.terms)
        return PolyExpSignal(terms, self.t_f)

    def simplify(self, atol: float = 0.0) -> "PolyExpSignal":
        """Merge terms sharing a rate and drop vanishing coefficients."""
        merged: dict = {}
        for term in self.terms:
            acc = merged.setdefault(term.freq, np.zeros(MAX_DEGREE + 1, dtype=complex))
            acc[: term.degree + 1] += term.array()
        terms = []
        for freq, acc in merged.items():
            keep = np.nonzero(np.abs(acc) > atol)[0]
            if keep.size == 0:
                continue
            terms.append(Term(tuple(acc[: keep[-1] + 1]), freq))
        return PolyExpSignal(tuple(terms), self.t_f, real=self.real)

    def derivative(self) -> "PolyExpSignal":
        terms = []
        for term in self.terms:
            c = term.array()
            dc = P.polyder(c) if c.size > 1 else np.zeros(1, dtype=complex)
            new = term.freq * c
            new[: dc.size] += dc
            terms.append(Term(tuple(new), term.freq))
        return PolyExpSignal(tuple(terms), self.t_f, real=self.real)

    def second_derivative(self) -> "PolyExpSignal":
        return self.derivative().derivative()

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "terms": [
                {
                    "coeffs": [[c.real, c.imag] for c in t.coeffs],
                    "freq": [t.freq.real, t.freq.imag],
                }
                for t in self.terms
            ],
            "t_f": self.t_f,
            "real": self.real,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PolyExpSignal":
        terms = tuple(
            Term(
                tuple(complex(re, im) for re, im in item["coeffs"]),
                complex(*item["freq"]),
            )
            for item in data["terms"]
        )
        return cls(terms, float(data["t_f"]), real=bool(data.get("real", False)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PolyExpSignal":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# integrals
# ---------------------------------------------------------------------------


def evaluate(sig: PolyExpSignal, t):
    return sig.evaluate(t)


def _weighted_integral(sig: PolyExpSignal, rate: complex, extra_power: int, upper: float) -> complex:
    # int_0^upper t^extra_power sig(t) exp(rate t) dt
    total = 0j
    for term in sig.terms:
        M = moments(term.degree + extra_power, term.freq + rate, upper)
        total += np.dot(term.array(), M[extra_power:])
    return complex(total)


def fourier_derivative(sig: PolyExpSignal, omega: float, m: int = 0) -> complex:
    """``d^m/domega^m`` of the window Fourier transform at ``omega``.

    Equals ``int_0^{t_f} (-i t)^m sig(t) exp(-i omega t) dt`` exactly.
    """
    if m < 0:
        raise DomainError("derivative order must be nonnegative")
    return (-1j) ** m * _weighted_integral(sig, -1j * omega, m, sig.t_f)


def fourier_transform(sig: PolyExpSignal, omega: float) -> complex:
    return fourier_derivative(sig, omega, 0)


def inner(f: PolyExpSignal, g: PolyExpSignal) -> complex:
    """``int_0^{t_f} f(t) conj(g(t)) dt``."""
    f._same_window(g)
    total = 0j
    for a in f.terms:
        ca = a.array()
        for b in g.terms:
            cb = np.conj(b.array())
            M = moments(a.degree + b.degree, a.freq + np.conj(b.freq), f.t_f)
            # sum_{i,j} ca_i cb_j M_{i+j}
            total += np.dot(np.convolve(ca, cb), M)
    return complex(total)


def energy(sig: PolyExpSignal) -> float:
    """``int_0^{t_f} |sig(t)|^2 dt`` (equals the integral of sig^2 for real signals)."""
    return max(inner(sig, sig).real, 0.0)


def second_derivative(sig: PolyExpSignal) -> PolyExpSignal:
    return sig.second_derivative()


def cumulative_integral(sig: PolyExpSignal, times, rate: complex = 0.0) -> np.ndarray:
    """``int_0^t exp(rate s) sig(s) ds`` for every ``t`` in ``times``."""
    tt = np.atleast_1d(np.asarray(times, dtype=float))
    sig._check_window(tt)
    out = np.zeros(tt.shape, dtype=complex)
    for i, t in enumerate(tt):
        if t > 0:
            out[i] = _weighted_integral(sig, rate, 0, float(t))
    return out


def sample_grid(sig: PolyExpSignal, n: int = 2001) -> np.ndarray:
    return np.linspace(0.0, sig.t_f, n)


def sup_norm(sig: PolyExpSignal, n: int = 4001) -> float:
    """Sup-norm estimated on a dense uniform grid."""
    return float(np.max(np.abs(sig.evaluate(sample_grid(sig, n)))))


def imaginary_fraction(sig: PolyExpSignal, n: int = 4001) -> float:
    """Largest |Im sig| relative to the sup-norm, on a dense grid."""
    v = sig.evaluate(sample_grid(sig, n))
    scale = np.max(np.abs(v))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(v.imag)) / scale)


def linear_combination(signals: Iterable[PolyExpSignal], weights: Iterable[complex]) -> PolyExpSignal:
    signals = list(signals)
    if not signals:
        raise DomainError("empty combination")
    out = PolyExpSignal.zero(signals[0].t_f)
    for s, w in zip(signals, weights):
        out = out + s.scale(w)
    return out

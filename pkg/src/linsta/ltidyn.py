"""
Linear time-invariant systems ``x' = A x + B u``.

Controllability tests, the finite-horizon controllability Gramian, the
minimum-energy open-loop drive, and a fixed-step RK4 simulator that serves as
the verification oracle for every designer in the package.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.linalg import expm
from scipy.signal import lfilter

from .errors import DesignError, DomainError, NumericalError
from .signal import PolyExpSignal, Term

RANK_RTOL = 1e-10
GRAMIAN_RTOL = 1e-10
SIM_TOL = 1e-10

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class LtiSystem:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if A.shape[0] != A.shape[1]:
            raise DomainError(f"A must be square, got shape {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise DomainError(f"B has {B.shape[0]} rows, A has {A.shape[0]}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise DomainError("system matrices must be finite")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def q(self) -> int:
        return self.B.shape[1]

    @classmethod
    def oscillator(cls, omega0: float) -> "LtiSystem":
        """``x'' + omega0^2 x = u`` with state ``(x, x')``."""
        return cls([[0.0, 1.0], [-omega0**2, 0.0]], [[0.0], [1.0]])

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "B": self.B.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "LtiSystem":
        return cls(data["A"], data["B"])

    @classmethod
    def from_json(cls, text: str) -> "LtiSystem":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), n)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = self.states.shape[1]
        w.writerow(["t"] + [f"x{i + 1}" for i in range(n)])
        for t, x in zip(self.times, self.states):
            w.writerow([format_float(t)] + [format_float(v) for v in x])
        return buf.getvalue()


def format_float(v: float) -> str:
    return format(float(v), ".17g")


# ---------------------------------------------------------------------------
# controllability
# ---------------------------------------------------------------------------


def controllability_matrix(sys: LtiSystem) -> np.ndarray:
    blocks = [sys.B]
    for _ in range(sys.n - 1):
        blocks.append(sys.A @ blocks[-1])
    return np.hstack(blocks)


def is_controllable(sys: LtiSystem) -> bool:
    s = np.linalg.svd(controllability_matrix(sys), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return False
    return int(np.sum(s > RANK_RTOL * s[0])) == sys.n


def gramian(sys: LtiSystem, t_f: float, max_refinements: int = 14) -> np.ndarray:
    """Controllability Gramian ``int_0^t_f e^{A s} B B^T e^{A^T s} ds``.

    Composite 8-point Gauss-Legendre on a doubling panel count until the
    relative Frobenius change falls below ``GRAMIAN_RTOL``.
    """
    if not t_f > 0:
        raise DomainError(f"t_f must be positive, got {t_f}")
    BBt = sys.B @ sys.B.T
    if not np.any(BBt):
        return np.zeros((sys.n, sys.n))

    def composite(panels: int) -> np.ndarray:
        h = t_f / panels
        offsets = 0.5 * h * (_GL_NODES + 1.0)
        node_exp = [expm(sys.A * o) for o in offsets]
        step = expm(sys.A * h)
        start = np.eye(sys.n)
        W = np.zeros((sys.n, sys.n))
        for _ in range(panels):
            for E, w in zip(node_exp, _GL_WEIGHTS):
                F = start @ E
                W += w * (F @ BBt @ F.T)
            start = start @ step
        return 0.5 * h * W

    panels = max(1, int(np.ceil(t_f * max(1.0, np.abs(np.linalg.eigvals(sys.A)).max()) / 2)))
    prev = composite(panels)
    for _ in range(max_refinements):
        panels *= 2
        cur = composite(panels)
        if np.linalg.norm(cur - prev) <= GRAMIAN_RTOL * np.linalg.norm(cur):
            return 0.5 * (cur + cur.T)
        prev = cur
    raise NumericalError("Gramian quadrature did not converge")


# ---------------------------------------------------------------------------
# minimum-energy drive
# ---------------------------------------------------------------------------


def _adjoint_signal_eig(sys, mu, t_f):
    lam, V = np.linalg.eig(sys.A.T)
    if np.linalg.cond(V) > 1e8:
        return None
    coef = np.linalg.solve(V, mu.astype(complex))
    BtV = sys.B.T @ V
    drives = []
    for c in range(sys.q):
        terms = [
            Term((BtV[c, k] * coef[k] * np.exp(lam[k] * t_f),), -lam[k])
            for k in range(sys.n)
            if BtV[c, k] * coef[k] != 0
        ]
        drives.append(PolyExpSignal(tuple(terms), t_f, real=True).simplify())
    return drives


def _cluster_eigenvalues(lam, tol=1e-6):
    # a defective matrix shows its repeated eigenvalue split by ~sqrt(eps)
    groups = []
    for v in lam:
        for g in groups:
            if abs(g[0] - v) <= tol * max(1.0, abs(v)):
                g.append(v)
                break
        else:
            groups.append([v])
    return [(np.mean(g), len(g)) for g in groups]


def _adjoint_signal_jordan(sys, mu, t_f, samples=96):
    # defective A: fit the exact adjoint solution in the basis t^j e^{-lam t}
    groups = _cluster_eigenvalues(np.linalg.eigvals(sys.A))
    t = 0.5 * t_f * (1 - np.cos(np.pi * (np.arange(samples) + 0.5) / samples))
    exact = np.array([sys.B.T @ expm(sys.A.T * (t_f - ti)) @ mu for ti in t])  # (samples, q)
    cols, keys = [], []
    for lam, mult in groups:
        for j in range(mult):
            cols.append((t / t_f) ** j * np.exp(-lam * t))
            keys.append((lam, j))
    basis = np.array(cols).T
    drives = []
    for c in range(sys.q):
        sol, *_ = np.linalg.lstsq(basis, exact[:, c].astype(complex), rcond=None)
        resid = np.max(np.abs(basis @ sol - exact[:, c]))
        if resid > 1e-8 * max(1.0, np.max(np.abs(exact[:, c]))):
            raise NumericalError(f"defective-system drive fit residual {resid:.3e}")
        by_lam: dict = {}
        for (lam, j), s in zip(keys, sol):
            arr = by_lam.setdefault(lam, [0j] * (j + 1))
            if len(arr) <= j:
                arr.extend([0j] * (j + 1 - len(arr)))
            arr[j] += s / t_f**j
        terms = [Term(tuple(v), -lam) for lam, v in by_lam.items()]
        drives.append(PolyExpSignal(tuple(terms), t_f, real=True).simplify())
    return drives


def min_energy_drive(sys: LtiSystem, x0, xf, t_f: float) -> list:
    """Minimum-energy drive steering ``x0`` to ``xf`` in time ``t_f``.

    Returns one PolyExpSignal per control channel.  The drive is
    ``u(t) = B^T exp(A^T (t_f - t)) mu`` with ``mu = W(t_f)^{-1}(xf - e^{A t_f} x0)``,
    written in closed form from the eigen-decomposition of ``A``.
    """
    if not t_f > 0:
        raise DomainError(f"t_f must be positive, got {t_f}")
    if not is_controllable(sys):
        raise DesignError("system is not controllable")
    x0 = np.asarray(x0, dtype=float).reshape(sys.n)
    xf = np.asarray(xf, dtype=float).reshape(sys.n)
    W = gramian(sys, t_f)
    mu = np.linalg.solve(W, xf - expm(sys.A * t_f) @ x0)
    if not np.any(mu):
        return [PolyExpSignal.zero(t_f) for _ in range(sys.q)]
    drives = _adjoint_signal_eig(sys, mu, t_f)
    if drives is None:
        drives = _adjoint_signal_jordan(sys, mu, t_f)
    return drives


def sensitivity_system(sys: LtiSystem, dA, dB) -> LtiSystem:
    """Append the parameter sensitivity ``s = dx/dtheta`` to the state.

    ``s' = A s + dA x + dB u``; the augmented pair is ``[[A, 0], [dA, A]]``, ``[B; dB]``.
    Steering the augmented state to ``(xf, 0)`` gives a drive whose final state
    is first-order insensitive to ``theta``.
    """
    n = sys.n
    dA = np.asarray(dA, dtype=float).reshape(n, n)
    dB = np.asarray(dB, dtype=float).reshape(n, sys.q)
    A = np.block([[sys.A, np.zeros((n, n))], [dA, sys.A]])
    return LtiSystem(A, np.vstack([sys.B, dB]))


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


def _rk4_step(A, h, x, b0, bh, b1):
    k1 = A @ x + b0
    k2 = A @ (x + 0.5 * h * k1) + bh
    k3 = A @ (x + 0.5 * h * k2) + bh
    k4 = A @ (x + h * k3) + b1
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _rk4_maps(A, h):
    # one RK4 step on x' = A x + b(t) is linear in (x, b(t), b(t+h/2), b(t+h))
    I, Z = np.eye(A.shape[0]), np.zeros_like(A)
    return (
        _rk4_step(A, h, I, Z, Z, Z),
        _rk4_step(A, h, Z, I, Z, Z),
        _rk4_step(A, h, Z, Z, I, Z),
        _rk4_step(A, h, Z, Z, Z, I),
    )


def _linear_recurrence(P, g, x0):
    """States of ``x_{k+1} = P x_k + g_k`` for ``k = 0..len(g)``."""
    N, n = g.shape
    lam, V = np.linalg.eig(P)
    if np.linalg.cond(V) < 1e6:
        Vinv = np.linalg.inv(V)
        y0 = Vinv @ x0
        h = g @ Vinv.T
        Y = np.empty((N + 1, n), dtype=complex)
        for i in range(n):
            seq = np.concatenate(([y0[i]], h[:, i]))
            Y[:, i] = lfilter([1.0], [1.0, -lam[i]], seq)
        return (Y @ V.T).real
    X = np.empty((N + 1, n))
    X[0] = x0
    for k in range(N):
        X[k + 1] = P @ X[k] + g[k]
    return X


def _drive_channels(sys, drive):
    if isinstance(drive, PolyExpSignal):
        drive = [drive]
    drive = list(drive)
    if len(drive) != sys.q:
        raise DomainError(f"system has {sys.q} control channels, got {len(drive)} drives")
    return drive


def _rk4_run(sys, drives, x0, t_f, steps):
    h = t_f / steps
    t_half = np.linspace(0.0, t_f, 2 * steps + 1)
    U = np.array([d.evaluate(t_half).real for d in drives])  # (q, 2N+1)
    Bu = (sys.B @ U).T
    P, Q0, Qh, Q1 = _rk4_maps(sys.A, h)
    g = Bu[0:-1:2] @ Q0.T + Bu[1::2] @ Qh.T + Bu[2::2] @ Q1.T
    X = _linear_recurrence(P, g, x0)
    if not np.all(np.isfinite(X)):
        raise NumericalError("non-finite state during integration")
    return X


def simulate(
    sys: LtiSystem,
    drive: Union[PolyExpSignal, Sequence[PolyExpSignal]],
    x0=None,
    steps: int = 1024,
    t_f: float = None,
    tol: float = SIM_TOL,
    max_steps: int = 2**21,
) -> Trajectory:
    """Integrate ``x' = A x + B u(t)`` with classic fixed-step RK4.

    The step count is doubled until halving the step moves the final state
    by less than ``tol`` (relative to ``max(1, |x|)``); the returned trajectory
    is sampled on the requested ``steps + 1`` grid from the finest run.
    """
    if steps < 2:
        raise DomainError("steps must be at least 2")
    drives = _drive_channels(sys, drive)
    t_f = drives[0].t_f if t_f is None else float(t_f)
    x0 = np.zeros(sys.n) if x0 is None else np.asarray(x0, dtype=float).reshape(sys.n)

    cur_steps = steps
    # start inside the RK4 stability region (|h lambda| <= 1) so stiff modes cannot blow up
    rho = float(np.max(np.abs(np.linalg.eigvals(sys.A)))) if sys.n else 0.0
    while t_f / cur_steps * rho > 1.0 and 2 * cur_steps <= max_steps:
        cur_steps *= 2
    X = _rk4_run(sys, drives, x0, t_f, cur_steps)
    while True:
        if 2 * cur_steps > max_steps:
            raise NumericalError(f"RK4 did not converge within {max_steps} steps")
        X2 = _rk4_run(sys, drives, x0, t_f, 2 * cur_steps)
        diff = np.linalg.norm(X2[-1] - X[-1])
        cur_steps *= 2
        X = X2
        if diff <= tol * max(1.0, np.linalg.norm(X2[-1])):
            break
    stride = cur_steps // steps
    return Trajectory(np.linspace(0.0, t_f, steps + 1), X[::stride].copy())


def final_excitation(omega: float, final_state, target) -> float:
    """Residual oscillator energy per unit mass relative to a phase-space target.

    ``target`` is either a pair ``(x, v)`` or an object with ``x_f``/``v_f``.
    """
    x, v = np.asarray(final_state, dtype=float)[:2]
    if hasattr(target, "x_f"):
        xt, vt = target.x_f, target.v_f
    else:
        xt, vt = target
    return 0.5 * (v - vt) ** 2 + 0.5 * omega**2 * (x - xt) ** 2

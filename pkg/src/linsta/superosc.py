"""
Least-norm drive synthesis under Fourier-derivative constraints.

The problem is: minimize ``int_0^t_f |f|^2 dt`` subject to

    int_0^t_f (-i t)^m f(t) exp(-i omega t) dt = value      (Fourier constraints)
    f(t*) = value,  f'(t*) = value,  t* in {0, t_f}          (point constraints)

Each Fourier constraint is the inner product of ``f`` with the representer
``(i t)^m exp(i omega t)``, so without point constraints the minimizer lies in
the span of the representers and the multipliers solve a Hermitian Gram
system.  Point evaluations are not bounded on L2; they are honored on a finite
basis (representers plus auxiliary exponentials) through a KKT saddle-point
system.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DesignError, DomainError, IllConditionedError, InconsistencyError, InfeasibleError
from .oscillator import RobustnessSpec, excitation_amplitude, excitation_spectrum, general_constraint_values
from .signal import MAX_DEGREE, PolyExpSignal, Term, energy, fourier_derivative, inner, moments

COND_LIMIT = 1e12
RESIDUAL_TOL = 1e-9
REALNESS_TOL = 1e-12
MAX_AUX_PAIRS = 8


@dataclass(frozen=True)
class FourierConstraint:
    omega: float
    order: int
    value: complex

    def __post_init__(self):
        if not 0 <= self.order <= MAX_DEGREE:
            raise DomainError(f"constraint order must lie in [0, {MAX_DEGREE}], got {self.order}")
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "value", complex(self.value))

    def key(self):
        return (self.omega, self.order)

    def representer(self, t_f: float) -> PolyExpSignal:
        """``(i t)^m exp(i omega t)``."""
        coeffs = (0j,) * self.order + (1j**self.order,)
        return PolyExpSignal((Term(coeffs, 1j * self.omega),), t_f)

    def apply(self, sig: PolyExpSignal) -> complex:
        return fourier_derivative(sig, self.omega, self.order)


@dataclass(frozen=True)
class PointConstraint:
    """``f^{(derivative)}(time) = value`` at a window endpoint."""

    time: float
    derivative: int
    value: float

    def __post_init__(self):
        if self.derivative not in (0, 1):
            raise DomainError("point constraints support derivative order 0 or 1")

    def key(self):
        return (self.time, self.derivative)

    def apply(self, sig: PolyExpSignal) -> complex:
        s = sig.derivative() if self.derivative else sig
        return s.evaluate(self.time)


@dataclass(frozen=True)
class DesignProblem:
    t_f: float
    fourier: tuple = ()
    points: tuple = ()
    aux_frequencies: tuple = ()
    realify: bool = False
    mirrored: bool = False

    def __post_init__(self):
        if not self.t_f > 0:
            raise DomainError(f"t_f must be positive, got {self.t_f}")
        object.__setattr__(self, "fourier", tuple(self.fourier))
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "aux_frequencies", tuple(float(w) for w in self.aux_frequencies))
        for p in self.points:
            if not (p.time == 0 or np.isclose(p.time, self.t_f, rtol=1e-14, atol=0)):
                raise DomainError(f"point constraint at t={p.time} is not a window endpoint")

    @property
    def constraints(self) -> tuple:
        return self.fourier + self.points


@dataclass(frozen=True)
class RobustDrive:
    signal: PolyExpSignal
    multipliers: np.ndarray
    energy: float
    residuals: np.ndarray
    problem: DesignProblem
    trap_position: Optional[PolyExpSignal] = None
    coefficients: Optional[np.ndarray] = field(default=None, repr=False)

    def max_relative_residual(self) -> float:
        vals = np.array([c.value for c in self.problem.constraints], dtype=complex)
        scale = max(1.0, float(np.max(np.abs(vals)))) if vals.size else 1.0
        return float(np.max(np.abs(self.residuals))) / scale if self.residuals.size else 0.0


# ---------------------------------------------------------------------------
# realification
# ---------------------------------------------------------------------------


def mirror_augment(problem: DesignProblem) -> DesignProblem:
    """Add the conjugate-mirror of every Fourier constraint and auxiliary frequency.

    A real ``f`` satisfies ``F^{(m)}(-omega) = (-1)^m conj(F^{(m)}(omega))``, so the
    mirrored set is what any real solution obeys anyway; the least-norm solution
    of the mirrored problem is then real by uniqueness.
    """
    if not problem.realify:
        raise DomainError("mirror_augment requires the realify flag")
    if problem.mirrored:
        return problem
    out = list(problem.fourier)
    seen = {c.key() for c in out}
    for c in problem.fourier:
        mirrored_value = (-1) ** c.order * np.conj(c.value)
        if c.omega == 0:
            if not np.isclose(mirrored_value, c.value, rtol=1e-12, atol=1e-300):
                raise InconsistencyError(
                    f"constraint at omega=0, order {c.order} has value {c.value} "
                    "incompatible with a real drive"
                )
            continue
        m = FourierConstraint(-c.omega, c.order, mirrored_value)
        if m.key() in seen:
            match = next(x for x in out if x.key() == m.key())
            if not np.isclose(match.value, m.value, rtol=1e-12):
                raise InconsistencyError(
                    f"constraints at +/-{abs(c.omega)} (order {c.order}) are not conjugate-symmetric"
                )
            continue
        out.append(m)
        seen.add(m.key())
    aux = list(problem.aux_frequencies)
    for w in problem.aux_frequencies:
        if w != 0 and -w not in aux:
            aux.append(-w)
    return replace(problem, fourier=tuple(out), aux_frequencies=tuple(aux), mirrored=True)


# ---------------------------------------------------------------------------
# Gram system
# ---------------------------------------------------------------------------


def _check_duplicates(problem: DesignProblem) -> None:
    for group in (problem.fourier, problem.points):
        keys = [c.key() for c in group]
        if len(set(keys)) != len(keys):
            dup = next(k for k in keys if keys.count(k) > 1)
            values = {c.value for c in group if c.key() == dup}
            if len(values) > 1 and group is problem.points:
                raise InfeasibleError(f"contradictory point constraints at (t, order) = {dup}")
            raise DesignError(f"duplicate constraint {dup}")


def _conditioning(M: np.ndarray, labels) -> None:
    d = np.sqrt(np.abs(np.diag(M)).astype(float))
    if np.any(d == 0):
        k = int(np.argmin(d))
        raise IllConditionedError(f"constraint {labels[k]} has a vanishing representer", pair=(k, k))
    N = M / np.outer(d, d)
    cond = np.linalg.cond(N)
    if cond > COND_LIMIT or not np.isfinite(cond):
        off = np.abs(N - np.diag(np.diag(N)))
        i, j = np.unravel_index(int(np.argmax(off)), off.shape)
        raise IllConditionedError(
            f"Gram matrix condition {cond:.3e} exceeds {COND_LIMIT:.0e}; "
            f"nearly dependent pair: {labels[i]} and {labels[j]}",
            pair=(labels[i], labels[j]),
            condition=cond,
        )


def gram_matrix(problem: DesignProblem, check: bool = True) -> np.ndarray:
    """Hermitian Gram matrix of the Fourier-constraint representers.

    ``G[k, l] = (-i)^{m_k} i^{m_l} M_{m_k + m_l}(i (omega_l - omega_k); t_f)``.
    """
    cs = problem.fourier
    n = len(cs)
    G = np.empty((n, n), dtype=complex)
    for k, ck in enumerate(cs):
        for l in range(k, n):
            cl = cs[l]
            mom = moments(ck.order + cl.order, 1j * (cl.omega - ck.omega), problem.t_f)[-1]
            G[k, l] = (-1j) ** ck.order * (1j) ** cl.order * mom
            G[l, k] = np.conj(G[k, l])
    if check and n:
        _conditioning(G, [c.key() for c in cs])
    return G


def _signal_from_basis(basis, coeffs, t_f, real):
    terms = []
    for b, c in zip(basis, coeffs):
        for term in b.terms:
            terms.append(Term(tuple(c * x for x in term.coeffs), term.freq))
    return PolyExpSignal(tuple(terms), t_f, real=real).simplify()


def _residuals(sig, problem):
    return np.array([c.apply(sig) - c.value for c in problem.constraints], dtype=complex)


def _full_row_rank(C: np.ndarray) -> bool:
    if C.shape[0] > C.shape[1]:
        return False
    s = np.linalg.svd(C, compute_uv=False)
    return s.size > 0 and s[-1] > 1e-10 * s[0]


def _solve_kkt(problem):
    basis = [c.representer(problem.t_f) for c in problem.fourier]
    basis += [PolyExpSignal.exponential(1j * w, problem.t_f) for w in problem.aux_frequencies]
    labels = [c.key() for c in problem.fourier] + [("aux", w) for w in problem.aux_frequencies]
    nb = len(basis)
    H = np.empty((nb, nb), dtype=complex)
    for i, bi in enumerate(basis):
        for j, bj in enumerate(basis):
            if j < i:
                H[i, j] = np.conj(H[j, i])
                continue
            H[i, j] = inner(bj, bi)
    _conditioning(H, labels)
    cons = problem.constraints
    C = np.array([[c.apply(b) for b in basis] for c in cons], dtype=complex)
    b = np.array([c.value for c in cons], dtype=complex)
    if not _full_row_rank(C):
        raise InfeasibleError(
            f"{len(cons)} constraints cannot be met independently on a {nb}-function basis"
        )
    nc = len(cons)
    K = np.zeros((nb + nc, nb + nc), dtype=complex)
    K[:nb, :nb] = H
    K[:nb, nb:] = -C.conj().T
    K[nb:, :nb] = C
    rhs = np.concatenate([np.zeros(nb, dtype=complex), b])
    sol = np.linalg.solve(K, rhs)
    return basis, sol[:nb], sol[nb:]


def solve_design(problem: DesignProblem, realify_mode: str = "mirror") -> RobustDrive:
    """Minimum-energy drive meeting every constraint of ``problem``.

    ``realify_mode`` applies when ``problem.realify`` is set: ``"mirror"``
    solves the conjugate-mirrored problem (exactly real, constraints exact);
    ``"average"`` solves the complex problem and returns ``(f + f*) / 2``,
    which in general no longer meets the constraints exactly.
    """
    if realify_mode not in ("mirror", "average"):
        raise DomainError(f"unknown realify mode {realify_mode!r}")
    original = problem
    if problem.realify and realify_mode == "mirror":
        problem = mirror_augment(problem)
    _check_duplicates(problem)
    t_f = problem.t_f
    values = np.array([c.value for c in problem.constraints], dtype=complex)

    if problem.points or problem.aux_frequencies:
        basis, coeffs, mult = _solve_kkt(problem)
    else:
        basis = [c.representer(t_f) for c in problem.fourier]
        if not basis:
            raise DesignError("design problem has no constraints")
        G = gram_matrix(problem)
        coeffs = np.linalg.solve(G, values)
        mult = coeffs

    real = problem.realify and realify_mode == "mirror"
    sig = _signal_from_basis(basis, coeffs, t_f, real)
    if not np.any(values):
        sig = PolyExpSignal.zero(t_f)
    if problem.realify and realify_mode == "average":
        sig = sig.real_part()
        problem = original
    res = _residuals(sig, problem)
    return RobustDrive(
        signal=sig,
        multipliers=np.asarray(mult),
        energy=energy(sig),
        residuals=res,
        problem=problem,
        coefficients=np.asarray(coeffs),
    )


# ---------------------------------------------------------------------------
# oscillator pipeline
# ---------------------------------------------------------------------------


def boundary_constraints(spec: RobustnessSpec) -> tuple:
    """Trap at rest at the origin initially and at ``x_f`` finally, in units of ``u``."""
    w2 = spec.omega0**2
    return (
        PointConstraint(0.0, 0, 0.0),
        PointConstraint(0.0, 1, 0.0),
        PointConstraint(spec.t_f, 0, w2 * spec.target.x_f),
        PointConstraint(spec.t_f, 1, 0.0),
    )


def robust_problem(spec: RobustnessSpec, normalization: str = "derived", aux_pairs: int = 0) -> DesignProblem:
    values = general_constraint_values(spec, normalization)
    fourier = tuple(FourierConstraint(spec.omega0, m, v) for m, v in enumerate(values))
    points = boundary_constraints(spec) if spec.include_boundary_conditions else ()
    aux = tuple(k * spec.omega0 for k in range(2, 2 + aux_pairs))
    return DesignProblem(spec.t_f, fourier, points, aux, realify=True)


def design_robust_transport(
    spec: RobustnessSpec,
    realify_mode: str = "mirror",
    normalization: str = "derived",
) -> RobustDrive:
    """Robust drive of order ``spec.order`` for the oscillator target in ``spec``.

    The returned ``signal`` is the force ``u(t)``; ``trap_position`` is
    ``u / omega0^2``.  With boundary conditions the basis is widened by
    exponentials at ``+-2 omega0, +-3 omega0, ...`` until the endpoint
    conditions become satisfiable.
    """
    if spec.order > 4:
        raise DomainError("robustness orders above 4 are not supported")
    if not spec.include_boundary_conditions:
        drive = solve_design(robust_problem(spec, normalization), realify_mode)
    else:
        last = None
        for pairs in range(1, MAX_AUX_PAIRS + 1):
            try:
                drive = solve_design(robust_problem(spec, normalization, pairs), realify_mode)
                break
            except InfeasibleError as exc:
                last = exc
        else:
            raise InfeasibleError(f"boundary conditions infeasible with {MAX_AUX_PAIRS} auxiliary pairs: {last}")
    return replace(drive, trap_position=drive.signal / spec.omega0**2)


def flatness_order(drive: RobustDrive, spec: RobustnessSpec, tol: float = 1e-6, qmax: int = 6) -> int:
    """Number of leading frequency derivatives of the excitation amplitude that vanish at omega0.

    Returns ``p + 1`` when ``G, G', ..., G^{(p)}`` are all below ``tol`` (so a
    drive of robustness order ``p`` scores ``p + 1``); 0 if ``G(omega0)`` itself is not.
    """
    x0 = drive.trap_position if drive.trap_position is not None else drive.signal / spec.omega0**2
    scale = max(1.0, spec.target.r * spec.omega0)
    for q in range(qmax + 1):
        g = excitation_amplitude(x0, spec.target, spec.omega0, q)
        if abs(g) > tol * scale * spec.t_f**q:
            return q
    return qmax + 1


def design_report(drive: RobustDrive, spec: Optional[RobustnessSpec] = None, final_state=None) -> dict:
    """JSON-ready summary of a design and its verification residuals."""
    cons = []
    for c in drive.problem.constraints:
        if isinstance(c, FourierConstraint):
            cons.append({"kind": "fourier", "omega": c.omega, "order": c.order, "value": [c.value.real, c.value.imag]})
        else:
            cons.append({"kind": "point", "time": c.time, "derivative": c.derivative, "value": float(np.real(c.value))})
    report = {
        "constraints": cons,
        "multipliers": [[complex(m).real, complex(m).imag] for m in drive.multipliers],
        "energy": drive.energy,
        "residuals": [[r.real, r.imag] for r in drive.residuals],
        "drive": drive.signal.to_dict(),
    }
    if drive.trap_position is not None:
        report["trap_position"] = drive.trap_position.to_dict()
    if spec is not None:
        report["spec"] = {
            "order": spec.order,
            "omega0": spec.omega0,
            "r": spec.target.r,
            "phi": spec.target.phi,
            "t_f": spec.t_f,
            "include_boundary_conditions": spec.include_boundary_conditions,
        }
        x0 = drive.trap_position if drive.trap_position is not None else drive.signal / spec.omega0**2
        report["verification"] = {
            "flatness_order": flatness_order(drive, spec),
            "deltaE_at_omega0": float(excitation_spectrum(x0, spec.target, [spec.omega0])[0]),
        }
        if final_state is not None:
            err = np.asarray(final_state) - spec.target.state
            report["verification"]["final_state_error"] = float(
                np.hypot(err[0], err[1] / spec.omega0)
            )
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2)

"""Lindblad generator, time evolution and steady state."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.lapack import zgecon

from . import integrators
from .hilbert import DensityMatrix, HilbertSpec, Operator, fock_populations, internal_populations
from .integrators import IntegrationError

log = logging.getLogger(__name__)

MAX_TRACE_DRIFT = 1e-8
MAX_HERM_ERROR = 1e-10
MIN_EIGENVALUE = -1e-8
MAX_LEAKAGE = 1e-5


class LeakageError(RuntimeError):
    """Population reached the top of the Fock truncation."""


class TraceDriftError(RuntimeError):
    """Propagated state lost normalisation beyond tolerance."""


class SingularSteadyStateError(RuntimeError):
    """The generator does not have a unique stationary state."""


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian plus collapse operators with rates absorbed into their amplitudes."""

    H: Operator
    collapses: tuple[Operator, ...] = ()
    label: str = ""

    def __post_init__(self):
        cs = tuple(self.collapses)
        object.__setattr__(self, "collapses", cs)
        for c in cs:
            if c.spec != self.H.spec:
                raise ValueError(f"collapse acts on {c.spec}, Hamiltonian on {self.H.spec}")
        if not self.H.is_hermitian(1e-12):
            raise ValueError(f"Hamiltonian not Hermitian (error {self.H.hermiticity_error():.3e})")

    @property
    def spec(self) -> HilbertSpec:
        return self.H.spec

    def decay_operator(self) -> np.ndarray:
        """``sum_j C_j^dagger C_j``."""
        k = np.zeros((self.spec.dim,) * 2, dtype=complex)
        for c in self.collapses:
            k += c.data.conj().T @ c.data
        return k


@dataclass
class Trajectory:
    times: np.ndarray
    nbar: np.ndarray
    internal_pops: np.ndarray  # (n_samples, internal_dim)
    trace_err: np.ndarray
    herm_err: np.ndarray
    leakage: np.ndarray  # population of the two highest Fock levels
    min_eig: dict[float, float] = field(default_factory=dict)  # spot checks
    rho_final: np.ndarray | None = field(default=None, repr=False)
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")


@dataclass
class SteadyStateResult:
    rho: DensityMatrix
    residual: float
    nbar_st: float
    generator_norm: float
    rcond: float


def lindblad_rhs(model: LindbladModel, rho: Operator) -> Operator:
    """``-i[H, rho] + sum_j (C rho C^dagger - {C^dagger C, rho}/2)``."""
    if rho.spec != model.spec:
        raise ValueError(f"dimension mismatch: state on {rho.spec}, model on {model.spec}")
    h, r = model.H.data, rho.data
    out = -1j * (h @ r - r @ h)
    for c in model.collapses:
        cd = c.data
        kd = cd.conj().T @ cd
        out += cd @ r @ cd.conj().T - 0.5 * (kd @ r + r @ kd)
    return Operator(model.spec, out)


def liouvillian_matrix(model: LindbladModel) -> np.ndarray:
    """Generator as a ``d^2 x d^2`` matrix acting on row-major ``vec(rho)``."""
    d = model.spec.dim
    eye = np.eye(d)
    h = model.H.data
    k = model.decay_operator()
    heff = h - 0.5j * k
    L = -1j * np.kron(heff, eye) + 1j * np.kron(eye, heff.conj())
    for c in model.collapses:
        L += np.kron(c.data, c.data.conj())
    return L


def _spot_indices(n: int, k: int = 5) -> set[int]:
    return set(np.unique(np.linspace(0, n - 1, k).round().astype(int)).tolist())


def evolve(
    model: LindbladModel,
    rho0: DensityMatrix,
    t_grid,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
    method: str = "auto",
    max_step: float = np.inf,
    check_leakage: bool = True,
) -> Trajectory:
    """Propagate ``rho0`` and sample observables on ``t_grid``.

    Parameters
    ----------
    method : {"auto", "exprk", "rk45"}
        ``exprk`` is the exponential Runge--Kutta propagator (exact in the
        no-jump part); ``rk45`` is scipy's Dormand--Prince.  ``auto`` uses
        ``exprk`` unless the no-jump generator is ill-conditioned.

    Raises
    ------
    IntegrationError, LeakageError, TraceDriftError
    """
    if rho0.spec != model.spec:
        raise ValueError(f"dimension mismatch: state on {rho0.spec}, model on {model.spec}")
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) < 2:
        raise ValueError("t_grid needs at least two samples")
    if t[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    if np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if method not in ("auto", "exprk", "rk45"):
        raise ValueError(f"unknown method {method!r}")

    spec = model.spec
    H = model.H.data
    cs = [c.data for c in model.collapses]
    stats = {}
    samples = None
    prop = None
    if method in ("auto", "exprk"):
        try:
            prop = integrators.ExponentialRK(H, cs, spec.internal_dim, spec.fock_levels)
        except np.linalg.LinAlgError as exc:
            if method == "exprk":
                raise IntegrationError(str(exc)) from exc
            log.info("falling back to RK45: %s", exc)
    if prop is not None:
        y0 = prop.to_eig(rho0.data)
        gen = prop.integrate(y0, t, rtol=rel_tol, atol=abs_tol, max_step=max_step)
        samples = (prop.from_eig(y) for y in gen)
        stats["method"] = "exprk"
    else:
        arr, nfev = integrators.rk45_samples(H, cs, spec.internal_dim, spec.fock_levels,
                                             rho0.data, t, rtol=rel_tol, atol=abs_tol)
        samples = iter(arr[1:])
        stats["method"] = "rk45"
        stats["nfev"] = nfev

    n = len(t)
    ns = np.arange(spec.fock_levels, dtype=float)
    nbar = np.empty(n)
    pops = np.empty((n, spec.internal_dim))
    trace_err = np.empty(n)
    herm = np.empty(n)
    leak = np.empty(n)
    spots = _spot_indices(n)
    min_eig = {}
    rho = rho0.data
    for i in range(n):
        if i > 0:
            rho = next(samples)
        fp = fock_populations(spec, rho)
        nbar[i] = fp @ ns
        pops[i] = internal_populations(spec, rho)
        trace_err[i] = abs(np.trace(rho) - 1.0)
        herm[i] = np.max(np.abs(rho - rho.conj().T))
        leak[i] = fp[-2:].sum()
        if i in spots:
            min_eig[float(t[i])] = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
        if trace_err[i] > MAX_TRACE_DRIFT:
            raise TraceDriftError(f"trace drift {trace_err[i]:.3e} at t={t[i]:g}")
        if check_leakage and leak[i] > MAX_LEAKAGE:
            raise LeakageError(
                f"top two Fock levels hold {leak[i]:.2e} at t={t[i]:g}; "
                f"increase fock_levels beyond {spec.fock_levels}"
            )
    if prop is not None:
        stats.update(nsteps=prop.nsteps, nrejected=prop.nrejected, nfev=prop.nfev,
                     eigvec_cond=prop.cond)
    return Trajectory(t, nbar, pops, trace_err, herm, leak, min_eig, rho, stats)


def steady_state(model: LindbladModel, max_dim: int = 2500) -> SteadyStateResult:
    """Unique stationary state by a direct solve of the vectorised generator.

    One row of ``L vec(rho) = 0`` is replaced by ``Tr rho = 1``.  The solution is
    re-Hermitised and eigenvalues below ``-1e-10`` are clipped.
    """
    if not model.collapses:
        raise SingularSteadyStateError("model has no collapse operators; the steady state is not unique")
    d = model.spec.dim
    if d * d > max_dim * max_dim:
        raise ValueError(f"dimension {d} too large for a dense steady-state solve")
    L = liouvillian_matrix(model)
    lnorm = float(np.abs(L).sum(axis=0).max())
    A = L.copy()
    A[0, :] = 0.0
    A[0, np.arange(d) * (d + 1)] = 1.0
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    lu, piv = lu_factor(A, check_finite=False)
    anorm = float(np.abs(A).sum(axis=0).max())
    rcond, info = zgecon(lu, anorm)
    if info != 0 or not np.isfinite(rcond) or rcond < 1e-14:
        raise SingularSteadyStateError(
            f"steady-state system is singular (rcond={rcond:.2e}); the stationary state is not unique"
        )
    x = lu_solve((lu, piv), b, check_finite=False).reshape(d, d)
    x = 0.5 * (x + x.conj().T)
    lam, v = np.linalg.eigh(x)
    if lam.min() < -1e-10:
        lam = np.clip(lam, 0.0, None)
        x = (v * lam) @ v.conj().T
    x = x / np.trace(x).real
    rho = DensityMatrix(model.spec, x, trace_tol=1e-10, herm_tol=1e-12)
    residual = float(np.abs(lindblad_rhs(model, rho).data).sum(axis=0).max())
    nbar = float(fock_populations(model.spec, x) @ np.arange(model.spec.fock_levels))
    return SteadyStateResult(rho, residual, nbar, lnorm, float(rcond))


__all__ = [
    "IntegrationError",
    "LeakageError",
    "LindbladModel",
    "SingularSteadyStateError",
    "SteadyStateResult",
    "TraceDriftError",
    "Trajectory",
    "evolve",
    "liouvillian_matrix",
    "lindblad_rhs",
    "steady_state",
]

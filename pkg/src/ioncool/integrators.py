"""Time stepping for Lindblad generators.

Two routes are provided.

``ExponentialRK``
    Splits the generator into the no-jump part
    ``X -> -i (H_eff X - X H_eff^dagger)`` with ``H_eff = H - (i/2) sum C^dagger C``
    and the jump part ``X -> sum C X C^dagger``.  The no-jump part carries every
    fast scale of the problem (trap frequency times Fock index, large detunings,
    the excited-state damping) and is propagated exactly in the eigenbasis of
    ``H_eff``, where it acts elementwise.  The jump part is slow and is handled
    by the stiff-order-4 exponential Runge--Kutta scheme of Hochbruck and
    Ostermann, with step-doubling error control.

``rk45``
    Dormand--Prince 4(5) through :func:`scipy.integrate.solve_ivp`, applied to
    the full generator.  Slow for stiff parameter sets, but independent of the
    eigendecomposition; used as a cross-check and as the fallback when ``H_eff``
    is too close to an exceptional point to be diagonalised reliably.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eig, eigh, inv

log = logging.getLogger(__name__)

#: eigenvector condition number above which the exponential route is refused
MAX_EIGVEC_COND = 1e6


class IntegrationError(RuntimeError):
    """The propagator could not reach the requested time."""


# --------------------------------------------------------------------------
# jump superoperator


@dataclass
class _JumpGroup:
    out_level: int
    in_level: int
    ops: np.ndarray  # (k, f, f) blocks, C_j = |out><in| (x) ops[j]
    basis: np.ndarray | None = None  # common eigenbasis W of the blocks
    kernel: np.ndarray | None = None  # K_mn = sum_j d_j[m] conj(d_j[n])


def _single_block(c: np.ndarray, ni: int, f: int) -> tuple[int, int] | None:
    blocks = c.reshape(ni, f, ni, f)
    nz = [(a, b) for a in range(ni) for b in range(ni) if np.any(blocks[a, :, b, :] != 0)]
    return nz[0] if len(nz) == 1 else None


def _try_common_basis(ops: np.ndarray, tol: float = 1e-10):
    """Simultaneously diagonalise commuting normal blocks, or return None."""
    k = len(ops)
    if k == 1 and np.allclose(ops[0], np.diag(np.diag(ops[0])), atol=0):
        w = np.eye(ops.shape[1])
        return w, np.diag(ops[0])[None, :]
    for i in range(k):
        for j in range(i + 1, k):
            if np.max(np.abs(ops[i] @ ops[j] - ops[j] @ ops[i])) > tol:
                return None
    # fixed, incommensurate weights so the combination is non-degenerate
    alpha = np.sqrt(np.arange(2, 2 + k) + 0.5)
    beta = np.sqrt(np.arange(3, 3 + k) + 0.25)
    m = sum(a * (u + u.conj().T) + 1j * b * (u - u.conj().T) for a, b, u in zip(alpha, beta, ops))
    _, w = eigh(m)
    diag = np.empty((k, ops.shape[1]), dtype=complex)
    for j, u in enumerate(ops):
        t = w.conj().T @ u @ w
        diag[j] = np.diag(t)
        off = t - np.diag(diag[j])
        if np.max(np.abs(off)) > tol * max(1.0, np.max(np.abs(u))):
            return None
    return w, diag


def compile_jumps(collapses: list[np.ndarray], internal_dim: int, fock_levels: int):
    """Group collapse matrices by their internal block.

    Returns ``(groups, general)`` where ``general`` lists collapses that touch
    more than one internal block and must be applied as dense matrices.
    """
    f = fock_levels
    by_block: dict[tuple[int, int], list[np.ndarray]] = {}
    general = []
    for c in collapses:
        blk = _single_block(c, internal_dim, f)
        if blk is None:
            general.append(c)
            continue
        a, b = blk
        by_block.setdefault(blk, []).append(c[a * f:(a + 1) * f, b * f:(b + 1) * f])
    groups = []
    for (a, b), blocks in sorted(by_block.items()):
        ops = np.array(blocks, dtype=complex)
        g = _JumpGroup(a, b, ops)
        common = _try_common_basis(ops)
        if common is not None:
            w, d = common
            g.basis = w
            g.kernel = np.einsum("jm,jn->mn", d, d.conj())
        groups.append(g)
    return groups, general


def apply_jumps(groups, general, rho: np.ndarray, fock_levels: int) -> np.ndarray:
    """``sum_j C_j rho C_j^dagger`` in the original basis."""
    f = fock_levels
    out = np.zeros_like(rho)
    for g in groups:
        sb = slice(g.in_level * f, (g.in_level + 1) * f)
        sa = slice(g.out_level * f, (g.out_level + 1) * f)
        x = rho[sb, sb]
        if g.kernel is not None:
            w = g.basis
            out[sa, sa] += w @ ((w.conj().T @ x @ w) * g.kernel) @ w.conj().T
        else:
            out[sa, sa] += np.einsum("kij,jl,kml->im", g.ops, x, g.ops.conj(), optimize=True)
    for c in general:
        out += c @ rho @ c.conj().T
    return out


# --------------------------------------------------------------------------
# phi functions


def phi_functions(z: np.ndarray):
    """Elementwise ``exp(z), phi_1(z), phi_2(z), phi_3(z)``.

    ``phi_k(z) = sum_m z^m / (m + k)!``; a truncated series is used where
    ``|z| < 1`` to avoid cancellation, the closed forms elsewhere.
    """
    z = np.asarray(z, dtype=complex)
    ez = np.exp(z)
    small = np.abs(z) < 1.0
    zs = np.where(small, 1.0, z)
    p1 = (ez - 1.0) / zs
    p2 = (ez - 1.0 - zs) / zs**2
    p3 = (ez - 1.0 - zs - 0.5 * zs**2) / zs**3
    if small.any():
        zz = z[small]
        s1 = np.zeros_like(zz)
        s2 = np.zeros_like(zz)
        s3 = np.zeros_like(zz)
        zm = np.ones_like(zz)
        for m in range(22):
            s1 += zm / factorial(m + 1)
            s2 += zm / factorial(m + 2)
            s3 += zm / factorial(m + 3)
            zm = zm * zz
        p1[small] = s1
        p2[small] = s2
        p3[small] = s3
    return ez, p1, p2, p3


# --------------------------------------------------------------------------
# exponential Runge--Kutta


def _snap(h: float) -> float:
    """Round a step size down onto the ladder ``2^(k/4)`` so coefficient sets get reused."""
    return float(2.0 ** (np.floor(4.0 * np.log2(h)) / 4.0))


class ExponentialRK:
    """Propagator for ``d rho/dt = L_nojump(rho) + J(rho)`` in the ``H_eff`` eigenbasis.

    States are carried as ``Y = R^-1 rho R^-dagger`` where ``H_eff = R diag R^-1``.
    """

    def __init__(self, H: np.ndarray, collapses: list[np.ndarray], internal_dim: int, fock_levels: int):
        d = H.shape[0]
        self.fock_levels = fock_levels
        k = np.zeros((d, d), dtype=complex)
        for c in collapses:
            k += c.conj().T @ c
        a, r = eig(-1j * (H - 0.5j * k))
        self.cond = float(np.linalg.cond(r))
        if not np.isfinite(self.cond) or self.cond > MAX_EIGVEC_COND:
            raise np.linalg.LinAlgError(
                f"no-jump generator is near an exceptional point (eigenvector condition {self.cond:.2e})"
            )
        ri = inv(r)
        self.r, self.ri = r, ri
        self.z = a[:, None] + a.conj()[None, :]
        self.decay_scale = float(np.max(np.abs(a.real))) if d else 0.0
        f = fock_levels
        groups, general = compile_jumps(collapses, internal_dim, fock_levels)
        self._maps = []
        for g in groups:
            rb = r[g.in_level * f:(g.in_level + 1) * f, :]
            ra = ri[:, g.out_level * f:(g.out_level + 1) * f]
            if g.kernel is not None:
                w = g.basis
                self._maps.append(("kernel", w.conj().T @ rb, ra @ w, g.kernel))
            else:
                self._maps.append(("stack", rb, ra, g.ops))
        for c in general:
            self._maps.append(("dense", ri @ c @ r, None, None))
        self._coef: dict[float, tuple] = {}
        self.nfev = 0

    def to_eig(self, rho: np.ndarray) -> np.ndarray:
        return self.ri @ rho @ self.ri.conj().T

    def from_eig(self, y: np.ndarray) -> np.ndarray:
        return self.r @ y @ self.r.conj().T

    def jump(self, y: np.ndarray) -> np.ndarray:
        self.nfev += 1
        out = np.zeros_like(y)
        for kind, left, right, extra in self._maps:
            if kind == "kernel":
                x = left @ y @ left.conj().T
                out += right @ (x * extra) @ right.conj().T
            elif kind == "stack":
                x = left @ y @ left.conj().T
                m = np.einsum("kij,jl,kml->im", extra, x, extra.conj(), optimize=True)
                out += right @ m @ right.conj().T
            else:
                out += left @ y @ left.conj().T
        return out

    def _coefficients(self, h: float):
        c = self._coef.get(h)
        if c is None:
            e1, p1, p2, p3 = phi_functions(self.z * h)
            eh, q1, q2, q3 = phi_functions(self.z * (h / 2))
            a52 = 0.5 * q2 - p3 + 0.25 * p2 - 0.5 * q3
            c = dict(
                e1=e1,
                eh=eh,
                a21=h * 0.5 * q1,
                a31=h * (0.5 * q1 - q2),
                a32=h * q2,
                a41=h * (p1 - 2 * p2),
                a42=h * p2,
                a51=h * (0.5 * q1 - 2 * a52 - (0.25 * q2 - a52)),
                a52=h * a52,
                a54=h * (0.25 * q2 - a52),
                b1=h * (p1 - 3 * p2 + 4 * p3),
                b4=h * (-p2 + 4 * p3),
                b5=h * (4 * p2 - 8 * p3),
            )
            if len(self._coef) > 64:
                self._coef.clear()
            self._coef[h] = c
        return c

    def step(self, y: np.ndarray, h: float) -> np.ndarray:
        c = self._coefficients(h)
        n1 = self.jump(y)
        u2 = c["eh"] * y + c["a21"] * n1
        n2 = self.jump(u2)
        u3 = c["eh"] * y + c["a31"] * n1 + c["a32"] * n2
        n3 = self.jump(u3)
        u4 = c["e1"] * y + c["a41"] * n1 + c["a42"] * (n2 + n3)
        n4 = self.jump(u4)
        u5 = c["eh"] * y + c["a51"] * n1 + c["a52"] * (n2 + n3) + c["a54"] * n4
        n5 = self.jump(u5)
        return c["e1"] * y + c["b1"] * n1 + c["b4"] * n4 + c["b5"] * n5

    def integrate(self, y0, t_grid, rtol=1e-8, atol=1e-10, first_step=None, max_step=np.inf, min_step=1e-10):
        """Yield the eigen-coordinate state at every time in ``t_grid`` (after the first).

        Steps are clipped so each sample time is hit exactly.  The local error of
        a step is estimated by comparing it with two half steps; the half-step
        result is kept.
        """
        t = float(t_grid[0])
        y = y0
        if first_step is None:
            # start well inside the fastest decay; doubling cannot see a transient
            # that both the full step and the half steps overshoot
            first_step = 1e-2 / max(1.0, self.decay_scale)
        h = _snap(min(first_step, max_step))
        self.nsteps = 0
        self.nrejected = 0
        for t_next in t_grid[1:]:
            while t < t_next:
                h = min(h, max_step)
                hh = min(h, t_next - t)
                last = hh >= t_next - t
                full = self.step(y, hh)
                half = self.step(self.step(y, hh / 2), hh / 2)
                scale = atol + rtol * np.maximum(np.abs(y), np.abs(half))
                # The raw full/half difference is used, not the Richardson /15:
                # during stiff transients it is the only reliable bound.  Max
                # norm, because an RMS over d^2 entries lets errors on the few
                # populated entries (and hence the trace) slip through.
                err = float(np.max(np.abs(half - full) / scale))
                if err <= 1.0:
                    t = t_next if last else t + hh
                    y = half
                    self.nsteps += 1
                    if not np.all(np.isfinite(y)):
                        raise IntegrationError(f"non-finite state at t={t:g}")
                    grow = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
                    # a step clipped by the sample grid says nothing about the natural step
                    h = _snap(max(h, hh * grow) if last else hh * grow)
                else:
                    self.nrejected += 1
                    h = _snap(hh * max(0.2, 0.9 * err ** -0.2))
                    if h < min_step:
                        raise IntegrationError(f"step size underflow at t={t:g} (h={h:.3e})")
            yield y


# --------------------------------------------------------------------------
# explicit Dormand--Prince route


def rk45_samples(H, collapses, internal_dim, fock_levels, rho0, t_grid, rtol=1e-8, atol=1e-10):
    """Sample the solution with scipy's RK45 (dense output at ``t_grid``)."""
    d = H.shape[0]
    k = np.zeros((d, d), dtype=complex)
    for c in collapses:
        k += c.conj().T @ c
    heff = H - 0.5j * k
    groups, general = compile_jumps(list(collapses), internal_dim, fock_levels)

    def rhs(_t, y):
        rho = y.reshape(d, d)
        x = heff @ rho
        out = -1j * (x - x.conj().T)
        out += apply_jumps(groups, general, rho, fock_levels)
        return out.ravel()

    sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), np.asarray(rho0, dtype=complex).ravel(),
                    method="RK45", t_eval=t_grid, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(sol.message)
    return sol.y.T.reshape(-1, d, d), sol.nfev

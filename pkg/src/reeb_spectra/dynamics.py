"""Reeb flow integration, closed-orbit shooting, monodromy and indices.

The flow integrated is z' = J grad G(z) with G the degree-2 homogenization
of the body (this IS the Reeb flow on Sigma = G^{-1}(1)); the degree-alpha
Hamiltonian orbit is its reparametrization phi_H^s = phi_R^{(alpha/2) s}.
Linearized flows are integrated jointly with the base point and exposed as
SymplecticPath objects for the index machinery.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import conley_zehnder as cz
from .bodies import ConvexBody
from .symplectic import SymplecticPath, apply_J, standard_J, symplectic_defect
from .util import parallel_map

log = logging.getLogger(__name__)

RTOL = 1e-11
ATOL = 1e-13
TOL_ORBIT = 1e-9
TOL_ENERGY = 1e-9
TOL_DEDUP = 1e-6
BESSE_TOL_FACTOR = 1e-6  # scaled by the surface diameter


@dataclass
class ClosedOrbit:
    """A (numerically) closed Reeb orbit with its linearized-flow data."""

    initial_point: np.ndarray
    period: float
    residual: float
    monodromy: np.ndarray | None = None
    return_block: np.ndarray | None = None
    cz_index: int | None = None
    morse_index: int | None = None
    nullity: int | None = None
    meta: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "period": self.period,
            "initial_point": np.asarray(self.initial_point).tolist(),
            "residual": self.residual,
            "cz": self.cz_index,
            "morse": self.morse_index,
            "nullity": self.nullity,
        }
        if self.monodromy is not None:
            out["monodromy_eigenvalues"] = [
                [float(ev.real), float(ev.imag)] for ev in np.linalg.eigvals(self.monodromy)
            ]
        out.update({k: v for k, v in self.meta.items() if _jsonable(v)})
        return out


def _jsonable(v):
    return isinstance(v, (int, float, str, bool, list, dict, type(None)))


def _reeb_rhs(body: ConvexBody):
    def rhs(t, y):
        z = y.reshape(-1, body.dim)
        return apply_J(body.grad_gauge2(z)).reshape(-1)

    return rhs


def integrate_reeb(
    body: ConvexBody,
    z: np.ndarray,
    t: float,
    rtol: float = RTOL,
    atol: float = ATOL,
    chunk: float = 0.5,
) -> np.ndarray:
    """phi_R^t(z), integrated in chunks with radial re-projection onto Sigma."""
    z = np.asarray(z, dtype=float).copy()
    if abs(body.gauge2(z) - 1.0) > 1e-10:
        raise ValueError("starting point is off the surface beyond 1e-10")
    if t == 0.0:
        return z
    remaining = float(t)
    direction = np.sign(remaining)
    rhs = _reeb_rhs(body)
    while abs(remaining) > 0:
        step = direction * min(abs(remaining), chunk)
        sol = solve_ivp(rhs, (0.0, step), z, method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise RuntimeError(f"integration failed: {sol.message}")
        z = sol.y[:, -1]
        drift = abs(body.gauge2(z) - 1.0)
        if drift > TOL_ENERGY:
            warnings.warn(f"energy drift {drift:.2e} exceeded tolerance; re-projecting")
        z = body.project_to_surface(z)
        remaining -= step
    return z


def integrate_reeb_batch(
    body: ConvexBody,
    Z: np.ndarray,
    t: float,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> np.ndarray:
    """Flow a batch of points (N, 2n) to time t in one vectorized solve."""
    Z = np.asarray(Z, dtype=float)
    sol = solve_ivp(_reeb_rhs(body), (0.0, float(t)), Z.reshape(-1), method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"batch integration failed: {sol.message}")
    return sol.y[:, -1].reshape(Z.shape)


def _dense_trajectory(body: ConvexBody, z: np.ndarray, t_max: float, rtol=RTOL, atol=ATOL):
    sol = solve_ivp(
        _reeb_rhs(body), (0.0, float(t_max)), np.asarray(z, float),
        method="DOP853", rtol=rtol, atol=atol, dense_output=True,
    )
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    return sol.sol


def flow_with_monodromy(
    body: ConvexBody,
    z0: np.ndarray,
    tau: float,
    alpha: float = 2.0,
    rtol: float = RTOL,
    atol: float = ATOL,
    dense: bool = False,
):
    """Flow and linearized flow over one period.

    alpha = 2 integrates the Reeb (degree-2) flow over [0, tau]; alpha in
    (1, 2) integrates the degree-alpha Hamiltonian flow over [0, 2 tau/alpha].
    Returns (endpoint, monodromy, path) where path is a SymplecticPath on
    [0, 1] (None unless dense=True).
    """
    z0 = np.asarray(z0, dtype=float)
    d = body.dim
    span = tau if alpha == 2.0 else 2.0 * tau / alpha

    if alpha == 2.0:
        grad, hess = body.grad_gauge2, body.hess_gauge2
    else:
        ab = body if body.alpha == alpha else body.homogenize(alpha)
        grad, hess = ab.grad_H, ab.hess_H

    def rhs(t, y):
        z = y[:d]
        G = y[d:].reshape(d, d)
        A = apply_J(hess(z).T).T  # J @ hess
        return np.concatenate([apply_J(grad(z)), (A @ G).reshape(-1)])

    y0 = np.concatenate([z0, np.eye(d).reshape(-1)])
    sol = solve_ivp(rhs, (0.0, span), y0, method="DOP853", rtol=rtol, atol=atol,
                    dense_output=dense)
    if not sol.success:
        raise RuntimeError(f"variational integration failed: {sol.message}")
    z_end = sol.y[:d, -1]
    M = sol.y[d:, -1].reshape(d, d)

    path = None
    if dense:
        interp = sol.sol

        def _eval(ts):
            ys = interp(np.asarray(ts) * span)
            mats = ys[d:].T.reshape(len(ts), d, d)
            return mats

        path = SymplecticPath(dim=d, kind="linearized-flow", eval_batch=_eval,
                              meta={"alpha": alpha, "tau": tau})
    return z_end, M, path


# -- closed-orbit shooting ---------------------------------------------------


def _default_seeds(body: ConvexBody, extra: int, seed: int) -> list[np.ndarray]:
    pts = []
    for h in range(body.n):
        z = np.zeros(body.dim)
        z[2 * h] = 1.0
        pts.append(body.project_to_surface(z))
    if extra > 0:
        pts.extend(body.surface_samples(extra, seed=seed))
    return pts


def _newton_polish(body: ConvexBody, z_seed: np.ndarray, tau_guess: float, t_max: float):
    d = body.dim
    z = np.asarray(z_seed, float).copy()
    tau = float(tau_guess)
    phase_dir = body.reeb_field(z_seed)

    def residual(z, tau):
        z_end, M, _ = flow_with_monodromy(body, z, tau, alpha=2.0, rtol=1e-12, atol=1e-13)
        r = np.empty(d + 2)
        r[:d] = z_end - z
        r[d] = body.gauge2(z) - 1.0
        r[d + 1] = phase_dir @ (z - z_seed)
        return r, z_end, M

    r, z_end, M = residual(z, tau)
    rnorm = np.linalg.norm(r)
    for _ in range(30):
        if rnorm < TOL_ORBIT:
            break
        jac = np.zeros((d + 2, d + 1))
        jac[:d, :d] = M - np.eye(d)
        jac[:d, d] = apply_J(body.grad_gauge2(z_end))
        jac[d, :d] = body.grad_gauge2(z)
        jac[d + 1, :d] = phase_dir
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        lam = 1.0
        for _ in range(10):
            z_try = body.project_to_surface(z + lam * step[:d])
            tau_try = tau + lam * step[d]
            if not (0.0 < tau_try <= 1.5 * t_max):
                lam *= 0.5
                continue
            r_try, z_end_try, M_try = residual(z_try, tau_try)
            if np.linalg.norm(r_try) < rnorm:
                z, tau, r, z_end, M = z_try, tau_try, r_try, z_end_try, M_try
                rnorm = np.linalg.norm(r)
                break
            lam *= 0.5
        else:
            return None
    if rnorm >= TOL_ORBIT:
        return None
    return ClosedOrbit(initial_point=z, period=tau, residual=float(rnorm), monodromy=M)


def _minimal_period(body: ConvexBody, orbit: ClosedOrbit) -> ClosedOrbit:
    for k in range(8, 1, -1):
        tk = orbit.period / k
        z_end = integrate_reeb(body, orbit.initial_point, tk, rtol=1e-12)
        if np.linalg.norm(z_end - orbit.initial_point) < 10 * TOL_ORBIT:
            polished = _newton_polish(body, orbit.initial_point, tk, t_max=orbit.period)
            if polished is not None:
                return polished
    return orbit


def _orbit_distance(body: ConvexBody, z: np.ndarray, other: ClosedOrbit, interp) -> float:
    """min over time shift of |phi^t(other) - z|, refined continuously."""
    from scipy.optimize import minimize_scalar

    ts = np.linspace(0.0, other.period, 257)
    d = np.linalg.norm(interp(ts).T - z, axis=1)
    i = int(np.argmin(d))
    lo = ts[max(i - 1, 0)]
    hi = ts[min(i + 1, len(ts) - 1)]
    res = minimize_scalar(
        lambda t: float(np.linalg.norm(interp(t) - z)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.fun)


def find_closed_orbits(
    body: ConvexBody,
    t_max: float,
    n_seeds: int = 16,
    seed: int = 0,
    scan_points: int = 4000,
) -> list[ClosedOrbit]:
    """Shooting + Newton search for closed Reeb orbits with period in (0, t_max].

    Seeds are the coordinate-plane circles plus low-discrepancy surface
    samples; near-returns of each seed trajectory are polished by a damped
    least-squares Newton on (z, tau) with a phase condition killing the
    time-shift.  Orbits are deduplicated by trajectory distance and reported
    with their minimal period; integer multiples within the window are
    listed in meta["multiples"].
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    _, R = body.pinching_radii()
    thresh = 0.5 * R

    def hunt(z_seed):
        found = []
        interp = _dense_trajectory(body, z_seed, t_max, rtol=1e-10, atol=1e-11)
        ts = np.linspace(0.0, t_max, scan_points + 1)
        disp = np.linalg.norm(interp(ts).T - z_seed, axis=1)
        for i in range(1, scan_points):
            if disp[i] <= disp[i - 1] and disp[i] <= disp[i + 1] and disp[i] < thresh:
                orb = _newton_polish(body, z_seed, ts[i], t_max)
                if orb is None:
                    log.debug(
                        "Newton diverged from seed near t = %.6f (displacement %.3e)",
                        ts[i], disp[i],
                    )
                elif orb.period <= t_max * (1 + 1e-9):
                    found.append(orb)
        return found

    candidates: list[ClosedOrbit] = []
    for batch in parallel_map(hunt, _default_seeds(body, n_seeds - body.n, seed)):
        candidates.extend(batch)

    unique: list[ClosedOrbit] = []
    interps: list = []
    for orb in sorted(candidates, key=lambda o: o.period):
        orb = _minimal_period(body, orb)
        dup = False
        for prev, prev_interp in zip(unique, interps):
            if abs(prev.period - orb.period) < 1e-6 * max(1.0, prev.period):
                if _orbit_distance(body, orb.initial_point, prev, prev_interp) < TOL_DEDUP:
                    dup = True
                    break
        if not dup:
            orb.meta["multiples"] = [
                float(k * orb.period) for k in range(1, int(t_max / orb.period) + 1)
            ]
            unique.append(orb)
            interps.append(
                _dense_trajectory(body, orb.initial_point, orb.period, rtol=1e-10, atol=1e-11)
            )
    return unique


# -- monodromy, block decomposition and indices ------------------------------


def _symplectic_complement_basis(body: ConvexBody, z0: np.ndarray) -> np.ndarray:
    """Symplectic basis of E^omega for E = span{R(z0), z0}, as columns.

    Basis ordering inside E is (Reeb direction, dilation direction); the
    complement basis S satisfies S^T J S = J_{2n-2}.
    """
    d = body.dim
    u1 = body.reeb_field(z0)
    u2 = np.asarray(z0, float)
    J = standard_J(d // 2)

    def om(a, b):
        return float(a @ (J @ b))

    w12 = om(u1, u2)
    raw = []
    for e in np.eye(d):
        x = om(e, u2) / w12
        y = om(e, u1) / (-w12)
        v = e - x * u1 - y * u2
        raw.append(v)
    Q, s, _ = np.linalg.svd(np.array(raw).T)
    basis = Q[:, : d - 2]
    # symplectic Gram-Schmidt on the Euclidean-orthonormal complement basis;
    # pairs are normalized to v^T J w = -1 so that S^T J S = J_{2n-2}
    cols = [basis[:, i] for i in range(d - 2)]
    sympl = []
    while cols:
        v = cols.pop(0)
        pair_idx, best = None, 0.0
        for i, wv in enumerate(cols):
            val = om(v, wv)
            if abs(val) > abs(best):
                best, pair_idx = val, i
        if pair_idx is None or abs(best) < 1e-12:
            raise RuntimeError("failed to build a symplectic basis of E^omega")
        w = cols.pop(pair_idx) / (-best)
        sympl.extend([v, w])
        cols = [
            c + om(c, w) * v - om(c, v) * w  # remove components along span{v, w}
            for c in cols
        ]
    S = np.array(sympl).T
    return S


def return_block(body: ConvexBody, z0: np.ndarray, M: np.ndarray):
    """Restriction N of the monodromy to E^omega, in symplectic coordinates."""
    d = body.dim
    S = _symplectic_complement_basis(body, z0)
    Jred = standard_J((d - 2) // 2)
    Jfull = standard_J(d // 2)
    # coordinates: v = S c  =>  c = Jred^{-1} S^T J v
    proj = np.linalg.solve(Jred, S.T @ Jfull)
    N = proj @ M @ S
    resid = float(np.abs(M @ S - S @ N).max())
    return N, S, resid


def monodromy_and_index(
    body: ConvexBody,
    orbit: ClosedOrbit,
    alpha: float = 1.5,
    grid: int = cz.DEFAULT_GRID,
) -> ClosedOrbit:
    """Fill monodromy, return block and (cz, morse, nullity) on a found orbit.

    The CZ index is computed on the full linearized degree-alpha flow path
    (alpha in (1,2); the value is alpha-independent).  The nullity uses the
    block structure of the endpoint over E + E^omega: 1 + dim ker(N - I),
    with N the alpha-independent restriction of the Reeb monodromy to
    E^omega.  A residual of the blockdiag(M_alpha, N) reconstruction of the
    endpoint is recorded; above 1e-6 the raw monodromy is kept and flagged.
    """
    if not (1.0 < alpha < 2.0):
        raise ValueError("alpha must lie in (1, 2)")
    z0 = np.asarray(orbit.initial_point, float)
    tau = float(orbit.period)
    d = body.dim
    n = d // 2

    _, M2, _ = flow_with_monodromy(body, z0, tau, alpha=2.0)
    sdef = symplectic_defect(M2)
    if sdef > 1e-7:
        warnings.warn(f"monodromy symplecticity defect {sdef:.2e} above 1e-7")

    N, S, resid_inv = return_block(body, z0, M2)

    _, M_alpha_full, path_alpha = flow_with_monodromy(body, z0, tau, alpha=alpha, dense=True)

    # assemble Gamma_alpha(1) from the closed-form shear and N, then compare
    u1 = body.reeb_field(z0)
    B = np.column_stack([u1, z0, S])
    shear = np.array([[1.0, (alpha - 2.0) * tau], [0.0, 1.0]])
    assembled = np.zeros((d, d))
    assembled[:2, :2] = shear
    assembled[2:, 2:] = N
    M_assembled = B @ assembled @ np.linalg.inv(B)
    block_resid = float(np.abs(M_assembled - M_alpha_full).max())

    index = cz.cz_index(path_alpha, grid=grid)
    ker_dim = int(
        np.count_nonzero(
            np.linalg.svd(N - np.eye(d - 2), compute_uv=False)
            < cz.TOL_KER * max(1.0, np.linalg.norm(N - np.eye(d - 2), 2))
        )
    ) if d > 2 else 0
    nullity = 1 + ker_dim
    orbit.monodromy = M2
    orbit.return_block = N
    orbit.cz_index = int(index)
    orbit.morse_index = int(index) - n
    orbit.nullity = nullity
    orbit.meta.update(
        {
            "alpha": alpha,
            "symplectic_defect": sdef,
            "block_residual": block_resid,
            "invariance_residual": resid_inv,
            "block_decomposition_ok": block_resid <= 1e-6,
        }
    )
    if block_resid > 1e-6:
        warnings.warn(
            f"block decomposition residual {block_resid:.2e} above 1e-6; "
            "raw monodromy reported"
        )
    return orbit


# -- sampling Besse test -------------------------------------------------------


@dataclass(frozen=True)
class BesseTestResult:
    tau: float
    samples: int
    max_displacement: float
    tol: float
    worst_point: np.ndarray
    verdict: bool
    label: str


def numerical_besse_test(
    body: ConvexBody,
    tau: float,
    samples: int = 10000,
    seed: int = 0,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> BesseTestResult:
    """Sample Sigma, flow to time tau, report the worst displacement.

    The verdict is numerical evidence at the stated tolerance and sample
    density, never a proof: Besse at tau requires fix(phi_R^tau) = Sigma.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    Z = body.surface_samples(samples, seed=seed)
    Z_end = integrate_reeb_batch(body, Z, tau, rtol=rtol, atol=atol)
    disp = np.linalg.norm(Z_end - Z, axis=1)
    worst = int(np.argmax(disp))
    _, R = body.pinching_radii()
    tol = BESSE_TOL_FACTOR * 2.0 * R
    ok = bool(disp[worst] < tol)
    label = (
        f"besse-at-{tau:g} (numerical evidence, {samples} samples)"
        if ok
        else f"not-besse-at-{tau:g} (witness displacement {disp[worst]:.3e})"
    )
    return BesseTestResult(
        tau=float(tau),
        samples=samples,
        max_displacement=float(disp[worst]),
        tol=tol,
        worst_point=Z[worst],
        verdict=ok,
        label=label,
    )

"""Full nonlinear solver for the gravity-capillary lump.

The unknowns are the corrections ``phi`` (Hox) and ``psi`` (He) in

    f = q + phi,        h = c (d1 q + psi),

where ``q`` is the torus lump.  ``psi`` solves a Helmholtz problem driven
by ``phi`` (inner loop) and ``phi`` solves ``L_eps phi = rhs(phi, psi)``
(outer Picard loop).  At a fixed point both scaled water-wave equations

    -c d1 h = eps^-2 G(eps^2 h) f,
    -c d1 f = -h - eps^2 (d1 f)^2 / 2 + sigma eps^2 lap_eps h + eps^4 Pi,

hold on the grid, where ``lap_eps = d1^2 + eps^2 d2^2``.

All quadratic and cubic terms use the 2/3-rule product; the cubic is built
from two passes.  Because every manipulation that turns the two equations
into the fixed-point form is bilinear in these products, the discrete
fixed point satisfies the discrete equations up to solver tolerances.
"""

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .dno import DNO_MODES, OracleConfig, SurfaceState, g_oracle, remainders
from .errors import ConfigurationError, IterationError, PreconditionError
from .linear import build_context, solve_Leps
from .lump import LumpParams, torus_lump
from .norms import NORM_TAGS, norm
from .spectral import GridSpec, Parity, RealField, parity_defect, product_values, project_parity
from .symbols import build_symbols

__all__ = [
    "SolverConfig", "Problem", "build_problem", "SolutionState", "RunReport",
    "compute_Pi", "compute_Pi_unscaled", "compute_hfrak", "helmholtz_solve", "solve_psi",
    "assemble_P", "fixed_point_rhs", "lump_equation_defect", "picard_step", "solve_fixed_point",
    "water_wave_residuals", "leading_order_gaps", "decay_order_check", "fit_order", "contraction_probe",
    "fixed_point_map", "initial_state", "EPS_MAX",
]

EPS_MAX = 0.3


@dataclass(frozen=True)
class SolverConfig:
    """Everything that determines one nonlinear solve."""

    grid: GridSpec = field(default_factory=GridSpec)
    tol_outer: float = 1e-9
    tol_inner: float = 1e-12
    tol_linear: float = 1e-12
    maxiter: int = 50
    inner_maxiter: int = 50
    dno_mode: str = "exact"
    oracle: OracleConfig = field(default_factory=OracleConfig)
    lump_source: str = "petviashvili"
    eps_max: float = EPS_MAX
    force: bool = False

    def __post_init__(self):
        for name in ("tol_outer", "tol_inner", "tol_linear"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive", field=name)
        if self.maxiter < 1 or self.inner_maxiter < 1:
            raise ConfigurationError("iteration caps must be at least 1", field="max_iter")
        if self.dno_mode not in DNO_MODES:
            raise ConfigurationError(f"dno mode must be one of {DNO_MODES}", field="dno")
        if self.grid.eps > self.eps_max and not self.force:
            raise ConfigurationError(
                f"eps = {self.grid.eps} exceeds eps_max = {self.eps_max}; pass force to run anyway",
                field="eps")

    @property
    def outside_proven_regime(self):
        return self.grid.eps > self.eps_max


@dataclass(frozen=True, eq=False)
class Problem:
    """Grid-level data shared by every iterate: symbols, lump and linear context."""

    config: SolverConfig
    symbols: object
    params: LumpParams
    q: RealField
    q1: RealField
    kpres: RealField
    linctx: object

    @property
    def grid(self):
        return self.config.grid

    @property
    def eps(self):
        return self.config.grid.eps

    @property
    def sigma(self):
        return self.config.grid.sigma

    @property
    def c(self):
        return self.params.c


def _d(grid, v, nx, ny):
    return grid.irfft(grid.rdiff(nx, ny) * grid.rfft(v))


def _mult(grid, v, sym_half):
    return grid.irfft(sym_half * grid.rfft(v))


def _prod(grid, a, b):
    return product_values(grid, a, b)


def build_problem(config=None):
    """Torus lump, its derivative and the linear context for ``config``."""
    config = SolverConfig() if config is None else config
    grid = config.grid
    params = LumpParams.from_grid(grid)
    sym = build_symbols(grid)
    q = torus_lump(params, grid, source=config.lump_source)
    q1v = _d(grid, q.values, 1, 0)
    q1 = project_parity(RealField(grid, q1v), Parity.HE)
    # Discrete lump-equation defect of the ansatz; moved to the rhs.
    kp = (params.A * _d(grid, q.values, 4, 0) - _d(grid, q.values, 2, 0)
          - params.beta * _d(grid, q.values, 0, 2)
          - (1.5 / params.c) * _d(grid, _prod(grid, q1.values, q1.values), 1, 0))
    kpres = project_parity(RealField(grid, kp), Parity.HOX)
    ctx = build_context(grid, q1, tol=config.tol_linear)
    return Problem(config=config, symbols=sym, params=params, q=q, q1=q1, kpres=kpres, linctx=ctx)


@dataclass(frozen=True, eq=False)
class SolutionState:
    """Corrections ``(phi, psi)`` and the derived physical fields."""

    problem: Problem
    phi: RealField
    psi: RealField
    iteration: int = 0
    inner_iterations: int = 0
    inner_ratio: float = float("nan")

    @property
    def f(self):
        return RealField(self.phi.grid, self.problem.q.values + self.phi.values, Parity.HOX)

    @property
    def h(self):
        p = self.problem
        return RealField(self.phi.grid, p.c * (p.q1.values + self.psi.values), Parity.HE)

    @property
    def eta(self):
        return RealField(self.phi.grid, self.problem.eps ** 2 * self.h.values, Parity.HE)

    @property
    def xi(self):
        return RealField(self.phi.grid, self.problem.eps * self.f.values, Parity.HOX)


def compute_Pi(h, f, c=None):
    """Nonlinear remainder ``Pi`` of the Bernoulli equation in scaled variables.

    ``Pi = -(d2 f)^2 / 2 + (-c d1 h + eps^2 grad_eps h . grad_eps f)^2 / (2 s)
           + sigma eps^4 div_eps(-|grad_eps h|^2 grad_eps h / (sqrt(s) (1 + sqrt(s))))``
    with ``s = 1 + eps^6 |grad_eps h|^2``; the last form avoids cancellation
    at small slope.
    """
    grid = f.grid
    eps, sigma = grid.eps, grid.sigma
    c = 1.0 / math.sqrt(1.0 + eps ** 2) if c is None else c
    hv, fv = h.values, f.values
    hx, hy = _d(grid, hv, 1, 0), eps * _d(grid, hv, 0, 1)
    fx, fy = _d(grid, fv, 1, 0), eps * _d(grid, fv, 0, 1)
    f2 = _d(grid, fv, 0, 1)
    g = _prod(grid, hx, hx) + _prod(grid, hy, hy)
    s = 1.0 + eps ** 6 * g
    b = -c * hx + eps ** 2 * (_prod(grid, hx, fx) + _prod(grid, hy, fy))
    t1 = -0.5 * _prod(grid, f2, f2)
    t2 = _trunc(grid, _prod(grid, b, b) / (2.0 * s))
    rs = np.sqrt(s)
    w = -g / (rs * (1.0 + rs))
    wx, wy = _trunc(grid, w * hx), _trunc(grid, w * hy)
    t3 = sigma * eps ** 4 * (_d(grid, wx, 1, 0) + eps * _d(grid, wy, 0, 1))
    return project_parity(RealField(grid, t1 + t2 + t3), Parity.HE)


def _trunc(grid, v):
    return grid.irfft(grid.rfft(v) * grid.rmask)


def compute_Pi_unscaled(eta, xi, g_xi):
    """``Pi`` rebuilt from unscaled fields, with ``G xi`` supplied.

    Evaluates ``[xi_x1^2/2 + ((G xi + grad eta . grad xi)^2 - |grad xi|^2 |grad eta|^2
    - |grad xi|^2) / (2 (1 + |grad eta|^2)) + sigma (div(grad eta / sqrt(1 + |grad eta|^2))
    - lap eta)] / eps^6`` literally, with plain pointwise products.
    """
    grid = eta.grid
    eps, sigma = grid.eps, grid.sigma

    def dx(v):
        return eps * _d(grid, v, 1, 0)

    def dy(v):
        return eps ** 2 * _d(grid, v, 0, 1)

    e, x = eta.values, xi.values
    ex, ey, xx, xy = dx(e), dy(e), dx(x), dy(x)
    ge2 = ex ** 2 + ey ** 2
    gx2 = xx ** 2 + xy ** 2
    core = (0.5 * xx ** 2
            + ((g_xi.values + ex * xx + ey * xy) ** 2 - gx2 * ge2 - gx2) / (2.0 * (1.0 + ge2)))
    root = np.sqrt(1.0 + ge2)
    tension = dx(ex / root) + dy(ey / root) - (dx(ex) + dy(ey))
    return RealField(grid, (core + sigma * tension) / eps ** 6)


def compute_hfrak(problem, phi, psi):
    """Right-hand side of the Helmholtz problem for ``psi``, in He."""
    _check(phi, Parity.HOX, "phi")
    _check(psi, Parity.HE, "psi")
    grid, eps, sigma, c = problem.grid, problem.eps, problem.sigma, problem.c
    q1 = problem.q1.values
    f = RealField(grid, problem.q.values + phi.values, Parity.HOX)
    h = RealField(grid, c * (q1 + psi.values), Parity.HE)
    fx = _d(grid, f.values, 1, 0)
    lap_q1 = -_mult(grid, q1, problem.symbols.half("sigmaP"))
    out = (_d(grid, phi.values, 1, 0) + sigma * eps ** 2 * lap_q1
           - (eps ** 2 / (2.0 * c)) * _prod(grid, fx, fx)
           + (eps ** 4 / c) * compute_Pi(h, f, c).values)
    return project_parity(RealField(grid, out), Parity.HE)


def helmholtz_solve(problem, hfrak):
    """Divide by the Helmholtz symbol ``1 + sigma eps^2 sigma_P``."""
    grid = hfrak.grid
    vals = grid.irfft(grid.rfft(hfrak.values) / problem.symbols.half("helm"))
    return RealField(grid, vals, hfrak.parity)


def solve_psi(problem, phi, tol=None, maxiter=None, psi0=None):
    """Inner fixed point ``psi <- helmholtz_solve(compute_hfrak(phi, psi))``.

    Stops when ``|psi_new - psi|_h <= tol * max(1, |psi_new|_h)``.  Returns
    ``(psi, sweeps, last_ratio)`` where the ratio compares consecutive updates.
    """
    cfg = problem.config
    tol = cfg.tol_inner if tol is None else tol
    maxiter = cfg.inner_maxiter if maxiter is None else maxiter
    psi = RealField.zeros(problem.grid, Parity.HE) if psi0 is None else psi0
    prev = None
    ratio = float("nan")
    history = []
    for sweep in range(1, maxiter + 1):
        new = helmholtz_solve(problem, compute_hfrak(problem, phi, psi))
        upd = norm(new - psi, "h")
        history.append(upd)
        if prev is not None and prev > 0:
            ratio = upd / prev
        prev = upd
        psi = new
        if upd <= tol * max(1.0, norm(new, "h")):
            return psi, sweep, ratio
    raise IterationError(
        f"psi loop did not converge in {maxiter} sweeps (last ratio {ratio:.3e})", history)


def _check(fld, parity, name):
    if fld.max_abs() > 0 and parity_defect(fld, parity) > 1e-9:
        raise PreconditionError(f"{name} must lie in the {parity.label} class")


def _dno_remainders(problem, h, f, mode):
    state = SurfaceState(problem.grid, RealField(problem.grid, problem.eps ** 2 * h.values), f)
    return remainders(state, problem.config.oracle, mode=mode)


def assemble_P(problem, state, dno_mode=None):
    """The four perturbation terms ``(P1, P2, P3, P4)`` for ``state``.

    With ``P = -d1^2 - eps^2 d2^2`` and ``Q = 1 + eps^2 P / 3``:

    ``P1 = -(eps^2/c) d1(Q Pi) - (eps^2/2c^2) d1((d1 f)^3) - (sigma eps^2/c^2) d1(d1 f P h)
          + (eps^4/c^2) d1(d1 f Pi) + (eps^2/6c) P d1((d1 f)^2)
          + (eps^2/c^2)(1/3 + sigma) P d1(h d1 f)``

    ``P2 = (eps^2/c^2) d2(h d2 f) + (eps^4/c^2)(1/3 + sigma) P d2(h d2 f)``

    ``P3 = -(eps^-4/c^2)(G2 + R3) - (eps^-2/c^2)(sigma + 1/3) P (G2 + R3)
          - (sigma/3c^2) P^2 R1``  (operators at ``eta = eps^2 h`` acting on ``f``)

    ``P4 = (eps^-2/c^2) G0(h G0 f) + (1/c^2)(1/3 + sigma) P G0(h G0 f)``
    """
    mode = problem.config.dno_mode if dno_mode is None else dno_mode
    grid, eps, sigma, c = problem.grid, problem.eps, problem.sigma, problem.c
    sym = problem.symbols
    Ph, Qh, G0h = sym.half("sigmaP"), sym.half("sigmaQ"), sym.half("g0")
    f, h = state.f, state.h
    fv, hv = f.values, h.values
    fx, fy = _d(grid, fv, 1, 0), _d(grid, fv, 0, 1)
    Pi = compute_Pi(h, f, c).values
    c2 = c * c
    k3 = 1.0 / 3.0 + sigma

    def d1(v):
        return _d(grid, v, 1, 0)

    def P(v):
        return _mult(grid, v, Ph)

    fx2 = _prod(grid, fx, fx)
    hfx = _prod(grid, hv, fx)
    p1 = (-(eps ** 2 / c) * d1(_mult(grid, Pi, Qh))
          - (eps ** 2 / (2 * c2)) * d1(_prod(grid, fx2, fx))
          - (sigma * eps ** 2 / c2) * d1(_prod(grid, fx, P(hv)))
          + (eps ** 4 / c2) * d1(_prod(grid, fx, Pi))
          + (eps ** 2 / (6 * c)) * P(d1(fx2))
          + (eps ** 2 / c2) * k3 * P(d1(hfx)))
    dh = _d(grid, _prod(grid, hv, fy), 0, 1)
    p2 = (eps ** 2 / c2) * dh + (eps ** 4 / c2) * k3 * P(dh)
    rem = _dno_remainders(problem, h, f, mode)
    r1, r2 = rem.r1.values, rem.r2.values
    p3 = (-(eps ** -4 / c2) * r2 - (eps ** -2 / c2) * k3 * P(r2)
          - (sigma / (3 * c2)) * P(P(r1)))
    hg = _mult(grid, _prod(grid, hv, _mult(grid, fv, G0h)), G0h)
    p4 = (eps ** -2 / c2) * hg + (k3 / c2) * P(hg)
    parities = (Parity.HOX, Parity.HOX, Parity.HOX, Parity.HOX)
    return tuple(RealField(grid, v, p) for v, p in zip((p1, p2, p3, p4), parities))


def _lump_corrections(problem):
    """Terms of ``L1 q + L2 q`` beyond the lump equation, as fields."""
    grid, eps, sigma = problem.grid, problem.eps, problem.sigma
    A, beta = problem.params.A, problem.params.beta
    qv = problem.q.values
    mixed = (2 * A + 1.0 / 3.0) * eps ** 2 * _d(grid, qv, 2, 2)
    quartic = sigma * beta * eps ** 4 * _d(grid, qv, 0, 4)
    l2q = _mult(grid, qv, problem.symbols.half("l2"))
    return mixed, quartic, l2q


def fixed_point_rhs(problem, state, dno_mode=None, parts=False):
    """``P1^ + P2^ + P3 + P4^`` minus the discrete lump defect, projected to Hox.

    ``P1^ = P1 + (3/2c) d1((d1 phi)^2) - (2A + 1/3) eps^2 d1^2 d2^2 q``,
    ``P2^ = P2 - sigma (1 + eps^2) eps^4 d2^4 q`` and ``P4^ = P4 - L2 q``.
    The defect of the torus lump in the reduced equation is subtracted so
    that the fixed point is exact on the grid.  With ``parts=True`` returns
    ``(rhs, pre_projection_parity_defect)``.
    """
    grid, c = problem.grid, problem.c
    p1, p2, p3, p4 = assemble_P(problem, state, dno_mode)
    mixed, quartic, l2q = _lump_corrections(problem)
    px = _d(grid, state.phi.values, 1, 0)
    total = (p1.values + (1.5 / c) * _d(grid, _prod(grid, px, px), 1, 0) - mixed
             + p2.values - quartic + p3.values + p4.values - l2q - problem.kpres.values)
    raw = RealField(grid, total)
    out = project_parity(raw, Parity.HOX)
    if parts:
        return out, parity_defect(raw, Parity.HOX)
    return out


def lump_equation_defect(problem, state, dno_mode=None):
    """``L1 f + L2 f - (3/2c) d1((d1 f)^2) - sum P``; zero at a solution."""
    grid, c = problem.grid, problem.c
    fv = state.f.values
    fx = _d(grid, fv, 1, 0)
    lin = _mult(grid, fv, problem.symbols.half("l1") + problem.symbols.half("l2"))
    ps = sum(p.values for p in assemble_P(problem, state, dno_mode))
    out = lin - (1.5 / c) * _d(grid, _prod(grid, fx, fx), 1, 0) - ps
    return RealField(grid, out, Parity.HOX)


def water_wave_residuals(problem, state, cfg=None):
    """Residual fields of both scaled equations and their relative sizes.

    ``r_kinematic = c d1 h + eps^-2 G(eps^2 h)(eps f) / eps`` uses the oracle;
    ``r_bernoulli`` is left minus right of the Bernoulli equation.  Relative sizes
    are L2 norms divided by the larger L2 norm of the two terms of each
    equation.  Returns ``(r_kinematic, r_bernoulli, rel_kin, rel_bern)``.
    """
    grid, eps, sigma, c = problem.grid, problem.eps, problem.sigma, problem.c
    f, h = state.f, state.h
    st = SurfaceState.from_scaled(h, f)
    G = g_oracle(st, cfg or problem.config.oracle).values / eps
    a = c * _d(grid, h.values, 1, 0)
    b = eps ** -2 * G
    r_kinematic = RealField(grid, a + b, Parity.HOX)
    fx = _d(grid, f.values, 1, 0)
    lap_h = -_mult(grid, h.values, problem.symbols.half("sigmaP"))
    left = -c * fx
    right = (-h.values - 0.5 * eps ** 2 * _prod(grid, fx, fx) + sigma * eps ** 2 * lap_h
             + eps ** 4 * compute_Pi(h, f, c).values)
    r_bernoulli = RealField(grid, left - right, Parity.HE)

    def l2(v):
        return float(np.sqrt(np.sum(v * v) * grid.cell_area))

    rel_kin = l2(r_kinematic.values) / max(l2(a), l2(b))
    rel_bern = l2(r_bernoulli.values) / max(l2(left), l2(right))
    return r_kinematic, r_bernoulli, rel_kin, rel_bern


def picard_step(problem, state):
    """One application of the fixed-point map ``phi -> L_eps^-1 rhs(phi)``.

    Returns ``(new_state, update_star_norm, pre_projection_parity_defect)``.
    """
    rhs, pdef = fixed_point_rhs(problem, state, parts=True)
    phi = solve_Leps(problem.linctx, rhs, x0=state.phi if state.phi.max_abs() > 0 else None)
    psi, sweeps, ratio = solve_psi(problem, phi)
    new = SolutionState(problem, phi, psi, iteration=state.iteration + 1,
                        inner_iterations=sweeps, inner_ratio=ratio)
    return new, norm(phi - state.phi, "star"), pdef


def initial_state(problem):
    """``phi = 0`` with ``psi`` solved for it."""
    phi = RealField.zeros(problem.grid, Parity.HOX)
    psi, sweeps, ratio = solve_psi(problem, phi)
    return SolutionState(problem, phi, psi, inner_iterations=sweeps, inner_ratio=ratio)


@dataclass
class RunReport:
    """Per-iteration history and final diagnostics of one solve."""

    config: dict
    converged: bool = False
    iterations: int = 0
    updates: list = field(default_factory=list)
    contraction: list = field(default_factory=list)
    inner_sweeps: list = field(default_factory=list)
    parity_defects: list = field(default_factory=list)
    norms: dict = field(default_factory=dict)
    psi_norms: dict = field(default_factory=dict)
    r_kinematic: float = float("nan")
    r_bernoulli: float = float("nan")
    E_eta: float = float("nan")
    E_xi: float = float("nan")
    phi_star_over_eps: float = float("nan")
    psi_h_over_eps: float = float("nan")
    outside_proven_regime: bool = False
    diagnosis: str = ""
    wall_s: float = 0.0

    @property
    def last_contraction(self):
        return self.contraction[-1] if self.contraction else float("nan")

    def to_dict(self):
        return asdict(self)


def _config_echo(cfg):
    g = cfg.grid
    return {
        "eps": g.eps, "sigma": g.sigma, "Lx": g.Lx, "Ly": g.Ly, "Nx": g.Nx, "Ny": g.Ny,
        "tol_outer": cfg.tol_outer, "tol_inner": cfg.tol_inner, "tol_linear": cfg.tol_linear,
        "maxiter": cfg.maxiter, "dno_mode": cfg.dno_mode, "Nz": cfg.oracle.nz,
        "oracle_tol": cfg.oracle.tol, "lump_source": cfg.lump_source,
    }


def leading_order_gaps(problem, state):
    """``E_eta = |eta/eps^2 - d1 q|_inf`` and ``E_xi = |xi/eps - q|_inf``."""
    eps = problem.eps
    e_eta = float(np.max(np.abs(state.eta.values / eps ** 2 - problem.q1.values)))
    e_xi = float(np.max(np.abs(state.xi.values / eps - problem.q.values)))
    return e_eta, e_xi


def solve_fixed_point(cfg=None, problem=None, callback=None):
    """Iterate :func:`picard_step` from ``phi = 0`` to convergence.

    Returns ``(state, report)``.  Raises :class:`IterationError` carrying the
    report when ``maxiter`` is reached; errors from the linear solver or the
    oracle propagate.
    """
    t0 = time.perf_counter()
    cfg = problem.config if problem is not None else (SolverConfig() if cfg is None else cfg)
    problem = build_problem(cfg) if problem is None else problem
    report = RunReport(config=_config_echo(cfg), outside_proven_regime=cfg.outside_proven_regime)
    state = initial_state(problem)
    report.inner_sweeps.append(state.inner_iterations)
    for _ in range(cfg.maxiter):
        state, upd, pdef = picard_step(problem, state)
        report.updates.append(upd)
        report.parity_defects.append(pdef)
        report.inner_sweeps.append(state.inner_iterations)
        if len(report.updates) > 1 and report.updates[-2] > 0:
            report.contraction.append(upd / report.updates[-2])
        if callback is not None:
            callback(state, upd)
        if not np.isfinite(upd):
            break
        if upd <= cfg.tol_outer:
            report.converged = True
            break
    report.iterations = state.iteration
    _finalise(problem, state, report)
    report.wall_s = time.perf_counter() - t0
    if not report.converged:
        report.diagnosis = (f"no convergence in {cfg.maxiter} outer steps; last update "
                            f"{report.updates[-1]:.3e}, last ratio {report.last_contraction:.3e}")
        raise IterationError(report.diagnosis, report.updates, report=report)
    return state, report


def _finalise(problem, state, report):
    eps = problem.eps
    report.norms = {tag: norm(state.phi, tag) for tag in NORM_TAGS}
    report.psi_norms = {"h": norm(state.psi, "h"),
                        "F5": norm(compute_hfrak(problem, state.phi, state.psi), "F5")}
    report.phi_star_over_eps = report.norms["star"] / eps
    report.psi_h_over_eps = report.psi_norms["h"] / eps
    if report.config.get("dno_mode", "exact") == "exact":
        _, _, report.r_kinematic, report.r_bernoulli = water_wave_residuals(problem, state)
    report.E_eta, report.E_xi = leading_order_gaps(problem, state)


def fit_order(eps_values, errors):
    """Least-squares slope of ``log error`` against ``log eps``."""
    x = np.log(np.asarray(eps_values, float))
    y = np.log(np.asarray(errors, float))
    return float(np.polyfit(x, y, 1)[0])


def decay_order_check(results, lo=0.8, hi=1.3):
    """Table of ``(eps, E_eta, E_xi)`` and fitted decay orders.

    ``results`` maps eps to a converged :class:`RunReport`.  Returns a dict
    with the rows, both orders and the pass flag for ``[lo, hi]``.
    """
    for eps, rep in results.items():
        if not rep.converged:
            raise IterationError(f"sweep member eps = {eps} did not converge", rep.updates,
                                 report=rep)
    eps = sorted(results)
    e_eta = [results[e].E_eta for e in eps]
    e_xi = [results[e].E_xi for e in eps]
    o_eta, o_xi = fit_order(eps, e_eta), fit_order(eps, e_xi)
    return {
        "rows": [{"eps": e, "E_eta": a, "E_xi": b} for e, a, b in zip(eps, e_eta, e_xi)],
        "order_eta": o_eta, "order_xi": o_xi,
        "passed": bool(lo <= o_eta <= hi and lo <= o_xi <= hi),
    }


def fixed_point_map(problem, phi):
    """``N(phi) = L_eps^-1 rhs(phi, psi(phi))`` with ``psi`` solved for ``phi``."""
    psi, _, _ = solve_psi(problem, phi)
    st = SolutionState(problem, phi, psi)
    return solve_Leps(problem.linctx, fixed_point_rhs(problem, st), x0=phi if phi.max_abs() > 0 else None)


def contraction_probe(problem, center, n_pairs=3, scale=None, seed=0):
    """Sup over random pairs of ``|N(phi1) - N(phi2)|_* / |phi1 - phi2|_*``.

    Pairs are ``center + delta_i`` with smooth random Hox perturbations of
    star-norm ``scale`` (default ``eps^2``).  Widths are drawn log-uniformly
    in [0.5, 8] from a fixed seed.  Returns ``(kappa, ratios)``.
    """
    grid, eps = problem.grid, problem.eps
    scale = eps ** 2 if scale is None else scale
    rng = np.random.default_rng(seed)
    X, Y = grid.mesh
    ratios = []
    for _ in range(n_pairs):
        pair = []
        for _ in range(2):
            a = rng.uniform(0.5, 1.5, size=3)
            w = float(np.exp(rng.uniform(np.log(0.5), np.log(8.0))))
            bump = (X * (a[0] + a[1] * np.cos(X / w) + a[2] * np.cos(Y / w))
                    * np.exp(-(X ** 2 + Y ** 2) / (2 * w * w)))
            d = project_parity(RealField(grid, bump), Parity.HOX)
            d = d * (scale / norm(d, "star"))
            pair.append(RealField(grid, center.values + d.values, Parity.HOX))
        n1, n2 = fixed_point_map(problem, pair[0]), fixed_point_map(problem, pair[1])
        ratios.append(norm(n1 - n2, "star") / norm(pair[0] - pair[1], "star"))
    return max(ratios), ratios

"""Invariant suites run by the ``verify`` and ``dno-check`` commands.

Every check returns a record ``{"value", "limit", "passed"}``; a suite
collects records under ``checks`` and passes when all of them do.
"""

import numpy as np

from . import dno, linear, lump, spectral, symbols
from .spectral import GridSpec, Parity, RealField, project_parity

__all__ = [
    "check", "suite", "spectral_suite", "symbol_suite", "lump_suite", "dno_suite",
    "dno_scaling_rows", "constant_eta_identities", "linear_suite", "run_all", "symbol_rows",
]


def check(value, limit, mode="le"):
    value = float(value)
    ok = value <= limit if mode == "le" else value >= limit
    return {"value": value, "limit": float(limit), "passed": bool(ok and np.isfinite(value))}


def check_range(value, lo, hi):
    value = float(value)
    return {"value": value, "limit": [float(lo), float(hi)], "passed": bool(lo <= value <= hi)}


def suite(name, checks, **extra):
    out = {"name": name, "checks": checks, "passed": all(c["passed"] for c in checks.values())}
    out.update(extra)
    return out


def _smooth_field(grid, rng, parity=Parity.NONE, width=4.0):
    X, Y = grid.mesh
    v = np.zeros(grid.shape)
    for _ in range(3):
        x0, y0 = rng.uniform(-0.3 * grid.Lx, 0.3 * grid.Lx), rng.uniform(-0.3 * grid.Ly, 0.3 * grid.Ly)
        v += rng.normal() * np.exp(-((X - x0) ** 2 + (Y - y0) ** 2) / (2 * width ** 2))
    f = RealField(grid, v)
    return project_parity(f, parity) if parity is not Parity.NONE else f


def spectral_suite(grid, seed=0):
    rng = np.random.default_rng(seed)
    f = RealField(grid, rng.standard_normal(grid.shape))
    back = spectral.inverse(spectral.transform(f))
    roundtrip = np.max(np.abs(back.values - f.values)) / np.max(np.abs(f.values))
    coeffs = spectral.transform(f).coeffs
    parseval = abs(np.sum(np.abs(coeffs) ** 2) * grid.area - np.sum(f.values ** 2) * grid.cell_area)
    parseval /= np.sum(f.values ** 2) * grid.cell_area
    a, b = _smooth_field(grid, rng), _smooth_field(grid, rng)
    lhs = spectral.derivative(spectral.product(a, b), "x")
    rhs = (spectral.product(a, spectral.derivative(b, "x"))
           + spectral.product(spectral.derivative(a, "x"), b))
    prule = np.max(np.abs(lhs.values - rhs.values)) / max(np.max(np.abs(lhs.values)), 1e-300)
    return suite("spectral", {
        "roundtrip": check(roundtrip, 1e-13),
        "parseval": check(parseval, 1e-12),
        "product_rule": check(prule, 1e-10),
    })


def symbol_suite(grid, n_samples=100_000):
    x = np.logspace(-8, np.log10(50.0), n_samples)
    rep = symbols.tanh_bounds_check(x)
    table = symbols.build_symbols(grid)
    env = symbols.l2_envelope_check(table)
    z = symbols.Z_SWITCH
    gap = abs(symbols.l2_inner_series(z) - symbols.l2_inner_direct(z)) / symbols.l2_inner_direct(z)
    return suite("symbols", {
        "tanh_min_slack": check(rep.min_slack, 0.0, mode="ge"),
        "l2_positive_off_origin": check(float(env.positive_off_origin), 1.0, mode="ge"),
        "l2_zero_at_origin": check(float(env.zero_at_origin), 1.0, mode="ge"),
        "envelope_C_finite": check(float(np.isfinite(env.C)), 1.0, mode="ge"),
        "envelope_c0_positive": (check(env.c0, 0.0, mode="ge") if env.n_large_k
                                 else {"value": None, "limit": 0.0, "passed": True}),
        "smallk_branch_gap": check(gap, 1e-10),
    }, envelope={"C": env.C, "c0": env.c0, "C_at": env.C_at, "c0_at": env.c0_at,
                 "n_large_k": env.n_large_k})


def lump_suite(grid):
    params = lump.LumpParams.from_grid(grid)
    res = lump.lump_petviashvili(params, grid, full_output=True)
    kp = lump.kpi_residual(res.q, params)
    q2 = spectral.derivative(res.q, "x", 2)
    return suite("lump", {
        "petviashvili_residual": check(res.residual, 1e-10),
        "petviashvili_factor": check(abs(res.factor - 1.0), 1e-8),
        "kp_residual_relative": check(kp.max_abs() / q2.max_abs(), 1e-8),
    }, iterations=res.iterations, q_max=res.q.max_abs(), q_min=float(res.q.values.min()))


def _probe_xi(grid):
    """Odd Gaussian probe, narrow enough to be negligible at the box edge."""
    X, Y = grid.mesh
    s2 = min(20.0, min(grid.Lx, grid.Ly) ** 2 / 45.0)
    return project_parity(RealField(grid, X * np.exp(-(X ** 2 + Y ** 2) / s2)), Parity.HOX)


def _constant_eta(grid, eta0, cfg):
    X, _ = grid.mesh
    m = grid.m1[1]
    xi = RealField(grid, np.sin(m * X), Parity.HOX)
    eta = RealField(grid, np.full(grid.shape, eta0), Parity.HE)
    G = dno.g_oracle(dno.SurfaceState(grid, eta, xi), cfg)
    k = grid.eps * m
    exact = k * np.tanh((1.0 + eta0) * k) * xi.values
    return np.max(np.abs(G.values - exact)) / np.max(np.abs(exact))


def constant_eta_identities(grid, eta0=0.05):
    """Gaps of ``G1``, ``G2`` against their constant-depth symbols.

    For constant ``eta0`` the Taylor coefficients of ``|k| tanh((1 + eta)|k|)``
    are ``eta0 |k|^2 sech^2|k|`` and ``-eta0^2 |k|^3 tanh|k| sech^2|k|``.
    """
    xi = _probe_xi(grid)
    eta = RealField(grid, np.full(grid.shape, eta0), Parity.HE)
    M1, M2 = grid.wavenumbers
    k = np.sqrt((grid.eps * M1) ** 2 + (grid.eps ** 2 * M2) ** 2)
    sech2 = 1.0 / np.cosh(k) ** 2
    gaps = []
    for op, sym in ((dno.g1_apply, eta0 * k ** 2 * sech2),
                    (dno.g2_apply, -eta0 ** 2 * k ** 3 * np.tanh(k) * sech2)):
        want = spectral.apply_symbol(xi, sym)
        gaps.append(np.max(np.abs(op(eta, xi).values - want.values)) / want.max_abs())
    return tuple(gaps)


def dno_scaling_rows(grid, cfg, amplitudes=(0.08, 0.04, 0.02), seed=0):
    """Remainder norms for ``eta = a * eta_base`` and the halving ratios."""
    rng = np.random.default_rng(seed)
    base = _smooth_field(grid, rng, Parity.HE, width=3.0)
    base = base * (1.0 / base.max_abs())
    xi = _smooth_field(grid, rng, Parity.HOX, width=3.0)
    rows = []
    prev = None
    for a in amplitudes:
        st = dno.SurfaceState(grid, base * a, xi)
        rem = dno.remainders(st, cfg)
        n2, n3 = spectral.l2_norm(rem.r2), spectral.l2_norm(rem.r3)
        row = {"amplitude": a, "R2": n2, "R3": n3, "R2_ratio": float("nan"),
               "R3_ratio": float("nan"), "iterations": rem.iterations}
        if prev is not None:
            row["R2_ratio"], row["R3_ratio"] = prev[0] / n2, prev[1] / n3
        rows.append(row)
        prev = (n2, n3)
    return rows


def dno_suite(grid, cfg=None):
    cfg = dno.OracleConfig() if cfg is None else cfg
    xi = _probe_xi(grid)
    flat = dno.g_oracle(dno.SurfaceState(grid, RealField.zeros(grid, Parity.HE), xi), cfg)
    g0 = dno.g0_apply(xi)
    flat_gap = np.max(np.abs(flat.values - g0.values)) / np.max(np.abs(g0.values))
    rows = dno_scaling_rows(grid, cfg)
    g1_gap, g2_gap = constant_eta_identities(grid)
    checks = {
        "flat_symbol_exact": check(flat_gap, 1e-10),
        "constant_eta_0.05": check(_constant_eta(grid, 0.05, cfg), 1e-8),
        "constant_eta_0.01": check(_constant_eta(grid, 0.01, cfg), 1e-8),
        "g1_constant_eta": check(g1_gap, 1e-9),
        "g2_constant_eta": check(g2_gap, 1e-9),
    }
    for i, row in enumerate(rows[1:], 1):
        checks[f"R2_halving_{i}"] = check_range(row["R2_ratio"], 3.2, 4.8)
        checks[f"R3_halving_{i}"] = check_range(row["R3_ratio"], 6.0, 10.0)
    return suite("dno", checks, scaling=rows)


def linear_suite(grid, seed=0):
    rng = np.random.default_rng(seed)
    params = lump.LumpParams.from_grid(grid)
    q = lump.torus_lump(params, grid)
    q1 = spectral.derivative(q, "x")
    ctx = linear.build_context(grid, q1, tol=1e-10)
    u = _smooth_field(grid, rng, Parity.HOX)
    v = _smooth_field(grid, rng, Parity.HOX)

    def coupling(w):
        return spectral.derivative(spectral.product(q1, spectral.derivative(w, "x")), "x")

    a, b = spectral.inner(coupling(u), v), spectral.inner(u, coupling(v))
    sym_gap = abs(a - b) / max(abs(a), abs(b))
    Lu = linear.apply_Leps(ctx, u)
    raw = RealField(grid, linear._apply_values(ctx, u.values))
    parity_gap = spectral.parity_defect(raw, Parity.HOX)
    rhs = Lu
    phi = linear.solve_Leps(ctx, rhs)
    from .norms import norm
    roundtrip = norm(phi - u, "a") / norm(u, "a")
    rep = linear.eig_L(ctx)
    return suite("linear", {
        "coupling_symmetry": check(sym_gap, 1e-10),
        "hox_preserved": check(parity_gap, 1e-9),
        "solve_roundtrip_a": check(roundtrip, 1e-7),
        "n_negative_is_one": check_range(rep.n_negative, 1, 1),
        "lambda1_negative": check(rep.lambda1, 0.0, mode="le"),
        "phi0_slice_integral": check(rep.slice_integral, 1e-8),
    }, eigen={"lambda1": rep.lambda1, "n_negative": rep.n_negative, "residual": rep.residual,
              "lowest": [float(x) for x in rep.eigenvalues[:5]]})


def symbol_rows(grid):
    """``(m1, m2, sigma_L1, sigma_L2)`` for every wavenumber of ``grid``."""
    table = symbols.build_symbols(grid)
    M1, M2 = grid.wavenumbers
    return np.column_stack([M1.ravel(), M2.ravel(), table.l1.ravel(), table.l2.ravel()])


def run_all(grid, oracle_cfg=None, seed=0, dno_grid=None):
    """All suites; the DNO suite may run on a coarser grid."""
    dgrid = grid if dno_grid is None else dno_grid
    return [
        spectral_suite(grid, seed),
        symbol_suite(grid),
        lump_suite(grid),
        dno_suite(dgrid, oracle_cfg),
        linear_suite(grid, seed),
    ]


def default_dno_grid(grid):
    """Coarser companion grid for the oracle checks (``N = 128``)."""
    return GridSpec(Lx=grid.Lx, Ly=grid.Ly, Nx=min(grid.Nx, 128), Ny=min(grid.Ny, 128),
                    eps=grid.eps, sigma=grid.sigma)

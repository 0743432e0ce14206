#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

"""
Noether currents of the MFG Lagrangian L = -m u_t + eps m_x u_x + m H(u_x) - F(m).

For a generator with characteristics Q_u = eta_u - xi_t u_t - xi_x u_x and
Q_m = eta_m - xi_t m_t - xi_x m_x and divergence potentials (V_t, V_x),

    T^t = xi_t L + Q_u dL/du_t                 - V_t
    T^x = xi_x L + Q_u dL/du_x + Q_m dL/dm_x   - V_x

and D_t T^t + D_x T^x + Q_u (dL/du) + Q_m (dL/dm) vanishes identically when the
generator is a variational or divergence symmetry. All currents use the convention
D_t T^t + D_x T^x = 0.

In d space dimensions the same construction for the time and space translations gives
    T^t = eps grad(m).grad(u) + m H(grad u) - F(m),
    T^i = -(eps (u_t m_i + m_t u_i) + m u_t H_i(grad u)),
and (-m, eps m_i + m H_i) for the gauge u -> u + a; only their one-dimensional
restrictions are evaluated here.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from mfglab.errors import InapplicableLawError
from mfglab.grid import (
    AnalyticField,
    Field2D,
    GridSpec,
    JetPoint,
    SolutionPair,
    jet_from_analytic,
    spatial_derivative,
    time_derivative,
)
from mfglab.model import (
    CouplingSpec,
    HamiltonianSpec,
    ProblemSpec,
    eval_coupling,
    eval_coupling_primitive,
    eval_hamiltonian,
    gamma_star,
    lagrangian_partials,
)
from mfglab.solver import PicardConfig, fp_flux_balance
from mfglab.symmetry import (
    EXPONENT_TOL,
    ZERO,
    CoefficientFunction,
    Generator,
    M,
    X,
    coefficient,
    generator_x1,
    generator_x2,
    generator_x3,
    generator_x4a,
    generator_x4b,
    generator_x5c,
    generator_xc,
    generator_y4c,
    require_canonical,
    total_derivatives,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConservationLaw:
    id: str
    generator: Generator
    V_t: CoefficientFunction
    V_x: CoefficientFunction
    density: Callable
    flux: Callable
    applicable: Callable
    sign_note: str = ""
    interpretation: str = ""

    def currents(self, jet: JetPoint, spec: ProblemSpec):
        return self.density(jet, spec), self.flux(jet, spec)

    def check_applicable(self, spec: ProblemSpec) -> None:
        if not self.applicable(spec.hamiltonian, spec.coupling):
            raise InapplicableLawError(
                f"law {self.id} does not hold for H = {spec.hamiltonian.describe()}, "
                f"f = {spec.coupling.to_dict()}"
            )


def _args(jet):
    return (jet.t, jet.x, jet.u, jet.m)


def characteristics(g: Generator, jet: JetPoint):
    xi_t, xi_x, eta_u, eta_m = (c.value(*_args(jet)) for c in g.coefficients)
    Q_u = eta_u - xi_t * jet.u_t - xi_x * jet.u_x
    Q_m = eta_m - xi_t * jet.m_t - xi_x * jet.m_x
    return Q_u, Q_m


def noether_current(
    g: Generator,
    V_t: CoefficientFunction,
    V_x: CoefficientFunction,
    jet: JetPoint,
    spec: ProblemSpec,
):
    """(T^t - V^t, T^x - V^x) assembled from the generator and the Lagrangian"""
    lp = lagrangian_partials(jet, spec)
    xi_t = g.xi_t.value(*_args(jet))
    xi_x = g.xi_x.value(*_args(jet))
    Q_u, Q_m = characteristics(g, jet)

    Tt = xi_t * lp.L + Q_u * lp.L_ut
    Tx = xi_x * lp.L + Q_u * lp.L_ux + Q_m * lp.L_mx
    return Tt - V_t.value(*_args(jet)), Tx - V_x.value(*_args(jet))


def noether_identity_defect(
    g: Generator,
    V_t: CoefficientFunction,
    V_x: CoefficientFunction,
    f: AnalyticField,
    t,
    x,
    spec: ProblemSpec,
):
    """
    D_t(T^t - V^t) + D_x(T^x - V^x) + Q_u dL/du + Q_m dL/dm on the analytic field,
    with every derivative in closed form
    """
    eps = spec.epsilon
    jet = jet_from_analytic(f, t, x)
    u_tt = f.derivative("u", 2, 0, t, x)
    args = _args(jet)

    xi_t, xi_x = g.xi_t.value(*args), g.xi_x.value(*args)
    Dt_xt, Dx_xt = total_derivatives(g.xi_t, jet)
    Dt_xx, Dx_xx = total_derivatives(g.xi_x, jet)
    Dt_eu, Dx_eu = total_derivatives(g.eta_u, jet)
    _, Dx_em = total_derivatives(g.eta_m, jet)

    Q_u, Q_m = characteristics(g, jet)
    Dt_Qu = Dt_eu - Dt_xt * jet.u_t - xi_t * u_tt - Dt_xx * jet.u_x - xi_x * jet.u_tx
    Dx_Qu = Dx_eu - Dx_xt * jet.u_t - xi_t * jet.u_tx - Dx_xx * jet.u_x - xi_x * jet.u_xx
    Dx_Qm = Dx_em - Dx_xt * jet.m_t - xi_t * jet.m_tx - Dx_xx * jet.m_x - xi_x * jet.m_xx

    H = eval_hamiltonian(spec.hamiltonian, jet.u_x, 0)
    dH = eval_hamiltonian(spec.hamiltonian, jet.u_x, 1)
    d2H = eval_hamiltonian(spec.hamiltonian, jet.u_x, 2)
    fm = eval_coupling(spec.coupling, jet.m, 0)
    L = lagrangian_partials(jet, spec).L

    Dt_L = (
        -jet.m_t * jet.u_t
        - jet.m * u_tt
        + eps * (jet.m_tx * jet.u_x + jet.m_x * jet.u_tx)
        + jet.m_t * H
        + jet.m * dH * jet.u_tx
        - fm * jet.m_t
    )
    Dx_L = (
        -jet.m_x * jet.u_t
        - jet.m * jet.u_tx
        + eps * (jet.m_xx * jet.u_x + jet.m_x * jet.u_xx)
        + jet.m_x * H
        + jet.m * dH * jet.u_xx
        - fm * jet.m_x
    )

    Dt_Tt = Dt_xt * L + xi_t * Dt_L - Dt_Qu * jet.m - Q_u * jet.m_t
    Dx_Tx = (
        Dx_xx * L
        + xi_x * Dx_L
        + Dx_Qu * (eps * jet.m_x + jet.m * dH)
        + Q_u * (eps * jet.m_xx + jet.m_x * dH + jet.m * d2H * jet.u_xx)
        + Dx_Qm * eps * jet.u_x
        + Q_m * eps * jet.u_xx
    )
    Dt_Vt, _ = total_derivatives(V_t, jet)
    _, Dx_Vx = total_derivatives(V_x, jet)

    dL_du = jet.m_t - eps * jet.m_xx - jet.m_x * dH - jet.m * d2H * jet.u_xx
    dL_dm = -jet.u_t - eps * jet.u_xx + H - fm

    return Dt_Tt - Dt_Vt + Dx_Tx - Dx_Vx + Q_u * dL_du + Q_m * dL_dm


# closed-form currents, canonical convention D_t T^t + D_x T^x = 0


def _clg1(jet, spec):
    eps = spec.epsilon
    H = eval_hamiltonian(spec.hamiltonian, jet.u_x, 0)
    dH = eval_hamiltonian(spec.hamiltonian, jet.u_x, 1)
    F = eval_coupling_primitive(spec.coupling, jet.m)
    Tt = eps * jet.m_x * jet.u_x + jet.m * H - F
    Tx = -(eps * (jet.u_t * jet.m_x + jet.m_t * jet.u_x) + jet.m * jet.u_t * dH)
    return Tt, Tx


def _clg2(jet, spec):
    eps = spec.epsilon
    H = eval_hamiltonian(spec.hamiltonian, jet.u_x, 0)
    dH = eval_hamiltonian(spec.hamiltonian, jet.u_x, 1)
    F = eval_coupling_primitive(spec.coupling, jet.m)
    Tt = jet.m * jet.u_x
    Tx = -(jet.m * jet.u_t + eps * jet.m_x * jet.u_x + jet.m * (jet.u_x * dH - H) + F)
    return Tt, Tx


def _clg3(jet, spec):
    dH = eval_hamiltonian(spec.hamiltonian, jet.u_x, 1)
    return -np.asarray(jet.m), spec.epsilon * jet.m_x + jet.m * dH


def _cl4a(jet, spec):
    eps, alpha = spec.epsilon, spec.coupling.alpha
    p = spec.hamiltonian.exponent
    gs = gamma_star(p)
    t, x, u, m = jet.t, jet.x, jet.u, jet.m
    u_t, m_t, u_x, m_x = jet.u_t, jet.m_t, jet.u_x, jet.m_x
    Fm = alpha / (gs + 1.0) * m ** (gs + 1.0)

    Tt = (
        2 * (p - 1) * t * (eps * m_x * u_x + m * u_x**p / p - Fm)
        + (p - 1) * x * m * u_x
        - (p - 2) * m * u
    )
    Tx = -(
        2 * (p - 1) * t * (eps * (u_t * m_x + m_t * u_x) + m * u_t * u_x ** (p - 1))
        + (p - 1) * x * (m * u_t + eps * m_x * u_x + (p - 1) / p * m * u_x**p + Fm)
        - (p - 2) * u * (eps * m_x + m * u_x ** (p - 1))
        + (2 * p - 3) * eps * m * u_x
    )
    return Tt, Tx


def _cl4b(jet, spec):
    eps, alpha, k = spec.epsilon, spec.coupling.alpha, spec.hamiltonian.k
    t, x, u, m = jet.t, jet.x, jet.u, jet.m
    u_t, m_t, u_x, m_x = jet.u_t, jet.m_t, jet.u_x, jet.m_x
    E = np.exp(k * u_x)
    Fm = 2.0 * alpha / 3.0 * m**1.5

    Tt = 2 * t * (eps * m_x * u_x + m * E / k - Fm) + x * m * (u_x + 1.0 / k) - m * u
    Tx = -(
        2 * t * (eps * (u_t * m_x + m_t * u_x) + m * u_t * E)
        + x * (m * u_t + eps * m_x * u_x + m * u_x * E + eps / k * m_x + Fm)
        - u * (eps * m_x + m * E)
        + 2 * eps * m * u_x
        - eps / k * m
    )
    return Tt, Tx


def _clc(jet, spec):
    eps = spec.epsilon
    t, x, m = jet.t, jet.x, jet.m
    u_t, u_x, m_x = jet.u_t, jet.u_x, jet.m_x
    F = eval_coupling_primitive(spec.coupling, m)

    Tt = m * (t * u_x + x)
    Tx = -(
        t * (m * u_t + eps * m_x * u_x + 0.5 * m * u_x**2 + F)
        + x * (eps * m_x + m * u_x)
        - eps * m
    )
    return Tt, Tx


def _cl4a_mod(jet, spec):
    eps, alpha = spec.epsilon, spec.coupling.alpha
    t, x, m = jet.t, jet.x, jet.m
    u_t, m_t, u_x, m_x = jet.u_t, jet.m_t, jet.u_x, jet.m_x
    Fm = alpha / 3.0 * m**3

    Tt = 2 * t * (eps * m_x * u_x + 0.5 * m * u_x**2 - Fm) + x * m * u_x
    Tx = -(
        2 * t * (eps * (u_t * m_x + m_t * u_x) + m * u_t * u_x)
        + x * (m * u_t + eps * m_x * u_x + 0.5 * m * u_x**2 + Fm)
        + eps * m * u_x
    )
    return Tt, Tx


def _cl5a(jet, spec):
    eps, alpha = spec.epsilon, spec.coupling.alpha
    t, x, m = jet.t, jet.x, jet.m
    u_t, m_t, u_x, m_x = jet.u_t, jet.m_t, jet.u_x, jet.m_x
    Fm = alpha / 3.0 * m**3

    Tt = (
        t**2 * (eps * m_x * u_x + 0.5 * m * u_x**2 - Fm)
        + t * x * m * u_x
        + 0.5 * x**2 * m
        - eps * t * m
    )
    Tx = -(
        t**2 * (eps * (u_t * m_x + m_t * u_x) + m * u_t * u_x)
        + t * x * (m * u_t + eps * m_x * u_x + 0.5 * m * u_x**2 + Fm)
        + 0.5 * x**2 * (eps * m_x + m * u_x)
        - eps**2 * t * m_x
        - eps * x * m
    )
    return Tt, Tx


def _near(value, target):
    return value is not None and abs(value - target) <= EXPONENT_TOL


def _power_f(f: CouplingSpec, gamma=None):
    return f.family == "power" and (gamma is None or _near(f.gamma, gamma))


def _always(H, f):
    return True


def _cl4a_applies(H: HamiltonianSpec, f: CouplingSpec):
    return (
        H.family in ("power", "cubic")
        and H.h2 == 0.0
        and f.family == "power"
        and H.exponent != 1.5
        and _near(f.gamma, gamma_star(H.exponent))
    )


def _cl4b_applies(H, f):
    return H.family == "exponential" and H.h2 == 0.0 and _power_f(f, 0.5)


def _quadratic(H, f):
    return H.family == "quadratic"


def _quadratic_m2(H, f):
    return H.family == "quadratic" and _power_f(f, 2.0)


def _law(law_id, g, V_t, V_x, fn, applies, sign_note, interpretation=""):
    return ConservationLaw(
        id=law_id,
        generator=g,
        V_t=V_t,
        V_x=V_x,
        density=lambda jet, spec: fn(jet, spec)[0],
        flux=lambda jet, spec: fn(jet, spec)[1],
        applicable=applies,
        sign_note=sign_note,
        interpretation=interpretation,
    )


def catalog_conservation_laws(spec: ProblemSpec) -> List[ConservationLaw]:
    require_canonical(spec)
    H, f, eps = spec.hamiltonian, spec.coupling, spec.epsilon

    laws = [
        _law("CLG1", generator_x1(), ZERO, ZERO, _clg1, _always,
             "D_t[A] - D_x[B] = 0: T^t = A, T^x = -B"),
        _law("CLG2", generator_x2(), ZERO, ZERO, _clg2, _always,
             "D_t[A] - D_x[B] = 0: T^t = A, T^x = -B", "mean control"),
        _law("CLG3", generator_x3(), ZERO, ZERO, _clg3, _always,
             "-D_t[m] + D_x[B] = 0: T^t = -m, T^x = B", "probability mass"),
    ]

    if _cl4a_applies(H, f):
        laws.append(
            _law("CL4a", generator_x4a(H.exponent, f.gamma), ZERO, ZERO, _cl4a,
                 _cl4a_applies, "D_t[A] - D_x[B] = 0: T^t = A, T^x = -B")
        )
    if _cl4b_applies(H, f):
        laws.append(
            _law("CL4b", generator_x4b(H.k, f.gamma), ZERO, coefficient(-(eps / H.k) * M),
                 _cl4b, _cl4b_applies, "D_t[A] - D_x[B] = 0: T^t = A, T^x = -B")
        )
    if _quadratic(H, f):
        laws.append(
            _law("CL_c", generator_xc(), ZERO, coefficient(-eps * M), _clc, _quadratic,
                 "D_t[A] - D_x[B] = 0: T^t = A, T^x = -B", "centre of mass motion")
        )
    if _quadratic_m2(H, f):
        laws.append(
            _law("CL4a_mod", generator_y4c(), ZERO, ZERO, _cl4a_mod, _quadratic_m2,
                 "D_t[A] - D_x[B] = 0: T^t = A, T^x = -B")
        )
        laws.append(
            _law("CL5a", generator_x5c(eps), ZERO, coefficient(-eps * X * M), _cl5a,
                 _quadratic_m2, "D_t[A] - D_x[B] = 0: T^t = A, T^x = -B")
        )

    return laws


def assembled_law(
    g: Generator,
    V_t: CoefficientFunction = ZERO,
    V_x: CoefficientFunction = ZERO,
    law_id: str = "assembled-custom",
    applies: Optional[Callable] = None,
) -> ConservationLaw:
    """a law whose currents come from generic Noether assembly"""
    return ConservationLaw(
        id=law_id,
        generator=g,
        V_t=V_t,
        V_x=V_x,
        density=lambda jet, spec: noether_current(g, V_t, V_x, jet, spec)[0],
        flux=lambda jet, spec: noether_current(g, V_t, V_x, jet, spec)[1],
        applicable=applies or _always,
        sign_note="canonical",
    )


def numerical_jets(
    pair: SolutionPair, spec: ProblemSpec, use_time_stencil: bool = False
) -> JetPoint:
    """
    jets at every grid node; u_t and m_t come from the PDE right-hand sides
    (u_t = -eps u_xx + H - f, m_t = eps m_xx + (m H')_x) unless use_time_stencil
    """
    grid = pair.grid
    eps = spec.epsilon
    t, x = grid.mesh()
    m = pair.m.numpy()

    u_x = spatial_derivative(pair.u, 1).numpy() + pair.u_slope
    u_xx = spatial_derivative(pair.u, 2).numpy()
    m_x = spatial_derivative(pair.m, 1).numpy()
    m_xx = spatial_derivative(pair.m, 2).numpy()

    if use_time_stencil:
        u_t = time_derivative(pair.u).numpy()
        m_t = time_derivative(pair.m).numpy()
    else:
        H = eval_hamiltonian(spec.hamiltonian, u_x, 0)
        dH = eval_hamiltonian(spec.hamiltonian, u_x, 1)
        f = eval_coupling(spec.coupling, np.maximum(m, spec.coupling.floor))
        u_t = -eps * u_xx + H - f
        flux = Field2D(m * dH, grid, "diagnostic")
        m_t = eps * m_xx + spatial_derivative(flux, 1).numpy()

    u_tx = spatial_derivative(Field2D(u_t, grid), 1).numpy()
    m_tx = spatial_derivative(Field2D(m_t, grid), 1).numpy()

    return JetPoint(
        t=t, x=x, u=pair.u_full(), m=np.maximum(m, spec.coupling.floor),
        u_t=u_t, m_t=m_t, u_x=u_x, m_x=m_x,
        u_tx=u_tx, m_tx=m_tx, u_xx=u_xx, m_xx=m_xx,
    )


def _columns(jet: JetPoint, index, x_values, pair: SolutionPair) -> JetPoint:
    """
    jets at the given column indices but with x (and the linear part of u)
    continued non-periodically to x_values
    """
    take = {k: np.take(v, index, axis=1) for k, v in jet.as_dict().items()}
    u_periodic = take["u"] - pair.u_slope * take["x"]
    take["x"] = np.broadcast_to(x_values, take["x"].shape).astype(np.float64)
    take["u"] = u_periodic + pair.u_slope * take["x"]
    return JetPoint(**take)


def _scheme_mass_residual(
    pair: SolutionPair, spec: ProblemSpec, grid: GridSpec, cfg: Optional[PicardConfig]
) -> Tuple[Field2D, float]:
    # T^t = -m over one step, D_x T^x from the Kolmogorov scheme's edge fluxes
    m = pair.m.numpy()
    step = -(m[1:] - m[:-1]) / grid.dt + fp_flux_balance(pair, spec, grid, cfg)
    residual = Field2D(np.vstack([np.zeros_like(m[:1]), step]), grid, "diagnostic")
    return residual, float(np.max(np.abs(step)))


def divergence_residual(
    law: ConservationLaw,
    pair: SolutionPair,
    spec: ProblemSpec,
    grid: Optional[GridSpec] = None,
    use_time_stencil: bool = False,
    cfg: Optional[PicardConfig] = None,
    scheme_fluxes: bool = True,
) -> Tuple[Field2D, float]:
    """
    D_t T^t + D_x T^x with the grid stencils, and its sup-norm over interior time levels.

    The mass law of u -> u + a is balanced with the Kolmogorov scheme's own stencils
    unless scheme_fluxes is off: forward difference in time, upwind transport and
    staggered diffusion fluxes in space (cfg selects limiter and sub-stepping).
    Row n + 1 of that residual holds the step n -> n + 1.
    """
    law.check_applicable(spec)
    grid = grid or pair.grid
    N, dx = grid.num_cells, grid.dx

    if scheme_fluxes and law.generator.id == "X3":
        return _scheme_mass_residual(pair, spec, grid, cfg)

    jet = numerical_jets(pair, spec, use_time_stencil)
    Tt = law.density(jet, spec)
    Dt_Tt = time_derivative(Field2D(Tt, grid)).numpy()

    # flux on columns -1 .. N, x continued across the seam
    index = np.concatenate([[N - 1], np.arange(N), [0]])
    x_ext = np.arange(-1, N + 1, dtype=np.float64) * dx
    Tx = law.flux(_columns(jet, index, x_ext, pair), spec)
    Dx_Tx = (Tx[:, 2:] - Tx[:, :-2]) / (2.0 * dx)

    residual = Field2D(Dt_Tt + Dx_Tx, grid, "diagnostic")
    return residual, residual.sup_norm(interior=True)


def conserved_integral(
    law: ConservationLaw,
    pair: SolutionPair,
    spec: ProblemSpec,
    grid: Optional[GridSpec] = None,
    use_time_stencil: bool = False,
) -> List[Tuple[float, float]]:
    """
    Q(t) = int_0^L T^t dx + int_0^t (T^x(s, L) - T^x(s, 0)) ds; the seam term vanishes
    for currents without explicit x and balances the flux jump of the others
    """
    law.check_applicable(spec)
    grid = grid or pair.grid
    N, L, dx = grid.num_cells, grid.length, grid.dx

    jet = numerical_jets(pair, spec, use_time_stencil)
    Tt = law.density(jet, spec)

    first = np.zeros(1, dtype=int)
    Tt_L = law.density(_columns(jet, first, L, pair), spec)[:, 0]
    # trapezoid over [0, L] with the non-periodic continuation of T^t
    space = dx * (np.sum(Tt, axis=1) + 0.5 * (Tt_L - Tt[:, 0]))

    Tx_L = law.flux(_columns(jet, first, L, pair), spec)[:, 0]
    Tx_0 = law.flux(_columns(jet, first, 0.0, pair), spec)[:, 0]
    seam = cumulative_trapezoid(Tx_L - Tx_0, grid.t, initial=0.0)

    Q = space + seam
    return [(float(t), float(q)) for t, q in zip(grid.t, Q)]


def integral_drift(series: List[Tuple[float, float]]) -> float:
    """max_t |Q(t) - Q(t0)|"""
    q = np.array([v for _, v in series])
    return float(np.max(np.abs(q - q[0])))


def feedback_summary(pair: SolutionPair, spec: ProblemSpec) -> List[Tuple[float, float, float]]:
    """(t, mean control int m (-H'(u_x)) dx, mass) per time level"""
    grid = pair.grid
    u_x = spatial_derivative(pair.u, 1).numpy() + pair.u_slope
    control = -np.asarray(eval_hamiltonian(spec.hamiltonian, u_x, 1))
    m = pair.m.numpy()
    mean = np.sum(m * control, axis=1) * grid.dx
    mass = np.sum(m, axis=1) * grid.dx
    return [(float(t), float(c), float(s)) for t, c, s in zip(grid.t, mean, mass)]

#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

"""
Lie point generators X = xi_t d/dt + xi_x d/dx + eta_u d/du + eta_m d/dm of the MFG system,
their second prolongation, the determining-equation residuals (E1, E2) on the solution
manifold, the variational/divergence defect, the classified catalog and the finite flows.

Catalog coefficients are sympy expressions in (t, x, u, m); values, gradients and Hessians
are obtained by differentiating once at construction and lambdifying to numpy.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from mfglab.errors import DomainError, NonCanonicalError
from mfglab.grid import Field2D, GridSpec, JetPoint, SolutionPair, shift_rows
from mfglab.model import (
    ProblemSpec,
    eval_coupling,
    eval_hamiltonian,
    gamma_star,
    lagrangian_partials,
)
from mfglab.solver import pde_residuals

logger = logging.getLogger(__name__)

T, X, U, M = sp.symbols("t x u m", real=True)
VARIABLES = (T, X, U, M)

# matching tolerance for special exponents (gamma = gamma*, gamma = 1/2, gamma = 2)
EXPONENT_TOL = 1e-12


def _shape(*args):
    return np.broadcast(*[np.asarray(a) for a in args]).shape


class CoefficientFunction:
    """a scalar function of (t, x, u, m) with its gradient and Hessian"""

    display = "?"

    def value(self, t, x, u, m):
        raise NotImplementedError

    def grad(self, t, x, u, m):
        raise NotImplementedError

    def hess(self, t, x, u, m):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.display})"


class SymbolicCoefficient(CoefficientFunction):
    def __init__(self, expr):
        self.expr = sp.sympify(expr)
        gradient = [sp.diff(self.expr, v) for v in VARIABLES]
        hessian = [[sp.diff(g, v) for v in VARIABLES] for g in gradient]

        self._value = sp.lambdify(VARIABLES, self.expr, "numpy")
        self._grad = [sp.lambdify(VARIABLES, g, "numpy") for g in gradient]
        self._hess = [[sp.lambdify(VARIABLES, h, "numpy") for h in row] for row in hessian]
        self.display = sp.sstr(self.expr)

    @staticmethod
    def _call(fn, args):
        # lambdified constants return python scalars: broadcast to the jet shape
        return np.zeros(_shape(*args)) + np.asarray(fn(*args), dtype=np.float64)

    def value(self, t, x, u, m):
        return self._call(self._value, (t, x, u, m))

    def grad(self, t, x, u, m):
        return tuple(self._call(g, (t, x, u, m)) for g in self._grad)

    def hess(self, t, x, u, m):
        return tuple(tuple(self._call(h, (t, x, u, m)) for h in row) for row in self._hess)


class CallableCoefficient(CoefficientFunction):
    """
    user-supplied coefficient: value(t,x,u,m), grad(...) -> 4 partials,
    and optionally hess(...) -> 4x4 second partials (needed by the xx prolongation)
    """

    def __init__(self, value, grad, hess=None, display="custom"):
        self._value, self._grad, self._hess = value, grad, hess
        self.display = display

    def value(self, t, x, u, m):
        return np.zeros(_shape(t, x, u, m)) + np.asarray(self._value(t, x, u, m))

    def grad(self, t, x, u, m):
        shape = _shape(t, x, u, m)
        return tuple(np.zeros(shape) + np.asarray(g) for g in self._grad(t, x, u, m))

    def hess(self, t, x, u, m):
        if self._hess is None:
            raise DomainError(f"coefficient '{self.display}' has no second partials")
        shape = _shape(t, x, u, m)
        return tuple(
            tuple(np.zeros(shape) + np.asarray(h) for h in row)
            for row in self._hess(t, x, u, m)
        )


class LinearCombination(CoefficientFunction):
    def __init__(self, terms: Sequence[Tuple[float, CoefficientFunction]]):
        self.terms = tuple(terms)
        self.display = " + ".join(f"{c:g}*({f.display})" for c, f in self.terms)

    def value(self, *args):
        return sum(c * f.value(*args) for c, f in self.terms)

    def grad(self, *args):
        grads = [(c, f.grad(*args)) for c, f in self.terms]
        return tuple(sum(c * g[j] for c, g in grads) for j in range(4))

    def hess(self, *args):
        hess = [(c, f.hess(*args)) for c, f in self.terms]
        return tuple(
            tuple(sum(c * h[i][j] for c, h in hess) for j in range(4)) for i in range(4)
        )


def coefficient(expr) -> SymbolicCoefficient:
    return SymbolicCoefficient(expr)


ZERO = coefficient(0)


@dataclass(frozen=True)
class Generator:
    id: str
    xi_t: CoefficientFunction = ZERO
    xi_x: CoefficientFunction = ZERO
    eta_u: CoefficientFunction = ZERO
    eta_m: CoefficientFunction = ZERO
    params: Tuple[Tuple[str, float], ...] = ()
    applicability: str = ""

    @property
    def coefficients(self) -> Tuple[CoefficientFunction, ...]:
        return (self.xi_t, self.xi_x, self.eta_u, self.eta_m)

    def param(self, name: str) -> float:
        return dict(self.params)[name]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "coefficients": {
                "xi_t": self.xi_t.display,
                "xi_x": self.xi_x.display,
                "eta_u": self.eta_u.display,
                "eta_m": self.eta_m.display,
            },
            "params": dict(self.params),
            "applicability": self.applicability,
        }


def linear_combination(gens: Sequence[Generator], weights: Sequence[float]) -> Generator:
    coeffs = [
        LinearCombination([(w, g.coefficients[j]) for g, w in zip(gens, weights)])
        for j in range(4)
    ]
    return Generator("+".join(g.id for g in gens), *coeffs, applicability="combination")


def custom_generator(gen_id: str, xi_t, xi_x, eta_u, eta_m) -> Generator:
    """
    each argument is a CoefficientFunction, a sympy expression in (t, x, u, m),
    or a (value, grad[, hess]) tuple of callables
    """

    def wrap(c, name):
        if isinstance(c, CoefficientFunction):
            return c
        if isinstance(c, (tuple, list)):
            return CallableCoefficient(*c, display=f"{gen_id}.{name}")
        return coefficient(c)

    return Generator(
        gen_id,
        wrap(xi_t, "xi_t"),
        wrap(xi_x, "xi_x"),
        wrap(eta_u, "eta_u"),
        wrap(eta_m, "eta_m"),
        applicability="custom",
    )


def generator_x1() -> Generator:
    return Generator("X1", xi_t=coefficient(1), applicability="any H, any f")


def generator_x2() -> Generator:
    return Generator("X2", xi_x=coefficient(1), applicability="any H, any f")


def generator_x3() -> Generator:
    return Generator("X3", eta_u=coefficient(1), applicability="any H, any f")


def generator_xf(alpha: float) -> Generator:
    return Generator(
        "X_f",
        eta_u=coefficient(alpha * T),
        eta_m=coefficient(-M),
        params=(("alpha", alpha),),
        applicability="any H, f = alpha ln m",
    )


def generator_x4a(p: float, gamma: float) -> Generator:
    return Generator(
        "X^a_4",
        xi_t=coefficient(2 * (p - 1) * T),
        xi_x=coefficient((p - 1) * X),
        eta_u=coefficient((p - 2) * U),
        eta_m=coefficient(-(p / gamma) * M),
        params=(("p", p), ("gamma", gamma)),
        applicability="H = u_x^p / p (h2 = 0), f = alpha m^gamma",
    )


def generator_x4b(k: float, gamma: float) -> Generator:
    return Generator(
        "X^b_4",
        xi_t=coefficient(2 * T),
        xi_x=coefficient(X),
        eta_u=coefficient(U - X / k),
        eta_m=coefficient(-M / gamma),
        params=(("k", k), ("gamma", gamma)),
        applicability="H = exp(k u_x) / k (h2 = 0), f = alpha m^gamma",
    )


def generator_xc() -> Generator:
    return Generator(
        "X^c",
        xi_x=coefficient(T),
        eta_u=coefficient(-X),
        applicability="H = u_x^2 / 2, any f",
    )


def generator_y4c() -> Generator:
    return Generator(
        "Y^c_4",
        xi_t=coefficient(2 * T),
        xi_x=coefficient(X),
        eta_m=coefficient(-M),
        applicability="H = u_x^2 / 2, f = alpha m^2",
    )


def generator_x5c(epsilon: float) -> Generator:
    return Generator(
        "X^c_5",
        xi_t=coefficient(T**2),
        xi_x=coefficient(T * X),
        eta_u=coefficient(-(X**2) / 2 + epsilon * T),
        eta_m=coefficient(-T * M),
        params=(("epsilon", epsilon),),
        applicability="H = u_x^2 / 2, f = alpha m^2",
    )


@dataclass(frozen=True)
class ProlongedCoefficients:
    zeta_u_t: np.ndarray
    zeta_m_t: np.ndarray
    zeta_u_x: np.ndarray
    zeta_m_x: np.ndarray
    zeta_u_xx: np.ndarray
    zeta_m_xx: np.ndarray


def _args(jet: JetPoint):
    return (jet.t, jet.x, jet.u, jet.m)


def total_derivatives(c: CoefficientFunction, jet: JetPoint):
    """(D_t c, D_x c) for a coefficient depending on (t, x, u, m)"""
    c_t, c_x, c_u, c_m = c.grad(*_args(jet))
    return (
        c_t + jet.u_t * c_u + jet.m_t * c_m,
        c_x + jet.u_x * c_u + jet.m_x * c_m,
    )


def total_derivative_xx(c: CoefficientFunction, jet: JetPoint):
    """D_x D_x c"""
    _, _, c_u, c_m = c.grad(*_args(jet))
    hess = c.hess(*_args(jet))
    c_xx, c_xu, c_xm = hess[1][1], hess[1][2], hess[1][3]
    c_uu, c_um, c_mm = hess[2][2], hess[2][3], hess[3][3]
    return (
        c_xx
        + 2.0 * jet.u_x * c_xu
        + 2.0 * jet.m_x * c_xm
        + jet.u_x**2 * c_uu
        + 2.0 * jet.u_x * jet.m_x * c_um
        + jet.m_x**2 * c_mm
        + jet.u_xx * c_u
        + jet.m_xx * c_m
    )


def prolong(g: Generator, jet: JetPoint) -> ProlongedCoefficients:
    Dt_xt, Dx_xt = total_derivatives(g.xi_t, jet)
    Dt_xx, Dx_xx = total_derivatives(g.xi_x, jet)
    Dt_eu, Dx_eu = total_derivatives(g.eta_u, jet)
    Dt_em, Dx_em = total_derivatives(g.eta_m, jet)

    zeta_u_t = Dt_eu - jet.u_t * Dt_xt - jet.u_x * Dt_xx
    zeta_m_t = Dt_em - jet.m_t * Dt_xt - jet.m_x * Dt_xx
    zeta_u_x = Dx_eu - jet.u_t * Dx_xt - jet.u_x * Dx_xx
    zeta_m_x = Dx_em - jet.m_t * Dx_xt - jet.m_x * Dx_xx

    DxDx_xt = total_derivative_xx(g.xi_t, jet)
    DxDx_xx = total_derivative_xx(g.xi_x, jet)

    # zeta_xx = D_x(zeta_x) - (.)_tx D_x xi_t - (.)_xx D_x xi_x
    Dx_zeta_u_x = (
        total_derivative_xx(g.eta_u, jet)
        - jet.u_tx * Dx_xt
        - jet.u_t * DxDx_xt
        - jet.u_xx * Dx_xx
        - jet.u_x * DxDx_xx
    )
    Dx_zeta_m_x = (
        total_derivative_xx(g.eta_m, jet)
        - jet.m_tx * Dx_xt
        - jet.m_t * DxDx_xt
        - jet.m_xx * Dx_xx
        - jet.m_x * DxDx_xx
    )
    zeta_u_xx = Dx_zeta_u_x - jet.u_tx * Dx_xt - jet.u_xx * Dx_xx
    zeta_m_xx = Dx_zeta_m_x - jet.m_tx * Dx_xt - jet.m_xx * Dx_xx

    return ProlongedCoefficients(
        zeta_u_t, zeta_m_t, zeta_u_x, zeta_m_x, zeta_u_xx, zeta_m_xx
    )


def on_solution_manifold(jet: JetPoint, spec: ProblemSpec) -> JetPoint:
    """overwrite u_xx from F1 = 0, then m_xx from F2 = 0"""
    eps = spec.epsilon
    H = eval_hamiltonian(spec.hamiltonian, jet.u_x, 0)
    dH = eval_hamiltonian(spec.hamiltonian, jet.u_x, 1)
    d2H = eval_hamiltonian(spec.hamiltonian, jet.u_x, 2)
    f = eval_coupling(spec.coupling, jet.m, 0)

    u_xx = (-jet.u_t + H - f) / eps
    m_xx = (jet.m_t - jet.m_x * dH - jet.m * d2H * u_xx) / eps
    return jet.replace(u_xx=u_xx, m_xx=m_xx)


def determining_residuals(g: Generator, jet: JetPoint, spec: ProblemSpec):
    """(E1, E2) of the linearized system along the prolonged generator, on the solution manifold"""
    eps = spec.epsilon
    jet = on_solution_manifold(jet, spec)
    pr = prolong(g, jet)

    dH = eval_hamiltonian(spec.hamiltonian, jet.u_x, 1)
    d2H = eval_hamiltonian(spec.hamiltonian, jet.u_x, 2)
    d3H = eval_hamiltonian(spec.hamiltonian, jet.u_x, 3)
    df = eval_coupling(spec.coupling, jet.m, 1)
    eta_m = g.eta_m.value(*_args(jet))

    E1 = -pr.zeta_u_t - eps * pr.zeta_u_xx + dH * pr.zeta_u_x - df * eta_m
    E2 = (
        pr.zeta_m_t
        - eps * pr.zeta_m_xx
        - pr.zeta_m_x * dH
        - jet.m_x * d2H * pr.zeta_u_x
        - eta_m * d2H * jet.u_xx
        - jet.m * d3H * pr.zeta_u_x * jet.u_xx
        - jet.m * d2H * pr.zeta_u_xx
    )
    return E1, E2


def variational_defect(
    g: Generator,
    V_t: CoefficientFunction,
    V_x: CoefficientFunction,
    jet: JetPoint,
    spec: ProblemSpec,
):
    """
    XL + L (D_t xi_t + D_x xi_x) - D_t V_t - D_x V_x off the solution manifold;
    L depends on m, u_t, u_x and m_x only
    """
    pr = prolong_first(g, jet)
    lp = lagrangian_partials(jet, spec)
    eta_m = g.eta_m.value(*_args(jet))

    XL = eta_m * lp.L_m + pr[0] * lp.L_ut + pr[1] * lp.L_ux + pr[2] * lp.L_mx

    Dt_xt, _ = total_derivatives(g.xi_t, jet)
    _, Dx_xx = total_derivatives(g.xi_x, jet)
    Dt_Vt, _ = total_derivatives(V_t, jet)
    _, Dx_Vx = total_derivatives(V_x, jet)

    return XL + lp.L * (Dt_xt + Dx_xx) - Dt_Vt - Dx_Vx


def prolong_first(g: Generator, jet: JetPoint):
    """(zeta_u_t, zeta_u_x, zeta_m_x): the first-order part of the prolongation acting on L"""
    Dt_xt, Dx_xt = total_derivatives(g.xi_t, jet)
    Dt_xx, Dx_xx = total_derivatives(g.xi_x, jet)
    Dt_eu, Dx_eu = total_derivatives(g.eta_u, jet)
    _, Dx_em = total_derivatives(g.eta_m, jet)
    return (
        Dt_eu - jet.u_t * Dt_xt - jet.u_x * Dt_xx,
        Dx_eu - jet.u_t * Dx_xt - jet.u_x * Dx_xx,
        Dx_em - jet.m_t * Dx_xt - jet.m_x * Dx_xx,
    )


def require_canonical(spec: ProblemSpec) -> None:
    if not spec.hamiltonian.is_canonical:
        raise NonCanonicalError(
            f"Hamiltonian {spec.hamiltonian.describe()} is not canonical, normalize it first"
        )


def _is(value, target) -> bool:
    return value is not None and abs(value - target) <= EXPONENT_TOL


def catalog_generators(spec: ProblemSpec) -> list:
    """the classified generators admitted by the (H, f) cell of spec"""
    require_canonical(spec)

    H, f = spec.hamiltonian, spec.coupling
    gens = [generator_x1(), generator_x2(), generator_x3()]

    if f.family == "log":
        gens.append(generator_xf(f.alpha))

    if H.family == "quadratic":
        gens.append(generator_xc())
        if f.family == "power":
            if _is(f.gamma, 2.0):
                gens += [generator_y4c(), generator_x5c(spec.epsilon)]
            else:
                gens.append(generator_x4a(2.0, f.gamma))

    elif H.family in ("power", "cubic") and H.h2 == 0.0 and f.family == "power":
        gens.append(generator_x4a(H.exponent, f.gamma))

    elif H.family == "exponential" and H.h2 == 0.0 and f.family == "power":
        gens.append(generator_x4b(H.k, f.gamma))

    return gens


@dataclass(frozen=True)
class DivergenceCandidate:
    """a generator with the divergence potentials tried for it and the expected outcome"""

    generator: Generator
    V_t: CoefficientFunction
    V_x: CoefficientFunction
    expected: bool
    name: str


def divergence_candidates(spec: ProblemSpec) -> list:
    """
    for every catalog generator of the cell, the (V_t, V_x) it is tested with and
    whether it is expected to be a variational/divergence symmetry
    """
    H, f = spec.hamiltonian, spec.coupling
    out = []
    for g in catalog_generators(spec):
        V_t, V_x, expected, name = ZERO, ZERO, True, g.id
        if g.id == "X_f":
            expected = False
        elif g.id == "X^a_4":
            p, gamma = g.param("p"), g.param("gamma")
            expected = p != 1.5 and _is(gamma, gamma_star(p))
            name = "Y^a_4" if H.family != "quadratic" else "X_4"
        elif g.id == "X^b_4":
            V_x = coefficient(-(spec.epsilon / H.k) * M)
            expected = _is(f.gamma, 0.5)
            name = "Y^b_4"
        elif g.id == "X^c":
            V_x = coefficient(-spec.epsilon * M)
        elif g.id == "X^c_5":
            V_x = coefficient(-spec.epsilon * X * M)
        out.append(DivergenceCandidate(g, V_t, V_x, expected, name))
    return out


def export_catalog(spec: ProblemSpec) -> list:
    return [g.to_dict() for g in catalog_generators(spec)]


@dataclass(frozen=True)
class FlowRequest:
    generator: Generator
    a: float
    point: Optional[Tuple] = None
    pair: Optional[SolutionPair] = None

    def __post_init__(self):
        if (self.point is None) == (self.pair is None):
            raise ValueError("a flow request targets either a point or a SolutionPair")
        if self.generator.id == "X^c_5":
            t = (
                np.asarray(self.point[0])
                if self.point is not None
                else self.pair.grid.t
            )
            if np.any(self.a * t >= 1.0):
                raise DomainError("projective flow needs a t < 1 over the whole time range")


def _scaling_exponents(g: Generator):
    """(c_t, c_x, c_u, c_m) with t -> e^{c_t a} t, ... for the diagonal scalings"""
    if g.id == "X^a_4":
        p, gamma = g.param("p"), g.param("gamma")
        return 2 * (p - 1), p - 1, p - 2, -p / gamma
    if g.id == "X^b_4":
        return 2.0, 1.0, 1.0, -1.0 / g.param("gamma")
    if g.id == "Y^c_4":
        return 2.0, 1.0, 0.0, -1.0
    return None


def _point_flow(g: Generator, a: float, t, x, u, m):
    t, x, u, m = (np.asarray(v, dtype=np.float64) for v in (t, x, u, m))

    if g.id == "X1":
        return t + a, x, u, m
    if g.id == "X2":
        return t, x + a, u, m
    if g.id == "X3":
        return t, x, u + a, m
    if g.id == "X_f":
        return t, x, u + a * g.param("alpha") * t, np.exp(-a) * m
    if g.id == "X^c":
        return t, x + a * t, u - a * x - 0.5 * a * a * t, m
    if g.id == "X^c_5":
        s = 1.0 - a * t
        eps = g.param("epsilon")
        return t / s, x / s, u - a * x * x / (2.0 * s) - eps * np.log(s), s * m
    if g.id == "X^b_4":
        # x-dependent gauge integrated along x(a) = e^a x: u(a) = e^a (u - a x / k)
        k, gamma = g.param("k"), g.param("gamma")
        ea = np.exp(a)
        return ea**2 * t, ea * x, ea * (u - a * x / k), np.exp(-a / gamma) * m

    exps = _scaling_exponents(g)
    if exps is not None:
        ct, cx, cu, cm = exps
        return (
            np.exp(ct * a) * t,
            np.exp(cx * a) * x,
            np.exp(cu * a) * u,
            np.exp(cm * a) * m,
        )

    raise DomainError(f"no closed-form flow for generator '{g.id}'")


def _pair_flow(g: Generator, a: float, pair: SolutionPair) -> SolutionPair:
    grid = pair.grid
    u, m, s = pair.u.values, pair.m.values, pair.u_slope
    t = grid.t[:, np.newaxis]

    if g.id == "X1":
        new_grid = GridSpec(grid.length, grid.num_cells, grid.horizon, grid.num_steps, grid.t0 + a)
        return SolutionPair(Field2D(u, new_grid, "u"), Field2D(m, new_grid, "m"), s)

    if g.id == "X2":
        u_new = shift_rows(pair.u, a).values - s * a
        return SolutionPair(Field2D(u_new, grid, "u"), shift_rows(pair.m, a), s)

    if g.id == "X3":
        return SolutionPair(Field2D(u + a, grid, "u"), pair.m, s)

    if g.id == "X_f":
        alpha = g.param("alpha")
        return SolutionPair(
            Field2D(u + a * alpha * t, grid, "u"), Field2D(np.exp(-a) * m, grid, "m"), s
        )

    if g.id == "X^c":
        # ubar(t, x) = u(t, x - a t) - a x + a^2 t / 2, the x-linear part goes to the slope
        shifts = a * grid.t
        u_shift = shift_rows(pair.u, shifts).values
        u_new = u_shift + (0.5 * a * a - s * a) * t
        return SolutionPair(Field2D(u_new, grid, "u"), shift_rows(pair.m, shifts), s - a)

    if g.id == "X^c_5":
        raise DomainError("the projective flow does not preserve the periodic grid")

    exps = _scaling_exponents(g)
    if exps is None:
        raise DomainError(f"no closed-form flow for generator '{g.id}'")

    # diagonal scalings map grid nodes to grid nodes of a rescaled grid
    ct, cx, cu, cm = exps
    new_grid = GridSpec(
        grid.length * np.exp(cx * a),
        grid.num_cells,
        grid.horizon * np.exp(ct * a),
        grid.num_steps,
        grid.t0 * np.exp(ct * a),
    )
    u_new = np.exp(cu * a) * u
    m_new = np.exp(cm * a) * m
    if g.id == "X^b_4":
        s_new = s - a / g.param("k")
    else:
        s_new = s * np.exp((cu - cx) * a)
    return SolutionPair(Field2D(u_new, new_grid, "u"), Field2D(m_new, new_grid, "m"), s_new)


def group_flow(req: FlowRequest):
    """exp(a X) applied to a point (t, x, u, m) or to a SolutionPair"""
    if req.point is not None:
        return _point_flow(req.generator, req.a, *req.point)
    return _pair_flow(req.generator, req.a, req.pair)


def verify_transformed_solution(
    pair: SolutionPair,
    req: FlowRequest,
    spec: ProblemSpec,
    grid: Optional[GridSpec] = None,
) -> Tuple[float, float]:
    """sup-norms of (F1, F2) on the transformed pair"""
    if req.pair is not pair:
        req = FlowRequest(req.generator, req.a, pair=pair)
    moved = group_flow(req)
    F1, F2 = pde_residuals(moved, spec)
    return F1.sup_norm(), F2.sup_norm()

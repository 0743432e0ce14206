#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

"""
Hamiltonian and coupling families of the one-dimensional second-order MFG system

    F1 = -u_t - eps u_xx + H(u_x) - f(m) = 0
    F2 =  m_t - eps m_xx - m_x H'(u_x) - m H''(u_x) u_xx = 0

together with the equivalence-transformation normalizer and the Lagrangian
L = -m u_t + eps m_x u_x + m H(u_x) - F(m), whose Euler-Lagrange expressions
(dL/du, dL/dm) are (F2, F1).

All evaluators are pure and vectorized: scalars in, float out; arrays in, arrays out.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator, make_interp_spline

from mfglab.errors import ConfigError, DomainError
from mfglab.grid import JetPoint

logger = logging.getLogger(__name__)

HAMILTONIAN_FAMILIES = ("quadratic", "cubic", "power", "exponential", "custom")
COUPLING_FAMILIES = ("log", "power", "table")

_ALIASES = {"general-custom": "custom", "custom-table": "table", "logarithmic": "log"}

DENSITY_FLOOR = 1e-10

# genuinely-coupled probes, shifted by -q for the power family
_PROBES = np.array([0.3, 0.55, 0.8, 1.05, 1.3, 1.55, 1.8, 2.05])


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _falling(n, order):
    """n (n-1) ... (n-order+1)"""
    out = 1.0
    for j in range(order):
        out *= n - j
    return out


def _monomial(w, n, order):
    """order-th derivative of w^n for a non-negative integer n"""
    if order > n:
        return np.zeros_like(w)
    return _falling(n, order) * w ** (n - order)


@dataclass(frozen=True)
class HamiltonianSpec:
    """
    general forms (h is the leading coefficient, None meaning the canonical one):
      quadratic    h w^2 + h1 w + h0
      cubic        h w^3 + h2 w^2 + h1 w + h0
      power        h (w + q)^p + h2 w^2 + h1 w + h0
      exponential  h exp(k w) + h2 w^2 + h1 w + h0
      custom       user callables for H, H', H'', H'''
    """

    family: str = "quadratic"
    p: Optional[float] = None
    k: Optional[float] = None
    h: Optional[float] = None
    h2: float = 0.0
    h1: float = 0.0
    h0: float = 0.0
    q: float = 0.0
    custom: Optional[Tuple[Callable, Callable, Callable, Callable]] = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        object.__setattr__(self, "family", family)

        if family not in HAMILTONIAN_FAMILIES:
            raise ConfigError(f"unknown Hamiltonian family '{self.family}'")

        if family == "power":
            if self.p is None:
                raise ConfigError("power Hamiltonian needs an exponent p")
            if float(self.p) in (0.0, 1.0, 2.0, 3.0):
                raise ConfigError(
                    f"power exponent p={self.p} is excluded, use the quadratic or cubic family"
                )
        if family == "exponential" and not self.k:
            raise ConfigError("exponential Hamiltonian needs k != 0")
        if family == "quadratic" and self.h2 != 0.0:
            raise ConfigError("quadratic family: put the u_x^2 coefficient in h")
        if family == "custom":
            if self.custom is None or len(self.custom) != 4:
                raise ConfigError("custom Hamiltonian needs H and its derivatives up to order 3")
            if not all(callable(c) for c in self.custom):
                raise ConfigError("custom Hamiltonian entries must be callables")
        elif self.leading == 0.0:
            raise ConfigError(f"{family} Hamiltonian needs a nonzero leading coefficient")

        probes = _PROBES - (self.q if family == "power" else 0.0)
        curvature = np.asarray(eval_hamiltonian(self, probes, 2), dtype=np.float64)
        if np.all(curvature == 0.0):
            raise ConfigError("H'' vanishes on all probe points: the system decouples")

    @property
    def canonical_leading(self) -> Optional[float]:
        return {
            "quadratic": 0.5,
            "cubic": 1.0 / 3.0,
            "power": None if self.p is None else 1.0 / self.p,
            "exponential": None if not self.k else 1.0 / self.k,
            "custom": None,
        }[self.family]

    @property
    def leading(self) -> Optional[float]:
        return self.canonical_leading if self.h is None else float(self.h)

    @property
    def exponent(self) -> Optional[float]:
        """p of the scaling structure: 2 quadratic, 3 cubic, p power"""
        return {"quadratic": 2.0, "cubic": 3.0, "power": self.p}.get(self.family)

    @property
    def is_canonical(self) -> bool:
        if self.family == "custom":
            return True
        lead_ok = np.isclose(self.leading, self.canonical_leading, rtol=1e-14, atol=0.0)
        shifts_ok = self.q == 0.0 and self.h1 == 0.0 and self.h0 == 0.0
        if self.family == "cubic":
            shifts_ok = shifts_ok and self.h2 == 0.0
        return bool(lead_ok and shifts_ok)

    @classmethod
    def quadratic(cls):
        return cls("quadratic")

    @classmethod
    def cubic(cls):
        return cls("cubic")

    @classmethod
    def power(cls, p, h2=0.0):
        return cls("power", p=p, h2=h2)

    @classmethod
    def exponential(cls, k, h2=0.0):
        return cls("exponential", k=k, h2=h2)

    @classmethod
    def from_callables(cls, H, dH, d2H, d3H):
        return cls("custom", custom=(H, dH, d2H, d3H))

    @classmethod
    def from_dict(cls, block: dict) -> "HamiltonianSpec":
        """
        build from a JSON block; without 'family' it is inferred
        (k -> exponential, p -> power, or quadratic/cubic for p = 2/3)
        """
        block = dict(block)
        family = block.pop("family", None)
        if family is None:
            if "k" in block:
                family = "exponential"
            elif "p" in block:
                family = {2.0: "quadratic", 3.0: "cubic"}.get(float(block["p"]), "power")
            else:
                family = "quadratic"
        family = _ALIASES.get(family, family)
        if family in ("quadratic", "cubic"):
            block.pop("p", None)
        unknown = set(block) - {"p", "k", "h", "h2", "h1", "h0", "q"}
        if unknown:
            raise ConfigError(f"unknown Hamiltonian keys {sorted(unknown)}")
        if family == "custom":
            raise ConfigError("custom Hamiltonians are only available from Python")
        try:
            values = {key: float(val) for key, val in block.items()}
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Hamiltonian coefficients must be numbers: {e}") from e
        return cls(family, **values)

    def to_dict(self) -> dict:
        out = {"family": self.family}
        if self.family == "custom":
            return out
        if self.p is not None:
            out["p"] = self.p
        if self.k is not None:
            out["k"] = self.k
        out["h"] = self.leading
        for key in ("h2", "h1", "h0", "q"):
            if getattr(self, key) != 0.0:
                out[key] = getattr(self, key)
        return out

    def describe(self) -> str:
        lead = {
            "quadratic": "h w^2",
            "cubic": "h w^3",
            "power": "h (w+q)^p",
            "exponential": "h exp(k w)",
            "custom": "custom",
        }[self.family]
        return f"{lead} {self.to_dict()}"


@dataclass(frozen=True)
class CouplingSpec:
    """
    f(m) = alpha ln m (log), alpha m^gamma (power), or a monotone table of
    (m, f(m)) samples interpolated by 'pchip', 'cubic' or 'linear' (table)
    """

    family: str = "power"
    alpha: float = 1.0
    gamma: Optional[float] = None
    table: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None
    interpolation: str = "pchip"
    m_min: float = DENSITY_FLOOR

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        object.__setattr__(self, "family", family)

        if family not in COUPLING_FAMILIES:
            raise ConfigError(f"unknown coupling family '{self.family}'")
        if not self.m_min > 0:
            raise ConfigError("the density floor m_min must be positive")

        if family == "power":
            if self.gamma is None:
                raise ConfigError("power coupling needs an exponent gamma")
            if self.gamma == 0.0:
                raise ConfigError("gamma = 0 makes f constant: the system decouples")
            if self.alpha == 0.0:
                raise ConfigError("alpha = 0 makes f vanish: the system decouples")
        elif self.gamma is not None:
            raise ConfigError(f"gamma is only meaningful for the power coupling, not {family}")

        if family == "log" and self.alpha == 0.0:
            raise ConfigError("alpha = 0 makes f vanish: the system decouples")

        if family == "table":
            if self.table is None:
                raise ConfigError("table coupling needs (m, f) samples")
            knots, values = (np.asarray(c, dtype=np.float64) for c in self.table)
            if knots.shape != values.shape or knots.size < 2:
                raise ConfigError("table coupling needs two equally long columns (>= 2 rows)")
            if np.any(np.diff(knots) <= 0):
                raise ConfigError("table coupling knots must be strictly increasing")
            if knots[0] > self.m_min:
                raise ConfigError("table coupling must start at or below the density floor")
            if np.all(values == values[0]):
                raise ConfigError("table coupling is constant: the system decouples")
            if self.interpolation not in ("pchip", "cubic", "linear"):
                raise ConfigError(f"unknown interpolation rule '{self.interpolation}'")
            object.__setattr__(
                self, "table", (tuple(knots.tolist()), tuple(values.tolist()))
            )

    @property
    def floor(self) -> float:
        """smallest admissible density of discrete solutions"""
        if self.family == "log" or (self.family == "power" and self.gamma < 1.0):
            return self.m_min
        return 0.0

    @cached_property
    def _interpolant(self):
        knots, values = (np.asarray(c) for c in self.table)
        if self.interpolation == "pchip":
            return PchipInterpolator(knots, values, extrapolate=False)
        if self.interpolation == "cubic":
            return CubicSpline(knots, values, extrapolate=False)
        return make_interp_spline(knots, values, k=1)

    @cached_property
    def _primitive(self):
        return self._interpolant.antiderivative()

    @classmethod
    def power(cls, alpha=1.0, gamma=2.0):
        return cls("power", alpha=alpha, gamma=gamma)

    @classmethod
    def log(cls, alpha=1.0, m_min=DENSITY_FLOOR):
        return cls("log", alpha=alpha, m_min=m_min)

    @classmethod
    def from_samples(cls, fn, m_max, n=64, alpha=1.0, interpolation="pchip"):
        """tabulate fn on [0, m_max]"""
        knots = np.linspace(0.0, m_max, n)
        return cls(
            "table",
            alpha=alpha,
            table=(tuple(knots), tuple(fn(knots))),
            interpolation=interpolation,
        )

    @classmethod
    def from_dict(cls, block: dict, table_loader=None) -> "CouplingSpec":
        block = dict(block)
        family = block.pop("family", "power")
        family = _ALIASES.get(family, family)
        unknown = set(block) - {"alpha", "gamma", "file", "interpolation", "m_min", "m", "f"}
        if unknown:
            raise ConfigError(f"unknown coupling keys {sorted(unknown)}")
        kwargs = {
            key: float(block[key]) for key in ("alpha", "gamma", "m_min") if key in block
        }
        if family == "table":
            if "file" in block:
                if table_loader is None:
                    raise ConfigError("no loader available for the coupling table file")
                knots, values = table_loader(block["file"])
            else:
                knots, values = block.get("m"), block.get("f")
            if knots is None or values is None:
                raise ConfigError("table coupling needs 'file' or the 'm' and 'f' columns")
            kwargs["table"] = (tuple(knots), tuple(values))
            kwargs["interpolation"] = block.get("interpolation", "pchip")
        return cls(family, **kwargs)

    def to_dict(self) -> dict:
        out = {"family": self.family, "alpha": self.alpha}
        if self.gamma is not None:
            out["gamma"] = self.gamma
        if self.family == "table":
            out["interpolation"] = self.interpolation
            out["knots"] = len(self.table[0])
        if self.family == "log":
            out["m_min"] = self.m_min
        return out


@dataclass(frozen=True)
class ProblemSpec:
    hamiltonian: HamiltonianSpec
    coupling: CouplingSpec
    epsilon: float
    horizon: float = 1.0
    terminal_cost: Optional[Callable] = field(default=None, compare=False, repr=False)
    terminal_depends_on_density: bool = False
    initial_density: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive (second-order system)")
        if not self.horizon > 0:
            raise ConfigError("horizon must be positive")

    def terminal_values(self, x, m_terminal=None):
        """G(x) or G(x, m_T); zero when no terminal cost is set"""
        x = np.asarray(x, dtype=np.float64)
        if self.terminal_cost is None:
            return np.zeros_like(x)
        if self.terminal_depends_on_density:
            if m_terminal is None:
                raise ConfigError("density-dependent terminal cost needs m(T)")
            return np.broadcast_to(self.terminal_cost(x, m_terminal), x.shape).astype(np.float64)
        return np.broadcast_to(self.terminal_cost(x), x.shape).astype(np.float64)

    def initial_values(self, x, length):
        """m0(x); uniform 1/L when no initial density is set"""
        x = np.asarray(x, dtype=np.float64)
        if self.initial_density is None:
            return np.full_like(x, 1.0 / length)
        return np.broadcast_to(self.initial_density(x), x.shape).astype(np.float64)

    def with_hamiltonian(self, hamiltonian: HamiltonianSpec) -> "ProblemSpec":
        return ProblemSpec(
            hamiltonian,
            self.coupling,
            self.epsilon,
            self.horizon,
            self.terminal_cost,
            self.terminal_depends_on_density,
            self.initial_density,
        )

    def with_coupling(self, coupling: CouplingSpec) -> "ProblemSpec":
        return ProblemSpec(
            self.hamiltonian,
            coupling,
            self.epsilon,
            self.horizon,
            self.terminal_cost,
            self.terminal_depends_on_density,
            self.initial_density,
        )


@dataclass(frozen=True)
class TransformRecord:
    """
    equivalence transformation taking a raw Hamiltonian to its canonical form:
    gauge u = u' + A x (old gradient = new gradient + A), gauge u = u' + B t,
    drift x' = x + drift t, scalings t' = C1 t, x' = C2 x, u' = C3 u, m' = C4 m
    """

    A: float = 0.0
    B: float = 0.0
    drift: float = 0.0
    C1: float = 1.0
    C2: float = 1.0
    C3: float = 1.0
    C4: float = 1.0

    def __post_init__(self):
        if self.C1 * self.C2 * self.C3 * self.C4 == 0.0:
            raise ConfigError("scale factors must be nonzero")
        if abs(self.C2 * self.C4 - 1.0) > 1e-12:
            raise ConfigError("C2 * C4 must be 1 to preserve the unit mass")

    @property
    def is_identity(self) -> bool:
        return self == TransformRecord()

    @property
    def coupling_factor(self) -> float:
        """factor C3/C1 multiplying f in the transformed system (not applied to alpha)"""
        return self.C3 / self.C1

    def to_dict(self) -> dict:
        return {
            "A": self.A,
            "B": self.B,
            "drift": self.drift,
            "C1": self.C1,
            "C2": self.C2,
            "C3": self.C3,
            "C4": self.C4,
        }


def eval_hamiltonian(spec: HamiltonianSpec, p_arg, order: int = 0):
    """H, H', H'' or H''' of the family closed form at p_arg"""
    if order not in (0, 1, 2, 3):
        raise DomainError(f"unsupported derivative order {order}")

    w = np.asarray(p_arg, dtype=np.float64)

    if spec.family == "custom":
        return _out(np.asarray(spec.custom[order](w), dtype=np.float64))

    h = spec.leading
    poly = (
        spec.h2 * _monomial(w, 2, order)
        + spec.h1 * _monomial(w, 1, order)
        + spec.h0 * _monomial(w, 0, order)
    )

    if spec.family == "quadratic":
        lead = h * _monomial(w, 2, order)

    elif spec.family == "cubic":
        lead = h * _monomial(w, 3, order)

    elif spec.family == "power":
        p = float(spec.p)
        base = w + spec.q
        if not p.is_integer():
            if np.any(base <= 0):
                raise DomainError(f"non-integer power p={p} needs u_x + q > 0")
        elif p - order < 0 and np.any(base == 0):
            raise DomainError(f"H^({order}) of the power p={p} is singular at u_x + q = 0")
        lead = h * _falling(p, order) * base ** (p - order)

    else:  # exponential
        lead = h * spec.k**order * np.exp(spec.k * w)

    return _out(lead + poly)


def eval_coupling(spec: CouplingSpec, m, order: int = 0):
    """f(m) (order 0) or f'(m) (order 1)"""
    if order not in (0, 1):
        raise DomainError(f"unsupported coupling derivative order {order}")

    m = np.asarray(m, dtype=np.float64)

    if spec.family == "log":
        if np.any(m < spec.m_min):
            raise DomainError(f"log coupling needs m >= m_min = {spec.m_min}")
        out = spec.alpha * np.log(m) if order == 0 else spec.alpha / m

    elif spec.family == "power":
        g = spec.gamma
        if np.any(m < 0):
            raise DomainError("power coupling needs m >= 0")
        if np.any(m == 0) and (g < 0 or (order == 1 and g < 1)):
            raise DomainError(f"f^({order}) of m^{g} is singular at m = 0")
        out = spec.alpha * m**g if order == 0 else spec.alpha * g * m ** (g - 1.0)

    else:  # table
        knots = spec.table[0]
        if np.any(m < knots[0]) or np.any(m > knots[-1]):
            raise DomainError(f"m outside the coupling table range [{knots[0]}, {knots[-1]}]")
        out = spec._interpolant(m, nu=order) if order else spec._interpolant(m)

    return _out(np.asarray(out, dtype=np.float64))


def eval_coupling_primitive(spec: CouplingSpec, m):
    """F(m) with F(0) = 0 (power), alpha (m ln m - m) (log), integral from m_min (table)"""
    m = np.asarray(m, dtype=np.float64)

    if spec.family == "log":
        if np.any(m < spec.m_min):
            raise DomainError(f"log coupling needs m >= m_min = {spec.m_min}")
        out = spec.alpha * (m * np.log(m) - m)

    elif spec.family == "power":
        g = spec.gamma
        if np.any(m < 0):
            raise DomainError("power coupling needs m >= 0")
        if g == -1.0:
            if np.any(m == 0):
                raise DomainError("F = alpha ln m is singular at m = 0")
            out = spec.alpha * np.log(m)
        else:
            if g < -1.0 and np.any(m == 0):
                raise DomainError(f"F of m^{g} is singular at m = 0")
            out = spec.alpha / (g + 1.0) * m ** (g + 1.0)

    else:
        knots = spec.table[0]
        if np.any(m < spec.m_min) or np.any(m > knots[-1]):
            raise DomainError(f"m outside the coupling table range [{spec.m_min}, {knots[-1]}]")
        out = spec._primitive(m) - spec._primitive(spec.m_min)

    return _out(np.asarray(out, dtype=np.float64))


def gamma_star(p: float) -> float:
    """coupling exponent making the power-Hamiltonian scaling variational"""
    if p == 1.5:
        raise DomainError("gamma* = p/(2p-3) is singular at p = 3/2")
    return p / (2.0 * p - 3.0)


def feedback_control(spec: HamiltonianSpec, u_x):
    """optimal feedback control -H'(u_x) of a representative agent"""
    return _out(-np.asarray(eval_hamiltonian(spec, u_x, 1)))


def _shifted_polynomial(h2, h1, h0, A):
    """coefficients of h2 (v+A)^2 + h1 (v+A) + h0 in v"""
    return h2, 2.0 * h2 * A + h1, h2 * A * A + h1 * A + h0


def normalize_hamiltonian(
    raw: HamiltonianSpec, coupling: Optional[CouplingSpec] = None
) -> Tuple[HamiltonianSpec, TransformRecord]:
    """
    bring a general-form Hamiltonian to canonical form by a gradient gauge (A),
    a time gauge (B), a drift and a scaling of u (C3); C1 = C2 = C4 = 1 so alpha
    and the unit mass are untouched. Custom Hamiltonians pass through.
    """
    if raw.family == "custom":
        return raw, TransformRecord()

    if raw.is_canonical:
        return raw, TransformRecord()

    h = raw.leading

    if raw.family == "quadratic":
        record = TransformRecord(B=raw.h0, drift=raw.h1, C3=2.0 * h)
        canonical = HamiltonianSpec.quadratic()

    elif raw.family == "cubic":
        if h <= 0:
            raise ConfigError("cubic normalization needs a positive leading coefficient")
        A = -raw.h2 / (3.0 * h)
        drift = 3.0 * h * A * A + 2.0 * raw.h2 * A + raw.h1
        B = h * A**3 + raw.h2 * A * A + raw.h1 * A + raw.h0
        record = TransformRecord(A=A, B=B, drift=drift, C3=np.sqrt(3.0 * h))
        canonical = HamiltonianSpec.cubic()

    elif raw.family == "power":
        p = float(raw.p)
        A = -raw.q
        h2, drift, B = _shifted_polynomial(raw.h2, raw.h1, raw.h0, A)
        hp = h * p
        if hp > 0:
            C3 = hp ** (1.0 / (p - 1.0))
        elif p.is_integer() and int(p) % 2 == 0:
            C3 = -abs(hp) ** (1.0 / (p - 1.0))
        else:
            raise ConfigError(
                f"power Hamiltonian with h*p = {hp} < 0 cannot be normalized without reflection"
            )
        record = TransformRecord(A=A, B=B, drift=drift, C3=C3)
        canonical = HamiltonianSpec.power(p, h2=h2 / C3)

    else:  # exponential
        k = raw.k
        if h * k <= 0:
            raise ConfigError("exponential normalization needs h * k > 0")
        A = np.log(1.0 / (h * k)) / k
        h2, drift, B = _shifted_polynomial(raw.h2, raw.h1, raw.h0, A)
        record = TransformRecord(A=A, B=B, drift=drift, C3=1.0)
        canonical = HamiltonianSpec.exponential(k, h2=h2)

    if coupling is not None and record.coupling_factor != 1.0:
        logger.info(
            "normalization scales u by %g: the transformed coupling is %g f(m), alpha is not rescaled",
            record.C3,
            record.coupling_factor,
        )

    return canonical, record


def apply_transform_record(raw: HamiltonianSpec, record: TransformRecord, v):
    """Hbar(v) = (C3/C1) [H((C2/C3) v + A) - B - drift (C2/C3) v]"""
    v = np.asarray(v, dtype=np.float64)
    w = record.C2 / record.C3 * v
    H = np.asarray(eval_hamiltonian(raw, w + record.A))
    return _out(record.C3 / record.C1 * (H - record.B - record.drift * w))


def invert_transform_record(canonical: HamiltonianSpec, record: TransformRecord, w):
    """H(w) = (C1/C3) Hbar((C3/C2)(w - A)) + B + drift (w - A)"""
    w = np.asarray(w, dtype=np.float64)
    Hbar = np.asarray(eval_hamiltonian(canonical, record.C3 / record.C2 * (w - record.A)))
    return _out(record.C1 / record.C3 * Hbar + record.B + record.drift * (w - record.A))


@dataclass(frozen=True)
class LagrangianPartials:
    """L and its partial derivatives with respect to the jet entries it depends on"""

    L: object
    L_m: object
    L_ut: object
    L_ux: object
    L_mx: object


def lagrangian_partials(jet: JetPoint, spec: ProblemSpec) -> LagrangianPartials:
    eps = spec.epsilon
    H = eval_hamiltonian(spec.hamiltonian, jet.u_x, 0)
    dH = eval_hamiltonian(spec.hamiltonian, jet.u_x, 1)
    f = eval_coupling(spec.coupling, jet.m, 0)
    F = eval_coupling_primitive(spec.coupling, jet.m)

    return LagrangianPartials(
        L=-jet.m * jet.u_t + eps * jet.m_x * jet.u_x + jet.m * H - F,
        L_m=-jet.u_t + H - f,
        L_ut=-np.asarray(jet.m),
        L_ux=eps * jet.m_x + jet.m * dH,
        L_mx=eps * np.asarray(jet.u_x),
    )


def eval_lagrangian(jet: JetPoint, spec: ProblemSpec):
    """L = -m u_t + eps m_x u_x + m H(u_x) - F(m)"""
    return _out(lagrangian_partials(jet, spec).L)


def euler_lagrange_residuals(jet: JetPoint, spec: ProblemSpec):
    """
    (dL/du, dL/dm) built from the partials of L:
      dL/du = -D_t(L_ut) - D_x(L_ux)       (L has no explicit u)
      dL/dm = L_m - D_x(L_mx)              (L has no m_t)
    which reproduce (F2, F1)
    """
    eps = spec.epsilon
    dH = eval_hamiltonian(spec.hamiltonian, jet.u_x, 1)
    d2H = eval_hamiltonian(spec.hamiltonian, jet.u_x, 2)

    Dt_L_ut = -np.asarray(jet.m_t)
    Dx_L_ux = eps * jet.m_xx + jet.m_x * dH + jet.m * d2H * jet.u_xx
    Dx_L_mx = eps * np.asarray(jet.u_xx)

    # L_m needs f(m), which is not defined everywhere (log at m = 0)
    H = eval_hamiltonian(spec.hamiltonian, jet.u_x, 0)
    f = eval_coupling(spec.coupling, jet.m, 0)
    L_m = -jet.u_t + H - f

    return _out(-Dt_L_ut - Dx_L_ux), _out(L_m - Dx_L_mx)


def pde_f1(jet: JetPoint, spec: ProblemSpec):
    """-u_t - eps u_xx + H(u_x) - f(m)"""
    return _out(
        -jet.u_t
        - spec.epsilon * jet.u_xx
        + eval_hamiltonian(spec.hamiltonian, jet.u_x, 0)
        - eval_coupling(spec.coupling, jet.m, 0)
    )


def pde_f2(jet: JetPoint, spec: ProblemSpec):
    """m_t - eps m_xx - m_x H'(u_x) - m H''(u_x) u_xx"""
    return _out(
        jet.m_t
        - spec.epsilon * jet.m_xx
        - jet.m_x * eval_hamiltonian(spec.hamiltonian, jet.u_x, 1)
        - jet.m * eval_hamiltonian(spec.hamiltonian, jet.u_x, 2) * jet.u_xx
    )

import numpy as np
import pytest

from mfglab.errors import DomainError, NonCanonicalError
from mfglab.grid import GridSpec, sample_jets
from mfglab.model import CouplingSpec, HamiltonianSpec, ProblemSpec, gamma_star
from mfglab.solver import PicardConfig, pde_residuals, solve_picard
from mfglab.symmetry import (
    FlowRequest,
    M,
    catalog_generators,
    custom_generator,
    determining_residuals,
    divergence_candidates,
    export_catalog,
    generator_x1,
    generator_x2,
    generator_x3,
    generator_xc,
    generator_x5c,
    group_flow,
    linear_combination,
    prolong,
    variational_defect,
    verify_transformed_solution,
)
from mfglab.verify import (
    verify_flows,
    verify_symmetries,
    verify_variational,
)


def problem(H, f, eps=0.3):
    return ProblemSpec(H, f, epsilon=eps)


CELLS = {
    "quadratic, m^2": (
        problem(HamiltonianSpec.quadratic(), CouplingSpec.power(1.0, 2.0)),
        {"X1", "X2", "X3", "X^c", "Y^c_4", "X^c_5"},
    ),
    "quadratic, m^3": (
        problem(HamiltonianSpec.quadratic(), CouplingSpec.power(1.0, 3.0)),
        {"X1", "X2", "X3", "X^c", "X^a_4"},
    ),
    "quadratic, log": (
        problem(HamiltonianSpec.quadratic(), CouplingSpec.log(1.0)),
        {"X1", "X2", "X3", "X_f", "X^c"},
    ),
    "power 4, m^0.8": (
        problem(HamiltonianSpec.power(4.0), CouplingSpec.power(1.0, 0.8)),
        {"X1", "X2", "X3", "X^a_4"},
    ),
    "power 4 shifted, m^2": (
        problem(HamiltonianSpec.power(4.0, h2=0.5), CouplingSpec.power(1.0, 2.0)),
        {"X1", "X2", "X3"},
    ),
    "cubic, m^1": (
        problem(HamiltonianSpec.cubic(), CouplingSpec.power(2.0, 1.0)),
        {"X1", "X2", "X3", "X^a_4"},
    ),
    "exponential, m^0.5": (
        problem(HamiltonianSpec.exponential(1.0), CouplingSpec.power(1.0, 0.5)),
        {"X1", "X2", "X3", "X^b_4"},
    ),
    "exponential, log": (
        problem(HamiltonianSpec.exponential(-0.5), CouplingSpec.log(0.5)),
        {"X1", "X2", "X3", "X_f"},
    ),
}


@pytest.mark.parametrize("cell", sorted(CELLS))
def test_catalog_cells(cell):
    spec, expected = CELLS[cell]
    assert {g.id for g in catalog_generators(spec)} == expected


def test_catalog_requires_canonical_hamiltonian():
    spec = problem(HamiltonianSpec("quadratic", h=2.0), CouplingSpec.power(1.0, 2.0))
    with pytest.raises(NonCanonicalError):
        catalog_generators(spec)


@pytest.mark.parametrize("cell", sorted(CELLS))
def test_determining_equations_vanish(cell):
    spec, _ = CELLS[cell]
    rng = np.random.default_rng(42)
    jets = sample_jets(rng, 1000, positive_ux=spec.hamiltonian.family == "power")
    for g in catalog_generators(spec):
        E1, E2 = determining_residuals(g, jets, spec)
        assert np.max(np.abs(E1)) <= 1e-10, g.id
        assert np.max(np.abs(E2)) <= 1e-10, g.id


@pytest.mark.parametrize("cell", sorted(CELLS))
def test_symmetry_suite(cell):
    spec, _ = CELLS[cell]
    result = verify_symmetries(spec, np.random.default_rng(42))
    assert result.passed, result.failed
    # every extension generator is checked outside its cell as well
    n_ext = len(catalog_generators(spec)) - 3
    assert sum(item.expected == "fail" for item in result.items) == n_ext


def test_generators_outside_their_cell():
    rng = np.random.default_rng(1)
    jets = sample_jets(rng, 200, positive_ux=True)

    # the Galilean boost needs the quadratic Hamiltonian
    quartic = problem(HamiltonianSpec.power(4.0), CouplingSpec.power(1.0, 2.0))
    E1, E2 = determining_residuals(generator_xc(), jets, quartic)
    assert np.max(np.abs(E1) + np.abs(E2)) > 1e-4

    # the projective generator needs f = m^2
    cubic_f = problem(HamiltonianSpec.quadratic(), CouplingSpec.power(1.0, 3.0))
    E1, E2 = determining_residuals(generator_x5c(0.3), jets, cubic_f)
    assert np.max(np.abs(E1) + np.abs(E2)) > 1e-4


def test_symmetries_form_a_linear_space():
    spec, _ = CELLS["quadratic, m^2"]
    jets = sample_jets(np.random.default_rng(2), 500)
    gens = catalog_generators(spec)
    combo = linear_combination(gens, [0.3, -1.2, 2.0, 0.7, -0.4, 1.1])
    E1, E2 = determining_residuals(combo, jets, spec)
    assert np.max(np.abs(E1)) <= 1e-10
    assert np.max(np.abs(E2)) <= 1e-10


def test_custom_generators():
    spec, _ = CELLS["quadratic, m^2"]
    jets = sample_jets(np.random.default_rng(3), 500)

    shift = custom_generator("shift", 1, 0, 0, 0)
    E1, E2 = determining_residuals(shift, jets, spec)
    assert np.max(np.abs(E1) + np.abs(E2)) <= 1e-10

    # rescaling the density alone breaks the coupling
    density_only = custom_generator("density scaling", 0, 0, 0, M)
    E1, E2 = determining_residuals(density_only, jets, spec)
    assert np.max(np.abs(E1) + np.abs(E2)) > 1e-4

    # callables are accepted as (value, grad, hess)
    flat = lambda t, x, u, m: tuple(tuple(0 * t for _ in range(4)) for _ in range(4))
    boost = custom_generator(
        "boost",
        0,
        (lambda t, x, u, m: t, lambda t, x, u, m: (np.ones_like(t), 0 * t, 0 * t, 0 * t), flat),
        (lambda t, x, u, m: -x, lambda t, x, u, m: (0 * t, -np.ones_like(t), 0 * t, 0 * t), flat),
        0,
    )
    E1, E2 = determining_residuals(boost, jets, spec)
    assert np.max(np.abs(E1) + np.abs(E2)) <= 1e-10


@pytest.mark.parametrize("p", [4.0, 5.0, -1.0])
def test_power_scaling_is_variational_only_at_critical_exponent(p):
    rng = np.random.default_rng(42)
    jets = sample_jets(rng, 1000, positive_ux=True)

    on = problem(HamiltonianSpec.power(p), CouplingSpec.power(1.0, gamma_star(p)))
    (cand,) = [c for c in divergence_candidates(on) if c.name == "Y^a_4"]
    assert cand.expected
    defect = variational_defect(cand.generator, cand.V_t, cand.V_x, jets, on)
    assert np.max(np.abs(defect)) <= 1e-10

    off = problem(HamiltonianSpec.power(p), CouplingSpec.power(1.0, gamma_star(p) + 0.3))
    (cand,) = [c for c in divergence_candidates(off) if c.name == "Y^a_4"]
    assert not cand.expected
    defect = variational_defect(cand.generator, cand.V_t, cand.V_x, jets, off)
    assert np.max(np.abs(defect)) > 1e-4


@pytest.mark.parametrize(
    "spec",
    [
        problem(HamiltonianSpec.quadratic(), CouplingSpec.power(1.0, 2.0)),
        problem(HamiltonianSpec.quadratic(), CouplingSpec.log(1.0)),
        problem(HamiltonianSpec.power(4.0), CouplingSpec.power(1.0, 0.8)),
        problem(HamiltonianSpec.power(-1.0), CouplingSpec.power(1.0, 0.2)),
        problem(HamiltonianSpec.exponential(1.0), CouplingSpec.power(1.0, 0.5)),
        problem(HamiltonianSpec.exponential(2.0), CouplingSpec.power(1.0, 1.0)),
    ],
)
def test_variational_suite(spec):
    result = verify_variational(spec, np.random.default_rng(42))
    assert result.passed, result.failed


def test_off_critical_exponent_is_reported_not_variational():
    spec = problem(HamiltonianSpec.power(4.0), CouplingSpec.power(1.0, 0.9))
    result = verify_variational(spec, np.random.default_rng(42))
    assert result.passed
    (item,) = [i for i in result.items if i.name == "Y^a_4"]
    assert item.expected == "fail"
    assert item.detail == "NOT variational"


def test_galilean_boost_variational_with_potential():
    spec = problem(HamiltonianSpec.quadratic(), CouplingSpec.power(2.0, 3.0))
    jets = sample_jets(np.random.default_rng(5), 500)
    (cand,) = [c for c in divergence_candidates(spec) if c.name == "X^c"]
    defect = variational_defect(cand.generator, cand.V_t, cand.V_x, jets, spec)
    assert np.max(np.abs(defect)) <= 1e-10


def test_point_flows():
    t, x, u, m = 0.4, 0.2, -0.3, 1.5

    assert float(group_flow(FlowRequest(generator_x1(), 0.5, point=(t, x, u, m)))[0]) == pytest.approx(0.9)
    assert float(group_flow(FlowRequest(generator_x2(), 0.5, point=(t, x, u, m)))[1]) == pytest.approx(0.7)

    tb, xb, ub, mb = group_flow(FlowRequest(generator_xc(), 0.5, point=(t, x, u, m)))
    assert (float(tb), float(xb), float(mb)) == pytest.approx((0.4, 0.4, 1.5))
    assert float(ub) == pytest.approx(-0.3 - 0.1 - 0.05)

    with pytest.raises(DomainError):
        FlowRequest(generator_x5c(0.3), 2.0, point=(np.array([0.6]), x, u, m))
    with pytest.raises(ValueError):
        FlowRequest(generator_x1(), 0.1)


@pytest.mark.parametrize("cell", sorted(CELLS))
def test_group_law(cell):
    spec, _ = CELLS[cell]
    result = verify_flows(spec, np.random.default_rng(42))
    assert result.passed, result.failed
    assert "pair" in result.info


@pytest.fixture(scope="module")
def desk_pair():
    spec = ProblemSpec(
        HamiltonianSpec.quadratic(),
        CouplingSpec.power(1.0, 2.0),
        epsilon=0.3,
        initial_density=lambda x: 1.0 + 0.5 * np.cos(2 * np.pi * x),
    )
    grid = GridSpec(length=1.0, num_cells=32, horizon=1.0, num_steps=32)
    pair, _ = solve_picard(spec, grid, PicardConfig(tolerance=1e-10))
    return spec, pair


def test_flows_preserve_discrete_residuals(desk_pair):
    spec, pair = desk_pair
    result = verify_flows(spec, np.random.default_rng(42), pair=pair)
    assert result.passed, result.failed
    names = {item.name for item in result.items}
    assert "X^c residual preservation" in names
    assert "X^c_5 residual preservation" not in names


def test_projective_flow_rejects_pairs(desk_pair):
    _, pair = desk_pair
    with pytest.raises(DomainError):
        group_flow(FlowRequest(generator_x5c(0.3), 0.1, pair=pair))


def test_whole_cell_shift_keeps_residuals(desk_pair):
    spec, pair = desk_pair
    F1, F2 = pde_residuals(pair, spec)
    moved = verify_transformed_solution(
        pair, FlowRequest(generator_x2(), 2 * pair.grid.dx, pair=pair), spec
    )
    assert moved == pytest.approx((F1.sup_norm(), F2.sup_norm()), rel=1e-12)


def test_export_catalog():
    spec, expected = CELLS["quadratic, log"]
    catalog = export_catalog(spec)
    assert {g["id"] for g in catalog} == expected
    (xf,) = [g for g in catalog if g["id"] == "X_f"]
    assert set(xf["coefficients"]) == {"xi_t", "xi_x", "eta_u", "eta_m"}
    assert all(isinstance(v, str) for v in xf["coefficients"].values())


def test_prolongation_of_the_galilean_boost():
    jets = sample_jets(np.random.default_rng(11), 100)
    z = prolong(generator_xc(), jets)

    np.testing.assert_allclose(z.zeta_u_t, -jets.u_x, atol=1e-14)
    np.testing.assert_allclose(z.zeta_u_x, -1.0, atol=1e-14)
    np.testing.assert_allclose(z.zeta_u_xx, 0.0, atol=1e-14)
    np.testing.assert_allclose(z.zeta_m_t, -jets.m_x, atol=1e-14)
    np.testing.assert_allclose(z.zeta_m_x, 0.0, atol=1e-14)
    np.testing.assert_allclose(z.zeta_m_xx, 0.0, atol=1e-14)


def _desk_variant(**kwargs):
    base = dict(initial_density=lambda x: 1.0 + 0.5 * np.cos(2 * np.pi * x))
    base.update(kwargs)
    return ProblemSpec(
        HamiltonianSpec.quadratic(), CouplingSpec.power(1.0, 2.0), epsilon=0.3, **base
    )


def test_space_shift_commutes_with_the_solver(desk_pair):
    _, pair = desk_pair
    a = 8 * pair.grid.dx
    moved = group_flow(FlowRequest(generator_x2(), a, pair=pair))

    spec = _desk_variant(initial_density=lambda x: 1.0 + 0.5 * np.cos(2 * np.pi * (x - a)))
    solved, _ = solve_picard(spec, pair.grid, PicardConfig(tolerance=1e-10))

    np.testing.assert_allclose(solved.m.numpy(), moved.m.numpy(), atol=1e-9)
    np.testing.assert_allclose(solved.u_full(), moved.u_full(), atol=1e-9)


def test_gauge_shift_commutes_with_the_solver(desk_pair):
    _, pair = desk_pair
    moved = group_flow(FlowRequest(generator_x3(), 0.7, pair=pair))

    spec = _desk_variant(terminal_cost=lambda x: 0.7 + 0 * x)
    solved, _ = solve_picard(spec, pair.grid, PicardConfig(tolerance=1e-10))

    np.testing.assert_allclose(solved.u.numpy(), moved.u.numpy(), atol=1e-9)
    np.testing.assert_allclose(solved.m.numpy(), moved.m.numpy(), atol=1e-9)

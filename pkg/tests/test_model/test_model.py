import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfglab.errors import ConfigError, DomainError
from mfglab.grid import sample_jets
from mfglab.model import (
    CouplingSpec,
    HamiltonianSpec,
    ProblemSpec,
    TransformRecord,
    apply_transform_record,
    eval_coupling,
    eval_coupling_primitive,
    eval_hamiltonian,
    eval_lagrangian,
    euler_lagrange_residuals,
    feedback_control,
    gamma_star,
    invert_transform_record,
    normalize_hamiltonian,
    pde_f1,
    pde_f2,
)


def test_canonical_closed_forms():
    w = np.linspace(0.2, 1.8, 9)

    H = HamiltonianSpec.quadratic()
    np.testing.assert_allclose(eval_hamiltonian(H, w), 0.5 * w**2, rtol=1e-15)
    np.testing.assert_allclose(eval_hamiltonian(H, w, 1), w, rtol=1e-15)
    np.testing.assert_allclose(eval_hamiltonian(H, w, 2), np.ones_like(w))
    np.testing.assert_allclose(eval_hamiltonian(H, w, 3), np.zeros_like(w))

    H = HamiltonianSpec.power(4.0)
    np.testing.assert_allclose(eval_hamiltonian(H, w), w**4 / 4, rtol=1e-15)
    np.testing.assert_allclose(eval_hamiltonian(H, w, 3), 6 * w, rtol=1e-15)

    H = HamiltonianSpec.exponential(2.0)
    np.testing.assert_allclose(eval_hamiltonian(H, w), np.exp(2 * w) / 2, rtol=1e-15)
    np.testing.assert_allclose(eval_hamiltonian(H, w, 2), 2 * np.exp(2 * w), rtol=1e-15)


def test_scalar_in_scalar_out():
    assert isinstance(eval_hamiltonian(HamiltonianSpec.cubic(), 2.0), float)
    assert eval_hamiltonian(HamiltonianSpec.cubic(), 2.0) == pytest.approx(8.0 / 3.0)
    assert feedback_control(HamiltonianSpec.quadratic(), 0.7) == pytest.approx(-0.7)


@pytest.mark.parametrize("p", [0.0, 1.0, 2.0, 3.0])
def test_excluded_power_exponents(p):
    with pytest.raises(ConfigError):
        HamiltonianSpec.power(p)


@pytest.mark.parametrize(
    "block",
    [
        {"family": "exponential", "k": 0.0},
        {"family": "quadratic", "h": 0.0},
        {"family": "power", "p": 4, "h": 0.0},
        {"family": "quadratic", "h2": 1.0},
        {"family": "power"},
        {"family": "spline"},
        {"family": "quadratic", "z": 1.0},
    ],
)
def test_invalid_hamiltonians(block):
    with pytest.raises(ConfigError):
        HamiltonianSpec.from_dict(block)


def test_custom_needs_four_callables():
    with pytest.raises(ConfigError):
        HamiltonianSpec.from_callables(np.cos, np.sin, np.cos, None)
    H = HamiltonianSpec.from_callables(
        np.cosh, np.sinh, np.cosh, np.sinh
    )
    assert eval_hamiltonian(H, 0.0, 2) == pytest.approx(1.0)


def test_linear_hamiltonian_is_rejected():
    # H'' == 0 decouples the system
    with pytest.raises(ConfigError):
        HamiltonianSpec.from_callables(
            lambda w: w, lambda w: np.ones_like(w), np.zeros_like, np.zeros_like
        )


def test_family_inference():
    assert HamiltonianSpec.from_dict({"p": 2}).family == "quadratic"
    assert HamiltonianSpec.from_dict({"p": 3}).family == "cubic"
    assert HamiltonianSpec.from_dict({"p": 4.5}).family == "power"
    assert HamiltonianSpec.from_dict({"k": 1.0}).family == "exponential"
    assert HamiltonianSpec.from_dict({}).family == "quadratic"


def test_power_domain_errors():
    H = HamiltonianSpec.power(2.5)
    with pytest.raises(DomainError):
        eval_hamiltonian(H, np.array([0.5, -0.1]))
    with pytest.raises(DomainError):
        eval_hamiltonian(HamiltonianSpec.power(-1.0), 0.0)
    with pytest.raises(DomainError):
        eval_hamiltonian(HamiltonianSpec.quadratic(), 1.0, 4)


def test_coupling_validation():
    with pytest.raises(ConfigError):
        CouplingSpec("power", alpha=1.0)
    with pytest.raises(ConfigError):
        CouplingSpec("log", alpha=1.0, gamma=2.0)
    with pytest.raises(ConfigError):
        CouplingSpec.power(1.0, 0.0)
    with pytest.raises(ConfigError):
        CouplingSpec.power(0.0, 2.0)
    with pytest.raises(ConfigError):
        CouplingSpec.from_dict({"family": "power", "gamma": 2.0, "beta": 1.0})


def test_coupling_values_and_primitives():
    m = np.linspace(0.1, 3.0, 30)

    f = CouplingSpec.power(2.0, 3.0)
    np.testing.assert_allclose(eval_coupling(f, m), 2 * m**3, rtol=1e-15)
    np.testing.assert_allclose(eval_coupling(f, m, 1), 6 * m**2, rtol=1e-15)
    np.testing.assert_allclose(eval_coupling_primitive(f, m), 0.5 * m**4, rtol=1e-15)

    f = CouplingSpec.log(1.5)
    np.testing.assert_allclose(eval_coupling(f, m), 1.5 * np.log(m), rtol=1e-15)
    np.testing.assert_allclose(
        eval_coupling_primitive(f, m), 1.5 * (m * np.log(m) - m), rtol=1e-15
    )
    with pytest.raises(DomainError):
        eval_coupling(f, 0.0)

    f = CouplingSpec.power(1.0, 0.5)
    assert f.floor > 0
    with pytest.raises(DomainError):
        eval_coupling(f, 0.0, 1)


def test_table_coupling_interpolation():
    f = CouplingSpec.from_samples(lambda m: m**2, m_max=3.0, n=256)
    m = np.linspace(0.05, 2.9, 40)
    np.testing.assert_allclose(eval_coupling(f, m), m**2, atol=1e-3)
    np.testing.assert_allclose(eval_coupling(f, m, 1), 2 * m, atol=5e-2)
    np.testing.assert_allclose(eval_coupling_primitive(f, m), m**3 / 3, atol=1e-3)
    with pytest.raises(DomainError):
        eval_coupling(f, 3.5)


def test_table_coupling_from_columns():
    block = {"family": "custom-table", "m": [0.0, 1.0, 2.0], "f": [0.0, 1.0, 4.0]}
    f = CouplingSpec.from_dict(block)
    assert f.family == "table"
    with pytest.raises(ConfigError):
        CouplingSpec.from_dict({"family": "table", "m": [0.0, 1.0, 1.0], "f": [0, 1, 2]})
    with pytest.raises(ConfigError):
        CouplingSpec.from_dict({"family": "table", "m": [0.0, 1.0], "f": [1.0, 1.0]})


def test_gamma_star():
    assert gamma_star(4.0) == pytest.approx(0.8)
    assert gamma_star(3.0) == pytest.approx(1.0)
    assert gamma_star(-1.0) == pytest.approx(0.2)
    with pytest.raises(DomainError):
        gamma_star(1.5)


def _random_raw(rng, family):
    if family == "quadratic":
        return HamiltonianSpec(
            "quadratic", h=rng.uniform(0.2, 3.0), h1=rng.uniform(-2, 2), h0=rng.uniform(-2, 2)
        )
    if family == "cubic":
        return HamiltonianSpec(
            "cubic",
            h=rng.uniform(0.2, 3.0),
            h2=rng.uniform(-2, 2),
            h1=rng.uniform(-2, 2),
            h0=rng.uniform(-2, 2),
        )
    if family == "power":
        p = rng.choice([4.0, 5.0, -1.0, 2.5])
        return HamiltonianSpec(
            "power",
            p=p,
            h=np.sign(p) * rng.uniform(0.2, 3.0),
            q=rng.uniform(-1, 1),
            h2=rng.uniform(-2, 2),
            h1=rng.uniform(-2, 2),
            h0=rng.uniform(-2, 2),
        )
    k = rng.choice([-1.5, -0.5, 0.5, 1.5])
    return HamiltonianSpec(
        "exponential",
        k=k,
        h=np.sign(k) * rng.uniform(0.2, 3.0),
        h2=rng.uniform(-2, 2),
        h1=rng.uniform(-2, 2),
        h0=rng.uniform(-2, 2),
    )


@pytest.mark.parametrize("family", ["quadratic", "cubic", "power", "exponential"])
def test_normalization_agrees_pointwise(family):
    rng = np.random.default_rng(7)
    v = np.linspace(0.5, 2.0, 25)
    for _ in range(20):
        raw = _random_raw(rng, family)
        canonical, record = normalize_hamiltonian(raw)
        assert canonical.is_canonical

        expected = np.asarray(eval_hamiltonian(canonical, v))
        transformed = np.asarray(apply_transform_record(raw, record, v))
        assert np.max(np.abs(transformed - expected) / np.maximum(1.0, np.abs(expected))) <= 1e-10

        w = record.A + v / record.C3
        back = np.asarray(invert_transform_record(canonical, record, w))
        direct = np.asarray(eval_hamiltonian(raw, w))
        assert np.max(np.abs(back - direct) / np.maximum(1.0, np.abs(direct))) <= 1e-10

        again, identity = normalize_hamiltonian(canonical)
        assert again == canonical
        assert identity.is_identity


def test_normalization_example_record():
    raw = HamiltonianSpec.from_dict({"h": 2, "p": 4, "q": 1, "h1": 3, "h0": -1})
    canonical, record = normalize_hamiltonian(raw)
    assert canonical.family == "power" and canonical.p == 4.0
    assert record.A == pytest.approx(-1.0)
    assert record.C3 == pytest.approx(8.0 ** (1.0 / 3.0))
    assert record.coupling_factor == pytest.approx(record.C3)


def test_normalization_identity_for_canonical():
    canonical, record = normalize_hamiltonian(HamiltonianSpec.quadratic())
    assert canonical == HamiltonianSpec.quadratic()
    assert record == TransformRecord()


def test_normalization_sign_restriction():
    with pytest.raises(ConfigError):
        normalize_hamiltonian(HamiltonianSpec("power", p=5.0, h=-1.0))
    with pytest.raises(ConfigError):
        normalize_hamiltonian(HamiltonianSpec("exponential", k=1.0, h=-1.0))


def test_transform_record_validation():
    with pytest.raises(ConfigError):
        TransformRecord(C2=2.0, C4=1.0)
    with pytest.raises(ConfigError):
        TransformRecord(C3=0.0)


def test_euler_lagrange_reproduces_the_system():
    rng = np.random.default_rng(3)
    jets = sample_jets(rng, 500)
    for H, f in [
        (HamiltonianSpec.quadratic(), CouplingSpec.power(1.0, 2.0)),
        (HamiltonianSpec.exponential(1.0), CouplingSpec.log(0.7)),
        (HamiltonianSpec.cubic(), CouplingSpec.power(2.0, 1.0)),
    ]:
        spec = ProblemSpec(H, f, epsilon=0.3)
        E_u, E_m = euler_lagrange_residuals(jets, spec)
        np.testing.assert_allclose(E_u, pde_f2(jets, spec), atol=1e-12)
        np.testing.assert_allclose(E_m, pde_f1(jets, spec), atol=1e-12)


def test_problem_validation():
    with pytest.raises(ConfigError):
        ProblemSpec(HamiltonianSpec.quadratic(), CouplingSpec.power(1.0, 2.0), epsilon=0.0)
    spec = ProblemSpec(
        HamiltonianSpec.quadratic(),
        CouplingSpec.power(1.0, 2.0),
        epsilon=0.1,
        terminal_cost=lambda x, m: 2 * m,
        terminal_depends_on_density=True,
    )
    with pytest.raises(ConfigError):
        spec.terminal_values(np.zeros(4))
    np.testing.assert_allclose(spec.terminal_values(np.zeros(4), np.ones(4)), 2.0)
    np.testing.assert_allclose(spec.initial_values(np.zeros(4), 2.0), 0.5)


@settings(max_examples=50, deadline=None)
@given(
    p=st.sampled_from([4.0, 5.0, -1.0, 2.5, 6.0]),
    w=st.floats(min_value=0.1, max_value=3.0),
)
def test_power_derivatives_match_finite_differences(p, w):
    H = HamiltonianSpec.power(p)
    h = 1e-6 * w
    for order in (1, 2, 3):
        fd = (eval_hamiltonian(H, w + h, order - 1) - eval_hamiltonian(H, w - h, order - 1)) / (2 * h)
        exact = eval_hamiltonian(H, w, order)
        assert fd == pytest.approx(exact, rel=1e-5, abs=1e-6)


def test_lagrangian_closed_form():
    jets = sample_jets(np.random.default_rng(4), 200)
    spec = ProblemSpec(HamiltonianSpec.quadratic(), CouplingSpec.power(1.0, 2.0), epsilon=0.3)
    expected = (
        -jets.m * jets.u_t
        + 0.3 * jets.m_x * jets.u_x
        + 0.5 * jets.m * jets.u_x**2
        - jets.m**3 / 3.0
    )
    np.testing.assert_allclose(eval_lagrangian(jets, spec), expected, atol=1e-12)

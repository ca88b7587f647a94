import numpy as np
import pytest

from fracstep.models import (
    MODELS, DecomposedSystem, PredatorPreyParams, ToyModelParams, check_quasi_monotone,
    jacobian_fd, make_params, make_system, predator_prey_system, toy_system,
    validate_decomposition,
)

POSITIVITY_SET = PredatorPreyParams(s=0.2, K=25, q=1, q1=0.1, beta=2, s0=0.5, E=1.3)


def linear_system(A):
    A = np.asarray(A, dtype=float)
    plus = lambda x: np.zeros(len(A))  # noqa: E731
    minus = lambda x: np.zeros(len(A))  # noqa: E731
    return DecomposedSystem("linear", len(A), {}, plus, minus, lambda x: A @ x)


def test_interior_equilibrium_is_near_zero():
    f = predator_prey_system(POSITIVITY_SET).rhs(np.array([0.9890, 0.2111]))
    assert np.abs(f).max() <= 5e-4


def test_origin_is_equilibrium():
    for sys in (predator_prey_system(POSITIVITY_SET), toy_system(ToyModelParams(2, 1, 6))):
        assert np.all(sys.rhs(np.zeros(2)) == 0)


def test_hand_substitution():
    p = PredatorPreyParams(s=1, K=1, q=1, q1=0, beta=1, s0=1, E=0)
    np.testing.assert_array_equal(predator_prey_system(p).rhs(np.array([1.0, 1.0])), [-1.0, 0.0])


def test_toy_prey_axis():
    sys = toy_system(ToyModelParams(a=2, b=1, c=6))
    for y in (0.0, 0.3, 7.0):
        np.testing.assert_array_equal(sys.rhs(np.array([0.0, y])), [0.0, -6.0 * y])


def test_parameter_validation():
    with pytest.raises(ValueError):
        PredatorPreyParams(K=0)
    with pytest.raises(ValueError):
        PredatorPreyParams(E=-1)
    with pytest.raises(ValueError):
        ToyModelParams(a=-1)


def test_registry():
    assert set(MODELS) == {"predator_prey", "toy"}
    sys = make_system("predator_prey", {"s": 0.2, "K": 25})
    assert sys.params["s"] == 0.2 and sys.params["q"] == 1.0
    assert make_params("toy", {"c": 0.2}) == ToyModelParams(2, 1, 0.2)
    with pytest.raises(ValueError, match="unknown model"):
        make_system("lorenz")
    with pytest.raises(ValueError, match="unknown parameter"):
        make_system("toy", {"d": 1})


@pytest.mark.parametrize("sys", [
    predator_prey_system(POSITIVITY_SET),
    predator_prey_system(PredatorPreyParams()),
    toy_system(ToyModelParams(2, 1, 6)),
    toy_system(ToyModelParams(2, 1, 0.2)),
], ids=["pp_positivity", "pp_default", "model1", "model2"])
def test_builtin_decompositions_pass(sys):
    rep = validate_decomposition(sys, n_samples=1000, box_max=10.0, seed=7)
    assert rep.passed, rep.lines()
    assert rep.metrics["max_consistency_error"] <= 1e-10
    assert min(rep.metrics["min_f_plus"]) >= 0
    assert min(rep.metrics["min_f_minus"]) >= 0
    assert min(rep.metrics["min_f_on_faces"]) >= 0


def test_toy_faces_are_exactly_zero():
    rep = validate_decomposition(toy_system(ToyModelParams(2, 1, 6)), 200, 10.0, 1)
    assert rep.metrics["min_f_on_faces"] == [0.0, 0.0]


def test_broken_minus_part_fails():
    good = predator_prey_system(POSITIVITY_SET)
    bad = DecomposedSystem("bad", 2, {}, good.eval_plus, lambda x: -np.ones(2),
                           lambda x: good.eval_plus(x) + x)
    rep = validate_decomposition(bad, 100, 10.0, 0)
    assert not rep.passed
    assert any("negative f_minus" in f for f in rep.findings)


def test_inconsistent_split_fails():
    good = predator_prey_system(POSITIVITY_SET)
    bad = DecomposedSystem("bad", 2, {}, good.eval_plus, good.eval_minus,
                           lambda x: good.rhs(x) + 1e-6)
    rep = validate_decomposition(bad, 100, 10.0, 0)
    assert not rep.passed
    assert rep.metrics["max_consistency_error"] > 1e-10


def test_validator_is_deterministic():
    sys = predator_prey_system(POSITIVITY_SET)
    assert validate_decomposition(sys, 50, 10.0, 3).metrics == \
        validate_decomposition(sys, 50, 10.0, 3).metrics


def test_validators_need_full_rhs():
    sys = DecomposedSystem("parts_only", 1, {}, lambda x: x, lambda x: x)
    with pytest.raises(ValueError):
        validate_decomposition(sys, 10, 1.0, 0)
    with pytest.raises(ValueError):
        check_quasi_monotone(sys, 10, 1.0, 0)
    with pytest.raises(ValueError):
        jacobian_fd(sys, np.ones(1))


def test_quasi_monotone_linear_metzler():
    rep = check_quasi_monotone(linear_system([[-3.0, 0.5], [2.0, -1.0]]), 500, 10.0, 0)
    assert rep.passed


def test_quasi_monotone_swap():
    sys = DecomposedSystem("swap", 2, {}, lambda x: x[::-1], lambda x: np.zeros(2),
                           lambda x: x[::-1].copy())
    assert check_quasi_monotone(sys, 500, 10.0, 0).passed


def test_predator_prey_is_not_quasi_monotone():
    rep = check_quasi_monotone(predator_prey_system(POSITIVITY_SET), 1000, 10.0, 0)
    assert not rep.passed
    assert rep.metrics["min_gap"] < 0
    assert "f[0]" in rep.findings[0]


def test_jacobian_fd_linear_and_constant():
    A = np.array([[1.5, -2.0], [0.25, 3.0]])
    np.testing.assert_allclose(jacobian_fd(linear_system(A), np.array([0.3, 4.0]), 1e-3), A,
                               rtol=1e-12, atol=1e-12)
    const = DecomposedSystem("c", 2, {}, None, None, lambda x: np.array([1.0, 2.0]))
    assert np.all(jacobian_fd(const, np.ones(2), 1e-4) == 0)
    with pytest.raises(ValueError):
        jacobian_fd(const, np.ones(2), 0.0)


def test_jacobian_fd_at_interior_equilibrium():
    sys = predator_prey_system(POSITIVITY_SET)
    P2 = np.array([0.9890, 0.2111])
    assert np.abs(jacobian_fd(sys, P2, 1e-5) - sys.jacobian(P2)).max() <= 1e-6


@pytest.mark.parametrize("p", [POSITIVITY_SET, PredatorPreyParams(),
                               PredatorPreyParams(s=5, K=5, q=0.1, q1=2, beta=4, s0=0.5, E=0.3)])
def test_analytic_jacobian_random_points(p):
    sys = predator_prey_system(p)
    rng = np.random.default_rng(11)
    for x in rng.uniform(0.01, 10, size=(100, 2)):
        assert np.abs(jacobian_fd(sys, x, 1e-6) - sys.jacobian(x)).max() <= 1e-6


def test_toy_jacobian_matches_fd():
    sys = toy_system(ToyModelParams(2, 1, 6))
    rng = np.random.default_rng(5)
    for x in rng.uniform(0, 10, size=(50, 2)):
        assert np.abs(jacobian_fd(sys, x, 1e-6) - sys.jacobian(x)).max() <= 1e-6

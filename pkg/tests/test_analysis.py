import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracstep.analysis import (
    classify_stability, eig2, jacobian_at, predator_prey_equilibria, stability_report,
)
from fracstep.models import DecomposedSystem, PredatorPreyParams, predator_prey_system
from conftest import SCENARIOS


def test_eig2_examples():
    assert eig2(np.eye(2)) == (1, 1)
    rot = eig2([[0, -1], [1, 0]])
    assert set(rot) == {1j, -1j}
    assert all(abs(cmath.phase(ev)) == math.pi / 2 for ev in rot)
    assert sorted(ev.real for ev in eig2([[0, 1], [-2, -3]])) == [-2.0, -1.0]
    with pytest.raises(ValueError):
        eig2(np.eye(3))


def test_eig2_small_root_without_cancellation():
    # roots 1e8 and 1e-8: naive formula loses the small one entirely
    A = np.array([[0.0, -1.0], [1.0, 1e8 + 1e-8]])
    roots = sorted(ev.real for ev in eig2(A))
    assert roots[0] == pytest.approx(1e-8, rel=1e-12)
    assert roots[1] == pytest.approx(1e8, rel=1e-12)


finite = st.floats(min_value=-100, max_value=100, allow_nan=False)


@given(st.lists(finite, min_size=4, max_size=4))
def test_eig2_matches_numpy(entries):
    A = np.array(entries).reshape(2, 2)
    ours = np.sort_complex(np.array(eig2(A)))
    ref = np.sort_complex(np.linalg.eigvals(A).astype(complex))
    scale = 1 + np.abs(A).max()
    # near-repeated roots are only determined to sqrt(eps) relative
    assert np.abs(ours - ref).max() <= 1e-6 * scale


@given(st.lists(finite, min_size=4, max_size=4))
def test_argument_symmetry(entries):
    rep = classify_stability(np.array(entries).reshape(2, 2))
    assert all(0 <= a <= math.pi for a in rep.args)
    if rep.eigenvalues[0].imag != 0:
        assert rep.args[0] == rep.args[1]


@given(st.lists(finite, min_size=4, max_size=4))
def test_stable_orders_form_a_down_set(entries):
    rep = classify_stability(np.array(entries).reshape(2, 2))
    verdicts = [rep.classification_at(a) == "stable" for a in np.linspace(0.01, 1.0, 60)]
    first_unstable = verdicts.index(False) if False in verdicts else len(verdicts)
    assert not any(verdicts[first_unstable:])


def test_negative_real_eigenvalue_always_stable():
    rep = classify_stability([[-1.0]], eigenvalues=[-1.0])
    assert rep.marginal_alpha is None
    assert all(rep.classification_at(a) == "stable" for a in (0.01, 0.5, 1.0))


def test_larger_systems_need_eigenvalues():
    with pytest.raises(ValueError):
        classify_stability(np.eye(3))
    rep = classify_stability(-np.eye(3), eigenvalues=[-1, -1, -1])
    assert rep.classification_at(0.9) == "stable"


def test_zero_eigenvalue_is_marginal():
    rep = classify_stability([[0.0, 1.0], [0.0, -1.0]], alpha=0.5)
    assert rep.classification_at(0.5) == "marginal"
    assert rep.real_kind == "degenerate"
    assert any("zero eigenvalue" in n for n in rep.notes)


def test_marginal_order_of_unstable_focus():
    # eigenvalues 1 +- i: argument pi/4, so stable exactly for alpha < 1/2
    rep = classify_stability([[1.0, -1.0], [1.0, 1.0]])
    assert rep.marginal_alpha == pytest.approx(0.5, abs=1e-15)
    assert rep.classification_at(0.49) == "stable"
    assert rep.classification_at(0.51) == "unstable"


def test_six_reference_triples(scenario):
    _, (p, R0, P2, abar) = scenario
    eq = predator_prey_equilibria(p)
    assert round(eq.R0, 4) == R0
    if P2 is None:
        assert eq.P2 is None
        assert "does not exist" in eq.P2_reason
        return
    np.testing.assert_array_equal(np.round(eq.P2, 4), P2)
    assert round(stability_report(p).point("P2").marginal_alpha, 4) == abar


def test_equilibrium_residual(scenario):
    _, (p, *_rest) = scenario
    eq = predator_prey_equilibria(p)
    if eq.P2 is not None:
        assert eq.P2_residual <= 1e-9 * (1 + np.abs(eq.P2).max())


def test_nonexistence_message():
    eq = predator_prey_equilibria(SCENARIOS["near_P1"][0])
    assert eq.P2_reason == "P2 does not exist (R0=0.0091 ≤ 1)"


def test_origin_is_a_saddle(scenario):
    _, (p, *_rest) = scenario
    rep = stability_report(p, [0.5, 0.9]).point("P0")
    assert rep.real_kind == "saddle"
    assert rep.classification_at(0.5) == "unstable"


def test_P1_verdict_follows_R0(scenario):
    _, (p, R0, *_rest) = scenario
    rep = stability_report(p, [0.3, 0.7, 1.0])
    expected = "stable" if R0 < 1 else "unstable"
    assert set(rep.verdicts()["P1"].values()) == {expected}


@pytest.mark.parametrize("E", np.linspace(0.0, 3.0, 13))
def test_P1_verdict_across_R0(E):
    p = PredatorPreyParams(E=E)
    rep = stability_report(p, [0.5, 1.0])
    expected = "stable" if p.R0 < 1 else "unstable"
    assert set(rep.verdicts()["P1"].values()) == {expected}


def test_positivity_set_verdicts():
    rep = stability_report(SCENARIOS["lost_positivity"][0], [0.65, 0.99, 1.0])
    assert rep.verdicts()["P2"] == {0.65: "stable", 0.99: "stable", 1.0: "unstable"}


def test_missing_P2_in_report():
    rep = stability_report(SCENARIOS["near_P1"][0], [0.5])
    assert not rep.point("P2").exists
    assert "P2" not in rep.verdicts()
    with pytest.raises(ValueError):
        rep.point("P2").classification_at(0.5)


def test_jacobian_fallback_to_finite_differences():
    sys = predator_prey_system(SCENARIOS["dynamical_behavior"][0])
    bare = DecomposedSystem("pp", 2, {}, sys.eval_plus, sys.eval_minus, sys.eval_full)
    x = np.array([0.3333, 0.1556])
    assert np.abs(jacobian_at(bare, x) - jacobian_at(sys, x)).max() <= 1e-7


def test_bad_alpha_rejected():
    with pytest.raises(ValueError):
        stability_report(PredatorPreyParams(), [1.2])

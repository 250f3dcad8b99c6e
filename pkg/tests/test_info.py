import math

import numpy as np
import pytest

from gwcache.core.info import (
    JointPmf2,
    binary_entropy,
    binary_entropy_inv,
    dsbs,
    dsbs_parameter,
    entropy,
    joint_measures,
    shared_component_pmf,
)
from gwcache.errors import ValidationError

H_02 = 0.7219280948873623  # h(0.2)


# --- entropy ---

def test_entropy_of_fair_bit_is_one():
    """A fair bit carries exactly one bit."""
    assert entropy([0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)


def test_entropy_of_point_mass_is_zero():
    """0 log 0 = 0, so a point mass has zero entropy."""
    assert entropy([1.0, 0.0, 0.0]) == 0.0


def test_entropy_uniform_matches_log2():
    """The uniform pmf over 8 symbols has entropy 3."""
    assert entropy(np.full(8, 1 / 8)) == pytest.approx(3.0, abs=1e-12)


def test_entropy_rejects_bad_sum():
    """A vector that does not sum to one is refused with a field error."""
    with pytest.raises(ValidationError) as excinfo:
        entropy([0.5, 0.4])
    assert "pmf" in excinfo.value.errors


def test_entropy_rejects_negative_entries():
    """Negative probabilities are refused."""
    with pytest.raises(ValidationError):
        entropy([1.5, -0.5])


# --- JointPmf2 ---

def test_joint_pmf_is_read_only():
    """The stored matrix cannot be modified in place."""
    j = dsbs(0.2)
    with pytest.raises(ValueError):
        j.p[0, 0] = 1.0


def test_joint_pmf_rejects_vector():
    """Only 2-D matrices describe a pair source."""
    with pytest.raises(ValidationError):
        JointPmf2(np.array([0.5, 0.5]))


def test_joint_pmf_json_round_trip():
    """A pmf written with to_json reads back bit for bit."""
    j = shared_component_pmf(0.3, 0.6, 0.1)
    again = JointPmf2.from_json(j.to_json())
    assert np.array_equal(again.p, j.p)


def test_joint_pmf_from_json_reports_missing_field():
    """A record without 'p' fails with the schema's message."""
    with pytest.raises(ValidationError) as excinfo:
        JointPmf2.from_json({"n1": 2, "n2": 2})
    assert excinfo.value.errors["p"] == "'p' is a required field."


def test_joint_pmf_from_json_checks_shape():
    """Declared dimensions must match the matrix."""
    with pytest.raises(ValidationError) as excinfo:
        JointPmf2.from_json({"n1": 2, "n2": 3, "p": [[0.5, 0.0], [0.0, 0.5]]})
    assert "p" in excinfo.value.errors


# --- joint_measures ---

def test_joint_measures_dsbs():
    """DSBS(0.2): uniform marginals, H(X1|X2) = h(0.2), I = 1 - h(0.2)."""
    m = joint_measures(dsbs(0.2))
    assert m.h1 == pytest.approx(1.0, abs=1e-12)
    assert m.h2 == pytest.approx(1.0, abs=1e-12)
    assert m.h12 == pytest.approx(1.0 + H_02, abs=1e-12)
    assert m.h1_given_2 == pytest.approx(H_02, abs=1e-12)
    assert m.mi == pytest.approx(1.0 - H_02, abs=1e-12)


def test_joint_measures_shared_component():
    """Fair shared-component source: H(X1,X2) = 3, H(Xi) = 2, I = 1."""
    m = joint_measures(shared_component_pmf(0.5, 0.5, 0.5))
    assert m.h12 == pytest.approx(3.0, abs=1e-12)
    assert m.h1 == pytest.approx(2.0, abs=1e-12)
    assert m.mi == pytest.approx(1.0, abs=1e-12)


def test_joint_measures_chain_rule_on_random_pmfs():
    """H(X1,X2) = H(X1) + H(X2|X1) and I >= 0 on random pmfs."""
    rng = np.random.default_rng(3)
    for _ in range(50):
        shape = tuple(rng.integers(1, 5, size=2))
        j = JointPmf2(rng.dirichlet(np.ones(shape[0] * shape[1])).reshape(shape))
        m = joint_measures(j)
        assert m.h12 == pytest.approx(m.h1 + m.h2_given_1, abs=1e-9)
        assert m.mi >= 0.0


def test_joint_measures_to_json_keys():
    """The JSON form names every measure explicitly."""
    keys = set(joint_measures(dsbs(0.1)).to_json())
    assert keys == {"H(X1)", "H(X2)", "H(X1,X2)", "H(X1|X2)", "H(X2|X1)", "I(X1;X2)"}


# --- binary entropy ---

def test_binary_entropy_endpoints():
    """h(0) = h(1) = 0 and h(1/2) = 1."""
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0, abs=1e-15)


def test_binary_entropy_rejects_out_of_range():
    """p outside [0, 1] is a validation error."""
    with pytest.raises(ValidationError):
        binary_entropy(1.2)


def test_binary_entropy_inverse_round_trip():
    """h(h^-1(y)) = y within 1e-9 on 1000 points of [0, 1]."""
    for y in np.linspace(0.0, 1.0, 1000):
        assert abs(binary_entropy(binary_entropy_inv(y)) - y) <= 1e-9


def test_binary_entropy_inverse_branch():
    """The inverse lands on [0, 1/2] with fixed endpoints."""
    assert binary_entropy_inv(0.0) == 0.0
    assert binary_entropy_inv(1.0) == 0.5
    assert binary_entropy_inv(H_02) == pytest.approx(0.2, abs=1e-10)


# --- sources ---

def test_dsbs_parameter_recognizes_dsbs():
    """A DSBS is recognized with its crossover probability."""
    assert dsbs_parameter(dsbs(0.3)) == pytest.approx(0.3, abs=1e-15)


def test_dsbs_parameter_rejects_other_sources():
    """Asymmetric or larger sources are not a DSBS."""
    assert dsbs_parameter(shared_component_pmf(0.5, 0.5, 0.5)) is None
    assert dsbs_parameter(JointPmf2(np.array([[0.5, 0.1], [0.2, 0.2]]))) is None


def test_dsbs_rejects_p0_above_half():
    """The DSBS parameter lives in [0, 1/2]."""
    with pytest.raises(ValidationError) as excinfo:
        dsbs(0.7)
    assert "p0" in excinfo.value.errors


def test_shared_component_symbol_layout():
    """Mass sits only on pairs that agree in v, the low bit of 2x' + v."""
    j = shared_component_pmf(0.5, 0.5, 0.5)
    for x1 in range(4):
        for x2 in range(4):
            expected = 1 / 8 if x1 % 2 == x2 % 2 else 0.0
            assert j.p[x1, x2] == pytest.approx(expected, abs=1e-15)


def test_shared_component_deterministic_is_constant():
    """All-zero biases put all mass on symbol pair (0, 0)."""
    j = shared_component_pmf(0.0, 0.0, 0.0)
    assert j.p[0, 0] == 1.0
    assert math.isclose(joint_measures(j).h12, 0.0, abs_tol=1e-15)

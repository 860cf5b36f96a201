import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jointrisk.risk import JointRisk, joint_to_marginals, product_joint

probs = st.floats(0.0, 1.0)


def test_uniform_joint_marginals():
    assert joint_to_marginals(JointRisk(0.25, 0.25, 0.25, 0.25)) == (0.5, 0.5)


@given(probs, probs)
def test_product_roundtrip(p1, p2):
    j = product_joint(p1, p2)
    m1, m2 = joint_to_marginals(j)
    assert abs(m1 - p1) < 1e-12 and abs(m2 - p2) < 1e-12
    assert j.is_valid()


def test_published_joint_cells_give_marginals():
    j = JointRisk(0.161, 0.126, 0.067, 1 - 0.161 - 0.126 - 0.067)
    m1, m2 = joint_to_marginals(j)
    assert m1 == pytest.approx(0.287, abs=1e-12)
    assert m2 == pytest.approx(0.228, abs=1e-12)


def test_array_roundtrip_and_indexing():
    arr = np.array([[0.1, 0.2, 0.3, 0.4], [0.4, 0.3, 0.2, 0.1]])
    j = JointRisk.from_array(arr)
    assert len(j) == 2
    assert np.array_equal(j.as_array(), arr)
    assert j[1].p11 == 0.4
    assert np.allclose(j.target("PY1"), [0.3, 0.7])
    assert np.allclose(j.target("PY2"), [0.4, 0.6])


def test_validity_checks():
    assert not JointRisk(0.5, 0.5, 0.1, -0.1).is_valid()
    assert not JointRisk(0.3, 0.3, 0.3, 0.3).is_valid()
    with pytest.raises(KeyError):
        JointRisk(0.25, 0.25, 0.25, 0.25).target("P22")

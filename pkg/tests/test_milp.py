import itertools

import numpy as np
import pytest

from prpmi import ParameterError
from prpmi.milp import (
    LinExpr,
    MilpModel,
    Sense,
    lin_sum,
    linearize_assignment,
    linearize_implication,
    linearize_min,
    linearize_product,
)

M = 100.0
GRID = (0.0, 30.0, 70.0, 100.0)


def _feasible(model, values):
    return model.max_violation(np.asarray(values, dtype=float)) <= 1e-9


def test_linear_expressions():
    """Test if arithmetic on variables builds the expected terms and constant."""
    model = MilpModel()
    x = model.add_variable("x")
    y = model.add_variable("y")
    expr = 2 * x + 3 - x + y * 4 - 1
    assert expr.terms == {0: 1.0, 1: 4.0}
    assert expr.constant == 2.0
    assert lin_sum([x, y, 5]).value(np.array([1.0, 2.0])) == 8.0
    assert (x - x).is_constant
    with pytest.raises(TypeError):
        LinExpr.of("x")


def test_constraint_normalization():
    """Test if constraints move constants to the right-hand side and drop zero terms."""
    model = MilpModel()
    x = model.add_variable("x")
    y = model.add_variable("y")
    con = model.add_constraint(x + y - y + 2, Sense.LE, 5)
    assert con.coefs == {0: 1.0}
    assert con.rhs == 3.0
    assert con.violation(np.array([4.0, 0.0])) == 1.0


def test_duplicate_and_bounds():
    model = MilpModel()
    model.add_variable("x")
    with pytest.raises(ParameterError):
        model.add_variable("x")
    with pytest.raises(ParameterError):
        model.add_variable("z", lower=2.0, upper=1.0)
    b = model.add_binary("b")
    assert (b.lower, b.upper) == (0.0, 1.0)
    assert model.n_binaries == 1


def test_matrix_form():
    """Test if the matrix form splits equalities and flips greater-or-equal rows."""
    model = MilpModel()
    x = model.add_variable("x", upper=4.0)
    b = model.add_binary("b")
    model.add_constraint(x + b, Sense.GE, 1.0)
    model.add_constraint(x - b, Sense.EQ, 0.0)
    model.add_constraint(x, Sense.LE, 3.0)
    model.set_objective(x + 2 * b + 7)
    form = model.to_arrays()
    assert form.A_ub.shape == (2, 2)
    assert form.A_eq.shape == (1, 2)
    assert form.b_ub.tolist() == [-1.0, 3.0]
    assert form.A_ub.toarray()[0].tolist() == [-1.0, -1.0]
    assert form.offset == 7.0
    assert form.integer.tolist() == [False, True]
    assert form.upper.tolist() == [4.0, 1.0]


@pytest.fixture(scope="module")
def min_model():
    """Fixture to build z = min(x1, x2)."""
    model = MilpModel("min")
    x1 = model.add_variable("x1", upper=M)
    x2 = model.add_variable("x2", upper=M)
    z = model.add_variable("z", upper=M)
    b = model.add_binary("b")
    linearize_min(model, z, x1, x2, b, M)
    return model


def test_min_kernel(min_model):
    """Test if some b satisfies the rows exactly when z is the minimum."""
    for x1, x2, z in itertools.product(GRID, repeat=3):
        feasible = any(_feasible(min_model, [x1, x2, z, b]) for b in (0, 1))
        assert feasible == (z == min(x1, x2)), f"x1={x1} x2={x2} z={z}: feasible={feasible}"


def test_product_kernel():
    """Test if the product rows accept exactly p = b x."""
    model = MilpModel("product")
    p = model.add_variable("p", upper=M)
    b = model.add_binary("b")
    x = model.add_variable("x", upper=M)
    linearize_product(model, p, b, x, M)
    for p_value, b_value, x_value in itertools.product(GRID, (0, 1), GRID):
        feasible = _feasible(model, [p_value, b_value, x_value])
        assert feasible == (p_value == b_value * x_value), f"p={p_value} b={b_value} x={x_value}"


def test_product_of_expression():
    """Test if the product accepts an affine binary expression such as 1 - b."""
    model = MilpModel("keep")
    p = model.add_variable("p", upper=M)
    b = model.add_binary("b")
    x = model.add_variable("x", upper=M)
    linearize_product(model, p, 1.0 - b, x, M)
    assert _feasible(model, [30.0, 0, 30.0])
    assert _feasible(model, [0.0, 1, 30.0])
    assert not _feasible(model, [30.0, 1, 30.0])


def test_implication_kernel():
    model = MilpModel("implication")
    x = model.add_variable("x", upper=M)
    b = model.add_binary("b")
    linearize_implication(model, x, b, M)
    for x_value, b_value in itertools.product(GRID, (0, 1)):
        assert _feasible(model, [x_value, b_value]) == (x_value == 0 or b_value == 1)


def test_big_m_must_be_positive():
    model = MilpModel()
    x = model.add_variable("x")
    b = model.add_binary("b")
    with pytest.raises(ParameterError):
        linearize_implication(model, x, b, 0.0)


@pytest.fixture(scope="module")
def assignment():
    """Fixture to build an assignment between two active inputs and outputs."""
    model = MilpModel("assignment")
    beta = linearize_assignment(
        model, "a", [100.0, 200.0, 0.0], [250.0, 150.0, 0.0], [1, 1, 0], [1, 1, 0], 300.0
    )
    return model, beta


def _matrix_values(model, beta, chosen):
    values = np.zeros(model.n_variables)
    for n, m in chosen:
        values[beta[n][m].index] = 1.0
    return values


def test_assignment_accepts_nondecreasing_pairing(assignment):
    """Test if pairing each input with an output holding at least as much is feasible."""
    model, beta = assignment
    assert model.max_violation(_matrix_values(model, beta, [(0, 1), (1, 0)])) <= 1e-9


def test_assignment_rejects_decreasing_pairing(assignment):
    """Test if an input paired with a smaller output is rejected."""
    model, beta = assignment
    assert model.violated(_matrix_values(model, beta, [(0, 0), (1, 1)])) == ["a_order_1_1"]


def test_assignment_rejects_missing_rows(assignment):
    model, beta = assignment
    violated = model.violated(_matrix_values(model, beta, [(0, 1)]))
    assert "a_row_1" in violated and "a_col_0" in violated


def test_assignment_restricted_pairs():
    """Test if only the allowed pairs get variables."""
    model = MilpModel()
    beta = linearize_assignment(model, "a", [0.0, 0.0], [0.0, 0.0], [1, 0], [0, 1], 300.0, pairs=[(0, 1)])
    assert beta[0][0] is None and beta[1][1] is None and beta[0][1] is not None
    assert model.n_binaries == 1


def test_assignment_lengths():
    with pytest.raises(ParameterError):
        linearize_assignment(MilpModel(), "a", [0.0], [0.0, 0.0], [1], [1], 300.0)

import numpy as np
import pytest

from entroof import (
    DensityOperator,
    InvariantViolation,
    PureState,
    audit_monotonicity,
    measure_value,
    run_tree,
    validate_tree,
)
from entroof.locc import (
    LoccNode,
    final_nodes_from_paths,
    iter_nodes,
    path_precedes,
    successors_from_paths,
    tree_paths,
)
from entroof.measures import MeasureSpec
from entroof.sampling import (
    random_density,
    random_instrument,
    random_pure_state,
    random_separable_density,
    random_unitary,
)

from util import DIMS22, bell, leaf, one_round_tree, two_round_tree

RNG = np.random.default_rng(777)

PROJ0 = np.array([[1, 0], [0, 0]], dtype=complex)
PROJ1 = np.array([[0, 0], [0, 1]], dtype=complex)


def computational_measurement(party="A") -> LoccNode:
    return LoccNode(party, kraus=(PROJ0, PROJ1), children=(leaf(party), leaf(party)))


# --- validation -----------------------------------------------------------------

def test_identity_tree_valid():
    tree = LoccNode("A", kraus=(np.eye(2),), children=(leaf(),))
    assert validate_tree(tree, DIMS22).ok


def test_incomplete_kraus_reported_with_residual():
    tree = LoccNode("A", kraus=(np.eye(2) / 2,), children=(leaf(),))
    report = validate_tree(tree, DIMS22)
    assert not report.ok
    issue = report.issues[0]
    assert issue.code == "kraus-completeness"
    # sum K^H K = I/4, so the max-abs deviation from I is 3/4
    assert abs(issue.residual - 0.75) < 1e-12


def test_random_two_round_tree_valid():
    for _ in range(10):
        tree = two_round_tree(RNG, "A", "B", outcomes=int(RNG.integers(2, 4)))
        assert validate_tree(tree, DIMS22).ok


def test_children_count_mismatch():
    tree = LoccNode("A", kraus=(PROJ0, PROJ1), children=(leaf(),))
    report = validate_tree(tree, DIMS22)
    assert any(i.code == "children-count" for i in report.issues)


def test_kraus_dim_mismatch():
    tree = LoccNode("A", kraus=(np.eye(3),), children=(leaf(),))
    report = validate_tree(tree, DIMS22)
    assert any(i.code == "kraus-dims" for i in report.issues)


def test_leaf_dims_must_agree():
    # one branch enlarges Alice's space, the sibling does not
    iso = random_instrument(2, 1, RNG, dim_out=3)[0]
    grow = LoccNode("A", kraus=(iso,), children=(leaf(),))
    stay = leaf()
    tree = LoccNode("A", kraus=(PROJ0, PROJ1), children=(grow, stay))
    report = validate_tree(tree, DIMS22)
    assert any(i.code == "leaf-dims" for i in report.issues)


def test_run_rejects_invalid_tree():
    tree = LoccNode("A", kraus=(np.eye(2) / 2,), children=(leaf(),))
    with pytest.raises(InvariantViolation):
        run_tree(tree, DensityOperator.from_pure(bell()))


# --- running --------------------------------------------------------------------

def test_identity_tree_output_equals_input():
    rho = random_density(DIMS22, RNG)
    tree = LoccNode("B", kraus=(np.eye(2),), children=(leaf("B"),))
    _, out = run_tree(tree, rho)
    np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-15)


def test_bell_measurement_branches_and_output():
    rho = DensityOperator.from_pure(bell())
    levels, out = run_tree(computational_measurement(), rho)
    probs = [b.probability for b in levels[1]]
    np.testing.assert_allclose(probs, [0.5, 0.5], atol=1e-12)
    expect = np.zeros((4, 4), dtype=complex)
    expect[0, 0] = expect[3, 3] = 0.5
    np.testing.assert_allclose(out.matrix, expect, atol=1e-12)


def test_trace_preservation_and_level_sums():
    for _ in range(20):
        rounds = int(RNG.integers(1, 3))
        if rounds == 1:
            tree = one_round_tree(RNG, "A" if RNG.random() < 0.5 else "B",
                                  outcomes=int(RNG.integers(2, 4)))
        else:
            tree = two_round_tree(RNG, "B", "A", outcomes=int(RNG.integers(2, 4)))
        rho = random_density(DIMS22, RNG)
        levels, out = run_tree(tree, rho)
        assert abs(np.trace(out.matrix).real - 1.0) <= 1e-9
        for level in levels:
            assert abs(sum(b.probability for b in level) - 1.0) <= 1e-9


def test_branch_probabilities_sum_to_parent():
    tree = two_round_tree(RNG, "A", "B", outcomes=3)
    rho = random_density(DIMS22, RNG)
    levels, _ = run_tree(tree, rho)
    by_path = {b.path: b for level in levels for b in level}
    for path, b in by_path.items():
        kids = [q for q in by_path.values() if q.path[:-1] == path and len(q.path) == len(path) + 1]
        if kids:
            assert abs(sum(k.probability for k in kids) - b.probability) < 1e-10


def test_dimension_changing_kraus():
    # Alice compresses her qubit into a qutrit embedding and back
    iso = random_instrument(2, 1, RNG, dim_out=3)[0]
    back = random_instrument(3, 2, RNG, dim_out=2)
    inner = LoccNode("A", kraus=tuple(back), children=(leaf(), leaf()))
    tree = LoccNode("A", kraus=(iso,), children=(inner,))
    assert validate_tree(tree, DIMS22).ok
    rho = random_density(DIMS22, RNG)
    _, out = run_tree(tree, rho)
    assert out.dims.as_tuple() == (2, 2)
    assert abs(np.trace(out.matrix).real - 1.0) <= 1e-9


# --- tree order helpers ------------------------------------------------------------

def test_path_order_matches_structure():
    tree = two_round_tree(RNG, "A", "B", outcomes=2)
    paths = tree_paths(tree)
    for path, node in iter_nodes(tree):
        structural = [path + (i,) for i in range(len(node.children))]
        assert successors_from_paths(paths, path) == structural
    structural_leaves = sorted(p for p, n in iter_nodes(tree) if n.is_leaf)
    assert final_nodes_from_paths(paths) == structural_leaves
    assert path_precedes((), (0,))
    assert path_precedes((0,), (0, 1))
    assert not path_precedes((0,), (1, 1))
    assert not path_precedes((0, 1), (0,))


# --- monotonicity audit -------------------------------------------------------------

def test_audit_bell_computational_measurement():
    rho = DensityOperator.from_pure(bell())
    audit = audit_monotonicity(
        computational_measurement(), rho, MeasureSpec("entanglement-number"),
        roof_opts={"restarts": 8, "seed": 1})
    root = audit.inequalities[0]
    assert abs(root.parent_value - 0.7071067811865475) < 1e-9
    assert abs(root.children_average) < 1e-9
    assert abs(root.slack - 0.7071067811865475) < 1e-9
    assert not root.flagged
    assert audit.end_to_end.slack > 0.7


def test_audit_pure_input_uses_exact_path():
    psi = random_pure_state(DIMS22, RNG)
    rho = DensityOperator.from_pure(psi)
    tree = two_round_tree(RNG, "A", "B")
    audit = audit_monotonicity(tree, rho, MeasureSpec("concurrence", k=2))
    assert all(n.method == "pure" for n in audit.nodes)
    assert all(q.slack >= -1e-9 for q in audit.inequalities)
    assert not any(q.flagged for q in audit.inequalities)


def test_audit_separable_input_all_zero():
    rho = random_separable_density(DIMS22, RNG)
    tree = one_round_tree(RNG, "A")
    audit = audit_monotonicity(
        tree, rho, MeasureSpec("entanglement-number"),
        roof_opts={"restarts": 8, "seed": 3})
    for node in audit.nodes:
        assert node.value <= 1e-5
    assert not any(q.flagged for q in audit.inequalities)
    assert not audit.end_to_end.flagged


def test_audit_prunes_zero_probability_branches():
    zero = PureState(np.array([1, 0, 0, 0], dtype=complex), DIMS22)
    rho = DensityOperator.from_pure(zero)
    audit = audit_monotonicity(
        computational_measurement(), rho, MeasureSpec("entanglement-number"))
    assert (1,) in audit.pruned
    assert all(n.path != (1,) for n in audit.nodes)


def test_local_unitary_tree_preserves_measures():
    psi = random_pure_state(DIMS22, RNG)
    rho = DensityOperator.from_pure(psi)
    u = random_unitary(2, RNG)
    v = random_unitary(2, RNG)
    tree = LoccNode("A", kraus=(u,), children=(
        LoccNode("B", kraus=(v,), children=(leaf("B"),)),))
    _, out = run_tree(tree, rho)
    rotated = PureState(np.kron(u, v) @ psi.amplitudes, DIMS22)
    np.testing.assert_allclose(out.matrix, rotated.projector(), atol=1e-12)
    for spec in (MeasureSpec("entanglement-number"), MeasureSpec("entropy"),
                 MeasureSpec("p-number", p=2.5), MeasureSpec("concurrence", k=2)):
        assert abs(measure_value(spec, psi) - measure_value(spec, rotated)) < 1e-9

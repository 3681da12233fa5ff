import itertools
import random

import pytest

from plexplain.explain import Explanation, PreconditionError, brute_force_explain, check_precondition, decide_bounded, explain_min
from plexplain.formula import (
    And,
    Atom,
    CnfFormula,
    Neg,
    Or,
    ParseError,
    atom_occurrences,
    atoms,
    parse_formula,
)
from plexplain.reductions import (
    Graph,
    Qbf2Instance,
    conp_gadget,
    domination_number,
    domset_cnf,
    domset_to_explainability,
    parse_edge_list,
    parse_qbf,
    qbf2_eval,
    random_qbf2,
    render_edge_list,
    sigma2_to_explainability,
    verify_reduction,
)
from plexplain.sat import solve

P1, P2, Q1 = Atom(1), Atom(2), Atom(3)


# -------------------------------------------------------------------- QBF

def test_qbf_eval_examples():
    assert qbf2_eval(Qbf2Instance([1], [2], Or(Atom(1), Atom(2))))
    assert not qbf2_eval(Qbf2Instance([1], [2], And(Atom(1), Atom(2))))
    assert qbf2_eval(Qbf2Instance([], [1], Or(Atom(1), Neg(Atom(1)))))


def test_qbf_validation():
    with pytest.raises(ValueError):
        Qbf2Instance([1], [1], Atom(1))
    with pytest.raises(ValueError):
        Qbf2Instance([1], [2], Atom(3))


def test_parse_qbf():
    q = parse_qbf("c demo\ne 1 2 0\na 3 0\n(p1 | p3) & (p2 | ~p3)\n")
    assert q.exist_vars == (1, 2) and q.univ_vars == (3,)
    assert q.matrix == And(Or(P1, Q1), Or(P2, Neg(Q1)))
    assert qbf2_eval(q)
    with pytest.raises(ParseError):
        parse_qbf("e 1 0\np1 &")
    with pytest.raises(ParseError):
        parse_qbf("e 1\np1")


# ------------------------------------------------------------- sigma2

def test_sigma2_shape_n2_m1():
    q = Qbf2Instance([1, 2], [3], Or(And(P1, P2), Q1))
    red = sigma2_to_explainability(q)
    assert red.k == 3
    assert atoms(red.instance.psi) == {1, 2, 3, 4, 5}
    assert red.complements == (4, 5)
    assert red.instance.assignment.literals == frozenset({1, 2, 3, 4, 5})
    assert red.instance.target is True
    assert check_precondition(red.instance)


def test_sigma2_structure_audit():
    rng = random.Random(0)
    for _ in range(50):
        n, m = rng.randint(1, 3), rng.randint(0, 3)
        q = random_qbf2(rng, n, m)
        red = sigma2_to_explainability(q)
        # 2n in the left conjunction, 2n in the disjunct pairs, plus theta
        assert atom_occurrences(red.instance.psi) == 4 * n + atom_occurrences(q.matrix)


def test_sigma2_examples():
    red = sigma2_to_explainability(Qbf2Instance([1], [2], Or(P1, Atom(2))))
    assert explain_min(red.instance).cardinality == 1
    assert explain_min(red.instance).chi == (1,)
    red = sigma2_to_explainability(Qbf2Instance([1], [2], And(P1, Atom(2))))
    assert red.k == 1 and not decide_bounded(red.instance, 1)


def test_sigma2_no_smaller_witness():
    # true QBF needing both existentials: every witness has cardinality n
    q = Qbf2Instance([1, 2], [3], And(Or(P1, Q1), Or(P2, Neg(Q1))))
    red = sigma2_to_explainability(q)
    assert decide_bounded(red.instance, 3)
    assert not decide_bounded(red.instance, 2)
    assert brute_force_explain(red.instance).size == 3


def test_sigma2_rejects_empty_prefix():
    with pytest.raises(ValueError):
        sigma2_to_explainability(Qbf2Instance([], [1], Atom(1)))


def test_sigma2_verify_exhaustive_small():
    rng = random.Random(1)
    qs = [random_qbf2(rng, rng.randint(1, 2), rng.randint(0, 2), max_size=6) for _ in range(80)]
    report = verify_reduction("sigma2", qs)
    assert report.all_agree and report.checked == 80, report.summary()


# ------------------------------------------------------------------ graphs

def test_graph_basics():
    g = Graph.from_edges([(2, 1), (2, 3)], vertices=[4])
    assert g.edges == frozenset({(1, 2), (2, 3)})
    assert g.neighbors(2) == [1, 3]
    assert not g.is_connected()
    assert g.is_dominating([2, 4]) and not g.is_dominating([2])
    with pytest.raises(ValueError):
        Graph.from_edges([(1, 1)])


def test_edge_list_io():
    g = parse_edge_list("# triangle plus loner\n1 2\n2 3\n1 3\n7\n")
    assert g.vertices == (1, 2, 3, 7)
    assert parse_edge_list(render_edge_list(g)) == g
    with pytest.raises(ParseError) as info:
        parse_edge_list("1 2\n1 x\n")
    assert info.value.line == 2


def test_domset_cnf_examples():
    cnf, var = domset_cnf(Graph.from_edges([(1, 2), (2, 3), (1, 3)]))
    assert [sorted(c) for c in cnf.clauses] == [[1, 2, 3]] * 3
    cnf, var = domset_cnf(Graph((5,)))
    assert cnf.clauses == ((1,),) and var == {5: 1}
    cnf, _ = domset_cnf(Graph.from_edges([(1, 2), (2, 3)]))
    assert [set(c) for c in cnf.clauses] == [{1, 2}, {1, 2, 3}, {2, 3}]


@pytest.mark.parametrize("edges,k,expected", [
    ([(1, 2), (2, 3), (1, 3)], 1, True),
    ([(1, 2), (2, 3)], 1, True),
    ([(1, 2), (3, 4)], 1, False),
    ([(1, 2), (3, 4)], 2, True),
])
def test_domset_decisions(edges, k, expected):
    red = domset_to_explainability(Graph.from_edges(edges), k)
    assert red.k == 2 * k - 1
    assert check_precondition(red.instance)
    assert decide_bounded(red.instance, red.k) is expected


def test_path_explained_by_middle_vertex():
    red = domset_to_explainability(Graph.from_edges([(1, 2), (2, 3)]), 1)
    assert explain_min(red.instance).chi == (red.atom_map[2],)


def random_graph(rng, n, p):
    edges = [(u, v) for u, v in itertools.combinations(range(1, n + 1), 2) if rng.random() < p]
    return Graph.from_edges(edges, vertices=range(1, n + 1))


def test_domination_number_small():
    assert domination_number(Graph.from_edges([(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)])) == 2
    assert domination_number(Graph((1, 2, 3))) == 3


def test_domset_verify_graphs_up_to_6():
    rng = random.Random(2)
    graphs = [random_graph(rng, rng.randint(1, 6), rng.random()) for _ in range(60)]
    report = verify_reduction("domset", graphs)
    assert report.all_agree, report.disagreements
    pairs = [(g, k) for g in graphs[:20] for k in range(1, len(g.vertices) + 1)]
    assert verify_reduction("domset", pairs).all_agree


def test_verify_budget_partial():
    rng = random.Random(3)
    graphs = [random_graph(rng, 5, 0.5) for _ in range(5)]
    report = verify_reduction("domset", graphs, budget=-1)
    assert not report.complete and report.checked == 0
    assert "partial" in report.summary()


# -------------------------------------------------------------- coNP gadget

def test_conp_unsat_has_size_one():
    g = conp_gadget(CnfFormula(1, [[1], [-1]]))
    assert g.q == 2
    assert g.instance.target is False
    assert g.instance.assignment.literals == frozenset({1, -2})
    assert check_precondition(g.instance)
    assert decide_bounded(g.instance, 1)
    # the single atom q is an explanation ...
    assert solve(g.instance.psi, [-2]).unsat
    assert Explanation.from_literals([-2], "negative").rendered == Atom(2)
    # ... but psi & ~q is itself unsat, so the empty one (falsum, size 0) wins
    e = explain_min(g.instance)
    assert e.chi == () and e.size == 0


def test_conp_tautology_rejected():
    with pytest.raises(PreconditionError):
        conp_gadget(CnfFormula(1, [[1, -1]]))


def test_conp_satisfiable_no_size_one():
    g = conp_gadget(CnfFormula(1, [[-1]]))
    assert not decide_bounded(g.instance, 1)
    assert brute_force_explain(g.instance).size > 1


def test_conp_verify_random():
    rng = random.Random(4)
    inputs = []
    while len(inputs) < 40:
        n = rng.randint(1, 4)
        cnf = CnfFormula(n, [[rng.choice((1, -1)) * rng.randint(1, n) for _ in range(rng.randint(1, 2))]
                             for _ in range(rng.randint(1, 6))])
        if not cnf.satisfied_by({v: True for v in range(1, n + 1)}):
            inputs.append(cnf)
    report = verify_reduction("conp", inputs)
    assert report.all_agree, report.disagreements


def test_gadget_formula_evaluates_false():
    psi = CnfFormula(2, [[1, -2], [-1]])
    g = conp_gadget(psi)
    assert not g.instance.psi.satisfied_by(g.instance.assignment.as_dict())
    assert check_precondition(g.instance)


def test_verify_unknown_kind():
    with pytest.raises(ValueError):
        verify_reduction("bogus", [parse_formula("p")])

import pytest

from stratcheck.bench import generate_benchmark
from stratcheck.model import build_global_model
from stratcheck.por import ReductionParams, build_reduced_model
from stratcheck.spec_lang import parse_spec, pretty_formula, validate
from stratcheck.verify import verify_bruteforce


def build(n):
    return build_global_model(validate(parse_spec(generate_benchmark("tgc", n))))


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        generate_benchmark("tgc", 0)
    with pytest.raises(ValueError):
        generate_benchmark("tgc", -3)
    with pytest.raises(ValueError):
        generate_benchmark("castles", 2)
    with pytest.raises(ValueError):
        generate_benchmark("tgc", 2.5)


def test_single_train_instance():
    m = build(1)
    got = [(m.locals_names(i), tuple(m.true_props(i))) for i in range(m.n_states())]
    assert got == [
        (("G", "W"), ()),
        (("R", "T"), ("busy_1",)),
        (("G", "A"), ()),
    ]
    assert m.edges == [(0, "enter_1", 1), (1, "exit_1", 2), (2, "back_1", 0)]


def test_two_trains_reproduce_the_tunnel_fixture(tgc_model):
    m = build(2)
    renaming = {"enter_1": "a1", "enter_2": "b1", "exit_1": "a2",
                "exit_2": "b2", "back_1": "a3", "back_2": "b3"}
    assert [m.locals_names(i) for i in range(m.n_states())] == \
        [tgc_model.locals_names(i) for i in range(tgc_model.n_states())]
    assert [(s, renaming[a], d) for s, a, d in m.edges] == tgc_model.edges


@pytest.mark.parametrize("n,states,edges", [
    (1, 3, 3),
    (2, 8, 14),
    (3, 20, 48),
    (4, 48, 144),
    (5, 112, 400),
])
def test_instance_sizes(n, states, edges):
    m = build(n)
    assert (m.n_states(), m.n_edges()) == (states, edges)


def test_formula_shape():
    amas1 = validate(parse_spec(generate_benchmark("tgc", 1)))
    assert pretty_formula(amas1.formula) == "<<Controller>> G !busy_1"
    amas3 = validate(parse_spec(generate_benchmark("tgc", 3)))
    assert pretty_formula(amas3.formula) == \
        "<<Controller>> G !(busy_1 & busy_2 | busy_1 & busy_3 | busy_2 & busy_3)"


def test_three_train_reduction_sizes():
    amas = validate(parse_spec(generate_benchmark("tgc", 3)))
    vis = ("busy_1", "busy_2", "busy_3")
    aggressive = build_reduced_model(
        amas, ReductionParams(coalition=("Controller",), visible=vis,
                              c3="aggressive"))
    assert (aggressive.model.n_states(), aggressive.model.n_edges()) == (7, 9)
    safe = build_reduced_model(
        amas, ReductionParams(coalition=("Controller",), visible=vis, c3="safe"))
    assert (safe.model.n_states(), safe.model.n_edges()) == (20, 41)


def test_mutual_exclusion_is_winnable_with_two_trains():
    m = build(2)
    res = verify_bruteforce(m)
    assert res.result is True
    assert res.strategy == {"Controller": {"G": "enter_1", "R": "exit_1"}}


def test_single_train_emptiness_is_not_winnable():
    # the controller's only choice at G is to admit the train
    m = build(1)
    res = verify_bruteforce(m)
    assert res.result is False

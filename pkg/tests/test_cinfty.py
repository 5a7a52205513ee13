"""Algebra ingestion, axiom validators, and the documented mutation battery."""

import json

import pytest

from outerops.cinfty import (
    AlgebraError, block_sign, builtin_algebras, builtin_documents, check_ainfty,
    check_cyclic, check_shuffle_vanishing, contractible_algebra, delta_sign,
    dump_algebra, free_differential, load_algebra,
)


class TestLoad:
    def test_q_loads(self):
        doc = builtin_documents()["Q"]
        alg = load_algebra(json.dumps(doc))
        assert alg.dim == 1
        assert alg.m(2, (0, 0)) == {0: 1}

    def test_wrong_degree_rejected(self):
        doc = builtin_documents()["H*(S^2)"]
        doc["operations"]["2"].append([[1, 1], 0, "1"])  # |x|+|x| != |1|+0
        with pytest.raises(AlgebraError):
            load_algebra(json.dumps(doc))

    def test_singular_pairing_rejected(self):
        doc = builtin_documents()["Q[x]/(x^2)"]
        doc["pairing"] = [[0, 0, "1"]]
        with pytest.raises(AlgebraError):
            load_algebra(json.dumps(doc))

    def test_cohomological_convention_negates(self):
        doc = builtin_documents()["H*(S^2)"]
        doc["convention"] = "cohomological"
        doc["basis"] = [["1", 0], ["x", -2]]
        alg = load_algebra(json.dumps(doc))
        assert alg.degrees == [0, 2]

    def test_roundtrip(self):
        for name, alg in builtin_algebras().items():
            again = load_algebra(dump_algebra(alg))
            assert dump_algebra(again) == dump_algebra(alg)

    def test_parse_error(self):
        with pytest.raises(AlgebraError):
            load_algebra("{not json")


class TestSigns:
    def test_pinned_m2_sign(self):
        # d(1 (x) 1) = + m_2(1,1) on degree-0 letters
        assert block_sign((), (0, 0)) == 1

    def test_delta_leading_sign(self):
        assert delta_sign(()) == 1
        assert delta_sign((0,)) == -1  # past one degree-0 suspended letter

    def test_free_differential_square_zero(self):
        algs = list(builtin_algebras().values()) + [contractible_algebra()]
        for alg in algs:
            from itertools import product
            for n in (1, 2, 3, 4):
                for word in product(range(alg.dim), repeat=n):
                    acc = {}
                    for mid, c in free_differential(alg, word).items():
                        for dst, c2 in free_differential(alg, mid, c).items():
                            acc[dst] = acc.get(dst, 0) + c2
                    assert all(v == 0 for v in acc.values()), (alg.name, word)


class TestValidators:
    def test_builtins_pass_to_arity_4(self):
        for name, alg in builtin_algebras().items():
            assert check_ainfty(alg, 4).ok, name
            assert check_shuffle_vanishing(alg, 4).ok, name
            assert check_cyclic(alg, 4).ok, name

    def test_contractible_passes(self):
        cone = contractible_algebra()
        assert check_ainfty(cone, 4).ok
        assert check_shuffle_vanishing(cone, 4).ok

    def test_pure_m3_cycle_condition(self):
        # only m_3 nonzero, delta = 0: the arity-3 relation is vacuous
        doc = {
            "name": "m3 only", "convention": "homological", "max_arity": 4,
            "basis": [["u", 0], ["v", 1]],
            "differential": [],
            "operations": {"3": [[[0, 0, 0], 1, "1"]]},
            "pairing": [],
        }
        alg = load_algebra(json.dumps(doc))
        report = check_ainfty(alg, 3)
        assert report.ok


def _mutate(name, section, edit):
    doc = builtin_documents()[name]
    edit(doc)
    return load_algebra(json.dumps(doc))


# ten documented single-constant mutations, each tripping one validator
MUTATIONS = [
    ("x*x=1 in Q[x]/(x^3)", "ainfty",
     "Q[x]/(x^3)", lambda d: d["operations"]["2"].__setitem__(
         [tuple(e[0]) for e in d["operations"]["2"]].index((1, 1)), [[1, 1], 0, "1"])),
    ("x*x^2=x in Q[x]/(x^3)", "ainfty",
     "Q[x]/(x^3)", lambda d: d["operations"]["2"].append([[1, 2], 1, "1"])),
    ("x^2*x=-x^2 in Q[x]/(x^3)", "ainfty",
     "Q[x]/(x^3)", lambda d: d["operations"]["2"].append([[2, 1], 2, "-1"])),
    ("x^2*x^2=1 in Q[x]/(x^3)", "ainfty",
     "Q[x]/(x^3)", lambda d: d["operations"]["2"].append([[2, 2], 0, "1"])),
    ("x*1 doubled in Q[x]/(x^2)", "shuffle",
     "Q[x]/(x^2)", lambda d: d["operations"]["2"].append([[1, 0], 1, "1"])),
    ("1*x dropped in H*(S^2)", "shuffle",
     "H*(S^2)", lambda d: d["operations"]["2"].__setitem__(
         [tuple(e[0]) for e in d["operations"]["2"]].index((0, 1)), [[0, 1], 1, "0"])),
    ("a*1=-a in H*(S^1)", "shuffle",
     "H*(S^1)", lambda d: d["operations"]["2"].__setitem__(
         [tuple(e[0]) for e in d["operations"]["2"]].index((1, 0)), [[1, 0], 1, "-1"])),
    ("identity pairing on Q[x]/(x^3)", "cyclic",
     "Q[x]/(x^3)", lambda d: d.__setitem__(
         "pairing", [[0, 0, "1"], [1, 1, "1"], [2, 2, "1"]])),
    ("extra <x,x>=1 in Q[x]/(x^2)", "cyclic",
     "Q[x]/(x^2)", lambda d: d["pairing"].append([1, 1, "1"])),
    ("swapped pairing rows in H*(S^2)", "cyclic",
     "H*(S^2)", lambda d: d.__setitem__(
         "pairing", [[0, 0, "1"], [1, 1, "1"]])),
]


class TestMutations:
    @pytest.mark.parametrize("label,kind,name,edit", MUTATIONS,
                             ids=[m[0] for m in MUTATIONS])
    def test_mutation_detected_with_witness(self, label, kind, name, edit):
        try:
            alg = _mutate(name, kind, edit)
        except AlgebraError:
            pytest.fail(f"mutation {label} must load (axioms checked later)")
        reports = {
            "ainfty": check_ainfty(alg, 4),
            "shuffle": check_shuffle_vanishing(alg, 4),
            "cyclic": check_cyclic(alg, 4),
        }
        report = reports[kind]
        assert not report.ok, label
        for failing in report.failures():
            assert failing.witness, label

    def test_spec_example_mutation_is_still_associative(self):
        # x*x = 1 in Q[x]/(x^2) yields Q[x]/(x^2-1): all validators pass
        doc = builtin_documents()["Q[x]/(x^2)"]
        doc["operations"]["2"].append([[1, 1], 0, "1"])
        alg = load_algebra(json.dumps(doc))
        assert check_ainfty(alg, 4).ok


class TestGradedPairing:
    def test_graded_symmetry_enforced(self):
        doc = builtin_documents()["H*(S^1)"]
        doc["pairing"] = [[0, 1, "1"], [1, 0, "-1"]]  # wrong symmetry for |a||1|=0
        with pytest.raises(AlgebraError):
            load_algebra(json.dumps(doc))

    def test_cyclic_of_exterior_algebra(self):
        alg = builtin_algebras()["H*(S^1)"]
        assert check_cyclic(alg, 4).ok

import pytest

from meshlite import check_program, parse
from meshlite.errors import CheckError
from meshlite.fixtures import CORPUS, corpus_source


def diagnostics_of(src, name="<source>"):
    with pytest.raises(CheckError) as err:
        check_program(parse(src), source_name=name)
    return err.value.diagnostics


def rules_of(src):
    return [d.rule for d in diagnostics_of(src)]


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_type_checks(name):
    checked = check_program(parse(corpus_source(name)))
    assert checked.program is not None


def test_const_assignment_rejected():
    rules = rules_of("var x : Int :: const;\nx := 3;")
    assert "ConstViolation" in rules


def test_int_char_combination_rejected():
    rules = rules_of("var x : Int :: Char;")
    assert "InvalidCombination" in rules


def test_undeclared_variable_use():
    rules = rules_of("x := y;")
    assert rules.count("UnknownVariable") == 2


def test_undeclared_sync_target():
    rules = rules_of("sync q;")
    assert "UnknownVariable" in rules


def test_argument_chain_must_match_exactly():
    src = """
var n := 4;
var A : array[complex,n,n] :: allocated[col[] :: horizontal[2] :: single[evendist[]]];
function f(X : array[complex,n,n] :: allocated[row[] :: horizontal[2] :: single[evendist[]]]) {
    X := X;
};
f(A);
"""
    rules = rules_of(src)
    assert "ArgumentChainMismatch" in rules


def test_argument_chain_match_accepts_equal_chains():
    src = """
var n := 4;
var A : array[complex,n,n] :: allocated[row[] :: horizontal[2] :: single[evendist[]]];
function f(X : array[complex,n,n] :: allocated[row[] :: horizontal[2] :: single[evendist[]]]) {
    X := X;
};
f(A);
"""
    check_program(parse(src))


def test_argument_chain_constant_folding():
    """2*2 and 4 fold to the same chain."""
    src = """
var A : array[complex,4,4] :: allocated[row[] :: single[0]];
function f(X : array[complex,2 * 2,4] :: allocated[row[] :: single[0]]) {
    X := X;
};
f(A);
"""
    check_program(parse(src))


def test_call_arity_and_literal_arguments():
    src = """
var A : array[complex,4,4] :: allocated[row[] :: single[0]];
function f(X : array[complex,4,4] :: allocated[row[] :: single[0]]) {
    X := X;
};
f(A, A);
"""
    assert "CallArity" in rules_of(src)
    src2 = """
function f(X : Int) { };
f(3);
"""
    assert "ArgumentChainMismatch" in rules_of(src2)


def test_share_target_must_exist_and_be_array():
    rules = rules_of(
        "var C : array[complex,4,4] :: allocated[row[] :: vertical[2] :: single[evendist[]]] :: share[B];")
    assert "ShareTarget" in rules
    rules = rules_of(
        "var b : Int;\n"
        "var C : array[complex,4,4] :: allocated[row[] :: vertical[2] :: single[evendist[]]] :: share[b];")
    assert "ShareTarget" in rules


def test_arraydist_target_must_be_integer_array():
    rules = rules_of(
        "var A : array[complex,4,4] :: allocated[horizontal[2] :: single[arraydist[d]]];")
    assert "ArrayDistTarget" in rules
    rules = rules_of(
        "var d : array[complex,2];\n"
        "var A : array[complex,4,4] :: allocated[horizontal[2] :: single[arraydist[d]]];")
    assert "ArrayDistTarget" in rules


def test_incomplete_plan_reported():
    rules = rules_of("var A : array[complex,4,4] :: allocated[horizontal[2]];")
    assert "IncompletePlan" in rules


def test_array_assignment_needs_array_source():
    src = """
var A : array[complex,4,4] :: allocated[row[] :: single[0]];
A := 5;
"""
    assert "ArrayAssignment" in rules_of(src)


def test_collective_assignment_inside_proc_rejected():
    src = """
var A : array[complex,4,4] :: allocated[row[] :: single[0]];
var S : array[complex,4,4] :: allocated[row[] :: single[0]];
proc 0 { A := S };
"""
    assert "GuardedCollective" in rules_of(src)


def test_distributed_declaration_inside_proc_rejected():
    src = "proc 0 { var A : array[complex,4,4] :: allocated[row[] :: single[0]]; };"
    assert "GuardedAllocation" in rules_of(src)


def test_accessor_needs_distributed_array():
    src = "var x := 1;\nvar y := x.localblocks;"
    assert "AccessorMisuse" in rules_of(src)


def test_unknown_function():
    assert "UnknownFunction" in rules_of("frobnicate(1);")


def test_builtin_arity():
    assert "BuiltinArity" in rules_of("var x := processes(3);")


def test_user_function_has_no_value():
    src = """
function f(X : Int) { };
var q : Int;
var y := f(q);
"""
    assert "NoValue" in rules_of(src)


def test_redeclaration_in_same_scope():
    assert "Redeclaration" in rules_of("var x;\nvar x;")


def test_diagnostic_rendering_format():
    diags = diagnostics_of("x := y;", name="prog.mesh")
    line = str(diags[0])
    assert line.startswith("prog.mesh:1:")
    parts = line.split(": ", 2)
    assert len(parts) == 3
    assert parts[1] == "UnknownVariable"


def test_initializer_on_distributed_rejected():
    src = "var A : array[complex,4,4] :: allocated[row[] :: single[0]] := 3;"
    assert "InitializerUnsupported" in rules_of(src)

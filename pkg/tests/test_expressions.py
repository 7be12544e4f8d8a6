"""
Тесты символьных выражений
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.symbolic.expressions import (
    ARITHMETIC_OPS, FALSE, TRUE, ExprOp, binary, branch_expr, compare, constant, evaluate, evaluate_on,
    holds_on, input_byte, negate, to_prefix, vars_of,
)
from src.vm.isa import Opcode, alu, branch_condition

b0, b1 = input_byte(0), input_byte(1)


def test_constants_fold():
    folded = binary(ExprOp.SUB, constant(1), constant(2))
    assert folded == constant(0xFFFFFFFF)
    assert not folded.is_symbolic


def test_prefix_form():
    expr = compare(ExprOp.EQ, binary(ExprOp.SUB, b1, input_byte(3)), constant(1))
    assert to_prefix(expr) == "eq(sub(b1,b3),0x1)"
    assert str(negate(expr)) == "ne(sub(b1,b3),0x1)"
    assert vars_of(expr) == frozenset({1, 3})


def test_negation():
    expr = compare(ExprOp.SLT, b0, constant(5))
    assert negate(expr).op is ExprOp.SGE
    assert negate(negate(expr)) == expr
    assert negate(TRUE) == FALSE
    with pytest.raises(ValueError):
        negate(b0)


def test_branch_expr_is_oriented():
    assert branch_expr(Opcode.JGE, b0, constant(0x30), False).op is ExprOp.ULT
    assert branch_expr(Opcode.JNE, b0, constant(0x33), True).op is ExprOp.NE


def test_type_errors():
    condition = compare(ExprOp.EQ, b0, constant(1))
    with pytest.raises(ValueError):
        binary(ExprOp.ADD, condition, b0)
    with pytest.raises(ValueError):
        compare(ExprOp.ADD, b0, b1)


def test_evaluate_broadcasts_without_warnings():
    expr = binary(ExprOp.MUL, b0, constant(0x01010101))
    values = np.arange(256, dtype=np.uint32)
    with np.errstate(all="raise"):
        result = evaluate(expr, {0: values})
    assert result.dtype == np.uint32
    assert int(result[0xFF]) == 0xFFFFFFFF

    grid = evaluate(compare(ExprOp.ULT, b0, b1), {0: values.reshape(256, 1), 1: values.reshape(1, 256)})
    assert grid.shape == (256, 256)
    assert int(grid.sum()) == 256 * 255 // 2


def test_missing_variable():
    with pytest.raises(KeyError):
        evaluate(b1, {0: 1})


def test_holds_on_with_model():
    exprs = [compare(ExprOp.EQ, b0, constant(0x35)), compare(ExprOp.NE, b1, constant(0))]
    assert not holds_on(exprs, b"\x33\x01")
    assert holds_on(exprs, b"\x33\x01", {0: 0x35})


_ARITH = st.sampled_from(sorted(
    (Opcode.ADD, Opcode.SUB, Opcode.MUL, Opcode.AND, Opcode.OR, Opcode.XOR, Opcode.SHL, Opcode.SHR),
    key=lambda op: op.value,
))
_JUMPS = st.sampled_from(sorted(
    (Opcode.JEQ, Opcode.JNE, Opcode.JLT, Opcode.JLE, Opcode.JGT, Opcode.JGE,
     Opcode.JLTS, Opcode.JLES, Opcode.JGTS, Opcode.JGES),
    key=lambda op: op.value,
))
_WORDS = st.integers(min_value=0, max_value=0xFFFFFFFF)
_BYTES = st.integers(min_value=0, max_value=0xFF)


@given(op=_ARITH, jump=_JUMPS, x=_BYTES, y=_BYTES, k=_WORDS, taken=st.booleans())
def test_evaluation_matches_machine_semantics(op, jump, x, y, k, taken):
    word = binary(ARITHMETIC_OPS[op], binary(ExprOp.ADD, b0, constant(k)), b1)
    machine_word = alu(op, alu(Opcode.ADD, x, k), y)
    assert evaluate_on(word, bytes([x, y])) == machine_word

    condition = branch_expr(jump, word, b1, taken)
    expected = branch_condition(jump, machine_word, y) == taken
    assert evaluate_on(condition, bytes([x, y])) is expected


def test_structurally_equal_nodes_are_shared():
    left = compare(ExprOp.EQ, binary(ExprOp.XOR, b0, constant(0x36)), constant(0))
    right = compare(ExprOp.EQ, binary(ExprOp.XOR, input_byte(0), constant(0x36)), constant(0))
    assert left is right
    assert negate(negate(left)) is left
    assert len({left, right, negate(left)}) == 2


def test_deep_chain_is_walked_without_recursion():
    # Цепочка глубже стандартного предела рекурсии интерпретатора
    depth = 5000
    expr = constant(0)
    for _ in range(depth):
        expr = binary(ExprOp.ADD, expr, b0)
    condition = compare(ExprOp.EQ, expr, constant(depth * 3))

    assert evaluate_on(expr, b"\x03") == depth * 3
    assert holds_on([condition], b"\x03")
    assert not holds_on([negate(condition)], b"\x03")
    prefix = to_prefix(condition)
    assert prefix.startswith("eq(add(add(")
    assert prefix.count("b0") == depth
    assert condition == compare(ExprOp.EQ, expr, constant(depth * 3))

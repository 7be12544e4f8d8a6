"""
Экспорт запросов в SMT-LIB 2 (логика QF_BV)
"""

from typing import List, Sequence

from ..strategies.predicate_builder import InversionQuery
from ..symbolic.expressions import ExprOp, SymExpr, fold

_BV_OPS = {
    ExprOp.ADD: "bvadd", ExprOp.SUB: "bvsub", ExprOp.MUL: "bvmul",
    ExprOp.AND: "bvand", ExprOp.OR: "bvor", ExprOp.XOR: "bvxor",
    ExprOp.SHL: "bvshl", ExprOp.SHR: "bvlshr",
    ExprOp.EQ: "=",
    ExprOp.ULT: "bvult", ExprOp.ULE: "bvule", ExprOp.UGT: "bvugt", ExprOp.UGE: "bvuge",
    ExprOp.SLT: "bvslt", ExprOp.SLE: "bvsle", ExprOp.SGT: "bvsgt", ExprOp.SGE: "bvsge",
}

SHIFT_MASK = "#x0000001f"


def variable_name(index: int) -> str:
    return f"k!{index}"


def _smt_node(node: SymExpr, args: Sequence[str]) -> str:
    op = node.op
    if op is ExprOp.INPUT:
        return f"((_ zero_extend 24) {variable_name(node.value)})"
    if op is ExprOp.CONST:
        return f"#x{node.value:08x}"
    if op is ExprOp.BOOL:
        return "true" if node.value else "false"
    if op is ExprOp.NOT:
        return f"(not {args[0]})"

    left, right = args
    if op is ExprOp.NE:
        return f"(not (= {left} {right}))"
    if op in (ExprOp.SHL, ExprOp.SHR):
        right = f"(bvand {right} {SHIFT_MASK})"
    return f"({_BV_OPS[op]} {left} {right})"


def to_smt(expr: SymExpr) -> str:
    """S-выражение для узла; байты расширяются нулями до 32 бит"""
    return fold(expr, _smt_node)


def export_smt(query: InversionQuery) -> str:
    """
    Текст SMT-LIB 2 для запроса

    Одна 8-битная константа k!<i> на входной байт, одно утверждение на
    конъюнкт, затем check-sat и get-model. Вывод детерминирован.
    """
    lines: List[str] = ["(set-logic QF_BV)"]
    for index in sorted(query.variables):
        lines.append(f"(declare-const {variable_name(index)} (_ BitVec 8))")
    if query.conjuncts:
        lines.extend(f"(assert {to_smt(expr)})" for expr in query.conjuncts)
    else:
        lines.append("(assert true)")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"

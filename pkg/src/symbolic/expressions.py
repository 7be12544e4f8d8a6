"""
Символьные выражения над входными байтами

Листья: входной байт (расширенный нулями до слова) и константа. Узлы:
операции АЛУ над словами и сравнения, дающие булево значение.
"""

import threading
import weakref
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

from ..vm.isa import WORD_BITS, WORD_MASK, Opcode, alu

BOOL_BITS = 1


class ExprOp(Enum):
    """Виды узлов выражения"""
    INPUT = "b"
    CONST = "const"
    BOOL = "bool"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    AND = "and"
    OR = "or"
    XOR = "xor"
    SHL = "shl"
    SHR = "shr"
    EQ = "eq"
    NE = "ne"
    ULT = "ult"
    ULE = "ule"
    UGT = "ugt"
    UGE = "uge"
    SLT = "slt"
    SLE = "sle"
    SGT = "sgt"
    SGE = "sge"
    NOT = "not"


ARITHMETIC_OPS = {
    Opcode.ADD: ExprOp.ADD, Opcode.SUB: ExprOp.SUB, Opcode.MUL: ExprOp.MUL,
    Opcode.AND: ExprOp.AND, Opcode.OR: ExprOp.OR, Opcode.XOR: ExprOp.XOR,
    Opcode.SHL: ExprOp.SHL, Opcode.SHR: ExprOp.SHR,
}

JUMP_COMPARISONS = {
    Opcode.JEQ: ExprOp.EQ, Opcode.JNE: ExprOp.NE,
    Opcode.JLT: ExprOp.ULT, Opcode.JLE: ExprOp.ULE,
    Opcode.JGT: ExprOp.UGT, Opcode.JGE: ExprOp.UGE,
    Opcode.JLTS: ExprOp.SLT, Opcode.JLES: ExprOp.SLE,
    Opcode.JGTS: ExprOp.SGT, Opcode.JGES: ExprOp.SGE,
}

NEGATED_COMPARISON = {
    ExprOp.EQ: ExprOp.NE, ExprOp.NE: ExprOp.EQ,
    ExprOp.ULT: ExprOp.UGE, ExprOp.UGE: ExprOp.ULT,
    ExprOp.ULE: ExprOp.UGT, ExprOp.UGT: ExprOp.ULE,
    ExprOp.SLT: ExprOp.SGE, ExprOp.SGE: ExprOp.SLT,
    ExprOp.SLE: ExprOp.SGT, ExprOp.SGT: ExprOp.SLE,
}

COMPARISONS = frozenset(NEGATED_COMPARISON)
SIGNED_COMPARISONS = frozenset({ExprOp.SLT, ExprOp.SLE, ExprOp.SGT, ExprOp.SGE})
_OPCODE_OF = {value: key for key, value in ARITHMETIC_OPS.items()}


@dataclass(frozen=True, eq=False, repr=False)
class SymExpr:
    """
    Узел символьного выражения

    Узлы интернируются: структурно равные выражения являются одним объектом,
    поэтому сравнение и хеш работают по идентичности и не обходят дерево.
    Создавать узлы следует только через фабрики модуля.
    """
    op: ExprOp
    args: Tuple["SymExpr", ...] = ()
    value: int = 0
    width: int = field(default=WORD_BITS, compare=False)
    variables: FrozenSet[int] = field(default=frozenset(), compare=False)

    @property
    def is_boolean(self) -> bool:
        return self.width == BOOL_BITS

    @property
    def is_symbolic(self) -> bool:
        return bool(self.variables)

    def __str__(self) -> str:
        return to_prefix(self)

    def __repr__(self) -> str:
        return f"SymExpr({self.op.value}, vars={sorted(self.variables)})"


_INTERNED: "weakref.WeakValueDictionary[tuple, SymExpr]" = weakref.WeakValueDictionary()
_INTERN_LOCK = threading.Lock()


def _node(op: ExprOp, args: Tuple[SymExpr, ...] = (), value: int = 0,
          width: int = WORD_BITS, variables: FrozenSet[int] = frozenset()) -> SymExpr:
    # Дети живы, пока жив родитель в таблице, поэтому их id в ключе не переиспользуются
    key = (op, tuple(id(arg) for arg in args), value, width)
    with _INTERN_LOCK:
        node = _INTERNED.get(key)
        if node is None:
            node = SymExpr(op, args, value, width, variables)
            _INTERNED[key] = node
        return node


def input_byte(index: int) -> SymExpr:
    return _node(ExprOp.INPUT, value=index, variables=frozenset({index}))


def constant(value: int) -> SymExpr:
    return _node(ExprOp.CONST, value=value & WORD_MASK)


def bool_const(value: bool) -> SymExpr:
    return _node(ExprOp.BOOL, value=int(bool(value)), width=BOOL_BITS)


TRUE = bool_const(True)
FALSE = bool_const(False)


def binary(op: ExprOp, left: SymExpr, right: SymExpr) -> SymExpr:
    """Арифметическая операция; две константы сворачиваются сразу"""
    if op not in _OPCODE_OF:
        raise ValueError(f"{op.value} не является арифметической операцией")
    if left.is_boolean or right.is_boolean:
        raise ValueError(f"Операция {op.value} ожидает операнды-слова")
    if left.op is ExprOp.CONST and right.op is ExprOp.CONST:
        return constant(alu(_OPCODE_OF[op], left.value, right.value))
    return _node(op, (left, right), variables=left.variables | right.variables)


def compare(op: ExprOp, left: SymExpr, right: SymExpr) -> SymExpr:
    if op not in COMPARISONS:
        raise ValueError(f"{op.value} не является сравнением")
    if left.is_boolean or right.is_boolean:
        raise ValueError(f"Сравнение {op.value} ожидает операнды-слова")
    return _node(op, (left, right), width=BOOL_BITS,
                 variables=left.variables | right.variables)


def negate(expr: SymExpr) -> SymExpr:
    """
    Логическое отрицание булева выражения

    Сравнение заменяется двойственным, двойное отрицание снимается.
    """
    if not expr.is_boolean:
        raise ValueError("Отрицание применимо только к булевым выражениям")
    if expr.op in NEGATED_COMPARISON:
        return _node(NEGATED_COMPARISON[expr.op], expr.args, width=BOOL_BITS,
                     variables=expr.variables)
    if expr.op is ExprOp.BOOL:
        return bool_const(not expr.value)
    if expr.op is ExprOp.NOT:
        return expr.args[0]
    return _node(ExprOp.NOT, (expr,), width=BOOL_BITS, variables=expr.variables)


def branch_expr(opcode: Opcode, left: SymExpr, right: SymExpr, taken: bool) -> SymExpr:
    """Условие перехода, ориентированное по фактическому направлению"""
    condition = compare(JUMP_COMPARISONS[opcode], left, right)
    return condition if taken else negate(condition)


def vars_of(expr: SymExpr) -> FrozenSet[int]:
    """Индексы входных байтов, от которых зависит выражение"""
    return expr.variables


T = TypeVar("T")


def fold(expr: SymExpr, combine: Callable[[SymExpr, Sequence[T]], T]) -> T:
    """
    Обход выражения снизу вверх без рекурсии

    combine получает узел и уже вычисленные значения его аргументов. Общие
    подвыражения вычисляются один раз. Глубина дерева ограничена только
    памятью: длинный цикл над символьным значением дает цепочку в тысячи
    уровней. Значение узла освобождается, как только его использовали все
    родители.
    """
    # Число ссылок на узел из родителей внутри expr
    uses: Dict[int, int] = {id(expr): 0}
    stack: List[SymExpr] = [expr]
    while stack:
        for arg in stack.pop().args:
            if id(arg) in uses:
                uses[id(arg)] += 1
            else:
                uses[id(arg)] = 1
                stack.append(arg)

    memo: Dict[int, T] = {}
    stack = [expr]
    while stack:
        node = stack[-1]
        if id(node) in memo:
            stack.pop()
            continue
        pending = [arg for arg in node.args if id(arg) not in memo]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        memo[id(node)] = combine(node, [memo[id(arg)] for arg in node.args])
        for arg in node.args:
            uses[id(arg)] -= 1
            if not uses[id(arg)]:
                del memo[id(arg)]
    return memo[id(expr)]


def _prefix_node(node: SymExpr, args: Sequence[str]) -> str:
    if node.op is ExprOp.INPUT:
        return f"b{node.value}"
    if node.op is ExprOp.CONST:
        return f"0x{node.value:x}"
    if node.op is ExprOp.BOOL:
        return "true" if node.value else "false"
    return f"{node.op.value}({','.join(args)})"


def to_prefix(expr: SymExpr) -> str:
    """Префиксная запись: b3, 0x36, xor(b3,0x36), eq(...)"""
    return fold(expr, _prefix_node)


Value = Union[np.ndarray, np.generic]

_UFUNCS = {
    ExprOp.ADD: np.add, ExprOp.SUB: np.subtract, ExprOp.MUL: np.multiply,
    ExprOp.AND: np.bitwise_and, ExprOp.OR: np.bitwise_or, ExprOp.XOR: np.bitwise_xor,
    ExprOp.SHL: np.left_shift, ExprOp.SHR: np.right_shift,
}

_COMPARE_UFUNCS = {
    ExprOp.EQ: np.equal, ExprOp.NE: np.not_equal,
    ExprOp.ULT: np.less, ExprOp.ULE: np.less_equal,
    ExprOp.UGT: np.greater, ExprOp.UGE: np.greater_equal,
    ExprOp.SLT: np.less, ExprOp.SLE: np.less_equal,
    ExprOp.SGT: np.greater, ExprOp.SGE: np.greater_equal,
}

_SHIFT_MASK = np.uint32(WORD_BITS - 1)


def evaluate(expr: SymExpr, env: Mapping[int, Union[int, np.ndarray]]) -> Value:
    """
    Векторное вычисление выражения

    Операции выполняются явными ufunc над uint32, поэтому переполнение
    дает wraparound без предупреждений. Значения переменных в env могут быть
    массивами любой совместимой для broadcast формы.

    Args:
        expr: Выражение
        env: Значения входных байтов по индексам

    Returns:
        Массив uint32 для слов или bool для сравнений
    """
    def combine(node: SymExpr, args: Sequence[Value]) -> Value:
        op = node.op
        if op is ExprOp.INPUT:
            if node.value not in env:
                raise KeyError(f"Нет значения для входного байта {node.value}")
            result = np.asarray(env[node.value], dtype=np.uint32)
        elif op is ExprOp.CONST:
            result = np.asarray(node.value, dtype=np.uint32)
        elif op is ExprOp.BOOL:
            result = np.asarray(bool(node.value))
        elif op is ExprOp.NOT:
            result = np.logical_not(args[0])
        elif op in _UFUNCS:
            left, right = args
            if op in (ExprOp.SHL, ExprOp.SHR):
                right = np.bitwise_and(right, _SHIFT_MASK)
            result = _UFUNCS[op](left, right, dtype=np.uint32)
        else:
            left, right = args
            if op in SIGNED_COMPARISONS:
                left = np.asarray(left).astype(np.int32)
                right = np.asarray(right).astype(np.int32)
            result = _COMPARE_UFUNCS[op](left, right)

        return result

    return fold(expr, combine)


def evaluate_on(expr: SymExpr, data: bytes) -> Union[int, bool]:
    """Значение выражения на конкретном входном буфере"""
    env = {index: np.uint32(data[index]) for index in expr.variables}
    result = evaluate(expr, env)
    if expr.is_boolean:
        return bool(result)
    return int(result)


def holds_on(exprs, data: bytes, model: Optional[Mapping[int, int]] = None) -> bool:
    """Истинны ли все булевы выражения на входе data с подстановкой model"""
    if model:
        buffer = bytearray(data)
        for index, value in model.items():
            buffer[index] = value
        data = bytes(buffer)
    return all(evaluate_on(expr, data) for expr in exprs)

"""
Конколический интерпретатор

Исполняет программу на конкретном входе, параллельно поддерживая
символьную тень регистров, и записывает предикат пути: по одному
ограничению на каждый условный переход, условие которого зависит от входа.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from loguru import logger

from ..vm.interpreter import (
    DEFAULT_STEP_LIMIT, BranchEvent, ExecutionObserver, Machine, Termination,
)
from ..vm.isa import REGISTER_COUNT, Instruction, Opcode, Program
from .expressions import (
    ARITHMETIC_OPS, SymExpr, binary, branch_expr, constant, input_byte, to_prefix,
)

# Условный адрес вызова для кадра main
ENTRY_CALL_SITE = -1


@dataclass(frozen=True)
class Frame:
    """Кадр стека вызовов"""
    call_site: int
    callee_entry: int
    depth: int


@dataclass(frozen=True)
class CallStackSnapshot:
    """Снимок стека вызовов, внешний кадр первым"""
    frames: Tuple[Frame, ...]

    @classmethod
    def entry(cls, entry_address: int) -> "CallStackSnapshot":
        return cls((Frame(ENTRY_CALL_SITE, entry_address, 0),))

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def call_sites(self) -> Tuple[int, ...]:
        return tuple(frame.call_site for frame in self.frames)

    def is_prefix_of(self, other: "CallStackSnapshot") -> bool:
        """Поэлементное совпадение адресов вызова с начала стека"""
        if len(self) > len(other):
            return False
        return all(
            mine.call_site == theirs.call_site
            for mine, theirs in zip(self.frames, other.frames)
        )

    def push(self, call_site: int, callee_entry: int) -> "CallStackSnapshot":
        return CallStackSnapshot(self.frames + (Frame(call_site, callee_entry, len(self.frames)),))

    def truncate(self, length: int) -> "CallStackSnapshot":
        """Отбрасывает кадры глубже length"""
        return CallStackSnapshot(self.frames[:max(length, 1)])

    def __str__(self) -> str:
        return "[" + ",".join(str(site) for site in self.call_sites) + "]"


@dataclass(frozen=True)
class BranchConstraint:
    """
    Символьное ветвление предиката пути

    expr ориентирован по фактическому направлению и истинен на seed.
    """
    expr: SymExpr
    src_addr: int
    dst_addr: int
    taken: bool
    stack: CallStackSnapshot
    has_cti: bool
    seq: int
    occurrence: int = 0

    @property
    def variables(self):
        return self.expr.variables


@dataclass(frozen=True)
class PathPredicate:
    """Упорядоченный предикат пути одного конколического запуска"""
    constraints: Tuple[BranchConstraint, ...]
    seed: bytes
    termination: Termination = Termination.HALT

    def __len__(self) -> int:
        return len(self.constraints)

    def __getitem__(self, seq: int) -> BranchConstraint:
        return self.constraints[seq]

    @property
    def exprs(self) -> Tuple[SymExpr, ...]:
        return tuple(c.expr for c in self.constraints)


def scan_cti(program: Program, src: int, dst: int) -> bool:
    """
    Есть ли в области ветвления команда передачи управления

    Область: адреса строго между src и dst. Учитываются ret, а также
    jmp и условные переходы с целью дальше dst. Обратные переходы
    не обрабатываются.
    """
    if dst <= src:
        return False
    for address in range(src + 1, dst):
        instruction = program[address]
        if instruction.opcode is Opcode.RET:
            return True
        if instruction.opcode is Opcode.JMP or instruction.opcode.is_conditional_jump:
            if instruction.target > dst:
                return True
    return False


class _SymbolicObserver(ExecutionObserver):
    """Символьная тень регистров и стека вызовов поверх конкретной машины"""

    def __init__(self, program: Program):
        self.program = program
        self.shadow: List[Optional[SymExpr]] = [None] * REGISTER_COUNT
        self.stack = CallStackSnapshot.entry(program.entry)
        self.constraints: List[BranchConstraint] = []
        self._pending_write: Optional[Tuple[int, Optional[SymExpr]]] = None
        self._condition: Optional[Tuple[SymExpr, SymExpr]] = None
        self._cti_cache: Dict[Tuple[int, int], bool] = {}

    def _operands(self, machine: Machine, left: int, right: int) -> Optional[Tuple[SymExpr, SymExpr]]:
        sym_left, sym_right = self.shadow[left], self.shadow[right]
        if sym_left is None and sym_right is None:
            return None
        if sym_left is None:
            sym_left = constant(machine.registers[left])
        if sym_right is None:
            sym_right = constant(machine.registers[right])
        return sym_left, sym_right

    def before_step(self, machine: Machine, instruction: Instruction):
        opcode = instruction.opcode
        operands = instruction.operands
        self._pending_write = None
        self._condition = None

        if opcode is Opcode.INPUT:
            self._pending_write = (operands[0], input_byte(operands[1]))
        elif opcode is Opcode.CONST:
            self._pending_write = (operands[0], None)
        elif opcode is Opcode.MOV:
            self._pending_write = (operands[0], self.shadow[operands[1]])
        elif opcode.is_alu:
            pair = self._operands(machine, operands[1], operands[2])
            value = binary(ARITHMETIC_OPS[opcode], *pair) if pair else None
            if value is not None and not value.is_symbolic:
                value = None
            self._pending_write = (operands[0], value)
        elif opcode.is_conditional_jump:
            self._condition = self._operands(machine, operands[0], operands[1])

    def after_step(self, machine: Machine, instruction: Instruction,
                   event: Optional[BranchEvent]):
        if self._pending_write is not None:
            register, value = self._pending_write
            self.shadow[register] = value

        opcode = instruction.opcode
        if opcode.is_conditional_jump and event is not None and self._condition is not None:
            expr = branch_expr(opcode, *self._condition, event.taken)
            if expr.is_symbolic:
                self._record(instruction, expr, event)
        elif opcode is Opcode.CALL:
            self.stack = self.stack.push(instruction.address, instruction.target)
        elif opcode is Opcode.RET:
            # Кадр main плюс оставшиеся адреса возврата
            self.stack = self.stack.truncate(len(machine.call_stack) + 1)

    def _record(self, instruction: Instruction, expr: SymExpr, event: BranchEvent):
        src, dst = instruction.address, instruction.target
        key = (src, dst)
        # Для обратных переходов область не сканируется
        if key not in self._cti_cache:
            self._cti_cache[key] = dst > src and scan_cti(self.program, src, dst)
        self.constraints.append(BranchConstraint(
            expr=expr,
            src_addr=src,
            dst_addr=dst,
            taken=event.taken,
            stack=self.stack,
            has_cti=self._cti_cache[key],
            seq=len(self.constraints),
            occurrence=event.occurrence,
        ))


class ConcolicEngine:
    """
    Построитель предикатов пути для одной программы
    """

    def __init__(self, program: Program, step_limit: int = DEFAULT_STEP_LIMIT):
        self.program = program
        self.step_limit = step_limit

    def run(self, seed: bytes) -> PathPredicate:
        """
        Конколический запуск на seed

        Args:
            seed: Начальный вход длиной program.input_length

        Returns:
            PathPredicate; при сбое или исчерпании лимита шагов возвращается
            собранная к этому моменту часть
        """
        observer = _SymbolicObserver(self.program)
        trace = Machine(self.program, seed, self.step_limit, observer).run()
        if trace.terminated is not Termination.HALT:
            logger.warning(
                f"Конколический запуск завершился досрочно ({trace.terminated.value}), "
                f"ограничений собрано: {len(observer.constraints)}"
            )
        predicate = PathPredicate(tuple(observer.constraints), bytes(seed), trace.terminated)
        logger.info(
            f"Предикат пути построен: {len(predicate)} символьных ветвлений за {trace.steps} шагов"
        )
        return predicate


def run_concolic(program: Program, seed: bytes, step_limit: int = DEFAULT_STEP_LIMIT) -> PathPredicate:
    return ConcolicEngine(program, step_limit).run(seed)


def format_constraint(constraint: BranchConstraint) -> str:
    return (
        f"{constraint.seq}; {constraint.src_addr}; {constraint.dst_addr}; "
        f"{str(constraint.taken).lower()}; {str(constraint.has_cti).lower()}; "
        f"stack={constraint.stack}; expr={to_prefix(constraint.expr)}"
    )


def dump_trace(predicate: PathPredicate) -> str:
    """Текстовый дамп: одна строка на ограничение"""
    return "".join(format_constraint(c) + "\n" for c in predicate.constraints)

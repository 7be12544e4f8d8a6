"""
Конкретный интерпретатор с трассировкой ребер и ветвлений
"""

from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import DefaultDict, FrozenSet, Iterable, List, Optional, Tuple

from loguru import logger

from .isa import REGISTER_COUNT, Instruction, Opcode, Program, alu, branch_condition

DEFAULT_STEP_LIMIT = 1_000_000

Edge = Tuple[int, int]


class InputLengthError(ValueError):
    """Длина входных данных не совпадает с объявленной в программе"""

    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"Ожидается вход длиной {expected} байт, получено {actual}")


class Termination(Enum):
    """Причины останова"""
    HALT = "halt"
    STEP_LIMIT = "step-limit"
    FAULT = "fault"


@dataclass(frozen=True)
class BranchEvent:
    """Исполнение условного перехода"""
    src: int
    taken: bool
    occurrence: int


@dataclass(frozen=True)
class ExecTrace:
    """Результат конкретного исполнения"""
    executed_edges: Tuple[Edge, ...]
    branch_events: Tuple[BranchEvent, ...]
    terminated: Termination
    steps: int = 0
    fault: Optional[str] = None

    def find_event(self, src: int, occurrence: int) -> Optional[BranchEvent]:
        for event in self.branch_events:
            if event.src == src and event.occurrence == occurrence:
                return event
        return None

    def events_at(self, src: int) -> Tuple[BranchEvent, ...]:
        return tuple(event for event in self.branch_events if event.src == src)

    def edge_set(self) -> FrozenSet[Edge]:
        return frozenset(self.executed_edges)


class ExecutionObserver:
    """
    Наблюдатель за исполнением

    before_step вызывается до изменения состояния машины, after_step после
    него, если команда завершилась без сбоя.
    """

    def before_step(self, machine: "Machine", instruction: Instruction):
        pass

    def after_step(self, machine: "Machine", instruction: Instruction,
                   event: Optional[BranchEvent]):
        pass


class Machine:
    """
    Регистровая машина

    Состояние: 16 регистров, счетчик команд и стек адресов возврата.
    """

    def __init__(self, program: Program, data: bytes, step_limit: int = DEFAULT_STEP_LIMIT,
                 observer: Optional[ExecutionObserver] = None):
        """
        Инициализация машины

        Args:
            program: Исполняемая программа
            data: Входной буфер длиной program.input_length
            step_limit: Максимальное число исполняемых команд
            observer: Наблюдатель за шагами исполнения
        """
        data = bytes(data)
        if len(data) != program.input_length:
            raise InputLengthError(program.input_length, len(data))
        self.program = program
        self.data = data
        self.step_limit = step_limit
        self.observer = observer or ExecutionObserver()
        self.registers: List[int] = [0] * REGISTER_COUNT
        self.pc = program.entry
        self.call_stack: List[int] = []
        self._occurrences: DefaultDict[int, int] = defaultdict(int)

    def run(self) -> ExecTrace:
        edges: List[Edge] = []
        events: List[BranchEvent] = []
        steps = 0
        fault = None

        while True:
            if steps >= self.step_limit:
                terminated = Termination.STEP_LIMIT
                break
            if not 0 <= self.pc < len(self.program):
                terminated = Termination.FAULT
                fault = f"выход за пределы программы: pc={self.pc}"
                break

            instruction = self.program[self.pc]
            self.observer.before_step(self, instruction)
            steps += 1

            if instruction.opcode is Opcode.HALT:
                self.observer.after_step(self, instruction, None)
                terminated = Termination.HALT
                break
            if instruction.opcode is Opcode.RET and not self.call_stack:
                terminated = Termination.FAULT
                fault = f"ret с пустым стеком вызовов по адресу {instruction.address}"
                break

            next_pc, event = self._execute(instruction)
            edges.append((instruction.address, next_pc))
            if event is not None:
                events.append(event)
            self.observer.after_step(self, instruction, event)
            self.pc = next_pc

        if fault:
            logger.debug(f"Исполнение прервано: {fault}")
        return ExecTrace(
            executed_edges=tuple(edges),
            branch_events=tuple(events),
            terminated=terminated,
            steps=steps,
            fault=fault,
        )

    def _execute(self, instruction: Instruction) -> Tuple[int, Optional[BranchEvent]]:
        opcode = instruction.opcode
        operands = instruction.operands
        regs = self.registers
        next_pc = instruction.address + 1

        if opcode is Opcode.INPUT:
            regs[operands[0]] = self.data[operands[1]]
        elif opcode is Opcode.CONST:
            regs[operands[0]] = operands[1]
        elif opcode is Opcode.MOV:
            regs[operands[0]] = regs[operands[1]]
        elif opcode.is_alu:
            regs[operands[0]] = alu(opcode, regs[operands[1]], regs[operands[2]])
        elif opcode.is_conditional_jump:
            taken = branch_condition(opcode, regs[operands[0]], regs[operands[1]])
            occurrence = self._occurrences[instruction.address]
            self._occurrences[instruction.address] += 1
            if taken:
                next_pc = operands[2]
            return next_pc, BranchEvent(instruction.address, taken, occurrence)
        elif opcode is Opcode.JMP:
            next_pc = operands[0]
        elif opcode is Opcode.CALL:
            self.call_stack.append(next_pc)
            next_pc = operands[0]
        elif opcode is Opcode.RET:
            next_pc = self.call_stack.pop()
        return next_pc, None


def run_concrete(program: Program, data: bytes, step_limit: int = DEFAULT_STEP_LIMIT) -> ExecTrace:
    """
    Конкретное исполнение программы

    Args:
        program: Программа
        data: Входной буфер
        step_limit: Лимит шагов

    Returns:
        Детерминированная трасса исполнения
    """
    return Machine(program, data, step_limit).run()


def edge_coverage(program: Program, corpus: Iterable[bytes],
                  step_limit: int = DEFAULT_STEP_LIMIT) -> int:
    """Число уникальных ребер по объединению трасс всех входов корпуса"""
    edges = set()
    runs = 0
    for data in corpus:
        edges.update(run_concrete(program, data, step_limit).executed_edges)
        runs += 1
    logger.debug(f"Покрытие по {runs} входам: {len(edges)} ребер")
    return len(edges)

"""
Набор команд регистровой машины

Машинное слово 32 бита без знака, 16 регистров, адрес команды равен ее
индексу в листинге.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

WORD_BITS = 32
WORD_MASK = (1 << WORD_BITS) - 1
REGISTER_COUNT = 16
ENTRY_LABEL = "main"


class Opcode(Enum):
    """Коды операций"""
    INPUT = "input"
    CONST = "const"
    MOV = "mov"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    AND = "and"
    OR = "or"
    XOR = "xor"
    SHL = "shl"
    SHR = "shr"
    JEQ = "jeq"
    JNE = "jne"
    JLT = "jlt"
    JLE = "jle"
    JGT = "jgt"
    JGE = "jge"
    JLTS = "jlts"
    JLES = "jles"
    JGTS = "jgts"
    JGES = "jges"
    JMP = "jmp"
    CALL = "call"
    RET = "ret"
    HALT = "halt"

    @property
    def mnemonic(self) -> str:
        return self.value

    @property
    def is_alu(self) -> bool:
        return self in ALU_OPCODES

    @property
    def is_conditional_jump(self) -> bool:
        return self in CONDITIONAL_JUMPS

    @property
    def has_target(self) -> bool:
        return self in CONDITIONAL_JUMPS or self in (Opcode.JMP, Opcode.CALL)


class OperandKind(Enum):
    """Виды операндов"""
    REGISTER = "register"
    IMMEDIATE = "immediate"
    INPUT_INDEX = "input_index"
    TARGET = "target"


ALU_OPCODES = frozenset({
    Opcode.ADD, Opcode.SUB, Opcode.MUL, Opcode.AND, Opcode.OR,
    Opcode.XOR, Opcode.SHL, Opcode.SHR,
})

CONDITIONAL_JUMPS = frozenset({
    Opcode.JEQ, Opcode.JNE, Opcode.JLT, Opcode.JLE, Opcode.JGT, Opcode.JGE,
    Opcode.JLTS, Opcode.JLES, Opcode.JGTS, Opcode.JGES,
})

SIGNED_JUMPS = frozenset({Opcode.JLTS, Opcode.JLES, Opcode.JGTS, Opcode.JGES})

_R = OperandKind.REGISTER
OPERAND_LAYOUT: Dict[Opcode, Tuple[OperandKind, ...]] = {
    Opcode.INPUT: (_R, OperandKind.INPUT_INDEX),
    Opcode.CONST: (_R, OperandKind.IMMEDIATE),
    Opcode.MOV: (_R, _R),
    Opcode.JMP: (OperandKind.TARGET,),
    Opcode.CALL: (OperandKind.TARGET,),
    Opcode.RET: (),
    Opcode.HALT: (),
}
OPERAND_LAYOUT.update({op: (_R, _R, _R) for op in ALU_OPCODES})
OPERAND_LAYOUT.update({op: (_R, _R, OperandKind.TARGET) for op in CONDITIONAL_JUMPS})


def to_signed(value: int) -> int:
    """Интерпретация слова как числа со знаком в дополнительном коде"""
    value &= WORD_MASK
    return value - (1 << WORD_BITS) if value >> (WORD_BITS - 1) else value


def alu(opcode: Opcode, a: int, b: int) -> int:
    """
    Вычисление арифметико-логической операции над словами

    Args:
        opcode: Код операции из ALU_OPCODES
        a: Левый операнд
        b: Правый операнд

    Returns:
        Результат по модулю 2^32
    """
    if opcode is Opcode.ADD:
        result = a + b
    elif opcode is Opcode.SUB:
        result = a - b
    elif opcode is Opcode.MUL:
        result = a * b
    elif opcode is Opcode.AND:
        result = a & b
    elif opcode is Opcode.OR:
        result = a | b
    elif opcode is Opcode.XOR:
        result = a ^ b
    elif opcode is Opcode.SHL:
        result = a << (b & (WORD_BITS - 1))
    elif opcode is Opcode.SHR:
        result = (a & WORD_MASK) >> (b & (WORD_BITS - 1))
    else:
        raise ValueError(f"Операция {opcode.mnemonic} не является арифметической")
    return result & WORD_MASK


def branch_condition(opcode: Opcode, a: int, b: int) -> bool:
    """Условие перехода условной команды; знаковые формы сравнивают to_signed"""
    if opcode in SIGNED_JUMPS:
        a, b = to_signed(a), to_signed(b)
    if opcode is Opcode.JEQ:
        return a == b
    if opcode is Opcode.JNE:
        return a != b
    if opcode in (Opcode.JLT, Opcode.JLTS):
        return a < b
    if opcode in (Opcode.JLE, Opcode.JLES):
        return a <= b
    if opcode in (Opcode.JGT, Opcode.JGTS):
        return a > b
    if opcode in (Opcode.JGE, Opcode.JGES):
        return a >= b
    raise ValueError(f"Операция {opcode.mnemonic} не является условным переходом")


@dataclass(frozen=True)
class Instruction:
    """Команда программы"""
    address: int
    opcode: Opcode
    operands: Tuple[int, ...] = ()
    # Номер строки исходного текста, в сравнении не участвует
    line: int = field(default=0, compare=False)

    @property
    def target(self) -> Optional[int]:
        """Адрес перехода или вызова"""
        if self.opcode.has_target:
            return self.operands[-1]
        return None


@dataclass(frozen=True)
class Program:
    """
    Собранная программа

    Адреса команд плотные 0..N-1 в порядке листинга, entry указывает на
    первую команду main.
    """
    instructions: Tuple[Instruction, ...]
    input_length: int
    entry: int = 0
    labels: Dict[str, int] = field(default_factory=dict, compare=False, hash=False)

    def __len__(self) -> int:
        return len(self.instructions)

    def __getitem__(self, address: int) -> Instruction:
        return self.instructions[address]

    @property
    def functions(self) -> Tuple[int, ...]:
        """Адреса входов функций: main и все цели CALL"""
        entries = {self.entry}
        entries.update(
            ins.operands[0] for ins in self.instructions if ins.opcode is Opcode.CALL
        )
        return tuple(sorted(entries))

    @property
    def conditional_branches(self) -> Tuple[int, ...]:
        return tuple(
            ins.address for ins in self.instructions if ins.opcode.is_conditional_jump
        )

    def label_for(self, address: int) -> Optional[str]:
        """Первая по алфавиту метка, указывающая на адрес"""
        names = sorted(name for name, addr in self.labels.items() if addr == address)
        return names[0] if names else None

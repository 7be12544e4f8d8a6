"""
Текстовый ассемблер и дизассемблер регистровой машины

Формат: одна команда на строку, метки `name:`, комментарии от `;` до конца
строки, директива `.input N` задает длину входного буфера.
"""

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from loguru import logger

from .isa import (
    ENTRY_LABEL, OPERAND_LAYOUT, REGISTER_COUNT, WORD_BITS, WORD_MASK,
    Instruction, Opcode, OperandKind, Program,
)

_LABEL_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_.]*)\s*:")
_REGISTER_RE = re.compile(r"[rR](\d+)$")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*$")
_STATEMENT_RE = re.compile(r"(\S+)\s*(.*)$")
_MNEMONICS = {op.mnemonic: op for op in Opcode}


class AssemblyError(ValueError):
    """Ошибка сборки с указанием позиции и проблемного токена"""

    def __init__(self, message: str, line: int, column: int = 1, token: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.token = token
        super().__init__(f"строка {line}, столбец {column}: {message} ('{token}')")


@dataclass
class _Token:
    text: str
    line: int
    column: int


@dataclass
class _PendingInstruction:
    address: int
    mnemonic: _Token
    opcode: Opcode
    operands: List[_Token]


def _split_operands(text: str, offset: int, line_no: int) -> List[_Token]:
    """Разбиение списка операндов по запятым с сохранением столбцов"""
    if not text.strip():
        return []
    tokens = []
    position = 0
    for part in text.split(","):
        stripped = part.strip()
        column = offset + position + (len(part) - len(part.lstrip())) + 1
        if not stripped:
            raise AssemblyError("пустой операнд", line_no, column, part)
        tokens.append(_Token(stripped, line_no, column))
        position += len(part) + 1
    return tokens


def _parse_int(token: _Token, what: str) -> int:
    try:
        return int(token.text, 0)
    except ValueError:
        raise AssemblyError(f"ожидается {what}", token.line, token.column, token.text) from None


class Assembler:
    """
    Двухпроходный ассемблер: первый проход собирает метки, второй
    разрешает операнды
    """

    def __init__(self, source_text: str):
        self.source_text = source_text
        self.labels: Dict[str, int] = {}
        self.label_lines: Dict[str, int] = {}
        self.input_length: Optional[int] = None
        self._pending: List[_PendingInstruction] = []
        self._last_line = 1

    def assemble(self) -> Program:
        self._first_pass()
        instructions = tuple(self._resolve(item) for item in self._pending)

        if not any(ins.opcode is Opcode.HALT for ins in instructions):
            raise AssemblyError("в программе нет команды halt", self._last_line, 1, "halt")

        entry = self.labels.get(ENTRY_LABEL, 0)
        if entry >= len(instructions):
            line = self.label_lines[ENTRY_LABEL]
            raise AssemblyError("метка main указывает за конец программы", line, 1, ENTRY_LABEL)

        program = Program(
            instructions=instructions,
            input_length=self.input_length or 0,
            entry=entry,
            labels=dict(self.labels),
        )
        logger.debug(
            f"Собрано команд: {len(program)}, функций: {len(program.functions)}, "
            f"условных переходов: {len(program.conditional_branches)}"
        )
        return program

    def _first_pass(self):
        for line_no, raw_line in enumerate(self.source_text.splitlines(), start=1):
            self._last_line = line_no
            code = raw_line.split(";", 1)[0]
            position = 0

            # Метки, в том числе несколько подряд перед командой
            while True:
                match = _LABEL_RE.match(code, position)
                if not match:
                    break
                name = match.group(1)
                if name in self.labels:
                    raise AssemblyError(
                        "повторное определение метки", line_no, match.start(1) + 1, name
                    )
                self.labels[name] = len(self._pending)
                self.label_lines[name] = line_no
                position = match.end()

            rest = code[position:]
            stripped = rest.strip()
            if not stripped:
                continue
            column = position + (len(rest) - len(rest.lstrip())) + 1

            parts = _STATEMENT_RE.match(stripped)
            head, tail = parts.group(1), parts.group(2)
            tail_offset = column - 1 + parts.start(2)
            if head.lower() == ".input":
                self._directive_input(tail, tail_offset, line_no, column)
                continue

            opcode = _MNEMONICS.get(head.lower())
            if opcode is None:
                raise AssemblyError("неизвестная команда", line_no, column, head)
            operands = _split_operands(tail, tail_offset, line_no)
            layout = OPERAND_LAYOUT[opcode]
            if len(operands) != len(layout):
                raise AssemblyError(
                    f"команда {opcode.mnemonic} ожидает операндов: {len(layout)}, получено: {len(operands)}",
                    line_no, column, head,
                )
            self._pending.append(_PendingInstruction(
                address=len(self._pending),
                mnemonic=_Token(head, line_no, column),
                opcode=opcode,
                operands=operands,
            ))

    def _directive_input(self, tail: str, offset: int, line_no: int, column: int):
        operands = _split_operands(tail, offset, line_no)
        if len(operands) != 1:
            raise AssemblyError("директива .input ожидает одно число", line_no, column, ".input")
        if self.input_length is not None:
            raise AssemblyError("повторная директива .input", line_no, column, ".input")
        value = _parse_int(operands[0], "длина входа")
        if value < 0:
            raise AssemblyError("длина входа отрицательна", line_no, operands[0].column, operands[0].text)
        self.input_length = value

    def _resolve(self, item: _PendingInstruction) -> Instruction:
        values = []
        for kind, token in zip(OPERAND_LAYOUT[item.opcode], item.operands):
            values.append(self._resolve_operand(kind, token))
        return Instruction(item.address, item.opcode, tuple(values), line=item.mnemonic.line)

    def _resolve_operand(self, kind: OperandKind, token: _Token) -> int:
        if kind is OperandKind.REGISTER:
            match = _REGISTER_RE.match(token.text)
            if not match:
                raise AssemblyError("ожидается регистр", token.line, token.column, token.text)
            register = int(match.group(1))
            if register >= REGISTER_COUNT:
                raise AssemblyError("номер регистра вне диапазона", token.line, token.column, token.text)
            return register

        if kind is OperandKind.IMMEDIATE:
            value = _parse_int(token, "константа")
            if not -(1 << (WORD_BITS - 1)) <= value <= WORD_MASK:
                raise AssemblyError("константа не помещается в 32 бита", token.line, token.column, token.text)
            return value & WORD_MASK

        if kind is OperandKind.INPUT_INDEX:
            index = _parse_int(token, "индекс входного байта")
            limit = self.input_length or 0
            if not 0 <= index < limit:
                raise AssemblyError(
                    f"индекс входного байта вне диапазона 0..{limit - 1}",
                    token.line, token.column, token.text,
                )
            return index

        if not _NAME_RE.match(token.text):
            raise AssemblyError("ожидается метка", token.line, token.column, token.text)
        if token.text not in self.labels:
            raise AssemblyError("неизвестная метка", token.line, token.column, token.text)
        address = self.labels[token.text]
        if address >= len(self._pending):
            raise AssemblyError("метка указывает за конец программы", token.line, token.column, token.text)
        return address


def assemble(source_text: str) -> Program:
    """
    Сборка программы из текста

    Args:
        source_text: Исходный текст на языке ассемблера

    Returns:
        Program с разрешенными метками

    Raises:
        AssemblyError: синтаксическая ошибка, неизвестная или повторная метка,
            операнд вне диапазона, отсутствие halt
    """
    return Assembler(source_text).assemble()


def _format_operand(kind: OperandKind, value: int, names: Dict[int, str]) -> str:
    if kind is OperandKind.REGISTER:
        return f"r{value}"
    if kind is OperandKind.IMMEDIATE:
        return f"0x{value:x}"
    if kind is OperandKind.INPUT_INDEX:
        return str(value)
    return names[value]


def disassemble(program: Program) -> str:
    """
    Текст программы, повторная сборка которого дает равную Program

    Исходные имена меток сохраняются; цели переходов без метки получают
    имя вида L<адрес>.
    """
    names: Dict[int, str] = {}
    for address in sorted(set(program.labels.values())):
        label = program.label_for(address)
        if label is not None:
            names[address] = label

    taken = set(program.labels)
    extra: List[Tuple[int, str]] = []
    for ins in program.instructions:
        target = ins.target
        if target is not None and target not in names:
            name = f"L{target}"
            while name in taken:
                name += "_"
            names[target] = name
            taken.add(name)
            extra.append((target, name))
    if program.entry != 0 and program.labels.get(ENTRY_LABEL) != program.entry:
        extra.append((program.entry, ENTRY_LABEL))

    lines = [f".input {program.input_length}"]
    labels_at: Dict[int, List[str]] = {}
    for name, address in list(program.labels.items()) + extra:
        labels_at.setdefault(address, []).append(name)

    for ins in program.instructions:
        for name in sorted(set(labels_at.get(ins.address, []))):
            lines.append(f"{name}:")
        layout = OPERAND_LAYOUT[ins.opcode]
        operands = ", ".join(
            _format_operand(kind, value, names) for kind, value in zip(layout, ins.operands)
        )
        lines.append(f"    {ins.opcode.mnemonic} {operands}".rstrip())
    for name in sorted(set(labels_at.get(len(program), []))):
        lines.append(f"{name}:")
    return "\n".join(lines) + "\n"

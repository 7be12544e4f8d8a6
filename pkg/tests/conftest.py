"""
Общие фикстуры тестов: корпус программ, сборка и генератор случайных программ
"""

import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st
from loguru import logger

from src.solver.solver_manager import SolverManager
from src.symbolic.concolic_engine import run_concolic
from src.vm.assembler import assemble

ROOT = Path(__file__).resolve().parent.parent
CORPUS_DIR = ROOT / "corpus"
FIXTURES_DIR = Path(__file__).resolve().parent / "fixtures"

SAMPLES = ("listing1", "cti_goto", "cti_assert", "loop_sum", "nested_calls")

_ALU = ("add", "sub", "mul", "and", "or", "xor", "shl", "shr")
_JUMPS = ("jeq", "jne", "jlt", "jle", "jgt", "jge", "jlts", "jles", "jgts", "jges")
# Регистры r0..r3 случайных программ
_REGS = 4


@pytest.fixture(autouse=True)
def quiet_logger():
    """Без обработчиков loguru, чтобы вывод тестов не зависел от stderr"""
    logger.remove()
    yield
    logger.remove()


def program_path(name: str) -> Path:
    return CORPUS_DIR / "programs" / f"{name}.asm"


def seed_path(name: str) -> Path:
    return CORPUS_DIR / "seeds" / f"{name}.bin"


def load_sample(name: str):
    program = assemble(program_path(name).read_text(encoding="utf-8"))
    return program, seed_path(name).read_bytes()


@pytest.fixture
def sample():
    """Фабрика: имя примера -> (Program, seed)"""
    return load_sample


@pytest.fixture
def listing1():
    return load_sample("listing1")


@pytest.fixture
def listing1_predicate(listing1):
    program, seed = listing1
    return run_concolic(program, seed)


@pytest.fixture
def solver():
    return SolverManager({"timeout": 30})


@pytest.fixture
def fake_solver_command():
    """Командная строка поддельного решателя для заданного сценария"""
    def command(scenario: str, *extra: str):
        return [sys.executable, str(FIXTURES_DIR / "fake_solver.py"), scenario, *extra]
    return command


RANDOM_HELPER = "helper"


@st.composite
def random_programs(draw, max_instructions: int = 30):
    """
    Случайная завершающаяся программа

    1-2 входных байта, тело main из арифметики, констант, условных
    переходов только вперед, дальних jmp вперед и вызовов helper; в конце
    halt. Необязательная функция helper устроена так же, но вместо jmp
    может досрочно выполнить ret, в том числе внутри области ветвления.
    helper никого не вызывает, поэтому программа всегда завершается.
    """
    input_length = draw(st.integers(min_value=1, max_value=2))
    helper_length = draw(st.integers(min_value=0, max_value=8))
    # Команды input, halt и завершающий ret функции
    fixed = _REGS + 1 + (helper_length + 1 if helper_length else 0)
    body_length = draw(st.integers(min_value=1, max_value=max_instructions - fixed))
    reg = st.integers(min_value=0, max_value=_REGS - 1).map(lambda r: f"r{r}")

    def statement(kinds, position: int, length: int, prefix: str):
        kind = draw(st.sampled_from(kinds))
        if kind == "alu":
            op = draw(st.sampled_from(_ALU))
            return f"    {op} {draw(reg)}, {draw(reg)}, {draw(reg)}"
        if kind == "const":
            value = draw(st.integers(min_value=0, max_value=0xFF))
            return f"    const {draw(reg)}, {value:#x}"
        if kind == "call":
            return f"    call {RANDOM_HELPER}"
        if kind == "ret":
            return "    ret"
        target = draw(st.integers(min_value=position + 1, max_value=length))
        if kind == "jmp":
            return f"    jmp {prefix}{target}"
        op = draw(st.sampled_from(_JUMPS))
        return f"    {op} {draw(reg)}, {draw(reg)}, {prefix}{target}"

    main_kinds = ("alu", "alu", "const", "jump", "jump", "jmp")
    if helper_length:
        main_kinds += ("call", "call")

    lines = [f".input {input_length}", "main:"]
    for register in range(_REGS):
        index = draw(st.integers(min_value=0, max_value=input_length - 1))
        lines.append(f"    input r{register}, {index}")
    for position in range(body_length):
        lines.append(f"s{position}:")
        lines.append(statement(main_kinds, position, body_length, "s"))
    lines.append(f"s{body_length}:")
    lines.append("    halt")

    if helper_length:
        lines.append(f"{RANDOM_HELPER}:")
        for position in range(helper_length):
            lines.append(f"h{position}:")
            lines.append(statement(("alu", "const", "jump", "jump", "ret"), position, helper_length, "h"))
        lines.append(f"h{helper_length}:")
        lines.append("    ret")

    source = "\n".join(lines) + "\n"
    seed = bytes(draw(st.lists(st.integers(0, 0xFF), min_size=input_length,
                               max_size=input_length)))
    return assemble(source), seed


LONG_LOOP_SOURCE = """\
.input 1
main:
    input r0, 0
    const r1, 0
    const r2, 1500
    const r3, 0
    const r4, 1
loop:
    add r1, r1, r0
    sub r2, r2, r4
    jne r2, r3, loop
    const r5, 12000
    jeq r1, r5, done
    const r6, 1
done:
    halt
"""

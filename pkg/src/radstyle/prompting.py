"""K-shot dialogue construction for serialization-to-report generation.

A prompt chain is a system message, K user/assistant example pairs, and a
final user message carrying the serialization to be rewritten. The exact
system and instruction strings matter: generated reports are sensitive to
them, so they are module constants rather than configuration.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .errors import InputError

SYSTEM_PROMPT = ("You are a helpful assistant that generates chest x-ray "
                 "reports from key words.")
INSTRUCTION = "Generate a chest x-ray report from the following key words:"


class Role(Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class PromptMessage:
    role: Role
    content: str


@dataclass(frozen=True)
class StylePair:
    """One in-context example: a serialization and the report written
    from it."""

    serialization: str
    report: str


@dataclass(frozen=True)
class PromptChain:
    """Validated message list. ``k`` is the number of example pairs;
    ``bare`` marks the instruction-free zero-shot variant (a single user
    message holding only the serialization)."""

    messages: tuple[PromptMessage, ...]
    k: int
    bare: bool = False

    def __post_init__(self) -> None:
        if self.bare:
            if self.k != 0:
                raise InputError("bare chains cannot carry examples")
            if (len(self.messages) != 1
                    or self.messages[0].role is not Role.USER):
                raise InputError("bare chains hold exactly one user message")
            return
        expected = 2 + 2 * self.k
        if len(self.messages) != expected:
            raise InputError(
                f"chain with k={self.k} needs {expected} messages, "
                f"got {len(self.messages)}")
        if self.messages[0].role is not Role.SYSTEM:
            raise InputError("first message must be the system message")
        for i, msg in enumerate(self.messages[1:], start=1):
            want = Role.USER if i % 2 == 1 else Role.ASSISTANT
            if msg.role is not want:
                raise InputError(
                    f"message {i} must have role {want.value}, "
                    f"got {msg.role.value}")


def _user_content(serialization: str) -> str:
    return f"{INSTRUCTION}\n{serialization}"


def build_prompt(examples: Sequence[StylePair], eval_serialization: str,
                 bare_zero_shot: bool = False) -> PromptChain:
    """Assemble the dialogue for one evaluation serialization.

    ``bare_zero_shot`` drops the system message and instruction and sends
    the serialization alone; it requires an empty example list.
    """
    if not eval_serialization.strip():
        raise InputError("evaluation serialization is empty")
    for i, pair in enumerate(examples):
        if not pair.serialization.strip():
            raise InputError(f"example {i}: serialization is empty")
        if not pair.report.strip():
            raise InputError(f"example {i}: report is empty")
    if bare_zero_shot:
        if examples:
            raise InputError("bare zero-shot takes no examples")
        return PromptChain(
            (PromptMessage(Role.USER, eval_serialization),), k=0, bare=True)
    messages = [PromptMessage(Role.SYSTEM, SYSTEM_PROMPT)]
    for pair in examples:
        messages.append(PromptMessage(Role.USER, _user_content(pair.serialization)))
        messages.append(PromptMessage(Role.ASSISTANT, pair.report))
    messages.append(PromptMessage(Role.USER, _user_content(eval_serialization)))
    return PromptChain(tuple(messages), k=len(examples))


def select_examples(pool: Sequence[StylePair], k: int,
                    seed: int) -> list[StylePair]:
    """Draw k distinct examples from the pool, reproducibly for a seed."""
    if k < 0:
        raise InputError(f"k must be non-negative, got {k}")
    if k > len(pool):
        raise InputError(f"k={k} exceeds pool size {len(pool)}")
    return random.Random(seed).sample(list(pool), k)


def derive_selection_seed(seed: int, k: int, study_id: str) -> int:
    """Stable per-study seed so example draws do not depend on iteration
    order or on runs for other studies."""
    digest = hashlib.sha256(f"{seed}:{k}:{study_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def wire_messages(chain: PromptChain) -> list[dict[str, str]]:
    """Chat-API message payload: [{"role": ..., "content": ...}, ...]."""
    return [{"role": m.role.value, "content": m.content}
            for m in chain.messages]


def chain_from_wire(messages: Sequence[dict]) -> PromptChain:
    """Parse a wire-format message list back into a validated chain."""
    parsed = []
    for i, raw in enumerate(messages):
        if not isinstance(raw, dict):
            raise InputError(f"message {i} is not an object")
        role, content = raw.get("role"), raw.get("content")
        try:
            parsed.append(PromptMessage(Role(role), content))
        except ValueError:
            raise InputError(f"message {i}: unknown role {role!r}") from None
        if not isinstance(content, str):
            raise InputError(f"message {i}: content must be a string")
    if len(parsed) == 1 and parsed[0].role is Role.USER:
        return PromptChain(tuple(parsed), k=0, bare=True)
    k = (len(parsed) - 2) // 2
    return PromptChain(tuple(parsed), k=k)

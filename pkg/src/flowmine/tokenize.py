"""Message vocabulary, trace windowing, and MLM mask application.

The vocabulary maps each unique message to a dense token id. Ids 0..2 are
the specials PAD, MASK, UNK; message tokens start at 3 and are assigned
in order of first appearance across the trace set, which makes the
vocabulary a pure function of the traces.

Long traces are cut into overlapping windows so every training sequence
fits the model; windows keep contiguous runs of the original trace, which
preserves adjacency between causally chained messages.

Masking follows the usual masked-LM recipe: each real token is selected
independently with ``mask_rate``; a selected token is replaced by MASK,
by a random message token, or kept, per ``scheme_split`` (a literal
all-MASK scheme is ``(1.0, 0.0, 0.0)``). Labels carry the original id at
selected positions and IGNORE_LABEL elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .flows import Message
from .rng import SplitMix64, derive_seed
from .tracegen import Trace, TraceSet

PAD_ID = 0
MASK_ID = 1
UNK_ID = 2
NUM_SPECIALS = 3
SPECIAL_NAMES = {PAD_ID: "<PAD>", MASK_ID: "<MASK>", UNK_ID: "<UNK>"}

# Label sentinel for unselected positions; outside the token-id range.
IGNORE_LABEL = -1


class MessageVocab:
    """Bijection between messages and dense token ids (specials reserved)."""

    def __init__(self, messages_in_order: list[Message]):
        self.id_of: dict[Message, int] = {}
        self.message_of: dict[int, Message] = {}
        for offset, msg in enumerate(messages_in_order):
            if msg in self.id_of:
                raise ValueError(f"duplicate message {msg}")
            token = NUM_SPECIALS + offset
            self.id_of[msg] = token
            self.message_of[token] = msg

    @property
    def size(self) -> int:
        return NUM_SPECIALS + len(self.id_of)

    def encode(self, msg: Message) -> int:
        return self.id_of.get(msg, UNK_ID)

    def message_ids(self) -> range:
        return range(NUM_SPECIALS, self.size)

    def encode_trace(self, trace: Trace) -> list[int]:
        """Linearize a trace: step-sets flatten in ascending token id."""
        out: list[int] = []
        for step in trace.steps:
            out.extend(sorted(self.encode(m) for m in step))
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MessageVocab):
            return NotImplemented
        return self.id_of == other.id_of

    def __len__(self) -> int:
        return self.size


def build_vocab(ts: TraceSet) -> MessageVocab:
    """Extract the unique-message vocabulary in first-appearance order."""
    seen: dict[Message, None] = {}
    for trace in ts.traces:
        for step in trace.steps:
            for msg in sorted(step, key=str):
                seen.setdefault(msg, None)
    if not seen:
        raise DataError("cannot build a vocabulary from an empty trace set")
    return MessageVocab(list(seen))


def render_vocab_file(vocab: MessageVocab) -> str:
    lines = [f"{i}\t{SPECIAL_NAMES[i]}" for i in range(NUM_SPECIALS)]
    lines += [f"{i}\t{vocab.message_of[i]}" for i in sorted(vocab.message_of)]
    return "\n".join(lines) + "\n"


def parse_vocab_file(text: str) -> MessageVocab:
    messages: list[Message] = []
    expected = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        try:
            id_text, name = line.split("\t")
            token = int(id_text)
        except ValueError as exc:
            raise DataError(f"vocab file line {lineno}: {exc}") from exc
        if token != expected:
            raise DataError(f"vocab file line {lineno}: ids must be dense, expected {expected}")
        if token < NUM_SPECIALS:
            if name != SPECIAL_NAMES[token]:
                raise DataError(f"vocab file line {lineno}: special {token} must be {SPECIAL_NAMES[token]}")
        else:
            try:
                messages.append(Message.parse(name))
            except ValueError as exc:
                raise DataError(f"vocab file line {lineno}: {exc}") from exc
        expected += 1
    if expected < NUM_SPECIALS:
        raise DataError("vocab file is missing the special tokens")
    return MessageVocab(messages)


def window_traces(ts: TraceSet, vocab: MessageVocab, max_len: int, stride: int) -> list[list[int]]:
    """Cut linearized traces into overlapping windows of length <= max_len.

    A trace shorter than ``max_len`` yields itself as the only window;
    otherwise windows start at offsets 0, stride, 2*stride, ... until the
    trace tail is covered. Output order is trace order, then offset order.
    """
    if max_len < 2:
        raise ValueError("max_len must be >= 2")
    if not 1 <= stride <= max_len:
        raise ValueError("stride must be in [1, max_len]")
    out: list[list[int]] = []
    for trace in ts.traces:
        ids = vocab.encode_trace(trace)
        if len(ids) <= max_len:
            out.append(ids)
            continue
        count = int(np.ceil((len(ids) - max_len) / stride)) + 1
        for w in range(count):
            offset = w * stride
            out.append(ids[offset : offset + max_len])
    return out


def window_count(lengths: list[int], max_len: int, stride: int) -> int:
    """Closed-form window count; independent check for window_traces."""
    total = 0
    for n in lengths:
        total += 1 if n <= max_len else int(np.ceil((n - max_len) / stride)) + 1
    return total


@dataclass(frozen=True)
class MaskConfig:
    mask_rate: float = 0.30
    scheme_split: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.mask_rate <= 1.0:
            raise ValueError("mask_rate must be in [0, 1]")
        if len(self.scheme_split) != 3 or any(p < 0 for p in self.scheme_split):
            raise ValueError("scheme_split must be three non-negative probabilities")
        if abs(sum(self.scheme_split) - 1.0) > 1e-9:
            raise ValueError("scheme_split must sum to 1")


@dataclass(frozen=True)
class TrainSequence:
    """Fixed-length masked training sequence.

    attention_flags is 1 at real-token positions and 0 at PAD; labels hold
    the pre-masking token id at selected positions, IGNORE_LABEL elsewhere.
    """

    input_ids: np.ndarray
    attention_flags: np.ndarray
    labels: np.ndarray


def mask_batch(
    seqs: list[list[int]],
    vocab: MessageVocab,
    mc: MaskConfig,
    seq_len: int,
) -> list[TrainSequence]:
    """Pad sequences to ``seq_len`` and apply the masking scheme.

    Deterministic given ``mc.seed``: sequence i consumes its own derived
    SplitMix64 stream, so the result does not depend on batch grouping.
    """
    message_ids = list(vocab.message_ids())
    p_mask, p_random, _p_keep = mc.scheme_split
    out: list[TrainSequence] = []
    for i, seq in enumerate(seqs):
        if len(seq) > seq_len:
            raise ValueError(f"sequence {i} longer than seq_len ({len(seq)} > {seq_len})")
        rng = SplitMix64(derive_seed(mc.seed, i))
        input_ids = np.full(seq_len, PAD_ID, dtype=np.int64)
        flags = np.zeros(seq_len, dtype=np.int64)
        labels = np.full(seq_len, IGNORE_LABEL, dtype=np.int64)
        for pos, token in enumerate(seq):
            input_ids[pos] = token
            flags[pos] = 1
            if rng.uniform() >= mc.mask_rate:
                continue
            labels[pos] = token
            scheme = rng.uniform()
            if scheme < p_mask:
                input_ids[pos] = MASK_ID
            elif scheme < p_mask + p_random:
                input_ids[pos] = message_ids[rng.randbelow(len(message_ids))]
            # else: keep the original token
        out.append(TrainSequence(input_ids=input_ids, attention_flags=flags, labels=labels))
    return out

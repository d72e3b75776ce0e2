"""Error-fraction cost functions evaluated from measurement bit streams.

The conventional cost is the fraction of shots that leave the ground state.
The restless cost is the fraction of consecutive shot pairs whose outcomes
match (a net bit flip should alternate them); the first shot contributes no
pair but still counts in the divisor, so an all-equal stream of N shots
scores (N - 1) / N.  The streaming accumulator reproduces the batch result
chunk by chunk, carrying one boundary bit, as a real-time correlator would.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .simulator import Mode, ShotStream, read_stream


@dataclass(frozen=True)
class CostSample:
    """An error fraction with its acquisition metadata."""

    epsilon: float
    n_shots: int
    n_cliffords: int
    mode: Mode

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")


def epsilon_conventional(stream: ShotStream) -> CostSample:
    """Fraction of non-zero outcomes."""
    if stream.mode is not Mode.CONVENTIONAL:
        raise ValueError("stream is not conventional")
    bits = np.asarray(stream.bits)
    if bits.size == 0:
        raise ValueError("empty stream")
    errors = int(np.count_nonzero(bits))
    return CostSample(errors / bits.size, bits.size, stream.n_cliffords, stream.mode)


def epsilon_restless(stream: ShotStream) -> CostSample:
    """Fraction of consecutive outcome pairs that failed to alternate."""
    if stream.mode is not Mode.RESTLESS:
        raise ValueError("stream is not restless")
    bits = np.asarray(stream.bits)
    if bits.size < 2:
        raise ValueError("restless cost needs at least 2 shots")
    same = int(np.count_nonzero(bits[1:] == bits[:-1]))
    return CostSample(same / bits.size, bits.size, stream.n_cliffords, stream.mode)


def epsilon_for_mode(stream: ShotStream) -> CostSample:
    if stream.mode is Mode.CONVENTIONAL:
        return epsilon_conventional(stream)
    return epsilon_restless(stream)


class StreamingCost:
    """Chunked accumulator equal to the batch cost on the concatenated stream.

    Chunks must arrive in order (``chunk_index`` guards against reordering).
    Accumulators covering adjacent spans may be merged in stream order.
    """

    def __init__(self, mode: Mode, n_cliffords: int, start_chunk: int = 0):
        self.mode = Mode(mode)
        self.n_cliffords = n_cliffords
        self._start_chunk = start_chunk
        self._next_chunk = start_chunk
        self._count = 0
        self._n = 0
        self._first: int | None = None
        self._last: int | None = None

    def feed(self, bits, chunk_index: int | None = None) -> None:
        if chunk_index is not None:
            if chunk_index != self._next_chunk:
                raise ValueError(
                    f"chunk {chunk_index} arrived out of order (expected {self._next_chunk})"
                )
        self._next_chunk += 1
        chunk = np.asarray(bits, dtype=np.uint8)
        if chunk.size == 0:
            return
        if self.mode is Mode.CONVENTIONAL:
            self._count += int(np.count_nonzero(chunk))
        else:
            if self._last is not None and int(chunk[0]) == self._last:
                self._count += 1
            self._count += int(np.count_nonzero(chunk[1:] == chunk[:-1]))
        if self._first is None:
            self._first = int(chunk[0])
        self._last = int(chunk[-1])
        self._n += chunk.size

    def merge(self, other: "StreamingCost") -> None:
        """Append a later accumulator of the same stream."""
        if other.mode is not self.mode or other.n_cliffords != self.n_cliffords:
            raise ValueError("cannot merge accumulators of different streams")
        if other._start_chunk != self._next_chunk:
            raise ValueError("merge requires stream order")
        self._count += other._count
        if self.mode is Mode.RESTLESS and self._last is not None and other._first is not None:
            if other._first == self._last:
                self._count += 1
        if other._n:
            if self._first is None:
                self._first = other._first
            self._last = other._last
        self._n += other._n
        self._next_chunk = other._next_chunk

    def result(self) -> CostSample:
        if self.mode is Mode.RESTLESS and self._n < 2:
            raise ValueError("restless cost needs at least 2 shots")
        if self._n == 0:
            raise ValueError("empty stream")
        return CostSample(self._count / self._n, self._n, self.n_cliffords, self.mode)


def cost_from_file(path: str | Path) -> CostSample:
    """Evaluate the cost of a packed-bit stream file."""
    stream, _ = read_stream(path)
    return epsilon_for_mode(stream)

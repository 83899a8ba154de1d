"""
Sign pair sources: n -> (sgn w_n(x), sgn w_n(y)) for the families the lab
knows about.

Every source is deterministic and restartable from n = 0 and hands out
contiguous index blocks as int8 arrays. Chebyshev sources position directly;
recurrence sources resume from recorded recurrence states.
"""

import logging
import threading
from abc import ABC, abstractmethod
from typing import Any, Dict, Iterator, Optional, Sequence, Tuple

import numpy as np

from .special_functions import (
    AngleFraction,
    ChebyshevSequence,
    HermitePoint,
    HermiteSequence,
    LaguerreParams,
    LaguerreSequence,
    RecurrenceState,
)

logger = logging.getLogger(__name__)

SignBlock = Tuple[np.ndarray, np.ndarray]


class SignPairSource(ABC):
    """Abstract generator n -> (sigma_x(n), sigma_y(n)) in {-1, 0, +1}^2."""

    family: str = "abstract"

    @abstractmethod
    def sign_block(self, start: int, stop: int) -> SignBlock:
        """Signs for indices start .. stop-1 as two int8 arrays."""

    def metadata(self) -> Dict[str, Any]:
        return {"family": self.family}

    def prepare(self, starts: Sequence[int]) -> None:
        """Make every block start cheaply reachable before concurrent use."""

    def pairs(self, N: int) -> Iterator[Tuple[int, int]]:
        xs, ys = self.sign_block(0, N)
        for sx, sy in zip(xs.tolist(), ys.tolist()):
            yield sx, sy


class RecurrencePairSource(SignPairSource):
    """Two recurrence sequences advanced in lockstep, resumable from checkpoints."""

    def __init__(self):
        self._checkpoints: Dict[int, Tuple[Optional[RecurrenceState], Optional[RecurrenceState]]] = {0: (None, None)}
        self._lock = threading.Lock()

    @abstractmethod
    def _sequences(self, state_x: Optional[RecurrenceState], state_y: Optional[RecurrenceState]):
        """Fresh sequence pair positioned at the given states (None means n = 0)."""

    def _record(self, n: int, seq_x, seq_y) -> None:
        with self._lock:
            self._checkpoints.setdefault(n, (seq_x.state(), seq_y.state()))

    def _resume(self, start: int):
        with self._lock:
            base = max(k for k in self._checkpoints if k <= start)
            states = self._checkpoints[base]
        seq_x, seq_y = self._sequences(*states)
        for _ in range(start - base):
            seq_x.advance()
            seq_y.advance()
        return seq_x, seq_y

    def prepare(self, starts: Sequence[int]) -> None:
        pending = sorted(s for s in set(starts) if s not in self._checkpoints)
        if not pending:
            return
        seq_x, seq_y = self._resume(0)
        n = 0
        for target in pending:
            for _ in range(target - n):
                seq_x.advance()
                seq_y.advance()
            n = target
            self._record(n, seq_x, seq_y)
        logger.debug(f"Recorded {len(pending)} recurrence checkpoints for {self.family}")

    def sign_block(self, start: int, stop: int) -> SignBlock:
        seq_x, seq_y = self._resume(start)
        xs = seq_x.take_signs(stop - start)
        ys = seq_y.take_signs(stop - start)
        self._record(stop, seq_x, seq_y)
        return xs, ys


class HermitePairSource(RecurrencePairSource):
    family = "hermite"

    def __init__(self, x: float, y: float):
        super().__init__()
        self.x = HermitePoint(float(x))
        self.y = HermitePoint(float(y))

    def _sequences(self, state_x, state_y):
        return HermiteSequence(self.x, state_x), HermiteSequence(self.y, state_y)

    def metadata(self) -> Dict[str, Any]:
        return {"family": self.family, "x": self.x.x, "y": self.y.x}


class LaguerrePairSource(RecurrencePairSource):
    family = "laguerre"

    def __init__(self, first: LaguerreParams, second: LaguerreParams):
        super().__init__()
        self.first = first
        self.second = second

    def _sequences(self, state_x, state_y):
        return LaguerreSequence(self.first, state_x), LaguerreSequence(self.second, state_y)

    def metadata(self) -> Dict[str, Any]:
        return {
            "family": self.family, "nu": self.first.nu, "d": self.first.d,
            "r1": self.first.r, "r2": self.second.r,
        }


class ChebyshevPairSource(SignPairSource):
    family = "chebyshev"

    def __init__(self, first: AngleFraction, second: AngleFraction):
        self.first = first
        self.second = second

    def sign_block(self, start: int, stop: int) -> SignBlock:
        count = stop - start
        return (
            ChebyshevSequence(self.first, start).take_signs(count),
            ChebyshevSequence(self.second, start).take_signs(count),
        )

    def metadata(self) -> Dict[str, Any]:
        return {"family": self.family, "a": self.first.label, "b": self.second.label}


class SwappedSource(SignPairSource):
    """The same source with the two points exchanged."""

    def __init__(self, inner: SignPairSource):
        self.inner = inner
        self.family = inner.family

    def prepare(self, starts):
        self.inner.prepare(starts)

    def sign_block(self, start, stop):
        xs, ys = self.inner.sign_block(start, stop)
        return ys, xs


class FlippedSource(SignPairSource):
    """The same source with both signs negated."""

    def __init__(self, inner: SignPairSource):
        self.inner = inner
        self.family = inner.family

    def prepare(self, starts):
        self.inner.prepare(starts)

    def sign_block(self, start, stop):
        xs, ys = self.inner.sign_block(start, stop)
        return -xs, -ys

"""Immutable bit strings and a consuming reader.

Byte packing is MSB-first with zero padding in the final byte; codecs built
on top are prefix-free, so pad bits are never consumed by a decoder.
"""

from __future__ import annotations

from typing import Iterable, Iterator

__all__ = ["Bits", "BitReader", "DecodeError"]


class DecodeError(ValueError):
    """A codeword is truncated or malformed."""


class Bits:
    """An immutable sequence of 0/1 values supporting concatenation."""

    __slots__ = ("_bits",)

    def __init__(self, bits: Iterable[int] = ()):
        data = tuple(int(b) for b in bits)
        for b in data:
            if b not in (0, 1):
                raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "_bits", data)

    @classmethod
    def from01(cls, text: str) -> "Bits":
        return cls(int(c) for c in text)

    def to01(self) -> str:
        return "".join(str(b) for b in self._bits)

    def __len__(self) -> int:
        return len(self._bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self._bits)

    def __getitem__(self, item):
        got = self._bits[item]
        return Bits(got) if isinstance(item, slice) else got

    def __add__(self, other: "Bits") -> "Bits":
        return Bits(self._bits + tuple(other))

    def __eq__(self, other) -> bool:
        return isinstance(other, Bits) and self._bits == other._bits

    def __hash__(self) -> int:
        return hash(self._bits)

    def __repr__(self) -> str:
        return f"Bits('{self.to01()}')"

    def to_bytes(self) -> bytes:
        out = bytearray()
        acc = 0
        for i, b in enumerate(self._bits):
            acc = (acc << 1) | b
            if i % 8 == 7:
                out.append(acc)
                acc = 0
        tail = len(self._bits) % 8
        if tail:
            out.append(acc << (8 - tail))
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes, nbits: int | None = None) -> "Bits":
        if nbits is None:
            nbits = 8 * len(data)
        if nbits > 8 * len(data):
            raise DecodeError("fewer bytes than requested bits")
        return cls(
            (data[i // 8] >> (7 - i % 8)) & 1 for i in range(nbits)
        )


class BitReader:
    """Reads bits off a :class:`Bits` value, tracking the position.

    ``read_bit`` raises :class:`DecodeError` past the end; the arithmetic
    decoder instead uses :meth:`read_padded`, which returns virtual zero
    bits beyond the end (its true consumption is accounted separately).
    """

    def __init__(self, bits: Bits, pos: int = 0):
        self._bits = tuple(bits)
        self.pos = pos

    @property
    def remaining(self) -> int:
        return max(len(self._bits) - self.pos, 0)

    def read_bit(self) -> int:
        if self.pos >= len(self._bits):
            raise DecodeError("bit stream exhausted")
        b = self._bits[self.pos]
        self.pos += 1
        return b

    def read_padded(self, offset: int) -> int:
        i = self.pos + offset
        return self._bits[i] if i < len(self._bits) else 0

    def advance(self, n: int) -> None:
        self.pos += n

    def tail(self) -> Bits:
        return Bits(self._bits[self.pos:])

"""Event-sourced persistence: length-prefixed canonical event envelopes.

Wire frame per record:

    u32 payload length | u32 CRC-32 of payload | payload

where the payload is the canonical byte form of the envelope document. A
torn or checksum-failing *final* frame is a crash artifact — the write was
never acknowledged — and is dropped on open. Anything wrong before the final
frame means the store itself is damaged and the service must not start.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

from .canonical import canonical_bytes, parse_canonical
from .errors import StoreCorrupt

STREAMS = ("party", "asset", "policy", "contract", "escrow", "ledger")


@dataclass(frozen=True)
class EventEnvelope:
    sequence: int  # global, gap-free, starting at 0
    stream: str
    payload: bytes  # canonical bytes of the domain event document
    recorded_at: int

    def __post_init__(self):
        if self.stream not in STREAMS:
            raise ValueError(f"unknown stream {self.stream!r}")

    def event(self) -> dict:
        parsed = parse_canonical(self.payload)
        if not isinstance(parsed, dict):
            raise StoreCorrupt(f"event payload {self.sequence} is not a document")
        return parsed

    def to_document(self) -> dict:
        return {
            "sequence": self.sequence,
            "stream": self.stream,
            "payload": self.payload.decode("utf-8"),
            "recorded_at": self.recorded_at,
        }

    @classmethod
    def from_document(cls, obj: dict) -> EventEnvelope:
        return cls(
            sequence=obj["sequence"],
            stream=obj["stream"],
            payload=obj["payload"].encode("utf-8"),
            recorded_at=obj["recorded_at"],
        )


def make_envelope(sequence: int, stream: str, event: dict, recorded_at: int) -> EventEnvelope:
    return EventEnvelope(
        sequence=sequence,
        stream=stream,
        payload=canonical_bytes(event),
        recorded_at=recorded_at,
    )


def encode_frame(envelope: EventEnvelope) -> bytes:
    payload = canonical_bytes(envelope.to_document())
    return struct.pack(">II", len(payload), zlib.crc32(payload)) + payload


class EventStore:
    """Single-appender store over one file. Reads happen once, at open."""

    def __init__(self, path: str | Path):
        self._path = Path(path)
        self._next_sequence = 0
        self._recovered_partial_tail = False

    @property
    def path(self) -> Path:
        return self._path

    @property
    def next_sequence(self) -> int:
        return self._next_sequence

    @property
    def recovered_partial_tail(self) -> bool:
        return self._recovered_partial_tail

    def read_all(self) -> list[EventEnvelope]:
        """Load every fully persisted envelope; discard a torn final frame."""
        if not self._path.exists():
            self._next_sequence = 0
            return []
        data = self._path.read_bytes()
        envelopes: list[EventEnvelope] = []
        offset = 0
        valid_end = 0
        while offset < len(data):
            header = data[offset : offset + 8]
            if len(header) < 8:
                break  # torn tail: header cut short by a crash
            length, crc = struct.unpack(">II", header)
            payload = data[offset + 8 : offset + 8 + length]
            if len(payload) < length:
                break  # torn tail: payload cut short by a crash
            if zlib.crc32(payload) != crc:
                if offset + 8 + length == len(data):
                    break  # garbled final frame: crash mid-write
                raise StoreCorrupt(f"checksum failure at byte {offset}")
            try:
                tree = parse_canonical(payload)
                envelope = EventEnvelope.from_document(tree)
            except (ValueError, KeyError, TypeError) as exc:
                raise StoreCorrupt(f"unparseable event at byte {offset}: {exc}") from None
            if envelope.sequence != len(envelopes):
                raise StoreCorrupt(
                    f"sequence gap: expected {len(envelopes)}, found {envelope.sequence}"
                )
            envelopes.append(envelope)
            offset += 8 + length
            valid_end = offset
        if valid_end < len(data):
            # drop the torn tail so the next append starts on a frame boundary
            with open(self._path, "r+b") as fh:
                fh.truncate(valid_end)
            self._recovered_partial_tail = True
        self._next_sequence = len(envelopes)
        return envelopes

    def append(self, envelope: EventEnvelope) -> None:
        if envelope.sequence != self._next_sequence:
            raise StoreCorrupt(
                f"append out of order: expected {self._next_sequence}, got {envelope.sequence}"
            )
        self._write(encode_frame(envelope))
        self._next_sequence += 1

    def _write(self, frame: bytes) -> None:
        # single write call so a crash tears at most the final frame
        with open(self._path, "ab") as fh:
            fh.write(frame)
            fh.flush()

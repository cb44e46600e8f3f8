"""Embedded append-only hash-chained ledger.

Single writer, one block per anchored record, no consensus: the chain
structure alone carries the tamper evidence. Each block hashes
``height || prev_hash || block_time || canonical record bytes``; the chain
is persisted as length-prefixed canonical block documents so independent
tooling can re-verify it bit-exactly.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .canonical import canonical_bytes, parse_canonical, sha256
from .contracts import ContractStatus
from .disclosure import AnchorEntry
from .errors import ChainCorrupt, DigestMismatch, UnknownContract

GENESIS_PREV_HASH = "0" * 64

RECORD_STATUS_ANCHOR = "status_anchor"
RECORD_DISPUTE_FLAG = "dispute_flag"


@dataclass(frozen=True)
class ContractRecord:
    contract_id: str
    contract_version: int
    status_at_anchor: ContractStatus
    whole_document_digest: str  # hex SHA-256 of the contract's canonical form
    entries: tuple[AnchorEntry, ...]
    signatures: tuple[tuple[str, str], ...]  # (party_id, signature hex)
    anchored_at: int
    record_kind: str = RECORD_STATUS_ANCHOR

    def to_document(self) -> dict:
        return {
            "contract_id": self.contract_id,
            "contract_version": self.contract_version,
            "status_at_anchor": self.status_at_anchor.value,
            "whole_document_digest": self.whole_document_digest,
            "entries": [e.to_document() for e in self.entries],
            "signatures": {party: sig for party, sig in self.signatures},
            "anchored_at": self.anchored_at,
            "record_kind": self.record_kind,
        }

    @classmethod
    def from_document(cls, obj: dict) -> ContractRecord:
        return cls(
            contract_id=obj["contract_id"],
            contract_version=obj["contract_version"],
            status_at_anchor=ContractStatus(obj["status_at_anchor"]),
            whole_document_digest=obj["whole_document_digest"],
            entries=tuple(AnchorEntry.from_document(e) for e in obj["entries"]),
            signatures=tuple(sorted(obj["signatures"].items())),
            anchored_at=obj["anchored_at"],
            record_kind=obj["record_kind"],
        )


@dataclass(frozen=True)
class LedgerBlock:
    height: int
    prev_hash: str  # hex; all zeros for the genesis block
    records: tuple[ContractRecord, ...]
    block_time: int
    block_hash: str  # hex

    def records_document(self) -> list:
        return [r.to_document() for r in self.records]

    def to_document(self) -> dict:
        return {
            "height": self.height,
            "prev_hash": self.prev_hash,
            "records": self.records_document(),
            "block_time": self.block_time,
            "block_hash": self.block_hash,
        }

    @classmethod
    def from_document(cls, obj: dict) -> LedgerBlock:
        return cls(
            height=obj["height"],
            prev_hash=obj["prev_hash"],
            records=tuple(ContractRecord.from_document(r) for r in obj["records"]),
            block_time=obj["block_time"],
            block_hash=obj["block_hash"],
        )


@dataclass(frozen=True)
class ChainReport:
    ok: bool
    height: int  # number of blocks examined
    corrupt_height: int | None = None
    detail: str = ""

    def to_document(self) -> dict:
        return {
            "ok": self.ok,
            "height": self.height,
            "corrupt_height": self.corrupt_height,
            "detail": self.detail,
        }


def compute_block_hash(
    height: int, prev_hash: str, block_time: int, records_bytes: bytes
) -> str:
    preimage = (
        struct.pack(">Q", height)
        + bytes.fromhex(prev_hash)
        + struct.pack(">Q", block_time)
        + records_bytes
    )
    return sha256(preimage).hex()


class Ledger:
    """In-memory chain with optional file persistence.

    Appends are serialized by a single lock; reads see only fully appended
    blocks. `digest_lookup(contract_id, version)` supplies the live
    contract's canonical digest so stale records are refused.
    """

    def __init__(
        self,
        path: str | Path | None = None,
        *,
        digest_lookup: Callable[[str, int], str | None] | None = None,
    ):
        self._path = Path(path) if path is not None else None
        self._digest_lookup = digest_lookup
        self._blocks: list[LedgerBlock] = []
        self._lock = threading.Lock()
        if self._path is not None and self._path.exists():
            self._load()

    # --- persistence ---

    def _load(self) -> None:
        assert self._path is not None
        data = self._path.read_bytes()
        offset = 0
        blocks = []
        while offset < len(data):
            if offset + 4 > len(data):
                raise ChainCorrupt(f"truncated length prefix at byte {offset}")
            (length,) = struct.unpack(">I", data[offset : offset + 4])
            offset += 4
            if offset + length > len(data):
                raise ChainCorrupt(f"truncated block payload at byte {offset}")
            payload = data[offset : offset + length]
            offset += length
            try:
                tree = parse_canonical(payload)
                block = LedgerBlock.from_document(tree)
            except (ValueError, KeyError, TypeError) as exc:
                raise ChainCorrupt(f"unparseable block at height {len(blocks)}: {exc}") from None
            blocks.append(block)
        self._blocks = blocks

    def _append_to_file(self, block: LedgerBlock) -> None:
        if self._path is None:
            return
        payload = canonical_bytes(block.to_document())
        frame = struct.pack(">I", len(payload)) + payload
        with open(self._path, "ab") as fh:
            fh.write(frame)
            fh.flush()

    def sync_file(self, path: str | Path) -> None:
        """Reconcile an in-memory chain (rebuilt by replay) with the block file.

        The file must be a verified prefix of the replayed chain: shorter is a
        crash artifact (missing blocks are re-appended), anything diverging or
        longer means one of the two histories was tampered with.
        """
        target = Path(path)
        if not target.exists() or target.stat().st_size == 0:
            self._path = target
            for block in self._blocks:
                self._append_to_file(block)
            return
        persisted = Ledger(target)
        report = persisted.verify_chain()
        if not report.ok:
            raise ChainCorrupt(
                f"ledger file corrupt at height {report.corrupt_height}: {report.detail}"
            )
        theirs = persisted.block_hashes()
        mine = self.block_hashes()
        if len(theirs) > len(mine) or theirs != mine[: len(theirs)]:
            raise ChainCorrupt("ledger file diverges from the replayed event history")
        self._path = target
        for block in self._blocks[len(theirs):]:
            self._append_to_file(block)

    # --- queries ---

    @property
    def height(self) -> int:
        return len(self._blocks)

    def blocks(self) -> tuple[LedgerBlock, ...]:
        return tuple(self._blocks)

    def block_hashes(self) -> list[str]:
        return [b.block_hash for b in self._blocks]

    def query_contract(self, contract_id: str) -> list[ContractRecord]:
        """All records for the contract, in block order (full status history)."""
        found = []
        for block in self._blocks:
            for record in block.records:
                if record.contract_id == contract_id:
                    found.append(record)
        return found

    def latest_status_record(self, contract_id: str) -> ContractRecord | None:
        latest = None
        for record in self.query_contract(contract_id):
            if record.record_kind == RECORD_STATUS_ANCHOR:
                latest = record
        return latest

    # --- verification ---

    def verify_chain(self) -> ChainReport:
        """Recompute every block hash and link from block contents."""
        prev = GENESIS_PREV_HASH
        for i, block in enumerate(self._blocks):
            if block.height != i:
                return ChainReport(False, len(self._blocks), i, "height out of sequence")
            if block.prev_hash != prev:
                return ChainReport(False, len(self._blocks), i, "broken parent link")
            try:
                recomputed = compute_block_hash(
                    block.height,
                    block.prev_hash,
                    block.block_time,
                    canonical_bytes(block.records_document()),
                )
            except (ChainCorrupt, ValueError) as exc:
                return ChainReport(False, len(self._blocks), i, f"unhashable block: {exc}")
            if recomputed != block.block_hash:
                return ChainReport(False, len(self._blocks), i, "block hash mismatch")
            prev = block.block_hash
        return ChainReport(True, len(self._blocks))

    # --- append ---

    def append_record(self, record: ContractRecord, *, block_time: int) -> LedgerBlock:
        with self._lock:
            if self._digest_lookup is not None:
                live = self._digest_lookup(record.contract_id, record.contract_version)
                if live is None:
                    raise UnknownContract(
                        f"record references unknown contract {record.contract_id!r}"
                    )
                if live != record.whole_document_digest:
                    raise DigestMismatch(
                        "record digest does not match the contract's canonical form"
                    )
            report = self.verify_chain()
            if not report.ok:
                raise ChainCorrupt(
                    f"refusing to append to corrupt chain (height {report.corrupt_height})"
                )
            height = len(self._blocks)
            prev = self._blocks[-1].block_hash if self._blocks else GENESIS_PREV_HASH
            records = (record,)
            records_bytes = canonical_bytes([r.to_document() for r in records])
            block = LedgerBlock(
                height=height,
                prev_hash=prev,
                records=records,
                block_time=block_time,
                block_hash=compute_block_hash(height, prev, block_time, records_bytes),
            )
            self._append_to_file(block)
            self._blocks.append(block)
            return block

"""datapact: a trusted data brokerage engine.

Providers list data assets under typed sharing policies; consumers discover
them through policy-respecting search; the two negotiate a machine-processable
contract through a turn-taking lifecycle; agreed contracts are anchored on an
append-only hash-chained ledger with per-field selective disclosure; and
delivery is gated on escrowed payment with a dispute bypass for
non-cooperating providers.
"""

from .broker import AccessToken, Broker, TokenStatus
from .catalog import Catalog, CatalogEntry, SearchQuery
from .contracts import (
    Contract,
    ContractEngine,
    ContractStatus,
    NegotiationAction,
    NegotiationEvent,
    ProposalDiff,
    TRANSITION_TABLE,
    ValidityReport,
)
from .disclosure import AnchorEntry, Disclosure, build_anchor_payload, verify_anchor_entry
from .escrow import DisputeFlag, EscrowBank, EscrowHold, HoldState, PaymentProof
from .ledger import ChainReport, ContractRecord, Ledger, LedgerBlock
from .model import (
    DataAsset,
    Party,
    PartyRole,
    Policy,
    PolicyCategory,
    Term,
    TermKind,
    UsageAction,
    VisibilityRule,
)
from .policy import (
    ConsistencyReport,
    check_policy_consistency,
    define_policy,
    evaluate_visibility,
)
from .vocabulary import TermVocabulary, load_vocabulary

__version__ = "0.1.0"

__all__ = [
    "AccessToken",
    "AnchorEntry",
    "Broker",
    "Catalog",
    "CatalogEntry",
    "ChainReport",
    "ConsistencyReport",
    "Contract",
    "ContractEngine",
    "ContractRecord",
    "ContractStatus",
    "DataAsset",
    "Disclosure",
    "DisputeFlag",
    "EscrowBank",
    "EscrowHold",
    "HoldState",
    "Ledger",
    "LedgerBlock",
    "NegotiationAction",
    "NegotiationEvent",
    "Party",
    "PartyRole",
    "PaymentProof",
    "Policy",
    "PolicyCategory",
    "ProposalDiff",
    "SearchQuery",
    "TRANSITION_TABLE",
    "Term",
    "TermKind",
    "TermVocabulary",
    "TokenStatus",
    "UsageAction",
    "ValidityReport",
    "VisibilityRule",
    "build_anchor_payload",
    "check_policy_consistency",
    "define_policy",
    "evaluate_visibility",
    "load_vocabulary",
    "verify_anchor_entry",
]

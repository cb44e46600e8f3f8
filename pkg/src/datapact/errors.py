"""Error types shared across the brokerage engine.

Every error carries a stable machine-readable ``code`` so the API and CLI can
surface failures without string matching. Codes are snake_case and frozen;
adding a new error means adding a new class.
"""

from __future__ import annotations


class BrokerError(Exception):
    """Base class for all domain errors raised by the engine."""

    code = "broker_error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# --- policy model ---


class VocabularyViolation(BrokerError):
    code = "vocabulary_violation"


class ConflictingTerms(BrokerError):
    code = "conflicting_terms"


class MissingPrivacyTerm(BrokerError):
    code = "missing_privacy_term"


class UnknownParty(BrokerError):
    code = "unknown_party"


# --- canonical form ---


class NonCanonicalizable(BrokerError):
    code = "non_canonicalizable"


# --- contract engine ---


class UnknownAsset(BrokerError):
    code = "unknown_asset"


class UnknownContract(BrokerError):
    code = "unknown_contract"


class VisibilityDenied(BrokerError):
    code = "visibility_denied"


class SelfDealing(BrokerError):
    code = "self_dealing"


class OutOfTurn(BrokerError):
    code = "out_of_turn"


class WrongStatus(BrokerError):
    code = "wrong_status"


class TerminalStatus(WrongStatus):
    """Raised for any mutation of a Rejected/Expired/Terminated contract.

    Subclass of WrongStatus: a terminal contract is the strongest form of
    being in the wrong status, and callers checking either class must accept
    the terminal case.
    """

    code = "terminal_status"


class NonNegotiableKey(BrokerError):
    code = "non_negotiable_key"


class NotAParty(BrokerError):
    code = "not_a_party"


class BadSignature(BrokerError):
    code = "bad_signature"


class MissingSignature(BrokerError):
    code = "missing_signature"


class PaymentIncomplete(BrokerError):
    code = "payment_incomplete"


class VersionConflict(BrokerError):
    code = "version_conflict"


# --- ledger ---


class DigestMismatch(BrokerError):
    code = "digest_mismatch"


class ChainCorrupt(BrokerError):
    code = "chain_corrupt"


# --- catalog ---


class DuplicateAsset(BrokerError):
    code = "duplicate_asset"


class InconsistentPolicy(BrokerError):
    code = "inconsistent_policy"


# --- escrow ---


class InsufficientFunds(BrokerError):
    code = "insufficient_funds"


class NotTheConsumer(BrokerError):
    code = "not_the_consumer"


class WrongParty(BrokerError):
    code = "wrong_party"


class WrongState(BrokerError):
    code = "wrong_state"


class TooEarly(BrokerError):
    code = "too_early"


class BadProof(BrokerError):
    code = "bad_proof"


class UnknownHold(BrokerError):
    code = "unknown_hold"


# --- broker service ---


class ConfigInvalid(BrokerError):
    code = "config_invalid"


class StoreCorrupt(BrokerError):
    code = "store_corrupt"


class Unauthenticated(BrokerError):
    code = "unauthenticated"


class Forbidden(BrokerError):
    code = "forbidden"


class UnknownToken(BrokerError):
    code = "unknown_token"

"""Ed25519 signing. One signature primitive, fixed project-wide.

Keys travel as 32-byte hex strings: parties register a public key, the
directory keeps the private key (simulated custody). Signatures are detached,
64 bytes, hex-encoded wherever they are stored.
"""

from __future__ import annotations

from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)


@dataclass(frozen=True)
class KeyPair:
    private_hex: str
    public_hex: str


def generate_keypair(seed: bytes | None = None) -> KeyPair:
    """Fresh keypair; a 32-byte seed makes generation deterministic."""
    if seed is None:
        key = Ed25519PrivateKey.generate()
    else:
        if len(seed) != 32:
            raise ValueError("seed must be exactly 32 bytes")
        key = Ed25519PrivateKey.from_private_bytes(seed)
    private = key.private_bytes(
        serialization.Encoding.Raw,
        serialization.PrivateFormat.Raw,
        serialization.NoEncryption(),
    )
    public = key.public_key().public_bytes(
        serialization.Encoding.Raw, serialization.PublicFormat.Raw
    )
    return KeyPair(private_hex=private.hex(), public_hex=public.hex())


def sign(private_hex: str, message: bytes) -> str:
    key = Ed25519PrivateKey.from_private_bytes(bytes.fromhex(private_hex))
    return key.sign(message).hex()


def verify(public_hex: str, signature_hex: str, message: bytes) -> bool:
    try:
        key = Ed25519PublicKey.from_public_bytes(bytes.fromhex(public_hex))
        key.verify(bytes.fromhex(signature_hex), message)
        return True
    except (InvalidSignature, ValueError):
        return False

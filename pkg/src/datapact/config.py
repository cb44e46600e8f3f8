"""Service configuration (TOML)."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigInvalid

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_LISTEN = "127.0.0.1:8700"


@dataclass(frozen=True)
class BrokerConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8700
    data_dir: Path = field(default_factory=lambda: Path("./data"))
    bypass_timeout: int = 72 * 3600
    payment_cancel_timeout: int = 7 * 86400
    disclosure_rules_path: Path | None = None
    vocabulary_path: Path | None = None
    admin_api_keys: tuple[str, ...] = ()


def _parse_listen(listen: str) -> tuple[str, int]:
    host, sep, port = listen.rpartition(":")
    if not sep or not host:
        raise ConfigInvalid(f"listen must be host:port, got {listen!r}")
    try:
        port_num = int(port)
    except ValueError:
        raise ConfigInvalid(f"listen port must be an integer, got {port!r}") from None
    if not 0 < port_num < 65536:
        raise ConfigInvalid(f"listen port out of range: {port_num}")
    return host, port_num


def load_config(path: str | Path) -> BrokerConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text("utf-8"))
    except FileNotFoundError:
        raise ConfigInvalid(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid(f"config does not parse: {exc}") from None

    known = {
        "listen",
        "data_dir",
        "bypass_timeout_seconds",
        "payment_cancel_timeout_seconds",
        "disclosure_rules",
        "vocabulary",
        "admin_api_keys",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")

    host, port = _parse_listen(raw.get("listen", DEFAULT_LISTEN))
    base = path.parent

    def _resolve(key: str) -> Path | None:
        value = raw.get(key)
        if value is None:
            return None
        candidate = Path(value)
        return candidate if candidate.is_absolute() else base / candidate

    for key in ("bypass_timeout_seconds", "payment_cancel_timeout_seconds"):
        if key in raw and (not isinstance(raw[key], int) or raw[key] <= 0):
            raise ConfigInvalid(f"{key} must be a positive integer")
    keys = raw.get("admin_api_keys", [])
    if not isinstance(keys, list) or not all(isinstance(k, str) for k in keys):
        raise ConfigInvalid("admin_api_keys must be a list of strings")

    data_dir = _resolve("data_dir") or (base / "data")
    return BrokerConfig(
        listen_host=host,
        listen_port=port,
        data_dir=data_dir,
        bypass_timeout=raw.get("bypass_timeout_seconds", 72 * 3600),
        payment_cancel_timeout=raw.get("payment_cancel_timeout_seconds", 7 * 86400),
        disclosure_rules_path=_resolve("disclosure_rules"),
        vocabulary_path=_resolve("vocabulary"),
        admin_api_keys=tuple(keys),
    )

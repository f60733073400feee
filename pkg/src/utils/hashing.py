"""Stable digests of configuration records"""
import hashlib
import json
from typing import Any


def canonical_json(record: Any) -> str:
    return json.dumps(record, sort_keys=True, separators=(',', ':'))


def config_digest(record: Any) -> bytes:
    """SHA-256 over the canonical JSON form of a config record"""
    return hashlib.sha256(canonical_json(record).encode('utf-8')).digest()


def digest_hex(record: Any) -> str:
    return config_digest(record).hex()

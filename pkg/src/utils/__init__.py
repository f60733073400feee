from .io import atomic_write_bytes, atomic_write_text, ensure_run_dir
from .hashing import canonical_json, config_digest, digest_hex
from .seeding import rng_for
from .workers import worker_count, ordered_map
from .tables import table_csv, write_table
from .log import setup_logging

__all__ = [
    'atomic_write_bytes', 'atomic_write_text', 'ensure_run_dir',
    'canonical_json', 'config_digest', 'digest_hex', 'rng_for', 'worker_count', 'ordered_map',
    'setup_logging', 'table_csv', 'write_table',
]

"""graphatlas: a disk-backed engine for interactive exploration of very
large graphs.

Preprocessing draws the graph once (partition, lay out, pack, index) into an
immutable store; a query server then answers viewport window queries,
abstraction-level queries, and keyword search against it.

Submodules are imported explicitly (`graphatlas.pipeline`, `graphatlas.store`,
...); this package root stays import-light so the server process does not pay
for the compiled layout kernel.
"""

__version__ = "0.1.0"

from .errors import (
    ContractViolation,
    EncodingError,
    GraphAtlasError,
    InvalidParameterError,
    ParseError,
    StoreCorruptError,
    StoreError,
    StoreIOError,
    StoreVersionError,
)

__all__ = [
    "__version__",
    "GraphAtlasError",
    "ParseError",
    "EncodingError",
    "InvalidParameterError",
    "ContractViolation",
    "StoreError",
    "StoreCorruptError",
    "StoreIOError",
    "StoreVersionError",
]

"""bibliorank: author citation networks, weighted PageRank, and rank comparison.

Builds directed weighted author citation graphs from bibliographic records,
ranks authors by PageRank variants and classical bibliometric indicators,
and compares the resulting rankings (Spearman correlation, PCA with varimax
rotation, top-k award-winner coverage).
"""

from bibliorank.errors import (
    BiblioRankError,
    ConfigError,
    DataError,
    DegenerateTeleportError,
    GraphError,
    ParseError,
    StatsError,
)

__version__ = "0.1.0"

__all__ = [
    "BiblioRankError",
    "ConfigError",
    "DataError",
    "DegenerateTeleportError",
    "GraphError",
    "ParseError",
    "StatsError",
    "__version__",
]

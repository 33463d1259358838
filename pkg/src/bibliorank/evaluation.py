"""Top-k coverage of designated award winners per indicator."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from bibliorank.corpus import normalize_author
from bibliorank.errors import ConfigError
from bibliorank.indicators import RankVector, top_k

log = logging.getLogger(__name__)


@dataclass
class WinnerList:
    """Normalized, deduplicated award-winner author keys."""

    authors: list[str]
    provenance: str = ""

    @classmethod
    def from_names(cls, names, provenance: str = "") -> "WinnerList":
        seen = []
        for raw in names:
            key = normalize_author(raw)
            if key not in seen:
                seen.append(key)
        return cls(authors=seen, provenance=provenance)


def load_winners(stream, provenance: str = "") -> WinnerList:
    """Read one raw author name per line; `#` starts a comment."""
    names = []
    for raw in stream:
        line = raw.split("#", 1)[0].strip()
        if line:
            names.append(line)
    return WinnerList.from_names(names, provenance=provenance)


@dataclass
class CoverageResult:
    indicators: list[str]
    ks: list[int]
    counts: dict[tuple[str, int], int]
    missing_winners: list[str] = field(default_factory=list)


def coverage(
    rank_vectors: list[RankVector], winners: WinnerList, ks=(5, 10, 20, 50)
) -> CoverageResult:
    """Count winners inside each indicator's top-k list.

    Winners absent from an indicator's author universe are excluded from
    that count and reported once in ``missing_winners`` (universe taken
    from the first indicator; all indicators share one universe in the
    pipeline).
    """
    ks = list(ks)
    if ks != sorted(ks):
        raise ConfigError("ks must be sorted ascending")
    if not rank_vectors:
        raise ConfigError("no rank vectors given")
    universe = set(rank_vectors[0].ranks)
    missing = sorted(set(winners.authors) - universe)
    if missing:
        log.warning("coverage: %d winner(s) not in the author universe: %s",
                    len(missing), ", ".join(missing[:5]))
    present = [w for w in winners.authors if w in universe]
    counts = {}
    for rv in rank_vectors:
        for k in ks:
            chosen, _ = top_k(rv, k)
            counts[(rv.name, k)] = len(set(chosen) & set(present))
    return CoverageResult(
        indicators=[rv.name for rv in rank_vectors],
        ks=ks,
        counts=counts,
        missing_winners=missing,
    )

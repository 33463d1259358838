"""Classical bibliometric indicators and score-to-rank conversion.

Popularity (total citations received), prestige (citations from highly
cited papers), h-index over internal citation counts, and impact-factor
weighted citation sums, plus the average-rank transform and top-k lists.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from bibliorank.corpus import Corpus
from bibliorank.errors import ConfigError, DataError, ParseError
from bibliorank.network import AuthorCitationGraph

log = logging.getLogger(__name__)


@dataclass
class ScoreVector:
    """A named real-valued score per author; higher is always better here."""

    name: str
    values: dict[str, float]
    higher_is_better: bool = True

    def __post_init__(self):
        for a, v in self.values.items():
            if not math.isfinite(v):
                raise DataError(f"non-finite score {v!r} for author {a!r} in {self.name!r}")


@dataclass
class RankVector:
    """Fractional ranks (1 = best), average ranks on ties."""

    name: str
    ranks: dict[str, float]


@dataclass
class ImpactFactorTable:
    """(venue, year) -> journal impact factor."""

    factors: dict[tuple[str, int], float] = field(default_factory=dict)

    def get(self, venue: str, year: int) -> float | None:
        return self.factors.get((venue, year))


def load_impact_factors(stream) -> ImpactFactorTable:
    """Read a `venue<TAB>year<TAB>impact_factor` table; duplicates error."""
    factors: dict[tuple[str, int], float] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError("expected venue<TAB>year<TAB>impact_factor", line=lineno)
        venue = parts[0]
        try:
            year = int(parts[1])
            impact = float(parts[2])
        except ValueError:
            raise ParseError("invalid year or impact factor", line=lineno) from None
        if impact < 0:
            raise ParseError(f"negative impact factor {impact}", line=lineno)
        key = (venue, year)
        if key in factors:
            raise ParseError(f"duplicate impact-factor key {key!r}", line=lineno)
        factors[key] = impact
    return ImpactFactorTable(factors)


def popularity_scores(g: AuthorCitationGraph) -> ScoreVector:
    """Total citations received per author (in-edge weight sums)."""
    return ScoreVector(
        "popularity",
        {a: float(g.citations_received[i]) for i, a in enumerate(g.authors)},
    )


def internal_citation_counts(corpus: Corpus) -> dict[str, int]:
    """Citations each corpus paper receives from other corpus papers.

    A reference matches a paper on exact (author, year, source, volume,
    page); a missing volume/page only matches a missing one.
    """
    by_key: dict[tuple, list[str]] = {}
    for p in corpus.papers:
        by_key.setdefault(p.match_key(), []).append(p.paper_id)
    counts = {p.paper_id: 0 for p in corpus.papers}
    for p in corpus.papers:
        for ref in p.references:
            for pid in by_key.get(ref.match_key(), ()):
                counts[pid] += 1
    return counts


def highly_cited_papers(
    corpus: Corpus,
    top_fraction: float | None = None,
    min_citations: int | None = None,
    counts: dict[str, int] | None = None,
) -> set[str]:
    """Paper ids clearing the highly-cited threshold.

    Exactly one of ``top_fraction`` (cut at the (1 - f) quantile of
    internal citation counts, ties included, uncited papers never
    qualify) or ``min_citations`` must be given.
    """
    if (top_fraction is None) == (min_citations is None):
        raise ConfigError("give exactly one of top_fraction or min_citations")
    if counts is None:
        counts = internal_citation_counts(corpus)
    if min_citations is not None:
        if min_citations < 1:
            raise ConfigError("min_citations must be >= 1")
        return {pid for pid, c in counts.items() if c >= min_citations}
    if not (0.0 < top_fraction <= 1.0):
        raise ConfigError(f"top_fraction {top_fraction} outside (0, 1]")
    if not counts:
        return set()
    ordered = sorted(counts.values(), reverse=True)
    k = max(1, math.ceil(top_fraction * len(ordered)))
    threshold = max(ordered[k - 1], 1)
    return {pid for pid, c in counts.items() if c >= threshold}


def prestige_scores(
    g: AuthorCitationGraph, corpus: Corpus, highly_cited: set[str]
) -> ScoreVector:
    """Citations each author receives from the highly cited papers."""
    scores = {a: 0.0 for a in g.authors}
    for p in corpus.papers:
        if p.paper_id not in highly_cited:
            continue
        for ref in p.references:
            if ref.first_author in scores:
                scores[ref.first_author] += 1.0
    return ScoreVector("prestige", scores)


def h_index_scores(corpus: Corpus, counts: dict[str, int] | None = None) -> ScoreVector:
    """h-index per publishing author over internal citation counts."""
    if counts is None:
        counts = internal_citation_counts(corpus)
    per_author: dict[str, list[int]] = {}
    for p in corpus.papers:
        per_author.setdefault(p.first_author, []).append(counts[p.paper_id])
    scores = {}
    for author, cites in per_author.items():
        cites.sort(reverse=True)
        h = 0
        for i, c in enumerate(cites, start=1):
            if c >= i:
                h = i
            else:
                break
        scores[author] = float(h)
    return ScoreVector("h_index", scores)


def if_scores(corpus: Corpus, table: ImpactFactorTable) -> tuple[ScoreVector, int]:
    """Sum of citing-paper impact factors per cited author.

    Each reference contributes IF(citing venue, citing year) to its target
    author; missing table entries contribute 0 and are counted.  Returns
    (scores, miss count).
    """
    scores: dict[str, float] = {}
    misses = 0
    for p in corpus.papers:
        impact = table.get(p.source, p.year)
        for ref in p.references:
            if impact is None:
                misses += 1
                scores.setdefault(ref.first_author, 0.0)
            else:
                scores[ref.first_author] = scores.get(ref.first_author, 0.0) + impact
    return ScoreVector("impact_factor", scores), misses


def extend_scores(s: ScoreVector, authors, default: float = 0.0) -> ScoreVector:
    """Restrict/extend a score vector to an author universe (0 when absent)."""
    return ScoreVector(s.name, {a: s.values.get(a, default) for a in authors})


def to_ranks(s: ScoreVector) -> RankVector:
    """Average-rank transform of descending scores (rank 1 = best)."""
    authors = sorted(s.values)
    vals = np.array([s.values[a] for a in authors], dtype=np.float64)
    ranks = rankdata(-vals, method="average")
    return RankVector(s.name, dict(zip(authors, ranks)))


def top_k(sv, k: int) -> tuple[list[str], bool]:
    """First k authors by rank; boundary ties broken lexicographically.

    Accepts a ScoreVector or RankVector.  Returns (authors, flag) where
    the flag reports a lexicographic tie-break at the k boundary.  k > n
    returns all authors with a warning.
    """
    if k < 1:
        raise ConfigError("k must be >= 1")
    if isinstance(sv, RankVector):
        keyed = sorted(sv.ranks.items(), key=lambda kv: (kv[1], kv[0]))
        key_of = dict(keyed)
    else:
        keyed = sorted(sv.values.items(), key=lambda kv: (-kv[1], kv[0]))
        key_of = {a: -v for a, v in keyed}
    n = len(keyed)
    if k > n:
        log.warning("top_k: k=%d exceeds author count %d; returning all", k, n)
        return [a for a, _ in keyed], False
    chosen = [a for a, _ in keyed[:k]]
    boundary_tie = k < n and key_of[keyed[k - 1][0]] == key_of[keyed[k][0]]
    if boundary_tie:
        log.info("top_k: tie at rank %d broken lexicographically", k)
    return chosen, boundary_tie


def dump_indicator(rank_vec: RankVector, score_vec: ScoreVector, stream) -> None:
    """Write `author<TAB>score<TAB>rank`, best rank first."""
    stream.write("author\tscore\trank\n")
    order = sorted(rank_vec.ranks.items(), key=lambda kv: (kv[1], kv[0]))
    for author, rank in order:
        stream.write(f"{author}\t{score_vec.values[author]:.17g}\t{rank:.17g}\n")

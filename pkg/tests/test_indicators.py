import io

import pytest

from bibliorank.corpus import Corpus, filter_with_references, generate_synthetic
from bibliorank.errors import ConfigError, ParseError
from bibliorank.indicators import (
    ImpactFactorTable,
    ScoreVector,
    extend_scores,
    h_index_scores,
    highly_cited_papers,
    if_scores,
    internal_citation_counts,
    load_impact_factors,
    popularity_scores,
    prestige_scores,
    to_ranks,
    top_k,
)
from bibliorank.network import build_graph
from tests.conftest import paper, ref
from tests.oracles import h_index


def _corpus_with_internal_citations():
    """p1..p3 by distinct authors; p4 and p5 cite p1 (p5 twice), p5 cites p2."""
    p1 = paper("p1", "A", 1990, "J A", volume="1", page="10", refs=[ref("Z")])
    p2 = paper("p2", "B", 1991, "J B", refs=[ref("Z")])
    p3 = paper("p3", "C", 1992, "J C", refs=[ref("Z")])
    cite_p1 = ("A", 1990, "J A", "1", "10")
    cite_p2 = ("B", 1991, "J B", None, None)
    p4 = paper("p4", "D", 2000, "J D", refs=[cite_p1])
    p5 = paper("p5", "E", 2001, "J E", refs=[cite_p1, cite_p1, cite_p2])
    return Corpus(papers=[p1, p2, p3, p4, p5])


class TestInternalCitationCounts:
    def test_exact_matching(self):
        counts = internal_citation_counts(_corpus_with_internal_citations())
        assert counts == {"p1": 3, "p2": 1, "p3": 0, "p4": 0, "p5": 0}

    def test_volume_mismatch_blocks_match(self):
        p1 = paper("p1", "A", 1990, "J A", volume="1")
        p2 = paper("p2", "B", 2000, "J B", refs=[("A", 1990, "J A", None, None)])
        counts = internal_citation_counts(Corpus(papers=[p1, p2]))
        assert counts["p1"] == 0  # ref omits volume, paper has one


class TestPopularity:
    def test_counts(self, two_paper_corpus):
        g = build_graph(two_paper_corpus)
        s = popularity_scores(g)
        assert s.values == {"X": 0.0, "Y": 3.0, "Z": 1.0}

    def test_never_cited_publishing_author(self, two_paper_corpus):
        g = build_graph(two_paper_corpus)
        assert popularity_scores(g).values["X"] == 0.0


class TestHighlyCited:
    def test_all_uncited_empty(self):
        c = Corpus(papers=[paper("p1", "A", refs=[ref("Z")])])
        assert highly_cited_papers(c, top_fraction=0.5) == set()

    def test_min_citations_one_is_cited_set(self):
        c = _corpus_with_internal_citations()
        assert highly_cited_papers(c, min_citations=1) == {"p1", "p2"}

    def test_top_fraction_includes_ties_at_cut(self):
        # counts {9,5,5,2,1,0,0,0,0,0}; f=0.2 cuts at the 2nd largest (5)
        # and keeps both papers tied at 5 (hand enumeration)
        counts = {f"p{i}": c for i, c in enumerate([9, 5, 5, 2, 1, 0, 0, 0, 0, 0])}
        c = Corpus(papers=[paper(pid, "A", refs=[ref("Z")]) for pid in counts])
        hc = highly_cited_papers(c, top_fraction=0.2, counts=counts)
        assert hc == {"p0", "p1", "p2"}

    def test_threshold_monotonicity(self):
        c = _corpus_with_internal_citations()
        counts = internal_citation_counts(c)
        prev = None
        for m in (1, 2, 3, 4):
            hc = highly_cited_papers(c, min_citations=m, counts=counts)
            if prev is not None:
                assert hc <= prev
            prev = hc

    def test_invalid_fraction(self):
        c = _corpus_with_internal_citations()
        for f in (0.0, 1.1, -0.5):
            with pytest.raises(ConfigError):
                highly_cited_papers(c, top_fraction=f)
        with pytest.raises(ConfigError):
            highly_cited_papers(c, top_fraction=0.5, min_citations=1)


class TestPrestige:
    def test_empty_hc_all_zero(self):
        c = _corpus_with_internal_citations()
        g = build_graph(c)
        s = prestige_scores(g, c, set())
        assert all(v == 0.0 for v in s.values.values())

    def test_hc_all_papers_equals_popularity(self):
        c = _corpus_with_internal_citations()
        g = build_graph(c)
        prestige = prestige_scores(g, c, {p.paper_id for p in c.papers})
        assert prestige.values == popularity_scores(g).values

    def test_single_highly_cited_paper(self):
        c = Corpus(
            papers=[
                paper("P", "X", refs=[ref("A"), ref("A"), ref("B")]),
                paper("q", "Y", refs=[ref("A")]),
                paper("r", "Z", refs=[ref("B")]),
            ]
        )
        g = build_graph(c)
        s = prestige_scores(g, c, {"P"})
        assert s.values["A"] == 2.0
        assert s.values["B"] == 1.0
        assert s.values["X"] == 0.0

    def test_prestige_le_popularity_pointwise(self):
        c, _ = filter_with_references(generate_synthetic(seed=4, n_papers=400, n_authors=120))
        g = build_graph(c)
        hc = highly_cited_papers(c, top_fraction=0.1)
        prest = prestige_scores(g, c, hc)
        pop = popularity_scores(g)
        assert all(prest.values[a] <= pop.values[a] for a in g.authors)


class TestHIndex:
    def test_oracle_fixture(self):
        # counts {10,8,5,4,3} -> sort-and-scan oracle says 4
        assert h_index([10, 8, 5, 4, 3]) == 4
        counts = {"p0": 10, "p1": 8, "p2": 5, "p3": 4, "p4": 3}
        c = Corpus(papers=[paper(pid, "A", refs=[ref("Z")]) for pid in counts])
        s = h_index_scores(c, counts=counts)
        assert s.values["A"] == 4.0

    def test_zero_and_ones(self):
        assert h_index([0]) == 0
        assert h_index([1, 1, 1]) == 1
        c = Corpus(papers=[paper("p1", "A", refs=[ref("Z")])])
        assert h_index_scores(c, counts={"p1": 0}).values["A"] == 0.0

    def test_matches_oracle_on_synthetic(self):
        c, _ = filter_with_references(generate_synthetic(seed=8, n_papers=300, n_authors=60))
        counts = internal_citation_counts(c)
        s = h_index_scores(c, counts=counts)
        per_author = {}
        for p in c.papers:
            per_author.setdefault(p.first_author, []).append(counts[p.paper_id])
        for author, cites in per_author.items():
            assert s.values[author] == h_index(cites)


class TestIfScores:
    def test_single_citation(self):
        c = Corpus(papers=[paper("p1", "A", 2005, "J", refs=[ref("B")])])
        table = ImpactFactorTable({("J", 2005): 2.5})
        s, misses = if_scores(c, table)
        assert s.values["B"] == 2.5
        assert misses == 0

    def test_missing_venue_counts_miss(self):
        c = Corpus(papers=[paper("p1", "A", 2005, "J", refs=[ref("B")])])
        s, misses = if_scores(c, ImpactFactorTable({}))
        assert s.values["B"] == 0.0
        assert misses == 1

    def test_additivity(self):
        c = Corpus(
            papers=[
                paper("p1", "A", 2005, "J", refs=[ref("B")]),
                paper("p2", "C", 2006, "K", refs=[ref("B")]),
            ]
        )
        table = ImpactFactorTable({("J", 2005): 2.5, ("K", 2006): 1.0})
        s, _ = if_scores(c, table)
        assert s.values["B"] == 3.5

    def test_unit_ifs_equal_popularity(self):
        c, _ = filter_with_references(generate_synthetic(seed=2, n_papers=200, n_authors=80))
        table = ImpactFactorTable({(p.source, p.year): 1.0 for p in c.papers})
        s, misses = if_scores(c, table)
        assert misses == 0
        g = build_graph(c)
        pop = popularity_scores(g)
        ext = extend_scores(s, g.authors)
        assert all(ext.values[a] == pop.values[a] for a in g.authors)

    def test_load_table_duplicate_key(self):
        with pytest.raises(ParseError, match="duplicate"):
            load_impact_factors(io.StringIO("J\t2005\t2.5\nJ\t2005\t3.0\n"))


class TestToRanks:
    def test_distinct(self):
        r = to_ranks(ScoreVector("s", {"A": 5, "B": 3, "C": 1}))
        assert r.ranks == {"A": 1, "B": 2, "C": 3}

    def test_tie_average(self):
        r = to_ranks(ScoreVector("s", {"A": 5, "B": 5, "C": 1}))
        assert r.ranks == {"A": 1.5, "B": 1.5, "C": 3}

    def test_all_equal(self):
        r = to_ranks(ScoreVector("s", {c: 7 for c in "ABCD"}))
        assert all(v == 2.5 for v in r.ranks.values())

    def test_rank_sum_identity_random(self):
        import random

        rng = random.Random(3)
        for _ in range(50):
            n = rng.randint(1, 40)
            s = ScoreVector("s", {f"a{i}": rng.randint(0, 5) for i in range(n)})
            r = to_ranks(s)
            assert sum(r.ranks.values()) == pytest.approx(n * (n + 1) / 2)

    def test_strict_monotonicity(self):
        s = ScoreVector("s", {"A": 9, "B": 4, "C": 4, "D": 1})
        r = to_ranks(s)
        assert r.ranks["A"] < r.ranks["B"] == r.ranks["C"] < r.ranks["D"]


class TestTopK:
    def test_argmax(self):
        s = ScoreVector("s", {"A": 1, "B": 5, "C": 3})
        assert top_k(s, 1) == (["B"], False)

    def test_full_ordering(self):
        s = ScoreVector("s", {"A": 1, "B": 5, "C": 3})
        assert top_k(s, 3)[0] == ["B", "C", "A"]

    def test_boundary_tie_lexicographic_and_flagged(self):
        s = ScoreVector("s", {"A": 5, "D": 3, "B": 3, "C": 1})
        chosen, tie = top_k(s, 2)
        assert chosen == ["A", "B"]
        assert tie

    def test_k_exceeds_n(self):
        s = ScoreVector("s", {"A": 1, "B": 2})
        chosen, _ = top_k(s, 10)
        assert chosen == ["B", "A"]

    def test_k_zero_rejected(self):
        with pytest.raises(ConfigError):
            top_k(ScoreVector("s", {"A": 1}), 0)

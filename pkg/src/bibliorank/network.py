"""Directed weighted author citation graph construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from bibliorank.corpus import Corpus
from bibliorank.errors import GraphError, ParseError


@dataclass
class AuthorCitationGraph:
    """Author citation network.

    Nodes are author keys (lexicographic order = node id); the sparse
    adjacency holds entry (citer j, cited i) with the positive integer
    number of times j's papers cite works first-authored by i.
    """

    authors: list[str]
    adjacency: sparse.csr_matrix  # shape (N, N), row = citer, col = cited
    citations_received: np.ndarray  # in-edge weight sums, int64
    publications: np.ndarray  # first-authored corpus papers, int64

    def __post_init__(self):
        self.index = {a: i for i, a in enumerate(self.authors)}

    @property
    def n_nodes(self) -> int:
        return len(self.authors)

    def node_id(self, author: str) -> int:
        try:
            return self.index[author]
        except KeyError:
            raise GraphError(f"unknown author key {author!r}") from None

    def out_weights(self) -> np.ndarray:
        """Per-node sum of out-edge weights (0 for dangling nodes)."""
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    def out_weight(self, node) -> int:
        """Sum of out-edge weights of one node (author key or node id)."""
        if isinstance(node, str):
            node = self.node_id(node)
        if not (0 <= node < self.n_nodes):
            raise GraphError(f"node id {node} out of range")
        return int(self.adjacency[node].sum())


@dataclass(frozen=True)
class GraphStats:
    n_nodes: int
    n_edges: int
    total_weight: int
    n_dangling: int


def build_graph(corpus: Corpus, allow_self_citation: bool = True) -> AuthorCitationGraph:
    """Build the author citation graph for one (filtered) phase corpus.

    One node per distinct author appearing as a paper's first author or as
    a reference's first author.  Each reference from a paper by A to a work
    by B adds 1 to edge A->B; self-citations (A == B) are skipped when
    ``allow_self_citation`` is false.
    """
    if not corpus.papers:
        raise GraphError("empty graph: corpus has no papers")

    names = set()
    for p in corpus.papers:
        names.add(p.first_author)
        for r in p.references:
            names.add(r.first_author)
    authors = sorted(names)
    index = {a: i for i, a in enumerate(authors)}
    n = len(authors)

    weights: dict[tuple[int, int], int] = {}
    publications = np.zeros(n, dtype=np.int64)
    for p in corpus.papers:
        citer = index[p.first_author]
        publications[citer] += 1
        for r in p.references:
            cited = index[r.first_author]
            if not allow_self_citation and citer == cited:
                continue
            key = (citer, cited)
            weights[key] = weights.get(key, 0) + 1

    if weights:
        keys = sorted(weights)
        rows = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
        cols = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
        data = np.fromiter((weights[k] for k in keys), dtype=np.int64, count=len(keys))
    else:
        rows = cols = data = np.zeros(0, dtype=np.int64)
    adjacency = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    citations_received = np.asarray(adjacency.sum(axis=0)).ravel().astype(np.int64)

    return AuthorCitationGraph(
        authors=authors,
        adjacency=adjacency,
        citations_received=citations_received,
        publications=publications,
    )


def graph_stats(g: AuthorCitationGraph) -> GraphStats:
    """Summary counts: nodes, distinct edges, total weight, dangling nodes."""
    out = g.out_weights()
    return GraphStats(
        n_nodes=g.n_nodes,
        n_edges=int(g.adjacency.nnz),
        total_weight=int(g.adjacency.sum()),
        n_dangling=int(np.count_nonzero(out == 0)),
    )


def dump_edges(g: AuthorCitationGraph, stream) -> None:
    """Write the edge list as `citer<TAB>cited<TAB>weight`, sorted."""
    coo = g.adjacency.tocoo()
    order = np.lexsort((coo.col, coo.row))
    for k in order:
        stream.write(f"{g.authors[coo.row[k]]}\t{g.authors[coo.col[k]]}\t{coo.data[k]}\n")


def dump_nodes(g: AuthorCitationGraph, stream) -> None:
    """Write node attributes as `author<TAB>citations<TAB>publications`."""
    for i, a in enumerate(g.authors):
        stream.write(f"{a}\t{g.citations_received[i]}\t{g.publications[i]}\n")


def load_edges(stream, publications: dict[str, int] | None = None) -> AuthorCitationGraph:
    """Rebuild a graph from an edge-list dump (and optional node pubs).

    citations_received is recomputed from the edges; publications default
    to zero unless a mapping (e.g. from a node dump) is supplied.
    """
    entries = []
    names = set()
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError("expected citer<TAB>cited<TAB>weight", line=lineno)
        citer, cited, w = parts
        try:
            weight = int(w)
        except ValueError:
            raise ParseError(f"invalid weight {w!r}", line=lineno, field="weight") from None
        if weight < 1:
            raise ParseError(f"edge weight {weight} < 1", line=lineno, field="weight")
        entries.append((citer, cited, weight))
        names.add(citer)
        names.add(cited)
    if publications:
        names.update(publications)
    if not names:
        raise GraphError("empty graph: edge list has no entries")
    authors = sorted(names)
    index = {a: i for i, a in enumerate(authors)}
    n = len(authors)
    weights: dict[tuple[int, int], int] = {}
    for citer, cited, w in entries:
        key = (index[citer], index[cited])
        weights[key] = weights.get(key, 0) + w
    keys = sorted(weights)
    rows = np.array([k[0] for k in keys], dtype=np.int64)
    cols = np.array([k[1] for k in keys], dtype=np.int64)
    data = np.array([weights[k] for k in keys], dtype=np.int64)
    adjacency = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    pubs = np.zeros(n, dtype=np.int64)
    if publications:
        for a, c in publications.items():
            pubs[index[a]] = c
    return AuthorCitationGraph(
        authors=authors,
        adjacency=adjacency,
        citations_received=np.asarray(adjacency.sum(axis=0)).ravel().astype(np.int64),
        publications=pubs,
    )


def load_nodes(stream) -> dict[str, tuple[int, int]]:
    """Read a node dump; returns author -> (citations, publications)."""
    out = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError("expected author<TAB>citations<TAB>publications", line=lineno)
        try:
            out[parts[0]] = (int(parts[1]), int(parts[2]))
        except ValueError:
            raise ParseError("invalid integer attribute", line=lineno) from None
    return out

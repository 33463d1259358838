"""Rank statistics: Spearman correlation with significance, and PCA with
varimax rotation over an authors x indicators rank matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata
from scipy.stats import t as student_t

from bibliorank.errors import ConfigError, StatsError
from bibliorank.indicators import RankVector, ScoreVector


def _rerank(values: np.ndarray) -> np.ndarray:
    """Average ranks of ascending values (rank direction cancels in r)."""
    return rankdata(values, method="average")


def spearman(x, y, subset: list[str] | None = None) -> tuple[float, float]:
    """Spearman rank correlation with a two-tailed t-approximation p-value.

    ``x`` and ``y`` are RankVectors (or author->value dicts); both are
    restricted to ``subset`` (default: x's author set) and re-ranked
    within it.  Tie-safe: r is the Pearson correlation of the re-ranked
    values, which reduces to 1 - 6*sum(d^2)/(n(n^2-1)) without ties.
    """
    xs = x.ranks if isinstance(x, RankVector) else x
    ys = y.ranks if isinstance(y, RankVector) else y
    if subset is None:
        subset = sorted(xs)
    missing = [a for a in subset if a not in xs or a not in ys]
    if missing:
        raise StatsError(f"authors missing from a rank vector: {missing[:5]!r}")
    n = len(subset)
    if n < 3:
        raise StatsError(f"need at least 3 authors, got {n}")
    rx = _rerank(np.array([xs[a] for a in subset], dtype=np.float64))
    ry = _rerank(np.array([ys[a] for a in subset], dtype=np.float64))
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    vx = float(dx @ dx)
    vy = float(dy @ dy)
    if vx == 0.0 or vy == 0.0:
        raise StatsError("degenerate ranking: zero variance")
    r = float(dx @ dy) / math.sqrt(vx * vy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t_stat = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(student_t.sf(abs(t_stat), n - 2))
    return r, p


@dataclass
class IndicatorTable:
    """Fractional ranks of a common author subset across indicators.

    Each column is re-ranked within the subset, so every column satisfies
    the rank-sum identity n(n+1)/2.
    """

    authors: list[str]
    indicators: list[str]
    ranks: np.ndarray  # shape (n authors, m indicators)

    @classmethod
    def from_scores(cls, score_vectors: list[ScoreVector], subset: list[str]) -> "IndicatorTable":
        if len(set(subset)) != len(subset):
            raise StatsError("subset contains duplicate authors")
        cols = []
        for sv in score_vectors:
            missing = [a for a in subset if a not in sv.values]
            if missing:
                raise StatsError(
                    f"indicator {sv.name!r} missing authors: {missing[:5]!r}"
                )
            vals = np.array([sv.values[a] for a in subset], dtype=np.float64)
            cols.append(rankdata(-vals, method="average"))
        return cls(
            authors=list(subset),
            indicators=[sv.name for sv in score_vectors],
            ranks=np.column_stack(cols),
        )

    def column(self, name: str) -> RankVector:
        j = self.indicators.index(name)
        return RankVector(name, dict(zip(self.authors, self.ranks[:, j])))


@dataclass
class CorrelationMatrix:
    labels: list[str]
    r: np.ndarray
    p_two_tailed: np.ndarray
    flags: list[list[str]]


def significance_flag(p: float) -> str:
    """Flag convention: * not significant at 0.05, ** not at 0.01."""
    if p >= 0.05:
        return "*"
    if p >= 0.01:
        return "**"
    return ""


def correlation_matrix(table: IndicatorTable) -> CorrelationMatrix:
    """Pairwise Spearman over all indicator columns of the table."""
    m = len(table.indicators)
    r = np.eye(m)
    p = np.zeros((m, m))
    flags = [["" for _ in range(m)] for _ in range(m)]
    cols = {name: table.column(name) for name in table.indicators}
    for i in range(m):
        for j in range(i + 1, m):
            rij, pij = spearman(cols[table.indicators[i]], cols[table.indicators[j]],
                                subset=table.authors)
            r[i, j] = r[j, i] = rij
            p[i, j] = p[j, i] = pij
            flags[i][j] = flags[j][i] = significance_flag(pij)
    return CorrelationMatrix(labels=list(table.indicators), r=r, p_two_tailed=p, flags=flags)


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors) sorted by descending eigenvalue;
    eigenvectors are columns.  Sweeps until the off-diagonal Frobenius
    norm falls below ``tol``.
    """
    a = np.array(a, dtype=np.float64)
    m = a.shape[0]
    if a.shape != (m, m) or not np.allclose(a, a.T, atol=1e-12):
        raise StatsError("jacobi_eigh requires a symmetric square matrix")
    v = np.eye(m)
    for _ in range(max_sweeps):
        off = math.sqrt(np.sum(np.square(a - np.diag(np.diag(a)))))
        if off < tol:
            break
        for p_ in range(m - 1):
            for q in range(p_ + 1, m):
                apq = a[p_, q]
                if abs(apq) < tol / (m * m):
                    continue
                theta = (a[q, q] - a[p_, p_]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(m)
                rot[p_, p_] = c
                rot[q, q] = c
                rot[p_, q] = s
                rot[q, p_] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues)
    return eigenvalues[order], v[:, order]


def _varimax_criterion(loadings: np.ndarray) -> float:
    p, _ = loadings.shape
    sq = loadings**2
    return float(np.sum(np.sum(sq**2, axis=0) / p - (np.sum(sq, axis=0) / p) ** 2))


def varimax_rotate(
    loadings: np.ndarray, tol: float = 1e-10, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Varimax rotation with Kaiser normalization.

    Rows are divided by their communality square roots, pairwise planar
    rotations maximize the varimax criterion until improvement per sweep
    drops below ``tol`` (or ``max_sweeps``), and rows are denormalized.
    Returns (rotated loadings, rotation matrix, criterion history).
    """
    a = np.array(loadings, dtype=np.float64)
    p, k = a.shape
    comm = np.sqrt(np.sum(a**2, axis=1))
    scale = np.where(comm > 0, comm, 1.0)
    a /= scale[:, None]
    rot = np.eye(k)
    history = [_varimax_criterion(a)]
    if k > 1:
        for _ in range(max_sweeps):
            for i in range(k - 1):
                for j in range(i + 1, k):
                    x = a[:, i]
                    y = a[:, j]
                    u = x * x - y * y
                    w = 2.0 * x * y
                    su = u.sum()
                    sw = w.sum()
                    num = 2.0 * (u @ w) - 2.0 * su * sw / p
                    den = (u @ u - w @ w) - (su * su - sw * sw) / p
                    phi = 0.25 * math.atan2(num, den)
                    if abs(phi) < 1e-15:
                        continue
                    c = math.cos(phi)
                    s = math.sin(phi)
                    xi = c * x + s * y
                    yj = -s * x + c * y
                    a[:, i] = xi
                    a[:, j] = yj
                    ri = c * rot[:, i] + s * rot[:, j]
                    rj = -s * rot[:, i] + c * rot[:, j]
                    rot[:, i] = ri
                    rot[:, j] = rj
            history.append(_varimax_criterion(a))
            if history[-1] - history[-2] < tol:
                break
    a *= scale[:, None]
    return a, rot, history


def _fix_column_signs(loadings: np.ndarray) -> np.ndarray:
    out = loadings.copy()
    for j in range(out.shape[1]):
        i = int(np.argmax(np.abs(out[:, j])))
        if out[i, j] < 0:
            out[:, j] = -out[:, j]
    return out


@dataclass
class PcaResult:
    labels: list[str]
    eigenvalues: np.ndarray  # all m, descending
    explained_variance_fractions: np.ndarray
    n_retained: int
    loadings: np.ndarray  # unrotated, m x k, sign-fixed
    rotated_loadings: np.ndarray  # m x k, sign-fixed
    communalities: np.ndarray  # per variable over retained components
    rotation: np.ndarray = field(repr=False, default=None)
    criterion_history: list[float] = field(default_factory=list)
    loading_cutoff: float = 0.4

    def salient_variables(self) -> list[list[str]]:
        """Per component: variables with |rotated loading| above the cutoff."""
        out = []
        for j in range(self.n_retained):
            out.append(
                [
                    self.labels[i]
                    for i in range(len(self.labels))
                    if abs(self.rotated_loadings[i, j]) > self.loading_cutoff
                ]
            )
        return out


def pca_varimax(
    table: IndicatorTable,
    retention: str = "kaiser",
    fixed_k: int | None = None,
    loading_cutoff: float = 0.4,
) -> PcaResult:
    """Correlation-matrix PCA of the rank table with varimax rotation.

    Columns are standardized; the correlation matrix is diagonalized with
    cyclic Jacobi; components are retained by the Kaiser criterion
    (eigenvalue > 1, at least one) or a fixed count; loadings are rotated
    by varimax with Kaiser normalization and sign-fixed so the largest
    magnitude entry of each column is positive.
    """
    n, m = table.ranks.shape
    if n <= m:
        raise StatsError(f"need more authors ({n}) than indicators ({m})")
    x = np.array(table.ranks, dtype=np.float64)
    std = x.std(axis=0, ddof=1)
    if np.any(std == 0):
        bad = [table.indicators[j] for j in np.flatnonzero(std == 0)]
        raise StatsError(f"zero-variance columns: {bad!r}")
    z = (x - x.mean(axis=0)) / std
    corr = (z.T @ z) / (n - 1)
    corr = (corr + corr.T) / 2.0

    eigenvalues, eigenvectors = jacobi_eigh(corr)
    if retention == "kaiser":
        k = max(1, int(np.count_nonzero(eigenvalues > 1.0)))
    elif retention == "fixed":
        if fixed_k is None or not (1 <= fixed_k <= m):
            raise ConfigError(f"fixed retention needs 1 <= k <= {m}")
        k = fixed_k
    else:
        raise ConfigError(f"unknown retention mode {retention!r}")

    loadings = eigenvectors[:, :k] * np.sqrt(np.maximum(eigenvalues[:k], 0.0))
    loadings = _fix_column_signs(loadings)
    rotated, rotation, history = varimax_rotate(loadings)
    rotated = _fix_column_signs(rotated)
    return PcaResult(
        labels=list(table.indicators),
        eigenvalues=eigenvalues,
        explained_variance_fractions=eigenvalues / m,
        n_retained=k,
        loadings=loadings,
        rotated_loadings=rotated,
        communalities=np.sum(rotated**2, axis=1),
        rotation=rotation,
        criterion_history=history,
        loading_cutoff=loading_cutoff,
    )

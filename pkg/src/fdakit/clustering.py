"""K-means for curves under the L2 metric induced by the Gram matrix.

Squared distance between two curves in coefficient space is
``(a - b)' W (a - b)``, so after mapping coefficients through the
symmetric square root of W the problem becomes ordinary Euclidean
K-means. Lloyd iteration runs in that whitened space with
distance-weighted (greedy spread) seeding, multiple restarts, and
deterministic per-restart random streams. Model selection picks the
cluster count with the best average silhouette.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .basis import gram_matrix, gram_sqrt
from .smoothing import FunctionalDataSet


@dataclass(frozen=True)
class ClusterResult:
    """Outcome of one functional K-means run.

    Attributes
    ----------
    n_clusters : int
    assignments : np.ndarray, shape (n,)
        Labels in 1..n_clusters.
    centroid_coeffs : np.ndarray, shape (n_clusters, n_basis)
        Basis coefficients of the cluster mean curves.
    inertia : float
        Sum of squared W-distances of curves to their centroids.
    silhouette : float or None
        Average silhouette in [-1, 1]; None for a single cluster, where
        it is undefined.
    seed : int
    n_iter : int
        Lloyd iterations of the winning restart.
    inertia_path : np.ndarray
        Post-assignment inertia of each iteration of the winning restart.
    """

    n_clusters: int
    assignments: np.ndarray
    centroid_coeffs: np.ndarray
    inertia: float
    silhouette: float | None
    seed: int
    n_iter: int
    inertia_path: np.ndarray

    def __post_init__(self):
        labels = np.array(self.assignments, dtype=int)
        labels.flags.writeable = False
        object.__setattr__(self, "assignments", labels)
        for name in ("centroid_coeffs", "inertia_path"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def _whiten(ds: FunctionalDataSet) -> np.ndarray:
    w_half, _ = gram_sqrt(gram_matrix(ds.basis))
    return ds.coefficients @ w_half


def _seed_centroids(z: np.ndarray, g: int, rng: np.random.Generator) -> np.ndarray:
    # Greedy spread: first centroid uniform, later ones sampled with
    # probability proportional to squared distance from the chosen set.
    n = z.shape[0]
    centroids = np.empty((g, z.shape[1]))
    centroids[0] = z[rng.integers(n)]
    d2 = ((z - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, g):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centroids[j] = z[idx]
        d2 = np.minimum(d2, ((z - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _lloyd(z: np.ndarray, g: int, rng: np.random.Generator, max_iter: int):
    """One restart of Lloyd iteration in whitened space.

    Returns (labels, inertia, n_iter, inertia_path). Emptied clusters are
    reseeded with the point currently farthest from its own centroid, so
    the cluster count never shrinks.
    """
    n = z.shape[0]
    centroids = _seed_centroids(z, g, rng)
    labels = np.full(n, -1)
    path = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = cdist(z, centroids, metric="sqeuclidean")
        new_labels = d2.argmin(axis=1)
        assigned = d2[np.arange(n), new_labels]
        for cluster in range(g):
            if np.any(new_labels == cluster):
                continue
            # reseed from the worst-fit point of a cluster that can spare
            # one; with g <= n such a donor always exists
            counts = np.bincount(new_labels, minlength=g)
            donors = np.where(counts[new_labels] >= 2)[0]
            worst = int(donors[assigned[donors].argmax()])
            new_labels[worst] = cluster
            centroids[cluster] = z[worst]
            assigned[worst] = 0.0
        path.append(float(assigned.sum()))
        converged = np.array_equal(new_labels, labels)
        labels = new_labels
        for cluster in range(g):
            centroids[cluster] = z[labels == cluster].mean(axis=0)
        if converged:
            break
    d2 = cdist(z, centroids, metric="sqeuclidean")
    inertia = float(d2[np.arange(n), labels].sum())
    return labels, inertia, n_iter, np.array(path)


def fkmeans(
    ds: FunctionalDataSet,
    n_clusters: int,
    n_restarts: int = 10,
    max_iter: int = 100,
    seed: int = 0,
) -> ClusterResult:
    """Multi-restart functional K-means, best inertia wins.

    Deterministic for a given seed: restart random streams are spawned
    from it, so serial and parallel restart execution would agree.

    Raises
    ------
    ValueError
        If `n_clusters` is outside [1, n].
    """
    n = ds.n_curves
    if not 1 <= n_clusters <= n:
        raise ValueError(f"n_clusters must be in [1, {n}], got {n_clusters}")
    if n_restarts < 1 or max_iter < 1:
        raise ValueError("n_restarts and max_iter must be positive")
    z = _whiten(ds)

    best = None
    for child in np.random.SeedSequence(seed).spawn(n_restarts):
        rng = np.random.default_rng(child)
        labels, inertia, n_iter, path = _lloyd(z, n_clusters, rng, max_iter)
        if best is None or inertia < best[1]:
            best = (labels, inertia, n_iter, path)
    labels, inertia, n_iter, path = best

    centroid_coeffs = np.vstack(
        [ds.coefficients[labels == c].mean(axis=0) for c in range(n_clusters)]
    )
    sil = silhouette_score(ds, labels + 1) if n_clusters >= 2 else None
    return ClusterResult(
        n_clusters=n_clusters,
        assignments=labels + 1,
        centroid_coeffs=centroid_coeffs,
        inertia=inertia,
        silhouette=sil,
        seed=seed,
        n_iter=n_iter,
        inertia_path=path,
    )


def silhouette_score(ds: FunctionalDataSet, assignments) -> float:
    """Average silhouette of a clustering under the W-metric.

    For each curve, cohesion a is the mean distance to its own cluster
    (excluding itself) and separation b the smallest mean distance to
    another cluster; the curve contributes (b - a) / max(a, b), with
    singleton members and 0/0 both contributing 0.

    Raises
    ------
    ValueError
        If fewer than two clusters are present.
    """
    labels = np.asarray(assignments)
    n = ds.n_curves
    if labels.shape != (n,):
        raise ValueError(f"assignments must have shape ({n},)")
    groups = np.unique(labels)
    if groups.size < 2:
        raise ValueError("silhouette needs at least two clusters")
    z = _whiten(ds)
    dist = cdist(z, z)

    scores = np.zeros(n)
    for i in range(n):
        own = labels == labels[i]
        n_own = own.sum()
        if n_own == 1:
            continue
        a = dist[i, own].sum() / (n_own - 1)
        b = min(dist[i, labels == g].mean() for g in groups if g != labels[i])
        denom = max(a, b)
        if denom > 0:
            scores[i] = (b - a) / denom
    return float(scores.mean())


def select_g(
    ds: FunctionalDataSet,
    g_min: int,
    g_max: int,
    n_restarts: int = 10,
    max_iter: int = 100,
    seed: int = 0,
) -> tuple[int, list[ClusterResult]]:
    """Pick the cluster count in [g_min, g_max] with the best silhouette.

    Returns the winning count (ties broken toward fewer clusters) and
    the per-count results in ascending order.
    """
    n = ds.n_curves
    if not 2 <= g_min <= g_max <= n - 1:
        raise ValueError(
            f"need 2 <= g_min <= g_max <= n - 1 = {n - 1}, got [{g_min}, {g_max}]"
        )
    results = [
        fkmeans(ds, g, n_restarts=n_restarts, max_iter=max_iter, seed=seed)
        for g in range(g_min, g_max + 1)
    ]
    best_idx = max(range(len(results)), key=lambda i: (results[i].silhouette, -i))
    return g_min + best_idx, results

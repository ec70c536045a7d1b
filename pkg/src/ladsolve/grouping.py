"""Customer grouping and per-group drone makespan.

Customers are clustered with a capacity-constrained k-means; the vehicle parks
at each cluster's centroid and its drones fly one parcel per sortie.
"""

from __future__ import annotations

import itertools
import math
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from .model import Customer, Group, Point

EXACT_MAKESPAN_LIMIT = 10


class CapacitatedKMeans(ClusterMixin, BaseEstimator):
    """K-means with a hard cap on cluster size and a radius bound.

    Parameters
    ----------
    n_clusters : int or None
        Target number of clusters. ``None`` uses ``ceil(n / max_size)``.
    max_size : int
        Maximum number of points per cluster.
    max_radius : float or None
        After convergence, clusters with a point farther than this from the
        centroid are split until the bound holds. This may add clusters.
    max_iter : int
        Upper bound on assign/update rounds.
    random_state : int, RandomState or None
        Picks the first farthest-point seed.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    cluster_centers_ : ndarray of shape (n_clusters_, 2)
    n_iter_ : int
    """

    def __init__(self, n_clusters=None, max_size=10, max_radius=None, max_iter=50, random_state=None):
        self.n_clusters = n_clusters
        self.max_size = max_size
        self.max_radius = max_radius
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        n = X.shape[0]
        if self.max_size < 1:
            raise ValueError(f"max_size must be >= 1, got {self.max_size}")
        k = self.n_clusters if self.n_clusters is not None else math.ceil(n / self.max_size)
        if not 1 <= k <= n:
            raise ValueError(f"n_clusters must lie in [1, {n}], got {k}")
        if k * self.max_size < n:
            raise ValueError(f"{k} clusters of size <= {self.max_size} cannot hold {n} points")
        rng = check_random_state(self.random_state)

        centers = _farthest_point_seeds(X, k, rng)
        labels = np.full(n, -1)
        self.n_iter_ = 0
        for self.n_iter_ in range(1, self.max_iter + 1):
            new = _capacitated_assign(X, centers, self.max_size)
            _fill_empty(X, centers, new)
            centers = np.array([X[new == j].mean(axis=0) for j in range(k)])
            if np.array_equal(new, labels):
                break
            labels = new

        if self.max_radius is not None:
            labels, centers = _split_wide(X, labels, centers, self.max_radius)
        self.labels_ = labels
        self.cluster_centers_ = centers
        return self

    def predict(self, X):
        """Nearest centroid, ignoring capacity."""
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=np.float64)
        d = np.linalg.norm(X[:, None, :] - self.cluster_centers_[None, :, :], axis=2)
        return d.argmin(axis=1)


def _farthest_point_seeds(X: np.ndarray, k: int, rng) -> np.ndarray:
    idx = [int(rng.randint(X.shape[0]))]
    dmin = np.linalg.norm(X - X[idx[0]], axis=1)
    for _ in range(1, k):
        nxt = int(dmin.argmax())
        idx.append(nxt)
        dmin = np.minimum(dmin, np.linalg.norm(X - X[nxt], axis=1))
    return X[idx].copy()


def _capacitated_assign(X: np.ndarray, centers: np.ndarray, cap: int) -> np.ndarray:
    # Greedy by distance: walk all (point, center) pairs shortest first.
    d = np.linalg.norm(X[:, None, :] - centers[None, :, :], axis=2)
    order = np.argsort(d, axis=None, kind="stable")
    labels = np.full(X.shape[0], -1)
    load = np.zeros(len(centers), dtype=int)
    left = X.shape[0]
    for flat in order:
        i, j = divmod(int(flat), len(centers))
        if labels[i] >= 0 or load[j] >= cap:
            continue
        labels[i] = j
        load[j] += 1
        left -= 1
        if left == 0:
            break
    return labels


def _fill_empty(X: np.ndarray, centers: np.ndarray, labels: np.ndarray) -> None:
    # An empty cluster takes the point lying farthest from its own centroid.
    for j in range(len(centers)):
        if np.any(labels == j):
            continue
        counts = np.bincount(labels, minlength=len(centers))
        movable = counts[labels] > 1
        spread = np.where(movable, np.linalg.norm(X - centers[labels], axis=1), -1.0)
        i = int(spread.argmax())
        labels[i] = j
        centers[j] = X[i]


def _split_wide(X, labels, centers, radius):
    clusters = [np.flatnonzero(labels == j) for j in range(len(centers))]
    done: list[np.ndarray] = []
    while clusters:
        members = clusters.pop(0)
        c = X[members].mean(axis=0)
        if len(members) == 1 or np.linalg.norm(X[members] - c, axis=1).max() <= radius:
            done.append(members)
            continue
        # Two-way split seeded by the pair of farthest-apart points.
        pts = X[members]
        a = int(np.linalg.norm(pts - c, axis=1).argmax())
        b = int(np.linalg.norm(pts - pts[a], axis=1).argmax())
        side = np.linalg.norm(pts - pts[a], axis=1) <= np.linalg.norm(pts - pts[b], axis=1)
        clusters[:0] = [members[side], members[~side]]
    labels = np.empty(X.shape[0], dtype=int)
    for j, members in enumerate(done):
        labels[members] = j
    centers = np.array([X[m].mean(axis=0) for m in done])
    return labels, centers


# -- drone makespan -----------------------------------------------------------


def sortie_durations(g: Group, customers: Mapping[str, Customer], drone_speed: float, service_time: float) -> list[float]:
    """One out-and-back flight per member plus the drop-off service time."""
    w = g.waiting_location
    out = []
    for cid in g.members:
        p = customers[cid].position
        out.append(math.hypot(p.x - w.x, p.y - w.y) * 7200.0 / drone_speed + service_time)
    return out


def exact_makespan(jobs: Sequence[float], n_machines: int) -> float:
    """Minimum makespan of ``jobs`` on identical machines, by subset DP.

    ``best[k][mask]`` is the least makespan covering ``mask`` with ``k``
    machines; each step peels off the submask holding the lowest job.
    Subset loads use ``math.fsum`` so the result does not depend on order.
    """
    n = len(jobs)
    if n == 0:
        return 0.0
    m = min(n_machines, n)
    full = (1 << n) - 1
    load = [0.0] * (1 << n)
    for mask in range(1, 1 << n):
        load[mask] = math.fsum(jobs[i] for i in range(n) if mask >> i & 1)
    best = load[:]
    for _ in range(1, m):
        nxt = best[:]
        for mask in range(1, full + 1):
            low = mask & -mask
            rest = mask ^ low
            sub = rest
            # every submask of `rest`, each joined with the lowest job
            while True:
                part = sub | low
                cand = max(load[part], best[mask ^ part]) if part != mask else load[part]
                if cand < nxt[mask]:
                    nxt[mask] = cand
                if sub == 0:
                    break
                sub = (sub - 1) & rest
        best = nxt
    return best[full]


def lpt_makespan(jobs: Sequence[float], n_machines: int) -> float:
    loads = [[] for _ in range(n_machines)]
    for j in sorted(jobs, reverse=True):
        target = min(range(n_machines), key=lambda i: (math.fsum(loads[i]), i))
        loads[target].append(j)
    return max(math.fsum(l) for l in loads)


def brute_force_makespan(jobs: Sequence[float], n_machines: int) -> float:
    best = math.inf
    for assign in itertools.product(range(n_machines), repeat=len(jobs)):
        loads = [math.fsum(j for j, a in zip(jobs, assign) if a == i) for i in range(n_machines)]
        best = min(best, max(loads))
    return best if jobs else 0.0


def makespan(jobs: Sequence[float], n_machines: int) -> float:
    if n_machines < 1:
        raise ValueError("need at least one drone")
    if len(jobs) <= EXACT_MAKESPAN_LIMIT:
        return exact_makespan(jobs, n_machines)
    return lpt_makespan(jobs, n_machines)


def group_delivery_time(
    g: Group,
    customers: Mapping[str, Customer],
    n_drones: int,
    drone_speed: float,
    service_time: float,
) -> float:
    if not drone_speed > 0:
        raise ValueError(f"drone_speed must be > 0, got {drone_speed}")
    return makespan(sortie_durations(g, customers, drone_speed, service_time), n_drones)


def build_groups(
    customers: Sequence[Customer],
    drone_range: float,
    max_group_size: int = 10,
    target_groups: int | None = None,
    seed=0,
    n_drones: int = 3,
    drone_speed: float = 50.0,
    service_time: float = 60.0,
) -> list[Group]:
    """Partition customers into drone-coverable groups with centroid waiting spots.

    Group ids are ``g001``, ``g002``, ... ordered by cluster index; members keep
    the input customer order.
    """
    if not customers:
        raise ValueError("no customers to group")
    if not drone_range > 0:
        raise ValueError(f"drone_range must be > 0, got {drone_range}")
    X = np.array([[c.position.x, c.position.y] for c in customers], dtype=np.float64)
    km = CapacitatedKMeans(
        n_clusters=target_groups, max_size=max_group_size, max_radius=drone_range, random_state=seed
    ).fit(X)

    index = {c.id: c for c in customers}
    k = len(km.cluster_centers_)
    width = max(3, len(str(k)))
    groups = []
    for j in range(k):
        members = tuple(customers[i].id for i in np.flatnonzero(km.labels_ == j))
        cx, cy = (float(v) for v in X[km.labels_ == j].mean(axis=0))
        provisional = Group(f"g{j + 1:0{width}d}", members, Point(cx, cy), 0.0)
        # singletons sit on their customer, so the range bound cannot fail
        assert all(
            math.hypot(index[m].position.x - cx, index[m].position.y - cy) <= drone_range for m in members
        ), "range bound violated after splitting"
        t = group_delivery_time(provisional, index, n_drones, drone_speed, service_time)
        groups.append(Group(provisional.id, members, provisional.waiting_location, t))
    return groups

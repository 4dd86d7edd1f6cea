"""Best-subband selection with the self-stopping rule, and validation-subset
hyperparameter grid search."""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SplitError
from .metrics import evaluate
from .wavelet import ALPHABET, node_matrix


@dataclass(frozen=True)
class SelectionTrace:
    """Evaluation log of the greedy subband descent.

    ``evaluated`` lists (path, CE) in evaluation order; ``stopped_reason``
    is 'parent-better' when the parent beat its best child, 'max-depth'
    when a child was accepted without further descent.
    """

    evaluated: tuple
    chosen: str
    stopped_reason: str


@dataclass(frozen=True)
class Grid:
    """Hyperparameter grid evaluated on stratified validation subsets."""

    values: dict
    n_val_subsets: int = 10
    val_size_per_cluster: int = 50
    seed: int = 0

    def __post_init__(self):
        if not self.values or any(len(v) == 0 for v in self.values.values()):
            raise ParameterError("grid needs at least one value per parameter")
        if self.n_val_subsets < 1 or self.val_size_per_cluster < 1:
            raise ParameterError("subset counts must be positive")

    def points(self):
        """Grid points as dicts, in row-major order over the value lists."""
        keys = list(self.values.keys())
        for combo in itertools.product(*(self.values[k] for k in keys)):
            yield dict(zip(keys, combo))


def mera_default_grid(n_val_subsets=10, val_size_per_cluster=50, seed=0):
    """Default search ranges for the MERA solver: lambda over ten decades
    (1e-10 .. 1e-1) and rank 2..20."""
    return Grid(values={"lambda": [10.0 ** k for k in range(-10, 0)],
                        "R": list(range(2, 21))},
                n_val_subsets=n_val_subsets,
                val_size_per_cluster=val_size_per_cluster, seed=seed)


def clustering_error(X, labels, pipeline, seed=0):
    """CE = 1 - ACC of the pipeline's partition against the given labels."""
    labels = np.asarray(labels)
    C = int(labels.max()) + 1
    pred = pipeline.run(X, C, seed)
    return 1.0 - evaluate(labels, pred).acc


def select_subband(ds, J, pipeline, seed=0):
    """Greedy minimum-CE subband descent with the self-stopping rule.

    Evaluates CE on the original data, then on the four children of the
    current best node. If the parent's CE is strictly smaller than the
    best child's, the parent wins and the search stops; otherwise the
    search descends into the best child (ties in the child argmin go to
    the fixed order A, H, V, D) until level J. At most 1 + 4*J
    evaluations, in a deterministic order.
    """
    if ds.labels is None:
        raise ParameterError("subband selection needs a labeled validation set")
    if J < 1:
        raise ParameterError("J must be >= 1")
    evaluated = []

    def ce_of(path):
        ce = clustering_error(node_matrix(ds, path), ds.labels, pipeline, seed)
        evaluated.append((path, ce))
        return ce

    parent, parent_ce = "", ce_of("")
    for j in range(1, J + 1):
        best_child, best_ce = None, np.inf
        for ch in ALPHABET:
            ce = ce_of(parent + ch)
            if ce < best_ce:
                best_child, best_ce = parent + ch, ce
        if parent_ce < best_ce:
            return SelectionTrace(tuple(evaluated), parent, "parent-better")
        if best_ce < parent_ce and j < J:
            parent, parent_ce = best_child, best_ce
            continue
        return SelectionTrace(tuple(evaluated), best_child, "max-depth")
    raise AssertionError("unreachable")


def scan_all_subbands(ds, J, pipeline, seed=0):
    """Diagnostic exhaustive scan: CE on the original and every tree node.

    Much costlier than :func:`select_subband` (1 + sum_j 4**j evaluations
    instead of at most 1 + 4*J); returns a SelectionTrace whose ``chosen``
    is the global argmin (ties to the earlier path in scan order).
    """
    if ds.labels is None:
        raise ParameterError("subband scanning needs a labeled validation set")
    if J < 1:
        raise ParameterError("J must be >= 1")
    paths = [""]
    for j in range(1, J + 1):
        paths += ["".join(p) for p in itertools.product(ALPHABET, repeat=j)]
    evaluated = [(p, clustering_error(node_matrix(ds, p), ds.labels,
                                      pipeline, seed)) for p in paths]
    chosen = min(evaluated, key=lambda pair: pair[1])[0]
    return SelectionTrace(tuple(evaluated), chosen, "exhaustive")


def stratified_subsets(labels, n_subsets, size_per_cluster, seed):
    """Seeded stratified index subsets (without replacement per cluster)."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    C = int(labels.max()) + 1
    members = [np.flatnonzero(labels == c) for c in range(C)]
    short = [c for c in range(C) if members[c].size < size_per_cluster]
    if short:
        raise SplitError(
            f"cluster(s) {short[:8]} smaller than val_size_per_cluster="
            f"{size_per_cluster}"
        )
    subsets = []
    for _ in range(n_subsets):
        picks = [rng.choice(m, size=size_per_cluster, replace=False)
                 for m in members]
        subsets.append(np.sort(np.concatenate(picks)))
    return subsets

def grid_search(ds, grid, make_pipeline):
    """Pick the grid point with the best mean validation accuracy.

    Every grid point is scored on the same seeded stratified subsets; the
    argmax of mean ACC wins, ties going to the earlier point in grid
    order. Returns (best_params, table) where the table holds one row per
    grid point with its subset accuracies.
    """
    if ds.labels is None:
        raise ParameterError("grid search needs labels")
    subsets = stratified_subsets(ds.labels, grid.n_val_subsets,
                                 grid.val_size_per_cluster, grid.seed)
    C = ds.C
    table = []
    best_params, best_mean = None, -np.inf
    for params in grid.points():
        pipeline = make_pipeline(params)
        accs = []
        for s, idx in enumerate(subsets):
            pred = pipeline.run(ds.data[:, idx], C, seed=grid.seed + s)
            accs.append(evaluate(ds.labels[idx], pred).acc)
        mean_acc = float(np.mean(accs))
        table.append({"params": dict(params), "mean_acc": mean_acc,
                      "accs": accs})
        if mean_acc > best_mean:
            best_params, best_mean = dict(params), mean_acc
    return best_params, table

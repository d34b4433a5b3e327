"""C-SVM on a precomputed kernel and the repeated double cross-validation protocol."""

from __future__ import annotations

import itertools
import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numba as nb
import numpy as np

TAU = 1e-12
DEFAULT_C_GRID = tuple(10.0**k for k in range(-4, 4))


@nb.njit(cache=True, nogil=True)
def _smo(K, y, C, tol, max_iter, trace):
    """Dual C-SVM by sequential pair updates with second-order working-set selection.

    Minimises 0.5 a^T Q a - sum(a) with Q_ij = y_i y_j K_ij, 0 <= a <= C, y^T a = 0.
    Returns (alpha, rho, iterations, objective trace).
    """
    N = y.shape[0]
    alpha = np.zeros(N)
    G = -np.ones(N)
    objs = np.empty(max_iter + 1 if trace else 1)
    n_obj = 0
    it = 0
    while it < max_iter:
        # i: maximal violating index in I_up
        gmax = -np.inf
        i = -1
        for t in range(N):
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                v = -y[t] * G[t]
                if v >= gmax:
                    gmax = v
                    i = t
        gmin = np.inf
        j = -1
        obj_min = np.inf
        for t in range(N):
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                v = -y[t] * G[t]
                if v < gmin:
                    gmin = v
                if i >= 0:
                    b = gmax - v
                    if b > 0:
                        a = K[i, i] + K[t, t] - 2.0 * K[i, t]
                        if a <= 0:
                            a = TAU
                        o = -(b * b) / a
                        if o <= obj_min:
                            obj_min = o
                            j = t
        if i < 0 or j < 0 or gmax - gmin < tol:
            break
        it += 1

        old_i = alpha[i]
        old_j = alpha[j]
        Qii = K[i, i]
        Qjj = K[j, j]
        Qij = y[i] * y[j] * K[i, j]
        if y[i] != y[j]:
            quad = Qii + Qjj + 2.0 * Qij
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            quad = Qii + Qjj - 2.0 * Qij
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            s = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if s > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = s - C
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = s
            if s > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = s - C
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = s
        di = alpha[i] - old_i
        dj = alpha[j] - old_j
        for t in range(N):
            G[t] += y[t] * (y[i] * K[t, i] * di + y[j] * K[t, j] * dj)
        if trace:
            f = 0.0
            for t in range(N):
                f += alpha[t] * (G[t] - 1.0)
            objs[n_obj] = 0.5 * f
            n_obj += 1

    # bias from free vectors, else midpoint of the feasible interval
    ub = np.inf
    lb = -np.inf
    total = 0.0
    n_free = 0
    for t in range(N):
        yG = y[t] * G[t]
        if alpha[t] >= C:
            if y[t] < 0:
                ub = min(ub, yG)
            else:
                lb = max(lb, yG)
        elif alpha[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yG)
            else:
                lb = max(lb, yG)
        else:
            total += yG
            n_free += 1
    if n_free > 0:
        rho = total / n_free
    else:
        rho = (ub + lb) / 2.0
    return alpha, rho, it, objs[:n_obj]


@dataclass
class SvmModel:
    support: np.ndarray  # indices into the training Gram
    dual_coef: np.ndarray  # alpha_i * y_i for each support index
    bias: float
    C: float
    iterations: int = 0
    objective_trace: np.ndarray | None = None

    def decision_function(self, K_cross: np.ndarray) -> np.ndarray:
        """``K_cross`` has one row per test point and one column per support vector."""
        K_cross = np.atleast_2d(np.asarray(K_cross, dtype=float))
        if K_cross.shape[1] != self.support.size:
            raise ValueError(
                f"kernel rows have {K_cross.shape[1]} columns, model has {self.support.size} support vectors"
            )
        return K_cross @ self.dual_coef + self.bias


def train(K_train, labels, C: float, tol: float = 1e-3, max_iter: int | None = None, trace: bool = False) -> SvmModel:
    K = np.ascontiguousarray(K_train, dtype=float)
    y = np.asarray(labels, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] != y.size:
        raise ValueError("kernel must be square and match the label vector")
    if not np.all(np.isfinite(K)):
        raise ValueError("kernel contains non-finite entries")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1/-1")
    if np.unique(y).size < 2:
        raise ValueError("training fold contains a single class")
    if max_iter is None:
        max_iter = max(10_000_000, 100 * y.size)
    alpha, rho, it, objs = _smo(K, y, float(C), float(tol), int(max_iter), bool(trace))
    support = np.flatnonzero(alpha > 0)
    return SvmModel(support, alpha[support] * y[support], -rho, float(C), int(it), objs if trace else None)


def predict(m: SvmModel, K_cross) -> np.ndarray:
    """Labels in {+1, -1}; an exactly zero decision value goes to +1."""
    return np.where(m.decision_function(K_cross) >= 0, 1, -1)


class OneVsOne:
    """Pairwise binary SVMs with majority voting; ties go to the smallest class index."""

    def __init__(self, C: float, tol: float = 1e-3):
        self.C = C
        self.tol = tol

    def fit(self, K: np.ndarray, labels: np.ndarray) -> OneVsOne:
        labels = np.asarray(labels)
        self.classes_ = np.unique(labels)
        if self.classes_.size < 2:
            raise ValueError("training fold contains a single class")
        self.train_index_ = np.arange(labels.size)
        self.models_ = []
        for a, b in itertools.combinations(range(self.classes_.size), 2):
            idx = np.flatnonzero((labels == self.classes_[a]) | (labels == self.classes_[b]))
            y = np.where(labels[idx] == self.classes_[a], 1, -1)
            model = train(K[np.ix_(idx, idx)], y, self.C, self.tol)
            self.models_.append((a, b, idx[model.support], model))
        return self

    def predict(self, K_cross: np.ndarray) -> np.ndarray:
        """``K_cross``: test rows by *training* columns."""
        K_cross = np.atleast_2d(K_cross)
        votes = np.zeros((K_cross.shape[0], self.classes_.size), dtype=np.int64)
        rows = np.arange(K_cross.shape[0])
        for a, b, sv, model in self.models_:
            pred = predict(model, K_cross[:, sv])
            votes[rows, np.where(pred > 0, a, b)] += 1
        return self.classes_[np.argmax(votes, axis=1)]  # argmax picks the first maximum


# -- metrics ------------------------------------------------------------------

def _f1(y_true, y_pred, cls) -> float:
    tp = np.sum((y_pred == cls) & (y_true == cls))
    fp = np.sum((y_pred == cls) & (y_true != cls))
    fn = np.sum((y_pred != cls) & (y_true == cls))
    denom = 2 * tp + fp + fn
    return 0.0 if denom == 0 else 2 * tp / denom


def metrics(y_true, y_pred, scheme: str = "accuracy", positive=1, classes=None) -> float:
    """Accuracy, binary F1 for ``positive`` or macro F1 over ``classes``, in percent."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0 or y_true.shape != y_pred.shape:
        raise ValueError("need two non-empty label vectors of equal length")
    if scheme == "accuracy":
        return 100.0 * float(np.mean(y_true == y_pred))
    if scheme == "binary_f1":
        return 100.0 * _f1(y_true, y_pred, positive)
    if scheme == "macro_f1":
        if classes is None:
            classes = np.union1d(y_true, y_pred)
        return 100.0 * float(np.mean([_f1(y_true, y_pred, c) for c in classes]))
    raise ValueError(f"unknown metric scheme {scheme!r}")


# -- nested cross-validation --------------------------------------------------

@dataclass
class CvConfig:
    outer_folds: int = 10
    inner_folds: int = 10
    repeats: int = 10
    c_grid: tuple = DEFAULT_C_GRID
    seed: int = 0
    tol: float = 1e-3
    n_jobs: int = 1

    def __post_init__(self):
        self.c_grid = tuple(sorted(float(c) for c in self.c_grid))
        if not self.c_grid:
            raise ValueError("C grid must not be empty")


def stratified_folds(labels, k: int, rng: np.random.Generator) -> np.ndarray:
    """Fold id per sample; each class is shuffled and dealt round-robin."""
    labels = np.asarray(labels)
    fold = np.empty(labels.size, dtype=np.int64)
    offset = 0
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if members.size < k:
            raise ValueError(f"class {cls} has {members.size} members, fewer than {k} folds")
        members = rng.permutation(members)
        fold[members] = (offset + np.arange(members.size)) % k
        offset = (offset + members.size) % k
    return fold


def _fit_predict(K, labels, train_idx, test_idx, C, tol):
    clf = OneVsOne(C, tol).fit(K[np.ix_(train_idx, train_idx)], labels[train_idx])
    return clf.predict(K[np.ix_(test_idx, train_idx)])


def select_C(K, labels, train_idx, cfg: CvConfig, rng: np.random.Generator) -> float:
    """Best mean inner-fold accuracy over the grid; ties resolve to the smallest C."""
    sub = labels[train_idx]
    folds = stratified_folds(sub, cfg.inner_folds, rng)
    best_c, best_acc = cfg.c_grid[0], -1.0
    for C in cfg.c_grid:
        accs = []
        for f in range(cfg.inner_folds):
            tr, te = train_idx[folds != f], train_idx[folds == f]
            if np.unique(labels[tr]).size < 2:
                continue  # degenerate inner fold abstains
            accs.append(np.mean(_fit_predict(K, labels, tr, te, C, cfg.tol) == labels[te]))
        if accs and np.mean(accs) > best_acc:
            best_c, best_acc = C, float(np.mean(accs))
    return best_c


@dataclass
class EvalReport:
    dataset: str
    kernel: str
    encoding: str
    accuracy_mean: float
    accuracy_std: float
    f_mean: float
    f_std: float
    f_scheme: str
    positive_class: int | None
    per_repeat: list = field(default_factory=list)
    chosen_C: dict = field(default_factory=dict)
    seed: int = 0
    extra_f: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _run_repeat(K, labels, cfg: CvConfig, r: int, classes, positive):
    rng = np.random.default_rng(cfg.seed + r)
    folds = stratified_folds(labels, cfg.outer_folds, rng)
    pred = np.empty_like(labels)
    chosen = []
    fold_acc = []
    for f in range(cfg.outer_folds):
        train_idx, test_idx = np.flatnonzero(folds != f), np.flatnonzero(folds == f)
        C = select_C(K, labels, train_idx, cfg, np.random.default_rng([cfg.seed + r, f + 1]))
        chosen.append(C)
        pred[test_idx] = _fit_predict(K, labels, train_idx, test_idx, C, cfg.tol)
        fold_acc.append(metrics(labels[test_idx], pred[test_idx]))
    row = {
        "repeat": r,
        "accuracy": metrics(labels, pred),
        "fold_accuracy": fold_acc,
        "macro_f1": metrics(labels, pred, "macro_f1", classes=classes),
        "chosen_C": chosen,
    }
    if classes.size == 2:
        minority, majority = positive, [c for c in classes if c != positive][0]
        row["minority_f1"] = metrics(labels, pred, "binary_f1", positive=minority)
        row["majority_f1"] = metrics(labels, pred, "binary_f1", positive=majority)
    return row


def nested_cv(K, labels, cfg: CvConfig = CvConfig(), dataset: str = "", kernel: str = "", encoding: str = "") -> EvalReport:
    """Repeated double cross-validation on a precomputed Gram matrix.

    Each repeat pools the outer-fold test predictions, so every graph is
    predicted exactly once per repeat. Binary problems report the F-measure
    of the minority class; multiclass problems report macro F1.
    """
    K = np.asarray(getattr(K, "entries", K), dtype=float)
    labels = np.asarray(labels)
    if labels.size < 20:
        raise ValueError("nested cross-validation needs at least 20 graphs")
    classes, sizes = np.unique(labels, return_counts=True)
    if sizes.min() < cfg.outer_folds:
        raise ValueError(f"smallest class has {sizes.min()} members, fewer than {cfg.outer_folds} folds")
    positive = int(classes[np.argmin(sizes)]) if classes.size == 2 else None

    def job(r):
        return _run_repeat(K, labels, cfg, r, classes, positive)

    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(cfg.n_jobs) as pool:
            rows = list(pool.map(job, range(cfg.repeats)))
    else:
        rows = [job(r) for r in range(cfg.repeats)]

    acc = np.array([row["accuracy"] for row in rows])
    f_key = "minority_f1" if positive is not None else "macro_f1"
    f = np.array([row[f_key] for row in rows])
    chosen = Counter(c for row in rows for c in row["chosen_C"])
    extra = {"macro_f1_mean": float(np.mean([row["macro_f1"] for row in rows]))}
    if positive is not None:
        extra["majority_f1_mean"] = float(np.mean([row["majority_f1"] for row in rows]))
    return EvalReport(
        dataset=dataset,
        kernel=kernel,
        encoding=encoding,
        accuracy_mean=float(acc.mean()),
        accuracy_std=float(acc.std()),
        f_mean=float(f.mean()),
        f_std=float(f.std()),
        f_scheme=f_key,
        positive_class=positive,
        per_repeat=rows,
        chosen_C={f"{c:g}": n for c, n in sorted(chosen.items())},
        seed=cfg.seed,
        extra_f=extra,
    )

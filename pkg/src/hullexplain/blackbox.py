"""Black-box regressors to be explained.

Everything here satisfies one contract: predict() maps an (n, m) array to
an (n,) array of floats, deterministically, and predicting a batch equals
predicting each row alone. The explainers only ever see this interface.
"""
from __future__ import annotations

import os
import selectors
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidInputError, PredictorIOError
from .geometry import as_points
from .rng import Prng, derive_seed


class Predictor:
    """Base class: subclasses implement _predict_batch on validated input."""

    input_dim: int

    def predict(self, X) -> np.ndarray:
        arr = as_points(X, "X", dim=self.input_dim)
        out = np.asarray(self._predict_batch(arr), dtype=np.float64)
        if out.shape != (arr.shape[0],):
            raise PredictorIOError(
                f"predictor returned shape {out.shape}, expected ({arr.shape[0]},)"
            )
        return out

    def predict_one(self, x) -> float:
        return float(self.predict(np.asarray(x, dtype=np.float64)[None, :])[0])

    def _predict_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


# ----------------------------------------------------------------- k-NN

class KnnRegressor(Predictor):
    """Unweighted k-nearest-neighbor mean; distance ties break to the lowest index."""

    def __init__(self, X: np.ndarray, y: np.ndarray, k: int):
        self._X = X
        self._y = y
        self.k = k
        self.input_dim = X.shape[1]

    def _predict_batch(self, Q: np.ndarray) -> np.ndarray:
        out = np.empty(Q.shape[0])
        chunk = max(1, int(2**21 // max(1, self._X.shape[0])))
        for lo in range(0, Q.shape[0], chunk):
            q = Q[lo : lo + chunk]
            d2 = (
                np.einsum("ij,ij->i", q, q)[:, None]
                - 2.0 * q @ self._X.T
                + np.einsum("ij,ij->i", self._X, self._X)[None, :]
            )
            # stable sort keeps the lowest training index among exact ties
            nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
            out[lo : lo + chunk] = self._y[nearest].mean(axis=1)
        return out


def knn_fit(X, y, k: int) -> KnnRegressor:
    Xa = as_points(X, "X")
    ya = np.asarray(y, dtype=np.float64)
    if ya.ndim != 1 or ya.shape[0] != Xa.shape[0]:
        raise InvalidInputError("y must be a vector matching the rows of X")
    if not np.all(np.isfinite(ya)):
        raise InvalidInputError("y contains non-finite values")
    if not 1 <= k <= Xa.shape[0]:
        raise InvalidInputError(f"k must be in [1, {Xa.shape[0]}]")
    return KnnRegressor(Xa.copy(), ya.copy(), int(k))


# ---------------------------------------------------------- bagged trees

@dataclass
class _Tree:
    feature: list = field(default_factory=list)     # -1 marks a leaf
    threshold: list = field(default_factory=list)
    left: list = field(default_factory=list)
    right: list = field(default_factory=list)
    value: list = field(default_factory=list)

    def build(self, X: np.ndarray, y: np.ndarray, root_idx: np.ndarray, min_split: int):
        # explicit stack: trees grown to purity can get deep
        stack = [(root_idx, -1, False)]
        while stack:
            idx, parent, is_left = stack.pop()
            node = len(self.feature)
            self.feature.append(-1)
            self.threshold.append(0.0)
            self.left.append(-1)
            self.right.append(-1)
            self.value.append(float(y[idx].mean()))
            if parent >= 0:
                if is_left:
                    self.left[parent] = node
                else:
                    self.right[parent] = node
            n = idx.size
            if n < min_split or np.all(y[idx] == y[idx][0]):
                continue
            best = None  # (sse, feature, threshold, order, pos)
            ysub = y[idx]
            for f in range(X.shape[1]):
                xv = X[idx, f]
                order = np.argsort(xv, kind="stable")
                xs = xv[order]
                ys = ysub[order]
                cut = np.nonzero(xs[1:] > xs[:-1])[0]  # split between distinct values only
                if cut.size == 0:
                    continue
                csum = np.cumsum(ys)
                csq = np.cumsum(ys * ys)
                total, total_sq = csum[-1], csq[-1]
                nl = cut + 1.0
                nr = n - nl
                sl = csum[cut]
                # node SSE = left + right, each sum(y^2) - (sum y)^2 / count
                sse = (csq[cut] - sl * sl / nl) + (total_sq - csq[cut] - (total - sl) ** 2 / nr)
                j = int(np.argmin(sse))
                if best is None or sse[j] < best[0] - 1e-12:
                    thr = 0.5 * (xs[cut[j]] + xs[cut[j] + 1])
                    best = (float(sse[j]), f, thr, order, int(cut[j]))
            if best is None:  # every feature constant on this node
                continue
            _, f, thr, order, pos = best
            self.feature[node] = f
            self.threshold[node] = thr
            # push right first so the left child is processed (and numbered) next
            stack.append((idx[order[pos + 1 :]], node, False))
            stack.append((idx[order[: pos + 1]], node, True))

    def freeze(self):
        self.feature = np.asarray(self.feature, dtype=np.int64)
        self.threshold = np.asarray(self.threshold, dtype=np.float64)
        self.left = np.asarray(self.left, dtype=np.int64)
        self.right = np.asarray(self.right, dtype=np.int64)
        self.value = np.asarray(self.value, dtype=np.float64)

    def predict(self, Q: np.ndarray) -> np.ndarray:
        node = np.zeros(Q.shape[0], dtype=np.int64)
        pending = self.feature[node] >= 0
        rows = np.arange(Q.shape[0])
        while pending.any():
            at = node[pending]
            f = self.feature[at]
            goes_left = Q[rows[pending], f] <= self.threshold[at]
            node[pending] = np.where(goes_left, self.left[at], self.right[at])
            pending = self.feature[node] >= 0
        return self.value[node]


class BaggedTrees(Predictor):
    """Bootstrap ensemble of variance-reduction regression trees, mean-aggregated."""

    def __init__(self, trees: list[_Tree], input_dim: int):
        self._trees = trees
        self.input_dim = input_dim

    @property
    def n_trees(self) -> int:
        return len(self._trees)

    def _predict_batch(self, Q: np.ndarray) -> np.ndarray:
        acc = np.zeros(Q.shape[0])
        for t in self._trees:
            acc += t.predict(Q)
        return acc / len(self._trees)


def trees_fit(
    X,
    y,
    n_trees: int = 100,
    seed: int = 0,
    bootstrap: bool = True,
    min_samples_split: int = 2,
) -> BaggedTrees:
    """Fit a bagged ensemble; trees grow to purity by default.

    `bootstrap=False` trains every tree on the full sample (so a single
    tree becomes a deterministic function of the data, handy for tests).
    """
    Xa = as_points(X, "X")
    ya = np.asarray(y, dtype=np.float64)
    if ya.ndim != 1 or ya.shape[0] != Xa.shape[0]:
        raise InvalidInputError("y must be a vector matching the rows of X")
    if not np.all(np.isfinite(ya)):
        raise InvalidInputError("y contains non-finite values")
    if n_trees < 1:
        raise InvalidInputError("n_trees must be >= 1")
    n = Xa.shape[0]
    trees = []
    for t in range(n_trees):
        if bootstrap:
            idx = Prng(derive_seed(seed, t), 0).below(n, n)
        else:
            idx = np.arange(n)
        tree = _Tree()
        tree.build(Xa, ya, np.asarray(idx, dtype=np.int64), min_samples_split)
        tree.freeze()
        trees.append(tree)
    return BaggedTrees(trees, Xa.shape[1])


# ------------------------------------------------------ analytic functions

def _linear7(X):
    return 10 * X[:, 0] - 20 * X[:, 1] - 2 * X[:, 2] + 3 * X[:, 3]


def _quad2(X):
    return -X[:, 0] ** 2 + 2 * X[:, 1]


def _ring(X):
    return X[:, 0] ** 2 + X[:, 1] ** 2


def _sign2(X):
    return 0.7 * np.sign(X[:, 0]) + np.sign(X[:, 1])


def _lambda_sine6(L):
    return 15 * L[:, 0] + 22 * L[:, 1] + 40 * (1 - L[:, 3]) * np.sin(3.14 * L[:, 3])


def _lambda_poly4(L):
    return L[:, 0] ** 2 + L[:, 0] * L[:, 1] - L[:, 2] * L[:, 3] + L[:, 3]


ANALYTIC_FUNCTIONS = {
    "linear7": (_linear7, 7),
    "quad2": (_quad2, 2),
    "ring": (_ring, 2),
    "sign2": (_sign2, 2),
    "lambda-sine6": (_lambda_sine6, 6),
    "lambda-poly4": (_lambda_poly4, 4),
}


class AnalyticPredictor(Predictor):
    def __init__(self, fn_id: str):
        if fn_id not in ANALYTIC_FUNCTIONS:
            known = ", ".join(sorted(ANALYTIC_FUNCTIONS))
            raise ConfigError(f"unknown analytic function {fn_id!r}; known: {known}")
        self.fn_id = fn_id
        self._fn, self.input_dim = ANALYTIC_FUNCTIONS[fn_id]

    def _predict_batch(self, X: np.ndarray) -> np.ndarray:
        return self._fn(X)


def analytic(fn_id: str) -> AnalyticPredictor:
    return AnalyticPredictor(fn_id)


# ------------------------------------------------------ external process

class ExternalPredictor(Predictor):
    """Adapter around a line-protocol child process.

    Request:  "PREDICT <rows> <cols>\\n" followed by <rows> lines of <cols>
    space-separated decimal floats. Response: <rows> lines, one float each.
    "QUIT\\n" asks the child to exit. A batch that takes longer than
    `timeout` seconds, a dead child, or a malformed reply raises
    PredictorIOError. Calls are serialized with a lock so one child can
    serve several explanation threads.
    """

    def __init__(self, command: str, input_dim: int, timeout: float = 30.0):
        if input_dim < 1:
            raise ConfigError("input_dim must be >= 1")
        self.input_dim = int(input_dim)
        self.command = command
        self.timeout = float(timeout)
        self._lock = threading.Lock()
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=False,
                bufsize=0,
            )
        except OSError as e:
            raise PredictorIOError(f"could not start external predictor: {e}") from e
        self._buf = b""
        self._sel = selectors.DefaultSelector()
        os.set_blocking(self._proc.stdout.fileno(), False)
        self._sel.register(self._proc.stdout, selectors.EVENT_READ)

    def _read_lines(self, count: int, deadline: float) -> list[bytes]:
        lines: list[bytes] = []
        while len(lines) < count:
            nl = self._buf.find(b"\n")
            if nl >= 0:
                lines.append(self._buf[:nl])
                self._buf = self._buf[nl + 1 :]
                continue
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise PredictorIOError(
                    f"external predictor timed out after {self.timeout:g}s "
                    f"({len(lines)}/{count} lines received)"
                )
            if not self._sel.select(timeout=min(remaining, 0.25)):
                continue
            chunk = self._proc.stdout.read(65536)
            if chunk:
                self._buf += chunk
            elif self._proc.poll() is not None:
                raise PredictorIOError(
                    f"external predictor exited with code {self._proc.returncode} "
                    f"after {len(lines)}/{count} reply lines"
                )
        return lines

    def _predict_batch(self, X: np.ndarray) -> np.ndarray:
        rows, cols = X.shape
        body = "\n".join(" ".join(f"{v:.17g}" for v in row) for row in X)
        msg = f"PREDICT {rows} {cols}\n{body}\n".encode()
        with self._lock:
            if self._proc.poll() is not None:
                raise PredictorIOError(
                    f"external predictor is not running (exit code {self._proc.returncode})"
                )
            try:
                self._proc.stdin.write(msg)
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as e:
                raise PredictorIOError(f"external predictor pipe closed: {e}") from e
            lines = self._read_lines(rows, time.monotonic() + self.timeout)
        out = np.empty(rows)
        for i, line in enumerate(lines):
            try:
                out[i] = float(line.strip())
            except ValueError:
                raise PredictorIOError(
                    f"external predictor reply line {i + 1} is not a number: "
                    f"{line[:80]!r}"
                ) from None
        if not np.all(np.isfinite(out)):
            raise PredictorIOError("external predictor returned non-finite values")
        return out

    def close(self):
        if self._proc.poll() is None:
            try:
                self._proc.stdin.write(b"QUIT\n")
                self._proc.stdin.flush()
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self._sel.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def external_predictor(command: str, input_dim: int, timeout: float = 30.0) -> ExternalPredictor:
    return ExternalPredictor(command, input_dim, timeout=timeout)

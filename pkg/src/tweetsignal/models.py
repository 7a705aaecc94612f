"""Multinomial Naive Bayes and L2-regularised logistic regression.

Class index 1 is Buy and 0 is Sell throughout.  Both models expose
``predict_proba`` (probability of Buy), ``predict`` and ``feature_weights``
(the magnitude RFE prunes on).  An exact 0.5 probability predicts Sell.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg
from scipy.special import expit, log_expit, logsumexp

from .labeler import BUY, SELL, encode_labels

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, grad_norm: float):
        super().__init__(message)
        self.grad_norm = grad_norm


def _as_2d(X):
    if sp.issparse(X):
        return sp.csr_matrix(X, dtype=float)
    X = np.asarray(X, dtype=float)
    return X.reshape(1, -1) if X.ndim == 1 else X


def _require_both_classes(y: np.ndarray) -> None:
    if y.size == 0 or y.min() == y.max():
        raise ValueError("training needs documents from both classes")


@dataclass
class MNBModel:
    class_log_prior: np.ndarray  # (2,)  [Sell, Buy]
    feature_log_prob: np.ndarray  # (2, V)
    alpha: float = 1.0

    @property
    def n_features(self) -> int:
        return self.feature_log_prob.shape[1]

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = _as_2d(X)
        if X.shape[1] != self.n_features:
            raise ValueError(f"row width {X.shape[1]} != model width {self.n_features}")
        return np.asarray(X @ self.feature_log_prob.T) + self.class_log_prior

    def posterior(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return np.exp(jll - logsumexp(jll, axis=1, keepdims=True))

    def predict_proba(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return expit(jll[:, 1] - jll[:, 0])

    def predict(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return (jll[:, 1] > jll[:, 0]).astype(np.int64)

    def feature_weights(self) -> np.ndarray:
        return np.abs(self.feature_log_prob[1] - self.feature_log_prob[0])

    def to_dict(self) -> dict:
        return {"kind": "mnb", "alpha": self.alpha,
                "class_log_prior": self.class_log_prior.tolist(),
                "feature_log_prob": self.feature_log_prob.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "MNBModel":
        return cls(np.asarray(d["class_log_prior"]), np.asarray(d["feature_log_prob"]), float(d["alpha"]))


def train_mnb(X, labels, alpha: float = 1.0) -> MNBModel:
    """theta[c, t] = (alpha + sum_{d in c} w[d, t]) / (alpha V + sum_{d in c} sum_t w[d, t])."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    X = _as_2d(X)
    y = encode_labels(labels)
    _require_both_classes(y)
    if (X.data if sp.issparse(X) else X).min(initial=0.0) < 0:
        raise ValueError("multinomial NB needs non-negative feature weights")
    V = X.shape[1]
    counts = np.vstack([np.asarray(X[y == c].sum(axis=0)).ravel() for c in (0, 1)])
    smoothed = counts + alpha
    log_prob = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    class_counts = np.array([(y == 0).sum(), (y == 1).sum()], dtype=float)
    prior = np.log(class_counts) - np.log(class_counts.sum())
    assert log_prob.shape == (2, V)
    return MNBModel(prior, log_prob, float(alpha))


@dataclass
class LRModel:
    theta: np.ndarray
    intercept: float
    lam: float
    cost_history: list = field(default_factory=list, repr=False)
    grad_norm: float = 0.0
    n_iter: int = 0

    @property
    def n_features(self) -> int:
        return len(self.theta)

    def decision_function(self, X) -> np.ndarray:
        X = _as_2d(X)
        if X.shape[1] != self.n_features:
            raise ValueError(f"row width {X.shape[1]} != model width {self.n_features}")
        return np.asarray(X @ self.theta).ravel() + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(np.int64)

    def feature_weights(self) -> np.ndarray:
        return np.abs(self.theta)

    def to_dict(self) -> dict:
        return {"kind": "lr", "lambda": self.lam, "theta": self.theta.tolist(),
                "intercept": self.intercept, "grad_norm": self.grad_norm, "n_iter": self.n_iter}

    @classmethod
    def from_dict(cls, d: dict) -> "LRModel":
        return cls(np.asarray(d["theta"], dtype=float), float(d["intercept"]), float(d["lambda"]),
                   grad_norm=float(d.get("grad_norm", 0.0)), n_iter=int(d.get("n_iter", 0)))


def lr_cost_and_grad(params: np.ndarray, X, c: np.ndarray, lam: float) -> tuple[float, np.ndarray]:
    """lam * ||theta||^2 + sum_i log(1 + exp(-c_i (theta . d_i + b))), intercept b unpenalised.

    ``params`` is theta followed by b; ``c`` holds labels in {-1, +1}.
    """
    theta, b = params[:-1], params[-1]
    margin = c * (np.asarray(X @ theta).ravel() + b)
    cost = lam * theta @ theta - log_expit(margin).sum()
    coef = -c * expit(-margin)  # d cost / d z_i
    grad = np.empty_like(params)
    grad[:-1] = 2.0 * lam * theta + np.asarray(X.T @ coef).ravel()
    grad[-1] = coef.sum()
    return float(cost), grad


def _lr_hessp(params: np.ndarray, X, c: np.ndarray, lam: float):
    """Hessian-vector product operator of the L2 logistic cost at ``params``."""
    theta, b = params[:-1], params[-1]
    z = np.asarray(X @ theta).ravel() + b
    w = expit(z) * expit(-z)

    def hv(v):
        v = np.asarray(v).ravel()
        u = w * (np.asarray(X @ v[:-1]).ravel() + v[-1])
        out = np.empty_like(v)
        out[:-1] = 2.0 * lam * v[:-1] + np.asarray(X.T @ u).ravel()
        out[-1] = u.sum()
        return out

    n = len(params)
    return LinearOperator((n, n), matvec=hv, dtype=float)


def train_lr(X, labels, lam: float = 1.0, tolerance: float = 1e-6, max_iters: int = 100) -> LRModel:
    """Minimise the L2 logistic cost by damped Newton-CG from theta = 0.

    Each Newton direction is solved inexactly with conjugate gradients and
    shortened by backtracking until the Armijo condition holds, so
    ``cost_history`` never increases.  Close to the optimum the achievable
    decrease falls below float resolution of the summed cost; a step is then
    also accepted if the cost stays within rounding of its previous value and
    the gradient shrinks.  Raises :class:`ConvergenceError` when the gradient
    infinity-norm is still above ``tolerance`` after ``max_iters`` steps.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    X = _as_2d(X)
    y = encode_labels(labels)
    _require_both_classes(y)
    c = np.where(y == 1, 1.0, -1.0)
    x = np.zeros(X.shape[1] + 1)
    cost, grad = lr_cost_and_grad(x, X, c, lam)
    history = [cost]
    gnorm = float(np.abs(grad).max())
    it = 0
    while gnorm > tolerance and it < max_iters:
        it += 1
        H = _lr_hessp(x, X, c, lam)
        forcing = min(0.1, np.sqrt(np.linalg.norm(grad)))
        step, _ = cg(H, -grad, rtol=forcing, maxiter=10 * len(x))
        slope = float(grad @ step)
        if slope >= 0:  # CG returned a non-descent direction; fall back to steepest descent
            step, slope = -grad, -float(grad @ grad)
        alpha = 1.0
        for _ in range(60):
            x_new = x + alpha * step
            cost_new, grad_new = lr_cost_and_grad(x_new, X, c, lam)
            gnorm_new = float(np.abs(grad_new).max())
            if cost_new <= cost + 1e-4 * alpha * slope:
                break
            if cost_new <= cost + 8 * np.finfo(float).eps * abs(cost) and gnorm_new < gnorm:
                cost_new = min(cost_new, cost)
                break
            alpha *= 0.5
        else:
            break
        x, cost, grad, gnorm = x_new, cost_new, grad_new, gnorm_new
        history.append(cost)
    if gnorm > tolerance:
        raise ConvergenceError(
            f"logistic regression did not converge in {it} iterations "
            f"(gradient inf-norm {gnorm:.3g} > {tolerance:g})", gnorm)
    return LRModel(x[:-1].copy(), float(x[-1]), float(lam), history, gnorm, it)


# --- prediction & evaluation -----------------------------------------------

def predict(model, row) -> tuple[str, float]:
    """Classify one row: (label, probability of Buy)."""
    p = float(model.predict_proba(row)[0])
    return (BUY if int(model.predict(row)[0]) else SELL), p


@dataclass
class EvaluationReport:
    n: int
    accuracy: float
    tbr: float | None
    tsr: float | None
    tbr_tsr_gap: float | None
    confusion: dict  # keys "buy_buy" (true, predicted) etc.

    def to_dict(self) -> dict:
        return {"n": self.n, "accuracy": self.accuracy, "tbr": self.tbr, "tsr": self.tsr,
                "tbr_tsr_gap": self.tbr_tsr_gap, "confusion": dict(self.confusion)}


def evaluate_predictions(truth, predicted) -> EvaluationReport:
    """Accuracy, True Buy Rate and True Sell Rate.

    A rate whose class is absent from ``truth`` is None (not applicable), and
    so is the gap then.
    """
    t = encode_labels(truth)
    p = encode_labels(predicted)
    if t.size == 0:
        raise ValueError("cannot evaluate an empty set")
    if t.shape != p.shape:
        raise ValueError("truth and predictions differ in length")
    bb = int(((t == 1) & (p == 1)).sum())
    bs = int(((t == 1) & (p == 0)).sum())
    sb = int(((t == 0) & (p == 1)).sum())
    ss = int(((t == 0) & (p == 0)).sum())
    n_buy, n_sell = bb + bs, sb + ss
    tbr = bb / n_buy if n_buy else None
    tsr = ss / n_sell if n_sell else None
    gap = abs(tbr - tsr) if tbr is not None and tsr is not None else None
    return EvaluationReport(len(t), (bb + ss) / len(t), tbr, tsr, gap,
                            {"buy_buy": bb, "buy_sell": bs, "sell_buy": sb, "sell_sell": ss})


def evaluate(model, X, labels) -> EvaluationReport:
    return evaluate_predictions(labels, model.predict(X))


def model_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "mnb":
        return MNBModel.from_dict(d)
    if kind == "lr":
        return LRModel.from_dict(d)
    raise ValueError(f"unknown model kind {kind!r}")


def train(kind: str, X, labels, alpha: float = 1.0, lam: float = 1.0, **kw):
    if kind == "mnb":
        return train_mnb(X, labels, alpha)
    if kind == "lr":
        return train_lr(X, labels, lam, **kw)
    raise ValueError(f"unknown model {kind!r}; expected 'mnb' or 'lr'")


def dumps_model(model, **extra) -> str:
    return json.dumps({"format_version": MODEL_FORMAT_VERSION, "model": model.to_dict(), **extra}, sort_keys=True)

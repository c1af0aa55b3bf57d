"""scikit-learn style wrappers.

Inputs are integers (``n`` for the divisor transformers, window starts ``x``
for the correlation estimator), given as a 1-d array or a single column.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .arith import DivisorVector, divisor_k, factorize, sieve_window, divisor_k_window
from .correlation import (
    CorrelationReport,
    MODES,
    _regime,
    correlation_sums,
    main_terms,
    resolve_params,
    shift_values,
)
from .skfilter import SkParams, desk_params, f_k_window, is_member


def _as_integers(X) -> np.ndarray:
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.shape[1] != 1:
        raise ValueError(f"expected a single column of integers, got shape {arr.shape}")
    arr = check_array(arr.reshape(-1, 1), dtype=None, ensure_all_finite=True).ravel()
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.mod(arr, 1) == 0):
            raise ValueError("inputs must be integers")
        arr = arr.astype(np.int64)
    if arr.size and arr.min() < 1:
        raise ValueError("inputs must be positive integers")
    return arr.astype(np.int64)


class DivisorFunction(TransformerMixin, BaseEstimator):
    """``n -> d_k(n)``."""

    def __init__(self, k: int = 2):
        self.k = k

    def fit(self, X, y=None):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        _as_integers(X)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        n = _as_integers(X)
        return np.array([divisor_k(factorize(int(v)), self.k) for v in n.tolist()],
                        dtype=np.int64).reshape(-1, 1)

    def window(self, start: int, length: int) -> DivisorVector:
        return divisor_k_window(sieve_window(start, length), self.k)


class RestrictedDivisorFunction(TransformerMixin, BaseEstimator):
    """``n -> f_k(n)``; thresholds default to ``desk_params`` at ``scale`` (or the smallest input)."""

    def __init__(self, k: int = 2, params: SkParams | None = None, scale: int | None = None):
        self.k = k
        self.params = params
        self.scale = scale

    def fit(self, X, y=None):
        n = _as_integers(X)
        if self.params is not None:
            self.params_ = self.params.for_k(self.k)
        else:
            scale = self.scale if self.scale is not None else int(n.min())
            self.params_ = desk_params(max(scale, 16), self.k)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        out = []
        for v in _as_integers(X).tolist():
            f = factorize(v)
            out.append(divisor_k(f, self.k) if is_member(f, self.params_) else 0)
        return np.array(out, dtype=np.int64).reshape(-1, 1)

    def window(self, start: int, length: int) -> DivisorVector:
        check_is_fitted(self, "params_")
        return f_k_window(sieve_window(start, length), self.k, self.params_)


class ShortIntervalCorrelation(BaseEstimator):
    """Per-shift correlation sums over windows ``(x, x + H1]`` against the singular-series main term.

    ``fit`` takes window starts ``x``; ``transform`` returns ``S(x, h)`` with one
    column per shift in ``shift_values(H2)`` order; ``predict`` returns the
    main term in the same layout; ``score`` is minus the normalised L1
    discrepancy, so larger is better.
    """

    def __init__(self, H1: int = 1000, H2: int = 10, k: int = 2, l: int = 2, mode: str = "dk_dl",
                 params: SkParams | None = None, q_trunc: int = 1000, method: str = "auto",
                 n_jobs: int = 1, scale: int | None = None):
        self.H1 = H1
        self.H2 = H2
        self.k = k
        self.l = l
        self.mode = mode
        self.params = params
        self.q_trunc = q_trunc
        self.method = method
        self.n_jobs = n_jobs
        self.scale = scale

    def _sums(self, xs: np.ndarray) -> np.ndarray:
        sums, _ = correlation_sums(xs.tolist(), self.H1, self.H2, self.k, self.l, self.mode,
                                   self.pk_, self.pl_, self.n_jobs, self.method)
        return sums

    def fit(self, X, y=None):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 1 <= self.H2 <= self.H1:
            raise ValueError("need 1 <= H2 <= H1")
        xs = _as_integers(X)
        if xs.size == 0:
            raise ValueError("need at least one window start")
        self.scale_ = int(self.scale if self.scale is not None else xs.min())
        if self.scale_ < 16:
            raise ValueError("scale must be at least 16")
        self.pk_ = self.pl_ = None
        if self.mode != "dk_dl":
            self.pk_, self.pl_ = resolve_params(self.scale_, self.k, self.l, self.params)
        self.shifts_ = shift_values(self.H2)
        self.main_term_, self.main_term_tail_ = main_terms(self.scale_, self.H1, self.H2,
                                                           self.k, self.l, self.q_trunc)
        order = np.argsort(xs, kind="stable")
        self.sampled_x_ = xs[order]
        self.sums_ = self._sums(self.sampled_x_)
        self.per_h_ = self.sums_.sum(axis=0) / xs.size
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "main_term_")
        return self._sums(_as_integers(X))

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "main_term_")
        n = _as_integers(X).size
        return np.tile(self.main_term_, (n, 1))

    def _norm(self) -> float:
        return self.H1 * self.H2 * math.log(self.scale_) ** (self.k + self.l - 2)

    def score(self, X, y=None) -> float:
        S = self.transform(X).astype(float)
        dev = np.abs(S - self.main_term_[None, :]).sum(axis=1) / self._norm()
        return -math.fsum(dev.tolist()) / S.shape[0]

    def report(self, seed: int = -1, sampling: str = "given") -> CorrelationReport:
        """The fitted state as a ``CorrelationReport``."""
        check_is_fitted(self, "main_term_")
        per_h = self.per_h_.tolist()
        main = self.main_term_.tolist()
        dev = np.abs(self.sums_ - self.main_term_[None, :]).sum(axis=1) / self._norm()
        ratios = [s / m for s, m in zip(per_h, main) if m > 0]
        return CorrelationReport(
            X=self.scale_, H1=self.H1, H2=self.H2, k=self.k, l=self.l, mode=self.mode,
            seed=seed, sampling=sampling, method=self.method, q_trunc=self.q_trunc,
            sampled_x=self.sampled_x_.tolist(), h=self.shifts_.tolist(), per_h=per_h,
            main_term=main, main_term_tail=list(self.main_term_tail_),
            l1_discrepancy=math.fsum(dev.tolist()) / dev.size,
            median_ratio=float(np.median(ratios)) if ratios else math.nan,
            regime=_regime(self.scale_, self.H1, self.H2),
            sk_member_fraction=None,
            params_used=None if self.pk_ is None else self.pk_.to_dict(),
        )

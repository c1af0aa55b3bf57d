"""Shifted correlation sums ``sum_{x < n <= x+H1} u(n) v(n+h)`` for every ``0 < |h| <= H2``.

Both value vectors cover ``(x - H2, x + H1 + H2]``: index 0 holds ``n = x - H2 + 1``,
so ``n`` in ``(x, x + H1]`` sits at indices ``H2 .. H2 + H1 - 1``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .arith import divisor_k_window, sieve_window
from .singular import singular_series
from .skfilter import SkParams, desk_params, membership_window

MODES = ("dk_dl", "fk_fl", "dk_fl")
METHODS = ("auto", "direct", "fft")
SAMPLINGS = ("uniform", "stratified")

_FLOAT_EXACT = 2.0**53


def shift_values(H2: int) -> np.ndarray:
    """``[-H2, ..., -1, 1, ..., H2]``: the order of every per-h array."""
    return np.concatenate([np.arange(-H2, 0), np.arange(1, H2 + 1)])


def _fft_is_exact(a: np.ndarray, b: np.ndarray, n_fft: int) -> bool:
    amax = float(np.abs(a).max(initial=0))
    bmax = float(np.abs(b).max(initial=0))
    if a.size * amax * bmax >= _FLOAT_EXACT:
        return False
    # rounding error of a double-precision FFT correlation is at most a small
    # multiple of eps log2(N) |a|_2 |b|_2; keep it well under 1/2 so rounding recovers integers
    err = 8.0 * np.finfo(float).eps * math.log2(n_fft) * float(np.linalg.norm(a)) * float(np.linalg.norm(b))
    return err < 0.25


def _direct(a: np.ndarray, v: np.ndarray, H1: int) -> np.ndarray:
    # every window of v of length H1 against a; row j is shift j - H2
    return sliding_window_view(v, H1) @ a


def _fft(a: np.ndarray, v: np.ndarray, H1: int) -> np.ndarray:
    L = v.size
    n_fft = 1 << (L + H1 - 1).bit_length()
    A = np.fft.rfft(a.astype(float), n_fft)
    V = np.fft.rfft(v.astype(float), n_fft)
    full = np.fft.irfft(np.conj(A) * V, n_fft)
    return full[: L - H1 + 1]


def correlate_window(u, v, H1: int, H2: int, method: str = "auto") -> np.ndarray:
    """Per-shift sums in ``shift_values(H2)`` order.

    ``method="fft"`` falls back to the direct path when integer inputs are
    too large for the transform to be exact; floating inputs are never rounded.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if H2 < 1:
        raise ValueError("H2 must be at least 1")
    if H1 < 0:
        raise ValueError("H1 must be nonnegative")
    u = np.asarray(u)
    v = np.asarray(v)
    need = H1 + 2 * H2
    if u.size < need or v.size < need:
        raise ValueError(f"vectors of length {min(u.size, v.size)} do not cover H1 + 2 H2 = {need}")
    u, v = u[:need], v[:need]
    integer = np.issubdtype(u.dtype, np.integer) and np.issubdtype(v.dtype, np.integer)
    out_dtype = np.int64 if integer else np.result_type(u.dtype, v.dtype, float)
    if H1 == 0:
        return np.zeros(2 * H2, dtype=out_dtype)
    a = u[H2 : H2 + H1]

    use_fft = method == "fft" or (method == "auto" and H2 > 32 and H1 > 256)
    if use_fft and integer:
        use_fft = _fft_is_exact(a, v, 1 << (need + H1 - 1).bit_length())
    if use_fft:
        full = _fft(a, v, H1)
        if integer:
            full = np.rint(full).astype(np.int64)
    else:
        if integer and H1 * float(np.abs(a).max()) * float(np.abs(v).max()) >= 2.0**63:
            full = np.array([sum(int(x) * int(y) for x, y in zip(a, v[j : j + H1]))
                             for j in range(2 * H2 + 1)], dtype=object)
        else:
            full = _direct(a, v, H1)
    return np.concatenate([full[:H2], full[H2 + 1 :]])


def _trial_factor(n: int) -> list[tuple[int, int]]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def _dk_trial(n: int, k: int) -> int:
    return math.prod(math.comb(e + k - 1, k - 1) for _, e in _trial_factor(n))


def brute_force_oracle(X: int, H1: int, H2: int, k: int, l: int, x: int) -> np.ndarray:
    """Trial division and a double loop; same layout as ``correlate_window``.

    ``X`` is accepted for parity with the engine and is not used.
    """
    del X
    dk, dl = {}, {}

    def d(cache, n, kk):
        if n not in cache:
            cache[n] = _dk_trial(n, kk)
        return cache[n]

    out = []
    for h in shift_values(H2).tolist():
        out.append(sum(d(dk, n, k) * d(dl, n + h, l) for n in range(x + 1, x + H1 + 1)))
    return np.array(out, dtype=np.int64)


@dataclass
class CorrelationReport:
    X: int
    H1: int
    H2: int
    k: int
    l: int
    mode: str
    seed: int
    sampling: str
    method: str
    q_trunc: int
    sampled_x: list[int]
    h: list[int]
    per_h: list[float]
    main_term: list[float]
    main_term_tail: list[float]
    l1_discrepancy: float
    median_ratio: float
    regime: dict
    sk_member_fraction: float | None
    params_used: dict | None
    notes: list[str] = field(default_factory=list)
    timing: float | None = None

    @property
    def ratios(self) -> list[float]:
        return [s / m if m else math.nan for s, m in zip(self.per_h, self.main_term)]

    def to_dict(self, include_timing: bool = False) -> dict:
        d = asdict(self)
        if not include_timing:
            d.pop("timing")
        return d

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "CorrelationReport":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "CorrelationReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "avg_sum", "main_term", "ratio"])
        for h, s, m, r in zip(self.h, self.per_h, self.main_term, self.ratios):
            w.writerow([h, repr(s), repr(m), repr(r)])
        return buf.getvalue()


def sample_x(X: int, num: int, seed: int, sampling: str = "uniform") -> list[int]:
    """Sorted draws from ``[X, 2X]``; ``stratified`` takes one draw per equal-width stratum."""
    if num < 1:
        raise ValueError("need at least one x sample")
    if sampling not in SAMPLINGS:
        raise ValueError(f"unknown sampling {sampling!r}")
    rng = np.random.default_rng(seed)
    if sampling == "uniform":
        xs = rng.integers(X, 2 * X + 1, size=num)
    else:
        edges = X + (np.arange(num + 1) * (X + 1)) // num
        xs = edges[:-1] + (rng.random(num) * (edges[1:] - edges[:-1])).astype(np.int64)
    return sorted(int(x) for x in xs)


def _regime(X: int, H1: int, H2: int) -> dict:
    LX = math.log(X)
    return {
        "eps1": 1.0 - math.log(H1) / LX,
        "eps2": 1.0 - math.log(H2) / math.log(H1) if H1 > 1 else math.nan,
        "phi": math.log(H1) / math.log(LX),
    }


def _window_pair(x: int, H1: int, H2: int, k: int, l: int, mode: str,
                 pk: SkParams | None, pl: SkParams | None):
    table = sieve_window(x - H2 + 1, H1 + 2 * H2)
    u = divisor_k_window(table, k).values
    v = u if l == k else divisor_k_window(table, l).values
    members = 0
    if mode in ("fk_fl", "dk_fl"):
        mask_l = membership_window(table, pl)
        v = np.where(mask_l, v, 0)
        members = int(mask_l[H2 : H2 + H1].sum())
    if mode == "fk_fl":
        mask_k = mask_l if pk is pl else membership_window(table, pk)
        u = np.where(mask_k, u, 0)
        members = int(mask_k[H2 : H2 + H1].sum())
    return u, v, members


def resolve_params(X: int, k: int, l: int, params: SkParams | None):
    """Per-factor S_k thresholds; the same object when ``k == l``."""
    base = params if params is not None else desk_params(X, k)
    pk, pl = base.for_k(k), base.for_k(l)
    return pk, (pk if pl == pk else pl)


def correlation_sums(xs, H1: int, H2: int, k: int, l: int, mode: str = "dk_dl",
                     pk: SkParams | None = None, pl: SkParams | None = None,
                     threads: int = 1, method: str = "auto") -> tuple[np.ndarray, int]:
    """``S(x, h)`` for every ``x`` in ``xs`` (rows, in the given order) and the S_k member count."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode != "dk_dl" and (pk is None or pl is None):
        raise ValueError(f"mode {mode!r} needs S_k thresholds")

    def one(x):
        u, v, members = _window_pair(int(x), H1, H2, k, l, mode, pk, pl)
        return correlate_window(u, v, H1, H2, method), members

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, xs))
    else:
        results = [one(x) for x in xs]
    if not results:
        return np.zeros((0, 2 * H2), dtype=np.int64), 0
    return np.stack([r[0] for r in results]).astype(np.int64), sum(r[1] for r in results)


def main_terms(X: int, H1: int, H2: int, k: int, l: int, q_trunc: int) -> tuple[np.ndarray, list[float]]:
    """``c_{h,k,l} H1 (log X)^(k+l-2)`` per shift, and the matching truncation-tail bounds."""
    shifts = shift_values(H2).tolist()
    series = {a: singular_series(a, k, l, q_trunc) for a in sorted({abs(h) for h in shifts})}
    scale = H1 * math.log(X) ** (k + l - 2)
    main = np.array([series[abs(h)].value * scale for h in shifts])
    return main, [series[abs(h)].tail_bound * scale for h in shifts]


def run_experiment(X: int, H1: int, H2: int, k: int, l: int, mode: str = "dk_dl",
                   params: SkParams | None = None, num_x_samples: int = 50, seed: int = 0,
                   q_trunc: int = 1000, threads: int = 1, method: str = "auto",
                   sampling: str = "uniform") -> CorrelationReport:
    """Average ``S(x, h)`` over sampled ``x`` and compare with ``c_{h,k,l} H1 (log X)^(k+l-2)``.

    ``l1_discrepancy`` is ``mean_x sum_h |S(x, h) - M(h)| / (H1 H2 (log X)^(k+l-2))``.
    """
    t0 = time.perf_counter()
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if not 1 <= H2 <= H1:
        raise ValueError("need 1 <= H2 <= H1")
    if X < 16:
        raise ValueError("X must be at least 16")
    if k < 2 or l < 2:
        raise ValueError("k and l must be at least 2 for the main term")
    xs = sample_x(X, num_x_samples, seed, sampling)

    notes = []
    pk = pl = None
    if mode != "dk_dl":
        pk, pl = resolve_params(X, k, l, params)
        if params is None:
            notes.append("S_k thresholds from desk_params")

    sums, members = correlation_sums(xs, H1, H2, k, l, mode, pk, pl, threads, method)
    shifts = shift_values(H2)
    main, tails = main_terms(X, H1, H2, k, l, q_trunc)

    totals = sums.sum(axis=0)
    per_h = [int(t) / len(xs) for t in totals.tolist()]
    dev = np.abs(sums - main[None, :]).sum(axis=1) / (H1 * H2 * math.log(X) ** (k + l - 2))
    l1 = math.fsum(dev.tolist()) / len(xs)
    ratios = [s / m for s, m in zip(per_h, main.tolist()) if m > 0]

    if mode != "dk_dl" and members == 0:
        notes.append("S_k is empty on every sampled window; sums are zero")
    return CorrelationReport(
        X=X, H1=H1, H2=H2, k=k, l=l, mode=mode, seed=seed, sampling=sampling, method=method,
        q_trunc=q_trunc, sampled_x=xs, h=shifts.tolist(), per_h=per_h,
        main_term=main.tolist(), main_term_tail=tails, l1_discrepancy=l1,
        median_ratio=float(np.median(ratios)) if ratios else math.nan,
        regime=_regime(X, H1, H2),
        sk_member_fraction=None if mode == "dk_dl" else members / (len(xs) * H1),
        params_used=None if pk is None else pk.to_dict(),
        notes=notes,
        timing=time.perf_counter() - t0,
    )

"""Slow, obviously-correct reference implementations used as test oracles."""

from __future__ import annotations

import numpy as np


def lfsr_pss(nid2: int) -> list[int]:
    """PSS d(n) from a bit-by-bit Fibonacci LFSR, no numpy tricks."""
    x = [0, 1, 1, 0, 1, 1, 1]
    while len(x) < 127:
        i = len(x) - 7
        x.append((x[i + 4] + x[i]) % 2)
    return [1 - 2 * x[(n + 43 * nid2) % 127] for n in range(127)]


def naive_idft(spectrum: np.ndarray) -> np.ndarray:
    """Direct (1/N) sum_k X(k) exp(j 2 pi k n / N)."""
    n = len(spectrum)
    k = np.arange(n)
    return np.array([np.sum(spectrum * np.exp(2j * np.pi * k * t / n)) for t in range(n)]) / n


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson r; 0 when either input is constant."""
    if a.min() == a.max() or b.min() == b.max():
        return 0.0
    a = a - a.mean()
    b = b - b.mean()
    return float(a @ b / np.sqrt((a @ a) * (b @ b)))


def naive_cross_correlation(s: np.ndarray, p: np.ndarray) -> np.ndarray:
    L = len(p)
    return np.array([_pearson(s[t:t + L], p) for t in range(len(s) - L + 1)])


def _arms(x: np.ndarray, t: int, half: int) -> tuple[np.ndarray, np.ndarray]:
    """x[t+n] and x[t-n] for n = 1..half."""
    return x[t + 1:t + half + 1], x[t - half:t][::-1]


def naive_symmetric_autocorr(s: np.ndarray, half: int) -> np.ndarray:
    return np.array([_pearson(*_arms(s, t, half)) for t in range(half, len(s) - half)])


def naive_sd(s: np.ndarray, half: int) -> np.ndarray:
    out = []
    for t in range(half, len(s) - half):
        fwd, bwd = _arms(s, t, half)
        out.append(np.sum(np.abs(fwd - bwd)))
    return np.array(out)


def naive_xor(b: np.ndarray, half: int) -> np.ndarray:
    b = b.astype(np.int64)
    return np.array([np.sum(np.bitwise_xor(*_arms(b, t, half))) for t in range(half, len(b) - half)])


def naive_xnor(b: np.ndarray, half: int) -> np.ndarray:
    b = b.astype(np.int64)
    return np.array([np.sum(1 - np.bitwise_xor(*_arms(b, t, half))) for t in range(half, len(b) - half)])


def naive_bit_similarity(b: np.ndarray, tmpl: np.ndarray) -> np.ndarray:
    L = len(tmpl)
    out = []
    for t in range(len(b) - L + 1):
        match = int(np.sum(b[t:t + L] == tmpl))
        out.append((match - (L - match)) / L)
    return np.array(out)


def sd_sigma_at(s: np.ndarray, center: int, half: int) -> float:
    return float(sum(abs(s[center + n] - s[center - n]) for n in range(1, half + 1)))

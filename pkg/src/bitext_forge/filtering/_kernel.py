"""Compiled batch kernels for the filter engine.

Texts arrive as one flat uint32 code point array per side plus offsets.
Kernels release the GIL and write into caller-owned arrays between
``start`` and ``end`` so a batch can be split across threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from bitext_forge.langid import _accumulate

# feature columns
F_CHAR_LEN = 0  # +0 source, +1 target, same for the next per-side groups
F_WORDS = 2
F_AVG = 4
F_MAX = 6
F_DIGIT = 8
F_NONWL = 10
F_LANGID = 12
F_LEV = 14
F_POISSON = 15
F_MISMATCH = 16
N_FEATURES = 17

# bound vector positions
B_MIN_CHAR, B_MAX_CHAR, B_MIN_WORDS, B_MAX_WORDS, B_MAX_AVG, B_MAX_MAX = 0, 1, 2, 3, 4, 5
B_MAX_DIGIT, B_MAX_NONWL, B_MIN_LEV, B_MIN_POISSON, B_MAX_MISMATCH = 6, 7, 8, 9, 10

# mask bits, in reporting order
BIT_EMPTY = 17  # +0 source, +1 target


@njit(cache=True, inline="always")
def _is_space(c):
    return (
        c == 32
        or 9 <= c <= 13
        or 28 <= c <= 31
        or c == 0x85
        or c == 0xA0
        or c == 0x1680
        or 0x2000 <= c <= 0x200A
        or c == 0x2028
        or c == 0x2029
        or c == 0x202F
        or c == 0x205F
        or c == 0x3000
    )


@njit(cache=True, nogil=True)
def _levenshtein_dp(a, b):
    if a.shape[0] < b.shape[0]:
        a, b = b, a
    m = b.shape[0]
    if m == 0:
        return a.shape[0]
    prev = np.arange(m + 1)
    cur = np.empty(m + 1, dtype=prev.dtype)
    for i in range(1, a.shape[0] + 1):
        cur[0] = i
        ca = a[i - 1]
        for j in range(1, m + 1):
            best = prev[j] + 1
            ins = cur[j - 1] + 1
            if ins < best:
                best = ins
            sub = prev[j - 1] + (0 if ca == b[j - 1] else 1)
            if sub < best:
                best = sub
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


# Direct match-mask rows for code points below this; rarer ones go through a
# short linear list.
_PEQ_DIRECT = 0x250


@njit(cache=True, nogil=True)
def _levenshtein(a, b, peq, vp, vn, extra_cp, extra_mask):
    """Block-wise bit-parallel edit distance (Myers 1999, Hyyro 2003).

    ``peq`` must be all zeros on entry and is zeroed again on exit. Scratch
    arrays must hold ``ceil(len(pattern) / 64)`` blocks.
    """
    if a.shape[0] < b.shape[0]:
        a, b = b, a
    m = b.shape[0]
    if m == 0:
        return a.shape[0]
    one = np.uint64(1)
    zero = np.uint64(0)
    words = (m + 63) // 64
    n_extra = 0
    for i in range(m):
        c = b[i]
        bit = one << np.uint64(i % 64)
        w = i // 64
        if c < _PEQ_DIRECT:
            peq[c, w] |= bit
        else:
            k = 0
            while k < n_extra and extra_cp[k] != c:
                k += 1
            if k == n_extra:
                extra_cp[k] = c
                for x in range(words):
                    extra_mask[k, x] = zero
                n_extra += 1
            extra_mask[k, w] |= bit
    for w in range(words):
        vp[w] = ~zero
        vn[w] = zero
    last = one << np.uint64((m - 1) % 64)
    dist = m
    for j in range(a.shape[0]):
        c = a[j]
        k = -1
        if c >= _PEQ_DIRECT:
            k = 0
            while k < n_extra and extra_cp[k] != c:
                k += 1
        hp_carry = one
        hn_carry = zero
        for w in range(words):
            if c < _PEQ_DIRECT:
                eq = peq[c, w]
            elif k < n_extra:
                eq = extra_mask[k, w]
            else:
                eq = zero
            v_p = vp[w]
            v_n = vn[w]
            x = eq | hn_carry
            d0 = (((x & v_p) + v_p) ^ v_p) | x | v_n
            hp = v_n | ~(d0 | v_p)
            hn = d0 & v_p
            if w == words - 1:
                if hp & last:
                    dist += 1
                if hn & last:
                    dist -= 1
            hp_out = hp >> np.uint64(63)
            hn_out = hn >> np.uint64(63)
            hp = (hp << one) | hp_carry
            hn = (hn << one) | hn_carry
            hp_carry = hp_out
            hn_carry = hn_out
            vp[w] = hn | ~(d0 | hp)
            vn[w] = hp & d0
    for i in range(m):
        c = b[i]
        if c < _PEQ_DIRECT:
            peq[c, i // 64] = zero
    return dist


def levenshtein_scratch(max_len):
    """Scratch buffers for ``_levenshtein`` with patterns up to ``max_len`` code points."""
    words = max(1, (max_len + 63) // 64)
    return (
        np.zeros((_PEQ_DIRECT, words), dtype=np.uint64),
        np.empty(words, dtype=np.uint64),
        np.empty(words, dtype=np.uint64),
        np.empty(max(1, max_len), dtype=np.uint32),
        np.empty((max(1, max_len), words), dtype=np.uint64),
    )


@njit(cache=True, nogil=True)
def _side(cp, lo, hi, wl_table, wl_id, feats, row, col, spans):
    """Fill per-side features; returns the word count and the number-word count.

    ``spans`` receives (start, end) of each word containing a digit.
    """
    n_words = 0
    letters = 0
    longest = 0
    digits = 0
    spaces = 0
    outside = 0
    n_numbers = 0
    limit = wl_table.shape[1]
    i = lo
    while i < hi:
        c = cp[i]
        if c == 32:
            spaces += 1
        else:
            if c >= limit or not wl_table[wl_id, c]:
                outside += 1
        if _is_space(c):
            i += 1
            continue
        start = i
        has_digit = False
        while i < hi and not _is_space(cp[i]):
            d = cp[i]
            if 48 <= d <= 57:
                digits += 1
                has_digit = True
            if i > start:
                if d == 32:
                    spaces += 1
                elif d >= limit or not wl_table[wl_id, d]:
                    outside += 1
            i += 1
        length = i - start
        n_words += 1
        letters += length
        if length > longest:
            longest = length
        if has_digit:
            spans[n_numbers, 0] = start
            spans[n_numbers, 1] = i
            n_numbers += 1
    total = hi - lo
    non_space = total - spaces
    feats[row, F_CHAR_LEN + col] = total
    feats[row, F_WORDS + col] = n_words
    feats[row, F_AVG + col] = letters / n_words if n_words else 0.0
    feats[row, F_MAX + col] = longest
    feats[row, F_DIGIT + col] = digits / non_space if non_space else 0.0
    feats[row, F_NONWL + col] = outside
    return n_words, n_numbers


@njit(cache=True)
def _same_span(a, a0, a1, b, b0, b1):
    if a1 - a0 != b1 - b0:
        return False
    for k in range(a1 - a0):
        if a[a0 + k] != b[b0 + k]:
            return False
    return True


@njit(cache=True, nogil=True)
def filter_kernel(
    s_cp, s_off, t_cp, t_off, s_wl, t_wl, s_lid, t_lid, wl_table,
    bounds, ln_table, lnfact_table, feats, masks, start, end, max_len,
):
    words = max(1, (max_len + 63) // 64)
    peq = np.zeros((_PEQ_DIRECT, words), dtype=np.uint64)
    vp = np.empty(words, dtype=np.uint64)
    vn = np.empty(words, dtype=np.uint64)
    extra_cp = np.empty(max(1, max_len), dtype=np.uint32)
    extra_mask = np.empty((max(1, max_len), words), dtype=np.uint64)
    s_spans = np.empty((64, 2), dtype=np.int64)
    t_spans = np.empty((64, 2), dtype=np.int64)
    for row in range(start, end):
        s0, s1 = s_off[row], s_off[row + 1]
        t0, t1 = t_off[row], t_off[row + 1]
        if s_spans.shape[0] < s1 - s0:
            s_spans = np.empty((s1 - s0, 2), dtype=np.int64)
        if t_spans.shape[0] < t1 - t0:
            t_spans = np.empty((t1 - t0, 2), dtype=np.int64)
        sw, sn = _side(s_cp, s0, s1, wl_table, s_wl[row], feats, row, 0, s_spans)
        tw, tn = _side(t_cp, t0, t1, wl_table, t_wl[row], feats, row, 1, t_spans)
        mask = 0
        if sw == 0:
            mask |= 1 << BIT_EMPTY
        if tw == 0:
            mask |= 1 << (BIT_EMPTY + 1)
        if mask:
            masks[row] = mask
            continue
        feats[row, F_LANGID] = s_lid[row]
        feats[row, F_LANGID + 1] = t_lid[row]
        for col in range(2):
            v = feats[row, F_CHAR_LEN + col]
            if not (v > bounds[B_MIN_CHAR] and v < bounds[B_MAX_CHAR]):
                mask |= 1 << (F_CHAR_LEN + col)
            v = feats[row, F_WORDS + col]
            if not (v > bounds[B_MIN_WORDS] and v < bounds[B_MAX_WORDS]):
                mask |= 1 << (F_WORDS + col)
            if not feats[row, F_AVG + col] < bounds[B_MAX_AVG]:
                mask |= 1 << (F_AVG + col)
            if not feats[row, F_MAX + col] < bounds[B_MAX_MAX]:
                mask |= 1 << (F_MAX + col)
            if not feats[row, F_DIGIT + col] < bounds[B_MAX_DIGIT]:
                mask |= 1 << (F_DIGIT + col)
            if feats[row, F_NONWL + col] > bounds[B_MAX_NONWL]:
                mask |= 1 << (F_NONWL + col)
            if feats[row, F_LANGID + col] == 0:
                mask |= 1 << (F_LANGID + col)

        lev = _levenshtein(s_cp[s0:s1], t_cp[t0:t1], peq, vp, vn, extra_cp, extra_mask)
        feats[row, F_LEV] = lev
        if not lev > bounds[B_MIN_LEV]:
            mask |= 1 << F_LEV

        # same operation order as poisson_lpmf so results are bit-identical
        a = sw
        b = tw
        p1 = b * ln_table[a] - a - lnfact_table[b]
        p2 = a * ln_table[b] - b - lnfact_table[a]
        p = p1 if p1 < p2 else p2
        feats[row, F_POISSON] = p
        if not p > bounds[B_MIN_POISSON]:
            mask |= 1 << F_POISSON

        matched = 0
        used = np.zeros(tn, dtype=np.bool_)
        for i in range(sn):
            for j in range(tn):
                if not used[j] and _same_span(
                    s_cp, s_spans[i, 0], s_spans[i, 1], t_cp, t_spans[j, 0], t_spans[j, 1]
                ):
                    used[j] = True
                    matched += 1
                    break
        mism = (sn - matched) + (tn - matched)
        feats[row, F_MISMATCH] = mism
        if mism > bounds[B_MAX_MISMATCH]:
            mask |= 1 << F_MISMATCH
        masks[row] = mask


@njit(cache=True, nogil=True)
def _find(keys, key, bits):
    mask = (1 << bits) - 1
    slot = np.int64((np.uint64(key) * np.uint64(0x9E3779B97F4A7C15)) >> np.uint64(64 - bits))
    while True:
        k = keys[slot]
        if k == key:
            return slot
        if k == 0:
            return -1
        slot = (slot + 1) & mask


@njit(cache=True, nogil=True)
def gate_kernel(cp, off, expected, n, keys, key_rows, bits, table, priors, out, start, end):
    """Top-1 language gate for texts ``start..end``; ``expected < 0`` skips a row."""
    bos = np.int64(ord("^") + 1)
    eos = np.int64(ord("$") + 1)
    unseen = table.shape[0] - 1
    n_lang = priors.shape[0]
    scores = np.empty(n_lang, dtype=np.float64)
    rows = np.empty(64, dtype=np.int64)
    for r in range(start, end):
        want = expected[r]
        if want < 0:
            out[r] = 1
            continue
        lo, hi = off[r], off[r + 1]
        length = hi - lo + 2
        n_grams = length - n + 1 if length > n else 1
        width = n if length > n else length
        if rows.shape[0] < n_grams:
            rows = np.empty(n_grams, dtype=np.int64)
        for g in range(n_grams):
            key = np.int64(0)
            for k in range(width):
                pos = g + k - 1
                if pos < 0:
                    c = bos
                elif pos >= hi - lo:
                    c = eos
                else:
                    c = np.int64(cp[lo + pos]) + 1
                key = (key << 21) | c
            idx = _find(keys, key, bits)
            rows[g] = unseen if idx < 0 else key_rows[idx]
        _accumulate(rows[:n_grams], table, priors, scores)
        best = scores[want]
        ok = 1
        for j in range(n_lang):
            if j != want and (scores[j] > best or (scores[j] == best and j < want)):
                ok = 0
                break
        out[r] = ok

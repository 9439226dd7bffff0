"""Hot inner loops over clause falsify masks.

Every kernel exists twice: a numba ``@njit`` loop (``nb_*``) and a pure
numpy / Python fallback (``np_*``).  The public name (no prefix) is bound to
the numba variant unless numba is missing or ``CNFLAB_DISABLE_NUMBA`` is set
to a non-empty value other than ``0`` at import time.

Masks are ``uint64`` falsify sets, so these kernels cover ``n <= 6``.
Clause subsets are either lexicographic index combinations or ``uint64``
selection keys (bit ``j`` set when universe clause ``j`` is chosen), the
latter limited to universes of at most 64 clauses.
"""

from __future__ import annotations

import os
from itertools import combinations, islice
from math import comb

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAS_NUMBA = numba is not None
USE_NUMBA = HAS_NUMBA and os.environ.get("CNFLAB_DISABLE_NUMBA", "") in ("", "0")

_CHUNK = 1 << 18

if HAS_NUMBA:
    njit = numba.njit(cache=True, nogil=True)
else:  # pragma: no cover
    def njit(f):
        return f


def popcount64(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    out = np.zeros(x.shape, dtype=np.int64)
    while np.any(x):
        out += (x & np.uint64(1)).astype(np.int64)
        x >>= np.uint64(1)
    return out


def binom_table(size: int) -> np.ndarray:
    t = np.zeros((size + 1, size + 1), dtype=np.int64)
    for a in range(size + 1):
        for b in range(a + 1):
            t[a, b] = comb(a, b)
    return t


def suffix_unions(masks: np.ndarray) -> np.ndarray:
    """``out[j]`` is the OR of ``masks[j:]``; ``out[len]`` is 0."""
    out = np.zeros(len(masks) + 1, dtype=np.uint64)
    for j in range(len(masks) - 1, -1, -1):
        out[j] = out[j + 1] | masks[j]
    return out


# ---------------------------------------------------------------------------
# per-formula classifiers (numba helpers)

@njit
def _nb_cover_unsat(masks, sel, k, full):
    u = np.uint64(0)
    for t in range(k):
        u |= masks[sel[t]]
    return u == full


@njit
def _nb_brute_unsat(cvars, cpols, sel, k, n):
    # Evaluate literals directly; no falsify masks involved.
    for a in range(1 << n):
        ok = True
        for t in range(k):
            c = sel[t]
            sat = False
            for q in range(3):
                if ((a >> (cvars[c, q] - 1)) & 1) == cpols[c, q]:
                    sat = True
                    break
            if not sat:
                ok = False
                break
        if ok:
            return False
    return True


@njit
def _nb_pivot_ins(masks, sel, k, npoints, counts):
    for v in range(npoints):
        counts[v] = 0
    for t in range(k):
        mk = masks[sel[t]]
        for v in range(npoints):
            if (mk >> np.uint64(v)) & np.uint64(1):
                counts[v] += 1
    for v in range(npoints):
        if counts[v] == 0:
            return False
    for t in range(k):
        mk = masks[sel[t]]
        found = False
        for v in range(npoints):
            if (mk >> np.uint64(v)) & np.uint64(1) and counts[v] == 1:
                found = True
                break
        if not found:
            return False
    return True


@njit
def _nb_deletion_ins(masks, sel, k, full, pre):
    # pre[t] = OR of the first t selected masks
    pre[0] = np.uint64(0)
    for t in range(k):
        pre[t + 1] = pre[t] | masks[sel[t]]
    if pre[k] != full:
        return False
    suf = np.uint64(0)
    for t in range(k - 1, -1, -1):
        if (pre[t] | suf) == full:
            return False
        suf |= masks[sel[t]]
    return True


@njit
def _nb_next_comb(idx, k, nitems):
    i = k - 1
    while i >= 0 and idx[i] == nitems - k + i:
        i -= 1
    if i < 0:
        return False
    idx[i] += 1
    for j in range(i + 1, k):
        idx[j] = idx[j - 1] + 1
    return True


# ---------------------------------------------------------------------------
# exhaustive / batched agreement scans

@njit
def nb_exhaustive_sat_scan(masks, cvars, cpols, n, m):
    """Scan all m-subsets; return (formulas, unsat by cover, disagreements)."""
    nitems = masks.shape[0]
    full = np.uint64((1 << (1 << n)) - 1) if n < 6 else ~np.uint64(0)
    total = 0
    unsat = 0
    bad = 0
    if m > nitems or m < 1:
        return 0, 0, 0
    idx = np.arange(m)
    while True:
        a = _nb_cover_unsat(masks, idx, m, full)
        b = _nb_brute_unsat(cvars, cpols, idx, m, n)
        total += 1
        if a:
            unsat += 1
        if a != b:
            bad += 1
        if not _nb_next_comb(idx, m, nitems):
            break
    return total, unsat, bad


@njit
def nb_batch_sat_scan(masks, cvars, cpols, n, sels, sizes):
    """Per-row cover and brute-force verdicts for padded selection rows."""
    full = np.uint64((1 << (1 << n)) - 1) if n < 6 else ~np.uint64(0)
    out = np.zeros((sels.shape[0], 2), dtype=np.bool_)
    for r in range(sels.shape[0]):
        out[r, 0] = _nb_cover_unsat(masks, sels[r], sizes[r], full)
        out[r, 1] = _nb_brute_unsat(cvars, cpols, sels[r], sizes[r], n)
    return out


@njit
def nb_exhaustive_ins_scan(masks, n, m):
    """Scan all m-subsets with both INS classifiers.

    Returns (formulas, unsat, ins by pivots, ins by deletion, disagreements).
    """
    nitems = masks.shape[0]
    npoints = 1 << n
    full = np.uint64((1 << npoints) - 1) if n < 6 else ~np.uint64(0)
    counts = np.zeros(npoints, dtype=np.int64)
    pre = np.zeros(m + 1, dtype=np.uint64)
    total = 0
    unsat = 0
    piv = 0
    dele = 0
    bad = 0
    if m > nitems or m < 1:
        return 0, 0, 0, 0, 0
    idx = np.arange(m)
    while True:
        total += 1
        if _nb_cover_unsat(masks, idx, m, full):
            unsat += 1
        a = _nb_pivot_ins(masks, idx, m, npoints, counts)
        b = _nb_deletion_ins(masks, idx, m, full, pre)
        if a:
            piv += 1
        if b:
            dele += 1
        if a != b:
            bad += 1
        if not _nb_next_comb(idx, m, nitems):
            break
    return total, unsat, piv, dele, bad


@njit
def nb_batch_ins_scan(masks, n, sels, sizes):
    npoints = 1 << n
    full = np.uint64((1 << npoints) - 1) if n < 6 else ~np.uint64(0)
    counts = np.zeros(npoints, dtype=np.int64)
    pre = np.zeros(sels.shape[1] + 1, dtype=np.uint64)
    out = np.zeros((sels.shape[0], 2), dtype=np.bool_)
    for r in range(sels.shape[0]):
        out[r, 0] = _nb_pivot_ins(masks, sels[r], sizes[r], npoints, counts)
        out[r, 1] = _nb_deletion_ins(masks, sels[r], sizes[r], full, pre)
    return out


def _full_mask(n: int) -> np.uint64:
    return np.uint64((1 << (1 << n)) - 1)


def _np_literal_eval(cvars, cpols, n):
    """sat[c, a] is True when assignment ``a`` satisfies clause ``c``."""
    a = np.arange(1 << n, dtype=np.int64)
    bits = (a[None, None, :] >> (cvars[:, :, None].astype(np.int64) - 1)) & 1
    return np.any(bits == cpols[:, :, None], axis=1)


def _np_classify_sat(masks, sat_table, sel, n):
    full = _full_mask(n)
    unions = np.bitwise_or.reduce(masks[sel], axis=1)
    cover = unions == full
    # assignment a satisfies the formula iff every chosen clause is satisfied
    satisfied = np.all(sat_table[sel], axis=1)
    brute = ~np.any(satisfied, axis=1)
    return cover, brute


def _np_classify_ins(masks, sel, n):
    full = _full_mask(n)
    npoints = 1 << n
    chosen = masks[sel]                                    # (F, k)
    k = sel.shape[1]
    pts = np.arange(npoints, dtype=np.uint64)
    member = ((chosen[:, :, None] >> pts[None, None, :]) & np.uint64(1)).astype(bool)
    counts = member.sum(axis=1)                            # (F, npoints)
    covered = np.all(counts > 0, axis=1)
    private = np.any(member & (counts[:, None, :] == 1), axis=2)
    pivot = covered & np.all(private, axis=1)
    pre = np.zeros((sel.shape[0], k + 1), dtype=np.uint64)
    suf = np.zeros((sel.shape[0], k + 1), dtype=np.uint64)
    for t in range(k):
        pre[:, t + 1] = pre[:, t] | chosen[:, t]
        suf[:, k - t - 1] = suf[:, k - t] | chosen[:, k - t - 1]
    unsat = pre[:, k] == full
    still = np.zeros(sel.shape[0], dtype=bool)
    for t in range(k):
        still |= (pre[:, t] | suf[:, t + 1]) == full
    deletion = unsat & ~still
    return pivot, deletion


def _comb_chunks(nitems, m):
    it = combinations(range(nitems), m)
    while True:
        chunk = list(islice(it, _CHUNK))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.int64).reshape(len(chunk), m)


def np_exhaustive_sat_scan(masks, cvars, cpols, n, m):
    if m > len(masks) or m < 1:
        return 0, 0, 0
    sat_table = _np_literal_eval(cvars, cpols, n)
    total = unsat = bad = 0
    for sel in _comb_chunks(len(masks), m):
        cover, brute = _np_classify_sat(masks, sat_table, sel, n)
        total += len(sel)
        unsat += int(cover.sum())
        bad += int((cover != brute).sum())
    return total, unsat, bad


def np_batch_sat_scan(masks, cvars, cpols, n, sels, sizes):
    sat_table = _np_literal_eval(cvars, cpols, n)
    out = np.zeros((len(sels), 2), dtype=bool)
    for k in np.unique(sizes):
        rows = np.nonzero(sizes == k)[0]
        cover, brute = _np_classify_sat(masks, sat_table, sels[rows, :k], n)
        out[rows, 0] = cover
        out[rows, 1] = brute
    return out


def np_exhaustive_ins_scan(masks, n, m):
    if m > len(masks) or m < 1:
        return 0, 0, 0, 0, 0
    full = _full_mask(n)
    total = unsat = piv = dele = bad = 0
    for sel in _comb_chunks(len(masks), m):
        pivot, deletion = _np_classify_ins(masks, sel, n)
        total += len(sel)
        unsat += int((np.bitwise_or.reduce(masks[sel], axis=1) == full).sum())
        piv += int(pivot.sum())
        dele += int(deletion.sum())
        bad += int((pivot != deletion).sum())
    return total, unsat, piv, dele, bad


def np_batch_ins_scan(masks, n, sels, sizes):
    out = np.zeros((len(sels), 2), dtype=bool)
    for k in np.unique(sizes):
        rows = np.nonzero(sizes == k)[0]
        pivot, deletion = _np_classify_ins(masks, sels[rows, :k], n)
        out[rows, 0] = pivot
        out[rows, 1] = deletion
    return out


# ---------------------------------------------------------------------------
# census DFS over canonical clause order

@njit
def _nb_popcount(x):
    pc = 0
    while x:
        x &= x - np.uint64(1)
        pc += 1
    return pc


@njit
def nb_unsat_dfs_unit(masks, suffix, full, per_clause, m, first, binom, max_nodes):
    """Count m-subsets with smallest index ``first`` whose masks cover ``full``.

    A prefix that already covers everything is not expanded further; its
    completions are counted with one binomial.  Returns (count, nodes); a
    node count above ``max_nodes`` means the unit was aborted.
    """
    nitems = masks.shape[0]
    if first + m > nitems:
        return 0, 0
    nodes = 1
    if masks[first] == full:
        return binom[nitems - 1 - first, m - 1], nodes
    if m == 1:
        return 0, nodes
    unions = np.zeros(m + 1, dtype=np.uint64)
    nxt = np.zeros(m + 1, dtype=np.int64)
    unions[1] = masks[first]
    nxt[1] = first + 1
    count = 0
    depth = 1
    while depth > 0:
        if nodes > max_nodes:
            return count, nodes
        u = unions[depth]
        slots = m - depth - 1
        j = nxt[depth]
        pushed = False
        while j <= nitems - (m - depth):
            if (u | suffix[j]) != full:
                break
            nodes += 1
            nu = u | masks[j]
            missing = full & ~nu
            if missing == 0:
                count += binom[nitems - 1 - j, slots]
            elif (slots > 0 and (missing & ~suffix[j + 1]) == 0
                  and _nb_popcount(missing) <= slots * per_clause):
                nxt[depth] = j + 1
                unions[depth + 1] = nu
                depth += 1
                nxt[depth] = j + 1
                pushed = True
                break
            j += 1
        if not pushed:
            depth -= 1
    return count, nodes


def np_unsat_dfs_unit(masks, suffix, full, per_clause, m, first, binom, max_nodes):
    """Level-by-level expansion of the same canonical-order search.

    Prefixes are merged on (union, last index), the only state the rest of
    the search depends on, and carried with their multiplicity.  ``nodes``
    counts merged states expanded, so it is not comparable with the numba
    kernel's node count.
    """
    nitems = len(masks)
    if first + m > nitems:
        return 0, 0
    nodes = 1
    if masks[first] == full:
        return int(binom[nitems - 1 - first, m - 1]), nodes
    u = np.array([masks[first]], dtype=np.uint64)
    last = np.array([first], dtype=np.int64)
    mult = np.array([1], dtype=np.int64)
    count = 0
    for depth in range(1, m):
        slots = m - depth - 1
        su, sl, sm = [], [], []
        for j in range(first + 1, nitems - (m - depth) + 1):
            keep = (last < j) & ((u | suffix[j]) == full)
            if not keep.any():
                continue
            nodes += int(keep.sum())
            if nodes > max_nodes:
                return count, nodes
            nu = u[keep] | masks[j]
            w = mult[keep]
            missing = full & ~nu
            done = missing == 0
            if done.any():
                count += int(w[done].sum()) * int(binom[nitems - 1 - j, slots])
            if slots == 0:
                continue
            live = ~done & ((missing & ~suffix[j + 1]) == 0)
            live &= popcount64(missing) <= slots * per_clause
            if live.any():
                su.append(nu[live])
                sl.append(np.full(int(live.sum()), j, dtype=np.int64))
                sm.append(w[live])
        if not su:
            break
        key = np.stack([np.concatenate(su).view(np.int64), np.concatenate(sl)], axis=1)
        uniq, inv = np.unique(key, axis=0, return_inverse=True)
        mult = np.zeros(len(uniq), dtype=np.int64)
        np.add.at(mult, inv.ravel(), np.concatenate(sm))
        u = uniq[:, 0].copy().view(np.uint64)
        last = uniq[:, 1].copy()
    return count, nodes


@njit
def nb_ins_dfs_unit(masks, suffix, full, m, first, max_nodes, out, out_pos):
    """Enumerate m-subsets with smallest index ``first`` that are INS.

    Every chosen clause must keep a point covered by no other chosen clause;
    a branch is cut as soon as one clause loses its last such point, and a
    covering prefix is never extended.  Hits are written to ``out`` as
    selection keys when ``out`` is non-empty.

    Returns (count, nodes, out_pos).
    """
    nitems = masks.shape[0]
    if first + m > nitems:
        return 0, 0, out_pos
    idx = np.zeros(m + 1, dtype=np.int64)
    once = np.zeros(m + 1, dtype=np.uint64)
    multi = np.zeros(m + 1, dtype=np.uint64)
    idx[0] = first
    once[1] = masks[first]
    multi[1] = np.uint64(0)
    nodes = 1
    count = 0
    if once[1] == full:
        if m == 1:
            if out.shape[0] > 0:
                out[out_pos] = np.uint64(1) << np.uint64(first)
            return 1, nodes, out_pos + 1
        return 0, nodes, out_pos
    depth = 1
    nxt = np.zeros(m + 1, dtype=np.int64)
    nxt[1] = first + 1
    while depth > 0:
        if nodes > max_nodes:
            return count, nodes, out_pos
        j = nxt[depth]
        pushed = False
        while depth < m and j <= nitems - (m - depth):
            mk = masks[j]
            o = once[depth]
            mu = multi[depth]
            covered = o | mu
            nodes += 1
            if (mk & ~covered) == 0:
                j += 1
                continue
            if ((covered | suffix[j]) & full) != full:
                j = nitems
                break
            no = (o & ~mk) | (mk & ~covered)
            nm = mu | (o & mk)
            ok = True
            if (o & mk) != 0:
                for t in range(depth):
                    if (masks[idx[t]] & no) == 0:
                        ok = False
                        break
            if not ok:
                j += 1
                continue
            if (no | nm) == full:
                if depth + 1 == m:
                    if out.shape[0] > 0:
                        key = np.uint64(0)
                        for t in range(depth):
                            key |= np.uint64(1) << np.uint64(idx[t])
                        key |= np.uint64(1) << np.uint64(j)
                        out[out_pos] = key
                    out_pos += 1
                    count += 1
                j += 1
                continue
            if depth + 1 == m:
                j += 1
                continue
            nxt[depth] = j + 1
            idx[depth] = j
            once[depth + 1] = no
            multi[depth + 1] = nm
            depth += 1
            nxt[depth] = j + 1
            pushed = True
            break
        if pushed:
            continue
        depth -= 1
    return count, nodes, out_pos


def np_ins_dfs_unit(masks, suffix, full, m, first, max_nodes, out, out_pos):
    """Plain-Python version of :func:`nb_ins_dfs_unit` on integer masks."""
    nitems = len(masks)
    if first + m > nitems:
        return 0, 0, out_pos
    ms = [int(x) for x in masks]
    sf = [int(x) for x in suffix]
    fl = int(full)
    state = {"nodes": 1, "count": 0, "pos": out_pos}
    collect = len(out) > 0

    if ms[first] == fl:
        if m == 1:
            if collect:
                out[out_pos] = np.uint64(1 << first)
            return 1, 1, out_pos + 1
        return 0, 1, out_pos

    chosen = [first]

    def rec(once, multi, start):
        depth = len(chosen)
        covered = once | multi
        for j in range(start, nitems - (m - depth) + 1):
            if state["nodes"] > max_nodes:
                return
            state["nodes"] += 1
            mk = ms[j]
            if mk & ~covered == 0:
                continue
            if (covered | sf[j]) & fl != fl:
                return
            no = (once & ~mk) | (mk & ~covered)
            nm = multi | (once & mk)
            if once & mk and any(ms[t] & no == 0 for t in chosen):
                continue
            if no | nm == fl:
                if depth + 1 == m:
                    if collect:
                        key = 0
                        for t in chosen:
                            key |= 1 << t
                        out[state["pos"]] = np.uint64(key | (1 << j))
                    state["pos"] += 1
                    state["count"] += 1
                continue
            if depth + 1 == m:
                continue
            chosen.append(j)
            rec(no, nm, j + 1)
            chosen.pop()

    rec(ms[first], 0, first + 1)
    return state["count"], state["nodes"], state["pos"]


@njit
def nb_collect_cover_keys(masks, full, m, out):
    """Selection keys of the m-subsets whose masks cover ``full``.

    With an empty ``out`` only the count is returned.
    """
    nitems = masks.shape[0]
    if m > nitems or m < 1:
        return 0
    idx = np.arange(m)
    pos = 0
    while True:
        if _nb_cover_unsat(masks, idx, m, full):
            if out.shape[0] > 0:
                key = np.uint64(0)
                for t in range(m):
                    key |= np.uint64(1) << np.uint64(idx[t])
                out[pos] = key
            pos += 1
        if not _nb_next_comb(idx, m, nitems):
            break
    return pos


def np_collect_cover_keys(masks, full, m, out):
    if m > len(masks) or m < 1:
        return 0
    bits = np.uint64(1) << np.arange(len(masks), dtype=np.uint64)
    pos = 0
    for sel in _comb_chunks(len(masks), m):
        hit = np.bitwise_or.reduce(masks[sel], axis=1) == full
        k = int(hit.sum())
        if k and len(out):
            out[pos:pos + k] = np.bitwise_or.reduce(bits[sel[hit]], axis=1)
        pos += k
    return pos


# ---------------------------------------------------------------------------
# reduction search

@njit
def nb_first_subset_hit(items, p, catalog, max_nodes):
    """First lexicographic p-subset of ``items`` whose OR is in ``catalog``.

    ``items`` are single-bit selection keys; ``catalog`` is sorted.  Returns
    (position of the hit or -1, candidates examined, selection key).
    """
    nitems = items.shape[0]
    if p > nitems or p < 1:
        return -1, 0, np.uint64(0)
    idx = np.arange(p)
    visited = 0
    while True:
        key = np.uint64(0)
        for t in range(p):
            key |= items[idx[t]]
        visited += 1
        pos = np.searchsorted(catalog, key)
        if pos < catalog.shape[0] and catalog[pos] == key:
            return visited - 1, visited, key
        if visited >= max_nodes:
            return -1, visited, np.uint64(0)
        if not _nb_next_comb(idx, p, nitems):
            break
    return -1, visited, np.uint64(0)


def np_first_subset_hit(items, p, catalog, max_nodes):
    nitems = len(items)
    if p > nitems or p < 1:
        return -1, 0, np.uint64(0)
    visited = 0
    for sel in _comb_chunks(nitems, p):
        keys = np.bitwise_or.reduce(items[sel], axis=1)
        pos = np.searchsorted(catalog, keys)
        pos = np.minimum(pos, max(len(catalog) - 1, 0))
        hit = (catalog[pos] == keys) if len(catalog) else np.zeros(len(keys), bool)
        if hit.any():
            first = int(np.argmax(hit))
            if visited + first + 1 > max_nodes:
                return -1, max_nodes, np.uint64(0)
            return visited + first, visited + first + 1, keys[first]
        visited += len(sel)
        if visited >= max_nodes:
            return -1, max_nodes, np.uint64(0)
    return -1, visited, np.uint64(0)


@njit
def nb_first_contained(entries, target):
    for i in range(entries.shape[0]):
        if (entries[i] & ~target) == 0:
            return i
    return -1


def np_first_contained(entries, target):
    hit = (entries & ~np.uint64(target)) == 0
    return int(np.argmax(hit)) if hit.any() else -1


if USE_NUMBA:
    exhaustive_sat_scan = nb_exhaustive_sat_scan
    batch_sat_scan = nb_batch_sat_scan
    exhaustive_ins_scan = nb_exhaustive_ins_scan
    batch_ins_scan = nb_batch_ins_scan
    unsat_dfs_unit = nb_unsat_dfs_unit
    ins_dfs_unit = nb_ins_dfs_unit
    first_subset_hit = nb_first_subset_hit
    first_contained = nb_first_contained
    collect_cover_keys = nb_collect_cover_keys
else:
    exhaustive_sat_scan = np_exhaustive_sat_scan
    batch_sat_scan = np_batch_sat_scan
    exhaustive_ins_scan = np_exhaustive_ins_scan
    batch_ins_scan = np_batch_ins_scan
    unsat_dfs_unit = np_unsat_dfs_unit
    ins_dfs_unit = np_ins_dfs_unit
    first_subset_hit = np_first_subset_hit
    first_contained = np_first_contained
    collect_cover_keys = np_collect_cover_keys

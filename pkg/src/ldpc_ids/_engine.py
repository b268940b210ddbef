"""Numba kernels for message passing and the dynamic schedules.

All decoders share one flat state layout: messages are indexed by edge id
(check-major order), totals by VN. Argmax scans run in ascending index order
with strict `>` so the lowest index always wins a tie.
"""

import math

import numpy as np
from numba import njit

LLR_MAX = 30.0
ATANH_CLIP = 1.0 - 1e-12

# counter slots
C_PROP = 0       # C2V propagations
C_V2C = 1        # V2C updates
C_PRE = 2        # C2V pre-updates (precomputed message + residual)
C_CI = 3         # CI updates
C_CMP = 4        # residual and CI comparisons
C_MSEL = 5       # multi-VN selection comparisons
C_KHITS = 6      # threshold fallbacks taken
C_KTRIALS = 7    # threshold tests made
N_COUNTERS = 8

KERNEL_EXACT = 0
KERNEL_MINSUM = 1


@njit(cache=True)
def _clamp(x):
    if x > LLR_MAX:
        return LLR_MAX
    if x < -LLR_MAX:
        return -LLR_MAX
    return x


@njit(cache=True)
def _p0(llr):
    # numerically stable logistic
    if llr >= 0.0:
        return 1.0 / (1.0 + math.exp(-llr))
    e = math.exp(llr)
    return e / (1.0 + e)


@njit(cache=True)
def _cn_msg(v2c, cn_ptr, m, skip_e, kernel):
    """C2V message from check m excluding edge skip_e."""
    if kernel == KERNEL_EXACT:
        prod = 1.0
        count = 0
        for e in range(cn_ptr[m], cn_ptr[m + 1]):
            if e == skip_e:
                continue
            prod *= math.tanh(0.5 * _clamp(v2c[e]))
            count += 1
        if count == 0:
            return 0.0
        if prod > ATANH_CLIP:
            prod = ATANH_CLIP
        elif prod < -ATANH_CLIP:
            prod = -ATANH_CLIP
        return _clamp(2.0 * math.atanh(prod))
    sign = 1.0
    mag = 1e300
    count = 0
    for e in range(cn_ptr[m], cn_ptr[m + 1]):
        if e == skip_e:
            continue
        v = _clamp(v2c[e])
        if v < 0.0:
            sign = -sign
            v = -v
        if v < mag:
            mag = v
        count += 1
    if count == 0:
        return 0.0
    return _clamp(sign * mag)


@njit(cache=True)
def _cn_msg_cached(th, v2c, cn_ptr, m, skip_e, kernel):
    """C2V message using the cached tanh(v2c/2) values (exact kernel)."""
    if kernel != KERNEL_EXACT:
        return _cn_msg(v2c, cn_ptr, m, skip_e, kernel)
    prod = 1.0
    count = 0
    for e in range(cn_ptr[m], cn_ptr[m + 1]):
        if e == skip_e:
            continue
        prod *= th[e]
        count += 1
    if count == 0:
        return 0.0
    if prod > ATANH_CLIP:
        prod = ATANH_CLIP
    elif prod < -ATANH_CLIP:
        prod = -ATANH_CLIP
    return _clamp(2.0 * math.atanh(prod))


@njit(cache=True)
def _init_state(chl, edge_vn, cn_ptr, vn_ptr, vn_edges, kernel,
                c2v, v2c, pre_c2v, residual, total, pre_total, ci, th):
    n_edges = len(edge_vn)
    n_vars = len(chl)
    n_checks = len(cn_ptr) - 1
    for e in range(n_edges):
        c2v[e] = 0.0
        v2c[e] = _clamp(chl[edge_vn[e]])
        th[e] = math.tanh(0.5 * v2c[e])
    for n in range(n_vars):
        total[n] = chl[n]
    for m in range(n_checks):
        for e in range(cn_ptr[m], cn_ptr[m + 1]):
            pre_c2v[e] = _cn_msg(v2c, cn_ptr, m, e, kernel)
            residual[e] = abs(pre_c2v[e] - c2v[e])
    for n in range(n_vars):
        s = chl[n]
        for k in range(vn_ptr[n], vn_ptr[n + 1]):
            s += pre_c2v[vn_edges[k]]
        pre_total[n] = s
        ci[n] = abs(_p0(total[n]) - _p0(pre_total[n]))


@njit(cache=True)
def _propagate(e_star, edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges, kernel,
               chl, c2v, v2c, pre_c2v, residual, total, pre_total, ci,
               counters, maintain_ci, res_tree, res_tsize, ci_tree, ci_tsize,
               th):
    """Forward one precomputed C2V message and refresh the two-hop state.

    With a nonzero tree size the residual (and, under CI maintenance, CI)
    segment trees are kept in sync with every array write.
    """
    m_star = edge_cn[e_star]
    n_star = edge_vn[e_star]
    old = c2v[e_star]
    c2v[e_star] = pre_c2v[e_star]
    residual[e_star] = 0.0
    if res_tsize > 0:
        _tree_update(res_tree, res_tsize, e_star, 0.0)
    total[n_star] += c2v[e_star] - old
    if maintain_ci:
        ci[n_star] = abs(_p0(total[n_star]) - _p0(pre_total[n_star]))
        if ci_tsize > 0:
            _tree_update(ci_tree, ci_tsize, n_star, ci[n_star])
    counters[C_PROP] += 1
    for k in range(vn_ptr[n_star], vn_ptr[n_star + 1]):
        f = vn_edges[k]
        i = edge_cn[f]
        if i == m_star:
            continue
        v2c[f] = _clamp(total[n_star] - c2v[f])
        th[f] = math.tanh(0.5 * v2c[f])
        counters[C_V2C] += 1
        for g in range(cn_ptr[i], cn_ptr[i + 1]):
            j = edge_vn[g]
            if j == n_star:
                continue
            old_pre = pre_c2v[g]
            pre_c2v[g] = _cn_msg_cached(th, v2c, cn_ptr, i, g, kernel)
            residual[g] = abs(pre_c2v[g] - c2v[g])
            if res_tsize > 0:
                _tree_update(res_tree, res_tsize, g, residual[g])
            counters[C_PRE] += 1
            pre_total[j] += pre_c2v[g] - old_pre
            if maintain_ci:
                ci[j] = abs(_p0(total[j]) - _p0(pre_total[j]))
                if ci_tsize > 0:
                    _tree_update(ci_tree, ci_tsize, j, ci[j])
                counters[C_CI] += 1


@njit(cache=True)
def _syndrome_ok(total, edge_cn, edge_vn, n_checks):
    parity = np.zeros(n_checks, dtype=np.int8)
    for e in range(len(edge_cn)):
        if total[edge_vn[e]] < 0.0:
            parity[edge_cn[e]] ^= 1
    for m in range(n_checks):
        if parity[m]:
            return False
    return True


@njit(cache=True)
def _record_boundary(k, total, pre_total, k_info,
                     biterr_all, biterr_info, trace_llrs):
    errs = 0
    errs_info = 0
    n_vars = len(total)
    for n in range(n_vars):
        if total[n] < 0.0:
            errs += 1
            if n < k_info:
                errs_info += 1
    biterr_all[k] = errs
    biterr_info[k] = errs_info
    if trace_llrs.shape[0] > 0:
        for n in range(n_vars):
            trace_llrs[k, n] = total[n]
            trace_llrs[k, n_vars + n] = pre_total[n]


@njit(cache=True)
def _fill_remaining(k, i_max, biterr_all, biterr_info, trace_llrs):
    for kk in range(k + 1, i_max + 1):
        biterr_all[kk] = biterr_all[k]
        biterr_info[kk] = biterr_info[k]
        if trace_llrs.shape[0] > 0:
            for c in range(trace_llrs.shape[1]):
                trace_llrs[kk, c] = trace_llrs[k, c]


@njit(cache=True)
def _tree_build(values, n):
    """Max segment tree over values[:n]; returns (tree, size).

    Queries descend preferring the left child on ties, which reproduces the
    lowest-index argmax of a linear strict-greater scan exactly.
    """
    size = 1
    while size < n:
        size *= 2
    tree = np.full(2 * size, -1.0)
    for i in range(n):
        tree[size + i] = values[i]
    for i in range(size - 1, 0, -1):
        left = tree[2 * i]
        right = tree[2 * i + 1]
        tree[i] = left if left >= right else right
    return tree, size


@njit(cache=True)
def _tree_update(tree, size, idx, value):
    i = size + idx
    tree[i] = value
    i >>= 1
    while i >= 1:
        left = tree[2 * i]
        right = tree[2 * i + 1]
        tree[i] = left if left >= right else right
        i >>= 1


@njit(cache=True)
def _tree_argmax(tree, size):
    i = 1
    while i < size:
        i = 2 * i if tree[2 * i] >= tree[2 * i + 1] else 2 * i + 1
    return i - size


@njit(cache=True)
def _argmax_all(values):
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


@njit(cache=True)
def _argmax_vn_edges(residual, vn_ptr, vn_edges, n):
    best = vn_edges[vn_ptr[n]]
    for k in range(vn_ptr[n] + 1, vn_ptr[n + 1]):
        e = vn_edges[k]
        if residual[e] > residual[best]:
            best = e
    return best


@njit(cache=True)
def _rand_next(state):
    # splitmix64-style mix; int64 wraps with numpy semantics
    state[0] = state[0] * 6364136223846793005 + 1442695040888963407
    z = state[0]
    z ^= z >> 33
    z *= -49064778989728563  # 0xFF51AFD7ED558CCD as int64
    z ^= z >> 33
    if z < 0:
        z = -(z + 1)
    return z


@njit(cache=True)
def _select_vns(ci, mask, n_g, n_p, rng_state, out_p):
    """CI-quantized group selection (uniform N_G-level quantizer, top groups
    first, seeded uniform fill from the first partially-used group).

    Returns the number of selected VNs written to out_p (ascending order).
    """
    n_vars = len(ci)
    sizes = np.zeros(n_g, dtype=np.int64)
    for n in range(n_vars):
        if not mask[n]:
            continue
        g = int(ci[n] * n_g)
        if g > n_g - 1:
            g = n_g - 1
        sizes[g] += 1
    # largest k with |union of top-k groups| <= n_p
    k_star = 0
    cum = 0
    for k in range(1, n_g + 1):
        cum += sizes[n_g - k]
        if cum <= n_p:
            k_star = k
        else:
            break
    count = 0
    threshold_group = n_g - k_star  # groups >= this are wholly included
    for n in range(n_vars):
        if not mask[n]:
            continue
        g = int(ci[n] * n_g)
        if g > n_g - 1:
            g = n_g - 1
        if g >= threshold_group:
            out_p[count] = n
            count += 1
    if count < n_p and k_star < n_g:
        fill_group = n_g - k_star - 1
        members = np.empty(sizes[fill_group], dtype=np.int64)
        idx = 0
        for n in range(n_vars):
            if not mask[n]:
                continue
            g = int(ci[n] * n_g)
            if g > n_g - 1:
                g = n_g - 1
            if g == fill_group:
                members[idx] = n
                idx += 1
        need = n_p - count
        if need > idx:
            need = idx
        for t in range(need):
            r = t + _rand_next(rng_state) % (idx - t)
            tmp = members[t]
            members[t] = members[r]
            members[r] = tmp
            out_p[count] = members[t]
            count += 1
    out_p[:count].sort()
    return count


@njit(cache=True)
def _decode_rbp(edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges, chl, kernel, i_max,
                k_info, c2v, v2c, pre_c2v, residual, total, pre_total, ci,
                counters, biterr_all, biterr_info, trace_llrs):
    n_checks = len(cn_ptr) - 1
    n_edges = len(edge_cn)
    th = np.empty(len(edge_cn))
    _init_state(chl, edge_vn, cn_ptr, vn_ptr, vn_edges, kernel,
                c2v, v2c, pre_c2v, residual, total, pre_total, ci, th)
    _record_boundary(0, total, pre_total, k_info,
                     biterr_all, biterr_info, trace_llrs)
    res_tree, res_tsize = _tree_build(residual, n_edges)
    no_tree = np.zeros(1)
    converged = False
    prop = 0
    while prop < i_max * n_edges:
        e_star = _tree_argmax(res_tree, res_tsize)
        counters[C_CMP] += n_edges - 1
        _propagate(e_star, edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges, kernel,
                   chl, c2v, v2c, pre_c2v, residual, total, pre_total, ci,
                   counters, False, res_tree, res_tsize, no_tree, 0, th)
        prop += 1
        if prop % n_edges == 0:
            k = prop // n_edges
            _record_boundary(k, total, pre_total, k_info,
                             biterr_all, biterr_info, trace_llrs)
            if _syndrome_ok(total, edge_cn, edge_vn, n_checks):
                converged = True
                _fill_remaining(k, i_max, biterr_all, biterr_info, trace_llrs)
                break
    return prop, converged


@njit(cache=True)
def _decode_cirbp(edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges, chl, kernel,
                  i_max, k_info, gamma,
                  c2v, v2c, pre_c2v, residual, total, pre_total, ci,
                  counters, biterr_all, biterr_info, trace_llrs,
                  kappa_hits_iter, kappa_trials_iter):
    n_checks = len(cn_ptr) - 1
    n_edges = len(edge_cn)
    n_vars = len(chl)
    th = np.empty(len(edge_cn))
    _init_state(chl, edge_vn, cn_ptr, vn_ptr, vn_edges, kernel,
                c2v, v2c, pre_c2v, residual, total, pre_total, ci, th)
    _record_boundary(0, total, pre_total, k_info,
                     biterr_all, biterr_info, trace_llrs)
    res_tree, res_tsize = _tree_build(residual, n_edges)
    ci_tree, ci_tsize = _tree_build(ci, n_vars)
    converged = False
    prop = 0
    while prop < i_max * n_edges:
        it = prop // n_edges
        n_star = _tree_argmax(ci_tree, ci_tsize)
        counters[C_CMP] += n_vars - 1
        counters[C_CMP] += 1  # threshold test
        counters[C_KTRIALS] += 1
        kappa_trials_iter[it] += 1
        if ci[n_star] < gamma:
            counters[C_KHITS] += 1
            kappa_hits_iter[it] += 1
            e_star = _tree_argmax(res_tree, res_tsize)
            counters[C_CMP] += n_edges - 1
        else:
            e_star = _argmax_vn_edges(residual, vn_ptr, vn_edges, n_star)
            counters[C_CMP] += (vn_ptr[n_star + 1] - vn_ptr[n_star]) - 1
        _propagate(e_star, edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges, kernel,
                   chl, c2v, v2c, pre_c2v, residual, total, pre_total, ci,
                   counters, True, res_tree, res_tsize, ci_tree, ci_tsize, th)
        prop += 1
        if prop % n_edges == 0:
            k = prop // n_edges
            _record_boundary(k, total, pre_total, k_info,
                             biterr_all, biterr_info, trace_llrs)
            if _syndrome_ok(total, edge_cn, edge_vn, n_checks):
                converged = True
                _fill_remaining(k, i_max, biterr_all, biterr_info, trace_llrs)
                break
    return prop, converged


@njit(cache=True)
def _lmd_next_edge(edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges,
                   residual, e_prev, simplified, counters):
    """Select the next edge after propagating e_prev (latest-message search).

    Residual argmax over {(i,j) : i in M(n*)\\m*, j in N(i)\\n*}; a degree-1
    n* widens the check set to all of M(n*). Returns -1 if the candidate set
    is empty.
    """
    m_star = edge_cn[e_prev]
    n_star = edge_vn[e_prev]
    deg1 = (vn_ptr[n_star + 1] - vn_ptr[n_star]) == 1
    best = -1
    ncand = 0
    for k in range(vn_ptr[n_star], vn_ptr[n_star + 1]):
        f = vn_edges[k]
        i = edge_cn[f]
        if not deg1 and i == m_star:
            continue
        for g in range(cn_ptr[i], cn_ptr[i + 1]):
            if edge_vn[g] == n_star:
                continue
            if best < 0 or residual[g] > residual[best]:
                best = g
            ncand += 1
    if ncand > 1:
        counters[C_CMP] += ncand - 1
    if best < 0:
        return -1
    if not simplified:
        n_prime = edge_vn[best]
        best = _argmax_vn_edges(residual, vn_ptr, vn_edges, n_prime)
        counters[C_CMP] += (vn_ptr[n_prime + 1] - vn_ptr[n_prime]) - 1
    return best


@njit(cache=True)
def _decode_lmdrbp(edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges, chl, kernel,
                   i_max, k_info, simplified,
                   c2v, v2c, pre_c2v, residual, total, pre_total, ci,
                   counters, biterr_all, biterr_info, trace_llrs):
    n_checks = len(cn_ptr) - 1
    n_edges = len(edge_cn)
    th = np.empty(len(edge_cn))
    _init_state(chl, edge_vn, cn_ptr, vn_ptr, vn_edges, kernel,
                c2v, v2c, pre_c2v, residual, total, pre_total, ci, th)
    _record_boundary(0, total, pre_total, k_info,
                     biterr_all, biterr_info, trace_llrs)
    no_tree = np.zeros(1)
    converged = False
    prop = 0
    e_star = _argmax_all(residual)  # bootstrap: global residual maximum
    counters[C_CMP] += n_edges - 1
    while prop < i_max * n_edges:
        _propagate(e_star, edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges, kernel,
                   chl, c2v, v2c, pre_c2v, residual, total, pre_total, ci,
                   counters, False, no_tree, 0, no_tree, 0, th)
        prop += 1
        if prop % n_edges == 0:
            k = prop // n_edges
            _record_boundary(k, total, pre_total, k_info,
                             biterr_all, biterr_info, trace_llrs)
            if _syndrome_ok(total, edge_cn, edge_vn, n_checks):
                converged = True
                _fill_remaining(k, i_max, biterr_all, biterr_info, trace_llrs)
                break
        if prop >= i_max * n_edges:
            break
        e_next = _lmd_next_edge(edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges,
                                residual, e_star, simplified, counters)
        if e_next < 0:
            e_next = _argmax_all(residual)
            counters[C_CMP] += n_edges - 1
        e_star = e_next
    return prop, converged


@njit(cache=True)
def _ci_argmax_twohop(edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges, ci,
                      e_prev, counters):
    """Max-CI VN in the two-hop set U(m*, n*) of the just-updated edge.

    For a degree-1 n* the candidates are N(m*)\\n* instead. Candidates are
    deduplicated; ties go to the lowest VN index. Returns -1 if empty.
    """
    m_star = edge_cn[e_prev]
    n_star = edge_vn[e_prev]
    deg1 = (vn_ptr[n_star + 1] - vn_ptr[n_star]) == 1
    best = -1
    ncand = 0
    if deg1:
        for g in range(cn_ptr[m_star], cn_ptr[m_star + 1]):
            j = edge_vn[g]
            if j == n_star:
                continue
            if best < 0 or ci[j] > ci[best] or (ci[j] == ci[best] and j < best):
                best = j
            ncand += 1
    else:
        n_vars = len(ci)
        seen = np.zeros(n_vars, dtype=np.int8)
        for k in range(vn_ptr[n_star], vn_ptr[n_star + 1]):
            f = vn_edges[k]
            i = edge_cn[f]
            if i == m_star:
                continue
            for g in range(cn_ptr[i], cn_ptr[i + 1]):
                j = edge_vn[g]
                if j == n_star or seen[j]:
                    continue
                seen[j] = 1
                if best < 0 or ci[j] > ci[best] or (ci[j] == ci[best] and j < best):
                    best = j
                ncand += 1
    if ncand > 1:
        counters[C_CMP] += ncand - 1
    return best


@njit(cache=True)
def _decode_lmd_cirbp(edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges, chl, kernel,
                      i_max, k_info,
                      c2v, v2c, pre_c2v, residual, total, pre_total, ci,
                      counters, biterr_all, biterr_info, trace_llrs):
    n_checks = len(cn_ptr) - 1
    n_edges = len(edge_cn)
    n_vars = len(chl)
    th = np.empty(len(edge_cn))
    _init_state(chl, edge_vn, cn_ptr, vn_ptr, vn_edges, kernel,
                c2v, v2c, pre_c2v, residual, total, pre_total, ci, th)
    _record_boundary(0, total, pre_total, k_info,
                     biterr_all, biterr_info, trace_llrs)
    no_tree = np.zeros(1)
    converged = False
    prop = 0
    # bootstrap: global max-CI VN, then max-residual check among its edges
    n_star = _argmax_all(ci)
    counters[C_CMP] += n_vars - 1
    e_star = _argmax_vn_edges(residual, vn_ptr, vn_edges, n_star)
    counters[C_CMP] += (vn_ptr[n_star + 1] - vn_ptr[n_star]) - 1
    while prop < i_max * n_edges:
        _propagate(e_star, edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges, kernel,
                   chl, c2v, v2c, pre_c2v, residual, total, pre_total, ci,
                   counters, True, no_tree, 0, no_tree, 0, th)
        prop += 1
        if prop % n_edges == 0:
            k = prop // n_edges
            _record_boundary(k, total, pre_total, k_info,
                             biterr_all, biterr_info, trace_llrs)
            if _syndrome_ok(total, edge_cn, edge_vn, n_checks):
                converged = True
                _fill_remaining(k, i_max, biterr_all, biterr_info, trace_llrs)
                break
        if prop >= i_max * n_edges:
            break
        n_next = _ci_argmax_twohop(edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges,
                                   ci, e_star, counters)
        if n_next < 0:
            n_next = _argmax_all(ci)
            counters[C_CMP] += n_vars - 1
        e_star = _argmax_vn_edges(residual, vn_ptr, vn_edges, n_next)
        counters[C_CMP] += (vn_ptr[n_next + 1] - vn_ptr[n_next]) - 1
    return prop, converged


@njit(cache=True)
def _decode_me_cirbp(edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges, chl, kernel,
                     i_max, k_info, n_p, n_g, sel_seed,
                     c2v, v2c, pre_c2v, residual, total, pre_total, ci,
                     counters, biterr_all, biterr_info, trace_llrs):
    n_checks = len(cn_ptr) - 1
    n_edges = len(edge_cn)
    n_vars = len(chl)
    th = np.empty(len(edge_cn))
    _init_state(chl, edge_vn, cn_ptr, vn_ptr, vn_edges, kernel,
                c2v, v2c, pre_c2v, residual, total, pre_total, ci, th)
    _record_boundary(0, total, pre_total, k_info,
                     biterr_all, biterr_info, trace_llrs)
    rng_state = np.empty(1, dtype=np.int64)
    rng_state[0] = sel_seed
    no_tree = np.zeros(1)
    mask = np.ones(n_vars, dtype=np.int8)
    selected = np.empty(n_p, dtype=np.int64)
    converged = False
    prop = 0
    boundary = 1
    while boundary <= i_max and not converged:
        count = _select_vns(ci, mask, n_g, n_p, rng_state, selected)
        counters[C_MSEL] += n_g
        for idx in range(count):
            p = selected[idx]
            e_star = _argmax_vn_edges(residual, vn_ptr, vn_edges, p)
            counters[C_CMP] += (vn_ptr[p + 1] - vn_ptr[p]) - 1
            _propagate(e_star, edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges,
                       kernel, chl, c2v, v2c, pre_c2v, residual, total,
                       pre_total, ci, counters, True, no_tree, 0, no_tree, 0, th)
            prop += 1
        while boundary <= i_max and prop >= boundary * n_edges:
            _record_boundary(boundary, total, pre_total, k_info,
                             biterr_all, biterr_info, trace_llrs)
            if _syndrome_ok(total, edge_cn, edge_vn, n_checks):
                converged = True
                _fill_remaining(boundary, i_max,
                                biterr_all, biterr_info, trace_llrs)
            boundary += 1
            if converged:
                break
    return prop, converged


@njit(cache=True)
def _decode_me_lmd_cirbp(edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges, chl,
                         kernel, i_max, k_info, n_p, n_g, sel_seed,
                         c2v, v2c, pre_c2v, residual, total, pre_total, ci,
                         counters, biterr_all, biterr_info, trace_llrs):
    n_checks = len(cn_ptr) - 1
    n_edges = len(edge_cn)
    n_vars = len(chl)
    th = np.empty(len(edge_cn))
    _init_state(chl, edge_vn, cn_ptr, vn_ptr, vn_edges, kernel,
                c2v, v2c, pre_c2v, residual, total, pre_total, ci, th)
    _record_boundary(0, total, pre_total, k_info,
                     biterr_all, biterr_info, trace_llrs)
    rng_state = np.empty(1, dtype=np.int64)
    rng_state[0] = sel_seed
    no_tree = np.zeros(1)
    mask = np.ones(n_vars, dtype=np.int8)
    selected = np.empty(n_p, dtype=np.int64)
    chosen_edges = np.empty(n_p, dtype=np.int64)
    in_pprime = np.zeros(n_vars, dtype=np.int8)
    converged = False
    prop = 0
    boundary = 1
    count = _select_vns(ci, mask, n_g, n_p, rng_state, selected)
    counters[C_MSEL] += n_g
    while boundary <= i_max and not converged:
        for idx in range(count):
            p = selected[idx]
            e_star = _argmax_vn_edges(residual, vn_ptr, vn_edges, p)
            counters[C_CMP] += (vn_ptr[p + 1] - vn_ptr[p]) - 1
            chosen_edges[idx] = e_star
            _propagate(e_star, edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges,
                       kernel, chl, c2v, v2c, pre_c2v, residual, total,
                       pre_total, ci, counters, True, no_tree, 0, no_tree, 0, th)
            prop += 1
        while boundary <= i_max and prop >= boundary * n_edges:
            _record_boundary(boundary, total, pre_total, k_info,
                             biterr_all, biterr_info, trace_llrs)
            if _syndrome_ok(total, edge_cn, edge_vn, n_checks):
                converged = True
                _fill_remaining(boundary, i_max,
                                biterr_all, biterr_info, trace_llrs)
            boundary += 1
            if converged:
                break
        if converged or boundary > i_max:
            break
        # next target set: each p suggests the max-CI VN of its two-hop set
    # (duplicates collapse), topped up by group selection if short
        n_prime_count = 0
        for n in range(n_vars):
            in_pprime[n] = 0
        for idx in range(count):
            p_next = _ci_argmax_twohop(edge_cn, edge_vn, cn_ptr, vn_ptr,
                                       vn_edges, ci, chosen_edges[idx],
                                       counters)
            if p_next >= 0 and not in_pprime[p_next]:
                in_pprime[p_next] = 1
                selected[n_prime_count] = p_next
                n_prime_count += 1
        if n_prime_count < n_p:
            for n in range(n_vars):
                mask[n] = 1 - in_pprime[n]
            extra = _select_vns(ci, mask, n_g, n_p - n_prime_count,
                                rng_state, selected[n_prime_count:])
            counters[C_MSEL] += n_g
            count = n_prime_count + extra
        else:
            count = n_prime_count
        selected[:count].sort()
    return prop, converged


@njit(cache=True)
def _decode_flooding(edge_cn, edge_vn, cn_ptr, vn_ptr, vn_edges, chl, kernel,
                     i_max, k_info,
                     c2v, v2c, pre_c2v, residual, total, pre_total, ci,
                     counters, biterr_all, biterr_info, trace_llrs):
    n_checks = len(cn_ptr) - 1
    n_edges = len(edge_cn)
    n_vars = len(chl)
    want_trace = trace_llrs.shape[0] > 0
    for e in range(n_edges):
        c2v[e] = 0.0
        v2c[e] = _clamp(chl[edge_vn[e]])
    for n in range(n_vars):
        total[n] = chl[n]
    if want_trace:
        _flood_pre_totals(edge_vn, cn_ptr, vn_ptr, vn_edges, chl, kernel,
                          v2c, pre_c2v, pre_total, ci, total)
    _record_boundary(0, total, pre_total, k_info,
                     biterr_all, biterr_info, trace_llrs)
    converged = False
    it = 0
    for it in range(1, i_max + 1):
        for m in range(n_checks):
            for e in range(cn_ptr[m], cn_ptr[m + 1]):
                pre_c2v[e] = _cn_msg(v2c, cn_ptr, m, e, kernel)
        for e in range(n_edges):
            c2v[e] = pre_c2v[e]
        counters[C_PROP] += n_edges
        for n in range(n_vars):
            s = chl[n]
            for k in range(vn_ptr[n], vn_ptr[n + 1]):
                s += c2v[vn_edges[k]]
            total[n] = s
            for k in range(vn_ptr[n], vn_ptr[n + 1]):
                e = vn_edges[k]
                v2c[e] = _clamp(s - c2v[e])
                counters[C_V2C] += 1
        if want_trace:
            _flood_pre_totals(edge_vn, cn_ptr, vn_ptr, vn_edges, chl, kernel,
                              v2c, pre_c2v, pre_total, ci, total)
        _record_boundary(it, total, pre_total, k_info,
                         biterr_all, biterr_info, trace_llrs)
        if _syndrome_ok(total, edge_cn, edge_vn, n_checks):
            converged = True
            _fill_remaining(it, i_max, biterr_all, biterr_info, trace_llrs)
            break
    return it * n_edges if i_max > 0 else 0, converged


@njit(cache=True)
def _flood_pre_totals(edge_vn, cn_ptr, vn_ptr, vn_edges, chl, kernel,
                      v2c, scratch, pre_total, ci, total):
    """Next-iteration totals (and CI) from the current V2C messages."""
    n_checks = len(cn_ptr) - 1
    n_vars = len(chl)
    for m in range(n_checks):
        for e in range(cn_ptr[m], cn_ptr[m + 1]):
            scratch[e] = _cn_msg(v2c, cn_ptr, m, e, kernel)
    for n in range(n_vars):
        s = chl[n]
        for k in range(vn_ptr[n], vn_ptr[n + 1]):
            s += scratch[vn_edges[k]]
        pre_total[n] = s
        ci[n] = abs(_p0(total[n]) - _p0(pre_total[n]))

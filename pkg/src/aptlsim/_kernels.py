"""Hot simulation kernels over the array form of a circuit.

Only ndarrays and scalars cross into this module, so every function runs
both under numba (default) and as plain Python when the fallback path is
selected via ``APTLSIM_NUMBA=0`` (see :mod:`aptlsim._accel`).

Level encoding: 0, 1, 2=unknown. Strength encoding: 0=floating, 1=charged,
2=weak, 3=strong. These match the IntEnum values in
:mod:`aptlsim.signal_core`; the pure functions there are the reference the
kernels are tested against.

Conduction in the event-driven kernel uses per-device *effective* gate
levels (eff_cg/eff_pg) that a gate toggle updates only when its scheduled
event fires, tau_cg or tau_pg after the driving node committed. Channel
values, by contrast, are read live during a component evaluation; a
channel-side event merely re-evaluates after tau_pass.
"""

import numpy as np

from ._accel import jit

L0 = 0
L1 = 1
LX = 2

FLOATING = 0
CHARGED = 1
WEAK = 2
STRONG = 3

NTYPE = 0
PTYPE = 1
UNKPOL = 2

OFF = 0
ON = 1
MAYBE = 2

# run_vectors status codes
OK = 0
OSCILLATION = 1
TRACE_OVERFLOW = 2
HEAP_OVERFLOW = 3

# event payload terminal codes
EV_REEVAL = -1
EV_CG = 0
EV_PG = 1


@jit
def _improve(best, bnode, blevel, bcount, slot, lvl, s):
    # Record that (slot, lvl) is reachable at strength s; queue for relaxation.
    if s > best[slot, lvl]:
        best[slot, lvl] = s
        bi = s - 1
        c = bcount[bi]
        bnode[bi, c] = slot
        blevel[bi, c] = lvl
        bcount[bi] = c + 1


@jit
def _relax_ccc(ci, level, strength, ext_level, eff_cg, eff_pg,
               is_input, is_supply,
               dev_src, dev_drn,
               ccc_node_ptr, ccc_node, ccc_dev_ptr, ccc_dev,
               ch_ptr, ch_dev,
               slot_of, dev_pol, dev_cond,
               best, bnode, blevel, bcount,
               out_level, out_strength):
    """Resolve one channel-connected component against the read state.

    Contributions reach a node along conducting channel paths from drivers
    (supplies, externally driven inputs, retained charge); the strength of a
    path is the minimum of its source strength and the per-device pass caps.
    For each member node the strongest contributions win and equal-strength
    level conflicts merge to unknown. Results go to out_level/out_strength,
    indexed by member slot; the read state is not modified.
    """
    nbase = ccc_node_ptr[ci]
    nmem = ccc_node_ptr[ci + 1] - nbase
    dbase = ccc_dev_ptr[ci]
    dend = ccc_dev_ptr[ci + 1]

    for i in range(nmem):
        n = ccc_node[nbase + i]
        slot_of[n] = i
        best[i, 0] = 0
        best[i, 1] = 0
        best[i, 2] = 0
    bcount[0] = 0
    bcount[1] = 0
    bcount[2] = 0

    # Effective gate levels are frozen for the duration of one evaluation.
    for k in range(dbase, dend):
        d = ccc_dev[k]
        pgl = eff_pg[d]
        if pgl == L1:
            pol = NTYPE
        elif pgl == L0:
            pol = PTYPE
        else:
            pol = UNKPOL
        cgl = eff_cg[d]
        if pol == UNKPOL or cgl == LX:
            cond = MAYBE
        elif pol == NTYPE:
            cond = ON if cgl == L1 else OFF
        else:
            cond = ON if cgl == L0 else OFF
        dev_pol[d] = pol
        dev_cond[d] = cond

    # Seed drivers: external input drive, retained charge, supply channels.
    for i in range(nmem):
        n = ccc_node[nbase + i]
        if is_input[n] and ext_level[n] != LX:
            _improve(best, bnode, blevel, bcount, i, ext_level[n], STRONG)
        lv = level[n]
        if lv != LX:
            _improve(best, bnode, blevel, bcount, i, lv, CHARGED)
    for k in range(dbase, dend):
        d = ccc_dev[k]
        cond = dev_cond[d]
        if cond == OFF:
            continue
        s_ = dev_src[d]
        dn = dev_drn[d]
        for side in range(2):
            sup = s_ if side == 0 else dn
            other = dn if side == 0 else s_
            if not is_supply[sup]:
                continue
            lvl = level[sup]
            pol = dev_pol[d]
            if pol == UNKPOL:
                cap = WEAK
            elif pol == NTYPE:
                cap = STRONG if lvl == L0 else WEAK
            else:
                cap = STRONG if lvl == L1 else WEAK
            out_lvl = lvl if cond == ON else LX
            _improve(best, bnode, blevel, bcount,
                     slot_of[other], out_lvl, cap)

    # Relax strongest-first; strength never increases along a path, so each
    # bucket is fully drained before the next lower one.
    for s in range(STRONG, 0, -1):
        bi = s - 1
        while bcount[bi] > 0:
            c = bcount[bi] - 1
            bcount[bi] = c
            slot = bnode[bi, c]
            lvl = blevel[bi, c]
            if best[slot, lvl] != s:
                continue
            n = ccc_node[nbase + slot]
            for k in range(ch_ptr[n], ch_ptr[n + 1]):
                d = ch_dev[k]
                cond = dev_cond[d]
                if cond == OFF:
                    continue
                sd = dev_src[d]
                other = dev_drn[d] if sd == n else sd
                if is_supply[other]:
                    continue
                pol = dev_pol[d]
                if lvl == LX or pol == UNKPOL:
                    cap = WEAK
                elif pol == NTYPE:
                    cap = STRONG if lvl == L0 else WEAK
                else:
                    cap = STRONG if lvl == L1 else WEAK
                s2 = s if s < cap else cap
                out_lvl = lvl if cond == ON else LX
                _improve(best, bnode, blevel, bcount,
                         slot_of[other], out_lvl, s2)

    for i in range(nmem):
        b0 = best[i, 0]
        b1 = best[i, 1]
        bx = best[i, 2]
        smax = b0
        if b1 > smax:
            smax = b1
        if bx > smax:
            smax = bx
        if smax == 0:
            out_level[i] = LX
            out_strength[i] = FLOATING
        elif bx == smax or (b0 == smax and b1 == smax):
            out_level[i] = LX
            out_strength[i] = smax
        elif b0 == smax:
            out_level[i] = L0
            out_strength[i] = smax
        else:
            out_level[i] = L1
            out_strength[i] = smax


@jit
def settle_kernel(level, strength, ext_level, eff_cg, eff_pg,
                  is_input, is_supply,
                  dev_src, dev_drn, dev_cg, dev_pg,
                  ccc_node_ptr, ccc_node, ccc_dev_ptr, ccc_dev,
                  ch_ptr, ch_dev,
                  slot_of, dev_pol, dev_cond,
                  best, bnode, blevel, bcount,
                  out_level, out_strength,
                  new_level, new_strength,
                  max_sweeps):
    """Iterate synchronous global sweeps to a fixed point.

    Each sweep re-reads gate levels and evaluates every component against
    the previous sweep's state (Jacobi style), which makes the result
    independent of declaration and processing order. Returns 0 on a fixed
    point, 1 if none is reached within max_sweeps.
    """
    ncc = ccc_node_ptr.shape[0] - 1
    nn = level.shape[0]
    nd = dev_cg.shape[0]
    for _ in range(max_sweeps):
        for d in range(nd):
            eff_cg[d] = level[dev_cg[d]]
            eff_pg[d] = level[dev_pg[d]]
        for n in range(nn):
            new_level[n] = level[n]
            new_strength[n] = strength[n]
        for ci in range(ncc):
            _relax_ccc(ci, level, strength, ext_level, eff_cg, eff_pg,
                       is_input, is_supply,
                       dev_src, dev_drn,
                       ccc_node_ptr, ccc_node, ccc_dev_ptr, ccc_dev,
                       ch_ptr, ch_dev,
                       slot_of, dev_pol, dev_cond,
                       best, bnode, blevel, bcount,
                       out_level, out_strength)
            nbase = ccc_node_ptr[ci]
            nmem = ccc_node_ptr[ci + 1] - nbase
            for i in range(nmem):
                n = ccc_node[nbase + i]
                new_level[n] = out_level[i]
                new_strength[n] = out_strength[i]
        changed = False
        for n in range(nn):
            if new_level[n] != level[n] or new_strength[n] != strength[n]:
                changed = True
                level[n] = new_level[n]
                strength[n] = new_strength[n]
        if not changed:
            for d in range(nd):
                eff_cg[d] = level[dev_cg[d]]
                eff_pg[d] = level[dev_pg[d]]
            return 0
    return 1


@jit
def _heap_less(h_t, h_n, h_s, i, j):
    if h_t[i] != h_t[j]:
        return h_t[i] < h_t[j]
    if h_n[i] != h_n[j]:
        return h_n[i] < h_n[j]
    return h_s[i] < h_s[j]


@jit
def _heap_swap(h_t, h_n, h_s, h_d, h_k, h_l, h_v, i, j):
    h_t[i], h_t[j] = h_t[j], h_t[i]
    h_n[i], h_n[j] = h_n[j], h_n[i]
    h_s[i], h_s[j] = h_s[j], h_s[i]
    h_d[i], h_d[j] = h_d[j], h_d[i]
    h_k[i], h_k[j] = h_k[j], h_k[i]
    h_l[i], h_l[j] = h_l[j], h_l[i]
    h_v[i], h_v[j] = h_v[j], h_v[i]


@jit
def _heap_push(h_t, h_n, h_s, h_d, h_k, h_l, h_v, size, t, n, s, d, k, l, v):
    i = size
    h_t[i] = t
    h_n[i] = n
    h_s[i] = s
    h_d[i] = d
    h_k[i] = k
    h_l[i] = l
    h_v[i] = v
    while i > 0:
        p = (i - 1) // 2
        if _heap_less(h_t, h_n, h_s, i, p):
            _heap_swap(h_t, h_n, h_s, h_d, h_k, h_l, h_v, i, p)
            i = p
        else:
            break
    return size + 1


@jit
def _heap_pop(h_t, h_n, h_s, h_d, h_k, h_l, h_v, size):
    # Caller reads the minimum from index 0 before calling; this removes it.
    size -= 1
    h_t[0] = h_t[size]
    h_n[0] = h_n[size]
    h_s[0] = h_s[size]
    h_d[0] = h_d[size]
    h_k[0] = h_k[size]
    h_l[0] = h_l[size]
    h_v[0] = h_v[size]
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        m = i
        if l < size and _heap_less(h_t, h_n, h_s, l, m):
            m = l
        if r < size and _heap_less(h_t, h_n, h_s, r, m):
            m = r
        if m == i:
            break
        _heap_swap(h_t, h_n, h_s, h_d, h_k, h_l, h_v, i, m)
        i = m
    return size


@jit
def run_vectors_kernel(level, strength, ext_level, last_change,
                       eff_cg, eff_pg,
                       is_input, is_output, is_supply,
                       dev_src, dev_drn, dev_cg, dev_pg, dev_ccc,
                       node_ccc, ccc_rep,
                       ccc_node_ptr, ccc_node, ccc_dev_ptr, ccc_dev,
                       ch_ptr, ch_dev, cg_ptr, cg_dev, pg_ptr, pg_dev,
                       slot_of, dev_pol, dev_cond,
                       best, bnode, blevel, bcount,
                       out_level, out_strength,
                       vec_nodes, vectors,
                       t_start, spacing,
                       tau_cg, tau_pg, tau_pass, k_weak,
                       e_cg, e_pg, e_node,
                       pop_bound,
                       record,
                       tr_time, tr_node, tr_level, tr_strength,
                       h_t, h_n, h_s, h_d, h_k, h_l, h_v,
                       v_delay, v_energy):
    """Event-driven propagation of a sequence of input vectors.

    Vector i is applied at t_start + i*spacing and its event queue drained
    before the next vector. A committed level change on a node schedules,
    for every device it gates, an effective-gate update plus component
    re-evaluation after tau_cg or tau_pg (scaled by k_weak for a weak
    driver), and a plain re-evaluation of its own component after tau_pass.
    Ties process in (time, component representative, sequence) order, and
    same-time events on one component apply their gate updates together
    before the single evaluation.

    Gate updates are inertial: each carries a per-terminal version stamp
    and only the latest scheduled update for a terminal applies, so a slow
    (weak-driver) transition cannot overwrite a newer value that arrived
    with a shorter delay.

    v_delay[i] is the latest output commit relative to t0, or -1.0 when no
    output changed; v_energy[i] sums the per-commit energy. Returns
    (status, vector_index, trace_count).
    """
    nv = vectors.shape[0]
    m = vectors.shape[1]
    nd = dev_src.shape[0]
    tr_cap = tr_time.shape[0]
    h_cap = h_t.shape[0]
    tr_count = 0
    ver_cg = np.zeros(nd, np.int64)
    ver_pg = np.zeros(nd, np.int64)

    for vi in range(nv):
        t0 = t_start + spacing * vi
        h_size = 0
        seq = 0
        pops = 0
        max_out_t = -1.0
        venergy = 0.0

        for j in range(m):
            n = vec_nodes[j]
            lvl = vectors[vi, j]
            old = level[n]
            ext_level[n] = lvl
            level[n] = lvl
            strength[n] = STRONG
            if old == lvl:
                continue
            # committed input change at t0
            venergy += e_node + e_cg * (cg_ptr[n + 1] - cg_ptr[n]) \
                + e_pg * (pg_ptr[n + 1] - pg_ptr[n])
            last_change[n] = t0
            if is_output[n] and t0 > max_out_t:
                max_out_t = t0
            if record:
                if tr_count >= tr_cap:
                    return TRACE_OVERFLOW, vi, tr_count
                tr_time[tr_count] = t0
                tr_node[tr_count] = n
                tr_level[tr_count] = lvl
                tr_strength[tr_count] = STRONG
                tr_count += 1
            if h_size + (cg_ptr[n + 1] - cg_ptr[n]) \
                    + (pg_ptr[n + 1] - pg_ptr[n]) + 1 > h_cap:
                return HEAP_OVERFLOW, vi, tr_count
            for k in range(cg_ptr[n], cg_ptr[n + 1]):
                d = cg_dev[k]
                cc = dev_ccc[d]
                if cc < 0:
                    continue
                ver_cg[d] += 1
                h_size = _heap_push(h_t, h_n, h_s, h_d, h_k, h_l, h_v,
                                    h_size, t0 + tau_cg, ccc_rep[cc], seq,
                                    d, EV_CG, lvl, ver_cg[d])
                seq += 1
            for k in range(pg_ptr[n], pg_ptr[n + 1]):
                d = pg_dev[k]
                cc = dev_ccc[d]
                if cc < 0:
                    continue
                ver_pg[d] += 1
                h_size = _heap_push(h_t, h_n, h_s, h_d, h_k, h_l, h_v,
                                    h_size, t0 + tau_pg, ccc_rep[cc], seq,
                                    d, EV_PG, lvl, ver_pg[d])
                seq += 1
            if ch_ptr[n + 1] > ch_ptr[n]:
                cc = node_ccc[n]
                h_size = _heap_push(h_t, h_n, h_s, h_d, h_k, h_l, h_v,
                                    h_size, t0 + tau_pass, ccc_rep[cc], seq,
                                    -1, EV_REEVAL, 0, 0)
                seq += 1

        while h_size > 0:
            pops += 1
            if pops > pop_bound:
                return OSCILLATION, vi, tr_count
            t = h_t[0]
            rep = h_n[0]
            # Coalesce all same-time events on this component: apply their
            # gate updates (latest version only), then evaluate once.
            while True:
                d = h_d[0]
                if d >= 0:
                    if h_k[0] == EV_CG:
                        if h_v[0] == ver_cg[d]:
                            eff_cg[d] = h_l[0]
                    elif h_v[0] == ver_pg[d]:
                        eff_pg[d] = h_l[0]
                h_size = _heap_pop(h_t, h_n, h_s, h_d, h_k, h_l, h_v, h_size)
                if h_size == 0 or h_t[0] != t or h_n[0] != rep:
                    break
            ci = node_ccc[rep]
            _relax_ccc(ci, level, strength, ext_level, eff_cg, eff_pg,
                       is_input, is_supply,
                       dev_src, dev_drn,
                       ccc_node_ptr, ccc_node, ccc_dev_ptr, ccc_dev,
                       ch_ptr, ch_dev,
                       slot_of, dev_pol, dev_cond,
                       best, bnode, blevel, bcount,
                       out_level, out_strength)
            nbase = ccc_node_ptr[ci]
            nmem = ccc_node_ptr[ci + 1] - nbase
            for i in range(nmem):
                n = ccc_node[nbase + i]
                if out_level[i] == level[n]:
                    strength[n] = out_strength[i]
                    continue
                lvl = out_level[i]
                level[n] = lvl
                strength[n] = out_strength[i]
                venergy += e_node + e_cg * (cg_ptr[n + 1] - cg_ptr[n]) \
                    + e_pg * (pg_ptr[n + 1] - pg_ptr[n])
                last_change[n] = t
                if is_output[n] and t > max_out_t:
                    max_out_t = t
                if record:
                    if tr_count >= tr_cap:
                        return TRACE_OVERFLOW, vi, tr_count
                    tr_time[tr_count] = t
                    tr_node[tr_count] = n
                    tr_level[tr_count] = lvl
                    tr_strength[tr_count] = out_strength[i]
                    tr_count += 1
                mult = k_weak if strength[n] == WEAK else 1.0
                if h_size + (cg_ptr[n + 1] - cg_ptr[n]) \
                        + (pg_ptr[n + 1] - pg_ptr[n]) + 1 > h_cap:
                    return HEAP_OVERFLOW, vi, tr_count
                for k in range(cg_ptr[n], cg_ptr[n + 1]):
                    d = cg_dev[k]
                    cc = dev_ccc[d]
                    if cc < 0:
                        continue
                    ver_cg[d] += 1
                    h_size = _heap_push(h_t, h_n, h_s, h_d, h_k, h_l, h_v,
                                        h_size, t + tau_cg * mult,
                                        ccc_rep[cc], seq, d, EV_CG, lvl,
                                        ver_cg[d])
                    seq += 1
                for k in range(pg_ptr[n], pg_ptr[n + 1]):
                    d = pg_dev[k]
                    cc = dev_ccc[d]
                    if cc < 0:
                        continue
                    ver_pg[d] += 1
                    h_size = _heap_push(h_t, h_n, h_s, h_d, h_k, h_l, h_v,
                                        h_size, t + tau_pg * mult,
                                        ccc_rep[cc], seq, d, EV_PG, lvl,
                                        ver_pg[d])
                    seq += 1
                if ch_ptr[n + 1] > ch_ptr[n]:
                    cc = node_ccc[n]
                    h_size = _heap_push(h_t, h_n, h_s, h_d, h_k, h_l, h_v,
                                        h_size, t + tau_pass, ccc_rep[cc],
                                        seq, -1, EV_REEVAL, 0, 0)
                    seq += 1

        v_delay[vi] = (max_out_t - t0) if max_out_t >= 0.0 else -1.0
        v_energy[vi] = venergy

    return OK, nv, tr_count

# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled series kernel: same contract as crmap._kernel_py."""

KERNEL_NAME = "cython"


def weighted_degree(tuple expo, tuple weights):
    cdef Py_ssize_t i, n = len(expo)
    cdef long d = 0
    for i in range(n):
        d += <long> expo[i] * <long> weights[i]
    return d


def poly_mul(dict a, dict b, tuple weights, cap):
    cdef dict out = {}
    cdef tuple ea, eb, e
    cdef object ca, cb, v
    cdef long da, room, capl
    cdef Py_ssize_t i, j, nb, nvars = len(weights)
    cdef list bitems

    if len(a) > len(b):
        a, b = b, a

    if cap is None:
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple([ea[i] + eb[i] for i in range(nvars)])
                v = out.get(e)
                out[e] = ca * cb if v is None else v + ca * cb
        return {k: c for k, c in out.items() if c}

    capl = <long> cap
    bitems = [(weighted_degree(eb, weights), eb, cb) for eb, cb in b.items()]
    bitems.sort(key=_deg_key)
    nb = len(bitems)
    for ea, ca in a.items():
        da = weighted_degree(ea, weights)
        room = capl - da
        if room < 0:
            continue
        for j in range(nb):
            item = <tuple> bitems[j]
            if <long> item[0] > room:
                break
            eb = <tuple> item[1]
            cb = item[2]
            e = tuple([ea[i] + eb[i] for i in range(nvars)])
            v = out.get(e)
            out[e] = ca * cb if v is None else v + ca * cb
    return {k: c for k, c in out.items() if c}


def _deg_key(t):
    return t[0]

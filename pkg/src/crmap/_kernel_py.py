"""Pure-Python series kernel: coefficient-table multiply under a weight cap.

`crmap._speedups` is the compiled twin; `crmap.series` picks one at import.
Both operate on dicts mapping exponent tuples to coefficient objects whose
arithmetic is Python-level (exact Ex scalars or complex).
"""

KERNEL_NAME = "python"


def weighted_degree(expo, weights):
    d = 0
    for e, w in zip(expo, weights):
        d += e * w
    return d


def poly_mul(a, b, weights, cap):
    """Multiply coefficient tables a*b, dropping weighted degree > cap.

    cap is None for untruncated polynomial multiplication.  Zero
    coefficients are dropped so the result stays canonical.
    """
    if len(a) > len(b):
        a, b = b, a
    out = {}
    if cap is None:
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                v = out.get(e)
                v = ca * cb if v is None else v + ca * cb
                out[e] = v
    else:
        bdeg = [(weighted_degree(eb, weights), eb, cb) for eb, cb in b.items()]
        bdeg.sort(key=lambda t: t[0])
        for ea, ca in a.items():
            da = weighted_degree(ea, weights)
            room = cap - da
            if room < 0:
                continue
            for db, eb, cb in bdeg:
                if db > room:
                    break
                e = tuple(x + y for x, y in zip(ea, eb))
                v = out.get(e)
                v = ca * cb if v is None else v + ca * cb
                out[e] = v
    return {e: c for e, c in out.items() if c}

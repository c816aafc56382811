"""Slow, direct re-implementations used to check the fast code paths.

Nothing here imports the routine it is meant to check.
"""

import math
from fractions import Fraction

# -- metrics -----------------------------------------------------------------


def loop_metrics(rows, nodata, h):
    """mean, rmse, tsc, (t, dof, defined) from nested lists by plain loops."""
    vals = [v for row in rows for v in row if v != nodata]
    n = len(vals)
    total = 0.0
    for v in vals:
        total += v
    mean = total / n
    sq = 0.0
    for v in vals:
        sq += v * v
    rmse = math.sqrt(sq / n)

    curv = []
    nr, nc = len(rows), len(rows[0])
    for r in range(1, nr - 1):
        for c in range(1, nc - 1):
            stencil = [rows[r][c], rows[r - 1][c], rows[r + 1][c], rows[r][c - 1], rows[r][c + 1]]
            if any(v == nodata for v in stencil):
                continue
            lap = (rows[r + 1][c] + rows[r - 1][c] + rows[r][c + 1] + rows[r][c - 1]
                   - 4.0 * rows[r][c]) / (h * h)
            curv.append(lap * lap)
    tsc = sum(curv) / len(curv) if curv else None

    dev = 0.0
    for v in vals:
        dev += (v - mean) ** 2
    s = math.sqrt(dev / (n - 1))
    t = mean / (s / math.sqrt(n)) if s > 0 else None
    return mean, rmse, tsc, t, s


# -- correspondence ----------------------------------------------------------


def brute_force_correspondence(ref_cells, candidates, cellsize, dist_tol):
    """Exhaustive search for the best mutually compatible (node, candidate) set.

    ``candidates[i]`` is a list of ``(row, col, residual)``.  Compatibility is
    checked literally: distinct nodes, distinct cells, edge length preserved
    within ``dist_tol`` and identical implied offsets.  Returns
    ``(offset, {node: (row, col, residual)})`` or ``None``.
    """
    n = len(ref_cells)

    def dist(a, b):
        return cellsize * math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2)

    def compatible(i, ci, j, cj):
        if i == j or (ci[0], ci[1]) == (cj[0], cj[1]):
            return False
        if abs(dist(ci, cj) - dist(ref_cells[i], ref_cells[j])) > dist_tol:
            return False
        oi = (ref_cells[i][0] - ci[0], ref_cells[i][1] - ci[1])
        oj = (ref_cells[j][0] - cj[0], ref_cells[j][1] - cj[1])
        return oi == oj

    best = [None, None]

    def consider(chosen):
        if not chosen:
            return
        nodes = tuple(sorted(chosen))
        residual = math.fsum(chosen[i][2] for i in nodes)
        i0 = nodes[0]
        offset = (ref_cells[i0][0] - chosen[i0][0], ref_cells[i0][1] - chosen[i0][1])
        key = (-len(nodes), residual, nodes, offset)
        if best[0] is None or key < best[0]:
            best[0], best[1] = key, (offset, dict(chosen))

    def extend(i, chosen):
        if i == n:
            consider(chosen)
            return
        extend(i + 1, chosen)
        for cand in candidates[i]:
            if all(compatible(i, cand, j, chosen[j]) for j in chosen):
                chosen[i] = cand
                extend(i + 1, chosen)
                del chosen[i]

    extend(0, {})
    return best[1]


# -- merge -------------------------------------------------------------------


def reproject_value(out_header, r, c, src_header, src_rows):
    """Value of ``src`` under output cell (r, c), located through map coordinates."""
    x = out_header["xll"] + (c + 0.5) * out_header["cs"]
    y = out_header["yll"] + (out_header["nrows"] - 1 - r + 0.5) * out_header["cs"]
    sc = math.floor((x - src_header["xll"]) / src_header["cs"])
    sr = src_header["nrows"] - 1 - math.floor((y - src_header["yll"]) / src_header["cs"])
    if 0 <= sr < src_header["nrows"] and 0 <= sc < src_header["ncols"]:
        return src_rows[sr][sc]
    return None


# -- render ------------------------------------------------------------------

RAMP = [
    (Fraction(0), (46, 110, 60)),
    (Fraction(35, 100), (222, 214, 130)),
    (Fraction(70, 100), (140, 90, 50)),
    (Fraction(1), (250, 250, 250)),
]
NODATA_RGB = (120, 120, 120)


def render_ppm_exact(rows, nodata):
    """P6 bytes computed with exact rational arithmetic and half-up rounding."""
    valid = [Fraction(v) for row in rows for v in row if v != nodata]
    zmin, zmax = min(valid), max(valid)
    out = bytearray()
    for row in rows:
        for v in row:
            if v == nodata:
                out += bytes(NODATA_RGB)
                continue
            if zmax == zmin:
                out += bytes(RAMP[0][1])
                continue
            u = (Fraction(v) - zmin) / (zmax - zmin)
            for k in range(len(RAMP) - 1):
                p0, c0 = RAMP[k]
                p1, c1 = RAMP[k + 1]
                if p0 <= u <= p1:
                    t = (u - p0) / (p1 - p0)
                    out += bytes(math.floor(a + (b - a) * t + Fraction(1, 2))
                                 for a, b in zip(c0, c1))
                    break
    header = f"P6\n{len(rows[0])} {len(rows)}\n255\n".encode("ascii")
    return header + bytes(out)

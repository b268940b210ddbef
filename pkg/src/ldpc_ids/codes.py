"""LDPC code graphs: alist parsing, quasi-cyclic lifting, puncturing, Tanner graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class CodeError(ValueError):
    """Raised for malformed code descriptions (alist, base graph, manifest)."""


@dataclass(frozen=True)
class ParityCheckMatrix:
    """Sparse binary parity-check matrix given by its set of one-entries."""

    m_rows: int
    n_cols: int
    entries: frozenset  # of (row, col)

    def __post_init__(self):
        if self.m_rows <= 0 or self.n_cols <= 0:
            raise CodeError("matrix dimensions must be positive")
        rows_seen = np.zeros(self.m_rows, dtype=bool)
        cols_seen = np.zeros(self.n_cols, dtype=bool)
        for r, c in self.entries:
            if not (0 <= r < self.m_rows and 0 <= c < self.n_cols):
                raise CodeError(f"entry ({r},{c}) out of bounds "
                                f"{self.m_rows}x{self.n_cols}")
            rows_seen[r] = True
            cols_seen[c] = True
        if not rows_seen.all():
            raise CodeError("matrix has an empty row")
        if not cols_seen.all():
            raise CodeError("matrix has an empty column")


@dataclass(frozen=True)
class BaseGraph:
    """Protograph with circulant shifts; -1 marks an all-zero block."""

    rows: int
    cols: int
    shifts: tuple  # row-major tuple of tuples
    lifting_size: int

    def __post_init__(self):
        if self.lifting_size <= 0:
            raise CodeError("lifting size must be positive")
        for r in range(self.rows):
            for c in range(self.cols):
                s = self.shifts[r][c]
                if s != -1 and not (0 <= s < self.lifting_size):
                    raise CodeError(
                        f"shift {s} at block ({r},{c}) outside [0,{self.lifting_size})")


@dataclass(frozen=True)
class CodeSpec:
    """A decodable code: matrix plus puncturing pattern and payload size."""

    h: ParityCheckMatrix
    punctured: tuple  # sorted VN indices, never transmitted
    k_info: int
    label: str = ""

    def __post_init__(self):
        n = self.h.n_cols
        for p in self.punctured:
            if not 0 <= p < n:
                raise CodeError(f"punctured index {p} out of range")
        if len(set(self.punctured)) != len(self.punctured):
            raise CodeError("duplicate punctured indices")
        if self.k_info != n - self.h.m_rows:
            raise CodeError(
                f"k_info={self.k_info} inconsistent with N-M={n - self.h.m_rows}")

    @property
    def n_transmitted(self):
        return self.h.n_cols - len(self.punctured)

    @property
    def rate_tx(self):
        """Rate over transmitted positions, K / (N - |punctured|)."""
        return self.k_info / self.n_transmitted


@dataclass
class TannerGraph:
    """Edge-indexed bipartite graph; edge ids run in (check-major, vn-minor) order."""

    n_vars: int
    n_checks: int
    edge_cn: np.ndarray   # (E,) check index of edge e
    edge_vn: np.ndarray   # (E,) variable index of edge e
    cn_ptr: np.ndarray    # (M+1,) edges of check m are [cn_ptr[m], cn_ptr[m+1])
    vn_ptr: np.ndarray    # (N+1,) offsets into vn_edges
    vn_edges: np.ndarray  # (E,) edge ids grouped per VN, sorted by check index
    _edge_index: dict = field(default_factory=dict, repr=False)

    @property
    def n_edges(self):
        return len(self.edge_cn)

    def vn_degree(self, n):
        return int(self.vn_ptr[n + 1] - self.vn_ptr[n])

    def cn_degree(self, m):
        return int(self.cn_ptr[m + 1] - self.cn_ptr[m])

    def vn_neighbors(self, n):
        """M(n) as a list of (check index, edge index)."""
        es = self.vn_edges[self.vn_ptr[n]:self.vn_ptr[n + 1]]
        return [(int(self.edge_cn[e]), int(e)) for e in es]

    def cn_neighbors(self, m):
        """N(m) as a list of (variable index, edge index)."""
        es = range(int(self.cn_ptr[m]), int(self.cn_ptr[m + 1]))
        return [(int(self.edge_vn[e]), int(e)) for e in es]

    def edge_index(self, m, n):
        return self._edge_index[(m, n)]


def parse_alist(text):
    """Parse MacKay-convention alist text into a ParityCheckMatrix.

    Layout: "N M" / "max_dv max_dc" / per-column degrees / per-row degrees /
    N 1-based column adjacency lines / M 1-based row adjacency lines.
    Zero padding entries are discarded.
    """
    lines = [ln for ln in text.splitlines()]

    def ints(idx, expect=None):
        if idx >= len(lines):
            raise CodeError(f"alist line {idx + 1}: unexpected end of input")
        try:
            vals = [int(t) for t in lines[idx].split()]
        except ValueError:
            raise CodeError(f"alist line {idx + 1}: non-integer token") from None
        if expect is not None and len(vals) != expect:
            raise CodeError(f"alist line {idx + 1}: expected {expect} values, "
                            f"got {len(vals)}")
        return vals

    header = ints(0)
    if len(header) != 2:
        raise CodeError("alist line 1: malformed header, expected 'N M'")
    n, m = header
    if n <= 0 or m <= 0:
        raise CodeError("alist line 1: dimensions must be positive")
    ints(1, 2)  # max degrees, not otherwise needed
    col_deg = ints(2, n)
    row_deg = ints(3, m)

    entries = set()
    for j in range(n):
        vals = [v for v in ints(4 + j) if v != 0]
        if len(vals) != col_deg[j]:
            raise CodeError(f"alist line {5 + j}: column {j} lists {len(vals)} "
                            f"checks, degree says {col_deg[j]}")
        for v in vals:
            if not 1 <= v <= m:
                raise CodeError(f"alist line {5 + j}: check index {v} out of range")
            if (v - 1, j) in entries:
                raise CodeError(f"alist line {5 + j}: duplicate entry ({v - 1},{j})")
            entries.add((v - 1, j))

    row_entries = set()
    for i in range(m):
        vals = [v for v in ints(4 + n + i) if v != 0]
        if len(vals) != row_deg[i]:
            raise CodeError(f"alist line {5 + n + i}: row {i} lists {len(vals)} "
                            f"variables, degree says {row_deg[i]}")
        for v in vals:
            if not 1 <= v <= n:
                raise CodeError(f"alist line {5 + n + i}: variable index {v} "
                                "out of range")
            row_entries.add((i, v - 1))
    if row_entries != entries:
        raise CodeError("alist row/column adjacency lists disagree")

    return ParityCheckMatrix(m_rows=m, n_cols=n, entries=frozenset(entries))


def serialize_alist(h):
    """Render a ParityCheckMatrix in alist text form (no zero padding)."""
    by_col = [[] for _ in range(h.n_cols)]
    by_row = [[] for _ in range(h.m_rows)]
    for r, c in sorted(h.entries):
        by_row[r].append(c + 1)
        by_col[c].append(r + 1)
    out = [f"{h.n_cols} {h.m_rows}",
           f"{max(len(c) for c in by_col)} {max(len(r) for r in by_row)}",
           " ".join(str(len(c)) for c in by_col),
           " ".join(str(len(r)) for r in by_row)]
    out += [" ".join(map(str, sorted(c))) for c in by_col]
    out += [" ".join(map(str, sorted(r))) for r in by_row]
    return "\n".join(out) + "\n"


def parse_base_graph(text):
    """Parse base-graph text: "rows cols Z" then rows lines of shifts."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise CodeError("base graph: empty input")
    head = lines[0].split()
    if len(head) != 3:
        raise CodeError("base graph line 1: expected 'rows cols Z'")
    rows, cols, z = (int(v) for v in head)
    if len(lines) != rows + 1:
        raise CodeError(f"base graph: expected {rows} shift rows, "
                        f"got {len(lines) - 1}")
    grid = []
    for i, ln in enumerate(lines[1:]):
        vals = [int(t) for t in ln.split()]
        if len(vals) != cols:
            raise CodeError(f"base graph line {i + 2}: expected {cols} values")
        grid.append(tuple(vals))
    return BaseGraph(rows=rows, cols=cols, shifts=tuple(grid), lifting_size=z)


def lift_base_graph(bg):
    """Expand a base graph into its lifted parity-check matrix.

    Block (i,j) with shift s contributes {(i*Z+r, j*Z+((r+s) mod Z))}.
    """
    z = bg.lifting_size
    entries = set()
    for i in range(bg.rows):
        for j in range(bg.cols):
            s = bg.shifts[i][j]
            if s == -1:
                continue
            for r in range(z):
                entries.add((i * z + r, j * z + (r + s) % z))
    return ParityCheckMatrix(m_rows=bg.rows * z, n_cols=bg.cols * z,
                             entries=frozenset(entries))


def apply_puncture(h, prefix_len, k_info, label=""):
    """Mark the first prefix_len VNs as never transmitted."""
    if prefix_len >= h.n_cols:
        raise CodeError(f"puncture prefix {prefix_len} >= N={h.n_cols}")
    return CodeSpec(h=h, punctured=tuple(range(prefix_len)),
                    k_info=k_info, label=label)


def build_tanner(h):
    """Build the edge-indexed Tanner graph of h.

    Edge ids are assigned in (check-major, vn-minor) order so all schedule
    tie-breaks are reproducible.
    """
    ordered = sorted(h.entries)
    e_count = len(ordered)
    edge_cn = np.fromiter((r for r, _ in ordered), dtype=np.int64, count=e_count)
    edge_vn = np.fromiter((c for _, c in ordered), dtype=np.int64, count=e_count)

    cn_ptr = np.zeros(h.m_rows + 1, dtype=np.int64)
    np.add.at(cn_ptr, edge_cn + 1, 1)
    cn_ptr = np.cumsum(cn_ptr)

    vn_ptr = np.zeros(h.n_cols + 1, dtype=np.int64)
    np.add.at(vn_ptr, edge_vn + 1, 1)
    vn_ptr = np.cumsum(vn_ptr)
    # stable sort by VN keeps per-VN edge lists ordered by check index
    vn_edges = np.argsort(edge_vn, kind="stable").astype(np.int64)

    index = {(int(edge_cn[e]), int(edge_vn[e])): e for e in range(e_count)}
    return TannerGraph(n_vars=h.n_cols, n_checks=h.m_rows,
                       edge_cn=edge_cn, edge_vn=edge_vn, cn_ptr=cn_ptr,
                       vn_ptr=vn_ptr, vn_edges=vn_edges, _edge_index=index)


def graph_stats(g):
    """Summary statistics of a Tanner graph."""
    vn_deg = np.diff(g.vn_ptr)
    cn_deg = np.diff(g.cn_ptr)
    return {
        "E": g.n_edges,
        "mean_vn_degree": g.n_edges / g.n_vars,
        "mean_cn_degree": g.n_edges / g.n_checks,
        "vn_degree_hist": dict(zip(*(a.tolist() for a in
                                     np.unique(vn_deg, return_counts=True)))),
        "cn_degree_hist": dict(zip(*(a.tolist() for a in
                                     np.unique(cn_deg, return_counts=True)))),
        "degree_one_vns": int((vn_deg == 1).sum()),
    }


def syndrome_ok(g, u_hat):
    """True iff every check has even parity over its neighborhood."""
    u_hat = np.asarray(u_hat)
    if len(u_hat) != g.n_vars:
        raise CodeError(f"decision vector length {len(u_hat)} != N={g.n_vars}")
    sums = np.zeros(g.n_checks, dtype=np.int64)
    np.add.at(sums, g.edge_cn, u_hat[g.edge_vn].astype(np.int64))
    return bool((sums % 2 == 0).all())


def load_matrix_file(path):
    """Load a parity-check matrix from an .alist or .bg file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".alist":
        return parse_alist(text)
    if path.suffix == ".bg":
        return lift_base_graph(parse_base_graph(text))
    raise CodeError(f"unknown matrix file type: {path.name}")


def load_manifest(path):
    """Load a CodeSpec manifest (key = value lines, paths relative to it)."""
    path = Path(path)
    kv = {}
    for i, ln in enumerate(path.read_text().splitlines()):
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if "=" not in ln:
            raise CodeError(f"manifest line {i + 1}: expected 'key = value'")
        k, v = (s.strip() for s in ln.split("=", 1))
        kv[k] = v
    try:
        matrix = kv["matrix"]
        prefix = int(kv["puncture_prefix"])
        k_info = int(kv["k_info"])
    except KeyError as exc:
        raise CodeError(f"manifest missing key {exc}") from None
    h = load_matrix_file(path.parent / matrix)
    return apply_puncture(h, prefix, k_info, label=kv.get("label", path.stem))


def make_random_regular_code(n_vars, d_v, d_c, seed=0, label=None):
    """Random (d_v, d_c)-regular code via the permutation (socket) model.

    Variable sockets are matched to check sockets by a seeded shuffle;
    parallel edges are repaired by swapping with a random other socket.
    Deterministic for a given seed.
    """
    if (n_vars * d_v) % d_c != 0:
        raise CodeError("n_vars * d_v must be divisible by d_c")
    m_rows = n_vars * d_v // d_c
    rng = np.random.default_rng(seed)
    vn_sockets = np.repeat(np.arange(n_vars), d_v)
    cn_sockets = np.repeat(np.arange(m_rows), d_c)
    rng.shuffle(cn_sockets)
    e_total = len(vn_sockets)
    for _ in range(100 * e_total):
        pairs = set(zip(cn_sockets.tolist(), vn_sockets.tolist()))
        if len(pairs) == e_total:
            break
        seen = set()
        for i in range(e_total):
            key = (cn_sockets[i], vn_sockets[i])
            if key in seen:
                j = int(rng.integers(e_total))
                cn_sockets[i], cn_sockets[j] = cn_sockets[j], cn_sockets[i]
                seen = set()
                break
            seen.add(key)
    else:
        raise CodeError("could not remove parallel edges; try another seed")
    h = ParityCheckMatrix(m_rows=m_rows, n_cols=n_vars,
                          entries=frozenset(zip(cn_sockets.tolist(),
                                                vn_sockets.tolist())))
    if label is None:
        label = f"random-{n_vars}-{d_v}-{d_c}-s{seed}"
    return CodeSpec(h=h, punctured=(), k_info=n_vars - m_rows, label=label)


DATA_DIR = Path(__file__).parent / "data"

BUILTIN_CODES = {
    "w1944": DATA_DIR / "w1944.code",
    "n1848": DATA_DIR / "n1848.code",
    "n500": DATA_DIR / "n500.code",
}


def load_code(name_or_path):
    """Load a builtin code by name or any manifest by path."""
    key = str(name_or_path).lower()
    if key in BUILTIN_CODES:
        return load_manifest(BUILTIN_CODES[key])
    return load_manifest(name_or_path)

"""Spacetime syndrome grids and minimum-weight perfect matching.

Two grid orientations explain an observed record:

Primal ("E" repair): vertical lines x = 0..L bound the qubit columns; the
ZZ round r occupies the vertical interval (r, r+1) per bond line, with the
implicit perfect initialization round at r = 0 and, where the protocol has
one, the perfect final round at r = T+1.  Recorded ZZ outcomes are walls;
defect nodes sit where consecutive recorded outcomes on a bond line differ
in sign.  Paths move vertically for free along un-walled intervals and
cross a qubit column at the X row of timestep t for free where an X outcome
was recorded there, at unit cost where not (a candidate missing X).

Dual ("S" repair): lines x = 0..L-1 are qubit worldlines; the X measurement
of timestep t occupies the vertical interval (t-1, t) on its line and, when
recorded, walls it.  Each recorded -1 X outcome deposits charges (mod 2) at
both interval endpoints; the surviving charges are the defect nodes.  Paths
cross the gap between neighboring lines at ZZ level t for free where a ZZ
outcome was recorded, at unit cost where not (a candidate missing ZZ).
Level 0 (initialization) and the final round level are free corridors.
Boundary policy: "MinusParityOrAncilla" attaches absorbing virtual nodes on
the time boundaries (needed when the X parity of the system is indefinite);
"PlusParity" adds no nodes but keeps a free corridor row on each time
boundary (a virtual periodic boundary).

Defect-to-defect weights are shortest grid path costs (0-1 breadth-first
search over zero-cost-contracted components); boundary handling uses one
private boundary copy per defect, copies interconnected at weight zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

PLUS_PARITY = "PlusParity"
MINUS_PARITY = "MinusParityOrAncilla"


@dataclass
class SpacetimeGrid:
    orientation: str          # "primal" | "dual"
    n_lines: int              # vertex columns
    n_levels: int             # vertex rows
    vert_open: np.ndarray     # (n_lines, n_levels-1) bool
    horiz_cost: np.ndarray    # (n_lines-1, n_levels) int8: -1 absent, 0, 1
    boundary: str             # "sides" | "time" | "none"

    def location_of(self, x: int, y: int):
        """Physical (kind, pos, time) of the unit-cost crossing at (x, y)."""
        if self.orientation == "primal":
            return ("E", x, y)   # missing X on site x at timestep y
        return ("S", x, y)       # missing ZZ on bond x at timestep y


@dataclass
class SyndromeGraph:
    """Complete defect graph with optional private boundary copies.

    Node ids: 0..m-1 are defects; when ``has_boundary`` m+i is the private
    boundary copy of defect i (copies pairwise connected at weight 0).
    ``edges`` maps (i, j) with i < j to an integer weight; missing pairs are
    unreachable.  ``witnesses`` holds, per edge, the unit-cost crossing
    locations of one shortest path realizing the weight.
    """

    num_defects: int
    defects: list = field(default_factory=list)   # (x, y) grid spots
    has_boundary: bool = False
    edges: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    metric: bool = False   # weights are shortest-path distances

    @property
    def num_nodes(self) -> int:
        return self.num_defects * 2 if self.has_boundary else self.num_defects

    def weight(self, i: int, j: int):
        if i > j:
            i, j = j, i
        m = self.num_defects
        if self.has_boundary and i >= m and j >= m:
            return 0
        return self.edges.get((i, j))

    def witness(self, i: int, j: int):
        if i > j:
            i, j = j, i
        return self.witnesses.get((i, j), [])


@dataclass
class Matching:
    pairs: list                  # (i, j) node pairs, i < j
    total_weight: int
    witnesses: list              # per pair: unit-cost crossing locations


# ---------------------------------------------------------------------------
# grid construction

def build_primal_grid(record) -> SpacetimeGrid:
    cfg = record.config
    L, T = cfg.L, cfg.T
    has_final = record.has_final_s_round
    has_transfer = record.has_transfer_e_round
    top_round = T + 1 if has_final else T
    n_levels = top_round + 2
    n_lines = L + 1
    vert_open = np.ones((n_lines, n_levels - 1), dtype=bool)
    obs_s = record.observed_s()
    # walls: recorded ZZ at round y on bond j blocks line j+1 over (y, y+1)
    for j in range(L - 1):
        vert_open[j + 1, 0] = False                      # initialization
        if has_final:
            vert_open[j + 1, T + 1] = False
    for (t, j), _ in obs_s.items():
        vert_open[j + 1, t] = False
    horiz = np.full((n_lines - 1, n_levels), -1, dtype=np.int8)
    horiz[:, 1:T + 1] = 1                                # bulk X rows
    for (t, i), _ in record.observed_e().items():
        if t <= T:
            horiz[i, t] = 0
        elif has_transfer:
            horiz[i, t] = 0                              # perfect transfer row
    # without a final round the top time boundary is open: strings ending in
    # never-again-measured bonds escape there, so it absorbs like the sides
    boundary = "sides" if has_final else "sides+top"
    return SpacetimeGrid("primal", n_lines, n_levels, vert_open, horiz,
                         boundary=boundary)


def primal_defects(record) -> list:
    """Defect spots (x, y): sign changes between consecutive recorded ZZ
    outcomes per bond line, the later wall's lower level as the spot."""
    cfg = record.config
    L, T = cfg.L, cfg.T
    init = record.init_s_outcomes()
    seqs = {j: [(0, init[j])] for j in range(L - 1)}
    for (t, j), out in sorted(record.observed_s().items()):
        seqs[j].append((t, out))
    spots = []
    for j in range(L - 1):
        seq = seqs[j]
        for (r1, o1), (r2, o2) in zip(seq, seq[1:]):
            if o1 * o2 == -1:
                spots.append((j + 1, r2))
    return spots


def build_dual_grid(record, parity_mode: str) -> SpacetimeGrid:
    cfg = record.config
    L, T = cfg.L, cfg.T
    has_final = record.has_final_s_round
    has_transfer = record.has_transfer_e_round
    if has_transfer:
        n_levels = T + 3
    elif has_final:
        n_levels = T + 2
    elif parity_mode == PLUS_PARITY:
        n_levels = T + 2    # extra virtual corridor row on the top boundary
    else:
        n_levels = T + 1
    n_lines = L
    vert_open = np.ones((n_lines, n_levels - 1), dtype=bool)
    for (t, i), _ in record.observed_e().items():
        if t <= T:
            vert_open[i, t - 1] = False
        elif has_transfer:
            vert_open[i, T + 1] = False                  # transfer X wall
    horiz = np.full((n_lines - 1, n_levels), -1, dtype=np.int8)
    horiz[:, 0] = 0                                      # initialization row
    horiz[:, 1:T + 1] = 1
    for (t, j), _ in record.observed_s().items():
        horiz[j, min(t, T + 1)] = 0
    if has_final:
        horiz[:, T + 1] = 0                              # perfect final round
    elif parity_mode == PLUS_PARITY:
        horiz[:, T + 1] = 0                              # virtual corridor
    boundary = "time" if parity_mode == MINUS_PARITY else "none"
    return SpacetimeGrid("dual", n_lines, n_levels, vert_open, horiz,
                         boundary=boundary)


def dual_defects(record) -> list:
    """Defect spots (x, y): mod-2 endpoint charges of recorded -1 X walls."""
    charges: dict = {}
    T = record.config.T
    for (t, i), out in record.observed_e().items():
        if out != -1:
            continue
        lo = t - 1 if t <= T else T + 1
        for y in (lo, lo + 1):
            charges[(i, y)] = charges.get((i, y), 0) ^ 1
    return sorted(k for k, v in charges.items() if v)


# ---------------------------------------------------------------------------
# distances on the grid (zero-cost contraction + unit BFS)

class _GridMetric:
    """Shortest 0/1 path costs between grid spots, with witness recovery."""

    def __init__(self, grid: SpacetimeGrid):
        self.grid = grid
        nl, ny = grid.n_lines, grid.n_levels
        idx = lambda x, y: x * ny + y  # noqa: E731
        rows, cols = [], []
        for x in range(nl):
            for y in range(ny - 1):
                if grid.vert_open[x, y]:
                    rows.append(idx(x, y))
                    cols.append(idx(x, y + 1))
        xs, ys = np.nonzero(grid.horiz_cost == 0)
        for x, y in zip(xs, ys):
            rows.append(idx(x, y))
            cols.append(idx(x + 1, y))
        n = nl * ny
        g = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        _, labels = connected_components(g, directed=False)
        self.comp = labels.reshape(nl, ny)
        ncomp = labels.max() + 1
        self.ncomp = ncomp
        # unit edges between components, tagged with their grid location
        adj: list = [[] for _ in range(ncomp)]
        xs, ys = np.nonzero(grid.horiz_cost == 1)
        for x, y in zip(xs, ys):
            a, b = self.comp[x, y], self.comp[x + 1, y]
            if a != b:
                loc = grid.location_of(int(x), int(y))
                adj[a].append((b, loc))
                adj[b].append((a, loc))
        self.adj = [sorted(set(lst)) for lst in adj]
        bset = set()
        if grid.boundary.startswith("sides"):
            bset |= set(self.comp[0, :]) | set(self.comp[nl - 1, :])
        if grid.boundary.endswith("top") or grid.boundary == "time":
            bset |= set(self.comp[:, ny - 1])
        if grid.boundary == "time":
            bset |= set(self.comp[:, 0])
        self.boundary_comps = bset
        self._bfs_cache: dict = {}

    def component(self, spot) -> int:
        return int(self.comp[spot[0], spot[1]])

    def _bfs(self, src: int):
        if src in self._bfs_cache:
            return self._bfs_cache[src]
        dist = np.full(self.ncomp, -1, dtype=np.int32)
        parent: dict = {}
        dist[src] = 0
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                du = dist[u]
                for v, loc in self.adj[u]:
                    if dist[v] < 0:
                        dist[v] = du + 1
                        parent[v] = (u, loc)
                        nxt.append(v)
            frontier = nxt
        self._bfs_cache[src] = (dist, parent)
        return dist, parent

    def distance(self, a, b):
        dist, _ = self._bfs(self.component(a))
        d = dist[self.component(b)]
        return None if d < 0 else int(d)

    def path_witness(self, a, b) -> list:
        dist, parent = self._bfs(self.component(a))
        cur = self.component(b)
        if dist[cur] < 0:
            raise ValueError("spots not connected")
        crossings = []
        while cur in parent:
            cur, loc = parent[cur]
            crossings.append(loc)
        crossings.reverse()
        return crossings

    def boundary_distance(self, a):
        if not self.boundary_comps:
            return None
        dist, _ = self._bfs(self.component(a))
        best, bd = None, None
        for c in self.boundary_comps:
            d = dist[c]
            if d >= 0 and (bd is None or d < bd):
                best, bd = c, int(d)
        return (bd, best) if bd is not None else None

    def boundary_witness(self, a) -> list:
        hit = self.boundary_distance(a)
        if hit is None:
            raise ValueError("no boundary reachable")
        _, comp = hit
        dist, parent = self._bfs(self.component(a))
        cur = comp
        crossings = []
        while cur in parent:
            cur, loc = parent[cur]
            crossings.append(loc)
        crossings.reverse()
        return crossings


def syndrome_graph(grid: SpacetimeGrid, spots: list) -> SyndromeGraph:
    """Complete defect graph with shortest grid costs and witness paths."""
    metric = _GridMetric(grid)
    m = len(spots)
    has_boundary = bool(metric.boundary_comps)
    g = SyndromeGraph(num_defects=m, defects=list(spots),
                      has_boundary=has_boundary, metric=True)
    for i in range(m):
        for j in range(i + 1, m):
            d = metric.distance(spots[i], spots[j])
            if d is not None:
                g.edges[(i, j)] = d
                g.witnesses[(i, j)] = metric.path_witness(spots[i], spots[j])
    if has_boundary:
        for i in range(m):
            hit = metric.boundary_distance(spots[i])
            if hit is not None:
                g.edges[(i, m + i)] = hit[0]
                g.witnesses[(i, m + i)] = metric.boundary_witness(spots[i])
    return g


def build_primal_graph(record):
    grid = build_primal_grid(record)
    return grid, syndrome_graph(grid, primal_defects(record))


def build_dual_graph(record, parity_mode: str):
    grid = build_dual_grid(record, parity_mode)
    return grid, syndrome_graph(grid, dual_defects(record))


# ---------------------------------------------------------------------------
# minimum-weight perfect matching

def _greedy_zero_reduction(g: SyndromeGraph):
    """Pair off nodes joined by weight-0 edges (optimal for metric weights).

    Returns (fixed pairs, remaining node list).  Only used when g.metric.
    """
    m = g.num_defects
    pairs = []
    used = set()
    # defects sharing a zero-cost component
    by_comp: dict = {}
    for (i, j), w in g.edges.items():
        if w == 0 and j < m:
            by_comp.setdefault(i, set()).update((i, j))
            by_comp.setdefault(j, set()).update((i, j))
    comp_groups = []
    seen = set()
    for i in range(m):
        if i in seen or i not in by_comp:
            continue
        stack, group = [i], set()
        while stack:
            u = stack.pop()
            if u in group:
                continue
            group.add(u)
            for v in by_comp.get(u, ()):
                if v not in group:
                    stack.append(v)
        seen |= group
        comp_groups.append(sorted(group))
    for group in comp_groups:
        it = iter(group)
        for a, b in zip(it, it):
            pairs.append((a, b))
            used.update((a, b))
    if g.has_boundary:
        for i in range(m):
            if i not in used and g.edges.get((i, m + i)) == 0:
                pairs.append((i, m + i))
                used.update((i, m + i))
    remaining = [i for i in range(m) if i not in used]
    return pairs, remaining


def _solve_remaining(g: SyndromeGraph, remaining: list):
    """Exact matching of the remaining defects (+ their boundary copies)."""
    import networkx as nx

    m = g.num_defects
    nodes = list(remaining)
    if g.has_boundary:
        nodes += [m + i for i in remaining]
    if not nodes:
        return []
    wg = nx.Graph()
    wg.add_nodes_from(nodes)
    wmax = 0
    pair_edges = []
    for a, b in itertools.combinations(nodes, 2):
        w = g.weight(a, b)
        if w is None:
            continue
        pair_edges.append((a, b, w))
        wmax = max(wmax, w)
    for a, b, w in pair_edges:
        wg.add_edge(a, b, weight=wmax + 1 - w)
    mate = nx.max_weight_matching(wg, maxcardinality=True)
    if 2 * len(mate) != len(nodes):
        raise ValueError("no perfect matching exists")
    return [tuple(sorted(e)) for e in mate]


def mwpm_exact(g: SyndromeGraph) -> Matching:
    """Globally minimum-weight perfect matching of the syndrome graph."""
    if g.num_nodes % 2:
        raise ValueError("odd node count cannot be perfectly matched")
    if g.metric:
        fixed, remaining = _greedy_zero_reduction(g)
    else:
        fixed, remaining = [], list(range(g.num_defects))
    pairs = fixed + _solve_remaining(g, remaining)
    pairs = sorted(tuple(sorted(p)) for p in pairs)
    total = sum(g.weight(i, j) for i, j in pairs)
    return Matching(pairs, total, [g.witness(i, j) for i, j in pairs])


def mwpm_bruteforce(g: SyndromeGraph) -> Matching:
    """Exhaustive matching oracle (factorial cost, capped at 12 nodes)."""
    if g.num_nodes > 12:
        raise ValueError("bruteforce matcher capped at 12 nodes")
    if g.num_nodes % 2:
        raise ValueError("odd node count cannot be perfectly matched")
    nodes = list(range(g.num_nodes))

    best: list = [None, None]

    def recurse(free, acc, w):
        if best[1] is not None and w > best[1]:
            return
        if not free:
            if best[1] is None or w < best[1] or \
                    (w == best[1] and sorted(acc) < best[0]):
                best[0] = sorted(acc)
                best[1] = w
            return
        a = free[0]
        for b in free[1:]:
            wab = g.weight(a, b)
            if wab is None:
                continue
            rest = [n for n in free if n not in (a, b)]
            recurse(rest, acc + [(a, b)], w + wab)

    recurse(nodes, [], 0)
    if best[0] is None:
        raise ValueError("no perfect matching exists")
    return Matching(best[0], best[1],
                    [g.witness(i, j) for i, j in best[0]])


# ---------------------------------------------------------------------------
# debug dumps

def dump_grid(grid: SpacetimeGrid) -> str:
    lines = [f"grid {grid.orientation} lines={grid.n_lines} "
             f"levels={grid.n_levels} boundary={grid.boundary}"]
    for x in range(grid.n_lines):
        for y in range(grid.n_levels - 1):
            if not grid.vert_open[x, y]:
                lines.append(f"wall x={x} y={y}")
    xs, ys = np.nonzero(grid.horiz_cost >= 0)
    for x, y in zip(xs, ys):
        lines.append(f"cross x={x} y={y} cost={int(grid.horiz_cost[x, y])}")
    return "\n".join(lines) + "\n"


def dump_graph(g: SyndromeGraph) -> str:
    lines = [f"graph defects={g.num_defects} boundary={g.has_boundary}"]
    for i, (x, y) in enumerate(g.defects):
        lines.append(f"defect {i} x={x} y={y}")
    for (i, j), w in sorted(g.edges.items()):
        lines.append(f"edge {i} {j} w={w}")
    return "\n".join(lines) + "\n"

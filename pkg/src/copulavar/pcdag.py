"""PC-algorithm recovery of the contemporaneous causal graph.

The innovation covariance plays the role of the data: partial
correlations are read off restricted inverses of it, tested with the
Fisher z statistic, and edges are deleted level by level.  Unshielded
colliders are oriented from the recorded separation sets and the
remaining edges closed under the Meek rules.  Node, edge and subset
enumeration all follow ascending index order so the (order dependent)
output is reproducible.
"""

from __future__ import annotations

import heapq
import json
import warnings as _warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.stats import norm

from .errors import CopulaVarError, NumericalError


@dataclass(frozen=True)
class PcConfig:
    alpha: float = 0.01
    max_cond_size: int | None = None
    fixed_gaps: np.ndarray | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise CopulaVarError("alpha must be in (0, 1)")

    def cond_size_limit(self, n_nodes: int) -> float:
        if self.max_cond_size is not None:
            return self.max_cond_size
        # Unlimited for small graphs; bound the subset search above that.
        return np.inf if n_nodes <= 30 else 8


@dataclass
class Skeleton:
    n_nodes: int
    edges: set  # unordered pairs (i, j) with i < j


@dataclass
class Cpdag:
    """Mixed graph over innovation nodes: directed plus undirected edges."""

    names: tuple[str, ...]
    directed: set = field(default_factory=set)  # (tail, head)
    undirected: set = field(default_factory=set)  # (i, j), i < j
    sepsets: dict = field(default_factory=dict)  # (i, j), i < j -> frozenset
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        self.names = tuple(self.names)

    @property
    def n_nodes(self) -> int:
        return len(self.names)

    def edge_type(self, i: int, j: int) -> str:
        """One of 'none', 'undirected', '->' (i to j), '<-' (j to i)."""
        a, b = min(i, j), max(i, j)
        if (a, b) in self.undirected:
            return "undirected"
        if (i, j) in self.directed:
            return "->"
        if (j, i) in self.directed:
            return "<-"
        return "none"

    def is_fully_directed(self) -> bool:
        return not self.undirected

    def parents(self, i: int) -> frozenset:
        return frozenset(t for (t, h) in self.directed if h == i)

    def topological_order(self) -> list[int]:
        """Lexicographically smallest topological order of the directed part."""
        indeg = [0] * self.n_nodes
        children = {i: [] for i in range(self.n_nodes)}
        for tail, head in self.directed:
            indeg[head] += 1
            children[tail].append(head)
        heap = [i for i in range(self.n_nodes) if indeg[i] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            node = heapq.heappop(heap)
            order.append(node)
            for child in sorted(children[node]):
                indeg[child] -= 1
                if indeg[child] == 0:
                    heapq.heappush(heap, child)
        if len(order) != self.n_nodes:
            raise NumericalError("not a DAG")
        return order

    def to_dot(self) -> str:
        lines = ["digraph cpdag {"]
        for name in self.names:
            lines.append(f'  "{name}";')
        for tail, head in sorted(self.directed):
            lines.append(f'  "{self.names[tail]}" -> "{self.names[head]}";')
        for i, j in sorted(self.undirected):
            lines.append(f'  "{self.names[i]}" -> "{self.names[j]}" [dir=none];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        edges = []
        for tail, head in sorted(self.directed):
            edges.append(
                {"from": self.names[tail], "to": self.names[head], "directed": True}
            )
        for i, j in sorted(self.undirected):
            edges.append(
                {"from": self.names[i], "to": self.names[j], "directed": False}
            )
        sepsets = [
            {
                "i": self.names[i],
                "j": self.names[j],
                "set": [self.names[s] for s in sorted(sep)],
            }
            for (i, j), sep in sorted(self.sepsets.items())
        ]
        return {"nodes": list(self.names), "edges": edges, "sepsets": sepsets}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


def partial_correlation(sigma_eps: np.ndarray, i: int, j: int, cond) -> float:
    """Partial correlation of nodes i and j given the conditioning set,
    from the inverse of the restricted covariance.

    The restriction keeps natural index order (not the tested pair
    first): permuting rows changes the elimination order and can turn an
    exactly zero partial correlation into rounding noise, which matters
    for the near-deterministic reference runs on analytic covariances.
    """
    cond = sorted(cond)
    if i == j or i in cond or j in cond:
        raise CopulaVarError("conditioning set must exclude the tested pair")
    idx = sorted([i, j] + cond)
    pos_i, pos_j = idx.index(i), idx.index(j)
    sub = np.asarray(sigma_eps)[np.ix_(idx, idx)]
    try:
        prec = np.linalg.inv(sub)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("degenerate conditioning set") from exc
    denom = prec[pos_i, pos_i] * prec[pos_j, pos_j]
    if not np.isfinite(prec).all() or denom <= 0:
        raise NumericalError("degenerate conditioning set")
    return float(-prec[pos_i, pos_j] / np.sqrt(denom))


def fisher_z_decision(xi_hat: float, n: int, cond_size: int, alpha: float) -> bool:
    """True when the edge should be deleted: the two-sided Fisher z
    statistic sqrt(n - m - 3) |atanh(xi)| falls at or below the normal
    quantile for level alpha."""
    dof = n - cond_size - 3
    if dof <= 0:
        raise NumericalError("sample too small for conditioning size")
    xi = min(max(xi_hat, -1.0), 1.0)
    if abs(xi) >= 1.0:
        return False
    stat = np.sqrt(dof) * abs(np.arctanh(xi))
    return bool(stat <= norm.ppf(1.0 - alpha / 2.0))


def pc_skeleton(sigma_eps: np.ndarray, n: int, config: PcConfig):
    """Level-wise skeleton search.

    Starts from the complete graph minus any fixed gaps; gap pairs are
    recorded with an empty separation set without being tested.  For each
    conditioning size the surviving edges are visited in lexicographic
    order and removed on the first accepted independence.
    """
    sigma_eps = np.asarray(sigma_eps, dtype=float)
    k = sigma_eps.shape[0]
    adjacency = {i: set(range(k)) - {i} for i in range(k)}
    sepsets: dict = {}

    if config.fixed_gaps is not None:
        gaps = np.asarray(config.fixed_gaps, dtype=bool)
        if gaps.shape != (k, k):
            raise CopulaVarError("fixed gaps must be K x K")
        for i in range(k):
            for j in range(i + 1, k):
                if gaps[i, j] or gaps[j, i]:
                    adjacency[i].discard(j)
                    adjacency[j].discard(i)
                    sepsets[(i, j)] = frozenset()

    limit = config.cond_size_limit(k)
    level = 0
    while level <= limit:
        any_testable = False
        for i in range(k):
            for j in sorted(adjacency[i]):
                if j <= i:
                    continue
                deleted = False
                for anchor, other in ((i, j), (j, i)):
                    candidates = sorted(adjacency[anchor] - {other})
                    if len(candidates) < level:
                        continue
                    any_testable = True
                    for cond in combinations(candidates, level):
                        xi = partial_correlation(sigma_eps, i, j, cond)
                        if fisher_z_decision(xi, n, level, config.alpha):
                            adjacency[i].discard(j)
                            adjacency[j].discard(i)
                            sepsets[(i, j)] = frozenset(cond)
                            deleted = True
                            break
                    if deleted:
                        break
        if not any_testable:
            break
        level += 1

    edges = {(i, j) for i in range(k) for j in adjacency[i] if i < j}
    return Skeleton(k, edges), sepsets


def _names_for(k: int, names) -> tuple[str, ...]:
    if names is None:
        return tuple(f"x{i + 1}" for i in range(k))
    if len(names) != k:
        raise CopulaVarError("need one name per node")
    return tuple(names)


def orient_edges(skeleton: Skeleton, sepsets: dict, names=None) -> Cpdag:
    """Collider orientation from separation sets, then Meek rules R1-R3.

    Conflicting collider orientations leave the edge undirected (and
    excluded from further rules) with a warning, rather than failing:
    conflicts can arise under sampling noise even though they are
    impossible in the faithful population limit.
    """
    k = skeleton.n_nodes
    graph = Cpdag(_names_for(k, names), sepsets=dict(sepsets))
    undirected = {tuple(sorted(e)) for e in skeleton.edges}
    directed: set = set()
    frozen: set = set()
    order_log: list = []

    def adjacent(i, j):
        a, b = min(i, j), max(i, j)
        return (a, b) in undirected or (i, j) in directed or (j, i) in directed

    def neighbors(i):
        out = set()
        for a, b in undirected:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        for t, h in directed:
            if t == i:
                out.add(h)
            elif h == i:
                out.add(t)
        return out

    def orient(tail, head, conflict_checked=False):
        pair = tuple(sorted((tail, head)))
        if pair in frozen:
            return False
        if pair in undirected:
            undirected.discard(pair)
            directed.add((tail, head))
            order_log.append((tail, head))
            return True
        if (head, tail) in directed and conflict_checked:
            directed.discard((head, tail))
            order_log[:] = [e for e in order_log if e != (head, tail)]
            undirected.add(pair)
            frozen.add(pair)
            graph.warnings.append(
                f"conflicting orientation for edge {pair}; left undirected"
            )
        return False

    # Unshielded colliders i -> k <- j whenever k is outside sepset(i, j).
    for i in range(k):
        for j in range(i + 1, k):
            if adjacent(i, j):
                continue
            common = sorted(neighbors(i) & neighbors(j))
            if not common:
                continue
            sep = sepsets.get((i, j))
            if sep is None:
                continue
            for mid in common:
                if mid not in sep:
                    orient(i, mid, conflict_checked=True)
                    orient(j, mid, conflict_checked=True)

    # Meek rules to closure.
    changed = True
    while changed:
        changed = False
        # R1: a -> b, b - c, a and c nonadjacent  =>  b -> c.
        for a, b in sorted(directed):
            for c in sorted(neighbors(b)):
                if c != a and tuple(sorted((b, c))) in undirected and not adjacent(a, c):
                    changed |= orient(b, c)
        # R2: a -> b -> c with a - c  =>  a -> c.
        for a, c in sorted(undirected):
            for first, second in ((a, c), (c, a)):
                if any(
                    (first, b) in directed and (b, second) in directed
                    for b in range(k)
                ):
                    changed |= orient(first, second)
                    break
        # R3: a - b with a - c, a - d, c -> b, d -> b, c and d nonadjacent.
        for a, b in sorted(undirected):
            for tail, head in ((a, b), (b, a)):
                spouses = [
                    c
                    for c in sorted(neighbors(tail))
                    if tuple(sorted((tail, c))) in undirected and (c, head) in directed
                ]
                done = False
                for c, d in combinations(spouses, 2):
                    if not adjacent(c, d):
                        changed |= orient(tail, head)
                        done = True
                        break
                if done:
                    break

    graph.directed = directed
    graph.undirected = undirected
    _repair_cycles(graph, order_log, frozen)
    return graph


def _repair_cycles(graph: Cpdag, order_log: list, frozen: set) -> None:
    """Demote the most recently oriented edge on any directed cycle.

    Cycles cannot occur on faithful inputs; this is a defensive path for
    heavily misspecified samples, and it warns when it fires.
    """
    while True:
        cycle_edge = _find_cycle_edge(graph)
        if cycle_edge is None:
            return
        for tail, head in reversed(order_log):
            if (tail, head) in graph.directed and (tail, head) in cycle_edge:
                graph.directed.discard((tail, head))
                graph.undirected.add(tuple(sorted((tail, head))))
                frozen.add(tuple(sorted((tail, head))))
                graph.warnings.append(
                    f"cycle detected; edge {(tail, head)} left undirected"
                )
                break
        else:
            return


def _find_cycle_edge(graph: Cpdag):
    """Return the set of edges on one directed cycle, or None."""
    children = {i: [] for i in range(graph.n_nodes)}
    for tail, head in graph.directed:
        children[tail].append(head)
    color = {i: 0 for i in range(graph.n_nodes)}
    stack_path: list = []

    def dfs(node):
        color[node] = 1
        stack_path.append(node)
        for child in sorted(children[node]):
            if color[child] == 1:
                start = stack_path.index(child)
                cycle = stack_path[start:] + [child]
                return set(zip(cycle[:-1], cycle[1:]))
            if color[child] == 0:
                found = dfs(child)
                if found:
                    return found
        color[node] = 2
        stack_path.pop()
        return None

    for i in range(graph.n_nodes):
        if color[i] == 0:
            found = dfs(i)
            if found:
                return found
    return None


def discover_cpdag(
    sigma_eps: np.ndarray, n: int, config: PcConfig, names=None
) -> Cpdag:
    """Full PC run: skeleton search followed by edge orientation."""
    skeleton, sepsets = pc_skeleton(sigma_eps, n, config)
    graph = orient_edges(skeleton, sepsets, names)
    for message in graph.warnings:
        _warnings.warn(message, stacklevel=2)
    return graph


def fixed_gaps_from_support(theta11_mask: np.ndarray) -> np.ndarray:
    """Gaps are the off-diagonal zeros of the contemporaneous precision block."""
    mask = np.asarray(theta11_mask, dtype=bool)
    gaps = ~mask
    np.fill_diagonal(gaps, False)
    return gaps

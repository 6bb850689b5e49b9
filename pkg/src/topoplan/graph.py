"""Topological navigation graphs built from trajectory logs.

Nodes are timestamped observations; directed edges carry an estimated
traversal effort in time-steps, produced by an injected distance estimator.
Connectivity is decided per ordered node pair by a three-signal rule: pairs
captured in quick succession are connected, and pairs that the estimator
deems nearby are connected unless their spatial separation says otherwise
(which filters out visually aliased "wormhole" shortcuts). A weighted
transitive reduction then prunes edges that are dominated by alternative
paths of no greater total weight.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .errors import ContractError, FrameMismatchError, SchemaError, ValidationError
from .serialization import read_document, write_document

PLANAR = "planar"
GEODETIC = "geodetic"

GRAPH_FORMAT = "topo-graph/1"

# Mean Earth radius in meters; sub-meter accurate at sub-kilometer scales.
EARTH_RADIUS_M = 6371.0088e3

DistanceFn = Callable[["ObservationNode", "ObservationNode"], float]


@dataclass(frozen=True)
class ObservationNode:
    """One observation: a graph vertex with its capture metadata."""

    id: int
    timestamp: float
    position: tuple[float, float] | None
    frame: str = PLANAR
    image_ref: str | None = None
    trajectory_id: int = 0

    def validate(self) -> None:
        if self.frame not in (PLANAR, GEODETIC):
            raise ValidationError(f"node {self.id}: unknown frame {self.frame!r}")
        if not math.isfinite(self.timestamp) or self.timestamp < 0:
            raise ValidationError(f"node {self.id}: bad timestamp {self.timestamp!r}")
        if self.position is not None:
            if len(self.position) != 2 or not all(math.isfinite(c) for c in self.position):
                raise ValidationError(f"node {self.id}: non-finite position {self.position!r}")


@dataclass(frozen=True)
class Edge:
    """Directed edge with traversal effort in time-steps."""

    src: int
    dst: int
    distance: float
    provenance: str = "learned"  # "temporal" or "learned"

    def validate(self) -> None:
        if self.src == self.dst:
            raise ValidationError(f"edge {self.src}->{self.dst}: self loops are not allowed")
        if not math.isfinite(self.distance) or self.distance < 0:
            raise ValidationError(
                f"edge {self.src}->{self.dst}: bad distance {self.distance!r}"
            )
        if self.provenance not in ("temporal", "learned"):
            raise ValidationError(
                f"edge {self.src}->{self.dst}: unknown provenance {self.provenance!r}"
            )


class TopoGraph:
    """Immutable directed graph of observations.

    Construction validates all invariants (unique node ids, endpoints
    present, one edge per ordered pair); afterwards the graph is safe for
    concurrent reads.
    """

    def __init__(self, nodes: Iterable[ObservationNode], edges: Iterable[Edge],
                 directed: bool = True):
        self._nodes: dict[int, ObservationNode] = {}
        for node in nodes:
            node.validate()
            if node.id in self._nodes:
                raise ValidationError(f"duplicate node id {node.id}")
            self._nodes[node.id] = node
        frames = {n.frame for n in self._nodes.values()}
        if len(frames) > 1:
            raise FrameMismatchError(f"graph mixes frames {sorted(frames)}")
        self.frame = frames.pop() if frames else PLANAR
        self.directed = directed

        self._edges: dict[tuple[int, int], Edge] = {}
        for edge in edges:
            edge.validate()
            if edge.src not in self._nodes or edge.dst not in self._nodes:
                raise ValidationError(f"edge {edge.src}->{edge.dst}: endpoint not in graph")
            key = (edge.src, edge.dst)
            if key in self._edges:
                raise ValidationError(f"duplicate edge {edge.src}->{edge.dst}")
            self._edges[key] = edge

        self._out: dict[int, list[tuple[int, float]]] = {i: [] for i in self._nodes}
        self._in: dict[int, list[tuple[int, float]]] = {i: [] for i in self._nodes}
        for (u, v), edge in self._edges.items():
            self._out[u].append((v, edge.distance))
            self._in[v].append((u, edge.distance))
        for adj in (self._out, self._in):
            for lst in adj.values():
                lst.sort()

    # -- read access ---------------------------------------------------

    @property
    def node_ids(self) -> list[int]:
        return sorted(self._nodes)

    def node(self, node_id: int) -> ObservationNode:
        return self._nodes[node_id]

    def has_node(self, node_id: int) -> bool:
        return node_id in self._nodes

    def nodes(self) -> list[ObservationNode]:
        return [self._nodes[i] for i in sorted(self._nodes)]

    def edges(self) -> list[Edge]:
        return [self._edges[k] for k in sorted(self._edges)]

    def has_edge(self, src: int, dst: int) -> bool:
        return (src, dst) in self._edges

    def edge(self, src: int, dst: int) -> Edge:
        try:
            return self._edges[(src, dst)]
        except KeyError:
            raise ContractError(f"no edge {src}->{dst}") from None

    def distance(self, src: int, dst: int) -> float:
        return self.edge(src, dst).distance

    def out_neighbors(self, node_id: int) -> list[tuple[int, float]]:
        """(dst, distance) pairs, sorted by dst."""
        return self._out[node_id]

    def in_neighbors(self, node_id: int) -> list[tuple[int, float]]:
        """(src, distance) pairs, sorted by src."""
        return self._in[node_id]

    @property
    def num_nodes(self) -> int:
        return len(self._nodes)

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    def symmetrized(self) -> "TopoGraph":
        """Add the reverse of every edge that lacks one (same weight)."""
        edges = dict(self._edges)
        for (u, v), e in self._edges.items():
            if (v, u) not in edges:
                edges[(v, u)] = Edge(v, u, e.distance, e.provenance)
        return TopoGraph(self._nodes.values(), edges.values(), directed=False)

    # -- shortest paths (plain min-cost Dijkstra over D) -----------------

    def shortest_distance(self, src: int, dst: int,
                          skip_edge: tuple[int, int] | None = None,
                          bound: float | None = None) -> float:
        """D-weighted shortest distance src->dst, or inf if unreachable.

        ``skip_edge`` excludes one directed edge; ``bound`` abandons the
        search once all frontier labels exceed it.
        """
        if src == dst:
            return 0.0
        dist = {src: 0.0}
        heap = [(0.0, src)]
        done: set[int] = set()
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            if bound is not None and d > bound:
                return math.inf
            if u == dst:
                return d
            done.add(u)
            for v, w in self._out[u]:
                if (u, v) == skip_edge:
                    continue
                nd = d + w
                if nd < dist.get(v, math.inf):
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return math.inf

    def single_source_distances(self, src: int) -> dict[int, float]:
        dist = {src: 0.0}
        heap = [(0.0, src)]
        done: set[int] = set()
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            for v, w in self._out[u]:
                nd = d + w
                if nd < dist.get(v, math.inf):
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return dist


@dataclass(frozen=True)
class GraphBuildParams:
    """Thresholds for the edge predicate and the reduction slack.

    Defaults: 1 s temporal window, 80 time-step reachability threshold,
    100 m spatial gate, zero-slack reduction.
    """

    epsilon: float = 1.0
    tau: float = 80.0
    eta: float = 100.0
    reduction_slack: float = 0.0

    def __post_init__(self) -> None:
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon!r}")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValidationError(f"tau must be > 0, got {self.tau!r}")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValidationError(f"eta must be > 0, got {self.eta!r}")
        if not (self.reduction_slack >= 0 and math.isfinite(self.reduction_slack)):
            raise ValidationError(f"reduction_slack must be >= 0, got {self.reduction_slack!r}")


def spatial_distance(a: ObservationNode, b: ObservationNode) -> float:
    """Distance in meters: Euclidean for planar frames, haversine for geodetic."""
    if a.frame != b.frame:
        raise FrameMismatchError(f"cannot mix frames {a.frame!r} and {b.frame!r}")
    if a.position is None or b.position is None:
        raise ValidationError("spatial_distance requires positions on both nodes")
    if a.frame == PLANAR:
        return math.hypot(a.position[0] - b.position[0], a.position[1] - b.position[1])
    lat1, lon1 = a.position
    lat2, lon2 = b.position
    if (lat1, lon1) == (lat2, lon2):
        return 0.0
    p1, p2 = math.radians(lat1), math.radians(lat2)
    half_dp = math.radians(lat2 - lat1) / 2.0
    half_dl = math.radians(lon2 - lon1) / 2.0
    h = math.sin(half_dp) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(half_dl) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def edge_predicate(a: ObservationNode, b: ObservationNode, distance_est: float,
                   params: GraphBuildParams, use_learned: bool = True) -> tuple[bool, str]:
    """Decide edge presence for the ordered pair (a, b).

    Returns (present, provenance). Temporal proximity alone suffices; the
    learned clause additionally requires spatial agreement so that aliased
    observations far apart do not produce shortcut edges.
    """
    t_gap = abs(a.timestamp - b.timestamp)
    if t_gap < params.epsilon:
        return True, "temporal"
    if use_learned and distance_est < params.tau:
        if spatial_distance(a, b) < params.eta:
            return True, "learned"
    return False, ""


def build_graph(trajectories: Sequence[Sequence[ObservationNode]],
                distance_fn: DistanceFn,
                params: GraphBuildParams | None = None,
                *,
                reduce: bool = True,
                use_learned: bool = True) -> TopoGraph:
    """Construct a TopoGraph from time-ordered trajectory records.

    Evaluates the edge predicate for every ordered node pair (within and
    across trajectories). The returned graph is transitively reduced with
    ``params.reduction_slack`` unless ``reduce`` is False. Records without
    positions are accepted only when ``use_learned`` is False.
    """
    params = params or GraphBuildParams()
    records: list[ObservationNode] = []
    seen: set[int] = set()
    for t_index, trajectory in enumerate(trajectories):
        previous = None
        for record in trajectory:
            record.validate()
            if record.id in seen:
                raise ValidationError(f"duplicate record id {record.id}")
            seen.add(record.id)
            if use_learned and record.position is None:
                raise ValidationError(
                    f"record {record.id}: missing position (required unless the "
                    "learned clause is disabled)"
                )
            if previous is not None and record.timestamp < previous:
                raise ValidationError(
                    f"trajectory {t_index}: record {record.id} breaks time ordering"
                )
            previous = record.timestamp
            records.append(record)

    if not records:
        return TopoGraph([], [])

    edges: list[Edge] = []
    for a in records:
        for b in records:
            if a.id == b.id:
                continue
            estimate = float(distance_fn(a, b))
            if not math.isfinite(estimate) or estimate < 0:
                raise ValidationError(
                    f"distance estimate for ({a.id}, {b.id}) is {estimate!r}"
                )
            present, provenance = edge_predicate(a, b, estimate, params, use_learned)
            if present:
                edges.append(Edge(a.id, b.id, estimate, provenance))

    graph = TopoGraph(records, edges)
    if reduce:
        graph = reduce_graph(graph, params.reduction_slack)
    return graph


def _bounded_alt_distance(adj: dict[int, dict[int, float]], src: int, dst: int,
                          skip: tuple[int, int], bound: float) -> float:
    """Shortest src->dst distance avoiding one edge, abandoned beyond bound."""
    dist = {src: 0.0}
    heap = [(0.0, src)]
    done: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if d > bound:
            return math.inf
        if u == dst:
            return d
        done.add(u)
        for v, w in adj[u].items():
            if (u, v) == skip:
                continue
            nd = d + w
            if nd <= bound and nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return math.inf


def reduce_graph(graph: TopoGraph, slack: float = 0.0) -> TopoGraph:
    """Remove edges dominated by alternative paths of weight <= D + slack.

    Edges are examined longest first (ties by endpoint ids) and removal is
    committed immediately, so an edge survives only if the graph as pruned
    so far offers no alternative route within the slack. With slack 0 every
    removal preserves all shortest-path distances exactly; with positive
    slack each removal may stretch routes through it by at most ``slack``.
    Reachability is always preserved.
    """
    if slack < 0 or not math.isfinite(slack):
        raise ValidationError(f"slack must be finite and >= 0, got {slack!r}")
    kept: dict[tuple[int, int], Edge] = {(e.src, e.dst): e for e in graph.edges()}
    adj: dict[int, dict[int, float]] = {i: {} for i in graph.node_ids}
    for (u, v), e in kept.items():
        adj[u][v] = e.distance

    for edge in sorted(kept.values(), key=lambda e: (-e.distance, e.src, e.dst)):
        bound = edge.distance + slack
        alt = _bounded_alt_distance(adj, edge.src, edge.dst,
                                    (edge.src, edge.dst), bound)
        if alt <= bound:
            del kept[(edge.src, edge.dst)]
            del adj[edge.src][edge.dst]
    return TopoGraph(graph.nodes(), kept.values(), directed=graph.directed)


# -- file format ------------------------------------------------------


def save_graph(graph: TopoGraph, path: str | Path,
               stamps: Mapping[str, str] | None = None) -> None:
    """Write the graph document; node array sorted by id, edges by (src, dst)."""
    doc: dict = {
        "version": GRAPH_FORMAT,
        "frame": graph.frame,
        "directed": graph.directed,
        "nodes": [
            {
                "id": n.id,
                "timestamp": float(n.timestamp),
                "position": None if n.position is None else [float(n.position[0]),
                                                             float(n.position[1])],
                "image_ref": n.image_ref,
                "trajectory_id": n.trajectory_id,
            }
            for n in graph.nodes()
        ],
        "edges": [
            {
                "src": e.src,
                "dst": e.dst,
                "distance": float(e.distance),
                "provenance": e.provenance,
            }
            for e in graph.edges()
        ],
    }
    if stamps:
        doc["stamps"] = dict(stamps)
    write_document(path, doc)


def load_graph(path: str | Path) -> TopoGraph:
    doc = read_document(path, GRAPH_FORMAT)
    frame = doc.get("frame")
    if frame not in (PLANAR, GEODETIC):
        raise SchemaError(f"{path}: bad frame {frame!r}")
    nodes = []
    for i, rec in enumerate(doc.get("nodes", [])):
        try:
            position = rec["position"]
            nodes.append(ObservationNode(
                id=int(rec["id"]),
                timestamp=float(rec["timestamp"]),
                position=None if position is None else (float(position[0]),
                                                        float(position[1])),
                frame=frame,
                image_ref=rec.get("image_ref"),
                trajectory_id=int(rec.get("trajectory_id", 0)),
            ))
        except (KeyError, TypeError, IndexError) as exc:
            raise SchemaError(f"{path}: node record {i}: {exc!r}") from exc
    edges = []
    for i, rec in enumerate(doc.get("edges", [])):
        try:
            edges.append(Edge(
                src=int(rec["src"]),
                dst=int(rec["dst"]),
                distance=float(rec["distance"]),
                provenance=rec.get("provenance", "learned"),
            ))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"{path}: edge record {i}: {exc!r}") from exc
    try:
        return TopoGraph(nodes, edges, directed=bool(doc.get("directed", True)))
    except ValidationError as exc:
        raise SchemaError(f"{path}: {exc}") from exc

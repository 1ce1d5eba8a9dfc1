"""Student-centered learning paths as two-level dependency graphs.

The top level holds course topics; a topic may nest one graph of components.
Edges are prerequisite relations (``frm`` must be completed before ``to``).
Students move freely along the frontier: any node whose prerequisites are all
complete is available, so independent nodes can be taken in any order.

Graphs are values: mutating operations return a new graph. Progress updates
for a student are serialized by the control plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

from .errors import CycleError, LockedError, ValidationError

MAX_ENUMERATION_NODES = 8


@dataclass(slots=True)
class TopicGraph:
    """One level of the dependency graph: nodes (id -> title), prerequisite
    edges, and optional per-node nested component graphs."""

    nodes: dict[str, str] = field(default_factory=dict)
    edges: set[tuple[str, str]] = field(default_factory=set)
    components: dict[str, "TopicGraph"] = field(default_factory=dict)

    def prerequisites(self, node: str) -> set[str]:
        return {frm for frm, to in self.edges if to == node}

    def copy(self) -> "TopicGraph":
        return TopicGraph(
            nodes=dict(self.nodes),
            edges=set(self.edges),
            components={k: v.copy() for k, v in self.components.items()},
        )


@dataclass(slots=True)
class StudentProgress:
    """Completion state. Component completions are stored as qualified ids
    ("topic/component"); every completed node has its prerequisites completed."""

    student_id: str
    completed: set[str] = field(default_factory=set)


def add_node(graph: TopicGraph, node_id: str, title: str | None = None) -> TopicGraph:
    if not node_id or "/" in node_id:
        raise ValidationError("node id must be non-empty and slash-free")
    if node_id in graph.nodes:
        raise ValidationError(f"node {node_id!r} already exists")
    out = graph.copy()
    out.nodes[node_id] = title or node_id
    return out


def _find_path(edges: set[tuple[str, str]], start: str, goal: str) -> list[str] | None:
    """Directed path start -> goal along prerequisite edges, or None."""
    adjacency: dict[str, list[str]] = {}
    for frm, to in edges:
        adjacency.setdefault(frm, []).append(to)
    stack = [(start, [start])]
    seen = set()
    while stack:
        node, path = stack.pop()
        if node == goal:
            return path
        if node in seen:
            continue
        seen.add(node)
        for nxt in adjacency.get(node, []):
            stack.append((nxt, path + [nxt]))
    return None


def add_dependency(graph: TopicGraph, frm: str, to: str) -> TopicGraph:
    """New graph with the prerequisite edge frm -> to; rejects cycles, naming
    the offending path."""
    missing = [n for n in (frm, to) if n not in graph.nodes]
    if missing:
        raise ValidationError(f"unknown node(s): {', '.join(missing)}")
    if frm == to:
        raise CycleError(f"self-dependency on {frm!r}", [frm, frm])
    back = _find_path(graph.edges, to, frm)
    if back is not None:
        cycle = back + [to]
        raise CycleError(
            "dependency would create a cycle: " + " -> ".join(cycle), cycle
        )
    out = graph.copy()
    out.edges.add((frm, to))
    return out


def _check_completed(graph: TopicGraph, completed: set[str]) -> None:
    unknown = completed - set(graph.nodes)
    if unknown:
        raise ValidationError(f"completed set names unknown nodes: {sorted(unknown)}")
    for node in completed:
        unmet = graph.prerequisites(node) - completed
        if unmet:
            raise ValidationError(
                f"completed set is inconsistent: {node!r} lacks prerequisites {sorted(unmet)}"
            )


def frontier(graph: TopicGraph, completed: set[str]) -> set[str]:
    """Nodes available to start now: not completed, all prerequisites completed."""
    _check_completed(graph, completed)
    return {
        n
        for n in graph.nodes
        if n not in completed and graph.prerequisites(n) <= completed
    }


def mark_complete(progress: StudentProgress, graph: TopicGraph, node: str) -> StudentProgress:
    """New progress with ``node`` completed. Re-completing is an idempotent
    success; unmet prerequisites raise LockedError listing what is missing."""
    if node not in graph.nodes:
        raise ValidationError(f"unknown node {node!r}")
    if node in progress.completed:
        return progress
    missing = sorted(graph.prerequisites(node) - progress.completed)
    if missing:
        raise LockedError(
            f"{node!r} is locked; complete first: {', '.join(missing)}", missing
        )
    return StudentProgress(progress.student_id, set(progress.completed) | {node})


def valid_orderings(graph: TopicGraph) -> list[list[str]]:
    """All topological orders, by brute-force permutation filtering. The
    testing oracle for frontier walks; capped at 8 nodes."""
    names = sorted(graph.nodes)
    if len(names) > MAX_ENUMERATION_NODES:
        raise ValidationError(
            f"enumeration capped at {MAX_ENUMERATION_NODES} nodes, got {len(names)}"
        )
    orders = []
    for perm in permutations(names):
        pos = {n: i for i, n in enumerate(perm)}
        if all(pos[frm] < pos[to] for frm, to in graph.edges):
            orders.append(list(perm))
    return orders


# -- two-level orchestration ----------------------------------------------


def component_id(topic: str, component: str) -> str:
    return f"{topic}/{component}"


def topic_completions(graph: TopicGraph, completed: set[str]) -> set[str]:
    """Topic-level completed set implied by ``completed``: a topic with
    components counts once all of them are done."""
    done = set()
    for topic in graph.nodes:
        sub = graph.components.get(topic)
        if sub is not None and sub.nodes:
            if all(component_id(topic, c) in completed for c in sub.nodes):
                done.add(topic)
        elif topic in completed:
            done.add(topic)
    return done


def available(graph: TopicGraph, progress: StudentProgress) -> dict[str, list[str]]:
    """What the student can work on now: available topic -> its open
    components ([] for leaf topics)."""
    topics_done = topic_completions(graph, progress.completed)
    out: dict[str, list[str]] = {}
    for topic in frontier(graph, topics_done):
        sub = graph.components.get(topic)
        if sub is None or not sub.nodes:
            out[topic] = []
        else:
            comps_done = {
                c for c in sub.nodes if component_id(topic, c) in progress.completed
            }
            out[topic] = sorted(frontier(sub, comps_done))
    return out


def complete(
    progress: StudentProgress, graph: TopicGraph, topic: str, component: str | None = None
) -> StudentProgress:
    """Mark a topic (or one of its components) complete, enforcing both
    levels' prerequisites."""
    if topic not in graph.nodes:
        raise ValidationError(f"unknown topic {topic!r}")
    sub = graph.components.get(topic)
    topics_done = topic_completions(graph, progress.completed)
    if component is None:
        if sub is not None and sub.nodes:
            raise ValidationError(
                f"topic {topic!r} has components; complete them individually"
            )
        shadow = StudentProgress(progress.student_id, topics_done)
        after = mark_complete(shadow, graph, topic)
        if after is shadow:
            return progress
        return StudentProgress(progress.student_id, set(progress.completed) | {topic})
    if sub is None or component not in sub.nodes:
        raise ValidationError(f"unknown component {component!r} in topic {topic!r}")
    if topic not in topics_done and topic not in frontier(graph, topics_done):
        missing = sorted(graph.prerequisites(topic) - topics_done)
        raise LockedError(
            f"topic {topic!r} is locked; complete first: {', '.join(missing)}", missing
        )
    qid = component_id(topic, component)
    if qid in progress.completed:
        return progress
    comps_done = {c for c in sub.nodes if component_id(topic, c) in progress.completed}
    shadow = StudentProgress(progress.student_id, comps_done)
    mark_complete(shadow, sub, component)  # raises LockedError when unmet
    return StudentProgress(progress.student_id, set(progress.completed) | {qid})


def default_graph() -> TopicGraph:
    """The shipped curriculum: one oculomotor-examination topic whose three
    tests are mutually independent, so students take them in any order."""
    tests = TopicGraph(
        nodes={
            "saccade-latency": "Test 1: saccade latency",
            "smooth-pursuit": "Test 2: smooth pursuit precision",
            "vor": "Test 3: vestibulo-ocular reflex",
        }
    )
    return TopicGraph(
        nodes={"oculomotor-examination": "Oculomotor examination"},
        components={"oculomotor-examination": tests},
    )


# -- (de)serialization -------------------------------------------------------


def graph_to_dict(graph: TopicGraph) -> dict:
    out: dict = {
        "nodes": [{"id": n, "title": t} for n, t in sorted(graph.nodes.items())],
        "edges": sorted([list(e) for e in graph.edges]),
    }
    if graph.components:
        out["components"] = {
            topic: graph_to_dict(sub) for topic, sub in sorted(graph.components.items())
        }
    return out


def graph_from_dict(data: dict, _depth: int = 0) -> TopicGraph:
    if _depth > 1:
        raise ValidationError("graphs nest at most two levels (topics, components)")
    graph = TopicGraph()
    for node in data.get("nodes", []):
        graph = add_node(graph, node["id"], node.get("title"))
    for frm, to in data.get("edges", []):
        graph = add_dependency(graph, frm, to)
    for topic, sub in data.get("components", {}).items():
        if topic not in graph.nodes:
            raise ValidationError(f"components listed for unknown topic {topic!r}")
        graph.components[topic] = graph_from_dict(sub, _depth + 1)
    return graph

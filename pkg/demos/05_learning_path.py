#!/usr/bin/env python3
"""Student-centered learning paths on a dependency graph.

Vertices are course content, edges are prerequisites. Students move freely
along the frontier, so independent content can be studied in any order; the
classic example: basic chemistry before mineral composition or physical
properties.
"""

from oculab.errors import LockedError
from oculab.pedagogy import (
    StudentProgress,
    TopicGraph,
    add_dependency,
    available,
    complete,
    default_graph,
    frontier,
    mark_complete,
    valid_orderings,
)

g = TopicGraph(nodes={"chem": "Basic chemistry", "minerals": "Mineral composition",
                      "properties": "Physical properties"})
g = add_dependency(g, "chem", "minerals")
g = add_dependency(g, "chem", "properties")
print("chemistry example:")
print(f"  frontier at start: {sorted(frontier(g, set()))}")
print(f"  all valid orders: {valid_orderings(g)}")
try:
    mark_complete(StudentProgress("s", set()), g, "minerals")
except LockedError as err:
    print(f"  minerals first -> locked: {err}")

print("\nshipped curriculum (three tests, any order):")
curriculum = default_graph()
progress = StudentProgress("student-1", set())
print(f"  available: {available(curriculum, progress)}")
for test in ("vor", "saccade-latency", "smooth-pursuit"):
    progress = complete(progress, curriculum, "oculomotor-examination", test)
    print(f"  completed {test}; now available: {available(curriculum, progress)}")
print(f"  final completions: {sorted(progress.completed)}")

"""Confusion matrix, thresholded confusion graph and confused-group discovery.

Edges run from the true class to the predicted class. Groups are weakly,
strongly or biconnected components; classes touching no group are reported
as isolated.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from gwbowv.errors import ToolkitError

GROUP_MODES = ("weak", "strong", "biconnected")

_PALETTE = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
    "#b3de69", "#fccde5", "#bc80bd", "#ccebc5", "#ffed6f", "#d9d9d9",
]


def confusion_matrix(truth, predicted, n_classes):
    """``CM[i, j]`` counts cases with true class ``i`` predicted as ``j``."""
    truth = np.asarray(truth, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if truth.shape != predicted.shape:
        raise ToolkitError("bad_data", "truth and predictions differ in length")
    if truth.size and (min(truth.min(), predicted.min()) < 0 or max(truth.max(), predicted.max()) >= n_classes):
        raise ToolkitError("bad_data", f"labels must lie in 0..{n_classes - 1}")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (truth, predicted), 1)
    return cm


@dataclass
class ConfusionGraph:
    n_vertices: int
    edges: dict[tuple[int, int], float] = field(default_factory=dict)  # (i, j) -> Conf(i, j)

    def successors(self, v):
        return [j for (i, j) in sorted(self.edges) if i == v]

    def undirected_adjacency(self):
        adj = [set() for _ in range(self.n_vertices)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return [sorted(a) for a in adj]


def confusion_values(cm, absolute=False):
    """Row-normalised confusion probabilities, or raw counts with ``absolute``; diagonal zeroed."""
    cm = np.asarray(cm, dtype=np.float64)
    if absolute:
        conf = cm.copy()
    else:
        rows = cm.sum(1, keepdims=True)
        conf = np.divide(cm, rows, out=np.zeros_like(cm), where=rows > 0)
    np.fill_diagonal(conf, 0.0)
    return conf


def build_graph(cm, alpha, absolute=False):
    """Edge ``i -> j`` with weight ``Conf(i, j)`` wherever ``Conf(i, j) >= alpha`` (and > 0)."""
    if not absolute and not 0 <= alpha <= 1:
        raise ToolkitError("bad_alpha", f"alpha must lie in [0, 1], got {alpha}")
    conf = confusion_values(cm, absolute)
    edges = {}
    for i, j in zip(*np.nonzero((conf >= alpha) & (conf > 0))):
        edges[(int(i), int(j))] = float(conf[i, j])
    return ConfusionGraph(conf.shape[0], edges)


def weak_components(graph: ConfusionGraph):
    parent = list(range(graph.n_vertices))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, j in graph.edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    comps = {}
    for v in range(graph.n_vertices):
        comps.setdefault(find(v), []).append(v)
    return list(comps.values())


def strong_components(graph: ConfusionGraph):
    """Tarjan's algorithm, iterative."""
    succ = [[] for _ in range(graph.n_vertices)]
    for i, j in sorted(graph.edges):
        succ[i].append(j)
    index, low = {}, {}
    on_stack = set()
    stack, comps = [], []
    counter = 0
    for root in range(graph.n_vertices):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work.pop()
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            for p in range(pos, len(succ[v])):
                w = succ[v][p]
                if w not in index:
                    work.append((v, p + 1))
                    work.append((w, 0))
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(comp)
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
    return comps


def biconnected_components(graph: ConfusionGraph):
    """Vertex sets of the biconnected components of the undirected projection.

    Articulation vertices appear in every component they join.
    """
    adj = graph.undirected_adjacency()
    depth, low = {}, {}
    comps = []
    for root in range(graph.n_vertices):
        if root in depth or not adj[root]:
            continue
        depth[root] = low[root] = 0
        edge_stack = []
        work = [(root, -1, 0)]
        while work:
            v, parent, pos = work.pop()
            if pos < len(adj[v]):
                work.append((v, parent, pos + 1))
                w = adj[v][pos]
                if w == parent:
                    continue
                if w not in depth:
                    depth[w] = low[w] = depth[v] + 1
                    edge_stack.append((v, w))
                    work.append((w, v, 0))
                elif depth[w] < depth[v]:
                    edge_stack.append((v, w))
                    low[v] = min(low[v], depth[w])
                continue
            # v finished: fold its low value into the parent and cut at articulation points
            if parent >= 0:
                low[parent] = min(low[parent], low[v])
                if low[v] >= depth[parent]:
                    comp = set()
                    while True:
                        a, b = edge_stack.pop()
                        comp.update((a, b))
                        if (a, b) == (parent, v):
                            break
                    comps.append(sorted(comp))
    return comps


@dataclass
class GroupSet:
    groups: list[tuple[int, ...]]
    isolated: list[int]
    mode: str = "weak"


def groups(graph: ConfusionGraph, mode="weak"):
    if mode == "weak":
        comps = weak_components(graph)
    elif mode == "strong":
        comps = strong_components(graph)
    elif mode == "biconnected":
        comps = biconnected_components(graph)
    else:
        raise ToolkitError("bad_mode", f"mode must be one of {GROUP_MODES}")
    found = sorted(tuple(sorted(c)) for c in comps if len(c) > 1)
    covered = {v for g in found for v in g}
    return GroupSet(found, [v for v in range(graph.n_vertices) if v not in covered], mode)


def _dot_quote(text):
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(graph: ConfusionGraph, group_set: GroupSet | None = None, labels=None):
    """Graphviz digraph; group members share a fill colour, edge labels carry weights."""
    color = {}
    if group_set is not None:
        for gi, g in enumerate(group_set.groups):
            for v in g:
                color.setdefault(v, _PALETTE[gi % len(_PALETTE)])
    lines = ["digraph confusion {", "  node [shape=ellipse, style=filled, fillcolor=white];"]
    for v in range(graph.n_vertices):
        label = labels[v] if labels is not None else str(v)
        attrs = [f"label={_dot_quote(label)}"]
        if v in color:
            attrs.append(f"fillcolor={_dot_quote(color[v])}")
        lines.append(f"  v{v} [{', '.join(attrs)}];")
    for (i, j), w in sorted(graph.edges.items()):
        lines.append(f"  v{i} -> v{j} [label={_dot_quote(f'{w:.3f}')}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def conf_csv(cm, absolute=False, labels=None):
    conf = confusion_values(cm, absolute)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["true", "predicted", "count", "conf"])
    n = conf.shape[0]
    for i in range(n):
        for j in range(n):
            if i != j and cm[i, j] > 0:
                writer.writerow([
                    labels[i] if labels else i, labels[j] if labels else j, int(cm[i, j]), f"{conf[i, j]:.6f}",
                ])
    return buf.getvalue()

"""Category tree with uniquely identified nodes and its three label spaces.

Nodes are keyed by their full ancestor chain, so two categories sharing a name
under different parents get different ids. A path is identified by its last
node; paths may end above the maximum depth.
"""

from dataclasses import dataclass, field

from gwbowv.errors import ToolkitError

#: Depth-wise label for documents whose path ends above the requested depth.
#: Lives outside the NodeId space.
NONE = -1

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Node:
    id: int
    name: str
    parent: int | None  # None marks a child of the implicit root
    depth: int


@dataclass
class TaxonomyTree:
    nodes: list[Node]
    paths: list[tuple[int, ...]]  # PathId -> NodeIds, root-first
    _by_chain: dict = field(default_factory=dict, repr=False)
    _path_of_end: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._by_chain:
            for node in self.nodes:
                self._by_chain[self.chain(node.id)] = node.id
        if not self._path_of_end:
            self._path_of_end = {p[-1]: i for i, p in enumerate(self.paths)}

    @property
    def max_depth(self):
        return max(n.depth for n in self.nodes)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_paths(self):
        return len(self.paths)

    def chain(self, node_id):
        """Names from depth 1 down to ``node_id``."""
        names = []
        cur = node_id
        while cur is not None:
            node = self.nodes[cur]
            names.append(node.name)
            cur = node.parent
        return tuple(reversed(names))

    def path_names(self, path_id):
        return list(self.chain(self.paths[self._check_path(path_id)][-1]))

    def path_id(self, names):
        """PathId for a name list, or ``None`` if the tree has no such path."""
        node = self._by_chain.get(tuple(names))
        if node is None:
            return None
        return self._path_of_end.get(node)

    def path_depth(self, path_id):
        return len(self.paths[self._check_path(path_id)])

    def _check_path(self, path_id):
        if not 0 <= path_id < len(self.paths):
            raise ToolkitError("unknown_path", f"path id {path_id} not in 0..{len(self.paths) - 1}")
        return path_id

    def _check_depth(self, k):
        if not 1 <= k <= self.max_depth:
            raise ToolkitError("depth_out_of_range", f"depth {k} not in 1..{self.max_depth}")

    def nodes_at_depth(self, k):
        """NodeIds at depth ``k``, ascending."""
        self._check_depth(k)
        return [n.id for n in self.nodes if n.depth == k]

    def path_nodes(self, path_id):
        return frozenset(self.paths[self._check_path(path_id)])

    def node_label_at_depth(self, path_id, k):
        """The path's node at depth ``k``, or :data:`NONE` if the path is shorter."""
        self._check_depth(k)
        nodes = self.paths[self._check_path(path_id)]
        return nodes[k - 1] if k <= len(nodes) else NONE

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "nodes": [
                {"id": n.id, "name": n.name, "parent": n.parent, "depth": n.depth}
                for n in self.nodes
            ],
            "paths": [{"id": i, "nodes": list(p)} for i, p in enumerate(self.paths)],
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("format_version") != FORMAT_VERSION:
            raise ToolkitError("bad_taxonomy", f"unsupported format_version {data.get('format_version')!r}")
        nodes = [Node(d["id"], d["name"], d["parent"], d["depth"]) for d in data["nodes"]]
        paths = [tuple(p["nodes"]) for p in sorted(data["paths"], key=lambda p: p["id"])]
        tree = cls(nodes, paths)
        tree.validate()
        return tree

    def validate(self):
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise ToolkitError("bad_taxonomy", f"node ids must be dense, got {node.id} at {i}")
            if node.parent is None:
                if node.depth != 1:
                    raise ToolkitError("bad_taxonomy", f"root child {i} has depth {node.depth}")
            else:
                if not 0 <= node.parent < i:
                    raise ToolkitError("bad_taxonomy", f"node {i} has invalid parent {node.parent}")
                if self.nodes[node.parent].depth != node.depth - 1:
                    raise ToolkitError("bad_taxonomy", f"node {i} depth inconsistent with parent")
        for pid, nodes in enumerate(self.paths):
            if self.nodes[nodes[0]].depth != 1:
                raise ToolkitError("bad_taxonomy", f"path {pid} does not start at depth 1")
            for a, b in zip(nodes, nodes[1:]):
                if self.nodes[b].parent != a:
                    raise ToolkitError("bad_taxonomy", f"path {pid} is not a parent chain")


class TaxonomyBuilder:
    """Incremental construction; ids follow first-seen order."""

    def __init__(self):
        self.nodes: list[Node] = []
        self.paths: list[tuple[int, ...]] = []
        self._by_chain: dict[tuple[str, ...], int] = {}
        self._path_of_end: dict[int, int] = {}

    def add_path(self, names):
        names = tuple(names)
        if not names:
            raise ToolkitError("empty_path", "a path needs at least one category")
        parent = None
        ids = []
        for depth in range(1, len(names) + 1):
            key = names[:depth]
            node_id = self._by_chain.get(key)
            if node_id is None:
                node_id = len(self.nodes)
                self.nodes.append(Node(node_id, names[depth - 1], parent, depth))
                self._by_chain[key] = node_id
            ids.append(node_id)
            parent = node_id
        end = ids[-1]
        if end not in self._path_of_end:
            self._path_of_end[end] = len(self.paths)
            self.paths.append(tuple(ids))
        return self._path_of_end[end]

    def freeze(self):
        if not self.paths:
            raise ToolkitError("empty_taxonomy", "no paths given")
        return TaxonomyTree(list(self.nodes), list(self.paths))


def build(paths):
    """Build a tree from an iterable of root-first name lists."""
    builder = TaxonomyBuilder()
    for names in paths:
        builder.add_path(names)
    return builder.freeze()

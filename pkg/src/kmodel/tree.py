"""Knowledge taxonomy: branches for disciplines, leaves for concrete concepts.

Two on-disk formats are accepted: an indented text outline (children
indented deeper than their parent) and a nested JSON object with "name"
and optional "children" keys.  Node names are normalized to lowercase
hyphenated form so leaves compare equal to topic tokens.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import IO, Mapping

from .errors import NotFoundError, TreeError
from .textprep import normalize_name

BRANCH = "branch"
LEAF = "leaf"


@dataclass(frozen=True)
class KnowledgeNode:
    name: str
    kind: str
    children: tuple[str, ...] = ()


class KnowledgeTree:
    """Validated taxonomy with unique node names and a single root."""

    def __init__(self, root: str, nodes: Mapping[str, KnowledgeNode]):
        self.root = root
        self._nodes = dict(nodes)
        self._validate()

    def _validate(self) -> None:
        if self.root not in self._nodes:
            raise TreeError(f"root node {self.root!r} is not defined")
        seen: set[str] = set()
        stack = [self.root]
        while stack:
            name = stack.pop()
            if name in seen:
                raise TreeError(f"node {name!r} is reachable twice (duplicate or cycle)")
            seen.add(name)
            node = self._nodes.get(name)
            if node is None:
                raise TreeError(f"child {name!r} is referenced but not defined")
            if node.kind == BRANCH and not node.children:
                raise TreeError(f"branch {node.name!r} has no children")
            if node.kind == LEAF and node.children:
                raise TreeError(f"leaf {node.name!r} must not have children")
            stack.extend(node.children)
        unreachable = set(self._nodes) - seen
        if unreachable:
            name = sorted(unreachable)[0]
            raise TreeError(f"node {name!r} is not reachable from the root (multiple roots?)")

    @property
    def nodes(self) -> Mapping[str, KnowledgeNode]:
        return dict(self._nodes)

    def node(self, name: str) -> KnowledgeNode:
        try:
            return self._nodes[name]
        except KeyError:
            raise NotFoundError(f"unknown tree node {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    @cached_property
    def leaves(self) -> frozenset[str]:
        return frozenset(n.name for n in self._nodes.values() if n.kind == LEAF)

    def is_leaf(self, name: str) -> bool:
        return self.node(name).kind == LEAF

    def subtree_points(self, name: str) -> list[str]:
        """All leaves under *name* in depth-first child order.

        A leaf name yields a one-element list (the degenerate subtree).
        """
        node = self.node(name)
        if node.kind == LEAF:
            return [node.name]
        points: list[str] = []
        for child in node.children:
            points.extend(self.subtree_points(child))
        return points


class _Builder:
    def __init__(self) -> None:
        self.nodes: dict[str, KnowledgeNode] = {}

    def add(self, name: str, kind: str, children: tuple[str, ...] = ()) -> None:
        if name in self.nodes:
            raise TreeError(f"duplicate node name {name!r}")
        self.nodes[name] = KnowledgeNode(name=name, kind=kind, children=children)


def _parse_nested(obj: object, builder: _Builder) -> str:
    if not isinstance(obj, dict):
        raise TreeError(f"expected an object with a 'name' key, got {type(obj).__name__}")
    raw_name = obj.get("name")
    if not isinstance(raw_name, str) or not raw_name.strip():
        raise TreeError("every node needs a non-empty 'name'")
    unknown = set(obj) - {"name", "children"}
    if unknown:
        raise TreeError(f"unknown key {sorted(unknown)[0]!r} on node {raw_name!r}")
    name = normalize_name(raw_name)
    if not name:
        raise TreeError(f"name {raw_name!r} normalizes to an empty string")
    if "children" in obj:
        raw_children = obj["children"]
        if not isinstance(raw_children, list):
            raise TreeError(f"'children' of {raw_name!r} must be a list")
        children = tuple(_parse_nested(child, builder) for child in raw_children)
        builder.add(name, BRANCH, children)
    else:
        builder.add(name, LEAF)
    return name


def _parse_indented(text: str) -> KnowledgeTree:
    builder = _Builder()
    children: dict[str, list[str]] = {}
    stack: list[tuple[int, str]] = []  # (indent, name)
    root: str | None = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.expandtabs(4)
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        indent = len(line) - len(line.lstrip(" "))
        name = normalize_name(line.strip())
        if not name:
            raise TreeError(f"line {number}: name normalizes to an empty string")
        if name in children:
            raise TreeError(f"line {number}: duplicate node name {name!r}")
        children[name] = []
        while stack and stack[-1][0] >= indent:
            stack.pop()
        if not stack:
            if root is not None:
                raise TreeError(f"line {number}: second root {name!r} (multiple roots)")
            root = name
        else:
            children[stack[-1][1]].append(name)
        stack.append((indent, name))
    if root is None:
        raise TreeError("tree definition is empty")
    for name, kids in children.items():
        if kids:
            builder.add(name, BRANCH, tuple(kids))
        else:
            builder.add(name, LEAF)
    return KnowledgeTree(root, builder.nodes)


def load_tree(source: str | Path | IO[str]) -> KnowledgeTree:
    """Load and validate a tree definition from a path or open file.

    The format is sniffed: content starting with '{' is parsed as nested
    JSON, anything else as an indented outline.
    """
    if hasattr(source, "read"):
        text = source.read()  # type: ignore[union-attr]
    else:
        path = Path(source)  # type: ignore[arg-type]
        if not path.exists():
            raise NotFoundError(f"tree file not found: {path}")
        text = path.read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        builder = _Builder()
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TreeError(f"invalid JSON tree definition: {exc}") from exc
        root = _parse_nested(obj, builder)
        return KnowledgeTree(root, builder.nodes)
    if stripped.startswith("["):
        raise TreeError("top-level JSON list: a tree needs a single root object")
    return _parse_indented(text)

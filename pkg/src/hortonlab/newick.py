"""Reading and writing trees in a strict Newick subset.

Grammar::

    document := subtree ";"
    subtree  := leaf | "(" subtree "," subtree ")"
    leaf     := [A-Za-z0-9_]*

Whitespace may appear between tokens.  Internal nodes carry no label and
every internal node has exactly two children.  Both directions are
iterative so deep caterpillar-like trees do not hit the recursion limit.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import EmptyTreeError, NewickSyntaxError, NotFullBinaryError
from .tree_core import BinaryTree

_LABEL = re.compile(r"[A-Za-z0-9_]*")
_SPACE = re.compile(r"\s*")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def offset(self, pos=None):
        pos = self.pos if pos is None else pos
        return len(self.text[:pos].encode("utf-8"))

    def skip_ws(self):
        self.pos = _SPACE.match(self.text, self.pos).end()

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def fail(self, message):
        raise NewickSyntaxError(message, self.offset())

    def document(self) -> BinaryTree:
        left, right, labels = [], [], []
        # each frame: [node index, children seen, offset of "("]
        frames = []

        def new_node(label):
            v = len(left)
            left.append(-1)
            right.append(-1)
            labels.append(label)
            if frames:
                frame = frames[-1]
                if frame[1] == 0:
                    left[frame[0]] = v
                else:
                    right[frame[0]] = v
                frame[1] += 1
            return v

        expect_subtree = True
        while True:
            ch = self.peek()
            if expect_subtree:
                if ch == "(":
                    v = new_node("")
                    frames.append([v, 0, self.pos])
                    self.pos += 1
                    continue
                m = _LABEL.match(self.text, self.pos)
                new_node(m.group())
                self.pos = m.end()
                expect_subtree = False
                continue
            if not frames:
                if ch != ";":
                    self.fail("expected ';'" if ch else "missing ';'")
                self.pos += 1
                break
            frame = frames[-1]
            if ch == ",":
                if frame[1] >= 2:
                    raise NotFullBinaryError("internal node with more than two children", self.offset(frame[2]))
                self.pos += 1
                expect_subtree = True
            elif ch == ")":
                if frame[1] != 2:
                    raise NotFullBinaryError(f"internal node with {frame[1]} child", self.offset(frame[2]))
                frames.pop()
                self.pos += 1
            elif ch == "":
                self.fail("unexpected end of input")
            else:
                self.fail(f"unexpected character {ch!r}")
        labels = tuple(labels) if any(labels) else None
        return BinaryTree(np.array(left, dtype=np.int64), np.array(right, dtype=np.int64), labels)


def parse_tree(text: str) -> BinaryTree:
    """Parse exactly one document; trailing whitespace is allowed."""
    p = _Parser(text)
    tree = p.document()
    if p.peek():
        p.fail("trailing characters after ';'")
    return tree


def parse_trees(text: str) -> list:
    """Parse every document in ``text`` (e.g. one tree per line)."""
    p = _Parser(text)
    trees = []
    while p.peek():
        trees.append(p.document())
    return trees


def serialize_tree(t: BinaryTree) -> str:
    """Newick text, first stored child first.  Round-trips through :func:`parse_tree`."""
    if t.is_empty:
        raise EmptyTreeError("the empty tree has no Newick form")
    labels = t.labels
    out = []
    stack = [0]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        a = t.left[item]
        if a < 0:
            label = labels[item] if labels else ""
            if label and _LABEL.fullmatch(label) is None:
                raise ValueError(f"label {label!r} is not representable; use [A-Za-z0-9_]")
            out.append(label)
        else:
            out.append("(")
            stack.extend((")", int(t.right[item]), ",", int(a)))
    out.append(";")
    return "".join(out)


def read_trees(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return parse_trees(fh.read())


def write_trees(path, trees) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in trees:
            fh.write(serialize_tree(t))
            fh.write("\n")

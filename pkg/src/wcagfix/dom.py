"""Error-tolerant HTML parsing, serialization and indexed XPath addressing.

The tokenizer is the stdlib :class:`html.parser.HTMLParser`; tree
construction (auto-closing, wrapper synthesis, void elements) is done here.
"""
from __future__ import annotations

import html
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Iterator

from .errors import EmptyInput, NodeNotInTree, PathNotFound

ELEMENT = "element"
TEXT = "text"
COMMENT = "comment"
DOCTYPE = "doctype"

VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)
RAW_TEXT_ELEMENTS = frozenset(("script", "style"))
HEAD_ELEMENTS = frozenset("title meta link style base script noscript template".split())

# start tags that implicitly close an open <p>
_P_CLOSERS = frozenset(
    """address article aside blockquote details dialog div dl fieldset figcaption
    figure footer form h1 h2 h3 h4 h5 h6 header hgroup hr main menu nav ol p pre
    section table ul""".split()
)
_SCOPE_BOUNDARY = frozenset(
    "html body table td th caption button object marquee template applet".split()
)
_HEADINGS = frozenset(("h1", "h2", "h3", "h4", "h5", "h6"))

# tag -> (tags it closes, tags that bound the search)
_IMPLIED_CLOSE = {
    "li": ({"li"}, {"ul", "ol", "menu"} | _SCOPE_BOUNDARY),
    "dt": ({"dt", "dd"}, {"dl"} | _SCOPE_BOUNDARY),
    "dd": ({"dt", "dd"}, {"dl"} | _SCOPE_BOUNDARY),
    "tr": ({"tr"}, {"table", "thead", "tbody", "tfoot", "html", "body"}),
    "td": ({"td", "th"}, {"tr", "table", "html", "body"}),
    "th": ({"td", "th"}, {"tr", "table", "html", "body"}),
    "thead": ({"thead", "tbody", "tfoot"}, {"table", "html", "body"}),
    "tbody": ({"thead", "tbody", "tfoot"}, {"table", "html", "body"}),
    "tfoot": ({"thead", "tbody", "tfoot"}, {"table", "html", "body"}),
    "option": ({"option"}, {"select", "datalist", "optgroup", "html", "body"}),
    "optgroup": ({"optgroup"}, {"select", "html", "body"}),
}


@dataclass(eq=True)
class DomNode:
    kind: str
    tag: str = ""
    attributes: list[tuple[str, str]] = field(default_factory=list)
    children: list["DomNode"] = field(default_factory=list)
    text: str = ""
    source_span: tuple[int, int] | None = field(default=None, compare=False, repr=False)

    @classmethod
    def element(cls, tag, attributes=None, children=None):
        return cls(ELEMENT, tag=tag.lower(), attributes=list(attributes or []),
                   children=list(children or []))

    @classmethod
    def text_node(cls, text):
        return cls(TEXT, text=text)

    @classmethod
    def comment(cls, text):
        return cls(COMMENT, text=text)

    @property
    def is_element(self):
        return self.kind == ELEMENT

    def get(self, name, default=None):
        for key, value in self.attributes:
            if key == name:
                return value
        return default

    def has(self, name):
        return any(key == name for key, _ in self.attributes)

    def set(self, name, value):
        """Set an attribute, keeping its position if it already exists."""
        for i, (key, _) in enumerate(self.attributes):
            if key == name:
                self.attributes[i] = (name, value)
                return
        self.attributes.append((name, value))

    def remove(self, name):
        self.attributes = [(k, v) for k, v in self.attributes if k != name]

    def element_children(self):
        return [c for c in self.children if c.kind == ELEMENT]

    def iter(self) -> Iterator["DomNode"]:
        """Pre-order traversal including this node."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def iter_elements(self):
        return (n for n in self.iter() if n.kind == ELEMENT)

    def text_content(self):
        return "".join(n.text for n in self.iter() if n.kind == TEXT)

    def direct_text(self):
        return "".join(c.text for c in self.children if c.kind == TEXT)


@dataclass(eq=True)
class DomTree:
    root: DomNode
    doctype: str | None = None

    def find(self, tag):
        return next((n for n in self.root.iter_elements() if n.tag == tag), None)

    def find_all(self, tag):
        return [n for n in self.root.iter_elements() if n.tag == tag]

    @property
    def head(self):
        return next((c for c in self.root.element_children() if c.tag == "head"), None)

    @property
    def body(self):
        return next((c for c in self.root.element_children() if c.tag == "body"), None)


_XPATH_RE = re.compile(r"^(?:/[A-Za-z][A-Za-z0-9:_.-]*\[[1-9][0-9]*\])+$")
_STEP_RE = re.compile(r"/([A-Za-z][A-Za-z0-9:_.-]*)\[([0-9]+)\]")


@dataclass(frozen=True)
class XPath:
    steps: tuple[tuple[str, int], ...]

    def __str__(self):
        return "".join(f"/{tag}[{i}]" for tag, i in self.steps)

    @classmethod
    def parse(cls, text):
        if isinstance(text, XPath):
            return text
        if not _XPATH_RE.match(text):
            raise PathNotFound(f"malformed xpath: {text!r}")
        return cls(tuple((t.lower(), int(i)) for t, i in _STEP_RE.findall(text)))

    def child(self, tag, index):
        return XPath(self.steps + ((tag, index),))


# --------------------------------------------------------------------------
# parsing


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.doctype = None
        self.html = None
        self.head = None
        self.body = None
        self.stack: list[DomNode] = []
        self.pre_root: list[DomNode] = []
        self.saw_element = False
        self.head_closed = False

    # -- helpers ---------------------------------------------------------
    def _ensure_html(self, attrs=()):
        if self.html is None:
            self.html = DomNode.element("html", attrs)
            self.stack = [self.html]
        return self.html

    def _ensure_body(self):
        self._ensure_html()
        if self.body is None:
            self.body = DomNode.element("body")
            self.html.children.append(self.body)
        self.head_closed = True
        if not any(n is self.body for n in self.stack):
            self.stack = [self.html, self.body]
        return self.body

    def _in_head(self):
        return (self.head is not None and not self.head_closed
                and any(n is self.head for n in self.stack))

    def _append(self, node):
        parent = self.stack[-1]
        if node.kind == TEXT and parent.children and parent.children[-1].kind == TEXT:
            parent.children[-1].text += node.text
            return
        parent.children.append(node)

    def _pop_to(self, index):
        del self.stack[index:]

    def _close_implied(self, tag):
        if tag in _P_CLOSERS:
            self._close_in_scope({"p"}, _SCOPE_BOUNDARY)
        if tag in _HEADINGS and self.stack[-1].tag in _HEADINGS:
            self.stack.pop()
        rule = _IMPLIED_CLOSE.get(tag)
        if rule:
            self._close_in_scope(*rule)

    def _close_in_scope(self, targets, boundary):
        for i in range(len(self.stack) - 1, 1, -1):
            t = self.stack[i].tag
            if t in targets:
                self._pop_to(i)
                return
            if t in boundary:
                return

    @staticmethod
    def _clean_attrs(attrs):
        seen = set()
        out = []
        for name, value in attrs:
            if name in seen:
                continue
            seen.add(name)
            out.append((name, "" if value is None else value))
        return out

    # -- HTMLParser callbacks --------------------------------------------
    def handle_decl(self, decl):
        if decl.lower().startswith("doctype"):
            self.doctype = decl[7:].strip() or "html"

    def handle_starttag(self, tag, attrs):
        self._start(tag, self._clean_attrs(attrs), self_closing=False)

    def handle_startendtag(self, tag, attrs):
        self._start(tag, self._clean_attrs(attrs), self_closing=True)

    def _start(self, tag, attrs, self_closing):
        self.saw_element = True
        if tag == "html":
            if self.html is None:
                self._ensure_html(attrs)
            else:
                for k, v in attrs:
                    if not self.html.has(k):
                        self.html.set(k, v)
            return
        self._ensure_html()
        if tag == "head":
            if self.head is None and self.body is None:
                self.head = DomNode.element("head", attrs)
                self.html.children.append(self.head)
                self.stack = [self.html, self.head]
                self.head_closed = self_closing
                if self_closing:
                    self.stack = [self.html]
            return
        if tag == "body":
            if self.body is None:
                self.body = DomNode.element("body", attrs)
                self.html.children.append(self.body)
            else:
                for k, v in attrs:
                    if not self.body.has(k):
                        self.body.set(k, v)
            self._ensure_body()
            return

        if self._in_head():
            if tag not in HEAD_ELEMENTS:
                self._ensure_body()
        elif self.body is None:
            if tag not in HEAD_ELEMENTS:
                self._ensure_body()

        self._close_implied(tag)
        node = DomNode.element(tag, attrs)
        self._append(node)
        if tag not in VOID_ELEMENTS and not self_closing:
            self.stack.append(node)

    def handle_endtag(self, tag):
        if tag in ("html", "body") or tag in VOID_ELEMENTS:
            return
        if tag == "head":
            if self._in_head():
                self.stack = [self.html]
                self.head_closed = True
            return
        for i in range(len(self.stack) - 1, 0, -1):
            node = self.stack[i]
            if node is self.body or node is self.head:
                return
            if node.tag == tag:
                self._pop_to(i)
                return

    def handle_data(self, data):
        if not data:
            return
        if self.html is None:
            if not data.strip():
                return
            self._ensure_html()
        top = self.stack[-1]
        if data.strip() and (top is self.html or top is self.head):
            self._ensure_body()
        self._append(DomNode.text_node(data))

    def handle_comment(self, data):
        node = DomNode.comment(data)
        if self.html is None:
            self.pre_root.append(node)
        else:
            self.stack[-1].children.append(node)

    def finish(self):
        self.close()
        if not self.saw_element:
            raise EmptyInput("no element content in input")
        self._ensure_html()
        if self.body is None:
            self.body = DomNode.element("body")
            self.html.children.append(self.body)
        self.html.children[0:0] = self.pre_root
        return DomTree(self.html, self.doctype)


def parse_html(data) -> DomTree:
    """Parse HTML bytes (or text) into a :class:`DomTree`.

    Invalid UTF-8 is replaced rather than rejected. Raises :class:`EmptyInput`
    when the input contains no element at all.
    """
    if isinstance(data, (bytes, bytearray)):
        data = bytes(data).decode("utf-8", errors="replace")
    builder = _TreeBuilder()
    builder.feed(data)
    return builder.finish()


# --------------------------------------------------------------------------
# serialization


def _serialize_node(node, out, raw=False):
    if node.kind == TEXT:
        out.append(node.text if raw else html.escape(node.text, quote=False))
    elif node.kind == COMMENT:
        out.append(f"<!--{node.text}-->")
    elif node.kind == ELEMENT:
        out.append(start_tag(node))
        if node.tag in VOID_ELEMENTS:
            return
        child_raw = node.tag in RAW_TEXT_ELEMENTS
        for child in node.children:
            _serialize_node(child, out, child_raw)
        out.append(f"</{node.tag}>")


def start_tag(node):
    attrs = "".join(f' {k}="{html.escape(v, quote=True)}"' for k, v in node.attributes)
    return f"<{node.tag}{attrs}>"


def serialize(tree_or_node) -> str:
    out: list[str] = []
    if isinstance(tree_or_node, DomTree):
        if tree_or_node.doctype is not None:
            out.append(f"<!DOCTYPE {tree_or_node.doctype}>")
        _serialize_node(tree_or_node.root, out)
    else:
        _serialize_node(tree_or_node, out)
    return "".join(out)


# --------------------------------------------------------------------------
# xpath


def iter_with_xpath(tree: DomTree) -> Iterator[tuple[DomNode, XPath]]:
    """Yield every element with its indexed XPath, in document order."""
    stack = [(tree.root, XPath((("html", 1),)))]
    while stack:
        node, path = stack.pop()
        yield node, path
        counts: dict[str, int] = {}
        kids = []
        for child in node.children:
            if child.kind != ELEMENT:
                continue
            counts[child.tag] = counts.get(child.tag, 0) + 1
            kids.append((child, path.child(child.tag, counts[child.tag])))
        stack.extend(reversed(kids))


def xpath_of(tree: DomTree, node: DomNode) -> XPath:
    """Indexed XPath of ``node``; text and comment nodes map to their parent."""
    for element, path in iter_with_xpath(tree):
        if element is node:
            return path
        if node.kind != ELEMENT and any(c is node for c in element.children):
            return path
    raise NodeNotInTree("node is not part of this tree")


def resolve_xpath(tree: DomTree, path) -> DomNode:
    path = XPath.parse(path) if isinstance(path, str) else path
    steps = path.steps
    if not steps or steps[0] != ("html", 1):
        raise PathNotFound(str(path))
    node = tree.root
    for tag, index in steps[1:]:
        matches = [c for c in node.children if c.kind == ELEMENT and c.tag == tag]
        if index > len(matches):
            raise PathNotFound(str(path))
        node = matches[index - 1]
    return node


class TreeIndex:
    """Parent links, XPaths and document order for one tree snapshot.

    Must be rebuilt after the tree is edited.
    """

    def __init__(self, tree: DomTree):
        self.tree = tree
        self._parent: dict[int, DomNode | None] = {id(tree.root): None}
        self._xpath: dict[int, XPath] = {}
        self._order: dict[int, int] = {}
        self.elements: list[DomNode] = []
        for node, path in iter_with_xpath(tree):
            self._xpath[id(node)] = path
            self._order[id(node)] = len(self.elements)
            self.elements.append(node)
            for child in node.children:
                self._parent[id(child)] = node

    def parent(self, node):
        return self._parent.get(id(node))

    def ancestors(self, node):
        """Ancestors from nearest to root."""
        out = []
        p = self.parent(node)
        while p is not None:
            out.append(p)
            p = self.parent(p)
        return out

    def xpath(self, node):
        try:
            return self._xpath[id(node)]
        except KeyError:
            parent = self._parent.get(id(node))
            if parent is None:
                raise NodeNotInTree("node is not part of this tree") from None
            return self._xpath[id(parent)]

    def order(self, node):
        return self._order[id(node)]

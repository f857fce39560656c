"""Brute-force tree edit distance by enumerating every valid edit mapping.

A mapping M between ordered trees T1 and T2 is a set of node pairs that is
one-to-one and keeps both ancestry and left-to-right order. In preorder and
postorder numbering that means: for (i, j), (k, l) in M, pre(i) < pre(k)
iff pre(j) < pre(l), and post(i) < post(k) iff post(j) < post(l).
The edit distance equals the minimum over all mappings of

    relabels(M) + (|T1| - |M|) + (|T2| - |M|)

This is slow and only meant for trees of a handful of nodes. Trees are
``(label, (child, ...))`` tuples.
"""


def numbered(tree):
    """Return ``[(label, pre, post)]`` in preorder."""
    out = []
    post_counter = [0]

    def walk(node):
        slot = len(out)
        out.append(None)
        for child in node[1]:
            walk(child)
        out[slot] = (node[0], slot, post_counter[0])
        post_counter[0] += 1

    walk(tree)
    return out


def brute_force_ted(t1, t2):
    a = numbered(t1)
    b = numbered(t2)
    n, m = len(a), len(b)
    best = [n + m]

    # Walk T1 in preorder; each node is either deleted or mapped to a T2 node
    # whose preorder index is larger than every T2 node mapped so far.
    def search(i, last_j, pairs, relabels):
        if i == n:
            cost = relabels + n + m - 2 * len(pairs)
            if cost < best[0]:
                best[0] = cost
            return
        # cost already committed: relabels, deleted T1 nodes, skipped T2 nodes
        if relabels + (i - len(pairs)) + (last_j + 1 - len(pairs)) >= best[0]:
            return
        search(i + 1, last_j, pairs, relabels)
        post_i = a[i][2]
        for j in range(last_j + 1, m):
            post_j = b[j][2]
            if all((post_i < a[k][2]) == (post_j < b[l][2]) for k, l in pairs):
                pairs.append((i, j))
                search(i + 1, j, pairs, relabels + (a[i][0] != b[j][0]))
                pairs.pop()

    search(0, -1, [], 0)
    return best[0]


def all_trees(max_nodes, labels):
    """Every ordered labeled tree with 1..max_nodes nodes."""
    shapes_by_size = {}

    def forests(size):
        # ordered forests (tuples of shapes) with exactly ``size`` nodes
        if size == 0:
            return [()]
        out = []
        for first in range(1, size + 1):
            for head in shapes(first):
                for rest in forests(size - first):
                    out.append((head,) + rest)
        return out

    def shapes(size):
        if size not in shapes_by_size:
            shapes_by_size[size] = [tuple(f) for f in forests(size - 1)]
        return shapes_by_size[size]

    def label(shape):
        # yield every labeling of a shape (shape = tuple of child shapes)
        def lab(s):
            kids_options = [[]]
            for child in s:
                kids_options = [k + [c] for k in kids_options for c in list(lab(child))]
            for lbl in labels:
                for kids in kids_options:
                    yield (lbl, tuple(kids))
        return lab(shape)

    result = []
    for size in range(1, max_nodes + 1):
        for shape in shapes(size):
            result.extend(label(shape))
    return result


def all_shapes(max_nodes):
    return [t for t in all_trees(max_nodes, ["x"])]

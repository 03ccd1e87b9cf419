"""Independent embedding validator.

Works from the raw edge arrays with plain Python sets and dictionaries and
calls none of the search code, so a bug there cannot hide a bad embedding.
"""
from __future__ import annotations


def _edge_table(graph):
    return {(min(u, v), max(u, v)) for u, v in graph.edges.tolist()}


def _colour_table(colouring):
    table = {}
    for (u, v), red in zip(colouring.host.edges.tolist(), colouring.red_mask.tolist()):
        table[(min(u, v), max(u, v))] = "red" if red else "blue"
    return table


def validate_embedding(pattern, host, image: dict, colouring=None, colour=None, candidates: dict | None = None) -> list:
    """Problems with ``image`` as a copy of ``pattern`` in ``host``; empty means valid.

    Checks: every pattern vertex mapped into the host, injectivity, every
    pattern edge present, monochromatic in ``colour`` when a colouring is
    given, and membership in ``candidates[v]`` where supplied.
    """
    problems = []
    n_pattern, n_host = pattern.n, host.n
    for v in range(n_pattern):
        if v not in image:
            problems.append(f"vertex {v} unmapped")
    for v, x in image.items():
        if not 0 <= int(v) < n_pattern:
            problems.append(f"pattern vertex {v} out of range")
        if not 0 <= int(x) < n_host:
            problems.append(f"image {x} of {v} outside the host")
    values = [int(x) for x in image.values()]
    if len(set(values)) != len(values):
        problems.append("map is not injective")
    edges = _edge_table(host)
    colours = _colour_table(colouring) if colouring is not None else None
    if colouring is not None and _edge_table(colouring.host) != edges:
        problems.append("colouring is not on the host")
    for u, v in pattern.edges.tolist():
        if u not in image or v not in image:
            continue
        a, b = int(image[u]), int(image[v])
        key = (min(a, b), max(a, b))
        if key not in edges:
            problems.append(f"edge {u}-{v} maps to non-edge {a}-{b}")
        elif colours is not None and colour is not None and colours[key] != colour:
            problems.append(f"edge {u}-{v} maps to {colours[key]} edge {a}-{b}")
    if candidates:
        for v, allowed in candidates.items():
            if v in image and int(image[v]) not in set(int(x) for x in allowed):
                problems.append(f"vertex {v} outside its candidate set")
    return problems


def is_valid_embedding(pattern, host, image, colouring=None, colour=None, candidates=None) -> bool:
    return not validate_embedding(pattern, host, image, colouring, colour, candidates)

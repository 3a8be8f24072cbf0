import itertools
import sys

import networkx as nx
import numpy as np
import pytest


def nx_torus_adjacency(d, m):
    """Torus adjacency built by networkx, relabelled to row-major (axis 0 fastest)."""
    g = nx.grid_graph(dim=[m] * d, periodic=True)
    a = np.zeros((m**d, m**d))

    def index(node):
        coords = node if isinstance(node, tuple) else (node,)
        return sum(c * m**k for k, c in enumerate(coords))

    for u, v in g.edges():
        a[index(u), index(v)] = a[index(v), index(u)] = 1.0
    return a


def dense_det(a, x):
    sign, logdet = np.linalg.slogdet(x * np.eye(len(a)) - a)
    return sign, logdet


def remove_rows(a, nodes):
    keep = [k for k in range(len(a)) if k not in set(nodes)]
    return a[np.ix_(keep, keep)]


def brute_force_lattice_walks(a, b, length):
    steps = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    count = 0
    for seq in itertools.product(steps, repeat=length):
        if sum(s[0] for s in seq) == a and sum(s[1] for s in seq) == b:
            count += 1
    return count


@pytest.fixture(scope="session")
def torus_adjacency():
    cache = {}

    def get(d, m):
        if (d, m) not in cache:
            cache[(d, m)] = nx_torus_adjacency(d, m)
        return cache[(d, m)]

    return get


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance.format_results(acceptance.RESULTS):
        terminalreporter.write_line(line)

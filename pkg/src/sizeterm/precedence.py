"""Quasi-orderings on symbols built from dependency graphs.

A precedence is represented by the condensation of a directed graph whose
edge ``f -> g`` reads ``f >= g``: strongly connected components are the
equivalence classes and reachability between classes is the strict part.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import networkx as nx


class PrecedenceError(ValueError):
    pass


@dataclass(frozen=True)
class Precedence:
    graph: nx.DiGraph
    component: dict[str, int]
    condensed: nx.DiGraph

    @classmethod
    def build(
        cls,
        nodes: Iterable[str],
        weak_edges: Iterable[tuple[str, str]],
        strict_edges: Iterable[tuple[str, str]] = (),
        equal_edges: Iterable[tuple[str, str]] = (),
    ) -> "Precedence":
        """``weak_edges`` give ``f >= g``; ``strict_edges`` demand ``f > g``.

        Raises :class:`PrecedenceError` when a strict edge lies on a cycle.
        """
        g = nx.DiGraph()
        g.add_nodes_from(nodes)
        strict = list(strict_edges)
        g.add_edges_from(weak_edges)
        g.add_edges_from(strict)
        for a, b in equal_edges:
            g.add_edge(a, b)
            g.add_edge(b, a)
        condensed = nx.condensation(g)
        component = dict(condensed.graph["mapping"])
        for a, b in strict:
            if component[a] == component[b]:
                raise PrecedenceError(f"{a} > {b} contradicts {b} >= {a}")
        return cls(g, component, condensed)

    def equivalent(self, a: str, b: str) -> bool:
        return self.component[a] == self.component[b]

    def greater(self, a: str, b: str) -> bool:
        ca, cb = self.component[a], self.component[b]
        return ca != cb and nx.has_path(self.condensed, ca, cb)

    def at_most(self, a: str, b: str) -> bool:
        """``a <= b``."""
        return self.equivalent(a, b) or self.greater(b, a)

    def classes(self, order: Iterable[str]) -> list[list[str]]:
        """Equivalence classes, smallest first; ties broken by ``order``."""
        rank = {name: i for i, name in enumerate(order)}
        members: dict[int, list[str]] = {}
        for name, c in self.component.items():
            members.setdefault(c, []).append(name)
        for ms in members.values():
            ms.sort(key=lambda n: rank.get(n, len(rank)))
        key = lambda c: min(rank.get(n, len(rank)) for n in members[c])  # noqa: E731
        topo = list(nx.lexicographical_topological_sort(self.condensed, key=key))
        return [members[c] for c in reversed(topo)]

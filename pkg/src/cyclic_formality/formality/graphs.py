"""Admissible graphs with dashed pairs.

Vertices of the first type are numbered ``1..n``; vertices of the second
type are encoded as ``-1..-m`` when they appear as edge targets.  Usual edges
are kept in an ordered list: the order of the edges leaving a vertex is its
Star labelling.  A dashed pair ``(s, j)`` stands for the two edges
``(s, -j)`` and ``(s, -(j+1))``; dashed pairs are unlabelled and kept sorted.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from typing import List, Sequence, Tuple

Edge = Tuple[int, int]


def permutation_sign(seq: Sequence) -> int:
    sign = 1
    items = list(seq)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if items[i] > items[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class AdmissibleGraph:
    n: int
    m: int
    usual_edges: Tuple[Edge, ...]
    dashed_pairs: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        seen = set()
        for s, t in self.usual_edges:
            if not 1 <= s <= self.n:
                raise ValueError(f"edge source {s} is not a first-type vertex")
            if t == s:
                raise ValueError("loops are not allowed")
            if not (1 <= t <= self.n or -self.m <= t <= -1):
                raise ValueError(f"edge target {t} out of range")
            if (s, t) in seen:
                raise ValueError(f"duplicate edge {(s, t)}")
            seen.add((s, t))
        for s, j in self.dashed_pairs:
            if not 1 <= s <= self.n or not 1 <= j < self.m:
                raise ValueError(f"dashed pair {(s, j)} out of range")
            for t in (-j, -(j + 1)):
                if (s, t) in seen:
                    raise ValueError(f"dashed edge {(s, t)} duplicates another edge")
                seen.add((s, t))

    # -- bookkeeping ---------------------------------------------------------
    def star(self, v: int) -> List[int]:
        """Targets of the usual edges leaving ``v``, in label order."""
        return [t for s, t in self.usual_edges if s == v]

    def star_sizes(self) -> List[int]:
        return [len(self.star(v)) for v in range(1, self.n + 1)]

    def dashed_counts(self) -> List[int]:
        return [sum(1 for s, _ in self.dashed_pairs if s == v) for v in range(1, self.n + 1)]

    def form_degree(self) -> int:
        return len(self.usual_edges) + 2 * len(self.dashed_pairs)

    def dimension(self) -> int:
        return 2 * self.n + self.m - 2

    def wedge_edges(self) -> List[Edge]:
        """Edges in the order of the wedge product of angle forms.

        Sources in increasing order; for each source its usual edges in
        label order, then its dashed pairs as (left, right).
        """
        out = []
        for v in range(1, self.n + 1):
            out.extend((v, t) for t in self.star(v))
            for s, j in self.dashed_pairs:
                if s == v:
                    out.extend([(v, -j), (v, -(j + 1))])
        return out

    def canonical(self) -> Tuple["AdmissibleGraph", int]:
        """Graph with every Star sorted, and the sign of the relabelling."""
        sign = 1
        edges: List[Edge] = []
        for v in range(1, self.n + 1):
            st = self.star(v)
            key = [_target_key(t) for t in st]
            sign *= permutation_sign(key)
            edges.extend((v, t) for t in sorted(st, key=_target_key))
        return AdmissibleGraph(self.n, self.m, tuple(edges), tuple(sorted(self.dashed_pairs))), sign

    def key(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def stable_hash(self) -> int:
        return int(hashlib.sha256(self.key().encode()).hexdigest()[:12], 16)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "usual_edges": [list(e) for e in self.usual_edges],
            "dashed_pairs": [list(p) for p in self.dashed_pairs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "AdmissibleGraph":
        return cls(
            int(data["n"]),
            int(data["m"]),
            tuple((int(s), int(t)) for s, t in data["usual_edges"]),
            tuple(sorted((int(s), int(j)) for s, j in data.get("dashed_pairs", []))),
        )


def _target_key(t: int) -> Tuple[int, int]:
    # ground vertices first, in line order, then aerial ones
    return (0, -t) if t < 0 else (1, t)


def _dashed_choices(n: int, m: int, k: int):
    pairs = [(s, j) for s in range(1, n + 1) for j in range(1, m)]
    for combo in itertools.combinations(pairs, k):
        used = set()
        ok = True
        for s, j in combo:
            for t in (-j, -(j + 1)):
                if (s, t) in used:
                    ok = False
                used.add((s, t))
        if ok:
            yield combo, used


def enumerate_admissible(n: int, m: int, k: int, star_sizes: Sequence[int] | None = None,
                         dashed_counts: Sequence[int] | None = None,
                         canonical_only: bool = False) -> List[AdmissibleGraph]:
    """All admissible graphs in G_{n,m,2k}, labels included.

    ``star_sizes``/``dashed_counts`` restrict to one vertex profile;
    ``canonical_only`` keeps one representative per Star relabelling class.
    """
    if 2 * n + m < 2:
        raise ValueError("need 2n + m >= 2")
    n_usual = 2 * n + m - 2 * k - 2
    if n_usual < 0 or k < 0:
        raise ValueError("infeasible edge count")
    out = []
    for combo, used in _dashed_choices(n, m, k):
        counts = [sum(1 for s, _ in combo if s == v) for v in range(1, n + 1)]
        if dashed_counts is not None and list(dashed_counts) != counts:
            continue
        size_options = [tuple(star_sizes)] if star_sizes is not None else [
            c for c in itertools.product(range(n_usual + 1), repeat=n) if sum(c) == n_usual
        ]
        for sizes in size_options:
            if sum(sizes) != n_usual:
                continue
            per_vertex = []
            for v, size in enumerate(sizes, start=1):
                targets = [t for t in list(range(-1, -m - 1, -1)) + list(range(1, n + 1))
                           if t != v and (v, t) not in used]
                if canonical_only:
                    choices = [tuple(sorted(c, key=_target_key))
                               for c in itertools.combinations(targets, size)]
                else:
                    choices = list(itertools.permutations(targets, size))
                per_vertex.append([(v, c) for c in choices])
            for pick in itertools.product(*per_vertex):
                edges = tuple((v, t) for v, ts in pick for t in ts)
                out.append(AdmissibleGraph(n, m, edges, tuple(sorted(combo))))
    out.sort(key=lambda g: (g.dashed_pairs, g.usual_edges))
    return out


def merge_multiplicity(k1: int, k2: int) -> Tuple[int, int]:
    """Count, two ways, the graphs that collapse onto one vertex with k1+k2 pairs.

    Returns (number of ways to split k1+k2 labelled pairs into groups of
    k1 and k2, (k1+k2)! / (k1! k2!)); the weight prefactor ∏ k_ℓ! is
    designed to absorb exactly this ratio.
    """
    from math import factorial
    splits = sum(1 for c in itertools.combinations(range(k1 + k2), k1))
    return splits, factorial(k1 + k2) // (factorial(k1) * factorial(k2))

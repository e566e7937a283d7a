"""Shortest completions for graphs whose edges act on a free-group stack.

Each edge carries at most one letter of a free group.  ``balanced[u][v]`` is
the length of a shortest path ``u -> v`` whose label reduces to the identity;
a path whose label reduces to ``c_1 ... c_k`` splits as
``B_0 c_1 B_1 ... c_k B_k`` with every ``B_i`` balanced, which gives the
minimum steps needed to finish from a given vertex and stack.  The result is a
lower bound for the joint two-stack problem, hence a sound pruning test.
"""

from __future__ import annotations

from typing import Hashable, Sequence

INF = 1 << 60


class StackDistance:
    def __init__(self, vertices: Sequence[Hashable], edges: Sequence[tuple[Hashable, Hashable, tuple[int, ...]]]):
        if any(len(lab) > 1 for _, _, lab in edges):
            raise ValueError("edge labels must have at most one letter")
        self.index = {v: i for i, v in enumerate(vertices)}
        V = len(vertices)
        idx = self.index
        E = [(idx[a], idx[b], lab[0] if lab else 0) for a, b, lab in edges]
        B = [[INF] * V for _ in range(V)]
        for u in range(V):
            B[u][u] = 0
        for a, b, c in E:
            if c == 0:
                B[a][b] = min(B[a][b], 1)
        by_letter: dict[int, list[tuple[int, int]]] = {}
        for a, b, c in E:
            if c:
                by_letter.setdefault(c, []).append((a, b))
        changed = True
        while changed:
            changed = False
            # wrap a balanced segment between a letter and its inverse
            for c, opens in by_letter.items():
                for a, b in opens:
                    for a2, b2 in by_letter.get(-c, ()):
                        inner = B[b][a2]
                        if inner < INF and inner + 2 < B[a][b2]:
                            B[a][b2] = inner + 2
                            changed = True
            # concatenate
            for k in range(V):
                Bk = B[k]
                for i in range(V):
                    bik = B[i][k]
                    if bik >= INF:
                        continue
                    Bi = B[i]
                    for j in range(V):
                        s = bik + Bk[j]
                        if s < Bi[j]:
                            Bi[j] = s
                            changed = True
        self.balanced = B
        self.emit: dict[int, list[list[int]]] = {}
        for c, opens in by_letter.items():
            M = [[INF] * V for _ in range(V)]
            for a, b in opens:
                for u in range(V):
                    bua = B[u][a]
                    if bua >= INF:
                        continue
                    for w in range(V):
                        s = bua + 1 + B[b][w]
                        if s < M[u][w]:
                            M[u][w] = s
            self.emit[c] = M
        self._vec: dict = {}

    def vector(self, word: tuple[int, ...], end: Hashable) -> list[int]:
        """Per-vertex minimum length of a path to ``end`` whose label reduces to ``word``."""
        q = self.index[end]
        key = (q, word)
        hit = self._vec.get(key)
        if hit is not None:
            return hit
        V = len(self.index)
        if not word:
            vec = [self.balanced[u][q] for u in range(V)]
        else:
            rest = self.vector(word[1:], end)
            M = self.emit.get(word[0])
            if M is None:
                vec = [INF] * V
            else:
                vec = [min(M[u][w] + rest[w] for w in range(V)) for u in range(V)]
        self._vec[key] = vec
        return vec

    def steps(self, start: Hashable, word: tuple[int, ...], end: Hashable) -> int:
        return self.vector(word, end)[self.index[start]]

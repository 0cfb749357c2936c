"""
Problème de transport unitaire par plus courts chemins successifs
Offre 1 par véhicule, demande 1 par requête, min(|V|, |R|) unités expédiées
"""

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple


@dataclass
class TransportFlow:
    """Flot entier: paires (indice véhicule, indice requête) et coût total"""
    pairs: List[Tuple[int, int]] = field(default_factory=list)
    cost: float = 0.0


def transportation_solve(costs: Sequence[Sequence[float]]) -> TransportFlow:
    """
    Affectation de coût minimal expédiant exactement min(|V|, |R|) unités

    Args:
        costs: matrice tau[v][r]; une entrée infinie interdit l'arc

    Returns:
        TransportFlow entier
    """
    n_v = len(costs)
    n_r = len(costs[0]) if n_v else 0
    a_expedier = min(n_v, n_r)
    if a_expedier == 0:
        return TransportFlow()

    # Noeuds: 0 source, 1..n_v véhicules, n_v+1..n_v+n_r requêtes, puits
    source = 0
    puits = n_v + n_r + 1
    n = puits + 1
    capacite = {}
    cout = {}
    adjacence: List[List[int]] = [[] for _ in range(n)]

    def ajouter(u, v, c):
        capacite[(u, v)] = 1
        capacite[(v, u)] = 0
        cout[(u, v)] = c
        cout[(v, u)] = -c
        adjacence[u].append(v)
        adjacence[v].append(u)

    for i in range(n_v):
        ajouter(source, 1 + i, 0.0)
    for i in range(n_v):
        for j in range(n_r):
            if math.isfinite(costs[i][j]):
                ajouter(1 + i, 1 + n_v + j, float(costs[i][j]))
    for j in range(n_r):
        ajouter(1 + n_v + j, puits, 0.0)

    for _ in range(a_expedier):
        # Bellman-Ford sur le graphe résiduel (coûts négatifs possibles)
        distance = [math.inf] * n
        parent = [-1] * n
        distance[source] = 0.0
        for _ in range(n - 1):
            modifie = False
            for u in range(n):
                if distance[u] == math.inf:
                    continue
                for v in adjacence[u]:
                    if capacite[(u, v)] > 0 and distance[u] + cout[(u, v)] < distance[v] - 1e-12:
                        distance[v] = distance[u] + cout[(u, v)]
                        parent[v] = u
                        modifie = True
            if not modifie:
                break
        if distance[puits] == math.inf:
            break
        v = puits
        while v != source:
            u = parent[v]
            capacite[(u, v)] -= 1
            capacite[(v, u)] += 1
            v = u

    paires = []
    total = 0.0
    for i in range(n_v):
        for j in range(n_r):
            arc = (1 + i, 1 + n_v + j)
            if arc in capacite and capacite[arc] == 0:
                paires.append((i, j))
                total += costs[i][j]
    return TransportFlow(paires, total)

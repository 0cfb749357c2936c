"""
Couplages de poids maximal (biparti et général) via leur formulation en nombres entiers
"""

from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Sequence, Tuple, Union

from src.core.network import cle_id
from src.optim.bnb import bnb_solve
from src.optim.simplex import LpProblem

POIDS_MIN = 1e-12


@dataclass
class Matching:
    """Arêtes retenues et poids total"""
    pairs: List[Tuple[Hashable, Hashable]] = field(default_factory=list)
    value: float = 0.0
    optimal: bool = True

    def __len__(self) -> int:
        return len(self.pairs)

    def as_dict(self) -> Dict[Hashable, Hashable]:
        return dict(self.pairs)


def _resoudre(aretes: Sequence[Tuple[Hashable, Hashable, float]], node_limit: int) -> Matching:
    """Résout max sum w x s.c. chaque noeud couvert au plus une fois"""
    if not aretes:
        return Matching()
    noeuds: Dict[Hashable, int] = {}
    for u, v, _ in aretes:
        for noeud in (u, v):
            if noeud not in noeuds:
                noeuds[noeud] = len(noeuds)
    matrice = [[0.0] * len(aretes) for _ in noeuds]
    for k, (u, v, _) in enumerate(aretes):
        matrice[noeuds[u]][k] = 1.0
        matrice[noeuds[v]][k] = 1.0
    probleme = LpProblem(
        c=[w for _, _, w in aretes],
        A_ub=matrice,
        b_ub=[1.0] * len(noeuds),
        sense='max',
    )
    solution = bnb_solve(probleme, node_limit=node_limit)
    if solution.x.size == 0:
        return Matching(optimal=solution.optimal)
    retenues = [(u, v) for k, (u, v, _) in enumerate(aretes) if solution.x[k] == 1]
    valeur = sum(w for k, (_, _, w) in enumerate(aretes) if solution.x[k] == 1)
    return Matching(retenues, float(valeur), solution.optimal)


def max_weight_bipartite_matching(weights: Union[Dict[Tuple[Hashable, Hashable], float], Sequence[Sequence[float]]],
                                  node_limit: int = 20000) -> Matching:
    """
    Couplage biparti de poids maximal

    Args:
        weights: dict {(gauche, droite): poids} ou matrice (indices de ligne / colonne)

    Returns:
        Matching avec paires (gauche, droite); les arêtes de poids <= 0 sont ignorées
    """
    if not isinstance(weights, dict):
        weights = {(i, j): w for i, ligne in enumerate(weights) for j, w in enumerate(ligne)
                   if w is not None}
    aretes = [(('g', u), ('d', v), float(w)) for (u, v), w in weights.items() if w > POIDS_MIN]
    aretes.sort(key=lambda a: (cle_id(a[0][1]), cle_id(a[1][1])))
    resultat = _resoudre(aretes, node_limit)
    resultat.pairs = [(u[1], v[1]) for u, v in resultat.pairs]
    return resultat


def max_weight_general_matching(edges: Union[Dict[Tuple[Hashable, Hashable], float],
                                             Sequence[Tuple[Hashable, Hashable, float]]],
                                node_limit: int = 20000) -> Matching:
    """
    Couplage de poids maximal dans un graphe non orienté quelconque

    Les égalités sont départagées par l'indice d'arête le plus petit (ordre fourni).
    """
    if isinstance(edges, dict):
        edges = [(u, v, w) for (u, v), w in edges.items()]
    aretes = [(u, v, float(w)) for u, v, w in edges if w > POIDS_MIN and u != v]
    return _resoudre(aretes, node_limit)

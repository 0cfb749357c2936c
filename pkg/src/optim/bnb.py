"""
Séparation et évaluation (branch and bound) pour programmes binaires
Recherche au meilleur majorant, branchement sur la variable la plus fractionnaire
"""

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.optim.simplex import LpProblem, LpSolution, StatutSolveur, simplex_solve

TOLERANCE_INTEGRALITE = 1e-6


@dataclass
class IlpSolution:
    status: StatutSolveur
    x: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    objective: float = float('nan')
    optimal: bool = False
    nodes: int = 0


def _relaxation(p: LpProblem, fixees: Dict[int, int]) -> Tuple[LpSolution, float, List[int]]:
    """Relaxation du noeud: variables fixées substituées puis retirées"""
    libres = [j for j in range(p.n_vars) if j not in fixees]
    a_un = [j for j, v in fixees.items() if v == 1]
    constante = float(sum(p.c[j] for j in a_un))

    b_ub = p.b_ub - (p.A_ub[:, a_un].sum(axis=1) if a_un else 0.0)
    b_eq = p.b_eq - (p.A_eq[:, a_un].sum(axis=1) if a_un else 0.0)
    bornes = p.bornes()
    sous = LpProblem(
        c=p.c[libres],
        A_ub=p.A_ub[:, libres] if len(p.b_ub) else None,
        b_ub=b_ub if len(p.b_ub) else None,
        A_eq=p.A_eq[:, libres] if len(p.b_eq) else None,
        b_eq=b_eq if len(p.b_eq) else None,
        upper=[bornes[j] if np.isfinite(bornes[j]) else None for j in libres] if p.upper is not None else None,
        sense=p.sense,
    )
    if not libres:
        # Plus de variable: seule la faisabilité des seconds membres compte
        realisable = np.all(sous.b_ub >= -1e-9) and np.all(np.abs(sous.b_eq) <= 1e-9)
        statut = StatutSolveur.OPTIMAL if realisable else StatutSolveur.INFEASIBLE
        return LpSolution(statut, x=np.zeros(0), objective=0.0), constante, libres
    return simplex_solve(sous), constante, libres


def bnb_solve(p: LpProblem, node_limit: int = 20000, tol: float = TOLERANCE_INTEGRALITE) -> IlpSolution:
    """
    Résout un programme en variables binaires

    Les variables doivent être bornées par 1 (borne `upper` ou contraintes).

    Args:
        p: problème (toutes les variables traitées comme binaires)
        node_limit: nombre maximal de relaxations résolues
        tol: tolérance d'intégralité

    Returns:
        IlpSolution; optimal=False si la limite de noeuds est atteinte
    """
    signe = 1.0 if p.sense == 'min' else -1.0
    meilleur_x: Optional[np.ndarray] = None
    meilleur = np.inf
    compteur = itertools.count()
    tas = []
    noeuds = 0

    def evaluer(fixees: Dict[int, int]):
        nonlocal meilleur_x, meilleur, noeuds
        noeuds += 1
        relaxation, constante, libres = _relaxation(p, fixees)
        if relaxation.status != StatutSolveur.OPTIMAL:
            return
        borne = signe * (relaxation.objective + constante)
        if borne >= meilleur - 1e-9:
            return
        x = np.zeros(p.n_vars)
        for j, v in fixees.items():
            x[j] = v
        for k, j in enumerate(libres):
            x[j] = relaxation.x[k]
        ecarts = np.minimum(x - np.floor(x), np.ceil(x) - x)
        if np.all(ecarts <= tol):
            meilleur = borne
            meilleur_x = np.rint(x).astype(int)
            return
        heapq.heappush(tas, (borne, next(compteur), fixees, x))

    evaluer({})
    limite_atteinte = False
    while tas:
        borne, _, fixees, x = heapq.heappop(tas)
        if borne >= meilleur - 1e-9:
            continue
        if noeuds >= node_limit:
            limite_atteinte = True
            break
        ecarts = np.round(np.minimum(x - np.floor(x), np.ceil(x) - x), 9)
        # Plus fractionnaire, plus petit indice en cas d'égalité
        variable = int(np.argmax(ecarts))
        for valeur in (1, 0):
            enfant = dict(fixees)
            enfant[variable] = valeur
            evaluer(enfant)

    if meilleur_x is None:
        statut = StatutSolveur.NODE_LIMIT if limite_atteinte else StatutSolveur.INFEASIBLE
        return IlpSolution(statut, nodes=noeuds)
    return IlpSolution(
        status=StatutSolveur.NODE_LIMIT if limite_atteinte else StatutSolveur.OPTIMAL,
        x=meilleur_x,
        objective=float(p.c @ meilleur_x),
        optimal=not limite_atteinte,
        nodes=noeuds,
    )

"""
Simplexe dense en deux phases avec extraction des variables duales
Règle de Bland contre le cyclage, résultats déterministes
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np


class StatutSolveur(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'
    NODE_LIMIT = 'node_limit'


@dataclass
class LpProblem:
    """
    Programme linéaire  min/max c.x  s.c.  A_ub x <= b_ub,  A_eq x = b_eq,  0 <= x <= upper

    upper à None (ou une entrée à None) signifie pas de borne supérieure.
    integer marque les variables binaires pour bnb_solve.
    """
    c: Sequence[float]
    A_ub: Optional[Sequence[Sequence[float]]] = None
    b_ub: Optional[Sequence[float]] = None
    A_eq: Optional[Sequence[Sequence[float]]] = None
    b_eq: Optional[Sequence[float]] = None
    upper: Optional[Sequence[Optional[float]]] = None
    sense: str = 'min'
    names: Optional[List[str]] = None
    integer: Optional[Sequence[bool]] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        n = len(self.c)
        self.A_ub = _matrice(self.A_ub, n)
        self.b_ub = np.asarray(self.b_ub if self.b_ub is not None else [], dtype=float)
        self.A_eq = _matrice(self.A_eq, n)
        self.b_eq = np.asarray(self.b_eq if self.b_eq is not None else [], dtype=float)
        if self.A_ub.shape[0] != len(self.b_ub) or self.A_eq.shape[0] != len(self.b_eq):
            raise ValueError("dimensions incohérentes entre matrices et seconds membres")
        if self.upper is not None and len(self.upper) != n:
            raise ValueError("bornes supérieures de mauvaise dimension")
        if self.sense not in ('min', 'max'):
            raise ValueError(f"sens d'optimisation inconnu: {self.sense}")
        for tableau in (self.c, self.A_ub, self.b_ub, self.A_eq, self.b_eq):
            if not np.all(np.isfinite(tableau)):
                raise ValueError("coefficients non finis")

    @property
    def n_vars(self) -> int:
        return len(self.c)

    def bornes(self) -> List[float]:
        if self.upper is None:
            return [np.inf] * self.n_vars
        return [np.inf if u is None else float(u) for u in self.upper]


@dataclass
class LpSolution:
    status: StatutSolveur
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = float('nan')
    duals_ub: np.ndarray = field(default_factory=lambda: np.zeros(0))
    duals_eq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    bound_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0


def _matrice(valeur, n: int) -> np.ndarray:
    if valeur is None or len(valeur) == 0:
        return np.zeros((0, n))
    matrice = np.asarray(valeur, dtype=float)
    if matrice.ndim != 2 or matrice.shape[1] != n:
        raise ValueError(f"matrice de contraintes de forme {matrice.shape}, {n} colonnes attendues")
    return matrice


def _pivoter(tableau: np.ndarray, ligne: int, colonne: int):
    tableau[ligne] /= tableau[ligne, colonne]
    facteurs = tableau[:, colonne].copy()
    facteurs[ligne] = 0.0
    tableau -= np.outer(facteurs, tableau[ligne])


def _iterer(tableau: np.ndarray, base: List[int], interdites: set, tol: float,
            iterations_max: int) -> Tuple[StatutSolveur, int]:
    """Pivots de Bland jusqu'à l'optimalité; la dernière ligne contient les coûts réduits"""
    m = tableau.shape[0] - 1
    iterations = 0
    while iterations < iterations_max:
        candidates = np.flatnonzero(tableau[-1, :-1] < -tol)
        entrante = next((int(j) for j in candidates if j not in interdites), -1)
        if entrante < 0:
            return StatutSolveur.OPTIMAL, iterations

        sortante = -1
        meilleur_ratio = np.inf
        for i in range(m):
            a = tableau[i, entrante]
            if a > tol:
                ratio = max(tableau[i, -1], 0.0) / a
                if ratio < meilleur_ratio - 1e-12 or (abs(ratio - meilleur_ratio) <= 1e-12
                                                       and base[i] < base[sortante]):
                    meilleur_ratio = ratio
                    sortante = i
        if sortante < 0:
            return StatutSolveur.UNBOUNDED, iterations

        _pivoter(tableau, sortante, entrante)
        base[sortante] = entrante
        iterations += 1
    raise RuntimeError("nombre maximal d'itérations du simplexe atteint")


def simplex_solve(p: LpProblem, tol: float = 1e-9, iterations_max: int = 100000) -> LpSolution:
    """
    Résout un programme linéaire par le simplexe en deux phases

    Args:
        p: problème
        tol: tolérance sur les coûts réduits et les pivots

    Returns:
        LpSolution avec statut, solution primale et variables duales
        (convention du sens du problème: pour un max, dual >= 0 sur une contrainte <=)
    """
    n = p.n_vars
    signe_objectif = 1.0 if p.sense == 'min' else -1.0
    c = signe_objectif * p.c

    lignes = []
    seconds = []
    avec_ecart = []
    for a, b in zip(p.A_ub, p.b_ub):
        lignes.append(a)
        seconds.append(b)
        avec_ecart.append(True)
    n_ub = len(lignes)
    for a, b in zip(p.A_eq, p.b_eq):
        lignes.append(a)
        seconds.append(b)
        avec_ecart.append(False)
    n_eq = len(lignes) - n_ub
    index_bornes = [j for j, u in enumerate(p.bornes()) if np.isfinite(u)]
    for j in index_bornes:
        a = np.zeros(n)
        a[j] = 1.0
        lignes.append(a)
        seconds.append(p.bornes()[j])
        avec_ecart.append(True)

    m = len(lignes)
    n_ecarts = sum(avec_ecart)
    signes = np.array([1.0 if b >= 0 else -1.0 for b in seconds])

    # Colonnes: variables | écarts | artificielles, puis second membre
    besoin_artificielle = [not (avec_ecart[i] and signes[i] > 0) for i in range(m)]
    n_art = sum(besoin_artificielle)
    largeur = n + n_ecarts + n_art + 1
    tableau = np.zeros((m + 1, largeur))
    base = [0] * m
    identite = [0] * m
    artificielles = set()

    k_ecart = n
    k_art = n + n_ecarts
    for i in range(m):
        tableau[i, :n] = signes[i] * np.asarray(lignes[i])
        tableau[i, -1] = signes[i] * seconds[i]
        if avec_ecart[i]:
            tableau[i, k_ecart] = signes[i]
            if signes[i] > 0:
                base[i] = k_ecart
                identite[i] = k_ecart
            k_ecart += 1
        if besoin_artificielle[i]:
            tableau[i, k_art] = 1.0
            base[i] = k_art
            identite[i] = k_art
            artificielles.add(k_art)
            k_art += 1

    iterations = 0
    if artificielles:
        # Phase 1: minimiser la somme des artificielles
        for i in range(m):
            if base[i] in artificielles:
                tableau[-1] -= tableau[i]
        for j in artificielles:
            tableau[-1, j] = 0.0
        statut, nb = _iterer(tableau, base, set(), tol, iterations_max)
        iterations += nb
        if -tableau[-1, -1] > 1e-7 * max(1.0, np.abs(tableau[:-1, -1]).max(initial=0.0)):
            return LpSolution(StatutSolveur.INFEASIBLE, iterations=iterations)
        for i in range(m):
            if base[i] in artificielles:
                for j in range(n + n_ecarts):
                    if abs(tableau[i, j]) > tol:
                        _pivoter(tableau, i, j)
                        base[i] = j
                        break

    # Phase 2: coûts réduits d_j = c_j - c_B B^-1 A_j
    couts_complets = np.zeros(largeur - 1)
    couts_complets[:n] = c
    cb = couts_complets[base]
    tableau[-1, :-1] = couts_complets - cb @ tableau[:-1, :-1]
    tableau[-1, -1] = -cb @ tableau[:-1, -1]
    statut, nb = _iterer(tableau, base, artificielles, tol, iterations_max)
    iterations += nb
    if statut == StatutSolveur.UNBOUNDED:
        return LpSolution(StatutSolveur.UNBOUNDED, iterations=iterations)

    x = np.zeros(largeur - 1)
    for i in range(m):
        x[base[i]] = tableau[i, -1]
    x = np.where(np.abs(x) < 1e-12, 0.0, x)

    # Duales: y = c_B B^-1, B^-1 lu dans les colonnes de la base initiale
    cb = couts_complets[base]
    b_inverse = tableau[:-1, identite]
    y = (cb @ b_inverse) * signes * signe_objectif

    return LpSolution(
        status=StatutSolveur.OPTIMAL,
        x=x[:n],
        objective=float(p.c @ x[:n]),
        duals_ub=y[:n_ub],
        duals_eq=y[n_ub:n_ub + n_eq],
        bound_duals=y[n_ub + n_eq:],
        iterations=iterations,
    )

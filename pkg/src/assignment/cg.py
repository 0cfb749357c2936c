"""
Affectation par génération de colonnes
Problème maître restreint, tarification par tailles guidée par les duales, résolution entière finale
"""

import itertools
import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from src.assignment.common import AssignmentSolution, EpochState, Trip, build_solution
from src.assignment.rtv import solve_trip_ilp
from src.core.network import cle_id
from src.exceptions import InfaisableError, NonBorneError
from src.optim.simplex import LpProblem, StatutSolveur, simplex_solve


@dataclass
class Duals:
    """Variables duales du maître restreint: pi par requête, sigma par véhicule"""
    pi: Dict[str, float] = field(default_factory=dict)
    sigma: Dict[str, float] = field(default_factory=dict)


@dataclass
class RestrictedMaster:
    """Colonnes (trajets) du maître restreint, uniques par (véhicule, requêtes)"""
    columns: Dict[Tuple[str, FrozenSet[str]], Trip] = field(default_factory=dict)

    def ajouter(self, trip: Trip) -> bool:
        cle = (trip.vehicle_id, trip.requests)
        if cle in self.columns:
            return False
        self.columns[cle] = trip
        return True

    def trips(self) -> List[Trip]:
        return list(self.columns.values())

    def __contains__(self, cle) -> bool:
        return cle in self.columns

    def __len__(self) -> int:
        return len(self.columns)


def reduced_cost(trip: Trip, duals: Duals) -> float:
    """c_f - somme des pi_r - sigma_v"""
    return trip.cost - sum(duals.pi.get(r, 0.0) for r in trip.requests) - duals.sigma.get(trip.vehicle_id, 0.0)


def solve_relaxation(etat: EpochState, maitre: RestrictedMaster) -> Tuple[float, Duals]:
    """
    Relaxation linéaire du maître restreint avec variables d'écart pénalisées y_r

    min somme c_f x_f + M somme y_r
    s.c. somme_{f contient v} x_f <= 1 (sigma_v), somme_{f contient r} x_f + y_r = 1 (pi_r)
    """
    trips = maitre.trips()
    vehicules = etat.vehicle_ids()
    requetes = etat.request_ids()
    n = len(trips) + len(requetes)
    a_ub = [[0.0] * n for _ in vehicules]
    a_eq = [[0.0] * n for _ in requetes]
    ligne_vehicule = {vid: i for i, vid in enumerate(vehicules)}
    ligne_requete = {rid: i for i, rid in enumerate(requetes)}
    for j, trip in enumerate(trips):
        a_ub[ligne_vehicule[trip.vehicle_id]][j] = 1.0
        for rid in trip.requests:
            a_eq[ligne_requete[rid]][j] = 1.0
    for i in range(len(requetes)):
        a_eq[i][len(trips) + i] = 1.0

    probleme = LpProblem(
        c=[t.cost for t in trips] + [etat.penalty] * len(requetes),
        A_ub=a_ub, b_ub=[1.0] * len(vehicules),
        A_eq=a_eq, b_eq=[1.0] * len(requetes),
    )
    solution = simplex_solve(probleme)
    if solution.status == StatutSolveur.INFEASIBLE:
        raise InfaisableError("maître restreint irréalisable")
    if solution.status == StatutSolveur.UNBOUNDED:
        raise NonBorneError("maître restreint non borné")
    duales = Duals(
        pi={rid: float(solution.duals_eq[i]) for i, rid in enumerate(requetes)},
        sigma={vid: float(solution.duals_ub[i]) for i, vid in enumerate(vehicules)},
    )
    return solution.objective, duales


def generate_sized_columns(j: int, duals: Duals, etat: EpochState, voisins: Dict[str, List[str]],
                           maitre: Optional[RestrictedMaster] = None, subset_cap: int = 1000,
                           tol: float = 1e-7) -> List[Tuple[Trip, float]]:
    """
    Tarification de taille j

    Les véhicules sont parcourus par sigma décroissant (égalités: identifiant);
    chacun retient, parmi les sous-ensembles de taille j de requêtes encore
    libres, le trajet de coût réduit minimal et le garde s'il est négatif.

    Args:
        voisins: véhicule -> requêtes admettant un trajet unitaire réalisable

    Returns:
        liste (trajet, coût réduit)
    """
    libres: Set[str] = set(etat.request_ids())
    colonnes = []
    ordre = sorted(etat.vehicle_ids(), key=lambda v: (-duals.sigma.get(v, 0.0), cle_id(v)))
    for vid in ordre:
        candidates = [r for r in voisins.get(vid, []) if r in libres]
        meilleur: Optional[Tuple[Trip, float]] = None
        for sous_ensemble in itertools.islice(itertools.combinations(candidates, j), subset_cap):
            requetes = frozenset(sous_ensemble)
            if maitre is not None and (vid, requetes) in maitre:
                continue
            route, cout = etat.evaluer(vid, requetes)
            if route is None:
                continue
            trip = Trip(vid, requetes, route, cout)
            rc = reduced_cost(trip, duals)
            if meilleur is None or rc < meilleur[1]:
                meilleur = (trip, rc)
        if meilleur is not None and meilleur[1] < -tol:
            colonnes.append(meilleur)
            libres -= meilleur[0].requests
    return colonnes


def generate_columns(duals: Duals, etat: EpochState, voisins: Dict[str, List[str]],
                     maitre: Optional[RestrictedMaster] = None, subset_cap: int = 1000,
                     tol: float = 1e-7) -> List[Tuple[Trip, float]]:
    """Tailles j = 1, 2, ... jusqu'au premier ensemble de colonnes non vide"""
    taille_max = max((len(v) for v in voisins.values()), default=0)
    for j in range(1, taille_max + 1):
        colonnes = generate_sized_columns(j, duals, etat, voisins, maitre, subset_cap, tol)
        if colonnes:
            return colonnes
    return []


def cg_assign(etat: EpochState, time_limit: Optional[float] = None) -> AssignmentSolution:
    """
    Affectation par génération de colonnes au noeud racine

    Args:
        etat: état d'époque
        time_limit: délai en secondes (None: arrêt naturel)

    Returns:
        AssignmentSolution issue de la résolution entière du dernier maître restreint
    """
    debut = time.perf_counter()
    config = etat.config
    maitre = RestrictedMaster()
    voisins: Dict[str, List[str]] = {}
    for vid in etat.vehicle_ids():
        voisins[vid] = []
        for rid in etat.request_ids():
            route, cout = etat.evaluer(vid, [rid])
            if route is not None:
                voisins[vid].append(rid)
                maitre.ajouter(Trip(vid, frozenset([rid]), route, cout))

    objectifs: List[float] = []
    couts_reduits: List[float] = []
    arret_naturel = False
    while True:
        if time_limit is not None and time.perf_counter() - debut >= time_limit:
            break
        valeur, duales = solve_relaxation(etat, maitre)
        objectifs.append(valeur)
        colonnes = generate_columns(duales, etat, voisins, maitre, config.cg_subset_cap, config.tolerance)
        if not colonnes:
            arret_naturel = True
            break
        for trip, rc in colonnes:
            if maitre.ajouter(trip):
                couts_reduits.append(rc)

    affectation, optimal = solve_trip_ilp(etat, maitre.trips())
    diagnostics = {
        'columns': len(maitre),
        'rmp_objectives': objectifs,
        'added_reduced_costs': couts_reduits,
        'natural_termination': arret_naturel,
        'ilp_optimal': optimal,
        'runtime_s': time.perf_counter() - debut,
    }
    return build_solution(etat, affectation, 'cg', diagnostics)

"""
Affectation RTV (complète et rapide)
Graphe de partage, énumération des trajets par cliques, programme en nombres entiers d'époque
"""

import itertools
import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from src.assignment.common import AssignmentSolution, EpochState, Trip, build_solution
from src.core.model import VehicleState
from src.core.network import cle_id
from src.optim.bnb import bnb_solve
from src.optim.simplex import LpProblem


@dataclass
class ShareabilityGraph:
    """Arêtes requête-requête (partage possible) et requête-véhicule (trajet unitaire réalisable)"""
    rr: Dict[str, Set[str]] = field(default_factory=dict)
    rv: Dict[str, Dict[str, Trip]] = field(default_factory=dict)

    def partageables(self, r1: str, r2: str) -> bool:
        return r2 in self.rr.get(r1, set())


@dataclass
class TripCatalog:
    """Trajets réalisables indexés par taille puis par (véhicule, requêtes)"""
    par_taille: Dict[int, Dict[Tuple[str, FrozenSet[str]], Trip]] = field(default_factory=dict)
    complete: bool = True

    def ajouter(self, trip: Trip):
        self.par_taille.setdefault(len(trip.requests), {})[(trip.vehicle_id, trip.requests)] = trip

    def contient(self, vehicle_id: str, requetes: FrozenSet[str]) -> bool:
        return (vehicle_id, requetes) in self.par_taille.get(len(requetes), {})

    def trips(self) -> List[Trip]:
        """Trajets dans l'ordre (taille, véhicule, requêtes)"""
        resultat = []
        for taille in sorted(self.par_taille):
            resultat.extend(sorted(self.par_taille[taille].values(),
                                   key=lambda t: (cle_id(t.vehicle_id), sorted(map(cle_id, t.requests)))))
        return resultat

    def __len__(self) -> int:
        return sum(len(trips) for trips in self.par_taille.values())


def _vehicule_virtuel(noeud, capacite: int) -> VehicleState:
    return VehicleState(id=f"~virtuel@{noeud}", node=noeud, capacity=capacite)


def build_shareability_graph(etat: EpochState) -> ShareabilityGraph:
    """
    Construit le graphe de partage de l'époque

    Deux requêtes sont reliées si un véhicule vide placé à l'origine de l'une ou
    de l'autre peut les servir ensemble; une requête est reliée à un véhicule si
    l'oracle trouve le trajet unitaire réalisable.
    """
    graphe = ShareabilityGraph()
    requetes = etat.requests
    capacite = max((v.capacity for v in etat.vehicles.values()), default=1)

    for req in requetes:
        graphe.rr[req.id] = set()
    paires = list(itertools.combinations(requetes, 2))
    taches = []
    for r1, r2 in paires:
        taches.append((_vehicule_virtuel(r1.origin, capacite), (r1, r2)))
        taches.append((_vehicule_virtuel(r2.origin, capacite), (r1, r2)))
    resultats = etat.oracle.evaluate_many(taches)
    for k, (r1, r2) in enumerate(paires):
        if resultats[2 * k][0] is not None or resultats[2 * k + 1][0] is not None:
            graphe.rr[r1.id].add(r2.id)
            graphe.rr[r2.id].add(r1.id)

    vehicules = etat.vehicle_ids()
    taches = [(etat.vehicles[vid], (req,)) for vid in vehicules for req in requetes]
    resultats = iter(etat.oracle.evaluate_many(taches))
    for vid in vehicules:
        graphe.rv[vid] = {}
        for req in requetes:
            route, cout = next(resultats)
            if route is not None:
                graphe.rv[vid][req.id] = Trip(vid, frozenset([req.id]), route, cout)
    return graphe


def enumerate_trips(graph: ShareabilityGraph, etat: EpochState, deadline: Optional[float] = None) -> TripCatalog:
    """
    Énumère les trajets réalisables par taille croissante

    Un trajet de taille k étend un trajet réalisable de taille k-1 par une requête
    reliée au véhicule et partageable avec toutes les autres; tous ses
    sous-ensembles de taille k-1 doivent être au catalogue.

    Args:
        graph: graphe de partage
        etat: état d'époque (oracle)
        deadline: délai en secondes; le trajet en cours est terminé puis la génération s'arrête

    Returns:
        TripCatalog (partiel si le délai a expiré)
    """
    catalogue = TripCatalog()
    for vid in sorted(graph.rv, key=cle_id):
        for rid in sorted(graph.rv[vid], key=cle_id):
            catalogue.ajouter(graph.rv[vid][rid])

    debut = time.perf_counter()
    taille = 1
    while catalogue.par_taille.get(taille):
        if deadline is not None and time.perf_counter() - debut >= deadline:
            catalogue.complete = False
            return catalogue
        precedents = sorted(catalogue.par_taille[taille].values(),
                            key=lambda t: (cle_id(t.vehicle_id), sorted(map(cle_id, t.requests))))
        for trip in precedents:
            vid = trip.vehicle_id
            for rid in sorted(graph.rv[vid], key=cle_id):
                if rid in trip.requests:
                    continue
                if not all(graph.partageables(rid, autre) for autre in trip.requests):
                    continue
                nouvelles = trip.requests | {rid}
                if catalogue.contient(vid, nouvelles):
                    continue
                if not all(catalogue.contient(vid, nouvelles - {r}) for r in nouvelles):
                    continue
                route, cout = etat.evaluer(vid, nouvelles)
                if route is not None:
                    catalogue.ajouter(Trip(vid, frozenset(nouvelles), route, cout))
                if deadline is not None and time.perf_counter() - debut >= deadline:
                    catalogue.complete = False
                    return catalogue
        taille += 1
    return catalogue


def solve_trip_ilp(etat: EpochState, trips: List[Trip]) -> Tuple[Dict[str, FrozenSet[str]], bool]:
    """
    Sélection optimale des trajets: min somme c_f + M * non servies

    Les variables y_r sont éliminées: y_r = 1 - somme des x_f couvrant r, d'où
    le coût réduit c_f - M |f| et des contraintes de couverture <= 1.

    Returns:
        (affectation véhicule -> requêtes, optimalité prouvée)
    """
    if not trips:
        return {}, True
    vehicules = etat.vehicle_ids()
    requetes = etat.request_ids()
    ligne_vehicule = {vid: i for i, vid in enumerate(vehicules)}
    ligne_requete = {rid: len(vehicules) + i for i, rid in enumerate(requetes)}

    matrice = [[0.0] * len(trips) for _ in range(len(vehicules) + len(requetes))]
    for j, trip in enumerate(trips):
        matrice[ligne_vehicule[trip.vehicle_id]][j] = 1.0
        for rid in trip.requests:
            matrice[ligne_requete[rid]][j] = 1.0
    probleme = LpProblem(
        c=[trip.cost - etat.penalty * len(trip.requests) for trip in trips],
        A_ub=matrice,
        b_ub=[1.0] * len(matrice),
        sense='min',
    )
    solution = bnb_solve(probleme, node_limit=etat.config.node_limit)
    affectation = {}
    if solution.x.size:
        for j, trip in enumerate(trips):
            if solution.x[j] == 1:
                affectation[trip.vehicle_id] = trip.requests
    return affectation, solution.optimal


def rtv_assign(etat: EpochState, deadline: Optional[float] = None, algo: str = 'rtv') -> AssignmentSolution:
    """
    Affectation RTV d'une époque

    Args:
        etat: état d'époque (les requêtes remises en jeu font partie du lot)
        deadline: délai d'énumération des trajets (RTV rapide), None pour la version complète

    Returns:
        AssignmentSolution optimale sur le catalogue
    """
    debut = time.perf_counter()
    graphe = build_shareability_graph(etat)
    catalogue = enumerate_trips(graphe, etat, deadline)
    affectation, optimal = solve_trip_ilp(etat, catalogue.trips())
    diagnostics = {
        'trips': len(catalogue),
        'catalog_complete': catalogue.complete,
        'ilp_optimal': optimal,
        'rr_edges': sum(len(v) for v in graphe.rr.values()) // 2,
        'runtime_s': time.perf_counter() - debut,
    }
    return build_solution(etat, affectation, algo, diagnostics)

"""
Affectation linéaire (LA) et variantes à tours multiples
LA, LA-MR, LA-MR-NS (échanges naïfs), LA-MR-PS (échanges propres)
"""

import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple, Union

from src.assignment.common import Affectation, AssignmentSolution, EpochState, build_solution, objectif
from src.core.network import cle_id
from src.optim.matching import max_weight_bipartite_matching, max_weight_general_matching

REQUESTS = 'requests'
VEHICLES = 'vehicles'


@dataclass(frozen=True)
class AssignEdge:
    """Ajout d'une requête non affectée à un véhicule"""
    vehicle_id: str
    request_id: str
    cost: float
    gain: float
    carried: bool = False

    @property
    def cible(self) -> str:
        return self.vehicle_id

    @property
    def modifies(self) -> FrozenSet[str]:
        return frozenset([self.vehicle_id])


@dataclass(frozen=True)
class SwapEdge:
    """Échange naïf: la requête quitte from_vehicle pour to_vehicle"""
    request_id: str
    from_vehicle: str
    to_vehicle: str
    cost_reduction: float

    @property
    def cible(self) -> str:
        return self.to_vehicle

    @property
    def modifies(self) -> FrozenSet[str]:
        return frozenset([self.from_vehicle, self.to_vehicle])


@dataclass(frozen=True)
class ProperSwapEdge:
    """Meilleur échange naïf entre deux véhicules (v1, v2 triés), orienté source -> cible"""
    v1: str
    v2: str
    request_id: str
    source: str
    target: str
    cost_reduction: float

    @property
    def cible(self) -> str:
        return self.target

    @property
    def modifies(self) -> FrozenSet[str]:
        return frozenset([self.v1, self.v2])


Arete = Union[AssignEdge, SwapEdge, ProperSwapEdge]


@dataclass
class BipartiteGraph:
    """
    Graphe d'un tour: véhicules, requêtes non affectées, arêtes d'ajout;
    étendu au besoin par les noeuds dupliqués (échanges naïfs) ou les arêtes
    véhicule-véhicule (échanges propres)
    """
    vehicles: List[str]
    requests: List[str]
    edges: Dict[Tuple[str, str], AssignEdge] = field(default_factory=dict)
    swaps: Dict[Tuple[str, str], SwapEdge] = field(default_factory=dict)
    proper: Dict[Tuple[str, str], ProperSwapEdge] = field(default_factory=dict)

    def voisins(self, request_id: str) -> Set[str]:
        """Véhicules reliés à la requête par une arête d'ajout"""
        return {vid for (vid, rid) in self.edges if rid == request_id}

    def dependants(self) -> Set[FrozenSet[str]]:
        """Paires de véhicules dépendants (un échange naïf relie l'un à l'autre)"""
        return {frozenset([s.from_vehicle, s.to_vehicle]) for s in self.swaps.values()}


def _vide(etat: EpochState) -> Affectation:
    return {vid: frozenset() for vid in etat.vehicle_ids()}


def build_bipartite(etat: EpochState, affectation: Optional[Affectation] = None,
                    requetes: Optional[List[str]] = None) -> BipartiteGraph:
    """
    Arêtes d'ajout d'une requête à l'affectation courante de chaque véhicule

    Gain de couplage M - c_vr, ou M * kappa - c_vr pour une requête reportée.

    Args:
        etat: état d'époque
        affectation: requêtes déjà ajoutées pendant l'époque (vide par défaut)
        requetes: requêtes candidates (par défaut tout le lot)
    """
    affectation = affectation if affectation is not None else _vide(etat)
    requetes = list(requetes) if requetes is not None else etat.request_ids()
    vehicules = etat.vehicle_ids()
    graphe = BipartiteGraph(vehicules, requetes)

    taches = []
    for vid in vehicules:
        courant = affectation.get(vid, frozenset())
        taches.append((etat.vehicles[vid], [etat.par_id[r] for r in courant]))
        for rid in requetes:
            taches.append((etat.vehicles[vid], [etat.par_id[r] for r in courant | {rid}]))
    resultats = iter(etat.oracle.evaluate_many(taches))

    for vid in vehicules:
        _, cout_courant = next(resultats)
        for rid in requetes:
            route, cout = next(resultats)
            if route is None:
                continue
            c = cout - cout_courant
            reportee = rid in etat.carried
            gain = (etat.penalty * etat.config.carryover_kappa if reportee else etat.penalty) - c
            graphe.edges[(vid, rid)] = AssignEdge(vid, rid, c, gain, reportee)
    return graphe


def _apparier(graphe: BipartiteGraph) -> List[Arete]:
    """Couplage biparti de gain maximal (arêtes d'ajout et noeuds dupliqués)"""
    poids = {(vid, rid): e.gain for (vid, rid), e in graphe.edges.items()}
    for (rid, vid), s in graphe.swaps.items():
        poids[(vid, f"{rid}*")] = s.cost_reduction
    couplage = max_weight_bipartite_matching(poids)
    retenues = []
    for vid, droite in couplage.pairs:
        if droite in graphe.requests and (vid, droite) in graphe.edges:
            retenues.append(graphe.edges[(vid, droite)])
        else:
            retenues.append(graphe.swaps[(droite[:-1], vid)])
    return retenues


def sample_independent(matching: List[Arete], graph: BipartiteGraph, mode: str = REQUESTS) -> List[Arete]:
    """
    Échantillonne les arêtes d'un couplage optimal, par identifiant de requête croissant

    mode 'requests': une arête est acceptée si sa requête est indépendante de
    toutes les requêtes acceptées (aucun véhicule relié aux deux).
    mode 'vehicles': deux arêtes acceptées ne modifient jamais le même véhicule
    et leurs véhicules cibles ne sont pas dépendants.
    """
    if mode not in (REQUESTS, VEHICLES):
        raise ValueError(f"mode d'échantillonnage inconnu: {mode}")
    acceptees: List[Arete] = []
    voisinage_pris: Set[str] = set()
    dependants = graph.dependants()

    for arete in sorted(matching, key=lambda a: cle_id(a.request_id)):
        if mode == REQUESTS:
            if isinstance(arete, AssignEdge):
                voisinage = graph.voisins(arete.request_id) | {arete.vehicle_id}
            else:
                voisinage = set(arete.modifies)
            if voisinage & voisinage_pris:
                continue
            voisinage_pris |= voisinage
            acceptees.append(arete)
        else:
            conflit = any(arete.modifies & autre.modifies
                          or frozenset([arete.cible, autre.cible]) in dependants
                          for autre in acceptees)
            if not conflit:
                acceptees.append(arete)
    return acceptees


def _executer(affectation: Affectation, aretes: List[Arete]) -> Affectation:
    nouvelle = dict(affectation)
    for arete in aretes:
        if isinstance(arete, AssignEdge):
            nouvelle[arete.vehicle_id] = nouvelle[arete.vehicle_id] | {arete.request_id}
        else:
            source = arete.from_vehicle if isinstance(arete, SwapEdge) else arete.source
            nouvelle[source] = nouvelle[source] - {arete.request_id}
            nouvelle[arete.cible] = nouvelle[arete.cible] | {arete.request_id}
    return nouvelle


def _non_affectees(etat: EpochState, affectation: Affectation) -> List[str]:
    prises = set().union(*affectation.values()) if affectation else set()
    return [rid for rid in etat.request_ids() if rid not in prises]


def _reduction_echange(etat: EpochState, affectation: Affectation, rid: str, source: str,
                       cible: str) -> Optional[float]:
    """Réduction découplée du déplacement de rid de source vers cible (None si irréalisable)"""
    depart = affectation[source]
    arrivee = affectation[cible]
    route_source, apres_source = etat.evaluer(source, depart - {rid})
    route_cible, apres_cible = etat.evaluer(cible, arrivee | {rid})
    if route_source is None or route_cible is None:
        return None
    avant = etat.cout(source, depart) + etat.cout(cible, arrivee)
    return avant - (apres_source + apres_cible)


def extend_naive_swaps(graph: BipartiteGraph, affectation: Affectation, etat: EpochState) -> BipartiteGraph:
    """
    Ajoute les noeuds dupliqués des requêtes affectées et leurs échanges naïfs valides

    Seuls les échanges de réduction strictement positive sont retenus; un noeud
    dupliqué sans arête n'apparaît pas.
    """
    tol = etat.config.tolerance
    for source in etat.vehicle_ids():
        for rid in sorted(affectation.get(source, ()), key=cle_id):
            for cible in etat.vehicle_ids():
                if cible == source:
                    continue
                reduction = _reduction_echange(etat, affectation, rid, source, cible)
                if reduction is not None and reduction > tol:
                    graph.swaps[(rid, cible)] = SwapEdge(rid, source, cible, reduction)
    return graph


def proper_swap(etat: EpochState, affectation: Affectation, v1: str, v2: str) -> Optional[ProperSwapEdge]:
    """
    Échange propre entre deux véhicules: le meilleur échange naïf valide

    Les déplacements sont évalués v1 -> v2 puis v2 -> v1, requêtes croissantes;
    la première réduction maximale l'emporte.
    """
    if v1 == v2:
        raise ValueError("un échange propre relie deux véhicules distincts")
    bas, haut = sorted((v1, v2), key=cle_id)
    meilleur: Optional[ProperSwapEdge] = None
    for source, cible in ((v1, v2), (v2, v1)):
        for rid in sorted(affectation.get(source, ()), key=cle_id):
            reduction = _reduction_echange(etat, affectation, rid, source, cible)
            if reduction is None or reduction <= etat.config.tolerance:
                continue
            if meilleur is None or reduction > meilleur.cost_reduction:
                meilleur = ProperSwapEdge(bas, haut, rid, source, cible, reduction)
    return meilleur


def _diagnostic_echanges(etat: EpochState, avant: Affectation, apres: Affectation,
                         aretes: List[Arete]) -> List[Dict[str, object]]:
    """Réductions annoncées et réalisées des échanges exécutés dans un tour"""
    lignes = []
    for arete in aretes:
        if isinstance(arete, AssignEdge):
            continue
        source = arete.from_vehicle if isinstance(arete, SwapEdge) else arete.source
        cout_avant = etat.cout(source, avant[source]) + etat.cout(arete.cible, avant[arete.cible])
        cout_apres = etat.cout(source, apres[source]) + etat.cout(arete.cible, apres[arete.cible])
        lignes.append({'request': arete.request_id, 'from': source, 'to': arete.cible,
                       'stated': arete.cost_reduction, 'realized': cout_avant - cout_apres})
    return lignes


def executer_tours(etat: EpochState, variante: str) -> Tuple[Affectation, Dict[str, object]]:
    """
    Boucle des tours LA-MR (variante 'mr', 'ns' ou 'ps')

    Chaque tour résout un couplage, échantillonne, exécute; arrêt quand rien n'est accepté.
    Pour 'ns' et 'ps', un tour qui ne fait pas baisser strictement l'objectif est écarté
    avec un [WARN] et termine la boucle.
    """
    affectation = _vide(etat)
    tours: List[Dict[str, object]] = []
    echanges: List[Dict[str, object]] = []
    precedent = objectif(etat, affectation)
    numero = 0

    while True:
        numero += 1
        graphe = build_bipartite(etat, affectation, _non_affectees(etat, affectation))
        if variante == 'ps':
            vehicules = etat.vehicle_ids()
            for i, v1 in enumerate(vehicules):
                for v2 in vehicules[i + 1:]:
                    propre = proper_swap(etat, affectation, v1, v2)
                    if propre is not None:
                        graphe.proper[(v1, v2)] = propre
            aretes = [(('v', vid), ('r', rid), e.gain) for (vid, rid), e in sorted(
                graphe.edges.items(), key=lambda x: (cle_id(x[0][0]), cle_id(x[0][1])))]
            aretes += [(('v', v1), ('v', v2), p.cost_reduction) for (v1, v2), p in graphe.proper.items()]
            couplage = max_weight_general_matching(aretes, node_limit=etat.config.node_limit)
            retenues = []
            for u, w in couplage.pairs:
                if u[0] == 'v' and w[0] == 'v':
                    cle = tuple(sorted((u[1], w[1]), key=cle_id))
                    retenues.append(graphe.proper[cle])
                else:
                    vid, rid = (u[1], w[1]) if u[0] == 'v' else (w[1], u[1])
                    retenues.append(graphe.edges[(vid, rid)])
            acceptees = sample_independent(retenues, graphe, REQUESTS)
        elif variante == 'ns' and numero > 1:
            extend_naive_swaps(graphe, affectation, etat)
            acceptees = sample_independent(_apparier(graphe), graphe, VEHICLES)
        else:
            acceptees = sample_independent(_apparier(graphe), graphe, REQUESTS)

        if not acceptees:
            break
        nouvelle = _executer(affectation, acceptees)
        valeur = objectif(etat, nouvelle)
        # Tour d'échanges sans baisse stricte: on garde l'affectation précédente
        if variante in ('ns', 'ps') and not valeur < precedent:
            print(f"[WARN] la-mr-{variante}: l'objectif ne décroît pas au tour {numero} "
                  f"({precedent} -> {valeur}), arrêt des échanges")
            break
        echanges.extend(_diagnostic_echanges(etat, affectation, nouvelle, acceptees))
        affectation = nouvelle
        nb_echanges = sum(1 for a in acceptees if not isinstance(a, AssignEdge))
        tours.append({'round': numero, 'assignments': len(acceptees) - nb_echanges,
                      'swaps': nb_echanges, 'objective': valeur})
        precedent = valeur

    return affectation, {'rounds': tours, 'swaps': echanges}


def la_assign(etat: EpochState) -> AssignmentSolution:
    """Couplage biparti unique; les requêtes non couplées restent non servies"""
    debut = time.perf_counter()
    graphe = build_bipartite(etat)
    affectation = _executer(_vide(etat), _apparier(graphe))
    return build_solution(etat, affectation, 'la', {'edges': len(graphe.edges),
                                                    'runtime_s': time.perf_counter() - debut})


def _avec_duree(etat: EpochState, variante: str, algo: str) -> AssignmentSolution:
    debut = time.perf_counter()
    affectation, diagnostics = executer_tours(etat, variante)
    diagnostics['runtime_s'] = time.perf_counter() - debut
    return build_solution(etat, affectation, algo, diagnostics)


def la_mr_assign(etat: EpochState) -> AssignmentSolution:
    """Tours de couplage avec échantillonnage de requêtes indépendantes"""
    return _avec_duree(etat, 'mr', 'la-mr')


def la_mr_ns_assign(etat: EpochState) -> AssignmentSolution:
    """LA-MR étendu aux échanges naïfs, échantillonnage par véhicules indépendants"""
    return _avec_duree(etat, 'ns', 'la-mr-ns')


def la_mr_ps_assign(etat: EpochState) -> AssignmentSolution:
    """LA-MR étendu aux échanges propres (couplage général)"""
    return _avec_duree(etat, 'ps', 'la-mr-ps')

"""
Échanges cycliques (LA-MR-CE)
Graphe d'échange, recherche par étiquetage du cycle de réduction maximale, boucle à frontière
"""

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from src.assignment.common import Affectation, AssignmentSolution, EpochState, build_solution, objectif
from src.assignment.la import executer_tours
from src.core.network import cle_id
from src.exceptions import SolutionInvalide

NUL = '__null__'

# Noeuds du graphe: ('r', requête) ou ('v', véhicule); ('v', NUL) pour la partition nulle
Noeud = Tuple[str, str]


def noeud_requete(rid: str) -> Noeud:
    return ('r', rid)


def noeud_vehicule(vid: str) -> Noeud:
    return ('v', vid)


def _ordre(noeud: Noeud) -> Tuple:
    return (0 if noeud[0] == 'r' else 1, cle_id(noeud[1]))


@dataclass
class ExchangeGraph:
    """
    Graphe d'échange

    Arc r_i -> r_j: r_i remplace r_j dans la partition de r_j (poids: réduction de
    coût de cette partition); r -> v: v ajoute r; v -> r: la partition de r perd r.
    La partition nulle contient les requêtes non servies et vaut U par requête.
    """
    partition: Dict[str, str]
    arcs: Dict[Noeud, Dict[Noeud, float]] = field(default_factory=dict)
    U: float = 1e7

    def partition_de(self, noeud: Noeud) -> str:
        return noeud[1] if noeud[0] == 'v' else self.partition[noeud[1]]

    def sortants(self, noeud: Noeud) -> List[Tuple[Noeud, float]]:
        return sorted(self.arcs.get(noeud, {}).items(), key=lambda a: _ordre(a[0]))

    def poids(self, u: Noeud, v: Noeud) -> Optional[float]:
        return self.arcs.get(u, {}).get(v)

    def request_nodes(self) -> List[Noeud]:
        return sorted((noeud_requete(r) for r in self.partition), key=_ordre)

    def removal_reduction(self, rid: str) -> float:
        """T: réduction obtenue en retirant la requête de sa partition sans remplacement"""
        return self.arcs.get(noeud_vehicule(NUL), {}).get(noeud_requete(rid), math.inf) \
            if self.partition[rid] != NUL else self.U

    def liste_arcs(self) -> Dict[Tuple[Noeud, Noeud], float]:
        return {(u, v): w for u, sortants in self.arcs.items() for v, w in sortants.items()}


@dataclass(frozen=True)
class Cycle:
    nodes: Tuple[Noeud, ...]
    reduction: float

    def arcs(self) -> List[Tuple[Noeud, Noeud]]:
        return list(zip(self.nodes, self.nodes[1:] + self.nodes[:1]))


def _partitions(etat: EpochState, affectation: Affectation) -> Dict[str, str]:
    partition = {rid: NUL for rid in etat.request_ids()}
    for vid, requetes in affectation.items():
        for rid in requetes:
            partition[rid] = vid
    return partition


def build_exchange_graph(etat: EpochState, affectation: Affectation, U: Optional[float] = None) -> ExchangeGraph:
    """
    Construit le graphe d'échange de l'affectation courante

    Args:
        etat: état d'époque (oracle, véhicules de base)
        affectation: requêtes ajoutées pendant l'époque par véhicule
        U: valeur d'une requête servie (défaut: pénalité M)

    Returns:
        ExchangeGraph
    """
    U = etat.penalty if U is None else U
    partition = _partitions(etat, affectation)
    graphe = ExchangeGraph(partition, U=U)
    vehicules = etat.vehicle_ids()
    membres = {vid: frozenset(affectation.get(vid, ())) for vid in vehicules}
    cout = {vid: etat.cout(vid, membres[vid]) for vid in vehicules}
    requetes = etat.request_ids()

    def ajouter(u: Noeud, v: Noeud, w: float):
        graphe.arcs.setdefault(u, {})[v] = w

    # Retrait sans remplacement (réduction de la partition qui perd r)
    retrait: Dict[str, float] = {}
    for rid in requetes:
        p = partition[rid]
        if p == NUL:
            retrait[rid] = U
        else:
            route, apres = etat.evaluer(p, membres[p] - {rid})
            if route is not None:
                retrait[rid] = cout[p] - apres

    for rid in requetes:
        if rid not in retrait:
            continue
        for vid in vehicules + [NUL]:
            if vid != partition[rid]:
                ajouter(noeud_vehicule(vid), noeud_requete(rid), retrait[rid])

    # Ajout sans remplacement
    for ri in requetes:
        for vid in vehicules:
            if vid == partition[ri]:
                continue
            route, apres = etat.evaluer(vid, membres[vid] | {ri})
            if route is not None:
                ajouter(noeud_requete(ri), noeud_vehicule(vid), cout[vid] - apres)
        if partition[ri] != NUL:
            ajouter(noeud_requete(ri), noeud_vehicule(NUL), -U)

    # Remplacements
    for rj in requetes:
        p = partition[rj]
        for ri in requetes:
            if partition[ri] == p:
                continue
            if p == NUL:
                ajouter(noeud_requete(ri), noeud_requete(rj), 0.0)
                continue
            route, apres = etat.evaluer(p, (membres[p] - {rj}) | {ri})
            if route is not None:
                ajouter(noeud_requete(ri), noeud_requete(rj), cout[p] - apres)
    return graphe


def est_valide(graph: ExchangeGraph, noeuds: Tuple[Noeud, ...]) -> bool:
    """Partitions deux à deux distinctes et au plus un noeud véhicule"""
    partitions = [graph.partition_de(n) for n in noeuds]
    vehicules = sum(1 for n in noeuds if n[0] == 'v')
    return len(set(partitions)) == len(partitions) and vehicules <= 1 and len(set(noeuds)) == len(noeuds)


def max_cost_reducing_cycle(graph: ExchangeGraph, source: Noeud, labels_per_node: Optional[int] = 1,
                            prune: bool = True, tol: float = 1e-7) -> Tuple[Optional[Cycle], Set[Noeud]]:
    """
    Cycle valide de réduction maximale passant par une requête source

    Recherche par étiquetage au meilleur d'abord: chaque étiquette porte la réduction
    cumulée et le chemin partiel; au plus `labels_per_node` étiquettes (les
    meilleures) sont gardées par noeud, None pour une recherche exhaustive.
    Avec `prune`, un chemin dont la réduction cumulée passe sous -T est abandonné
    (T: réduction du retrait de la source).

    Returns:
        (cycle de réduction positive ou None, ensemble des noeuds touchés)
    """
    if source[0] != 'r':
        raise ValueError("la source d'un cycle doit être un noeud requête")
    seuil = -graph.removal_reduction(source[1])
    touches: Set[Noeud] = {source}
    etiquettes: Dict[Noeud, List[Tuple[float, int]]] = {}
    compteur = itertools.count()
    tas = [(-0.0, next(compteur), (source,), frozenset([graph.partition_de(source)]), False)]
    meilleur: Optional[Cycle] = None

    while tas:
        moins_valeur, numero, chemin, partitions, avec_vehicule = heapq.heappop(tas)
        valeur = -moins_valeur
        courant = chemin[-1]
        if labels_per_node is not None and courant != source:
            if all(n != numero for _, n in etiquettes.get(courant, [])):
                continue
        for suivant, poids in graph.sortants(courant):
            touches.add(suivant)
            total = valeur + poids
            if suivant == source:
                if len(chemin) >= 2 and total > tol and (meilleur is None or total > meilleur.reduction + tol):
                    meilleur = Cycle(chemin, total)
                continue
            if suivant in chemin:
                continue
            partition = graph.partition_de(suivant)
            if partition in partitions:
                continue
            est_vehicule = suivant[0] == 'v'
            if est_vehicule and avec_vehicule:
                continue
            if prune and total < seuil:
                continue
            numero_suivant = next(compteur)
            if labels_per_node is not None:
                liste = etiquettes.setdefault(suivant, [])
                liste.append((total, numero_suivant))
                # Les meilleures d'abord, la plus récente en cas d'égalité
                liste.sort(key=lambda e: (-e[0], -e[1]))
                del liste[labels_per_node:]
                if all(n != numero_suivant for _, n in liste):
                    continue
            heapq.heappush(tas, (-total, numero_suivant, chemin + (suivant,),
                                 partitions | {partition}, avec_vehicule or est_vehicule))
    return meilleur, touches


def _executer_cycle(graph: ExchangeGraph, affectation: Affectation, cycle: Cycle) -> Affectation:
    nouvelle = {vid: set(requetes) for vid, requetes in affectation.items()}
    for u, v in cycle.arcs():
        if v[0] == 'r':
            p = graph.partition[v[1]]
            if p != NUL:
                nouvelle[p].discard(v[1])
    for u, v in cycle.arcs():
        if u[0] != 'r':
            continue
        cible = graph.partition_de(v)
        if cible != NUL:
            nouvelle[cible].add(u[1])
    return {vid: frozenset(requetes) for vid, requetes in nouvelle.items()}


def _objectif_u(etat: EpochState, affectation: Affectation, U: float) -> float:
    """Coût des partitions: routes + U par requête non servie"""
    servies = set().union(*affectation.values()) if affectation else set()
    return sum(etat.cout(vid, r) for vid, r in affectation.items() if r) + U * (len(etat.requests) - len(servies))


def cyclic_exchange(etat: EpochState, affectation: Affectation, U: Optional[float] = None,
                    labels_per_node: Optional[int] = 1) -> Tuple[Affectation, List[Dict[str, object]]]:
    """
    Amélioration par échanges cycliques jusqu'à frontière vide

    Les sources sont traitées par identifiant croissant; après chaque cycle exécuté
    le graphe est reconstruit, la source revient dans la frontière ainsi que toute
    requête dont l'ensemble exploré touche un noeud affecté.

    Returns:
        (affectation améliorée, diagnostics par cycle exécuté)
    """
    U = etat.penalty if U is None else U
    tol = etat.config.tolerance
    affectation = {vid: frozenset(affectation.get(vid, ())) for vid in etat.vehicle_ids()}
    graphe = build_exchange_graph(etat, affectation, U)
    frontiere = [_ordre(n) + (n,) for n in graphe.request_nodes()]
    heapq.heapify(frontiere)
    dans_frontiere = {n for *_, n in frontiere}
    explores: Dict[Noeud, Set[Noeud]] = {}
    executes: List[Dict[str, object]] = []

    def remettre(noeud: Noeud):
        if noeud not in dans_frontiere:
            heapq.heappush(frontiere, _ordre(noeud) + (noeud,))
            dans_frontiere.add(noeud)

    while frontiere:
        *_, source = heapq.heappop(frontiere)
        dans_frontiere.discard(source)
        cycle, touches = max_cost_reducing_cycle(graphe, source, labels_per_node, tol=tol)
        if cycle is None:
            explores[source] = touches
            continue
        if not est_valide(graphe, cycle.nodes):
            raise SolutionInvalide(f"cycle invalide: {cycle.nodes}")

        avant = _objectif_u(etat, affectation, U)
        nouvelle = _executer_cycle(graphe, affectation, cycle)
        apres = _objectif_u(etat, nouvelle, U)
        executes.append({'cycle': [f"{t}:{i}" for t, i in cycle.nodes], 'stated': cycle.reduction,
                         'realized': avant - apres})

        nouveau_graphe = build_exchange_graph(etat, nouvelle, U)
        anciens = graphe.liste_arcs()
        nouveaux = nouveau_graphe.liste_arcs()
        affectes: Set[Noeud] = set()
        for arc in set(anciens) | set(nouveaux):
            if anciens.get(arc) != nouveaux.get(arc):
                affectes.update(arc)
        affectation, graphe = nouvelle, nouveau_graphe

        remettre(source)
        for noeud in sorted(explores, key=_ordre):
            if explores[noeud] & affectes:
                del explores[noeud]
                remettre(noeud)
    return affectation, executes


def la_mr_ce_assign(etat: EpochState) -> AssignmentSolution:
    """Deux étapes: LA-MR puis échanges cycliques"""
    debut = time.perf_counter()
    affectation, diagnostics = executer_tours(etat, 'mr')
    objectif_la_mr = objectif(etat, affectation)
    affectation, cycles = cyclic_exchange(etat, affectation, etat.config.U, etat.config.ce_labels)
    diagnostics.update({'la_mr_objective': objectif_la_mr, 'cycles': cycles,
                        'runtime_s': time.perf_counter() - debut})
    return build_solution(etat, affectation, 'la-mr-ce', diagnostics)

"""
Oracle de routage CTSP: ordonnancement des arrêts d'un véhicule
Recherche exacte avec noeuds suiveurs, insertion, heuristiques stables OOF et LRP
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from src.core.model import (DROPOFF, PICKUP, TOLERANCE_TEMPS, Request, Route, Stop,
                            VehicleState, dropoff_stop, pickup_stop, route_cost)
from src.core.network import Network, cle_id, shortest_time
from src.exceptions import ErreurConfiguration

MODES = ('exact', 'insertion', 'oof', 'lrp')


@dataclass(frozen=True)
class CtspQuery:
    """Véhicule, nouvelles requêtes à insérer et heure courante"""
    vehicle: VehicleState
    new_requests: Tuple[Request, ...]
    now: float

    def __post_init__(self):
        deja = set(self.vehicle.onboard) | set(self.vehicle.route.request_ids())
        for req in self.new_requests:
            if req.id in deja:
                raise ValueError(f"requête {req.id} déjà servie par le véhicule {self.vehicle.id}")


@dataclass(frozen=True)
class CtspPolicy:
    mode: str = 'oof'
    enumerate_limit: int = 12
    oof_threshold: int = 6
    lrp_eta: int = 12

    def __post_init__(self):
        if self.mode not in MODES:
            raise ErreurConfiguration(f"mode inconnu '{self.mode}' (attendu: {', '.join(MODES)})", 'ctsp.mode')
        if self.enumerate_limit < 2:
            raise ErreurConfiguration("doit être >= 2", 'ctsp.enumerate_limit')
        if self.lrp_eta < 2:
            raise ErreurConfiguration("doit être >= 2", 'ctsp.lrp_eta')
        if self.oof_threshold < 1:
            raise ErreurConfiguration("doit être >= 1", 'ctsp.oof_threshold')


@dataclass
class RouteMemory:
    """Dernière route retournée par véhicule, mise à jour aux points de synchronisation"""
    routes: Dict[str, Route] = field(default_factory=dict)

    def commit(self, vehicle_id: str, route: Route):
        self.routes[vehicle_id] = route

    def recall(self, vehicle: VehicleState) -> List[Stop]:
        """
        Route mémorisée privée des arrêts déjà visités

        Les arrêts encore dus mais absents de la mémoire sont ajoutés en fin,
        dans l'ordre de la route engagée.
        """
        actuels = {(s.request_id, s.action): s for s in vehicle.route.stops}
        memoire = self.routes.get(vehicle.id, vehicle.route)
        resultat = []
        vus = set()
        for stop in memoire.stops:
            cle = (stop.request_id, stop.action)
            if cle in actuels and cle not in vus:
                resultat.append(actuels[cle])
                vus.add(cle)
        for stop in vehicle.route.stops:
            cle = (stop.request_id, stop.action)
            if cle not in vus:
                resultat.append(stop)
                vus.add(cle)
        return resultat


def _borne(stop: Stop, heures_prise: Dict[str, float]) -> float:
    if stop.action == DROPOFF and stop.ride_limit is not None and stop.request_id in heures_prise:
        return min(stop.deadline, heures_prise[stop.request_id] + stop.ride_limit)
    return stop.deadline


def _evaluer_sequence(net: Network, vehicle: VehicleState, sequence: Sequence[Stop], now: float,
                      verifier_capacite: bool = True) -> Optional[List[float]]:
    """Heures planifiées si toutes les échéances tiennent, sinon None"""
    t = now + vehicle.offset
    position = vehicle.node
    charge = len(vehicle.onboard)
    heures_prise: Dict[str, float] = {}
    heures = []
    for stop in sequence:
        t += shortest_time(net, position, stop.node)
        if stop.action == PICKUP:
            t = max(t, stop.release)
            heures_prise[stop.request_id] = t
            charge += 1
        else:
            charge -= 1
        if verifier_capacite and charge > vehicle.capacity:
            return None
        if t > _borne(stop, heures_prise) + TOLERANCE_TEMPS:
            return None
        heures.append(t)
        position = stop.node
    return heures


def feasible(net: Network, vehicle: VehicleState, candidate, now: float) -> bool:
    """
    Vérifie échéances, capacité et précédence d'une route candidate

    Args:
        candidate: Route ou séquence d'arrêts

    Returns:
        True si la route est réalisable
    """
    stops = candidate.stops if isinstance(candidate, Route) else tuple(candidate)
    montes = set()
    deposes = set()
    for stop in stops:
        if stop.action == PICKUP:
            if stop.request_id in montes or stop.request_id in vehicle.onboard:
                return False
            montes.add(stop.request_id)
        else:
            if stop.request_id not in montes and stop.request_id not in vehicle.onboard:
                return False
            if stop.request_id in deposes:
                return False
            deposes.add(stop.request_id)
    if not set(vehicle.onboard) <= deposes or not montes <= deposes:
        return False
    return _evaluer_sequence(net, vehicle, stops, now) is not None


def _construire_route(net: Network, vehicle: VehicleState, sequence: Sequence[Stop], now: float) -> Route:
    heures = _evaluer_sequence(net, vehicle, sequence, now) or []
    return Route(tuple(sequence), tuple(heures))


def _arrets_requete(net: Network, req: Request) -> List[Stop]:
    return [pickup_stop(req), dropoff_stop(net, req)]


def _arrets_nouvelles(net: Network, requests: Iterable[Request]) -> List[Stop]:
    arrets = []
    for req in sorted(requests, key=lambda r: cle_id(r.id)):
        arrets.extend(_arrets_requete(net, req))
    return arrets


def _recherche_exacte(net: Network, vehicle: VehicleState, stops: Sequence[Stop], now: float,
                      chaine: Sequence[Stop] = (), use_followers: bool = True
                      ) -> Optional[Tuple[Stop, ...]]:
    """
    Recherche récursive de l'ordre de coût minimal

    Les arrêts de `chaine` doivent apparaître dans cet ordre relatif. Égalités
    départagées par l'ordre lexicographique (requête, prise avant dépose).
    """
    n = len(stops)
    if n == 0:
        return ()

    ordre = sorted(range(n), key=lambda i: stops[i].cle)
    depart_t = now + vehicle.offset
    capacite = vehicle.capacity

    avant: List[set] = [set() for _ in range(n)]
    index_prise = {s.request_id: i for i, s in enumerate(stops) if s.action == PICKUP}
    for i, stop in enumerate(stops):
        if stop.action == DROPOFF and stop.request_id in index_prise:
            avant[i].add(index_prise[stop.request_id])

    index_chaine = [stops.index(s) for s in chaine]
    for k in range(1, len(index_chaine)):
        avant[index_chaine[k]].add(index_chaine[k - 1])

    if use_followers:
        plus_tot = []
        for stop in stops:
            t = depart_t + shortest_time(net, vehicle.node, stop.node)
            if stop.action == PICKUP:
                t = max(t, stop.release)
            plus_tot.append(t)
        # j suit i lorsque passer par j d'abord rend l'échéance de i inatteignable
        for i in range(n):
            for j in range(n):
                if i != j and plus_tot[j] + shortest_time(net, stops[j].node, stops[i].node) \
                        > stops[i].deadline + TOLERANCE_TEMPS:
                    avant[j].add(i)

    meilleur_cout = [math.inf]
    meilleure_sequence: List[Optional[Tuple[int, ...]]] = [None]
    places = [False] * n
    sequence: List[int] = []
    heures_prise: Dict[str, float] = {}

    def explorer(position, t, charge, cout):
        if len(sequence) == n:
            if cout < meilleur_cout[0] - TOLERANCE_TEMPS:
                meilleur_cout[0] = cout
                meilleure_sequence[0] = tuple(sequence)
            return
        for i in ordre:
            if not places[i] and t + shortest_time(net, position, stops[i].node) \
                    > _borne(stops[i], heures_prise) + TOLERANCE_TEMPS:
                return
        for i in ordre:
            if places[i] or any(not places[k] for k in avant[i]):
                continue
            stop = stops[i]
            trajet = shortest_time(net, position, stop.node)
            nouveau_cout = cout + trajet
            if nouveau_cout >= meilleur_cout[0] - TOLERANCE_TEMPS:
                continue
            arrivee = t + trajet
            nouvelle_charge = charge
            if stop.action == PICKUP:
                arrivee = max(arrivee, stop.release)
                nouvelle_charge += 1
                if nouvelle_charge > capacite:
                    continue
            else:
                nouvelle_charge -= 1
            if arrivee > _borne(stop, heures_prise) + TOLERANCE_TEMPS:
                continue
            places[i] = True
            sequence.append(i)
            if stop.action == PICKUP:
                heures_prise[stop.request_id] = arrivee
            explorer(stop.node, arrivee, nouvelle_charge, nouveau_cout)
            if stop.action == PICKUP:
                del heures_prise[stop.request_id]
            sequence.pop()
            places[i] = False

    explorer(vehicle.node, depart_t, len(vehicle.onboard), vehicle.offset)

    if meilleure_sequence[0] is None:
        return None
    return tuple(stops[i] for i in meilleure_sequence[0])


def _tous_les_arrets(net: Network, query: CtspQuery) -> List[Stop]:
    return list(query.vehicle.route.stops) + _arrets_nouvelles(net, query.new_requests)


def solve_exact(net: Network, query: CtspQuery, use_followers: bool = True) -> Optional[Route]:
    """Route réalisable de coût minimal sur tous les ordonnancements"""
    stops = _tous_les_arrets(net, query)
    sequence = _recherche_exacte(net, query.vehicle, stops, query.now, use_followers=use_followers)
    if sequence is None:
        return None
    return _construire_route(net, query.vehicle, sequence, query.now)


def insertion_with_order(net: Network, query: CtspQuery, order: Sequence[Tuple[str, str]]) -> Optional[Route]:
    """
    Insertion un noeud à la fois dans l'ordre donné (request_id, action)

    Chaque arrêt est placé à la position réalisable la moins coûteuse, sans
    réordonner les arrêts déjà placés.
    """
    par_cle = {(s.request_id, s.action): s for s in _tous_les_arrets(net, query)}
    vehicle = query.vehicle
    partielle: List[Stop] = []

    for cle in order:
        stop = par_cle[cle]
        debut = 0
        if stop.action == DROPOFF:
            for k, place in enumerate(partielle):
                if place.request_id == stop.request_id:
                    debut = k + 1
        meilleure = None
        meilleur_cout = math.inf
        for position in range(debut, len(partielle) + 1):
            essai = partielle[:position] + [stop] + partielle[position:]
            if _evaluer_sequence(net, vehicle, essai, query.now, verifier_capacite=False) is None:
                continue
            cout = route_cost(net, vehicle, Route(tuple(essai)))
            if cout < meilleur_cout - TOLERANCE_TEMPS:
                meilleur_cout = cout
                meilleure = essai
        if meilleure is None:
            return None
        partielle = meilleure

    if len(partielle) != len(par_cle) or not feasible(net, vehicle, partielle, query.now):
        return None
    return _construire_route(net, vehicle, partielle, query.now)


def insertion(net: Network, query: CtspQuery) -> Optional[Route]:
    """Insertion en ordre croissant (requête, prise avant dépose)"""
    cles = sorted(((s.request_id, s.action) for s in _tous_les_arrets(net, query)),
                  key=lambda c: (cle_id(c[0]), 0 if c[1] == PICKUP else 1))
    return insertion_with_order(net, query, cles)


def _nombre_requetes(query: CtspQuery) -> int:
    return len(query.vehicle.onboard) + len(query.vehicle.pending_requests()) + len(query.new_requests)


def oof(net: Network, query: CtspQuery, threshold: int) -> Optional[Route]:
    """
    Heuristique à ordre de dépose fixé

    Au-delà du seuil (passagers à bord + requêtes à monter), les déposes des
    passagers à bord gardent leur ordre courant et tous les autres arrêts sont
    intercalés de façon optimale.
    """
    if _nombre_requetes(query) <= threshold:
        return solve_exact(net, query)
    stops = _tous_les_arrets(net, query)
    chaine = [s for s in query.vehicle.route.stops
              if s.action == DROPOFF and s.request_id in query.vehicle.onboard]
    sequence = _recherche_exacte(net, query.vehicle, stops, query.now, chaine=chaine)
    if sequence is None:
        return None
    return _construire_route(net, query.vehicle, sequence, query.now)


def _inserer_future(net: Network, vehicle: VehicleState, sequence: List[Stop], req: Request,
                    now: float) -> Optional[List[Stop]]:
    prise, depose = _arrets_requete(net, req)
    meilleure = None
    meilleur_cout = math.inf
    for i in range(len(sequence) + 1):
        for j in range(i, len(sequence) + 1):
            essai = sequence[:i] + [prise] + sequence[i:j] + [depose] + sequence[j:]
            if _evaluer_sequence(net, vehicle, essai, now) is None:
                continue
            cout = route_cost(net, vehicle, Route(tuple(essai)))
            if cout < meilleur_cout - TOLERANCE_TEMPS:
                meilleur_cout = cout
                meilleure = essai
    return meilleure


def lrp(net: Network, query: CtspQuery, eta: int, memory: Optional[RouteMemory] = None) -> Optional[Route]:
    """
    Heuristique à préfixe rappelé

    La route de l'itération précédente (sans les arrêts visités) est découpée en un
    préfixe dont l'ordre est conservé et un suffixe de taille eta - |noeuds nouveaux|;
    suffixe et nouveaux noeuds sont insérés de façon optimale dans le préfixe.
    Les requêtes futures sont ensuite insérées une à une, la plus proche d'abord.
    """
    memory = memory or RouteMemory()
    vehicle = query.vehicle
    presentes = tuple(r for r in query.new_requests if r.emergence_time <= query.now)
    futures = sorted((r for r in query.new_requests if r.emergence_time > query.now),
                     key=lambda r: (r.emergence_time, cle_id(r.id)))

    nouveaux_noeuds = 2 * len(presentes)
    total = len(vehicle.route.stops) + nouveaux_noeuds
    requete_presente = CtspQuery(vehicle, presentes, query.now)

    if total <= eta:
        route = solve_exact(net, requete_presente)
        sequence = list(route.stops) if route is not None else None
    elif nouveaux_noeuds > eta:
        return None
    else:
        rappel = memory.recall(vehicle)
        taille_suffixe = eta - nouveaux_noeuds
        coupure = max(len(rappel) - taille_suffixe, 0)
        prefixe = rappel[:coupure]
        stops = rappel + _arrets_nouvelles(net, presentes)
        resultat = _recherche_exacte(net, vehicle, stops, query.now, chaine=prefixe)
        sequence = list(resultat) if resultat is not None else None

    if sequence is None:
        return None
    for req in futures:
        sequence = _inserer_future(net, vehicle, sequence, req, query.now)
        if sequence is None:
            return None
    return _construire_route(net, vehicle, sequence, query.now)


def oracle(net: Network, query: CtspQuery, policy: CtspPolicy,
           memory: Optional[RouteMemory] = None) -> Tuple[Optional[Route], float]:
    """
    Oracle CTSP: route et coût de trajet c_f = c(S') - c(S)

    Returns:
        (route ou None, coût du trajet; +inf si irréalisable)
    """
    vehicle = query.vehicle
    if not query.new_requests:
        return vehicle.route, 0.0

    nb_arrets = len(vehicle.route.stops) + 2 * len(query.new_requests)
    if policy.mode == 'exact' or (nb_arrets <= policy.enumerate_limit and policy.mode != 'lrp'):
        route = solve_exact(net, query)
    elif policy.mode == 'insertion':
        route = insertion(net, query)
    elif policy.mode == 'oof':
        route = oof(net, query, policy.oof_threshold)
    else:
        route = lrp(net, query, policy.lrp_eta, memory)

    if route is None:
        return None, math.inf
    return route, route_cost(net, vehicle, route) - route_cost(net, vehicle, vehicle.route)


class CtspOracle:
    """
    Évaluateur de trajets mémorisé pour une époque

    Cache indexé par (véhicule, version de l'état, ensemble de requêtes).
    """

    def __init__(self, net: Network, policy: CtspPolicy, now: float,
                 memory: Optional[RouteMemory] = None, threads: int = 1):
        self.net = net
        self.policy = policy
        self.now = now
        self.memory = memory or RouteMemory()
        self.threads = max(int(threads), 1)
        self._cache: Dict[Tuple, Tuple[Optional[Route], float]] = {}
        self.appels = 0

    def evaluate(self, vehicle: VehicleState, requests: Iterable[Request]) -> Tuple[Optional[Route], float]:
        requests = tuple(sorted(requests, key=lambda r: cle_id(r.id)))
        cle = (vehicle.id, vehicle.version, tuple(r.id for r in requests))
        resultat = self._cache.get(cle)
        if resultat is None:
            self.appels += 1
            resultat = oracle(self.net, CtspQuery(vehicle, requests, self.now), self.policy, self.memory)
            self._cache.setdefault(cle, resultat)
        return resultat

    def evaluate_many(self, taches: Sequence[Tuple[VehicleState, Sequence[Request]]]
                      ) -> List[Tuple[Optional[Route], float]]:
        """Évalue une liste de (véhicule, requêtes), en parallèle si threads > 1"""
        if self.threads == 1 or len(taches) < 2:
            return [self.evaluate(v, reqs) for v, reqs in taches]
        with ThreadPoolExecutor(max_workers=self.threads) as executeur:
            return list(executeur.map(lambda tache: self.evaluate(*tache), taches))

    def cost(self, vehicle: VehicleState, requests: Iterable[Request]) -> float:
        return self.evaluate(vehicle, requests)[1]

"""
Modèle du problème d'affectation en covoiturage
Requêtes, arrêts, routes, véhicules, découpage en époques et avancement des véhicules
"""

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from src.core.network import Network, NodeId, cle_id, shortest_time
from src.exceptions import ErreurDonnees

PICKUP = 'pickup'
DROPOFF = 'dropoff'

# Types d'événements du journal
ARRIVAL = 'arrival'
ASSIGNMENT = 'assignment'
REASSIGNMENT = 'reassignment'
PICKUP_EVENT = 'pickup'
DROPOFF_EVENT = 'dropoff'
RELOCATION = 'relocation'
EXPIRY = 'expiry'

TOLERANCE_TEMPS = 1e-9


@dataclass(frozen=True)
class Request:
    """Demande de trajet avec ses contraintes de qualité de service"""
    id: str
    origin: NodeId
    destination: NodeId
    emergence_time: float
    max_wait: float = 300.0
    max_detour: float = 600.0

    def __post_init__(self):
        if self.origin == self.destination:
            raise ErreurDonnees(f"requête {self.id}: origine et destination identiques ({self.origin})")
        if not self.max_wait > 0:
            raise ErreurDonnees(f"requête {self.id}: attente maximale non positive ({self.max_wait})")
        if self.max_detour < 0:
            raise ErreurDonnees(f"requête {self.id}: détour maximal négatif ({self.max_detour})")

    @property
    def latest_boarding(self) -> float:
        return self.emergence_time + self.max_wait


@dataclass(frozen=True)
class Stop:
    """
    Arrêt d'une route

    Pour une dépose de passager non encore monté, ride_limit = c(o,d) + détour maximal:
    l'échéance effective suit l'heure de prise en charge planifiée. Elle est figée
    (ride_limit = None) dès la montée.
    """
    node: NodeId
    request_id: str
    action: str
    deadline: float
    release: float = 0.0
    ride_limit: Optional[float] = None

    @property
    def cle(self) -> Tuple:
        return (cle_id(self.request_id), 0 if self.action == PICKUP else 1)


@dataclass(frozen=True)
class Route:
    """Séquence ordonnée d'arrêts et heures de passage planifiées"""
    stops: Tuple[Stop, ...] = ()
    planned_times: Tuple[float, ...] = ()

    def __len__(self) -> int:
        return len(self.stops)

    def request_ids(self) -> FrozenSet[str]:
        return frozenset(s.request_id for s in self.stops)

    def nodes(self) -> List[NodeId]:
        return [s.node for s in self.stops]


@dataclass
class VehicleState:
    """
    État d'un véhicule

    Position: le véhicule se dirige vers `node` et l'atteint dans `offset` secondes
    (offset = 0: il est au noeud). onboard associe chaque passager à bord à son
    échéance de dépose figée.
    """
    id: str
    node: NodeId
    capacity: int = 4
    offset: float = 0.0
    onboard: Dict[str, float] = field(default_factory=dict)
    route: Route = field(default_factory=Route)
    relocation: Optional[NodeId] = None
    distance: float = 0.0
    version: int = 0

    def pending_requests(self) -> FrozenSet[str]:
        """Requêtes affectées mais pas encore montées"""
        return frozenset(s.request_id for s in self.route.stops if s.action == PICKUP)

    def est_inactif(self) -> bool:
        return not self.route.stops and not self.onboard


@dataclass(frozen=True)
class EpochConfig:
    interval: float = 60.0
    horizon: float = 3600.0

    def __post_init__(self):
        if not (0 < self.interval <= self.horizon):
            raise ErreurDonnees(f"intervalle d'époque invalide: {self.interval} (horizon {self.horizon})")

    def epochs(self) -> List[Tuple[float, float]]:
        """Bornes (t1, t2] de chaque époque jusqu'à l'horizon"""
        bornes = []
        t1 = 0.0
        while t1 + self.interval <= self.horizon + TOLERANCE_TEMPS:
            bornes.append((t1, t1 + self.interval))
            t1 += self.interval
        return bornes


@dataclass(frozen=True)
class Event:
    """Entrée du journal d'événements"""
    time: float
    kind: str
    request_id: Optional[str]
    vehicle_id: Optional[str]
    node: Optional[NodeId]
    detail: str = ''


@dataclass
class Lot:
    """Requêtes d'une époque; `futures` contient celles qui n'ont pas encore émergé"""
    requests: List[Request]
    futures: FrozenSet[str] = frozenset()

    def __len__(self) -> int:
        return len(self.requests)

    def __iter__(self):
        return iter(self.requests)

    def ids(self) -> List[str]:
        return [r.id for r in self.requests]


def pickup_stop(req: Request) -> Stop:
    return Stop(req.origin, req.id, PICKUP, req.latest_boarding, release=req.emergence_time)


def dropoff_stop(net: Network, req: Request) -> Stop:
    """Dépose d'une requête pas encore montée (échéance flottante)"""
    limite = shortest_time(net, req.origin, req.destination) + req.max_detour
    return Stop(req.destination, req.id, DROPOFF, req.latest_boarding + limite, ride_limit=limite)


def batch_requests(stream: Iterable[Request], epoch: Tuple[float, float], visibility: float = 0.0) -> Lot:
    """
    Requêtes visibles à la décision de l'époque (t1, t2]

    Args:
        stream: toutes les requêtes
        epoch: bornes (t1, t2)
        visibility: fenêtre de visibilité future W (secondes)

    Returns:
        Lot trié par identifiant; les requêtes t_r > t2 sont marquées futures
    """
    t1, t2 = epoch
    retenues = []
    futures = set()
    for req in stream:
        if t1 < req.emergence_time <= t2 + visibility and t2 <= req.latest_boarding:
            retenues.append(req)
            if req.emergence_time > t2:
                futures.add(req.id)
    retenues.sort(key=lambda r: cle_id(r.id))
    return Lot(retenues, frozenset(futures))


def route_cost(net: Network, vehicle: VehicleState, route: Route) -> float:
    """Coût c(S): trajet depuis la position courante puis somme des trajets entre arrêts"""
    if not route.stops:
        return 0.0
    cout = vehicle.offset + shortest_time(net, vehicle.node, route.stops[0].node)
    for precedent, suivant in zip(route.stops, route.stops[1:]):
        cout += shortest_time(net, precedent.node, suivant.node)
    return cout


def planned_times(net: Network, vehicle: VehicleState, stops: Iterable[Stop], now: float) -> List[float]:
    """Heures de passage (attente jusqu'à l'émergence pour les prises en charge futures)"""
    heures = []
    t = now + vehicle.offset
    position = vehicle.node
    for stop in stops:
        t += shortest_time(net, position, stop.node)
        if stop.action == PICKUP and t < stop.release:
            t = stop.release
        heures.append(t)
        position = stop.node
    return heures


def with_route(vehicle: VehicleState, route: Route) -> VehicleState:
    """Copie du véhicule avec une nouvelle route engagée"""
    return replace(vehicle, route=route, onboard=dict(vehicle.onboard),
                   relocation=None if route.stops else vehicle.relocation,
                   version=vehicle.version + 1)


def advance_vehicle(net: Network, vehicle: VehicleState, dt: float, now: float
                    ) -> Tuple[VehicleState, List[Event]]:
    """
    Fait avancer un véhicule le long de sa route pendant dt secondes

    Args:
        net: réseau
        vehicle: état initial (non modifié)
        dt: durée simulée (>= 0)
        now: heure de départ

    Returns:
        (nouvel état, événements de prise en charge / dépose horodatés)
    """
    fin = now + dt
    t = now
    noeud = vehicle.node
    offset = vehicle.offset
    distance = vehicle.distance
    onboard = dict(vehicle.onboard)
    stops = list(vehicle.route.stops)
    heures = list(vehicle.route.planned_times)
    relocation = vehicle.relocation
    evenements: List[Event] = []

    while True:
        if offset > 0:
            if t + offset <= fin:
                t += offset
                offset = 0.0
                continue
            offset -= fin - t
            t = fin
            break

        # Aucune action à l'instant de fin: elle revient au pas suivant
        if t >= fin:
            break

        if stops:
            stop = stops[0]
            if stop.node == noeud:
                if stop.action == PICKUP and t < stop.release:
                    t = min(stop.release, fin)
                    continue
                if stop.action == PICKUP:
                    for i, autre in enumerate(stops):
                        if autre.action == DROPOFF and autre.request_id == stop.request_id:
                            echeance = t + autre.ride_limit if autre.ride_limit is not None else autre.deadline
                            stops[i] = Stop(autre.node, autre.request_id, DROPOFF, echeance)
                            onboard[stop.request_id] = echeance
                            break
                    evenements.append(Event(t, PICKUP_EVENT, stop.request_id, vehicle.id, noeud))
                else:
                    onboard.pop(stop.request_id, None)
                    evenements.append(Event(t, DROPOFF_EVENT, stop.request_id, vehicle.id, noeud))
                stops.pop(0)
                if heures:
                    heures.pop(0)
                continue
            cible = stop.node
        elif relocation is not None and relocation != noeud:
            cible = relocation
        else:
            relocation = None
            break

        arc = net.next_hop(noeud, cible)
        if arc is None:
            break
        distance += arc.length
        noeud = arc.destination
        offset = arc.travel_time

    if not stops and relocation == noeud and offset == 0:
        relocation = None

    nouveau = replace(vehicle, node=noeud, offset=max(offset, 0.0), onboard=onboard,
                      route=Route(tuple(stops), tuple(heures)), relocation=relocation,
                      distance=distance)
    return nouveau, evenements


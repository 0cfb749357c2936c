"""
Types partagés par les algorithmes d'affectation d'une époque
État d'époque, trajets retenus, solution, validation a posteriori
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from src.config import SimConfig
from src.core.model import Request, Route, VehicleState
from src.core.network import Network, cle_id
from src.exceptions import SolutionInvalide
from src.routing.ctsp import CtspOracle, RouteMemory, feasible

# Affectation de travail: véhicule -> requêtes ajoutées pendant l'époque
Affectation = Dict[str, FrozenSet[str]]


@dataclass
class EpochState:
    """
    Instance d'affectation d'une époque

    Les véhicules sont dans leur état de base (routes engagées, sans les requêtes
    remises en jeu); `requests` est le lot de l'époque augmenté des requêtes
    reportées (`carried`).
    """
    net: Network
    now: float
    vehicles: Dict[str, VehicleState]
    requests: List[Request]
    carried: FrozenSet[str] = frozenset()
    config: SimConfig = field(default_factory=SimConfig)
    memory: Optional[RouteMemory] = None
    oracle: Optional[CtspOracle] = None

    def __post_init__(self):
        self.requests = sorted(self.requests, key=lambda r: cle_id(r.id))
        self.carried = frozenset(self.carried)
        self.par_id: Dict[str, Request] = {r.id: r for r in self.requests}
        if self.oracle is None:
            self.oracle = CtspOracle(self.net, self.config.policy(), self.now,
                                     self.memory, self.config.threads)

    @property
    def penalty(self) -> float:
        return self.config.penalty_M

    def vehicle_ids(self) -> List[str]:
        return sorted(self.vehicles, key=cle_id)

    def request_ids(self) -> List[str]:
        return [r.id for r in self.requests]

    def evaluer(self, vehicle_id: str, requetes: Iterable[str]) -> Tuple[Optional[Route], float]:
        """Route et coût c_f du véhicule de base augmenté des requêtes données"""
        return self.oracle.evaluate(self.vehicles[vehicle_id], [self.par_id[r] for r in requetes])

    def cout(self, vehicle_id: str, requetes: Iterable[str]) -> float:
        return self.evaluer(vehicle_id, requetes)[1]


@dataclass(frozen=True)
class Trip:
    """Trajet: véhicule, requêtes ajoutées, route résultante et coût c_f"""
    vehicle_id: str
    requests: FrozenSet[str]
    route: Route
    cost: float


@dataclass
class AssignmentSolution:
    """
    Solution d'une époque

    objective = somme des c_f + M * nombre de requêtes non servies
    """
    algo: str
    trips: Dict[str, Trip] = field(default_factory=dict)
    unserved: FrozenSet[str] = frozenset()
    objective: float = 0.0
    diagnostics: Dict[str, object] = field(default_factory=dict)

    def assigned(self) -> Dict[str, str]:
        """requête -> véhicule"""
        return {r: trip.vehicle_id for trip in self.trips.values() for r in trip.requests}

    def route_cost_total(self) -> float:
        return sum(trip.cost for trip in self.trips.values())

    def affectation(self) -> Affectation:
        return {vid: trip.requests for vid, trip in self.trips.items()}


def objectif(etat: EpochState, affectation: Mapping[str, Iterable[str]]) -> float:
    """Objectif d'époque d'une affectation de travail"""
    servies = set()
    total = 0.0
    for vid, requetes in affectation.items():
        requetes = frozenset(requetes)
        if requetes:
            total += etat.cout(vid, requetes)
            servies |= requetes
    return total + etat.penalty * (len(etat.requests) - len(servies))


def build_solution(etat: EpochState, affectation: Mapping[str, Iterable[str]], algo: str,
                   diagnostics: Optional[Dict[str, object]] = None) -> AssignmentSolution:
    """
    Construit la solution (routes recalculées par l'oracle) à partir d'une affectation

    Lève SolutionInvalide si un trajet est irréalisable.
    """
    trips = {}
    servies = set()
    for vid in sorted(affectation, key=cle_id):
        requetes = frozenset(affectation[vid])
        if not requetes:
            continue
        route, cout = etat.evaluer(vid, requetes)
        if route is None:
            raise SolutionInvalide(f"{algo}: trajet irréalisable pour le véhicule {vid} ({sorted(requetes)})")
        trips[vid] = Trip(vid, requetes, route, cout)
        servies |= requetes
    non_servies = frozenset(etat.request_ids()) - servies
    solution = AssignmentSolution(
        algo=algo,
        trips=trips,
        unserved=non_servies,
        objective=sum(t.cost for t in trips.values()) + etat.penalty * len(non_servies),
        diagnostics=dict(diagnostics or {}),
    )
    return solution


def validate_solution(etat: EpochState, solution: AssignmentSolution) -> None:
    """
    Vérifie a posteriori une solution d'époque

    Un trajet par véhicule au plus, chaque requête servie une fois ou non servie,
    routes réalisables (échéances, capacité, précédence).
    """
    vus: Dict[str, str] = {}
    for vid, trip in solution.trips.items():
        if vid != trip.vehicle_id or vid not in etat.vehicles:
            raise SolutionInvalide(f"{solution.algo}: véhicule inconnu ou incohérent {vid}")
        for rid in trip.requests:
            if rid in vus:
                raise SolutionInvalide(f"{solution.algo}: requête {rid} affectée à {vus[rid]} et {vid}")
            vus[rid] = vid
        base = etat.vehicles[vid]
        attendues = set(base.route.request_ids()) | set(trip.requests)
        if set(trip.route.request_ids()) - set(base.onboard) != attendues - set(base.onboard):
            raise SolutionInvalide(f"{solution.algo}: la route de {vid} ne couvre pas ses requêtes")
        if not feasible(etat.net, base, trip.route, etat.now):
            raise SolutionInvalide(f"{solution.algo}: route irréalisable pour {vid}")

    pool = set(etat.request_ids())
    if set(vus) - pool:
        raise SolutionInvalide(f"{solution.algo}: requêtes hors lot {sorted(set(vus) - pool, key=cle_id)}")
    if set(vus) & set(solution.unserved) or set(vus) | set(solution.unserved) != pool:
        raise SolutionInvalide(f"{solution.algo}: partition servies / non servies incohérente")

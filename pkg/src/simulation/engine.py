"""
Moteur de simulation multi-époques
Boucle d'époques, choix de l'algorithme, rééquilibrage, avancement des véhicules, métriques
"""

import os
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, List, Sequence, Set, Tuple

import pandas as pd

from src.assignment.ce import la_mr_ce_assign
from src.assignment.cg import cg_assign
from src.assignment.common import AssignmentSolution, EpochState, validate_solution
from src.assignment.la import la_assign, la_mr_assign, la_mr_ns_assign, la_mr_ps_assign
from src.assignment.rtv import rtv_assign
from src.config import SimConfig
from src.core.model import (ARRIVAL, ASSIGNMENT, DROPOFF_EVENT, EXPIRY, PICKUP_EVENT, REASSIGNMENT,
                            RELOCATION, Event, Request, Route, VehicleState, advance_vehicle, batch_requests,
                            planned_times, with_route)
from src.core.network import Network, cle_id
from src.routing.ctsp import RouteMemory
from src.simulation.rebalance import rebalance

ALGORITHMS: Dict[str, Callable[[EpochState], AssignmentSolution]] = {
    'la': la_assign,
    'la-mr': la_mr_assign,
    'la-mr-ns': la_mr_ns_assign,
    'la-mr-ps': la_mr_ps_assign,
    'la-mr-ce': la_mr_ce_assign,
    'rtv': lambda etat: rtv_assign(etat, None, 'rtv'),
    'fast-rtv': lambda etat: rtv_assign(etat, etat.config.timeout_enumeration, 'fast-rtv'),
    'cg': lambda etat: cg_assign(etat, etat.config.cg_time_limit),
}
RTV_FAMILY = ('rtv', 'fast-rtv', 'cg')
# Requêtes non servies rejetées sans report
REJET_IMMEDIAT = ('rtv',)

COLONNES_EVENEMENTS = ['time', 'kind', 'request_id', 'vehicle_id', 'node', 'detail']


@dataclass
class SimData:
    """Entrées d'une simulation: réseau, flux de requêtes, flotte initiale"""
    net: Network
    requests: List[Request]
    vehicles: List[VehicleState]


@dataclass
class EpochReport:
    index: int
    start: float
    decision_time: float
    batch: int
    pool: int
    assigned: int
    unserved: int
    objective: float
    runtime_s: float
    relocations: int = 0


@dataclass
class Metrics:
    """Indicateurs d'une simulation"""
    service_rate: float
    vmt: float
    shared_rate: float
    total_requests: int
    served: int
    expired: int
    pending: int
    empty_demand: bool = False
    assigned_per_epoch: List[int] = field(default_factory=list)
    runtime_per_epoch: List[float] = field(default_factory=list)


class EventLog:
    """Journal horodaté; ordre stable (heure, ordre d'insertion)"""

    def __init__(self):
        self._evenements: List[Event] = []

    def add(self, evenement: Event):
        self._evenements.append(evenement)

    def extend(self, evenements: Iterable[Event]):
        self._evenements.extend(evenements)

    @property
    def events(self) -> List[Event]:
        return sorted(self._evenements, key=lambda e: e.time)

    def __len__(self) -> int:
        return len(self._evenements)

    def __iter__(self):
        return iter(self.events)

    def of_kind(self, kind: str) -> List[Event]:
        return [e for e in self.events if e.kind == kind]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([[e.time, e.kind, e.request_id, e.vehicle_id, e.node, e.detail]
                             for e in self.events], columns=COLONNES_EVENEMENTS)


@dataclass
class SimResult:
    metrics: Metrics
    events: EventLog
    epochs: List[EpochReport]
    vehicles: Dict[str, VehicleState]
    algo: str = 'la'

    def __iter__(self):
        return iter((self.metrics, self.events))


@dataclass
class SimState:
    """État mutable de la simulation entre deux époques"""
    config: SimConfig
    data: SimData
    vehicles: Dict[str, VehicleState]
    t: float = 0.0
    log: EventLog = field(default_factory=EventLog)
    memory: RouteMemory = field(default_factory=RouteMemory)
    carried: Dict[str, Request] = field(default_factory=dict)
    affecte_a: Dict[str, str] = field(default_factory=dict)
    montees: Set[str] = field(default_factory=set)
    servies: Set[str] = field(default_factory=set)
    expirees: Set[str] = field(default_factory=set)
    reports: List[EpochReport] = field(default_factory=list)
    verbose: bool = False

    @property
    def epochs(self) -> List[Tuple[float, float]]:
        return self.config.epoch_config().epochs()


def _retirer_requetes(net: Network, vehicle: VehicleState, retirees: Set[str], now: float) -> VehicleState:
    """Retire de la route les arrêts des requêtes données (non montées)"""
    if not retirees & vehicle.route.request_ids():
        return vehicle
    stops = tuple(s for s in vehicle.route.stops if s.request_id not in retirees)
    return with_route(vehicle, Route(stops, tuple(planned_times(net, vehicle, stops, now))))


def _avancer(etat: SimState, fin: float):
    """Avance tous les véhicules jusqu'à `fin` en journalisant montées et déposes"""
    duree = fin - etat.t
    if duree <= 0:
        return
    for vid in sorted(etat.vehicles, key=cle_id):
        nouveau, evenements = advance_vehicle(etat.data.net, etat.vehicles[vid], duree, etat.t)
        etat.vehicles[vid] = nouveau
        for e in evenements:
            if e.kind == PICKUP_EVENT:
                etat.montees.add(e.request_id)
            elif e.kind == DROPOFF_EVENT:
                etat.servies.add(e.request_id)
        etat.log.extend(evenements)
    etat.t = fin


def _expirer(etat: SimState, req: Request, detail: str):
    etat.expirees.add(req.id)
    etat.carried.pop(req.id, None)
    etat.affecte_a.pop(req.id, None)
    etat.log.add(Event(req.latest_boarding, EXPIRY, req.id, None, req.origin, detail))


def step_epoch(etat: SimState, e: int) -> Tuple[SimState, EpochReport]:
    """
    Traite l'époque e: lot, affectation, application des routes, rééquilibrage,
    avancement des véhicules jusqu'à la frontière suivante

    Précondition: véhicules avancés jusqu'à l'instant de décision de l'époque.
    """
    config = etat.config
    net = etat.data.net
    t1, t2 = etat.epochs[e]
    debut = time.perf_counter()

    # Arrivées de l'époque (annonce à t_r - W pour les requêtes visibles à l'avance)
    for req in etat.data.requests:
        if t1 < req.emergence_time <= t2:
            etat.log.add(Event(max(req.emergence_time - config.visibility, 0.0), ARRIVAL, req.id, None,
                               req.origin))
            # Une requête montée avant l_b ne peut expirer
            if req.latest_boarding < t2 and req.id not in etat.montees:
                _expirer(etat, req, 'avant décision')

    lot = batch_requests(etat.data.requests, (t1, t2), config.visibility)
    reassignation = config.algo in RTV_FAMILY and config.rtv_reassign

    # Véhicules de base: requêtes futures non montées remises en jeu, R̄ pour RTV
    remises: Dict[str, Request] = {}
    par_id = {r.id: r for r in etat.data.requests}
    for vid in sorted(etat.vehicles, key=cle_id):
        vehicule = etat.vehicles[vid]
        en_attente = vehicule.pending_requests()
        retirees = {rid for rid in en_attente if par_id[rid].emergence_time > t1}
        if reassignation:
            retirees = set(en_attente)
        for rid in retirees:
            if par_id[rid].emergence_time <= t2:
                remises[rid] = par_id[rid]
        etat.vehicles[vid] = _retirer_requetes(net, vehicule, retirees, t2)

    engagees = set().union(*(v.pending_requests() for v in etat.vehicles.values())) | etat.montees
    pool: Dict[str, Request] = {}
    for req in list(lot) + list(remises.values()) + list(etat.carried.values()):
        if req.id not in engagees and req.id not in etat.expirees and req.id not in etat.servies:
            pool[req.id] = req
    reportees = frozenset(rid for rid in pool if rid in etat.carried or rid in remises)

    etat_epoque = EpochState(net, t2, dict(etat.vehicles), list(pool.values()), reportees, config, etat.memory)
    solution = ALGORITHMS[config.algo](etat_epoque)
    validate_solution(etat_epoque, solution)

    # Application des routes
    affectees = 0
    for vid in sorted(etat.vehicles, key=cle_id):
        trip = solution.trips.get(vid)
        if trip is not None:
            etat.vehicles[vid] = with_route(etat.vehicles[vid], trip.route)
            for rid in sorted(trip.requests, key=cle_id):
                precedent = etat.affecte_a.get(rid)
                if precedent is None:
                    etat.log.add(Event(t2, ASSIGNMENT, rid, vid, pool[rid].origin))
                    affectees += 1
                elif precedent != vid:
                    etat.log.add(Event(t2, REASSIGNMENT, rid, vid, pool[rid].origin, f"depuis {precedent}"))
                etat.affecte_a[rid] = vid
                etat.carried.pop(rid, None)
        etat.memory.commit(vid, etat.vehicles[vid].route)

    # Requêtes non affectées: rejet (RTV complet), report sinon, futures rejouées
    fin_suivante = t2 + config.interval
    for rid in sorted(solution.unserved, key=cle_id):
        req = pool[rid]
        etat.affecte_a.pop(rid, None)
        if req.emergence_time > t2:
            continue
        if config.algo in REJET_IMMEDIAT:
            _expirer(etat, req, 'rejet')
        elif req.latest_boarding >= fin_suivante:
            etat.carried[rid] = req
        else:
            _expirer(etat, req, 'non servie')

    # Rééquilibrage des véhicules inactifs
    deplacements = 0
    if config.rebalance:
        inactifs = [v for v in etat.vehicles.values() if v.est_inactif()]
        non_servies = [pool[rid] for rid in solution.unserved if pool[rid].emergence_time <= t2]
        plan = rebalance(inactifs, non_servies, net)
        for vid, cible in plan.moves.items():
            vehicule = etat.vehicles[vid]
            if cible == vehicule.node and vehicule.offset == 0:
                continue
            etat.vehicles[vid] = replace(vehicule, relocation=cible)
            etat.log.add(Event(t2, RELOCATION, plan.pairs[vid], vid, cible))
            deplacements += 1

    rapport = EpochReport(
        index=e, start=t1, decision_time=t2,
        batch=sum(1 for r in lot if r.emergence_time <= t2),
        pool=len(pool), assigned=affectees, unserved=len(solution.unserved),
        objective=solution.objective, runtime_s=time.perf_counter() - debut,
        relocations=deplacements,
    )
    etat.reports.append(rapport)
    if etat.verbose:
        print(f"[INFO] Époque {e + 1}/{len(etat.epochs)} ({t1:.0f}-{t2:.0f} s): lot {rapport.batch}, "
              f"affectées {affectees}, non servies {rapport.unserved}, {rapport.runtime_s:.2f} s")

    _avancer(etat, fin_suivante)
    return etat, rapport


def _drainer(etat: SimState):
    """Poursuit les routes engagées au-delà de l'horizon"""
    echeances = [s.deadline for v in etat.vehicles.values() for s in v.route.stops]
    echeances += [d for v in etat.vehicles.values() for d in v.onboard.values()]
    limite = max(echeances, default=etat.t) + etat.config.interval
    while any(v.route.stops for v in etat.vehicles.values()) and etat.t <= limite:
        _avancer(etat, etat.t + etat.config.interval)


def shared_requests(events: Iterable[Event]) -> Set[str]:
    """Requêtes ayant partagé leur véhicule avec une autre pendant leur présence à bord"""
    a_bord: Dict[str, Set[str]] = {}
    partagees: Set[str] = set()
    for e in events:
        if e.kind == PICKUP_EVENT:
            presents = a_bord.setdefault(e.vehicle_id, set())
            if presents:
                partagees |= presents | {e.request_id}
            presents.add(e.request_id)
        elif e.kind == DROPOFF_EVENT:
            a_bord.get(e.vehicle_id, set()).discard(e.request_id)
    return partagees


def compute_metrics(etat: SimState) -> Metrics:
    total = len(etat.data.requests)
    servies = len(etat.servies)
    partagees = shared_requests(etat.log.events) & etat.servies
    return Metrics(
        service_rate=servies / total if total else 1.0,
        vmt=sum(v.distance for v in etat.vehicles.values()),
        shared_rate=len(partagees) / servies if servies else 0.0,
        total_requests=total,
        served=servies,
        expired=len(etat.expirees - etat.servies),
        pending=total - servies - len(etat.expirees - etat.servies),
        empty_demand=total == 0,
        assigned_per_epoch=[r.assigned for r in etat.reports],
        runtime_per_epoch=[r.runtime_s for r in etat.reports],
    )


def run_simulation(config: SimConfig, data: SimData, verbose: bool = False) -> SimResult:
    """
    Simule l'horizon complet époque par époque

    Args:
        config: configuration validée
        data: réseau, requêtes, flotte
        verbose: affiche la progression

    Returns:
        SimResult (métriques, journal, rapports d'époque, état final des véhicules)
    """
    flotte = sorted(data.vehicles, key=lambda v: cle_id(v.id))
    if config.fleet_size:
        flotte = flotte[:config.fleet_size]
    etat = SimState(config=config, data=data, vehicles={v.id: v for v in flotte}, verbose=verbose)

    if verbose:
        print(f"[INFO] Simulation '{config.algo}': {len(data.requests)} requêtes, {len(flotte)} véhicules, "
              f"{len(etat.epochs)} époques")
    hors_epoques = [r.id for r in data.requests if r.emergence_time <= 0]
    if hors_epoques:
        print(f"[WARN] {len(hors_epoques)} requête(s) émises à t <= 0 ne seront jamais traitées")
    if etat.epochs:
        _avancer(etat, etat.epochs[0][1])
    for e in range(len(etat.epochs)):
        step_epoch(etat, e)
    if config.drain:
        _drainer(etat)

    metriques = compute_metrics(etat)
    if verbose:
        print(f"[OK] Taux de service {metriques.service_rate:.1%}, VMT {metriques.vmt:.0f} m, "
              f"partage {metriques.shared_rate:.1%}")
    return SimResult(metriques, etat.log, etat.reports, etat.vehicles, config.algo)


def compare_algorithms(config: SimConfig, data: SimData, algos: Sequence[str],
                       verbose: bool = False) -> pd.DataFrame:
    """
    Exécute chaque algorithme sur les mêmes entrées

    Le VMT relatif est exprimé en % de celui de LA (ou du premier algorithme si LA est absent).

    Returns:
        DataFrame: algo, service_rate, vmt, vmt_pct, shared_rate, served, total, runtime_s
    """
    lignes = []
    for algo in algos:
        debut = time.perf_counter()
        resultat = run_simulation(replace(config, algo=algo).validate(), data, verbose)
        m = resultat.metrics
        lignes.append({'algo': algo, 'service_rate': m.service_rate, 'vmt': m.vmt,
                       'shared_rate': m.shared_rate, 'served': m.served, 'total': m.total_requests,
                       'runtime_s': time.perf_counter() - debut})
    tableau = pd.DataFrame(lignes, columns=['algo', 'service_rate', 'vmt', 'vmt_pct', 'shared_rate',
                                            'served', 'total', 'runtime_s'])
    if lignes:
        reference = 'la' if 'la' in list(algos) else algos[0]
        vmt_reference = tableau.loc[tableau['algo'] == reference, 'vmt'].iloc[0]
        tableau['vmt_pct'] = 100.0 * tableau['vmt'] / vmt_reference if vmt_reference else float('nan')
    return tableau


def compare_epoch_objectives(etat: EpochState, algos: Sequence[str]) -> Dict[str, AssignmentSolution]:
    """Résout la même instance d'époque avec chaque algorithme (solutions validées)"""
    solutions = {}
    for algo in algos:
        solution = ALGORITHMS[algo](etat)
        validate_solution(etat, solution)
        solutions[algo] = solution
    return solutions


def write_outputs(resultat: SimResult, dossier: str) -> Dict[str, str]:
    """
    Écrit metrics.csv, epochs.csv et events.csv

    Returns:
        chemins des fichiers écrits
    """
    os.makedirs(dossier, exist_ok=True)
    m = resultat.metrics
    chemins = {nom: os.path.join(dossier, f"{nom}.csv") for nom in ('metrics', 'epochs', 'events')}
    pd.DataFrame([{
        'algo': resultat.algo, 'service_rate': m.service_rate, 'vmt': m.vmt, 'shared_rate': m.shared_rate,
        'total_requests': m.total_requests, 'served': m.served, 'expired': m.expired, 'pending': m.pending,
        'empty_demand': m.empty_demand,
    }]).to_csv(chemins['metrics'], index=False)
    pd.DataFrame([vars(r) for r in resultat.epochs],
                 columns=['index', 'start', 'decision_time', 'batch', 'pool', 'assigned', 'unserved',
                          'objective', 'runtime_s', 'relocations']).to_csv(chemins['epochs'], index=False)
    resultat.events.to_frame().to_csv(chemins['events'], index=False)
    return chemins

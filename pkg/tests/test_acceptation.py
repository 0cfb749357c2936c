"""
Vérifications longues (plusieurs minutes): oracles sur instances aléatoires (affectation, stabilité
des routes, séparation et évaluation, cycles d'échange) et tendances multi-époques
Lancées seulement si RIDEPOOL_TESTS_LONGS est défini
"""

import itertools
import os

import numpy as np
import pytest

from src.analysis.lag_correlation import lag_regression, slope_curve
from src.assignment.ce import build_exchange_graph, est_valide, max_cost_reducing_cycle
from src.assignment.la import executer_tours, la_assign
from src.assignment.rtv import rtv_assign
from src.config import SimConfig
from src.core.model import DROPOFF, Request, Route, Stop, VehicleState, advance_vehicle, with_route
from src.core.network import load_network
from src.optim.bnb import bnb_solve
from src.optim.simplex import LpProblem
from src.routing.ctsp import CtspQuery, RouteMemory, lrp, oof
from src.simulation.demand import DemandSpec, generate
from src.simulation.engine import ALGORITHMS, SimData, run_simulation
from tests.instances import instance_epoque, meilleur_cycle_force_brute, objectif_force_brute, reseau_aleatoire

pytestmark = pytest.mark.skipif(not os.getenv('RIDEPOOL_TESTS_LONGS'),
                                reason="vérifications longues (définir RIDEPOOL_TESTS_LONGS)")

GRAINES = range(5)
ECHEANCE_LARGE = 50000.0
ETA = 3


def ville_grille(cote: int = 10, pas: float = 400.0, temps: float = 60.0):
    """Quadrillage cote x cote, arcs dans les deux sens entre voisins"""
    noeuds = [{'node_id': str(i * cote + j + 1), 'x': j * pas, 'y': i * pas}
              for i in range(cote) for j in range(cote)]
    arcs = []
    for i in range(cote):
        for j in range(cote):
            ici = str(i * cote + j + 1)
            for di, dj in ((0, 1), (1, 0)):
                if i + di < cote and j + dj < cote:
                    la = str((i + di) * cote + j + dj + 1)
                    arcs.append({'from': ici, 'to': la, 'travel_time_s': temps, 'length_m': pas})
                    arcs.append({'from': la, 'to': ici, 'travel_time_s': temps, 'length_m': pas})
    return load_network(noeuds, arcs)


def _donnees(net, graine: int, taux: float, horizon: float, flotte: int = 20):
    generateur = np.random.RandomState(1000 + graine)
    noeuds = net.nodes
    vehicules = [VehicleState(str(k + 1), noeuds[generateur.randint(len(noeuds))], 4) for k in range(flotte)]
    return SimData(net, generate(DemandSpec(taux, horizon, seed=graine), net), vehicules)


@pytest.mark.parametrize('seed', range(200))
def test_rtv_exact_et_dominant(seed):
    etat = instance_epoque(seed, max_vehicules=5, max_requetes=8)
    reference = rtv_assign(etat)
    assert reference.objective == pytest.approx(objectif_force_brute(etat))
    rapide = rtv_assign(etat, deadline=float('inf'), algo='fast-rtv')
    assert rapide.affectation() == reference.affectation()
    for algo in ('la', 'la-mr', 'la-mr-ns', 'la-mr-ps', 'la-mr-ce', 'cg'):
        assert ALGORITHMS[algo](etat).objective >= reference.objective - 1e-6, algo


def _ordre(route, cles):
    return [(s.request_id, s.action) for s in route.stops if (s.request_id, s.action) in cles]


@pytest.mark.parametrize('seed', range(1000))
def test_stabilite_apres_avancement(seed):
    generateur = np.random.RandomState(seed)
    net = reseau_aleatoire(generateur)
    noeuds = net.nodes
    destinations = [noeuds[k] for k in generateur.choice(range(1, len(noeuds)), size=3, replace=False)]
    arrets = tuple(Stop(noeud, f"p{k}", DROPOFF, ECHEANCE_LARGE) for k, noeud in enumerate(destinations))
    vehicule = VehicleState('1', noeuds[0], 8, onboard={s.request_id: ECHEANCE_LARGE for s in arrets},
                            route=Route(arrets, ()))
    requetes = []
    for rid in ('r1', 'r2'):
        o, d = generateur.choice(len(noeuds), size=2, replace=False)
        requetes.append(Request(rid, noeuds[o], noeuds[d], 0.0, ECHEANCE_LARGE, ECHEANCE_LARGE))
    premiere, seconde = requetes

    # OOF: les déposes des passagers à bord gardent leur ordre engagé
    route = oof(net, CtspQuery(vehicule, (premiere,), 0.0), 1)
    dt = generateur.uniform(0.0, route.planned_times[-1])
    avance, _ = advance_vehicle(net, with_route(vehicule, route), dt, 0.0)
    engagees = [(s.request_id, s.action) for s in avance.route.stops
                if s.action == DROPOFF and s.request_id in avance.onboard]
    suivante = oof(net, CtspQuery(avance, (seconde,), dt), 1)
    assert suivante is not None
    assert _ordre(suivante, set(engagees)) == engagees

    # LRP: le préfixe rappelé garde son ordre, seul le dernier arrêt est réoptimisé
    memoire = RouteMemory()
    memoire.commit('1', vehicule.route)
    route = lrp(net, CtspQuery(vehicule, (premiere,), 0.0), ETA, memoire)
    memoire.commit('1', route)
    dt = generateur.uniform(0.0, route.planned_times[-1])
    avance, _ = advance_vehicle(net, with_route(vehicule, route), dt, 0.0)
    rappel = memoire.recall(avance)
    suivante = lrp(net, CtspQuery(avance, (seconde,), dt), ETA, memoire)
    assert suivante is not None
    if len(avance.route.stops) + 2 > ETA:
        prefixe = [(s.request_id, s.action) for s in rappel[:len(rappel) - 1]]
        assert _ordre(suivante, set(prefixe)) == prefixe


@pytest.mark.parametrize('seed', range(500))
def test_bnb_egal_enumeration_instances_aleatoires(seed):
    generateur = np.random.RandomState(seed)
    n = generateur.randint(1, 9)
    c = generateur.randint(-6, 10, size=n)
    A = generateur.randint(0, 6, size=(generateur.randint(1, 4), n))
    b = generateur.randint(0, 9, size=len(A))
    solution = bnb_solve(LpProblem(c=c.tolist(), A_ub=A.tolist(), b_ub=b.tolist(), upper=[1] * n, sense='max'))
    assert solution.optimal

    meilleur = max(float(c @ np.array(x)) for x in itertools.product((0, 1), repeat=n)
                   if np.all(A @ np.array(x) <= b))
    assert solution.objective == pytest.approx(meilleur)
    assert np.all(A @ solution.x <= b + 1e-9)


@pytest.mark.parametrize('seed', range(100))
@pytest.mark.parametrize('depart', ['vide', 'la', 'la-mr'])
def test_cycles_d_echange_egaux_force_brute(seed, depart):
    etat = instance_epoque(seed, max_vehicules=3, max_requetes=5)
    if depart == 'vide':
        affectation = {}
    elif depart == 'la':
        affectation = la_assign(etat).affectation()
    else:
        affectation, _ = executer_tours(etat, 'mr')
    graphe = build_exchange_graph(etat, affectation)

    for source in graphe.request_nodes():
        reference = meilleur_cycle_force_brute(graphe, source)
        exhaustif, _ = max_cost_reducing_cycle(graphe, source, labels_per_node=None, prune=False)
        if reference is None or reference <= 1e-7:
            assert exhaustif is None
            continue
        assert exhaustif.reduction == pytest.approx(reference)
        assert est_valide(graphe, exhaustif.nodes)


def test_echanges_cycliques_au_moins_aussi_bons_que_la():
    net = ville_grille()
    taux_la, taux_ce, vmt = [], [], []
    for graine in GRAINES:
        donnees = _donnees(net, graine, taux=12.0, horizon=3600.0)
        la = run_simulation(SimConfig(algo='la', horizon=3600.0).validate(), donnees).metrics
        ce = run_simulation(SimConfig(algo='la-mr-ce', horizon=3600.0).validate(), donnees).metrics
        taux_la.append(la.service_rate)
        taux_ce.append(ce.service_rate)
        vmt.append(100.0 * ce.vmt / la.vmt)
    assert 0.5 <= np.mean(taux_la) <= 0.8
    assert np.mean(taux_ce) >= np.mean(taux_la)
    assert np.mean(vmt) <= 101.0


def test_visibilite_future_ameliore_la():
    net = ville_grille()
    for graine in GRAINES:
        donnees = _donnees(net, graine, taux=12.0, horizon=3600.0)
        sans = run_simulation(SimConfig(algo='la', horizon=3600.0).validate(), donnees).metrics
        avec = run_simulation(SimConfig(algo='la', horizon=3600.0, visibility=480.0).validate(), donnees).metrics
        assert avec.service_rate > sans.service_rate


def test_correlation_retardee_quatre_heures():
    donnees = _donnees(ville_grille(), 0, taux=12.0, horizon=4 * 3600.0)
    resultat = run_simulation(SimConfig(algo='la', horizon=4 * 3600.0).validate(), donnees)
    serie = resultat.metrics.assigned_per_epoch
    assert lag_regression(serie, 1).slope > 0
    courbe = slope_curve(serie, 30)
    assert min(courbe, key=lambda p: p[1])[0] > 5

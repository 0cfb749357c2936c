"""
Tests de l'oracle de routage: recherche exacte, insertion, OOF, LRP, cache
"""

import itertools
import math

import numpy as np
import pytest

from src.core.model import DROPOFF, Request, Route, Stop, VehicleState, route_cost, with_route
from src.exceptions import ErreurConfiguration
from src.routing.ctsp import (CtspOracle, CtspPolicy, CtspQuery, RouteMemory, feasible, insertion,
                              insertion_with_order, lrp, oof, oracle, solve_exact, _tous_les_arrets)
from tests.instances import instance_epoque, reseau_aleatoire

COUT_FIGURE = math.sqrt(45) + math.sqrt(10) + math.sqrt(13) + math.sqrt(40)


@pytest.fixture
def apres_prise(figure_net):
    """Véhicule en 3O juste après la montée de 3 (t = sqrt(45)), trois déposes dues à t = 20"""
    stops = (Stop('3D', '3', DROPOFF, 20.0), Stop('2', '2', DROPOFF, 20.0), Stop('1', '1', DROPOFF, 20.0))
    return VehicleState('V', '3O', onboard={'1': 20.0, '2': 20.0, '3': 20.0}, route=Route(stops, ()))


def test_figure_route_exacte(figure_net, figure_vehicle, figure_request):
    route = solve_exact(figure_net, CtspQuery(figure_vehicle, (figure_request,), 0.0))
    assert route is not None
    assert route.nodes() == ['3O', '3D', '2', '1']
    assert route_cost(figure_net, figure_vehicle, route) == pytest.approx(19.80, abs=0.01)
    assert route_cost(figure_net, figure_vehicle, route) == pytest.approx(COUT_FIGURE)
    assert route.planned_times[-1] <= 20.0 + 1e-9


def test_figure_ordre_alternatif_irrealisable(figure_net, figure_vehicle, figure_request):
    requete = CtspQuery(figure_vehicle, (figure_request,), 0.0)
    par_cle = {(s.request_id, s.action): s for s in _tous_les_arrets(figure_net, requete)}
    route = [par_cle[('3', 'pickup')], par_cle[('1', 'dropoff')], par_cle[('2', 'dropoff')],
             par_cle[('3', 'dropoff')]]
    assert not feasible(figure_net, figure_vehicle, route, 0.0)


def test_figure_insertion_adverse_echoue(figure_net, apres_prise):
    requete = CtspQuery(apres_prise, (), math.sqrt(45))
    ordre = [('1', 'dropoff'), ('2', 'dropoff'), ('3', 'dropoff')]
    assert insertion_with_order(figure_net, requete, ordre) is None

    exacte = solve_exact(figure_net, requete)
    assert exacte.nodes() == ['3D', '2', '1']
    assert exacte.planned_times[-1] == pytest.approx(COUT_FIGURE)


def test_figure_depose_en_fin_trop_tardive(figure_net, apres_prise):
    stops = apres_prise.route.stops
    tardive = [stops[2], stops[1], stops[0]]
    assert not feasible(figure_net, apres_prise, tardive, math.sqrt(45))
    arrivee = math.sqrt(45) + 5.0 + math.sqrt(40) + math.sqrt(13)
    assert arrivee == pytest.approx(21.64, abs=0.01)


def test_figure_insertion_ordre_croissant(figure_net, figure_vehicle, figure_request):
    route = insertion(figure_net, CtspQuery(figure_vehicle, (figure_request,), 0.0))
    assert route.nodes() == ['3O', '3D', '2', '1']


def test_oof_conserve_l_ordre_des_deposes(figure_net, figure_request):
    # Ordre engagé inverse: 1 avant 2
    stops = (Stop('1', '1', DROPOFF, 20.0), Stop('2', '2', DROPOFF, 20.0))
    vehicule = VehicleState('V', 'V', onboard={'1': 20.0, '2': 20.0}, route=Route(stops, ()))
    requete = CtspQuery(vehicule, (figure_request,), 0.0)
    assert oof(figure_net, requete, threshold=1) is None
    assert oof(figure_net, requete, threshold=6).nodes() == ['3O', '3D', '2', '1']


def test_lrp_prefixe_rappele(figure_net, figure_vehicle, figure_request):
    route = lrp(figure_net, CtspQuery(figure_vehicle, (figure_request,), 0.0), eta=3)
    assert route.nodes() == ['3O', '3D', '2', '1']


def test_lrp_trop_de_nouveaux_noeuds(figure_net, figure_vehicle, figure_request):
    autre = Request('4', '1', '2', 0.0)
    assert lrp(figure_net, CtspQuery(figure_vehicle, (figure_request, autre), 0.0), eta=2) is None


def test_lrp_memoire_prioritaire(figure_net, figure_vehicle):
    memoire = RouteMemory()
    memoire.commit('V', Route(tuple(reversed(figure_vehicle.route.stops)), ()))
    rappel = memoire.recall(figure_vehicle)
    assert [s.request_id for s in rappel] == ['1', '2']


def test_oracle_sans_requete(figure_net, figure_vehicle):
    route, cout = oracle(figure_net, CtspQuery(figure_vehicle, (), 0.0), CtspPolicy('exact'))
    assert route == figure_vehicle.route
    assert cout == 0.0


def test_oracle_cout_marginal(figure_net, figure_vehicle, figure_request):
    _, cout = oracle(figure_net, CtspQuery(figure_vehicle, (figure_request,), 0.0), CtspPolicy('exact'))
    assert cout == pytest.approx(COUT_FIGURE - 6.0 - math.sqrt(40))


def test_oracle_irrealisable(figure_net, figure_vehicle):
    impatiente = Request('3', '3O', '3D', 0.0, max_wait=1.0)
    route, cout = oracle(figure_net, CtspQuery(figure_vehicle, (impatiente,), 0.0), CtspPolicy('exact'))
    assert route is None
    assert cout == math.inf


def test_requete_deja_a_bord_refusee(figure_vehicle):
    with pytest.raises(ValueError):
        CtspQuery(figure_vehicle, (Request('1', 'V', '2', 0.0),), 0.0)


def test_politique_invalide():
    with pytest.raises(ErreurConfiguration):
        CtspPolicy('glouton')
    with pytest.raises(ErreurConfiguration):
        CtspPolicy('lrp', lrp_eta=1)


def test_cache_par_version(figure_net, figure_vehicle, figure_request):
    evaluateur = CtspOracle(figure_net, CtspPolicy('exact'), 0.0)
    premier = evaluateur.cost(figure_vehicle, [figure_request])
    assert evaluateur.cost(figure_vehicle, [figure_request]) == premier
    assert evaluateur.appels == 1
    evaluateur.cost(with_route(figure_vehicle, figure_vehicle.route), [figure_request])
    assert evaluateur.appels == 2


def test_evaluation_parallele_identique(figure_net, figure_vehicle, figure_request):
    taches = [(figure_vehicle, [figure_request]), (figure_vehicle, [])]
    sequentiel = CtspOracle(figure_net, CtspPolicy('exact'), 0.0).evaluate_many(taches)
    parallele = CtspOracle(figure_net, CtspPolicy('exact'), 0.0, threads=2).evaluate_many(taches)
    assert [c for _, c in sequentiel] == [c for _, c in parallele]


def _force_brute(net, vehicule, stops, now):
    meilleur = math.inf
    for permutation in itertools.permutations(stops):
        if feasible(net, vehicule, permutation, now):
            meilleur = min(meilleur, route_cost(net, vehicule, Route(tuple(permutation))))
    return meilleur


def _requetes_par_vehicule(etat, taille=2):
    for vid in etat.vehicle_ids():
        for sous in itertools.combinations(etat.requests, min(taille, len(etat.requests))):
            yield etat.vehicles[vid], sous


@pytest.mark.parametrize('seed', range(12))
def test_exacte_egale_permutations(seed):
    etat = instance_epoque(seed, max_vehicules=2, max_requetes=3)
    for vehicule, sous in _requetes_par_vehicule(etat):
        requete = CtspQuery(vehicule, sous, 0.0)
        reference = _force_brute(etat.net, vehicule, _tous_les_arrets(etat.net, requete), 0.0)
        route = solve_exact(etat.net, requete)
        sans_suiveurs = solve_exact(etat.net, requete, use_followers=False)
        if reference == math.inf:
            assert route is None
            assert sans_suiveurs is None
        else:
            assert route_cost(etat.net, vehicule, route) == pytest.approx(reference)
            assert route_cost(etat.net, vehicule, sans_suiveurs) == pytest.approx(reference)
            assert feasible(etat.net, vehicule, route, 0.0)


@pytest.mark.parametrize('seed', range(12))
def test_heuristiques_jamais_meilleures_que_l_exacte(seed):
    etat = instance_epoque(seed, max_vehicules=2, max_requetes=3)
    for vehicule, sous in _requetes_par_vehicule(etat):
        requete = CtspQuery(vehicule, sous, 0.0)
        exacte = solve_exact(etat.net, requete)
        for route in (insertion(etat.net, requete), oof(etat.net, requete, 1), lrp(etat.net, requete, 2 * len(sous))):
            if route is None:
                continue
            assert exacte is not None
            assert feasible(etat.net, vehicule, route, 0.0)
            assert route_cost(etat.net, vehicule, route) >= route_cost(etat.net, vehicule, exacte) - 1e-6


def _ordre(route, cles):
    return [(s.request_id, s.action) for s in route.stops if (s.request_id, s.action) in cles]


@pytest.mark.parametrize('seed', range(20))
def test_stabilite_de_l_ordre_oof_et_lrp(seed):
    generateur = np.random.RandomState(seed)
    net = reseau_aleatoire(generateur)
    noeuds = net.nodes
    depart = noeuds[0]
    destinations = [noeuds[k] for k in generateur.choice(range(1, len(noeuds)), size=3, replace=False)]
    arrets = tuple(Stop(noeud, f"p{k}", DROPOFF, 5000.0) for k, noeud in enumerate(destinations))
    vehicule = VehicleState('1', depart, 4, onboard={s.request_id: 5000.0 for s in arrets},
                            route=Route(arrets, ()))
    o, d = generateur.choice(len(noeuds), size=2, replace=False)
    requete = CtspQuery(vehicule, (Request('r', noeuds[o], noeuds[d], 0.0, 5000.0, 5000.0),), 0.0)
    engagees = [(s.request_id, s.action) for s in arrets]

    route = oof(net, requete, 1)
    assert route is not None
    assert _ordre(route, set(engagees)) == engagees

    memoire = RouteMemory()
    memoire.commit('1', vehicule.route)
    route = lrp(net, requete, 3, memoire)
    assert route is not None
    # Suffixe réoptimisé de taille 1: les deux premières déposes gardent leur ordre
    prefixe = engagees[:2]
    assert _ordre(route, set(prefixe)) == prefixe

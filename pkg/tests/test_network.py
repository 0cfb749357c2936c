"""
Tests du réseau routier: chargement, plus courts chemins, réseau euclidien
"""

import math

import pytest
from hypothesis import given, settings, strategies as st

from src.core.network import (cle_id, euclidean_network, load_network, shortest_length, shortest_path,
                              shortest_time)
from src.exceptions import ErreurDonnees, NoeudInconnu


def test_reseau_minimal():
    net = load_network([{'node_id': 'A'}, {'node_id': 'B'}], [{'from': 'A', 'to': 'B', 'travel_time_s': 10}])
    assert len(net) == 2
    assert len(net.arcs) == 1
    assert shortest_time(net, 'A', 'B') == 10.0
    assert shortest_time(net, 'B', 'A') == math.inf


def test_arc_en_double_garde_le_minimum():
    net = load_network([{'node_id': 'A'}, {'node_id': 'B'}],
                       [{'from': 'A', 'to': 'B', 'travel_time_s': 10},
                        {'from': 'A', 'to': 'B', 'travel_time_s': 7}])
    assert len(net.arcs) == 1
    assert shortest_time(net, 'A', 'B') == 7.0


def test_noeud_inconnu_nomme_la_ligne():
    with pytest.raises(NoeudInconnu) as erreur:
        load_network([{'node_id': 'A'}], [{'from': 'A', 'to': '99', 'travel_time_s': 5}])
    assert 'unknown node 99' in str(erreur.value)
    assert erreur.value.ligne == 1


def test_temps_non_positif_refuse():
    with pytest.raises(ErreurDonnees):
        load_network([{'node_id': 'A'}, {'node_id': 'B'}], [{'from': 'A', 'to': 'B', 'travel_time_s': 0}])


def test_shortest_time_noeud_inconnu():
    net = load_network([{'node_id': 'A'}], [])
    with pytest.raises(NoeudInconnu):
        shortest_time(net, 'A', 'Z')
    assert shortest_time(net, 'A', 'A') == 0.0


def test_distances_euclidiennes_figure(figure_net):
    assert shortest_time(figure_net, 'V', '3O') == pytest.approx(math.sqrt(45), abs=1e-4)
    assert shortest_time(figure_net, '3O', '3D') == pytest.approx(math.sqrt(10), abs=1e-4)


def test_point_unique_sans_arc():
    net = euclidean_network([('a', 0.0, 0.0)])
    assert len(net) == 1
    assert net.arcs == []


def test_chemin_et_premier_arc():
    net = load_network([{'node_id': n} for n in '123'],
                       [{'from': '1', 'to': '2', 'travel_time_s': 1, 'length_m': 100},
                        {'from': '2', 'to': '3', 'travel_time_s': 1, 'length_m': 100},
                        {'from': '1', 'to': '3', 'travel_time_s': 5, 'length_m': 50}])
    chemin = shortest_path(net, '1', '3')
    assert chemin.node_sequence == ['1', '2', '3']
    assert chemin.total_time == 2.0
    assert shortest_length(net, '1', '3') == 200.0
    assert net.next_hop('1', '3').destination == '2'
    assert net.next_hop('3', '3') is None


def test_cle_id_tri_numerique():
    assert sorted(['10', '2', 'b', '1', 'a'], key=cle_id) == ['1', '2', '10', 'a', 'b']


def _floyd_warshall(n, arcs):
    d = [[0.0 if i == j else math.inf for j in range(n)] for i in range(n)]
    for a, b, t in arcs:
        d[a][b] = min(d[a][b], t)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


graphes = st.integers(2, 12).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.integers(1, 50)), max_size=40),
))


@settings(max_examples=60, deadline=None)
@given(graphes)
def test_dijkstra_egal_floyd_warshall(graphe):
    n, arcs = graphe
    arcs = [(a, b, t) for a, b, t in arcs if a != b]
    net = load_network([{'node_id': str(i)} for i in range(n)],
                       [{'from': str(a), 'to': str(b), 'travel_time_s': t} for a, b, t in arcs])
    reference = _floyd_warshall(n, arcs)
    for i in range(n):
        for j in range(n):
            assert shortest_time(net, str(i), str(j)) == reference[i][j]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 100), st.integers(0, 100)), min_size=3, max_size=8, unique=True))
def test_inegalite_triangulaire(points):
    net = euclidean_network([(str(k), float(x), float(y)) for k, (x, y) in enumerate(points)])
    noeuds = net.nodes
    for a in noeuds:
        for b in noeuds:
            for c in noeuds:
                assert shortest_time(net, a, c) <= shortest_time(net, a, b) + shortest_time(net, b, c) + 1e-9

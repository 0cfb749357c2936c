"""
Tests du chargement des fichiers CSV et des contrôles de cohérence
"""

import math
import shutil

import pytest

from src.config import SimConfig
from src.core.model import Request, VehicleState
from src.core.network import euclidean_network
from src.exceptions import ErreurDonnees, NoeudInconnu
from src.parsers.chargeur_csv import (charger_donnees, charger_requetes, charger_vehicules, chemins_donnees,
                                      ecrire_requetes, lire_csv, valider_donnees)
from src.simulation.engine import SimData
from tests.conftest import DOSSIER_FIGURE, DOSSIER_VILLE


@pytest.fixture
def ville(tmp_path):
    """Copie modifiable des données de la ville"""
    dossier = tmp_path / 'ville'
    shutil.copytree(DOSSIER_VILLE, dossier)
    return dossier


def test_chargement_figure():
    donnees = charger_donnees(chemins_donnees(DOSSIER_FIGURE))
    assert [r.id for r in donnees.requests] == ['3']
    assert donnees.requests[0].max_wait == 10.0
    assert [v.id for v in donnees.vehicles] == ['V']
    assert donnees.net.coordonnees['1'] == (6.0, 8.0)


def test_chargement_ville():
    donnees = charger_donnees(chemins_donnees(DOSSIER_VILLE))
    assert len(donnees.net) == 10
    assert len(donnees.requests) == 20
    assert [v.id for v in donnees.vehicles] == ['1', '2', '3']
    assert [v.capacity for v in donnees.vehicles] == [4, 4, 2]
    # Qualité de service absente du fichier: valeurs par défaut
    assert all((r.max_wait, r.max_detour) == (300.0, 600.0) for r in donnees.requests)
    temps = [r.emergence_time for r in donnees.requests]
    assert temps == sorted(temps)


def test_qualite_de_service_de_la_configuration(ville):
    config = SimConfig(max_wait=120.0, max_detour=60.0)
    chemins = chemins_donnees(str(ville))
    donnees = charger_donnees(chemins, config)
    assert donnees.requests[0].max_wait == 120.0
    assert donnees.requests[0].max_detour == 60.0


def test_noeud_inconnu_nomme_fichier_et_ligne(ville):
    (ville / 'requests.csv').write_text(
        "request_id,origin_node,dest_node,emergence_time_s\n1,1,5,12\n2,1,99,30\n", encoding='utf-8')
    with pytest.raises(NoeudInconnu) as erreur:
        charger_donnees(chemins_donnees(str(ville)))
    assert erreur.value.ligne == 2
    assert erreur.value.noeud == '99'
    assert 'requests.csv (ligne 2): unknown node 99' in str(erreur.value)


def test_requete_en_double(ville):
    (ville / 'requests.csv').write_text(
        "request_id,origin_node,dest_node,emergence_time_s\n1,1,5,12\n1,2,3,30\n", encoding='utf-8')
    with pytest.raises(ErreurDonnees) as erreur:
        charger_donnees(chemins_donnees(str(ville)))
    assert erreur.value.ligne == 2


def test_requete_origine_egale_destination(ville):
    (ville / 'requests.csv').write_text(
        "request_id,origin_node,dest_node,emergence_time_s\n1,4,4,12\n", encoding='utf-8')
    with pytest.raises(ErreurDonnees) as erreur:
        charger_donnees(chemins_donnees(str(ville)))
    assert erreur.value.ligne == 1
    assert erreur.value.fichier.endswith('requests.csv')


def test_colonnes_manquantes(tmp_path):
    chemin = tmp_path / 'vehicles.csv'
    chemin.write_text("vehicle_id,capacity\n1,4\n", encoding='utf-8')
    with pytest.raises(ErreurDonnees) as erreur:
        lire_csv(str(chemin), ['vehicle_id', 'start_node'])
    assert 'start_node' in str(erreur.value)


def test_fichier_vide(tmp_path):
    chemin = tmp_path / 'requests.csv'
    chemin.write_text("", encoding='utf-8')
    with pytest.raises(ErreurDonnees):
        lire_csv(str(chemin), ['request_id'])
    with pytest.raises(FileNotFoundError):
        lire_csv(str(tmp_path / 'absent.csv'), ['request_id'])


def test_entete_seule_aucune_requete(tmp_path):
    net = euclidean_network([('a', 0.0, 0.0), ('b', 1.0, 0.0)])
    chemin = tmp_path / 'requests.csv'
    chemin.write_text("request_id,origin_node,dest_node,emergence_time_s\n", encoding='utf-8')
    assert charger_requetes(str(chemin), net) == []


@pytest.mark.parametrize('capacite', ['0', '2.5', 'quatre'])
def test_capacite_invalide(tmp_path, capacite):
    net = euclidean_network([('a', 0.0, 0.0), ('b', 1.0, 0.0)])
    chemin = tmp_path / 'vehicles.csv'
    chemin.write_text(f"vehicle_id,start_node,capacity\n1,a,{capacite}\n", encoding='utf-8')
    with pytest.raises(ErreurDonnees):
        charger_vehicules(str(chemin), net)


def test_capacite_par_defaut(tmp_path):
    net = euclidean_network([('a', 0.0, 0.0), ('b', 1.0, 0.0)])
    chemin = tmp_path / 'vehicles.csv'
    chemin.write_text("vehicle_id,start_node\n10,a\n9,b\n", encoding='utf-8')
    vehicules = charger_vehicules(str(chemin), net, SimConfig(capacity=3))
    assert [(v.id, v.capacity) for v in vehicules] == [('9', 3), ('10', 3)]


def test_validation_ville_coherente(town_data, capsys):
    assert valider_donnees(town_data, verbose=True) == []
    assert '[OK]' in capsys.readouterr().out


def test_validation_avertissements():
    net = euclidean_network([('a', 0.0, 0.0), ('b', 1.0, 0.0)])
    net.ajouter_noeud('isole', 5.0, 5.0)
    donnees = SimData(net, [Request('1', 'a', 'isole', 0.0)], [VehicleState('1', 'a')])
    avertissements = valider_donnees(donnees)
    assert len(avertissements) == 3
    with pytest.raises(ErreurDonnees):
        valider_donnees(SimData(net, [], []))


def test_ecriture_relue(tmp_path):
    net = euclidean_network([('a', 0.0, 0.0), ('b', 1.0, 0.0)])
    requetes = [Request('1', 'a', 'b', 12.5, 90.0, 45.0), Request('2', 'b', 'a', math.pi)]
    chemin = ecrire_requetes(requetes, str(tmp_path / 'sortie' / 'requests.csv'))
    relues = charger_requetes(chemin, net)
    assert [r.id for r in relues] == ['2', '1']
    assert relues[1] == requetes[0]
    assert relues[0].emergence_time == pytest.approx(math.pi)

"""
Configuration pytest: racine du dépôt dans sys.path, fixtures partagées
"""

import math
import os
import sys

import pytest

RACINE = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, RACINE)

from src.core.model import DROPOFF, Request, Route, Stop, VehicleState  # noqa: E402
from src.parsers.chargeur_csv import charger_donnees, charger_reseau, chemins_donnees  # noqa: E402

DOSSIER_FIGURE = os.path.join(RACINE, 'data', 'figure')
DOSSIER_VILLE = os.path.join(RACINE, 'data', 'town')

# Détour de la requête 3 tel que sa dépose soit due à t = 20 après une montée à t = sqrt(45)
DETOUR_FIGURE = 20.0 - math.sqrt(45) - math.sqrt(10)


@pytest.fixture
def figure_net():
    chemins = chemins_donnees(DOSSIER_FIGURE)
    return charger_reseau(chemins['nodes'], chemins['edges'])


@pytest.fixture
def figure_vehicle():
    """Véhicule en V avec les passagers 1 et 2 à bord, déposes dues à t = 20"""
    stops = (Stop('2', '2', DROPOFF, 20.0), Stop('1', '1', DROPOFF, 20.0))
    return VehicleState('V', 'V', capacity=4, onboard={'1': 20.0, '2': 20.0}, route=Route(stops, ()))


@pytest.fixture
def figure_request():
    return Request('3', '3O', '3D', 0.0, max_wait=10.0, max_detour=DETOUR_FIGURE)


@pytest.fixture
def town_data():
    return charger_donnees(chemins_donnees(DOSSIER_VILLE))

"""
Chargement des données de simulation depuis des fichiers CSV
nodes.csv, edges.csv, requests.csv, vehicles.csv avec diagnostics ligne par ligne
"""

import math
import os
from typing import Dict, Iterable, List, Optional, Sequence

import pandas as pd

from src.config import SimConfig
from src.core.model import Request, VehicleState
from src.core.network import Network, cle_id, load_network, shortest_time
from src.exceptions import ErreurDonnees, NoeudInconnu
from src.simulation.engine import SimData

FICHIERS = {
    'nodes': 'nodes.csv',
    'edges': 'edges.csv',
    'requests': 'requests.csv',
    'vehicles': 'vehicles.csv',
}
COLONNES = {
    'nodes': ['node_id'],
    'edges': ['from', 'to', 'travel_time_s'],
    'requests': ['request_id', 'origin_node', 'dest_node', 'emergence_time_s'],
    'vehicles': ['vehicle_id', 'start_node'],
}


def _vide(valeur) -> bool:
    return valeur is None or (isinstance(valeur, float) and math.isnan(valeur)) or str(valeur).strip() == ''


def _nombre(valeur, nom: str, fichier: str, ligne: int, defaut: Optional[float] = None) -> float:
    if _vide(valeur):
        if defaut is None:
            raise ErreurDonnees(f"valeur manquante pour '{nom}'", fichier, ligne)
        return defaut
    try:
        return float(valeur)
    except (TypeError, ValueError):
        raise ErreurDonnees(f"valeur numérique illisible pour '{nom}': {valeur}", fichier, ligne)


def lire_csv(chemin: str, colonnes: Sequence[str]) -> pd.DataFrame:
    """
    Lit un CSV (en-tête obligatoire, identifiants conservés en texte)

    Args:
        chemin: fichier à lire
        colonnes: colonnes obligatoires

    Returns:
        DataFrame
    """
    if not os.path.exists(chemin):
        raise FileNotFoundError(f"Fichier introuvable: {chemin}")
    try:
        tableau = pd.read_csv(chemin, dtype=str, encoding='utf-8', skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise ErreurDonnees("fichier vide (en-tête obligatoire)", chemin)
    tableau.columns = [c.strip() for c in tableau.columns]
    manquantes = [c for c in colonnes if c not in tableau.columns]
    if manquantes:
        raise ErreurDonnees(f"colonnes manquantes: {', '.join(manquantes)}", chemin)
    return tableau


def _enregistrements(tableau: pd.DataFrame) -> List[Dict]:
    return [{k: (None if _vide(v) else str(v).strip()) for k, v in ligne.items()}
            for ligne in tableau.to_dict('records')]


def charger_reseau(chemin_noeuds: str, chemin_arcs: str, verbose: bool = False) -> Network:
    """Construit le réseau à partir de nodes.csv et edges.csv"""
    noeuds = []
    for numero, e in enumerate(_enregistrements(lire_csv(chemin_noeuds, COLONNES['nodes'])), start=1):
        noeuds.append({'node_id': e['node_id'],
                       'x': None if e.get('x') is None else _nombre(e['x'], 'x', chemin_noeuds, numero),
                       'y': None if e.get('y') is None else _nombre(e['y'], 'y', chemin_noeuds, numero)})
    arcs = []
    for numero, e in enumerate(_enregistrements(lire_csv(chemin_arcs, COLONNES['edges'])), start=1):
        arcs.append({'from': e['from'], 'to': e['to'], 'travel_time_s': e['travel_time_s'],
                     'length_m': None if e.get('length_m') is None
                     else _nombre(e['length_m'], 'length_m', chemin_arcs, numero)})

    net = load_network(noeuds, arcs, chemin_noeuds, chemin_arcs)
    if verbose:
        print(f"[OK] Réseau: {len(net)} noeuds, {len(net.arcs)} arcs")
    return net


def charger_requetes(chemin: str, net: Network, config: Optional[SimConfig] = None,
                     verbose: bool = False) -> List[Request]:
    """
    Charge requests.csv

    Les champs de qualité de service absents prennent les valeurs de la configuration.

    Returns:
        requêtes triées par instant d'émergence puis identifiant
    """
    config = config or SimConfig()
    requetes = []
    vus = set()
    for numero, e in enumerate(_enregistrements(lire_csv(chemin, COLONNES['requests'])), start=1):
        rid = e['request_id']
        if rid is None:
            raise ErreurDonnees("identifiant de requête manquant", chemin, numero)
        if rid in vus:
            raise ErreurDonnees(f"requête {rid} en double", chemin, numero)
        vus.add(rid)
        for colonne in ('origin_node', 'dest_node'):
            if e[colonne] not in net:
                raise NoeudInconnu(e[colonne], chemin, numero)
        try:
            requetes.append(Request(
                rid, e['origin_node'], e['dest_node'],
                _nombre(e['emergence_time_s'], 'emergence_time_s', chemin, numero),
                _nombre(e.get('max_wait_s'), 'max_wait_s', chemin, numero, config.max_wait),
                _nombre(e.get('max_detour_s'), 'max_detour_s', chemin, numero, config.max_detour),
            ))
        except ErreurDonnees as erreur:
            if erreur.fichier is not None:
                raise
            raise ErreurDonnees(str(erreur), chemin, numero)

    requetes.sort(key=lambda r: (r.emergence_time, cle_id(r.id)))
    if verbose:
        print(f"[OK] Requêtes: {len(requetes)}")
    return requetes


def charger_vehicules(chemin: str, net: Network, config: Optional[SimConfig] = None,
                      verbose: bool = False) -> List[VehicleState]:
    """Charge vehicles.csv (capacité par défaut: fleet.capacity)"""
    config = config or SimConfig()
    vehicules = []
    vus = set()
    for numero, e in enumerate(_enregistrements(lire_csv(chemin, COLONNES['vehicles'])), start=1):
        vid = e['vehicle_id']
        if vid is None:
            raise ErreurDonnees("identifiant de véhicule manquant", chemin, numero)
        if vid in vus:
            raise ErreurDonnees(f"véhicule {vid} en double", chemin, numero)
        vus.add(vid)
        if e['start_node'] not in net:
            raise NoeudInconnu(e['start_node'], chemin, numero)
        capacite = _nombre(e.get('capacity'), 'capacity', chemin, numero, float(config.capacity))
        if capacite < 1 or capacite != int(capacite):
            raise ErreurDonnees(f"capacité invalide: {e.get('capacity')}", chemin, numero)
        vehicules.append(VehicleState(vid, e['start_node'], int(capacite)))

    vehicules.sort(key=lambda v: cle_id(v.id))
    if verbose:
        print(f"[OK] Véhicules: {len(vehicules)}")
    return vehicules


def chemins_donnees(dossier: str) -> Dict[str, str]:
    """Chemins standard des quatre fichiers dans un dossier de données"""
    return {cle: os.path.join(dossier, nom) for cle, nom in FICHIERS.items()}


def charger_donnees(chemins: Dict[str, str], config: Optional[SimConfig] = None,
                    verbose: bool = False) -> SimData:
    """
    Charge réseau, requêtes et flotte

    Args:
        chemins: clés 'nodes', 'edges', 'requests', 'vehicles'
        config: valeurs par défaut des champs optionnels
        verbose: affiche les comptes chargés

    Returns:
        SimData
    """
    try:
        net = charger_reseau(chemins['nodes'], chemins['edges'], verbose)
        requetes = charger_requetes(chemins['requests'], net, config, verbose)
        vehicules = charger_vehicules(chemins['vehicles'], net, config, verbose)
    except ErreurDonnees as e:
        print(f"[ERR] {e}")
        raise
    return SimData(net, requetes, vehicules)


def valider_donnees(data: SimData, verbose: bool = False) -> List[str]:
    """
    Contrôles de cohérence au-delà du chargement

    Returns:
        liste d'avertissements (vide si tout est cohérent); une flotte vide lève ErreurDonnees
    """
    if not data.vehicles:
        raise ErreurDonnees("aucun véhicule")
    avertissements = []
    for req in data.requests:
        if math.isinf(shortest_time(data.net, req.origin, req.destination)):
            avertissements.append(f"requête {req.id}: destination {req.destination} inaccessible "
                                  f"depuis {req.origin}")
        if req.emergence_time <= 0:
            avertissements.append(f"requête {req.id}: émergence à t <= 0 hors des époques")
    for v in data.vehicles:
        atteignables = sum(1 for n in data.net.nodes if not math.isinf(shortest_time(data.net, v.node, n)))
        if atteignables < len(data.net):
            avertissements.append(f"véhicule {v.id}: {len(data.net) - atteignables} noeud(s) inaccessible(s) "
                                  f"depuis {v.node}")
    if verbose:
        for message in avertissements:
            print(f"[WARN] {message}")
        if not avertissements:
            print("[OK] Données cohérentes")
    return avertissements


def ecrire_requetes(requetes: Iterable[Request], chemin: str) -> str:
    """Écrit un requests.csv (format de chargement)"""
    dossier = os.path.dirname(chemin)
    if dossier:
        os.makedirs(dossier, exist_ok=True)
    pd.DataFrame([{'request_id': r.id, 'origin_node': r.origin, 'dest_node': r.destination,
                   'emergence_time_s': r.emergence_time, 'max_wait_s': r.max_wait,
                   'max_detour_s': r.max_detour} for r in requetes],
                 columns=['request_id', 'origin_node', 'dest_node', 'emergence_time_s', 'max_wait_s',
                          'max_detour_s']).to_csv(chemin, index=False)
    return chemin

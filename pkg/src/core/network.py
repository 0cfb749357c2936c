"""
Réseau routier: graphe orienté, temps de parcours et plus courts chemins
Dijkstra mémorisé par source, réseau euclidien pour les instances jouets
"""

import heapq
import math
import threading
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Optional, Tuple

from src.exceptions import ErreurDonnees, NoeudInconnu

NodeId = Hashable


def cle_id(identifiant) -> Tuple:
    """
    Clé de tri déterministe pour les identifiants (noeuds, requêtes, véhicules)
    Les identifiants numériques sont triés par valeur, les autres par texte
    """
    texte = str(identifiant)
    if texte.lstrip('-').isdigit():
        return (0, int(texte), texte)
    return (1, 0, texte)


@dataclass(frozen=True)
class Arc:
    """Arc orienté du réseau"""
    origine: NodeId
    destination: NodeId
    travel_time: float
    length: float


@dataclass
class PathResult:
    """Résultat d'un plus court chemin"""
    total_time: float
    node_sequence: List[NodeId]


@dataclass
class _ArbreSource:
    temps: Dict[NodeId, float]
    longueurs: Dict[NodeId, float]
    predecesseurs: Dict[NodeId, NodeId]


class Network:
    """
    Graphe routier orienté avec métrique de temps de parcours

    Les requêtes de plus court chemin sont mémorisées par source (un Dijkstra complet
    au premier appel). Le cache tolère des remplissages concurrents identiques.
    """

    def __init__(self):
        self.coordonnees: Dict[NodeId, Optional[Tuple[float, float]]] = {}
        self.successeurs: Dict[NodeId, Dict[NodeId, Arc]] = {}
        self._cache: Dict[NodeId, _ArbreSource] = {}
        self._verrou = threading.Lock()

    @property
    def nodes(self) -> List[NodeId]:
        return sorted(self.coordonnees, key=cle_id)

    @property
    def arcs(self) -> List[Arc]:
        resultat = []
        for origine in self.nodes:
            for destination in sorted(self.successeurs[origine], key=cle_id):
                resultat.append(self.successeurs[origine][destination])
        return resultat

    def __contains__(self, noeud) -> bool:
        return noeud in self.coordonnees

    def __len__(self) -> int:
        return len(self.coordonnees)

    def ajouter_noeud(self, noeud: NodeId, x: Optional[float] = None, y: Optional[float] = None):
        if x is None or y is None:
            self.coordonnees[noeud] = None
        else:
            self.coordonnees[noeud] = (float(x), float(y))
        self.successeurs.setdefault(noeud, {})

    def ajouter_arc(self, origine: NodeId, destination: NodeId, travel_time: float,
                    length: Optional[float] = None):
        """Ajoute un arc; un arc en double conserve le temps minimal"""
        if origine not in self.coordonnees:
            raise NoeudInconnu(origine)
        if destination not in self.coordonnees:
            raise NoeudInconnu(destination)
        if not (travel_time > 0) or math.isinf(travel_time):
            raise ErreurDonnees(f"temps de parcours non positif ou infini ({travel_time}) "
                                f"sur l'arc {origine}->{destination}")
        # Longueur absente: 1 m/s pour que le VMT reste défini
        longueur = float(travel_time) if length is None or _est_nan(length) else float(length)
        existant = self.successeurs[origine].get(destination)
        if existant is None or travel_time < existant.travel_time:
            self.successeurs[origine][destination] = Arc(origine, destination, float(travel_time), longueur)
        self._cache.clear()

    def _arbre(self, source: NodeId) -> _ArbreSource:
        arbre = self._cache.get(source)
        if arbre is not None:
            return arbre
        if source not in self.coordonnees:
            raise NoeudInconnu(source)
        arbre = _dijkstra(self, source)
        with self._verrou:
            self._cache.setdefault(source, arbre)
        return arbre

    def next_hop(self, a: NodeId, b: NodeId) -> Optional[Arc]:
        """Premier arc du plus court chemin de a vers b (None si a == b ou inaccessible)"""
        chemin = shortest_path(self, a, b)
        if len(chemin.node_sequence) < 2:
            return None
        return self.successeurs[a][chemin.node_sequence[1]]


def _est_nan(valeur) -> bool:
    try:
        return math.isnan(float(valeur))
    except (TypeError, ValueError):
        return False


def _dijkstra(net: Network, source: NodeId) -> _ArbreSource:
    """Dijkstra avec tas binaire, égalités départagées par le plus petit identifiant"""
    temps = {source: 0.0}
    longueurs = {source: 0.0}
    predecesseurs: Dict[NodeId, NodeId] = {}
    visites = set()
    tas = [(0.0, cle_id(source), source)]

    while tas:
        d, _, noeud = heapq.heappop(tas)
        if noeud in visites:
            continue
        visites.add(noeud)
        for voisin in sorted(net.successeurs[noeud], key=cle_id):
            arc = net.successeurs[noeud][voisin]
            nd = d + arc.travel_time
            if nd < temps.get(voisin, math.inf):
                temps[voisin] = nd
                longueurs[voisin] = longueurs[noeud] + arc.length
                predecesseurs[voisin] = noeud
                heapq.heappush(tas, (nd, cle_id(voisin), voisin))

    return _ArbreSource(temps, longueurs, predecesseurs)


def load_network(node_records: Iterable[Dict], arc_records: Iterable[Dict],
                 fichier_noeuds: str = "nodes.csv", fichier_arcs: str = "edges.csv") -> Network:
    """
    Construit le réseau à partir d'enregistrements déjà parsés

    Args:
        node_records: dicts avec 'node_id' et optionnellement 'x', 'y'
        arc_records: dicts avec 'from', 'to', 'travel_time_s' et optionnellement 'length_m'

    Returns:
        Network complet
    """
    net = Network()
    for numero, enregistrement in enumerate(node_records, start=1):
        noeud = enregistrement['node_id']
        if noeud in net:
            raise ErreurDonnees(f"noeud {noeud} en double", fichier_noeuds, numero)
        x = enregistrement.get('x')
        y = enregistrement.get('y')
        if x is not None and _est_nan(x):
            x = None
        if y is not None and _est_nan(y):
            y = None
        net.ajouter_noeud(noeud, x, y)

    for numero, enregistrement in enumerate(arc_records, start=1):
        origine = enregistrement['from']
        destination = enregistrement['to']
        for noeud in (origine, destination):
            if noeud not in net:
                raise NoeudInconnu(noeud, fichier_arcs, numero)
        try:
            temps = float(enregistrement['travel_time_s'])
        except (TypeError, ValueError):
            raise ErreurDonnees(f"temps de parcours illisible: {enregistrement['travel_time_s']}",
                                fichier_arcs, numero)
        if not temps > 0 or math.isinf(temps):
            raise ErreurDonnees(f"temps de parcours non positif: {temps}", fichier_arcs, numero)
        net.ajouter_arc(origine, destination, temps, enregistrement.get('length_m'))

    return net


def shortest_time(net: Network, a: NodeId, b: NodeId) -> float:
    """Temps du plus court chemin de a vers b (+inf si inaccessible)"""
    if b not in net:
        raise NoeudInconnu(b)
    return net._arbre(a).temps.get(b, math.inf)


def shortest_length(net: Network, a: NodeId, b: NodeId) -> float:
    """Longueur (mètres) le long du plus court chemin en temps"""
    if b not in net:
        raise NoeudInconnu(b)
    return net._arbre(a).longueurs.get(b, math.inf)


def shortest_path(net: Network, a: NodeId, b: NodeId) -> PathResult:
    """Plus court chemin complet de a vers b; séquence vide si inaccessible"""
    arbre = net._arbre(a)
    if b not in net:
        raise NoeudInconnu(b)
    if b not in arbre.temps:
        return PathResult(math.inf, [])
    sequence = [b]
    while sequence[-1] != a:
        sequence.append(arbre.predecesseurs[sequence[-1]])
    sequence.reverse()
    return PathResult(arbre.temps[b], sequence)


def euclidean_network(points: List[Tuple[NodeId, float, float]]) -> Network:
    """
    Graphe complet orienté sur des points du plan, vitesse 1

    Args:
        points: liste de (identifiant, x, y)

    Returns:
        Network dont chaque arc a pour temps la distance euclidienne
    """
    net = Network()
    for noeud, x, y in points:
        if noeud in net:
            raise ErreurDonnees(f"identifiant {noeud} en double")
        net.ajouter_noeud(noeud, x, y)

    for a, xa, ya in points:
        for b, xb, yb in points:
            if a == b:
                continue
            distance = math.hypot(xb - xa, yb - ya)
            if distance > 0:
                net.ajouter_arc(a, b, distance, distance)
    return net

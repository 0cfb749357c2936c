"""
Génération de demande synthétique uniforme
Taux constant par minute, instants uniformes dans chaque minute, O-D uniformes sur les noeuds
"""

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from src.core.model import Request
from src.core.network import Network, cle_id
from src.exceptions import ErreurDonnees


@dataclass(frozen=True)
class DemandSpec:
    """Taux en requêtes par minute, horizon en secondes, graine"""
    rate: float
    horizon: float
    seed: int = 0
    max_wait: float = 300.0
    max_detour: float = 600.0

    def __post_init__(self):
        if self.rate < 0:
            raise ErreurDonnees(f"taux de demande négatif: {self.rate}")
        if self.horizon < 0:
            raise ErreurDonnees(f"horizon négatif: {self.horizon}")


def generate(spec: DemandSpec, net: Network) -> List[Request]:
    """
    Génère un flux de requêtes déterministe pour une graine donnée

    Le nombre de requêtes de la minute m vaut floor(rate * fin_m / 60) - floor(rate * debut_m / 60),
    soit exactement rate requêtes par minute complète.

    Args:
        spec: paramètres de la demande
        net: réseau (au moins deux noeuds)

    Returns:
        requêtes triées par instant d'émergence, identifiants "1", "2", ...
    """
    if spec.rate == 0 or spec.horizon == 0:
        return []
    noeuds = sorted(net.nodes, key=cle_id)
    if len(noeuds) < 2:
        raise ErreurDonnees("au moins deux noeuds sont nécessaires pour générer des requêtes")

    generateur = np.random.RandomState(spec.seed)
    tirages = []
    for minute in range(math.ceil(spec.horizon / 60.0)):
        debut = 60.0 * minute
        fin = min(60.0 * (minute + 1), spec.horizon)
        nombre = math.floor(spec.rate * fin / 60.0 + 1e-9) - math.floor(spec.rate * debut / 60.0 + 1e-9)
        if nombre <= 0:
            continue
        # Intervalle (debut, fin]: 1 - u est dans (0, 1]
        instants = debut + (fin - debut) * (1.0 - generateur.random_sample(nombre))
        origines = generateur.randint(0, len(noeuds), size=nombre)
        decalages = generateur.randint(1, len(noeuds), size=nombre)
        for t, o, d in sorted(zip(instants, origines, decalages)):
            tirages.append((float(t), noeuds[o], noeuds[(o + d) % len(noeuds)]))

    return [Request(str(k + 1), o, d, t, spec.max_wait, spec.max_detour)
            for k, (t, o, d) in enumerate(tirages)]

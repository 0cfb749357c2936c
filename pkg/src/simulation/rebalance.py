"""
Rééquilibrage des véhicules inactifs vers les origines des requêtes non servies
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List

from src.core.model import Request, VehicleState
from src.core.network import Network, NodeId, cle_id, shortest_time
from src.optim.transport import transportation_solve


@dataclass
class RebalancePlan:
    """Déplacements véhicule -> noeud cible et temps total de trajet à vide"""
    moves: Dict[str, NodeId] = field(default_factory=dict)
    objective: float = 0.0
    pairs: Dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.moves)


def rebalance(vehicles: Iterable[VehicleState], requests: Iterable[Request], net: Network) -> RebalancePlan:
    """
    Problème de transport entre véhicules inactifs et requêtes non servies

    tau_vr = temps de la position du véhicule à l'origine de la requête;
    min(|V|, |R|) véhicules sont envoyés, chacun vers une origine distincte.

    Args:
        vehicles: véhicules inactifs (route vide)
        requests: requêtes non servies
        net: réseau

    Returns:
        RebalancePlan
    """
    vehicules: List[VehicleState] = sorted(vehicles, key=lambda v: cle_id(v.id))
    requetes: List[Request] = sorted(requests, key=lambda r: cle_id(r.id))
    if not vehicules or not requetes:
        return RebalancePlan()

    couts = []
    for v in vehicules:
        ligne = []
        for r in requetes:
            ligne.append(v.offset + shortest_time(net, v.node, r.origin))
        couts.append(ligne)

    flot = transportation_solve(couts)
    plan = RebalancePlan(objective=flot.cost)
    for i, j in sorted(flot.pairs):
        plan.moves[vehicules[i].id] = requetes[j].origin
        plan.pairs[vehicules[i].id] = requetes[j].id
    return plan

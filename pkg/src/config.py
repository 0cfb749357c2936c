"""
Configuration du simulateur
Fichier plat `cle = valeur` (lu avec python-dotenv), surchargé par la ligne de commande

Variables d'environnement (.env) :
    RIDEPOOL_CONFIG=chemin/vers/simulation.conf
"""

import os
from dataclasses import asdict, dataclass, fields
from typing import Callable, Dict, Optional, Tuple

from dotenv import dotenv_values

from src.core.model import EpochConfig
from src.exceptions import ErreurConfiguration
from src.routing.ctsp import MODES, CtspPolicy

ALGORITHMES = ('la', 'la-mr', 'la-mr-ns', 'la-mr-ps', 'la-mr-ce', 'rtv', 'fast-rtv', 'cg')
FAST_RTV_TIMEOUT_DEFAUT = 10.0
VARIABLE_CONFIG = 'RIDEPOOL_CONFIG'


@dataclass
class SimConfig:
    """Paramètres d'une simulation (valeurs par défaut des réglages de référence)"""
    algo: str = 'la'
    interval: float = 60.0
    horizon: float = 3600.0
    visibility: float = 0.0
    drain: bool = True
    seed: int = 0
    fleet_size: int = 0
    capacity: int = 4
    max_wait: float = 300.0
    max_detour: float = 600.0
    ctsp_mode: str = 'oof'
    enumerate_limit: int = 12
    oof_threshold: int = 6
    lrp_eta: int = 12
    penalty_M: float = 1e7
    node_limit: int = 20000
    tolerance: float = 1e-7
    rtv_timeout: Optional[float] = None
    rtv_reassign: bool = True
    cg_time_limit: Optional[float] = None
    cg_subset_cap: int = 1000
    carryover_kappa: float = 2.0
    ce_U: Optional[float] = None
    ce_labels: int = 1
    rebalance: bool = True
    threads: int = 1

    def validate(self):
        """Vérifie la cohérence des valeurs; lève ErreurConfiguration"""
        positifs = {'epoch.interval': self.interval, 'sim.horizon': self.horizon,
                    'request.max_wait': self.max_wait, 'fleet.capacity': self.capacity,
                    'solver.penalty_M': self.penalty_M, 'solver.tolerance': self.tolerance,
                    'threads': self.threads, 'ce.labels_per_node': self.ce_labels,
                    'cg.subset_cap': self.cg_subset_cap, 'solver.node_limit': self.node_limit}
        for cle, valeur in positifs.items():
            if not valeur > 0:
                raise ErreurConfiguration(f"doit être strictement positif (reçu {valeur})", cle)
        for cle, valeur in (('request.max_detour', self.max_detour), ('sim.visibility', self.visibility),
                            ('fleet.size', self.fleet_size)):
            if valeur < 0:
                raise ErreurConfiguration(f"doit être positif ou nul (reçu {valeur})", cle)
        if self.interval > self.horizon:
            raise ErreurConfiguration("l'intervalle dépasse l'horizon", 'epoch.interval')
        if self.algo not in ALGORITHMES:
            raise ErreurConfiguration(f"algorithme inconnu '{self.algo}' (attendu: {', '.join(ALGORITHMES)})",
                                      'algo')
        if self.carryover_kappa <= 1:
            raise ErreurConfiguration("doit être > 1", 'la.carryover_kappa')
        for cle, valeur in (('rtv.timeout_s', self.rtv_timeout), ('cg.time_limit_s', self.cg_time_limit),
                            ('ce.U', self.ce_U)):
            if valeur is not None and valeur < 0:
                raise ErreurConfiguration(f"doit être positif (reçu {valeur})", cle)
        self.policy()
        return self

    def policy(self) -> CtspPolicy:
        return CtspPolicy(self.ctsp_mode, self.enumerate_limit, self.oof_threshold, self.lrp_eta)

    def epoch_config(self) -> EpochConfig:
        return EpochConfig(self.interval, self.horizon)

    @property
    def U(self) -> float:
        return self.ce_U if self.ce_U is not None else self.penalty_M

    @property
    def timeout_enumeration(self) -> Optional[float]:
        """Délai de génération des trajets (Fast RTV: 10 s par défaut)"""
        if self.algo == 'fast-rtv' and self.rtv_timeout is None:
            return FAST_RTV_TIMEOUT_DEFAUT
        if self.algo == 'rtv':
            return None
        return self.rtv_timeout

    def as_dict(self) -> Dict[str, object]:
        """Configuration résolue sous forme cle -> valeur (clés du fichier)"""
        inverse = {attribut: cle for cle, (attribut, _) in CLES.items()}
        return {inverse[nom]: valeur for nom, valeur in asdict(self).items()}


def _booleen(texte: str) -> bool:
    valeur = texte.strip().lower()
    if valeur in ('1', 'true', 'yes', 'oui', 'on'):
        return True
    if valeur in ('0', 'false', 'no', 'non', 'off'):
        return False
    raise ValueError(f"booléen attendu, reçu '{texte}'")


def _optionnel(conversion: Callable) -> Callable:
    def convertir(texte: str):
        if texte.strip().lower() in ('', 'none', 'null'):
            return None
        return conversion(texte)
    return convertir


def _entier(texte: str) -> int:
    return int(float(texte)) if float(texte).is_integer() else int(texte)


def _mode(texte: str) -> str:
    texte = texte.strip().lower()
    if texte not in MODES:
        raise ValueError(f"mode inconnu '{texte}'")
    return texte


CLES: Dict[str, Tuple[str, Callable]] = {
    'algo': ('algo', lambda t: t.strip().lower()),
    'epoch.interval': ('interval', float),
    'sim.horizon': ('horizon', float),
    'sim.visibility': ('visibility', float),
    'sim.drain': ('drain', _booleen),
    'sim.seed': ('seed', _entier),
    'fleet.size': ('fleet_size', _entier),
    'fleet.capacity': ('capacity', _entier),
    'request.max_wait': ('max_wait', float),
    'request.max_detour': ('max_detour', float),
    'ctsp.mode': ('ctsp_mode', _mode),
    'ctsp.enumerate_limit': ('enumerate_limit', _entier),
    'ctsp.oof_threshold': ('oof_threshold', _entier),
    'ctsp.lrp_eta': ('lrp_eta', _entier),
    'solver.penalty_M': ('penalty_M', float),
    'solver.node_limit': ('node_limit', _entier),
    'solver.tolerance': ('tolerance', float),
    'rtv.timeout_s': ('rtv_timeout', _optionnel(float)),
    'rtv.reassign': ('rtv_reassign', _booleen),
    'cg.time_limit_s': ('cg_time_limit', _optionnel(float)),
    'cg.subset_cap': ('cg_subset_cap', _entier),
    'la.carryover_kappa': ('carryover_kappa', float),
    'ce.U': ('ce_U', _optionnel(float)),
    'ce.labels_per_node': ('ce_labels', _entier),
    'rebalance.enabled': ('rebalance', _booleen),
    'threads': ('threads', _entier),
}

assert {a for a, _ in CLES.values()} == {f.name for f in fields(SimConfig)}


def _appliquer(valeurs: Dict[str, object], cle: str, texte) -> None:
    if cle not in CLES:
        raise ErreurConfiguration("clé de configuration inconnue", cle)
    if texte is None:
        raise ErreurConfiguration("valeur manquante", cle)
    attribut, conversion = CLES[cle]
    try:
        valeurs[attribut] = conversion(str(texte))
    except (TypeError, ValueError) as e:
        raise ErreurConfiguration(f"valeur mal formée '{texte}' ({e})", cle)


def parse_config(chemin: Optional[str] = None, surcharges: Optional[Dict[str, object]] = None) -> SimConfig:
    """
    Construit la configuration: défauts < fichier < surcharges

    Args:
        chemin: fichier `cle = valeur`; si None, RIDEPOOL_CONFIG est consulté
        surcharges: valeurs issues de la ligne de commande (clés du fichier)

    Returns:
        SimConfig validée
    """
    valeurs: Dict[str, object] = {}
    chemin = chemin or os.getenv(VARIABLE_CONFIG) or None

    if chemin:
        if not os.path.exists(chemin):
            raise FileNotFoundError(f"Fichier de configuration introuvable: {chemin}")
        for cle, texte in dotenv_values(chemin).items():
            _appliquer(valeurs, cle.strip(), texte)

    for cle, texte in (surcharges or {}).items():
        if texte is None:
            continue
        _appliquer(valeurs, cle, texte)

    try:
        config = SimConfig(**valeurs)
    except Exception as e:
        raise ErreurConfiguration(str(e))
    return config.validate()

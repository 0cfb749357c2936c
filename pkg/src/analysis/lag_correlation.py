"""
Étude de corrélation retardée du nombre de requêtes affectées par époque
Régression linéaire des paires (x_t, x_t+lag), courbe des pentes en fonction du retard
"""

import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.exceptions import ErreurDonnees
from src.generators.graphiques import generer_courbe_pentes, generer_nuage_retard

COLONNE_AFFECTEES = 'assigned'


@dataclass
class LagResult:
    """Droite des moindres carrés pour un retard donné (en époques)"""
    lag: int
    slope: float
    intercept: float
    r: float
    pairs: List[Tuple[float, float]]
    degenerate: bool = False


def lag_regression(series: Sequence[float], lag: int) -> LagResult:
    """
    Moindres carrés ordinaires sur les paires (x_t, x_t+lag)

    Une variance nulle des abscisses donne une pente 0 et un résultat marqué dégénéré.

    Args:
        series: nombre de requêtes affectées par époque
        lag: retard en époques (>= 1)

    Returns:
        LagResult
    """
    if lag < 1:
        raise ValueError(f"le retard doit être >= 1 (reçu {lag})")
    if len(series) <= lag:
        raise ValueError(f"série trop courte ({len(series)} valeurs) pour un retard de {lag}")

    valeurs = np.asarray(series, dtype=float)
    x = valeurs[:-lag]
    y = valeurs[lag:]
    mx, my = x.mean(), y.mean()
    sxx = float(np.sum((x - mx) ** 2))
    syy = float(np.sum((y - my) ** 2))
    sxy = float(np.sum((x - mx) * (y - my)))
    paires = [(float(a), float(b)) for a, b in zip(x, y)]

    if sxx == 0.0:
        return LagResult(lag, 0.0, float(my), 0.0, paires, degenerate=True)
    pente = sxy / sxx
    r = sxy / np.sqrt(sxx * syy) if syy > 0 else 0.0
    return LagResult(lag, pente, float(my - pente * mx), float(np.clip(r, -1.0, 1.0)), paires,
                     degenerate=syy == 0.0)


def slope_curve(series: Sequence[float], max_lag: int) -> List[Tuple[int, float]]:
    """Pentes des régressions pour les retards 1..max_lag"""
    if not 1 <= max_lag < len(series):
        raise ValueError(f"retard maximal {max_lag} incompatible avec une série de {len(series)} époques")
    return [(lag, lag_regression(series, lag).slope) for lag in range(1, max_lag + 1)]


def lire_series_epoques(chemin: str, colonne: str = COLONNE_AFFECTEES) -> List[float]:
    """Lit la série des requêtes affectées dans un epochs.csv produit par `simulate`"""
    if not os.path.exists(chemin):
        raise FileNotFoundError(f"Fichier introuvable: {chemin}")
    tableau = pd.read_csv(chemin)
    if colonne not in tableau.columns:
        print(f"[ERR] {chemin}: colonne '{colonne}' absente")
        raise ErreurDonnees(f"colonne '{colonne}' absente", fichier=chemin)
    if 'index' in tableau.columns:
        tableau = tableau.sort_values('index')
    return [float(v) for v in tableau[colonne]]


def analyser_retards(series: Sequence[float], max_lag: int, prefixe: str,
                     lags_graphiques: Optional[Sequence[int]] = None, verbose: bool = False) -> Dict[str, str]:
    """
    Produit P_slopes.csv, P_slopes.svg et un nuage P_lag<k>.svg par retard

    Args:
        series: série par époque
        max_lag: retard maximal
        prefixe: préfixe des fichiers de sortie
        lags_graphiques: retards à tracer (tous par défaut)
        verbose: affiche les fichiers écrits

    Returns:
        nom logique -> chemin du fichier
    """
    courbe = slope_curve(series, max_lag)
    dossier = os.path.dirname(prefixe)
    if dossier:
        os.makedirs(dossier, exist_ok=True)

    fichiers = {'slopes_csv': f"{prefixe}_slopes.csv"}
    resultats = {lag: lag_regression(series, lag) for lag in range(1, max_lag + 1)}
    pd.DataFrame([{'lag': lag, 'slope': res.slope, 'intercept': res.intercept, 'r': res.r,
                   'pairs': len(res.pairs), 'degenerate': res.degenerate}
                  for lag, res in resultats.items()]).to_csv(fichiers['slopes_csv'], index=False)

    fichiers['slopes_svg'] = generer_courbe_pentes(courbe, f"{prefixe}_slopes.svg")
    for lag in (lags_graphiques if lags_graphiques is not None else sorted(resultats)):
        fichiers[f"lag{lag}"] = generer_nuage_retard(resultats[lag], f"{prefixe}_lag{lag}.svg")

    if verbose:
        minimum = min(courbe, key=lambda p: p[1])
        print(f"[OK] Pente au retard 1: {courbe[0][1]:+.3f}; minimum {minimum[1]:+.3f} au retard {minimum[0]}")
        for nom, chemin in fichiers.items():
            print(f"   {nom}: {chemin}")
    return fichiers

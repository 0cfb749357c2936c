"""
Génération des graphiques de simulation (SVG)
Nuages de corrélation retardée, courbe des pentes, comparaison des algorithmes
"""

import os
from typing import List, Optional, Tuple

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import pandas as pd

COULEURS = ['#2c3e50', '#e74c3c', '#3498db', '#2ecc71', '#f39c12', '#9b59b6', '#1abc9c', '#7f8c8d']


# Style commun aux figures de simulation; le sel fixe les identifiants SVG d'une exécution à l'autre
STYLE_SIMULATION = {
    'figure.figsize': (10, 5),
    'axes.grid': True,
    'grid.alpha': 0.3,
    'axes.spines.top': False,
    'axes.spines.right': False,
    'axes.prop_cycle': matplotlib.cycler(color=COULEURS),
    'lines.markersize': 5,
    'svg.hashsalt': 'ridepool',
}


def configurer_style_graphique():
    """Applique le style des figures de simulation (époques en abscisse, SVG reproductible)"""
    plt.style.use('seaborn-v0_8-whitegrid')
    plt.rcParams.update(STYLE_SIMULATION)


def _sauvegarder(fig, fichier_sortie: str) -> str:
    dossier = os.path.dirname(fichier_sortie)
    if dossier:
        os.makedirs(dossier, exist_ok=True)
    plt.tight_layout()
    fig.savefig(fichier_sortie, format='svg', metadata={'Date': None})
    plt.close(fig)
    return fichier_sortie


def generer_nuage_retard(resultat, fichier_sortie: Optional[str] = None) -> str:
    """
    Nuage des paires (x_t, x_t+lag) et droite de régression

    Args:
        resultat: LagResult
        fichier_sortie: chemin du SVG (nom automatique si None)

    Returns:
        Chemin du fichier généré
    """
    configurer_style_graphique()
    fig, ax = plt.subplots()

    x = [p[0] for p in resultat.pairs]
    y = [p[1] for p in resultat.pairs]
    ax.scatter(x, y, s=18, alpha=0.6, color='#3498db', label='Époques')
    if x:
        bornes = [min(x), max(x)]
        ax.plot(bornes, [resultat.intercept + resultat.slope * b for b in bornes], color='#e74c3c',
                linewidth=2, label=f"pente {resultat.slope:+.3f}, r = {resultat.r:+.3f}")

    ax.set_xlabel('Requêtes affectées (époque t)', fontweight='bold')
    ax.set_ylabel(f'Requêtes affectées (époque t+{resultat.lag})', fontweight='bold')
    ax.set_title(f'Corrélation retardée - retard {resultat.lag}', fontweight='bold', pad=20)
    ax.grid(True, alpha=0.3, linestyle='--')
    ax.legend(loc='best')

    return _sauvegarder(fig, fichier_sortie or f"output/graphiques/lag{resultat.lag}.svg")


def generer_courbe_pentes(courbe: List[Tuple[int, float]], fichier_sortie: Optional[str] = None,
                          interval: Optional[float] = None) -> str:
    """
    Pentes des régressions en fonction du retard

    Args:
        courbe: liste (retard, pente)
        fichier_sortie: chemin du SVG
        interval: durée d'une époque en secondes (axe en minutes si fournie)

    Returns:
        Chemin du fichier généré
    """
    configurer_style_graphique()
    fig, ax = plt.subplots()

    retards = [lag * interval / 60.0 if interval else lag for lag, _ in courbe]
    pentes = [pente for _, pente in courbe]
    ax.plot(retards, pentes, marker='o', linewidth=2, markersize=5, color='#2c3e50', label='Pente')
    ax.axhline(y=0.0, color='#7f8c8d', linestyle='--', linewidth=1)

    # Minimum de la courbe
    if courbe:
        i = min(range(len(pentes)), key=lambda k: pentes[k])
        ax.annotate(f'{pentes[i]:+.3f}', xy=(retards[i], pentes[i]), xytext=(0, -15),
                    textcoords='offset points', ha='center', fontsize=9, fontweight='bold')

    ax.set_xlabel('Retard (min)' if interval else 'Retard (époques)', fontweight='bold')
    ax.set_ylabel('Pente de régression', fontweight='bold')
    ax.set_title('Pente en fonction du retard', fontweight='bold', pad=20)
    ax.grid(True, alpha=0.3, linestyle='--')
    ax.legend(loc='best')

    return _sauvegarder(fig, fichier_sortie or "output/graphiques/slopes.svg")


def generer_graphique_comparaison(tableau: pd.DataFrame, fichier_sortie: Optional[str] = None) -> str:
    """
    Barres du taux de service et du VMT relatif par algorithme

    Args:
        tableau: sortie de compare_algorithms
        fichier_sortie: chemin du SVG

    Returns:
        Chemin du fichier généré
    """
    configurer_style_graphique()
    fig, (ax_sr, ax_vmt) = plt.subplots(1, 2, figsize=(12, 5))

    algos = list(tableau['algo'])
    couleurs = [COULEURS[i % len(COULEURS)] for i in range(len(algos))]
    taux = [100.0 * v for v in tableau['service_rate']]
    barres = ax_sr.bar(algos, taux, color=couleurs)
    for barre, valeur in zip(barres, taux):
        ax_sr.annotate(f'{valeur:.1f}', xy=(barre.get_x() + barre.get_width() / 2, valeur), xytext=(0, 4),
                       textcoords='offset points', ha='center', fontsize=9, fontweight='bold')
    ax_sr.set_ylabel('Taux de service (%)', fontweight='bold')
    ax_sr.set_title('Taux de service', fontweight='bold')

    ax_vmt.bar(algos, list(tableau['vmt_pct']), color=couleurs)
    ax_vmt.axhline(y=100.0, color='#7f8c8d', linestyle='--', linewidth=1)
    ax_vmt.set_ylabel('VMT relatif (%)', fontweight='bold')
    ax_vmt.set_title('Distance parcourue', fontweight='bold')

    for ax in (ax_sr, ax_vmt):
        ax.grid(True, alpha=0.3, linestyle='--', axis='y')
        ax.tick_params(axis='x', rotation=30)

    return _sauvegarder(fig, fichier_sortie or "output/graphiques/comparaison.svg")

"""
Script maître: démonstration complète sur le jeu de données fourni
Validation des données → Simulation → Comparaison des algorithmes → Corrélation retardée

Usage:
    python main.py                      # workflow de démonstration sur data/town
    python main.py simulate --data ...  # toute autre commande est transmise à la CLI
"""

import os
import sys
from datetime import datetime

# Charger les variables d'environnement depuis .env si disponible
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass  # python-dotenv pas installé, on continue sans

from src.cli import CODE_SUCCES, main as cli_main

DOSSIER_DONNEES = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data', 'town')
DOSSIER_SORTIE = 'output'
ALGOS_COMPARES = ['la', 'la-mr', 'la-mr-ce', 'rtv']
HORIZON_DEMO = 1800


def afficher_banniere():
    """Rappelle le jeu de données, les algorithmes comparés et le dossier de sortie"""
    print("\n" + "="*80)
    print("RIDEPOOL - démonstration sur la ville jouet")
    print(f"  Données     : {DOSSIER_DONNEES}")
    print(f"  Algorithmes : {', '.join(ALGOS_COMPARES)} (horizon {HORIZON_DEMO} s)")
    print(f"  Sorties     : {DOSSIER_SORTIE}/")
    print("="*80)


def afficher_etape(numero, total, titre, arguments):
    """Titre de l'étape et commande équivalente de la CLI"""
    print(f"\n[{numero}/{total}] {titre}")
    print(f"      python -m src.cli {' '.join(arguments)}\n")


def executer_avec_gestion_erreur(arguments, nom_etape):
    """Exécute une commande de la CLI et rapporte son issue"""
    code = cli_main(arguments)
    if code == CODE_SUCCES:
        print(f"\n[OK] {nom_etape} : SUCCÈS")
        return True
    print(f"\n[ERR] {nom_etape} : ERREUR (code {code})")
    return False


def workflow_demonstration():
    """Enchaîne les sous-commandes sur le jeu de données de la ville jouet"""
    etapes = [
        ("Validation des données", ['validate', '--data', DOSSIER_DONNEES]),
        ("Simulation LA-MR-CE", ['simulate', '--data', DOSSIER_DONNEES, '--algo', 'la-mr-ce',
                                 '--set', f'sim.horizon={HORIZON_DEMO}',
                                 '--out', os.path.join(DOSSIER_SORTIE, 'run')]),
        ("Comparaison des algorithmes", ['compare', '--data', DOSSIER_DONNEES, '--algos', ','.join(ALGOS_COMPARES),
                                         '--set', f'sim.horizon={HORIZON_DEMO}',
                                         '--out', os.path.join(DOSSIER_SORTIE, 'compare')]),
        ("Corrélation retardée", ['analyze-lag', '--epochs', os.path.join(DOSSIER_SORTIE, 'run', 'epochs.csv'),
                                  '--max-lag', '10', '--out-prefix', os.path.join(DOSSIER_SORTIE, 'lag', 'lag')]),
    ]
    for numero, (titre, arguments) in enumerate(etapes, start=1):
        afficher_etape(numero, len(etapes), titre, arguments)
        if not executer_avec_gestion_erreur(arguments, titre):
            return False
    return True


def main():
    """Point d'entrée principal"""
    if len(sys.argv) > 1:
        return cli_main(sys.argv[1:])

    afficher_banniere()
    debut = datetime.now()
    succes = workflow_demonstration()
    duree = (datetime.now() - debut).total_seconds()

    print("\n" + "="*80)
    if succes:
        print(f"[OK] WORKFLOW TERMINÉ en {duree:.1f} s - résultats dans {DOSSIER_SORTIE}/")
    else:
        print(f"[ERR] WORKFLOW INTERROMPU après {duree:.1f} s")
    print("="*80 + "\n")
    return 0 if succes else 1


if __name__ == "__main__":
    sys.exit(main())

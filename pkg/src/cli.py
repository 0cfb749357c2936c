"""
Interface en ligne de commande du simulateur de covoiturage

Sous-commandes:
    simulate     simulation complète, écrit metrics.csv, epochs.csv, events.csv et manifest.json
    compare      plusieurs algorithmes sur les mêmes données (tableau + CSV + SVG)
    gen-demand   demande synthétique uniforme vers un requests.csv
    analyze-lag  étude de corrélation retardée d'un epochs.csv (ou d'une simulation fraîche)
    validate     contrôles de cohérence des fichiers de données

Codes de sortie: 0 succès, 2 erreur de validation (données, configuration, fichier absent), 1 autre erreur.
"""

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

# Charger les variables d'environnement depuis .env si disponible
try:
    from dotenv import load_dotenv
except ImportError:
    load_dotenv = None

from src.analysis.lag_correlation import analyser_retards, lire_series_epoques
from src.config import ALGORITHMES, CLES, SimConfig, VARIABLE_CONFIG, parse_config
from src.exceptions import ErreurConfiguration, ErreurDonnees
from src.generators.graphiques import generer_graphique_comparaison
from src.parsers.chargeur_csv import (charger_donnees, charger_reseau, charger_vehicules, chemins_donnees,
                                      ecrire_requetes, valider_donnees)
from src.simulation.demand import DemandSpec, generate
from src.simulation.engine import SimData, compare_algorithms, run_simulation, write_outputs

VERSION = '1.0.0'
CODE_SUCCES = 0
CODE_EXECUTION = 1
CODE_VALIDATION = 2


@dataclass
class RunManifest:
    """Tout ce qu'il faut pour rejouer une exécution à l'identique"""
    command: str
    config: Dict[str, object]
    inputs: Dict[str, Dict[str, str]] = field(default_factory=dict)
    version: str = VERSION

    def ecrire(self, dossier: str) -> str:
        os.makedirs(dossier, exist_ok=True)
        chemin = os.path.join(dossier, 'manifest.json')
        with open(chemin, 'w', encoding='utf-8') as f:
            json.dump(asdict(self), f, indent=2, ensure_ascii=False, sort_keys=True)
        return chemin


def empreinte(chemin: str) -> str:
    """SHA-256 du contenu d'un fichier"""
    h = hashlib.sha256()
    with open(chemin, 'rb') as f:
        for bloc in iter(lambda: f.read(1 << 16), b''):
            h.update(bloc)
    return h.hexdigest()


def construire_manifest(commande: str, config: SimConfig, chemins: Dict[str, str]) -> RunManifest:
    return RunManifest(
        command=commande,
        config=config.as_dict(),
        inputs={nom: {'path': chemin, 'sha256': empreinte(chemin)}
                for nom, chemin in sorted(chemins.items()) if os.path.exists(chemin)},
    )


def _aide_cles() -> str:
    defaut = SimConfig().as_dict()
    lignes = ["Clés de configuration (fichier `cle = valeur`, ou --set cle=valeur):"]
    for cle in CLES:
        lignes.append(f"  {cle:<24} défaut: {defaut[cle]}")
    lignes.append(f"\nLe fichier par défaut est lu dans la variable d'environnement {VARIABLE_CONFIG}.")
    return "\n".join(lignes)


def _options_communes(parser: argparse.ArgumentParser):
    parser.add_argument('--config', help="fichier de configuration `cle = valeur`")
    parser.add_argument('--set', dest='surcharges', action='append', default=[], metavar='CLE=VALEUR',
                        help="surcharge d'une clé de configuration (répétable)")
    parser.add_argument('--algo', choices=ALGORITHMES, help="algorithme d'affectation")
    parser.add_argument('--seed', help="graine (sim.seed)")
    parser.add_argument('--quiet', action='store_true', help="n'affiche que les erreurs")
    parser.add_argument('--data', help="dossier contenant nodes.csv, edges.csv, requests.csv, vehicles.csv")
    for nom in ('nodes', 'edges', 'requests', 'vehicles'):
        parser.add_argument(f'--{nom}', help=f"chemin de {nom}.csv (prioritaire sur --data)")


def construire_parser() -> argparse.ArgumentParser:
    epilogue = _aide_cles()
    formateur = argparse.RawDescriptionHelpFormatter
    parser = argparse.ArgumentParser(prog='ridepool', description="Simulateur d'affectation en covoiturage",
                                     epilog=epilogue, formatter_class=formateur)
    parser.add_argument('--version', action='version', version=f'%(prog)s {VERSION}')
    sous = parser.add_subparsers(dest='commande', required=True)

    p = sous.add_parser('simulate', help="simulation multi-époques", epilog=epilogue, formatter_class=formateur)
    _options_communes(p)
    p.add_argument('--out', default='output/run', help="dossier de sortie")

    p = sous.add_parser('compare', help="comparaison d'algorithmes", epilog=epilogue, formatter_class=formateur)
    _options_communes(p)
    p.add_argument('--algos', default='la,la-mr-ce', help="liste séparée par des virgules")
    p.add_argument('--out', default='output/compare', help="dossier de sortie")

    p = sous.add_parser('gen-demand', help="demande synthétique uniforme", epilog=epilogue,
                        formatter_class=formateur)
    _options_communes(p)
    p.add_argument('--rate', type=float, required=True, help="requêtes par minute")
    p.add_argument('--horizon', type=float, help="durée en secondes (défaut: sim.horizon)")
    p.add_argument('--out', default='requests.csv', help="fichier requests.csv produit")

    p = sous.add_parser('analyze-lag', help="corrélation retardée des affectations par époque",
                        epilog=epilogue, formatter_class=formateur)
    _options_communes(p)
    p.add_argument('--epochs', help="epochs.csv produit par simulate")
    p.add_argument('--simulate', action='store_true',
                   help="simule une demande uniforme (--rate) sur le réseau et la flotte de --data")
    p.add_argument('--rate', type=float, help="requêtes par minute (avec --simulate)")
    p.add_argument('--max-lag', type=int, required=True, help="retard maximal en époques")
    p.add_argument('--out-prefix', default='output/lag/lag', help="préfixe des fichiers produits")

    p = sous.add_parser('validate', help="contrôle des fichiers de données", epilog=epilogue,
                        formatter_class=formateur)
    _options_communes(p)
    return parser


def _surcharges(args) -> Dict[str, object]:
    valeurs: Dict[str, object] = {}
    for texte in args.surcharges:
        if '=' not in texte:
            raise ErreurConfiguration(f"surcharge mal formée '{texte}' (attendu cle=valeur)")
        cle, valeur = texte.split('=', 1)
        valeurs[cle.strip()] = valeur.strip()
    if args.algo:
        valeurs['algo'] = args.algo
    if args.seed is not None:
        valeurs['sim.seed'] = args.seed
    return valeurs


def _chemins(args) -> Dict[str, str]:
    chemins = chemins_donnees(args.data) if args.data else {}
    for nom in ('nodes', 'edges', 'requests', 'vehicles'):
        if getattr(args, nom, None):
            chemins[nom] = getattr(args, nom)
    manquants = [nom for nom in ('nodes', 'edges', 'requests', 'vehicles') if nom not in chemins]
    if manquants:
        raise ErreurDonnees(f"fichiers non indiqués: {', '.join(manquants)} (utiliser --data ou --{manquants[0]})")
    return chemins


def commande_simulate(args, config: SimConfig, verbose: bool) -> int:
    chemins = _chemins(args)
    data = charger_donnees(chemins, config, verbose)
    resultat = run_simulation(config, data, verbose)
    fichiers = write_outputs(resultat, args.out)
    manifest = construire_manifest('simulate', config, chemins).ecrire(args.out)
    if verbose:
        for chemin in list(fichiers.values()) + [manifest]:
            print(f"   {chemin}")
    return CODE_SUCCES


def commande_compare(args, config: SimConfig, verbose: bool) -> int:
    algos = [a.strip() for a in args.algos.split(',') if a.strip()]
    inconnus = [a for a in algos if a not in ALGORITHMES]
    if inconnus or not algos:
        raise ErreurConfiguration(f"algorithme(s) inconnu(s): {', '.join(inconnus) or '(liste vide)'}", 'algos')
    chemins = _chemins(args)
    data = charger_donnees(chemins, config, verbose)
    tableau = compare_algorithms(config, data, algos, verbose)

    os.makedirs(args.out, exist_ok=True)
    tableau.to_csv(os.path.join(args.out, 'compare.csv'), index=False)
    generer_graphique_comparaison(tableau, os.path.join(args.out, 'compare.svg'))
    construire_manifest('compare ' + ','.join(algos), config, chemins).ecrire(args.out)
    print(tableau.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    return CODE_SUCCES


def commande_gen_demand(args, config: SimConfig, verbose: bool) -> int:
    chemins = chemins_donnees(args.data) if args.data else {}
    if args.nodes:
        chemins['nodes'] = args.nodes
    if args.edges:
        chemins['edges'] = args.edges
    if 'nodes' not in chemins or 'edges' not in chemins:
        raise ErreurDonnees("gen-demand nécessite le réseau (--data ou --nodes/--edges)")
    net = charger_reseau(chemins['nodes'], chemins['edges'], verbose)
    spec = DemandSpec(args.rate, args.horizon if args.horizon is not None else config.horizon, config.seed,
                      config.max_wait, config.max_detour)
    requetes = generate(spec, net)
    ecrire_requetes(requetes, args.out)
    if verbose:
        print(f"[OK] {len(requetes)} requêtes écrites dans {args.out}")
    return CODE_SUCCES


def commande_analyze_lag(args, config: SimConfig, verbose: bool) -> int:
    if args.simulate:
        if args.rate is None:
            raise ErreurConfiguration("--rate est obligatoire avec --simulate", 'rate')
        chemins = chemins_donnees(args.data) if args.data else {}
        for nom in ('nodes', 'edges', 'vehicles'):
            if getattr(args, nom, None):
                chemins[nom] = getattr(args, nom)
        manquants = [n for n in ('nodes', 'edges', 'vehicles') if n not in chemins]
        if manquants:
            raise ErreurDonnees(f"fichiers non indiqués: {', '.join(manquants)}")
        net = charger_reseau(chemins['nodes'], chemins['edges'], verbose)
        vehicules = charger_vehicules(chemins['vehicles'], net, config, verbose)
        requetes = generate(DemandSpec(args.rate, config.horizon, config.seed, config.max_wait,
                                       config.max_detour), net)
        resultat = run_simulation(config, SimData(net, requetes, vehicules), verbose)
        series = resultat.metrics.assigned_per_epoch
    elif args.epochs:
        series = lire_series_epoques(args.epochs)
    else:
        raise ErreurConfiguration("indiquer --epochs ou --simulate", 'epochs')

    analyser_retards(series, args.max_lag, args.out_prefix, verbose=verbose)
    return CODE_SUCCES


def commande_validate(args, config: SimConfig, verbose: bool) -> int:
    data = charger_donnees(_chemins(args), config, verbose)
    valider_donnees(data, verbose)
    return CODE_SUCCES


COMMANDES = {
    'simulate': commande_simulate,
    'compare': commande_compare,
    'gen-demand': commande_gen_demand,
    'analyze-lag': commande_analyze_lag,
    'validate': commande_validate,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Point d'entrée de la ligne de commande

    Args:
        argv: arguments (sys.argv[1:] par défaut)

    Returns:
        code de sortie (0, 1 ou 2)
    """
    if load_dotenv is not None:
        load_dotenv()

    args = construire_parser().parse_args(argv)
    verbose = not args.quiet
    try:
        config = parse_config(args.config, _surcharges(args))
        return COMMANDES[args.commande](args, config, verbose)
    except (ErreurDonnees, ErreurConfiguration, FileNotFoundError) as e:
        print(f"[ERR] {e}", file=sys.stderr)
        return CODE_VALIDATION
    except Exception as e:
        print(f"[ERR] {type(e).__name__}: {e}", file=sys.stderr)
        if verbose:
            import traceback
            traceback.print_exc()
        return CODE_EXECUTION


if __name__ == '__main__':
    sys.exit(main())

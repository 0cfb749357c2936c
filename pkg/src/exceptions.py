"""
Exceptions du simulateur de covoiturage
Toutes dérivent de ErreurRidepool pour permettre un traitement global dans la CLI
"""

from typing import Optional


class ErreurRidepool(Exception):
    """Erreur de base du projet"""
    pass


class ErreurDonnees(ErreurRidepool, ValueError):
    """Données d'entrée invalides (fichier CSV, ligne fautive)"""

    def __init__(self, message: str, fichier: Optional[str] = None, ligne: Optional[int] = None):
        self.fichier = fichier
        self.ligne = ligne
        prefixe = ""
        if fichier:
            prefixe = f"{fichier}"
            if ligne is not None:
                prefixe += f" (ligne {ligne})"
            prefixe += ": "
        super().__init__(prefixe + message)


class NoeudInconnu(ErreurDonnees, KeyError):
    """Identifiant de noeud absent du réseau"""

    def __init__(self, noeud, fichier: Optional[str] = None, ligne: Optional[int] = None):
        self.noeud = noeud
        super().__init__(f"unknown node {noeud}", fichier, ligne)

    def __str__(self):
        return self.args[0]


class ErreurConfiguration(ErreurRidepool, ValueError):
    """Clé de configuration inconnue ou valeur mal formée"""

    def __init__(self, message: str, cle: Optional[str] = None):
        self.cle = cle
        super().__init__(f"{cle}: {message}" if cle else message)


class ErreurSolveur(ErreurRidepool):
    """Échec d'un solveur d'optimisation"""
    pass


class InfaisableError(ErreurSolveur):
    """Le programme linéaire n'admet aucune solution"""
    pass


class NonBorneError(ErreurSolveur):
    """Le programme linéaire est non borné"""
    pass


class SolutionInvalide(ErreurRidepool):
    """Solution d'époque violant une contrainte (véhicule, couverture ou échéance)"""
    pass

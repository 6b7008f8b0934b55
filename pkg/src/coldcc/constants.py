"""Physical constants, masses and unit conversions.

Internal convention: lengths in bohr, energies in kelvin, angular momenta in
units of hbar.  Radial Schroedinger equations are written as
psi'' = Q psi with Q = (W - E) / h22mu, where h22mu = hbar^2/(2 mu) expressed
in K bohr^2 for the relevant reduced mass.  That keeps every module in
(K, bohr) units with a single mass-dependent coefficient.
"""
import math

# CODATA 2018
KELVIN_HARTREE = 3.1668115634556e-06   # k_B / E_h
AMU_ME = 1822.888486209                # electron masses per unified amu
BOHR_CM = 5.29177210903e-09            # bohr radius in cm
ATU_S = 2.4188843265857e-17            # atomic time unit in s
KELVIN_CM1 = 0.6950348004              # k_B/(h c), cm^-1 per K

# atomic masses, amu (AME2020)
MASS_O17 = 16.9991317565
MASS_HE3 = 3.0160293201

# sigma[bohr^2] * v[bohr/atu] -> cm^3/s
RATE_AU_TO_CM3S = BOHR_CM**3 / ATU_S


def reduced_mass_amu(m1: float, m2: float) -> float:
    return m1 * m2 / (m1 + m2)


def h22mu_kelvin(mu_amu: float) -> float:
    """hbar^2 / (2 mu) in K bohr^2 for a reduced mass given in amu."""
    return 1.0 / (2.0 * mu_amu * AMU_ME * KELVIN_HARTREE)


def wavenumber(energy_k: float, mu_amu: float) -> float:
    """Channel wavenumber k in bohr^-1 for kinetic energy in K.

    energy_k may be negative, in which case the magnitude of the imaginary
    wavenumber kappa is returned.
    """
    return math.sqrt(abs(energy_k) / h22mu_kelvin(mu_amu))


def velocity_au(energy_k: float, mu_amu: float) -> float:
    """Relative collision velocity in bohr per atomic time unit."""
    e_h = energy_k * KELVIN_HARTREE
    return math.sqrt(2.0 * e_h / (mu_amu * AMU_ME))


# default collision partners: a helium-3 atom and a homonuclear dimer of
# mass-17 oxygen (even rotational manifold, nuclear-spin symmetry)
MU_DIATOM_AMU = reduced_mass_amu(MASS_O17, MASS_O17)
MU_COLLISION_AMU = reduced_mass_amu(MASS_HE3, 2.0 * MASS_O17)

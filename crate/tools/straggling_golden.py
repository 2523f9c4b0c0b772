"""Independent SI evaluation of the straggling coefficient of water at 90 MeV.

T = sum_i N_i (1/(4 pi eps0))^2 * 4 pi e^4 Z_i * (4 I_i / (3 m_e v^2)) * ln(2 m_e v^2 / I_i)

Everything is computed in SI, then converted to MeV^2/cm.
"""
import math

from scipy import constants as c

e = c.e
eps0 = c.epsilon_0
me = c.m_e
mp_mev = 938.272
mev = 1e6 * e

E = 90.0
gamma = 1 + E / mp_mev
beta2 = 1 - 1 / gamma**2
v2 = beta2 * c.c**2

rho = 1000.0  # kg/m^3
elements = {  # mass fraction, Z, I (eV), atomic mass (g/mol)
    "H": (0.111894, 1, 19.2, 1.008),
    "O": (0.888106, 8, 95.0, 15.999),
}
T = 0.0
for w, Z, I_ev, M in elements.values():
    N = rho * w / (M * 1e-3) * c.N_A  # atoms / m^3
    I = I_ev * e
    term = (1 / (4 * math.pi * eps0)) ** 2 * N * 4 * math.pi * e**4 * Z
    term *= 4 * I / (3 * me * v2) * math.log(2 * me * v2 / I)
    T += term  # J^2 / m
print(repr(T / mev**2 / 100.0))  # MeV^2 / cm

"""Independent evaluation of the Molière screening parameter for O at 80 MeV."""
from scipy import constants as c

alpha = c.fine_structure
me_c2 = c.m_e * c.c**2 / (1e6 * c.e)  # MeV
mp = 938.272
Z = 8
E = 80.0
gamma = 1 + E / mp
beta = (1 - 1 / gamma**2) ** 0.5
pc = gamma * beta * mp  # MeV
chi0 = 1.13 * alpha * Z ** (1 / 3) * me_c2 / pc
a = Z * alpha / beta
print(repr(chi0**2 * (1.13 + 3.76 * a**2)))

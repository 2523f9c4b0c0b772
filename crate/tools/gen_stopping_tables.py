"""Generate per-element mass stopping-power tables from the Bethe formula.

S/rho = K Z/A / beta^2 * (1/2 ln(2 m_e c^2 beta^2 gamma^2 T_max / I^2) - beta^2)

No shell or density corrections. Log-spaced grid from 0.5 to 400 MeV.
Writes data/stopping/<symbol>.csv with header E_MeV,S_MeV_cm2_per_g.
"""
import math
import pathlib

K = 0.307075  # MeV cm^2 / mol
ME = 0.51099895  # MeV
MP = 938.27208816  # MeV

ELEMENTS = [  # symbol, Z, I (eV), atomic mass (g/mol)
    ("H", 1, 19.2, 1.008),
    ("C", 6, 78.0, 12.011),
    ("N", 7, 82.0, 14.007),
    ("O", 8, 95.0, 15.999),
    ("Na", 11, 149.0, 22.990),
    ("Mg", 12, 156.0, 24.305),
    ("P", 15, 173.0, 30.974),
    ("S", 16, 180.0, 32.06),
    ("Cl", 17, 174.0, 35.45),
    ("Ar", 18, 188.0, 39.948),
    ("K", 19, 190.0, 39.098),
    ("Ca", 20, 191.0, 40.078),
]

POINTS = 241
E_LO, E_HI = 0.5, 400.0


def bethe(z, i_ev, a, e):
    gamma = 1.0 + e / MP
    beta2 = 1.0 - 1.0 / gamma**2
    bg2 = beta2 * gamma**2
    r = ME / MP
    t_max = 2 * ME * bg2 / (1 + 2 * gamma * r + r * r)
    i = i_ev * 1e-6
    arg = 2 * ME * bg2 * t_max / (i * i)
    return K * z / a / beta2 * (0.5 * math.log(arg) - beta2)


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "stopping"
    out.mkdir(parents=True, exist_ok=True)
    energies = [E_LO * (E_HI / E_LO) ** (k / (POINTS - 1)) for k in range(POINTS)]
    energies[-1] = E_HI
    for sym, z, i_ev, a in ELEMENTS:
        lines = ["E_MeV,S_MeV_cm2_per_g"]
        for e in energies:
            s = bethe(z, i_ev, a, e)
            assert s > 0, (sym, e)
            lines.append(f"{e:.10g},{s:.10g}")
        (out / f"{sym}.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()

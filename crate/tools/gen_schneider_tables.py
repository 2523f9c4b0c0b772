"""Write the HU -> density and HU -> composition tables used for CT phantoms.

Density: piecewise-linear sections, density = offset + factor * (factor_offset + HU).
Composition: mass fractions (percent) per HU bin. Soft-tissue bins are tabulated;
bone bins between 120 and 1500 HU interpolate linearly (in HU at bin centre)
between a marrow-rich bone and cortical bone.
"""
import pathlib

SYMBOLS = ["H", "C", "N", "O", "Na", "Mg", "P", "S", "Cl", "Ar", "K", "Ca"]

DENSITY = [  # hu_min, hu_max, offset, factor, factor_offset
    (-1024, -1000, 0.00121, 0.0, 0.0),
    (-1000, -98, 0.00121, 0.001029700665188, 1000.0),
    (-98, 15, 1.018, 0.000893, 0.0),
    (15, 23, 1.03, 0.0, 0.0),
    (23, 101, 1.003, 0.001169, 0.0),
    (101, 2001, 1.017, 0.000592, 0.0),
    (2001, 3000, 2.201, 0.0005, -2000.0),
]

SOFT = [  # hu_min, hu_max, {element: percent}
    (-1024, -950, {"N": 75.5, "O": 23.2, "Ar": 1.3}),
    (-950, -120, {"H": 10.3, "C": 10.5, "N": 3.1, "O": 74.9, "Na": 0.2, "P": 0.2, "S": 0.3, "Cl": 0.3, "K": 0.2}),
    (-120, -82, {"H": 11.6, "C": 68.1, "N": 0.2, "O": 19.8, "Na": 0.1, "S": 0.1, "Cl": 0.1}),
    (-82, -52, {"H": 11.3, "C": 56.7, "N": 0.9, "O": 30.8, "Na": 0.1, "S": 0.1, "Cl": 0.1}),
    (-52, -22, {"H": 11.0, "C": 45.8, "N": 1.5, "O": 41.1, "Na": 0.1, "P": 0.1, "S": 0.2, "Cl": 0.2}),
    (-22, 8, {"H": 10.8, "C": 35.6, "N": 2.2, "O": 50.9, "P": 0.1, "S": 0.2, "Cl": 0.2}),
    (8, 19, {"H": 10.6, "C": 28.4, "N": 2.6, "O": 57.8, "P": 0.1, "S": 0.2, "Cl": 0.2, "K": 0.1}),
    (19, 80, {"H": 10.3, "C": 13.4, "N": 3.0, "O": 72.3, "Na": 0.2, "P": 0.2, "S": 0.2, "Cl": 0.2, "K": 0.2}),
    (80, 120, {"H": 9.4, "C": 20.7, "N": 6.2, "O": 62.2, "Na": 0.6, "P": 0.4, "S": 0.3, "Cl": 0.2}),
]

MARROW_BONE = {"H": 9.5, "C": 45.5, "N": 2.5, "O": 35.5, "Na": 0.1, "P": 2.1, "S": 0.1, "Cl": 0.1, "K": 0.1, "Ca": 4.5}
CORTICAL = {"H": 3.4, "C": 15.5, "N": 4.2, "O": 43.5, "Na": 0.1, "Mg": 0.2, "P": 10.3, "S": 0.3, "Ca": 22.5}
BONE_EDGES = [120, 200, 300, 400, 500, 600, 700, 800, 900, 1000, 1100, 1200, 1300, 1400, 1500, 3000]


def bone_bins():
    lo_c, hi_c = 0.5 * (BONE_EDGES[0] + BONE_EDGES[1]), 1500.0
    for lo, hi in zip(BONE_EDGES, BONE_EDGES[1:]):
        t = min(1.0, (0.5 * (lo + hi) - lo_c) / (hi_c - lo_c)) if hi < 3000 else 1.0
        mix = {s: round((1 - t) * MARROW_BONE.get(s, 0.0) + t * CORTICAL.get(s, 0.0), 2) for s in SYMBOLS}
        mix["O"] = round(mix["O"] + 100.0 - sum(mix.values()), 2)
        yield lo, hi, mix


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "schneider"
    out.mkdir(parents=True, exist_ok=True)
    lines = ["hu_min,hu_max,offset_g_cm3,factor_g_cm3_per_hu,factor_offset_hu"]
    lines += [",".join(f"{v:g}" if isinstance(v, int) else repr(v) for v in row) for row in DENSITY]
    (out / "density.csv").write_text("\n".join(lines) + "\n")
    lines = ["hu_min,hu_max," + ",".join(f"{s}_percent" for s in SYMBOLS)]
    for lo, hi, w in list(SOFT) + list(bone_bins()):
        assert abs(sum(w.values()) - 100.0) < 1e-9, (lo, sum(w.values()))
        lines.append(f"{lo},{hi}," + ",".join(f"{w.get(s, 0.0):g}" for s in SYMBOLS))
    (out / "composition.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()

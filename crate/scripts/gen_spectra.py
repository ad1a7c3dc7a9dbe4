"""Regenerates the bundled stand-in spectra under data/.

Water values follow the shape of published pure-water absorption in the
visible band (cm^-1). Cone curves are piecewise-Gaussian color-matching
shapes mapped to R, G, B. Flavor curves are smooth synthetic extinction
profiles in arbitrary units; they are qualitative stand-ins, not measurements.
"""
import math
import os

ROOT = os.path.join(os.path.dirname(__file__), "..", "data")
GRID = list(range(380, 781, 5))

WATER_M = {  # m^-1
    380: 0.0110, 390: 0.0080, 400: 0.00663, 410: 0.00473, 420: 0.00454,
    430: 0.00495, 440: 0.00635, 450: 0.00922, 460: 0.00979, 470: 0.0106,
    480: 0.0127, 490: 0.0150, 500: 0.0204, 510: 0.0325, 520: 0.0409,
    530: 0.0434, 540: 0.0474, 550: 0.0565, 560: 0.0619, 570: 0.0695,
    580: 0.0896, 590: 0.1351, 600: 0.2224, 610: 0.2644, 620: 0.2755,
    630: 0.2916, 640: 0.3108, 650: 0.3400, 660: 0.4100, 670: 0.4390,
    680: 0.4650, 690: 0.5160, 700: 0.6240, 710: 0.8270, 720: 1.2310,
    730: 1.7800, 740: 2.4700, 750: 2.6200, 760: 2.5500, 770: 2.4500,
    780: 2.3600,
}


def g(x, mu, s1, s2):
    s = s1 if x < mu else s2
    return math.exp(-0.5 * ((x - mu) / s) ** 2)


def gauss(x, mu, s):
    return math.exp(-0.5 * ((x - mu) / s) ** 2)


CONES = {
    "r": lambda x: 1.056 * g(x, 599.8, 37.9, 31.0),
    "g": lambda x: 0.821 * g(x, 568.8, 46.9, 40.5) + 0.286 * g(x, 530.9, 16.3, 31.1),
    "b": lambda x: 1.217 * g(x, 437.0, 11.8, 36.0) + 0.681 * g(x, 459.0, 26.0, 13.8),
}

# (baseline, [(amplitude, center, width), ...])
FLAVORS = {
    "blueberry": (0.06, [(1.00, 540, 40), (0.55, 440, 40), (0.04, 630, 40)]),
    "strawberry": (0.04, [(0.90, 520, 45), (0.55, 430, 45)]),
    "chicken": (0.004, [(0.03, 420, 35)]),
    "apple": (0.01, [(0.55, 420, 40), (0.12, 480, 35)]),
    "apricot": (0.01, [(0.95, 440, 45), (0.35, 500, 30)]),
    "banana": (0.005, [(0.18, 430, 40), (0.04, 500, 40)]),
    "beef": (0.10, [(0.55, 420, 70), (0.25, 520, 60)]),
    "carrot": (0.01, [(1.00, 460, 40), (0.45, 500, 25)]),
    "mango": (0.01, [(1.10, 440, 45), (0.20, 500, 30)]),
    "parsnip": (0.008, [(0.20, 420, 45), (0.03, 480, 40)]),
    "pea": (0.05, [(0.45, 430, 40), (0.40, 650, 45)]),
    "squash": (0.01, [(0.85, 450, 45), (0.30, 500, 30)]),
    "sweet_potato": (0.015, [(0.80, 455, 45), (0.35, 505, 30)]),
}


def write(path, pairs):
    with open(path, "w") as f:
        f.write("wavelength_nm,value\n")
        for wl, v in pairs:
            f.write(f"{wl},{v:.6g}\n")


def main():
    os.makedirs(os.path.join(ROOT, "flavors"), exist_ok=True)
    write(os.path.join(ROOT, "water.csv"),
          [(wl, v / 100.0) for wl, v in sorted(WATER_M.items())])
    for name, f in CONES.items():
        write(os.path.join(ROOT, f"cones_{name}.csv"), [(wl, f(wl)) for wl in GRID])
    for name, (base, peaks) in FLAVORS.items():
        vals = [(wl, base + sum(a * gauss(wl, c, w) for a, c, w in peaks)) for wl in GRID]
        write(os.path.join(ROOT, "flavors", f"{name}.csv"), vals)


if __name__ == "__main__":
    main()

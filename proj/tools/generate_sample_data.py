"""Writes the synthetic Egypt-like sample inputs under data/.

History is generated from a known two-layer power-law system with small multiplicative noise,
so calibration on it is well posed. Run from the repository root: python tools/generate_sample_data.py
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
COUNTRY = "EGY"
ORIGIN = 1989
HIST_YEARS = list(range(1990, 2020))
PROJ_YEARS = list(range(2020, 2051))
SCENARIOS = ["SSP1-1.9", "SSP1-2.6", "SSP2-4.5", "SSP3-7.0", "SSP4-6.0", "SSP5-8.5"]

# Generating model in fraction units for water stress; exponents in predictor order.
TRUE = {
    "LAgr": (-0.012, {"P": 0.10, "GDP": -0.30, "Ltot": 0.05}),
    "Exp": (0.030, {"P": 1.00, "GDP": 0.80}),
    "Imp": (0.010, {"P": 0.60, "GDP": 0.50}),
    "Land": (0.002, {"P": 0.10, "GDP": 0.03, "Dom": 0.15}),
    "Dom": (0.005, {"P": 0.25, "GDP": 0.12, "LAgr": 0.20, "W": 0.30, "Land": 0.50, "T": -0.05}),
    "W": (-0.001, {"P": -0.08, "GDP": -0.07, "Dom": 0.20, "Land": 0.40, "T": 0.35, "Pr": -0.07}),
    "FSC": (0.002, {"Dom": 0.10, "Exp": -0.015, "Imp": 0.03}),
}
LEVEL_1990 = {"LAgr": 39.0, "Exp": 1.2e6, "Imp": 8.5e6, "Land": 2650.0, "Dom": 3.1e7, "W": 1.16, "FSC": 3200.0}


def power(name, t, x):
    trend, ex = TRUE[name]
    return math.exp(trend * t + sum(b * math.log(x[k]) for k, b in ex.items()))


def scale_to(name, level, t, x):
    return level / power(name, t, x)


def exogenous(rng):
    n = len(HIST_YEARS)
    k = np.arange(n)
    pop = 57000.0 * np.exp(0.0195 * k + rng.normal(0, 0.004, n))
    gdp = 2050.0 * np.exp(0.022 * k + rng.normal(0, 0.01, n))
    ltot = 15500.0 * np.exp(0.021 * k + rng.normal(0, 0.005, n))
    temp = 22.2 + 0.03 * k + rng.normal(0, 0.15, n)
    prec = 20.0 * np.exp(rng.normal(0, 0.2, n))
    return pop, gdp, ltot, temp, prec


def simulate_history(rng):
    pop, gdp, ltot, temp, prec = exogenous(rng)
    a0 = {}
    rows = []
    dom_prev = LEVEL_1990["Dom"] / 1.02
    gdp_prev = gdp[0] / 1.02
    for i, year in enumerate(HIST_YEARS):
        t = year - ORIGIN
        x = {"P": pop[i], "GDP": gdp_prev, "Ltot": ltot[i], "T": temp[i], "Pr": prec[i]}

        def eq(name, extra):
            vals = {**x, **extra}
            if name not in a0:
                a0[name] = scale_to(name, LEVEL_1990[name], t, vals)
            return a0[name] * power(name, t, vals)

        noise = lambda s=0.01: math.exp(rng.normal(0, s))
        lagr = eq("LAgr", {}) * noise()
        exp_q = eq("Exp", {}) * noise(0.03)
        imp_q = eq("Imp", {}) * noise(0.02)
        land = eq("Land", {"Dom": dom_prev}) * noise(0.005)
        if "Dom" not in a0:
            a0["Dom"] = scale_to("Dom", LEVEL_1990["Dom"], t, {**x, "LAgr": lagr, "W": LEVEL_1990["W"], "Land": land})
            a0["W"] = scale_to("W", LEVEL_1990["W"], t, {**x, "Dom": LEVEL_1990["Dom"], "Land": land})
        dom, w = LEVEL_1990["Dom"], LEVEL_1990["W"]
        for _ in range(200):
            dom = a0["Dom"] * power("Dom", t, {**x, "LAgr": lagr, "W": w, "Land": land})
            w = a0["W"] * power("W", t, {**x, "Dom": dom, "Land": land})
        dom *= noise(0.01)
        w *= noise(0.01)
        fsc = eq("FSC", {"Dom": dom, "Exp": exp_q, "Imp": imp_q}) * noise(0.005)
        rows.append({
            "country": COUNTRY,
            "year": year,
            "agricultural_land_1000ha": round(land, 3),
            "gdp_per_capita_usd2015": round(gdp[i], 3),
            "labour_total_thousands": round(ltot[i], 3),
            "labour_agr_pct": round(lagr, 4),
            "population_thousands": round(pop[i], 3),
            "food_supply_kcal_capita_day": round(fsc, 2),
            "production_tonnes": round(dom),
            "export_tonnes": round(exp_q),
            "import_tonnes": round(imp_q),
            "precipitation_mm": round(prec[i], 3),
            "temperature_c": round(temp[i], 3),
            # Source tables report percent; ingestion rescales values above 5.
            "water_stress": round(100.0 * w, 3),
        })
        dom_prev = dom
        gdp_prev = gdp[i]
    return rows, gdp[-1], ltot[-1], temp, prec


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        wr = csv.DictWriter(f, fieldnames=header, lineterminator="\n")
        wr.writeheader()
        for r in rows:
            wr.writerow(r)


def drivers(gdp_last, ltot_last, temp_hist, prec_hist):
    growth = {1: 0.035, 2: 0.028, 3: 0.012, 4: 0.018, 5: 0.042}
    labour = {1: 0.012, 2: 0.015, 3: 0.019, 4: 0.016, 5: 0.011}
    warming = {"1.9": 0.008, "2.6": 0.012, "4.5": 0.022, "6.0": 0.028, "7.0": 0.034, "8.5": 0.045}
    t_base = float(np.mean(temp_hist[-10:]))
    p_base = float(np.mean(prec_hist[-10:]))
    rows = []
    for name in SCENARIOS:
        ssp = int(name[3])
        rcp = name.split("-")[1]
        for k, year in enumerate(PROJ_YEARS, start=1):
            rows.append({
                "country": COUNTRY,
                "scenario": name,
                "year": year,
                "gdp_per_capita_usd2015": round(gdp_last * math.exp(growth[ssp] * k), 3),
                "labour_thousands": round(ltot_last * math.exp(labour[ssp] * k), 3),
                "temperature_c": round(t_base + warming[rcp] * k, 4),
                "precipitation_mm": round(p_base * (1.0 - 0.02 * warming[rcp] * k)
                                          * (1.0 + 0.05 * math.sin(0.9 * k)), 4),
            })
    return rows


PYRAMID_2020 = [12400, 11800, 10300, 9000, 8300, 8400, 8000, 6900, 5900, 5100, 4500, 3900, 3100, 2300,
                1400, 700, 320, 110, 25, 4, 0.5]
AGE_LABELS = [f"{5 * a}-{5 * a + 4}" for a in range(20)] + ["100+"]


def pyramid_rows():
    rows = []
    for sex, share in (("F", 0.49), ("M", 0.51)):
        for label, total in zip(AGE_LABELS, PYRAMID_2020):
            s = share if label not in ("80-84", "85-89", "90-94", "95-99", "100+") else (0.56 if sex == "F" else 0.44)
            rows.append({"country": COUNTRY, "year": 2020, "sex": sex, "age_group": label,
                         "population_thousands": round(total * s, 3)})
    return rows


def migration_rows():
    net = {"Low": -100.0, "Medium": -200.0, "High": -300.0}
    return [{"country": COUNTRY, "level": lvl, "period_start_year": y, "net_thousands": v}
            for lvl, v in net.items() for y in range(2020, 2050, 5)]


VITAL_PARAMS = {
    "theta_tfr": {"d": 0.35, "l": 1.8, "u": 6.5, "w1": 0.3, "w2": 1.0},
    "theta_e0": {"d": 2.5, "l": 55.0, "u": 85.0, "w1": 5.0, "w2": 5.0},
    "var_tfr": 0.02,
    "var_e0": 0.3,
    "e0_gap": {"mean": 4.5, "var": 0.25},
    "fertility_schedule": {"15-19": 0.012, "20-24": 0.048, "25-29": 0.058, "30-34": 0.044,
                           "35-39": 0.026, "40-44": 0.010, "45-49": 0.002},
    "srb": 1.05,
    "start_tfr": 3.2,
    "start_e0_f": 74.0,
}

TABLE_EGY = {
    "FSC": (68.4069, 0.0160, {"Dom": 0.2419, "Exp": -0.0149, "Imp": 0.0310}, 0.9953),
    "W": (0.2254, -0.0010, {"P": -0.0799, "GDP": -0.0705, "Dom": 0.2065, "Land": 0.3869, "T": 0.3480,
                            "Pr": -0.0695}, 0.4456),
    "Dom": (5.6151, 0.0045, {"P": 0.2275, "GDP": 0.1202, "LAgr": 0.1957, "W": 0.3373, "Land": 0.4858,
                             "T": -0.0483}, 0.9427),
    "Land": (0.9429, 0.0022, {"P": 0.1131, "GDP": 0.0299, "Dom": 0.1873}, 0.8921),
    "LAgr": (2.8004, 0.0030, {"P": 0.0580, "GDP": 0.0676, "Ltot": 0.1580}, 0.5811),
    "Exp": (0.0011, 0.0296, {"P": 1.3062, "GDP": 0.8897}, 0.9270),
    "Imp": (0.4020, 0.0124, {"P": 0.5991, "GDP": 0.5627}, 0.8948),
}
TABLE_ETH = {
    "FSC": (58.4825, 0.0272, {"Dom": 0.2795, "Exp": 0.0181, "Imp": 0.0198}, 0.9978),
    "W": (0.0039, 0.0128, {"P": 0.5546, "GDP": -0.2472, "Dom": -0.0900, "Land": 1.4905, "T": 1.1754,
                           "Pr": -0.8630}, 0.9574),
    "Dom": (0.0005, 0.0177, {"P": 0.6245, "GDP": 0.2818, "LAgr": 0.4972, "W": -0.1111, "Land": 0.2077,
                             "T": 1.7254}, 0.9780),
    "Land": (0.1796, 0.0224, {"P": 1.1185, "GDP": -0.0599, "Dom": -0.3790}, 0.9021),
    "LAgr": (1.1033, 0.0054, {"P": 0.2827, "GDP": -0.1051, "Ltot": 0.5119}, 0.9962),
    "Exp": (0.0127, 0.0235, {"P": 0.8926, "GDP": 0.5334}, 0.7362),
    "Imp": (0.0889, 0.0199, {"P": 0.6915, "GDP": 0.5877}, 0.6414),
}


def coefficient_json(country, table):
    return {
        "country": country,
        "trend_origin_year": ORIGIN,
        "water_stress_unit": "percent",
        "equations": {k: {"a0": a0, "trend": tr, "exponents": ex, "r2": r2}
                      for k, (a0, tr, ex, r2) in table.items()},
    }


def main():
    rng = np.random.default_rng(20240101)
    DATA.mkdir(exist_ok=True)
    hist, gdp_last, ltot_last, temp, prec = simulate_history(rng)
    write_csv(DATA / "egy_history.csv", list(hist[0].keys()), hist)
    drv = drivers(gdp_last, ltot_last, temp, prec)
    write_csv(DATA / "egy_drivers.csv", list(drv[0].keys()), drv)
    pyr = pyramid_rows()
    write_csv(DATA / "egy_pyramid_2020.csv", list(pyr[0].keys()), pyr)
    mig = migration_rows()
    write_csv(DATA / "egy_migration.csv", list(mig[0].keys()), mig)
    (DATA / "egy_vital_params.json").write_text(json.dumps(VITAL_PARAMS, indent=2) + "\n")
    (DATA / "coefficients_egy.json").write_text(json.dumps(coefficient_json("EGY", TABLE_EGY), indent=2) + "\n")
    (DATA / "coefficients_eth.json").write_text(json.dumps(coefficient_json("ETH", TABLE_ETH), indent=2) + "\n")


if __name__ == "__main__":
    main()

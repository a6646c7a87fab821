#!/usr/bin/env python3
"""Generate the shipped scenario files under data/.

Writes exp1.json / exp2.json with their CSV series plus the golden
scenarios under data/golden/. Deterministic: fixed seeds, so reruns
reproduce the committed files byte for byte.
"""

import json
import math
import os
import random

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA = os.path.join(ROOT, "data")

START = "2023-04-02T10:00:00"  # first CSV row; episodes begin 24 h later
START_HOUR = 10
N_ROWS = 168  # 24 h history + 72 h episode + 72 h horizon


def hours(n=N_ROWS):
    return range(n)


def local_hour(i):
    return (START_HOUR + i) % 24


def bump(x, center, width):
    return math.exp(-0.5 * ((x - center) / width) ** 2)


def iso(i):
    day = 2 + (START_HOUR + i) // 24
    return "2023-04-%02dT%02d:00:00" % (day, local_hour(i))


def irradiance_curve(rng, n=N_ROWS):
    cloud = {}
    out = []
    for i in hours(n):
        day = (START_HOUR + i) // 24
        if day not in cloud:
            cloud[day] = rng.uniform(0.55, 1.0)
        h = local_hour(i)
        if 6.0 < h < 20.0:
            s = math.sin(math.pi * (h - 6.0) / 14.0)
            v = 780.0 * cloud[day] * (s ** 1.3) + rng.uniform(-15.0, 15.0)
        else:
            v = 0.0
        out.append(round(max(v, 0.0), 1))
    return out


def pv_truth(irr, coef, peak, rng=None, err=0.0):
    out = []
    for v in irr:
        p = min(coef * v, peak)
        if rng is not None and err > 0.0:
            p *= 1.0 + rng.uniform(-err, err)
        out.append(round(max(p, 0.0), 4))
    return out


def series(rng, fn, noise, floor, n=N_ROWS, digits=4):
    return [round(max(fn(i, local_hour(i)) + rng.uniform(-noise, noise), floor), digits)
            for i in hours(n)]


def price_curve(rng, night, day, offset, n=N_ROWS):
    out = []
    for i in hours(n):
        h = local_hour(i)
        base = day if 8 <= h < 20 else night
        out.append(round(base + offset + rng.uniform(-0.003, 0.003), 5))
    return out


def write_csv(name, columns):
    keys = list(columns.keys())
    path = os.path.join(DATA, name)
    with open(path, "w") as f:
        f.write("time," + ",".join(keys) + "\n")
        for i in hours():
            row = ",".join(repr(columns[k][i]) for k in keys)
            f.write(iso(i) + "," + row + "\n")
    print("wrote", path)


def write_json(relpath, doc):
    path = os.path.join(DATA, relpath)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
    print("wrote", path)


def csv_ref(name, column):
    return {"csv": name, "column": column}


def gen_exp1():
    rng = random.Random(41)
    irr = irradiance_curve(rng)

    cols = {
        "nest_demand_e": series(rng, lambda i, h: 7 + 5 * bump(h, 14, 5) + 1.5 * bump(h, 19, 1.5), 0.6, 1.0),
        "nest_demand_h": series(rng, lambda i, h: 12 + 8 * bump(h, 7, 2) + 5 * bump(h, 19, 2.5) - 0.004 * irr[i], 0.8, 2.0),
        "hub1_demand_e": series(rng, lambda i, h: 35 + 22 * bump(h, 13, 4), 2.0, 5.0),
        "hub1_demand_h": series(rng, lambda i, h: 20 + 12 * bump(h, 13, 4.5), 1.5, 3.0),
        "hub2_demand_e": series(rng, lambda i, h: 16 + 9 * bump(h, 14, 4.5), 1.0, 2.0),
        "hub2_demand_h": series(rng, lambda i, h: 11 + 8 * (bump(h, 7, 2) + 0.7 * bump(h, 20, 2)), 1.0, 1.5),
        "hub3_demand_e": series(rng, lambda i, h: 5 + 3.5 * bump(h, 19, 2) + 1.5 * bump(h, 7.5, 1.5), 0.5, 0.5),
        "hub3_demand_h": series(rng, lambda i, h: 8 + 6 * bump(h, 7, 2) + 4 * bump(h, 19.5, 2.5), 0.8, 1.0),
        "nest_pv": pv_truth(irr, 0.024, 20.0, rng, 0.03),
        "hub3_pv": pv_truth(irr, 0.035, 30.0),
        "nest_tank_drain": series(rng, lambda i, h: 1 + 3.5 * bump(h, 13, 4), 0.4, 0.0),
        "irradiance": irr,
    }
    write_csv("exp1_series.csv", cols)

    prices = {
        "nest": price_curve(rng, 0.21, 0.29, 0.000),
        "hub1": price_curve(rng, 0.21, 0.29, -0.004),
        "hub2": price_curve(rng, 0.21, 0.29, 0.004),
        "hub3": price_curve(rng, 0.21, 0.29, 0.008),
    }

    def elec_grid(hub):
        return {
            "carrier": "Electricity",
            "price_import_chf_per_kwh": prices[hub],
            "price_export_chf_per_kwh": 0.13,
            "import_max_kw": 150,
            "export_max_kw": 150,
            "slack": True,
        }

    doc = {
        "schema": 1,
        "name": "exp1",
        "notes": "All capacities, profiles and prices are synthetic stand-ins. "
                 "Roles: nest = demonstrator hub under imperfect forecasts, "
                 "hub1 = large industrial, hub2 = medium commercial, hub3 = small residential.",
        "start": START,
        "grid": "12x1,12x2,6x6",
        "episode": {
            "n_steps": 72,
            "base_dt_hours": 1.0,
            "start_index": 24,
            "weather_refresh_steps": 12,
            "forecast": {"nest": "persistence"},
            "irradiance_wm2": csv_ref("exp1_series.csv", "irradiance"),
        },
        "solver": {"rho": 1.0, "max_iter": 500},
        "hubs": [
            {
                "id": "nest",
                "demand_e_kw": csv_ref("exp1_series.csv", "nest_demand_e"),
                "demand_h_kw": csv_ref("exp1_series.csv", "nest_demand_h"),
                "converters": [
                    {
                        "id": "hp1",
                        "inputs": {"Electricity": 0.3125, "Glycol": 0.6875},
                        "outputs": {"HeatMT": 1.0},
                        "input_max_kw": 35,
                    }
                ],
                "storages": [
                    {
                        "id": "battery",
                        "carrier": "Electricity",
                        "capacity_kwh": 96,
                        "soc_min_kwh": 9.6,
                        "soc_max_kwh": 86.4,
                        "soc_init_kwh": 48,
                        "eta_charge": 0.95,
                        "eta_discharge": 0.95,
                        "decay": 0.9995,
                        "charge_max_kw": 30,
                        "discharge_max_kw": 30,
                    },
                    {
                        "id": "tank",
                        "carrier": "HeatMT",
                        "capacity_kwh": 200,
                        "soc_min_kwh": 20,
                        "soc_max_kwh": 180,
                        "soc_init_kwh": 100,
                        "eta_charge": 0.98,
                        "eta_discharge": 0.98,
                        "decay": 0.995,
                        "charge_max_kw": 50,
                        "discharge_max_kw": 50,
                        "drain_kw": csv_ref("exp1_series.csv", "nest_tank_drain"),
                    },
                ],
                "grids": [
                    elec_grid("nest"),
                    {"carrier": "Glycol", "import_max_kw": 60},
                ],
                "renewables": [
                    {
                        "id": "pv",
                        "profile_kw": csv_ref("exp1_series.csv", "nest_pv"),
                        "pv_model": {"peak_kw": 20.0, "coef_kw_per_wm2": 0.024},
                    }
                ],
            },
            {
                "id": "hub1",
                "demand_e_kw": csv_ref("exp1_series.csv", "hub1_demand_e"),
                "demand_h_kw": csv_ref("exp1_series.csv", "hub1_demand_h"),
                "converters": [
                    {
                        "id": "chp",
                        "inputs": {"Gas": 1.0},
                        "outputs": {"Electricity": 0.38, "HeatMT": 0.45},
                        "input_max_kw": 120,
                    }
                ],
                "grids": [
                    elec_grid("hub1"),
                    {"carrier": "Gas", "price_import_chf_per_kwh": 0.085, "import_max_kw": 200},
                ],
            },
            {
                "id": "hub2",
                "demand_e_kw": csv_ref("exp1_series.csv", "hub2_demand_e"),
                "demand_h_kw": csv_ref("exp1_series.csv", "hub2_demand_h"),
                "converters": [
                    {
                        "id": "boiler",
                        "inputs": {"Gas": 1.0},
                        "outputs": {"HeatMT": 0.92},
                        "input_max_kw": 60,
                    },
                    {
                        "id": "hp",
                        "inputs": {"Electricity": 1.0},
                        "outputs": {"HeatMT": 3.0},
                        "input_max_kw": 15,
                    },
                ],
                "storages": [
                    {
                        "id": "battery",
                        "carrier": "Electricity",
                        "capacity_kwh": 50,
                        "soc_min_kwh": 5,
                        "soc_max_kwh": 45,
                        "soc_init_kwh": 25,
                        "eta_charge": 0.94,
                        "eta_discharge": 0.94,
                        "decay": 0.9995,
                        "charge_max_kw": 15,
                        "discharge_max_kw": 15,
                    }
                ],
                "grids": [
                    elec_grid("hub2"),
                    {"carrier": "Gas", "price_import_chf_per_kwh": 0.092, "import_max_kw": 120},
                ],
            },
            {
                "id": "hub3",
                "demand_e_kw": csv_ref("exp1_series.csv", "hub3_demand_e"),
                "demand_h_kw": csv_ref("exp1_series.csv", "hub3_demand_h"),
                "converters": [
                    {
                        "id": "hp",
                        "inputs": {"Electricity": 1.0},
                        "outputs": {"HeatMT": 2.8},
                        "input_max_kw": 8,
                    }
                ],
                "storages": [
                    {
                        "id": "battery",
                        "carrier": "Electricity",
                        "capacity_kwh": 20,
                        "soc_min_kwh": 2,
                        "soc_max_kwh": 18,
                        "soc_init_kwh": 10,
                        "eta_charge": 0.95,
                        "eta_discharge": 0.95,
                        "decay": 0.9995,
                        "charge_max_kw": 8,
                        "discharge_max_kw": 8,
                    }
                ],
                "grids": [elec_grid("hub3")],
                "renewables": [
                    {"id": "pv", "profile_kw": csv_ref("exp1_series.csv", "hub3_pv")}
                ],
            },
        ],
        "links": [
            {"id": 0, "hub_a": "nest", "hub_b": "hub1", "carrier": "Electricity", "limit_kw": 50, "fee_chf_per_kwh": 0.012},
            {"id": 1, "hub_a": "hub1", "hub_b": "hub2", "carrier": "Electricity", "limit_kw": 60, "fee_chf_per_kwh": 0.015},
            {"id": 2, "hub_a": "hub2", "hub_b": "hub3", "carrier": "Electricity", "limit_kw": 40, "fee_chf_per_kwh": 0.021},
            {"id": 3, "hub_a": "nest", "hub_b": "hub3", "carrier": "Electricity", "limit_kw": 30, "fee_chf_per_kwh": 0.018},
            {"id": 4, "hub_a": "hub1", "hub_b": "nest", "carrier": "HeatMT", "limit_kw": 40, "fee_chf_per_kwh": 0.008},
            {"id": 5, "hub_a": "hub2", "hub_b": "hub3", "carrier": "HeatMT", "limit_kw": 25, "fee_chf_per_kwh": 0.011},
        ],
    }
    write_json("exp1.json", doc)


def gen_exp2():
    rng = random.Random(43)
    irr = irradiance_curve(rng)

    cols = {
        "nest_demand_e": series(rng, lambda i, h: 8 + 5 * bump(h, 14, 5), 0.6, 1.0),
        "nest_demand_h": series(rng, lambda i, h: 10 + 7 * bump(h, 7, 2) + 4 * bump(h, 19, 2.5), 0.8, 1.5),
        "annex_demand_e": series(rng, lambda i, h: 22 + 13 * bump(h, 13, 4), 1.5, 3.0),
        "annex_demand_h": series(rng, lambda i, h: 15 + 9 * bump(h, 12, 4.5), 1.2, 2.0),
        "labs_demand_e": series(rng, lambda i, h: 18 + 10 * bump(h, 14, 4.5), 1.2, 2.5),
        "labs_demand_h": series(rng, lambda i, h: 12 + 8 * bump(h, 8, 2.5), 1.0, 1.5),
        "office_demand_e": series(rng, lambda i, h: 12 + 9 * bump(h, 13.5, 3.5), 1.0, 1.5),
        "office_demand_h": series(rng, lambda i, h: 9 + 6 * bump(h, 8, 2), 0.8, 1.0),
        "nest_pv": pv_truth(irr, 0.030, 25.0, rng, 0.03),
        "annex_pv": pv_truth(irr, 0.075, 60.0),
        "labs_pv": pv_truth(irr, 0.055, 45.0),
        "office_pv": pv_truth(irr, 0.042, 35.0),
        "irradiance": irr,
    }
    write_csv("exp2_series.csv", cols)

    prices = {
        "nest": price_curve(rng, 0.22, 0.30, 0.000),
        "annex": price_curve(rng, 0.22, 0.30, -0.003),
        "labs": price_curve(rng, 0.22, 0.30, 0.003),
        "office": price_curve(rng, 0.22, 0.30, 0.006),
    }

    def hub(hub_id, heat_price, extra=None):
        h = {
            "id": hub_id,
            "demand_e_kw": csv_ref("exp2_series.csv", hub_id + "_demand_e"),
            "demand_h_kw": csv_ref("exp2_series.csv", hub_id + "_demand_h"),
            "grids": [
                {
                    "carrier": "Electricity",
                    "price_import_chf_per_kwh": prices[hub_id],
                    "price_export_chf_per_kwh": 0.10,
                    "import_max_kw": 120,
                    "export_max_kw": 120,
                    "slack": True,
                },
                {
                    "carrier": "HeatMT",
                    "price_import_chf_per_kwh": heat_price,
                    "import_max_kw": 80,
                    "slack": True,
                },
            ],
            "renewables": [
                {"id": "pv", "profile_kw": csv_ref("exp2_series.csv", hub_id + "_pv")}
            ],
        }
        if extra:
            h.update(extra)
        return h

    nest = hub("nest", 0.09, {
        "converters": [
            {"id": "hp", "inputs": {"Electricity": 1.0}, "outputs": {"HeatMT": 3.1}, "input_max_kw": 8}
        ],
        "storages": [
            {
                "id": "battery",
                "carrier": "Electricity",
                "capacity_kwh": 40,
                "soc_min_kwh": 4,
                "soc_max_kwh": 36,
                "soc_init_kwh": 20,
                "eta_charge": 0.95,
                "eta_discharge": 0.95,
                "decay": 0.9995,
                "charge_max_kw": 12,
                "discharge_max_kw": 12,
            }
        ],
    })
    nest["renewables"][0]["pv_model"] = {"peak_kw": 25.0, "coef_kw_per_wm2": 0.030}

    annex = hub("annex", 0.09, {
        "storages": [
            {
                "id": "battery",
                "carrier": "Electricity",
                "capacity_kwh": 80,
                "soc_min_kwh": 8,
                "soc_max_kwh": 72,
                "soc_init_kwh": 40,
                "eta_charge": 0.95,
                "eta_discharge": 0.95,
                "decay": 0.9995,
                "charge_max_kw": 20,
                "discharge_max_kw": 20,
            }
        ],
    })

    doc = {
        "schema": 1,
        "name": "exp2",
        "notes": "All capacities, profiles and prices are synthetic stand-ins. "
                 "Four comparable campus hubs, each with rooftop PV and a medium "
                 "temperature thermal grid connection importing at a fixed price.",
        "start": START,
        "grid": "12x1,12x2,6x6",
        "episode": {
            "n_steps": 72,
            "base_dt_hours": 1.0,
            "start_index": 24,
            "weather_refresh_steps": 12,
            "forecast": {"nest": "persistence"},
            "irradiance_wm2": csv_ref("exp2_series.csv", "irradiance"),
        },
        "solver": {"rho": 1.0, "max_iter": 500},
        "hubs": [
            nest,
            annex,
            hub("labs", 0.11),
            hub("office", 0.09),
        ],
        "links": [
            {"id": 0, "hub_a": "nest", "hub_b": "annex", "carrier": "Electricity", "limit_kw": 40, "fee_chf_per_kwh": 0.015},
            {"id": 1, "hub_a": "annex", "hub_b": "labs", "carrier": "Electricity", "limit_kw": 50, "fee_chf_per_kwh": 0.012},
            {"id": 2, "hub_a": "labs", "hub_b": "office", "carrier": "Electricity", "limit_kw": 40, "fee_chf_per_kwh": 0.018},
            {"id": 3, "hub_a": "nest", "hub_b": "office", "carrier": "Electricity", "limit_kw": 30, "fee_chf_per_kwh": 0.020},
            {"id": 4, "hub_a": "labs", "hub_b": "annex", "carrier": "HeatMT", "limit_kw": 15, "fee_chf_per_kwh": 0.010},
        ],
    }
    write_json("exp2.json", doc)


def ramp(rng, base, amp, center, width, n, noise=0.0, floor=0.0, digits=4):
    out = []
    for i in range(n):
        h = i % 24
        v = base + amp * bump(h, center, width)
        if noise:
            v += rng.uniform(-noise, noise)
        out.append(round(max(v, floor), digits))
    return out


def jittered(rng, night, day, n, jit=0.0015, digits=5):
    return [round((day if 8 <= (i % 24) < 20 else night) + rng.uniform(-jit, jit), digits)
            for i in range(n)]


def elec_slack(price_import, price_export=0.08, cap=100):
    return {
        "carrier": "Electricity",
        "price_import_chf_per_kwh": price_import,
        "price_export_chf_per_kwh": price_export,
        "import_max_kw": cap,
        "export_max_kw": cap,
        "slack": True,
    }


def gen_g1():
    rng = random.Random(101)
    n = 48
    demand = [round(4 + 2 * math.sin(2 * math.pi * i / 24) + rng.uniform(-0.2, 0.2), 4)
              for i in range(n)]
    doc = {
        "schema": 1,
        "name": "g1-chp-pair",
        "start": "2023-04-03T00:00:00",
        "grid": "24x1",
        "episode": {"n_steps": 24, "start_index": 0},
        "solver": {"rho": 1.0, "max_iter": 500},
        "hubs": [
            {
                "id": "alpha",
                "converters": [
                    {"id": "chp", "inputs": {"Gas": 1.0}, "outputs": {"Electricity": 1.0}, "input_max_kw": 10}
                ],
                "grids": [
                    elec_slack(0.30, 0.05),
                    {"carrier": "Gas", "price_import_chf_per_kwh": 0.10, "import_max_kw": 100},
                ],
            },
            {
                "id": "beta",
                "demand_e_kw": demand,
                "grids": [elec_slack(0.30, 0.05)],
            },
        ],
        "links": [
            {"id": 0, "hub_a": "alpha", "hub_b": "beta", "carrier": "Electricity", "limit_kw": 10, "fee_chf_per_kwh": 0.05}
        ],
    }
    write_json("golden/g1.json", doc)


def gen_g2():
    rng = random.Random(102)
    n = 48
    pv = [round(18.0 * bump(i % 24, 13, 3.2), 4) if 7 <= i % 24 <= 19 else 0.0 for i in range(n)]
    price = {hub: jittered(rng, 0.17 + off, 0.29 + off, n)
             for hub, off in [("solar", 0.0), ("town", 0.006), ("ridge", 0.012)]}
    doc = {
        "schema": 1,
        "name": "g2-pv-trio",
        "start": "2023-04-03T00:00:00",
        "grid": "24x1",
        "episode": {"n_steps": 24, "start_index": 0},
        "solver": {"rho": 1.0, "max_iter": 2000},
        "hubs": [
            {
                "id": "solar",
                "demand_e_kw": 3.0,
                "grids": [elec_slack(price["solar"])],
                "renewables": [{"id": "pv", "profile_kw": pv}],
            },
            {
                "id": "town",
                "demand_e_kw": ramp(rng, 8, 6, 19, 2.5, n, noise=0.3, floor=1.0),
                "grids": [elec_slack(price["town"])],
            },
            {
                "id": "ridge",
                "demand_e_kw": 5.0,
                "demand_h_kw": ramp(rng, 6, 6, 7.5, 2.2, n, noise=0.3, floor=1.0),
                "converters": [
                    {"id": "hp", "inputs": {"Electricity": 1.0}, "outputs": {"HeatMT": 3.0}, "input_max_kw": 3},
                    {"id": "boiler", "inputs": {"Gas": 1.0}, "outputs": {"HeatMT": 0.9}, "input_max_kw": 20},
                ],
                "grids": [
                    elec_slack(price["ridge"]),
                    {"carrier": "Gas", "price_import_chf_per_kwh": 0.11, "import_max_kw": 60},
                ],
            },
        ],
        "links": [
            {"id": 0, "hub_a": "solar", "hub_b": "town", "carrier": "Electricity", "limit_kw": 6, "fee_chf_per_kwh": 0.020},
            {"id": 1, "hub_a": "solar", "hub_b": "ridge", "carrier": "Electricity", "limit_kw": 4, "fee_chf_per_kwh": 0.021},
        ],
    }
    write_json("golden/g2.json", doc)


def gen_g3():
    rng = random.Random(103)
    n = 96
    price = {hub: jittered(rng, 0.18 + off, 0.31 + off, n)
             for hub, off in [("plant", 0.0), ("mill", 0.006), ("village", 0.012), ("depot", 0.018)]}
    pv = [round(40.0 * bump(i % 24, 13, 3.0), 4) if 7 <= i % 24 <= 19 else 0.0 for i in range(n)]
    doc = {
        "schema": 1,
        "name": "g3-quad-default-grid",
        "start": "2023-04-03T00:00:00",
        "grid": "12x1,12x2,6x6",
        "episode": {"n_steps": 24, "start_index": 0},
        "solver": {"rho": 1.0, "max_iter": 800},
        "hubs": [
            {
                "id": "plant",
                "demand_e_kw": ramp(rng, 20, 15, 13, 4, n, noise=1.0, floor=4.0),
                "demand_h_kw": ramp(rng, 10, 15, 13, 4.5, n, noise=1.0, floor=2.0),
                "converters": [
                    {"id": "chp", "inputs": {"Gas": 1.0}, "outputs": {"Electricity": 0.38, "HeatMT": 0.45}, "input_max_kw": 80}
                ],
                "grids": [
                    elec_slack(price["plant"], 0.10, 150),
                    {"carrier": "Gas", "price_import_chf_per_kwh": 0.085, "import_max_kw": 150},
                ],
            },
            {
                "id": "mill",
                "demand_e_kw": ramp(rng, 15, 25, 14, 3.5, n, noise=1.2, floor=3.0),
                "storages": [
                    {
                        "id": "battery",
                        "carrier": "Electricity",
                        "capacity_kwh": 60,
                        "soc_min_kwh": 6,
                        "soc_max_kwh": 54,
                        "soc_init_kwh": 30,
                        "eta_charge": 0.95,
                        "eta_discharge": 0.95,
                        "decay": 0.9995,
                        "charge_max_kw": 20,
                        "discharge_max_kw": 20,
                    }
                ],
                "grids": [elec_slack(price["mill"], 0.10, 150)],
                "renewables": [{"id": "pv", "profile_kw": pv}],
            },
            {
                "id": "village",
                "demand_e_kw": ramp(rng, 8, 12, 19, 2.5, n, noise=0.8, floor=2.0),
                "demand_h_kw": ramp(rng, 10, 12, 7, 2.5, n, noise=0.8, floor=2.0),
                "converters": [
                    {"id": "hp", "inputs": {"Electricity": 1.0}, "outputs": {"HeatMT": 3.1}, "input_max_kw": 9}
                ],
                "grids": [elec_slack(price["village"], 0.10)],
            },
            {
                "id": "depot",
                "demand_e_kw": ramp(rng, 5, 7, 11, 3, n, noise=0.5, floor=1.0),
                "storages": [
                    {
                        "id": "battery",
                        "carrier": "Electricity",
                        "capacity_kwh": 25,
                        "soc_min_kwh": 2.5,
                        "soc_max_kwh": 22.5,
                        "soc_init_kwh": 12,
                        "eta_charge": 0.94,
                        "eta_discharge": 0.94,
                        "charge_max_kw": 10,
                        "discharge_max_kw": 10,
                    }
                ],
                "grids": [elec_slack(price["depot"], 0.10)],
            },
        ],
        "links": [
            {"id": 0, "hub_a": "plant", "hub_b": "mill", "carrier": "Electricity", "limit_kw": 40, "fee_chf_per_kwh": 0.011},
            {"id": 1, "hub_a": "mill", "hub_b": "village", "carrier": "Electricity", "limit_kw": 25, "fee_chf_per_kwh": 0.014},
            {"id": 2, "hub_a": "village", "hub_b": "depot", "carrier": "Electricity", "limit_kw": 20, "fee_chf_per_kwh": 0.017},
            {"id": 3, "hub_a": "plant", "hub_b": "village", "carrier": "HeatMT", "limit_kw": 20, "fee_chf_per_kwh": 0.009},
        ],
    }
    write_json("golden/g3.json", doc)


def gen_g4():
    rng = random.Random(104)
    n = 60
    price = jittered(rng, 0.24, 0.27, n)
    doc = {
        "schema": 1,
        "name": "g4-thermal-duo",
        "start": "2023-04-03T00:00:00",
        "grid": "30x1",
        "episode": {"n_steps": 30, "start_index": 0},
        "solver": {"rho": 1.0, "max_iter": 600},
        "hubs": [
            {
                "id": "kiln",
                "demand_e_kw": 4.0,
                "demand_h_kw": ramp(rng, 5, 4, 10, 4, n, noise=0.3, floor=1.0),
                "converters": [
                    {"id": "chp", "inputs": {"Gas": 1.0}, "outputs": {"Electricity": 0.3, "HeatMT": 0.55}, "input_max_kw": 40}
                ],
                "grids": [
                    elec_slack(price, 0.09),
                    {"carrier": "Gas", "price_import_chf_per_kwh": 0.08, "import_max_kw": 100},
                ],
            },
            {
                "id": "baths",
                "demand_e_kw": 5.0,
                "demand_h_kw": ramp(rng, 15, 15, 17, 3.5, n, noise=0.8, floor=4.0),
                "converters": [
                    {"id": "hp", "inputs": {"Electricity": 1.0}, "outputs": {"HeatMT": 2.9}, "input_max_kw": 4},
                    {"id": "boiler", "inputs": {"Gas": 1.0}, "outputs": {"HeatMT": 0.9}, "input_max_kw": 40},
                ],
                "grids": [
                    elec_slack(price, 0.09),
                    {"carrier": "Gas", "price_import_chf_per_kwh": 0.12, "import_max_kw": 100},
                ],
            },
        ],
        "links": [
            {"id": 0, "hub_a": "baths", "hub_b": "kiln", "carrier": "HeatMT", "limit_kw": 25, "fee_chf_per_kwh": 0.007},
            {"id": 1, "hub_a": "kiln", "hub_b": "baths", "carrier": "Electricity", "limit_kw": 15, "fee_chf_per_kwh": 0.019},
        ],
    }
    write_json("golden/g4.json", doc)


def gen_g5():
    rng = random.Random(105)
    n = 48
    doc = {
        "schema": 1,
        "name": "g5-limit-mesh",
        "start": "2023-04-03T00:00:00",
        "grid": "24x1",
        "episode": {"n_steps": 24, "start_index": 0},
        "solver": {"rho": 1.0, "max_iter": 600},
        "hubs": [
            {
                "id": "a1",
                "demand_e_kw": 2.0,
                "converters": [
                    {"id": "gen", "inputs": {"Gas": 1.0}, "outputs": {"Electricity": 0.9}, "input_max_kw": 30}
                ],
                "grids": [
                    elec_slack(jittered(rng, 0.295, 0.305, n), 0.06),
                    {"carrier": "Gas", "price_import_chf_per_kwh": 0.09, "import_max_kw": 80},
                ],
            },
            {
                "id": "b2",
                "demand_e_kw": ramp(rng, 10, 6, 18, 3, n, noise=0.4, floor=2.0),
                "grids": [elec_slack(jittered(rng, 0.335, 0.345, n), 0.06)],
            },
            {
                "id": "c3",
                "demand_e_kw": ramp(rng, 8, 4, 12, 3.5, n, noise=0.4, floor=2.0),
                "grids": [elec_slack(jittered(rng, 0.305, 0.315, n), 0.06)],
            },
            {
                "id": "d4",
                "demand_e_kw": ramp(rng, 6, 4, 20, 2.5, n, noise=0.3, floor=1.5),
                "grids": [elec_slack(jittered(rng, 0.345, 0.355, n), 0.06)],
            },
        ],
        "links": [
            {"id": 0, "hub_a": "a1", "hub_b": "b2", "carrier": "Electricity", "limit_kw": 5, "fee_chf_per_kwh": 0.012},
            {"id": 1, "hub_a": "a1", "hub_b": "c3", "carrier": "Electricity", "limit_kw": 4, "fee_chf_per_kwh": 0.015},
            {"id": 2, "hub_a": "a1", "hub_b": "d4", "carrier": "Electricity", "limit_kw": 3, "fee_chf_per_kwh": 0.018},
            {"id": 3, "hub_a": "b2", "hub_b": "c3", "carrier": "Electricity", "limit_kw": 2, "fee_chf_per_kwh": 0.020},
        ],
    }
    write_json("golden/g5.json", doc)


def main():
    os.makedirs(DATA, exist_ok=True)
    gen_exp1()
    gen_exp2()
    gen_g1()
    gen_g2()
    gen_g3()
    gen_g4()
    gen_g5()


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Regenerates data/micro and data/desk (synthetic, fixed seed)."""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "data"


def gen(name, bus, pmin, pmax, ramp, cost):
    return {"name": name, "bus": bus, "pmin": pmin, "pmax": pmax, "ramp": ramp,
            "cost": cost, "cost_up": round(1.05 * cost, 6), "cost_down": round(0.94 * cost, 6)}


def shaped(base, profile):
    return [round(base * f, 3) for f in profile]


def wind_csv(path, steps, count, rng, lo, hi):
    cols = []
    for _ in range(count):
        level = rng.uniform(lo, hi)
        dev, series = 0.0, []
        for _ in range(steps):
            dev = 0.7 * dev + rng.gauss(0.0, 0.08)
            series.append(min(1.0, max(0.0, level + dev)))
        cols.append(series)
    lines = ["t," + ",".join(f"s{k + 1}" for k in range(count))]
    for t in range(steps):
        lines.append(f"{t + 1}," + ",".join(f"{c[t]:.4f}" for c in cols))
    path.write_text("\n".join(lines) + "\n")


def micro():
    steps = 6
    profile = [0.8, 0.9, 1.0, 1.1, 1.05, 0.95]
    inst = {
        "name": "micro",
        "currency": "USD",
        "time": {"steps": steps, "dt_seconds": 3600},
        "electric": {
            "base_mva": 100, "voll": 1000, "cost_add": 1000, "reference_bus": "b1",
            "buses": [{"name": "b1", "load": shaped(40, profile)},
                      {"name": "b2", "load": shaped(50, profile)},
                      {"name": "b3", "load": shaped(70, profile)}],
            "lines": [{"name": "l12", "from": "b1", "to": "b2", "susceptance": 10, "limit": 80},
                      {"name": "l23", "from": "b2", "to": "b3", "susceptance": 10, "limit": 70},
                      {"name": "l13", "from": "b1", "to": "b3", "susceptance": 10, "limit": 70}],
            "generators": [gen("coal", "b1", 20, 120, 30, 20),
                           gen("gfpp", "b2", 0, 100, 50, 32),
                           gen("peaker", "b3", 0, 60, 60, 70)],
            "wind_farms": [{"name": "w3", "bus": "b3", "capacity": 80}],
        },
        "gas": {
            "sound_speed": 350, "shed_cost": 5, "max_segment_length": 20000,
            "slack_node": "n1", "slack_pressure": 6.0e6,
            "nodes": [{"name": "n1", "pmin": 4.0e6, "pmax": 7.0e6, "demand": 0},
                      {"name": "n2", "pmin": 3.0e6, "pmax": 7.0e6, "demand": 0},
                      {"name": "n3", "pmin": 3.0e6, "pmax": 7.0e6, "demand": shaped(6, profile)},
                      {"name": "n4", "pmin": 3.0e6, "pmax": 7.0e6, "demand": shaped(6, profile)}],
            "pipes": [{"name": "p12", "from": "n1", "to": "n2", "length": 40000, "diameter": 0.4, "friction": 0.01},
                      {"name": "p34", "from": "n3", "to": "n4", "length": 40000, "diameter": 0.4, "friction": 0.01},
                      {"name": "p24", "from": "n2", "to": "n4", "length": 40000, "diameter": 0.4, "friction": 0.01}],
            "compressors": [{"name": "c23", "from": "n2", "to": "n3", "ratio_min": 1.0, "ratio_max": 1.4, "cost": 1}],
            "supplies": [{"name": "s1", "node": "n1", "smin": 0, "smax": 30, "cost": 0.15}],
        },
        "coupling": {"gfpps": [{"generator": "gfpp", "gas_node": "n4", "heat_rate": 170}]},
    }
    out = ROOT / "micro"
    out.mkdir(parents=True, exist_ok=True)
    (out / "instance.json").write_text(json.dumps(inst, indent=2) + "\n")
    wind_csv(out / "scenarios.csv", steps, 10, random.Random(11), 0.15, 0.85)


def desk():
    steps = 12
    profile = [0.86, 0.84, 0.85, 0.9, 0.96, 1.0, 1.03, 1.05, 1.04, 1.0, 0.96, 0.92]
    gprof = [0.96, 0.95, 0.96, 0.98, 1.0, 1.02, 1.04, 1.05, 1.04, 1.02, 1.0, 0.98]
    loads = {"b1": 90, "b2": 110, "b3": 80, "b4": 100, "b5": 120, "b6": 100}
    inst = {
        "name": "desk",
        "currency": "USD",
        "time": {"steps": steps, "dt_seconds": 3600},
        "electric": {
            "base_mva": 100, "voll": 1000, "cost_add": 1000, "reference_bus": "b1",
            "buses": [{"name": b, "load": shaped(v, profile)} for b, v in loads.items()],
            "lines": [{"name": "l12", "from": "b1", "to": "b2", "susceptance": 12, "limit": 220},
                      {"name": "l23", "from": "b2", "to": "b3", "susceptance": 10, "limit": 180},
                      {"name": "l34", "from": "b3", "to": "b4", "susceptance": 10, "limit": 180},
                      {"name": "l45", "from": "b4", "to": "b5", "susceptance": 12, "limit": 220},
                      {"name": "l56", "from": "b5", "to": "b6", "susceptance": 10, "limit": 180},
                      {"name": "l61", "from": "b6", "to": "b1", "susceptance": 10, "limit": 200},
                      {"name": "l25", "from": "b2", "to": "b5", "susceptance": 8, "limit": 150},
                      {"name": "l36", "from": "b3", "to": "b6", "susceptance": 8, "limit": 150}],
            "generators": [gen("coal1", "b1", 50, 250, 20, 25),
                           gen("nuc4", "b4", 100, 200, 10, 12),
                           gen("gfpp2", "b2", 20, 150, 80, 35),
                           gen("gfpp5", "b5", 10, 120, 90, 38),
                           gen("gfpp6", "b6", 0, 100, 100, 45),
                           gen("oil3", "b3", 0, 80, 40, 80)],
            "wind_farms": [{"name": "w3", "bus": "b3", "capacity": 150},
                           {"name": "w6", "bus": "b6", "capacity": 150}],
        },
        "gas": {
            "sound_speed": 350, "shed_cost": 5, "max_segment_length": 20000,
            "slack_node": "n1", "slack_pressure": 6.0e6,
            "nodes": [{"name": "n1", "pmin": 4.0e6, "pmax": 7.0e6, "demand": 0},
                      {"name": "n2", "pmin": 3.0e6, "pmax": 7.0e6, "demand": 0},
                      {"name": "n3", "pmin": 3.0e6, "pmax": 7.0e6, "demand": shaped(10, gprof)},
                      {"name": "n4", "pmin": 3.0e6, "pmax": 7.0e6, "demand": 0},
                      {"name": "n5", "pmin": 3.0e6, "pmax": 7.0e6, "demand": 0},
                      {"name": "n6", "pmin": 3.0e6, "pmax": 7.0e6, "demand": shaped(15, gprof)},
                      {"name": "n7", "pmin": 3.0e6, "pmax": 7.0e6, "demand": shaped(10, gprof)},
                      {"name": "n8", "pmin": 3.0e6, "pmax": 7.0e6, "demand": shaped(15, gprof)}],
            "pipes": [{"name": "p12", "from": "n1", "to": "n2", "length": 60000, "diameter": 0.6, "friction": 0.01},
                      {"name": "p23", "from": "n2", "to": "n3", "length": 40000, "diameter": 0.5, "friction": 0.01},
                      {"name": "p46", "from": "n4", "to": "n6", "length": 50000, "diameter": 0.5, "friction": 0.01},
                      {"name": "p25", "from": "n2", "to": "n5", "length": 50000, "diameter": 0.4, "friction": 0.01},
                      {"name": "p56", "from": "n5", "to": "n6", "length": 30000, "diameter": 0.4, "friction": 0.01},
                      {"name": "p67", "from": "n6", "to": "n7", "length": 40000, "diameter": 0.5, "friction": 0.01}],
            "compressors": [{"name": "c34", "from": "n3", "to": "n4", "ratio_min": 1.0, "ratio_max": 1.5, "cost": 1},
                            {"name": "c78", "from": "n7", "to": "n8", "ratio_min": 1.0, "ratio_max": 1.4, "cost": 1}],
            "supplies": [{"name": "s1", "node": "n1", "smin": 0, "smax": 42, "cost": 0.2},
                         {"name": "s5", "node": "n5", "smin": 0, "smax": 16, "cost": 0.24}],
        },
        "coupling": {"gfpps": [{"generator": "gfpp2", "gas_node": "n8", "heat_rate": 160},
                               {"generator": "gfpp5", "gas_node": "n6", "heat_rate": 170},
                               {"generator": "gfpp6", "gas_node": "n4", "heat_rate": 180}]},
    }
    out = ROOT / "desk"
    out.mkdir(parents=True, exist_ok=True)
    (out / "instance.json").write_text(json.dumps(inst, indent=2) + "\n")
    wind_csv(out / "scenarios.csv", steps, 100, random.Random(29), 0.1, 0.9)


if __name__ == "__main__":
    micro()
    desk()

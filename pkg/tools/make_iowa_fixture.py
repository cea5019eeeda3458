#!/usr/bin/env python3
"""Regenerate the bundled Iowa 2010 fixture.

Populations are the 2010 census county counts; they sum to 3,046,355 and
reproduce the four official congressional district totals (761,548 /
761,624 / 761,612 / 761,571 - the famous 76-person spread) exactly, which
pins every county value. Geometry is stylized: counties are rectangles on
the real county-grid layout, subdivided so neighboring rings share
identical vertex chains (what the rook adjacency matcher expects), with
sawtooth bays carved into the Missouri/Big Sioux and Mississippi river
borders and a west-border slant standing in for the real riverbank
raggedness. Bay depths are calibrated so the official plan's mean
convex-hull compactness lands on the published 0.78.

Run from the repository root:  python tools/make_iowa_fixture.py
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from districtgen.graph import DistrictingPlan  # noqa: E402
from districtgen.ingest import RawUnit, build_graph, file_sha256  # noqa: E402
from districtgen.metrics import evaluate_plan  # noqa: E402
from districtgen.graph import is_contiguous, validate_plan  # noqa: E402
from districtgen.pipeline import plan_document  # noqa: E402

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "districtgen" / "data"

# Districts: 0 = NE (official 1st), 1 = SE (2nd), 2 = SW (3rd), 3 = NW (4th).
OFFICIAL_DISTRICT_POPS = {0: 761_548, 1: 761_624, 2: 761_612, 3: 761_571}
STATE_POP_2010 = 3_046_355

# name, 2010 population, official district, tier, x0, x1
# tier t spans y in [9-t, 10-t]; Kossuth/Fayette/Clayton carry height overrides.
COUNTIES = [
    # --- tier 1 (Minnesota border) ---
    ("Lyon",          11_581, 3, 1, 0.00, 1.50),
    ("Osceola",        6_462, 3, 1, 1.50, 2.75),
    ("Dickinson",     16_667, 3, 1, 2.75, 4.00),
    ("Emmet",         10_302, 3, 1, 4.00, 5.25),
    ("Kossuth",       15_543, 3, 1, 5.25, 6.50),   # height 2: spans tiers 1-2
    ("Winnebago",     10_866, 3, 1, 6.50, 7.75),
    ("Worth",          7_598, 0, 1, 7.75, 9.00),
    ("Mitchell",      10_776, 0, 1, 9.00, 10.25),
    ("Howard",         9_566, 0, 1, 10.25, 11.50),
    ("Winneshiek",    21_056, 0, 1, 11.50, 12.75),
    ("Allamakee",     14_330, 0, 1, 12.75, 14.00),
    # --- tier 2 ---
    ("Sioux",         33_704, 3, 2, 0.00, 1.50),
    ("O'Brien",       14_398, 3, 2, 1.50, 2.75),
    ("Clay",          16_667, 3, 2, 2.75, 4.00),
    ("Palo Alto",      9_421, 3, 2, 4.00, 5.25),
    ("Hancock",       11_341, 3, 2, 6.50, 7.75),
    ("Cerro Gordo",   44_151, 3, 2, 7.75, 9.00),
    ("Floyd",         16_303, 3, 2, 9.00, 10.25),
    ("Chickasaw",     12_439, 3, 2, 10.25, 11.50),
    ("Fayette",       20_880, 0, 2, 11.50, 12.75),  # height 2: spans tiers 2-3
    ("Clayton",       18_129, 0, 2, 12.75, 14.00),  # height 2: spans tiers 2-3
    # --- tier 3 ---
    ("Plymouth",      24_986, 3, 3, 0.00, 1.50),
    ("Cherokee",      12_072, 3, 3, 1.50, 2.75),
    ("Buena Vista",   20_260, 3, 3, 2.75, 4.00),
    ("Pocahontas",     7_310, 3, 3, 4.00, 5.25),
    ("Humboldt",       9_815, 3, 3, 5.25, 6.50),
    ("Wright",        13_229, 3, 3, 6.50, 7.75),
    ("Franklin",      10_680, 3, 3, 7.75, 9.00),
    ("Butler",        14_867, 3, 3, 9.00, 10.25),
    ("Bremer",        24_276, 0, 3, 10.25, 11.50),
    # --- tier 4 ---
    ("Woodbury",     102_172, 3, 4, 0.25, 1.50),
    ("Ida",            7_089, 3, 4, 1.50, 2.75),
    ("Sac",           10_350, 3, 4, 2.75, 4.00),
    ("Calhoun",        9_670, 3, 4, 4.00, 5.25),
    ("Webster",       38_013, 3, 4, 5.25, 6.50),
    ("Hamilton",      15_673, 3, 4, 6.50, 7.75),
    ("Hardin",        17_534, 3, 4, 7.75, 9.00),
    ("Grundy",        12_453, 3, 4, 9.00, 10.25),
    ("Black Hawk",   131_090, 0, 4, 10.25, 11.50),
    ("Buchanan",      20_958, 0, 4, 11.50, 12.25),
    ("Delaware",      17_764, 0, 4, 12.25, 13.00),
    ("Dubuque",       93_653, 0, 4, 13.00, 14.00),
    # --- tier 5 ---
    ("Monona",         9_243, 3, 5, 0.25, 1.50),
    ("Crawford",      17_096, 3, 5, 1.50, 2.75),
    ("Carroll",       20_816, 3, 5, 2.75, 4.00),
    ("Greene",         9_336, 3, 5, 4.00, 5.25),
    ("Boone",         26_306, 3, 5, 5.25, 6.50),
    ("Story",         89_542, 3, 5, 6.50, 7.75),
    ("Marshall",      40_648, 0, 5, 7.75, 9.00),
    ("Tama",          17_767, 0, 5, 9.00, 10.50),
    ("Benton",        26_076, 0, 5, 10.50, 11.75),
    ("Linn",         211_226, 0, 5, 11.75, 12.50),
    ("Jones",         20_638, 0, 5, 12.50, 13.25),
    ("Jackson",       19_848, 0, 5, 13.25, 14.00),
    # --- tier 6 ---
    ("Harrison",      14_928, 3, 6, 0.50, 1.50),
    ("Shelby",        12_167, 3, 6, 1.50, 2.75),
    ("Audubon",        6_119, 3, 6, 2.75, 3.50),
    ("Guthrie",       10_954, 2, 6, 3.50, 4.75),
    ("Dallas",        66_135, 2, 6, 4.75, 6.00),
    ("Polk",         430_640, 2, 6, 6.00, 7.25),
    ("Jasper",        36_842, 1, 6, 7.25, 9.00),
    ("Poweshiek",     18_914, 0, 6, 9.00, 10.00),
    ("Iowa",          16_355, 0, 6, 10.00, 11.00),
    ("Johnson",      130_882, 1, 6, 11.00, 12.00),
    ("Cedar",         18_499, 1, 6, 12.00, 13.00),
    ("Clinton",       49_116, 1, 6, 13.00, 14.00),
    # --- tier 7 ---
    ("Pottawattamie", 93_158, 2, 7, 0.50, 1.75),
    ("Cass",          13_956, 2, 7, 1.75, 3.00),
    ("Adair",          7_682, 2, 7, 3.00, 4.25),
    ("Madison",       15_679, 2, 7, 4.25, 5.50),
    ("Warren",        46_225, 2, 7, 5.50, 6.75),
    ("Marion",        33_309, 1, 7, 6.75, 8.00),
    ("Mahaska",       22_381, 1, 7, 8.00, 9.25),
    ("Keokuk",        10_511, 1, 7, 9.25, 10.50),
    ("Washington",    21_704, 1, 7, 10.50, 11.75),
    ("Muscatine",     42_745, 1, 7, 11.75, 12.75),
    ("Scott",        165_224, 1, 7, 12.75, 14.00),
    # --- tier 8 ---
    ("Mills",         15_059, 2, 8, 0.75, 1.25),
    ("Montgomery",    10_740, 2, 8, 1.25, 2.50),
    ("Adams",          4_029, 2, 8, 2.50, 3.75),
    ("Union",         12_534, 2, 8, 3.75, 5.00),
    ("Clarke",         9_286, 1, 8, 5.00, 6.25),
    ("Lucas",          8_898, 1, 8, 6.25, 7.50),
    ("Monroe",         7_970, 1, 8, 7.50, 8.75),
    ("Wapello",       35_625, 1, 8, 8.75, 10.00),
    ("Jefferson",     16_843, 1, 8, 10.00, 11.00),
    ("Henry",         20_145, 1, 8, 11.00, 12.00),
    ("Louisa",        11_387, 1, 8, 12.00, 12.75),
    # --- tier 9 (Missouri border) ---
    ("Fremont",        7_441, 2, 9, 0.75, 1.25),
    ("Page",          15_932, 2, 9, 1.25, 2.50),
    ("Taylor",         6_317, 2, 9, 2.50, 3.75),
    ("Ringgold",       5_131, 2, 9, 3.75, 5.00),
    ("Decatur",        8_457, 1, 9, 5.00, 6.25),
    ("Wayne",          6_403, 1, 9, 6.25, 7.50),
    ("Appanoose",     12_887, 1, 9, 7.50, 8.75),
    ("Davis",          8_753, 1, 9, 8.75, 10.00),
    ("Van Buren",      7_570, 1, 9, 10.00, 11.00),
    ("Lee",           35_862, 1, 9, 11.00, 12.00),
    ("Des Moines",    40_325, 1, 9, 12.00, 12.75),
]

HEIGHT_OVERRIDES = {"Kossuth": 2.0, "Fayette": 2.0, "Clayton": 2.0}

# River raggedness: (side, bay depth) per county whose outer edge is a river.
WEST_BAYS = {"Lyon": 0.50, "Sioux": 0.50, "Plymouth": 0.50, "Woodbury": 0.50,
             "Monona": 0.50, "Harrison": 0.50, "Pottawattamie": 0.50,
             "Mills": 0.25, "Fremont": 0.25}
EAST_BAYS = {"Allamakee": 0.75, "Clayton": 0.75, "Dubuque": 0.75, "Jackson": 0.75,
             "Clinton": 0.50, "Scott": 0.50, "Louisa": 0.50, "Des Moines": 0.50}
SOUTH_BAYS = {"Scott": 0.50, "Lee": 0.50, "Des Moines": 0.50}

STEP = 0.25


def _steps(a: float, b: float) -> list[float]:
    count = round(abs(b - a) / STEP)
    return [round(a + (b - a) * i / count, 6) for i in range(count)]


def _side_points(x0: float, x1: float, y0: float, y1: float,
                 side: str, bay: float | None) -> list[tuple[float, float]]:
    """Points for one rectangle side, start corner included, end excluded.

    Sides run counterclockwise: south (west to east), east (south to north),
    north (east to west), west (north to south). A bay depth carves inward
    notches on every middle pair of quarter-steps per unit length.
    """
    if side == "S":
        base = [(x, y0) for x in _steps(x0, x1)]
        inward = (0.0, bay or 0.0)
    elif side == "E":
        base = [(x1, y) for y in _steps(y0, y1)]
        inward = (-(bay or 0.0), 0.0)
    elif side == "N":
        base = [(x, y1) for x in _steps(x1, x0)]
        inward = (0.0, -(bay or 0.0))
    else:
        base = [(x0, y) for y in _steps(y1, y0)]
        inward = (bay or 0.0, 0.0)
    if not bay:
        return base
    out = []
    for k, (px, py) in enumerate(base):
        indented = k % 4 in (2, 3)
        start_of_bay = k % 4 == 2
        end_of_bay = k % 4 == 0 and k > 0
        if end_of_bay:
            out.append((round(px + inward[0], 6), round(py + inward[1], 6)))
        if indented:
            if start_of_bay:
                out.append((px, py))
            out.append((round(px + inward[0], 6), round(py + inward[1], 6)))
        else:
            out.append((px, py))
    return out


def county_ring(name: str, x0: float, x1: float, y0: float, y1: float) -> list[tuple[float, float]]:
    ring = []
    ring += _side_points(x0, x1, y0, y1, "S", SOUTH_BAYS.get(name))
    ring += _side_points(x0, x1, y0, y1, "E", EAST_BAYS.get(name))
    ring += _side_points(x0, x1, y0, y1, "N", None)
    ring += _side_points(x0, x1, y0, y1, "W", WEST_BAYS.get(name))
    return ring


def slug(name: str) -> str:
    return name.lower().replace("'", "").replace(" ", "_")


def build_units() -> tuple[list[RawUnit], dict[str, int]]:
    units = []
    district_of = {}
    for name, pop, district, tier, x0, x1 in sorted(COUNTIES, key=lambda row: slug(row[0])):
        y1 = 10.0 - tier
        y0 = y1 - HEIGHT_OVERRIDES.get(name, 1.0)
        ring = county_ring(name, x0, x1, y0, y1)
        units.append(RawUnit(id=slug(name), population=pop, county=name,
                             polygons=(tuple(ring),)))
        district_of[slug(name)] = district
    return units, district_of


def main() -> int:
    units, district_of = build_units()
    assert len(units) == 99, len(units)
    assert sum(u.population for u in units) == STATE_POP_2010

    graph = build_graph(units)
    plan = DistrictingPlan.from_assignment(
        graph, [district_of[b.id] for b in graph.blocks], 4)
    for d, expected in OFFICIAL_DISTRICT_POPS.items():
        actual = int(plan.district_pops[d])
        assert actual == expected, f"district {d}: {actual} != {expected}"
    validate_plan(graph, plan)
    for d in range(4):
        assert is_contiguous(graph, plan, d)

    metrics = evaluate_plan(graph, plan)
    print(f"counties: {graph.n}, edges: {len(graph.edges)}")
    print(f"official Dev: {metrics.dev_percent:.5f}%  (published: 0.005%)")
    print(f"official mean compactness: {metrics.mean_compactness:.4f}  (published: 0.78)")
    print(f"district compactness: {[round(c, 3) for c in metrics.district_compactness]}")

    DATA_DIR.mkdir(parents=True, exist_ok=True)

    pop_path = DATA_DIR / "iowa2010_population.csv"
    with pop_path.open("w", encoding="utf-8") as fh:
        fh.write("id,population,county\n")
        for u in units:
            fh.write(f"{u.id},{u.population},{u.county}\n")

    geo_path = DATA_DIR / "iowa2010_counties.geojson"
    features = []
    for u in units:
        ring = [list(pt) for pt in u.polygons[0]] + [list(u.polygons[0][0])]
        features.append({"type": "Feature",
                         "properties": {"id": u.id, "county": u.county},
                         "geometry": {"type": "Polygon", "coordinates": [ring]}})
    with geo_path.open("w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh)
        fh.write("\n")

    adj_path = DATA_DIR / "iowa2010_adjacency.json"
    with adj_path.open("w", encoding="utf-8") as fh:
        json.dump({
            "vertices": [{"id": b.id, "population": int(b.population), "county": b.county}
                         for b in graph.blocks],
            "edges": [list(e) for e in graph.edges],
        }, fh, indent=1)
        fh.write("\n")

    plan_path = DATA_DIR / "iowa2011_congress_plan.json"
    doc = plan_document(graph, plan, config=None, seed=0, metrics=metrics)
    with plan_path.open("w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")

    for path in (pop_path, geo_path, adj_path, plan_path):
        print(f"wrote {path.relative_to(DATA_DIR.parent.parent.parent)} "
              f"sha256={file_sha256(path)[:12]}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
# Copyright 2026 The Tempo Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the synthetic GeoJSON road networks under data/.

Two networks are produced:

* data/networks/corridor.geojson -- a north-south motorway with a river
  crossing mid-way, two motorway detour loops (an eastern and a western
  one) and a short local bypass next to the crossing.  Used by the
  closure and detour-activation commands.

* data/rivertown/network.geojson -- a small town on a 6x8 street grid
  with four signposted exits of unequal capacity.  Used by the
  evacuation command.

Link lengths are not declared; the loader derives them from the
coordinates, so the geometry here is the single source of truth.
Output is deterministic.  Run from the repository root:

    python3 tools/make_fixtures.py
"""

import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent


def feature(link_id, from_node, to_node, coords, lanes, speed, capacity, road_class):
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": {
            "id": link_id,
            "from_node": from_node,
            "to_node": to_node,
            "lanes": lanes,
            "free_flow_kmh": speed,
            "capacity_vph": capacity,
            "road_class": road_class,
        },
    }


def write_collection(path, features):
    doc = {"type": "FeatureCollection", "features": features}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {path} ({len(features)} links)")


def corridor():
    nodes = {
        # main carriageway, north to south; bb is the mid-river pier
        "m1": (9.70, 45.30),
        "m2": (9.70, 45.25),
        "bb": (9.70, 45.22),
        "m3": (9.70, 45.19),
        "m4": (9.70, 45.05),
        "m5": (9.70, 45.00),
        # local bypass just west of the crossing
        "u1": (9.66, 45.24),
        "u2": (9.66, 45.20),
        # eastern motorway loop (rejoins at m5)
        "p1": (9.82, 45.22),
        "p2": (9.82, 45.08),
        # western motorway loop (rejoins at m4)
        "q1": (9.58, 45.22),
        "q2": (9.58, 45.08),
    }

    def hw(link_id, a, b, speed=120, lanes=2, cap=6000):
        return feature(link_id, a, b, [list(nodes[a]), list(nodes[b])],
                       lanes, speed, cap, "highway")

    def lc(link_id, a, b, speed=50, lanes=1, cap=1200):
        return feature(link_id, a, b, [list(nodes[a]), list(nodes[b])],
                       lanes, speed, cap, "local")

    features = [
        hw("a1_01", "m1", "m2"),
        hw("a1_bridge_n", "m2", "bb"),
        hw("a1_bridge_s", "bb", "m3"),
        hw("a1_02", "m3", "m4"),
        hw("a1_03", "m4", "m5"),
        lc("loc_01", "m2", "u1"),
        lc("loc_02", "u1", "u2"),
        lc("loc_03", "u2", "m3"),
        hw("mcl_01", "m2", "p1", speed=110, cap=4000),
        hw("mcl_02", "p1", "p2", speed=110, cap=4000),
        hw("mcl_03", "p2", "m5", speed=110, cap=4000),
        hw("mcr_01", "m2", "q1", speed=110, cap=4000),
        hw("mcr_02", "q1", "q2", speed=110, cap=4000),
        hw("mcr_03", "q2", "m4", speed=110, cap=4000),
    ]
    write_collection(ROOT / "data" / "networks" / "corridor.geojson", features)


def rivertown():
    rows, cols = 8, 6
    lon0, lat0 = 9.400, 45.200
    dlon, dlat = 0.004, 0.003

    def node(r, c):
        return f"g{r}_{c}"

    def coord(r, c):
        return [lon0 + c * dlon, lat0 - r * dlat]

    features = []

    def street(link_id, a, b, ca, cb):
        features.append(feature(link_id, a, b, [ca, cb], 1, 40, 400, "local"))

    # two-way street grid
    for r in range(rows):
        for c in range(cols - 1):
            a, b = node(r, c), node(r, c + 1)
            street(f"st_h{r}_{c}_e", a, b, coord(r, c), coord(r, c + 1))
            street(f"st_h{r}_{c}_w", b, a, coord(r, c + 1), coord(r, c))
    for r in range(rows - 1):
        for c in range(cols):
            a, b = node(r, c), node(r + 1, c)
            street(f"st_v{r}_{c}_s", a, b, coord(r, c), coord(r + 1, c))
            street(f"st_v{r}_{c}_n", b, a, coord(r + 1, c), coord(r, c))

    # exit ramps: one-way out of town
    exits = [
        ("ex1", node(3, 0), "x1", coord(3, 0), [lon0 - 0.006, lat0 - 3 * dlat], 450),
        ("ex2", node(0, 3), "x2", coord(0, 3), [lon0 + 3 * dlon, lat0 + 0.004], 450),
        ("ex3", node(4, 5), "x3", coord(4, 5), [lon0 + 5 * dlon + 0.006, lat0 - 4 * dlat], 450),
        ("ex4", node(7, 2), "x4", coord(7, 2), [lon0 + 2 * dlon, lat0 - 7 * dlat - 0.004], 450),
    ]
    for link_id, a, b, ca, cb, cap in exits:
        features.append(feature(link_id, a, b, [ca, cb], 1, 60, cap, "local"))

    write_collection(ROOT / "data" / "rivertown" / "network.geojson", features)

    # zone table: row-major over the grid, richer fleets in the northern band
    zones = []
    for k in range(1, rows * cols + 1):
        r, c = (k - 1) // cols, (k - 1) % cols
        vehicles = 68 if 5 <= k <= 17 else 12
        if k == 1:
            vehicles = 16
        zones.append({"id": f"z{k:02d}", "node": node(r, c), "vehicles": vehicles})
    total = sum(z["vehicles"] for z in zones)
    assert total == 1308, total
    print(f"rivertown fleet: {total} vehicles across {len(zones)} zones")
    return zones


if __name__ == "__main__":
    corridor()
    zones = rivertown()
    # The zone table is printed for reference; data/rivertown/evacuation.json
    # embeds it together with exits, overrides and departure profiles.
    print(json.dumps(zones[:3], indent=2), "...")

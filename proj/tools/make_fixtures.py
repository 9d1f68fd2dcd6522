#!/usr/bin/env python3
# Copyright 2026 The Enwar Authors
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
"""Generates the synthetic 12-scene fixture dataset under tests/fixtures/scenes.

Two vehicles drive an urban street: unit 1 carries the LiDAR and cameras,
unit 2 carries the transmitter. Output is deterministic for a given seed.
"""

import argparse
import json
import math
import random
import struct
from pathlib import Path

R = 6_371_000.0
BASE_LAT, BASE_LON = 33.420750, -111.928890
SENSOR_HEIGHT = 1.7

# (scene, split, unit1 speed m/s, unit1 heading, unit2 dist m, unit2 bearing offset, unit2 speed, objects)
# objects: (class, forward m, left m, rotated)
SCENES = [
    ("s01", "build", 8.0, 90.0, 32.0, 20.0, 7.5,
     [("vehicle", 12.0, 2.0, False), ("pedestrian", 6.0, -5.0, False), ("pedestrian", 15.0, -6.5, False)]),
    ("s02", "build", 0.0, 90.0, 25.0, -35.0, 0.0,
     [("vehicle", -10.0, 0.5, False), ("cyclist", 8.0, -4.0, False)]),
    ("s03", "build", 11.0, 0.0, 41.0, 5.0, 10.0,
     [("vehicle", 20.0, 0.0, False), ("vehicle", -14.0, 3.5, False), ("pedestrian", 4.0, 7.0, False)]),
    ("s04", "build", 6.5, 270.0, 18.0, 160.0, 6.0,
     [("pedestrian", 9.0, 4.0, False), ("pedestrian", 9.0, 6.0, False), ("cyclist", -6.0, -3.5, False)]),
    ("s05", "build", 9.0, 180.0, 36.0, -10.0, 0.0,
     [("vehicle", 16.0, -1.5, False), ("vehicle", 7.0, 6.0, True)]),
    ("s06", "build", 4.0, 45.0, 28.0, 90.0, 4.5,
     [("cyclist", 10.0, 2.5, False), ("pedestrian", -5.0, -4.5, False)]),
    ("s07", "build", 12.0, 90.0, 44.0, -5.0, 12.5, []),
    ("s08", "build", 0.0, 0.0, 22.0, 200.0, 5.0,
     [("vehicle", 6.0, -4.0, False), ("vehicle", -9.0, -4.0, False), ("pedestrian", 3.0, 6.0, False),
      ("cyclist", 13.0, 5.0, False)]),
    ("s09", "build", 7.0, 135.0, 30.0, 30.0, 7.0,
     [("vehicle", 15.0, 5.0, False), ("pedestrian", -7.0, 5.5, False)]),
    ("s10", "build", 10.0, 315.0, 38.0, -25.0, 9.0,
     [("vehicle", 18.0, -3.0, False), ("cyclist", -11.0, 2.0, False)]),
    ("s11", "test", 8.5, 90.0, 27.0, 15.0, 8.0,
     [("vehicle", 13.0, 1.0, False), ("pedestrian", 5.0, -5.5, False)]),
    ("s12", "test", 0.0, 180.0, 21.0, -40.0, 3.0,
     [("cyclist", 7.0, 3.0, False), ("vehicle", -12.0, 0.0, False), ("pedestrian", 10.0, -6.0, False)]),
]

# length (along forward), width, height above ground, point count
SHAPES = {
    "vehicle": (4.5, 1.8, 1.5, 320),
    "cyclist": (1.7, 0.5, 1.6, 90),
    "pedestrian": (0.4, 0.4, 1.7, 70),
}

SECTORS = ["N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE",
           "S", "SSW", "SW", "WSW", "W", "WNW", "NW", "NNW"]
WORDS = {"vehicle": "car", "cyclist": "cyclist", "pedestrian": "pedestrian"}


def cardinal(bearing):
    return SECTORS[int(math.floor(((bearing % 360.0) + 11.25) / 22.5)) % 16]


def offset(lat, lon, east, north):
    dlat = math.degrees(north / R)
    dlon = math.degrees(east / (R * math.cos(math.radians(lat))))
    return lat + dlat, lon + dlon


def track(lat, lon, speed, heading, t0, n=5):
    fixes = []
    for i in range(n):
        d = speed * (i - (n - 1))  # last fix at (lat, lon)
        east = d * math.sin(math.radians(heading))
        north = d * math.cos(math.radians(heading))
        la, lo = offset(lat, lon, east, north)
        fixes.append((t0 + i, la, lo))
    return fixes


def to_sensor(east, north, heading):
    h = math.radians(heading)
    fwd = (math.sin(h), math.cos(h))
    left = (-math.cos(h), math.sin(h))
    return east * fwd[0] + north * fwd[1], east * left[0] + north * left[1]


def box_points(rng, cls, x, y, rotated):
    length, width, height, count = SHAPES[cls]
    if rotated:
        length, width = width, length
    pts = []
    for _ in range(count):
        px = x + rng.uniform(-length / 2, length / 2)
        py = y + rng.uniform(-width / 2, width / 2)
        pz = -SENSOR_HEIGHT + 0.2 + rng.uniform(0.0, height - 0.2)
        pts.append((px, py, pz, rng.uniform(0.2, 0.9)))
    return pts


def segment_hits_box(tx, ty, x, y, length, width):
    # Samples the sight line from the sensor origin to (tx, ty).
    for i in range(1, 200):
        s = i / 200.0
        px, py = tx * s, ty * s
        if abs(px - x) <= length / 2 and abs(py - y) <= width / 2:
            return True
    return False


def relative_words(x, y):
    along = "ahead of" if x >= 0 else "behind"
    side = "to the left" if y > 1.0 else ("to the right" if y < -1.0 else "in the same lane")
    return along, side


def describe_caption(objects, front):
    chosen = [o for o in objects if (o[1] >= 0) == front]
    view = "front" if front else "rear"
    if not chosen:
        return f"The {view} view shows an open urban road with buildings along both sides and no road users nearby."
    parts = []
    for cls, x, y, _ in chosen:
        _, side = relative_words(x, y)
        parts.append(f"a {WORDS[cls]} {side} about {abs(x):.0f} meters away")
    return (f"The {view} view shows a city street with " + ", ".join(parts) +
            ". Trees and a sidewalk line the road.")


def ground_truth(name, speed1, heading1, dist, bearing, speed2, objects, unit2_xy, blockers):
    lines = []
    if speed1 < 0.5:
        lines.append(f"Unit 1 is a receiving vehicle that is stationary.")
    else:
        lines.append(f"Unit 1 is a receiving vehicle moving toward the {cardinal(heading1)} at about {speed1:.0f} m/s.")
    lines.append(f"Unit 2 is the transmitting vehicle, about {dist:.0f} m from unit 1 toward the {cardinal(bearing)}.")
    if speed2 < 0.5:
        lines.append("Unit 2 is stationary.")
    else:
        lines.append(f"Unit 2 is moving at about {speed2:.0f} m/s.")
    if not objects:
        lines.append("No pedestrians, cyclists or other vehicles are near unit 1.")
    for cls, x, y, _ in objects:
        along, side = relative_words(x, y)
        rng = math.hypot(x, y)
        lines.append(f"A {cls} is about {rng:.0f} m {along} unit 1, {side}.")
    if blockers:
        kinds = ", ".join(sorted({b for b in blockers}))
        lines.append(f"The {kinds} between unit 1 and unit 2 may block the signal.")
        lines.append("The line of sight between unit 1 and unit 2 is likely obstructed.")
    else:
        lines.append("No object lies between unit 1 and unit 2.")
        lines.append("Unit 1 and unit 2 have a clear line of sight.")
    return " ".join(lines) + "\n"


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "scenes"))
    parser.add_argument("--seed", type=int, default=36)
    args = parser.parse_args()
    out = Path(args.out)
    for sub in ("gps", "lidar", "captions", "ground_truth"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)
    manifest = []
    for index, (name, split, speed1, heading1, dist, boff, speed2, objects) in enumerate(SCENES):
        t0 = 1_700_000_000 + 60 * index
        lat1, lon1 = offset(BASE_LAT, BASE_LON, 40.0 * index, -15.0 * index)
        bearing = (heading1 + boff) % 360.0
        lat2, lon2 = offset(lat1, lon1, dist * math.sin(math.radians(bearing)),
                            dist * math.cos(math.radians(bearing)))
        t1 = track(lat1, lon1, speed1, heading1, t0)
        t2 = track(lat2, lon2, speed2, heading1, t0)
        for unit, fixes in (("unit1", t1), ("unit2", t2)):
            with open(out / "gps" / f"{name}_{unit}.csv", "w") as f:
                for t, la, lo in fixes:
                    f.write(f"{t:.1f},{la:.8f},{lo:.8f}\n")

        ux, uy = to_sensor(dist * math.sin(math.radians(bearing)), dist * math.cos(math.radians(bearing)), heading1)
        points = []
        for cls, x, y, rotated in objects:
            points += box_points(rng, cls, x, y, rotated)
        if abs(ux) < 48 and abs(uy) < 48:
            points += box_points(rng, "vehicle", ux, uy, False)
        for _ in range(2500):  # ground plane, removed by the height band
            points.append((rng.uniform(-45, 45), rng.uniform(-45, 45), -SENSOR_HEIGHT + rng.uniform(-0.05, 0.05),
                           rng.uniform(0.0, 0.3)))
        for _ in range(12):  # isolated returns, below the cluster size floor
            points.append((rng.uniform(-45, 45), rng.uniform(-45, 45), rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.0)))

        blockers = []
        for cls, x, y, rotated in objects:
            length, width, _, _ = SHAPES[cls]
            if rotated:
                length, width = width, length
            if segment_hits_box(ux, uy, x, y, length, width):
                blockers.append(cls)

        text_cloud = name in ("s03", "s09")
        cloud_file = f"lidar/{name}.txt" if text_cloud else f"lidar/{name}.bin"
        if text_cloud:
            with open(out / cloud_file, "w") as f:
                for p in points:
                    f.write("%.4f %.4f %.4f %.3f\n" % p)
        else:
            with open(out / cloud_file, "wb") as f:
                f.write(b"LIDR" + struct.pack("<I", len(points)))
                for p in points:
                    f.write(struct.pack("<4f", *p))

        for front in (True, False):
            cam = "front" if front else "rear"
            with open(out / "captions" / f"{name}_{cam}.txt", "w") as f:
                f.write(describe_caption(objects, front) + "\n")
        with open(out / "ground_truth" / f"{name}.txt", "w") as f:
            f.write(ground_truth(name, speed1, heading1, dist, bearing, speed2, objects, (ux, uy), blockers))

        manifest.append({
            "scene_id": name, "timestamp": t0 + 4, "split": split,
            "gps": {"unit1": f"gps/{name}_unit1.csv", "unit2": f"gps/{name}_unit2.csv"},
            "cloud": cloud_file,
            "captions": {"front": f"captions/{name}_front.txt", "rear": f"captions/{name}_rear.txt"},
            "ground_truth": f"ground_truth/{name}.txt",
        })
    with open(out / "manifest.jsonl", "w") as f:
        for m in manifest:
            f.write(json.dumps(m, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()

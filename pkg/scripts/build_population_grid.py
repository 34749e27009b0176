"""Rebuild src/eosched/data/population_grid.csv.

Coarse 5 x 5 degree grid whose weights come from approximate metropolitan
populations (millions, rounded) spread with a Gaussian kernel. This is a
stand-in for a gridded population product: it only needs to put demand
where people are, at continental resolution.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

CELL_DEG = 5.0
KERNEL_SIGMA_DEG = 3.0

# (lat, lon, population in millions)
METROS = [
    # East Asia
    (35.7, 139.7, 37.0), (34.7, 135.5, 19.0), (35.2, 136.9, 9.5), (33.6, 130.4, 5.5), (43.1, 141.4, 2.6),
    (37.6, 127.0, 25.0), (35.2, 129.1, 3.4), (39.9, 116.4, 21.0), (31.2, 121.5, 27.0), (23.1, 113.3, 19.0),
    (22.5, 114.1, 17.0), (30.6, 114.3, 8.5), (29.6, 106.5, 16.0), (30.7, 104.1, 9.5), (34.3, 108.9, 8.0),
    (39.1, 117.2, 13.0), (32.1, 118.8, 9.0), (30.3, 120.2, 8.0), (41.8, 123.4, 7.5), (45.8, 126.5, 6.0),
    (36.1, 120.4, 6.0), (34.8, 113.7, 7.0), (28.2, 112.9, 6.0), (26.1, 119.3, 4.5), (25.0, 102.7, 4.5),
    (22.8, 108.4, 4.0), (36.1, 103.8, 3.5), (43.8, 87.6, 3.5), (38.0, 114.5, 5.0), (25.0, 121.5, 7.0),
    (47.9, 106.9, 1.6), (39.0, 125.8, 3.0),
    # South / South-East Asia
    (28.6, 77.2, 32.0), (19.1, 72.9, 21.0), (22.6, 88.4, 15.0), (13.1, 80.3, 11.5), (12.97, 77.6, 13.0),
    (17.4, 78.5, 10.5), (23.0, 72.6, 8.5), (18.5, 73.9, 7.0), (26.8, 80.9, 4.0), (26.9, 75.8, 4.0),
    (21.2, 72.8, 7.5), (25.6, 85.1, 2.5), (21.1, 79.1, 3.0), (24.9, 67.0, 17.0), (31.5, 74.3, 13.5),
    (33.7, 73.1, 3.0), (34.0, 71.5, 2.5), (23.8, 90.4, 22.0), (22.3, 91.8, 5.0), (27.7, 85.3, 1.5),
    (6.9, 79.9, 2.5), (13.8, 100.5, 11.0), (10.8, 106.7, 9.0), (21.0, 105.8, 5.0), (16.8, 96.2, 5.5),
    (3.1, 101.7, 8.5), (1.3, 103.8, 6.0), (-6.2, 106.8, 34.0), (-7.3, 112.7, 7.0), (-6.9, 107.6, 6.0),
    (3.6, 98.7, 4.5), (14.6, 121.0, 14.5), (10.3, 123.9, 3.0), (7.1, 125.6, 2.0), (11.6, 104.9, 2.3),
    # West / Central Asia
    (35.7, 51.4, 9.5), (36.3, 59.6, 3.5), (32.7, 51.7, 2.2), (41.0, 29.0, 15.5), (39.9, 32.9, 5.5),
    (38.4, 27.1, 3.0), (33.3, 44.4, 7.5), (24.7, 46.7, 7.5), (21.5, 39.2, 4.7), (25.3, 55.3, 3.0),
    (29.4, 48.0, 3.0), (33.9, 35.5, 2.4), (31.9, 35.9, 2.2), (32.1, 34.8, 4.2), (33.5, 36.3, 2.5),
    (41.3, 69.3, 2.5), (43.2, 76.9, 2.0), (34.5, 69.2, 4.5), (40.4, 49.9, 2.3), (41.7, 44.8, 1.1),
    (15.4, 44.2, 3.0),
    # Europe
    (51.5, -0.1, 9.5), (53.5, -2.2, 2.8), (52.5, -1.9, 2.6), (55.9, -4.3, 1.7), (53.3, -6.3, 1.4),
    (48.9, 2.4, 11.0), (45.8, 4.8, 1.7), (43.3, 5.4, 1.6), (50.6, 3.1, 1.2), (52.4, 4.9, 2.4),
    (51.9, 4.5, 1.0), (50.8, 4.4, 2.1), (51.2, 6.8, 11.0), (52.5, 13.4, 4.5), (53.6, 10.0, 3.2),
    (48.1, 11.6, 2.9), (50.1, 8.7, 2.5), (48.8, 9.2, 2.7), (47.4, 8.5, 1.4), (48.2, 16.4, 2.0),
    (50.1, 14.4, 1.3), (52.2, 21.0, 3.1), (50.1, 19.9, 1.5), (47.5, 19.0, 1.8), (44.4, 26.1, 1.8),
    (42.7, 23.3, 1.3), (44.8, 20.5, 1.4), (45.8, 16.0, 0.8), (37.98, 23.7, 3.2), (41.9, 12.5, 4.3),
    (45.5, 9.2, 4.9), (40.9, 14.3, 3.1), (45.1, 7.7, 1.8), (38.1, 13.4, 1.0), (40.4, -3.7, 6.7),
    (41.4, 2.2, 5.6), (39.5, -0.4, 1.6), (37.4, -6.0, 1.5), (38.7, -9.1, 2.9), (41.2, -8.6, 1.7),
    (59.3, 18.1, 1.6), (59.9, 10.8, 1.1), (55.7, 12.6, 2.0), (60.2, 24.9, 1.5), (55.8, 37.6, 17.0),
    (59.9, 30.3, 5.5), (56.3, 44.0, 1.3), (55.8, 49.1, 1.3), (56.8, 60.6, 1.5), (55.0, 82.9, 1.6),
    (53.2, 50.2, 1.2), (50.5, 30.5, 3.0), (49.99, 36.2, 1.4), (46.5, 30.7, 1.0), (53.9, 27.6, 2.0),
    (54.7, 25.3, 0.7), (56.9, 24.1, 0.6),
    # Africa
    (30.0, 31.2, 22.0), (31.2, 29.9, 5.5), (6.5, 3.4, 15.5), (9.1, 7.5, 3.8), (12.0, 8.5, 4.2),
    (7.4, 3.9, 3.9), (6.3, 5.6, 1.7), (5.6, -0.2, 2.6), (6.7, -1.6, 3.5), (5.3, -4.0, 5.5),
    (14.7, -17.4, 3.3), (12.6, -8.0, 2.8), (12.4, -1.5, 3.0), (13.5, 2.1, 1.4), (9.5, -13.7, 2.0),
    (-4.3, 15.3, 16.0), (-11.7, 27.5, 2.4), (-8.8, 13.2, 9.0), (-1.3, 36.8, 5.0), (-6.8, 39.3, 7.5),
    (0.3, 32.6, 3.6), (9.0, 38.7, 5.5), (2.0, 45.3, 2.8), (15.6, 32.5, 6.0), (-1.9, 30.1, 1.3),
    (-26.2, 28.0, 10.5), (-25.7, 28.2, 2.8), (-33.9, 18.4, 4.8), (-29.9, 31.0, 3.2), (-17.8, 31.0, 1.7),
    (-15.4, 28.3, 3.0), (-25.97, 32.6, 1.8), (-18.9, 47.5, 3.8), (33.6, -7.6, 3.8), (34.0, -6.8, 1.9),
    (36.8, 3.1, 2.9), (36.8, 10.2, 2.4), (32.9, 13.2, 1.2), (4.05, 9.7, 3.9), (3.9, 11.5, 4.3),
    (-4.8, 11.9, 1.3), (11.6, 43.1, 0.6), (-13.96, 33.8, 1.3),
    # North America
    (40.7, -74.0, 19.0), (34.1, -118.2, 12.5), (41.9, -87.6, 8.9), (32.8, -96.8, 7.6), (29.8, -95.4, 7.1),
    (38.9, -77.0, 6.3), (39.95, -75.2, 5.7), (25.8, -80.2, 6.1), (33.7, -84.4, 6.1), (42.4, -71.1, 4.9),
    (37.8, -122.4, 4.7), (37.3, -121.9, 2.0), (33.4, -112.1, 4.9), (34.0, -117.4, 4.6), (42.3, -83.0, 4.3),
    (47.6, -122.3, 4.0), (44.98, -93.3, 3.7), (32.7, -117.2, 3.3), (27.9, -82.5, 3.2), (39.7, -105.0, 3.0),
    (38.6, -90.2, 2.8), (39.3, -76.6, 2.8), (35.2, -80.8, 2.7), (28.5, -81.4, 2.7), (29.4, -98.5, 2.6),
    (45.5, -122.7, 2.5), (38.6, -121.5, 2.4), (40.4, -80.0, 2.3), (36.2, -115.1, 2.3), (30.3, -97.7, 2.4),
    (39.1, -84.5, 2.2), (39.1, -94.6, 2.2), (39.96, -83.0, 2.1), (39.8, -86.2, 2.1), (41.5, -81.7, 2.1),
    (36.2, -86.8, 2.0), (43.7, -79.4, 6.4), (45.5, -73.6, 4.3), (49.3, -123.1, 2.6), (51.0, -114.1, 1.5),
    (53.5, -113.5, 1.4), (45.4, -75.7, 1.4), (19.4, -99.1, 22.0), (20.7, -103.3, 5.3), (25.7, -100.3, 5.3),
    (19.0, -98.2, 3.2), (32.5, -117.0, 2.2), (21.2, -86.8, 0.9), (14.6, -90.5, 3.0), (13.7, -89.2, 1.1),
    (14.1, -87.2, 1.4), (12.1, -86.3, 1.1), (9.9, -84.1, 1.4), (9.0, -79.5, 1.9), (23.1, -82.4, 2.1),
    (18.5, -69.9, 3.5), (18.5, -72.3, 2.8), (18.0, -76.8, 1.2), (18.4, -66.1, 2.0),
    # South America
    (-23.5, -46.6, 22.5), (-22.9, -43.2, 13.5), (-19.9, -43.9, 6.1), (-15.8, -47.9, 4.8), (-30.0, -51.2, 4.1),
    (-25.4, -49.3, 3.6), (-8.05, -34.9, 4.1), (-12.97, -38.5, 3.9), (-3.7, -38.5, 4.1), (-3.1, -60.0, 2.3),
    (-1.5, -48.5, 2.5), (-16.7, -49.3, 2.6), (-34.6, -58.4, 15.5), (-31.4, -64.2, 1.6), (-32.9, -60.7, 1.5),
    (-33.4, -70.6, 6.9), (-12.0, -77.0, 11.0), (4.7, -74.1, 11.5), (6.2, -75.6, 4.1), (3.4, -76.5, 2.8),
    (10.96, -74.8, 2.3), (10.5, -66.9, 3.0), (10.6, -71.6, 2.3), (-0.2, -78.5, 2.0), (-2.2, -79.9, 3.1),
    (-16.5, -68.1, 1.9), (-17.8, -63.2, 1.8), (-25.3, -57.6, 2.3), (-34.9, -56.2, 1.8),
    # Oceania
    (-33.9, 151.2, 5.3), (-37.8, 145.0, 5.1), (-27.5, 153.0, 2.6), (-31.95, 115.9, 2.1), (-34.9, 138.6, 1.4),
    (-36.8, 174.8, 1.7), (-41.3, 174.8, 0.4), (-9.4, 147.2, 0.4), (21.3, -157.9, 1.0),
]


def kernel(lat, lon, clat, clon):
    dlon = (lon - clon + 180.0) % 360.0 - 180.0
    dx = dlon * math.cos(math.radians(lat))
    dy = lat - clat
    r2 = dx * dx + dy * dy
    if r2 > (3.5 * KERNEL_SIGMA_DEG) ** 2:
        return 0.0
    return math.exp(-r2 / (2.0 * KERNEL_SIGMA_DEG**2))


def main(out: Path) -> None:
    rows = []
    nlat, nlon = int(180 / CELL_DEG), int(360 / CELL_DEG)
    for i in range(nlat):
        lat = -90.0 + (i + 0.5) * CELL_DEG
        for j in range(nlon):
            lon = -180.0 + (j + 0.5) * CELL_DEG
            w = sum(pop * kernel(lat, lon, clat, clon) for clat, clon, pop in METROS)
            rows.append((lat, lon, w))
    total = sum(w for *_, w in rows)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lat", "lon", "half_size_deg", "weight"])
        for lat, lon, w in rows:
            writer.writerow([f"{lat:.1f}", f"{lon:.1f}", f"{CELL_DEG / 2:.1f}", f"{w / total:.8f}"])


if __name__ == "__main__":
    main(Path(__file__).resolve().parents[1] / "src" / "eosched" / "data" / "population_grid.csv")

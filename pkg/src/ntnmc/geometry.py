"""Spherical-Earth geometry: satellite track, elevation/slant range, cell layout.

Positions are kept as latitude/longitude on a sphere of radius EARTH_RADIUS_M.
The terrestrial layout is built on a local tangent plane around the network
center (sub-meter placement error at the ~10 km scale used here) and converted
back to lat/lon; all distances are then measured spherically.
"""

import math
from dataclasses import dataclass

from .engine import NS_PER_S

EARTH_RADIUS_M = 6_371_000.0
M_PER_DEG = EARTH_RADIUS_M * math.pi / 180.0  # ~111194.93 m per degree of arc


@dataclass(frozen=True)
class GroundPosition:
    lat_deg: float
    lon_deg: float
    alt_m: float = 0.0


def central_angle_rad(a, b):
    """Great-circle central angle between two ground positions (haversine)."""
    la1 = math.radians(a.lat_deg)
    la2 = math.radians(b.lat_deg)
    dla = la2 - la1
    dlo = math.radians(b.lon_deg - a.lon_deg)
    h = math.sin(dla / 2.0) ** 2 + math.cos(la1) * math.cos(la2) * math.sin(dlo / 2.0) ** 2
    return 2.0 * math.asin(min(1.0, math.sqrt(h)))


def ground_distance_m(a, b):
    return EARTH_RADIUS_M * central_angle_rad(a, b)


def destination(pos, bearing_deg, distance_m):
    """Great-circle destination from `pos` along initial bearing (deg from north)."""
    delta = distance_m / EARTH_RADIUS_M
    theta = math.radians(bearing_deg)
    la1 = math.radians(pos.lat_deg)
    lo1 = math.radians(pos.lon_deg)
    sin_la2 = math.sin(la1) * math.cos(delta) + math.cos(la1) * math.sin(delta) * math.cos(theta)
    la2 = math.asin(max(-1.0, min(1.0, sin_la2)))
    lo2 = lo1 + math.atan2(
        math.sin(theta) * math.sin(delta) * math.cos(la1),
        math.cos(delta) - math.sin(la1) * sin_la2,
    )
    lon = math.degrees(lo2)
    if lon > 180.0:
        lon -= 360.0
    elif lon < -180.0:
        lon += 360.0
    return GroundPosition(math.degrees(la2), lon, pos.alt_m)


def local_offset(ref, east_m, north_m):
    """Point at a small metric offset from `ref` (equirectangular inverse)."""
    lat = ref.lat_deg + north_m / M_PER_DEG
    lon = ref.lon_deg + east_m / (M_PER_DEG * math.cos(math.radians(ref.lat_deg)))
    return GroundPosition(lat, lon)


def bearing_deg(a, b):
    """Initial bearing from a to b, degrees clockwise from north."""
    la1 = math.radians(a.lat_deg)
    la2 = math.radians(b.lat_deg)
    dlo = math.radians(b.lon_deg - a.lon_deg)
    y = math.sin(dlo) * math.cos(la2)
    x = math.cos(la1) * math.sin(la2) - math.sin(la1) * math.cos(la2) * math.cos(dlo)
    return math.degrees(math.atan2(y, x)) % 360.0


class SatelliteTrack:
    """Circular-orbit subpoint propagation along a great circle.

    The subpoint advances at the orbital speed scaled to the ground,
    v_ground = v_orbit * R_E / (R_E + h).
    """

    def __init__(self, epoch_subpoint, altitude_m, orbital_speed_ms, heading_deg=0.0):
        self.epoch_subpoint = epoch_subpoint
        self.altitude_m = altitude_m
        self.orbital_speed_ms = orbital_speed_ms
        self.heading_deg = heading_deg
        self.ground_speed_ms = orbital_speed_ms * EARTH_RADIUS_M / (EARTH_RADIUS_M + altitude_m)

    def subpoint_at(self, t_ns):
        dist = self.ground_speed_ms * (t_ns / NS_PER_S)
        if dist == 0.0:
            return self.epoch_subpoint
        return destination(self.epoch_subpoint, self.heading_deg, dist)


def slant_range_m(elevation_rad, altitude_m):
    """Slant range to a satellite at altitude h seen under elevation eps.

    d = sqrt(R_E^2 sin^2(eps) + h^2 + 2 h R_E) - R_E sin(eps); reduces to
    exactly h at zenith.
    """
    rs = EARTH_RADIUS_M * math.sin(elevation_rad)
    return math.sqrt(rs * rs + altitude_m * altitude_m + 2.0 * altitude_m * EARTH_RADIUS_M) - rs


def elevation_and_slant(ue_pos, subpoint, altitude_m):
    """Elevation (deg) and slant range (m) from a ground point to the satellite.

    Returns None when the satellite is at or below the horizon (elevation <= 0);
    callers treat the link as unavailable.
    """
    psi = central_angle_rad(ue_pos, subpoint)
    k = EARTH_RADIUS_M / (EARTH_RADIUS_M + altitude_m)
    elev = math.atan2(math.cos(psi) - k, math.sin(psi))
    if elev <= 0.0:
        return None
    return math.degrees(elev), slant_range_m(elev, altitude_m)


@dataclass(frozen=True)
class Sector:
    sector_id: int
    site_id: int
    position: GroundPosition
    boresight_deg: float


def build_tn_layout(center, isd_m, n_sites=3, sectors_per_site=3):
    """Tri-sector sites on a triangular grid with the given inter-site distance.

    Three sites form an equilateral triangle (circumradius isd/sqrt(3)) around
    `center`; additional sites, if ever asked for, extend the same grid. Sector
    boresights are 0/120/240 deg at every site.
    """
    site_positions = []
    if n_sites == 1:
        site_positions.append(center)
    else:
        circum = isd_m / math.sqrt(3.0)
        for i in range(n_sites):
            ang = math.radians(90.0 + 120.0 * i)  # vertex angles 90, 210, 330
            east = circum * math.cos(ang)
            north = circum * math.sin(ang)
            site_positions.append(local_offset(center, east, north))

    sectors = []
    sid = 0
    for site_id, pos in enumerate(site_positions):
        for k in range(sectors_per_site):
            sectors.append(Sector(sid, site_id, pos, (360.0 / sectors_per_site) * k))
            sid += 1
    return sectors


def drop_ues_in_sector(sector, rng, n_ue, min_dist_m, max_dist_m):
    """Uniform-area drop in the 120-degree wedge annulus in front of a sector."""
    out = []
    r0sq = min_dist_m * min_dist_m
    r1sq = max_dist_m * max_dist_m
    for _ in range(n_ue):
        r = math.sqrt(r0sq + (r1sq - r0sq) * rng.random())
        az = sector.boresight_deg + (rng.random() - 0.5) * 120.0
        east = r * math.sin(math.radians(az))
        north = r * math.cos(math.radians(az))
        out.append(local_offset(sector.position, east, north))
    return out


def hex_ring(n):
    """Axial coordinates of the n-th hexagonal ring around the origin."""
    if n == 0:
        return [(0, 0)]
    dirs = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)]
    q, r = -n, n  # start at n steps in direction (-1, 1)
    out = []
    for d in range(6):
        dq, dr = dirs[d]
        for _ in range(n):
            out.append((q, r))
            q += dq
            r += dr
    return out


def hex_color(q, r):
    """Reuse-3 coloring of the hex lattice; co-channel cells share a color."""
    return (q - r) % 3


def ntn_beam_grid(center, pitch_m, tiers=2):
    """Beam centers (axial coords, ground positions, colors) for the beam lattice.

    Beam 0 is the serving beam at `center`; two tiers (6 + 12 beams) of
    wrap-around beams surround it. Centers are earth-fixed for the whole run.
    """
    beams = []
    for n in range(tiers + 1):
        for q, r in hex_ring(n):
            east = pitch_m * (q + r / 2.0)
            north = pitch_m * (math.sqrt(3.0) / 2.0) * r
            pos = center if (q, r) == (0, 0) else local_offset(center, east, north)
            beams.append((q, r, pos, hex_color(q, r)))
    return beams

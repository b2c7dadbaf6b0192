"""Urban scenario generation and mobility.

The world is a (default 1 km x 1 km) area holding a 5x5 grid of rectangular
buildings at 50% occupancy, S small cells (street level or rooftop), U
terrestrial users, one authenticated UAV pinned at the configured 3-D
distance from its serving cell, and M jammer UAVs at random airborne
positions. Scenario objects are immutable snapshots; `step_mobility`
returns a new snapshot advanced by dt.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, InfeasiblePlacement

USER_HEIGHT_M = 1.5
AUTH_UAV_ALTITUDE_M = 100.0
ATTACKER_ALTITUDE_RANGE_M = (30.0, 120.0)
ATTACKER_STANDOFF_M = 1.0  # keeps link distance inside the pathloss domain

BUILDING_GRID = 5
BUILDING_OCCUPANCY = 0.5
BUILDING_HEIGHT_RANGE_M = (10.0, 40.0)
BUILDING_FILL_RANGE = (0.3, 0.7)  # footprint side as a fraction of a grid cell

PLACEMENT_RETRIES = 10_000

# Table-faithful domains; other values are allowed but flagged non-canonical.
CANONICAL_USERS = (0, 3, 5, 10, 20)
CANONICAL_ATTACKERS = (0, 1, 2, 3, 4)
CANONICAL_ATTACKER_POWERS_DBM = (0.0, 2.0, 10.0, 20.0)
CANONICAL_DISTANCES_M = (100.0, 200.0, 500.0)

MASK64 = 0xFFFF_FFFF_FFFF_FFFF

# fixed stream tags so scenario/mobility/channel randomness never collide
_TAG_PLACEMENT = 0
_TAG_MOBILITY = 1


def seeded_rng(seed, *tags):
    """Deterministic generator from a 64-bit seed plus integer stream tags."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & MASK64, *tags]))


class MobilityGroup(enum.Enum):
    NONE_SPEED = "none_speed"
    ATTACKER_SPEED = "attacker_speed"
    USER_SPEED = "user_speed"
    BOTH_SPEED = "both_speed"

    @property
    def attackers_move(self):
        return self in (MobilityGroup.ATTACKER_SPEED, MobilityGroup.BOTH_SPEED)

    @property
    def users_move(self):
        return self in (MobilityGroup.USER_SPEED, MobilityGroup.BOTH_SPEED)


class Role(enum.Enum):
    SMALL_CELL = "SmallCell"
    USER = "User"
    AUTH_UAV = "AuthUav"
    ATTACKER = "Attacker"


@dataclass(frozen=True)
class ScenarioConfig:
    num_users: int = 0
    num_attackers: int = 0
    num_small_cells: int = 10
    num_auth_uavs: int = 1
    attacker_power_dbm: float = 20.0
    auth_uav_power_dbm: float = 2.0
    small_cell_power_dbm: float = 4.0
    serving_distance_m: float = 100.0
    mobility_group: MobilityGroup = MobilityGroup.NONE_SPEED
    speed_mps: float = 10.0
    sim_time_s: float = 20.0
    area_m: tuple = (1000.0, 1000.0)
    small_cell_height_m: float = 10.0
    seed: int = 0

    def validate(self):
        if self.num_users < 0 or self.num_attackers < 0 or self.num_small_cells < 1:
            raise ConfigError("node counts must be non-negative (and at least one cell)")
        if self.num_auth_uavs != 1:
            raise ConfigError("exactly one authenticated UAV is supported")
        if self.sim_time_s <= 0:
            raise ConfigError("sim_time_s must be positive")
        if self.area_m[0] <= 0 or self.area_m[1] <= 0:
            raise ConfigError("area dimensions must be positive")
        if self.speed_mps < 0:
            raise ConfigError("speed_mps must be non-negative")
        if self.serving_distance_m <= 0:
            raise ConfigError("serving_distance_m must be positive")
        if not isinstance(self.mobility_group, MobilityGroup):
            raise ConfigError("mobility_group must be a MobilityGroup")

    @property
    def is_canonical(self):
        """True when every parameter sits in the paper-faithful Table I domain."""
        return (
            self.num_users in CANONICAL_USERS
            and self.num_attackers in CANONICAL_ATTACKERS
            and self.attacker_power_dbm in CANONICAL_ATTACKER_POWERS_DBM
            and self.auth_uav_power_dbm == 2.0
            and self.small_cell_power_dbm == 4.0
            and self.serving_distance_m in CANONICAL_DISTANCES_M
            and self.speed_mps == 10.0
            and self.sim_time_s == 20.0
            and self.area_m == (1000.0, 1000.0)
            and self.num_small_cells == 10
            and self.small_cell_height_m == 10.0
        )


@dataclass(frozen=True)
class Building:
    x0: float
    y0: float
    x1: float
    y1: float
    height: float

    def contains_xy(self, x, y):
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def contains_point(self, p):
        return self.contains_xy(p[0], p[1]) and p[2] < self.height


@dataclass(frozen=True)
class Node:
    id: int
    role: Role
    position: np.ndarray  # 3-D meters
    velocity: np.ndarray  # 3-D m/s
    tx_power_dbm: float
    serving_cell: int | None = None


@dataclass(frozen=True)
class Scenario:
    config: ScenarioConfig
    seed: int
    time_s: float
    nodes: tuple
    buildings: tuple
    user_waypoints: tuple  # aligned with users, z fixed at USER_HEIGHT_M
    step_count: int = 0

    def cells(self):
        return [n for n in self.nodes if n.role is Role.SMALL_CELL]

    def users(self):
        return [n for n in self.nodes if n.role is Role.USER]

    def attackers(self):
        return [n for n in self.nodes if n.role is Role.ATTACKER]

    def auth_uav(self):
        for n in self.nodes:
            if n.role is Role.AUTH_UAV:
                return n
        raise ValueError("scenario has no authenticated UAV")


def _inside_any_building(p, buildings):
    return any(b.contains_point(p) for b in buildings)


def _inside_any_footprint(x, y, buildings):
    return any(b.contains_xy(x, y) for b in buildings)


def _make_buildings(rng, area):
    """5x5 grid, each cell holding one rectangular building with prob. 1/2."""
    cw, ch = area[0] / BUILDING_GRID, area[1] / BUILDING_GRID
    out = []
    for i in range(BUILDING_GRID):
        for j in range(BUILDING_GRID):
            if rng.random() >= BUILDING_OCCUPANCY:
                continue
            w = rng.uniform(*BUILDING_FILL_RANGE) * cw
            d = rng.uniform(*BUILDING_FILL_RANGE) * ch
            x0 = i * cw + rng.uniform(0.0, cw - w)
            y0 = j * ch + rng.uniform(0.0, ch - d)
            h = rng.uniform(*BUILDING_HEIGHT_RANGE_M)
            out.append(Building(x0, y0, x0 + w, y0 + d, h))
    return tuple(out)


def _sample_outdoor_xy(rng, area, buildings):
    for _ in range(PLACEMENT_RETRIES):
        x, y = rng.uniform(0.0, area[0]), rng.uniform(0.0, area[1])
        if not _inside_any_footprint(x, y, buildings):
            return x, y
    raise InfeasiblePlacement("could not place an outdoor ground node")


def _sample_waypoint(rng, area, buildings):
    x, y = _sample_outdoor_xy(rng, area, buildings)
    return np.array([x, y, USER_HEIGHT_M])


def _place_auth_uav(rng, config, cells, buildings):
    """UAV at exactly serving_distance_m (3-D) from a randomly drawn serving cell."""
    d = config.serving_distance_m
    for _ in range(PLACEMENT_RETRIES):
        ci = int(rng.integers(len(cells)))
        cell = cells[ci]
        dz = AUTH_UAV_ALTITUDE_M - cell.position[2]
        if d <= abs(dz):
            continue
        r_h = math.sqrt(d * d - dz * dz)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        x = cell.position[0] + r_h * math.cos(theta)
        y = cell.position[1] + r_h * math.sin(theta)
        if not (0.0 <= x <= config.area_m[0] and 0.0 <= y <= config.area_m[1]):
            continue
        p = np.array([x, y, AUTH_UAV_ALTITUDE_M])
        if _inside_any_building(p, buildings):
            continue
        return p, ci
    raise InfeasiblePlacement(
        f"serving distance {d} m unreachable inside area {config.area_m}"
    )


def generate_scenario(config: ScenarioConfig, rng_seed=None) -> Scenario:
    """Build the t=0 snapshot; pure function of (config, seed)."""
    config.validate()
    seed = config.seed if rng_seed is None else int(rng_seed)
    rng = seeded_rng(seed, _TAG_PLACEMENT)

    area = config.area_m
    buildings = _make_buildings(rng, area)

    nodes = []
    # small cells: street-level by default, rooftop if drawn over a footprint
    for i in range(config.num_small_cells):
        x, y = rng.uniform(0.0, area[0]), rng.uniform(0.0, area[1])
        z = config.small_cell_height_m
        for b in buildings:
            if b.contains_xy(x, y):
                z = b.height
                break
        nodes.append(
            Node(len(nodes), Role.SMALL_CELL, np.array([x, y, z]),
                 np.zeros(3), config.small_cell_power_dbm)
        )
    cells = list(nodes)

    # users at street level, outdoors, served by the nearest cell; users
    # transmit uplink at the UE power class (= auth UAV power)
    for _ in range(config.num_users):
        x, y = _sample_outdoor_xy(rng, area, buildings)
        p = np.array([x, y, USER_HEIGHT_M])
        dists = [float(np.linalg.norm(p - c.position)) for c in cells]
        nodes.append(
            Node(len(nodes), Role.USER, p, np.zeros(3),
                 config.auth_uav_power_dbm, serving_cell=int(np.argmin(dists)))
        )

    uav_pos, serving = _place_auth_uav(rng, config, cells, buildings)
    nodes.append(
        Node(len(nodes), Role.AUTH_UAV, uav_pos, np.zeros(3),
             config.auth_uav_power_dbm, serving_cell=serving)
    )

    for _ in range(config.num_attackers):
        for _ in range(PLACEMENT_RETRIES):
            p = np.array([
                rng.uniform(0.0, area[0]),
                rng.uniform(0.0, area[1]),
                rng.uniform(*ATTACKER_ALTITUDE_RANGE_M),
            ])
            if not _inside_any_building(p, buildings):
                break
        else:
            raise InfeasiblePlacement("could not place an airborne attacker")
        nodes.append(
            Node(len(nodes), Role.ATTACKER, p, np.zeros(3), config.attacker_power_dbm)
        )

    # initial velocities and waypoints for whoever moves under this group
    waypoints = []
    group = config.mobility_group
    out = []
    for n in nodes:
        v = np.zeros(3)
        if n.role is Role.ATTACKER and group.attackers_move:
            delta = uav_pos - n.position
            dist = float(np.linalg.norm(delta))
            if dist > 1e-9:
                v = config.speed_mps * delta / dist
        if n.role is Role.USER and group.users_move:
            wp = _sample_waypoint(rng, area, buildings)
            waypoints.append(wp)
            delta = wp - n.position
            dist = float(np.linalg.norm(delta))
            if dist > 1e-9:
                v = config.speed_mps * delta / dist
        out.append(replace(n, velocity=v))

    return Scenario(
        config=config, seed=seed, time_s=0.0, nodes=tuple(out),
        buildings=buildings, user_waypoints=tuple(waypoints),
    )


def _step_attacker(node, uav_pos, speed, dt, buildings):
    delta = uav_pos - node.position
    dist = float(np.linalg.norm(delta))
    step = speed * dt
    reach = max(dist - ATTACKER_STANDOFF_M, 0.0)
    move = min(step, reach)
    if move <= 0.0 or dist <= 1e-12:
        return replace(node, velocity=np.zeros(3))
    tentative = node.position + (move / dist) * delta
    if _inside_any_building(tentative, buildings):
        # climb at full speed instead of flying into the block
        tentative = node.position + np.array([0.0, 0.0, step])
    v = (tentative - node.position) / dt
    return replace(node, position=tentative, velocity=v)


def _step_user(node, wp, speed, dt, area, buildings, rng):
    delta = wp - node.position
    dist = float(np.linalg.norm(delta))
    step = speed * dt
    if dist <= step:
        tentative = wp.copy()
        new_wp = _sample_waypoint(rng, area, buildings)
    else:
        tentative = node.position + (step / dist) * delta
        new_wp = wp
    tentative[0] = min(max(tentative[0], 0.0), area[0])
    tentative[1] = min(max(tentative[1], 0.0), area[1])
    if _inside_any_footprint(tentative[0], tentative[1], buildings):
        # hold position this step, try a fresh waypoint next time
        return replace(node, velocity=np.zeros(3)), _sample_waypoint(rng, area, buildings)
    v = (tentative - node.position) / dt
    return replace(node, position=tentative, velocity=v), new_wp


def step_mobility(scenario: Scenario, dt: float) -> Scenario:
    """Advance dt seconds; returns a new snapshot (associations stay fixed)."""
    if dt <= 0:
        raise ConfigError("dt must be positive")
    cfg = scenario.config
    group = cfg.mobility_group
    if not group.attackers_move and not group.users_move:
        return replace(scenario, time_s=scenario.time_s + dt,
                       step_count=scenario.step_count + 1)

    rng = seeded_rng(scenario.seed, _TAG_MOBILITY, scenario.step_count)
    uav_pos = scenario.auth_uav().position
    new_nodes = []
    new_wps = list(scenario.user_waypoints)
    ui = 0
    for n in scenario.nodes:
        if n.role is Role.ATTACKER and group.attackers_move:
            new_nodes.append(_step_attacker(n, uav_pos, cfg.speed_mps, dt,
                                            scenario.buildings))
        elif n.role is Role.USER and group.users_move:
            stepped, wp = _step_user(n, scenario.user_waypoints[ui], cfg.speed_mps,
                                     dt, cfg.area_m, scenario.buildings, rng)
            new_nodes.append(stepped)
            new_wps[ui] = wp
            ui += 1
        else:
            new_nodes.append(n)

    return replace(
        scenario, time_s=scenario.time_s + dt, nodes=tuple(new_nodes),
        user_waypoints=tuple(new_wps), step_count=scenario.step_count + 1,
    )


def config_items(config: ScenarioConfig):
    """ScenarioConfig as ordered (key, value-string) pairs for metadata files."""
    return [
        ("num_users", str(config.num_users)),
        ("num_attackers", str(config.num_attackers)),
        ("num_small_cells", str(config.num_small_cells)),
        ("num_auth_uavs", str(config.num_auth_uavs)),
        ("attacker_power_dbm", f"{config.attacker_power_dbm:.9g}"),
        ("auth_uav_power_dbm", f"{config.auth_uav_power_dbm:.9g}"),
        ("small_cell_power_dbm", f"{config.small_cell_power_dbm:.9g}"),
        ("serving_distance_m", f"{config.serving_distance_m:.9g}"),
        ("mobility_group", config.mobility_group.value),
        ("speed_mps", f"{config.speed_mps:.9g}"),
        ("sim_time_s", f"{config.sim_time_s:.9g}"),
        ("area_x_m", f"{config.area_m[0]:.9g}"),
        ("area_y_m", f"{config.area_m[1]:.9g}"),
        ("small_cell_height_m", f"{config.small_cell_height_m:.9g}"),
        ("seed", str(config.seed)),
    ]


def config_from_items(items: dict) -> ScenarioConfig:
    return ScenarioConfig(
        num_users=int(items["num_users"]),
        num_attackers=int(items["num_attackers"]),
        num_small_cells=int(items["num_small_cells"]),
        num_auth_uavs=int(items["num_auth_uavs"]),
        attacker_power_dbm=float(items["attacker_power_dbm"]),
        auth_uav_power_dbm=float(items["auth_uav_power_dbm"]),
        small_cell_power_dbm=float(items["small_cell_power_dbm"]),
        serving_distance_m=float(items["serving_distance_m"]),
        mobility_group=MobilityGroup(items["mobility_group"]),
        speed_mps=float(items["speed_mps"]),
        sim_time_s=float(items["sim_time_s"]),
        area_m=(float(items["area_x_m"]), float(items["area_y_m"])),
        small_cell_height_m=float(items["small_cell_height_m"]),
        seed=int(items["seed"]),
    )


def export_scenario(scenario: Scenario, out_dir):
    """Write nodes.csv plus a key=value metadata file for one scenario."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "nodes.csv"), "w", newline="\n") as f:
        f.write("id,role,x,y,z,tx_power_dbm,serving_cell\n")
        for n in scenario.nodes:
            sc = "" if n.serving_cell is None else str(n.serving_cell)
            f.write(
                f"{n.id},{n.role.value},{n.position[0]:.9g},{n.position[1]:.9g},"
                f"{n.position[2]:.9g},{n.tx_power_dbm:.9g},{sc}\n"
            )
    with open(os.path.join(out_dir, "scenario.txt"), "w", newline="\n") as f:
        for k, v in config_items(scenario.config):
            f.write(f"{k}={v}\n")
        f.write(f"effective_seed={scenario.seed}\n")
        f.write(f"canonical={str(scenario.config.is_canonical).lower()}\n")
